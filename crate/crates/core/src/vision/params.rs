//! Seeded parameter generation for the forward math.
//!
//! Every tensor is drawn uniformly from [-0.1, 0.1] by a ChaCha8 stream
//! keyed per tensor: the stream seed is the FNV-1a hash of the global seed
//! (little-endian bytes) followed by the tensor name. The PRNG algorithm is
//! part of the reproducibility contract; the same (seed, config) always
//! yields bit-identical parameters.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hash::fnv1a64;

use super::ops::{BatchNorm, ConvKernel};

/// Channel-width configuration of the branch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisionConfig {
    /// Encoder widths per pyramid level, strictly increasing.
    pub encoder_channels: [usize; 4],
    /// Width of every fused level.
    pub fused_channels: usize,
    /// Width of every decoded level.
    pub decoder_channels: usize,
    /// Width of the transform layer's embedding.
    pub transform_channels: usize,
}

impl Default for VisionConfig {
    fn default() -> Self {
        VisionConfig {
            encoder_channels: [8, 16, 32, 64],
            fused_channels: 16,
            decoder_channels: 16,
            transform_channels: 16,
        }
    }
}

impl VisionConfig {
    pub fn validate(&self) -> Result<()> {
        for pair in self.encoder_channels.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::InvalidConfig(format!(
                    "encoder channel widths must strictly increase, got {:?}",
                    self.encoder_channels
                )));
            }
        }
        if self.encoder_channels[0] == 0
            || self.fused_channels == 0
            || self.decoder_channels == 0
            || self.transform_channels == 0
        {
            return Err(Error::InvalidConfig("channel widths must be positive".into()));
        }
        Ok(())
    }
}

/// Similarity-guided fusion parameters for one pyramid level.
#[derive(Debug, Clone, PartialEq)]
pub struct FuseParams {
    /// 3x3 convolution over the feature difference.
    pub diff: ConvKernel,
    /// 3x3 convolution over concat[f1, alpha, f2].
    pub merge: ConvKernel,
    pub norm: BatchNorm,
    /// Final 1x1 projection.
    pub out: ConvKernel,
}

/// One residual refinement block: t + ReLU(BN(Conv3x3(t))).
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualBlockParams {
    pub conv: ConvKernel,
    pub norm: BatchNorm,
}

/// Transform-layer parameters for the global summary path.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformParams {
    /// 1x1 embedding of the concatenated level-4 features.
    pub embed: ConvKernel,
    /// 1x1 pre-projection feeding the 3x3 block.
    pub pre: ConvKernel,
    pub conv: ConvKernel,
    pub norm: BatchNorm,
    /// 1x1 projection on the residual path.
    pub out: ConvKernel,
}

/// Every weight of the branch. Fields are public so tests and demos can
/// zero individual paths.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    pub config: VisionConfig,
    /// 1x1 projections applied after pooling, one per level.
    pub encoder: [ConvKernel; 4],
    pub fuse: [FuseParams; 4],
    /// Two stacked residual blocks refining the top fused level.
    pub refine: [ResidualBlockParams; 2],
    /// Stride-2 kernel-2 transposed convolutions, index 0 = top level.
    pub decode: [ConvKernel; 4],
    /// 1x1 head producing the mask logit.
    pub head: ConvKernel,
    pub transform: TransformParams,
}

fn tensor_rng(seed: u64, name: &str) -> ChaCha8Rng {
    let mut bytes = Vec::with_capacity(8 + name.len());
    bytes.extend_from_slice(&seed.to_le_bytes());
    bytes.extend_from_slice(name.as_bytes());
    ChaCha8Rng::seed_from_u64(fnv1a64(&bytes))
}

fn seeded_values(seed: u64, name: &str, len: usize) -> Vec<f64> {
    let mut rng = tensor_rng(seed, name);
    (0..len).map(|_| rng.gen_range(-0.1..=0.1)).collect()
}

fn seeded_conv(seed: u64, name: &str, out_c: usize, in_c: usize, kernel: usize) -> ConvKernel {
    ConvKernel {
        out_channels: out_c,
        in_channels: in_c,
        kernel_h: kernel,
        kernel_w: kernel,
        weight: seeded_values(seed, &format!("{name}.weight"), out_c * in_c * kernel * kernel),
        bias: seeded_values(seed, &format!("{name}.bias"), out_c),
    }
}

fn seeded_norm(seed: u64, name: &str, channels: usize) -> BatchNorm {
    BatchNorm {
        scale: seeded_values(seed, &format!("{name}.scale"), channels),
        shift: seeded_values(seed, &format!("{name}.shift"), channels),
        eps: 1e-5,
    }
}

impl ParamSet {
    /// Generate all parameters from a seed.
    pub fn seeded(seed: u64, config: VisionConfig) -> Result<Self> {
        config.validate()?;
        let enc = config.encoder_channels;
        let fused = config.fused_channels;
        let dec = config.decoder_channels;
        let trans = config.transform_channels;

        let encoder = std::array::from_fn(|l| {
            seeded_conv(seed, &format!("encoder.level{}.proj", l + 1), enc[l], 3, 1)
        });
        let fuse = std::array::from_fn(|l| {
            let name = format!("fuse.level{}", l + 1);
            FuseParams {
                diff: seeded_conv(seed, &format!("{name}.diff"), enc[l], enc[l], 3),
                merge: seeded_conv(seed, &format!("{name}.merge"), fused, 3 * enc[l], 3),
                norm: seeded_norm(seed, &format!("{name}.norm"), fused),
                out: seeded_conv(seed, &format!("{name}.out"), fused, fused, 1),
            }
        });
        let refine = std::array::from_fn(|i| ResidualBlockParams {
            conv: seeded_conv(seed, &format!("refine.block{}.conv", i + 1), fused, fused, 3),
            norm: seeded_norm(seed, &format!("refine.block{}.norm", i + 1), fused),
        });
        let decode = std::array::from_fn(|i| {
            let in_c = if i == 0 { fused } else { fused + dec };
            seeded_conv(seed, &format!("decode.stage{}.deconv", i + 1), dec, in_c, 2)
        });
        let head = seeded_conv(seed, "head.logit", 1, dec, 1);
        let transform = TransformParams {
            embed: seeded_conv(seed, "transform.embed", trans, 2 * enc[3], 1),
            pre: seeded_conv(seed, "transform.pre", trans, trans, 1),
            conv: seeded_conv(seed, "transform.conv", trans, trans, 3),
            norm: seeded_norm(seed, "transform.norm", trans),
            out: seeded_conv(seed, "transform.out", trans, trans, 1),
        };

        Ok(ParamSet {
            config,
            encoder,
            fuse,
            refine,
            decode,
            head,
            transform,
        })
    }

    /// All-zero weights and biases with identity normalization; used by
    /// tests exercising the residual identity cases.
    pub fn zeros(config: VisionConfig) -> Result<Self> {
        config.validate()?;
        let enc = config.encoder_channels;
        let fused = config.fused_channels;
        let dec = config.decoder_channels;
        let trans = config.transform_channels;

        let encoder = std::array::from_fn(|l| ConvKernel::zeros(enc[l], 3, 1));
        let fuse = std::array::from_fn(|l| FuseParams {
            diff: ConvKernel::zeros(enc[l], enc[l], 3),
            merge: ConvKernel::zeros(fused, 3 * enc[l], 3),
            norm: BatchNorm::identity(fused),
            out: ConvKernel::zeros(fused, fused, 1),
        });
        let refine = std::array::from_fn(|_| ResidualBlockParams {
            conv: ConvKernel::zeros(fused, fused, 3),
            norm: BatchNorm::identity(fused),
        });
        let decode = std::array::from_fn(|i| {
            let in_c = if i == 0 { fused } else { fused + dec };
            ConvKernel::zeros(dec, in_c, 2)
        });

        Ok(ParamSet {
            config,
            encoder,
            fuse,
            refine,
            decode,
            head: ConvKernel::zeros(1, dec, 1),
            transform: TransformParams {
                embed: ConvKernel::zeros(trans, 2 * enc[3], 1),
                pre: ConvKernel::zeros(trans, trans, 1),
                conv: ConvKernel::zeros(trans, trans, 3),
                norm: BatchNorm::identity(trans),
                out: ConvKernel::zeros(trans, trans, 1),
            },
        })
    }

    /// Order-stable hash of every weight byte; equal fingerprints mean the
    /// two parameter sets are bit-identical.
    pub fn fingerprint(&self) -> u64 {
        fn push_conv(bytes: &mut Vec<u8>, k: &ConvKernel) {
            for v in k.weight.iter().chain(&k.bias) {
                bytes.extend_from_slice(&v.to_bits().to_le_bytes());
            }
        }
        let mut bytes = Vec::new();
        for k in &self.encoder {
            push_conv(&mut bytes, k);
        }
        for f in &self.fuse {
            push_conv(&mut bytes, &f.diff);
            push_conv(&mut bytes, &f.merge);
            push_conv(&mut bytes, &f.out);
            for v in f.norm.scale.iter().chain(&f.norm.shift) {
                bytes.extend_from_slice(&v.to_bits().to_le_bytes());
            }
        }
        for r in &self.refine {
            push_conv(&mut bytes, &r.conv);
        }
        for d in &self.decode {
            push_conv(&mut bytes, d);
        }
        push_conv(&mut bytes, &self.head);
        push_conv(&mut bytes, &self.transform.embed);
        push_conv(&mut bytes, &self.transform.pre);
        push_conv(&mut bytes, &self.transform.conv);
        push_conv(&mut bytes, &self.transform.out);
        fnv1a64(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_params_are_reproducible() {
        let a = ParamSet::seeded(7, VisionConfig::default()).unwrap();
        let b = ParamSet::seeded(7, VisionConfig::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn different_seeds_differ() {
        let a = ParamSet::seeded(7, VisionConfig::default()).unwrap();
        let b = ParamSet::seeded(8, VisionConfig::default()).unwrap();
        assert_ne!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn weights_stay_in_init_range() {
        let params = ParamSet::seeded(3, VisionConfig::default()).unwrap();
        for k in &params.fuse {
            assert!(k.merge.weight.iter().all(|v| (-0.1..=0.1).contains(v)));
        }
    }

    #[test]
    fn non_increasing_widths_are_rejected() {
        let config = VisionConfig {
            encoder_channels: [8, 8, 32, 64],
            ..VisionConfig::default()
        };
        assert!(ParamSet::seeded(0, config).is_err());
    }
}
