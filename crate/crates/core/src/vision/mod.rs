//! Forward-only math of the vision-guided branch at desk scale.
//!
//! The pretrained backbone is replaced by [`stub_encode`], a deterministic
//! pooling + seeded 1x1 projection stand-in that preserves the downstream
//! interfaces: a four-level pyramid at strides 4/8/16/32, per-level
//! similarity-guided fusion, residual refinement of the top level,
//! progressive transposed-convolution decoding to stride 2, and a sigmoid
//! mask head upsampled back to image resolution. The refinement blocks are
//! likewise residual stand-ins for an externally defined layer. No training
//! path exists; all parameters come from [`ParamSet`].

mod ops;
mod params;
mod tensor;

pub use ops::{
    avg_pool, broadcast_add, conv2d, conv_transpose2d, cosine_map, relu, sigmoid_scalar, tanh,
    upsample_nearest, BatchNorm, ConvKernel,
};
pub use params::{FuseParams, ParamSet, ResidualBlockParams, TransformParams, VisionConfig};
pub use tensor::{FeaturePyramid, FeatureTensor, ProbMask, PYRAMID_STRIDES};

use crate::error::{Error, Result};
use crate::mask::LabelMask;

/// Encode an RGB image tensor (3, H, W) into a four-level pyramid using
/// strided average pooling, a seeded 1x1 projection and a tanh
/// nonlinearity. Both temporal images must be encoded with the same
/// `params` to honor the shared-parameter contract.
pub fn stub_encode(image: &FeatureTensor, params: &ParamSet) -> Result<FeaturePyramid> {
    if image.channels() != 3 {
        return Err(Error::ShapeMismatch {
            expected: "3-channel image".into(),
            found: format!("{} channels", image.channels()),
        });
    }
    if !image.height().is_multiple_of(32) || !image.width().is_multiple_of(32) {
        return Err(Error::NotDivisible {
            width: image.width(),
            height: image.height(),
            divisor: 32,
        });
    }
    let mut levels = Vec::with_capacity(4);
    for (l, &stride) in PYRAMID_STRIDES.iter().enumerate() {
        let pooled = avg_pool(image, stride)?;
        let projected = conv2d(&pooled, &params.encoder[l], 1, 0)?;
        levels.push(tanh(&projected));
    }
    let levels: [FeatureTensor; 4] = levels.try_into().expect("exactly four levels");
    FeaturePyramid::new(levels)
}

/// Similarity-guided fusion of one pyramid level:
/// `alpha = cos(f1, f2) + Conv3x3(f2 - f1)` (the 1-channel cosine map is
/// broadcast across the convolution's channels), then
/// `Conv1x1(ReLU(BN(Conv3x3(concat[f1, alpha, f2]))))`.
pub fn fuse_level(f1: &FeatureTensor, f2: &FeatureTensor, level: &FuseParams) -> Result<FeatureTensor> {
    if !f1.same_shape(f2) {
        return Err(Error::ShapeMismatch {
            expected: format!("{:?}", f1.shape()),
            found: format!("{:?}", f2.shape()),
        });
    }
    let cos = cosine_map(f1, f2)?;
    let diff = conv2d(&f2.sub(f1)?, &level.diff, 1, 1)?;
    let alpha = broadcast_add(&cos, &diff)?;
    let merged = conv2d(&FeatureTensor::concat(&[f1, &alpha, f2])?, &level.merge, 1, 1)?;
    let activated = relu(&level.norm.apply(&merged)?);
    conv2d(&activated, &level.out, 1, 0)
}

/// The alpha map of [`fuse_level`] before merging, exposed for inspection
/// and tests.
pub fn fuse_alpha(f1: &FeatureTensor, f2: &FeatureTensor, level: &FuseParams) -> Result<FeatureTensor> {
    let cos = cosine_map(f1, f2)?;
    let diff = conv2d(&f2.sub(f1)?, &level.diff, 1, 1)?;
    broadcast_add(&cos, &diff)
}

/// Two stacked shape-preserving residual blocks,
/// `t <- t + ReLU(BN(Conv3x3(t)))` each. Stand-in for an externally
/// defined refinement layer.
pub fn refine_features(t: &FeatureTensor, params: &ParamSet) -> Result<FeatureTensor> {
    let mut out = t.clone();
    for block in &params.refine {
        out = residual_block(&out, block)?;
    }
    Ok(out)
}

/// One residual block of [`refine_features`].
pub fn residual_block(t: &FeatureTensor, block: &ResidualBlockParams) -> Result<FeatureTensor> {
    let conv = conv2d(t, &block.conv, 1, 1)?;
    t.add(&relu(&block.norm.apply(&conv)?))
}

/// Progressive decoding: the refined top level is upsampled by a stride-2
/// transposed convolution, then each lower level is concatenated with the
/// running decode and upsampled again. Returns the stride-2 feature map.
pub fn decode(fused: &[FeatureTensor; 4], params: &ParamSet) -> Result<FeatureTensor> {
    let refined = refine_features(&fused[3], params)?;
    let mut d = conv_transpose2d(&refined, &params.decode[0], 2)?;
    for (stage, level) in (1..4).zip([2usize, 1, 0]) {
        if d.height() != fused[level].height() || d.width() != fused[level].width() {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x{}", fused[level].height(), fused[level].width()),
                found: format!("{}x{}", d.height(), d.width()),
            });
        }
        let stacked = FeatureTensor::concat(&[&fused[level], &d])?;
        d = conv_transpose2d(&stacked, &params.decode[stage], 2)?;
    }
    Ok(d)
}

/// 1x1 logit head with sigmoid activation, followed by nearest-neighbor
/// upsampling to image resolution.
pub fn mask_head(d1: &FeatureTensor, params: &ParamSet, upsample_to: (usize, usize)) -> Result<ProbMask> {
    let logits = conv2d(d1, &params.head, 1, 0)?;
    let probs = logits.map(sigmoid_scalar);
    let (h, w) = upsample_to;
    let full = upsample_nearest(&probs, h, w);
    ProbMask::from_data(h, w, full.data().to_vec())
}

/// Transform layer of the global summary path:
/// `X1 = Conv1x1(concat[f4_1, f4_2])`,
/// `X2 = ConvBNReLU3x3(Conv1x1(X1))`, output `X1 + Conv1x1(X2)`.
pub fn transform_layer(
    f4_1: &FeatureTensor,
    f4_2: &FeatureTensor,
    params: &ParamSet,
) -> Result<FeatureTensor> {
    if !f4_1.same_shape(f4_2) {
        return Err(Error::ShapeMismatch {
            expected: format!("{:?}", f4_1.shape()),
            found: format!("{:?}", f4_2.shape()),
        });
    }
    let t = &params.transform;
    let x1 = conv2d(&FeatureTensor::concat(&[f4_1, f4_2])?, &t.embed, 1, 0)?;
    let pre = conv2d(&x1, &t.pre, 1, 0)?;
    let x2 = relu(&t.norm.apply(&conv2d(&pre, &t.conv, 1, 1)?)?);
    x1.add(&conv2d(&x2, &t.out, 1, 0)?)
}

/// Full fine-grained forward pass over two image tensors: shared encoding,
/// per-level fusion, decoding, mask head, and binarization into a
/// single-category change mask (changed pixels carry label code 1).
/// A pixel is changed iff its probability is strictly greater than
/// `threshold`.
pub fn forward_fine_grained(
    img1: &FeatureTensor,
    img2: &FeatureTensor,
    params: &ParamSet,
    threshold: f64,
) -> Result<(ProbMask, LabelMask)> {
    if !img1.same_shape(img2) {
        return Err(Error::ShapeMismatch {
            expected: format!("{:?}", img1.shape()),
            found: format!("{:?}", img2.shape()),
        });
    }
    let p1 = stub_encode(img1, params)?;
    let p2 = stub_encode(img2, params)?;
    let fused: Vec<FeatureTensor> = (0..4)
        .map(|l| fuse_level(p1.level(l), p2.level(l), &params.fuse[l]))
        .collect::<Result<_>>()?;
    let fused: [FeatureTensor; 4] = fused.try_into().expect("exactly four levels");
    let d1 = decode(&fused, params)?;
    let prob = mask_head(&d1, params, (img1.height(), img1.width()))?;

    let labels: Vec<u8> = prob.data().iter().map(|&p| u8::from(p > threshold)).collect();
    let mask = LabelMask::from_labels(img1.width() as u32, img1.height() as u32, labels)?;
    Ok((prob, mask))
}
