//! Loop-level oracles for the tensor operations and a straight-line
//! re-evaluation of the fusion and transform equations.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use changekit::vision::{BatchNorm, ConvKernel, FeatureTensor, FuseParams, TransformParams};

/// Quadruple-loop cross-correlation with explicit bounds checks.
pub fn conv2d_oracle(
    input: &FeatureTensor,
    kernel: &ConvKernel,
    stride: usize,
    padding: usize,
) -> FeatureTensor {
    let (in_c, in_h, in_w) = input.shape();
    assert_eq!(in_c, kernel.in_channels);
    let out_h = (in_h + 2 * padding - kernel.kernel_h) / stride + 1;
    let out_w = (in_w + 2 * padding - kernel.kernel_w) / stride + 1;
    let mut out = FeatureTensor::zeros(kernel.out_channels, out_h, out_w);
    for o in 0..kernel.out_channels {
        for oy in 0..out_h {
            for ox in 0..out_w {
                let mut acc = kernel.bias[o];
                for i in 0..in_c {
                    for ky in 0..kernel.kernel_h {
                        for kx in 0..kernel.kernel_w {
                            let iy = oy as i64 * stride as i64 + ky as i64 - padding as i64;
                            let ix = ox as i64 * stride as i64 + kx as i64 - padding as i64;
                            if iy >= 0 && ix >= 0 && (iy as usize) < in_h && (ix as usize) < in_w {
                                acc += input.get(i, iy as usize, ix as usize)
                                    * kernel.get(o, i, ky, kx);
                            }
                        }
                    }
                }
                out.set(o, oy, ox, acc);
            }
        }
    }
    out
}

/// Transposed convolution re-derived through zero stuffing: insert
/// stride-1 zeros between input pixels, pad by kernel-1, then run a plain
/// convolution with the spatially flipped kernel. Biases are added once
/// per output location.
pub fn conv_transpose2d_oracle(
    input: &FeatureTensor,
    kernel: &ConvKernel,
    stride: usize,
) -> FeatureTensor {
    let (in_c, in_h, in_w) = input.shape();
    let pad = kernel.kernel_h - 1;
    let stuffed_h = (in_h - 1) * stride + 1;
    let stuffed_w = (in_w - 1) * stride + 1;
    let mut stuffed = FeatureTensor::zeros(in_c, stuffed_h, stuffed_w);
    for c in 0..in_c {
        for y in 0..in_h {
            for x in 0..in_w {
                stuffed.set(c, y * stride, x * stride, input.get(c, y, x));
            }
        }
    }
    let mut flipped = ConvKernel::zeros(kernel.out_channels, kernel.in_channels, kernel.kernel_h);
    flipped.bias = kernel.bias.clone();
    for o in 0..kernel.out_channels {
        for i in 0..kernel.in_channels {
            for ky in 0..kernel.kernel_h {
                for kx in 0..kernel.kernel_w {
                    flipped.set(
                        o,
                        i,
                        kernel.kernel_h - 1 - ky,
                        kernel.kernel_w - 1 - kx,
                        kernel.get(o, i, ky, kx),
                    );
                }
            }
        }
    }
    conv2d_oracle(&stuffed, &flipped, 1, pad)
}

fn bn_oracle(input: &FeatureTensor, norm: &BatchNorm) -> FeatureTensor {
    let (c_n, h, w) = input.shape();
    let mut out = FeatureTensor::zeros(c_n, h, w);
    for c in 0..c_n {
        for y in 0..h {
            for x in 0..w {
                let v = norm.scale[c] * input.get(c, y, x) / (1.0 + norm.eps).sqrt()
                    + norm.shift[c];
                out.set(c, y, x, v);
            }
        }
    }
    out
}

fn relu_oracle(input: &FeatureTensor) -> FeatureTensor {
    input.map(|v| if v > 0.0 { v } else { 0.0 })
}

fn cosine_oracle(a: &FeatureTensor, b: &FeatureTensor) -> FeatureTensor {
    let (c_n, h, w) = a.shape();
    let mut out = FeatureTensor::zeros(1, h, w);
    for y in 0..h {
        for x in 0..w {
            let mut dot = 0.0f64;
            let mut na = 0.0f64;
            let mut nb = 0.0f64;
            for c in 0..c_n {
                dot += a.get(c, y, x) * b.get(c, y, x);
                na += a.get(c, y, x).powi(2);
                nb += b.get(c, y, x).powi(2);
            }
            if na > 0.0 && nb > 0.0 {
                out.set(0, y, x, dot / (na.sqrt() * nb.sqrt()));
            }
        }
    }
    out
}

/// Per-pixel cosine similarity recomputed with a scalar loop.
pub fn cosine_map_oracle(a: &FeatureTensor, b: &FeatureTensor) -> FeatureTensor {
    cosine_oracle(a, b)
}

/// Straight-line evaluation of the similarity-guided fusion equations.
pub fn fuse_level_oracle(
    f1: &FeatureTensor,
    f2: &FeatureTensor,
    level: &FuseParams,
) -> FeatureTensor {
    let cos = cosine_oracle(f1, f2);
    let diff = conv2d_oracle(&f2.sub(f1).unwrap(), &level.diff, 1, 1);
    // Broadcast the 1-channel cosine over the difference convolution.
    let (c_n, h, w) = diff.shape();
    let mut alpha = FeatureTensor::zeros(c_n, h, w);
    for c in 0..c_n {
        for y in 0..h {
            for x in 0..w {
                alpha.set(c, y, x, diff.get(c, y, x) + cos.get(0, y, x));
            }
        }
    }
    let concat = FeatureTensor::concat(&[f1, &alpha, f2]).unwrap();
    let merged = conv2d_oracle(&concat, &level.merge, 1, 1);
    let activated = relu_oracle(&bn_oracle(&merged, &level.norm));
    conv2d_oracle(&activated, &level.out, 1, 0)
}

/// Straight-line evaluation of the transform-layer equations.
pub fn transform_layer_oracle(
    f1: &FeatureTensor,
    f2: &FeatureTensor,
    t: &TransformParams,
) -> FeatureTensor {
    let x1 = conv2d_oracle(&FeatureTensor::concat(&[f1, f2]).unwrap(), &t.embed, 1, 0);
    let pre = conv2d_oracle(&x1, &t.pre, 1, 0);
    let x2 = relu_oracle(&bn_oracle(&conv2d_oracle(&pre, &t.conv, 1, 1), &t.norm));
    x1.add(&conv2d_oracle(&x2, &t.out, 1, 0)).unwrap()
}

/// One residual refinement step re-evaluated directly.
pub fn residual_block_oracle(
    t: &FeatureTensor,
    conv: &ConvKernel,
    norm: &BatchNorm,
) -> FeatureTensor {
    t.add(&relu_oracle(&bn_oracle(&conv2d_oracle(t, conv, 1, 1), norm)))
        .unwrap()
}

pub fn max_abs_diff(a: &FeatureTensor, b: &FeatureTensor) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Random tensor with entries in [-1, 1].
pub fn random_tensor(rng: &mut ChaCha8Rng, c: usize, h: usize, w: usize) -> FeatureTensor {
    let data = (0..c * h * w).map(|_| rng.gen_range(-1.0..1.0)).collect();
    FeatureTensor::from_data(c, h, w, data).expect("finite random data")
}

/// Random kernel with weights and biases in [-0.5, 0.5].
pub fn random_kernel(rng: &mut ChaCha8Rng, out_c: usize, in_c: usize, k: usize) -> ConvKernel {
    let mut kernel = ConvKernel::zeros(out_c, in_c, k);
    kernel.weight = (0..kernel.weight.len()).map(|_| rng.gen_range(-0.5..0.5)).collect();
    kernel.bias = (0..out_c).map(|_| rng.gen_range(-0.5..0.5)).collect();
    kernel
}

/// Random 3-channel image tensor with entries in [0, 1].
pub fn random_image(rng: &mut ChaCha8Rng, h: usize, w: usize) -> FeatureTensor {
    let data = (0..3 * h * w).map(|_| rng.gen_range(0.0..1.0)).collect();
    FeatureTensor::from_data(3, h, w, data).expect("finite random data")
}
