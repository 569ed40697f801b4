//! Low-level tensor operations: convolution, transposed convolution,
//! pooling, normalization and activations.

use crate::error::{Error, Result};

use super::tensor::{shape_mismatch, FeatureTensor};

/// Convolution weights, laid out `[out_channel][in_channel][ky][kx]`
/// with one bias per output channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvKernel {
    pub out_channels: usize,
    pub in_channels: usize,
    pub kernel_h: usize,
    pub kernel_w: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl ConvKernel {
    pub fn zeros(out_channels: usize, in_channels: usize, kernel: usize) -> Self {
        ConvKernel {
            out_channels,
            in_channels,
            kernel_h: kernel,
            kernel_w: kernel,
            weight: vec![0.0; out_channels * in_channels * kernel * kernel],
            bias: vec![0.0; out_channels],
        }
    }

    #[inline]
    pub fn get(&self, o: usize, i: usize, ky: usize, kx: usize) -> f64 {
        self.weight[((o * self.in_channels + i) * self.kernel_h + ky) * self.kernel_w + kx]
    }

    pub fn set(&mut self, o: usize, i: usize, ky: usize, kx: usize, value: f64) {
        self.weight[((o * self.in_channels + i) * self.kernel_h + ky) * self.kernel_w + kx] = value;
    }
}

/// Inference-mode batch normalization with fixed affine parameters and unit
/// running statistics (mean 0, variance 1).
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm {
    pub scale: Vec<f64>,
    pub shift: Vec<f64>,
    pub eps: f64,
}

impl BatchNorm {
    /// Identity normalization (scale 1, shift 0) up to the epsilon term.
    pub fn identity(channels: usize) -> Self {
        BatchNorm {
            scale: vec![1.0; channels],
            shift: vec![0.0; channels],
            eps: 1e-5,
        }
    }

    pub fn apply(&self, input: &FeatureTensor) -> Result<FeatureTensor> {
        if input.channels() != self.scale.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} channels", self.scale.len()),
                found: format!("{}", input.channels()),
            });
        }
        let denom = (1.0 + self.eps).sqrt();
        let (c_n, h, w) = input.shape();
        let mut out = FeatureTensor::zeros(c_n, h, w);
        for c in 0..c_n {
            let scale = self.scale[c] / denom;
            let shift = self.shift[c];
            for y in 0..h {
                for x in 0..w {
                    out.set(c, y, x, scale * input.get(c, y, x) + shift);
                }
            }
        }
        Ok(out)
    }
}

/// Standard cross-correlation. Output dims are
/// `floor((in + 2*padding - kernel) / stride) + 1` per axis.
pub fn conv2d(
    input: &FeatureTensor,
    kernel: &ConvKernel,
    stride: usize,
    padding: usize,
) -> Result<FeatureTensor> {
    if kernel.in_channels != input.channels() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} input channels", kernel.in_channels),
            found: format!("{}", input.channels()),
        });
    }
    if stride == 0 {
        return Err(Error::ShapeMismatch {
            expected: "stride >= 1".into(),
            found: "0".into(),
        });
    }
    let (in_c, in_h, in_w) = input.shape();
    let padded_h = in_h + 2 * padding;
    let padded_w = in_w + 2 * padding;
    if padded_h < kernel.kernel_h || padded_w < kernel.kernel_w {
        return Err(Error::ShapeMismatch {
            expected: format!("input at least {}x{}", kernel.kernel_h, kernel.kernel_w),
            found: format!("{padded_h}x{padded_w} after padding"),
        });
    }
    let out_h = (padded_h - kernel.kernel_h) / stride + 1;
    let out_w = (padded_w - kernel.kernel_w) / stride + 1;
    let mut out = FeatureTensor::zeros(kernel.out_channels, out_h, out_w);

    for o in 0..kernel.out_channels {
        for oy in 0..out_h {
            for ox in 0..out_w {
                let mut acc = kernel.bias[o];
                for i in 0..in_c {
                    for ky in 0..kernel.kernel_h {
                        let iy = (oy * stride + ky) as i64 - padding as i64;
                        if iy < 0 || iy >= in_h as i64 {
                            continue;
                        }
                        for kx in 0..kernel.kernel_w {
                            let ix = (ox * stride + kx) as i64 - padding as i64;
                            if ix < 0 || ix >= in_w as i64 {
                                continue;
                            }
                            acc += input.get(i, iy as usize, ix as usize) * kernel.get(o, i, ky, kx);
                        }
                    }
                }
                out.set(o, oy, ox, acc);
            }
        }
    }
    Ok(out)
}

/// Transposed convolution (no padding). Output dims are
/// `(in - 1) * stride + kernel` per axis; with stride 2 and kernel 2 this
/// exactly doubles the spatial dims.
pub fn conv_transpose2d(
    input: &FeatureTensor,
    kernel: &ConvKernel,
    stride: usize,
) -> Result<FeatureTensor> {
    if kernel.in_channels != input.channels() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} input channels", kernel.in_channels),
            found: format!("{}", input.channels()),
        });
    }
    let (in_c, in_h, in_w) = input.shape();
    let out_h = (in_h - 1) * stride + kernel.kernel_h;
    let out_w = (in_w - 1) * stride + kernel.kernel_w;
    let mut out = FeatureTensor::zeros(kernel.out_channels, out_h, out_w);

    for o in 0..kernel.out_channels {
        for y in 0..out_h {
            for x in 0..out_w {
                out.set(o, y, x, kernel.bias[o]);
            }
        }
        for i in 0..in_c {
            for y in 0..in_h {
                for x in 0..in_w {
                    let v = input.get(i, y, x);
                    for ky in 0..kernel.kernel_h {
                        for kx in 0..kernel.kernel_w {
                            let oy = y * stride + ky;
                            let ox = x * stride + kx;
                            let cur = out.get(o, oy, ox);
                            out.set(o, oy, ox, cur + v * kernel.get(o, i, ky, kx));
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Non-overlapping average pooling by an integer factor; dims must divide.
pub fn avg_pool(input: &FeatureTensor, factor: usize) -> Result<FeatureTensor> {
    let (c_n, h, w) = input.shape();
    if factor == 0 || h % factor != 0 || w % factor != 0 {
        return Err(Error::NotDivisible {
            width: w,
            height: h,
            divisor: factor,
        });
    }
    let (out_h, out_w) = (h / factor, w / factor);
    let norm = 1.0 / (factor * factor) as f64;
    let mut out = FeatureTensor::zeros(c_n, out_h, out_w);
    for c in 0..c_n {
        for oy in 0..out_h {
            for ox in 0..out_w {
                let mut acc = 0.0;
                for dy in 0..factor {
                    for dx in 0..factor {
                        acc += input.get(c, oy * factor + dy, ox * factor + dx);
                    }
                }
                out.set(c, oy, ox, acc * norm);
            }
        }
    }
    Ok(out)
}

/// Nearest-neighbor upsampling to an arbitrary target size.
pub fn upsample_nearest(input: &FeatureTensor, out_h: usize, out_w: usize) -> FeatureTensor {
    let (c_n, in_h, in_w) = input.shape();
    let mut out = FeatureTensor::zeros(c_n, out_h, out_w);
    for c in 0..c_n {
        for y in 0..out_h {
            let sy = (y * in_h) / out_h;
            for x in 0..out_w {
                let sx = (x * in_w) / out_w;
                out.set(c, y, x, input.get(c, sy, sx));
            }
        }
    }
    out
}

pub fn relu(input: &FeatureTensor) -> FeatureTensor {
    input.map(|v| v.max(0.0))
}

pub fn tanh(input: &FeatureTensor) -> FeatureTensor {
    input.map(f64::tanh)
}

/// Numerically stable logistic sigmoid.
pub fn sigmoid_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Per-location cosine similarity across channels; locations where either
/// column is the zero vector yield 0. Output is a 1-channel map clamped to
/// [-1, 1] against floating-point drift.
pub fn cosine_map(a: &FeatureTensor, b: &FeatureTensor) -> Result<FeatureTensor> {
    if !a.same_shape(b) {
        return Err(shape_mismatch(a, b));
    }
    let (c_n, h, w) = a.shape();
    let mut out = FeatureTensor::zeros(1, h, w);
    for y in 0..h {
        for x in 0..w {
            let mut dot = 0.0;
            let mut na = 0.0;
            let mut nb = 0.0;
            for c in 0..c_n {
                let va = a.get(c, y, x);
                let vb = b.get(c, y, x);
                dot += va * vb;
                na += va * va;
                nb += vb * vb;
            }
            let value = if na == 0.0 || nb == 0.0 {
                0.0
            } else {
                (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0)
            };
            out.set(0, y, x, value);
        }
    }
    Ok(out)
}

/// Add a 1-channel map onto every channel of `t`.
pub fn broadcast_add(map: &FeatureTensor, t: &FeatureTensor) -> Result<FeatureTensor> {
    if map.channels() != 1 || map.height() != t.height() || map.width() != t.width() {
        return Err(shape_mismatch(t, map));
    }
    let (c_n, h, w) = t.shape();
    let mut out = FeatureTensor::zeros(c_n, h, w);
    for c in 0..c_n {
        for y in 0..h {
            for x in 0..w {
                out.set(c, y, x, t.get(c, y, x) + map.get(0, y, x));
            }
        }
    }
    Ok(out)
}
