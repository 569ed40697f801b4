//! Dense rank-3 tensors and derived containers for the forward math.

use crate::error::{Error, Result};

/// Channels-first dense tensor (channels x height x width), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl FeatureTensor {
    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        FeatureTensor {
            channels,
            height,
            width,
            data: vec![0.0; channels * height * width],
        }
    }

    /// Build from a flat buffer; length must equal channels*height*width and
    /// every entry must be finite.
    pub fn from_data(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != channels * height * width {
            return Err(Error::ShapeMismatch {
                expected: format!("{} values for {channels}x{height}x{width}", channels * height * width),
                found: format!("{}", data.len()),
            });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("tensor".into()));
        }
        Ok(FeatureTensor {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, c: usize, y: usize, x: usize, value: f64) {
        self.data[(c * self.height + y) * self.width + x] = value;
    }

    pub fn same_shape(&self, other: &FeatureTensor) -> bool {
        self.shape() == other.shape()
    }

    /// Elementwise map into a new tensor.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> FeatureTensor {
        FeatureTensor {
            channels: self.channels,
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise sum; shapes must match.
    pub fn add(&self, other: &FeatureTensor) -> Result<FeatureTensor> {
        self.zip(other, |a, b| a + b)
    }

    /// Elementwise difference; shapes must match.
    pub fn sub(&self, other: &FeatureTensor) -> Result<FeatureTensor> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &FeatureTensor, f: impl Fn(f64, f64) -> f64) -> Result<FeatureTensor> {
        if !self.same_shape(other) {
            return Err(shape_mismatch(self, other));
        }
        Ok(FeatureTensor {
            channels: self.channels,
            height: self.height,
            width: self.width,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Channel-wise concatenation; spatial dims must match.
    pub fn concat(parts: &[&FeatureTensor]) -> Result<FeatureTensor> {
        let first = parts.first().ok_or_else(|| Error::ShapeMismatch {
            expected: "at least one tensor".into(),
            found: "none".into(),
        })?;
        let (h, w) = (first.height, first.width);
        let mut channels = 0;
        for part in parts {
            if part.height != h || part.width != w {
                return Err(shape_mismatch(first, part));
            }
            channels += part.channels;
        }
        let mut data = Vec::with_capacity(channels * h * w);
        for part in parts {
            data.extend_from_slice(&part.data);
        }
        Ok(FeatureTensor {
            channels,
            height: h,
            width: w,
            data,
        })
    }
}

pub(crate) fn shape_mismatch(expected: &FeatureTensor, found: &FeatureTensor) -> Error {
    Error::ShapeMismatch {
        expected: format!("{:?}", expected.shape()),
        found: format!("{:?}", found.shape()),
    }
}

/// Strides of the four pyramid levels relative to the input image.
pub const PYRAMID_STRIDES: [usize; 4] = [4, 8, 16, 32];

/// Four-level feature pyramid at strides 4/8/16/32.
#[derive(Debug, Clone)]
pub struct FeaturePyramid {
    levels: [FeatureTensor; 4],
}

impl FeaturePyramid {
    /// Validates the halving and channel-growth contracts between levels.
    pub fn new(levels: [FeatureTensor; 4]) -> Result<Self> {
        for i in 0..3 {
            let (c0, h0, w0) = levels[i].shape();
            let (c1, h1, w1) = levels[i + 1].shape();
            if h1 != h0.div_ceil(2) || w1 != w0.div_ceil(2) {
                return Err(Error::ShapeMismatch {
                    expected: format!("level {} of {}x{}", i + 2, h0.div_ceil(2), w0.div_ceil(2)),
                    found: format!("{h1}x{w1}"),
                });
            }
            if c1 <= c0 {
                return Err(Error::ShapeMismatch {
                    expected: format!("level {} channels > {c0}", i + 2),
                    found: format!("{c1}"),
                });
            }
        }
        Ok(FeaturePyramid { levels })
    }

    pub fn levels(&self) -> &[FeatureTensor; 4] {
        &self.levels
    }

    pub fn level(&self, index: usize) -> &FeatureTensor {
        &self.levels[index]
    }
}

/// Per-pixel change probabilities in [0, 1].
#[derive(Debug, Clone)]
pub struct ProbMask {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl ProbMask {
    pub fn from_data(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::ShapeMismatch {
                expected: format!("{} probabilities", height * width),
                found: format!("{}", data.len()),
            });
        }
        if !data.iter().all(|&v| (0.0..=1.0).contains(&v)) {
            return Err(Error::NonFinite("probability mask".into()));
        }
        Ok(ProbMask {
            height,
            width,
            data,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.data[y * self.width + x]
    }
}
