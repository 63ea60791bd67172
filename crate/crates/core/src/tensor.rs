//! Dense row-major tensors and discrete Fourier transforms along chosen axes.
//!
//! Transform convention: the forward transform is unnormalized,
//! `X[k] = Σ_n x[n]·exp(−2πi·kn/N)`, and the inverse carries the `1/N`
//! factor for every transformed axis.

use std::cell::RefCell;
use std::fmt;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{arg_err, Result};

fn numel(shape: &[usize]) -> usize {
    shape.iter().product()
}

/// Real tensor in row-major layout.
#[derive(Clone, PartialEq)]
pub struct RealTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

/// Complex tensor in row-major layout.
#[derive(Clone, PartialEq)]
pub struct ComplexTensor {
    shape: Vec<usize>,
    data: Vec<Complex64>,
}

macro_rules! tensor_common {
    ($ty:ident, $elem:ty) => {
        impl $ty {
            pub fn new(shape: Vec<usize>, data: Vec<$elem>) -> Result<Self> {
                if numel(&shape) != data.len() {
                    return arg_err(format!(
                        "shape {:?} needs {} elements, got {}",
                        shape,
                        numel(&shape),
                        data.len()
                    ));
                }
                Ok(Self { shape, data })
            }

            pub fn zeros(shape: &[usize]) -> Self {
                Self {
                    shape: shape.to_vec(),
                    data: vec![<$elem>::default(); numel(shape)],
                }
            }

            pub fn shape(&self) -> &[usize] {
                &self.shape
            }

            pub fn rank(&self) -> usize {
                self.shape.len()
            }

            pub fn len(&self) -> usize {
                self.data.len()
            }

            pub fn is_empty(&self) -> bool {
                self.data.is_empty()
            }

            pub fn data(&self) -> &[$elem] {
                &self.data
            }

            pub fn data_mut(&mut self) -> &mut [$elem] {
                &mut self.data
            }

            pub fn into_data(self) -> Vec<$elem> {
                self.data
            }

            /// Row-major flat offset of a multi-index.
            pub fn offset(&self, index: &[usize]) -> usize {
                debug_assert_eq!(index.len(), self.shape.len());
                index
                    .iter()
                    .zip(&self.shape)
                    .fold(0, |acc, (&i, &n)| acc * n + i)
            }

            pub fn get(&self, index: &[usize]) -> $elem {
                self.data[self.offset(index)]
            }

            pub fn set(&mut self, index: &[usize], value: $elem) {
                let o = self.offset(index);
                self.data[o] = value;
            }

            pub fn reshape(self, shape: Vec<usize>) -> Result<Self> {
                Self::new(shape, self.data)
            }
        }
    };
}

tensor_common!(RealTensor, f64);
tensor_common!(ComplexTensor, Complex64);

impl RealTensor {
    pub fn from_fn(shape: &[usize], mut f: impl FnMut(usize) -> f64) -> Self {
        Self {
            shape: shape.to_vec(),
            data: (0..numel(shape)).map(&mut f).collect(),
        }
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            shape: vec![1],
            data: vec![value],
        }
    }

    pub fn to_complex(&self) -> ComplexTensor {
        ComplexTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn dot(&self, other: &RealTensor) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }
}

impl ComplexTensor {
    pub fn from_fn(shape: &[usize], mut f: impl FnMut(usize) -> Complex64) -> Self {
        Self {
            shape: shape.to_vec(),
            data: (0..numel(shape)).map(&mut f).collect(),
        }
    }

    pub fn real_part(&self) -> RealTensor {
        RealTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| z.re).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Real inner product `Re Σ conj(a)·b`, i.e. the dot product on the
    /// interleaved (re, im) representation.
    pub fn dot(&self, other: &ComplexTensor) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

impl fmt::Debug for RealTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealTensor")
            .field("shape", &self.shape)
            .field("data", &self.data)
            .finish()
    }
}

impl fmt::Debug for ComplexTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ComplexTensor")
            .field("shape", &self.shape)
            .field("data", &self.data)
            .finish()
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn check_axes(shape: &[usize], axes: &[usize]) -> Result<()> {
    for &a in axes {
        if a >= shape.len() {
            return arg_err(format!("axis {a} out of range for rank {}", shape.len()));
        }
        if shape[a] == 0 {
            return arg_err(format!("axis {a} has zero extent"));
        }
    }
    Ok(())
}

/// Unnormalized transform of `data` (row-major, `shape`) along `axis`, in place.
fn transform_axis(data: &mut [Complex64], shape: &[usize], axis: usize, direction: FftDirection) {
    let n = shape[axis];
    if n == 1 {
        return;
    }
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction));
    if inner == 1 {
        fft.process(data);
        return;
    }
    // Gather strided lines into a contiguous buffer, transform them in one call.
    let mut lines = vec![Complex64::default(); data.len()];
    for o in 0..outer {
        let block = &data[o * n * inner..(o + 1) * n * inner];
        let dst = &mut lines[o * n * inner..(o + 1) * n * inner];
        for j in 0..n {
            for i in 0..inner {
                dst[i * n + j] = block[j * inner + i];
            }
        }
    }
    fft.process(&mut lines);
    for o in 0..outer {
        let block = &mut data[o * n * inner..(o + 1) * n * inner];
        let src = &lines[o * n * inner..(o + 1) * n * inner];
        for j in 0..n {
            for i in 0..inner {
                block[j * inner + i] = src[i * n + j];
            }
        }
    }
}

fn transform(x: &ComplexTensor, axes: &[usize], direction: FftDirection) -> Result<ComplexTensor> {
    check_axes(&x.shape, axes)?;
    let mut out = x.clone();
    for &a in axes {
        transform_axis(&mut out.data, &x.shape, a, direction);
    }
    Ok(out)
}

/// Unnormalized forward DFT along `axes`.
pub fn dft(x: &ComplexTensor, axes: &[usize]) -> Result<ComplexTensor> {
    transform(x, axes, FftDirection::Forward)
}

/// Forward DFT of a real tensor (embedded with zero imaginary part).
pub fn dft_real(x: &RealTensor, axes: &[usize]) -> Result<ComplexTensor> {
    dft(&x.to_complex(), axes)
}

/// Inverse DFT along `axes` with `1/N` normalization per axis.
pub fn idft(x: &ComplexTensor, axes: &[usize]) -> Result<ComplexTensor> {
    let mut out = transform(x, axes, FftDirection::Inverse)?;
    let scale = 1.0 / axes.iter().map(|&a| x.shape[a] as f64).product::<f64>();
    for z in out.data.iter_mut() {
        *z *= scale;
    }
    Ok(out)
}

/// Conjugate-transpose of the forward DFT, i.e. the inverse transform
/// without normalization.
pub fn dft_adjoint(x: &ComplexTensor, axes: &[usize]) -> Result<ComplexTensor> {
    transform(x, axes, FftDirection::Inverse)
}
