//! Dense row-major tensor generic over the working precision. Production
//! training runs in f32; the f64 instantiation is the verification mode used
//! by the gradient checks.

use crate::error::{EegError, Result};

/// Floating-point scalar the network can compute in.
pub trait Scalar:
    num_traits::Float
    + std::ops::AddAssign
    + std::ops::SubAssign
    + std::ops::MulAssign
    + std::fmt::Debug
    + std::fmt::Display
    + Default
    + Send
    + Sync
    + 'static
{
    fn from_f64(v: f64) -> Self;
    fn as_f64(self) -> f64;
}

impl Scalar for f32 {
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn as_f64(self) -> f64 {
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<F> {
    shape: Vec<usize>,
    data: Vec<F>,
    pub requires_grad: bool,
    pub grad: Option<Vec<F>>,
}

impl<F: Scalar> Tensor<F> {
    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![F::zero(); n],
            requires_grad: false,
            grad: None,
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<F>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(EegError::ShapeMismatch(format!(
                "shape {:?} needs {n} elements, got {}",
                shape,
                data.len()
            )));
        }
        Ok(Self {
            shape: shape.to_vec(),
            data,
            requires_grad: false,
            grad: None,
        })
    }

    pub fn from_f64_slice(shape: &[usize], data: &[f64]) -> Result<Self> {
        Self::from_vec(shape, data.iter().map(|&v| F::from_f64(v)).collect())
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [F] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<F> {
        self.data
    }

    /// Same data, new shape (element counts must match).
    pub fn reshaped(&self, shape: &[usize]) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != self.data.len() {
            return Err(EegError::ShapeMismatch(format!(
                "cannot reshape {:?} ({} elements) to {:?} ({n})",
                self.shape,
                self.data.len(),
                shape
            )));
        }
        Ok(Self {
            shape: shape.to_vec(),
            data: self.data.clone(),
            requires_grad: self.requires_grad,
            grad: None,
        })
    }

    pub fn map(&self, f: impl Fn(F) -> F) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
            requires_grad: false,
            grad: None,
        }
    }

    /// Element-wise sum of two same-shape tensors.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.shape != other.shape {
            return Err(EegError::ShapeMismatch(format!(
                "add: {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(Self {
            shape: self.shape.clone(),
            data,
            requires_grad: false,
            grad: None,
        })
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.data.iter().map(|v| v.as_f64()).collect()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_checks() {
        let t = Tensor::<f32>::from_vec(&[2, 3], vec![1.0; 6]).unwrap();
        assert_eq!(t.shape(), &[2, 3]);
        assert_eq!(t.numel(), 6);
        assert!(Tensor::<f32>::from_vec(&[2, 3], vec![1.0; 5]).is_err());
        let r = t.reshaped(&[3, 2]).unwrap();
        assert_eq!(r.shape(), &[3, 2]);
        assert!(t.reshaped(&[4, 2]).is_err());
    }

    #[test]
    fn add_requires_same_shape() {
        let a = Tensor::<f64>::from_vec(&[2], vec![1.0, 2.0]).unwrap();
        let b = Tensor::<f64>::from_vec(&[2], vec![3.0, 4.0]).unwrap();
        assert_eq!(a.add(&b).unwrap().data(), &[4.0, 6.0]);
        let c = Tensor::<f64>::zeros(&[3]);
        assert!(a.add(&c).is_err());
    }
}
