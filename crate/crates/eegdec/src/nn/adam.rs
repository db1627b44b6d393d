//! Adam with bias-corrected moments. Moment state is kept in f64 regardless
//! of the working precision; the update itself is computed in f64 and cast
//! back, which keeps training bit-deterministic for a fixed batch order.

use super::tensor::{Scalar, Tensor};
use crate::error::{EegError, Result};

#[derive(Debug, Clone, Copy)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One Adam update of a single parameter tensor. `t` is the 1-based step
/// count used for bias correction.
#[allow(clippy::too_many_arguments)]
pub fn adam_step<F: Scalar>(
    name: &str,
    param: &mut Tensor<F>,
    grad: &Tensor<F>,
    m: &mut [f64],
    v: &mut [f64],
    t: u64,
    hp: &AdamHyper,
) -> Result<()> {
    if param.shape() != grad.shape() {
        return Err(EegError::ShapeMismatch(format!(
            "adam_step {name}: param {:?} vs grad {:?}",
            param.shape(),
            grad.shape()
        )));
    }
    if t == 0 {
        return Err(EegError::InvalidParameter("adam_step needs t >= 1".into()));
    }
    if !grad.all_finite() {
        return Err(EegError::Numeric(format!(
            "non-finite gradient for parameter {name}"
        )));
    }
    let bc1 = 1.0 - hp.beta1.powi(t as i32);
    let bc2 = 1.0 - hp.beta2.powi(t as i32);
    for (((p, &g), mi), vi) in param
        .data_mut()
        .iter_mut()
        .zip(grad.data())
        .zip(m.iter_mut())
        .zip(v.iter_mut())
    {
        let g = g.as_f64();
        *mi = hp.beta1 * *mi + (1.0 - hp.beta1) * g;
        *vi = hp.beta2 * *vi + (1.0 - hp.beta2) * g * g;
        let m_hat = *mi / bc1;
        let v_hat = *vi / bc2;
        let update = hp.lr * m_hat / (v_hat.sqrt() + hp.eps);
        *p = F::from_f64(p.as_f64() - update);
    }
    Ok(())
}

/// Moment buffers for every parameter of a network, in `param_names()` order.
pub struct AdamState {
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub t: u64,
}

impl AdamState {
    pub fn for_sizes(sizes: &[usize]) -> Self {
        Self {
            m: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            t: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut p = Tensor::<f64>::from_vec(&[3], vec![1.0, -2.0, 0.5]).unwrap();
        let g = Tensor::<f64>::zeros(&[3]);
        let mut m = vec![0.0; 3];
        let mut v = vec![0.0; 3];
        adam_step("p", &mut p, &g, &mut m, &mut v, 1, &AdamHyper::default()).unwrap();
        assert_eq!(p.data(), &[1.0, -2.0, 0.5]);
    }

    #[test]
    fn first_step_magnitude_is_lr() {
        let hp = AdamHyper::default();
        for &g in &[0.3f64, -2.0, 17.0] {
            let mut p = Tensor::<f64>::zeros(&[1]);
            let grad = Tensor::<f64>::from_vec(&[1], vec![g]).unwrap();
            let mut m = vec![0.0];
            let mut v = vec![0.0];
            adam_step("p", &mut p, &grad, &mut m, &mut v, 1, &hp).unwrap();
            let expected = hp.lr * g.abs() / (g.abs() + hp.eps);
            assert!(
                (p.data()[0].abs() - expected).abs() < 1e-12,
                "g={g}: step {} vs {expected}",
                p.data()[0].abs()
            );
        }
    }

    #[test]
    fn quadratic_bowl_converges() {
        let hp = AdamHyper {
            lr: 0.05,
            ..AdamHyper::default()
        };
        let mut p = Tensor::<f64>::from_vec(&[1], vec![1.0]).unwrap();
        let mut m = vec![0.0];
        let mut v = vec![0.0];
        for t in 1..=500u64 {
            let grad = Tensor::<f64>::from_vec(&[1], vec![p.data()[0]]).unwrap();
            adam_step("p", &mut p, &grad, &mut m, &mut v, t, &hp).unwrap();
        }
        assert!(p.data()[0].abs() < 1e-2, "ended at {}", p.data()[0]);
    }

    #[test]
    fn non_finite_gradient_is_rejected_by_name() {
        let mut p = Tensor::<f64>::zeros(&[1]);
        let g = Tensor::<f64>::from_vec(&[1], vec![f64::NAN]).unwrap();
        let mut m = vec![0.0];
        let mut v = vec![0.0];
        let err = adam_step("block1.conv.weight", &mut p, &g, &mut m, &mut v, 1, &AdamHyper::default())
            .unwrap_err();
        match err {
            crate::error::EegError::Numeric(msg) => {
                assert!(msg.contains("block1.conv.weight"))
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
