//! Central finite differences, the independent oracle the backward passes
//! are verified against. Always computed in f64.

use super::layers::Mode;
use super::network::Network;
use super::tensor::Tensor;
use crate::error::Result;

/// Central differences (f(p+h) − f(p−h)) / 2h per coordinate.
pub fn finite_difference_grad(
    f: &mut dyn FnMut(&[f64]) -> f64,
    params: &[f64],
    h: f64,
) -> Vec<f64> {
    assert!(h > 0.0, "finite differences need h > 0");
    let mut work = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let orig = work[i];
        work[i] = orig + h;
        let fp = f(&work);
        work[i] = orig - h;
        let fm = f(&work);
        work[i] = orig;
        grad.push((fp - fm) / (2.0 * h));
    }
    grad
}

/// Relative error with a floor so near-zero coordinates are compared
/// absolutely at the same tolerance scale.
pub fn rel_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-4)
}

/// Compare the network's backward pass against finite differences on a fixed
/// train-mode forward (fixed dropout seed). The loss is a generic smooth
/// functional L(y) = Σ r·y + ½ Σ y², with r drawn from `loss_seed`.
/// Returns the maximum relative error over all parameter coordinates and,
/// when `check_input`, the input coordinates as well.
pub fn check_network_gradients(
    net: &Network<f64>,
    input: &Tensor<f64>,
    forward_seed: u64,
    loss_seed: u64,
    h: f64,
    check_input: bool,
) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    let loss_weights = |n: usize| -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(loss_seed);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    };
    let loss_of = |y: &Tensor<f64>, r: &[f64]| -> f64 {
        y.data()
            .iter()
            .zip(r)
            .map(|(&yv, &rv)| rv * yv + 0.5 * yv * yv)
            .sum()
    };

    // Analytic gradients.
    let mut net_run = net.clone();
    let mut x = input.clone();
    x.requires_grad = check_input;
    let (y, mut tape) = net_run.forward(&x, Mode::Train, forward_seed)?;
    let r = loss_weights(y.numel());
    let dy = Tensor::from_vec(
        y.shape(),
        y.data()
            .iter()
            .zip(&r)
            .map(|(&yv, &rv)| rv + yv)
            .collect(),
    )?;
    let grads = net_run.backward(&mut tape, &dy)?;

    let mut analytic = Vec::new();
    for g in &grads.params {
        analytic.extend(g.to_f64_vec());
    }
    if check_input {
        analytic.extend(grads.input.as_ref().expect("input grad requested").to_f64_vec());
    }

    // Finite differences over the same flattened vector.
    let p0 = net.params_flat();
    let n_params = p0.len();
    let mut flat = p0.clone();
    if check_input {
        flat.extend(input.to_f64_vec());
    }
    let mut eval = |coords: &[f64]| -> f64 {
        let mut net2 = net.clone();
        net2.set_params_flat(&coords[..n_params]).expect("flat set");
        let x = if check_input {
            Tensor::from_vec(input.shape(), coords[n_params..].to_vec()).expect("input coords")
        } else {
            input.clone()
        };
        let (y, _tape) = net2
            .forward(&x, Mode::Train, forward_seed)
            .expect("forward in finite differences");
        loss_of(&y, &r)
    };
    let numeric = finite_difference_grad(&mut eval, &flat, h);

    let mut worst = 0.0f64;
    for (&a, &b) in analytic.iter().zip(&numeric) {
        worst = worst.max(rel_error(a, b));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_of_half_norm_squared_is_identity() {
        let p = vec![0.3, -1.7, 2.5, 0.0];
        let mut f = |x: &[f64]| 0.5 * x.iter().map(|v| v * v).sum::<f64>();
        let g = finite_difference_grad(&mut f, &p, 1e-5);
        for (gi, pi) in g.iter().zip(&p) {
            assert!((gi - pi).abs() < 1e-8, "{gi} vs {pi}");
        }
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let p = vec![1.0, 2.0];
        let mut f = |_: &[f64]| 42.0;
        let g = finite_difference_grad(&mut f, &p, 1e-5);
        assert!(g.iter().all(|&v| v == 0.0));
    }
}
