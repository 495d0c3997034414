//! SGD and Adam parameter updates over flat parameter slices.
//!
//! L2 regularization enters as weight decay: SGD applies
//! `p <- p - lr·(g + l2·p)` directly; Adam adds `l2·p` to the gradient before
//! updating its moments. Parameters that must stay fixed (the PAD embedding
//! row) simply never receive gradient, and since they are zero their weight
//! decay term vanishes too.

use super::tensor::{num, Scalar};

/// One SGD step: `p <- p - lr·(g + l2·p)`.
pub fn sgd_step<F: Scalar>(params: &mut [F], grads: &[F], lr: F, l2: F) {
    debug_assert_eq!(params.len(), grads.len());
    for (p, &g) in params.iter_mut().zip(grads) {
        *p = *p - lr * (g + l2 * *p);
    }
}

/// First and second moment estimates for one parameter block.
#[derive(Debug, Clone)]
pub struct AdamMoments<F> {
    pub m: Vec<F>,
    pub v: Vec<F>,
}

impl<F: Scalar> AdamMoments<F> {
    pub fn zeros(len: usize) -> Self {
        AdamMoments {
            m: vec![F::zero(); len],
            v: vec![F::zero(); len],
        }
    }
}

/// Adam hyperparameters plus the shared step counter.
#[derive(Debug, Clone)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// One Adam step with bias correction for a single parameter block.
/// `t` is the 1-based global step count; `l2·p` is added to the gradient
/// before the moment updates.
pub fn adam_step<F: Scalar>(
    state: &mut AdamMoments<F>,
    t: u64,
    params: &mut [F],
    grads: &[F],
    lr: F,
    l2: F,
    cfg: &AdamConfig,
) {
    debug_assert_eq!(params.len(), grads.len());
    debug_assert_eq!(state.m.len(), params.len());
    debug_assert!(t >= 1);
    let beta1 = num::<F>(cfg.beta1);
    let beta2 = num::<F>(cfg.beta2);
    let eps = num::<F>(cfg.epsilon);
    let one = F::one();
    let bias1 = one - num::<F>(cfg.beta1.powi(t as i32));
    let bias2 = one - num::<F>(cfg.beta2.powi(t as i32));
    for i in 0..params.len() {
        let g = grads[i] + l2 * params[i];
        state.m[i] = beta1 * state.m[i] + (one - beta1) * g;
        state.v[i] = beta2 * state.v[i] + (one - beta2) * g * g;
        let m_hat = state.m[i] / bias1;
        let v_hat = state.v[i] / bias2;
        params[i] = params[i] - lr * m_hat / (v_hat.sqrt() + eps);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sgd_basic_updates() {
        let mut p = vec![1.0f64];
        sgd_step(&mut p, &[0.0], 0.1, 0.0);
        assert_eq!(p, vec![1.0]);

        sgd_step(&mut p, &[1.0], 0.1, 0.0);
        assert!((p[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn sgd_weight_decay_shrinks_monotonically() {
        let mut p = vec![1.0f64, -2.0];
        let mut prev = p.clone();
        for _ in 0..50 {
            sgd_step(&mut p, &[0.0, 0.0], 0.1, 0.01);
            assert!(p[0] < prev[0] && p[0] > 0.0);
            assert!(p[1] > prev[1] && p[1] < 0.0);
            prev = p.clone();
        }
    }

    #[test]
    fn adam_first_step_magnitude_is_lr() {
        // bias-corrected first step is lr·g/(|g| + eps·stuff) ~= lr·sign(g)
        for g in [0.5f64, -3.0, 100.0] {
            let mut p = vec![1.0f64];
            let mut state = AdamMoments::zeros(1);
            adam_step(&mut state, 1, &mut p, &[g], 0.1, 0.0, &AdamConfig::default());
            let delta = (p[0] - 1.0).abs();
            assert!(
                (delta - 0.1).abs() < 1e-6 * 0.1,
                "first-step magnitude {delta}"
            );
            assert_eq!((1.0 - p[0]).signum(), g.signum());
        }
    }

    #[test]
    fn adam_zero_gradient_leaves_params() {
        let mut p = vec![0.7f64, -0.3];
        let mut state = AdamMoments::zeros(2);
        for t in 1..=10 {
            adam_step(&mut state, t, &mut p, &[0.0, 0.0], 0.1, 0.0, &AdamConfig::default());
        }
        assert_eq!(p, vec![0.7, -0.3]);
    }

    #[test]
    fn adam_matches_scalar_reference_on_quadratic() {
        // independent scalar reference implementation of Adam minimizing p²
        let (lr, b1, b2, eps) = (0.1f64, 0.9, 0.999, 1e-8);
        let mut ref_p = 1.0f64;
        let (mut m, mut v) = (0.0f64, 0.0f64);
        let mut ref_traj = Vec::new();
        for t in 1..=100 {
            let g = 2.0 * ref_p;
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let m_hat = m / (1.0 - b1.powi(t));
            let v_hat = v / (1.0 - b2.powi(t));
            ref_p -= lr * m_hat / (v_hat.sqrt() + eps);
            ref_traj.push(ref_p);
        }

        let mut p = vec![1.0f64];
        let mut state = AdamMoments::zeros(1);
        for t in 1..=100 {
            let g = 2.0 * p[0];
            adam_step(&mut state, t, &mut p, &[g], lr, 0.0, &AdamConfig::default());
            assert!(
                (p[0] - ref_traj[(t - 1) as usize]).abs() < 1e-12,
                "diverged from reference at step {t}"
            );
        }
        assert!(p[0].abs() < 0.1, "p after 100 steps: {}", p[0]);
        // frozen endpoint of the reference trajectory
        assert!((p[0] - 0.002_936_675_681_102_549).abs() < 1e-12);
    }
}
