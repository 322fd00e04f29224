//! Gradient descent over products of unitary groups.
//!
//! Points are lists of unitary matrices. A tangent direction at `u` is a
//! Hermitian `H`, and the retraction is `u ↦ exp(iH) u`, so iterates stay
//! exactly unitary. Objectives supply their value together with the
//! Riemannian gradient: the Hermitian `Γ` with `d/dt f(exp(itH)u)|₀ = Re tr(HΓ)`
//! for every Hermitian `H`.

use crate::linalg::{self, CMat};

/// Step control: start at `initial_step`, halve on non-improvement, grow by
/// `1.5` after an accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct DescentConfig {
    pub iterations: usize,
    pub initial_step: f64,
    pub min_step: f64,
}

impl Default for DescentConfig {
    fn default() -> Self {
        Self {
            iterations: 60,
            initial_step: 0.1,
            min_step: 1e-10,
        }
    }
}

/// Retraction `exp(iH) u`.
pub fn retract(u: &CMat, h: &CMat) -> CMat {
    linalg::expi_hermitian(h) * u
}

/// Minimizes `objective` starting at `start`; returns the best point and its
/// value. Only improving steps are accepted, so the value never increases.
pub fn minimize<F>(start: Vec<CMat>, objective: F, config: &DescentConfig) -> (Vec<CMat>, f64)
where
    F: Fn(&[CMat]) -> (f64, Vec<CMat>),
{
    let mut point = start;
    let (mut value, mut grad) = objective(&point);
    let mut step = config.initial_step;
    for _ in 0..config.iterations {
        let gnorm = grad.iter().map(linalg::frobenius_sq).sum::<f64>().sqrt();
        if gnorm <= 1e-14 || step < config.min_step {
            break;
        }
        let trial: Vec<CMat> = point
            .iter()
            .zip(&grad)
            .map(|(u, g)| retract(u, &g.scale(-step / gnorm)))
            .collect();
        let (trial_value, trial_grad) = objective(&trial);
        if trial_value < value {
            point = trial;
            value = trial_value;
            grad = trial_grad;
            step *= 1.5;
        } else {
            step *= 0.5;
        }
    }
    (point, value)
}

/// Gradient of `u ↦ Re tr(G* u A u*)` summed over pairs `(G, A)`, evaluated
/// at `c = u A u*`: `Herm(i Σ (c G* - G* c))`.
pub fn linear_conjugation_gradient(pairs: &[(&CMat, CMat)]) -> CMat {
    let n = pairs.first().map_or(0, |p| p.0.nrows());
    let mut k = CMat::zeros(n, n);
    for (g, c) in pairs {
        let gs = g.adjoint();
        k += c * &gs - &gs * c;
    }
    linalg::hermitian_part(&(k * linalg::I))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{gaussian_matrix, haar_unitary_matrix, rng_for};

    fn phi(g: &CMat, a: &CMat, u: &CMat) -> f64 {
        linalg::real_inner(g, &(u * a * u.adjoint()))
    }

    #[test]
    fn linear_gradient_matches_finite_differences() {
        let mut rng = rng_for(11, 0);
        let n = 3;
        let g = gaussian_matrix(n, &mut rng);
        let a = gaussian_matrix(n, &mut rng);
        let u = haar_unitary_matrix(n, &mut rng);
        let c = &u * &a * u.adjoint();
        let grad = linear_conjugation_gradient(&[(&g, c)]);
        for _ in 0..5 {
            let h = linalg::hermitian_part(&gaussian_matrix(n, &mut rng));
            let eps = 1e-6;
            let plus = phi(&g, &a, &retract(&u, &h.scale(eps)));
            let minus = phi(&g, &a, &retract(&u, &h.scale(-eps)));
            let fd = (plus - minus) / (2.0 * eps);
            let analytic = linalg::real_inner(&h, &grad);
            assert!((fd - analytic).abs() < 1e-6, "fd {fd} vs {analytic}");
        }
    }

    #[test]
    fn descent_never_increases() {
        let mut rng = rng_for(12, 0);
        let g = gaussian_matrix(2, &mut rng);
        let a = gaussian_matrix(2, &mut rng);
        let start = vec![haar_unitary_matrix(2, &mut rng)];
        let objective = |us: &[CMat]| {
            let c = &us[0] * &a * us[0].adjoint();
            let v = linalg::real_inner(&g, &c);
            (v, vec![linear_conjugation_gradient(&[(&g, c)])])
        };
        let initial = objective(&start).0;
        let (point, value) = minimize(start, objective, &DescentConfig::default());
        assert!(value <= initial);
        assert!(linalg::unitary_deviation(&point[0]) < 1e-12);
    }
}
