//! Minimization of `‖Σᵢ ρᵢ(aᵢ)‖∞` over states supported on one block.
//!
//! For block `k` the problem reads
//!
//! ```text
//! min over densities D₁…D_m of  max_j |Σᵢ tr(Dᵢ aᵢⱼ)|
//! ```
//!
//! which is convex. The primal is solved by projected subgradient descent on
//! the density-matrix set (eigendecomposition plus simplex projection of the
//! spectrum). A matching lower bound comes from the dual
//!
//! ```text
//! max over ‖α‖₁ ≤ 1 of  Σᵢ λ_min(Herm(Σⱼ αⱼ aᵢⱼ))
//! ```
//!
//! which is concave and maximized by projected supergradient ascent. Any
//! feasible `α` gives a valid lower bound, so the reported interval is always
//! sound even when the iterations stop early.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::linalg::{self, CMat, ZERO};
use crate::random::{random_density, rng_for};

#[derive(Debug, Clone, PartialEq)]
pub struct StateSolverConfig {
    /// Subgradient iterations per restart.
    pub iterations: usize,
    /// Random restarts in addition to the maximally mixed start.
    pub restarts: usize,
    /// Supergradient iterations for the dual bound.
    pub dual_iterations: usize,
    pub seed: u64,
}

impl Default for StateSolverConfig {
    fn default() -> Self {
        Self {
            iterations: 500,
            restarts: 5,
            dual_iterations: 500,
            seed: 0,
        }
    }
}

/// Result of one block minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockStateOptimum {
    /// Best primal objective found (an upper bound on the minimum).
    pub value: f64,
    /// Certified lower bound from the dual.
    pub dual_lower: f64,
    /// Minimizing densities, one per tuple.
    pub densities: Vec<CMat>,
    /// Dual coefficients `α` attaining `dual_lower`.
    pub witness: Vec<Complex64>,
    /// Best value reached by each start (index 0 is the maximally mixed start).
    pub restart_values: Vec<f64>,
}

/// Problem data: `coeffs[i][j]` is block `k` of entry `j` of tuple `i`.
#[derive(Debug, Clone)]
pub struct BlockStateProblem {
    coeffs: Vec<Vec<CMat>>,
    dim: usize,
    entries: usize,
}

impl BlockStateProblem {
    /// Panics if the data is ragged; callers build it from validated tuples.
    pub fn new(coeffs: Vec<Vec<CMat>>) -> Self {
        let entries = coeffs.first().map_or(0, Vec::len);
        let dim = coeffs
            .first()
            .and_then(|row| row.first())
            .map_or(1, |b| b.nrows());
        assert!(
            coeffs
                .iter()
                .all(|row| row.len() == entries && row.iter().all(|b| b.nrows() == dim)),
            "ragged block-state problem"
        );
        Self {
            coeffs,
            dim,
            entries,
        }
    }

    pub fn tuples(&self) -> usize {
        self.coeffs.len()
    }

    pub fn entries(&self) -> usize {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(Σᵢ tr(Dᵢ aᵢⱼ))ⱼ`.
    pub fn values(&self, densities: &[CMat]) -> Vec<Complex64> {
        (0..self.entries)
            .map(|j| {
                self.coeffs
                    .iter()
                    .zip(densities)
                    .map(|(row, d)| linalg::trace(&(d * &row[j])))
                    .sum()
            })
            .collect()
    }

    pub fn objective(&self, densities: &[CMat]) -> f64 {
        crate::state::max_norm(&self.values(densities))
    }

    /// Dual function `Σᵢ λ_min(Herm(Σⱼ αⱼ aᵢⱼ))` and its supergradient.
    pub fn dual(&self, alpha: &[Complex64]) -> (f64, Vec<Complex64>) {
        let mut value = 0.0;
        let mut grad = vec![ZERO; self.entries];
        for row in &self.coeffs {
            let mut combo = CMat::zeros(self.dim, self.dim);
            for (a, coeff) in row.iter().zip(alpha) {
                combo += a * *coeff;
            }
            let (lambda, x) = linalg::min_eigenpair(&combo);
            value += lambda;
            for (g, a) in grad.iter_mut().zip(row) {
                let c = (x.adjoint() * a * &x)[(0, 0)];
                *g += c.conj();
            }
        }
        (value, grad)
    }

    /// Projected supergradient ascent on the dual, started from `start`.
    pub fn maximize_dual(&self, start: &[Complex64], iterations: usize) -> (f64, Vec<Complex64>) {
        let mut alpha = linalg::project_l1_ball(start, 1.0);
        let zero = vec![ZERO; self.entries];
        let (mut best, mut best_alpha) = (self.dual(&zero).0, zero);
        for t in 0..=iterations {
            let (value, grad) = self.dual(&alpha);
            if value > best {
                best = value;
                best_alpha = alpha.clone();
            }
            if t == iterations {
                break;
            }
            let gnorm = grad.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt();
            if gnorm == 0.0 {
                break;
            }
            let step = 1.0 / ((t + 1) as f64).sqrt() / gnorm;
            let moved: Vec<Complex64> =
                alpha.iter().zip(&grad).map(|(a, g)| a + g * step).collect();
            alpha = linalg::project_l1_ball(&moved, 1.0);
        }
        (best, best_alpha)
    }

    /// Projected subgradient descent from `start`, with Polyak steps toward
    /// `target` while the gap is positive and diminishing steps otherwise.
    pub fn descend(&self, start: Vec<CMat>, target: f64, iterations: usize) -> (f64, Vec<CMat>) {
        let mut d = start;
        let mut best = self.objective(&d);
        let mut best_d = d.clone();
        for t in 0..iterations {
            let values = self.values(&d);
            let f = crate::state::max_norm(&values);
            if f < best {
                best = f;
                best_d = d.clone();
            }
            if best <= 1e-14 {
                break;
            }
            // subgradient at the first maximizing coordinate
            let j = values
                .iter()
                .enumerate()
                .fold((0, -1.0), |acc, (j, v)| {
                    if v.norm() > acc.1 {
                        (j, v.norm())
                    } else {
                        acc
                    }
                })
                .0;
            let s = values[j];
            if s.norm() == 0.0 {
                break;
            }
            let phase = s.conj() / s.norm();
            let grads: Vec<CMat> = self
                .coeffs
                .iter()
                .map(|row| linalg::hermitian_part(&(&row[j] * phase)))
                .collect();
            let gsq: f64 = grads.iter().map(linalg::frobenius_sq).sum();
            if gsq <= 0.0 {
                break;
            }
            let polyak = (f - target) / gsq;
            let diminishing = 1.0 / ((t + 1) as f64).sqrt() / gsq.sqrt();
            let step = if polyak > 1e-15 { polyak } else { diminishing };
            d = d
                .iter()
                .zip(&grads)
                .map(|(di, gi)| linalg::project_density(&(di - gi.scale(step))))
                .collect();
        }
        let f = self.objective(&d);
        if f < best {
            best = f;
            best_d = d;
        }
        (best, best_d)
    }

    /// Full solve: dual bound first, then the maximally mixed start and
    /// `restarts` random starts, run concurrently. Ties go to the lowest
    /// start index.
    pub fn solve(&self, config: &StateSolverConfig) -> BlockStateOptimum {
        let n = self.dim;
        let mixed: Vec<CMat> = (0..self.tuples())
            .map(|_| CMat::identity(n, n).scale(1.0 / n as f64))
            .collect();

        // warm-start the dual at the subgradient phase of the mixed start
        let values = self.values(&mixed);
        let mut start = vec![ZERO; self.entries];
        if let Some((j, v)) =
            values
                .iter()
                .enumerate()
                .fold(None::<(usize, Complex64)>, |acc, (j, v)| match acc {
                    Some((_, best)) if best.norm() >= v.norm() => acc,
                    _ => Some((j, *v)),
                })
        {
            if v.norm() > 0.0 {
                start[j] = -v.conj() / v.norm();
            }
        }
        let (dual_lower, witness) = self.maximize_dual(&start, config.dual_iterations);
        let target = dual_lower.max(0.0);

        let runs: Vec<(f64, Vec<CMat>)> = (0..=config.restarts)
            .into_par_iter()
            .map(|r| {
                let init = if r == 0 {
                    mixed.clone()
                } else {
                    let mut rng = rng_for(config.seed, r as u64);
                    (0..self.tuples())
                        .map(|_| random_density(n, &mut rng))
                        .collect()
                };
                self.descend(init, target, config.iterations)
            })
            .collect();
        let restart_values: Vec<f64> = runs.iter().map(|r| r.0).collect();
        let (value, densities) = runs
            .into_iter()
            .reduce(|best, next| if next.0 < best.0 { next } else { best })
            .expect("at least one start");
        BlockStateOptimum {
            value,
            dual_lower: dual_lower.min(value),
            densities,
            witness,
            restart_values,
        }
    }
}
