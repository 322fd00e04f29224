//! States and tracial states on a finite-dimensional C*-algebra.
//!
//! A state is `ρ(a) = Σₖ wₖ tr(Dₖ aₖ)` for convex block weights `w` and
//! density matrices `Dₖ`. Tracial states are the case `Dₖ = I/nₖ`; their
//! extreme points are the single-block normalized traces.

use num_complex::Complex64;

use crate::algebra::{Element, FdAlgebra, Tuple};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

const WEIGHT_TOL: f64 = 1e-12;
const DENSITY_TOL: f64 = 1e-9;

fn check_convex(weights: &[f64], expected: usize) -> Result<()> {
    if weights.len() != expected {
        return Err(Error::InvalidWeights(format!(
            "expected {expected} weights, got {}",
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < -WEIGHT_TOL) {
        return Err(Error::InvalidWeights(format!(
            "negative or non-finite weight {w}"
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_TOL.max(1e-10) {
        return Err(Error::InvalidWeights(format!("weights sum to {total}")));
    }
    Ok(())
}

/// `‖v‖∞` on `ℂⁿ`.
pub fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Convex combination of normalized block traces.
#[derive(Debug, Clone, PartialEq)]
pub struct TracialState {
    weights: Vec<f64>,
}

impl TracialState {
    pub fn new(algebra: &FdAlgebra, weights: Vec<f64>) -> Result<Self> {
        check_convex(&weights, algebra.num_blocks())?;
        Ok(Self { weights })
    }

    /// The normalized trace of block `k`, an extreme point of `T(A)`.
    pub fn extreme(algebra: &FdAlgebra, k: usize) -> Result<Self> {
        algebra.check_block(k)?;
        let mut weights = vec![0.0; algebra.num_blocks()];
        weights[k] = 1.0;
        Ok(Self { weights })
    }

    pub fn extreme_points(algebra: &FdAlgebra) -> Vec<Self> {
        algebra
            .maximal_ideals()
            .map(|k| Self::extreme(algebra, k).expect("block in range"))
            .collect()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn eval(&self, a: &Element) -> Result<Complex64> {
        if a.num_blocks() != self.weights.len() {
            return Err(Error::InvalidArgument(format!(
                "trace over {} blocks applied to element with {}",
                self.weights.len(),
                a.num_blocks()
            )));
        }
        Ok(self
            .weights
            .iter()
            .zip(a.normalized_block_traces())
            .map(|(w, t)| t * *w)
            .sum())
    }

    pub fn eval_tuple(&self, t: &Tuple) -> Result<Vec<Complex64>> {
        t.entries().iter().map(|a| self.eval(a)).collect()
    }

    /// The same functional written as a [`State`].
    pub fn to_state(&self, algebra: &FdAlgebra) -> Result<State> {
        let densities = algebra
            .block_dims()
            .iter()
            .map(|&n| CMat::identity(n, n).scale(1.0 / n as f64))
            .collect();
        State::new(algebra, self.weights.clone(), densities)
    }
}

/// A state given by block weights and per-block density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    weights: Vec<f64>,
    densities: Vec<CMat>,
}

impl State {
    pub fn new(algebra: &FdAlgebra, weights: Vec<f64>, densities: Vec<CMat>) -> Result<Self> {
        check_convex(&weights, algebra.num_blocks())?;
        if densities.len() != algebra.num_blocks() {
            return Err(Error::InvalidState(format!(
                "expected {} densities, got {}",
                algebra.num_blocks(),
                densities.len()
            )));
        }
        for (k, (d, &n)) in densities.iter().zip(algebra.block_dims()).enumerate() {
            check_density(d, n).map_err(|msg| Error::InvalidState(format!("block {k}: {msg}")))?;
        }
        Ok(Self { weights, densities })
    }

    /// A state supported on block `k` only, i.e. vanishing on ideal `k`.
    /// The other blocks carry maximally mixed densities with zero weight.
    pub fn on_block(algebra: &FdAlgebra, k: usize, density: CMat) -> Result<Self> {
        algebra.check_block(k)?;
        let mut weights = vec![0.0; algebra.num_blocks()];
        weights[k] = 1.0;
        let densities = algebra
            .block_dims()
            .iter()
            .enumerate()
            .map(|(j, &n)| {
                if j == k {
                    density.clone()
                } else {
                    CMat::identity(n, n).scale(1.0 / n as f64)
                }
            })
            .collect();
        Self::new(algebra, weights, densities)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn densities(&self) -> &[CMat] {
        &self.densities
    }

    pub fn density(&self, k: usize) -> &CMat {
        &self.densities[k]
    }

    pub fn eval(&self, a: &Element) -> Result<Complex64> {
        if a.dims() != self.dims() {
            return Err(Error::ShapeMismatch {
                expected: self.dims(),
                found: a.dims(),
            });
        }
        Ok(self
            .weights
            .iter()
            .zip(&self.densities)
            .zip(a.blocks())
            .map(|((w, d), b)| linalg::trace(&(d * b)) * *w)
            .sum())
    }

    /// Coordinatewise evaluation `ρ(a) = (ρ(a₁), …, ρ(aₙ))`.
    pub fn eval_tuple(&self, t: &Tuple) -> Result<Vec<Complex64>> {
        t.entries().iter().map(|a| self.eval(a)).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.densities.iter().map(|d| d.nrows()).collect()
    }

    /// Whether the state factors through the quotient by ideal `k`, i.e. all
    /// weight sits on block `k`.
    pub fn vanishes_on_ideal(&self, k: usize) -> bool {
        self.weights
            .iter()
            .enumerate()
            .all(|(j, &w)| j == k || w.abs() <= WEIGHT_TOL)
    }

    pub(crate) fn from_parts_unchecked(weights: Vec<f64>, densities: Vec<CMat>) -> Self {
        Self { weights, densities }
    }
}

fn check_density(d: &CMat, n: usize) -> std::result::Result<(), String> {
    if d.nrows() != n || d.ncols() != n {
        return Err(format!(
            "density has shape {}x{}, expected {n}x{n}",
            d.nrows(),
            d.ncols()
        ));
    }
    let dev = linalg::hermitian_deviation(d);
    if dev > DENSITY_TOL {
        return Err(format!("density not Hermitian (deviation {dev:.3e})"));
    }
    let tr = linalg::trace(d);
    if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
        return Err(format!("density trace {tr}"));
    }
    let min = linalg::eigh(d).0[0];
    if min < -DENSITY_TOL {
        return Err(format!("density not positive (min eigenvalue {min:.3e})"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ONE, ZERO};

    #[test]
    fn unit_evaluates_to_one() {
        let alg = FdAlgebra::new(vec![2, 3]).unwrap();
        let rho = TracialState::new(&alg, vec![0.25, 0.75]).unwrap();
        let t = Tuple::new(vec![alg.unit(), alg.unit()]).unwrap();
        let vals = rho.to_state(&alg).unwrap().eval_tuple(&t).unwrap();
        for v in vals {
            assert!((v - ONE).norm() < 1e-14);
        }
        assert!((rho.eval(&alg.unit()).unwrap() - ONE).norm() < 1e-14);
    }

    #[test]
    fn pure_corner_state() {
        let alg = FdAlgebra::new(vec![2]).unwrap();
        let d = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
        let rho = State::on_block(&alg, 0, d).unwrap();
        let a = Element::new(vec![CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])]).unwrap();
        assert!((rho.eval(&a).unwrap() - ONE).norm() < 1e-14);
    }

    #[test]
    fn rejects_invalid_states() {
        let alg = FdAlgebra::new(vec![2]).unwrap();
        let not_psd = CMat::from_row_slice(2, 2, &[ONE * 2.0, ZERO, ZERO, -ONE]);
        assert!(State::on_block(&alg, 0, not_psd).is_err());
        assert!(TracialState::new(&alg, vec![0.5]).is_err());
        assert!(TracialState::extreme(&alg, 1).is_err());
    }

    #[test]
    fn ideal_support() {
        let alg = FdAlgebra::new(vec![2, 2]).unwrap();
        let rho = TracialState::extreme(&alg, 1)
            .unwrap()
            .to_state(&alg)
            .unwrap();
        assert!(rho.vanishes_on_ideal(1));
        assert!(!rho.vanishes_on_ideal(0));
    }
}
