//! Verification of candidate maps `H: A → Z(A)` against the conditions that
//! force `H` to be the center-valued trace:
//!
//! * `H` is `Z(A)`-linear, positive and unital;
//! * (a) `τ ∘ H = τ` for every tracial state `τ`;
//! * (b) `H` maps every maximal ideal `M` into `M`.
//!
//! A candidate passing every check equals the center-valued trace, and the
//! verifier then returns the clock-and-shift mixing operator realizing it.

use num_complex::Complex64;
use rand::Rng;

use crate::algebra::{Element, FdAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{CMat, ONE, ZERO};
use crate::mixing::{weyl_averaging_operator, MixingOperator};
use crate::random::{random_element, rng_for};

/// A linear map on `A` in the canonical matrix-unit basis: column `c` holds
/// the coordinates of `H(basis[c])`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    algebra: FdAlgebra,
    matrix: CMat,
}

impl LinearMap {
    pub fn new(algebra: &FdAlgebra, matrix: CMat) -> Result<Self> {
        let d = algebra.dimension();
        if matrix.shape() != (d, d) {
            return Err(Error::InvalidArgument(format!(
                "map matrix is {}x{}, algebra has dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self {
            algebra: algebra.clone(),
            matrix,
        })
    }

    /// Builds the matrix from the images of the canonical basis.
    pub fn from_fn(algebra: &FdAlgebra, f: impl Fn(&Element) -> Element) -> Self {
        let basis = algebra.canonical_basis();
        let d = basis.len();
        let mut matrix = CMat::zeros(d, d);
        for (c, b) in basis.iter().enumerate() {
            for (r, v) in f(b).coordinates().into_iter().enumerate() {
                matrix[(r, c)] = v;
            }
        }
        Self {
            algebra: algebra.clone(),
            matrix,
        }
    }

    pub fn center_valued_trace(algebra: &FdAlgebra) -> Self {
        Self::from_fn(algebra, Element::center_valued_trace)
    }

    pub fn algebra(&self) -> &FdAlgebra {
        &self.algebra
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn apply(&self, a: &Element) -> Result<Element> {
        self.algebra.check_element(a)?;
        let x = CMat::from_column_slice(self.matrix.ncols(), 1, &a.coordinates());
        let y = &self.matrix * x;
        self.algebra.from_coordinates(y.as_slice())
    }
}

/// The individual conditions, in the order they are checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HCheck {
    CentralValues,
    CenterLinear,
    Positive,
    Unital,
    /// Condition (a) for the normalized trace of one block.
    TracePreserving {
        block: usize,
    },
    /// Condition (b) for the maximal ideal of one block.
    IdealPreserving {
        block: usize,
    },
}

impl std::fmt::Display for HCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HCheck::CentralValues => write!(f, "values are central"),
            HCheck::CenterLinear => write!(f, "center-linear"),
            HCheck::Positive => write!(f, "positive"),
            HCheck::Unital => write!(f, "unital"),
            HCheck::TracePreserving { block } => write!(f, "(a) trace of block {block} preserved"),
            HCheck::IdealPreserving { block } => write!(f, "(b) ideal of block {block} preserved"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub check: HCheck,
    pub passed: bool,
    /// Largest violation observed (0 when exact).
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HMapConfig {
    pub tol: f64,
    /// Random `a*a` probes for positivity, on top of the diagonal matrix units.
    pub positivity_samples: usize,
    /// Random elements on which the realization is compared with `H`.
    pub test_elements: usize,
    pub seed: u64,
}

impl Default for HMapConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            positivity_samples: 20,
            test_elements: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HMapReport {
    pub checks: Vec<CheckOutcome>,
    /// Present when every check passed.
    pub realization: Option<MixingOperator>,
    /// `max ‖T(a) - H(a)‖` over the test elements.
    pub realization_error: Option<f64>,
    /// Largest matrix entry of `H - E`.
    pub distance_to_trace: f64,
}

impl HMapReport {
    pub fn accepted(&self) -> bool {
        self.realization.is_some()
    }

    pub fn failed(&self) -> Vec<HCheck> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.check)
            .collect()
    }
}

fn outcome(check: HCheck, deviation: f64, tol: f64) -> CheckOutcome {
    CheckOutcome {
        check,
        passed: deviation <= tol,
        deviation,
    }
}

fn central_deviation(a: &Element) -> f64 {
    a.max_abs_diff(&a.center_valued_trace())
        .expect("same shape")
}

/// Runs every check and reports all failures, not only the first.
///
/// Linearity makes checks on the canonical basis exhaustive for central
/// values, center-linearity, (a) and (b); positivity is probed on diagonal
/// matrix units and on random `a*a`.
pub fn verify_h_map(h: &LinearMap, config: &HMapConfig) -> Result<HMapReport> {
    let algebra = h.algebra();
    let tol = config.tol;
    let basis = algebra.canonical_basis();
    let images = basis
        .iter()
        .map(|b| h.apply(b))
        .collect::<Result<Vec<_>>>()?;
    let mut checks = Vec::new();

    let central = images.iter().map(central_deviation).fold(0.0, f64::max);
    checks.push(outcome(HCheck::CentralValues, central, tol));

    let mut linear = 0.0f64;
    for k in algebra.maximal_ideals() {
        let e = algebra.block_projection(k)?;
        for (b, hb) in basis.iter().zip(&images) {
            let lhs = h.apply(&e.mul(b)?)?;
            let rhs = e.mul(hb)?;
            linear = linear.max(lhs.max_abs_diff(&rhs)?);
        }
    }
    checks.push(outcome(HCheck::CenterLinear, linear, tol));

    let mut rng = rng_for(config.seed, 0);
    let mut probes: Vec<Element> = Vec::new();
    for (k, &n) in algebra.block_dims().iter().enumerate() {
        for i in 0..n {
            let mut e = algebra.zero().into_blocks();
            e[k][(i, i)] = ONE;
            probes.push(Element::from_blocks(algebra, e)?);
        }
    }
    for _ in 0..config.positivity_samples {
        let a = random_element(algebra, &mut rng);
        probes.push(a.adjoint().mul(&a)?);
    }
    let mut negativity = 0.0f64;
    for p in &probes {
        let hp = h.apply(p)?;
        // lowest eigenvalue of the Hermitian part, plus any skew part
        let herm_dev = hp.hermitian_deviation();
        let min_eig = hp
            .blocks()
            .iter()
            .map(|b| {
                crate::linalg::eigh(b)
                    .0
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min);
        negativity = negativity.max(herm_dev).max(-min_eig);
    }
    checks.push(outcome(HCheck::Positive, negativity, tol));

    let unit = algebra.unit();
    checks.push(outcome(
        HCheck::Unital,
        h.apply(&unit)?.max_abs_diff(&unit)?,
        tol,
    ));

    for k in algebra.maximal_ideals() {
        let n = algebra.block_dims()[k] as f64;
        let dev = basis
            .iter()
            .zip(&images)
            .map(|(b, hb)| ((hb.block_trace(k) - b.block_trace(k)) / n).norm())
            .fold(0.0, f64::max);
        checks.push(outcome(HCheck::TracePreserving { block: k }, dev, tol));
    }

    // the ideal of block k is spanned by the matrix units of the other blocks
    for k in algebra.maximal_ideals() {
        let dev = basis
            .iter()
            .zip(&images)
            .filter(|(b, _)| b.block(k).iter().all(|z| *z == ZERO))
            .map(|(_, hb)| hb.block(k).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        checks.push(outcome(HCheck::IdealPreserving { block: k }, dev, tol));
    }

    let reference = LinearMap::center_valued_trace(algebra);
    let distance_to_trace = (h.matrix() - reference.matrix())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);

    let accepted = checks.iter().all(|c| c.passed);
    let (realization, realization_error) = if accepted {
        let t = weyl_averaging_operator(algebra);
        let mut err = 0.0f64;
        for _ in 0..config.test_elements {
            let a = random_element(algebra, &mut rng);
            let scale = Complex64::new(rng.random_range(0.5..2.0), 0.0);
            let a = a.scale(scale);
            err = err.max(t.apply_element(&a)?.distance(&h.apply(&a)?)?);
        }
        (Some(t), Some(err))
    } else {
        (None, None)
    };
    Ok(HMapReport {
        checks,
        realization,
        realization_error,
        distance_to_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_valued_trace_is_accepted() {
        let alg = FdAlgebra::new(vec![2, 3]).unwrap();
        let r = verify_h_map(
            &LinearMap::center_valued_trace(&alg),
            &HMapConfig::default(),
        )
        .unwrap();
        assert!(r.accepted(), "{:?}", r.failed());
        assert!(r.distance_to_trace < 1e-15);
        assert!(r.realization_error.unwrap() < 1e-9);
    }

    #[test]
    fn first_block_trace_in_both_slots_fails_condition_a() {
        let alg = FdAlgebra::new(vec![2, 3]).unwrap();
        let h = LinearMap::from_fn(&alg, |a| {
            let t = a.normalized_block_traces()[0];
            alg.central(&[t, t]).unwrap()
        });
        let r = verify_h_map(&h, &HMapConfig::default()).unwrap();
        assert!(!r.accepted());
        let failed = r.failed();
        assert!(failed.contains(&HCheck::TracePreserving { block: 1 }));
        assert!(!failed.contains(&HCheck::TracePreserving { block: 0 }));
        assert!(!failed.contains(&HCheck::Unital));
        assert!(!failed.contains(&HCheck::Positive));
    }

    #[test]
    fn block_flip_fails_condition_b() {
        let alg = FdAlgebra::new(vec![2, 2]).unwrap();
        let h = LinearMap::from_fn(&alg, |a| {
            let t = a.normalized_block_traces();
            alg.central(&[t[1], t[0]]).unwrap()
        });
        let r = verify_h_map(&h, &HMapConfig::default()).unwrap();
        let failed = r.failed();
        assert!(failed.contains(&HCheck::IdealPreserving { block: 0 }));
        assert!(failed.contains(&HCheck::IdealPreserving { block: 1 }));
    }

    #[test]
    fn non_central_values_are_reported() {
        let alg = FdAlgebra::new(vec![2]).unwrap();
        let r = verify_h_map(
            &LinearMap::from_fn(&alg, Clone::clone),
            &HMapConfig::default(),
        )
        .unwrap();
        assert_eq!(r.failed(), vec![HCheck::CentralValues]);
    }

    #[test]
    fn shape_is_checked() {
        let alg = FdAlgebra::new(vec![2]).unwrap();
        assert!(LinearMap::new(&alg, CMat::zeros(3, 3)).is_err());
    }
}
