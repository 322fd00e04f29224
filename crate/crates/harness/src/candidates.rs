//! Candidate maps `A → Z(A)` for the H-map verifier.

use dixmier_core::json::MatrixJson;
use dixmier_core::linalg::CMat;
use dixmier_core::random::{gaussian_complex, rng_for};
use dixmier_core::{Element, FdAlgebra, LinearMap};
use serde::{Deserialize, Serialize};

pub const NAMES: [&str; 5] = [
    "trace",
    "identity",
    "first-block-trace",
    "flip",
    "perturbed",
];

/// `{"blocks":[…],"matrix":[[[re,im],…],…]}`, columns indexed by the
/// canonical basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearMapJson {
    pub blocks: Vec<usize>,
    pub matrix: MatrixJson,
}

impl LinearMapJson {
    pub fn from_map(h: &LinearMap) -> Self {
        Self {
            blocks: h.algebra().block_dims().to_vec(),
            matrix: dixmier_core::json::matrix_to_json(h.matrix()),
        }
    }

    pub fn to_map(&self) -> dixmier_core::Result<LinearMap> {
        let algebra = FdAlgebra::new(self.blocks.clone())?;
        LinearMap::new(
            &algebra,
            dixmier_core::json::matrix_from_json(&self.matrix)?,
        )
    }
}

fn central_from(algebra: &FdAlgebra, values: Vec<num_complex::Complex64>) -> Element {
    algebra.central(&values).expect("one value per block")
}

/// `a ↦ Σₖ (Σⱼ wₖⱼ τⱼ(a)) eₖ` for a matrix of weights.
pub fn trace_mixture(algebra: &FdAlgebra, weights: &[Vec<f64>]) -> LinearMap {
    LinearMap::from_fn(algebra, |a| {
        let t = a.normalized_block_traces();
        let values = weights
            .iter()
            .map(|row| row.iter().zip(&t).map(|(w, tj)| tj * *w).sum())
            .collect();
        central_from(algebra, values)
    })
}

/// Reverses the order of the block traces.
pub fn flip(algebra: &FdAlgebra) -> LinearMap {
    let b = algebra.num_blocks();
    let weights: Vec<Vec<f64>> = (0..b)
        .map(|k| {
            (0..b)
                .map(|j| if j == b - 1 - k { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    trace_mixture(algebra, &weights)
}

/// The first block's trace placed in every central slot.
pub fn first_block_trace(algebra: &FdAlgebra) -> LinearMap {
    let b = algebra.num_blocks();
    let weights: Vec<Vec<f64>> = (0..b)
        .map(|_| (0..b).map(|j| if j == 0 { 1.0 } else { 0.0 }).collect())
        .collect();
    trace_mixture(algebra, &weights)
}

/// `E + δ·R` with `R` a random map into the center.
pub fn perturbed(algebra: &FdAlgebra, delta: f64, seed: u64) -> LinearMap {
    let e = LinearMap::center_valued_trace(algebra);
    let mut rng = rng_for(seed, 0);
    let d = algebra.dimension();
    let functionals: Vec<Vec<num_complex::Complex64>> = (0..algebra.num_blocks())
        .map(|_| (0..d).map(|_| gaussian_complex(&mut rng)).collect())
        .collect();
    let r = LinearMap::from_fn(algebra, |a| {
        let x = a.coordinates();
        let values = functionals
            .iter()
            .map(|f| f.iter().zip(&x).map(|(fi, xi)| fi * xi).sum())
            .collect();
        central_from(algebra, values)
    });
    LinearMap::new(algebra, e.matrix() + r.matrix().scale(delta)).expect("same shape")
}

pub fn named(algebra: &FdAlgebra, name: &str, seed: u64) -> Option<LinearMap> {
    Some(match name {
        "trace" => LinearMap::center_valued_trace(algebra),
        "identity" => LinearMap::new(
            algebra,
            CMat::identity(algebra.dimension(), algebra.dimension()),
        )
        .ok()?,
        "first-block-trace" => first_block_trace(algebra),
        "flip" => flip(algebra),
        "perturbed" => perturbed(algebra, 1e-3, seed),
        _ => return None,
    })
}

/// The center-valued trace followed by 19 perturbed, rescaled, mixed or
/// flipped candidates.
pub fn family(algebra: &FdAlgebra, seed: u64) -> Vec<(String, LinearMap)> {
    let b = algebra.num_blocks();
    let mut out = vec![("trace".to_string(), LinearMap::center_valued_trace(algebra))];
    for (i, delta) in [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8]
        .into_iter()
        .enumerate()
    {
        out.push((
            format!("perturbed-{delta:e}"),
            perturbed(algebra, delta, seed.wrapping_add(i as u64)),
        ));
    }
    out.push(("flip".into(), flip(algebra)));
    out.push(("first-block-trace".into(), first_block_trace(algebra)));
    out.push((
        "identity".into(),
        LinearMap::new(
            algebra,
            CMat::identity(algebra.dimension(), algebra.dimension()),
        )
        .expect("square"),
    ));
    for scale in [0.5, 2.0, -1.0] {
        let e = LinearMap::center_valued_trace(algebra);
        out.push((
            format!("scaled-{scale}"),
            LinearMap::new(algebra, e.matrix().scale(scale)).expect("same shape"),
        ));
    }
    // doubly stochastic mixtures of the block traces
    for s in [0.5, 0.9, 0.99] {
        let weights: Vec<Vec<f64>> = (0..b)
            .map(|k| {
                (0..b)
                    .map(|j| {
                        if b == 1 {
                            1.0
                        } else if j == k {
                            s
                        } else {
                            (1.0 - s) / (b - 1) as f64
                        }
                    })
                    .collect()
            })
            .collect();
        out.push((format!("mixed-{s}"), trace_mixture(algebra, &weights)));
    }
    // unnormalized traces in the central slots
    out.push((
        "raw-trace".into(),
        LinearMap::from_fn(algebra, |a| {
            central_from(algebra, (0..b).map(|k| a.block_trace(k)).collect())
        }),
    ));
    // a vector state per block: positive, unital, ideal-preserving, not tracial
    out.push((
        "first-diagonal-entry".into(),
        LinearMap::from_fn(algebra, |a| {
            central_from(algebra, a.blocks().iter().map(|m| m[(0, 0)]).collect())
        }),
    ));
    out
}
