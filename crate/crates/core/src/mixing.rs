//! Unitary mixing operators `T = Σⱼ tⱼ Ad_{uⱼ}`.
//!
//! Operators are stored as literal term lists. Weights below
//! [`PRUNE_THRESHOLD`] are dropped and the remainder renormalized whenever a
//! new operator is assembled.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::algebra::{Element, FdAlgebra, Quotient, Tuple};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ONE, ZERO};
use crate::state::State;

/// Weights at or below this are pruned from term lists.
pub const PRUNE_THRESHOLD: f64 = 1e-14;
/// Accepted deviation of a weight vector's sum from one.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Accepted blockwise deviation from unitarity.
pub const UNITARY_TOL: f64 = 1e-10;
/// Hermiticity tolerance for exponential parametrization.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Refuses products that would exceed this many terms.
const MAX_PRODUCT_TERMS: usize = 1 << 22;

/// An element that is unitary in every block.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary(Element);

impl Unitary {
    pub fn new(u: Element) -> Result<Self> {
        let dev = u
            .blocks()
            .iter()
            .map(linalg::unitary_deviation)
            .fold(0.0, f64::max);
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self(u))
    }

    pub fn identity(algebra: &FdAlgebra) -> Self {
        Self(algebra.unit())
    }

    /// `e^{ih}` for self-adjoint `h`, via the blockwise Hermitian
    /// eigendecomposition.
    pub fn from_hermitian(h: &Element) -> Result<Self> {
        let dev = h.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let blocks = h.blocks().iter().map(linalg::expi_hermitian).collect();
        Ok(Self(Element::from_blocks_unchecked(blocks)))
    }

    pub(crate) fn from_blocks_unchecked(blocks: Vec<CMat>) -> Self {
        Self(Element::from_blocks_unchecked(blocks))
    }

    pub fn as_element(&self) -> &Element {
        &self.0
    }

    pub fn into_element(self) -> Element {
        self.0
    }

    pub fn block(&self, k: usize) -> &CMat {
        self.0.block(k)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.0.dims()
    }

    pub fn mul(&self, other: &Unitary) -> Result<Unitary> {
        Ok(Unitary(self.0.mul(&other.0)?))
    }
}

/// `e^{ih}`; see [`Unitary::from_hermitian`].
pub fn unitary_from_hermitian(h: &Element) -> Result<Unitary> {
    Unitary::from_hermitian(h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub weight: f64,
    pub unitary: Unitary,
}

/// A convex combination of inner automorphisms.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingOperator {
    algebra: FdAlgebra,
    terms: Vec<Term>,
}

impl MixingOperator {
    /// Validates convexity and shapes, then prunes tiny weights.
    pub fn new(algebra: &FdAlgebra, terms: Vec<Term>) -> Result<Self> {
        Self::validate(algebra, &terms)?;
        Ok(Self::normalized(algebra.clone(), terms))
    }

    /// Validates like [`Self::new`] but keeps the weights bit-for-bit, so
    /// parsed operators re-serialize identically.
    pub(crate) fn exact(algebra: &FdAlgebra, terms: Vec<Term>) -> Result<Self> {
        Self::validate(algebra, &terms)?;
        Ok(Self {
            algebra: algebra.clone(),
            terms,
        })
    }

    fn validate(algebra: &FdAlgebra, terms: &[Term]) -> Result<()> {
        if terms.is_empty() {
            return Err(Error::InvalidWeights("no terms".into()));
        }
        for t in terms {
            if t.unitary.dims() != algebra.block_dims() {
                return Err(Error::ShapeMismatch {
                    expected: algebra.block_dims().to_vec(),
                    found: t.unitary.dims(),
                });
            }
            if !t.weight.is_finite() || t.weight < -WEIGHT_SUM_TOL {
                return Err(Error::InvalidWeights(format!("weight {}", t.weight)));
            }
        }
        let total: f64 = terms.iter().map(|t| t.weight).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(format!("weights sum to {total}")));
        }
        Ok(())
    }

    /// Prunes and renormalizes without the convexity check; callers build
    /// weights that sum to one up to rounding.
    pub(crate) fn normalized(algebra: FdAlgebra, terms: Vec<Term>) -> Self {
        let mut kept: Vec<Term> = terms
            .into_iter()
            .filter(|t| t.weight > PRUNE_THRESHOLD)
            .collect();
        if kept.is_empty() {
            return Self::identity(&algebra);
        }
        let total: f64 = kept.iter().map(|t| t.weight).sum();
        for t in &mut kept {
            t.weight /= total;
        }
        Self {
            algebra,
            terms: kept,
        }
    }

    pub fn identity(algebra: &FdAlgebra) -> Self {
        Self::ad(Unitary::identity(algebra))
    }

    /// The inner automorphism `Ad_u`.
    pub fn ad(u: Unitary) -> Self {
        Self {
            algebra: u.as_element().algebra(),
            terms: vec![Term {
                weight: 1.0,
                unitary: u,
            }],
        }
    }

    /// Builds an operator from unitaries and convex weights.
    pub fn from_weighted(
        algebra: &FdAlgebra,
        weights: &[f64],
        unitaries: Vec<Unitary>,
    ) -> Result<Self> {
        if weights.len() != unitaries.len() {
            return Err(Error::InvalidArgument(format!(
                "{} weights for {} unitaries",
                weights.len(),
                unitaries.len()
            )));
        }
        let terms = weights
            .iter()
            .zip(unitaries)
            .map(|(&weight, unitary)| Term { weight, unitary })
            .collect();
        Self::new(algebra, terms)
    }

    pub fn algebra(&self) -> &FdAlgebra {
        &self.algebra
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// `T(a) = Σⱼ tⱼ uⱼ a uⱼ*`.
    pub fn apply_element(&self, a: &Element) -> Result<Element> {
        self.algebra.check_element(a)?;
        let blocks = a
            .blocks()
            .iter()
            .enumerate()
            .map(|(k, b)| self.apply_block(k, b))
            .collect();
        Ok(Element::from_blocks_unchecked(blocks))
    }

    /// Action on a single block.
    pub fn apply_block(&self, k: usize, b: &CMat) -> CMat {
        let n = b.nrows();
        let mut acc = CMat::zeros(n, n);
        for t in &self.terms {
            let u = t.unitary.block(k);
            acc += (u * b * u.adjoint()).scale(t.weight);
        }
        acc
    }

    /// Coordinatewise action on a tuple.
    pub fn apply(&self, t: &Tuple) -> Result<Tuple> {
        t.try_map(|a| self.apply_element(a))
    }

    /// `T₁ ∘ T₂`, with terms `(tᵢ sⱼ, uᵢ vⱼ)`.
    pub fn compose(&self, other: &MixingOperator) -> Result<MixingOperator> {
        self.check_same_algebra(other)?;
        let count = self.terms.len() * other.terms.len();
        if count > MAX_PRODUCT_TERMS {
            return Err(Error::InvalidArgument(format!(
                "composition would have {count} terms"
            )));
        }
        let mut terms = Vec::with_capacity(count);
        for a in &self.terms {
            for b in &other.terms {
                terms.push(Term {
                    weight: a.weight * b.weight,
                    unitary: a.unitary.mul(&b.unitary)?,
                });
            }
        }
        Ok(Self::normalized(self.algebra.clone(), terms))
    }

    /// `s·T₁ + (1 - s)·T₂`.
    pub fn convex_combine(
        s: f64,
        first: &MixingOperator,
        second: &MixingOperator,
    ) -> Result<MixingOperator> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidWeights(format!(
                "mixing parameter {s} outside [0, 1]"
            )));
        }
        first.check_same_algebra(second)?;
        let terms = first
            .terms
            .iter()
            .map(|t| Term {
                weight: s * t.weight,
                unitary: t.unitary.clone(),
            })
            .chain(second.terms.iter().map(|t| Term {
                weight: (1.0 - s) * t.weight,
                unitary: t.unitary.clone(),
            }))
            .collect();
        Ok(Self::normalized(first.algebra.clone(), terms))
    }

    /// The state `ρ ∘ T`: each density becomes `Σⱼ tⱼ uⱼ* D uⱼ`.
    pub fn pull_back_state(&self, rho: &State) -> Result<State> {
        if rho.dims() != self.algebra.block_dims() {
            return Err(Error::ShapeMismatch {
                expected: self.algebra.block_dims().to_vec(),
                found: rho.dims(),
            });
        }
        let densities = rho
            .densities()
            .iter()
            .enumerate()
            .map(|(k, d)| {
                let n = d.nrows();
                let mut acc = CMat::zeros(n, n);
                for t in &self.terms {
                    let u = t.unitary.block(k);
                    acc += (u.adjoint() * d * u).scale(t.weight);
                }
                linalg::hermitian_part(&acc)
            })
            .collect();
        Ok(State::from_parts_unchecked(
            rho.weights().to_vec(),
            densities,
        ))
    }

    fn check_same_algebra(&self, other: &MixingOperator) -> Result<()> {
        if self.algebra == other.algebra {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: self.algebra.block_dims().to_vec(),
                found: other.algebra.block_dims().to_vec(),
            })
        }
    }
}

/// Cyclic shift `X|j⟩ = |j+1 mod n⟩`.
pub fn shift_matrix(n: usize) -> CMat {
    let mut x = CMat::zeros(n, n);
    for j in 0..n {
        x[((j + 1) % n, j)] = ONE;
    }
    x
}

/// Clock `Z = diag(ω⁰, …, ωⁿ⁻¹)` with `ω = e^{2πi/n}`.
pub fn clock_matrix(n: usize) -> CMat {
    let mut z = CMat::zeros(n, n);
    for j in 0..n {
        let theta = 2.0 * PI * j as f64 / n as f64;
        z[(j, j)] = Complex64::from_polar(1.0, theta);
    }
    z
}

/// The `n²` unitaries `XʲZˡ`, ordered by `(j, l)`.
pub fn weyl_unitaries(n: usize) -> Vec<CMat> {
    let x = shift_matrix(n);
    let z = clock_matrix(n);
    let mut out = Vec::with_capacity(n * n);
    let mut xp = CMat::identity(n, n);
    for _ in 0..n {
        let mut zp = CMat::identity(n, n);
        for _ in 0..n {
            out.push(&xp * &zp);
            zp = &zp * &z;
        }
        xp = &xp * &x;
    }
    out
}

/// Uniform mixture of `Ad_{XʲZˡ}` on the single block `k`, identity
/// elsewhere. On block `k` it equals the normalized trace times identity.
pub fn block_weyl_operator(algebra: &FdAlgebra, k: usize) -> Result<MixingOperator> {
    algebra.check_block(k)?;
    let n = algebra.block_dims()[k];
    let weight = 1.0 / (n * n) as f64;
    let terms = weyl_unitaries(n)
        .into_iter()
        .map(|w| {
            let mut blocks: Vec<CMat> = algebra
                .block_dims()
                .iter()
                .map(|&d| CMat::identity(d, d))
                .collect();
            blocks[k] = w;
            Term {
                weight,
                unitary: Unitary::from_blocks_unchecked(blocks),
            }
        })
        .collect();
    Ok(MixingOperator::normalized(algebra.clone(), terms))
}

/// An exact realization of the center-valued trace as a mixing operator:
/// every block is averaged over its clock-and-shift group, and the blocks are
/// glued by a coupled central patch, so the term count is at most
/// `Σ nₖ² - B + 1`.
pub fn weyl_averaging_operator(algebra: &FdAlgebra) -> MixingOperator {
    let projections: Vec<Element> = algebra
        .maximal_ideals()
        .map(|k| algebra.block_projection(k).expect("block in range"))
        .collect();
    let operators: Vec<MixingOperator> = algebra
        .maximal_ideals()
        .map(|k| block_weyl_operator(algebra, k).expect("block in range"))
        .collect();
    central_patch_coupled(&projections, &operators).expect("block projections partition unity")
}

/// Extends every unitary of an operator on `q.image()` by identity blocks on
/// the dropped blocks, so that `π ∘ lift(T̃) = T̃ ∘ π`.
pub fn lift_mixing(q: &Quotient, op: &MixingOperator) -> Result<MixingOperator> {
    if op.algebra() != q.image() {
        return Err(Error::ShapeMismatch {
            expected: q.image().block_dims().to_vec(),
            found: op.algebra().block_dims().to_vec(),
        });
    }
    let terms = op
        .terms()
        .iter()
        .map(|t| {
            let u = q.embed_with(t.unitary.as_element(), |n| CMat::identity(n, n))?;
            Ok(Term {
                weight: t.weight,
                unitary: Unitary(u),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MixingOperator::normalized(q.parent().clone(), terms))
}

/// Validates a central partition of unity and returns, per projection, the
/// blocks on which it is the identity.
fn partition_blocks(
    projections: &[Element],
    operators: &[MixingOperator],
) -> Result<(FdAlgebra, Vec<Vec<usize>>)> {
    let first = projections
        .first()
        .ok_or_else(|| Error::NotCentralPartition("no projections".into()))?;
    if projections.len() != operators.len() {
        return Err(Error::NotCentralPartition(format!(
            "{} projections for {} operators",
            projections.len(),
            operators.len()
        )));
    }
    let algebra = first.algebra();
    let mut owner: Vec<Option<usize>> = vec![None; algebra.num_blocks()];
    let mut groups = Vec::with_capacity(projections.len());
    for (p, (e, op)) in projections.iter().zip(operators).enumerate() {
        algebra.check_element(e)?;
        if op.algebra() != &algebra {
            return Err(Error::ShapeMismatch {
                expected: algebra.block_dims().to_vec(),
                found: op.algebra().block_dims().to_vec(),
            });
        }
        if !e.is_central(UNITARY_TOL) {
            return Err(Error::NotCentralPartition(format!(
                "projection {p} is not central"
            )));
        }
        let mut blocks = Vec::new();
        for (k, value) in e.normalized_block_traces().into_iter().enumerate() {
            if (value - ONE).norm() <= UNITARY_TOL {
                if let Some(q) = owner[k] {
                    return Err(Error::NotCentralPartition(format!(
                        "projections {q} and {p} overlap on block {k}"
                    )));
                }
                owner[k] = Some(p);
                blocks.push(k);
            } else if (value - ZERO).norm() > UNITARY_TOL {
                return Err(Error::NotCentralPartition(format!(
                    "projection {p} has value {value} on block {k}"
                )));
            }
        }
        groups.push(blocks);
    }
    if let Some(k) = owner.iter().position(Option::is_none) {
        return Err(Error::NotCentralPartition(format!(
            "block {k} is not covered"
        )));
    }
    Ok((algebra, groups))
}

/// `⊕ₚ Tₚ` for a central partition of unity `e₁ + … + e_P = 1`:
/// `apply(T, a) = Σₚ eₚ·Tₚ(a)`. The result is expanded into the full
/// product family: one unitary per patch, weights multiplied.
pub fn central_patch(
    projections: &[Element],
    operators: &[MixingOperator],
) -> Result<MixingOperator> {
    let (algebra, groups) = partition_blocks(projections, operators)?;
    let count = groups
        .iter()
        .zip(operators)
        .filter(|(g, _)| !g.is_empty())
        .try_fold(1usize, |acc, (_, op)| acc.checked_mul(op.term_count()))
        .filter(|&c| c <= MAX_PRODUCT_TERMS)
        .ok_or_else(|| Error::InvalidArgument("central patch product is too large".into()))?;
    let active: Vec<(&Vec<usize>, &MixingOperator)> = groups
        .iter()
        .zip(operators)
        .filter(|(g, _)| !g.is_empty())
        .collect();
    let mut terms = Vec::with_capacity(count);
    let mut index = vec![0usize; active.len()];
    loop {
        let mut weight = 1.0;
        let mut blocks: Vec<CMat> = algebra
            .block_dims()
            .iter()
            .map(|&n| CMat::identity(n, n))
            .collect();
        for (slot, (group, op)) in active.iter().enumerate() {
            let term = &op.terms()[index[slot]];
            weight *= term.weight;
            for &k in group.iter() {
                blocks[k] = term.unitary.block(k).clone();
            }
        }
        terms.push(Term {
            weight,
            unitary: Unitary::from_blocks_unchecked(blocks),
        });
        // odometer over the per-patch term indices
        let mut slot = active.len();
        loop {
            if slot == 0 {
                return Ok(MixingOperator::normalized(algebra, terms));
            }
            slot -= 1;
            index[slot] += 1;
            if index[slot] < active[slot].1.term_count() {
                break;
            }
            index[slot] = 0;
        }
    }
}

/// Same action as [`central_patch`], with patches coupled through their
/// cumulative weight distributions instead of the product family.
///
/// A patched operator only needs the correct marginal distribution of
/// unitaries on each patch. Splitting `[0, 1)` at every patch's cumulative
/// weights gives a common refinement whose cells each pick one term per patch;
/// the term count is at most `Σₚ |Tₚ| - P + 1`.
pub fn central_patch_coupled(
    projections: &[Element],
    operators: &[MixingOperator],
) -> Result<MixingOperator> {
    let (algebra, groups) = partition_blocks(projections, operators)?;
    let active: Vec<(&Vec<usize>, &MixingOperator)> = groups
        .iter()
        .zip(operators)
        .filter(|(g, _)| !g.is_empty())
        .collect();
    let cumulative: Vec<Vec<f64>> = active
        .iter()
        .map(|(_, op)| {
            let mut acc = 0.0;
            let mut c: Vec<f64> = op
                .terms()
                .iter()
                .map(|t| {
                    acc += t.weight;
                    acc
                })
                .collect();
            *c.last_mut().expect("operators have terms") = 1.0;
            c
        })
        .collect();
    let mut cuts: Vec<f64> = cumulative.iter().flatten().copied().collect();
    cuts.push(0.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= PRUNE_THRESHOLD);
    let mut terms = Vec::with_capacity(cuts.len());
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = 0.5 * (lo + hi);
        let mut blocks: Vec<CMat> = algebra
            .block_dims()
            .iter()
            .map(|&n| CMat::identity(n, n))
            .collect();
        for ((group, op), cum) in active.iter().zip(&cumulative) {
            let j = cum.partition_point(|&c| c <= mid).min(cum.len() - 1);
            for &k in group.iter() {
                blocks[k] = op.terms()[j].unitary.block(k).clone();
            }
        }
        terms.push(Term {
            weight: hi - lo,
            unitary: Unitary::from_blocks_unchecked(blocks),
        });
    }
    Ok(MixingOperator::normalized(algebra, terms))
}

/// Realizes `z·T₁(a) + (1 - z)·T₂(a)` for central `0 ≤ z ≤ 1` as a single
/// mixing operator: on block `k` it is `zₖ T₁ + (1 - zₖ) T₂`, and the blocks
/// are glued with [`central_patch_coupled`].
pub fn centrally_convex_combination(
    z: &Element,
    first: &MixingOperator,
    second: &MixingOperator,
) -> Result<MixingOperator> {
    let algebra = first.algebra().clone();
    algebra.check_element(z)?;
    if !z.is_central(UNITARY_TOL) {
        return Err(Error::InvalidArgument("z is not central".into()));
    }
    let values = z.normalized_block_traces();
    let mut projections = Vec::with_capacity(values.len());
    let mut operators = Vec::with_capacity(values.len());
    for (k, value) in values.into_iter().enumerate() {
        if value.im.abs() > UNITARY_TOL || value.re < -UNITARY_TOL || value.re > 1.0 + UNITARY_TOL {
            return Err(Error::InvalidArgument(format!(
                "z has value {value} on block {k}, outside [0, 1]"
            )));
        }
        projections.push(algebra.block_projection(k)?);
        operators.push(MixingOperator::convex_combine(
            value.re.clamp(0.0, 1.0),
            first,
            second,
        )?);
    }
    central_patch_coupled(&projections, &operators)
}
