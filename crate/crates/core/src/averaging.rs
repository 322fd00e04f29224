//! Simultaneous averaging of a subspace to zero.
//!
//! A subspace `V` can be driven to zero by a single mixing operator exactly
//! when every element is blockwise traceless and every maximal ideal admits
//! a state on its block that annihilates `V`. In finite dimension the
//! normalized block trace is such a state whenever `V` is traceless, and the
//! clock-and-shift average realizes `E`, which kills all of `V` at once.

use nalgebra::SVD;
use num_complex::Complex64;

use crate::algebra::{Element, FdAlgebra, Tuple};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::mixing::{weyl_averaging_operator, MixingOperator, Term, Unitary};
use crate::random::{haar_unitary_matrix, rng_for};
use crate::state::State;
use crate::state_solver::{BlockStateProblem, StateSolverConfig};
use crate::unitary_search::{self, DescentConfig};

/// Relative singular-value threshold for linear independence.
pub const RANK_TOL: f64 = 1e-9;

/// A linear subspace given by a basis of elements.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    algebra: FdAlgebra,
    basis: Vec<Element>,
}

fn smallest_relative_singular_value(elements: &[Element]) -> f64 {
    if elements.is_empty() {
        return 1.0;
    }
    let dim = elements[0].coordinates().len();
    let mut m = CMat::zeros(dim, elements.len());
    for (j, e) in elements.iter().enumerate() {
        for (i, z) in e.coordinates().into_iter().enumerate() {
            m[(i, j)] = z;
        }
    }
    let sv = SVD::new(m, false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 || elements.len() > dim {
        return 0.0;
    }
    sv.iter().copied().fold(f64::INFINITY, f64::min) / max
}

impl Subspace {
    pub fn new(algebra: &FdAlgebra, basis: Vec<Element>) -> Result<Self> {
        for v in &basis {
            algebra.check_element(v)?;
        }
        let s = smallest_relative_singular_value(&basis);
        if s <= RANK_TOL {
            return Err(Error::DependentBasis(s));
        }
        Ok(Self {
            algebra: algebra.clone(),
            basis,
        })
    }

    pub fn zero(algebra: &FdAlgebra) -> Self {
        Self {
            algebra: algebra.clone(),
            basis: Vec::new(),
        }
    }

    /// Greedily extracts a basis from a spanning list, in order.
    pub fn spanned_by(algebra: &FdAlgebra, elements: &[Element]) -> Result<Self> {
        let mut basis: Vec<Element> = Vec::new();
        for e in elements {
            algebra.check_element(e)?;
            basis.push(e.clone());
            if smallest_relative_singular_value(&basis) <= RANK_TOL {
                basis.pop();
            }
        }
        Ok(Self {
            algebra: algebra.clone(),
            basis,
        })
    }

    pub fn algebra(&self) -> &FdAlgebra {
        &self.algebra
    }

    pub fn basis(&self) -> &[Element] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Largest basis residual `max_v ‖T v‖`.
    pub fn max_residual(&self, op: &MixingOperator) -> Result<f64> {
        self.basis
            .iter()
            .map(|v| op.apply_element(v).map(|tv| tv.op_norm()))
            .try_fold(0.0, |acc, r| r.map(|r| f64::max(acc, r)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionConfig {
    /// Commutator-closure tolerance: `|tr(vₖ)| ≤ trace_tol·nₖ`.
    pub trace_tol: f64,
    /// A state certifies an ideal when `max_v |ρ(v)|` is at most this.
    pub certificate_tol: f64,
    pub solver: StateSolverConfig,
}

impl Default for ConditionConfig {
    fn default() -> Self {
        Self {
            trace_tol: 1e-9,
            certificate_tol: 1e-8,
            solver: StateSolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceFailure {
    pub item: usize,
    pub block: usize,
    pub trace: Complex64,
}

/// Outcome of the annihilating-state search on one block.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealCertificate {
    pub block: usize,
    /// A state on this block annihilating `V`, when the optimum is within
    /// tolerance.
    pub state: Option<State>,
    /// Best `max_v |ρ(v)|` found.
    pub optimum: f64,
    /// Certified lower bound on that minimum.
    pub dual_lower: f64,
    /// Coefficients `α` of the separating combination `Σ αᵢ vᵢ`.
    pub witness: Vec<Complex64>,
}

impl IdealCertificate {
    /// The separating element `Σ αᵢ vᵢ`: every state on this block has
    /// `|ρ(a)| ≥ dual_lower`.
    pub fn witness_element(&self, v: &Subspace) -> Element {
        v.basis
            .iter()
            .zip(&self.witness)
            .fold(v.algebra.zero(), |acc, (b, &c)| {
                acc.add(&b.scale(c)).expect("same shape")
            })
    }
}

/// The data behind the characterization of zero-averageable subspaces:
/// commutator closure plus one annihilating state per maximal ideal.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionICertificate {
    pub commutator_ok: bool,
    pub trace_failures: Vec<TraceFailure>,
    pub per_ideal: Vec<IdealCertificate>,
}

impl ConditionICertificate {
    pub fn passes(&self) -> bool {
        self.commutator_ok && self.per_ideal.iter().all(|c| c.state.is_some())
    }

    /// The first reason the condition fails, if any.
    pub fn obstruction(&self) -> Option<Error> {
        if let Some(f) = self.trace_failures.first() {
            return Some(Error::TraceObstruction {
                item: f.item,
                block: f.block,
                trace: f.trace.norm(),
            });
        }
        self.per_ideal
            .iter()
            .find(|c| c.state.is_none())
            .map(|c| Error::IdealObstruction {
                block: c.block,
                optimum: c.optimum,
            })
    }
}

fn trace_failures(v: &Subspace, tol: f64) -> Vec<TraceFailure> {
    let mut out = Vec::new();
    for (item, b) in v.basis.iter().enumerate() {
        for (block, m) in b.blocks().iter().enumerate() {
            let trace = linalg::trace(m);
            if trace.norm() > tol * m.nrows() as f64 {
                out.push(TraceFailure { item, block, trace });
            }
        }
    }
    out
}

/// Checks commutator closure and searches every block for a state
/// annihilating `V`.
pub fn check_condition_i(v: &Subspace, config: &ConditionConfig) -> ConditionICertificate {
    let failures = trace_failures(v, config.trace_tol);
    let algebra = &v.algebra;
    let per_ideal = algebra
        .maximal_ideals()
        .map(|k| {
            let n = algebra.block_dims()[k];
            if v.dim() == 0 {
                let mixed = CMat::identity(n, n).scale(1.0 / n as f64);
                return IdealCertificate {
                    block: k,
                    state: Some(State::on_block(algebra, k, mixed).expect("valid density")),
                    optimum: 0.0,
                    dual_lower: 0.0,
                    witness: Vec::new(),
                };
            }
            let problem =
                BlockStateProblem::new(vec![v.basis.iter().map(|b| b.block(k).clone()).collect()]);
            let solver = StateSolverConfig {
                seed: config.solver.seed.wrapping_add(k as u64),
                ..config.solver.clone()
            };
            let sol = problem.solve(&solver);
            let state = (sol.value <= config.certificate_tol).then(|| {
                let d = linalg::project_density(&sol.densities[0]);
                State::on_block(algebra, k, d).expect("projected density is valid")
            });
            IdealCertificate {
                block: k,
                state,
                optimum: sol.value,
                dual_lower: sol.dual_lower,
                witness: sol.witness,
            }
        })
        .collect();
    ConditionICertificate {
        commutator_ok: failures.is_empty(),
        trace_failures: failures,
        per_ideal,
    }
}

/// Returns one mixing operator with `max_v ‖T v‖ < eps` over the basis of
/// `V`. The zero subspace gets the identity; a traceless subspace gets the
/// clock-and-shift average, which maps it to zero exactly.
pub fn simultaneous_zero_average(v: &Subspace, eps: f64) -> Result<MixingOperator> {
    if v.dim() == 0 {
        return Ok(MixingOperator::identity(&v.algebra));
    }
    if let Some(f) = trace_failures(v, ConditionConfig::default().trace_tol).first() {
        return Err(Error::TraceObstruction {
            item: f.item,
            block: f.block,
            trace: f.trace.norm(),
        });
    }
    let op = weyl_averaging_operator(&v.algebra);
    let residual = v.max_residual(&op)?;
    if residual < eps {
        Ok(op)
    } else {
        Err(Error::ResidualTooLarge { residual, eps })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterateConfig {
    pub max_steps: usize,
    pub eps: f64,
    /// Terms per step: `(id + Σ Ad_{uₗ}) / k` with `k - 1` optimized unitaries.
    pub mixture_terms: usize,
    /// Random initial unitaries tried per step.
    pub starts: usize,
    pub descent: DescentConfig,
    pub seed: u64,
}

impl Default for IterateConfig {
    fn default() -> Self {
        Self {
            max_steps: 200,
            eps: 1e-3,
            mixture_terms: 2,
            starts: 3,
            descent: DescentConfig {
                iterations: 80,
                ..DescentConfig::default()
            },
            seed: 0,
        }
    }
}

/// The schedule and residual history of successive averaging.
#[derive(Debug, Clone, PartialEq)]
pub struct DixmierTrace {
    /// Step operators, in the order they are applied.
    pub schedule: Vec<MixingOperator>,
    /// `‖T₍ₙ₎(a) - E(a)‖` before each step and after the last.
    pub residuals: Vec<f64>,
    pub target: Tuple,
    pub final_tuple: Tuple,
    /// Largest tuple norm seen along the way.
    pub max_norm: f64,
}

impl DixmierTrace {
    pub fn final_residual(&self) -> f64 {
        *self.residuals.last().expect("residual at step 0")
    }
}

/// Frobenius surrogate `Σⱼ ‖(b + Σₗ uₗ b uₗ*)/k - z‖²` on one block, with its
/// gradient in each `uₗ`.
fn step_objective(us: &[CMat], entries: &[CMat], targets: &[CMat]) -> (f64, Vec<CMat>) {
    let k = (us.len() + 1) as f64;
    let mut value = 0.0;
    let n = entries.first().map_or(0, CMat::nrows);
    let mut grads = vec![CMat::zeros(n, n); us.len()];
    for (b, z) in entries.iter().zip(targets) {
        let conj: Vec<CMat> = us.iter().map(|u| u * b * u.adjoint()).collect();
        let mut r = b.clone();
        for c in &conj {
            r += c;
        }
        let r = r.scale(1.0 / k) - z;
        value += linalg::frobenius_sq(&r);
        let rs = r.adjoint();
        for (g, c) in grads.iter_mut().zip(&conj) {
            *g += (c * &rs - &rs * c).scale(2.0 / k);
        }
    }
    let grads = grads
        .into_iter()
        .map(|g| linalg::hermitian_part(&(g * linalg::I)))
        .collect();
    (value, grads)
}

/// Successive two-term (by default) averaging toward `E(a)`.
///
/// Each step picks unitaries by gradient descent on the Frobenius distance to
/// `E(a)` and applies `(id + Σ Ad_{uₗ})/k`. Since `E(a)` is central, every
/// step is a contraction around it and the residual never increases. Budget
/// exhaustion is reported through the residual history.
pub fn dixmier_iterate(t: &Tuple, config: &IterateConfig) -> DixmierTrace {
    let algebra = t.algebra();
    let target = t.center_valued_trace();
    let mut current = t.clone();
    let mut residual = current.distance(&target).expect("same shape");
    let mut trace = DixmierTrace {
        schedule: Vec::new(),
        residuals: vec![residual],
        target: target.clone(),
        final_tuple: current.clone(),
        max_norm: current.norm(),
    };
    let slots = config.mixture_terms.max(2) - 1;
    let weight = 1.0 / (slots + 1) as f64;
    let mut rng = rng_for(config.seed, 0);
    for _ in 0..config.max_steps {
        if residual <= config.eps {
            break;
        }
        let mut blocks: Vec<Vec<CMat>> = vec![Vec::with_capacity(algebra.num_blocks()); slots];
        for (k, &n) in algebra.block_dims().iter().enumerate() {
            let entries: Vec<CMat> = current
                .entries()
                .iter()
                .map(|e| e.block(k).clone())
                .collect();
            let targets: Vec<CMat> = target
                .entries()
                .iter()
                .map(|e| e.block(k).clone())
                .collect();
            let mut best: Option<(Vec<CMat>, f64)> = None;
            for _ in 0..config.starts.max(1) {
                let start: Vec<CMat> = (0..slots)
                    .map(|_| haar_unitary_matrix(n, &mut rng))
                    .collect();
                let (point, value) = unitary_search::minimize(
                    start,
                    |us| step_objective(us, &entries, &targets),
                    &config.descent,
                );
                if best.as_ref().is_none_or(|b| value < b.1) {
                    best = Some((point, value));
                }
            }
            for (slot, u) in best.expect("at least one start").0.into_iter().enumerate() {
                blocks[slot].push(u);
            }
        }
        let mut terms = vec![Term {
            weight,
            unitary: Unitary::identity(&algebra),
        }];
        for b in blocks {
            terms.push(Term {
                weight,
                unitary: Unitary::new(Element::new(b).expect("square blocks"))
                    .expect("retraction keeps unitarity"),
            });
        }
        let step = MixingOperator::new(&algebra, terms).expect("equal weights");
        let next = step.apply(&current).expect("same algebra");
        let next_residual = next.distance(&target).expect("same shape");
        if next_residual > residual {
            break;
        }
        residual = next_residual;
        current = next;
        trace.max_norm = trace.max_norm.max(current.norm());
        trace.schedule.push(step);
        trace.residuals.push(residual);
    }
    trace.final_tuple = current;
    trace
}

/// How each stage of the successive-halving procedure picks its operator.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum StageStrategy {
    /// Clock-and-shift averaging: exact in one step.
    #[default]
    Exact,
    /// Iterative averaging of the stage's item until it is below the
    /// stage threshold.
    Iterative(IterateConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    /// `2^{-k}` for stage `k` (1-based).
    pub threshold: f64,
    /// The stage operator `T_k`, as a composition applied left to right.
    pub operators: Vec<MixingOperator>,
    /// `‖T_k⋯T₁ a_j‖` for every item after this stage.
    pub norms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequentialSchedule {
    pub stages: Vec<Stage>,
    /// Whether every item ends at or below `eps`.
    pub eps_met: bool,
}

/// Successive averaging toward zero: stage `k` picks `T_k` so that
/// `‖T_k⋯T₁ a_k‖ < 2^{-k}`; earlier items stay small because mixing
/// operators are contractive. Items are processed in the given order, and
/// every intermediate element is checked to remain traceless.
pub fn sequential_zero_average(
    items: &[Element],
    eps: f64,
    strategy: &StageStrategy,
) -> Result<SequentialSchedule> {
    let tol = ConditionConfig::default().trace_tol;
    for (item, a) in items.iter().enumerate() {
        if let Some(block) =
            (0..a.num_blocks()).find(|&k| a.block_trace(k).norm() > tol * a.dims()[k] as f64)
        {
            return Err(Error::TraceObstruction {
                item,
                block,
                trace: a.block_trace(block).norm(),
            });
        }
    }
    if let Some(first) = items.first() {
        for a in &items[1..] {
            first.same_shape(a)?;
        }
    }
    let mut current: Vec<Element> = items.to_vec();
    let mut stages = Vec::with_capacity(items.len());
    for k in 0..items.len() {
        let threshold = 0.5f64.powi(k as i32 + 1);
        let algebra = current[k].algebra();
        let operators = match strategy {
            StageStrategy::Exact => vec![weyl_averaging_operator(&algebra)],
            StageStrategy::Iterative(config) => {
                let config = IterateConfig {
                    eps: 0.5 * threshold,
                    seed: config.seed.wrapping_add(k as u64),
                    ..config.clone()
                };
                dixmier_iterate(&Tuple::single(current[k].clone()), &config).schedule
            }
        };
        for op in &operators {
            current = current
                .iter()
                .map(|a| op.apply_element(a))
                .collect::<Result<_>>()?;
        }
        for (item, a) in current.iter().enumerate() {
            if !a.in_commutator_closure(tol.max(1e-9 * a.op_norm())) {
                return Err(Error::TraceObstruction {
                    item,
                    block: 0,
                    trace: a.block_trace(0).norm(),
                });
            }
        }
        let norms: Vec<f64> = current.iter().map(Element::op_norm).collect();
        if norms[k] >= threshold {
            return Err(Error::ResidualTooLarge {
                residual: norms[k],
                eps: threshold,
            });
        }
        stages.push(Stage {
            threshold,
            operators,
            norms,
        });
    }
    let eps_met = current.iter().all(|a| a.op_norm() <= eps);
    Ok(SequentialSchedule { stages, eps_met })
}
