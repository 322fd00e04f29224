//! The work behind each subcommand, separated from argument parsing and
//! file output so tests can drive it directly.

use std::time::Instant;

use dixmier_core::averaging::{
    check_condition_i, dixmier_iterate, simultaneous_zero_average, ConditionConfig, IterateConfig,
    Subspace,
};
use dixmier_core::duality::{verify_theorem, Budget, DualityReport, MixInfProblem};
use dixmier_core::hmap::{verify_h_map, HMapConfig, HMapReport, LinearMap};
use dixmier_core::json::{DualityReportJson, MixingOperatorJson, StateJson};
use dixmier_core::Error;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::instance::{generate, Instance, InstanceSpec};

/// Whether a run verified what it set out to verify.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceFailureJson {
    pub item: usize,
    pub block: usize,
    pub trace: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdealCertificateJson {
    pub block: usize,
    pub certified: bool,
    pub optimum: f64,
    pub dual_lower: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZeroAverageReport {
    pub passes: bool,
    pub subspace_dim: usize,
    pub commutator_ok: bool,
    pub trace_failures: Vec<TraceFailureJson>,
    pub ideals: Vec<IdealCertificateJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstruction: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<MixingOperatorJson>,
}

/// Certifies that the span of every entry of every tuple (plus the unit when
/// asked) is blockwise traceless and builds the averaging operator.
pub fn zero_average(
    instance: &Instance,
    include_unit: bool,
    eps: f64,
) -> dixmier_core::Result<ZeroAverageReport> {
    let algebra = instance.algebra();
    let mut elements: Vec<_> = instance
        .tuples
        .iter()
        .flat_map(|t| t.entries().iter().cloned())
        .collect();
    if include_unit {
        elements.push(algebra.unit());
    }
    let v = Subspace::spanned_by(&algebra, &elements)?;
    let config = ConditionConfig {
        solver: dixmier_core::state_solver::StateSolverConfig {
            seed: instance.spec.seed,
            ..Default::default()
        },
        ..ConditionConfig::default()
    };
    let cert = check_condition_i(&v, &config);
    let averaged = simultaneous_zero_average(&v, eps);
    let (residual, operator, obstruction) = match &averaged {
        Ok(op) => (
            Some(v.max_residual(op)?),
            Some(MixingOperatorJson::from(op)),
            None,
        ),
        Err(e @ (Error::TraceObstruction { .. } | Error::ResidualTooLarge { .. })) => {
            (None, None, Some(e.to_string()))
        }
        Err(e) => return Err(e.clone()),
    };
    let obstruction = obstruction.or_else(|| cert.obstruction().map(|e| e.to_string()));
    Ok(ZeroAverageReport {
        passes: cert.passes() && averaged.is_ok(),
        subspace_dim: v.dim(),
        commutator_ok: cert.commutator_ok,
        trace_failures: cert
            .trace_failures
            .iter()
            .map(|f| TraceFailureJson {
                item: f.item,
                block: f.block,
                trace: [f.trace.re, f.trace.im],
            })
            .collect(),
        ideals: cert
            .per_ideal
            .iter()
            .map(|c| IdealCertificateJson {
                block: c.block,
                certified: c.state.is_some(),
                optimum: c.optimum,
                dual_lower: c.dual_lower,
                state: c.state.as_ref().map(StateJson::from),
            })
            .collect(),
        residual,
        obstruction,
        operator,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterateItem {
    pub tuple: usize,
    pub steps: usize,
    pub initial_norm: f64,
    pub max_norm: f64,
    pub final_residual: f64,
    pub eps_met: bool,
    pub monotone: bool,
    pub within_ball: bool,
    pub residuals: Vec<f64>,
    pub schedule: Vec<MixingOperatorJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterateReport {
    /// Invariants held for every tuple; meeting `eps` is reported separately.
    pub invariants_ok: bool,
    pub eps: f64,
    pub items: Vec<IterateItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub tuple: usize,
    pub step: usize,
    pub residual: f64,
}

/// Successive averaging of every tuple toward its center-valued trace.
pub fn iterate(instance: &Instance, config: &IterateConfig) -> IterateReport {
    let items: Vec<IterateItem> = instance
        .tuples
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            let cfg = IterateConfig {
                seed: config.seed.wrapping_add(i as u64),
                ..config.clone()
            };
            let trace = dixmier_iterate(t, &cfg);
            let initial_norm = t.norm();
            IterateItem {
                tuple: i,
                steps: trace.schedule.len(),
                initial_norm,
                max_norm: trace.max_norm,
                final_residual: trace.final_residual(),
                eps_met: trace.final_residual() <= config.eps,
                monotone: trace.residuals.windows(2).all(|w| w[1] <= w[0]),
                within_ball: trace.max_norm <= initial_norm * (1.0 + 1e-10),
                residuals: trace.residuals.clone(),
                schedule: trace
                    .schedule
                    .iter()
                    .map(MixingOperatorJson::from)
                    .collect(),
            }
        })
        .collect();
    IterateReport {
        invariants_ok: items.iter().all(|it| it.monotone && it.within_ball),
        eps: config.eps,
        items,
    }
}

pub fn residual_rows(report: &IterateReport) -> Vec<ResidualRow> {
    report
        .items
        .iter()
        .flat_map(|it| {
            it.residuals
                .iter()
                .enumerate()
                .map(|(step, &residual)| ResidualRow {
                    tuple: it.tuple,
                    step,
                    residual,
                })
        })
        .collect()
}

pub const SUMMARY_HEADER: [&str; 9] = [
    "instance_id",
    "B",
    "dims",
    "m",
    "n",
    "lower",
    "upper",
    "gap",
    "seconds",
];

/// One row of the batch summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub instance_id: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub dims: String,
    pub m: usize,
    pub n: usize,
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchItem {
    pub id: usize,
    pub instance: Instance,
    pub report: DualityReport,
    pub seconds: f64,
}

impl BatchItem {
    pub fn passes(&self) -> bool {
        self.report.weak_duality_ok && !self.report.under_converged
    }

    pub fn report_json(&self) -> DualityReportJson {
        DualityReportJson::from(&self.report)
    }

    pub fn summary(&self) -> SummaryRow {
        let dims = &self.instance.spec.block_dims;
        SummaryRow {
            instance_id: self.id,
            b: dims.len(),
            dims: dims
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(";"),
            m: self.instance.spec.m,
            n: self.instance.spec.n,
            lower: self.report.lower,
            upper: self.report.upper,
            gap: self.report.gap,
            seconds: self.seconds,
        }
    }
}

/// Runs both sides of the duality on one instance.
pub fn verify_instance(
    instance: &Instance,
    budget: &Budget,
    tol: f64,
) -> dixmier_core::Result<DualityReport> {
    let problem = MixInfProblem::new(instance.tuples.clone(), budget.clone(), instance.spec.seed)?;
    verify_theorem(&problem, tol)
}

/// Instances for seeds `base.seed, base.seed + 1, …`, processed on a pool of
/// `jobs` threads; results come back in input order.
pub fn verify_batch(
    base: &InstanceSpec,
    count: usize,
    budget: &Budget,
    tol: f64,
    jobs: usize,
) -> dixmier_core::Result<Vec<BatchItem>> {
    let specs: Vec<InstanceSpec> = (0..count)
        .map(|i| base.with_seed(base.seed.wrapping_add(i as u64)))
        .collect();
    let instances = specs
        .iter()
        .map(generate)
        .collect::<dixmier_core::Result<Vec<_>>>()?;
    verify_instances(instances, budget, tol, jobs)
}

pub fn verify_instances(
    instances: Vec<Instance>,
    budget: &Budget,
    tol: f64,
    jobs: usize,
) -> dixmier_core::Result<Vec<BatchItem>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    pool.install(|| {
        instances
            .into_par_iter()
            .enumerate()
            .map(|(id, instance)| {
                let start = Instant::now();
                let report = verify_instance(&instance, budget, tol)?;
                Ok(BatchItem {
                    id,
                    instance,
                    report,
                    seconds: start.elapsed().as_secs_f64(),
                })
            })
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckJson {
    pub check: String,
    pub passed: bool,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HMapReportJson {
    pub candidate: String,
    pub accepted: bool,
    pub failed: Vec<String>,
    pub checks: Vec<CheckJson>,
    pub distance_to_trace: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realization_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realization: Option<MixingOperatorJson>,
}

impl HMapReportJson {
    pub fn new(candidate: &str, r: &HMapReport) -> Self {
        Self {
            candidate: candidate.to_string(),
            accepted: r.accepted(),
            failed: r.failed().iter().map(ToString::to_string).collect(),
            checks: r
                .checks
                .iter()
                .map(|c| CheckJson {
                    check: c.check.to_string(),
                    passed: c.passed,
                    deviation: c.deviation,
                })
                .collect(),
            distance_to_trace: r.distance_to_trace,
            realization_error: r.realization_error,
            realization: r.realization.as_ref().map(MixingOperatorJson::from),
        }
    }
}

/// Verifies a candidate; acceptance also requires the forced identity
/// `H = E` and an exact realization.
pub fn verify_h(
    name: &str,
    h: &LinearMap,
    seed: u64,
) -> dixmier_core::Result<(Outcome, HMapReportJson)> {
    let config = HMapConfig {
        seed,
        ..HMapConfig::default()
    };
    let report = verify_h_map(h, &config)?;
    let pass = report.accepted()
        && report.distance_to_trace <= config.tol
        && report.realization_error.is_some_and(|e| e <= config.tol);
    Ok((Outcome::from_pass(pass), HMapReportJson::new(name, &report)))
}
