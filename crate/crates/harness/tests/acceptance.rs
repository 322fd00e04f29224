//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines are always printed; exits non-zero when any
//! criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use dixmier_core::averaging::{
    check_condition_i, dixmier_iterate, sequential_zero_average, simultaneous_zero_average,
    ConditionConfig, IterateConfig, StageStrategy, Subspace,
};
use dixmier_core::duality::{mix_objective, state_bound_for_ideal, trace_bound, Budget};
use dixmier_core::hmap::{verify_h_map, HMapConfig};
use dixmier_core::json::DualityReportJson;
use dixmier_core::mixing::{centrally_convex_combination, lift_mixing, weyl_averaging_operator};
use dixmier_core::random::*;
use dixmier_core::state_solver::StateSolverConfig;
use dixmier_core::{Element, Error, FdAlgebra, Quotient, Tuple};
use dixmier_harness::commands::{verify_instance, verify_instances};
use dixmier_harness::{candidates, generate, InstanceSpec, Kind};
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn random_dims(rng: &mut impl Rng, max_blocks: usize, max_dim: usize) -> Vec<usize> {
    let b = rng.random_range(1..=max_blocks);
    (0..b).map(|_| rng.random_range(1..=max_dim)).collect()
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_dixmier")
}

fn weyl_exactness() -> Verdict {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (i, dims) in [vec![2], vec![3], vec![2, 3], vec![4, 2, 2]]
        .into_iter()
        .enumerate()
    {
        let alg = FdAlgebra::new(dims).unwrap();
        let t = weyl_averaging_operator(&alg);
        let mut rng = rng_for(1000, i as u64);
        for _ in 0..100 {
            let a = random_element(&alg, &mut rng);
            // the oracle: blockwise normalized trace times the identity
            let expected: Vec<_> = a
                .blocks()
                .iter()
                .map(|b| {
                    let n = b.nrows();
                    let tr: Complex64 = (0..n).map(|j| b[(j, j)]).sum();
                    dixmier_core::linalg::CMat::identity(n, n) * (tr / n as f64)
                })
                .collect();
            let expected = Element::from_blocks(&alg, expected).unwrap();
            worst = worst.max(t.apply_element(&a).unwrap().distance(&expected).unwrap());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-10 && secs < 5.0,
        format!("max error {worst:.2e} over 400 elements"),
    )
}

/// 50 subspaces of traceless elements, dim ≤ 5, blocks ≤ 4.
fn traceless_subspaces() -> Vec<Subspace> {
    (0..50)
        .map(|i| {
            let mut rng = rng_for(2000, i);
            let alg = FdAlgebra::new(random_dims(&mut rng, 3, 4)).unwrap();
            let dim = rng.random_range(1..=5);
            let elements: Vec<Element> = (0..dim)
                .map(|j| {
                    if j % 2 == 0 {
                        random_traceless(&alg, &mut rng)
                    } else {
                        random_commutator_sum(&alg, 2, &mut rng)
                    }
                })
                .collect();
            Subspace::spanned_by(&alg, &elements).unwrap()
        })
        .collect()
}

fn zero_average_realization() -> Verdict {
    let spaces = traceless_subspaces();
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut failures = 0;
    for v in &spaces {
        match simultaneous_zero_average(v, 1e-8) {
            Ok(op) => worst = worst.max(v.max_residual(&op).unwrap()),
            Err(_) => failures += 1,
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        failures == 0 && worst <= 1e-8 && secs < 10.0,
        format!(
            "{} subspaces, {failures} failures, max residual {worst:.2e}",
            spaces.len()
        ),
    )
}

fn condition_soundness() -> Verdict {
    let config = ConditionConfig::default();
    let mut certified = 0;
    let mut worst_state = 0.0f64;
    let spaces = traceless_subspaces();
    for v in &spaces {
        if simultaneous_zero_average(v, 1e-8).is_err() {
            continue;
        }
        let cert = check_condition_i(v, &config);
        if cert.passes() {
            certified += 1;
        }
        for ideal in &cert.per_ideal {
            if let Some(rho) = &ideal.state {
                for b in v.basis() {
                    worst_state = worst_state.max(rho.eval(b).unwrap().norm());
                }
            }
        }
    }
    let mut rejected = 0;
    for i in 0..20 {
        let mut rng = rng_for(3000, i);
        let alg = FdAlgebra::new(random_dims(&mut rng, 3, 4)).unwrap();
        let mut elements: Vec<Element> = (0..rng.random_range(0..4))
            .map(|_| random_traceless(&alg, &mut rng))
            .collect();
        let bad = if i % 2 == 0 {
            alg.unit()
        } else {
            random_element(&alg, &mut rng)
        };
        elements.insert(rng.random_range(0..=elements.len()), bad);
        let v = Subspace::spanned_by(&alg, &elements).unwrap();
        let cert = check_condition_i(&v, &config);
        let obstructed = matches!(
            simultaneous_zero_average(&v, 1e-8),
            Err(Error::TraceObstruction { .. })
        );
        if !cert.passes() && !cert.commutator_ok && obstructed {
            rejected += 1;
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(bin())
        .args([
            "zero-average",
            "--seed",
            "7",
            "--blocks",
            "2,3",
            "--n",
            "2",
            "--include-unit",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    let cli_ok = out.status.code() == Some(2)
        && String::from_utf8_lossy(&out.stderr).contains("trace obstruction");
    verdict(
        certified == spaces.len() && worst_state <= 1e-8 && rejected == 20 && cli_ok,
        format!(
            "{certified}/{} certified (max |rho(v)| {worst_state:.1e}), {rejected}/20 obstructions rejected, CLI exit {:?}",
            spaces.len(),
            out.status.code()
        ),
    )
}

fn weak_duality() -> Verdict {
    let violations: Vec<(u64, f64)> = (0..200u64)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = rng_for(4000, i);
            let alg = FdAlgebra::new(random_dims(&mut rng, 3, 3)).unwrap();
            let m = rng.random_range(1..=3);
            let n = rng.random_range(1..=3);
            let tuples: Vec<Tuple> = (0..m).map(|_| random_tuple(&alg, n, &mut rng)).collect();
            let ops: Vec<_> = (0..m)
                .map(|_| {
                    let terms = rng.random_range(1..=6);
                    random_mixing_operator(&alg, terms, &mut rng)
                })
                .collect();
            let value = mix_objective(&tuples, &ops).unwrap();
            let mut lower = trace_bound(&tuples).unwrap().value;
            for k in 0..alg.num_blocks() {
                let cfg = StateSolverConfig {
                    seed: i,
                    ..StateSolverConfig::default()
                };
                lower = lower.max(state_bound_for_ideal(&tuples, k, &cfg).unwrap().value);
            }
            (value < lower - 1e-8).then_some((i, lower - value))
        })
        .collect();
    verdict(
        violations.is_empty(),
        format!(
            "200 pairs, {} violations {:?}",
            violations.len(),
            violations
        ),
    )
}

fn strong_duality() -> Verdict {
    let start = Instant::now();
    let budget = Budget::default();
    let kinds = [
        Kind::Generic,
        Kind::AdversarialUnitComponent,
        Kind::CommutatorSpan,
        Kind::Generic,
        Kind::Generic,
    ];
    let mut instances = Vec::new();
    for i in 0..10u64 {
        let mut rng = rng_for(5000, i);
        let spec = InstanceSpec {
            seed: 5000 + i,
            block_dims: random_dims(&mut rng, 3, 3),
            n: rng.random_range(1..=3),
            m: rng.random_range(1..=3),
            kind: kinds[i as usize % kinds.len()],
        };
        instances.push(generate(&spec).unwrap());
    }
    let items = verify_instances(instances.clone(), &budget, 5e-2, 4).unwrap();
    let worst = items
        .iter()
        .map(|it| it.report.gap)
        .fold(f64::NEG_INFINITY, f64::max);
    // diagnostic only: the same optimizer without the clock-and-shift start
    let cold = Budget {
        warm_start: false,
        ..budget.clone()
    };
    let cold_worst = verify_instances(instances, &cold, 5e-2, 4)
        .unwrap()
        .iter()
        .map(|it| it.report.gap)
        .fold(f64::NEG_INFINITY, f64::max);
    let weak_ok = items.iter().all(|it| it.report.weak_duality_ok);
    let mut traceless_worst = f64::NEG_INFINITY;
    for i in 0..5u64 {
        let mut rng = rng_for(5100, i);
        let spec = InstanceSpec {
            seed: 5100 + i,
            block_dims: random_dims(&mut rng, 3, 3),
            n: rng.random_range(1..=3),
            m: rng.random_range(1..=3),
            kind: Kind::Traceless,
        };
        let report = verify_instance(&generate(&spec).unwrap(), &budget, 1e-6).unwrap();
        traceless_worst = traceless_worst.max(report.gap.abs().max(report.lower.abs()));
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 5e-2 && weak_ok && traceless_worst <= 1e-6 && secs < 120.0,
        format!(
            "max gap {worst:.2e} on 10 instances (cold-start diagnostic {cold_worst:.2e}), traceless max gap {traceless_worst:.1e}"
        ),
    )
}

fn central_convexity() -> Verdict {
    let mut worst = 0.0f64;
    for i in 0..50 {
        let mut rng = rng_for(6000, i);
        let alg = FdAlgebra::new(random_dims(&mut rng, 4, 3)).unwrap();
        let a = random_element(&alg, &mut rng);
        let t1 = random_mixing_operator(&alg, rng.random_range(1..=4), &mut rng);
        let t2 = random_mixing_operator(&alg, rng.random_range(1..=4), &mut rng);
        let bits: Vec<f64> = (0..alg.num_blocks())
            .map(|_| f64::from(rng.random_range(0..2u8)))
            .collect();
        let z = alg
            .central(
                &bits
                    .iter()
                    .map(|&b| Complex64::new(b, 0.0))
                    .collect::<Vec<_>>(),
            )
            .unwrap();
        let patched = centrally_convex_combination(&z, &t1, &t2).unwrap();
        let one_minus_z = alg.unit().sub(&z).unwrap();
        let expected = z
            .mul(&t1.apply_element(&a).unwrap())
            .unwrap()
            .add(&one_minus_z.mul(&t2.apply_element(&a).unwrap()).unwrap())
            .unwrap();
        worst = worst.max(
            patched
                .apply_element(&a)
                .unwrap()
                .distance(&expected)
                .unwrap(),
        );
    }
    verdict(worst <= 1e-10, format!("50 cases, max error {worst:.2e}"))
}

fn quotient_compatibility() -> Verdict {
    let mut lift_worst = 0.0f64;
    let mut match_worst = 0.0f64;
    let mut unreached = 0;
    for i in 0..50 {
        let mut rng = rng_for(7000, i);
        let b = rng.random_range(2..=4);
        let alg = FdAlgebra::new((0..b).map(|_| rng.random_range(1..=3)).collect()).unwrap();
        let keep = rng.random_range(1..b);
        let q = Quotient::new(&alg, &sample(&mut rng, b, keep).into_vec()).unwrap();
        let a = random_element(&alg, &mut rng);
        let pa = q.project(&a).unwrap();

        let t = random_mixing_operator(q.image(), 3, &mut rng);
        let lhs = q
            .project(&lift_mixing(&q, &t).unwrap().apply_element(&a).unwrap())
            .unwrap();
        lift_worst = lift_worst.max(lhs.max_abs_diff(&t.apply_element(&pa).unwrap()).unwrap());

        // the quotient optimizer approaches a central element of the quotient
        let run = dixmier_iterate(
            &Tuple::single(pa.clone()),
            &IterateConfig {
                seed: i,
                ..IterateConfig::default()
            },
        );
        if run.final_residual() > 1e-3 {
            unreached += 1;
            continue;
        }
        let reached = &run.final_tuple.entries()[0];
        // lift the schedule, then average the lifted result in A
        let mut x = a.clone();
        for step in &run.schedule {
            x = lift_mixing(&q, step).unwrap().apply_element(&x).unwrap();
        }
        let y = weyl_averaging_operator(&alg).apply_element(&x).unwrap();
        assert!(y.is_central(1e-10));
        match_worst = match_worst.max(q.project(&y).unwrap().distance(reached).unwrap());
    }
    verdict(
        lift_worst <= 1e-12 && match_worst <= 1e-3 && unreached == 0,
        format!(
            "lift error {lift_worst:.1e}, central match {match_worst:.1e}, {unreached} unreached"
        ),
    )
}

fn h_map_characterization() -> Verdict {
    let alg = FdAlgebra::new(vec![2, 2, 3]).unwrap();
    let config = HMapConfig {
        test_elements: 50,
        seed: 8000,
        ..HMapConfig::default()
    };
    let mut accepted = Vec::new();
    let mut realization = f64::NAN;
    for (i, (name, h)) in candidates::family(&alg, 8000).iter().enumerate() {
        let r = verify_h_map(h, &config).unwrap();
        if r.accepted() {
            accepted.push(name.clone());
            if i == 0 {
                realization = r.realization_error.unwrap();
            }
        }
    }
    verdict(
        accepted == ["trace"] && realization <= 1e-9,
        format!("accepted {accepted:?} of 20, realization error {realization:.1e}"),
    )
}

fn successive_halving() -> Verdict {
    let alg = FdAlgebra::new(vec![2, 3]).unwrap();
    let mut rng = rng_for(9000, 0);
    let items: Vec<Element> = (0..3).map(|_| random_traceless(&alg, &mut rng)).collect();
    let schedule = sequential_zero_average(&items, 1e-8, &StageStrategy::Exact).unwrap();
    // recompute ‖T_k⋯T₁ a_j‖ independently
    let mut current = items.clone();
    let mut ok = schedule.stages.len() == 3;
    for (k, stage) in schedule.stages.iter().enumerate() {
        ok &= stage.threshold == 0.5f64.powi(k as i32 + 1);
        for op in &stage.operators {
            current = current
                .iter()
                .map(|a| op.apply_element(a).unwrap())
                .collect();
        }
        for a in &current[..=k] {
            ok &= a.op_norm() < stage.threshold;
        }
    }
    let final_worst = current.iter().map(Element::op_norm).fold(0.0, f64::max);
    verdict(
        ok && final_worst <= 1e-8 && schedule.eps_met,
        format!(
            "thresholds {:?}, final max residual {final_worst:.1e}",
            schedule
                .stages
                .iter()
                .map(|s| s.threshold)
                .collect::<Vec<_>>()
        ),
    )
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

fn determinism() -> Verdict {
    let spec = InstanceSpec {
        seed: 10_000,
        block_dims: vec![2, 3],
        n: 2,
        m: 2,
        kind: Kind::AdversarialUnitComponent,
    };
    let budget = Budget {
        sweeps: 40,
        restarts: 3,
        ..Budget::default()
    };
    let mut library_ok = true;
    let first = generate(&spec).unwrap();
    library_ok &= first.to_json().unwrap() == generate(&spec).unwrap().to_json().unwrap();
    let report = |seed_spec: &InstanceSpec| {
        let r = verify_instance(&generate(seed_spec).unwrap(), &budget, 5e-2).unwrap();
        dixmier_core::json::to_string(&DualityReportJson::from(&r)).unwrap()
    };
    let a = report(&spec);
    library_ok &= a == report(&spec);
    // parse and re-serialize
    let parsed: DualityReportJson = dixmier_core::json::from_str(&a).unwrap();
    library_ok &= dixmier_core::json::to_string(&parsed).unwrap() == a;

    let runs: Vec<_> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let status = Command::new(bin())
                .args([
                    "verify-theorem",
                    "--seed",
                    "10001",
                    "--blocks",
                    "2,2",
                    "--n",
                    "2",
                    "--m",
                    "2",
                    "--kind",
                    "generic",
                    "--count",
                    "3",
                    "--budget",
                    "40",
                    "--restarts",
                    "3",
                    "--out",
                ])
                .arg(dir.path())
                .status()
                .unwrap();
            assert!(status.code().is_some());
            let files: Vec<Vec<u8>> = (0..3)
                .flat_map(|i| {
                    [
                        read(&dir.path().join(format!("instance_{i}.json"))),
                        read(&dir.path().join(format!("report_{i}.json"))),
                    ]
                })
                .collect();
            (dir, files)
        })
        .collect();
    let cli_ok = runs[0].1 == runs[1].1;
    verdict(
        library_ok && cli_ok,
        format!("library artifacts identical: {library_ok}, CLI artifacts identical: {cli_ok}"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("Weyl exactness", weyl_exactness),
        (
            "traceless subspaces averaged to zero",
            zero_average_realization,
        ),
        ("tracelessness certificate soundness both ways", condition_soundness),
        ("weak duality", weak_duality),
        ("duality gap at desk scale", strong_duality),
        ("central convexity", central_convexity),
        ("quotient compatibility", quotient_compatibility),
        ("H-map characterization", h_map_characterization),
        ("successive halving", successive_halving),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {} [{:.2}s]",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
