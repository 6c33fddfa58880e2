//! Acceptance criteria, run in sequence with one PASS/FAIL line each.
//! `cargo test -p rsf-core --test acceptance`; `-- 3 7` runs a subset.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rsf_core::render::{horizontal_slice, render_ppm};
use rsf_core::rsf::{
    canonical_antisymmetric, canonical_block_matrix, decomposition_plan, mat_mul,
    random_orthogonal, transpose,
};
use rsf_core::solver::{
    initial_state, run, simulate_to_dir, step_rk4, FlowState, Mode, SolverConfig,
};
use rsf_core::verify::{
    acoustic_frequency, cross_slice_deviation, extension_check, extension_violation,
    identity_suite, kinematic_campaign, mass_drift, wedge_campaign, IdentityOptions, StudyOptions,
    VerificationReport,
};

type Outcome = Result<(bool, String), String>;

fn plan_counts() -> Outcome {
    let start = Instant::now();
    for d in 3..=12 {
        let p = decomposition_plan(d).map_err(|e| e.to_string())?;
        let mut expected: Vec<(usize, usize)> =
            (0..d / 2).map(|i| (2 * i + 1, 2 * i + 2)).collect();
        if d % 2 == 1 {
            expected.push((d, d + 1));
        }
        if p.m != (d + 1) / 2 || p.pairs != expected || p.m > d * (d - 1) / 2 {
            return Ok((false, format!("d={d}: {p}")));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((secs < 1.0, format!("d=3..12 M=floor((d+1)/2), {secs:.3}s")))
}

fn identities() -> Outcome {
    let start = Instant::now();
    let report = identity_suite(&IdentityOptions::default()).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let worst: Vec<String> = report
        .worst
        .iter()
        .map(|(k, v)| format!("{k}={v:.1e}"))
        .collect();
    Ok((
        report.passed && secs < 60.0,
        format!("{} in {secs:.1}s", worst.join(" ")),
    ))
}

fn campaign(report: &VerificationReport, secs: f64) -> Outcome {
    let mut ok = secs <= 600.0;
    let mut parts = Vec::new();
    for c in &report.components {
        let order = c.order_l2.and_then(|f| f.order());
        let below = c.order_l2.is_some_and(|f| f.below_floor);
        let last = c.pullback.last().expect("resolutions");
        let pass_order = below || order.is_some_and(|o| o >= 2.5);
        ok &= pass_order && last.l2 <= 1e-4;
        let errs: Vec<String> = c
            .pullback
            .iter()
            .map(|e| format!("{:.2e}", e.l2_rel))
            .collect();
        parts.push(format!(
            "Ω{}: rel L2 [{}] order {} abs L2 {:.1e}",
            c.component,
            errs.join(", "),
            order.map_or("floor".into(), |o| format!("{o:.2}")),
            last.l2
        ));
    }
    Ok((ok, format!("{}; {secs:.0}s", parts.join("; "))))
}

fn linearity(report: &VerificationReport) -> Outcome {
    let values: Vec<f64> = report
        .resolutions
        .iter()
        .flat_map(|r| r.residuals.iter().map(|s| s.linearity))
        .collect();
    let worst = values.iter().copied().fold(0.0, f64::max);
    Ok((
        !values.is_empty() && worst <= 1e-12,
        format!("{} snapshots, worst relative gap {worst:.1e}", values.len()),
    ))
}

fn wedges() -> Outcome {
    let w = wedge_campaign(&[16, 24, 32], 0.5, 2.0, 0.5).map_err(|e| e.to_string())?;
    Ok((
        w.passed,
        format!(
            "bound held: {}; direct order {:.2}, factor order {:.2}; direct {:?}",
            w.within_bound,
            w.direct_order.unwrap_or(f64::NAN),
            w.factor_order.unwrap_or(f64::NAN),
            w.direct
                .iter()
                .map(|v| format!("{v:.1e}"))
                .collect::<Vec<_>>()
        ),
    ))
}

fn negative_controls(report: &VerificationReport) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for c in &report.components {
        let positive = c.pullback.last().expect("resolutions").l2_rel;
        let control = c.control.ok_or("campaign ran without a control")?.l2_rel;
        let ratio = control / positive;
        ok &= ratio >= 1e3;
        parts.push(format!("pullback Ω{} ratio {ratio:.1e}", c.component));
    }
    let mut worst_ratio = f64::INFINITY;
    for d in 3..=8 {
        for seed in 0..5 {
            let k = d - 1;
            let positive = extension_check(d, k, seed).map_err(|e| e.to_string())?;
            let violated = extension_violation(d, k, seed).map_err(|e| e.to_string())?;
            let ratio = if positive == 0.0 {
                f64::INFINITY
            } else {
                violated / positive
            };
            worst_ratio = worst_ratio.min(if violated > 0.0 { ratio } else { 0.0 });
        }
    }
    ok &= worst_ratio >= 1e3;
    parts.push(format!("extension violation ratio ≥ {worst_ratio:.1e}"));
    Ok((ok, parts.join("; ")))
}

fn solver_health() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for mode in [Mode::Constrained, Mode::Free, Mode::KinematicTg] {
        let config = SolverConfig {
            mode,
            dims: [16, 16, 8],
            ..SolverConfig::default()
        };
        let rest = FlowState::rest(&config.grid3().map_err(|e| e.to_string())?, mode)
            .map_err(|e| e.to_string())?;
        let mut state = rest.clone();
        for _ in 0..5 {
            state = step_rk4(&state, &config, 0.05).map_err(|e| e.to_string())?;
        }
        let same = state
            .assembled()
            .components()
            .iter()
            .zip(rest.assembled().components())
            .all(|(a, b)| a.values() == b.values());
        if mode == Mode::KinematicTg {
            // the horizontal Taylor–Green flow is steady; rest means u3 = 0
            ok &= state.u3().values().iter().all(|&v| v == 0.0);
        } else {
            ok &= same;
        }
    }
    parts.push("rest steady".to_string());
    let drift = mass_drift(64, 3, 1.0).map_err(|e| e.to_string())?;
    ok &= drift <= 1e-6;
    parts.push(format!("mass drift {drift:.1e}/t"));
    let acoustic = acoustic_frequency(128, 1.0, 2.0).map_err(|e| e.to_string())?;
    ok &= acoustic.relative_error <= 0.01;
    parts.push(format!(
        "acoustic ω={:.5} (err {:.1e})",
        acoustic.measured, acoustic.relative_error
    ));
    let config = SolverConfig {
        seed: 5,
        t_end: 0.3,
        dims: [16, 16, 8],
        ..SolverConfig::default()
    };
    let dirs = [
        tempfile::tempdir().map_err(|e| e.to_string())?,
        tempfile::tempdir().map_err(|e| e.to_string())?,
    ];
    for dir in &dirs {
        simulate_to_dir(&config, dir.path()).map_err(|e| e.to_string())?;
    }
    let mut names: Vec<_> = std::fs::read_dir(dirs[0].path())
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    let identical = names.len() > 2
        && names.iter().all(|n| {
            std::fs::read(dirs[0].path().join(n)).ok() == std::fs::read(dirs[1].path().join(n)).ok()
        });
    ok &= identical;
    parts.push(format!("reproducible {} files: {identical}", names.len()));
    Ok((ok, parts.join("; ")))
}

fn slices() -> Outcome {
    let config = SolverConfig {
        seed: 7,
        t_end: 1.0,
        dims: [64; 3],
        snapshot_stride: 1000,
        ..SolverConfig::default()
    };
    let (initial, _) = initial_state(&config).map_err(|e| e.to_string())?;
    let mut last = None;
    run(&config, initial, |_, s, _| {
        last = Some(s.velocity3());
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    let u = last.expect("final snapshot");
    let dev: Vec<f64> = u.components().iter().map(cross_slice_deviation).collect();
    let amp3 = u.component(2).max_abs();
    let images = |c: usize| -> Result<Vec<Vec<u8>>, String> {
        let f = u.component(c);
        let levels = rsf_core::render::default_levels(f);
        (0..64)
            .step_by(8)
            .map(|k| {
                render_ppm(&horizontal_slice(f, k).map_err(|e| e.to_string())?, &levels)
                    .map_err(|e| e.to_string())
            })
            .collect()
    };
    let same_h = (0..2)
        .map(images)
        .collect::<Result<Vec<_>, _>>()?
        .iter()
        .all(|imgs| imgs.iter().all(|i| i == &imgs[0]));
    let u3_imgs = images(2)?;
    let u3_differ = u3_imgs.iter().any(|i| i != &u3_imgs[0]);
    let ok = dev[0] <= 1e-12 && dev[1] <= 1e-12 && dev[2] >= 1e-2 * amp3 && same_h && u3_differ;
    Ok((
        ok,
        format!(
            "cross-slice u1 {:.1e}, u2 {:.1e}, u3 {:.2} of amplitude; u_h images identical {same_h}, u3 images differ {u3_differ}",
            dev[0],
            dev[1],
            dev[2] / amp3
        ),
    ))
}

fn canonical_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for d in 2..=8 {
        for _ in 0..100 {
            let mut rates: Vec<f64> = (0..d / 2).map(|_| rng.gen_range(0.0..3.0)).collect();
            rates.sort_by(|a, b| b.total_cmp(a));
            let q = random_orthogonal(&mut rng, d);
            let a = mat_mul(
                &mat_mul(&q, &canonical_block_matrix(d, &rates), d),
                &transpose(&q, d),
                d,
            );
            let c = canonical_antisymmetric(&a, d).map_err(|e| e.to_string())?;
            for (x, y) in c.rates.iter().zip(&rates) {
                worst = worst.max((x - y).abs());
            }
            let back = c.conjugate(&a);
            let block = canonical_block_matrix(d, &c.rates);
            worst = worst.max(
                back.iter()
                    .zip(&block)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max),
            );
        }
    }
    Ok((
        worst <= 1e-10,
        format!("d=2..8 x100, worst deviation {worst:.1e}"),
    ))
}

fn main() {
    let wanted: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let run_it = |n: usize| wanted.is_empty() || wanted.contains(&n);
    let mut failures = 0;
    let mut report_line = |n: usize, name: &str, outcome: Outcome| {
        let (tag, detail) = match outcome {
            Ok((true, d)) => ("PASS", d),
            Ok((false, d)) => ("FAIL", d),
            Err(e) => ("FAIL", format!("error: {e}")),
        };
        if tag == "FAIL" {
            failures += 1;
        }
        println!("[{tag}] {n}. {name}: {detail}");
    };

    if run_it(1) {
        report_line(1, "decomposition plan", plan_counts());
    }
    if run_it(2) {
        report_line(2, "identity suite", identities());
    }
    if run_it(3) || run_it(4) || run_it(6) {
        let start = Instant::now();
        let campaign_report = kinematic_campaign(&[32, 64, 128], &StudyOptions::default());
        let secs = start.elapsed().as_secs_f64();
        match campaign_report {
            Ok(r) => {
                if run_it(3) {
                    report_line(3, "manufactured frozen-in", campaign(&r, secs));
                }
                if run_it(4) {
                    report_line(4, "residual linearity", linearity(&r));
                }
                if run_it(6) {
                    report_line(6, "negative controls", negative_controls(&r));
                }
            }
            Err(e) => {
                for (n, name) in [
                    (3, "manufactured frozen-in"),
                    (4, "residual linearity"),
                    (6, "negative controls"),
                ] {
                    if run_it(n) {
                        report_line(n, name, Err(e.to_string()));
                    }
                }
            }
        }
    }
    if run_it(5) {
        report_line(5, "wedge invariants", wedges());
    }
    if run_it(7) {
        report_line(7, "solver health", solver_health());
    }
    if run_it(8) {
        report_line(8, "slice structure", slices());
    }
    if run_it(9) {
        report_line(9, "canonical round trip", canonical_round_trip());
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
