//! Named verification suites behind `mzo verify <suite>`.
//!
//! Each suite runs a fixed-seed subset of the statistical diagnostics and
//! exactness checks and renders a plain-text report. A suite passes only if
//! every check passes; the CLI maps that to the process exit code.

use crate::chains::{self, ChainParams, ChainState};
use crate::diagnostics::{
    check_adversarial_floor, check_markov_variance, check_mlmc_moments, check_mlmc_telescoping,
    check_smoothing, MomentReport, SampleStat,
};
use crate::error::{Error, Result};
use crate::estimators::{mlmc_estimate, MlmcConfig, SmoothingConfig};
use crate::optimizer::{derive_params, run, GradSource, PChoice, RunConfig};
use crate::problems::{AdversarialSpec, Oracle, Perturbation, ProblemSpec};
use crate::rng::{stream, STREAM_ESTIMATOR};
use crate::util::{mean_se, mix_seed};
use crate::Feedback;

pub const SUITES: &[&str] = &[
    "chains",
    "estimators",
    "smoothing",
    "mlmc",
    "optimizer",
    "all",
];

/// Run one named suite; returns the reports in execution order.
pub fn run_suite(name: &str, seed: u64) -> Result<Vec<MomentReport>> {
    match name {
        "chains" => suite_chains(seed),
        "estimators" => suite_estimators(seed),
        "smoothing" => suite_smoothing(seed),
        "mlmc" => suite_mlmc(seed),
        "optimizer" => suite_optimizer(seed),
        "all" => {
            let mut all = Vec::new();
            for s in ["chains", "estimators", "smoothing", "mlmc", "optimizer"] {
                all.extend(run_suite(s, seed)?);
            }
            Ok(all)
        }
        other => Err(Error::Usage(format!(
            "unknown suite `{other}`; expected one of {SUITES:?}"
        ))),
    }
}

pub fn render_reports(suite: &str, reports: &[MomentReport]) -> (bool, String) {
    let passed = reports.iter().all(|r| r.passed);
    let mut text = format!(
        "verification suite `{suite}`: {}\n\n",
        if passed { "PASS" } else { "FAIL" }
    );
    for r in reports {
        text.push_str(&r.render());
        text.push('\n');
    }
    (passed, text)
}

fn suite_chains(seed: u64) -> Result<Vec<MomentReport>> {
    let mut reports = Vec::new();

    let mut rep = MomentReport {
        quantity: "lazy chain mixing time".into(),
        rows: Vec::new(),
        fits: Vec::new(),
        passed: true,
        notes: Vec::new(),
    };
    for (tau, expect) in [(1u64, 1u64), (10, 14), (100, 138)] {
        let params = ChainParams::lazy_gaussian(2, tau, 1.0)?;
        let k = chains::empirical_mixing_time(params, 0.25, 4000, mix_seed(seed, &[tau]))?;
        rep.rows.push(SampleStat {
            label: format!("tau={tau}: k"),
            mean: k as f64,
            se: 0.0,
            reps: 4000,
        });
        if k != expect {
            rep.passed = false;
            rep.notes.push(format!("tau={tau}: k={k}, expected {expect}"));
        }
    }
    reports.push(rep);

    let mut rep = MomentReport {
        quantity: "stationary moments of the lazy chain".into(),
        rows: Vec::new(),
        fits: Vec::new(),
        passed: true,
        notes: Vec::new(),
    };
    let s = 1.25f64;
    let params = ChainParams::lazy_gaussian(2, 5, s)?;
    for &k in &[0u64, 10, 100] {
        let n = 8000u64;
        let mut sq = Vec::with_capacity(2 * n as usize);
        for i in 0..n {
            let mut c = ChainState::new(params, mix_seed(seed, &[k, i]))?;
            c.advance_by(k);
            for &z in c.current() {
                sq.push(z * z);
            }
        }
        let (v, se) = mean_se(&sq);
        rep.rows.push(SampleStat {
            label: format!("per-coordinate variance at k={k}"),
            mean: v,
            se,
            reps: sq.len(),
        });
        if (v - s * s).abs() > 3.0 * se {
            rep.passed = false;
            rep.notes
                .push(format!("variance at k={k} is {v}, expected {}", s * s));
        }
    }
    reports.push(rep);
    Ok(reports)
}

fn suite_estimators(seed: u64) -> Result<Vec<MomentReport>> {
    let mut reports = Vec::new();
    let problem = ProblemSpec::quadratic_markov(2)?;
    reports.push(check_markov_variance(
        &problem,
        &[0.5, 0.5],
        &[1, 4, 16, 64],
        &[1, 4, 16, 64],
        1.0,
        1000,
        mix_seed(seed, &[1]),
    )?);

    // Quadratic exactness of single two-point estimates across t scales.
    let mut rep = MomentReport {
        quantity: "two-point quadratic exactness".into(),
        rows: Vec::new(),
        fits: Vec::new(),
        passed: true,
        notes: Vec::new(),
    };
    let problem = ProblemSpec::quadratic_markov(4)?;
    let oracle = Oracle::plain(&problem);
    let chain = ChainParams::lazy_gaussian(4, 8, 1.0)?;
    let mut worst: f64 = 0.0;
    for (ti, &t) in [1e-8, 1e-2, 1.0].iter().enumerate() {
        let cfg = SmoothingConfig::new(t, Feedback::TwoPoint)?;
        for r in 0..200u64 {
            let s = mix_seed(seed, &[2, ti as u64, r]);
            let mut state = ChainState::new(chain, s)?;
            let z = state.current().to_vec();
            let mut rng = stream(s, STREAM_ESTIMATOR);
            let x = crate::estimators::sample_ball(4, &mut rng)?;
            let e = crate::estimators::sample_sphere(4, &mut rng)?;
            let g = crate::estimators::single_estimate(&oracle, &mut state, &x, &e, &cfg)?;
            let coef = 4.0
                * x.iter()
                    .zip(&z)
                    .zip(&e)
                    .map(|((xi, zi), ei)| (xi + zi) * ei)
                    .sum::<f64>();
            let scale = coef.abs().max(1e-12);
            for i in 0..4 {
                worst = worst.max((g.vector[i] - coef * e[i]).abs() / scale);
            }
        }
    }
    rep.rows.push(SampleStat {
        label: "worst relative deviation".into(),
        mean: worst,
        se: 0.0,
        reps: 600,
    });
    if worst > 1e-10 {
        rep.passed = false;
        rep.notes
            .push(format!("estimate deviates from d<x+Z,e>e by {worst}"));
    }
    reports.push(rep);
    Ok(reports)
}

fn suite_smoothing(seed: u64) -> Result<Vec<MomentReport>> {
    let mut reports = Vec::new();
    let quad = ProblemSpec::quadratic_markov(2)?;
    // Emits the ball-moment row: f_t - f = t^2 d/(2(d+2)).
    reports.push(check_smoothing(
        &quad,
        &[0.3, -0.4],
        1.0,
        40_000,
        mix_seed(seed, &[1]),
    )?);
    let ns = ProblemSpec::nonsmooth_l1(4, 1.0, 0.5)?;
    reports.push(check_smoothing(
        &ns,
        &[0.2, -0.1, 0.05, 0.3],
        0.1,
        20_000,
        mix_seed(seed, &[2]),
    )?);
    Ok(reports)
}

fn suite_mlmc(seed: u64) -> Result<Vec<MomentReport>> {
    let mut reports = Vec::new();
    let problem = ProblemSpec::quadratic_markov(8)?;
    let chain = ChainParams::lazy_gaussian(8, 8, 1.0)?;
    let mlmc = MlmcConfig::explicit(4, 8.0, 1)?;
    reports.push(check_mlmc_telescoping(
        &problem,
        chain,
        &problem.start_point(0.25),
        &mlmc,
        1e-2,
        20_000,
        mix_seed(seed, &[1]),
    )?);
    reports.push(check_mlmc_moments(
        1.0,
        2,
        256,
        &[1, 4, 16],
        &[4, 8, 16, 32],
        2000,
        mix_seed(seed, &[2]),
    )?);

    // Worked-example frequencies with the M = 2^60 surrogate.
    let mut rep = MomentReport {
        quantity: "MLMC level frequencies (l=1, B=1, M=2^60)".into(),
        rows: Vec::new(),
        fits: Vec::new(),
        passed: true,
        notes: Vec::new(),
    };
    let problem = ProblemSpec::quadratic_markov(1)?;
    let oracle = Oracle::plain(&problem);
    let chain = ChainParams::iid(1, 1.0)?;
    let cfg = SmoothingConfig::new(0.5, Feedback::TwoPoint)?;
    let mlmc = MlmcConfig::explicit(1, (1u64 << 60) as f64, 1)?;
    let n = 100_000u64;
    let mut base = 0u64;
    let mut lvl1 = 0u64;
    for i in 0..n {
        let s = mix_seed(seed, &[3, i]);
        let mut state = ChainState::new(chain, s)?;
        let mut rng = stream(s, STREAM_ESTIMATOR);
        let g = mlmc_estimate(&oracle, &mut state, &[0.0], &mlmc, &cfg, &mut rng)?;
        match g.level_j {
            0 => base += 1,
            1 => lvl1 += 1,
            _ => {}
        }
    }
    let f0 = base as f64 / n as f64;
    let f1 = lvl1 as f64 / n as f64;
    rep.rows.push(SampleStat {
        label: "P(base only)".into(),
        mean: f0,
        se: (0.5 * 0.5 / n as f64).sqrt(),
        reps: n as usize,
    });
    rep.rows.push(SampleStat {
        label: "P(level 1)".into(),
        mean: f1,
        se: (0.25 * 0.75 / n as f64).sqrt(),
        reps: n as usize,
    });
    if (f0 - 0.5).abs() > 0.01 || (f1 - 0.25).abs() > 0.01 {
        rep.passed = false;
        rep.notes
            .push(format!("frequencies {f0}/{f1}, expected 0.5/0.25"));
    }
    reports.push(rep);
    Ok(reports)
}

fn suite_optimizer(seed: u64) -> Result<Vec<MomentReport>> {
    let mut reports = Vec::new();

    let mut rep = MomentReport {
        quantity: "deterministic convergence and Lyapunov decay".into(),
        rows: Vec::new(),
        fits: Vec::new(),
        passed: true,
        notes: Vec::new(),
    };
    let problem = ProblemSpec::diag_quadratic(4, 0.1, 1.0)?;
    // B large enough that direction noise stays below the per-iteration
    // contraction; small B runs are monotone only in expectation.
    let params = derive_params(
        4,
        0.1,
        1.0,
        0.75,
        3.16e-5,
        PChoice::Auto,
        128,
        Feedback::TwoPoint,
        true,
        1000,
    )?;
    let cfg = RunConfig {
        params,
        chain: ChainParams::lazy_gaussian(4, 1, 0.0)?,
        x0: problem.start_point(1e-2),
        grad_source: GradSource::Mlmc,
        adversarial: None,
        record_trajectory: true,
    };
    let rec = run(&problem, &cfg, mix_seed(seed, &[1]))?;
    rep.rows.push(SampleStat {
        label: "final squared error".into(),
        mean: rec.final_err_sq,
        se: 0.0,
        reps: 1,
    });
    if rec.final_err_sq > 1e-8 {
        rep.passed = false;
        rep.notes
            .push(format!("final error {} above 1e-8", rec.final_err_sq));
    }
    let mut max_rise = 0.0f64;
    for w in rec.rows.windows(2) {
        if w[0].k >= 10 {
            max_rise = max_rise.max(w[1].lyapunov - w[0].lyapunov);
        }
    }
    rep.rows.push(SampleStat {
        label: "max Lyapunov rise after k=10".into(),
        mean: max_rise,
        se: 0.0,
        reps: rec.rows.len(),
    });
    if max_rise > 1e-15 * rec.rows[10].lyapunov.max(1e-300) {
        rep.passed = false;
        rep.notes.push(format!("Lyapunov rose by {max_rise}"));
    }
    reports.push(rep);

    let problem = ProblemSpec::quadratic_markov(3)?;
    let chain = ChainParams::lazy_gaussian(3, 4, 0.1)?;
    let adv = AdversarialSpec::new(1e-3, Perturbation::SignFlip)?;
    reports.push(check_adversarial_floor(
        &problem,
        chain,
        adv,
        0.05,
        2000,
        mix_seed(seed, &[2]),
    )?);
    Ok(reports)
}
