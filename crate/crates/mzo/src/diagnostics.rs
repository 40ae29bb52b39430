//! Monte-Carlo verification of the scaling laws the method relies on.
//!
//! The variance and bias bounds carry unknown universal constants, so every
//! check here tests a falsifiable quantity instead: a scaling exponent from a
//! log-log regression, an exact algebraic identity, or a two-sided mean
//! comparison at three standard errors. Reports carry both the empirical
//! values and the fitted constants; a check fails only when an exponent or an
//! identity is off, never because a constant is unknown.



use crate::chains::{ChainParams, ChainState};
use crate::error::{Error, Result};
use crate::estimators::{
    mlmc_estimate, rd_estimate, sample_ball, Feedback, MlmcConfig, SmoothingConfig,
};
use crate::optimizer::RunRecord;
use crate::problems::{AdversarialSpec, Oracle, ProblemSpec};
use crate::rng::{stream, STREAM_ESTIMATOR};
use crate::util::{dist_sq, loglog_slope, mean_se, mix_seed};

/// Least-squares fit `y ~ a + b x`; returns `(a, b, r_squared)`.
pub fn linear_fit_r2(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let b = crate::util::lsq_slope(xs, ys);
    let n = xs.len() as f64;
    let a = ys.iter().sum::<f64>() / n - b * xs.iter().sum::<f64>() / n;
    (a, b, crate::util::lsq_r2(xs, ys))
}

/// One labelled scalar statistic.
#[derive(Debug, Clone)]
pub struct SampleStat {
    pub label: String,
    pub mean: f64,
    pub se: f64,
    pub reps: usize,
}

/// A fitted scaling exponent with its acceptance window.
#[derive(Debug, Clone)]
pub struct ScalingFit {
    pub name: String,
    pub slope: f64,
    pub expected: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Outcome of one diagnostic.
#[derive(Debug, Clone)]
pub struct MomentReport {
    pub quantity: String,
    pub rows: Vec<SampleStat>,
    pub fits: Vec<ScalingFit>,
    pub passed: bool,
    pub notes: Vec<String>,
}

impl MomentReport {
    fn new(quantity: impl Into<String>) -> Self {
        MomentReport {
            quantity: quantity.into(),
            rows: Vec::new(),
            fits: Vec::new(),
            passed: true,
            notes: Vec::new(),
        }
    }

    fn push_fit(&mut self, name: impl Into<String>, slope: f64, expected: f64, tol: f64) {
        let pass = (slope - expected).abs() <= tol;
        self.passed &= pass;
        self.fits.push(ScalingFit {
            name: name.into(),
            slope,
            expected,
            tol,
            pass,
        });
    }

    fn require(&mut self, ok: bool, note: impl Into<String>) {
        if !ok {
            self.passed = false;
            self.notes.push(note.into());
        }
    }

    /// Render the report as plain text lines.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "[{}] {}\n",
            if self.passed { "PASS" } else { "FAIL" },
            self.quantity
        ));
        for r in &self.rows {
            out.push_str(&format!(
                "  {:<28} mean {:>14.6e}  se {:>12.4e}  reps {}\n",
                r.label, r.mean, r.se, r.reps
            ));
        }
        for f in &self.fits {
            out.push_str(&format!(
                "  fit {:<24} slope {:>8.4} expected {:>5.2} +- {:<5.2} [{}]\n",
                f.name,
                f.slope,
                f.expected,
                f.tol,
                if f.pass { "ok" } else { "OFF" }
            ));
        }
        for n in &self.notes {
            out.push_str(&format!("  note: {n}\n"));
        }
        out
    }
}

/// Variance of the batched oracle mean `(1/n) sum F(x, Z_i) - f(x)`:
/// slope -1 in `n` for the i.i.d. chain, slope +1 in `tau` at fixed `n`.
pub fn check_markov_variance(
    problem: &ProblemSpec,
    x: &[f64],
    n_grid: &[usize],
    tau_grid: &[u64],
    noise_std: f64,
    reps: usize,
    seed: u64,
) -> Result<MomentReport> {
    if reps < 100 {
        return Err(Error::Usage("need at least 100 replications".into()));
    }
    let mut report = MomentReport::new("batched oracle-mean variance under Markov noise");
    let fx = problem.eval_objective(x)?;
    let oracle = Oracle::plain(problem);

    let batch_var = |n: usize, tau: u64, tag: u64, report: &mut MomentReport| -> Result<f64> {
        let params = ChainParams::lazy_gaussian(problem.dim, tau, noise_std)?;
        let mut vals = Vec::with_capacity(reps);
        for r in 0..reps {
            let mut chain = ChainState::new(params, mix_seed(seed, &[tag, r as u64]))?;
            let mut acc = 0.0;
            for _ in 0..n {
                acc += oracle.value(x, &mut chain, true)?;
            }
            let dev = acc / n as f64 - fx;
            vals.push(dev * dev);
        }
        let (m, se) = mean_se(&vals);
        report.rows.push(SampleStat {
            label: format!("tau={tau} n={n}"),
            mean: m,
            se,
            reps,
        });
        Ok(m)
    };

    // Slope in n at tau = 1.
    let mut vars_n = Vec::new();
    for (i, &n) in n_grid.iter().enumerate() {
        vars_n.push(batch_var(n, 1, 10 + i as u64, &mut report)?);
    }
    let xs: Vec<f64> = n_grid.iter().map(|&n| n as f64).collect();
    report.push_fit("variance vs n (tau=1)", loglog_slope(&xs, &vars_n), -1.0, 0.2);

    // Slope in tau at fixed n.
    let n_fix = *n_grid.last().unwrap_or(&256);
    let mut vars_tau = Vec::new();
    for (i, &tau) in tau_grid.iter().enumerate() {
        vars_tau.push(batch_var(n_fix, tau, 100 + i as u64, &mut report)?);
    }
    let ts: Vec<f64> = tau_grid.iter().map(|&t| t as f64).collect();
    report.push_fit(
        format!("variance vs tau (n={n_fix})"),
        loglog_slope(&ts, &vars_tau),
        1.0,
        0.2,
    );
    Ok(report)
}

/// Smoothed-function properties via ball-average Monte Carlo with antithetic
/// pairs: `f_t(x) >= f(x)`, the smooth deviation `f_t - f <= L t^2`, the
/// Lipschitz deviation `f_t - f <= G t`, and `E_e[g] = grad f_t` for the
/// isotropic quadratic (where `grad f_t = grad f = x`).
pub fn check_smoothing(
    problem: &ProblemSpec,
    x: &[f64],
    t: f64,
    mc_samples: usize,
    seed: u64,
) -> Result<MomentReport> {
    let mut report = MomentReport::new("smoothed function properties");
    let d = problem.dim;
    if x.len() != d {
        return Err(Error::Usage("dimension mismatch".into()));
    }
    let fx = problem.eval_objective(x)?;
    let mut rng = stream(seed, 41);
    let mut gaps = Vec::with_capacity(mc_samples);
    let mut xp = vec![0.0; d];
    let mut xm = vec![0.0; d];
    for _ in 0..mc_samples {
        let r = sample_ball(d, &mut rng)?;
        for i in 0..d {
            xp[i] = x[i] + t * r[i];
            xm[i] = x[i] - t * r[i];
        }
        // Antithetic pair kills the odd part; each term is >= 0 by convexity.
        let even = 0.5 * (problem.objective(&xp) + problem.objective(&xm)) - fx;
        gaps.push(even);
    }
    let (gap, gap_se) = mean_se(&gaps);
    report.rows.push(SampleStat {
        label: format!("f_t - f at t={t}"),
        mean: gap,
        se: gap_se,
        reps: mc_samples,
    });
    report.require(gap >= -3.0 * gap_se, "f_t should dominate f");
    if let Some(l) = problem.lips_grad {
        report.require(
            gap <= l * t * t + 3.0 * gap_se,
            format!("f_t - f = {gap} exceeds L t^2 = {}", l * t * t),
        );
    }
    if let Some(g) = problem.lips_f {
        report.require(
            gap <= g * t + 3.0 * gap_se,
            format!("f_t - f = {gap} exceeds G t = {}", g * t),
        );
    }

    // E_e[g(x)] vs the analytic gradient for the quadratic families, where
    // grad f_t equals grad f exactly.
    if matches!(
        problem.kind,
        crate::problems::ProblemKind::QuadraticMarkov
            | crate::problems::ProblemKind::DiagQuadratic { .. }
    ) {
        let chain = ChainParams::lazy_gaussian(d, 1, 0.0)?;
        let oracle = Oracle::plain(problem);
        let cfg = SmoothingConfig::new(t, Feedback::TwoPoint)?;
        let grad = problem.grad_objective(x);
        let reps = mc_samples.min(20_000);
        let mut comp0 = Vec::with_capacity(reps);
        let mut chain_state = ChainState::new(chain, mix_seed(seed, &[7]))?;
        for _ in 0..reps {
            let g = rd_estimate(&oracle, &mut chain_state, x, 1, &cfg, &mut rng)?;
            comp0.push(g.vector[0]);
        }
        let (m0, se0) = mean_se(&comp0);
        report.rows.push(SampleStat {
            label: "E_e[g] first component".into(),
            mean: m0,
            se: se0,
            reps,
        });
        report.require(
            (m0 - grad[0]).abs() <= 3.0 * se0,
            format!("E_e[g] component {m0} vs gradient {}", grad[0]),
        );
    }
    Ok(report)
}

/// MLMC moment checks: variance slope -1 in `B` (in the regime where batches
/// exceed the holding time, so the 1/B law is visible), and approximate
/// linearity in `d` at fixed large `tau` (the d(d+tau) regime, not d^2 tau).
pub fn check_mlmc_moments(
    noise_std: f64,
    tau_b: u64,
    tau_d: u64,
    b_grid: &[usize],
    d_grid: &[usize],
    reps: usize,
    seed: u64,
) -> Result<MomentReport> {
    if reps < 1000 {
        return Err(Error::Usage("need at least 1000 replications".into()));
    }
    let mut report = MomentReport::new("MLMC estimator moments");

    let mse_at = |d: usize,
                  base_batch: usize,
                  b: usize,
                  tau: u64,
                  tag: u64,
                  report: &mut MomentReport|
     -> Result<f64> {
        let problem = ProblemSpec::quadratic_markov(d)?;
        let x = problem.start_point(0.01);
        let grad = problem.grad_objective(&x);
        let oracle = Oracle::plain(&problem);
        let chain = ChainParams::lazy_gaussian(d, tau, noise_std)?;
        let cfg = SmoothingConfig::new(1e-3, Feedback::TwoPoint)?;
        let mlmc = MlmcConfig::explicit(base_batch, 16.0, b)?;
        let mut sq = Vec::with_capacity(reps);
        for r in 0..reps {
            let s = mix_seed(seed, &[tag, r as u64]);
            let mut state = ChainState::new(chain, s)?;
            let mut rng = stream(s, STREAM_ESTIMATOR);
            let g = mlmc_estimate(&oracle, &mut state, &x, &mlmc, &cfg, &mut rng)?;
            sq.push(dist_sq(&g.vector, &grad));
        }
        let (m, se) = mean_se(&sq);
        report.rows.push(SampleStat {
            label: format!("E||g_ml - grad||^2 d={d} tau={tau} l={base_batch} B={b}"),
            mean: m,
            se,
            reps,
        });
        Ok(m)
    };

    // Variance vs B at small tau, with l = 16 B.
    let d0 = *d_grid.first().unwrap_or(&8);
    let mut var_b = Vec::new();
    for (i, &b) in b_grid.iter().enumerate() {
        var_b.push(mse_at(d0, 16 * b, b, tau_b, 200 + i as u64, &mut report)?);
    }
    let bs: Vec<f64> = b_grid.iter().map(|&b| b as f64).collect();
    report.push_fit("variance vs B", loglog_slope(&bs, &var_b), -1.0, 0.2);

    // Variance vs d at fixed large tau and fixed batch geometry: close to
    // linear in d, far from the d^2 a multiplicative d*tau picture implies.
    if d_grid.len() >= 2 {
        let base = 32.max(*d_grid.last().unwrap_or(&32));
        let mut var_d = Vec::new();
        for (i, &d) in d_grid.iter().enumerate() {
            var_d.push(mse_at(d, base, 8, tau_d, 300 + i as u64, &mut report)?);
        }
        let ds: Vec<f64> = d_grid.iter().map(|&d| d as f64).collect();
        let slope = loglog_slope(&ds, &var_d);
        report.push_fit("variance vs d (tau >> d)", slope, 1.0, 0.35);
    }
    Ok(report)
}

/// Mean of the MLMC estimator against the top-level random-direction mean:
/// the telescoping identity, checked componentwise at 3 standard errors.
pub fn check_mlmc_telescoping(
    problem: &ProblemSpec,
    chain: ChainParams,
    x: &[f64],
    mlmc: &MlmcConfig,
    t: f64,
    reps: usize,
    seed: u64,
) -> Result<MomentReport> {
    let mut report = MomentReport::new("MLMC telescoping mean identity");
    let oracle = Oracle::plain(problem);
    let cfg = SmoothingConfig::new(t, Feedback::TwoPoint)?;
    let top = (1usize << mlmc.j_max) * mlmc.base_batch;
    let d = problem.dim;
    let mut sum_ml = vec![0.0; d];
    let mut sumsq_ml = vec![0.0; d];
    let mut sum_rd = vec![0.0; d];
    let mut sumsq_rd = vec![0.0; d];
    for r in 0..reps {
        let s1 = mix_seed(seed, &[1, r as u64]);
        let s2 = mix_seed(seed, &[2, r as u64]);
        let mut c1 = ChainState::new(chain, s1)?;
        let mut rng1 = stream(s1, STREAM_ESTIMATOR);
        let g1 = mlmc_estimate(&oracle, &mut c1, x, mlmc, &cfg, &mut rng1)?;
        let mut c2 = ChainState::new(chain, s2)?;
        let mut rng2 = stream(s2, STREAM_ESTIMATOR);
        let g2 = rd_estimate(&oracle, &mut c2, x, top, &cfg, &mut rng2)?;
        for i in 0..d {
            sum_ml[i] += g1.vector[i];
            sumsq_ml[i] += g1.vector[i] * g1.vector[i];
            sum_rd[i] += g2.vector[i];
            sumsq_rd[i] += g2.vector[i] * g2.vector[i];
        }
    }
    let n = reps as f64;
    let mut worst: f64 = 0.0;
    for i in 0..d {
        let m1 = sum_ml[i] / n;
        let v1 = (sumsq_ml[i] / n - m1 * m1).max(0.0) / n;
        let m2 = sum_rd[i] / n;
        let v2 = (sumsq_rd[i] / n - m2 * m2).max(0.0) / n;
        let se = (v1 + v2).sqrt();
        let z = (m1 - m2).abs() / se.max(1e-300);
        worst = worst.max(z);
        if i == 0 {
            report.rows.push(SampleStat {
                label: "component 0: mean(g_ml)".into(),
                mean: m1,
                se: v1.sqrt(),
                reps,
            });
            report.rows.push(SampleStat {
                label: "component 0: mean(g_rd top)".into(),
                mean: m2,
                se: v2.sqrt(),
                reps,
            });
        }
    }
    report.rows.push(SampleStat {
        label: "worst |z| over components".into(),
        mean: worst,
        se: 0.0,
        reps,
    });
    report.require(
        worst <= 3.0,
        format!("telescoping identity violated: worst z = {worst}"),
    );
    Ok(report)
}

/// Adversarial robustness: the per-estimate bound `||g_hat - g_tilde|| <=
/// d Delta / t` on paired random streams, plus exact cancellation checks.
pub fn check_adversarial_floor(
    problem: &ProblemSpec,
    chain: ChainParams,
    adversarial: AdversarialSpec,
    t: f64,
    evals: usize,
    seed: u64,
) -> Result<MomentReport> {
    let mut report = MomentReport::new("adversarial per-estimate bound");
    let d = problem.dim;
    let clean = Oracle::plain(problem);
    let dirty = Oracle::with_adversarial(problem, adversarial);
    let cfg = SmoothingConfig::new(t, Feedback::TwoPoint)?;
    let bound = d as f64 * adversarial.delta_bound / t;
    let mut worst: f64 = 0.0;
    let mut rng = stream(seed, 51);
    for r in 0..evals {
        let s = mix_seed(seed, &[r as u64]);
        let mut c1 = ChainState::new(chain, s)?;
        let mut c2 = ChainState::new(chain, s)?;
        let x = sample_ball(d, &mut rng)?;
        let e = crate::estimators::sample_sphere(d, &mut rng)?;
        let g1 = crate::estimators::single_estimate(&dirty, &mut c1, &x, &e, &cfg)?;
        let g2 = crate::estimators::single_estimate(&clean, &mut c2, &x, &e, &cfg)?;
        let gap = dist_sq(&g1.vector, &g2.vector).sqrt();
        worst = worst.max(gap);
    }
    report.rows.push(SampleStat {
        label: format!("worst ||g_hat - g_tilde|| (bound {bound:.4e})"),
        mean: worst,
        se: 0.0,
        reps: evals,
    });
    report.require(
        worst <= bound * (1.0 + 1e-9) + 1e-12,
        format!("per-estimate bound violated: {worst} > {bound}"),
    );
    Ok(report)
}

/// Distribution of per-iteration batch sizes and of the total call count
/// across runs: mean against the closed form and monotone tail decay.
pub fn oracle_call_stats(records: &[RunRecord], expected_mean_per_iter: Option<f64>) -> MomentReport {
    let mut report = MomentReport::new("oracle call statistics");
    if records.is_empty() {
        report.require(false, "no records supplied");
        return report;
    }
    let mut per_iter = Vec::new();
    for rec in records {
        let mut prev = 0u64;
        for row in &rec.rows {
            if row.k == 0 {
                prev = row.calls_cum;
                continue;
            }
            per_iter.push((row.calls_cum - prev) as f64);
            prev = row.calls_cum;
        }
    }
    if !per_iter.is_empty() {
        let (m, se) = mean_se(&per_iter);
        report.rows.push(SampleStat {
            label: "calls per iteration".into(),
            mean: m,
            se,
            reps: per_iter.len(),
        });
        if let Some(expect) = expected_mean_per_iter {
            report.require(
                (m - expect).abs() <= 3.0 * se,
                format!("mean calls/iter {m} vs closed form {expect} (se {se})"),
            );
        }
    }
    let totals: Vec<f64> = records.iter().map(|r| r.total_calls as f64).collect();
    let (mt, set) = mean_se(&totals);
    report.rows.push(SampleStat {
        label: "total calls per run".into(),
        mean: mt,
        se: set,
        reps: totals.len(),
    });
    let mut prev_tail = f64::INFINITY;
    for &alpha in &[1.5, 2.0, 3.0] {
        let tail = totals.iter().filter(|&&s| s > alpha * mt).count() as f64 / totals.len() as f64;
        report.rows.push(SampleStat {
            label: format!("P(S > {alpha} E S)"),
            mean: tail,
            se: 0.0,
            reps: totals.len(),
        });
        report.require(
            tail <= prev_tail + 1e-12,
            "tail probabilities must decay in alpha",
        );
        prev_tail = tail;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn markov_variance_slopes() {
        let problem = ProblemSpec::quadratic_markov(2).unwrap();
        let x = [0.5, 0.5];
        let rep = check_markov_variance(
            &problem,
            &x,
            &[1, 4, 16, 64],
            &[1, 4, 16, 64],
            1.0,
            600,
            7,
        )
        .unwrap();
        assert!(rep.passed, "{}", rep.render());
    }

    #[test]
    fn markov_variance_zero_noise() {
        let problem = ProblemSpec::quadratic_markov(2).unwrap();
        let oracle = Oracle::plain(&problem);
        let x = [0.3, 0.3];
        let chain = ChainParams::lazy_gaussian(2, 4, 0.0).unwrap();
        let mut state = ChainState::new(chain, 1).unwrap();
        let mut acc: f64 = 0.0;
        for _ in 0..32 {
            acc += oracle.value(&x, &mut state, true).unwrap();
        }
        let fx = problem.eval_objective(&x).unwrap();
        assert!((acc / 32.0 - fx).abs() < 1e-14);
    }

    #[test]
    fn smoothing_identity_on_quadratic() {
        // f_t - f = t^2 d/(2(d+2)): d=2, t=1 -> 0.25.
        let problem = ProblemSpec::quadratic_markov(2).unwrap();
        let rep = check_smoothing(&problem, &[0.3, -0.4], 1.0, 40_000, 3).unwrap();
        assert!(rep.passed, "{}", rep.render());
        let gap = rep.rows[0].mean;
        assert!(
            (gap - 0.25).abs() <= 3.0 * rep.rows[0].se,
            "gap {gap} vs 0.25"
        );
    }

    #[test]
    fn smoothing_nonsmooth_band() {
        let problem = ProblemSpec::nonsmooth_l1(4, 1.0, 0.5).unwrap();
        let rep = check_smoothing(&problem, &[0.2, -0.1, 0.05, 0.3], 0.1, 20_000, 5).unwrap();
        assert!(rep.passed, "{}", rep.render());
    }

    #[test]
    fn telescoping_check_catches_broken_multiplier() {
        // A deliberately broken MLMC (missing 2^K factor) must fail the
        // telescoping comparison that the correct estimator passes.
        use crate::estimators::sample_level;
        let problem = ProblemSpec::quadratic_markov(2).unwrap();
        let chain = ChainParams::lazy_gaussian(2, 8, 1.0).unwrap();
        let x = [0.5, 0.5];
        let cfg = SmoothingConfig::new(0.01, Feedback::TwoPoint).unwrap();
        let oracle = Oracle::plain(&problem);
        let mlmc = MlmcConfig::explicit(2, 8.0, 1).unwrap();
        let top = (1usize << mlmc.j_max) * mlmc.base_batch;

        // Start the chain away from stationarity so depth matters: the
        // broken estimator's mean then visibly differs from the top level.
        let far = vec![25.0, 25.0];
        let reps = 4000;
        let mut broken_means = vec![0.0; 2];
        let mut top_means = vec![0.0; 2];
        for r in 0..reps {
            let s = mix_seed(99, &[r as u64]);
            let mut c1 = ChainState::with_initial(chain, s, far.clone()).unwrap();
            let mut rng1 = stream(s, STREAM_ESTIMATOR);
            // broken mlmc: correction without the 2^K amplification
            let level = sample_level(&mut rng1) - 1;
            let mut est =
                rd_estimate(&oracle, &mut c1, &x, mlmc.base_batch, &cfg, &mut rng1).unwrap();
            if level >= 1 && (level as f64).exp2() <= mlmc.level_cap {
                let block = (1usize << level) * mlmc.base_batch;
                let full = rd_estimate(&oracle, &mut c1, &x, block, &cfg, &mut rng1).unwrap();
                for i in 0..2 {
                    // missing * 2^level here
                    est.vector[i] += full.vector[i] - est.vector[i];
                }
            }
            let s2 = mix_seed(199, &[r as u64]);
            let mut c2 = ChainState::with_initial(chain, s2, far.clone()).unwrap();
            let mut rng2 = stream(s2, STREAM_ESTIMATOR);
            let g2 = rd_estimate(&oracle, &mut c2, &x, top, &cfg, &mut rng2).unwrap();
            for i in 0..2 {
                broken_means[i] += est.vector[i] / reps as f64;
                top_means[i] += g2.vector[i] / reps as f64;
            }
        }
        let gap = dist_sq(&broken_means, &top_means).sqrt();
        assert!(
            gap > 1.0,
            "broken estimator should miss the top-level mean; gap {gap}"
        );
    }

    #[test]
    fn adversarial_bound_and_constant_cancellation() {
        let problem = ProblemSpec::quadratic_markov(3).unwrap();
        let chain = ChainParams::lazy_gaussian(3, 4, 0.5).unwrap();
        let adv = AdversarialSpec::new(0.01, crate::problems::Perturbation::SignFlip).unwrap();
        let rep = check_adversarial_floor(&problem, chain, adv, 0.1, 2000, 3).unwrap();
        assert!(rep.passed, "{}", rep.render());

        // Zero bound: wrapper is the identity.
        let adv0 = AdversarialSpec::new(0.0, crate::problems::Perturbation::SignFlip).unwrap();
        let rep0 = check_adversarial_floor(&problem, chain, adv0, 0.1, 200, 4).unwrap();
        assert!(rep0.rows[0].mean == 0.0);

        // Constant perturbation cancels exactly in two-point differences.
        let advc = AdversarialSpec::new(5.0, crate::problems::Perturbation::Constant).unwrap();
        let repc = check_adversarial_floor(&problem, chain, advc, 0.1, 200, 5).unwrap();
        assert!(repc.rows[0].mean == 0.0, "{}", repc.render());
    }

    #[test]
    fn call_stats_on_runs() {
        use crate::optimizer::{derive_params, run, GradSource, PChoice, RunConfig};
        let problem = ProblemSpec::quadratic_markov(2).unwrap();
        let params = derive_params(
            2,
            1.0,
            1.0,
            1e-2,
            1e-4,
            PChoice::Auto,
            1,
            Feedback::TwoPoint,
            true,
            50,
        )
        .unwrap();
        let chain = ChainParams::lazy_gaussian(2, 4, 0.1).unwrap();
        let mut records = Vec::new();
        for seed in 0..40 {
            let cfg = RunConfig {
                params,
                chain,
                x0: problem.start_point(1e-2),
                grad_source: GradSource::Mlmc,
                adversarial: None,
                record_trajectory: true,
            };
            records.push(run(&problem, &cfg, seed).unwrap());
        }
        let mlmc = params.mlmc_config();
        let rep = oracle_call_stats(&records, Some(mlmc.expected_oracle_calls()));
        assert!(rep.passed, "{}", rep.render());

        // Deterministic stand-in: zero variance in calls.
        let mut det = Vec::new();
        for seed in 0..5 {
            let cfg = RunConfig {
                params,
                chain,
                x0: problem.start_point(1e-2),
                grad_source: GradSource::ExactGradient,
                adversarial: None,
                record_trajectory: true,
            };
            det.push(run(&problem, &cfg, seed).unwrap());
        }
        let repd = oracle_call_stats(&det, Some(0.0));
        assert!(repd.passed, "{}", repd.render());
        assert!(repd.rows[0].se == 0.0 || repd.rows[0].se.is_nan());
    }
}
