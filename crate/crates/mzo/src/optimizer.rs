//! Randomized accelerated zero-order gradient descent.
//!
//! The iteration keeps three sequences:
//!
//! ```text
//! x_g^k     = theta x_f^k + (1 - theta) x^k
//! x_f^{k+1} = x_g^k - p gamma g_ml(x_g^k)
//! x^{k+1}   = eta x_f^{k+1} + (p - eta) x_f^k
//!             + (1 - p)(1 - beta) x^k + (1 - p) beta x_g^k
//! ```
//!
//! with the momentum constants derived from `(gamma, p, mu)`:
//! `beta = sqrt(4 p^2 mu gamma / 3)`, `eta = sqrt(3 / (mu gamma))`,
//! `theta = (p/eta - 1) / (beta p/eta - 1)`, and the batching parameters
//! `M = 1/p + 2/beta`, `l = (floor(log2 M) + 1) B`.

use rand_chacha::ChaCha8Rng;

use crate::chains::{ChainParams, ChainState};
use crate::error::{Error, Result};
use crate::estimators::{mlmc_into, Feedback, GradEstimate, MlmcConfig, SmoothingConfig};
use crate::problems::{AdversarialSpec, Oracle, PairScratch, ProblemSpec};
use crate::rng::{stream, STREAM_ESTIMATOR};
use crate::util::{dist_sq, mix_seed, norm_sq};

/// Iterate norm beyond which a run is declared divergent.
const DIVERGENCE_FACTOR: f64 = 1e6;

/// Full parameter set of one solver configuration.
#[derive(Debug, Clone, Copy)]
pub struct MomentumParams {
    pub gamma: f64,
    pub t: f64,
    pub batch_multiplier: usize,
    pub p: f64,
    pub beta: f64,
    pub eta: f64,
    pub theta: f64,
    pub level_cap: f64,
    pub base_batch: usize,
    pub j_max: u32,
    pub iterations: usize,
    pub feedback: Feedback,
    pub smooth: bool,
    pub mu: f64,
    /// Effective gradient Lipschitz constant: `L` in the smooth case,
    /// `sqrt(d) G / t` in the non-smooth case.
    pub lips_eff: f64,
}

/// How `p` is chosen when not given explicitly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PChoice {
    /// `B / (B + d)` in the smooth regimes, `1` in the non-smooth ones.
    Auto,
    Fixed(f64),
}

/// Momentum/batching derivation from the primitive constants.
#[allow(clippy::too_many_arguments)]
pub fn derive_params(
    dim: usize,
    mu: f64,
    lips: f64,
    gamma: f64,
    t: f64,
    p_choice: PChoice,
    batch_multiplier: usize,
    feedback: Feedback,
    smooth: bool,
    iterations: usize,
) -> Result<MomentumParams> {
    if dim == 0 {
        return Err(Error::Config("dimension must be positive".into()));
    }
    if !(mu > 0.0 && lips > 0.0) {
        return Err(Error::Config("need mu > 0 and L (or G) > 0".into()));
    }
    if !(t > 0.0) {
        return Err(Error::Config("approximation step t must be positive".into()));
    }
    if batch_multiplier == 0 {
        return Err(Error::Config("batch multiplier B must be positive".into()));
    }
    let lips_eff = if smooth {
        lips
    } else {
        (dim as f64).sqrt() * lips / t
    };
    let cap = 3.0 / (4.0 * lips_eff);
    if !(gamma > 0.0 && gamma <= cap * (1.0 + 1e-12)) {
        return Err(Error::Config(format!(
            "stepsize gamma = {gamma} outside (0, 3/(4L)] = (0, {cap}]"
        )));
    }
    let p = match p_choice {
        PChoice::Fixed(p) => p,
        PChoice::Auto => {
            if smooth {
                batch_multiplier as f64 / (batch_multiplier as f64 + dim as f64)
            } else {
                1.0
            }
        }
    };
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Config("p must lie in (0, 1]".into()));
    }
    let beta = (4.0 * p * p * mu * gamma / 3.0).sqrt();
    let eta = (3.0 / (mu * gamma)).sqrt();
    let denom = beta * p / eta - 1.0;
    if denom.abs() < 1e-12 {
        return Err(Error::Config(
            "degenerate momentum: beta * p / eta is 1, theta undefined".into(),
        ));
    }
    let theta = (p / eta - 1.0) / denom;
    let level_cap = 1.0 / p + 2.0 / beta;
    let j_max = level_cap.log2().floor() as u32;
    let base_batch = (j_max as usize + 1) * batch_multiplier;
    Ok(MomentumParams {
        gamma,
        t,
        batch_multiplier,
        p,
        beta,
        eta,
        theta,
        level_cap,
        base_batch,
        j_max,
        iterations,
        feedback,
        smooth,
        mu,
        lips_eff,
    })
}

impl MomentumParams {
    pub(crate) fn mlmc_config(&self) -> MlmcConfig {
        MlmcConfig {
            batch_multiplier: self.batch_multiplier,
            p: self.p,
            level_cap: self.level_cap,
            base_batch: self.base_batch,
            j_max: self.j_max,
        }
    }

    pub(crate) fn smoothing_config(&self) -> SmoothingConfig {
        SmoothingConfig {
            t: self.t,
            feedback: self.feedback,
        }
    }

    /// Recompute the derived fields from the primitives; must match stored
    /// values bit-for-bit.
    pub fn recompute_derived(&self) -> (f64, f64, f64, f64, usize) {
        let beta = (4.0 * self.p * self.p * self.mu * self.gamma / 3.0).sqrt();
        let eta = (3.0 / (self.mu * self.gamma)).sqrt();
        let theta = (self.p / eta - 1.0) / (beta * self.p / eta - 1.0);
        let level_cap = 1.0 / self.p + 2.0 / beta;
        let base_batch = (level_cap.log2().floor() as usize + 1) * self.batch_multiplier;
        (beta, eta, theta, level_cap, base_batch)
    }

    /// The four affine coefficients of the `x^{k+1}` update; they sum to 1.
    pub fn affine_coefficients(&self) -> [f64; 4] {
        [
            self.eta,
            self.p - self.eta,
            (1.0 - self.p) * (1.0 - self.beta),
            (1.0 - self.p) * self.beta,
        ]
    }
}

/// Gradient source used by a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradSource {
    /// The MLMC zero-order estimator (the real algorithm).
    Mlmc,
    /// Analytic gradient stand-in; zero oracle calls. Reference runs only.
    ExactGradient,
}

/// One per-iteration record.
#[derive(Debug, Clone)]
pub struct IterRow {
    pub k: usize,
    pub x: Vec<f64>,
    pub x_f: Vec<f64>,
    pub x_g: Vec<f64>,
    /// Squared distance to the minimizer.
    pub err_sq: f64,
    /// Lyapunov error `(1/mu)(f(x_f) - f(x*)) + ||x - x*||^2`.
    pub lyapunov: f64,
    /// Cumulative oracle calls after this iteration.
    pub calls_cum: u64,
    /// MLMC level of the gradient draw that produced this iterate (0 before
    /// the first step).
    pub level_j: u32,
}

/// Trajectory of a run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub rows: Vec<IterRow>,
    pub final_x: Vec<f64>,
    pub final_err_sq: f64,
    pub final_lyapunov: f64,
    pub total_calls: u64,
    pub iterations_done: usize,
    pub seed: u64,
    pub gamma: f64,
    pub t: f64,
    pub p: f64,
    pub batch_multiplier: usize,
    /// Set when the run was cut short by the divergence guard.
    pub diverged_at: Option<usize>,
}

/// Everything a run needs besides the problem itself.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: MomentumParams,
    pub chain: ChainParams,
    pub x0: Vec<f64>,
    pub grad_source: GradSource,
    pub adversarial: Option<AdversarialSpec>,
    /// Record the full trajectory (vectors per iteration) or only scalars.
    pub record_trajectory: bool,
}

struct LoopState {
    x: Vec<f64>,
    x_f: Vec<f64>,
    x_g: Vec<f64>,
    grad: Vec<f64>,
    calls: u64,
    diverge_limit: f64,
}

/// Run the accelerated iteration for `params.iterations` steps.
///
/// Deterministic given `(config, seed)`. On divergence the error carries the
/// partial record.
pub fn run(problem: &ProblemSpec, config: &RunConfig, seed: u64) -> Result<RunRecord> {
    let d = problem.dim;
    if config.x0.len() != d || config.chain.dim != d {
        return Err(Error::Usage("run dimension mismatch".into()));
    }
    let params = &config.params;
    let oracle = match &config.adversarial {
        Some(adv) => Oracle::with_adversarial(problem, *adv),
        None => Oracle::plain(problem),
    };
    let mut chain = ChainState::new(config.chain, mix_seed(seed, &[1]))?;
    let mut rng: ChaCha8Rng = stream(seed, STREAM_ESTIMATOR);
    let mlmc = params.mlmc_config();
    let smoothing = params.smoothing_config();

    let fstar = problem.objective(&problem.minimizer);
    let mut st = LoopState {
        x: config.x0.clone(),
        x_f: config.x0.clone(),
        x_g: vec![0.0; d],
        grad: vec![0.0; d],
        calls: 0,
        diverge_limit: DIVERGENCE_FACTOR * (1.0 + norm_sq(&config.x0).sqrt()),
    };
    let mut scratch = PairScratch::with_dim(d);
    let mut dir = vec![0.0; d];

    let mut rows = Vec::new();
    let record_row = |st: &LoopState, k: usize, level: u32, rows: &mut Vec<IterRow>, record: bool| {
        let err_sq = dist_sq(&st.x, &problem.minimizer);
        let lyap = (problem.objective(&st.x_f) - fstar) / problem.mu + err_sq;
        if record {
            rows.push(IterRow {
                k,
                x: st.x.clone(),
                x_f: st.x_f.clone(),
                x_g: st.x_g.clone(),
                err_sq,
                lyapunov: lyap,
                calls_cum: st.calls,
                level_j: level,
            });
        }
        (err_sq, lyap)
    };

    // x_g at k=0 is theta x_f + (1-theta) x = x0.
    st.x_g.copy_from_slice(&st.x);
    let (mut err_sq, mut lyap) = record_row(&st, 0, 0, &mut rows, config.record_trajectory);

    for k in 0..params.iterations {
        // x_g = theta x_f + (1 - theta) x
        for i in 0..d {
            st.x_g[i] = params.theta * st.x_f[i] + (1.0 - params.theta) * st.x[i];
        }

        let level = match config.grad_source {
            GradSource::Mlmc => {
                let g: GradEstimate = mlmc_into(
                    &oracle,
                    &mut chain,
                    &st.x_g,
                    &mlmc,
                    &smoothing,
                    &mut rng,
                    &mut scratch,
                    &mut dir,
                    &mut st.grad,
                )?;
                st.calls += g.oracle_calls;
                g.level_j
            }
            GradSource::ExactGradient => {
                st.grad = problem.grad_objective(&st.x_g);
                0
            }
        };

        // x_f^{k+1} = x_g - p gamma g
        let step = params.p * params.gamma;
        let mut x_f_next = vec![0.0; d];
        let mut x_next = vec![0.0; d];
        for i in 0..d {
            x_f_next[i] = st.x_g[i] - step * st.grad[i];
        }
        // x^{k+1} = eta x_f^{k+1} + (p - eta) x_f + (1-p)(1-beta) x + (1-p) beta x_g
        let [c1, c2, c3, c4] = params.affine_coefficients();
        for i in 0..d {
            x_next[i] = c1 * x_f_next[i] + c2 * st.x_f[i] + c3 * st.x[i] + c4 * st.x_g[i];
        }

        let finite = x_next.iter().all(|v| v.is_finite())
            && x_f_next.iter().all(|v| v.is_finite());
        if !finite || norm_sq(&x_next).sqrt() > st.diverge_limit {
            let record = RunRecord {
                rows,
                final_x: st.x.clone(),
                final_err_sq: err_sq,
                final_lyapunov: lyap,
                total_calls: st.calls,
                iterations_done: k,
                seed,
                gamma: params.gamma,
                t: params.t,
                p: params.p,
                batch_multiplier: params.batch_multiplier,
                diverged_at: Some(k),
            };
            return Err(Error::Divergence {
                iteration: k,
                partial: Box::new(record),
            });
        }

        st.x_f = x_f_next;
        st.x = x_next;
        let (e, l) = record_row(&st, k + 1, level, &mut rows, config.record_trajectory);
        err_sq = e;
        lyap = l;
    }

    Ok(RunRecord {
        rows,
        final_x: st.x.clone(),
        final_err_sq: err_sq,
        final_lyapunov: lyap,
        total_calls: st.calls,
        iterations_done: params.iterations,
        seed,
        gamma: params.gamma,
        t: params.t,
        p: params.p,
        batch_multiplier: params.batch_multiplier,
        diverged_at: None,
    })
}

/// Theorem-driven tuning request. Constants of the `O(.)` rules default to 1
/// and are exposed for calibration experiments.
#[derive(Debug, Clone, Copy)]
pub struct TuneRequest {
    pub dim: usize,
    pub tau: u64,
    pub mu: f64,
    /// `L` in the smooth case, `G` in the non-smooth case.
    pub lips: f64,
    pub epsilon: f64,
    pub batch_multiplier: usize,
    pub feedback: Feedback,
    pub smooth: bool,
    /// Declared adversarial bound; 0 for none.
    pub delta: f64,
    /// Second-moment noise level: `sigma1^2` (one-point) or `sigma2^2`
    /// (two-point), used for the predicted call count.
    pub sigma_sq: f64,
    /// Multiplier on the `t` rule.
    pub c_t: f64,
    /// Multiplier on the tolerable adversarial bound.
    pub c_delta: f64,
}

impl TuneRequest {
    pub fn with_defaults(
        dim: usize,
        tau: u64,
        mu: f64,
        lips: f64,
        epsilon: f64,
        batch_multiplier: usize,
        feedback: Feedback,
        smooth: bool,
    ) -> Self {
        TuneRequest {
            dim,
            tau,
            mu,
            lips,
            epsilon,
            batch_multiplier,
            feedback,
            smooth,
            delta: 0.0,
            sigma_sq: 0.0,
            c_t: 1.0,
            c_delta: 1.0,
        }
    }
}

/// Tuned parameters plus the theorem's predicted oracle-call count.
#[derive(Debug, Clone, Copy)]
pub struct TunedParams {
    pub gamma: f64,
    pub t: f64,
    pub p: f64,
    /// Largest adversarial bound the target accuracy tolerates.
    pub delta_max: f64,
    /// Theorem bound on oracle calls with all constants set to 1.
    pub predicted_calls: f64,
    pub lips_eff: f64,
}

/// Tune `(gamma, t, p, delta_max)` for a target accuracy.
///
/// Smooth: `t = c sqrt(mu eps / L)`, `gamma = 3/(4L)`, `p = B/(B+d)`,
/// `delta_max = c eps mu^{3/2} / (d sqrt(L))`.
/// Non-smooth: `t = c mu eps / G`, `L_eff = sqrt(d) G / t`,
/// `gamma = 3/(4 L_eff)`, `p = 1`,
/// `delta_max = c eps^{3/2} mu^2 / (d G)`.
pub fn tune_theorem(req: &TuneRequest) -> Result<TunedParams> {
    if !(req.epsilon > 0.0) {
        return Err(Error::Config("target accuracy must be positive".into()));
    }
    if req.dim == 0 || req.batch_multiplier == 0 {
        return Err(Error::Config("need dim, B > 0".into()));
    }
    let d = req.dim as f64;
    let b = req.batch_multiplier as f64;
    let (t, lips_eff, delta_max, p) = if req.smooth {
        let l = req.lips;
        let t = req.c_t * (req.mu * req.epsilon / l).sqrt();
        let delta_max = req.c_delta * req.epsilon * req.mu.powf(1.5) / (d * l.sqrt());
        (t, l, delta_max, b / (b + d))
    } else {
        let g = req.lips;
        let t = req.c_t * req.mu * req.epsilon / g;
        let lips_eff = d.sqrt() * g / t;
        let delta_max = req.c_delta * req.epsilon.powf(1.5) * req.mu * req.mu / (d * g);
        (t, lips_eff, delta_max, 1.0)
    };
    if req.delta > delta_max {
        return Err(Error::Infeasible(format!(
            "declared adversarial bound {} exceeds the tolerable {delta_max} at accuracy {}; \
             the accuracy floor for this bound is {}",
            req.delta,
            req.epsilon,
            adversarial_floor(req)
        )));
    }
    let gamma = 3.0 / (4.0 * lips_eff);
    let predicted_calls = predicted_oracle_calls(req);
    Ok(TunedParams {
        gamma,
        t,
        p,
        delta_max,
        predicted_calls,
        lips_eff,
    })
}

/// Smallest accuracy attainable under a declared adversarial bound.
pub fn adversarial_floor(req: &TuneRequest) -> f64 {
    let d = req.dim as f64;
    if req.smooth {
        d * req.delta * req.lips.sqrt() / req.mu.powf(1.5)
    } else {
        (d * req.delta * req.lips / (req.mu * req.mu)).powf(2.0 / 3.0)
    }
}

/// Oracle-call bounds of the four tuning regimes, constants set to 1.
pub fn predicted_oracle_calls(req: &TuneRequest) -> f64 {
    let d = req.dim as f64;
    let tau = req.tau as f64;
    let b = req.batch_multiplier as f64;
    let eps = req.epsilon;
    let mu = req.mu;
    let log_term = (1.0 / eps).ln().max(1.0);
    match (req.smooth, req.feedback) {
        (true, Feedback::TwoPoint) => {
            let l = req.lips;
            b * ((1f64).max(d / b) * (l / mu).sqrt() * log_term
                + (d + tau) * req.sigma_sq / (b * mu * mu * eps))
        }
        (true, Feedback::OnePoint) => {
            let l = req.lips;
            b * ((1f64).max(d / b) * (l / mu).sqrt() * log_term
                + l * d * (d + tau) * req.sigma_sq / (b * mu.powi(3) * eps * eps))
        }
        (false, Feedback::TwoPoint) => {
            let g = req.lips;
            b * ((d.sqrt() * g * g / (mu * mu * eps)).sqrt() * log_term
                + (d + tau) * g * g / (b * mu * mu * eps))
        }
        (false, Feedback::OnePoint) => {
            let g = req.lips;
            b * ((d.sqrt() * g * g / (mu * mu * eps)).sqrt() * log_term
                + d * (d + tau) * req.sigma_sq * g * g / (b * mu.powi(4) * eps.powi(3))
                + d * g * g / (b * mu * mu * eps))
        }
    }
}

/// Record of a restart loop.
#[derive(Debug, Clone)]
pub struct RestartRecord {
    /// `(iterations, gamma, achieved error)` per round.
    pub rounds: Vec<(usize, f64, f64)>,
    pub final_record: RunRecord,
    pub achieved_err_sq: f64,
    pub total_calls: u64,
    /// False when the budget cap triggered before reaching the target.
    pub complete: bool,
}

/// Restart request: the problem context needed to map the recursion
/// constants `(a, b, u)` of the stepsize-tuning rule.
#[derive(Debug, Clone)]
pub struct RestartConfig {
    pub chain: ChainParams,
    pub x0: Vec<f64>,
    pub t: f64,
    pub p: f64,
    pub batch_multiplier: usize,
    pub feedback: Feedback,
    pub smooth: bool,
    /// `L` (smooth) or `G` (non-smooth).
    pub lips: f64,
    pub adversarial: Option<AdversarialSpec>,
    /// Budget cap on total oracle calls.
    pub max_total_calls: u64,
}

/// Doubling restart procedure with the tuned stepsize
/// `Gamma(N) = min( ln(max(2, a r0 N / b)) / (a N), 1/u )`, `gamma = Gamma^2`.
///
/// `a = p sqrt(mu)`, `u = sqrt(4 L_eff / 3)` (so the stepsize cap is exactly
/// `3/(4L)`), and `b` is the stochastic term of the matching theorem. Rounds
/// run from `x0` with `N = 1, 2, 4, ...` until the measured error (against
/// the known minimizer) falls below the target or the call budget runs out.
pub fn run_with_restarts(
    problem: &ProblemSpec,
    cfg: &RestartConfig,
    epsilon: f64,
    seed: u64,
) -> Result<RestartRecord> {
    if !(epsilon > 0.0) {
        return Err(Error::Config("target accuracy must be positive".into()));
    }
    let d = problem.dim as f64;
    let mu = problem.mu;
    let b_mult = cfg.batch_multiplier as f64;
    let tau = cfg.chain.tau_hold as f64;
    let lips_eff = if cfg.smooth {
        cfg.lips
    } else {
        d.sqrt() * cfg.lips / cfg.t
    };
    let (sigma1_sq, sigma2_sq) = problem.noise_moments(&cfg.chain, 1.0);

    let a = cfg.p * mu.sqrt();
    let u = (4.0 * lips_eff / 3.0).sqrt();
    let noise_b = match (cfg.smooth, cfg.feedback) {
        (true, Feedback::TwoPoint) => {
            cfg.p / mu.powf(1.5)
                * (sigma2_sq * (d + tau) / b_mult
                    + cfg.t * cfg.t * lips_eff * lips_eff * d * d / b_mult)
        }
        (true, Feedback::OnePoint) => {
            cfg.p / mu.powf(1.5)
                * (sigma1_sq * d * (d + tau) / (cfg.t * cfg.t * b_mult)
                    + cfg.t * cfg.t * lips_eff * lips_eff * d * d / b_mult)
        }
        (false, Feedback::TwoPoint) => cfg.p * (d + tau) * cfg.lips * cfg.lips / (mu.powf(1.5) * b_mult),
        (false, Feedback::OnePoint) => {
            cfg.p / mu.powf(1.5)
                * (sigma1_sq * d * (d + tau) / (cfg.t * cfg.t * b_mult)
                    + cfg.lips * cfg.lips * d / b_mult)
        }
    };

    let fstar = problem.objective(&problem.minimizer);
    let r0 = (problem.objective(&cfg.x0) - fstar) / mu + dist_sq(&cfg.x0, &problem.minimizer);

    let mut rounds = Vec::new();
    let mut total_calls = 0u64;
    let mut best: Option<RunRecord> = None;
    let mut n = 1usize;
    let mut round_idx = 0u64;
    loop {
        let big_gamma = if noise_b <= 0.0 {
            1.0 / u
        } else {
            let arg = (a * r0 * n as f64 / noise_b).max(2.0);
            (arg.ln() / (a * n as f64)).min(1.0 / u)
        };
        let gamma = big_gamma * big_gamma;
        let params = derive_params(
            problem.dim,
            mu,
            cfg.lips,
            gamma,
            cfg.t,
            PChoice::Fixed(cfg.p),
            cfg.batch_multiplier,
            cfg.feedback,
            cfg.smooth,
            n,
        )?;
        let run_cfg = RunConfig {
            params,
            chain: cfg.chain,
            x0: cfg.x0.clone(),
            grad_source: GradSource::Mlmc,
            adversarial: cfg.adversarial,
            record_trajectory: false,
        };
        let record = match run(problem, &run_cfg, mix_seed(seed, &[round_idx])) {
            Ok(r) => r,
            Err(Error::Divergence { partial, .. }) => *partial,
            Err(e) => return Err(e),
        };
        total_calls += record.total_calls;
        let err = record.final_err_sq;
        rounds.push((n, gamma, err));
        let better = best
            .as_ref()
            .map(|b| err < b.final_err_sq)
            .unwrap_or(true);
        if better {
            best = Some(record);
        }
        if err <= epsilon {
            return Ok(RestartRecord {
                rounds,
                achieved_err_sq: err,
                final_record: best.unwrap(),
                total_calls,
                complete: true,
            });
        }
        if total_calls >= cfg.max_total_calls {
            let best = best.unwrap();
            return Ok(RestartRecord {
                rounds,
                achieved_err_sq: best.final_err_sq,
                final_record: best,
                total_calls,
                complete: false,
            });
        }
        n *= 2;
        round_idx += 1;
    }
}
