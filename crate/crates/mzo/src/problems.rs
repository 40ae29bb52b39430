//! Test objectives and their stochastic zero-order oracles.
//!
//! Every problem is a strongly convex `f` with a known minimizer plus a
//! stochastic oracle `F(x, Z) = f(x) + <noise term, Z>` driven by a chain
//! from [`crate::chains`]. One-point queries draw fresh noise per evaluation;
//! two-point queries evaluate both points of a finite-difference pair under
//! one noise state.
//!
//! For the quadratic families the two-point pair also exposes the exact
//! centered difference `F(x+te,Z) - F(x-te,Z) = 2t(<grad f(x), e> + <e, Z>)`,
//! computed without forming the two nearby values. Subtracting two `O(1)`
//! floating-point values destroys the difference once `t` is below ~1e-7;
//! the closed form keeps the estimator faithful to the algebra at any `t`.

use rand::Rng;


use crate::chains::{ChainParams, ChainState};
use crate::error::{Error, Result};
use crate::estimators::Feedback;
use crate::util::{dot, mix_seed, norm_sq, splitmix64};

/// Which noise bound the oracle claims to satisfy. Gaussian chains can only
/// promise a second-moment bound; the clipped wrapper upgrades that to a
/// uniform bound at the price of an exponentially small bias.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseRegime {
    UniformBound,
    SecondMoment,
}

/// Problem family, carrying family-specific data.
#[derive(Debug, Clone)]
pub enum ProblemKind {
    /// `f(x) = 0.5 ||x||^2`, noise `<x, Z>`.
    QuadraticMarkov,
    /// `f(x) = 0.5 x' diag(lambda) x` with log-spaced spectrum, noise `<x, Z>`.
    DiagQuadratic { eigenvalues: Vec<f64> },
    /// `f(x) = (mu/2)||x||^2 + c ||x||_1`, noise `<x, Z>`; non-smooth.
    NonsmoothL1 { l1_weight: f64 },
    /// `f(x) = (mu/2)||x||^2 + <S(x), omega>`, noise `<S(x), Z>`, with the
    /// piecewise separable `S`; minimizer `-delta/2 * omega`.
    HardOnePoint {
        omega: Vec<f64>,
        delta: f64,
        /// Stationary noise variance the instance is calibrated for.
        s2: f64,
    },
    /// `f(x) = (mu/2)||x||^2 + delta <x, v>`, noise `<x, Z>`;
    /// minimizer `-(delta/mu) v`.
    HardTwoPoint {
        v: Vec<f64>,
        delta: f64,
        s2: f64,
    },
}

/// A concrete problem instance: objective, constants, minimizer, oracle.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub dim: usize,
    /// Strong convexity constant.
    pub mu: f64,
    /// Gradient Lipschitz constant, when `f` is smooth.
    pub lips_grad: Option<f64>,
    /// Function Lipschitz constant on the unit ball, when tracked.
    pub lips_f: Option<f64>,
    pub minimizer: Vec<f64>,
    pub noise_regime: NoiseRegime,
}

impl ProblemSpec {
    /// The experiment quadratic: `f(x) = 0.5||x||^2`, `F(x,Z) = f(x) + <x,Z>`.
    pub fn quadratic_markov(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        Ok(ProblemSpec {
            kind: ProblemKind::QuadraticMarkov,
            dim,
            mu: 1.0,
            lips_grad: Some(1.0),
            lips_f: None,
            minimizer: vec![0.0; dim],
            noise_regime: NoiseRegime::SecondMoment,
        })
    }

    /// Smooth quadratic with spectrum log-spaced in `[mu, lips]`.
    pub fn diag_quadratic(dim: usize, mu: f64, lips: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Config(
                "diag quadratic needs dim >= 2 to realize both constants".into(),
            ));
        }
        if !(mu > 0.0 && lips >= mu) {
            return Err(Error::Config("need 0 < mu <= L".into()));
        }
        let ratio = lips / mu;
        let eigenvalues: Vec<f64> = (0..dim)
            .map(|i| mu * ratio.powf(i as f64 / (dim - 1) as f64))
            .collect();
        Ok(ProblemSpec {
            kind: ProblemKind::DiagQuadratic { eigenvalues },
            dim,
            mu,
            lips_grad: Some(lips),
            lips_f: None,
            minimizer: vec![0.0; dim],
            noise_regime: NoiseRegime::SecondMoment,
        })
    }

    /// Non-smooth strongly convex instance; on the unit ball its Lipschitz
    /// constant is at most `mu + c sqrt(d)`.
    pub fn nonsmooth_l1(dim: usize, mu: f64, l1_weight: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        if !(mu > 0.0 && l1_weight >= 0.0) {
            return Err(Error::Config("need mu > 0 and c >= 0".into()));
        }
        let g = mu + l1_weight * (dim as f64).sqrt();
        Ok(ProblemSpec {
            kind: ProblemKind::NonsmoothL1 { l1_weight },
            dim,
            mu,
            lips_grad: None,
            lips_f: Some(g),
            minimizer: vec![0.0; dim],
            noise_regime: NoiseRegime::SecondMoment,
        })
    }

    /// Hard one-point instance for a given sign pattern.
    pub fn hard_one_point(omega: Vec<f64>, delta: f64, mu: f64, s2: f64) -> Result<Self> {
        let dim = omega.len();
        if dim == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        if omega.iter().any(|w| w.abs() != 1.0) {
            return Err(Error::Config("omega must be a +-1 sign vector".into()));
        }
        if !(delta > 0.0 && mu > 0.0 && s2 > 0.0) {
            return Err(Error::Config("need delta, mu, s2 > 0".into()));
        }
        let minimizer: Vec<f64> = omega.iter().map(|w| -0.5 * delta * w).collect();
        Ok(ProblemSpec {
            kind: ProblemKind::HardOnePoint { omega, delta, s2 },
            dim,
            mu,
            // Curvature ranges over [mu/2, 3mu/2].
            lips_grad: Some(1.5 * mu),
            lips_f: None,
            minimizer,
            noise_regime: NoiseRegime::SecondMoment,
        })
    }

    /// Hard one-point instance with the calibrated defaults
    /// `delta = (sigma1_sq * tau / (mu^2 d N))^(1/4)` and `s2 = 8N/tau`.
    pub fn hard_one_point_default(
        dim: usize,
        mu: f64,
        sigma1_sq: f64,
        tau: u64,
        budget_n: u64,
        seed: u64,
    ) -> Result<Self> {
        if dim == 0 || budget_n == 0 || tau == 0 {
            return Err(Error::Config("need dim, tau, N > 0".into()));
        }
        let delta = (sigma1_sq * tau as f64 / (mu * mu * dim as f64 * budget_n as f64)).powf(0.25);
        let s2 = 8.0 * budget_n as f64 / tau as f64;
        let mut rng = crate::rng::stream(seed, 17);
        let omega: Vec<f64> = (0..dim)
            .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
            .collect();
        Self::hard_one_point(omega, delta, mu, s2)
    }

    /// Hard two-point instance; defaults from the lower-bound construction
    /// are `s2 = sigma2_sq / d` and `delta = sqrt(sigma2_sq / (4N))`.
    pub fn hard_two_point(v: Vec<f64>, delta: f64, mu: f64, s2: f64) -> Result<Self> {
        let dim = v.len();
        if dim == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        if v.iter().any(|w| w.abs() != 1.0) {
            return Err(Error::Config("v must be a +-1 sign vector".into()));
        }
        if !(delta > 0.0 && mu > 0.0 && s2 > 0.0) {
            return Err(Error::Config("need delta, mu, s2 > 0".into()));
        }
        let minimizer: Vec<f64> = v.iter().map(|w| -delta / mu * w).collect();
        Ok(ProblemSpec {
            kind: ProblemKind::HardTwoPoint { v, delta, s2 },
            dim,
            mu,
            lips_grad: Some(mu),
            lips_f: None,
            minimizer,
            noise_regime: NoiseRegime::SecondMoment,
        })
    }

    /// Noiseless objective value.
    pub fn eval_objective(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::Usage(format!(
                "point has length {}, problem dimension is {}",
                x.len(),
                self.dim
            )));
        }
        Ok(self.objective(x))
    }

    pub(crate) fn objective(&self, x: &[f64]) -> f64 {
        match &self.kind {
            ProblemKind::QuadraticMarkov => 0.5 * norm_sq(x),
            ProblemKind::DiagQuadratic { eigenvalues } => {
                0.5 * x
                    .iter()
                    .zip(eigenvalues)
                    .map(|(xi, li)| li * xi * xi)
                    .sum::<f64>()
            }
            ProblemKind::NonsmoothL1 { l1_weight } => {
                0.5 * self.mu * norm_sq(x) + l1_weight * x.iter().map(|xi| xi.abs()).sum::<f64>()
            }
            ProblemKind::HardOnePoint { omega, delta, .. } => {
                0.5 * self.mu * norm_sq(x)
                    + x.iter()
                        .zip(omega)
                        .map(|(xi, w)| 0.25 * self.mu * hard_instance_s(*delta, *xi) * w)
                        .sum::<f64>()
            }
            ProblemKind::HardTwoPoint { v, delta, .. } => {
                0.5 * self.mu * norm_sq(x) + delta * dot(x, v)
            }
        }
    }

    /// Analytic gradient (a subgradient for the non-smooth instance).
    pub fn grad_objective(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            ProblemKind::QuadraticMarkov => x.to_vec(),
            ProblemKind::DiagQuadratic { eigenvalues } => {
                x.iter().zip(eigenvalues).map(|(xi, li)| li * xi).collect()
            }
            ProblemKind::NonsmoothL1 { l1_weight } => x
                .iter()
                .map(|xi| self.mu * xi + l1_weight * xi.signum())
                .collect(),
            ProblemKind::HardOnePoint { omega, delta, .. } => x
                .iter()
                .zip(omega)
                .map(|(xi, w)| self.mu * xi + 0.25 * self.mu * hard_instance_s_deriv(*delta, *xi) * w)
                .collect(),
            ProblemKind::HardTwoPoint { v, delta, .. } => x
                .iter()
                .zip(v)
                .map(|(xi, vi)| self.mu * xi + delta * vi)
                .collect(),
        }
    }

    /// Raw oracle value `F(x, z)` for a given noise vector.
    pub(crate) fn raw_value(&self, x: &[f64], z: &[f64]) -> f64 {
        self.objective(x) + self.noise_term(x, z)
    }

    /// The stochastic part of the oracle, `F(x,z) - f(x)`.
    pub(crate) fn noise_term(&self, x: &[f64], z: &[f64]) -> f64 {
        match &self.kind {
            ProblemKind::HardOnePoint { delta, .. } => x
                .iter()
                .zip(z)
                .map(|(xi, zi)| 0.25 * self.mu * hard_instance_s(*delta, *xi) * zi)
                .sum(),
            _ => dot(x, z),
        }
    }

    /// Exact odd part `(F(x+te,z) - F(x-te,z)) / 2` when the oracle is a
    /// quadratic in its point argument, so the centered difference carries no
    /// cancellation error. `None` for the piecewise and non-smooth families.
    pub(crate) fn exact_half_diff(&self, x: &[f64], e: &[f64], t: f64, z: &[f64]) -> Option<f64> {
        match &self.kind {
            ProblemKind::QuadraticMarkov => Some(t * (dot(x, e) + dot(e, z))),
            ProblemKind::DiagQuadratic { eigenvalues } => {
                let ge: f64 = x
                    .iter()
                    .zip(eigenvalues)
                    .zip(e)
                    .map(|((xi, li), ei)| li * xi * ei)
                    .sum();
                Some(t * (ge + dot(e, z)))
            }
            ProblemKind::HardTwoPoint { v, delta, .. } => {
                let ge = self.mu * dot(x, e) + delta * dot(e, v);
                Some(t * (ge + dot(e, z)))
            }
            ProblemKind::NonsmoothL1 { .. } | ProblemKind::HardOnePoint { .. } => None,
        }
    }

    /// Second-moment noise levels `(sigma1_sq at radius, sigma2_sq)` implied
    /// by a chain with per-coordinate variance `s^2`, used by theorem tuning.
    pub fn noise_moments(&self, chain: &ChainParams, radius: f64) -> (f64, f64) {
        let s2 = chain.noise_std * chain.noise_std;
        match &self.kind {
            ProblemKind::HardOnePoint { delta, .. } => {
                // |S(x)| <= 3 mu delta^2 / 4 per coordinate.
                let smax = 0.75 * self.mu * delta * delta;
                let sigma1 = s2 * self.dim as f64 * smax * smax;
                let gmax = 0.5 * self.mu * delta;
                let sigma2 = s2 * self.dim as f64 * gmax * gmax;
                (sigma1, sigma2)
            }
            _ => (s2 * radius * radius, s2 * self.dim as f64),
        }
    }

    /// Default starting point at squared distance `dist_sq` from the
    /// minimizer, along the all-ones direction.
    pub fn start_point(&self, dist_sq: f64) -> Vec<f64> {
        let r = (dist_sq / self.dim as f64).sqrt();
        self.minimizer.iter().map(|m| m + r).collect()
    }
}

/// The piecewise coordinate profile of the hard one-point family: odd in
/// `xi`, continuously differentiable, 2-smooth, flat beyond `2 delta`.
pub fn hard_instance_s(delta: f64, xi: f64) -> f64 {
    debug_assert!(delta > 0.0);
    let a = xi.abs();
    let v = if a <= delta {
        2.0 * delta * a
    } else if a <= 2.0 * delta {
        3.0 * delta * delta - (a - 2.0 * delta) * (a - 2.0 * delta)
    } else {
        3.0 * delta * delta
    };
    if xi < 0.0 {
        -v
    } else {
        v
    }
}

/// Derivative of [`hard_instance_s`]; even in `xi`.
pub fn hard_instance_s_deriv(delta: f64, xi: f64) -> f64 {
    let a = xi.abs();
    if a <= delta {
        2.0 * delta
    } else if a <= 2.0 * delta {
        2.0 * (2.0 * delta - a)
    } else {
        0.0
    }
}

/// Clamp an oracle reply to the band `[f_min - t_clip*sigma1, f_max + t_clip*sigma1]`.
pub fn clip_oracle(reply: f64, f_min: f64, f_max: f64, t_clip: f64, sigma1: f64) -> Result<f64> {
    if f_min > f_max {
        return Err(Error::Usage("clip band requires f_min <= f_max".into()));
    }
    if !(t_clip > 1.0) {
        return Err(Error::Usage("clip threshold must exceed 1".into()));
    }
    let lo = f_min - t_clip * sigma1;
    let hi = f_max + t_clip * sigma1;
    Ok(reply.clamp(lo, hi))
}

/// Clipping band carried by an oracle wrapper.
#[derive(Debug, Clone, Copy)]
pub struct ClipSpec {
    pub f_min: f64,
    pub f_max: f64,
    pub t_clip: f64,
    pub sigma1: f64,
}

impl ClipSpec {
    pub fn new(f_min: f64, f_max: f64, t_clip: f64, sigma1: f64) -> Result<Self> {
        clip_oracle(0.0, f_min, f_max, t_clip, sigma1)?;
        Ok(ClipSpec {
            f_min,
            f_max,
            t_clip,
            sigma1,
        })
    }

    #[inline]
    pub fn apply(&self, reply: f64) -> f64 {
        reply.clamp(
            self.f_min - self.t_clip * self.sigma1,
            self.f_max + self.t_clip * self.sigma1,
        )
    }
}

/// Built-in deterministic perturbation shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    Zero,
    /// Constant `+delta`; cancels exactly in two-point differences.
    Constant,
    /// `delta * sign(sin(hash(x)))`: bounded, deterministic, sign-flipping.
    SignFlip,
}

/// Additive, non-random, bounded oracle error `|D(x)| <= delta_bound`.
#[derive(Debug, Clone, Copy)]
pub struct AdversarialSpec {
    pub delta_bound: f64,
    pub perturbation: Perturbation,
}

impl AdversarialSpec {
    pub fn new(delta_bound: f64, perturbation: Perturbation) -> Result<Self> {
        if !(delta_bound >= 0.0) {
            return Err(Error::Config("delta_bound must be nonnegative".into()));
        }
        Ok(AdversarialSpec {
            delta_bound,
            perturbation,
        })
    }

    /// Evaluate the perturbation at a point. Seed-free and deterministic.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self.perturbation {
            Perturbation::Zero => 0.0,
            Perturbation::Constant => self.delta_bound,
            Perturbation::SignFlip => {
                let mut h = 0x9e3779b97f4a7c15u64;
                for &xi in x {
                    h = splitmix64(h ^ xi.to_bits());
                }
                let angle = (h as f64 / u64::MAX as f64) * std::f64::consts::TAU;
                self.delta_bound * angle.sin().signum()
            }
        }
    }
}

/// Feedback mode of a single oracle query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryMode {
    OnePointPlus,
    OnePointMinus,
    TwoPointPair,
}

/// Reply to a finite-difference pair query.
#[derive(Debug, Clone, Copy)]
pub struct OracleReply {
    /// `F(x + t e, .)` (perturbed/clipped as configured).
    pub plus: f64,
    /// `F(x - t e, .)`.
    pub minus: f64,
    /// Centered difference `plus - minus`, exact for quadratic oracles
    /// without wrappers.
    pub diff: f64,
    /// Chain steps consumed producing the reply.
    pub chain_steps: u64,
    /// Oracle evaluations consumed (one per point).
    pub oracle_calls: u64,
}

/// A problem plus its oracle wrappers; the thing estimators query.
#[derive(Debug, Clone)]
pub struct Oracle<'p> {
    pub problem: &'p ProblemSpec,
    pub adversarial: Option<AdversarialSpec>,
    pub clip: Option<ClipSpec>,
}

impl<'p> Oracle<'p> {
    pub fn plain(problem: &'p ProblemSpec) -> Self {
        Oracle {
            problem,
            adversarial: None,
            clip: None,
        }
    }

    pub fn with_adversarial(problem: &'p ProblemSpec, adv: AdversarialSpec) -> Self {
        Oracle {
            problem,
            adversarial: Some(adv),
            clip: None,
        }
    }

    fn wrapped_value(&self, x: &[f64], z: &[f64]) -> f64 {
        let mut v = self.problem.raw_value(x, z);
        if let Some(adv) = &self.adversarial {
            v += adv.eval(x);
        }
        if let Some(clip) = &self.clip {
            v = clip.apply(v);
        }
        v
    }

    /// Single evaluation at the chain's current state; advances the chain
    /// afterwards when `advance` is set (one-point discipline).
    pub fn value(&self, x: &[f64], chain: &mut ChainState, advance: bool) -> Result<f64> {
        if x.len() != self.problem.dim || chain.params().dim != self.problem.dim {
            return Err(Error::Usage("oracle dimension mismatch".into()));
        }
        chain.note_evals(1);
        let v = self.wrapped_value(x, chain.current());
        if advance {
            chain.advance();
        }
        Ok(v)
    }

    /// Evaluate a finite-difference pair around `x` along unit direction `e`.
    ///
    /// Two-point: both points see the same `Z`, then the chain advances once.
    /// One-point: the `+` point sees `Z_k`, the chain advances, the `-` point
    /// sees `Z_{k+1}`, and the chain advances again.
    pub fn eval_pair(
        &self,
        x: &[f64],
        e: &[f64],
        t: f64,
        feedback: Feedback,
        chain: &mut ChainState,
    ) -> Result<OracleReply> {
        if x.len() != self.problem.dim
            || e.len() != self.problem.dim
            || chain.params().dim != self.problem.dim
        {
            return Err(Error::Usage("oracle dimension mismatch".into()));
        }
        if !(t > 0.0) {
            return Err(Error::Usage("approximation step t must be positive".into()));
        }
        let xp: Vec<f64> = x.iter().zip(e).map(|(xi, ei)| xi + t * ei).collect();
        let xm: Vec<f64> = x.iter().zip(e).map(|(xi, ei)| xi - t * ei).collect();
        match feedback {
            Feedback::TwoPoint => {
                chain.note_evals(2);
                let z = chain.current();
                let plus = self.wrapped_value(&xp, z);
                let minus = self.wrapped_value(&xm, z);
                let diff = self.pair_diff_inner(x, e, t, z, &xp, &xm);
                chain.advance();
                Ok(OracleReply {
                    plus,
                    minus,
                    diff,
                    chain_steps: 1,
                    oracle_calls: 2,
                })
            }
            Feedback::OnePoint => {
                chain.note_evals(1);
                let plus = self.wrapped_value(&xp, chain.current());
                chain.advance();
                chain.note_evals(1);
                let minus = self.wrapped_value(&xm, chain.current());
                chain.advance();
                Ok(OracleReply {
                    plus,
                    minus,
                    diff: plus - minus,
                    chain_steps: 2,
                    oracle_calls: 2,
                })
            }
        }
    }

    /// Centered difference for a shared-noise pair, using the analytic odd
    /// part where the problem provides one. Used on the estimator hot path.
    #[inline]
    pub(crate) fn two_point_diff(
        &self,
        x: &[f64],
        e: &[f64],
        t: f64,
        z: &[f64],
        scratch: &mut PairScratch,
    ) -> f64 {
        if self.clip.is_none() && self.adversarial.is_none() {
            if let Some(h) = self.problem.exact_half_diff(x, e, t, z) {
                return 2.0 * h;
            }
        }
        scratch.fill(x, e, t);
        if self.clip.is_none() {
            if let Some(h) = self.problem.exact_half_diff(x, e, t, z) {
                let mut diff = 2.0 * h;
                if let Some(adv) = &self.adversarial {
                    diff += adv.eval(&scratch.xp) - adv.eval(&scratch.xm);
                }
                return diff;
            }
        }
        self.wrapped_value(&scratch.xp, z) - self.wrapped_value(&scratch.xm, z)
    }

    fn pair_diff_inner(&self, x: &[f64], e: &[f64], t: f64, z: &[f64], xp: &[f64], xm: &[f64]) -> f64 {
        if self.clip.is_none() {
            if let Some(h) = self.problem.exact_half_diff(x, e, t, z) {
                let mut diff = 2.0 * h;
                if let Some(adv) = &self.adversarial {
                    diff += adv.eval(xp) - adv.eval(xm);
                }
                return diff;
            }
        }
        self.wrapped_value(xp, z) - self.wrapped_value(xm, z)
    }
}

/// Reusable buffers for the two shifted points.
#[derive(Debug, Default)]
pub(crate) struct PairScratch {
    pub xp: Vec<f64>,
    pub xm: Vec<f64>,
}

impl PairScratch {
    pub fn with_dim(dim: usize) -> Self {
        PairScratch {
            xp: vec![0.0; dim],
            xm: vec![0.0; dim],
        }
    }

    #[inline]
    fn fill(&mut self, x: &[f64], e: &[f64], t: f64) {
        self.xp.resize(x.len(), 0.0);
        self.xm.resize(x.len(), 0.0);
        for i in 0..x.len() {
            self.xp[i] = x[i] + t * e[i];
            self.xm[i] = x[i] - t * e[i];
        }
    }
}

/// Worst observed constants over sampled point pairs.
#[derive(Debug, Clone)]
pub struct AssumptionReport {
    /// Smallest observed strong-convexity quotient.
    pub mu_low: f64,
    /// Largest observed curvature quotient (gradient Lipschitz estimate).
    pub lips_grad_high: f64,
    /// Largest observed |f(x)-f(y)|/|x-y|.
    pub lips_f_high: f64,
    /// Per-point noise second moments: (||x||^2, mean |F-f|^2, max |F-f|^2).
    pub noise_rows: Vec<(f64, f64, f64)>,
    /// Whether a uniform bound can be certified for the declared regime.
    pub uniform_bound_ok: bool,
    pub notes: Vec<String>,
}

/// Sample-based validation of the standing assumptions.
///
/// Draws `samples` point pairs in the unit ball (plus coordinate-axis probes)
/// and reports the worst observed strong convexity / smoothness quotients and
/// noise moments under the stationary distribution. Violations are reported,
/// never thrown.
pub fn validate_assumptions(
    problem: &ProblemSpec,
    chain: &ChainParams,
    samples: usize,
    seed: u64,
) -> Result<AssumptionReport> {
    if samples < 2 {
        return Err(Error::Usage("need at least 2 samples".into()));
    }
    if chain.dim != problem.dim {
        return Err(Error::Usage("chain dimension mismatch".into()));
    }
    let d = problem.dim;
    let mut rng = crate::rng::stream(seed, 23);
    let mut mu_low = f64::INFINITY;
    let mut l_high: f64 = 0.0;
    let mut g_high: f64 = 0.0;

    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(samples + d);
    for _ in 0..samples {
        let x = crate::estimators::sample_ball(d, &mut rng)?;
        let y = crate::estimators::sample_ball(d, &mut rng)?;
        pairs.push((x, y));
    }
    // Axis probes pin the spectrum extremes of diagonal problems.
    for i in 0..d {
        let mut x = vec![0.0; d];
        x[i] = 0.5;
        pairs.push((x, vec![0.0; d]));
    }

    for (x, y) in &pairs {
        let dsq = crate::util::dist_sq(x, y);
        if dsq < 1e-18 {
            continue;
        }
        let fx = problem.objective(x);
        let fy = problem.objective(y);
        let gy = problem.grad_objective(y);
        let gap = fx - fy - x.iter().zip(y).zip(&gy).map(|((a, b), g)| g * (a - b)).sum::<f64>();
        let quot = 2.0 * gap / dsq;
        mu_low = mu_low.min(quot);
        if problem.lips_grad.is_some() {
            l_high = l_high.max(quot);
            let gx = problem.grad_objective(x);
            let gdiff = crate::util::dist_sq(&gx, &gy).sqrt();
            l_high = l_high.max(gdiff / dsq.sqrt());
        }
        g_high = g_high.max((fx - fy).abs() / dsq.sqrt());
    }

    // Noise moments at a few sampled points under stationary draws.
    let mut noise_rows = Vec::new();
    let n_points = 4.min(samples);
    let reps_per_point = (samples / n_points).max(16);
    for pi in 0..n_points {
        let x = crate::estimators::sample_ball(d, &mut rng)?;
        let mut state = ChainState::new(*chain, mix_seed(seed, &[31, pi as u64]))?;
        let mut mean = 0.0;
        let mut max: f64 = 0.0;
        for _ in 0..reps_per_point {
            let h = problem.noise_term(&x, state.current());
            mean += h * h;
            max = max.max(h * h);
            state.advance();
        }
        noise_rows.push((norm_sq(&x), mean / reps_per_point as f64, max));
    }

    let mut notes = Vec::new();
    let uniform_bound_ok = match problem.noise_regime {
        NoiseRegime::UniformBound => true,
        NoiseRegime::SecondMoment => {
            if chain.noise_std > 0.0 {
                notes.push(
                    "Gaussian noise is unbounded: only a second-moment bound holds; \
                     a uniform bound requires the clipped wrapper"
                        .into(),
                );
                false
            } else {
                true
            }
        }
    };
    if let Some(mu) = Some(problem.mu) {
        if mu_low < 0.9 * mu {
            notes.push(format!(
                "observed strong-convexity quotient {mu_low} below the declared mu {mu}"
            ));
        }
    }

    Ok(AssumptionReport {
        mu_low,
        lips_grad_high: l_high,
        lips_f_high: g_high,
        noise_rows,
        uniform_bound_ok,
        notes,
    })
}
