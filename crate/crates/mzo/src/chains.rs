//! Markov noise chains.
//!
//! The only noise process used by the oracles is the *lazy Gaussian* chain:
//! at every step the state is redrawn from the stationary law `N(0, s^2 I)`
//! with probability `1/tau_hold` and kept unchanged otherwise. An i.i.d.
//! chain is the special case `tau_hold = 1`.
//!
//! Resample *decisions* and resampled *values* come from separate substreams
//! of the seeded generator, so two chains built from the same seed share
//! every decision and every fresh draw; only their initial states can differ.
//! That makes the coupling argument directly observable: such a pair becomes
//! identical at the first resample event, and the probability of staying
//! uncoupled after `k` steps is exactly `(1 - 1/tau)^k`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::{stream, STREAM_CHAIN_DECISIONS, STREAM_CHAIN_VALUES};

/// Flavor of the noise process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainKind {
    /// Holds its state for `tau_hold` steps on average.
    LazyGaussian,
    /// Fresh draw every step; forces `tau_hold = 1`.
    Iid,
}

/// Parameters of a noise chain.
#[derive(Debug, Clone, Copy)]
pub struct ChainParams {
    pub kind: ChainKind,
    /// Dimension of the noise vector.
    pub dim: usize,
    /// Expected holding time in steps; 1 means i.i.d.
    pub tau_hold: u64,
    /// Per-coordinate standard deviation of the stationary Gaussian.
    pub noise_std: f64,
}

impl ChainParams {
    pub fn lazy_gaussian(dim: usize, tau_hold: u64, noise_std: f64) -> Result<Self> {
        let p = ChainParams {
            kind: ChainKind::LazyGaussian,
            dim,
            tau_hold,
            noise_std,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn iid(dim: usize, noise_std: f64) -> Result<Self> {
        let p = ChainParams {
            kind: ChainKind::Iid,
            dim,
            tau_hold: 1,
            noise_std,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("chain dimension must be positive".into()));
        }
        if self.tau_hold == 0 {
            return Err(Error::Config("tau_hold must be at least 1".into()));
        }
        if self.kind == ChainKind::Iid && self.tau_hold != 1 {
            return Err(Error::Config("iid chain requires tau_hold = 1".into()));
        }
        if !(self.noise_std >= 0.0) {
            return Err(Error::Config("noise_std must be nonnegative".into()));
        }
        Ok(())
    }
}

/// A chain state. Advancing reads nothing but the two embedded substreams,
/// so trajectories are bit-reproducible given `(params, seed)`. Cloning gives
/// an independent copy that replays the same future.
#[derive(Debug, Clone)]
pub struct ChainState {
    params: ChainParams,
    current: Vec<f64>,
    step: u64,
    evals: u64,
    decisions: ChaCha8Rng,
    values: ChaCha8Rng,
}

impl ChainState {
    /// New chain started from the stationary distribution `N(0, s^2 I)`.
    pub fn new(params: ChainParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let decisions = stream(seed, STREAM_CHAIN_DECISIONS);
        let mut values = stream(seed, STREAM_CHAIN_VALUES);
        let current = draw_stationary(&params, &mut values);
        Ok(ChainState {
            params,
            current,
            step: 0,
            evals: 0,
            decisions,
            values,
        })
    }

    /// New chain started from an arbitrary state. The mixing lemmas hold for
    /// any initial distribution; diagnostics use this to expose start bias.
    pub fn with_initial(params: ChainParams, seed: u64, initial: Vec<f64>) -> Result<Self> {
        params.validate()?;
        if initial.len() != params.dim {
            return Err(Error::Usage(format!(
                "initial state has length {}, chain dimension is {}",
                initial.len(),
                params.dim
            )));
        }
        Ok(ChainState {
            params,
            current: initial,
            step: 0,
            evals: 0,
            decisions: stream(seed, STREAM_CHAIN_DECISIONS),
            values: stream(seed, STREAM_CHAIN_VALUES),
        })
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    /// The current noise vector `Z_k`.
    pub fn current(&self) -> &[f64] {
        &self.current
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Number of oracle evaluations that consumed this chain's state.
    pub fn eval_count(&self) -> u64 {
        self.evals
    }

    pub(crate) fn note_evals(&mut self, n: u64) {
        self.evals += n;
    }

    /// Advance one step: with probability `1/tau_hold` resample the state
    /// from the stationary law, otherwise keep it.
    pub fn advance(&mut self) {
        let u: f64 = self.decisions.gen();
        if u * (self.params.tau_hold as f64) < 1.0 {
            resample(&self.params, &mut self.values, &mut self.current);
        }
        self.step += 1;
    }

    /// Advance `n` steps.
    pub fn advance_by(&mut self, n: u64) {
        for _ in 0..n {
            self.advance();
        }
    }
}

fn draw_stationary(params: &ChainParams, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v = vec![0.0; params.dim];
    resample(params, rng, &mut v);
    v
}

fn resample(params: &ChainParams, rng: &mut ChaCha8Rng, out: &mut [f64]) {
    let s = params.noise_std;
    if s == 0.0 {
        out.fill(0.0);
        return;
    }
    for x in out.iter_mut() {
        let g: f64 = rng.sample(StandardNormal);
        *x = s * g;
    }
}

/// Smallest `k` with `(1 - 1/tau)^k <= tolerance`: the coupling bound on the
/// total-variation distance between two arbitrary starts after `k` steps.
pub fn mixing_time_bound(tau_hold: u64, tolerance: f64) -> u64 {
    assert!(tolerance > 0.0 && tolerance < 1.0);
    if tau_hold <= 1 {
        return 1;
    }
    let rho = 1.0 - 1.0 / tau_hold as f64;
    let k = (tolerance.ln() / rho.ln()).ceil();
    k.max(1.0) as u64
}

/// Mixing time in the geometric-ergodicity normalization, `ceil(tau * ln 4)`:
/// the number of steps after which the coupling bound drops below 1/4 when
/// expressed through the `(1/4)^floor(k/tau)` decay convention.
pub fn assumption_mixing_time(tau_hold: u64) -> u64 {
    (tau_hold as f64 * 4f64.ln()).ceil() as u64
}

/// Closed-form mixing time cross-checked by a two-start coupling simulation.
///
/// Runs `trials` chain pairs that share decision and value streams but start
/// from different stationary draws, advances each pair `k` steps (where `k`
/// is the closed-form bound for `tolerance`), and verifies the observed
/// uncoupled fraction against `(1 - 1/tau)^k` within Monte-Carlo error.
pub fn empirical_mixing_time(
    params: ChainParams,
    tolerance: f64,
    trials: u64,
    seed: u64,
) -> Result<u64> {
    params.validate()?;
    if trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(Error::Config("tolerance must lie in (0, 1)".into()));
    }
    let k = mixing_time_bound(params.tau_hold, tolerance);

    let mut uncoupled = 0u64;
    for trial in 0..trials {
        let pair_seed = crate::util::mix_seed(seed, &[trial]);
        let mut a = ChainState::new(params, pair_seed)?;
        // Same streams, different start: b replays a's decisions and draws.
        let mut b = a.clone();
        let mut init = stream(crate::util::mix_seed(pair_seed, &[1]), STREAM_CHAIN_VALUES);
        resample(&params, &mut init, &mut b.current);
        let mut coupled = false;
        for _ in 0..k {
            a.advance();
            b.advance();
            if a.current == b.current {
                coupled = true;
                break;
            }
        }
        if !coupled {
            uncoupled += 1;
        }
    }

    let expected = if params.tau_hold <= 1 {
        0.0
    } else {
        (1.0 - 1.0 / params.tau_hold as f64).powi(k as i32)
    };
    let observed = uncoupled as f64 / trials as f64;
    let se = (expected * (1.0 - expected) / trials as f64).sqrt();
    if (observed - expected).abs() > 4.0 * se + 1e-3 {
        return Err(Error::Config(format!(
            "coupling simulation disagrees with the closed form: observed {observed}, expected {expected}"
        )));
    }
    Ok(k)
}
