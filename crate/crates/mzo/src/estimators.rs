//! Gradient estimators built from finite differences along random directions.
//!
//! All estimators share one building block: the single estimate
//! `g(x, Z, e) = d * (F(x+te, .) - F(x-te, .)) / (2t) * e` with `e` uniform
//! on the unit sphere. Batched variants differ in how directions and noise
//! samples pair up:
//!
//! - mini-batch: one direction, `n` noise samples,
//! - random-direction: a fresh direction per noise sample,
//! - multilevel Monte Carlo: a random-direction base batch plus a
//!   geometrically sampled correction block that cancels the slow Markov
//!   component of the error at an expected cost near the base batch alone.
//!
//! Oracle calls are counted exactly: one call per evaluated point, two per
//! finite-difference pair.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::chains::ChainState;
use crate::error::{Error, Result};
use crate::problems::{Oracle, PairScratch};

/// Feedback regime of the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feedback {
    /// Fresh noise per evaluation; the +/- pair sees different states.
    OnePoint,
    /// One noise state shared by both points of a pair.
    TwoPoint,
}

/// Finite-difference configuration.
#[derive(Debug, Clone, Copy)]
pub struct SmoothingConfig {
    /// Approximation step t.
    pub t: f64,
    pub feedback: Feedback,
}

impl SmoothingConfig {
    pub fn new(t: f64, feedback: Feedback) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::Usage("approximation step t must be positive".into()));
        }
        Ok(SmoothingConfig { t, feedback })
    }
}

/// Multilevel Monte Carlo batching parameters.
#[derive(Debug, Clone, Copy)]
pub struct MlmcConfig {
    /// Batch size multiplier B.
    pub batch_multiplier: usize,
    /// Momentum/bound coupling constant p in (0, 1].
    pub p: f64,
    /// Batch size limit M.
    pub level_cap: f64,
    /// Base batch size l.
    pub base_batch: usize,
    /// floor(log2 M).
    pub j_max: u32,
}

impl MlmcConfig {
    /// Derive the batch parameters from the momentum pair `(p, beta)`:
    /// `M = 1/p + 2/beta`, `l = (floor(log2 M) + 1) * B`.
    pub fn from_momentum(batch_multiplier: usize, p: f64, beta: f64) -> Result<Self> {
        if batch_multiplier == 0 {
            return Err(Error::Config("batch multiplier B must be positive".into()));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Config("p must lie in (0, 1]".into()));
        }
        if !(beta > 0.0) {
            return Err(Error::Config("beta must be positive".into()));
        }
        let level_cap = 1.0 / p + 2.0 / beta;
        let j_max = level_cap.log2().floor() as u32;
        let base_batch = (j_max as usize + 1) * batch_multiplier;
        Ok(MlmcConfig {
            batch_multiplier,
            p,
            level_cap,
            base_batch,
            j_max,
        })
    }

    /// Explicit `(l, M, B)` combination for experiments; bypasses the
    /// `l = (floor(log2 M)+1) B` coupling used by the derived constructor.
    pub fn explicit(base_batch: usize, level_cap: f64, batch_multiplier: usize) -> Result<Self> {
        if base_batch == 0 || batch_multiplier == 0 {
            return Err(Error::Config("l and B must be positive".into()));
        }
        if !(level_cap >= 1.0) {
            return Err(Error::Config("level cap M must be at least 1".into()));
        }
        Ok(MlmcConfig {
            batch_multiplier,
            p: 1.0,
            level_cap,
            base_batch,
            j_max: level_cap.log2().floor() as u32,
        })
    }

    /// Expected oracle calls of one MLMC draw:
    /// `2l (1 + sum_{k=1}^{j_max} 2^{-(k+1)} 2^k) = 2l (1 + j_max/2)`.
    pub fn expected_oracle_calls(&self) -> f64 {
        2.0 * self.base_batch as f64 * (1.0 + self.j_max as f64 / 2.0)
    }
}

/// An estimated gradient plus exact accounting of what it cost.
#[derive(Debug, Clone)]
pub struct GradEstimate {
    pub vector: Vec<f64>,
    /// Number of F evaluations performed.
    pub oracle_calls: u64,
    /// Correction level of an MLMC draw (0 = base batch only); 0 for the
    /// plain estimators.
    pub level_j: u32,
}

/// Uniform draw from the unit sphere.
pub fn sample_sphere(d: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(Error::Usage("sphere dimension must be positive".into()));
    }
    let mut e = vec![0.0; d];
    sample_sphere_into(&mut e, rng);
    Ok(e)
}

#[inline]
pub(crate) fn sample_sphere_into(e: &mut [f64], rng: &mut ChaCha8Rng) {
    loop {
        let mut nsq = 0.0;
        for x in e.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *x = g;
            nsq += g * g;
        }
        if e.len() == 1 {
            // The 1-D sphere is exactly {-1, +1}.
            e[0] = e[0].signum();
            return;
        }
        if nsq > 1e-300 {
            let inv = nsq.sqrt().recip();
            for x in e.iter_mut() {
                *x *= inv;
            }
            return;
        }
    }
}

/// Uniform draw from the unit ball.
pub fn sample_ball(d: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let mut r = sample_sphere(d, rng)?;
    let u: f64 = rng.gen();
    let radius = u.powf(1.0 / d as f64);
    for x in r.iter_mut() {
        *x *= radius;
    }
    Ok(r)
}

/// Geometric level: `P(J = j) = 2^-j` for `j >= 1`.
pub fn sample_level(rng: &mut ChaCha8Rng) -> u32 {
    let r: u64 = rng.gen();
    // Trailing zeros of a uniform word are Geom(1/2) on {0,1,...}.
    r.trailing_zeros() + 1
}

/// One finite-difference estimate along a fixed unit direction.
pub fn single_estimate(
    oracle: &Oracle,
    chain: &mut ChainState,
    x: &[f64],
    e: &[f64],
    cfg: &SmoothingConfig,
) -> Result<GradEstimate> {
    let d = oracle.problem.dim;
    if x.len() != d || e.len() != d {
        return Err(Error::Usage("estimator dimension mismatch".into()));
    }
    let mut scratch = PairScratch::with_dim(d);
    let coef = single_coefficient(oracle, chain, x, e, cfg, &mut scratch)?;
    let vector = e.iter().map(|ei| coef * ei).collect();
    Ok(GradEstimate {
        vector,
        oracle_calls: 2,
        level_j: 0,
    })
}

/// The scalar `d * (F_plus - F_minus) / (2t)`; the estimate is this times `e`.
#[inline]
fn single_coefficient(
    oracle: &Oracle,
    chain: &mut ChainState,
    x: &[f64],
    e: &[f64],
    cfg: &SmoothingConfig,
    scratch: &mut PairScratch,
) -> Result<f64> {
    let d = x.len() as f64;
    let diff = match cfg.feedback {
        Feedback::TwoPoint => {
            chain.note_evals(2);
            let diff = oracle.two_point_diff(x, e, cfg.t, chain.current(), scratch);
            chain.advance();
            diff
        }
        Feedback::OnePoint => {
            scratch.xp.resize(x.len(), 0.0);
            scratch.xm.resize(x.len(), 0.0);
            for i in 0..x.len() {
                scratch.xp[i] = x[i] + cfg.t * e[i];
                scratch.xm[i] = x[i] - cfg.t * e[i];
            }
            let plus = oracle.value(&scratch.xp, chain, true)?;
            let minus = oracle.value(&scratch.xm, chain, true)?;
            plus - minus
        }
    };
    Ok(d * diff / (2.0 * cfg.t))
}

/// Mini-batch estimator: `n` noise samples along one shared direction.
pub fn minibatch_estimate(
    oracle: &Oracle,
    chain: &mut ChainState,
    x: &[f64],
    n: usize,
    cfg: &SmoothingConfig,
    rng: &mut ChaCha8Rng,
) -> Result<GradEstimate> {
    if n == 0 {
        return Err(Error::Usage("batch size must be positive".into()));
    }
    let d = oracle.problem.dim;
    if x.len() != d {
        return Err(Error::Usage("estimator dimension mismatch".into()));
    }
    let mut e = vec![0.0; d];
    sample_sphere_into(&mut e, rng);
    let mut scratch = PairScratch::with_dim(d);
    let mut acc = 0.0;
    for _ in 0..n {
        acc += single_coefficient(oracle, chain, x, &e, cfg, &mut scratch)?;
    }
    let coef = acc / n as f64;
    Ok(GradEstimate {
        vector: e.iter().map(|ei| coef * ei).collect(),
        oracle_calls: 2 * n as u64,
        level_j: 0,
    })
}

/// Random-direction estimator: a fresh direction per noise sample.
pub fn rd_estimate(
    oracle: &Oracle,
    chain: &mut ChainState,
    x: &[f64],
    n: usize,
    cfg: &SmoothingConfig,
    rng: &mut ChaCha8Rng,
) -> Result<GradEstimate> {
    if n == 0 {
        return Err(Error::Usage("batch size must be positive".into()));
    }
    let d = oracle.problem.dim;
    if x.len() != d {
        return Err(Error::Usage("estimator dimension mismatch".into()));
    }
    let mut acc = vec![0.0; d];
    let mut e = vec![0.0; d];
    let mut scratch = PairScratch::with_dim(d);
    for _ in 0..n {
        sample_sphere_into(&mut e, rng);
        let coef = single_coefficient(oracle, chain, x, &e, cfg, &mut scratch)?;
        for (a, ei) in acc.iter_mut().zip(&e) {
            *a += coef * ei;
        }
    }
    let inv = (n as f64).recip();
    for a in acc.iter_mut() {
        *a *= inv;
    }
    Ok(GradEstimate {
        vector: acc,
        oracle_calls: 2 * n as u64,
        level_j: 0,
    })
}

/// Multilevel Monte Carlo estimator.
///
/// Draws `J` geometric (`P(J=j) = 2^-j`) and uses the effective correction
/// level `K = J - 1`, so the realized estimate is the base batch alone with
/// probability 1/2, and with probability `2^-(K+1)` adds
/// `2^K [ g_rd over the next 2^K l samples - g_rd over their first half ]`
/// whenever `2^K <= M`. The base block and the correction block are disjoint
/// stretches of one continuous chain, and the two nested averages share both
/// noise samples and directions on their common prefix, which is what makes
/// the telescoping mean identity and the correction cancellation exact.
pub fn mlmc_estimate(
    oracle: &Oracle,
    chain: &mut ChainState,
    x: &[f64],
    mlmc: &MlmcConfig,
    cfg: &SmoothingConfig,
    rng: &mut ChaCha8Rng,
) -> Result<GradEstimate> {
    let d = oracle.problem.dim;
    if x.len() != d {
        return Err(Error::Usage("estimator dimension mismatch".into()));
    }
    let mut scratch = PairScratch::with_dim(d);
    let mut e = vec![0.0; d];
    let mut base = vec![0.0; d];
    mlmc_into(
        oracle, chain, x, mlmc, cfg, rng, &mut scratch, &mut e, &mut base,
    )
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn mlmc_into(
    oracle: &Oracle,
    chain: &mut ChainState,
    x: &[f64],
    mlmc: &MlmcConfig,
    cfg: &SmoothingConfig,
    rng: &mut ChaCha8Rng,
    scratch: &mut PairScratch,
    e: &mut [f64],
    out: &mut Vec<f64>,
) -> Result<GradEstimate> {
    let d = x.len();
    let l = mlmc.base_batch;

    // Level first, then directions: fixed draw order keeps runs replayable.
    let level = sample_level(rng) - 1;

    out.clear();
    out.resize(d, 0.0);
    for _ in 0..l {
        sample_sphere_into(e, rng);
        let coef = single_coefficient(oracle, chain, x, e, cfg, scratch)?;
        for (a, ei) in out.iter_mut().zip(e.iter()) {
            *a += coef * ei;
        }
    }
    let inv_l = (l as f64).recip();
    for a in out.iter_mut() {
        *a *= inv_l;
    }

    let mut calls = 2 * l as u64;
    let use_correction = level >= 1 && (level as f64).exp2() <= mlmc.level_cap;
    if use_correction {
        let block = (1usize << level) * l;
        let half = block / 2;
        let mut sum_full = vec![0.0; d];
        let mut sum_half = vec![0.0; d];
        for i in 0..block {
            sample_sphere_into(e, rng);
            let coef = single_coefficient(oracle, chain, x, e, cfg, scratch)?;
            for (a, ei) in sum_full.iter_mut().zip(e.iter()) {
                *a += coef * ei;
            }
            if i < half {
                for (a, ei) in sum_half.iter_mut().zip(e.iter()) {
                    *a += coef * ei;
                }
            }
        }
        let mult = (level as f64).exp2();
        for i in 0..d {
            out[i] += mult * (sum_full[i] / block as f64 - sum_half[i] / half as f64);
        }
        calls += 2 * block as u64;
    }

    Ok(GradEstimate {
        vector: out.clone(),
        oracle_calls: calls,
        level_j: if use_correction { level } else { 0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::{ChainParams, ChainState};
    use crate::problems::{Oracle, ProblemSpec};
    use crate::rng::stream;
    use crate::util::{mean_se, norm_sq};

    fn quad(dim: usize) -> ProblemSpec {
        ProblemSpec::quadratic_markov(dim).unwrap()
    }

    #[test]
    fn sphere_dim_one_is_sign() {
        let mut rng = stream(1, 0);
        for _ in 0..20 {
            let e = sample_sphere(1, &mut rng).unwrap();
            assert!(e[0] == 1.0 || e[0] == -1.0);
        }
        assert!(sample_sphere(0, &mut rng).is_err());
    }

    #[test]
    fn sphere_norm_is_one() {
        let mut rng = stream(2, 0);
        for d in [2usize, 5, 17] {
            let e = sample_sphere(d, &mut rng).unwrap();
            assert!((norm_sq(&e) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_second_moment_is_identity_over_d() {
        let d = 5;
        let n = 100_000;
        let mut rng = stream(3, 0);
        let mut diag = vec![Vec::with_capacity(n); d];
        let mut off = Vec::with_capacity(n);
        for _ in 0..n {
            let e = sample_sphere(d, &mut rng).unwrap();
            for i in 0..d {
                diag[i].push(e[i] * e[i]);
            }
            off.push(e[0] * e[1]);
        }
        for i in 0..d {
            let (m, se) = mean_se(&diag[i]);
            assert!(
                (m - 1.0 / d as f64).abs() <= 3.0 * se,
                "diag {i}: {m} (se {se})"
            );
        }
        let (mo, seo) = mean_se(&off);
        assert!(mo.abs() <= 3.0 * seo);
    }

    #[test]
    fn ball_moments() {
        let mut rng = stream(4, 0);
        // E ||r||^2 = d/(d+2); componentwise mean 0.
        let d = 2;
        let n = 100_000;
        let mut nsq = Vec::with_capacity(n);
        let mut first = Vec::with_capacity(n);
        for _ in 0..n {
            let r = sample_ball(d, &mut rng).unwrap();
            assert!(norm_sq(&r) <= 1.0 + 1e-12);
            nsq.push(norm_sq(&r));
            first.push(r[0]);
        }
        let (m, se) = mean_se(&nsq);
        assert!((m - 0.5).abs() <= 3.0 * se, "E||r||^2 = {m} (se {se})");
        let (mf, sef) = mean_se(&first);
        assert!(mf.abs() <= 3.0 * sef);
    }

    #[test]
    fn level_frequencies() {
        let mut rng = stream(5, 0);
        let n = 1_000_000;
        let mut c1 = 0u64;
        let mut c2 = 0u64;
        for _ in 0..n {
            let j = sample_level(&mut rng);
            assert!(j >= 1);
            if j == 1 {
                c1 += 1;
            } else if j == 2 {
                c2 += 1;
            }
        }
        let f1 = c1 as f64 / n as f64;
        let f2 = c2 as f64 / n as f64;
        let se1 = (0.5 * 0.5 / n as f64).sqrt();
        let se2 = (0.25 * 0.75 / n as f64).sqrt();
        assert!((f1 - 0.5).abs() <= 3.0 * se1, "P(J=1) = {f1}");
        assert!((f2 - 0.25).abs() <= 3.0 * se2, "P(J=2) = {f2}");
    }

    #[test]
    fn single_estimate_on_noiseless_quadratic() {
        let p = quad(2);
        let chain = ChainParams::lazy_gaussian(2, 1, 0.0).unwrap();
        let oracle = Oracle::plain(&p);
        let cfg = SmoothingConfig::new(0.3, Feedback::TwoPoint).unwrap();
        let mut state = ChainState::new(chain, 1).unwrap();
        // e aligned with x: estimate = d <x, e> e = (2, 0).
        let g = single_estimate(&oracle, &mut state, &[1.0, 0.0], &[1.0, 0.0], &cfg).unwrap();
        assert!((g.vector[0] - 2.0).abs() < 1e-12);
        assert!(g.vector[1].abs() < 1e-12);
        assert_eq!(g.oracle_calls, 2);
        // e orthogonal to x: estimate = 0.
        let g = single_estimate(&oracle, &mut state, &[1.0, 0.0], &[0.0, 1.0], &cfg).unwrap();
        assert!(norm_sq(&g.vector) < 1e-24);
    }

    #[test]
    fn single_estimate_matches_identity_with_noise() {
        // Two-point on the quadratic: estimate = d <x+Z, e> e for any t.
        let p = quad(3);
        let chain = ChainParams::lazy_gaussian(3, 1 << 40, 1.0).unwrap();
        let oracle = Oracle::plain(&p);
        let x = [0.2, -0.4, 0.9];
        for &t in &[1e-8, 1e-2, 1.0] {
            let cfg = SmoothingConfig::new(t, Feedback::TwoPoint).unwrap();
            let mut state = ChainState::new(chain, 9).unwrap();
            let z = state.current().to_vec();
            let mut rng = stream(10, 0);
            let e = sample_sphere(3, &mut rng).unwrap();
            let g = single_estimate(&oracle, &mut state, &x, &e, &cfg).unwrap();
            let coef: f64 = 3.0
                * x.iter()
                    .zip(&z)
                    .zip(&e)
                    .map(|((xi, zi), ei)| (xi + zi) * ei)
                    .sum::<f64>();
            for i in 0..3 {
                let expect = coef * e[i];
                assert!(
                    (g.vector[i] - expect).abs() <= 1e-10 * expect.abs().max(1e-3),
                    "t={t}: component {i}: {} vs {expect}",
                    g.vector[i]
                );
            }
        }
    }

    #[test]
    fn minibatch_n1_equals_single() {
        let p = quad(2);
        let chain = ChainParams::lazy_gaussian(2, 3, 0.5).unwrap();
        let oracle = Oracle::plain(&p);
        let cfg = SmoothingConfig::new(0.1, Feedback::TwoPoint).unwrap();
        let mut s1 = ChainState::new(chain, 7).unwrap();
        let mut s2 = ChainState::new(chain, 7).unwrap();
        let mut rng = stream(8, 0);
        let g1 = minibatch_estimate(&oracle, &mut s1, &[0.5, 0.5], 1, &cfg, &mut rng).unwrap();
        let mut rng2 = stream(8, 0);
        let e = sample_sphere(2, &mut rng2).unwrap();
        let g2 = single_estimate(&oracle, &mut s2, &[0.5, 0.5], &e, &cfg).unwrap();
        assert_eq!(g1.vector, g2.vector);
        assert_eq!(g1.oracle_calls, 2);
    }

    #[test]
    fn minibatch_noiseless_independent_of_n() {
        let p = quad(2);
        let chain = ChainParams::lazy_gaussian(2, 1, 0.0).unwrap();
        let oracle = Oracle::plain(&p);
        let cfg = SmoothingConfig::new(0.1, Feedback::TwoPoint).unwrap();
        let x = [0.3, -0.2];
        let mut outs = Vec::new();
        for n in [1usize, 8, 64] {
            let mut state = ChainState::new(chain, 1).unwrap();
            let mut rng = stream(2, 0);
            let g = minibatch_estimate(&oracle, &mut state, &x, n, &cfg, &mut rng).unwrap();
            outs.push(g.vector);
        }
        for v in &outs[1..] {
            for i in 0..2 {
                assert!((v[i] - outs[0][i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn minibatch_variance_scales_inverse_n() {
        // iid chain: directional variance ~ c/n; fitted exponent within 0.15.
        let p = quad(4);
        let chain = ChainParams::iid(4, 1.0).unwrap();
        let oracle = Oracle::plain(&p);
        let cfg = SmoothingConfig::new(1e-3, Feedback::TwoPoint).unwrap();
        let x = [0.1, 0.2, -0.3, 0.4];
        let mut rng_dir = stream(77, 0);
        let e = sample_sphere(4, &mut rng_dir).unwrap();
        let ns = [1usize, 4, 16, 64];
        let reps = 3000;
        let mut vars = Vec::new();
        for (bi, &n) in ns.iter().enumerate() {
            let mut vals = Vec::with_capacity(reps);
            for r in 0..reps {
                let seed = crate::util::mix_seed(900, &[bi as u64, r as u64]);
                let mut state = ChainState::new(chain, seed).unwrap();
                let mut scratch = PairScratch::with_dim(4);
                let mut acc = 0.0;
                for _ in 0..n {
                    acc += single_coefficient(&oracle, &mut state, &x, &e, &cfg, &mut scratch)
                        .unwrap();
                }
                vals.push(acc / n as f64);
            }
            let (m, _) = mean_se(&vals);
            let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (reps - 1) as f64;
            vars.push(var);
        }
        let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        let slope = crate::util::loglog_slope(&xs, &vars);
        assert!(
            (slope + 1.0).abs() <= 0.15,
            "variance exponent {slope}, expected -1"
        );
    }

    #[test]
    fn rd_estimate_mean_is_gradient() {
        // Noiseless quadratic: E[g_rd] = grad f_t = x.
        let p = quad(3);
        let chain = ChainParams::lazy_gaussian(3, 1, 0.0).unwrap();
        let oracle = Oracle::plain(&p);
        let cfg = SmoothingConfig::new(0.05, Feedback::TwoPoint).unwrap();
        let x = [0.5, -0.25, 0.75];
        let reps = 100_000;
        let mut comps = vec![Vec::with_capacity(reps); 3];
        let mut rng = stream(55, 0);
        let mut state = ChainState::new(chain, 1).unwrap();
        for _ in 0..reps {
            let g = rd_estimate(&oracle, &mut state, &x, 1, &cfg, &mut rng).unwrap();
            for i in 0..3 {
                comps[i].push(g.vector[i]);
            }
        }
        for i in 0..3 {
            let (m, se) = mean_se(&comps[i]);
            assert!(
                (m - x[i]).abs() <= 3.0 * se,
                "component {i}: {m} vs {} (se {se})",
                x[i]
            );
        }
    }

    #[test]
    fn mlmc_worked_example_layout() {
        // d=1 quadratic with x=0: each single estimate equals the chain state,
        // so realized draws can be classified against a replayed chain.
        let p = quad(1);
        let chain = ChainParams::iid(1, 1.0).unwrap();
        let oracle = Oracle::plain(&p);
        let cfg = SmoothingConfig::new(0.5, Feedback::TwoPoint).unwrap();
        let mlmc = MlmcConfig::explicit(1, (1u64 << 60) as f64, 1).unwrap();
        let x = [0.0];
        let n = 200_000u64;
        let mut base_only = 0u64;
        let mut level_one = 0u64;
        for i in 0..n {
            let seed = crate::util::mix_seed(42, &[i]);
            let mut state = ChainState::new(chain, seed).unwrap();
            let mut rng = stream(seed, crate::rng::STREAM_ESTIMATOR);
            let g = mlmc_estimate(&oracle, &mut state, &x, &mlmc, &cfg, &mut rng).unwrap();
            // Replay the chain to reconstruct g_1, g_2, g_3.
            let mut replay = ChainState::new(chain, seed).unwrap();
            let z1 = replay.current()[0];
            replay.advance();
            let z2 = replay.current()[0];
            replay.advance();
            let z3 = replay.current()[0];
            let v = g.vector[0];
            if (v - z1).abs() < 1e-12 {
                base_only += 1;
                assert_eq!(g.level_j, 0);
                assert_eq!(g.oracle_calls, 2);
            } else if (v - (z1 + (z3 - z2))).abs() < 1e-12 {
                level_one += 1;
                assert_eq!(g.level_j, 1);
                assert_eq!(g.oracle_calls, 2 + 4);
            }
        }
        let f0 = base_only as f64 / n as f64;
        let f1 = level_one as f64 / n as f64;
        assert!((f0 - 0.5).abs() < 0.01, "base-only frequency {f0}");
        assert!((f1 - 0.25).abs() < 0.01, "level-1 frequency {f1}");
    }

    #[test]
    fn mlmc_noiseless_corrections_vanish() {
        let p = quad(2);
        let chain = ChainParams::lazy_gaussian(2, 1, 0.0).unwrap();
        let oracle = Oracle::plain(&p);
        let cfg = SmoothingConfig::new(0.1, Feedback::TwoPoint).unwrap();
        let mlmc = MlmcConfig::explicit(4, 64.0, 1).unwrap();
        let x = [0.4, 0.1];
        // With zero noise every single estimate has mean x over directions;
        // corrections need not vanish per draw (directions differ), but the
        // estimator mean must equal x.
        let reps = 50_000;
        let mut comps = vec![Vec::with_capacity(reps); 2];
        let mut state = ChainState::new(chain, 3).unwrap();
        let mut rng = stream(4, 0);
        for _ in 0..reps {
            let g = mlmc_estimate(&oracle, &mut state, &x, &mlmc, &cfg, &mut rng).unwrap();
            for i in 0..2 {
                comps[i].push(g.vector[i]);
            }
        }
        for i in 0..2 {
            let (m, se) = mean_se(&comps[i]);
            assert!((m - x[i]).abs() <= 3.0 * se, "mean {m} vs {}", x[i]);
        }
    }

    #[test]
    fn mlmc_oracle_call_accounting() {
        let p = quad(2);
        let chain = ChainParams::lazy_gaussian(2, 4, 1.0).unwrap();
        let oracle = Oracle::plain(&p);
        let cfg = SmoothingConfig::new(0.1, Feedback::TwoPoint).unwrap();
        let mlmc = MlmcConfig::explicit(3, 16.0, 1).unwrap();
        let mut state = ChainState::new(chain, 5).unwrap();
        let mut rng = stream(6, 0);
        let draws = 20_000;
        let mut calls = Vec::with_capacity(draws);
        let mut total = 0u64;
        for _ in 0..draws {
            let g = mlmc_estimate(&oracle, &mut state, &[0.1, 0.1], &mlmc, &cfg, &mut rng).unwrap();
            total += g.oracle_calls;
            calls.push(g.oracle_calls as f64);
        }
        // Sum of per-estimate calls equals the chain's evaluation count.
        assert_eq!(total, state.eval_count());
        // Mean matches the closed form 2l(1 + j_max/2).
        let (m, se) = mean_se(&calls);
        let expect = mlmc.expected_oracle_calls();
        assert!(
            (m - expect).abs() <= 3.0 * se,
            "mean calls {m} vs {expect} (se {se})"
        );
    }

    #[test]
    fn mlmc_mean_matches_top_level_rd() {
        // Telescoping identity under a stationary chain start.
        let p = quad(4);
        let chain = ChainParams::lazy_gaussian(4, 4, 1.0).unwrap();
        let oracle = Oracle::plain(&p);
        let cfg = SmoothingConfig::new(0.05, Feedback::TwoPoint).unwrap();
        let mlmc = MlmcConfig::explicit(2, 8.0, 1).unwrap();
        let top = (1usize << mlmc.j_max) * mlmc.base_batch;
        let x = [0.5, 0.0, -0.5, 0.25];
        let reps = 30_000u64;
        let mut dml = vec![Vec::with_capacity(reps as usize); 4];
        let mut drd = vec![Vec::with_capacity(reps as usize); 4];
        for r in 0..reps {
            let s1 = crate::util::mix_seed(1000, &[r]);
            let s2 = crate::util::mix_seed(2000, &[r]);
            let mut c1 = ChainState::new(chain, s1).unwrap();
            let mut rng1 = stream(s1, crate::rng::STREAM_ESTIMATOR);
            let g1 = mlmc_estimate(&oracle, &mut c1, &x, &mlmc, &cfg, &mut rng1).unwrap();
            let mut c2 = ChainState::new(chain, s2).unwrap();
            let mut rng2 = stream(s2, crate::rng::STREAM_ESTIMATOR);
            let g2 = rd_estimate(&oracle, &mut c2, &x, top, &cfg, &mut rng2).unwrap();
            for i in 0..4 {
                dml[i].push(g1.vector[i]);
                drd[i].push(g2.vector[i]);
            }
        }
        for i in 0..4 {
            let (m1, se1) = mean_se(&dml[i]);
            let (m2, se2) = mean_se(&drd[i]);
            let se = (se1 * se1 + se2 * se2).sqrt();
            assert!(
                (m1 - m2).abs() <= 3.0 * se,
                "component {i}: {m1} vs {m2} (se {se})"
            );
        }
    }

    #[test]
    fn mlmc_variance_reduction_in_b() {
        // E||g_ml - grad f_t||^2 at B and 4B has ratio in [3, 5.5]. The 1/B
        // law requires batches longer than the holding time; below that the
        // Markov component of the variance saturates and hides the scaling.
        let p = quad(4);
        let chain = ChainParams::lazy_gaussian(4, 2, 1.0).unwrap();
        let oracle = Oracle::plain(&p);
        let cfg = SmoothingConfig::new(0.05, Feedback::TwoPoint).unwrap();
        let x = [0.2, -0.1, 0.3, 0.0];
        let grad = x; // grad f_t = x for the isotropic quadratic
        let reps = 8000u64;
        let mut errs = Vec::new();
        for (pi, &b) in [1usize, 4].iter().enumerate() {
            let mlmc = MlmcConfig::explicit(16 * b, 16.0, b).unwrap();
            let mut sq = Vec::with_capacity(reps as usize);
            for r in 0..reps {
                let seed = crate::util::mix_seed(3000 + pi as u64, &[r]);
                let mut state = ChainState::new(chain, seed).unwrap();
                let mut rng = stream(seed, crate::rng::STREAM_ESTIMATOR);
                let g = mlmc_estimate(&oracle, &mut state, &x, &mlmc, &cfg, &mut rng).unwrap();
                sq.push(crate::util::dist_sq(&g.vector, &grad));
            }
            let (m, _) = mean_se(&sq);
            errs.push(m);
        }
        let ratio = errs[0] / errs[1];
        assert!(
            (3.0..=5.5).contains(&ratio),
            "variance ratio at B vs 4B: {ratio}"
        );
    }

    #[test]
    fn mlmc_bias_reduction_in_m() {
        // From a far-from-stationary start the estimator mean is biased by
        // the chain's slow forgetting; quadrupling M must shrink the squared
        // bias monotonically and beyond Monte-Carlo error.
        let p = quad(2);
        let tau = 64u64;
        let chain = ChainParams::lazy_gaussian(2, tau, 1.0).unwrap();
        let oracle = Oracle::plain(&p);
        let cfg = SmoothingConfig::new(0.01, Feedback::TwoPoint).unwrap();
        let x = [0.1, -0.2];
        let grad = x;
        let z0 = vec![10.0, 10.0];
        let reps = 30_000u64;
        let mut biases = Vec::new();
        let mut bias_ses = Vec::new();
        for (pi, &m_cap) in [4.0f64, 16.0, 64.0].iter().enumerate() {
            let mlmc = MlmcConfig::explicit(2, m_cap, 1).unwrap();
            let mut sums = [0.0f64; 2];
            let mut sumsq = [0.0f64; 2];
            for r in 0..reps {
                let seed = crate::util::mix_seed(41_000 + pi as u64, &[r]);
                let mut state = ChainState::with_initial(chain, seed, z0.clone()).unwrap();
                let mut rng = stream(seed, crate::rng::STREAM_ESTIMATOR);
                let g = mlmc_estimate(&oracle, &mut state, &x, &mlmc, &cfg, &mut rng).unwrap();
                for i in 0..2 {
                    sums[i] += g.vector[i];
                    sumsq[i] += g.vector[i] * g.vector[i];
                }
            }
            let n = reps as f64;
            let mut bias_sq = 0.0;
            let mut se_sq = 0.0;
            for i in 0..2 {
                let mean = sums[i] / n;
                let var = (sumsq[i] / n - mean * mean).max(0.0) / n;
                bias_sq += (mean - grad[i]) * (mean - grad[i]);
                se_sq += var;
            }
            biases.push(bias_sq);
            bias_ses.push(se_sq.sqrt());
        }
        for i in 1..biases.len() {
            let drop = biases[i - 1] - biases[i];
            let guard = 3.0 * (biases[i - 1].sqrt() + biases[i].sqrt()) * bias_ses[i].max(bias_ses[i - 1]);
            assert!(
                drop > guard,
                "bias^2 did not fall past noise when M grew: {biases:?} (guard {guard})"
            );
        }
    }
}

