//! Zeroth-order stochastic optimization under Markovian noise.
//!
//! The crate provides the pieces needed to study gradient-free optimization
//! when the oracle noise is a slowly mixing Markov chain rather than i.i.d.:
//!
//! - [`chains`]: lazy Gaussian noise chains with a tunable holding time and
//!   mixing-time diagnostics,
//! - [`problems`]: strongly convex test objectives with stochastic zero-order
//!   oracles, adversarial and clipping wrappers, and hard instance families,
//! - [`estimators`]: finite-difference gradient estimators (single,
//!   mini-batch, random-direction, multilevel Monte Carlo) with exact
//!   oracle-call accounting,
//! - [`optimizer`]: a randomized accelerated zero-order gradient method, its
//!   parameter derivation, theorem-driven tuning, and a restart loop,
//! - [`diagnostics`]: Monte-Carlo checks of the variance/bias scaling laws the
//!   method relies on,
//! - [`experiment`]: config-driven experiment grids with CSV and SVG output,
//! - [`cli`]: the `grid` / `verify` / `run` / `tune` command front end used by
//!   the `mzo` binary.
//!
//! Every stochastic component is seeded and bit-reproducible: the same seed
//! always produces the same trajectory, the same CSV bytes, and the same
//! report numbers. See the `examples/` directory for one runnable program per
//! capability.

pub mod chains;
pub mod cli;
pub mod diagnostics;
mod error;
pub mod estimators;
pub mod experiment;
pub mod optimizer;
pub mod problems;
pub(crate) mod rng;
pub(crate) mod util;
pub mod verify;

pub use error::{Error, Result};
pub use estimators::Feedback;
