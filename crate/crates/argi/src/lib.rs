//! Asymmetric realized GARCH-Ito (ARGI) volatility modeling.
//!
//! The crate covers the full pipeline for daily volatility dynamics driven by
//! high-frequency data:
//!
//! * [`model`] — structural diffusion parameters and their mapping to the
//!   estimable GARCH parameter vector `theta = (omega_g, gamma, alpha_g, beta_g)`.
//! * [`simulate`] — Euler simulation of the jump diffusion with intra-day
//!   U-shape volatility, compound-Poisson jumps, and microstructure noise.
//! * [`realized`] — jump-adjusted pre-averaging realized volatility (PRV)
//!   estimators of daily total variation and integrated volatility.
//! * [`tail`] — Hill tail-index estimation and adaptive selection of the
//!   Huber truncation level.
//! * [`filter`] — the conditional-variance recursion, its analytic gradient
//!   and Hessian, and one-day-ahead forecasting.
//! * [`estimate`] — OLS, Huber, Adjusted-Huber, and QMLE fits over the
//!   constrained parameter space.
//! * [`baselines`] — HAR regression benchmark.
//! * [`evaluate`] — MSPE/RMSPE/QLIKE, Diebold-Mariano comparison, and
//!   residual-persistence diagnostics.
//! * [`study`] / [`backtest`] — the Monte-Carlo study and the rolling-window
//!   backtest behind the `argi` CLI.

pub mod backtest;
pub mod baselines;
pub mod config;
pub mod error;
pub mod estimate;
pub mod evaluate;
pub mod filter;
pub mod io;
pub mod model;
pub mod realized;
pub mod simulate;
pub mod study;
pub mod tail;

mod linalg;
mod optim;

pub use error::{ArgiError, Result};
pub use model::{GarchParams, JumpLaw, ParamSpace, StructuralParams};
pub use realized::{DailySeries, PrvConfig};
pub use tail::{TuningConfig, TuningRecord};

/// One round of SplitMix64; the standard 64-bit mixer.
pub(crate) fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a base seed. Replications and
/// internal RNG streams (path vs. noise) use distinct stream indices so that
/// results are reproducible and independent of scheduling.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut state = base ^ stream.wrapping_mul(0xA076_1D64_78BD_642F);
    splitmix64(&mut state)
}
