//! Traveling-wave machinery for the competitive Lotka-Volterra
//! reaction-diffusion system
//!
//! ```text
//! u_t = u_xx + u (1 - u - a1 v)
//! v_t = v_xx + r v (1 - a2 u - v)
//! ```
//!
//! In the wave frame `xi = x + c t`, after the cooperative change of
//! variable `v -> 1 - v`, fronts connecting (0,0) to (1,1) exist exactly
//! for speeds `c >= c* = 2 sqrt(1 - a1)`. This crate
//!
//! * validates the parameter hypotheses and evaluates every closed-form
//!   constant (minimal speed, tail decay exponents) — [`params`],
//! * solves the scalar KPP problems used as building blocks — [`kpp`],
//! * assembles the explicit upper/lower solution pair and runs the
//!   monotone iteration to the wave profile — [`construction`],
//! * extracts empirical decay rates from computed profiles and compares
//!   them with the predicted exponents — [`asymptotics`],
//! * time-integrates the original parabolic system and measures spreading
//!   and translation speeds — [`sim`],
//! * produces cross-cutting certificates: sliding-domain comparison,
//!   uniqueness by translation, strict monotonicity and the subcritical
//!   nonexistence diagnostic — [`verify`].
//!
//! Parameter sweeps over wave speeds run in parallel through rayon when
//! the `parallel` feature (default) is enabled; a sequential fallback is
//! always available. See `benches/parallel.rs` for a comparison.

pub mod asymptotics;
pub mod construction;
mod error;
pub mod io;
pub mod kpp;
pub mod numerics;
pub mod params;
pub mod sim;
pub mod sweep;
pub mod verify;

pub use error::Error;
pub use numerics::{Grid, SampledFunction, WaveProfile};
pub use params::{Branch, ExponentSet, HypothesisReport, ModelParams, SpeedRegime, SpeedSpec};

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
