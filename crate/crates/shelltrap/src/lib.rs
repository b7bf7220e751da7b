//! Simulator and analysis library for rf-dressed adiabatic shell traps for
//! ultracold 87Rb atoms.
//!
//! The static Ioffe-Pritchard trap is dressed by a strong rf field; atoms in
//! the upper dressed level are confined to an iso-|B| "egg shell" surface and,
//! with gravity, collect in a pancake-shaped trap at its bottom. The crate
//! models the static field ([`field`]), the dressed potentials ([`dressed`]),
//! their characterization ([`characterize`]), classical ensemble dynamics
//! with Landau-Zener losses ([`dynamics`]), rf-source imperfections
//! ([`noise`], [`schedule`]), quantum-gas estimators ([`condensate`]), and a
//! deterministic CLI ([`config`], [`run`], [`output`]).

pub mod characterize;
pub mod condensate;
pub mod config;
pub mod constants;
pub mod dressed;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod noise;
pub mod output;
pub mod run;
pub mod schedule;

pub use error::{Error, Result};
