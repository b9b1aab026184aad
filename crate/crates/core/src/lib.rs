//! Unbiased quantum phase estimation.
//!
//! Plain QFT-based phase estimation (PEA) is biased everywhere except at
//! lattice and half-lattice phases. Adding a uniformly random, classically
//! known shift θ before the inverse QFT and subtracting it afterwards (UPEA)
//! makes the circular mean of the estimate equal to the true phase.
//!
//! Modules:
//! - [`phase`]: circular arithmetic, exact outcome distributions, exact bias and MAE;
//! - [`sampler`]: seeded Monte Carlo draws of PEA/UPEA runs;
//! - [`mle`]: maximum-likelihood combination of repeated runs;
//! - [`counting`]: quantum counting on top of UPEA, with bias corrections;
//! - [`statevector`]: a gate-level simulator used as an independent oracle;
//! - [`harness`]: sweep configuration, execution and report output.

pub mod counting;
pub mod error;
pub mod harness;
pub mod mle;
pub mod phase;
pub mod quadrature;
pub mod sampler;
pub mod statevector;
pub mod stats;

pub use error::{Error, Result};
pub use phase::{
    circ_dist, exact_bias_mae_pea, exact_mae_upea, pea_pmf, pea_pmf_at, upea_pdf, wrap_phase,
    BiasMaeEntry, DistTable, PeaParams, Phase, ThetaMode,
};
pub use sampler::{empirical_bias_mae, run_batch, sample_pea, sample_upea, RngSeed};
