//! Non-uniform Berry-Esseen bounds from Stein's method.
//!
//! * [`gaussian`]: normal distribution, tail and Mills ratio
//! * [`stein`]: the Stein solution f_z and checks of its estimates
//! * [`bound`]: the non-uniform bound with pluggable tail models
//! * [`chaos`]: diagonal multiple Wiener-Itô integrals
//! * [`expfun`]: the exponential functional of Brownian motion
//! * [`empirical`]: empirical CDFs and certification against a bound
//! * [`report`]: scenario configuration, execution and CSV/JSON output

pub mod bound;
pub mod chaos;
pub mod empirical;
pub mod error;
pub mod expfun;
pub mod gaussian;
pub mod montecarlo;
pub mod report;
pub mod stein;

pub use error::{Error, Result};
