//! Bounds and sum-rate capacities for the two-user Gaussian interference
//! channel in standard form,
//!
//! ```text
//! Y1 = X1 + sqrt(a) X2 + Z1
//! Y2 = sqrt(b) X1 + X2 + Z2
//! ```
//!
//! with unit-variance noise and average power constraints `P1`, `P2`.
//! All rates are in bits per channel use.

pub mod channel;
pub mod cli;
pub mod error;
pub mod inner;
pub mod optimize;
pub mod outer;
pub mod region;
pub mod sumcap;

pub use channel::{Channel, MixedCondition, Regime, RegimeLabel};
pub use error::{Error, Result};
pub use inner::{Polyline, RatePair};
pub use outer::{BoundSource, GeniePoint, WeightedBound, Witness};
pub use region::{HalfPlane, RegionPolygon};
pub use sumcap::{Mechanism, SumCapResult, SumCapStatus};

/// `0.5 * log2(x)`, the Gaussian point-to-point rate for SNR `x - 1`.
#[inline]
pub(crate) fn half_log2(x: f64) -> f64 {
    0.5 * x.log2()
}
