//! Channel parameters, regime classification and the capacity-condition
//! predicates.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::sumcap;

/// Standard-form two-user Gaussian interference channel `IC(a, b, P1, P2)`.
///
/// `a` is the cross power gain into receiver 1 and `b` the cross power gain
/// into receiver 2; `p1`, `p2` are the average power constraints. Either
/// gain may be zero (Z channel).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    a: f64,
    b: f64,
    p1: f64,
    p2: f64,
}

impl Channel {
    pub fn new(a: f64, b: f64, p1: f64, p2: f64) -> Result<Self> {
        check_gain("a", a)?;
        check_gain("b", b)?;
        check_power("p1", p1)?;
        check_power("p2", p2)?;
        Ok(Channel { a, b, p1, p2 })
    }

    /// Symmetric channel `IC(a, a, p, p)`.
    pub fn symmetric(a: f64, p: f64) -> Result<Self> {
        Channel::new(a, a, p, p)
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }
    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }
    #[inline]
    pub fn p1(&self) -> f64 {
        self.p1
    }
    #[inline]
    pub fn p2(&self) -> f64 {
        self.p2
    }

    /// The channel seen with the user indices exchanged: `IC(b, a, P2, P1)`.
    pub fn swapped(&self) -> Channel {
        Channel {
            a: self.b,
            b: self.a,
            p1: self.p2,
            p2: self.p1,
        }
    }

    /// True when both cross gains lie strictly inside `(0, 1)`, the domain of
    /// the genie-aided outer bounds.
    pub fn is_weak_both(&self) -> bool {
        self.a > 0.0 && self.a < 1.0 && self.b > 0.0 && self.b < 1.0
    }

    /// `sqrt(a)(b P1 + 1) + sqrt(b)(a P2 + 1) <= 1`.
    ///
    /// Under this condition treating interference as noise at both receivers
    /// achieves the sum capacity.
    pub fn is_noisy_interference(&self) -> bool {
        noisy_lhs(self) <= 1.0
    }

    /// `a > 1`, `b > 1`, `P1 <= a - 1`, `P2 <= b - 1`.
    pub fn is_very_strong(&self) -> bool {
        self.a > 1.0 && self.b > 1.0 && self.p1 <= self.a - 1.0 && self.p2 <= self.b - 1.0
    }

    /// Mixed-interference condition under which user 2's message can be
    /// decoded at both receivers while user 1 runs at its single-user rate
    /// (or the mirrored statement).
    pub fn mixed_condition(&self) -> MixedCondition {
        if mixed_one_sided(self.a, self.b, self.p1) {
            MixedCondition::User1Strong
        } else if mixed_one_sided(self.b, self.a, self.p2) {
            MixedCondition::User2Strong
        } else {
            MixedCondition::None
        }
    }

    pub fn classify(&self) -> Regime {
        let label = regime_label(self);
        let known_sum_capacity = if power_condition_holds(self, label) {
            Some(sumcap::exact_formula(self, label))
        } else {
            None
        };
        Regime {
            label,
            noisy: self.is_noisy_interference(),
            very_strong: self.is_very_strong(),
            mixed: self.mixed_condition(),
            known_sum_capacity,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IC({}, {}, {}, {})", self.a, self.b, self.p1, self.p2)
    }
}

fn check_gain(field: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::InvalidChannel { field, value: v, reason: "must be finite" });
    }
    if v < 0.0 {
        return Err(Error::InvalidChannel { field, value: v, reason: "must be >= 0" });
    }
    Ok(())
}

fn check_power(field: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::InvalidChannel { field, value: v, reason: "must be finite" });
    }
    if v <= 0.0 {
        return Err(Error::InvalidChannel { field, value: v, reason: "must be > 0" });
    }
    Ok(())
}

pub(crate) fn noisy_lhs(ch: &Channel) -> f64 {
    ch.a.sqrt() * (ch.b * ch.p1 + 1.0) + ch.b.sqrt() * (ch.a * ch.p2 + 1.0)
}

/// `strong > 1`, `0 < weak < 1` and `(1 - strong*weak) p <= strong - 1`.
fn mixed_one_sided(strong: f64, weak: f64, p: f64) -> bool {
    strong > 1.0 && weak > 0.0 && weak < 1.0 && (1.0 - strong * weak) * p <= strong - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixedCondition {
    None,
    User1Strong,
    User2Strong,
}

/// Row of the sum-capacity table that the gain pair `(a, b)` falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RegimeLabel {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegimeLabel::I => "I",
            RegimeLabel::II => "II",
            RegimeLabel::III => "III",
            RegimeLabel::IV => "IV",
            RegimeLabel::V => "V",
            RegimeLabel::VI => "VI",
            RegimeLabel::VII => "VII",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub label: RegimeLabel,
    pub noisy: bool,
    pub very_strong: bool,
    pub mixed: MixedCondition,
    /// Exact sum capacity in bits/use, present when the row's power
    /// condition holds.
    pub known_sum_capacity: Option<f64>,
}

/// First matching row, tested in order I..VI. Row VI requires the full
/// noisy-interference condition; everything else with `a < 1, b < 1` is VII.
fn regime_label(ch: &Channel) -> RegimeLabel {
    let (a, b) = (ch.a, ch.b);
    let ab = a * b;
    if a >= 1.0 && b >= 1.0 {
        RegimeLabel::I
    } else if ab >= 1.0 && a <= 1.0 {
        RegimeLabel::II
    } else if ab <= 1.0 && b >= 1.0 {
        RegimeLabel::III
    } else if ab >= 1.0 && b <= 1.0 {
        RegimeLabel::IV
    } else if ab <= 1.0 && a >= 1.0 {
        RegimeLabel::V
    } else if a.sqrt() + b.sqrt() <= 1.0 && ch.is_noisy_interference() {
        RegimeLabel::VI
    } else {
        RegimeLabel::VII
    }
}

fn power_condition_holds(ch: &Channel, label: RegimeLabel) -> bool {
    let ab = ch.a * ch.b;
    match label {
        RegimeLabel::I | RegimeLabel::II | RegimeLabel::IV | RegimeLabel::VI => true,
        // ab == 1 can only land here on an exact boundary already absorbed by
        // rows II/IV, so the division is safe.
        RegimeLabel::III => ab >= 1.0 || ch.p2 <= (ch.b - 1.0) / (1.0 - ab),
        RegimeLabel::V => ab >= 1.0 || ch.p1 <= (ch.a - 1.0) / (1.0 - ab),
        RegimeLabel::VII => false,
    }
}

/// Largest symmetric cross gain `a*` for which `IC(a*, a*, p, p)` has noisy
/// interference, i.e. the root of `2 sqrt(a) (a p + 1) = 1` in `(0, 1/4]`.
///
/// Bisection on `s = sqrt(a)` over `(0, 1/2]`; the map `s -> 2s(s^2 p + 1)`
/// is strictly increasing there.
pub fn symmetric_noisy_threshold(p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::InvalidChannel { field: "p", value: p, reason: "must be > 0" });
    }
    let g = |s: f64| 2.0 * s * (s * s * p + 1.0) - 1.0;
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let v = g(mid);
        if v.abs() <= 1e-12 || hi - lo <= f64::EPSILON * mid {
            break;
        }
        if v > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(mid * mid)
}
