//! Exact sum-rate capacities: noisy interference, mixed interference, and
//! the regime table dispatcher.

use serde::{Deserialize, Serialize};

use crate::channel::{Channel, MixedCondition, RegimeLabel};
use crate::error::{Error, Result};
use crate::half_log2;
use crate::inner;
use crate::outer::{self, GeniePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumCapStatus {
    Exact,
    UpperOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mechanism {
    #[serde(rename = "noisy_TIN")]
    NoisyTin,
    #[serde(rename = "mixed")]
    Mixed,
    #[serde(rename = "mac_row_I")]
    MacRowI,
    #[serde(rename = "row_II_III")]
    RowIiIii,
    #[serde(rename = "row_IV_V")]
    RowIvV,
    #[serde(rename = "unknown")]
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumCapResult {
    /// Bits/use. An upper bound when `status` is `UpperOnly`.
    pub value: f64,
    pub status: SumCapStatus,
    pub mechanism: Mechanism,
}

/// TIN sum rate at full power (no precondition).
pub(crate) fn tin_sum(ch: &Channel) -> f64 {
    let (a, b, p1, p2) = (ch.a(), ch.b(), ch.p1(), ch.p2());
    half_log2(1.0 + p1 / (1.0 + a * p2)) + half_log2(1.0 + p2 / (1.0 + b * p1))
}

/// `C(P1) + C(P2/(1 + b P1))`: user 1 at its single-user rate, user 2 through
/// user 1's interference at receiver 2.
fn strong_user1_sum(ch: &Channel) -> f64 {
    half_log2(1.0 + ch.p1()) + half_log2(1.0 + ch.p2() / (1.0 + ch.b() * ch.p1()))
}

/// Sum capacity when the noisy-interference condition holds: treating
/// interference as noise is optimal.
pub fn noisy_sum_capacity(ch: &Channel) -> Result<f64> {
    if !ch.is_noisy_interference() {
        return Err(Error::Condition(format!(
            "{ch}: sqrt(a)(b P1 + 1) + sqrt(b)(a P2 + 1) = {} > 1",
            crate::channel::noisy_lhs(ch)
        )));
    }
    Ok(tin_sum(ch))
}

/// Genie parameters that make the `mu = 1` genie bound collapse to the TIN
/// sum rate. Exist exactly when the channel has noisy interference.
pub fn closed_form_genie(ch: &Channel) -> Result<GeniePoint> {
    let (a, b, p1, p2) = (ch.a(), ch.b(), ch.p1(), ch.p2());
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::domain(format!(
            "{ch}: closed-form genie is singular for a Z channel; use noisy_sum_capacity"
        )));
    }
    let g1 = (a * p2 + 1.0).powi(2);
    let g2 = (b * p1 + 1.0).powi(2);
    let m1 = b * g1 - a * g2 + 1.0;
    let m2 = a * g2 - b * g1 + 1.0;
    let d1 = m1 * m1 - 4.0 * b * g1;
    let d2 = m2 * m2 - 4.0 * a * g2;
    // rounding slack for channels exactly on the noisy boundary
    let slack = |scale: f64| 1e-12 * scale.max(1.0);
    if d1 < -slack(m1 * m1) {
        return Err(Error::Infeasible(format!("discriminant for sigma1^2 is negative ({d1})")));
    }
    if d2 < -slack(m2 * m2) {
        return Err(Error::Infeasible(format!("discriminant for sigma2^2 is negative ({d2})")));
    }
    if m1 < 0.0 {
        return Err(Error::Infeasible(format!("rho1 <= 1 requires b(aP2+1)^2 - a(bP1+1)^2 + 1 >= 0, got {m1}")));
    }
    if m2 < 0.0 {
        return Err(Error::Infeasible(format!("rho2 <= 1 requires a(bP1+1)^2 - b(aP2+1)^2 + 1 >= 0, got {m2}")));
    }
    let sigma1_sq = (m1 + d1.max(0.0).sqrt()) / (2.0 * b);
    let sigma2_sq = (m2 + d2.max(0.0).sqrt()) / (2.0 * a);
    let r1_sq = 1.0 - a * sigma2_sq;
    let r2_sq = 1.0 - b * sigma1_sq;
    if r1_sq < -1e-12 || r2_sq < -1e-12 || !(sigma1_sq > 0.0 && sigma2_sq > 0.0) {
        return Err(Error::Infeasible(format!(
            "genie variances ({sigma1_sq}, {sigma2_sq}) leave no real correlation"
        )));
    }
    GeniePoint::new(r1_sq.max(0.0).sqrt(), r2_sq.max(0.0).sqrt(), sigma1_sq, sigma2_sq)
}

/// Sum capacity under the mixed-interference condition (either orientation).
pub fn mixed_sum_capacity(ch: &Channel) -> Result<f64> {
    match ch.mixed_condition() {
        MixedCondition::User1Strong => Ok(strong_user1_sum(ch)),
        MixedCondition::User2Strong => Ok(strong_user1_sum(&ch.swapped())),
        MixedCondition::None => Err(Error::Condition(format!(
            "{ch}: (1 - ab) P1 <= a - 1 fails in both orientations"
        ))),
    }
}

/// Closed-form sum capacity for a table row whose power condition holds.
pub(crate) fn exact_formula(ch: &Channel, label: RegimeLabel) -> f64 {
    match label {
        RegimeLabel::I => inner::mac_sum_formula(ch),
        RegimeLabel::II | RegimeLabel::III => strong_user1_sum(&ch.swapped()),
        RegimeLabel::IV | RegimeLabel::V => strong_user1_sum(ch),
        RegimeLabel::VI => tin_sum(ch),
        RegimeLabel::VII => f64::NAN,
    }
}

/// Sum capacity by regime. Where capacity is unknown, returns the tightest
/// available upper bound flagged `UpperOnly`.
pub fn table1_sum_capacity(ch: &Channel) -> SumCapResult {
    let regime = ch.classify();
    let mixed = regime.mixed != MixedCondition::None;
    if let Some(value) = regime.known_sum_capacity {
        let mechanism = match regime.label {
            RegimeLabel::I => Mechanism::MacRowI,
            RegimeLabel::II | RegimeLabel::III if mixed => Mechanism::Mixed,
            RegimeLabel::II | RegimeLabel::III => Mechanism::RowIiIii,
            RegimeLabel::IV | RegimeLabel::V if mixed => Mechanism::Mixed,
            RegimeLabel::IV | RegimeLabel::V => Mechanism::RowIvV,
            RegimeLabel::VI => Mechanism::NoisyTin,
            RegimeLabel::VII => Mechanism::Unknown,
        };
        return SumCapResult { value, status: SumCapStatus::Exact, mechanism };
    }
    let value = match regime.label {
        // Power condition failed: the row's formula is still the Z-channel
        // converse (receiver on the weak side given the other input).
        RegimeLabel::III => strong_user1_sum(&ch.swapped()),
        RegimeLabel::V => strong_user1_sum(ch),
        _ => weak_upper_bound(ch),
    };
    SumCapResult { value, status: SumCapStatus::UpperOnly, mechanism: Mechanism::Unknown }
}

fn weak_upper_bound(ch: &Channel) -> f64 {
    let etw = outer::etw_sum_bound(ch).map(|w| w.value).unwrap_or(f64::INFINITY);
    let genie = outer::constraint1_bound(ch, 1.0).map(|w| w.value).unwrap_or(f64::INFINITY);
    genie.min(etw)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(a: f64, b: f64, p1: f64, p2: f64) -> Channel {
        Channel::new(a, b, p1, p2).unwrap()
    }

    #[test]
    fn noisy_examples() {
        let v = noisy_sum_capacity(&ch(0.09, 0.04, 10.0, 20.0)).unwrap();
        assert!((v - 3.0634).abs() < 1e-4);
        let z = noisy_sum_capacity(&ch(0.0, 0.5, 1.0, 1.0)).unwrap();
        assert!((z - (0.5 + 0.5 * (1.0 + 1.0 / 1.5_f64).log2())).abs() < 1e-12);
        assert!((z - 0.8685).abs() < 1e-4);
        assert!(matches!(noisy_sum_capacity(&ch(0.25, 0.25, 5.0, 5.0)), Err(Error::Condition(_))));
    }

    #[test]
    fn closed_form_genie_symmetric() {
        let g = closed_form_genie(&ch(0.04, 0.04, 5.0, 5.0)).unwrap();
        let s = (1.0 + 0.7696_f64.sqrt()) / 0.08;
        assert!((g.sigma1_sq - s).abs() < 1e-9 && (g.sigma2_sq - s).abs() < 1e-9);
        assert!((g.sigma1_sq - 23.4659).abs() < 1e-4);
        assert!((g.rho1 - 0.24772).abs() < 1e-5 && (g.rho2 - 0.24772).abs() < 1e-5);
    }

    #[test]
    fn closed_form_genie_infeasible() {
        match closed_form_genie(&ch(0.25, 0.25, 5.0, 5.0)) {
            Err(Error::Infeasible(msg)) => assert!(msg.contains("sigma1"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(closed_form_genie(&ch(0.0, 0.25, 1.0, 1.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn closed_form_genie_attains_tin() {
        for c in [ch(0.09, 0.04, 10.0, 20.0), ch(0.04, 0.04, 5.0, 5.0), ch(0.01, 0.2, 3.0, 0.5)] {
            assert!(c.is_noisy_interference());
            let g = closed_form_genie(&c).unwrap();
            let v = outer::constraint1_objective(&c, 1.0, &g).unwrap();
            assert!((v - tin_sum(&c)).abs() < 1e-9, "{c}: {v} vs {}", tin_sum(&c));
        }
    }

    #[test]
    fn mixed_examples() {
        let v = mixed_sum_capacity(&ch(2.0, 0.3, 1.0, 1.0)).unwrap();
        assert!((v - 0.9116).abs() < 1e-4);
        let v = mixed_sum_capacity(&ch(1.25, 0.8, 3.0, 1.0)).unwrap();
        assert!((v - (1.0 + 0.5 * (1.0 + 1.0 / 3.4_f64).log2())).abs() < 1e-12);
        let v = mixed_sum_capacity(&ch(0.3, 2.0, 1.0, 1.0)).unwrap();
        assert!((v - (0.5 + 0.5 * (1.0 + 1.0 / 1.3_f64).log2())).abs() < 1e-12);
        assert!(mixed_sum_capacity(&ch(2.0, 0.3, 10.0, 1.0)).is_err());
    }

    #[test]
    fn table_examples() {
        let r = table1_sum_capacity(&ch(4.0, 4.0, 2.0, 2.0));
        assert_eq!((r.status, r.mechanism), (SumCapStatus::Exact, Mechanism::MacRowI));
        assert!((r.value - 3.0_f64.log2()).abs() < 1e-12);

        let r = table1_sum_capacity(&ch(0.09, 0.04, 10.0, 20.0));
        assert_eq!((r.status, r.mechanism), (SumCapStatus::Exact, Mechanism::NoisyTin));
        assert!((r.value - 3.0634).abs() < 1e-4);

        let c = ch(0.5, 0.6, 10.0, 10.0);
        let r = table1_sum_capacity(&c);
        assert_eq!((r.status, r.mechanism), (SumCapStatus::UpperOnly, Mechanism::Unknown));
        assert!(r.value >= inner::best_inner_sum(&c));

        let r = table1_sum_capacity(&ch(2.0, 0.3, 1.0, 1.0));
        assert_eq!((r.status, r.mechanism), (SumCapStatus::Exact, Mechanism::Mixed));

        let r = table1_sum_capacity(&ch(2.0, 0.0, 1.0, 1.0));
        assert_eq!((r.status, r.mechanism), (SumCapStatus::Exact, Mechanism::RowIvV));

        let r = table1_sum_capacity(&ch(2.0, 0.3, 10.0, 1.0));
        assert_eq!(r.status, SumCapStatus::UpperOnly);
        assert!(r.value >= inner::best_inner_sum(&ch(2.0, 0.3, 10.0, 1.0)));
    }
}
