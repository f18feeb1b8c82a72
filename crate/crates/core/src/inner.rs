//! Achievable rates: treating interference as noise, time/frequency
//! division, the MAC sum rate for strong interference, and the
//! mixed-interference corner point.

use serde::{Deserialize, Serialize};

use crate::channel::{Channel, MixedCondition};
use crate::error::{Error, Result};
use crate::half_log2;

/// Rate pair in bits/use. Serialized as `[r1, r2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct RatePair {
    pub r1: f64,
    pub r2: f64,
}

impl RatePair {
    pub fn new(r1: f64, r2: f64) -> Self {
        RatePair { r1, r2 }
    }

    pub fn sum(&self) -> f64 {
        self.r1 + self.r2
    }

    pub fn swapped(&self) -> Self {
        RatePair { r1: self.r2, r2: self.r1 }
    }
}

impl From<[f64; 2]> for RatePair {
    fn from([r1, r2]: [f64; 2]) -> Self {
        RatePair { r1, r2 }
    }
}

impl From<RatePair> for [f64; 2] {
    fn from(p: RatePair) -> Self {
        [p.r1, p.r2]
    }
}

/// Frontier vertices ordered with `r1` nonincreasing and `r2` nondecreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline(Vec<RatePair>);

impl Polyline {
    pub fn new(vertices: Vec<RatePair>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::domain("a polyline needs at least two vertices"));
        }
        let ordered = vertices.windows(2).all(|w| w[1].r1 <= w[0].r1 && w[1].r2 >= w[0].r2);
        if !ordered {
            return Err(Error::domain("polyline vertices must run from the R1 axis to the R2 axis"));
        }
        Ok(Polyline(vertices))
    }

    pub fn vertices(&self) -> &[RatePair] {
        &self.0
    }

    pub fn max_sum(&self) -> f64 {
        self.0.iter().map(RatePair::sum).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Single-user decoding with interference treated as noise at transmit
/// powers `q1 <= P1`, `q2 <= P2`.
pub fn tin_rates(ch: &Channel, q1: f64, q2: f64) -> Result<RatePair> {
    if !(0.0..=ch.p1()).contains(&q1) {
        return Err(Error::Range { name: "q1", value: q1, lo: 0.0, hi: ch.p1() });
    }
    if !(0.0..=ch.p2()).contains(&q2) {
        return Err(Error::Range { name: "q2", value: q2, lo: 0.0, hi: ch.p2() });
    }
    Ok(RatePair {
        r1: half_log2(1.0 + q1 / (1.0 + ch.a() * q2)),
        r2: half_log2(1.0 + q2 / (1.0 + ch.b() * q1)),
    })
}

/// TIN rate pairs on an `n x n` grid of transmit powers `(i P1/(n-1), j P2/(n-1))`.
pub fn tin_backoff_grid(ch: &Channel, n: usize) -> Vec<RatePair> {
    let n = n.max(2);
    let frac = |k: usize| k as f64 / (n - 1) as f64;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let q1 = if i + 1 == n { ch.p1() } else { ch.p1() * frac(i) };
            let q2 = if j + 1 == n { ch.p2() } else { ch.p2() * frac(j) };
            out.push(tin_rates(ch, q1, q2).expect("grid powers are within the constraints"));
        }
    }
    out
}

/// Time/frequency division with bursty power `P_i / fraction`, sampled at
/// `steps` uniformly spaced time fractions from user 1 alone to user 2 alone.
pub fn tdm_frontier(ch: &Channel, steps: usize) -> Result<Polyline> {
    if steps < 2 {
        return Err(Error::domain(format!("tdm frontier needs >= 2 steps, got {steps}")));
    }
    let share = |t: f64, p: f64| if t > 0.0 { t * half_log2(1.0 + p / t) } else { 0.0 };
    let vertices = (0..steps)
        .map(|k| {
            let tau = 1.0 - k as f64 / (steps - 1) as f64;
            RatePair { r1: share(tau, ch.p1()), r2: share(1.0 - tau, ch.p2()) }
        })
        .collect();
    Polyline::new(vertices)
}

pub const DEFAULT_TIN_GRID: usize = 11;
pub const DEFAULT_TDM_STEPS: usize = 129;

/// Best sum rate over the TIN power-backoff grid and the TDM/FDM frontier.
pub fn best_inner_sum(ch: &Channel) -> f64 {
    let tin = tin_backoff_grid(ch, DEFAULT_TIN_GRID)
        .iter()
        .map(RatePair::sum)
        .fold(f64::NEG_INFINITY, f64::max);
    let tdm = tdm_frontier(ch, DEFAULT_TDM_STEPS).map(|p| p.max_sum()).unwrap_or(0.0);
    tin.max(tdm)
}

/// Sum capacity of two intersecting MACs when both cross gains are at least 1.
pub fn mac_sum_capacity(ch: &Channel) -> Result<f64> {
    if !(ch.a() >= 1.0 && ch.b() >= 1.0) {
        return Err(Error::domain(format!("{ch}: MAC sum rate needs a >= 1 and b >= 1")));
    }
    Ok(mac_sum_formula(ch))
}

pub(crate) fn mac_sum_formula(ch: &Channel) -> f64 {
    let (a, b, p1, p2) = (ch.a(), ch.b(), ch.p1(), ch.p2());
    (half_log2(1.0 + p1) + half_log2(1.0 + p2))
        .min(half_log2(1.0 + p1 + a * p2))
        .min(half_log2(1.0 + b * p1 + p2))
}

/// Mixed-interference scheme: the strong-side user runs at its single-user
/// rate, the other user at a rate both receivers decode while treating the
/// strong user's signal as noise.
pub fn mixed_achievable(ch: &Channel) -> Result<RatePair> {
    match ch.mixed_condition() {
        MixedCondition::User1Strong => mixed_user1_strong(ch),
        MixedCondition::User2Strong => Ok(mixed_user1_strong(&ch.swapped())?.swapped()),
        MixedCondition::None => Err(Error::Condition(format!(
            "{ch}: (1 - ab) P1 <= a - 1 fails in both orientations"
        ))),
    }
}

fn mixed_user1_strong(ch: &Channel) -> Result<RatePair> {
    let (a, b, p1, p2) = (ch.a(), ch.b(), ch.p1(), ch.p2());
    let r1 = half_log2(1.0 + p1);
    let r2 = half_log2(1.0 + p2 / (1.0 + b * p1));
    // user 2 must also be decodable at receiver 1 with user 1 as noise
    let at_rx1 = half_log2(1.0 + a * p2 / (1.0 + p1));
    if r2 > at_rx1 + 1e-12 * at_rx1.abs().max(1.0) {
        return Err(Error::Condition(format!(
            "{ch}: user 2 rate {r2} is not decodable at receiver 1 ({at_rx1})"
        )));
    }
    Ok(RatePair { r1, r2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(a: f64, b: f64, p1: f64, p2: f64) -> Channel {
        Channel::new(a, b, p1, p2).unwrap()
    }

    #[test]
    fn tin_examples() {
        let c = ch(0.09, 0.04, 10.0, 20.0);
        let r = tin_rates(&c, 10.0, 20.0).unwrap();
        let hand = 0.5 * (1.0 + 10.0 / 2.8_f64).log2() + 0.5 * (1.0 + 20.0 / 1.4_f64).log2();
        assert!((r.sum() - hand).abs() < 1e-12);
        assert!((r.sum() - 3.0634).abs() < 1e-4);
        assert!((r.r1 - 1.0963).abs() < 1e-4 && (r.r2 - 1.9671).abs() < 1e-4);

        let r = tin_rates(&c, 0.0, 7.0).unwrap();
        assert_eq!(r.r1, 0.0);
        assert!((r.r2 - 0.5 * 8.0_f64.log2()).abs() < 1e-15);

        let free = ch(0.0, 0.0, 3.0, 7.0);
        let r = tin_rates(&free, 3.0, 7.0).unwrap();
        assert_eq!((r.r1, r.r2), (1.0, 1.5));

        assert!(tin_rates(&c, 10.5, 1.0).is_err());
        assert!(tin_rates(&c, 1.0, -1.0).is_err());
    }

    #[test]
    fn tdm_examples() {
        let c = ch(0.3, 0.3, 6.0, 6.0);
        let f = tdm_frontier(&c, 3).unwrap();
        let mid = f.vertices()[1];
        let q = 0.25 * 13.0_f64.log2();
        assert!((mid.r1 - q).abs() < 1e-12 && (mid.r2 - q).abs() < 1e-12);
        assert_eq!(f.vertices()[0], RatePair::new(0.5 * 7.0_f64.log2(), 0.0));
        assert_eq!(f.vertices()[2], RatePair::new(0.0, 0.5 * 7.0_f64.log2()));
        assert!(tdm_frontier(&c, 129).unwrap().max_sum() >= 1.0);
        assert!(tdm_frontier(&c, 1).is_err());
    }

    #[test]
    fn mac_examples() {
        assert!((mac_sum_capacity(&ch(4.0, 4.0, 2.0, 2.0)).unwrap() - 3.0_f64.log2()).abs() < 1e-12);
        assert!((mac_sum_capacity(&ch(1.0, 1.0, 1.0, 1.0)).unwrap() - 0.5 * 3.0_f64.log2()).abs() < 1e-12);
        assert!((mac_sum_capacity(&ch(100.0, 100.0, 1.0, 1.0)).unwrap() - 1.0).abs() < 1e-12);
        assert!(mac_sum_capacity(&ch(0.9, 4.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn mixed_examples() {
        let r = mixed_achievable(&ch(2.0, 0.3, 1.0, 1.0)).unwrap();
        assert!((r.r1 - 0.5).abs() < 1e-15);
        assert!((r.r2 - 0.5 * (1.0 + 1.0 / 1.3_f64).log2()).abs() < 1e-15);
        assert!((r.sum() - 0.9116).abs() < 1e-4);

        // (1 - ab) P1 = a - 1: decodability holds with equality
        let c = ch(2.0, 0.3, 2.5, 1.0);
        let r = mixed_achievable(&c).unwrap();
        let at_rx1 = 0.5 * (1.0 + 2.0 / 3.5_f64).log2();
        assert!((r.r2 - at_rx1).abs() < 1e-12);

        assert!(matches!(mixed_achievable(&ch(2.0, 0.3, 10.0, 1.0)), Err(Error::Condition(_))));

        let r = mixed_achievable(&ch(0.3, 2.0, 1.0, 1.0)).unwrap();
        assert!((r.r2 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn polyline_orientation() {
        assert!(Polyline::new(vec![RatePair::new(1.0, 0.0)]).is_err());
        assert!(Polyline::new(vec![RatePair::new(0.0, 1.0), RatePair::new(1.0, 0.0)]).is_err());
        assert!(Polyline::new(vec![RatePair::new(1.0, 0.0), RatePair::new(0.0, 1.0)]).is_ok());
    }

    #[test]
    fn rate_pair_serializes_as_array() {
        let s = serde_json::to_string(&RatePair::new(1.5, 0.25)).unwrap();
        assert_eq!(s, "[1.5,0.25]");
        let back: RatePair = serde_json::from_str(&s).unwrap();
        assert_eq!(back, RatePair::new(1.5, 0.25));
    }
}
