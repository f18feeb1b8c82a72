//! Genie-aided outer bounds on weighted sum rates `R1 + w R2`.
//!
//! The main family gives each receiver a noisy copy `X_i + N_i` of its own
//! input, where the genie noise `N_i` has variance `sigma_i^2` and
//! correlation `rho_i` with the receiver noise. Minimizing over the genie
//! parameters gives the tightest member ([`constraint1_bound`]). Two further
//! families ([`constraint2_bound`], [`constraint3_bound`]) come from
//! reducing the channel to a Z channel and are equivalent to the parametric
//! degraded-broadcast form in [`kramer_parametric`].

use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::half_log2;
use crate::optimize::{self, MinResult, RefineOptions, SearchBox};

/// Inset applied to the open ends of the genie search box.
pub const INSET: f64 = 1e-9;
/// Relative margin by which the unbounded `sigma^2` coordinate is capped past
/// the point where the objective stops decreasing.
pub const CAP_MARGIN: f64 = 1e-3;
/// Relative slack for membership tests on the boundaries of the genie set.
const BOUNDARY_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeniePoint {
    pub rho1: f64,
    pub rho2: f64,
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
}

impl GeniePoint {
    pub fn new(rho1: f64, rho2: f64, sigma1_sq: f64, sigma2_sq: f64) -> Result<Self> {
        for (name, r) in [("rho1", rho1), ("rho2", rho2)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::Range { name, value: r, lo: 0.0, hi: 1.0 });
            }
        }
        for (name, s) in [("sigma1_sq", sigma1_sq), ("sigma2_sq", sigma2_sq)] {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::domain(format!("{name} = {s} must be finite and > 0")));
            }
        }
        Ok(GeniePoint { rho1, rho2, sigma1_sq, sigma2_sq })
    }
}

/// Which bound produced a [`WeightedBound`] or half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundSource {
    Thm1Constraint1,
    Constraint2,
    Constraint3,
    SingleUser1,
    SingleUser2,
    EtwPoint,
    KramerParametric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Genie(GeniePoint),
    Scalar(f64),
}

/// Certified `R1 + weight * R2 <= value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedBound {
    pub weight: f64,
    pub value: f64,
    pub source: BoundSource,
    pub witness: Option<Witness>,
    /// Objective evaluations spent (zero for closed forms).
    pub evaluations: usize,
}

fn require_weak_both(ch: &Channel) -> Result<()> {
    if ch.is_weak_both() {
        Ok(())
    } else {
        Err(Error::domain(format!("{ch}: genie bounds need 0 < a < 1 and 0 < b < 1")))
    }
}

fn check_weight(name: &'static str, w: f64) -> Result<()> {
    if w.is_finite() && w > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {w} must be finite and > 0")))
    }
}

#[inline]
fn leq(x: f64, bound: f64) -> bool {
    x <= bound + BOUNDARY_RTOL * bound.abs().max(f64::MIN_POSITIVE)
}

/// Optimal power for the `X1`-dependent entropy difference. For `mu >= 1` it
/// has three branches in `sigma1^2`; the middle one is empty at `mu = 1`.
pub fn pstar1(ch: &Channel, mu: f64, rho2: f64, sigma1_sq: f64) -> Result<f64> {
    check_weight("mu", mu)?;
    if !(ch.b() > 0.0) {
        return Err(Error::domain("optimal genie power for user 1 needs b > 0"));
    }
    let (b, p1) = (ch.b(), ch.p1());
    let free = 1.0 - rho2 * rho2;
    if mu >= 1.0 {
        let upper = free / (b * mu);
        if mu == 1.0 {
            return Ok(if leq(sigma1_sq, upper) { p1 } else { 0.0 });
        }
        let lower = ((1.0 / mu - 1.0) * p1 + upper).max(0.0);
        Ok(if leq(sigma1_sq, lower) {
            p1
        } else if leq(sigma1_sq, upper) {
            ((free - b * mu * sigma1_sq) / (b * mu - b)).clamp(0.0, p1)
        } else {
            0.0
        })
    } else if leq(sigma1_sq, free / b) {
        Ok(p1)
    } else {
        Err(Error::domain(format!(
            "sigma1_sq = {sigma1_sq} exceeds (1 - rho2^2)/b = {} for mu < 1",
            free / b
        )))
    }
}

/// Mirror of [`pstar1`] for user 2: three branches when `mu < 1`, full power
/// when `mu >= 1`.
pub fn pstar2(ch: &Channel, mu: f64, rho1: f64, sigma2_sq: f64) -> Result<f64> {
    check_weight("mu", mu)?;
    if !(ch.a() > 0.0) {
        return Err(Error::domain("optimal genie power for user 2 needs a > 0"));
    }
    let (a, p2) = (ch.a(), ch.p2());
    let free = 1.0 - rho1 * rho1;
    if mu >= 1.0 {
        return if leq(sigma2_sq, free / a) {
            Ok(p2)
        } else {
            Err(Error::domain(format!(
                "sigma2_sq = {sigma2_sq} exceeds (1 - rho1^2)/a = {} for mu >= 1",
                free / a
            )))
        };
    }
    let upper = mu * free / a;
    let lower = ((mu - 1.0) * p2 + upper).max(0.0);
    Ok(if leq(sigma2_sq, lower) {
        p2
    } else if leq(sigma2_sq, upper) {
        ((mu * free - a * sigma2_sq) / (a - a * mu)).clamp(0.0, p2)
    } else {
        0.0
    })
}

/// Box `(0, s1_hi] x (0, s2_hi]` of admissible `(sigma1^2, sigma2^2)` for
/// fixed correlations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaBox {
    pub sigma1_sq_max: f64,
    pub sigma2_sq_max: f64,
}

impl SigmaBox {
    pub fn is_empty(&self) -> bool {
        !(self.sigma1_sq_max > 0.0 && self.sigma2_sq_max > 0.0)
    }
}

/// Search box for the genie variances.
///
/// One coordinate is bounded by the genie set itself. The other is unbounded
/// there, but past `max(t, rho^2)` (with `t` the zero-power threshold of the
/// corresponding optimal power) the objective is nondecreasing in it, so the
/// cap `max(t, rho^2) * (1 + CAP_MARGIN)` loses nothing.
pub fn sigma_box(ch: &Channel, mu: f64, rho1: f64, rho2: f64) -> Result<SigmaBox> {
    check_weight("mu", mu)?;
    require_weak_both(ch)?;
    let (a, b) = (ch.a(), ch.b());
    let free1 = 1.0 - rho1 * rho1;
    let free2 = 1.0 - rho2 * rho2;
    Ok(if mu >= 1.0 {
        SigmaBox {
            sigma1_sq_max: (free2 / (b * mu)).max(rho1 * rho1) * (1.0 + CAP_MARGIN),
            sigma2_sq_max: free1 / a,
        }
    } else {
        SigmaBox {
            sigma1_sq_max: free2 / b,
            sigma2_sq_max: (mu * free1 / a).max(rho2 * rho2) * (1.0 + CAP_MARGIN),
        }
    })
}

/// Whether `(sigma1^2, sigma2^2)` lies in the genie set for weight `mu`.
pub fn in_sigma_set(ch: &Channel, mu: f64, g: &GeniePoint) -> bool {
    if !(g.sigma1_sq > 0.0 && g.sigma2_sq > 0.0) {
        return false;
    }
    if mu >= 1.0 {
        leq(g.sigma2_sq, (1.0 - g.rho1 * g.rho1) / ch.a())
    } else {
        leq(g.sigma1_sq, (1.0 - g.rho2 * g.rho2) / ch.b())
    }
}

/// `1 + P + x P_cross - (P + rho sigma)^2 / (P + sigma^2)`: the conditional
/// output variance given the genie signal.
#[inline]
fn conditional_variance(p: f64, cross: f64, rho: f64, sigma_sq: f64) -> f64 {
    let t = p + rho * sigma_sq.sqrt();
    1.0 + p + cross - t * t / (p + sigma_sq)
}

fn log_arg(x: f64, what: &str) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::domain(format!("non-positive log argument {x} in {what}")))
    }
}

/// The six-term genie bound on `R1 + mu R2` at a fixed genie point.
pub fn constraint1_objective(ch: &Channel, mu: f64, g: &GeniePoint) -> Result<f64> {
    require_weak_both(ch)?;
    check_weight("mu", mu)?;
    if !in_sigma_set(ch, mu, g) {
        return Err(Error::domain(format!("genie point {g:?} is outside the genie set for mu = {mu}")));
    }
    let (a, b, p1, p2) = (ch.a(), ch.b(), ch.p1(), ch.p2());
    let q1 = pstar1(ch, mu, g.rho2, g.sigma1_sq)?;
    let q2 = pstar2(ch, mu, g.rho1, g.sigma2_sq)?;

    let user1 = half_log2(1.0 + q1 / g.sigma1_sq)
        - half_log2(log_arg(a * q2 + 1.0 - g.rho1 * g.rho1, "interference term 1")?)
        + half_log2(log_arg(conditional_variance(p1, a * p2, g.rho1, g.sigma1_sq), "output term 1")?);
    let user2 = half_log2(1.0 + q2 / g.sigma2_sq)
        - half_log2(log_arg(b * q1 + 1.0 - g.rho2 * g.rho2, "interference term 2")?)
        + half_log2(log_arg(conditional_variance(p2, b * p1, g.rho2, g.sigma2_sq), "output term 2")?);
    Ok(user1 + mu * user2)
}

/// Optimizer coordinates `(rho1, rho2, u1, u2)`: the variances are
/// `u_i * sigma_box(rho1, rho2)` so the search domain is a fixed box.
pub fn genie_search_box() -> SearchBox {
    SearchBox::new(
        vec![0.0, 0.0, INSET, INSET],
        vec![1.0 - INSET, 1.0 - INSET, 1.0, 1.0],
    )
    .expect("static box is valid")
}

/// Map optimizer coordinates to a genie point, `None` where the sigma box is
/// empty.
pub fn genie_from_coords(ch: &Channel, mu: f64, x: &[f64]) -> Option<GeniePoint> {
    let (rho1, rho2) = (x[0], x[1]);
    let sb = sigma_box(ch, mu, rho1, rho2).ok()?;
    if sb.is_empty() {
        return None;
    }
    Some(GeniePoint {
        rho1,
        rho2,
        sigma1_sq: x[2] * sb.sigma1_sq_max,
        sigma2_sq: x[3] * sb.sigma2_sq_max,
    })
}

/// Objective over optimizer coordinates; infeasible points map to `+inf`.
pub fn constraint1_coords_objective(ch: &Channel, mu: f64) -> impl Fn(&[f64]) -> f64 + Sync + '_ {
    move |x: &[f64]| match genie_from_coords(ch, mu, x) {
        Some(g) => constraint1_objective(ch, mu, &g).unwrap_or(f64::INFINITY),
        None => f64::INFINITY,
    }
}

/// [`constraint1_bound`] with explicit optimizer settings.
pub fn constraint1_bound_with(ch: &Channel, mu: f64, opts: RefineOptions) -> Result<WeightedBound> {
    require_weak_both(ch)?;
    check_weight("mu", mu)?;
    let objective = constraint1_coords_objective(ch, mu);
    let MinResult { point, value, evaluations } =
        optimize::grid_then_refine(objective, &genie_search_box(), opts)?;
    let witness = genie_from_coords(ch, mu, &point)
        .ok_or_else(|| Error::domain(format!("{ch}: no feasible genie point for mu = {mu}")))?;
    if !value.is_finite() {
        return Err(Error::domain(format!("{ch}: genie bound is not finite for mu = {mu}")));
    }
    Ok(WeightedBound {
        weight: mu,
        value,
        source: BoundSource::Thm1Constraint1,
        witness: Some(Witness::Genie(witness)),
        evaluations,
    })
}

/// Tightest genie bound on `R1 + mu R2` over all genie parameters.
///
/// Every feasible genie point yields a valid bound, so the reported value is
/// an upper bound even when the optimizer stops short of the true minimum.
pub fn constraint1_bound(ch: &Channel, mu: f64) -> Result<WeightedBound> {
    constraint1_bound_with(ch, mu, RefineOptions::default())
}

/// Admissible weights `[(1 + b P1)/(b + b P1), 1/b]` for [`constraint2_bound`].
pub fn eta1_range(ch: &Channel) -> (f64, f64) {
    let (b, p1) = (ch.b(), ch.p1());
    ((1.0 + b * p1) / (b + b * p1), 1.0 / b)
}

/// Admissible weights `[a, (a + a P2)/(1 + a P2)]` for [`constraint3_bound`].
pub fn eta2_range(ch: &Channel) -> (f64, f64) {
    let (a, p2) = (ch.a(), ch.p2());
    (a, (a + a * p2) / (1.0 + a * p2))
}

fn check_in_range(name: &'static str, v: f64, (lo, hi): (f64, f64)) -> Result<()> {
    if leq(lo, v) && leq(v, hi) {
        Ok(())
    } else {
        Err(Error::Range { name, value: v, lo, hi })
    }
}

/// Z-channel bound with receiver 1 given `X2`:
/// `R1 + eta1 R2 <= C(P1*) - eta1/2 log(1 + b P1*) + eta1/2 log(1 + b P1 + P2)`
/// with `P1* = (b eta1 - 1)/(b - b eta1)`.
pub fn constraint2_bound(ch: &Channel, eta1: f64) -> Result<WeightedBound> {
    let b = ch.b();
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::domain(format!("{ch}: Z-channel bound on R1 + eta1 R2 needs 0 < b < 1")));
    }
    let range = eta1_range(ch);
    check_in_range("eta1", eta1, range)?;
    let eta1 = eta1.clamp(range.0, range.1);
    let value = half_log2(1.0 + (b * eta1 - 1.0) / (b - b * eta1))
        - eta1 * half_log2(1.0 + (b * eta1 - 1.0) / (1.0 - eta1))
        + eta1 * half_log2(1.0 + b * ch.p1() + ch.p2());
    Ok(WeightedBound {
        weight: eta1,
        value,
        source: BoundSource::Constraint2,
        witness: Some(Witness::Scalar(pstar_eta1(ch, eta1)?)),
        evaluations: 0,
    })
}

/// Z-channel bound with receiver 2 given `X1`, on `R1 + eta2 R2`.
pub fn constraint3_bound(ch: &Channel, eta2: f64) -> Result<WeightedBound> {
    let a = ch.a();
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::domain(format!("{ch}: Z-channel bound on R1 + eta2 R2 needs 0 < a < 1")));
    }
    let range = eta2_range(ch);
    check_in_range("eta2", eta2, range)?;
    let eta2 = eta2.clamp(range.0, range.1);
    let value = half_log2(1.0 + ch.p1() + a * ch.p2())
        - half_log2(1.0 + (a - eta2) / (eta2 - 1.0))
        + eta2 * half_log2(1.0 + (a - eta2) / (a * eta2 - a));
    Ok(WeightedBound {
        weight: eta2,
        value,
        source: BoundSource::Constraint3,
        witness: Some(Witness::Scalar((a - eta2) / (a * eta2 - a))),
        evaluations: 0,
    })
}

/// Degraded-broadcast parametrization of the receiver-1 Z-channel bound.
///
/// With `P2'` in `[0, P2]` and `P1' = P1/a + P2 - P2'`, returns the slope
/// `alpha = (a + a P2')/(1 + a P2')` and the weighted sum
/// `log(1 + P1'/(P2' + 1/a))/2 + alpha log(1 + P2')/2`.
pub fn kramer_parametric(ch: &Channel, p2_prime: f64) -> Result<(f64, f64)> {
    let a = ch.a();
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::domain(format!("{ch}: parametric bound needs 0 < a < 1")));
    }
    if !(0.0..=ch.p2()).contains(&p2_prime) {
        return Err(Error::Range { name: "p2_prime", value: p2_prime, lo: 0.0, hi: ch.p2() });
    }
    let p1_prime = ch.p1() / a + ch.p2() - p2_prime;
    let alpha = (a + a * p2_prime) / (1.0 + a * p2_prime);
    let r1 = half_log2(1.0 + p1_prime / (p2_prime + 1.0 / a));
    let r2 = half_log2(1.0 + p2_prime);
    Ok((alpha, r1 + alpha * r2))
}

/// The third sum-rate bound of Etkin, Tse and Wang: the genie objective at
/// `mu = 1`, `rho = 0`, `sigma1^2 = 1/b`, `sigma2^2 = 1/a`.
pub fn etw_sum_bound(ch: &Channel) -> Result<WeightedBound> {
    require_weak_both(ch)?;
    let g = GeniePoint { rho1: 0.0, rho2: 0.0, sigma1_sq: 1.0 / ch.b(), sigma2_sq: 1.0 / ch.a() };
    let value = constraint1_objective(ch, 1.0, &g)?;
    Ok(WeightedBound {
        weight: 1.0,
        value,
        source: BoundSource::EtwPoint,
        witness: Some(Witness::Genie(g)),
        evaluations: 1,
    })
}

/// Optimal user-1 power in the Z-channel bound on `R1 + eta1 R2`.
pub fn pstar_eta1(ch: &Channel, eta1: f64) -> Result<f64> {
    let (b, p1) = (ch.b(), ch.p1());
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::domain(format!("{ch}: needs 0 < b < 1")));
    }
    check_weight("eta1", eta1)?;
    let (lo, hi) = eta1_range(ch);
    Ok(if eta1 <= lo {
        p1
    } else if eta1 < hi {
        (b * eta1 - 1.0) / (b - b * eta1)
    } else {
        0.0
    })
}
