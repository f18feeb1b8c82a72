//! Outer capacity-region polygon from supporting half-planes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::half_log2;
use crate::inner::RatePair;
use crate::outer::{self, BoundSource};

pub const CONTAINMENT_SLACK: f64 = 1e-9;
pub const DEFAULT_WEIGHT_MIN: f64 = 1.0 / 64.0;
pub const DEFAULT_WEIGHT_MAX: f64 = 64.0;
pub const DEFAULT_WEIGHT_COUNT: usize = 129;

/// `R1 + w R2 <= c`. `w = None` encodes the axis constraint `R2 <= c`;
/// `w = Some(0.0)` is `R1 <= c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub w: Option<f64>,
    pub c: f64,
    pub source: BoundSource,
}

impl HalfPlane {
    pub fn weighted(w: f64, c: f64, source: BoundSource) -> Self {
        HalfPlane { w: Some(w), c, source }
    }

    /// `c - (r1 + w r2)`; nonnegative inside.
    pub fn slack(&self, p: &RatePair) -> f64 {
        match self.w {
            Some(w) => self.c - (p.r1 + w * p.r2),
            None => self.c - p.r2,
        }
    }

    /// Coefficients `(x, y)` of `x r1 + y r2 <= c`.
    fn coefficients(&self) -> (f64, f64) {
        match self.w {
            Some(w) => (1.0, w),
            None => (0.0, 1.0),
        }
    }
}

/// Convex outer region `{R >= 0 : all half-planes hold}`.
///
/// `vertices` is the upper-right frontier from the `R1` axis to the `R2`
/// axis (`r1` nonincreasing); together with the origin it closes the
/// polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionPolygon {
    pub vertices: Vec<RatePair>,
    pub halfplanes: Vec<HalfPlane>,
}

impl RegionPolygon {
    /// Intersect the half-planes with the nonnegative quadrant.
    pub fn from_halfplanes(halfplanes: Vec<HalfPlane>) -> Result<Self> {
        let r1_max = halfplanes
            .iter()
            .filter(|h| h.w == Some(0.0))
            .map(|h| h.c)
            .fold(f64::INFINITY, f64::min);
        let r2_max = halfplanes
            .iter()
            .filter(|h| h.w.is_none())
            .map(|h| h.c)
            .fold(f64::INFINITY, f64::min);
        if !(r1_max.is_finite() && r2_max.is_finite()) {
            return Err(Error::domain("region needs both single-user caps to be bounded"));
        }
        if r1_max < 0.0 || r2_max < 0.0 {
            return Err(Error::domain("negative single-user cap"));
        }
        // counter-clockwise from the origin
        let mut poly = vec![
            RatePair::new(0.0, 0.0),
            RatePair::new(r1_max, 0.0),
            RatePair::new(r1_max, r2_max),
            RatePair::new(0.0, r2_max),
        ];
        for h in &halfplanes {
            poly = clip(&poly, h);
            if poly.is_empty() {
                return Err(Error::domain(format!("half-plane {h:?} excludes the origin")));
            }
        }
        dedup_cyclic(&mut poly);
        let start = poly
            .iter()
            .position(|p| p.r1.abs() <= 1e-15 && p.r2.abs() <= 1e-15)
            .ok_or_else(|| Error::domain("origin was clipped from the region"))?;
        poly.rotate_left(start);
        let vertices = poly[1..].to_vec();
        Ok(RegionPolygon { vertices, halfplanes })
    }

    pub fn contains(&self, p: &RatePair) -> bool {
        contains(self, p)
    }

    /// Area of the polygon including the origin.
    pub fn area(&self) -> f64 {
        let mut pts = Vec::with_capacity(self.vertices.len() + 1);
        pts.push(RatePair::new(0.0, 0.0));
        pts.extend_from_slice(&self.vertices);
        let n = pts.len();
        0.5 * (0..n)
            .map(|i| {
                let (p, q) = (pts[i], pts[(i + 1) % n]);
                p.r1 * q.r2 - q.r1 * p.r2
            })
            .sum::<f64>()
    }

    /// Counter-clockwise convexity of origin + frontier.
    pub fn is_convex(&self) -> bool {
        let mut pts = Vec::with_capacity(self.vertices.len() + 1);
        pts.push(RatePair::new(0.0, 0.0));
        pts.extend_from_slice(&self.vertices);
        let n = pts.len();
        if n < 3 {
            return true;
        }
        (0..n).all(|i| {
            let (p, q, r) = (pts[i], pts[(i + 1) % n], pts[(i + 2) % n]);
            let cross = (q.r1 - p.r1) * (r.r2 - q.r2) - (q.r2 - p.r2) * (r.r1 - q.r1);
            cross >= -1e-12
        })
    }

    pub fn max_sum(&self) -> f64 {
        self.vertices.iter().map(RatePair::sum).fold(0.0, f64::max)
    }
}

/// Sutherland-Hodgman step against one half-plane.
fn clip(poly: &[RatePair], h: &HalfPlane) -> Vec<RatePair> {
    let (x, y) = h.coefficients();
    let slack = |p: &RatePair| h.c - (x * p.r1 + y * p.r2);
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let (sp, sq) = (slack(&p), slack(&q));
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp >= 0.0) != (sq >= 0.0) {
            let t = sp / (sp - sq);
            out.push(RatePair::new(p.r1 + t * (q.r1 - p.r1), p.r2 + t * (q.r2 - p.r2)));
        }
    }
    out
}

fn dedup_cyclic(poly: &mut Vec<RatePair>) {
    let near = |p: &RatePair, q: &RatePair| (p.r1 - q.r1).abs() <= 1e-13 && (p.r2 - q.r2).abs() <= 1e-13;
    poly.dedup_by(|q, p| near(p, q));
    while poly.len() > 1 && near(&poly[0], &poly[poly.len() - 1]) {
        poly.pop();
    }
}

/// Supporting half-plane `R1 + w R2 <= c(w)`: the smallest of the genie
/// bound and whichever Z-channel bounds admit weight `w`.
pub fn outer_support(ch: &Channel, w: f64) -> Result<HalfPlane> {
    if !ch.is_weak_both() {
        return Err(Error::domain(format!("{ch}: outer region needs 0 < a < 1 and 0 < b < 1")));
    }
    let mut best = outer::constraint1_bound(ch, w)?;
    let in_range = |(lo, hi): (f64, f64)| lo <= w && w <= hi;
    if in_range(outer::eta1_range(ch)) {
        let c2 = outer::constraint2_bound(ch, w)?;
        if c2.value < best.value {
            best = c2;
        }
    }
    if in_range(outer::eta2_range(ch)) {
        let c3 = outer::constraint3_bound(ch, w)?;
        if c3.value < best.value {
            best = c3;
        }
    }
    Ok(HalfPlane::weighted(w, best.value, best.source))
}

/// `count` log-spaced weights over `[w_min, w_max]` plus the endpoints of both
/// Z-channel weight ranges, sorted and deduplicated.
pub fn weight_grid(ch: &Channel, w_min: f64, w_max: f64, count: usize) -> Result<Vec<f64>> {
    if !(w_min > 0.0 && w_max >= w_min && w_max.is_finite()) || count < 1 {
        return Err(Error::domain(format!(
            "weights need 0 < min <= max and count >= 1, got [{w_min}, {w_max}] x {count}"
        )));
    }
    let mut ws: Vec<f64> = if count == 1 {
        vec![w_min]
    } else {
        let (l0, l1) = (w_min.ln(), w_max.ln());
        (0..count)
            .map(|k| {
                if k == 0 {
                    w_min
                } else if k + 1 == count {
                    w_max
                } else {
                    (l0 + (l1 - l0) * k as f64 / (count - 1) as f64).exp()
                }
            })
            .collect()
    };
    // exact unit weight when the grid straddles it symmetrically in log space
    for w in ws.iter_mut() {
        if (*w - 1.0).abs() < 1e-12 {
            *w = 1.0;
        }
    }
    let (e1, f1) = outer::eta1_range(ch);
    let (e2, f2) = outer::eta2_range(ch);
    ws.extend([e1, f1, e2, f2]);
    ws.sort_by(f64::total_cmp);
    ws.dedup();
    Ok(ws)
}

pub fn default_weights(ch: &Channel) -> Vec<f64> {
    weight_grid(ch, DEFAULT_WEIGHT_MIN, DEFAULT_WEIGHT_MAX, DEFAULT_WEIGHT_COUNT)
        .expect("default weight grid is valid")
}

/// Intersection of the supporting half-planes at `weights` with the
/// single-user caps and the nonnegative quadrant.
pub fn outer_region(ch: &Channel, weights: &[f64]) -> Result<RegionPolygon> {
    if !ch.is_weak_both() {
        return Err(Error::domain(format!("{ch}: outer region needs 0 < a < 1 and 0 < b < 1")));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::domain("weights must be finite and > 0"));
    }
    let mut halfplanes = vec![
        HalfPlane { w: Some(0.0), c: half_log2(1.0 + ch.p1()), source: BoundSource::SingleUser1 },
        HalfPlane { w: None, c: half_log2(1.0 + ch.p2()), source: BoundSource::SingleUser2 },
    ];
    let supports: Result<Vec<HalfPlane>> = weights.par_iter().map(|&w| outer_support(ch, w)).collect();
    halfplanes.extend(supports?);
    RegionPolygon::from_halfplanes(halfplanes)
}

/// Every generating half-plane and both nonnegativity constraints hold with
/// slack at least `-1e-9`.
pub fn contains(poly: &RegionPolygon, p: &RatePair) -> bool {
    p.r1 >= -CONTAINMENT_SLACK
        && p.r2 >= -CONTAINMENT_SLACK
        && poly.halfplanes.iter().all(|h| h.slack(p) >= -CONTAINMENT_SLACK)
}
