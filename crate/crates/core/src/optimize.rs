//! Deterministic box-constrained minimization.
//!
//! [`grid_minimize`] is an exhaustive Cartesian grid search, used directly as
//! an oracle in tests. [`grid_then_refine`] runs a coarse grid and polishes
//! the best grid point with a Nelder-Mead simplex whose trial points are
//! clipped to the box.
//!
//! Objectives may return any `f64`; NaN and infinities are treated as `+inf`
//! so infeasible corners of a search box need no special casing.

use rayon::prelude::*;
use std::cmp::Ordering;

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 4;
pub const DEFAULT_COARSE: usize = 17;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_REFINE_EVALS: usize = 10_000;

/// Axis-aligned search box with 1 to 4 closed intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl SearchBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.len() > MAX_DIM {
            return Err(Error::domain(format!(
                "search box needs 1..={MAX_DIM} matching bounds, got {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        for (i, (&l, &h)) in lo.iter().zip(&hi).enumerate() {
            if !(l.is_finite() && h.is_finite()) || l > h {
                return Err(Error::domain(format!("bad interval [{l}, {h}] in dimension {i}")));
            }
        }
        Ok(SearchBox { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(&v, (&l, &h))| l <= v && v <= h)
    }

    fn clamp(&self, x: &mut [f64]) {
        for (v, (&l, &h)) in x.iter_mut().zip(self.lo.iter().zip(&self.hi)) {
            *v = v.clamp(l, h);
        }
    }

    fn grid_coord(&self, dim: usize, k: usize, resolution: usize) -> f64 {
        let (l, h) = (self.lo[dim], self.hi[dim]);
        if k + 1 == resolution {
            h
        } else {
            l + (h - l) * (k as f64) / ((resolution - 1) as f64)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

#[inline]
fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Total order on `(value, grid index)`; the lexicographically smallest index
/// wins ties.
fn better(x: (f64, usize), y: (f64, usize)) -> (f64, usize) {
    match x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal) {
        Ordering::Less => x,
        Ordering::Greater => y,
        Ordering::Equal => {
            if x.1 <= y.1 {
                x
            } else {
                y
            }
        }
    }
}

/// Decode a flat grid index; dimension 0 is the most significant digit so
/// flat order equals lexicographic order of the index tuple.
fn grid_point(bx: &SearchBox, resolution: usize, mut flat: usize, out: &mut [f64]) {
    for d in (0..bx.dim()).rev() {
        let k = flat % resolution;
        flat /= resolution;
        out[d] = bx.grid_coord(d, k, resolution);
    }
}

/// Evaluate `objective` on the full `resolution^dim` grid (both endpoints of
/// every interval included) and return the best grid point.
pub fn grid_minimize<F>(objective: F, bx: &SearchBox, resolution: usize) -> Result<MinResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if resolution < 2 {
        return Err(Error::domain(format!("grid resolution must be >= 2, got {resolution}")));
    }
    let dim = bx.dim();
    let total = resolution.pow(dim as u32);
    let (value, index) = (0..total)
        .into_par_iter()
        .map_init(
            || vec![0.0; dim],
            |buf, i| {
                grid_point(bx, resolution, i, buf);
                (sanitize(objective(buf)), i)
            },
        )
        .reduce(|| (f64::INFINITY, usize::MAX), better);
    let mut point = vec![0.0; dim];
    grid_point(bx, resolution, index.min(total - 1), &mut point);
    Ok(MinResult { point, value, evaluations: total })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineOptions {
    /// Points per dimension of the seeding grid.
    pub coarse: usize,
    /// Stop once a full simplex run improves the best value by less than this.
    pub tol: f64,
    /// Budget for simplex evaluations, excluding the coarse grid.
    pub max_evals: usize,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            coarse: DEFAULT_COARSE,
            tol: DEFAULT_TOL,
            max_evals: DEFAULT_MAX_REFINE_EVALS,
        }
    }
}

/// Coarse grid followed by clipped Nelder-Mead refinement from the best grid
/// point. The returned value never exceeds the coarse-grid value.
pub fn grid_then_refine<F>(objective: F, bx: &SearchBox, opts: RefineOptions) -> Result<MinResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if opts.coarse < 5 {
        return Err(Error::domain(format!("coarse resolution must be >= 5, got {}", opts.coarse)));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be > 0, got {}", opts.tol)));
    }
    let coarse = grid_minimize(&objective, bx, opts.coarse)?;
    let f = |x: &[f64]| sanitize(objective(x));

    let steps: Vec<f64> = (0..bx.dim())
        .map(|d| (bx.hi[d] - bx.lo[d]) / ((opts.coarse - 1) as f64))
        .collect();
    let mut best = coarse.point.clone();
    let mut best_val = coarse.value;
    let mut used = 0usize;

    if best_val.is_finite() {
        while used < opts.max_evals {
            let budget = opts.max_evals - used;
            let run = nelder_mead(&f, bx, &best, best_val, &steps, opts.tol, budget);
            used += run.evaluations;
            let improvement = best_val - run.value;
            if run.value < best_val {
                best = run.point;
                best_val = run.value;
            }
            if !(improvement >= opts.tol) {
                break;
            }
        }
    }

    // Re-evaluate once so the reported value is exactly objective(point).
    let value = f(&best);
    Ok(MinResult {
        point: best,
        value,
        evaluations: coarse.evaluations + used + 1,
    })
}

struct Run {
    point: Vec<f64>,
    value: f64,
    evaluations: usize,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// One Nelder-Mead run started from `x0` with axis steps `steps`. Trial
/// points are projected onto the box.
fn nelder_mead<F>(
    f: &F,
    bx: &SearchBox,
    x0: &[f64],
    f0: f64,
    steps: &[f64],
    tol: f64,
    budget: usize,
) -> Run
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0usize;
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f0));
    for d in 0..n {
        if evals >= budget {
            break;
        }
        let mut x = x0.to_vec();
        // step inward when the forward step would leave the box
        x[d] = if x0[d] + steps[d] <= bx.hi[d] { x0[d] + steps[d] } else { x0[d] - steps[d] };
        bx.clamp(&mut x);
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    if simplex.len() < n + 1 {
        return best_of(simplex, evals);
    }

    let by_value = |p: &(Vec<f64>, f64), q: &(Vec<f64>, f64)| p.1.total_cmp(&q.1);
    loop {
        simplex.sort_by(by_value);
        let spread = simplex[n].1 - simplex[0].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .zip(steps)
                    .map(|((a, b), s)| if *s > 0.0 { (a - b).abs() / s } else { 0.0 })
                    .fold(0.0_f64, f64::max)
            })
            .fold(0.0_f64, f64::max);
        if (spread.is_finite() && spread <= 0.1 * tol && diameter <= 1e-6) || diameter <= 1e-12 {
            break;
        }
        if evals + 2 > budget {
            break;
        }

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            let mut y: Vec<f64> =
                centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (c - w)).collect();
            bx.clamp(&mut y);
            y
        };

        let xr = along(REFLECT);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = along(EXPAND);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[n].1 {
            let xc = along(CONTRACT * REFLECT);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(-CONTRACT);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < fr.min(simplex[n].1) {
            simplex[n] = (xc, fc);
            continue;
        }
        if evals + n > budget {
            break;
        }
        let x_best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let mut y: Vec<f64> =
                x_best.iter().zip(&vertex.0).map(|(b, v)| b + SHRINK * (v - b)).collect();
            bx.clamp(&mut y);
            let fy = eval(&y, &mut evals);
            *vertex = (y, fy);
        }
    }
    best_of(simplex, evals)
}

fn best_of(simplex: Vec<(Vec<f64>, f64)>, evaluations: usize) -> Run {
    let (point, value) = simplex
        .into_iter()
        .reduce(|p, q| if q.1 < p.1 { q } else { p })
        .expect("simplex has at least one vertex");
    Run { point, value, evaluations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box(dim: usize) -> SearchBox {
        SearchBox::new(vec![0.0; dim], vec![1.0; dim]).unwrap()
    }

    #[test]
    fn box_validation() {
        assert!(SearchBox::new(vec![], vec![]).is_err());
        assert!(SearchBox::new(vec![0.0; 5], vec![1.0; 5]).is_err());
        assert!(SearchBox::new(vec![1.0], vec![0.0]).is_err());
        assert!(SearchBox::new(vec![0.0], vec![f64::NAN]).is_err());
        assert!(SearchBox::new(vec![0.5], vec![0.5]).is_ok());
    }

    #[test]
    fn grid_hits_exact_minimum() {
        let r = grid_minimize(|x| (x[0] - 0.3).powi(2), &unit_box(1), 11).unwrap();
        assert!((r.point[0] - 0.3).abs() < 1e-15);
        assert!(r.value < 1e-30);
        assert_eq!(r.evaluations, 11);
    }

    #[test]
    fn grid_ties_go_to_low_corner() {
        let bx = SearchBox::new(vec![-1.0, 2.0, 0.0], vec![1.0, 3.0, 5.0]).unwrap();
        let r = grid_minimize(|_| 4.0, &bx, 7).unwrap();
        assert_eq!(r.point, vec![-1.0, 2.0, 0.0]);
        assert_eq!(r.value, 4.0);
    }

    #[test]
    fn grid_evaluation_count_4d() {
        let r = grid_minimize(|x| x.iter().sum(), &unit_box(4), 41).unwrap();
        assert_eq!(r.evaluations, 2_825_761);
        assert_eq!(r.point, vec![0.0; 4]);
    }

    #[test]
    fn nan_counts_as_infinity() {
        let r = grid_minimize(
            |x| if x[0] < 0.5 { f64::NAN } else { x[0] },
            &unit_box(1),
            11,
        )
        .unwrap();
        assert!((r.point[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn refine_quadratic_bowl() {
        let center = [0.31, 0.77, 0.123, 0.5];
        let f = |x: &[f64]| x.iter().zip(&center).map(|(a, c)| (a - c).powi(2)).sum::<f64>();
        let r = grid_then_refine(f, &unit_box(4), RefineOptions::default()).unwrap();
        assert!(r.value < 1e-9, "{r:?}");
        assert_eq!(r.value, f(&r.point));
    }

    #[test]
    fn refine_minimum_on_box_face() {
        // unconstrained minimum outside the box; constrained one on the face x0 = 1
        let f = |x: &[f64]| (x[0] - 2.0).powi(2) + (x[1] - 0.4).powi(2);
        let r = grid_then_refine(f, &unit_box(2), RefineOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
        assert!(unit_box(2).contains(&r.point));
    }

    #[test]
    fn refine_never_worse_than_coarse_grid() {
        let f = |x: &[f64]| (5.0 * x[0]).sin() * (3.0 * x[1]).cos() + x[2];
        let bx = unit_box(3);
        let opts = RefineOptions::default();
        let g = grid_minimize(f, &bx, opts.coarse).unwrap();
        let r = grid_then_refine(f, &bx, opts).unwrap();
        assert!(r.value <= g.value);
    }

    #[test]
    fn looser_tolerance_stays_within_tolerance() {
        let f = |x: &[f64]| (x[0] - 0.2).powi(2) + 3.0 * (x[1] - 0.9).powi(4) + x[0] * x[1];
        let bx = unit_box(2);
        let tight = grid_then_refine(f, &bx, RefineOptions::default()).unwrap();
        let loose =
            grid_then_refine(f, &bx, RefineOptions { tol: 1e-3, ..RefineOptions::default() }).unwrap();
        assert!(loose.value <= tight.value + 1e-3);
    }

    #[test]
    fn deterministic() {
        let f = |x: &[f64]| (x[0] - 0.37).abs() + (x[1] * 7.0).sin().abs() + x[2] * x[3];
        let bx = unit_box(4);
        let a = grid_then_refine(f, &bx, RefineOptions::default()).unwrap();
        let b = grid_then_refine(f, &bx, RefineOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_options() {
        let f = |x: &[f64]| x[0];
        assert!(grid_minimize(f, &unit_box(1), 1).is_err());
        let opts = RefineOptions { coarse: 4, ..RefineOptions::default() };
        assert!(grid_then_refine(f, &unit_box(1), opts).is_err());
        let opts = RefineOptions { tol: 0.0, ..RefineOptions::default() };
        assert!(grid_then_refine(f, &unit_box(1), opts).is_err());
    }
}
