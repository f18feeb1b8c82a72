//! Command-line front end. Every command writes JSON or CSV with 12
//! significant digits; rates are in bits/use.
//!
//! Exit codes: 0 success, 1 self-check failure, 2 usage or domain error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::channel::{symmetric_noisy_threshold, Channel};
use crate::error::{Error, Result};
use crate::inner::{self, RatePair};
use crate::outer::{self, Witness};
use crate::region::{self, RegionPolygon};
use crate::sumcap;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const UNITS: &str = "bits/use";
/// `lower` and `thm1` closer than this mark a sweep row as exact.
pub const EXACT_TOL: f64 = 1e-4;
pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Parser)]
#[command(name = "gic", version, about = "Bounds on the two-user Gaussian interference channel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regime, capacity conditions and sum capacity of a channel.
    Classify(ChannelArgs),
    /// Genie-aided bound on R1 + mu R2.
    Bound {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
    },
    /// Outer region polygon and its supporting half-planes.
    Region {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, default_value_t = region::DEFAULT_WEIGHT_MIN)]
        weights_min: f64,
        #[arg(long, default_value_t = region::DEFAULT_WEIGHT_MAX)]
        weights_max: f64,
        #[arg(long, default_value_t = region::DEFAULT_WEIGHT_COUNT)]
        weights_count: usize,
        /// Output file; JSON goes to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sum-rate bounds of the symmetric channel IC(a, a, p, p) over a range of a.
    Sweep {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0.001)]
        a_min: f64,
        #[arg(long, default_value_t = 0.9)]
        a_max: f64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long)]
        log_spaced: bool,
        /// Output file; CSV goes to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Largest symmetric gain with noisy interference at power p.
    PointA {
        #[arg(long)]
        p: f64,
    },
    /// Randomized cross-checks of the bound identities.
    Selfcheck {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Override every check tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Random channels per check.
        #[arg(long, default_value_t = 20)]
        draws: usize,
    },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ChannelArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
    #[arg(long)]
    pub p1: f64,
    #[arg(long)]
    pub p2: f64,
}

impl ChannelArgs {
    pub fn channel(&self) -> Result<Channel> {
        Channel::new(self.a, self.b, self.p1, self.p2)
    }
}

/// Round to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn num(x: f64) -> Value {
    json!(sig12(x))
}

/// Parse `args` and run; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(CliError::Domain(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
        Err(CliError::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Domain(#[from] Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(io::Error::other(e))
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> std::result::Result<i32, CliError> {
    match cmd {
        Command::Classify(args) => {
            let report = classify_report(&args.channel()?);
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        }
        Command::Bound { channel, mu } => {
            let report = bound_report(&channel.channel()?, mu)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        }
        Command::Region { channel, weights_min, weights_max, weights_count, out: path } => {
            if weights_count < 3 {
                return Err(Error::domain(format!("--weights-count must be >= 3, got {weights_count}")).into());
            }
            let ch = channel.channel()?;
            let weights = region::weight_grid(&ch, weights_min, weights_max, weights_count)?;
            let poly = region::outer_region(&ch, &weights)?;
            let doc = region_json(&poly);
            match path {
                Some(path) => {
                    let mut f = BufWriter::new(File::create(&path)?);
                    serde_json::to_writer_pretty(&mut f, &doc)?;
                    writeln!(f)?;
                    f.flush()?;
                    writeln!(out, "{}", poly.vertices.len())?;
                }
                None => {
                    writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
                    writeln!(err, "{}", poly.vertices.len())?;
                }
            }
        }
        Command::Sweep { p, a_min, a_max, steps, log_spaced, out: path } => {
            let grid = sweep_grid(a_min, a_max, steps, log_spaced)?;
            let point_a = symmetric_noisy_threshold(p)?;
            let rows = sweep(p, &grid)?;
            match path {
                Some(path) => {
                    write_sweep_csv(File::create(&path)?, &rows)?;
                    writeln!(out, "point_a={}", fmt_sig(point_a, 12))?;
                }
                None => {
                    write_sweep_csv(&mut *out, &rows)?;
                    writeln!(err, "point_a={}", fmt_sig(point_a, 12))?;
                }
            }
        }
        Command::PointA { p } => {
            let a = symmetric_noisy_threshold(p)?;
            writeln!(out, "{}", fmt_sig(a, 6))?;
        }
        Command::Selfcheck { seed, tol, draws } => {
            let outcomes = selfcheck(seed, tol, draws);
            let mut first_failure = None;
            for o in &outcomes {
                writeln!(out, "{}", serde_json::to_string(o)?)?;
                if !o.pass && first_failure.is_none() {
                    first_failure = Some(o.check.clone());
                }
            }
            if let Some(name) = first_failure {
                writeln!(err, "selfcheck failed: {name}")?;
                return Ok(EXIT_CHECK_FAILED);
            }
        }
    }
    Ok(EXIT_OK)
}

/// `x` printed with `digits` significant digits in plain notation.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn classify_report(ch: &Channel) -> Value {
    let regime = ch.classify();
    let cap = sumcap::table1_sum_capacity(ch);
    json!({
        "a": ch.a(),
        "b": ch.b(),
        "p1": ch.p1(),
        "p2": ch.p2(),
        "regime": regime.label.to_string(),
        "noisy": regime.noisy,
        "very_strong": regime.very_strong,
        "mixed": regime.mixed,
        "sum_capacity": {
            "value": num(cap.value),
            "status": cap.status,
            "mechanism": cap.mechanism,
        },
        "units": UNITS,
    })
}

pub fn bound_report(ch: &Channel, mu: f64) -> Result<Value> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::domain(format!("--mu must be > 0, got {mu}")));
    }
    let wb = outer::constraint1_bound(ch, mu)?;
    let witness = match wb.witness {
        Some(Witness::Genie(g)) => json!({
            "rho1": num(g.rho1),
            "rho2": num(g.rho2),
            "sigma1_sq": num(g.sigma1_sq),
            "sigma2_sq": num(g.sigma2_sq),
        }),
        Some(Witness::Scalar(s)) => num(s),
        None => Value::Null,
    };
    Ok(json!({
        "a": ch.a(),
        "b": ch.b(),
        "p1": ch.p1(),
        "p2": ch.p2(),
        "mu": mu,
        "value": num(wb.value),
        "source": wb.source,
        "witness": witness,
        "evaluations": wb.evaluations,
        "units": UNITS,
    }))
}

pub fn region_json(poly: &RegionPolygon) -> Value {
    let vertices: Vec<Value> = poly.vertices.iter().map(|v| json!([num(v.r1), num(v.r2)])).collect();
    let halfplanes: Vec<Value> = poly
        .halfplanes
        .iter()
        .map(|h| json!({ "w": h.w.map(sig12), "c": num(h.c), "source": h.source }))
        .collect();
    json!({ "vertices": vertices, "halfplanes": halfplanes, "units": UNITS })
}

/// Re-read a region document written by the `region` command.
pub fn read_region_json(text: &str) -> Result<RegionPolygon> {
    serde_json::from_str(text).map_err(|e| Error::domain(format!("bad region JSON: {e}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub a: f64,
    /// Best inner sum rate (TIN power backoff or TDM/FDM).
    pub lower: f64,
    /// Genie bound at weight 1.
    pub thm1: f64,
    pub etw: f64,
    /// Z-channel bound at weight 1 when weight 1 is admissible.
    #[serde(skip)]
    pub c2c3: Option<f64>,
    pub exact: bool,
}

pub fn sweep_grid(a_min: f64, a_max: f64, steps: usize, log_spaced: bool) -> Result<Vec<f64>> {
    if !(a_min > 0.0 && a_min < a_max && a_max < 1.0) {
        return Err(Error::domain(format!("need 0 < a-min < a-max < 1, got [{a_min}, {a_max}]")));
    }
    if steps < 2 {
        return Err(Error::domain(format!("--steps must be >= 2, got {steps}")));
    }
    let t = |k: usize| k as f64 / (steps - 1) as f64;
    Ok((0..steps)
        .map(|k| {
            if k + 1 == steps {
                a_max
            } else if log_spaced {
                (a_min.ln() + (a_max.ln() - a_min.ln()) * t(k)).exp()
            } else {
                a_min + (a_max - a_min) * t(k)
            }
        })
        .collect())
}

pub fn sweep_row(ch: &Channel) -> Result<SweepRow> {
    let lower = inner::best_inner_sum(ch);
    let thm1 = outer::constraint1_bound(ch, 1.0)?.value;
    let etw = outer::etw_sum_bound(ch)?.value;
    let unit_ok = |(lo, hi): (f64, f64)| lo <= 1.0 && 1.0 <= hi;
    let c2 = unit_ok(outer::eta1_range(ch)).then(|| outer::constraint2_bound(ch, 1.0).ok()).flatten();
    let c3 = unit_ok(outer::eta2_range(ch)).then(|| outer::constraint3_bound(ch, 1.0).ok()).flatten();
    let c2c3 = [c2, c3].into_iter().flatten().map(|w| w.value).reduce(f64::min);
    Ok(SweepRow { a: ch.a(), lower, thm1, etw, c2c3, exact: (thm1 - lower).abs() <= EXACT_TOL })
}

/// Rows for `IC(a, a, p, p)` at each gain in `grid`, in grid order.
pub fn sweep(p: f64, grid: &[f64]) -> Result<Vec<SweepRow>> {
    grid.par_iter().map(|&a| sweep_row(&Channel::symmetric(a, p)?)).collect()
}

pub fn write_sweep_csv<W: Write>(w: W, rows: &[SweepRow]) -> std::result::Result<(), csv::Error> {
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    wtr.write_record(["a", "lower", "thm1", "etw", "exact"])?;
    for r in rows {
        wtr.write_record([
            sig12(r.a).to_string(),
            sig12(r.lower).to_string(),
            sig12(r.thm1).to_string(),
            sig12(r.etw).to_string(),
            r.exact.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub check: String,
    pub pass: bool,
    /// Largest violation observed (signed so that <= tol passes).
    pub worst: f64,
    pub tol: f64,
    pub draws: usize,
}

fn outcome(check: &str, worst: f64, tol: f64, draws: usize) -> CheckOutcome {
    CheckOutcome { check: check.to_string(), pass: worst <= tol, worst, tol, draws }
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Channel with `0 < a, b < 1` and log-uniform powers.
pub fn random_weak_channel(rng: &mut impl Rng) -> Channel {
    let a = rng.gen_range(0.01..0.99);
    let b = rng.gen_range(0.01..0.99);
    Channel::new(a, b, log_uniform(rng, 0.1, 100.0), log_uniform(rng, 0.1, 100.0))
        .expect("sampled parameters are valid")
}

/// Channel drawn uniformly from the noisy-interference power triangle.
pub fn random_noisy_channel(rng: &mut impl Rng) -> Channel {
    loop {
        let a: f64 = rng.gen_range(0.001..0.25);
        let b: f64 = rng.gen_range(0.001..0.25);
        let room = 1.0 - a.sqrt() - b.sqrt();
        if room <= 1e-3 {
            continue;
        }
        let (u1, u2): (f64, f64) = (rng.gen(), rng.gen());
        let (u1, u2) = if u1 + u2 > 1.0 { (1.0 - u1, 1.0 - u2) } else { (u1, u2) };
        let p1 = (u1 * room / (b * a.sqrt())).max(1e-3);
        let p2 = (u2 * room / (a * b.sqrt())).max(1e-3);
        let ch = Channel::new(a, b, p1, p2).expect("sampled parameters are valid");
        if ch.is_noisy_interference() {
            return ch;
        }
    }
}

/// Cross-module identity checks on randomized channels.
pub fn selfcheck(seed: u64, tol: Option<f64>, draws: usize) -> Vec<CheckOutcome> {
    let draws = draws.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outcomes = Vec::new();

    // parametric and closed-form Z-channel bounds agree
    let mut worst = 0.0_f64;
    for _ in 0..draws * 10 {
        let a = rng.gen_range(0.01..0.99);
        let b = rng.gen_range(0.01..0.99);
        let ch = Channel::new(a, b, log_uniform(&mut rng, 0.1, 100.0), log_uniform(&mut rng, 0.1, 100.0))
            .expect("valid");
        let p2p = rng.gen_range(0.0..=ch.p2());
        let diff = outer::kramer_parametric(&ch, p2p)
            .and_then(|(alpha, v)| outer::constraint3_bound(&ch, alpha).map(|w| (w.value - v).abs()))
            .unwrap_or(f64::INFINITY);
        worst = worst.max(diff);
    }
    outcomes.push(outcome("parametric_z_bound_identity", worst, tol.unwrap_or(1e-10), draws * 10));

    // closed-form genie attains the TIN sum rate on noisy channels
    let mut worst = 0.0_f64;
    for _ in 0..draws {
        let ch = random_noisy_channel(&mut rng);
        let diff = sumcap::closed_form_genie(&ch)
            .and_then(|g| outer::constraint1_objective(&ch, 1.0, &g))
            .map(|v| (v - sumcap::noisy_sum_capacity(&ch).unwrap_or(f64::NAN)).abs())
            .unwrap_or(f64::INFINITY);
        worst = worst.max(if diff.is_nan() { f64::INFINITY } else { diff });
    }
    outcomes.push(outcome("noisy_closed_form_genie", worst, tol.unwrap_or(1e-9), draws));

    // optimized genie bound meets TIN on noisy channels
    let mut worst = 0.0_f64;
    for _ in 0..draws.min(10) {
        let ch = random_noisy_channel(&mut rng);
        let diff = outer::constraint1_bound(&ch, 1.0)
            .map(|w| (w.value - sumcap::tin_sum(&ch)).abs())
            .unwrap_or(f64::INFINITY);
        worst = worst.max(diff);
    }
    outcomes.push(outcome("noisy_optimized_bound", worst, tol.unwrap_or(1e-4), draws.min(10)));

    // optimized bound never exceeds the ETW point
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..draws {
        let ch = random_weak_channel(&mut rng);
        let gap = match (outer::constraint1_bound(&ch, 1.0), outer::etw_sum_bound(&ch)) {
            (Ok(c1), Ok(etw)) => c1.value - etw.value,
            _ => f64::INFINITY,
        };
        worst = worst.max(gap);
    }
    outcomes.push(outcome("etw_dominance", worst, tol.unwrap_or(1e-6), draws));

    // achievable points lie inside the outer region
    let mut worst = f64::NEG_INFINITY;
    let region_draws = (draws / 10).max(1);
    for _ in 0..region_draws {
        let ch = random_weak_channel(&mut rng);
        worst = worst.max(containment_violation(&ch));
    }
    outcomes.push(outcome("region_containment", worst, tol.unwrap_or(region::CONTAINMENT_SLACK), region_draws));

    outcomes
}

/// Largest amount by which a TIN or TDM point leaves the outer region
/// (`+inf` if the region is not convex or cannot be built).
pub fn containment_violation(ch: &Channel) -> f64 {
    let poly = match region::outer_region(ch, &region::default_weights(ch)) {
        Ok(p) if p.is_convex() => p,
        _ => return f64::INFINITY,
    };
    let tdm = match inner::tdm_frontier(ch, inner::DEFAULT_TDM_STEPS) {
        Ok(f) => f,
        Err(_) => return f64::INFINITY,
    };
    inner::tin_backoff_grid(ch, inner::DEFAULT_TIN_GRID)
        .iter()
        .chain(tdm.vertices())
        .map(|p| violation(&poly, p))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn violation(poly: &RegionPolygon, p: &RatePair) -> f64 {
    let worst_hp = poly.halfplanes.iter().map(|h| -h.slack(p)).fold(f64::NEG_INFINITY, f64::max);
    worst_hp.max(-p.r1).max(-p.r2)
}
