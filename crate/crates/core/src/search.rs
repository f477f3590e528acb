//! Random states at fixed mean photon number and MSE sweeps over `nbar`.
//!
//! Photon-number weights `p_n = |d_n|^2` are drawn uniformly from the polytope
//! `{p >= 0, sum p = 1, sum n p = nbar}` by a hit-and-run chain; phases are
//! independent and uniform. Each grid point runs its own chain seeded with
//! `seed + grid index`, so results do not depend on thread scheduling.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{InBetweenState, PureState};
use crate::output::fmt_sig;
use crate::personick::{MmseOptions, PersonickSolver};
use crate::pnr::pnr_mse;
use crate::prior::PriorPdf;

pub const DEFAULT_CUTOFF: usize = 4;
pub const DEFAULT_COUNT: usize = 200;
pub const BURN_IN: usize = 100;
pub const THINNING: usize = 10;
pub const CONJECTURE_TOLERANCE: f64 = 1e-9;
pub const SCHEMA_VERSION: &str = "v1";

/// Number of phase redraws used to measure how much phases move the MMSE.
const PHASE_DRAWS: usize = 8;
const ZERO_DIRECTION: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct StateSample {
    pub state: PureState,
    pub nbar: f64,
    /// Seed of the chain that produced the sample.
    pub seed: u64,
    /// Position of the sample within its chain.
    pub index: usize,
    pub mse: Option<f64>,
}

/// `0, 1/steps, 2/steps, ..., upper`.
pub fn nbar_grid(upper: usize, steps_per_unit: usize) -> Vec<f64> {
    let steps = steps_per_unit.max(1);
    (0..=upper * steps).map(|i| i as f64 / steps as f64).collect()
}

fn check_feasible(nbar: f64, cutoff: usize) -> Result<()> {
    if !(nbar >= 0.0 && nbar <= cutoff as f64) {
        return Err(Error::Infeasible { nbar, cutoff });
    }
    Ok(())
}

/// Mean of the polytope's vertices, each supported on at most two photon numbers.
fn polytope_center(nbar: f64, cutoff: usize) -> Vec<f64> {
    let dim = cutoff + 1;
    let mut center = vec![0.0; dim];
    let mut count = 0usize;
    for lo in 0..dim {
        for hi in lo..dim {
            let (l, h) = (lo as f64, hi as f64);
            if lo == hi {
                if l == nbar {
                    center[lo] += 1.0;
                    count += 1;
                }
            } else if l <= nbar && nbar <= h {
                let upper = (nbar - l) / (h - l);
                center[hi] += upper;
                center[lo] += 1.0 - upper;
                count += 1;
            }
        }
    }
    center.iter_mut().for_each(|p| *p /= count as f64);
    center
}

/// Gaussian direction projected onto `{d : sum d = 0, sum n d = 0}`.
fn null_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let mut d: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    // Orthonormal basis of the constraint rows: ones and centered n.
    let len = dim as f64;
    let mid = (len - 1.0) / 2.0;
    let spread: f64 = (0..dim).map(|n| (n as f64 - mid).powi(2)).sum();
    let ones: f64 = d.iter().sum::<f64>() / len;
    let slope: f64 = if spread > 0.0 {
        d.iter().enumerate().map(|(n, x)| (n as f64 - mid) * x).sum::<f64>() / spread
    } else {
        0.0
    };
    for (n, x) in d.iter_mut().enumerate() {
        *x -= ones + slope * (n as f64 - mid);
    }
    d
}

fn hit_and_run_step(rng: &mut ChaCha8Rng, p: &mut [f64]) {
    let d = null_direction(rng, p.len());
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (&pi, &di) in p.iter().zip(&d) {
        if di.abs() < ZERO_DIRECTION {
            continue;
        }
        let bound = -pi / di;
        if di > 0.0 {
            lo = lo.max(bound);
        } else {
            hi = hi.min(bound);
        }
    }
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return;
    }
    let u: f64 = rng.random();
    let t = lo + u * (hi - lo);
    for (pi, di) in p.iter_mut().zip(&d) {
        *pi = (*pi + t * di).max(0.0);
    }
}

fn with_phases(rng: &mut ChaCha8Rng, weights: &[f64]) -> Result<PureState> {
    let amps = weights
        .iter()
        .map(|&p| Complex64::from_polar(p.max(0.0).sqrt(), rng.random_range(0.0..TAU)))
        .collect();
    PureState::normalized(amps)
}

/// Draws `count` states with mean photon number `nbar` on cutoff `cutoff`.
pub fn sample_states(nbar: f64, cutoff: usize, count: usize, seed: u64) -> Result<Vec<StateSample>> {
    check_feasible(nbar, cutoff)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = polytope_center(nbar, cutoff);
    for _ in 0..BURN_IN {
        hit_and_run_step(&mut rng, &mut p);
    }
    let mut out = Vec::with_capacity(count);
    for index in 0..count {
        for _ in 0..THINNING {
            hit_and_run_step(&mut rng, &mut p);
        }
        out.push(StateSample {
            state: with_phases(&mut rng, &p)?,
            nbar,
            seed,
            index,
            mse: None,
        });
    }
    Ok(out)
}

/// Largest minus smallest MMSE of `state` over `phases` applied as `exp(i phi_n)`
/// to each Fock amplitude.
pub fn phase_spread(solver: &PersonickSolver, state: &PureState, phases: &[Vec<f64>]) -> Result<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for draw in phases {
        let amps = state
            .amps()
            .iter()
            .zip(draw)
            .map(|(a, &phi)| Complex64::from_polar(a.norm(), phi))
            .collect();
        let v = solver.mmse_value(&PureState::normalized(amps)?)?;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok(if phases.is_empty() { 0.0 } else { hi - lo })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub cutoff: usize,
    pub count: usize,
    pub seed: u64,
    pub options: MmseOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            cutoff: DEFAULT_CUTOFF,
            count: DEFAULT_COUNT,
            seed: 0,
            options: MmseOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub index: usize,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub nbar: f64,
    /// Seed of this grid point's sampling chain.
    pub seed: u64,
    pub in_between: f64,
    pub pnr: f64,
    /// MMSE of `|nbar>` when `nbar` is an integer.
    pub fock: Option<f64>,
    pub samples: Vec<SampleRecord>,
    /// MMSE range of the first sample under random phase redraws.
    pub phase_spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub schema: &'static str,
    pub prior: PriorPdf,
    pub cutoff: usize,
    pub count: usize,
    pub seed: u64,
    pub points: Vec<SweepPoint>,
}

fn sweep_point(
    solver: &PersonickSolver,
    prior: &PriorPdf,
    nbar: f64,
    config: &SweepConfig,
    seed: u64,
) -> Result<SweepPoint> {
    let in_between_state = InBetweenState::new(nbar)?.pure(config.cutoff)?;
    let in_between = solver.mmse_value(&in_between_state)?;
    let pnr = pnr_mse(&in_between_state, prior)?;
    let fock = if nbar.fract() == 0.0 {
        Some(solver.mmse_value(&PureState::fock(nbar as usize, config.cutoff)?)?)
    } else {
        None
    };
    let draws = sample_states(nbar, config.cutoff, config.count, seed)?;
    let samples = draws
        .iter()
        .map(|s| {
            Ok(SampleRecord {
                index: s.index,
                mse: solver.mmse_value(&s.state)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let phase_spread = match draws.first() {
        Some(first) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let phases: Vec<Vec<f64>> = (0..PHASE_DRAWS)
                .map(|_| (0..=config.cutoff).map(|_| rng.random_range(0.0..TAU)).collect())
                .collect();
            phase_spread(solver, &first.state, &phases)?
        }
        None => 0.0,
    };
    Ok(SweepPoint {
        nbar,
        seed,
        in_between,
        pnr,
        fock,
        samples,
        phase_spread,
    })
}

/// Evaluates in-between, PNR, Fock, and random-state MSEs over `grid`.
pub fn sweep(prior: &PriorPdf, grid: &[f64], config: &SweepConfig) -> Result<SweepResult> {
    for &nbar in grid {
        check_feasible(nbar, config.cutoff)?;
    }
    let solver = PersonickSolver::new(prior, config.options)?;
    let points = grid
        .par_iter()
        .enumerate()
        .map(|(i, &nbar)| sweep_point(&solver, prior, nbar, config, config.seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        schema: SCHEMA_VERSION,
        prior: prior.clone(),
        cutoff: config.cutoff,
        count: config.count,
        seed: config.seed,
        points,
    })
}

/// One CSV row: `nbar,kind,mse,seed`.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct CsvRow {
    pub nbar: String,
    pub kind: String,
    pub mse: String,
    pub seed: String,
}

impl SweepResult {
    /// Rows in file order. Only sample rows carry a seed.
    pub fn csv_rows(&self) -> Vec<CsvRow> {
        let row = |nbar: f64, kind: &str, mse: f64, seed: Option<u64>| CsvRow {
            nbar: fmt_sig(nbar),
            kind: kind.to_string(),
            mse: fmt_sig(mse),
            seed: seed.map(|s| s.to_string()).unwrap_or_default(),
        };
        let mut rows = Vec::new();
        for p in &self.points {
            rows.push(row(p.nbar, "inbetween", p.in_between, None));
            rows.push(row(p.nbar, "pnr", p.pnr, None));
            if let Some(f) = p.fock {
                rows.push(row(p.nbar, "fock", f, None));
            }
            for s in &p.samples {
                rows.push(row(p.nbar, "sample", s.mse, Some(p.seed)));
            }
        }
        rows
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for r in self.csv_rows() {
            w.serialize(r).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep result serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub nbar: f64,
    pub seed: u64,
    pub index: usize,
    pub mse: f64,
    pub in_between: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureReport {
    pub tolerance: f64,
    pub samples_checked: usize,
    pub violators: Vec<Violation>,
    /// Largest `|fock - in_between|` over integer grid points.
    pub fock_deviation: f64,
    /// Largest `in_between - min(sample)` over grid points, positive if a sample wins.
    pub worst_margin: f64,
    pub warning: Option<String>,
}

impl ConjectureReport {
    pub fn passed(&self) -> bool {
        self.violators.is_empty()
    }
}

/// Lists samples whose MMSE falls below the in-between curve by more than `tolerance`.
pub fn conjecture_check(result: &SweepResult, tolerance: f64) -> ConjectureReport {
    let mut violators = Vec::new();
    let mut checked = 0;
    let mut fock_deviation: f64 = 0.0;
    let mut worst_margin = f64::NEG_INFINITY;
    for p in &result.points {
        if let Some(f) = p.fock {
            fock_deviation = fock_deviation.max((f - p.in_between).abs());
        }
        for s in &p.samples {
            checked += 1;
            worst_margin = worst_margin.max(p.in_between - s.mse);
            if s.mse < p.in_between - tolerance {
                violators.push(Violation {
                    nbar: p.nbar,
                    seed: p.seed,
                    index: s.index,
                    mse: s.mse,
                    in_between: p.in_between,
                });
            }
        }
    }
    ConjectureReport {
        tolerance,
        samples_checked: checked,
        violators,
        fock_deviation,
        worst_margin: if checked == 0 { 0.0 } else { worst_margin },
        warning: (checked == 0).then(|| "no samples to check; conjecture passes vacuously".to_string()),
    }
}
