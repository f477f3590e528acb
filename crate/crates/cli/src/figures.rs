//! Datasets behind the MSE-versus-energy scatter plots and the bound comparisons.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use personick_core::output::fmt_sig;
use personick_core::search::{CsvRow, SweepConfig};
use personick_core::{
    bounds, conjecture_check, fock_mmse_beta, fock_mmse_twopoint, nbar_grid, sweep, ConjectureReport,
    FisherValue, PriorPdf, SweepResult,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Sweep datasets: file stem and prior.
pub fn sweep_figures() -> Vec<(&'static str, PriorPdf)> {
    vec![
        ("fig1a", PriorPdf::two_point(0.541, 0.706, 0.279).unwrap()),
        ("fig1b", PriorPdf::two_point(0.377, 0.416, 0.139).unwrap()),
        ("fig2a", PriorPdf::beta(1.0, 1.0).unwrap()),
        ("fig2b", PriorPdf::beta(2.0, 4.0).unwrap()),
    ]
}

pub const FIG3_PRIOR: (f64, f64, f64) = (0.79, 0.127, 0.641);
pub const FIG4_PRIOR: (f64, f64) = (2.33, 3.84);
pub const MAX_PHOTONS_BOUNDS: usize = 10;

/// One row of the Fock-state bound tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub n: usize,
    pub mmse: String,
    pub jd_inv: String,
    pub je_inv: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub jb_inv: Option<String>,
}

/// Rows for Fock states `n = 1..=10` under the two-point or beta prior.
pub fn bound_rows(prior: &PriorPdf) -> Result<Vec<BoundRow>, CliError> {
    (1..=MAX_PHOTONS_BOUNDS)
        .map(|n| {
            let (mmse, with_jb) = match *prior {
                PriorPdf::TwoPoint { q, tau0, tau1 } => (fock_mmse_twopoint(n, q, tau0, tau1)?, false),
                PriorPdf::Beta { alpha, beta } => (fock_mmse_beta(n as f64, alpha, beta)?, true),
                _ => return Err(CliError::Config("bound tables need a two-point or beta prior".into())),
            };
            let b = bounds(n, prior);
            Ok(BoundRow {
                n,
                mmse: fmt_sig(mmse),
                jd_inv: b.jd_inv.to_string(),
                je_inv: b.je_inv.to_string(),
                jb_inv: with_jb.then(|| b.jb_inv.to_string()),
            })
        })
        .collect()
}

/// Whether `MMSE < J_B^{-1}` at every `n`, reported rather than enforced.
pub fn jb_inverse_attainability(rows: &[BoundRow]) -> Vec<(usize, bool)> {
    rows.iter()
        .filter_map(|r| {
            let jb: f64 = r.jb_inv.as_ref()?.parse().ok()?;
            let mmse: f64 = r.mmse.parse().ok()?;
            Some((r.n, mmse < jb))
        })
        .collect()
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

pub fn write_sweep_csv(path: &Path, result: &SweepResult) -> Result<(), CliError> {
    write_rows(path, result.csv_rows())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiguresConfig {
    pub sweep: SweepConfig,
    pub steps_per_unit: usize,
}

impl Default for FiguresConfig {
    fn default() -> Self {
        Self {
            sweep: SweepConfig::default(),
            steps_per_unit: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiguresOutput {
    pub files: Vec<PathBuf>,
    pub conjecture: Vec<(&'static str, ConjectureReport)>,
    /// `(n, mmse < J_B^{-1})` for the beta bound table.
    pub jb_ordering: Vec<(usize, bool)>,
}

/// Writes the six figure datasets into `dir`.
pub fn write_figures(dir: &Path, config: &FiguresConfig) -> Result<FiguresOutput, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let grid = nbar_grid(config.sweep.cutoff, config.steps_per_unit);
    let mut files = Vec::new();
    let mut conjecture = Vec::new();
    for (stem, prior) in sweep_figures() {
        let result = sweep(&prior, &grid, &config.sweep)?;
        let path = dir.join(format!("{stem}.csv"));
        write_sweep_csv(&path, &result)?;
        conjecture.push((stem, conjecture_check(&result, personick_core::search::CONJECTURE_TOLERANCE)));
        files.push(path);
    }

    let (q, t0, t1) = FIG3_PRIOR;
    let fig3: Vec<BoundRow> = bound_rows(&PriorPdf::two_point(q, t0, t1)?)?;
    let path = dir.join("fig3.csv");
    write_rows(&path, &fig3)?;
    files.push(path);

    let (a, b) = FIG4_PRIOR;
    let fig4 = bound_rows(&PriorPdf::beta(a, b)?)?;
    let path = dir.join("fig4.csv");
    write_rows(&path, &fig4)?;
    files.push(path);

    Ok(FiguresOutput {
        files,
        conjecture,
        jb_ordering: jb_inverse_attainability(&fig4),
    })
}

/// Count, minimum, maximum and sum of one column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnStats {
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub sum: f64,
}

impl ColumnStats {
    fn push(&mut self, x: f64) {
        self.count += 1;
        self.min = self.min.min(x);
        self.max = self.max.max(x);
        self.sum += x;
    }
}

impl Default for ColumnStats {
    fn default() -> Self {
        Self {
            count: 0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }
}

/// Per-kind statistics of the `mse` column of a sweep.
pub type SweepSummary = BTreeMap<String, ColumnStats>;

pub fn summarize_rows<'a>(rows: impl IntoIterator<Item = &'a CsvRow>) -> Result<SweepSummary, CliError> {
    let mut out = SweepSummary::new();
    for r in rows {
        let mse: f64 = r
            .mse
            .parse()
            .map_err(|_| CliError::Config(format!("bad mse value '{}'", r.mse)))?;
        out.entry(r.kind.clone()).or_default().push(mse);
    }
    Ok(out)
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<CsvRow>, CliError> {
    let mut reader =
        csv::Reader::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    reader
        .deserialize()
        .map(|r| r.map_err(|e| CliError::Io(format!("{}: {e}", path.display()))))
        .collect()
}

pub fn read_bound_csv(path: &Path) -> Result<Vec<BoundRow>, CliError> {
    let mut reader =
        csv::Reader::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    reader
        .deserialize()
        .map(|r| r.map_err(|e| CliError::Io(format!("{}: {e}", path.display()))))
        .collect()
}

/// Parses a bound-table cell, keeping divergence distinct from numbers.
pub fn parse_fisher_cell(cell: &str) -> Option<FisherValue> {
    match cell {
        "divergent" => Some(FisherValue::Divergent),
        s => s.parse().ok().map(FisherValue::Finite),
    }
}
