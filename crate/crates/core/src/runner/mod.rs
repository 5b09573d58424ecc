//! Experiment orchestration behind the `mfon` binary.
//!
//! Every artifact starts with `#` comment lines: tool version, the config as
//! JSON, the RNG construction, derived constants, per-chain seeds and, on its
//! own last line, the wall-clock timestamp. Everything except that line is a
//! pure function of the config.

mod config;

pub use config::{parse_usize_list, Command, ExperimentConfig, OutputFormat, OUTPUT_DIR_ENV};

use log::info;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};
use crate::gibbs::{run_chain, ChainRecord};
use crate::model::{DerivedConstants, ModelParams};
use crate::oracle::{gibbs_radial_law, kolmogorov_from_law, z_of_r, RadialGrid, RadialLaw};
use crate::rng::{seed_stream, RNG_ALGORITHM};
use crate::special::{log_grid, verify_lemma_bounds};
use crate::stats::{mean, variance};
use crate::stein::{
    binned_ratio_term, empirical_kolmogorov, empirical_wasserstein, normalized_w, rate_fit_table, stein_terms,
    RateFit, RateRow, RateTable, SteinTerms,
};

pub const VERSION: &str = concat!("mfon ", env!("CARGO_PKG_VERSION"));

/// Range of the lemma grid.
pub const LEMMA_GRID: (f64, f64) = (1.0e-6, 200.0);

/// Bins used by the W-conditioned ratio estimator.
pub const RATIO_BINS: usize = 100;

/// Files written by a run and a one-line human summary.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

#[derive(Debug, Clone, Serialize)]
struct SeedEntry {
    n: usize,
    master_seed: u64,
    first_stream: u64,
    streams: usize,
}

#[derive(Debug, Clone, Serialize)]
struct ConstantsEntry {
    n: usize,
    b: f64,
    #[serde(rename = "B2")]
    b2: f64,
    lambda: f64,
    delta_cap: f64,
}

impl From<&DerivedConstants> for ConstantsEntry {
    fn from(d: &DerivedConstants) -> Self {
        Self {
            n: d.params.n,
            b: d.b,
            b2: d.b2,
            lambda: d.lambda,
            delta_cap: d.delta_cap,
        }
    }
}

struct Header<'a> {
    config: &'a ExperimentConfig,
    constants: Vec<ConstantsEntry>,
    seeds: Vec<SeedEntry>,
}

impl Header<'_> {
    fn csv_lines(&self, timestamp: u64) -> String {
        let mut out = format!("# {VERSION} {}\n", self.config.command.name());
        out += &format!("# config {}\n", self.config.to_json());
        out += &format!("# rng {RNG_ALGORITHM}\n");
        for c in &self.constants {
            out += &format!(
                "# constants N={} beta={} n={} b={:e} B2={:e} lambda={:e} delta_cap={:e}\n",
                self.config.dims[0], self.config.beta, c.n, c.b, c.b2, c.lambda, c.delta_cap
            );
        }
        for s in &self.seeds {
            out += &format!(
                "# seeds n={} master_seed={} streams={}..{}\n",
                s.n,
                s.master_seed,
                s.first_stream,
                s.first_stream + s.streams as u64
            );
        }
        out += &format!("# timestamp {timestamp}\n");
        out
    }

    fn json_meta(&self, timestamp: u64) -> Value {
        json!({
            "version": VERSION,
            "command": self.config.command.name(),
            "config": serde_json::to_value(self.config).expect("config serializes"),
            "rng": RNG_ALGORITHM,
            "constants": self.constants,
            "seeds": self.seeds,
            "timestamp": timestamp,
        })
    }
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

struct Writer<'a> {
    dir: PathBuf,
    format: OutputFormat,
    header: Header<'a>,
    timestamp: u64,
    files: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(config: &'a ExperimentConfig) -> Result<Self> {
        let dir = config.resolved_output_dir();
        fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir,
            format: config.format,
            header: Header {
                config,
                constants: Vec::new(),
                seeds: Vec::new(),
            },
            timestamp: now(),
            files: Vec::new(),
        })
    }

    fn write_file(&mut self, name: String, body: String) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        info!("wrote {}", path.display());
        self.files.push(path);
        Ok(())
    }

    /// One table: CSV `columns` + `rows`, or JSON `{meta, rows}`.
    fn table<T: Serialize>(&mut self, stem: &str, columns: &str, rows: &[String], items: &[T]) -> Result<()> {
        match self.format {
            OutputFormat::Csv => {
                let mut body = self.header.csv_lines(self.timestamp);
                body += columns;
                body.push('\n');
                for r in rows {
                    body += r;
                    body.push('\n');
                }
                self.write_file(format!("{stem}.csv"), body)
            }
            OutputFormat::Json => {
                let doc = json!({
                    "meta": self.header.json_meta(self.timestamp),
                    "rows": serde_json::to_value(items).map_err(|e| Error::Io(e.to_string()))?,
                });
                let mut body = serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(e.to_string()))?;
                body.push('\n');
                self.write_file(format!("{stem}.json"), body)
            }
        }
    }
}

fn derived_for(config: &ExperimentConfig, n: usize) -> Result<DerivedConstants> {
    DerivedConstants::new(ModelParams::new(config.dims[0], config.beta, n)?)
}

/// Chains for size index `k` use streams `k·chains .. (k+1)·chains`.
fn simulate_n(config: &ExperimentConfig, derived: &DerivedConstants, k: usize) -> Result<(Vec<ChainRecord>, SeedEntry)> {
    let settings = config.chain_settings();
    let first = (k * config.chains) as u64;
    let per_chain: Vec<Result<Vec<ChainRecord>>> = (first..first + config.chains as u64)
        .into_par_iter()
        .map(|id| run_chain(derived, &settings, id, seed_stream(config.master_seed, id)))
        .collect();
    let mut all = Vec::new();
    for r in per_chain {
        all.extend(r?);
    }
    let seed = SeedEntry {
        n: derived.params.n,
        master_seed: config.master_seed,
        first_stream: first,
        streams: config.chains,
    };
    Ok((all, seed))
}

fn opt(v: f64) -> String {
    format!("{v:e}")
}

type Column = fn(&RateRow) -> Option<f64>;

/// Runs the configured command and writes its artifacts.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    match config.command {
        Command::VerifyLemmas => verify_lemmas(config),
        Command::Simulate => simulate(config),
        Command::SteinTerms => stein(config),
        Command::Oracle => oracle(config),
        Command::Rate => rate(config),
    }
}

#[derive(Serialize)]
struct LemmaRow {
    #[serde(rename = "N")]
    dim: usize,
    bound: &'static str,
    statement: &'static str,
    min_slack: f64,
    argmin: f64,
    pass: bool,
}

fn verify_lemmas(config: &ExperimentConfig) -> Result<RunReport> {
    let grid = log_grid(LEMMA_GRID.0, LEMMA_GRID.1, config.grid_points);
    let reports = config
        .dims
        .par_iter()
        .map(|&d| verify_lemma_bounds(d, &grid))
        .collect::<Result<Vec<_>>>()?;
    let items: Vec<LemmaRow> = reports
        .iter()
        .flat_map(|r| {
            r.checks.iter().map(move |c| LemmaRow {
                dim: r.dim,
                bound: c.name,
                statement: c.statement,
                min_slack: c.min_slack,
                argmin: c.argmin,
                pass: c.pass,
            })
        })
        .collect();
    let rows: Vec<String> = items
        .iter()
        .map(|r| format!("{},{},\"{}\",{:e},{:e},{}", r.dim, r.bound, r.statement, r.min_slack, r.argmin, r.pass))
        .collect();
    let mut w = Writer::new(config)?;
    w.table("lemmas", "N,bound,statement,min_slack,argmin,pass", &rows, &items)?;
    let failed: Vec<String> = items
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("N={} {}", r.dim, r.bound))
        .collect();
    if !failed.is_empty() {
        return Err(Error::consistency("special_functions", format!("bounds violated: {}", failed.join(", "))));
    }
    Ok(RunReport {
        files: w.files,
        summary: format!("all {} bounds hold on {} points", items.len(), config.grid_points),
    })
}

#[derive(Serialize)]
struct SimulateSummary {
    n: usize,
    records: usize,
    mean_w: f64,
    var_w: f64,
    d_k_empirical: f64,
    d_w_empirical: f64,
}

fn simulate(config: &ExperimentConfig) -> Result<RunReport> {
    let mut w = Writer::new(config)?;
    let mut summaries = Vec::new();
    let mut per_n = Vec::new();
    for (k, &n) in config.n_values.iter().enumerate() {
        let derived = derived_for(config, n)?;
        let (records, seed) = simulate_n(config, &derived, k)?;
        let ws: Vec<f64> = records.iter().map(|r| r.pair.w).collect();
        let z = normalized_w(&records, &derived);
        summaries.push(SimulateSummary {
            n,
            records: records.len(),
            mean_w: mean(&ws),
            var_w: variance(&ws),
            d_k_empirical: empirical_kolmogorov(&z),
            d_w_empirical: empirical_wasserstein(&z),
        });
        w.header.constants.push((&derived).into());
        w.header.seeds.push(seed);
        per_n.push((n, records));
    }
    for (n, records) in &per_n {
        let rows: Vec<String> = records.iter().map(ChainRecord::csv_row).collect();
        w.table(&format!("records_n{n}"), ChainRecord::CSV_HEADER, &rows, records)?;
    }
    let rows: Vec<String> = summaries
        .iter()
        .map(|s| {
            format!(
                "{},{},{},{},{},{}",
                s.n,
                s.records,
                opt(s.mean_w),
                opt(s.var_w),
                opt(s.d_k_empirical),
                opt(s.d_w_empirical)
            )
        })
        .collect();
    w.table("summary", "n,records,mean_W,var_W,d_k_empirical,d_w_empirical", &rows, &summaries)?;
    Ok(RunReport {
        files: w.files,
        summary: format!("simulated {} system sizes", summaries.len()),
    })
}

#[derive(Serialize)]
struct SteinRow {
    #[serde(flatten)]
    terms: SteinTerms,
    binned_ratio_term: f64,
}

fn stein(config: &ExperimentConfig) -> Result<RunReport> {
    let mut w = Writer::new(config)?;
    let mut items = Vec::new();
    for (k, &n) in config.n_values.iter().enumerate() {
        let derived = derived_for(config, n)?;
        let (records, seed) = simulate_n(config, &derived, k)?;
        items.push(SteinRow {
            terms: stein_terms(&records, &derived)?,
            binned_ratio_term: binned_ratio_term(&records, &derived, RATIO_BINS)?,
        });
        w.header.constants.push((&derived).into());
        w.header.seeds.push(seed);
    }
    let rows: Vec<String> = items
        .iter()
        .map(|r| format!("{},{}", r.terms.csv_row(), opt(r.binned_ratio_term)))
        .collect();
    let columns = format!("{},binned_ratio_term", SteinTerms::CSV_HEADER);
    w.table("stein_terms", &columns, &rows, &items)?;
    Ok(RunReport {
        files: w.files,
        summary: format!("Stein terms for {} system sizes", items.len()),
    })
}

fn oracle_n(config: &ExperimentConfig, derived: &DerivedConstants) -> Result<(RadialLaw, f64)> {
    let law = gibbs_radial_law(derived, RadialGrid::new(derived.params.n, config.cells_per_unit)?)?;
    let d_k = kolmogorov_from_law(&law, derived)?;
    Ok((law, d_k))
}

#[derive(Serialize)]
struct OracleRow {
    n: usize,
    d_k_oracle: f64,
    mean_z: f64,
}

#[derive(Serialize)]
struct LawPoint {
    r: f64,
    density: f64,
    cdf: f64,
}

fn oracle(config: &ExperimentConfig) -> Result<RunReport> {
    let mut w = Writer::new(config)?;
    let derived: Vec<DerivedConstants> = config
        .n_values
        .iter()
        .map(|&n| derived_for(config, n))
        .collect::<Result<_>>()?;
    let laws: Vec<(RadialLaw, f64)> = derived.par_iter().map(|d| oracle_n(config, d)).collect::<Result<_>>()?;
    w.header.constants = derived.iter().map(Into::into).collect();
    let mut items = Vec::new();
    for (d, (law, d_k)) in derived.iter().zip(&laws) {
        items.push(OracleRow {
            n: law.n,
            d_k_oracle: *d_k,
            mean_z: law.expect(|r| z_of_r(r, d)),
        });
        let points: Vec<LawPoint> = law
            .r
            .iter()
            .enumerate()
            .map(|(i, &r)| LawPoint {
                r,
                density: law.density[i],
                cdf: law.cdf[i + 1],
            })
            .collect();
        let rows: Vec<String> = points
            .iter()
            .map(|p| format!("{:e},{:e},{:e}", p.r, p.density, p.cdf))
            .collect();
        w.table(&format!("radial_law_n{}", law.n), "r,density,cdf", &rows, &points)?;
    }
    let rows: Vec<String> = items
        .iter()
        .map(|r| format!("{},{},{}", r.n, opt(r.d_k_oracle), opt(r.mean_z)))
        .collect();
    w.table("oracle", "n,d_k_oracle,mean_z", &rows, &items)?;
    Ok(RunReport {
        files: w.files,
        summary: format!("exact laws for {} system sizes", items.len()),
    })
}

#[derive(Serialize)]
struct FitRow {
    column: &'static str,
    #[serde(flatten)]
    fit: RateFit,
}

fn rate(config: &ExperimentConfig) -> Result<RunReport> {
    let mut w = Writer::new(config)?;
    let derived: Vec<DerivedConstants> = config
        .n_values
        .iter()
        .map(|&n| derived_for(config, n))
        .collect::<Result<_>>()?;
    let oracle_dk: Vec<Option<f64>> = if config.oracle {
        derived
            .par_iter()
            .map(|d| oracle_n(config, d).map(|(_, dk)| Some(dk)))
            .collect::<Result<_>>()?
    } else {
        vec![None; derived.len()]
    };
    let mut table = RateTable::default();
    for (k, d) in derived.iter().enumerate() {
        let mut row = RateRow {
            n: d.params.n,
            d_k_oracle: oracle_dk[k],
            b: d.b,
            b2: d.b2,
            lambda: d.lambda,
            ..RateRow::default()
        };
        if config.rate_simulates() {
            let (records, seed) = simulate_n(config, d, k)?;
            let z = normalized_w(&records, d);
            row.d_k_empirical = Some(empirical_kolmogorov(&z));
            row.d_w_empirical = Some(empirical_wasserstein(&z));
            row.stein = Some(stein_terms(&records, d)?);
            row.seed = Some(config.master_seed);
            w.header.seeds.push(seed);
        }
        w.header.constants.push(d.into());
        table.rows.push(row);
    }
    let columns: [(&'static str, Column); 3] = [
        ("d_k_oracle", |r| r.d_k_oracle),
        ("d_k_empirical", |r| r.d_k_empirical),
        ("d_w_empirical", |r| r.d_w_empirical),
    ];
    let mut fits = Vec::new();
    for (name, col) in columns {
        if table.rows.iter().any(|r| col(r).is_some()) {
            fits.push(FitRow {
                column: name,
                fit: rate_fit_table(&table, col)?,
            });
        }
    }
    table.fit = fits.first().map(|f| f.fit);
    let rows: Vec<String> = table.rows.iter().map(RateRow::csv_row).collect();
    w.table("rate", RateRow::CSV_HEADER, &rows, &table.rows)?;
    let fit_rows: Vec<String> = fits
        .iter()
        .map(|f| {
            format!(
                "{},{},{},{},{}",
                f.column,
                opt(f.fit.slope),
                opt(f.fit.intercept),
                opt(f.fit.residual),
                f.fit.points_used
            )
        })
        .collect();
    w.table("rate_fit", "column,slope,intercept,residual,points_used", &fit_rows, &fits)?;
    let summary = fits
        .iter()
        .map(|f| format!("{} slope {:.4}", f.column, f.fit.slope))
        .collect::<Vec<_>>()
        .join("; ");
    Ok(RunReport { files: w.files, summary })
}

/// Data lines of an artifact: everything except `#` comment lines.
pub fn data_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(text.lines().filter(|l| !l.starts_with('#')).map(str::to_owned).collect())
}
