//! Report rows and their CSV/JSON/table renderings.

use std::fmt::Write as _;

use serde::Serialize;

use crate::config::{ExperimentConfig, Format};

pub const TOOL: &str = "qmc-basket";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceRow {
    pub sampler: String,
    pub construction: String,
    pub rho: Option<f64>,
    pub strike: f64,
    pub price: Option<f64>,
    pub rmse: Option<f64>,
    pub reps: usize,
    pub n: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaRow {
    /// 1-based asset index.
    pub k: usize,
    pub construction: String,
    pub sampler: String,
    pub rho: Option<f64>,
    pub strike: f64,
    pub delta: Option<f64>,
    pub rmse: Option<f64>,
    pub reps: usize,
    pub n: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffdimRow {
    pub construction: String,
    pub rho: Option<f64>,
    pub threshold: f64,
    pub effective_dimension: Option<usize>,
    pub dimension: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DumpRow {
    pub rho: Option<f64>,
    pub matrix: String,
    pub file: String,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rows {
    Price(Vec<PriceRow>),
    Delta(Vec<DeltaRow>),
    Effdim(Vec<EffdimRow>),
    Dump(Vec<DumpRow>),
}

trait CsvRow {
    const HEADER: &'static str;
    fn cells(&self) -> Vec<String>;
}

fn num<T: std::fmt::Display>(x: &Option<T>) -> String {
    x.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn text(s: &Option<String>) -> String {
    match s {
        None => String::new(),
        Some(s) => format!("\"{}\"", s.replace('"', "'")),
    }
}

impl CsvRow for PriceRow {
    const HEADER: &'static str = "sampler,construction,rho,strike,price,rmse,reps,n,seed,error";
    fn cells(&self) -> Vec<String> {
        vec![
            self.sampler.clone(),
            self.construction.clone(),
            num(&self.rho),
            self.strike.to_string(),
            num(&self.price),
            num(&self.rmse),
            self.reps.to_string(),
            self.n.to_string(),
            self.seed.to_string(),
            text(&self.error),
        ]
    }
}

impl CsvRow for DeltaRow {
    const HEADER: &'static str = "k,construction,sampler,rho,strike,delta,rmse,reps,n,seed,error";
    fn cells(&self) -> Vec<String> {
        vec![
            self.k.to_string(),
            self.construction.clone(),
            self.sampler.clone(),
            num(&self.rho),
            self.strike.to_string(),
            num(&self.delta),
            num(&self.rmse),
            self.reps.to_string(),
            self.n.to_string(),
            self.seed.to_string(),
            text(&self.error),
        ]
    }
}

impl CsvRow for EffdimRow {
    const HEADER: &'static str = "construction,rho,threshold,effective_dimension,dimension,error";
    fn cells(&self) -> Vec<String> {
        vec![
            self.construction.clone(),
            num(&self.rho),
            self.threshold.to_string(),
            num(&self.effective_dimension),
            self.dimension.to_string(),
            text(&self.error),
        ]
    }
}

impl CsvRow for DumpRow {
    const HEADER: &'static str = "rho,matrix,file,rows,cols";
    fn cells(&self) -> Vec<String> {
        vec![
            num(&self.rho),
            self.matrix.clone(),
            self.file.clone(),
            self.rows.to_string(),
            self.cols.to_string(),
        ]
    }
}

fn csv<R: CsvRow>(config: &ExperimentConfig, rows: &[R]) -> String {
    let mut out = String::new();
    writeln!(out, "# {TOOL} {VERSION}").unwrap();
    writeln!(out, "# config: {}", config.to_json()).unwrap();
    writeln!(out, "{}", R::HEADER).unwrap();
    for r in rows {
        writeln!(out, "{}", r.cells().join(",")).unwrap();
    }
    out
}

#[derive(Serialize)]
struct JsonReport<'a, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    config: &'a ExperimentConfig,
    rows: &'a [R],
}

fn json<R: Serialize>(config: &ExperimentConfig, rows: &[R]) -> String {
    let report = JsonReport {
        tool: TOOL,
        version: VERSION,
        config,
        rows,
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
    s.push('\n');
    s
}

/// The machine-readable report. Contains no timestamps, so identical runs
/// produce identical bytes. The embedded configuration omits the output path,
/// which does not affect results.
pub fn render(config: &ExperimentConfig, rows: &Rows) -> String {
    let mut embedded = config.clone();
    embedded.output.path = None;
    let config = &embedded;
    match (config.output.format, rows) {
        (Format::Csv, Rows::Price(r)) => csv(config, r),
        (Format::Csv, Rows::Delta(r)) => csv(config, r),
        (Format::Csv, Rows::Effdim(r)) => csv(config, r),
        (Format::Csv, Rows::Dump(r)) => csv(config, r),
        (Format::Json, Rows::Price(r)) => json(config, r),
        (Format::Json, Rows::Delta(r)) => json(config, r),
        (Format::Json, Rows::Effdim(r)) => json(config, r),
        (Format::Json, Rows::Dump(r)) => json(config, r),
    }
}

fn rho_label(rho: Option<f64>) -> String {
    match rho {
        Some(r) => format!("rho={:.0}%", r * 100.0),
        None => "rho=market".into(),
    }
}

fn cell(value: Option<f64>, rmse: Option<f64>, error: &Option<String>, digits: usize) -> String {
    match (value, rmse, error) {
        (Some(v), Some(e), _) => format!("{v:.digits$} ({e:.digits$})"),
        (_, _, Some(_)) => "error".into(),
        _ => "-".into(),
    }
}

fn distinct<T: PartialEq + Clone>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for x in items {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// Human-readable summary, rounded for display.
pub fn summary(rows: &Rows) -> String {
    let mut out = String::new();
    match rows {
        Rows::Price(rows) => {
            let rhos = distinct(rows.iter().map(|r| r.rho.map(f64::to_bits)));
            for strike in distinct(rows.iter().map(|r| r.strike.to_bits())) {
                writeln!(out, "Price (rmse), K = {}", f64::from_bits(strike)).unwrap();
                let mut header = format!("{:<12} {:<5}", "sampler", "C");
                for r in &rhos {
                    write!(header, " {:>22}", rho_label(r.map(f64::from_bits))).unwrap();
                }
                writeln!(out, "{header}").unwrap();
                for (sampler, construction) in
                    distinct(rows.iter().map(|r| (r.sampler.clone(), r.construction.clone())))
                {
                    let mut line = format!("{sampler:<12} {construction:<5}");
                    for rho in &rhos {
                        let found = rows.iter().find(|r| {
                            r.strike.to_bits() == strike
                                && r.rho.map(f64::to_bits) == *rho
                                && r.sampler == sampler
                                && r.construction == construction
                        });
                        let text = found.map_or("-".into(), |r| cell(r.price, r.rmse, &r.error, 5));
                        write!(line, " {text:>22}").unwrap();
                    }
                    writeln!(out, "{line}").unwrap();
                }
                writeln!(out).unwrap();
            }
        }
        Rows::Delta(rows) => {
            for (sampler, rho, strike) in distinct(
                rows.iter()
                    .map(|r| (r.sampler.clone(), r.rho.map(f64::to_bits), r.strike.to_bits())),
            ) {
                writeln!(
                    out,
                    "Deltas x 1e-2 (rmse x 1e-4), {sampler}, {}, K = {}",
                    rho_label(rho.map(f64::from_bits)),
                    f64::from_bits(strike)
                )
                .unwrap();
                let subset: Vec<&DeltaRow> = rows
                    .iter()
                    .filter(|r| {
                        r.sampler == sampler
                            && r.rho.map(f64::to_bits) == rho
                            && r.strike.to_bits() == strike
                    })
                    .collect();
                let constructions = distinct(subset.iter().map(|r| r.construction.clone()));
                let mut header = format!("{:>3}", "k");
                for c in &constructions {
                    write!(header, " {c:>18}").unwrap();
                }
                writeln!(out, "{header}").unwrap();
                for k in distinct(subset.iter().map(|r| r.k)) {
                    let mut line = format!("{k:>3}");
                    for c in &constructions {
                        let text = subset
                            .iter()
                            .find(|r| r.k == k && &r.construction == c)
                            .map_or("-".into(), |r| match (r.delta, r.rmse) {
                                (Some(d), Some(e)) => format!("{:.4} ({:.2})", d * 1e2, e * 1e4),
                                _ => "error".into(),
                            });
                        write!(line, " {text:>18}").unwrap();
                    }
                    writeln!(out, "{line}").unwrap();
                }
                writeln!(out).unwrap();
            }
        }
        Rows::Effdim(rows) => {
            let rhos = distinct(rows.iter().map(|r| r.rho.map(f64::to_bits)));
            let threshold = rows.first().map_or(0.0, |r| r.threshold);
            writeln!(out, "Effective truncation dimension, p = {threshold}").unwrap();
            let mut header = format!("{:<5}", "C");
            for r in &rhos {
                write!(header, " {:>12}", rho_label(r.map(f64::from_bits))).unwrap();
            }
            writeln!(out, "{header}").unwrap();
            for c in distinct(rows.iter().map(|r| r.construction.clone())) {
                let mut line = format!("{c:<5}");
                for rho in &rhos {
                    let text = rows
                        .iter()
                        .find(|r| r.construction == c && r.rho.map(f64::to_bits) == *rho)
                        .map_or("-".into(), |r| num(&r.effective_dimension));
                    write!(line, " {:>12}", if text.is_empty() { "error".into() } else { text }).unwrap();
                }
                writeln!(out, "{line}").unwrap();
            }
        }
        Rows::Dump(rows) => {
            for r in rows {
                writeln!(out, "{} {} ({}x{}) -> {}", rho_label(r.rho), r.matrix, r.rows, r.cols, r.file)
                    .unwrap();
            }
        }
    }
    out
}
