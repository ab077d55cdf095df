//! Row-by-row evaluation of configuration files.
//!
//! Input rows carry `a1,b1,a2,b2,theta1,theta2,theta_d` (degrees) and an
//! optional `id`; output rows repeat them, so an output file is itself a
//! valid input file.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use ellipse_contact::{closest_approach, PairConfiguration};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{open_output, CliError};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Args)]
pub struct BatchArgs {
    /// Input file
    input: PathBuf,
    /// Output file; stdout when omitted
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Defaults to the input extension, csv otherwise
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Where rejected rows are reported; stderr when omitted
    #[arg(long)]
    rejects: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct BatchRecord {
    #[serde(default, deserialize_with = "id_as_string")]
    pub id: Option<String>,
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta_d: f64,
}

fn id_as_string<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    Ok(match Option::<serde_json::Value>::deserialize(d)? {
        None | Some(serde_json::Value::Null) => None,
        Some(serde_json::Value::String(s)) if s.is_empty() => None,
        Some(serde_json::Value::String(s)) => Some(s),
        Some(v) => Some(v.to_string()),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchResult {
    pub id: String,
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta_d: f64,
    pub d: f64,
    pub d_prime: f64,
    pub q: f64,
    pub branch: &'static str,
    pub rc_x: f64,
    pub rc_y: f64,
    pub residual: f64,
}

fn evaluate(r: &BatchRecord) -> Result<BatchResult, String> {
    let cfg = PairConfiguration::from_degrees((r.a1, r.b1), (r.a2, r.b2), r.theta1, r.theta2, r.theta_d)
        .map_err(|e| e.to_string())?;
    let sol = closest_approach(&cfg).map_err(|e| e.to_string())?;
    Ok(BatchResult {
        id: r.id.clone().unwrap_or_default(),
        a1: r.a1,
        b1: r.b1,
        a2: r.a2,
        b2: r.b2,
        theta1: r.theta1,
        theta2: r.theta2,
        theta_d: r.theta_d,
        d: sol.d,
        d_prime: sol.d_prime,
        q: sol.q,
        branch: sol.branch.name(),
        rc_x: sol.contact_point.x,
        rc_y: sol.contact_point.y,
        residual: sol.residuals(&cfg).max(),
    })
}

/// Line number and parsed record (or the reason it was rejected).
type Row = (u64, Result<BatchRecord, String>);

fn read_rows(path: &PathBuf, format: Format) -> Result<Vec<Row>, CliError> {
    let file = File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    match format {
        Format::Csv => {
            let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
            let headers = rdr
                .headers()
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
                .clone();
            Ok(rdr
                .records()
                .map(|rec| match rec {
                    Ok(rec) => {
                        let line = rec.position().map_or(0, |p| p.line());
                        (line, rec.deserialize(Some(&headers)).map_err(|e| e.to_string()))
                    }
                    Err(e) => (e.position().map_or(0, |p| p.line()), Err(e.to_string())),
                })
                .collect())
        }
        Format::Jsonl => {
            let mut rows = Vec::new();
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let parsed: Result<BatchRecord, String> = serde_json::from_str(&line).map_err(|e| e.to_string());
                rows.push((i as u64 + 1, parsed));
            }
            Ok(rows)
        }
    }
}

pub fn run(args: &BatchArgs) -> Result<(), CliError> {
    let format = args
        .format
        .unwrap_or_else(|| match args.input.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") | Some("ndjson") => Format::Jsonl,
            _ => Format::Csv,
        });
    let rows = read_rows(&args.input, format)?;
    let results: Vec<(u64, Result<BatchResult, String>)> = rows
        .into_par_iter()
        .map(|(line, rec)| (line, rec.and_then(|r| evaluate(&r))))
        .collect();

    let mut rejects: Box<dyn Write> = match &args.rejects {
        Some(p) => Box::new(File::create(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?),
        None => Box::new(io::stderr().lock()),
    };
    let mut out = open_output(args.out.as_ref())?;
    let mut csv_out = (format == Format::Csv).then(|| csv::Writer::from_writer(Vec::new()));
    let (mut ok, mut rejected) = (0usize, 0usize);
    for (line, res) in &results {
        match res {
            Ok(r) => {
                ok += 1;
                match csv_out.as_mut() {
                    Some(w) => w.serialize(r).map_err(|e| CliError::Input(e.to_string()))?,
                    None => writeln!(
                        out,
                        "{}",
                        serde_json::to_string(r).map_err(|e| CliError::Input(e.to_string()))?
                    )?,
                }
            }
            Err(msg) => {
                rejected += 1;
                writeln!(rejects, "line {line}: {msg}")?;
            }
        }
    }
    if let Some(w) = csv_out {
        let bytes = w.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
        out.write_all(&bytes)?;
    }
    out.flush()?;
    rejects.flush()?;
    let total = ok + rejected;
    if total > 0 && 2 * rejected > total {
        return Err(CliError::Input(format!("{rejected} of {total} rows rejected")));
    }
    Ok(())
}
