//! File formats: observation CSVs, experiment reports (JSON summary plus
//! trial-level CSV) and mixture fits (JSON plus responsibility CSV).

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiments::{ExperimentReport, TrialRow};
use crate::mixture::MixtureFit;
use crate::sampling::{Observations, PoissonData};

/// Hex SHA-256 of `bytes`.
pub fn content_hash(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationMode {
    Gaussian,
    Poisson,
}

impl ObservationMode {
    fn header(self) -> &'static [&'static str] {
        match self {
            ObservationMode::Gaussian => &["index", "value"],
            ObservationMode::Poisson => &["index", "count", "baseline"],
        }
    }
}

fn parse_err(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line: line as usize,
        message: message.into(),
    }
}

/// Parses an observation CSV. Rows may come in any order but every index
/// `0..n` must appear exactly once. Errors name the offending line.
pub fn parse_observations(reader: impl Read, mode: ObservationMode) -> Result<Observations> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != mode.header() {
        return Err(parse_err(
            1,
            format!("expected header `{}`, found `{}`", mode.header().join(","), header.join(",")),
        ));
    }
    let mut rows: Vec<(usize, u64, Vec<String>)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != mode.header().len() {
            return Err(parse_err(line, format!("expected {} fields, found {}", mode.header().len(), rec.len())));
        }
        let index: usize = rec[0]
            .parse()
            .map_err(|_| parse_err(line, format!("index `{}` is not a nonnegative integer", &rec[0])))?;
        rows.push((index, line, rec.iter().skip(1).map(str::to_string).collect()));
    }
    if rows.is_empty() {
        return Err(parse_err(1, "no observations"));
    }
    let n = rows.len();
    let mut slot_line = vec![0u64; n];
    for (index, line, _) in &rows {
        if *index >= n {
            return Err(parse_err(*line, format!("index {index} outside 0..{n}")));
        }
        if slot_line[*index] != 0 {
            return Err(parse_err(
                *line,
                format!("duplicate index {index} (first seen on line {})", slot_line[*index]),
            ));
        }
        slot_line[*index] = *line;
    }
    let num = |s: &str, what: &str, line: u64| -> Result<f64> {
        let v: f64 = s
            .parse()
            .map_err(|_| parse_err(line, format!("{what} `{s}` is not a number")))?;
        if !v.is_finite() {
            return Err(parse_err(line, format!("{what} `{s}` is not finite")));
        }
        Ok(v)
    };
    rows.sort_by_key(|r| r.0);
    match mode {
        ObservationMode::Gaussian => {
            let values = rows
                .iter()
                .map(|(_, line, f)| num(&f[0], "value", *line))
                .collect::<Result<Vec<_>>>()?;
            Observations::gaussian(values)
        }
        ObservationMode::Poisson => {
            let mut counts = Vec::with_capacity(n);
            let mut baselines = Vec::with_capacity(n);
            for (_, line, f) in &rows {
                counts.push(
                    f[0].parse::<u64>()
                        .map_err(|_| parse_err(*line, format!("count `{}` is not a nonnegative integer", f[0])))?,
                );
                let b = num(&f[1], "baseline", *line)?;
                if b <= 0.0 {
                    return Err(parse_err(*line, format!("baseline {b} must be positive")));
                }
                baselines.push(b);
            }
            Ok(Observations::Poisson(PoissonData::new(counts, baselines)?))
        }
    }
}

pub fn read_observations(path: impl AsRef<Path>, mode: ObservationMode) -> Result<Observations> {
    parse_observations(File::open(path)?, mode)
}

pub fn write_observations_to(w: impl Write, obs: &Observations) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    match obs {
        Observations::Gaussian { values } => {
            wtr.write_record(ObservationMode::Gaussian.header())?;
            for (i, v) in values.iter().enumerate() {
                wtr.write_record([i.to_string(), v.to_string()])?;
            }
        }
        Observations::Poisson(d) => {
            wtr.write_record(ObservationMode::Poisson.header())?;
            for (i, (c, b)) in d.counts().iter().zip(d.baselines()).enumerate() {
                wtr.write_record([i.to_string(), c.to_string(), b.to_string()])?;
            }
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_observations(path: impl AsRef<Path>, obs: &Observations) -> Result<()> {
    write_observations_to(BufWriter::new(File::create(path)?), obs)
}

/// Column order of the trial-level report CSV.
pub const TRIAL_COLUMNS: [&str; 14] = [
    "family",
    "n",
    "k",
    "mu",
    "trial",
    "estimator",
    "est_size",
    "f_measure",
    "norm_intersection",
    "norm_error",
    "size_bias",
    "score",
    "solver",
    "seed",
];

pub fn write_trials_to(w: impl Write, rows: &[TrialRow]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wtr.write_record(TRIAL_COLUMNS)?;
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_trials_from(r: impl Read) -> Result<Vec<TrialRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if let Some(missing) = TRIAL_COLUMNS.iter().find(|c| !header.iter().any(|h| h == *c)) {
        return Err(parse_err(1, format!("missing column `{missing}`")));
    }
    rdr.deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// Writes the JSON summary to `json_path` and the trial rows to
/// `csv_path`.
pub fn write_report(report: &ExperimentReport, json_path: impl AsRef<Path>, csv_path: impl AsRef<Path>) -> Result<()> {
    let mut f = BufWriter::new(File::create(json_path)?);
    serde_json::to_writer_pretty(&mut f, report)?;
    f.write_all(b"\n")?;
    f.flush()?;
    write_trials_to(BufWriter::new(File::create(csv_path)?), &report.rows)
}

pub fn read_report(json_path: impl AsRef<Path>, csv_path: impl AsRef<Path>) -> Result<ExperimentReport> {
    let mut report: ExperimentReport = serde_json::from_reader(File::open(json_path)?)?;
    if report.schema_version != crate::experiments::REPORT_SCHEMA_VERSION {
        return Err(Error::param(format!(
            "unsupported report schema version {}",
            report.schema_version
        )));
    }
    report.rows = read_trials_from(File::open(csv_path)?)?;
    Ok(report)
}

#[derive(Serialize, Deserialize)]
struct FitDocument {
    #[serde(flatten)]
    fit: MixtureFit,
    responsibilities_path: String,
}

/// Sidecar path for a fit's responsibilities: `<stem>.responsibilities.csv`
/// next to `json_path`.
pub fn responsibilities_path(json_path: &Path) -> PathBuf {
    let stem = json_path.file_stem().and_then(|s| s.to_str()).unwrap_or("fit");
    json_path.with_file_name(format!("{stem}.responsibilities.csv"))
}

pub fn write_fit(fit: &MixtureFit, json_path: impl AsRef<Path>) -> Result<()> {
    let json_path = json_path.as_ref();
    let side = responsibilities_path(json_path);
    let mut wtr = csv::Writer::from_path(&side)?;
    wtr.write_record(["index", "responsibility"])?;
    for (i, r) in fit.responsibilities.iter().enumerate() {
        wtr.write_record([i.to_string(), r.to_string()])?;
    }
    wtr.flush()?;
    let doc = FitDocument {
        fit: fit.clone(),
        responsibilities_path: side
            .file_name()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string(),
    };
    let mut f = BufWriter::new(File::create(json_path)?);
    serde_json::to_writer_pretty(&mut f, &doc)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

pub fn read_fit(json_path: impl AsRef<Path>) -> Result<MixtureFit> {
    let json_path = json_path.as_ref();
    let doc: FitDocument = serde_json::from_reader(File::open(json_path)?)?;
    let side = json_path.with_file_name(&doc.responsibilities_path);
    let mut rdr = csv::Reader::from_path(side)?;
    let mut r = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let idx: usize = rec[0].parse().map_err(|_| parse_err(line, "bad index"))?;
        if idx != i {
            return Err(parse_err(line, format!("expected index {i}, found {idx}")));
        }
        r.push(rec[1].parse().map_err(|_| parse_err(line, "bad responsibility"))?);
    }
    let mut fit = doc.fit;
    fit.responsibilities = r;
    Ok(fit)
}
