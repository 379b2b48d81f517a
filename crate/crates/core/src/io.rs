//! File formats: dataset CSV and binary container, truth sidecar JSON,
//! posterior draw CSV, posterior summary JSON, and the versioned binary
//! chain checkpoint.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Component, Dataset, GibbsConfig, GibbsState, PosteriorDraws, PosteriorSummary, Truth,
    QUANTILE_LEVELS,
};
use crate::rng::RngStream;

/// Write a dataset as CSV with header `y,x1,...,xp`. Values use the
/// shortest round-trip decimal representation.
pub fn write_dataset_csv(path: &Path, dataset: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let p = dataset.p();
    let mut header = Vec::with_capacity(p + 1);
    header.push("y".to_string());
    for j in 1..=p {
        header.push(format!("x{j}"));
    }
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    let x = dataset.x();
    let y = dataset.y();
    let mut row = Vec::with_capacity(p + 1);
    for i in 0..dataset.n() {
        row.clear();
        row.push(y[i].to_string());
        for j in 0..p {
            row.push(x[(i, j)].to_string());
        }
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Read a dataset CSV written by [`write_dataset_csv`] (or any file with
/// that header shape). The result carries no truth; attach one from a
/// sidecar with [`read_truth_json`] if available.
pub fn read_dataset_csv(path: &Path) -> Result<Dataset> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if headers.is_empty() || headers.get(0) != Some("y") {
        return Err(Error::parse(path, "first column must be named 'y'"));
    }
    let p = headers.len() - 1;
    let mut ys = Vec::new();
    let mut xs: Vec<f64> = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        if rec.len() != p + 1 {
            return Err(Error::parse(
                path,
                format!("row {} has {} fields, expected {}", line + 2, rec.len(), p + 1),
            ));
        }
        for (k, field) in rec.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::parse(path, format!("row {}: '{}' is not a number", line + 2, field))
            })?;
            if k == 0 {
                ys.push(v);
            } else {
                xs.push(v);
            }
        }
    }
    let n = ys.len();
    let x = DMatrix::from_row_iterator(n, p, xs);
    Dataset::new(x, DVector::from_vec(ys), None)
}

pub fn write_truth_json(path: &Path, truth: &Truth) -> Result<()> {
    write_json(path, truth)
}

pub fn read_truth_json(path: &Path) -> Result<Truth> {
    read_json(path)
}

/// Attach a truth sidecar to a dataset, validating dimensions.
pub fn dataset_with_truth(dataset: Dataset, truth: Truth) -> Result<Dataset> {
    Dataset::new(dataset.x().clone(), dataset.y().clone(), Some(truth))
}

const DATASET_MAGIC: &[u8; 8] = b"RBDATA01";
const CHECKPOINT_MAGIC: &[u8; 8] = b"RBCHKPT1";
const FORMAT_VERSION: u32 = 1;

/// Binary matrix container: magic, version, dimensions, row-major `x`,
/// `y`, and optionally the truth block. Exact (bit-level) round trip.
pub fn write_dataset_binary(path: &Path, dataset: &Dataset) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    let mut out = Vec::new();
    out.extend_from_slice(DATASET_MAGIC);
    push_u32(&mut out, FORMAT_VERSION);
    push_u64(&mut out, dataset.n() as u64);
    push_u64(&mut out, dataset.p() as u64);
    out.push(dataset.truth().is_some() as u8);
    for i in 0..dataset.n() {
        for j in 0..dataset.p() {
            push_f64(&mut out, dataset.x()[(i, j)]);
        }
    }
    for i in 0..dataset.n() {
        push_f64(&mut out, dataset.y()[i]);
    }
    if let Some(t) = dataset.truth() {
        for b in &t.beta {
            push_f64(&mut out, *b);
        }
        push_f64(&mut out, t.theta);
        for l in &t.labels {
            out.push(l.label());
        }
    }
    w.write_all(&out).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_dataset_binary(path: &Path) -> Result<Dataset> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    BufReader::new(f)
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    let mut cur = Cursor::new(path, &bytes);
    cur.expect_magic(DATASET_MAGIC)?;
    let version = cur.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::parse(
            path,
            format!("unsupported dataset container version {version}"),
        ));
    }
    let n = cur.u64()? as usize;
    let p = cur.u64()? as usize;
    let has_truth = cur.u8()? != 0;
    let x = DMatrix::from_row_iterator(n, p, cur.f64_iter(n * p)?);
    let y = DVector::from_iterator(n, cur.f64_iter(n)?);
    let truth = if has_truth {
        let beta: Vec<f64> = cur.f64_iter(p)?.collect();
        let theta = cur.f64()?;
        let mut labels = Vec::with_capacity(p);
        for _ in 0..p {
            labels.push(Component::from_label(cur.u8()?)?);
        }
        Some(Truth { beta, theta, labels })
    } else {
        None
    };
    cur.expect_end()?;
    Dataset::new(x, y, truth)
}

/// Write retained draws as CSV: one row per state, scalars first, then the
/// full coefficient vector.
pub fn write_draws_csv(path: &Path, draws: &PosteriorDraws) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let p = draws.states[0].p();
    let mut header = vec![
        "draw".to_string(),
        "theta_sq".to_string(),
        "delta1_sq".to_string(),
        "delta2_sq".to_string(),
        "phi_frac".to_string(),
        "n_large".to_string(),
    ];
    for j in 1..=p {
        header.push(format!("beta{j}"));
    }
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for (i, s) in draws.states.iter().enumerate() {
        row.clear();
        row.push(i.to_string());
        row.push(s.theta_sq.to_string());
        row.push(s.delta_sq[0].to_string());
        row.push(s.delta_sq[1].to_string());
        row.push(s.phi_frac.to_string());
        row.push(s.group_count(Component::Large).to_string());
        for b in &s.beta {
            row.push(b.to_string());
        }
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// The JSON summary document written next to the draw CSV.
#[derive(Debug, Serialize, Deserialize)]
pub struct PosteriorReport {
    pub config: GibbsConfig,
    pub quantile_levels: Vec<f64>,
    pub summary: PosteriorSummary,
    pub retained: usize,
}

pub fn write_posterior_summary_json(path: &Path, draws: &PosteriorDraws) -> Result<()> {
    let report = PosteriorReport {
        config: draws.config,
        quantile_levels: QUANTILE_LEVELS.to_vec(),
        summary: draws.summary.clone(),
        retained: draws.states.len(),
    };
    write_json(path, &report)
}

pub fn read_posterior_summary_json(path: &Path) -> Result<PosteriorReport> {
    read_json(path)
}

/// Write a coefficient estimate as a two-column CSV.
pub fn write_estimate_csv(path: &Path, beta: &DVector<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["j", "beta"]).map_err(|e| csv_err(path, e))?;
    for (j, b) in beta.iter().enumerate() {
        w.write_record([(j + 1).to_string(), b.to_string()])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_estimate_csv(path: &Path) -> Result<DVector<f64>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let field = rec
            .get(1)
            .ok_or_else(|| Error::parse(path, "estimate row missing beta column"))?;
        out.push(field.trim().parse().map_err(|_| {
            Error::parse(path, format!("'{field}' is not a number"))
        })?);
    }
    Ok(DVector::from_vec(out))
}

/// Snapshot of a running chain sufficient to resume it exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainCheckpoint {
    pub config: GibbsConfig,
    /// Completed sweep count (1-based iteration index of the last sweep).
    pub completed: usize,
    /// ChaCha word position of the chain stream after `completed` sweeps.
    pub rng_word_pos: u128,
    pub state: GibbsState,
    pub retained: Vec<GibbsState>,
}

pub fn write_checkpoint(path: &Path, ck: &ChainCheckpoint) -> Result<()> {
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    push_u32(&mut out, FORMAT_VERSION);
    push_u64(&mut out, ck.config.iterations as u64);
    push_u64(&mut out, ck.config.burn_in as u64);
    push_u64(&mut out, ck.config.thinning as u64);
    push_u64(&mut out, ck.config.stream.seed);
    push_u64(&mut out, ck.config.stream.stream);
    out.push(match ck.config.theta_shape {
        crate::model::ThetaShapeMode::Derived => 0,
        crate::model::ThetaShapeMode::PaperLiteral => 1,
    });
    push_u64(&mut out, ck.completed as u64);
    push_u64(&mut out, (ck.rng_word_pos & u128::from(u64::MAX)) as u64);
    push_u64(&mut out, (ck.rng_word_pos >> 64) as u64);
    push_state(&mut out, &ck.state);
    push_u64(&mut out, ck.retained.len() as u64);
    for s in &ck.retained {
        push_state(&mut out, s);
    }
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    w.write_all(&out).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<ChainCheckpoint> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    BufReader::new(f)
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    let mut cur = Cursor::new(path, &bytes);
    cur.expect_magic(CHECKPOINT_MAGIC)?;
    let version = cur.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported checkpoint version {version}"
        )));
    }
    let iterations = cur.u64()? as usize;
    let burn_in = cur.u64()? as usize;
    let thinning = cur.u64()? as usize;
    let seed = cur.u64()?;
    let stream = cur.u64()?;
    let theta_shape = match cur.u8()? {
        0 => crate::model::ThetaShapeMode::Derived,
        1 => crate::model::ThetaShapeMode::PaperLiteral,
        other => {
            return Err(Error::Checkpoint(format!(
                "unknown theta-shape tag {other}"
            )))
        }
    };
    let config = GibbsConfig::with_schedule(iterations, burn_in, thinning, RngStream::new(seed, stream))?
        .with_theta_shape(theta_shape);
    let completed = cur.u64()? as usize;
    let lo = cur.u64()? as u128;
    let hi = cur.u64()? as u128;
    let rng_word_pos = (hi << 64) | lo;
    let state = read_state(&mut cur)?;
    let m = cur.u64()? as usize;
    let mut retained = Vec::with_capacity(m);
    for _ in 0..m {
        retained.push(read_state(&mut cur)?);
    }
    cur.expect_end()?;
    Ok(ChainCheckpoint {
        config,
        completed,
        rng_word_pos,
        state,
        retained,
    })
}

fn push_state(out: &mut Vec<u8>, s: &GibbsState) {
    push_u64(out, s.p() as u64);
    push_u64(out, s.n() as u64);
    for b in &s.beta {
        push_f64(out, *b);
    }
    for l in &s.labels {
        out.push(l.label());
    }
    for v in &s.sigma_sq {
        push_f64(out, *v);
    }
    push_f64(out, s.theta_sq);
    push_f64(out, s.delta_sq[0]);
    push_f64(out, s.delta_sq[1]);
    push_f64(out, s.phi_frac);
}

fn read_state(cur: &mut Cursor<'_>) -> Result<GibbsState> {
    let p = cur.u64()? as usize;
    let n = cur.u64()? as usize;
    let beta: Vec<f64> = cur.f64_iter(p)?.collect();
    let mut labels = Vec::with_capacity(p);
    for _ in 0..p {
        labels.push(Component::from_label(cur.u8()?)?);
    }
    let sigma_sq: Vec<f64> = cur.f64_iter(n)?.collect();
    let theta_sq = cur.f64()?;
    let delta_sq = [cur.f64()?, cur.f64()?];
    let phi_frac = cur.f64()?;
    Ok(GibbsState {
        beta,
        labels,
        sigma_sq,
        theta_sq,
        delta_sq,
        phi_frac,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| Error::parse(path, e.to_string()))?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(f)).map_err(|e| Error::parse(path, e.to_string()))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path, format!("{other:?}")),
    }
}

fn push_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn push_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn push_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_bits().to_le_bytes());
}

/// Bounds-checked little-endian reader over a byte buffer.
struct Cursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(path: &'a Path, bytes: &'a [u8]) -> Self {
        Cursor { path, bytes, pos: 0 }
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.pos + len > self.bytes.len() {
            return Err(Error::parse(self.path, "unexpected end of file"));
        }
        let s = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn expect_magic(&mut self, magic: &[u8; 8]) -> Result<()> {
        let got = self.take(8)?;
        if got != magic {
            return Err(Error::parse(
                self.path,
                format!("bad magic: expected {magic:?}, found {got:?}"),
            ));
        }
        Ok(())
    }

    fn expect_end(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::parse(
                self.path,
                format!("{} trailing bytes", self.bytes.len() - self.pos),
            ));
        }
        Ok(())
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn f64_iter(&mut self, count: usize) -> Result<impl Iterator<Item = f64> + 'a> {
        let raw = self.take(count * 8)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_bits(u64::from_le_bytes(c.try_into().unwrap()))))
    }
}
