//! Seeded Monte Carlo sampling over the state families, with CSV output and
//! a run manifest.
//!
//! The sample count is split into contiguous blocks, one per RNG stream.
//! Within a stream, parameters are drawn sequentially and the (expensive)
//! state evaluation runs in parallel batches that are written back in
//! order, so the output depends on `(seed, streams)` only, never on the
//! number of worker threads.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::families::{
    e0_state, e1_state, sample_e0, sample_e1, sample_full_rank, sample_separable, E0Params,
    E1Params, RngStream, SAMPLER_ID,
};
use crate::matcore::CMatrix;
use crate::measures::{chsh_max, concurrence, entropic_violation};
use crate::plane::{classify_entropic, PlanePoint, RegionLabel};
use crate::qstate::{linear_entropy, DensityMatrix};

const BATCH: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    #[value(name = "e0")]
    E0,
    #[value(name = "e1")]
    E1,
    #[value(name = "separable")]
    Separable,
    #[value(name = "full_rank")]
    FullRank,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::E0 => "e0",
            Family::E1 => "e1",
            Family::Separable => "separable",
            Family::FullRank => "full_rank",
        }
    }

    /// Column names of the flattened parameters.
    pub fn param_names(&self) -> Vec<String> {
        let named = |xs: &[&str]| xs.iter().map(|x| format!("p_{x}")).collect();
        match self {
            Family::E0 => named(&["a", "b", "c", "theta"]),
            Family::E1 => named(&["a", "b", "f", "c", "d", "theta", "phi"]),
            Family::Separable | Family::FullRank => (0..4)
                .flat_map(|i| {
                    (0..4).flat_map(move |j| [format!("re_{i}{j}"), format!("im_{i}{j}")])
                })
                .collect(),
        }
    }

    fn param_count(&self) -> usize {
        match self {
            Family::E0 => 4,
            Family::E1 => 7,
            Family::Separable | Family::FullRank => 32,
        }
    }

    /// Draws one parameter vector.
    pub fn draw(&self, rng: &mut RngStream) -> Vec<f64> {
        match self {
            Family::E0 => sample_e0(rng).as_vec(),
            Family::E1 => sample_e1(rng).as_vec(),
            Family::Separable => flatten(&sample_separable(rng)),
            Family::FullRank => flatten(&sample_full_rank(rng)),
        }
    }

    /// Rebuilds the density matrix described by a parameter vector.
    pub fn build_state(&self, params: &[f64]) -> Result<DensityMatrix> {
        if params.len() != self.param_count() {
            return Err(Error::InvalidParams(format!(
                "{} expects {} parameters, got {}",
                self,
                self.param_count(),
                params.len()
            )));
        }
        match self {
            Family::E0 => {
                let p = params;
                e0_state(&E0Params::new(p[0], p[1], p[2], p[3])?)
            }
            Family::E1 => {
                let p = params;
                e1_state(&E1Params::new(p[0], p[1], p[2], p[3], p[4], p[5], p[6])?)
            }
            Family::Separable | Family::FullRank => {
                let entries: Vec<Complex64> = params
                    .chunks_exact(2)
                    .map(|z| Complex64::new(z[0], z[1]))
                    .collect();
                DensityMatrix::new(CMatrix::from_entries(&entries)?)
            }
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e0" => Ok(Family::E0),
            "e1" => Ok(Family::E1),
            "separable" => Ok(Family::Separable),
            "full_rank" => Ok(Family::FullRank),
            other => Err(Error::InvalidArgument(format!("unknown family `{other}`"))),
        }
    }
}

fn flatten(rho: &DensityMatrix) -> Vec<f64> {
    rho.matrix()
        .entries()
        .iter()
        .flat_map(|z| [z.re, z.im])
        .collect()
}

/// One evaluated sample: a row of the scatter CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub family: Family,
    pub params: Vec<f64>,
    /// Concurrence.
    pub c: f64,
    /// Linear entropy.
    pub s: f64,
    pub gap_a: f64,
    pub gap_b: f64,
    pub chsh: f64,
    pub region: RegionLabel,
}

impl SampleRecord {
    pub fn evaluate(family: Family, params: Vec<f64>) -> Result<Self> {
        let rho = family.build_state(&params)?;
        Ok(Self::from_state(family, params, &rho))
    }

    pub fn from_state(family: Family, params: Vec<f64>, rho: &DensityMatrix) -> Self {
        let c = concurrence(rho).concurrence;
        let s = linear_entropy(rho);
        let v = entropic_violation(rho);
        Self {
            family,
            params,
            c,
            s,
            gap_a: v.gap_a,
            gap_b: v.gap_b,
            chsh: chsh_max(rho),
            region: classify_entropic(PlanePoint::new(c, s)),
        }
    }
}

/// What to sample: `n` states of `family` split over `streams` RNG streams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleConfig {
    pub family: Family,
    pub n: u64,
    pub seed: u64,
    pub streams: u64,
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("n must be >= 1".into()));
        }
        if self.streams == 0 {
            return Err(Error::InvalidArgument("streams must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of samples drawn from stream `i`.
    pub fn stream_len(&self, i: u64) -> u64 {
        self.n / self.streams + u64::from(i < self.n % self.streams)
    }
}

/// Feeds evaluated records to `sink` in deterministic order, in batches.
pub fn for_each_batch<F>(cfg: &SampleConfig, mut sink: F) -> Result<()>
where
    F: FnMut(&[SampleRecord]) -> Result<()>,
{
    cfg.validate()?;
    for stream in 0..cfg.streams {
        let mut rng = RngStream::new(cfg.seed, stream);
        let mut left = cfg.stream_len(stream);
        while left > 0 {
            let take = left.min(BATCH as u64) as usize;
            let drawn: Vec<Vec<f64>> = (0..take).map(|_| cfg.family.draw(&mut rng)).collect();
            let records = drawn
                .into_par_iter()
                .map(|p| SampleRecord::evaluate(cfg.family, p))
                .collect::<Result<Vec<_>>>()?;
            sink(&records)?;
            left -= take as u64;
        }
    }
    Ok(())
}

/// Everything needed to reproduce a sampling run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunManifest {
    pub family: String,
    pub seed: u64,
    pub streams: u64,
    pub n: u64,
    pub sampler_id: String,
    pub tool_version: String,
    /// Seconds since the Unix epoch; not part of the reproducibility key.
    pub timestamp: u64,
    pub csv_sha256: String,
}

impl RunManifest {
    /// The manifest without its timestamp, as compared between runs.
    pub fn reproducibility_key(&self) -> (String, u64, u64, u64, String, String) {
        (
            self.family.clone(),
            self.seed,
            self.streams,
            self.n,
            self.sampler_id.clone(),
            self.tool_version.clone(),
        )
    }
}

struct HashingWriter<W> {
    inner: W,
    hasher: Sha256,
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

/// Float format of every CSV field: 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_error(e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
        _ => {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::Parse {
                line,
                field: 0,
                message: e.to_string(),
            }
        }
    }
}

pub fn csv_header(family: Family) -> Vec<String> {
    let mut h: Vec<String> = ["family", "c", "s", "gap_a", "gap_b", "chsh", "region"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend(family.param_names());
    h
}

fn write_row<W: Write>(w: &mut csv::Writer<W>, r: &SampleRecord) -> Result<()> {
    let mut row = vec![
        r.family.as_str().to_string(),
        fmt_float(r.c),
        fmt_float(r.s),
        fmt_float(r.gap_a),
        fmt_float(r.gap_b),
        fmt_float(r.chsh),
        r.region.as_str().to_string(),
    ];
    row.extend(r.params.iter().map(|&x| fmt_float(x)));
    w.write_record(&row).map_err(csv_error)
}

/// Writes the records of `cfg` as CSV to `out` and returns the manifest,
/// whose hash covers exactly the bytes written.
pub fn run_sample<W: Write>(cfg: &SampleConfig, out: W) -> Result<RunManifest> {
    cfg.validate()?;
    let hw = HashingWriter {
        inner: out,
        hasher: Sha256::new(),
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(hw);
    w.write_record(csv_header(cfg.family)).map_err(csv_error)?;
    for_each_batch(cfg, |batch| {
        batch.iter().try_for_each(|r| write_row(&mut w, r))
    })?;
    let mut hw = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    hw.flush()?;
    let digest = hw.hasher.finalize();
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    Ok(RunManifest {
        family: cfg.family.to_string(),
        seed: cfg.seed,
        streams: cfg.streams,
        n: cfg.n,
        sampler_id: SAMPLER_ID.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp,
        csv_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
    })
}

fn parse_float(s: &str, line: usize, field: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse {
        line,
        field,
        message: format!("`{s}`: {e}"),
    })
}

/// Reads a sample CSV back. Fields are 1-based in error positions.
pub fn read_samples<R: Read>(input: R) -> Result<Vec<SampleRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = rdr.headers().map_err(csv_error)?.clone();
    if header.len() < 7 || &header[0] != "family" {
        return Err(Error::Parse {
            line: 1,
            field: 1,
            message: "not a sample CSV header".into(),
        });
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let family: Family = row[0].parse().map_err(|e: Error| Error::Parse {
            line,
            field: 1,
            message: e.to_string(),
        })?;
        if row.len() != 7 + family.param_count() {
            return Err(Error::Parse {
                line,
                field: row.len(),
                message: format!("expected {} fields", 7 + family.param_count()),
            });
        }
        let region: RegionLabel = row[6].parse().map_err(|e: Error| Error::Parse {
            line,
            field: 7,
            message: e.to_string(),
        })?;
        let num = |k: usize| parse_float(&row[k], line, k + 1);
        let params = (7..row.len()).map(num).collect::<Result<Vec<_>>>()?;
        out.push(SampleRecord {
            family,
            params,
            c: num(1)?,
            s: num(2)?,
            gap_a: num(3)?,
            gap_b: num(4)?,
            chsh: num(5)?,
            region,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_lengths_cover_n() {
        let cfg = SampleConfig {
            family: Family::E0,
            n: 10,
            seed: 1,
            streams: 4,
        };
        let lens: Vec<u64> = (0..4).map(|i| cfg.stream_len(i)).collect();
        assert_eq!(lens, vec![3, 3, 2, 2]);
    }

    #[test]
    fn family_names_roundtrip() {
        for f in [Family::E0, Family::E1, Family::Separable, Family::FullRank] {
            assert_eq!(f.as_str().parse::<Family>().unwrap(), f);
            assert_eq!(f.param_names().len(), f.param_count());
        }
    }

    #[test]
    fn csv_roundtrip_small() {
        for family in [Family::E0, Family::E1, Family::Separable, Family::FullRank] {
            let cfg = SampleConfig {
                family,
                n: 20,
                seed: 3,
                streams: 3,
            };
            let mut buf = Vec::new();
            let m = run_sample(&cfg, &mut buf).unwrap();
            assert_eq!(m.csv_sha256.len(), 64);
            let text = String::from_utf8(buf.clone()).unwrap();
            assert!(text.starts_with("family,c,s,gap_a,gap_b,chsh,region,"));
            let recs = read_samples(buf.as_slice()).unwrap();
            assert_eq!(recs.len(), 20);
            for r in &recs {
                let again = SampleRecord::evaluate(family, r.params.clone()).unwrap();
                assert!((again.c - r.c).abs() < 1e-10);
                assert!((again.s - r.s).abs() < 1e-10);
                assert!((again.gap_a - r.gap_a).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn bad_rows_report_position() {
        let text = "family,c,s,gap_a,gap_b,chsh,region,p_a,p_b,p_c,p_theta\ne0,1,2,3,4,5,V_E,0.1,0.2,x,0\n";
        match read_samples(text.as_bytes()) {
            Err(Error::Parse { line, field, .. }) => assert_eq!((line, field), (2, 10)),
            other => panic!("{other:?}"),
        }
        assert!(read_samples("a,b\n".as_bytes()).is_err());
    }

    #[test]
    fn rejects_empty_config() {
        let cfg = SampleConfig {
            family: Family::E1,
            n: 0,
            seed: 0,
            streams: 1,
        };
        assert!(run_sample(&cfg, Vec::new()).is_err());
    }
}
