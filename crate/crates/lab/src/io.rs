//! File formats: sequence CSV, hit certificates, interpolant dumps, spec
//! files, JSON envelopes and binary matrix dumps.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use uniconvex::convexseq::{ConvexSequence, Hit};
use uniconvex::expsum::{ExpSumSpec, Frequencies, GridSpec};

use crate::config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Integer that stays a JSON number when it fits in `i64`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonInt {
    Small(i64),
    Big(String),
}

impl From<&BigInt> for JsonInt {
    fn from(v: &BigInt) -> Self {
        v.to_i64()
            .map_or_else(|| Self::Big(v.to_string()), Self::Small)
    }
}

impl JsonInt {
    pub fn to_bigint(&self) -> anyhow::Result<BigInt> {
        match self {
            Self::Small(v) => Ok(BigInt::from(*v)),
            Self::Big(s) => s.parse().with_context(|| format!("bad integer {s:?}")),
        }
    }
}

/// One entry of a hit certificate: `a_n = (num/den) · N^{-alpha}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitRecord {
    pub n: usize,
    pub alpha: f64,
    pub num: JsonInt,
    pub den: JsonInt,
}

impl From<&Hit> for HitRecord {
    fn from(h: &Hit) -> Self {
        Self {
            n: h.n,
            alpha: h.alpha,
            num: h.coord.numer().into(),
            den: h.coord.denom().into(),
        }
    }
}

impl HitRecord {
    pub fn to_hit(&self) -> anyhow::Result<Hit> {
        let den = self.den.to_bigint()?;
        if den.is_zero() {
            bail!("hit at n = {}: zero denominator", self.n);
        }
        Ok(Hit::new(
            self.n,
            self.alpha,
            BigRational::new(self.num.to_bigint()?, den),
        ))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    n: usize,
    a_n: f64,
    exact_num: Option<String>,
    exact_den: Option<String>,
}

/// Writes `n,a_n,exact_num,exact_den`, leaving the exact columns empty when
/// there are no exact values.
pub fn write_sequence_csv<W: Write>(seq: &ConvexSequence, w: W) -> anyhow::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let exact = seq.exact_values();
    for (i, &a) in seq.values().iter().enumerate() {
        let (num, den) = match exact {
            Some(e) => (Some(e[i].numer().to_string()), Some(e[i].denom().to_string())),
            None => (None, None),
        };
        wr.serialize(CsvRow {
            n: i + 1,
            a_n: a,
            exact_num: num,
            exact_den: den,
        })?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads a sequence CSV. Exact values are used only if every row has them.
pub fn read_sequence_csv<R: Read>(r: R) -> anyhow::Result<ConvexSequence> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers()?.clone();
    if headers.get(0) != Some("n") || headers.get(1) != Some("a_n") {
        bail!("sequence CSV must start with columns n,a_n (got {headers:?})");
    }
    let mut values = Vec::new();
    let mut exact: Vec<Option<BigRational>> = Vec::new();
    for (line, row) in rd.deserialize::<CsvRow>().enumerate() {
        let row = row.with_context(|| format!("sequence CSV row {}", line + 2))?;
        if row.n != line + 1 {
            bail!("sequence CSV row {}: field n = {}, expected {}", line + 2, row.n, line + 1);
        }
        values.push(row.a_n);
        exact.push(match (row.exact_num, row.exact_den) {
            (Some(p), Some(q)) if !p.is_empty() && !q.is_empty() => {
                let p: BigInt = p.parse().with_context(|| format!("field exact_num {p:?}"))?;
                let q: BigInt = q.parse().with_context(|| format!("field exact_den {q:?}"))?;
                if q.is_zero() {
                    bail!("sequence CSV row {}: field exact_den is zero", line + 2);
                }
                Some(BigRational::new(p, q))
            }
            _ => None,
        });
    }
    if !exact.is_empty() && exact.iter().all(Option::is_some) {
        Ok(ConvexSequence::from_exact(exact.into_iter().flatten().collect()))
    } else {
        Ok(ConvexSequence::from_values(values))
    }
}

pub fn hits_json(seq: &ConvexSequence) -> Vec<HitRecord> {
    seq.hits()
        .map(|hs| hs.iter().map(HitRecord::from).collect())
        .unwrap_or_default()
}

pub fn read_hits_json(text: &str) -> anyhow::Result<Vec<Hit>> {
    let recs: Vec<HitRecord> = serde_json::from_str(text).context("hits JSON")?;
    recs.iter().map(HitRecord::to_hit).collect()
}

/// Coefficient pair `[re, im]`.
type C = [f64; 2];

/// On-disk form of an [`ExpSumSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecFile {
    #[serde(rename = "N")]
    pub n: usize,
    /// `"canonical"` for `ξ_n = n/N`, or the list of `ξ_n`.
    pub xi: XiField,
    pub eta: Vec<f64>,
    pub b: Vec<C>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum XiField {
    Named(String),
    Values(Vec<f64>),
}

impl SpecFile {
    pub fn from_spec(spec: &ExpSumSpec) -> Self {
        Self {
            n: spec.n(),
            xi: match spec.frequencies() {
                Frequencies::Canonical => XiField::Named("canonical".into()),
                Frequencies::Custom(v) => XiField::Values(v.clone()),
            },
            eta: spec.eta().to_vec(),
            b: spec.b().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_spec(&self) -> anyhow::Result<ExpSumSpec> {
        let xi = match &self.xi {
            XiField::Named(s) if s == "canonical" => Frequencies::Canonical,
            XiField::Named(s) => bail!("field xi: expected \"canonical\" or a list, got {s:?}"),
            XiField::Values(v) => Frequencies::Custom(v.clone()),
        };
        if self.b.len() != self.n {
            bail!("field b: {} entries for N = {}", self.b.len(), self.n);
        }
        let b = self.b.iter().map(|c| Complex64::new(c[0], c[1])).collect();
        ExpSumSpec::new(xi, self.eta.clone(), b).context("spec file")
    }
}

pub fn read_spec_file(path: &Path) -> anyhow::Result<ExpSumSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let f: SpecFile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    f.to_spec()
}

/// Every JSON output: artifact version, the run configuration, the payload.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub version: &'static str,
    pub config: &'a RunConfig,
    pub result: T,
}

pub fn envelope_json<T: Serialize>(config: &RunConfig, result: T) -> anyhow::Result<String> {
    let env = Envelope {
        version: VERSION,
        config,
        result,
    };
    let mut s = serde_json::to_string_pretty(&env)?;
    s.push('\n');
    Ok(s)
}

/// Writes via a temporary file in the same directory and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

/// `path` with `suffix` appended to its file name.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSidecar {
    pub rows: usize,
    pub cols: usize,
    pub dtype: String,
    pub layout: String,
    pub x_lo: f64,
    pub x_hi: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

/// Row-major little-endian `(re, im)` pairs plus a JSON sidecar at
/// `<path>.json`.
pub fn write_matrix(path: &Path, data: &[Complex64], grid: &GridSpec) -> anyhow::Result<()> {
    if data.len() != grid.mx * grid.mt {
        bail!("matrix has {} entries, grid has {}", data.len(), grid.mx * grid.mt);
    }
    let mut bytes = Vec::with_capacity(data.len() * 16);
    for z in data {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    write_atomic(path, &bytes)?;
    let side = MatrixSidecar {
        rows: grid.mt,
        cols: grid.mx,
        dtype: "complex128-le".into(),
        layout: "row-major, rows are t".into(),
        x_lo: grid.x_lo,
        x_hi: grid.x_hi,
        t_lo: grid.t_lo,
        t_hi: grid.t_hi,
    };
    let mut s = serde_json::to_string_pretty(&side)?;
    s.push('\n');
    write_atomic(&sibling(path, ".json"), s.as_bytes())
}

pub fn read_matrix(path: &Path) -> anyhow::Result<(Vec<Complex64>, MatrixSidecar)> {
    let side: MatrixSidecar = serde_json::from_str(&fs::read_to_string(sibling(path, ".json"))?)?;
    let bytes = fs::read(path)?;
    if bytes.len() != side.rows * side.cols * 16 {
        bail!("matrix file size does not match its sidecar");
    }
    let data = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Ok((data, side))
}
