//! The persisted census of primitive orbits.
//!
//! File layout: `#`-prefixed `key=value` header lines, a column line
//! `word,m,T,lambda_u,det_factor,residual`, then one row per primitive
//! orbit sorted by `(m, word)`. Floats carry 17 significant digits so a
//! save/load round trip is bit-exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::ObstacleSystem;
use crate::linearization::poincare_map;
use crate::orbit_solver::{solve_cycle, SolverOptions};
use crate::symbolic::{enumerate_necklaces, necklace_count, Necklace};

const MAGIC: &str = "# billiard-spectrum";
const COLUMNS: &str = "word,m,T,lambda_u,det_factor,residual";

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub necklace: Necklace,
    /// `T_γ`.
    pub length: f64,
    pub lambda_u: f64,
    /// `|det(I − P_γ)|`.
    pub det_factor: f64,
    pub residual: f64,
}

impl SpectrumRow {
    /// `|γ|`.
    pub fn period(&self) -> usize {
        self.necklace.period()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumHeader {
    pub geometry_hash: String,
    pub kappa: usize,
    pub n_max: usize,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumDb {
    header: SpectrumHeader,
    rows: Vec<SpectrumRow>,
}

impl SpectrumDb {
    pub fn header(&self) -> &SpectrumHeader {
        &self.header
    }

    pub fn rows(&self) -> &[SpectrumRow] {
        &self.rows
    }

    pub fn kappa(&self) -> usize {
        self.header.kappa
    }

    pub fn n_max(&self) -> usize {
        self.header.n_max
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows with `|γ| ≤ n`.
    pub fn up_to(&self, n: usize) -> impl Iterator<Item = &SpectrumRow> {
        self.rows.iter().filter(move |r| r.period() <= n)
    }

    /// Rows with `|γ| = n`.
    pub fn with_period(&self, n: usize) -> impl Iterator<Item = &SpectrumRow> {
        self.rows.iter().filter(move |r| r.period() == n)
    }

    /// Errors unless every word length up to `n` is present.
    pub fn require(&self, n: usize) -> Result<()> {
        if n > self.n_max() {
            return Err(Error::IncompleteSpectrum(format!(
                "word length {n} requested but the census stops at {}",
                self.n_max()
            )));
        }
        Ok(())
    }

    pub fn find(&self, necklace: &Necklace) -> Option<&SpectrumRow> {
        self.rows
            .binary_search_by(|r| {
                (r.period(), r.necklace.symbols()).cmp(&(necklace.period(), necklace.symbols()))
            })
            .ok()
            .map(|i| &self.rows[i])
    }

    fn rows_text(&self) -> String {
        let mut s = String::new();
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.necklace,
                r.period(),
                r.length,
                r.lambda_u,
                r.det_factor,
                r.residual
            );
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let body = self.rows_text();
        let checksum = sha256_hex(body.as_bytes());
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "# version={}", self.header.version);
        let _ = writeln!(s, "# geometry={}", self.header.geometry_hash);
        let _ = writeln!(s, "# kappa={}", self.header.kappa);
        let _ = writeln!(s, "# n_max={}", self.header.n_max);
        let _ = writeln!(s, "# rows={}", self.rows.len());
        let _ = writeln!(s, "# checksum={checksum}");
        let _ = writeln!(s, "{COLUMNS}");
        s.push_str(&body);
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn solve_rows(
    system: &ObstacleSystem,
    necklaces: &[Necklace],
    threads: usize,
    opts: &SolverOptions,
) -> Result<Vec<SpectrumRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<SpectrumRow>> = pool.install(|| {
        necklaces
            .par_iter()
            .map(|n| {
                let orbit = solve_cycle(system, n, opts)?;
                let st = poincare_map(system, &orbit)?;
                Ok(SpectrumRow {
                    necklace: n.clone(),
                    length: orbit.length,
                    lambda_u: st.lambda_u,
                    det_factor: st.det_factor,
                    residual: orbit.gradient_residual,
                })
            })
            .collect()
    });
    // first failure in census order, independent of scheduling
    results.into_iter().collect()
}

fn check_build_args(system: &ObstacleSystem, n_max: usize, threads: usize) -> Result<()> {
    if n_max < 2 {
        return Err(Error::InvalidArgument("n_max must be at least 2".into()));
    }
    if threads < 1 {
        return Err(Error::InvalidArgument("thread count must be at least 1".into()));
    }
    if system.len() > u8::MAX as usize {
        return Err(Error::Config("too many obstacles".into()));
    }
    Ok(())
}

/// Solves and linearizes every primitive orbit with `2 ≤ |γ| ≤ n_max`.
pub fn build_spectrum(
    system: &ObstacleSystem,
    n_max: usize,
    threads: usize,
    opts: &SolverOptions,
) -> Result<SpectrumDb> {
    check_build_args(system, n_max, threads)?;
    let necklaces: Vec<Necklace> = (2..=n_max)
        .flat_map(|m| enumerate_necklaces(system.len(), m))
        .collect();
    let rows = solve_rows(system, &necklaces, threads, opts)?;
    Ok(SpectrumDb {
        header: SpectrumHeader {
            geometry_hash: system.fingerprint(),
            kappa: system.len(),
            n_max,
            version: crate::VERSION.to_string(),
        },
        rows,
    })
}

/// Extends a census to `n_max`, reusing the rows already present.
pub fn extend_spectrum(
    db: SpectrumDb,
    system: &ObstacleSystem,
    n_max: usize,
    threads: usize,
    opts: &SolverOptions,
) -> Result<SpectrumDb> {
    check_build_args(system, n_max, threads)?;
    if db.header.geometry_hash != system.fingerprint() {
        return Err(Error::Store("cached spectrum belongs to a different geometry".into()));
    }
    if n_max <= db.n_max() {
        return Ok(db);
    }
    let necklaces: Vec<Necklace> = ((db.n_max() + 1)..=n_max)
        .flat_map(|m| enumerate_necklaces(system.len(), m))
        .collect();
    let fresh = solve_rows(system, &necklaces, threads, opts)?;
    let SpectrumDb { mut header, mut rows } = db;
    rows.extend(fresh);
    header.n_max = n_max;
    Ok(SpectrumDb { header, rows })
}

fn parse_header(lines: &[&str]) -> Result<(BTreeMap<String, String>, usize)> {
    if lines.first().map(|l| l.trim_end()) != Some(MAGIC) {
        return Err(Error::Store("missing spectrum file marker".into()));
    }
    let mut map = BTreeMap::new();
    let mut idx = 1;
    while idx < lines.len() && lines[idx].starts_with('#') {
        let kv = lines[idx].trim_start_matches('#').trim();
        if let Some((k, v)) = kv.split_once('=') {
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        idx += 1;
    }
    Ok((map, idx))
}

fn header_field<'a>(map: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str> {
    map.get(key)
        .map(String::as_str)
        .ok_or_else(|| Error::Store(format!("header lacks '{key}'")))
}

fn parse_float(field: Option<&str>, row: usize, what: &str) -> Result<f64> {
    field
        .ok_or_else(|| Error::Parse {
            row,
            reason: format!("missing {what}"),
        })?
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse {
            row,
            reason: format!("bad {what}: {e}"),
        })
}

/// Parses a spectrum file and validates it against `system`.
pub fn parse_spectrum(text: &str, system: &ObstacleSystem) -> Result<SpectrumDb> {
    let lines: Vec<&str> = text.lines().collect();
    let (map, mut idx) = parse_header(&lines)?;
    let geometry_hash = header_field(&map, "geometry")?.to_string();
    if geometry_hash != system.fingerprint() {
        return Err(Error::Store(
            "geometry hash mismatch: spectrum was built for a different obstacle set".into(),
        ));
    }
    let num = |key: &str| -> Result<usize> {
        header_field(&map, key)?
            .parse()
            .map_err(|_| Error::Store(format!("header field '{key}' is not an integer")))
    };
    let kappa = num("kappa")?;
    let n_max = num("n_max")?;
    let expected_rows = num("rows")?;
    let checksum = header_field(&map, "checksum")?.to_string();
    let version = header_field(&map, "version")?.to_string();
    if kappa != system.len() {
        return Err(Error::Store(format!(
            "spectrum has {kappa} obstacles, geometry has {}",
            system.len()
        )));
    }
    if lines.get(idx).map(|l| l.trim_end()) != Some(COLUMNS) {
        return Err(Error::Store("missing column header".into()));
    }
    idx += 1;

    let mut rows = Vec::with_capacity(expected_rows);
    let mut body = String::new();
    for (k, line) in lines[idx..].iter().enumerate() {
        let row = k + 1;
        if line.trim().is_empty() {
            continue;
        }
        body.push_str(line);
        body.push('\n');
        let mut fields = line.split(',');
        let word = fields.next().unwrap_or_default();
        let necklace = Necklace::parse(word).map_err(|e| Error::Parse {
            row,
            reason: e.to_string(),
        })?;
        if necklace.symbols() != crate::symbolic::parse_word(word)?.as_slice() {
            return Err(Error::Parse {
                row,
                reason: format!("word {word} is not in canonical form"),
            });
        }
        let m: usize = fields
            .next()
            .and_then(|f| f.trim().parse().ok())
            .ok_or_else(|| Error::Parse {
                row,
                reason: "bad period".into(),
            })?;
        if m != necklace.period() {
            return Err(Error::Parse {
                row,
                reason: format!("period {m} does not match word {word}"),
            });
        }
        let length = parse_float(fields.next(), row, "length")?;
        let lambda_u = parse_float(fields.next(), row, "lambda_u")?;
        let det_factor = parse_float(fields.next(), row, "det_factor")?;
        let residual = parse_float(fields.next(), row, "residual")?;
        if fields.next().is_some() {
            return Err(Error::Parse {
                row,
                reason: "too many fields".into(),
            });
        }
        if let Some(prev) = rows.last() {
            let prev: &SpectrumRow = prev;
            if (prev.period(), prev.necklace.symbols()) >= (m, necklace.symbols()) {
                return Err(Error::Parse {
                    row,
                    reason: "rows are not strictly sorted by (m, word)".into(),
                });
            }
        }
        rows.push(SpectrumRow {
            necklace,
            length,
            lambda_u,
            det_factor,
            residual,
        });
    }
    if rows.len() != expected_rows {
        return Err(Error::Parse {
            row: rows.len() + 1,
            reason: format!(
                "file truncated: header announces {expected_rows} rows, found {}",
                rows.len()
            ),
        });
    }
    if sha256_hex(body.as_bytes()) != checksum {
        return Err(Error::Store("row checksum mismatch".into()));
    }
    for m in 2..=n_max {
        let have = rows.iter().filter(|r| r.period() == m).count() as u64;
        let want = necklace_count(kappa, m)?;
        if have != want {
            return Err(Error::Store(format!(
                "word length {m}: {have} rows, expected {want}"
            )));
        }
    }
    if rows.iter().any(|r| r.period() > n_max) {
        return Err(Error::Store("rows exceed the announced n_max".into()));
    }
    Ok(SpectrumDb {
        header: SpectrumHeader {
            geometry_hash,
            kappa,
            n_max,
            version,
        },
        rows,
    })
}

pub fn load_spectrum(path: &Path, system: &ObstacleSystem) -> Result<SpectrumDb> {
    let text = std::fs::read_to_string(path)?;
    parse_spectrum(&text, system)
}
