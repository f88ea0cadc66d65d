//! Text and JSON formats for elements, symbols, metrics, matrices, spectra
//! and parametrix dumps.
//!
//! Element files hold one mode per line, `k_1 … k_n re im`, in the
//! lexicographic mode order. Blank lines and `#` comments are skipped.
//! Floats are written in the shortest form that reads back exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{Mode, MultiIndex, NCElement, Theta, TruncationSpec};
use crate::elliptic::{ParametrixJet, RiemannianMetric};
use crate::error::{Error, Result};
use crate::psido::OperatorMatrix;
use crate::spectral::SpectrumResult;
use crate::symbols::{PolynomialSymbol, Symbol};

pub fn element_to_string(u: &NCElement) -> String {
    let mut out = String::new();
    for (k, c) in u.iter() {
        for x in k.as_slice() {
            write!(out, "{x} ").unwrap();
        }
        writeln!(out, "{} {}", c.re, c.im).unwrap();
    }
    out
}

pub fn parse_element(text: &str, theta: &Theta) -> Result<NCElement> {
    let n = theta.dim();
    let mut coeffs = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != n + 2 {
            return Err(Error::Parse { line, msg: format!("expected {} fields, found {}", n + 2, fields.len()) });
        }
        let mut k = Vec::with_capacity(n);
        for f in &fields[..n] {
            k.push(f.parse::<i32>().map_err(|e| Error::Parse { line, msg: format!("mode `{f}`: {e}") })?);
        }
        let num = |f: &str| f.parse::<f64>().map_err(|e| Error::Parse { line, msg: format!("value `{f}`: {e}") });
        let c = Complex64::new(num(fields[n])?, num(fields[n + 1])?);
        if !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::Parse { line, msg: "non-finite coefficient".into() });
        }
        let k = Mode::from_slice(&k);
        if !seen.insert(k.clone()) {
            return Err(Error::Parse { line, msg: format!("mode {k:?} listed twice") });
        }
        coeffs.push((k, c));
    }
    NCElement::from_coeffs(theta, coeffs)
}

pub fn write_element(path: &Path, u: &NCElement) -> Result<()> {
    fs::write(path, element_to_string(u))?;
    Ok(())
}

pub fn read_element(path: &Path, theta: &Theta) -> Result<NCElement> {
    parse_element(&fs::read_to_string(path)?, theta)
}

/// Pretty JSON with a trailing newline. Field order follows the struct
/// declaration, so equal values give equal bytes.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

fn resolve(base: &Path, file: &str) -> PathBuf {
    let p = Path::new(file);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn parent_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub alpha: Vec<u32>,
    pub element: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialRecord {
    pub n: usize,
    pub terms: Vec<TermRecord>,
}

/// Writes `<stem>.json` and one element file per term, named
/// `<stem>.a<α_1>_<α_2>….txt`, next to it.
pub fn write_polynomial(path: &Path, p: &PolynomialSymbol) -> Result<()> {
    let dir = parent_dir(path);
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("symbol");
    let mut terms = Vec::new();
    for (alpha, a) in p.terms() {
        let tag: Vec<String> = alpha.0.iter().map(u32::to_string).collect();
        let file = format!("{stem}.a{}.txt", tag.join("_"));
        write_element(&dir.join(&file), a)?;
        terms.push(TermRecord { alpha: alpha.0.to_vec(), element: file });
    }
    let n = p.theta().dim();
    write_json(path, &PolynomialRecord { n, terms })
}

/// Reads a polynomial symbol; element paths are relative to the record.
pub fn read_polynomial(path: &Path, theta: &Theta) -> Result<PolynomialSymbol> {
    let rec: PolynomialRecord = serde_json::from_str(&fs::read_to_string(path)?)?;
    if rec.n != theta.dim() {
        return Err(Error::DimensionMismatch { expected: theta.dim(), got: rec.n });
    }
    let dir = parent_dir(path);
    let mut p = PolynomialSymbol::new(theta);
    for t in rec.terms {
        if t.alpha.len() != rec.n {
            return Err(Error::DimensionMismatch { expected: rec.n, got: t.alpha.len() });
        }
        let a = read_element(&resolve(&dir, &t.element), theta)?;
        p.add_term(MultiIndex::from_slice(&t.alpha), a)?;
    }
    Ok(p)
}

/// Metric document: an `n × n` table of element file names and the gap
/// required of the smallest eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub g: Vec<Vec<String>>,
    pub delta_gap: f64,
}

pub fn write_metric(path: &Path, metric: &RiemannianMetric, delta_gap: f64) -> Result<()> {
    let dir = parent_dir(path);
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("metric");
    let n = metric.dim();
    let mut g = vec![vec![String::new(); n]; n];
    for (i, row) in g.iter_mut().enumerate() {
        for (j, name) in row.iter_mut().enumerate() {
            *name = format!("{stem}.g{}{}.txt", i + 1, j + 1);
            write_element(&dir.join(&*name), metric.g(i, j))?;
        }
    }
    write_json(path, &MetricRecord { g, delta_gap })
}

pub fn read_metric(path: &Path, theta: &Theta, trunc: TruncationSpec) -> Result<RiemannianMetric> {
    let rec: MetricRecord = serde_json::from_str(&fs::read_to_string(path)?)?;
    read_metric_table(&parent_dir(path), &rec, theta, trunc)
}

/// Loads a metric table whose file names are relative to `base`.
pub fn read_metric_table(base: &Path, rec: &MetricRecord, theta: &Theta, trunc: TruncationSpec) -> Result<RiemannianMetric> {
    let n = theta.dim();
    if rec.g.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rec.g.len() });
    }
    let mut g = Vec::with_capacity(n);
    for row in &rec.g {
        if row.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: row.len() });
        }
        g.push(row.iter().map(|f| read_element(&resolve(base, f), theta)).collect::<Result<Vec<_>>>()?);
    }
    let opts = crate::algebra::FuncalcOptions { gap: rec.delta_gap, ..Default::default() };
    RiemannianMetric::new(g, trunc, &opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixManifest {
    pub n: usize,
    pub radius: u32,
    pub margin: u32,
    pub trusted_radius: u32,
    pub size: usize,
    pub nnz: usize,
    /// Row and column `i` belong to `basis[i]`.
    pub basis: Vec<Vec<i32>>,
    pub data: String,
}

/// Writes the nonzero entries as `row,col,re,im` to `<stem>.csv` and the
/// index manifest to `<stem>.json`.
pub fn write_operator_matrix(dir: &Path, stem: &str, op: &OperatorMatrix) -> Result<MatrixManifest> {
    let mut csv = String::from("row,col,re,im\n");
    let mut entries: Vec<_> = op.matrix().triplets().collect();
    entries.sort_by_key(|&(i, j, _)| (i, j));
    for (i, j, v) in entries {
        writeln!(csv, "{i},{j},{},{}", v.re, v.im).unwrap();
    }
    let data = format!("{stem}.csv");
    fs::write(dir.join(&data), csv)?;
    let manifest = MatrixManifest {
        n: op.theta().dim(),
        radius: op.trunc().radius,
        margin: op.trunc().margin,
        trusted_radius: op.trusted_radius(),
        size: op.basis().len(),
        nnz: op.matrix().nnz(),
        basis: op.basis().modes().map(|k| k.as_slice().to_vec()).collect(),
        data,
    };
    write_json(&dir.join(format!("{stem}.json")), &manifest)?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMetadata {
    pub radius: u32,
    pub window: u32,
    pub validity_cut: Option<f64>,
    pub solver: String,
    pub hermitian_defect: f64,
    pub count: usize,
    pub seed: Option<u64>,
    pub data: String,
}

/// `index,re,im` rows in `<stem>.csv` plus `<stem>.json`.
pub fn write_spectrum(dir: &Path, stem: &str, spec: &SpectrumResult, seed: Option<u64>) -> Result<SpectrumMetadata> {
    let data = format!("{stem}.csv");
    write_series(&dir.join(&data), &["index", "re", "im"], spec.eigenvalues.iter().enumerate().map(|(i, z)| {
        vec![i.to_string(), z.re.to_string(), z.im.to_string()]
    }))?;
    let meta = SpectrumMetadata {
        radius: spec.radius,
        window: spec.window,
        validity_cut: spec.validity_cut,
        solver: spec.solver.clone(),
        hermitian_defect: spec.hermitian_defect,
        count: spec.len(),
        seed,
        data,
    };
    write_json(&dir.join(format!("{stem}.json")), &meta)?;
    Ok(meta)
}

/// Generic CSV series with a header row.
pub fn write_series<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Lattice values of the first `terms` parametrix components on the given
/// shells, one row per coefficient:
/// `shell,component,xi_1..xi_n,mode_1..mode_n,re,im`.
pub fn parametrix_dump(jet: &ParametrixJet, shells: &[u32], terms: usize) -> Result<String> {
    let n = jet.symbol().theta().dim();
    let mut out = String::from("shell,component");
    for i in 1..=n {
        write!(out, ",xi_{i}").unwrap();
    }
    for i in 1..=n {
        write!(out, ",mode_{i}").unwrap();
    }
    out.push_str(",re,im\n");
    for &r in shells {
        for xi in crate::algebra::shell_modes(n, r) {
            let comps = jet.components_at(&xi.to_f64())?;
            for (j, c) in comps.iter().take(terms).enumerate() {
                for (k, v) in c.iter() {
                    write!(out, "{r},{j}").unwrap();
                    for x in xi.as_slice() {
                        write!(out, ",{x}").unwrap();
                    }
                    for x in k.as_slice() {
                        write!(out, ",{x}").unwrap();
                    }
                    writeln!(out, ",{},{}", v.re, v.im).unwrap();
                }
            }
        }
    }
    Ok(out)
}
