//! File formats and commands of the `carnot` binary.
//!
//! Numbers are rational strings (`"3/4"`), never floats. Reports are JSON
//! objects whose keys are sorted, so identical inputs give byte-identical
//! output.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::carnot::{BracketEntry, CarnotAlgebra, CarnotError, CarnotSpec, ExtendedAlgebra};
use crate::cochain::{Cochain, ComplexOperators, ComplexOptions};
use crate::exactla::{parse_rat, rat_to_string, Mat, Rat};
use crate::frames::{ConnectionReport, FrameError, FrameModel, FrameSpec, PolyVec, DEFAULT_JET_DEGREE};
use crate::normalize::{self, Certificate, CurvatureData, NormalizeError, Rule};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Validation(String),
    #[error("inconsistent: {reason}")]
    Inconsistent { reason: String, residual: Vec<Rat> },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Inconsistent { .. } => 2,
            _ => 1,
        }
    }

    /// Report written in place of the normal one on failure.
    pub fn report(&self, command: &str) -> Report {
        let mut results = Map::new();
        results.insert("error".into(), Value::String(self.to_string()));
        if let CliError::Inconsistent { residual, .. } = self {
            results.insert("residual".into(), strings(residual));
        }
        Report { command: command.into(), inputs: vec![], results: Value::Object(results), certificates: vec![] }
    }
}

impl From<CarnotError> for CliError {
    fn from(e: CarnotError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<NormalizeError> for CliError {
    fn from(e: NormalizeError) -> Self {
        match e {
            NormalizeError::Inconsistent { reason, residual } => CliError::Inconsistent { reason, residual },
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<FrameError> for CliError {
    fn from(e: FrameError) -> Self {
        match e {
            FrameError::Normalize(n) => n.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BracketFile {
    pub left: String,
    pub right: String,
    pub result: std::collections::BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub step: usize,
    pub layer_dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub brackets: Vec<BracketFile>,
    pub gram_minus1: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SymbolRef {
    Path(String),
    Inline(AlgebraFile),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameFile {
    pub dim: usize,
    pub fields: Vec<Vec<String>>,
    pub point: Vec<String>,
    pub symbol: SymbolRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jet_degree: Option<u32>,
}

/// `κ̃` over the canonical basis of `c^2`: either every coefficient in
/// order, or sparse entries `{"value": "B", "form": ["A1", "A2"], "coeff": "1"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KappaFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<KappaEntry>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KappaEntry {
    pub value: String,
    pub form: Vec<String>,
    pub coeff: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub pass: bool,
    pub residual: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub results: Value,
    pub certificates: Vec<CheckReport>,
}

impl Report {
    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serialisable");
        s.push('\n');
        s
    }
}

fn strings(v: &[Rat]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(rat_to_string(x))).collect())
}

fn matrix(m: &Mat) -> Value {
    Value::Array((0..m.rows()).map(|r| strings(m.row(r))).collect())
}

fn certificate(prefix: &str, c: &Certificate) -> Vec<CheckReport> {
    c.checks
        .iter()
        .map(|k| CheckReport {
            name: format!("{prefix}{}", k.name),
            pass: k.pass,
            residual: k.residual.iter().map(rat_to_string).collect(),
        })
        .collect()
}

fn read(path: &Path) -> Result<(Vec<u8>, InputDigest), CliError> {
    let bytes = fs::read(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    let digest = InputDigest { name: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) };
    Ok((bytes, digest))
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, bytes: &[u8]) -> Result<T, CliError> {
    serde_json::from_slice(bytes).map_err(|e| CliError::Parse { path: path.display().to_string(), message: e.to_string() })
}

fn bad(path: &str, message: String) -> CliError {
    CliError::Parse { path: path.into(), message }
}

fn rational(path: &str, s: &str) -> Result<Rat, CliError> {
    parse_rat(s).ok_or_else(|| bad(path, format!("not a rational: {s:?}")))
}

impl AlgebraFile {
    fn labels_or_default(&self) -> Vec<String> {
        let n: usize = self.layer_dims.iter().sum();
        self.labels.clone().unwrap_or_else(|| CarnotSpec::default_labels(n))
    }

    /// Index of a basis name: a declared label, `b_i` or `bi` (1-based).
    fn index(&self, path: &str, name: &str, labels: &[String]) -> Result<usize, CliError> {
        if let Some(i) = labels.iter().position(|l| l == name) {
            return Ok(i);
        }
        let digits = name.strip_prefix("b_").or_else(|| name.strip_prefix('b'));
        match digits.and_then(|d| d.parse::<usize>().ok()) {
            Some(i) if (1..=labels.len()).contains(&i) => Ok(i - 1),
            _ => Err(bad(path, format!("unknown basis element {name:?}"))),
        }
    }

    pub fn to_spec(&self, path: &str) -> Result<CarnotSpec, CliError> {
        let labels = self.labels_or_default();
        let n = labels.len();
        let mut brackets = Vec::new();
        for (k, b) in self.brackets.iter().enumerate() {
            let left = self.index(path, &b.left, &labels)?;
            let right = self.index(path, &b.right, &labels)?;
            let mut result = vec![Rat::zero(); n];
            for (name, c) in &b.result {
                result[self.index(path, name, &labels)?] = rational(path, c)
                    .map_err(|e| bad(path, format!("brackets[{k}]: {e}")))?;
            }
            brackets.push(BracketEntry { left, right, result });
        }
        let rows = self
            .gram_minus1
            .iter()
            .map(|r| r.iter().map(|s| rational(path, s)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        if rows.iter().any(|r| r.len() != rows.len()) {
            return Err(bad(path, "gram_minus1 must be square".into()));
        }
        let gram_minus1 = if rows.is_empty() { Mat::zeros(0, 0) } else { Mat::from_rows(rows) };
        Ok(CarnotSpec { step: self.step, layer_dims: self.layer_dims.clone(), labels, brackets, gram_minus1 })
    }

    /// Inverse of [`AlgebraFile::to_spec`] up to formatting.
    pub fn from_spec(spec: &CarnotSpec) -> Self {
        let labels = spec.labels.clone();
        let brackets = spec
            .brackets
            .iter()
            .map(|b| BracketFile {
                left: labels[b.left].clone(),
                right: labels[b.right].clone(),
                result: b
                    .result
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(i, c)| (labels[i].clone(), rat_to_string(c)))
                    .collect(),
            })
            .collect();
        let g = &spec.gram_minus1;
        AlgebraFile {
            step: spec.step,
            layer_dims: spec.layer_dims.clone(),
            labels: Some(labels),
            brackets,
            gram_minus1: (0..g.rows()).map(|r| g.row(r).iter().map(rat_to_string).collect()).collect(),
        }
    }
}

impl FrameFile {
    pub fn to_spec(&self, path: &str, symbol: CarnotSpec) -> Result<FrameSpec, CliError> {
        let fields = self
            .fields
            .iter()
            .enumerate()
            .map(|(i, f)| {
                if f.len() != self.dim {
                    return Err(bad(path, format!("fields[{i}] has {} components, expected {}", f.len(), self.dim)));
                }
                let refs: Vec<&str> = f.iter().map(String::as_str).collect();
                PolyVec::parse(&refs).map_err(|e| bad(path, format!("fields[{i}]: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let point = self.point.iter().map(|s| rational(path, s)).collect::<Result<Vec<_>, _>>()?;
        Ok(FrameSpec { dim: self.dim, fields, point, symbol, jet_degree: self.jet_degree.unwrap_or(DEFAULT_JET_DEGREE) })
    }

    pub fn from_spec(spec: &FrameSpec) -> Self {
        FrameFile {
            dim: spec.dim,
            fields: spec.fields.iter().map(|f| f.comps().iter().map(|c| c.to_string()).collect()).collect(),
            point: spec.point.iter().map(rat_to_string).collect(),
            symbol: SymbolRef::Inline(AlgebraFile::from_spec(&spec.symbol)),
            jet_degree: (spec.jet_degree != DEFAULT_JET_DEGREE).then_some(spec.jet_degree),
        }
    }
}

/// Reads an algebra file.
pub fn load_algebra(path: &Path) -> Result<(CarnotSpec, InputDigest), CliError> {
    let (bytes, digest) = read(path)?;
    let file: AlgebraFile = parse_json(path, &bytes)?;
    Ok((file.to_spec(&path.display().to_string())?, digest))
}

/// Reads a frame file; a symbol given as a path is resolved against the
/// frame file's directory.
pub fn load_frame(path: &Path) -> Result<(FrameSpec, Vec<InputDigest>), CliError> {
    let (bytes, digest) = read(path)?;
    let file: FrameFile = parse_json(path, &bytes)?;
    let mut digests = vec![digest];
    let symbol = match &file.symbol {
        SymbolRef::Inline(a) => a.to_spec(&path.display().to_string())?,
        SymbolRef::Path(p) => {
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            let sym: PathBuf = base.join(p);
            let (spec, d) = load_algebra(&sym)?;
            digests.push(d);
            spec
        }
    };
    Ok((file.to_spec(&path.display().to_string(), symbol)?, digests))
}

fn extended(spec: CarnotSpec) -> Result<Arc<ExtendedAlgebra>, CliError> {
    Ok(Arc::new(ExtendedAlgebra::from_spec(spec)?))
}

/// `check`: dimensions, gram, `g_0` and Tanaka rigidity.
pub fn cmd_check(path: &Path) -> Result<Report, CliError> {
    let (spec, digest) = load_algebra(path)?;
    let alg = CarnotAlgebra::build(spec.clone())?;
    let ext = extended(spec)?;
    let ops = ComplexOperators::with_options(ext.clone(), ComplexOptions { max_k: Some(1) });
    let g0: Vec<Value> = ext.g0().iter().map(|d| matrix(&d.matrix)).collect();
    let results = json!({
        "dim": alg.dim(),
        "layer_dims": alg.spec().layer_dims,
        "labels": alg.spec().labels,
        "full_gram": matrix(alg.full_gram().gram()),
        "dim_g0": ext.dim_g0(),
        "g0_basis": g0,
        "jacobi": ext.jacobi_holds(),
        "tanaka_rigidity": ops.tanaka_rigidity(),
    });
    Ok(Report { command: "check".into(), inputs: vec![digest], results, certificates: vec![] })
}

/// `complex --k`: slice dimensions of `c^k` and the identities of the complex.
pub fn cmd_complex(path: &Path, k: usize) -> Result<Report, CliError> {
    let (spec, digest) = load_algebra(path)?;
    let ext = extended(spec)?;
    let n = ext.dim_minus();
    if k > n {
        return Err(CliError::Validation(format!("form degree {k} exceeds dim g_- = {n}")));
    }
    let ops = ComplexOperators::with_options(ext.clone(), ComplexOptions { max_k: Some((k + 1).min(n)) });
    let slices: Vec<Value> = ops
        .subspace_dims(k)
        .map_err(|e| CliError::Validation(e.to_string()))?
        .into_iter()
        .map(|s| json!({"homogeneity": s.homogeneity, "total": s.total, "T": s.t, "dT": s.d_t, "P": s.p, "E0": s.e0}))
        .collect();
    let d_squared = k + 1 > ops.max_k() || ops.d(k + 1).compose(ops.d(k)).is_zero();
    let pi = ops.pi(k);
    let identities = json!({
        "d_squared_zero": d_squared,
        "db_squared_zero": k + 1 > ops.max_k() || ops.db(k + 1).compose(ops.db(k)).is_zero(),
        "pi_idempotent": pi.compose(pi) == *pi,
        "pi_self_adjoint": pi.adjoint() == *pi,
        "p_stabilises": ops.p_stabilises(k),
        "d_commutes_with_p_inf": k + 1 > ops.max_k() || ops.d(k).compose(ops.p_inf(k)) == ops.p_inf(k + 1).compose(ops.d(k)),
    });
    let results = json!({
        "k": k,
        "dim": ops.space(k).dim(),
        "slices": slices,
        "identities": identities,
    });
    Ok(Report { command: "complex".into(), inputs: vec![digest], results, certificates: vec![] })
}

fn cochain_entries(ops: &ComplexOperators, c: &Cochain) -> Value {
    let space = ops.space(c.k);
    let mut out = Map::new();
    for (i, x) in c.coeffs.iter().enumerate() {
        if !x.is_zero() {
            out.insert(space.label(ops.ext(), i), Value::String(rat_to_string(x)));
        }
    }
    Value::Object(out)
}

fn load_kappa(path: &Path, ops: &ComplexOperators) -> Result<(Cochain, InputDigest), CliError> {
    let (bytes, digest) = read(path)?;
    let file: KappaFile = parse_json(path, &bytes)?;
    let p = path.display().to_string();
    let c2 = ops.space(2);
    let mut kappa = c2.zero();
    match (&file.coefficients, &file.entries) {
        (Some(cs), None) => {
            if cs.len() != c2.dim() {
                return Err(bad(&p, format!("{} coefficients, c^2 has dimension {}", cs.len(), c2.dim())));
            }
            for (k, s) in kappa.coeffs.iter_mut().zip(cs) {
                *k = rational(&p, s)?;
            }
        }
        (None, Some(es)) => {
            let ext = ops.ext();
            let index = |name: &str| (0..ext.dim()).find(|&a| ext.label(a) == name);
            for (k, e) in es.iter().enumerate() {
                let a = index(&e.value).ok_or_else(|| bad(&p, format!("entries[{k}]: unknown value {:?}", e.value)))?;
                let form = e
                    .form
                    .iter()
                    .map(|f| index(f).filter(|&i| i < ext.dim_minus()))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| bad(&p, format!("entries[{k}]: unknown form element")))?;
                let Some((set, sign)) = crate::cochain::sort_with_sign(&form) else {
                    return Err(bad(&p, format!("entries[{k}]: repeated form element")));
                };
                let flat = c2.index(a, &set).ok_or_else(|| bad(&p, format!("entries[{k}]: not a 2-form")))?;
                let c = rational(&p, &e.coeff)?;
                kappa.coeffs[flat] += if sign < 0 { -c } else { c };
            }
        }
        _ => return Err(bad(&p, "give exactly one of \"coefficients\" and \"entries\"".into())),
    }
    Ok((kappa, digest))
}

/// `normalize`: `α1` and `κ1` for a reference curvature.
pub fn cmd_normalize(algebra: &Path, kappa: &Path, rule: Rule) -> Result<Report, CliError> {
    let (spec, d1) = load_algebra(algebra)?;
    let ext = extended(spec)?;
    let ops = ComplexOperators::with_options(ext, ComplexOptions { max_k: Some(2) });
    let (kt, d2) = load_kappa(kappa, &ops)?;
    let sol = normalize::solve_alpha1_with(&ops, &CurvatureData { kappa_tilde: kt }, rule)?;
    let d = &sol.diagnostics;
    let results = json!({
        "rule": format!("{rule:?}").to_lowercase(),
        "alpha_1": cochain_entries(&ops, &sol.alpha_1),
        "kappa_1": cochain_entries(&ops, &sol.kappa_1),
        "diagnostics": {
            "unknowns": d.unknowns,
            "equations": d.equations,
            "rank": d.rank,
            "solution_space_dim": d.solution_space_dim,
        },
    });
    let cert = normalize::certify(&ops, &sol.kappa_1);
    Ok(Report { command: "normalize".into(), inputs: vec![d1, d2], results, certificates: certificate("", &cert) })
}

fn connection_results(model: &FrameModel, r: &ConnectionReport) -> Value {
    let ext = model.ext();
    let n = ext.dim_minus();
    let label = |a: usize| ext.label(a);
    let by_label = |rows: &[Vec<Rat>]| -> Value {
        Value::Object(rows.iter().enumerate().map(|(a, v)| (label(a), strings(v))).collect())
    };
    let pair_label = |&(a, b): &(usize, usize)| format!("{}^{}", label(a), label(b));
    let by_pair = |rows: &[Vec<Rat>]| -> Value {
        Value::Object(r.pairs.iter().zip(rows).map(|(p, v)| (pair_label(p), strings(v))).collect())
    };
    let connection: Map<String, Value> = r.connection.iter().enumerate().map(|(a, m)| (label(a), matrix(m))).collect();
    let g0: Vec<String> = (n..ext.dim()).map(label).collect();
    json!({
        "point": strings(&r.point),
        "growth": r.growth,
        "g0_labels": g0,
        "grading": by_label(&r.grading),
        "mu": by_label(&r.mu),
        "connection": Value::Object(connection),
        "torsion": by_pair(&r.torsion),
        "minimal_torsion": by_pair(&r.minimal_torsion),
        "curvature": by_pair(&r.curvature),
        "kappa": cochain_entries(model.ops(), &r.kappa),
    })
}

/// `frame`: canonical connection of a polynomial model at its base point.
pub fn cmd_frame(path: &Path) -> Result<Report, CliError> {
    let (spec, digests) = load_frame(path)?;
    let model = FrameModel::new(spec)?;
    let (_, r) = model.solve(None)?;
    let mut certificates = certificate("cartan.", &r.cartan_certificate);
    certificates.extend(certificate("manifold.", &r.manifold_certificate));
    Ok(Report { command: "frame".into(), inputs: digests, results: connection_results(&model, &r), certificates })
}
