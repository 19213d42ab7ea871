//! Carnot algebras, their isometry algebras and the extended algebra
//! `g = g_- ⊕ g_0`.
//!
//! Basis convention: layers are ordered from degree −1 downward and each
//! layer keeps the order of the spec. Every downstream index (cochains,
//! frames, reports) follows this order.

use std::ops::Range;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::exactla::{decompose, gram_pinv, induced_gram, IPSpace, LinAlgError, Mat, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CarnotError {
    #[error("malformed spec: {0}")]
    Malformed(String),
    #[error("bracket [{left}, {right}] is not antisymmetric")]
    NotAntisymmetric { left: String, right: String },
    #[error("Jacobi identity fails on ({0}, {1}, {2})")]
    JacobiFails(String, String, String),
    #[error("not stratified: [g_-1, g_-{layer}] does not span g_-{}", layer + 1)]
    NotStratified { layer: usize },
    #[error("bracket [{left}, {right}] violates the grading")]
    GradingViolation { left: String, right: String },
    #[error("gram_minus1 is not symmetric positive definite: {0}")]
    GramNotSPD(LinAlgError),
}

/// One structure constant entry `[b_left, b_right] = result`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BracketEntry {
    pub left: usize,
    pub right: usize,
    pub result: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarnotSpec {
    pub step: usize,
    pub layer_dims: Vec<usize>,
    pub labels: Vec<String>,
    pub brackets: Vec<BracketEntry>,
    pub gram_minus1: Mat,
}

impl CarnotSpec {
    pub fn dim(&self) -> usize {
        self.layer_dims.iter().sum()
    }

    /// Labels `b1, b2, …` in basis order.
    pub fn default_labels(dim: usize) -> Vec<String> {
        (1..=dim).map(|i| format!("b{i}")).collect()
    }
}

/// Validated graded nilpotent Lie algebra with the induced inner product.
#[derive(Debug, Clone)]
pub struct CarnotAlgebra {
    spec: CarnotSpec,
    weights: Vec<usize>,
    layers: Vec<Range<usize>>,
    structure: Vec<Vec<Vec<Rat>>>,
    full_gram: IPSpace,
}

impl CarnotAlgebra {
    pub fn build(spec: CarnotSpec) -> Result<Self, CarnotError> {
        let n = spec.dim();
        if spec.step == 0 || spec.layer_dims.len() != spec.step || spec.layer_dims.contains(&0) {
            return Err(CarnotError::Malformed(format!(
                "step {} does not match layer_dims {:?}",
                spec.step, spec.layer_dims
            )));
        }
        if spec.labels.len() != n {
            return Err(CarnotError::Malformed(format!("{} labels for dimension {n}", spec.labels.len())));
        }
        let n1 = spec.layer_dims[0];
        if spec.gram_minus1.shape() != (n1, n1) {
            return Err(CarnotError::Malformed(format!("gram_minus1 must be {n1}x{n1}")));
        }
        let mut layers = Vec::new();
        let mut weights = Vec::with_capacity(n);
        let mut start = 0;
        for (j, &d) in spec.layer_dims.iter().enumerate() {
            layers.push(start..start + d);
            weights.extend(std::iter::repeat_n(j + 1, d));
            start += d;
        }
        let names = spec.labels.clone();
        let label = |i: usize| names[i].clone();

        let mut structure: Vec<Vec<Option<Vec<Rat>>>> = vec![vec![None; n]; n];
        for e in &spec.brackets {
            if e.left >= n || e.right >= n || e.result.len() != n {
                return Err(CarnotError::Malformed(format!(
                    "bracket entry ({}, {}) out of range",
                    e.left, e.right
                )));
            }
            if e.left == e.right {
                if e.result.iter().any(|c| !c.is_zero()) {
                    return Err(CarnotError::NotAntisymmetric { left: label(e.left), right: label(e.right) });
                }
                continue;
            }
            let neg: Vec<Rat> = e.result.iter().map(|c| -c).collect();
            for (a, b, v) in [(e.left, e.right, e.result.clone()), (e.right, e.left, neg)] {
                match &structure[a][b] {
                    Some(existing) if *existing != v => {
                        return Err(CarnotError::NotAntisymmetric { left: label(e.left), right: label(e.right) })
                    }
                    _ => structure[a][b] = Some(v),
                }
            }
        }
        let structure: Vec<Vec<Vec<Rat>>> = structure
            .into_iter()
            .map(|row| row.into_iter().map(|v| v.unwrap_or_else(|| vec![Rat::zero(); n])).collect())
            .collect();

        for a in 0..n {
            for b in 0..n {
                let target = weights[a] + weights[b];
                for (c, coef) in structure[a][b].iter().enumerate() {
                    if !coef.is_zero() && weights[c] != target {
                        return Err(CarnotError::GradingViolation { left: label(a), right: label(b) });
                    }
                }
            }
        }

        let mut alg = CarnotAlgebra {
            spec,
            weights,
            layers,
            structure,
            full_gram: IPSpace::standard(n),
        };
        if let Some((a, b, c)) = alg.jacobi_witness() {
            return Err(CarnotError::JacobiFails(label(a), label(b), label(c)));
        }
        for j in 1..alg.step() {
            let mut cols = Vec::new();
            for a in alg.layer(1) {
                for b in alg.layer(j) {
                    cols.push(alg.project(&alg.structure[a][b], j + 1));
                }
            }
            let m = Mat::from_columns(alg.layer_dim(j + 1), &cols);
            if m.rank() < alg.layer_dim(j + 1) {
                return Err(CarnotError::NotStratified { layer: j });
            }
        }
        let g1 = IPSpace::new(alg.spec.gram_minus1.clone()).map_err(CarnotError::GramNotSPD)?;
        alg.full_gram = alg.compute_full_gram(g1);
        Ok(alg)
    }

    fn jacobi_witness(&self) -> Option<(usize, usize, usize)> {
        let n = self.dim();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let t1 = self.bracket(&unit(n, a), &self.structure[b][c]);
                    let t2 = self.bracket(&unit(n, b), &self.structure[c][a]);
                    let t3 = self.bracket(&unit(n, c), &self.structure[a][b]);
                    if t1.iter().zip(&t2).zip(&t3).any(|((x, y), z)| !(x + y + z).is_zero()) {
                        return Some((a, b, c));
                    }
                }
            }
        }
        None
    }

    fn compute_full_gram(&self, g1: IPSpace) -> IPSpace {
        let n = self.dim();
        let mut gram = Mat::zeros(n, n);
        for i in self.layer(1) {
            for j in self.layer(1) {
                gram[(i, j)] = g1.gram()[(i, j)].clone();
            }
        }
        for w in 2..=self.step() {
            let (pairs, l) = self.wedge_bracket_map(w);
            let dom = IPSpace::new(wedge_gram(&gram, &pairs)).expect("wedge gram of lower layers is positive definite");
            let induced = induced_gram(&l, &dom).expect("stratified algebra has surjective bracket");
            let r = self.layer(w);
            for (i, gi) in r.clone().enumerate() {
                for (j, gj) in r.clone().enumerate() {
                    gram[(gi, gj)] = induced.gram()[(i, j)].clone();
                }
            }
        }
        IPSpace::new(gram).expect("block diagonal of positive definite blocks")
    }

    /// Basis pairs `a < b` of `(∧² g_-)_{-w}` and the bracket map onto `g_{-w}`.
    pub fn wedge_bracket_map(&self, w: usize) -> (Vec<(usize, usize)>, Mat) {
        let n = self.dim();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|&(a, b)| self.weights[a] + self.weights[b] == w)
            .collect();
        let cols: Vec<Vec<Rat>> = pairs.iter().map(|&(a, b)| self.project(&self.structure[a][b], w)).collect();
        (pairs, Mat::from_columns(self.layer_dim(w), &cols))
    }

    /// `L⁺: g_{-w} → (∧² g_-)_{-w}`, the Gram pseudo-inverse of the bracket.
    ///
    /// Column `c` holds the coefficients of `L⁺(e_c)` over the returned pairs.
    pub fn selector(&self, w: usize) -> (Vec<(usize, usize)>, Mat) {
        let (pairs, l) = self.wedge_bracket_map(w);
        let dom = IPSpace::new(wedge_gram(self.full_gram.gram(), &pairs)).expect("positive definite");
        let r = self.layer(w);
        let cod = IPSpace::new(self.full_gram.gram().select_rows(&r.clone().collect::<Vec<_>>()).select_cols(&r.collect::<Vec<_>>()))
            .expect("positive definite");
        let lp = gram_pinv(&l, &dom, &cod).expect("shapes agree");
        (pairs, lp)
    }

    /// Components of `v` in layer `w`.
    fn project(&self, v: &[Rat], w: usize) -> Vec<Rat> {
        self.layer(w).map(|i| v[i].clone()).collect()
    }

    pub fn spec(&self) -> &CarnotSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn step(&self) -> usize {
        self.spec.step
    }

    /// Weight `j` of the basis vector `i ∈ g_{-j}`.
    pub fn weight(&self, i: usize) -> usize {
        self.weights[i]
    }

    pub fn weights(&self) -> &[usize] {
        &self.weights
    }

    /// Index range of `g_{-w}` (w ≥ 1).
    pub fn layer(&self, w: usize) -> Range<usize> {
        self.layers[w - 1].clone()
    }

    pub fn layer_dim(&self, w: usize) -> usize {
        self.spec.layer_dims[w - 1]
    }

    pub fn label(&self, i: usize) -> &str {
        &self.spec.labels[i]
    }

    /// `[b_a, b_b]` in the basis.
    pub fn structure(&self, a: usize, b: usize) -> &[Rat] {
        &self.structure[a][b]
    }

    pub fn bracket(&self, u: &[Rat], v: &[Rat]) -> Vec<Rat> {
        let n = self.dim();
        let mut out = vec![Rat::zero(); n];
        for (a, ua) in u.iter().enumerate() {
            if ua.is_zero() {
                continue;
            }
            for (b, vb) in v.iter().enumerate() {
                if vb.is_zero() {
                    continue;
                }
                let f = ua * vb;
                for (c, s) in self.structure[a][b].iter().enumerate() {
                    if !s.is_zero() {
                        out[c] += &f * s;
                    }
                }
            }
        }
        out
    }

    /// Induced inner product on all of `g_-`.
    pub fn full_gram(&self) -> &IPSpace {
        &self.full_gram
    }

    pub fn induced_inner_products(&self) -> &IPSpace {
        &self.full_gram
    }

    /// Basis of the degree-zero derivations that are skew on `g_{-1}`.
    pub fn isometry_algebra(&self) -> Vec<Derivation> {
        let n = self.dim();
        // unknowns D[r][c] with r, c in the same layer
        let mut var = vec![vec![None; n]; n];
        let mut nv = 0;
        for c in 0..n {
            for r in 0..n {
                if self.weights[r] == self.weights[c] {
                    var[r][c] = Some(nv);
                    nv += 1;
                }
            }
        }
        let mut rows: Vec<Vec<Rat>> = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                for r in 0..n {
                    let mut row = vec![Rat::zero(); nv];
                    for (c, s) in self.structure[a][b].iter().enumerate() {
                        if let (false, Some(v)) = (s.is_zero(), var[r][c]) {
                            row[v] += s;
                        }
                    }
                    for c in 0..n {
                        if let Some(v) = var[c][a] {
                            row[v] -= &self.structure[c][b][r];
                        }
                        if let Some(v) = var[c][b] {
                            row[v] -= &self.structure[a][c][r];
                        }
                    }
                    if row.iter().any(|x| !x.is_zero()) {
                        rows.push(row);
                    }
                }
            }
        }
        let g = self.full_gram.gram();
        for i in self.layer(1) {
            for j in self.layer(1) {
                if j < i {
                    continue;
                }
                let mut row = vec![Rat::zero(); nv];
                for k in self.layer(1) {
                    row[var[k][j].unwrap()] += &g[(i, k)];
                    row[var[k][i].unwrap()] += &g[(j, k)];
                }
                rows.push(row);
            }
        }
        let system = if rows.is_empty() { Mat::zeros(0, nv) } else { Mat::from_rows(rows) };
        let kernel = decompose(&system).kernel_basis;
        (0..kernel.cols())
            .map(|k| {
                let v = kernel.column(k);
                let mut m = Mat::zeros(n, n);
                for r in 0..n {
                    for c in 0..n {
                        if let Some(i) = var[r][c] {
                            m[(r, c)] = v[i].clone();
                        }
                    }
                }
                // scale so the first nonzero entry (column-major) is one
                let lead = (0..n)
                    .flat_map(|c| (0..n).map(move |r| (r, c)))
                    .map(|rc| m[rc].clone())
                    .find(|x| !x.is_zero())
                    .expect("kernel vector is nonzero");
                Derivation { matrix: m.scale(&lead.recip()) }
            })
            .collect()
    }
}

fn unit(n: usize, i: usize) -> Vec<Rat> {
    let mut v = vec![Rat::zero(); n];
    v[i] = Rat::one();
    v
}

/// Degree-zero derivation of `g_-`, stored as its matrix on the basis.
/// `⟨a∧b, c∧d⟩ = ⟨a,c⟩⟨b,d⟩ − ⟨a,d⟩⟨b,c⟩` on the given pairs.
pub fn wedge_gram(gram: &Mat, pairs: &[(usize, usize)]) -> Mat {
    let mut dom = Mat::zeros(pairs.len(), pairs.len());
    for (p, &(a, b)) in pairs.iter().enumerate() {
        for (q, &(c, d)) in pairs.iter().enumerate() {
            dom[(p, q)] = &gram[(a, c)] * &gram[(b, d)] - &gram[(a, d)] * &gram[(b, c)];
        }
    }
    dom
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub matrix: Mat,
}

impl Derivation {
    pub fn apply(&self, v: &[Rat]) -> Vec<Rat> {
        self.matrix.mul_vec(v)
    }

    pub fn commutator(&self, other: &Derivation) -> Derivation {
        Derivation { matrix: self.matrix.mul(&other.matrix).sub(&other.matrix.mul(&self.matrix)) }
    }

    /// Exact Leibniz residual over all basis pairs.
    pub fn is_derivation_of(&self, alg: &CarnotAlgebra) -> bool {
        let n = alg.dim();
        (0..n).all(|a| {
            (0..n).all(|b| {
                let lhs = self.apply(alg.structure(a, b));
                let da = self.matrix.column(a);
                let db = self.matrix.column(b);
                let r1 = alg.bracket(&da, &unit(n, b));
                let r2 = alg.bracket(&unit(n, a), &db);
                lhs.iter().zip(r1.iter().zip(&r2)).all(|(l, (x, y))| *l == x + y)
            })
        })
    }

    pub fn restrict_to_layer(&self, alg: &CarnotAlgebra, w: usize) -> Mat {
        let idx: Vec<usize> = alg.layer(w).collect();
        self.matrix.select_rows(&idx).select_cols(&idx)
    }
}

/// How `g_0` is given an inner product as a subspace of `g_- ⊗ g_-*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum G0Gram {
    /// Frobenius pairing with the full induced gram of `g_-`.
    #[default]
    Full,
    /// Frobenius pairing of the restrictions to `g_{-1}` only.
    Horizontal,
}

/// `g = g_- ⊕ g_0`; basis is `g_-` followed by the `g_0` derivations.
#[derive(Debug, Clone)]
pub struct ExtendedAlgebra {
    minus: CarnotAlgebra,
    g0: Vec<Derivation>,
    degrees: Vec<i64>,
    table: Vec<Vec<Vec<Rat>>>,
    g0_structure: Vec<Vec<Vec<Rat>>>,
    gram: IPSpace,
}

impl ExtendedAlgebra {
    pub fn extend(minus: CarnotAlgebra, g0: Vec<Derivation>) -> Result<Self, CarnotError> {
        Self::extend_with(minus, g0, G0Gram::Full)
    }

    pub fn extend_with(minus: CarnotAlgebra, g0: Vec<Derivation>, convention: G0Gram) -> Result<Self, CarnotError> {
        let n = minus.dim();
        let m = g0.len();
        let dim = n + m;
        // coordinates of commutators in the g_0 basis
        let flat: Vec<Vec<Rat>> = g0.iter().map(|d| d.matrix.entries().to_vec()).collect();
        let basis = Mat::from_columns(n * n, &flat);
        let mut g0_structure = vec![vec![vec![Rat::zero(); m]; m]; m];
        for i in 0..m {
            for j in 0..m {
                let c = g0[i].commutator(&g0[j]);
                let x = basis.solve(c.matrix.entries()).ok_or_else(|| {
                    CarnotError::Malformed(format!("g_0 basis not closed under commutator ({i}, {j})"))
                })?;
                g0_structure[i][j] = x;
            }
        }
        let mut table = vec![vec![vec![Rat::zero(); dim]; dim]; dim];
        for a in 0..n {
            for b in 0..n {
                table[a][b][..n].clone_from_slice(minus.structure(a, b));
            }
        }
        for (s, d) in g0.iter().enumerate() {
            for a in 0..n {
                let col = d.matrix.column(a);
                for (c, v) in col.into_iter().enumerate() {
                    table[n + s][a][c] = v.clone();
                    table[a][n + s][c] = -v;
                }
            }
            for t in 0..m {
                for (u, v) in g0_structure[s][t].iter().enumerate() {
                    table[n + s][n + t][n + u] = v.clone();
                }
            }
        }
        let mut degrees: Vec<i64> = minus.weights().iter().map(|&w| -(w as i64)).collect();
        degrees.extend(std::iter::repeat_n(0, m));

        let g = minus.full_gram();
        let (gm, gm_inv) = match convention {
            G0Gram::Full => (g.gram().clone(), g.gram_inv().clone()),
            G0Gram::Horizontal => {
                let idx: Vec<usize> = minus.layer(1).collect();
                let g1 = g.gram().select_rows(&idx).select_cols(&idx);
                let inv = g1.inverse().expect("spd");
                (g1, inv)
            }
        };
        let restrict = |d: &Derivation| match convention {
            G0Gram::Full => d.matrix.clone(),
            G0Gram::Horizontal => d.restrict_to_layer(&minus, 1),
        };
        let mut g0_gram = Mat::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                let di = restrict(&g0[i]);
                let dj = restrict(&g0[j]);
                g0_gram[(i, j)] = di.transpose().mul(&gm).mul(&dj).mul(&gm_inv).trace();
            }
        }
        let g0_space = if m == 0 {
            IPSpace::standard(0)
        } else {
            IPSpace::new(g0_gram).map_err(CarnotError::GramNotSPD)?
        };
        let gram = g.direct_sum(&g0_space);
        let ext = ExtendedAlgebra { minus, g0, degrees, table, g0_structure, gram };
        if let Some((a, b, c)) = ext.jacobi_witness() {
            return Err(CarnotError::JacobiFails(ext.label(a), ext.label(b), ext.label(c)));
        }
        Ok(ext)
    }

    /// Builds `g_-`, its isometry algebra and `g` in one go.
    pub fn from_spec(spec: CarnotSpec) -> Result<Self, CarnotError> {
        let minus = CarnotAlgebra::build(spec)?;
        let g0 = minus.isometry_algebra();
        Self::extend(minus, g0)
    }

    fn jacobi_witness(&self) -> Option<(usize, usize, usize)> {
        let d = self.dim();
        for a in 0..d {
            for b in a + 1..d {
                for c in b + 1..d {
                    let t1 = self.bracket(&self.unit(a), &self.table[b][c]);
                    let t2 = self.bracket(&self.unit(b), &self.table[c][a]);
                    let t3 = self.bracket(&self.unit(c), &self.table[a][b]);
                    if t1.iter().zip(&t2).zip(&t3).any(|((x, y), z)| !(x + y + z).is_zero()) {
                        return Some((a, b, c));
                    }
                }
            }
        }
        None
    }

    pub fn jacobi_holds(&self) -> bool {
        self.jacobi_witness().is_none()
    }

    pub fn minus(&self) -> &CarnotAlgebra {
        &self.minus
    }

    pub fn g0(&self) -> &[Derivation] {
        &self.g0
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn dim_minus(&self) -> usize {
        self.minus.dim()
    }

    pub fn dim_g0(&self) -> usize {
        self.g0.len()
    }

    /// Degree of basis vector `a` of `g` (negative on `g_-`, zero on `g_0`).
    pub fn degree(&self, a: usize) -> i64 {
        self.degrees[a]
    }

    pub fn label(&self, a: usize) -> String {
        let n = self.dim_minus();
        if a < n {
            self.minus.label(a).to_string()
        } else {
            format!("s{}", a - n + 1)
        }
    }

    pub fn unit(&self, a: usize) -> Vec<Rat> {
        unit(self.dim(), a)
    }

    /// `[e_a, e_b]` in `g`.
    pub fn structure(&self, a: usize, b: usize) -> &[Rat] {
        &self.table[a][b]
    }

    /// `[s_i, s_j]` in `g_0` coordinates.
    pub fn g0_structure(&self, i: usize, j: usize) -> &[Rat] {
        &self.g0_structure[i][j]
    }

    pub fn bracket(&self, u: &[Rat], v: &[Rat]) -> Vec<Rat> {
        let d = self.dim();
        let mut out = vec![Rat::zero(); d];
        for (a, ua) in u.iter().enumerate() {
            if ua.is_zero() {
                continue;
            }
            for (b, vb) in v.iter().enumerate() {
                if vb.is_zero() {
                    continue;
                }
                let f = ua * vb;
                for (c, s) in self.table[a][b].iter().enumerate() {
                    if !s.is_zero() {
                        out[c] += &f * s;
                    }
                }
            }
        }
        out
    }

    pub fn gram(&self) -> &IPSpace {
        &self.gram
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::{rat, ri};
    use crate::fixtures;

    #[test]
    fn heisenberg_accepted_with_unit_center() {
        let alg = CarnotAlgebra::build(fixtures::heisenberg23()).unwrap();
        assert_eq!(alg.full_gram().gram()[(2, 2)], ri(1));
    }

    #[test]
    fn antisymmetry_violation_rejected() {
        let mut spec = fixtures::heisenberg23();
        spec.brackets.push(BracketEntry { left: 1, right: 0, result: vec![ri(0), ri(0), ri(1)] });
        assert!(matches!(CarnotAlgebra::build(spec), Err(CarnotError::NotAntisymmetric { .. })));
    }

    #[test]
    fn missing_bracket_is_not_stratified() {
        let spec = CarnotSpec {
            step: 2,
            layer_dims: vec![2, 2],
            labels: CarnotSpec::default_labels(4),
            brackets: vec![BracketEntry { left: 0, right: 1, result: vec![ri(0), ri(0), ri(1), ri(0)] }],
            gram_minus1: Mat::identity(2),
        };
        assert!(matches!(CarnotAlgebra::build(spec), Err(CarnotError::NotStratified { layer: 1 })));
    }

    #[test]
    fn grading_and_gram_violations() {
        let mut spec = fixtures::heisenberg23();
        spec.brackets[0].result = vec![ri(1), ri(0), ri(1)];
        assert!(matches!(CarnotAlgebra::build(spec), Err(CarnotError::GradingViolation { .. })));
        let mut spec = fixtures::heisenberg23();
        spec.gram_minus1 = Mat::from_i64(&[&[1, 2], &[2, 1]]);
        assert!(matches!(CarnotAlgebra::build(spec), Err(CarnotError::GramNotSPD(_))));
    }

    #[test]
    fn jacobi_violation_rejected() {
        // free step-two on three generators plus [A1, B23] = C with the other
        // degree-three brackets zero
        let n = 7;
        let e = |i: usize| (0..n).map(|j| if i == j { ri(1) } else { ri(0) }).collect::<Vec<_>>();
        let spec = CarnotSpec {
            step: 3,
            layer_dims: vec![3, 3, 1],
            labels: CarnotSpec::default_labels(n),
            brackets: vec![
                BracketEntry { left: 0, right: 1, result: e(3) },
                BracketEntry { left: 0, right: 2, result: e(4) },
                BracketEntry { left: 1, right: 2, result: e(5) },
                BracketEntry { left: 0, right: 5, result: e(6) },
            ],
            gram_minus1: Mat::identity(3),
        };
        assert!(matches!(CarnotAlgebra::build(spec), Err(CarnotError::JacobiFails(..))));
    }

    #[test]
    fn rolling_and_free_grams() {
        let alg = CarnotAlgebra::build(fixtures::rolling235()).unwrap();
        let g = alg.full_gram().gram();
        assert_eq!(g[(3, 3)], ri(1));
        assert_eq!(g[(4, 4)], ri(1));
        assert_eq!(g[(3, 4)], ri(0));
        let alg = CarnotAlgebra::build(fixtures::free_step2(3)).unwrap();
        let idx: Vec<usize> = alg.layer(2).collect();
        let block = alg.full_gram().gram().select_rows(&idx).select_cols(&idx);
        assert_eq!(block, Mat::identity(3));
    }

    #[test]
    fn contact_grams() {
        let alg = CarnotAlgebra::build(fixtures::contact(&[ri(1), ri(1)])).unwrap();
        assert_eq!(alg.full_gram().gram()[(4, 4)], rat(1, 2));
        let alg = CarnotAlgebra::build(fixtures::contact(&[ri(1), rat(1, 2)])).unwrap();
        assert_eq!(alg.full_gram().gram()[(4, 4)], rat(4, 5));
    }

    #[test]
    fn heisenberg_isometry_generator() {
        let alg = CarnotAlgebra::build(fixtures::heisenberg23()).unwrap();
        let g0 = alg.isometry_algebra();
        assert_eq!(g0.len(), 1);
        let s = &g0[0];
        assert_eq!(s.apply(&[ri(1), ri(0), ri(0)]), vec![ri(0), ri(1), ri(0)]);
        assert_eq!(s.apply(&[ri(0), ri(1), ri(0)]), vec![ri(-1), ri(0), ri(0)]);
        assert_eq!(s.apply(&[ri(0), ri(0), ri(1)]), vec![ri(0), ri(0), ri(0)]);
    }

    #[test]
    fn rolling_isometry_generator() {
        let alg = CarnotAlgebra::build(fixtures::rolling235()).unwrap();
        let g0 = alg.isometry_algebra();
        assert_eq!(g0.len(), 1);
        let s = &g0[0];
        let e = |i: usize| (0..5).map(|j| if i == j { ri(1) } else { ri(0) }).collect::<Vec<_>>();
        assert_eq!(s.apply(&e(0)), e(1));
        assert!(s.apply(&e(2)).iter().all(Zero::is_zero));
        assert_eq!(s.apply(&e(3)), e(4));
        assert_eq!(s.apply(&e(4)), e(3).iter().map(|x| -x).collect::<Vec<_>>());
    }

    #[test]
    fn free_step2_isometry_dimension() {
        for n1 in 2..=4 {
            let alg = CarnotAlgebra::build(fixtures::free_step2(n1)).unwrap();
            let g0 = alg.isometry_algebra();
            assert_eq!(g0.len(), n1 * (n1 - 1) / 2);
            for d in &g0 {
                assert!(d.is_derivation_of(&alg));
            }
        }
    }

    #[test]
    fn extended_brackets_heisenberg() {
        let ext = ExtendedAlgebra::from_spec(fixtures::heisenberg23()).unwrap();
        // [s, A1] = A2 and [A1, s] = -A2
        assert_eq!(ext.structure(3, 0), &[ri(0), ri(1), ri(0), ri(0)]);
        assert_eq!(ext.structure(0, 3), &[ri(0), ri(-1), ri(0), ri(0)]);
        assert!(ext.jacobi_holds());
    }

    #[test]
    fn extended_so3_commutators() {
        let ext = ExtendedAlgebra::from_spec(fixtures::free_step2(3)).unwrap();
        let n = ext.dim_minus();
        for i in 0..3 {
            for j in 0..3 {
                // commutator of matrices equals the table entry
                let c = ext.g0()[i].commutator(&ext.g0()[j]);
                let mut expect = Mat::zeros(n, n);
                for (k, v) in ext.g0_structure(i, j).iter().enumerate() {
                    expect = expect.add(&ext.g0()[k].matrix.scale(v));
                }
                assert_eq!(c.matrix, expect);
            }
        }
        assert!(ext.jacobi_holds());
    }
}
