//! Polynomial models of sub-Riemannian manifolds with constant symbol.
//!
//! A model is a horizontal frame `X_1 … X_{n1}` of polynomial vector fields
//! on `ℝⁿ`, declared orthonormal and aligned with the basis of `g_{-1}` of a
//! given Carnot algebra. Everything is computed in that gauge: the graded
//! frame `F_D`, the connection values `ω(F_D) ∈ g_0` and the curvature are
//! truncated Taylor expansions around the base point `p`, exact through the
//! order they carry.

pub mod oracle;
pub mod poly;

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::carnot::{CarnotError, CarnotSpec, ExtendedAlgebra};
use crate::cochain::{Cochain, ComplexOperators, ComplexOptions};
use crate::exactla::{gram_pinv, IPSpace, Mat, Rat};
use crate::normalize::{self, Certificate, Check, CurvatureData, DegreeOneSystem, NormalizeError};

pub use poly::{bracket, Jet, JetField, JetMat, Monomial, Poly, PolyError, PolyVec};
use poly::{field_add, field_apply, field_bracket, field_expand, field_scale, field_sub, field_value, field_zero};

pub const DEFAULT_JET_DEGREE: u32 = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameSpec {
    pub dim: usize,
    /// Horizontal frame, orthonormal for the sub-Riemannian metric; field `i`
    /// is the image of the `i`-th basis vector of `g_{-1}`.
    pub fields: Vec<PolyVec>,
    pub point: Vec<Rat>,
    pub symbol: CarnotSpec,
    /// Total degree at which input expansions are truncated.
    pub jet_degree: u32,
}

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("malformed frame: {0}")]
    Malformed(String),
    #[error("frame is not bracket generating at the base point (growth {growth:?})")]
    NotBracketGenerating { growth: Vec<usize> },
    #[error("realised symbol differs from the declared one: {0}")]
    SymbolMismatch(String),
    #[error("jet degree {degree} is too small: {what} is unknown at the base point")]
    JetDegreeTooSmall { degree: u32, what: String },
    #[error(transparent)]
    Carnot(#[from] CarnotError),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
}

fn validate(frame: &FrameSpec) -> Result<(), FrameError> {
    let n = frame.dim;
    if frame.point.len() != n {
        return Err(FrameError::Malformed(format!("point has {} coordinates, expected {n}", frame.point.len())));
    }
    if frame.fields.iter().any(|f| f.dim() != n) {
        return Err(FrameError::Malformed(format!("every field needs {n} components")));
    }
    if frame.symbol.dim() != n {
        return Err(FrameError::Malformed(format!("symbol has dimension {}, manifold {n}", frame.symbol.dim())));
    }
    if frame.symbol.layer_dims.first() != Some(&frame.fields.len()) {
        return Err(FrameError::Malformed("number of fields differs from dim g_{-1}".into()));
    }
    Ok(())
}

/// Ranks at `p` of the iterated-bracket flag `E ⊂ E^{-2} ⊂ …`, until it fills `T_pM`.
pub fn growth_vector(frame: &FrameSpec) -> Result<Vec<usize>, FrameError> {
    validate(frame)?;
    let n = frame.dim;
    let p = &frame.point;
    let mut values: Vec<Vec<Rat>> = frame.fields.iter().map(|x| x.eval(p)).collect();
    let rank_of = |v: &[Vec<Rat>]| if v.is_empty() { 0 } else { Mat::from_columns(n, v).rank() };
    let mut rank = rank_of(&values);
    let mut growth = vec![rank];
    let mut level = frame.fields.clone();
    while rank < n {
        let mut next: Vec<PolyVec> = Vec::new();
        for x in &frame.fields {
            for v in &level {
                let b = bracket(x, v);
                if !b.is_zero() && !next.contains(&b) {
                    next.push(b);
                }
            }
        }
        values.extend(next.iter().map(|v| v.eval(p)));
        let r = rank_of(&values);
        if r == rank {
            return Err(FrameError::NotBracketGenerating { growth });
        }
        rank = r;
        growth.push(rank);
        level = next;
    }
    Ok(growth)
}

/// Graded frame, connection and curvature of one extension.
#[derive(Debug, Clone)]
pub struct Extension {
    /// `F_D` for every basis vector `D` of `g_-`.
    pub frame: Vec<JetField>,
    /// `ω(F_D)` in the basis of `g_0`.
    pub omega: Vec<Vec<Jet>>,
    /// Coefficients of `κ` in the canonical basis of `c^2`.
    pub kappa: Vec<Jet>,
}

/// Values at `p` of an extended connection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionReport {
    pub point: Vec<Rat>,
    pub growth: Vec<usize>,
    /// `F_D(p)` in coordinates, for every `D`.
    pub grading: Vec<Vec<Rat>>,
    /// Taylor expansions of the graded frame around `p`, with their validity order.
    pub grading_jets: Vec<JetField>,
    /// `ω(F_D)(p)` in the basis of `g_0`.
    pub mu: Vec<Vec<Rat>>,
    /// `Γ_D` with `∇_{F_D} F_B = Σ_C Γ_D[C, B] F_C` at `p`.
    pub connection: Vec<Mat>,
    /// Basis pairs `(a, b)`, `a < b`, indexing the tables below.
    pub pairs: Vec<(usize, usize)>,
    /// `T(F_a, F_b)(p)` in frame coordinates.
    pub torsion: Vec<Vec<Rat>>,
    /// `T_0(a, b) = −[a, b]`.
    pub minimal_torsion: Vec<Vec<Rat>>,
    /// `R(F_a, F_b)(p)` in the basis of `g_0`.
    pub curvature: Vec<Vec<Rat>>,
    /// Cartan curvature `κ(p) ∈ c^2`.
    pub kappa: Cochain,
    pub cartan_certificate: Certificate,
    pub manifold_certificate: Certificate,
}

/// Orthogonal projection of scalar two-forms onto those satisfying the
/// cyclic identity `α(T_0(v1,v2),v3) + α(T_0(v3,v1),v2) + α(T_0(v2,v3),v1) = 0`.
#[derive(Debug, Clone)]
pub struct JacProjector {
    pairs: Vec<(usize, usize)>,
    proj: Mat,
}

impl JacProjector {
    /// `t0[k]` is `T_0(e_a, e_b)` for the `k`-th pair `a < b` in lexicographic order.
    pub fn new(t0: &[Vec<Rat>], gram: &IPSpace) -> Self {
        let n = gram.dim();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let triples: Vec<(usize, usize, usize)> =
            (0..n).flat_map(|i| (i + 1..n).flat_map(move |j| (j + 1..n).map(move |k| (i, j, k)))).collect();
        let pair_index = |a: usize, b: usize| pairs.iter().position(|&q| q == (a.min(b), a.max(b))).expect("pair");
        let t = |a: usize, b: usize| -> Vec<Rat> {
            if a < b {
                t0[pair_index(a, b)].clone()
            } else {
                t0[pair_index(b, a)].iter().map(|x| -x).collect()
            }
        };
        // e^{ab}(u, e_k) for u given in coordinates
        let form_on = |(a, b): (usize, usize), u: &[Rat], k: usize| -> Rat {
            let mut v = Rat::zero();
            if k == b {
                v += &u[a];
            }
            if k == a {
                v -= &u[b];
            }
            v
        };
        let mut cyc = Mat::zeros(triples.len(), pairs.len());
        for (r, &(i, j, k)) in triples.iter().enumerate() {
            let (tij, tki, tjk) = (t(i, j), t(k, i), t(j, k));
            for (c, &ab) in pairs.iter().enumerate() {
                cyc[(r, c)] = form_on(ab, &tij, k) + form_on(ab, &tki, j) + form_on(ab, &tjk, i);
            }
        }
        let form_gram = |(a, b): (usize, usize), (c, d): (usize, usize)| {
            let gi = gram.gram_inv();
            &gi[(a, c)] * &gi[(b, d)] - &gi[(a, d)] * &gi[(b, c)]
        };
        let mut fg = Mat::zeros(pairs.len(), pairs.len());
        for (r, &p) in pairs.iter().enumerate() {
            for (c, &q) in pairs.iter().enumerate() {
                fg[(r, c)] = form_gram(p, q);
            }
        }
        let dom = IPSpace::new(fg).expect("two-form gram is positive definite");
        let proj = if triples.is_empty() {
            Mat::identity(pairs.len())
        } else {
            let pinv = gram_pinv(&cyc, &dom, &IPSpace::standard(triples.len())).expect("shapes agree");
            Mat::identity(pairs.len()).sub(&pinv.mul(&cyc))
        };
        JacProjector { pairs, proj }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn matrix(&self) -> &Mat {
        &self.proj
    }

    /// Projects a scalar two-form given by its values on the pairs.
    pub fn project(&self, alpha: &[Rat]) -> Vec<Rat> {
        self.proj.mul_vec(alpha)
    }
}

/// `Π_Jac` applied to each component of a vector-valued two-form.
pub fn jac_projection(form: &[Vec<Rat>], t0: &[Vec<Rat>], gram: &IPSpace) -> Vec<Vec<Rat>> {
    let pr = JacProjector::new(t0, gram);
    let n = gram.dim();
    let mut out = vec![vec![Rat::zero(); n]; form.len()];
    for c in 0..n {
        let comp: Vec<Rat> = form.iter().map(|v| v[c].clone()).collect();
        for (k, x) in pr.project(&comp).into_iter().enumerate() {
            out[k][c] = x;
        }
    }
    out
}

/// A validated frame together with its symbol and the operators of its complex.
pub struct FrameModel {
    spec: FrameSpec,
    ext: Arc<ExtendedAlgebra>,
    ops: Arc<ComplexOperators>,
    growth: Vec<usize>,
    selectors: Vec<(Vec<(usize, usize)>, Mat)>,
    horizontal: Vec<JetField>,
}

impl FrameModel {
    pub fn new(spec: FrameSpec) -> Result<Self, FrameError> {
        let growth = growth_vector(&spec)?;
        let expected: Vec<usize> =
            spec.symbol.layer_dims.iter().scan(0, |acc, d| {
                *acc += d;
                Some(*acc)
            }).collect();
        if growth != expected {
            return Err(FrameError::SymbolMismatch(format!("growth vector {growth:?}, symbol expects {expected:?}")));
        }
        let ext = Arc::new(ExtendedAlgebra::from_spec(spec.symbol.clone())?);
        let ops = Arc::new(ComplexOperators::with_options(ext.clone(), ComplexOptions { max_k: Some(2) }));
        let selectors = (2..=ext.minus().step()).map(|w| ext.minus().selector(w)).collect();
        let order = spec.jet_degree as i32;
        let horizontal = spec.fields.iter().map(|x| field_expand(x, &spec.point, order)).collect();
        Ok(FrameModel { spec, ext, ops, growth, selectors, horizontal })
    }

    /// The same model with input expansions truncated at total degree `degree`.
    pub fn with_jet_degree(&self, degree: u32) -> FrameModel {
        let mut spec = self.spec.clone();
        spec.jet_degree = degree;
        let horizontal = spec.fields.iter().map(|x| field_expand(x, &spec.point, degree as i32)).collect();
        FrameModel {
            spec,
            ext: self.ext.clone(),
            ops: self.ops.clone(),
            growth: self.growth.clone(),
            selectors: self.selectors.clone(),
            horizontal,
        }
    }

    /// Runs `f` at the smallest jet degree, up to the configured one, at
    /// which the values it needs at the base point are determined.
    pub fn at_lowest_degree<T>(&self, f: impl Fn(&FrameModel) -> Result<T, FrameError>) -> Result<T, FrameError> {
        for degree in 1..self.spec.jet_degree {
            match f(&self.with_jet_degree(degree)) {
                Err(FrameError::JetDegreeTooSmall { .. }) => continue,
                other => return other,
            }
        }
        f(self)
    }

    pub fn spec(&self) -> &FrameSpec {
        &self.spec
    }

    pub fn ext(&self) -> &Arc<ExtendedAlgebra> {
        &self.ext
    }

    pub fn ops(&self) -> &ComplexOperators {
        &self.ops
    }

    pub fn growth(&self) -> &[usize] {
        &self.growth
    }

    fn nv(&self) -> usize {
        self.spec.dim
    }

    fn top(&self) -> i32 {
        self.spec.jet_degree as i32
    }

    /// `μ = 0` on every horizontal field.
    pub fn zero_mu(&self) -> Vec<Vec<Jet>> {
        vec![vec![Jet::zero(self.nv(), self.top()); self.ext.dim_g0()]; self.spec.fields.len()]
    }

    /// Expansion of polynomial coefficients `μ[i][m]` of `ω(X_i)` in the basis of `g_0`.
    pub fn expand_mu(&self, mu: &[Vec<Poly>]) -> Vec<Vec<Jet>> {
        mu.iter()
            .map(|row| row.iter().map(|f| Jet::expand(f, &self.spec.point, self.top())).collect())
            .collect()
    }

    /// `ω(b)` for `ω ∈ g_0` given by jet coefficients.
    fn act(&self, om: &[Jet], b: usize) -> Vec<Jet> {
        let n = self.ext.dim_minus();
        let order = om.iter().map(Jet::order).min().unwrap_or(self.top());
        let mut out = vec![Jet::zero(self.nv(), order); n];
        for (m, s) in self.ext.g0().iter().enumerate() {
            if om[m].is_zero() {
                continue;
            }
            for (c, o) in out.iter_mut().enumerate() {
                let x = &s.matrix[(c, b)];
                if !x.is_zero() {
                    *o = o.add(&om[m].scale(x));
                }
            }
        }
        out
    }

    fn frame_comb(&self, frame: &[JetField], coeffs: &[Jet]) -> JetField {
        let order = coeffs.iter().map(Jet::order).min().unwrap_or(self.top());
        let mut out = field_zero(self.nv(), order);
        for (d, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                out = field_add(&out, &frame[d].iter().map(|x| x.mul(c)).collect::<Vec<_>>());
            }
        }
        out
    }

    fn omega_comb(&self, omega: &[Vec<Jet>], coeffs: &[Jet]) -> Vec<Jet> {
        let order = coeffs.iter().map(Jet::order).min().unwrap_or(self.top());
        let mut out = vec![Jet::zero(self.nv(), order); self.ext.dim_g0()];
        for (d, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                for (o, w) in out.iter_mut().zip(&omega[d]) {
                    *o = o.add(&w.mul(c));
                }
            }
        }
        out
    }

    fn g0_bracket(&self, a: &[Jet], b: &[Jet]) -> Vec<Jet> {
        let m = self.ext.dim_g0();
        let order = a.iter().chain(b).map(Jet::order).min().unwrap_or(self.top());
        let mut out = vec![Jet::zero(self.nv(), order); m];
        for i in 0..m {
            for j in 0..m {
                if a[i].is_zero() || b[j].is_zero() {
                    continue;
                }
                let prod = a[i].mul(&b[j]);
                for (k, o) in out.iter_mut().enumerate() {
                    let s = &self.ext.g0_structure(i, j)[k];
                    if !s.is_zero() {
                        *o = o.add(&prod.scale(s));
                    }
                }
            }
        }
        out
    }

    fn apply_vec(x: &[Jet], f: &[Jet]) -> Vec<Jet> {
        f.iter().map(|g| field_apply(x, g)).collect()
    }

    fn vec_add(a: &[Jet], b: &[Jet]) -> Vec<Jet> {
        a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
    }

    fn vec_sub(a: &[Jet], b: &[Jet]) -> Vec<Jet> {
        a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
    }

    /// Builds the graded frame and connection from `μ` by imposing
    /// `κ(χ̃(C)) = 0` one layer at a time, then computes `κ`.
    pub fn extend(&self, mu: &[Vec<Jet>]) -> Result<Extension, FrameError> {
        let alg = self.ext.minus();
        let n = alg.dim();
        let nv = self.nv();
        let m = self.ext.dim_g0();
        let top = self.top();
        let mut frame: Vec<JetField> = vec![Vec::new(); n];
        let mut omega: Vec<Vec<Jet>> = vec![Vec::new(); n];
        for (i, a) in alg.layer(1).enumerate() {
            frame[a] = self.horizontal[i].clone();
            omega[a] = mu[i].clone();
        }
        let mut brackets: HashMap<(usize, usize), JetField> = HashMap::new();
        for w in 2..=alg.step() {
            let (pairs, lp) = &self.selectors[w - 2];
            for (ci, c) in alg.layer(w).enumerate() {
                let mut f = field_zero(nv, top);
                let mut om = vec![Jet::zero(nv, top); m];
                for (r, &(a, b)) in pairs.iter().enumerate() {
                    let coef = &lp[(r, ci)];
                    if coef.is_zero() {
                        continue;
                    }
                    let br = brackets.entry((a, b)).or_insert_with(|| field_bracket(&frame[a], &frame[b])).clone();
                    let wa_b = self.act(&omega[a], b);
                    let wb_a = self.act(&omega[b], a);
                    let t = field_add(&field_sub(&br, &self.frame_comb(&frame, &wa_b)), &self.frame_comb(&frame, &wb_a));
                    f = field_add(&f, &field_scale(&t, coef));
                    let mut u = Self::vec_sub(&Self::apply_vec(&frame[a], &omega[b]), &Self::apply_vec(&frame[b], &omega[a]));
                    u = Self::vec_add(&u, &self.g0_bracket(&omega[a], &omega[b]));
                    u = Self::vec_sub(&u, &self.omega_comb(&omega, &wa_b));
                    u = Self::vec_add(&u, &self.omega_comb(&omega, &wb_a));
                    om = Self::vec_add(&om, &u.iter().map(|x| x.scale(coef)).collect::<Vec<_>>());
                }
                frame[c] = f;
                omega[c] = om;
            }
        }
        if frame.iter().flatten().any(|j| j.order() < 0) {
            return Err(self.too_short("the graded frame"));
        }
        let theta = JetMat::from_columns(frame.clone())
            .inverse()
            .ok_or_else(|| FrameError::Malformed("graded frame is singular at the base point".into()))?;
        let c2 = self.ops.space(2);
        let mut kappa = vec![Jet::zero(nv, top); c2.dim()];
        for a in 0..n {
            for b in a + 1..n {
                let br = brackets.entry((a, b)).or_insert_with(|| field_bracket(&frame[a], &frame[b])).clone();
                let tv = theta.mul_vec(&br);
                let mut km = Self::vec_sub(&Self::vec_sub(&self.act(&omega[a], b), &self.act(&omega[b], a)), &tv);
                for (c, x) in alg.structure(a, b).iter().enumerate() {
                    if !x.is_zero() {
                        km[c] = km[c].add(&Jet::constant(nv, x.clone(), top));
                    }
                }
                let mut k0 = Self::vec_sub(&Self::apply_vec(&frame[a], &omega[b]), &Self::apply_vec(&frame[b], &omega[a]));
                k0 = Self::vec_sub(&k0, &self.omega_comb(&omega, &tv));
                k0 = Self::vec_add(&k0, &self.g0_bracket(&omega[a], &omega[b]));
                for (v, j) in km.into_iter().chain(k0).enumerate() {
                    kappa[c2.index(v, &[a, b]).expect("basis pair")] = j;
                }
            }
        }
        Ok(Extension { frame, omega, kappa })
    }

    fn too_short(&self, what: &str) -> FrameError {
        FrameError::JetDegreeTooSmall { degree: self.spec.jet_degree, what: what.into() }
    }

    /// `κ(p)` as an element of `c^2`.
    pub fn kappa_at_point(&self, e: &Extension) -> Result<Cochain, FrameError> {
        let coeffs = e.kappa.iter().map(Jet::value).collect::<Option<Vec<_>>>().ok_or_else(|| self.too_short("κ"))?;
        Ok(Cochain { k: 2, coeffs })
    }

    /// Rejects references whose curvature has components of non-positive homogeneity.
    fn check_symbol(&self, e: &Extension) -> Result<(), FrameError> {
        let c2 = self.ops.space(2);
        for (i, j) in e.kappa.iter().enumerate() {
            if c2.homogeneity(i) > 0 {
                continue;
            }
            if j.order() < 0 {
                return Err(self.too_short("the symbol"));
            }
            if !j.is_zero() {
                return Err(FrameError::SymbolMismatch(format!(
                    "component {} of the curvature has non-positive homogeneity and equals {} near p",
                    c2.label(&self.ext, i),
                    j.poly()
                )));
            }
        }
        Ok(())
    }

    /// Canonical connection: `μ = μ̃ + α1(A_i)` with `α1` the pointwise
    /// solution of the degree-one system for the reference `κ̃` of `μ̃`.
    pub fn solve(&self, reference: Option<&[Vec<Jet>]>) -> Result<(Extension, ConnectionReport), FrameError> {
        let zero = self.zero_mu();
        let mu_ref = reference.unwrap_or(&zero);
        let ref_ext = self.extend(mu_ref)?;
        self.check_symbol(&ref_ext)?;
        let c1 = self.ops.space(1);
        let c2 = self.ops.space(2);
        let sys = DegreeOneSystem::new(&self.ops)?;
        let s = sys.solution_operator()?;
        let res = sys.residual_operator()?;
        let slice: Vec<&Jet> = c2.slice(1).iter().map(|&i| &ref_ext.kappa[i]).collect();
        let order = slice.iter().map(|j| j.order()).min().unwrap_or(self.top());
        if order < 0 {
            return Err(self.too_short("κ̃1"));
        }
        let mut monomials: Vec<Monomial> = slice.iter().flat_map(|j| j.poly().terms().map(|(m, _)| *m)).collect();
        monomials.sort();
        monomials.dedup();
        let nv = self.nv();
        let mut alpha: Vec<Poly> = vec![Poly::zero(nv); s.rows()];
        for mono in monomials {
            let kt: Vec<Rat> = slice.iter().map(|j| j.poly().coeff(mono)).collect();
            let b = sys.bianchi.mul_vec(&kt);
            if b.iter().any(|x| !x.is_zero()) {
                return Err(NormalizeError::Inconsistent { reason: "∂κ̃1 ≠ 0 near p".into(), residual: b }.into());
            }
            let r = res.mul_vec(&kt);
            if r.iter().any(|x| !x.is_zero()) {
                return Err(NormalizeError::Inconsistent { reason: format!("degree-one system has no solution near p (degree {} of {order})", mono.degree()), residual: r }.into());
            }
            for (a, x) in alpha.iter_mut().zip(s.mul_vec(&kt)) {
                a.add_term(mono, x);
            }
        }
        // pointwise route through the normaliser, which must agree at p
        let kt0 = Cochain { k: 2, coeffs: ref_ext.kappa.iter().map(|j| j.value().unwrap_or_else(Rat::zero)).collect() };
        let at_p = normalize::solve_alpha1(&self.ops, &CurvatureData { kappa_tilde: kt0 })?;
        let alpha_p: Vec<Rat> = alpha.iter().map(Poly::constant_term).collect();
        debug_assert_eq!(c1.restrict(&at_p.alpha_1, 1), alpha_p);

        let n = self.ext.dim_minus();
        let mu: Vec<Vec<Jet>> = self
            .ext
            .minus()
            .layer(1)
            .map(|i| {
                (0..self.ext.dim_g0())
                    .map(|m| {
                        let flat = c1.index(n + m, &[i]).expect("basis element");
                        let corr = Jet::new(alpha[c1.position(flat)].clone(), order);
                        mu_ref[i][m].add(&corr)
                    })
                    .collect()
            })
            .collect();
        let ext = self.extend(&mu)?;
        let report = self.report(&ext)?;
        Ok((ext, report))
    }

    /// Values at `p` and both certificates.
    pub fn report(&self, e: &Extension) -> Result<ConnectionReport, FrameError> {
        let alg = self.ext.minus();
        let n = alg.dim();
        let kappa = self.kappa_at_point(e)?;
        let c2 = self.ops.space(2);
        let grading = e.frame.iter().map(|f| field_value(f)).collect::<Option<Vec<_>>>().ok_or_else(|| self.too_short("the grading"))?;
        let mu = e.omega.iter().map(|w| w.iter().map(Jet::value).collect::<Option<Vec<_>>>()).collect::<Option<Vec<_>>>().ok_or_else(|| self.too_short("ω"))?;
        let connection: Vec<Mat> = mu
            .iter()
            .map(|w| {
                let mut g = Mat::zeros(n, n);
                for (s, x) in self.ext.g0().iter().zip(w) {
                    g = g.add(&s.matrix.scale(x));
                }
                g
            })
            .collect();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let value = |a: usize, b: usize| c2.eval(&kappa, &[a, b]);
        let minimal_torsion: Vec<Vec<Rat>> = pairs.iter().map(|&(a, b)| alg.structure(a, b).iter().map(|x| -x).collect()).collect();
        let torsion: Vec<Vec<Rat>> = pairs
            .iter()
            .zip(&minimal_torsion)
            .map(|(&(a, b), t0)| value(a, b)[..n].iter().zip(t0).map(|(k, t)| k + t).collect())
            .collect();
        let curvature: Vec<Vec<Rat>> = pairs.iter().map(|&(a, b)| value(a, b)[n..].to_vec()).collect();
        let cartan_certificate = normalize::certify(&self.ops, &kappa);
        let manifold_certificate = self.manifold_certificate(&pairs, &torsion, &minimal_torsion, &curvature);
        Ok(ConnectionReport {
            point: self.spec.point.clone(),
            growth: self.growth.clone(),
            grading,
            grading_jets: e.frame.clone(),
            mu,
            connection,
            pairs,
            torsion,
            minimal_torsion,
            curvature,
            kappa,
            cartan_certificate,
            manifold_certificate,
        })
    }

    fn manifold_certificate(
        &self,
        pairs: &[(usize, usize)],
        torsion: &[Vec<Rat>],
        t0: &[Vec<Rat>],
        curvature: &[Vec<Rat>],
    ) -> Certificate {
        let alg = self.ext.minus();
        let n = alg.dim();
        let idx = |a: usize, b: usize| pairs.iter().position(|&q| q == (a, b)).expect("pair");
        // R(χ(·)) and (T − T_0)(χ(·)) on every lower layer
        let mut r_chi = Vec::new();
        let mut t_chi = Vec::new();
        for w in 2..=alg.step() {
            let (wp, lp) = &self.selectors[w - 2];
            for ci in 0..alg.layer_dim(w) {
                let mut r = vec![Rat::zero(); self.ext.dim_g0()];
                let mut t = vec![Rat::zero(); n];
                for (k, &(a, b)) in wp.iter().enumerate() {
                    let c = &lp[(k, ci)];
                    if c.is_zero() {
                        continue;
                    }
                    let q = idx(a, b);
                    for (x, y) in r.iter_mut().zip(&curvature[q]) {
                        *x += c * y;
                    }
                    for ((x, y), z) in t.iter_mut().zip(&torsion[q]).zip(&t0[q]) {
                        *x += c * (y - z);
                    }
                }
                r_chi.extend(r);
                t_chi.extend(t);
            }
        }
        // T_Jac as endomorphisms v ↦ T_Jac(v, ·)
        let gram = alg.full_gram();
        let tjac = jac_projection(torsion, t0, gram);
        let endo = |table: &[Vec<Rat>], v: usize| {
            let mut m = Mat::zeros(n, n);
            for u in 0..n {
                if u == v {
                    continue;
                }
                let (q, sign) = if v < u { (idx(v, u), Rat::one()) } else { (idx(u, v), -Rat::one()) };
                for c in 0..n {
                    m[(c, u)] = &table[q][c] * &sign;
                }
            }
            m
        };
        let pairing = |x: &Mat, y: &Mat| x.transpose().mul(gram.gram()).mul(y).mul(gram.gram_inv()).trace();
        let mut iso = Vec::new();
        for v in alg.layer(1) {
            let tv = endo(&tjac, v);
            for s in self.ext.g0() {
                iso.push(pairing(&tv, &s.matrix));
            }
        }
        let mut t0_pair = Vec::new();
        for j in 1..alg.step() {
            for v in alg.layer(j + 1) {
                let tv = endo(&tjac, v);
                for w in alg.layer(j) {
                    t0_pair.push(pairing(&tv, &endo(t0, w)));
                }
            }
        }
        let check = |name: &str, residual: Vec<Rat>| Check { name: name.into(), pass: residual.iter().all(Zero::is_zero), residual };
        Certificate {
            checks: vec![
                check("curvature_on_chi", r_chi),
                check("torsion_on_chi", t_chi),
                check("tjac_iso", iso),
                check("tjac_minimal_torsion", t0_pair),
            ],
        }
    }
}

/// Extension of the partial connection `ω(X_i) = Σ_m μ[i][m] s_m`.
pub fn extend_connection(frame: &FrameSpec, mu: &[Vec<Poly>]) -> Result<ConnectionReport, FrameError> {
    FrameModel::new(frame.clone())?.at_lowest_degree(|m| m.report(&m.extend(&m.expand_mu(mu))?))
}

pub fn solve_canonical(frame: &FrameSpec) -> Result<ConnectionReport, FrameError> {
    FrameModel::new(frame.clone())?.at_lowest_degree(|m| Ok(m.solve(None)?.1))
}
