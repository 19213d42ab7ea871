//! Closed-form connection coefficients for the worked model families.
//!
//! Every quantity here is built from brackets of the input frame alone; the
//! generic solver is never consulted. Structure functions are read off by
//! decomposing iterated brackets in a frame of `TM` made of brackets of the
//! `X_i`, with jets so that their first derivatives are available too.

use num_traits::{One, Zero};
use thiserror::Error;

use super::poly::{field_apply, field_bracket, field_expand, field_value};
use super::{ConnectionReport, FrameError, FrameModel, FrameSpec, Jet, JetField, JetMat};
use crate::carnot::CarnotSpec;
use crate::cochain::Cochain;
use crate::exactla::{rat, ri, Mat, Rat};
use crate::fixtures;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Heis23,
    Rolling235,
    FreeStep2,
    ContactStd,
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("no closed form for this model: {0}")]
    UnsupportedModel(String),
    #[error("bracket frame is degenerate at the base point")]
    Degenerate,
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Closed-form values at the base point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    pub family: Family,
    /// Named structure functions at `p` (`f_j`, `f_{i,j}`, `ν^{(2)}_{ij;k}`).
    pub data: Vec<(String, Rat)>,
    /// Grading fields at `p`, keyed by the index of the basis element of `g_-`
    /// they realise.
    pub grading: Vec<(usize, Vec<Rat>)>,
    /// `∇_{X_k}` on `E` in the frame `X_i`: entry `(i, j)` is `μ_{ij;k}`.
    pub horizontal: Vec<Mat>,
    /// `∇_F` on `E` for non-horizontal grading fields, keyed like `grading`.
    pub vertical: Vec<(usize, Mat)>,
}

/// The family whose closed form applies to `symbol`, if any.
pub fn detect_family(symbol: &CarnotSpec) -> Option<Family> {
    if *symbol == fixtures::heisenberg23() {
        return Some(Family::Heis23);
    }
    if *symbol == fixtures::rolling235() {
        return Some(Family::Rolling235);
    }
    if *symbol == fixtures::contact_std() {
        return Some(Family::ContactStd);
    }
    let n1 = symbol.layer_dims[0];
    if n1 >= 3 && *symbol == fixtures::free_step2(n1) {
        return Some(Family::FreeStep2);
    }
    None
}

pub fn closed_form_oracle(family: Family, frame: &FrameSpec) -> Result<OracleReport, OracleError> {
    if detect_family(&frame.symbol) != Some(family) {
        return Err(OracleError::UnsupportedModel(format!("symbol does not belong to {family:?}")));
    }
    super::growth_vector(frame)?;
    match family {
        Family::Heis23 => heis23(frame),
        Family::Rolling235 => rolling235(frame),
        Family::FreeStep2 => free_step2(frame),
        Family::ContactStd => Err(OracleError::UnsupportedModel(
            "the standard contact case has no closed form; use contact_conditions".into(),
        )),
    }
}

struct Brackets {
    x: Vec<JetField>,
}

impl Brackets {
    fn new(frame: &FrameSpec) -> Self {
        let order = frame.jet_degree as i32;
        let x = frame.fields.iter().map(|f| field_expand(f, &frame.point, order)).collect();
        Brackets { x }
    }

    /// Coordinates of `v` in the frame `cols`, as jets.
    fn coords(cols: &[JetField], v: &[Jet]) -> Result<Vec<Jet>, OracleError> {
        let inv = JetMat::from_columns(cols.to_vec()).inverse().ok_or(OracleError::Degenerate)?;
        Ok(inv.mul_vec(v))
    }
}

fn value(j: &Jet) -> Rat {
    j.value().expect("jet degree covers the base point")
}

/// `J` on `E = span{X_1, X_2}` with `JX_1 = X_2`, `JX_2 = −X_1`.
fn j2(scale: &Rat) -> Mat {
    let mut m = Mat::zeros(2, 2);
    m[(1, 0)] = scale.clone();
    m[(0, 1)] = -scale;
    m
}

/// `[X_j, [X_1, X_2]] = f_j [X_1, X_2] mod E`; `α_1 = f_2`, `α_2 = −f_1`,
/// `Z = [X_1, X_2] + α_1 X_1 + α_2 X_2`, `∇_Z = −(X_1 f_1 + X_2 f_2) J`.
fn heis23(frame: &FrameSpec) -> Result<OracleReport, OracleError> {
    let b = Brackets::new(frame);
    let w = field_bracket(&b.x[0], &b.x[1]);
    let cols = vec![b.x[0].clone(), b.x[1].clone(), w.clone()];
    let f: Vec<Jet> = (0..2)
        .map(|j| Brackets::coords(&cols, &field_bracket(&b.x[j], &w)).map(|c| c[2].clone()))
        .collect::<Result<_, _>>()?;
    let (f1, f2) = (value(&f[0]), value(&f[1]));
    let alpha = [f2.clone(), -&f1];
    let z: Vec<Rat> = (0..frame.dim)
        .map(|i| value(&w[i]) + &alpha[0] * value(&b.x[0][i]) + &alpha[1] * value(&b.x[1][i]))
        .collect();
    let nabla_z = -(value(&field_apply(&b.x[0], &f[0])) + value(&field_apply(&b.x[1], &f[1])));
    Ok(OracleReport {
        family: Family::Heis23,
        data: vec![("f1".into(), f1), ("f2".into(), f2)],
        grading: vec![(2, z)],
        horizontal: alpha.iter().map(j2).collect(),
        vertical: vec![(2, j2(&nabla_z))],
    })
}

/// Residuals of the Reeb characterisation of the `(2,3)` grading field `Z`
/// at `p`: `β` annihilates `E` with `β([X_1, X_2]) = 1`, and
/// `dβ(Z, ·) = 0`, `β(Z) = 1`. Here `β = (X_1 × X_2)/⟨X_1 × X_2, [X_1, X_2]⟩`.
pub fn reeb_residuals(frame: &FrameSpec, z: &[Rat]) -> Result<Vec<(String, Vec<Rat>)>, OracleError> {
    if detect_family(&frame.symbol) != Some(Family::Heis23) {
        return Err(OracleError::UnsupportedModel("the Reeb check needs a (2,3) frame".into()));
    }
    let b = Brackets::new(frame);
    let (x, y) = (&b.x[0], &b.x[1]);
    let cross = |i: usize, j: usize| x[i].mul(&y[j]).sub(&x[j].mul(&y[i]));
    let hat = [cross(1, 2), cross(2, 0), cross(0, 1)];
    let w = field_bracket(x, y);
    let g = hat.iter().zip(&w).fold(Jet::zero(3, frame.jet_degree as i32), |acc, (h, v)| acc.add(&h.mul(v)));
    let inv = g.recip().ok_or(OracleError::Degenerate)?;
    let beta: Vec<Jet> = hat.iter().map(|h| h.mul(&inv)).collect();
    let mut d_beta = Mat::zeros(3, 3);
    for i in 0..3 {
        for k in 0..3 {
            d_beta[(i, k)] = value(&beta[k].derivative(i)) - value(&beta[i].derivative(k));
        }
    }
    let closed = (0..3).map(|k| (0..3).map(|i| &z[i] * &d_beta[(i, k)]).sum()).collect();
    let normal: Rat = beta.iter().zip(z).map(|(bi, zi)| value(bi) * zi).sum::<Rat>() - Rat::one();
    Ok(vec![("reeb_closed".into(), closed), ("reeb_normalized".into(), vec![normal])])
}

/// `[X_j, [X_j, [X_1, X_2]]] = f_{1,j} W_1 + f_{2,j} W_2 mod E^{-2}` with
/// `W_j = [X_j, [X_1, X_2]]`; `η_1 = f_{2,2}`, `η_2 = −f_{1,1}`,
/// `Y = [X_1, X_2] + η_1 X_1 + η_2 X_2`.
fn rolling235(frame: &FrameSpec) -> Result<OracleReport, OracleError> {
    let b = Brackets::new(frame);
    let f = rolling_f(&b)?;
    let eta = [f[1][1].clone(), -&f[0][0]];
    let y = rolling_y(&b, &eta);
    let mut data = Vec::new();
    for (i, row) in f.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            data.push((format!("f{},{}", i + 1, j + 1), x.clone()));
        }
    }
    Ok(OracleReport {
        family: Family::Rolling235,
        data,
        grading: vec![(2, y)],
        horizontal: eta.iter().map(j2).collect(),
        vertical: vec![],
    })
}

/// `f[i][j] = f_{i+1,j+1}` at `p`.
fn rolling_f(b: &Brackets) -> Result<[[Rat; 2]; 2], OracleError> {
    let y0 = field_bracket(&b.x[0], &b.x[1]);
    let w: Vec<JetField> = (0..2).map(|j| field_bracket(&b.x[j], &y0)).collect();
    let cols = vec![b.x[0].clone(), b.x[1].clone(), y0, w[0].clone(), w[1].clone()];
    let mut f = [[Rat::zero(), Rat::zero()], [Rat::zero(), Rat::zero()]];
    for j in 0..2 {
        let c = Brackets::coords(&cols, &field_bracket(&b.x[j], &w[j]))?;
        f[0][j] = value(&c[3]);
        f[1][j] = value(&c[4]);
    }
    Ok(f)
}

fn rolling_y(b: &Brackets, eta: &[Rat; 2]) -> Vec<Rat> {
    let y0 = field_value(&field_bracket(&b.x[0], &b.x[1])).expect("jet degree covers p");
    let x0 = field_value(&b.x[0]).expect("jet degree covers p");
    let x1 = field_value(&b.x[1]).expect("jet degree covers p");
    (0..y0.len()).map(|i| &y0[i] + &eta[0] * &x0[i] + &eta[1] * &x1[i]).collect()
}

/// Rolling coefficients under the default normalisation rule of the generic
/// solver: the `C_k` component of `Σ_j κ(A_j, C_j)` vanishes, which gives
/// `η_1 = (f_{2,1} + f_{2,2})/2` and `η_2 = −(f_{1,1} + f_{1,2})/2`.
pub fn rolling235_projected(frame: &FrameSpec) -> Result<OracleReport, OracleError> {
    if detect_family(&frame.symbol) != Some(Family::Rolling235) {
        return Err(OracleError::UnsupportedModel("not a (2,3,5) frame".into()));
    }
    let b = Brackets::new(frame);
    let f = rolling_f(&b)?;
    let half = rat(1, 2);
    let eta = [(&f[1][0] + &f[1][1]) * &half, -(&f[0][0] + &f[0][1]) * &half];
    let y = rolling_y(&b, &eta);
    Ok(OracleReport {
        family: Family::Rolling235,
        data: vec![],
        grading: vec![(2, y)],
        horizontal: eta.iter().map(j2).collect(),
        vertical: vec![],
    })
}

/// Structure functions of a free step-two frame at `p`.
#[derive(Debug, Clone)]
pub struct FreeData {
    pub n1: usize,
    /// `nu[i][j][k][p][q]`: coefficient of `[X_p, X_q]` in `[X_i, [X_j, X_k]]`
    /// modulo `E`, antisymmetric in `(p, q)`.
    pub nu: Vec<Vec<Vec<Vec<Vec<Rat>>>>>,
}

impl FreeData {
    pub fn from_frame(frame: &FrameSpec) -> Result<Self, OracleError> {
        let n1 = frame.fields.len();
        let b = Brackets::new(frame);
        let pairs: Vec<(usize, usize)> = (0..n1).flat_map(|p| (p + 1..n1).map(move |q| (p, q))).collect();
        let mut cols: Vec<JetField> = b.x.clone();
        cols.extend(pairs.iter().map(|&(p, q)| field_bracket(&b.x[p], &b.x[q])));
        let basis = JetMat::from_columns(cols).value().ok_or(OracleError::Degenerate)?;
        let inv = basis.inverse().map_err(|_| OracleError::Degenerate)?;
        let zero = || vec![vec![Rat::zero(); n1]; n1];
        let mut nu = vec![vec![vec![zero(); n1]; n1]; n1];
        for j in 0..n1 {
            for k in 0..n1 {
                if j == k {
                    continue;
                }
                let inner = field_bracket(&b.x[j], &b.x[k]);
                for (i, xi) in b.x.iter().enumerate() {
                    let v = field_value(&field_bracket(xi, &inner)).ok_or(OracleError::Degenerate)?;
                    let c = inv.mul_vec(&v);
                    for (m, &(p, q)) in pairs.iter().enumerate() {
                        let x = c[n1 + m].clone();
                        nu[i][j][k][q][p] = -&x;
                        nu[i][j][k][p][q] = x;
                    }
                }
            }
        }
        Ok(FreeData { n1, nu })
    }

    /// `ν^{(2)}_{ij;k} = Σ_r ν_{ijr;kr}`.
    pub fn nu2(&self, i: usize, j: usize, k: usize) -> Rat {
        (0..self.n1).map(|r| self.nu[i][j][r][k][r].clone()).sum()
    }
}

/// Free step two: for distinct `i, j, k`
/// `μ_{ij;k} = (ν²_{kj;i} − ν²_{ki;j})/(2(n1−1)) + (ν²_{ji;k} − ν²_{ij;k})/(2n1(n1−1))`;
/// for `n1 > 3`, `μ_{ij;j} = (ν²_{ij;j} − ν²_{jj;i})/(n1−3)`; for `n1 = 3`,
/// `μ_{ij;j} = 2/3 (ν²_{ij;j} − ν²_{ji;j}) − 1/3 (ν²_{ik;k} − ν²_{ki;k})`.
/// `Z_{ij} = [X_i, X_j] + Σ_r (μ_{ri;j} − μ_{rj;i}) X_r`.
fn free_step2(frame: &FrameSpec) -> Result<OracleReport, OracleError> {
    let d = FreeData::from_frame(frame)?;
    let n1 = d.n1;
    let n = ri(n1 as i64);
    let nu2 = |i, j, k| d.nu2(i, j, k);
    let mut mu = vec![Mat::zeros(n1, n1); n1];
    for k in 0..n1 {
        for i in 0..n1 {
            for j in 0..n1 {
                if i == j {
                    continue;
                }
                let v = if i != k && j != k {
                    (nu2(k, j, i) - nu2(k, i, j)) / (ri(2) * (&n - ri(1)))
                        + (nu2(j, i, k) - nu2(i, j, k)) / (ri(2) * &n * (&n - ri(1)))
                } else if j == k {
                    free_mu_ijj(&d, i, j)
                } else {
                    // μ_{ij;i} = −μ_{ji;i}
                    -free_mu_ijj(&d, j, i)
                };
                mu[k][(i, j)] = v;
            }
        }
    }
    let grading = free_grading(frame, &mu);
    let mut data = Vec::new();
    for i in 0..n1 {
        for j in 0..n1 {
            for k in 0..n1 {
                data.push((format!("nu2_{}{};{}", i + 1, j + 1, k + 1), nu2(i, j, k)));
            }
        }
    }
    Ok(OracleReport { family: Family::FreeStep2, data, grading, horizontal: mu, vertical: vec![] })
}

fn free_mu_ijj(d: &FreeData, i: usize, j: usize) -> Rat {
    let n1 = d.n1;
    if n1 > 3 {
        (d.nu2(i, j, j) - d.nu2(j, j, i)) / ri(n1 as i64 - 3)
    } else {
        let k = (0..3).find(|&k| k != i && k != j).expect("three indices");
        rat(2, 3) * (d.nu2(i, j, j) - d.nu2(j, i, j)) - rat(1, 3) * (d.nu2(i, k, k) - d.nu2(k, i, k))
    }
}

/// Residuals of the standard contact conditions on a solved connection:
/// `κ(χ̃) = 0`, `⟨A_1, κ(A_2, JA_3)⟩ = −⟨JA_1, κ(A_2, A_3)⟩` and
/// `⟨A_1, κ(A_2, A_3)⟩ = ⟨A_3, κ(A_2, A_1)⟩` for `A_i ∈ g_{-1}`.
pub fn contact_conditions(model: &FrameModel, report: &ConnectionReport) -> Result<Vec<(String, Vec<Rat>)>, OracleError> {
    let symbol = &model.spec().symbol;
    if detect_family(symbol) != Some(Family::ContactStd) {
        return Err(OracleError::UnsupportedModel("not the standard contact symbol".into()));
    }
    let ext = model.ext();
    let n1 = symbol.layer_dims[0];
    let c2 = model.ops().space(2);
    let kappa: &Cochain = &report.kappa;
    let eval = |a: usize, b: usize| -> Vec<Rat> {
        if a == b {
            return vec![Rat::zero(); ext.dim()];
        }
        c2.eval(kappa, &[a, b])
    };
    // χ̃ = Σ_r A_{2r-1} ∧ A_{2r}
    let mut chi = vec![Rat::zero(); ext.dim()];
    for r in 0..n1 / 2 {
        for (x, y) in chi.iter_mut().zip(eval(2 * r, 2 * r + 1)) {
            *x += y;
        }
    }
    // J as a matrix on g_{-1}: J A_{2r-1} = A_{2r}
    let mut jm = Mat::zeros(n1, n1);
    for r in 0..n1 / 2 {
        jm[(2 * r + 1, 2 * r)] = Rat::one();
        jm[(2 * r, 2 * r + 1)] = -Rat::one();
    }
    // κ(A_2, v) on g_{-1}, as a matrix K2 with K2[(a1, a3)] = ⟨A_{a1}, κ(A_2, A_{a3})⟩
    let mut j_res = Vec::new();
    let mut sym_res = Vec::new();
    for a2 in 0..n1 {
        let mut k = Mat::zeros(n1, n1);
        for a3 in 0..n1 {
            let v = eval(a2, a3);
            for a1 in 0..n1 {
                k[(a1, a3)] = v[a1].clone();
            }
        }
        // ⟨A1, κ(A2, JA3)⟩ + ⟨JA1, κ(A2, A3)⟩ = (K J + Jᵀ K)[(a1, a3)]
        let r = k.mul(&jm).add(&jm.transpose().mul(&k));
        j_res.extend(r.entries().iter().cloned());
        sym_res.extend(k.sub(&k.transpose()).entries().iter().cloned());
    }
    Ok(vec![("kappa_chi".into(), chi), ("j_invariance".into(), j_res), ("symmetry".into(), sym_res)])
}

/// `∇_{X_k}` on `E` from a solver report, in the layout of [`OracleReport::horizontal`].
pub fn horizontal_blocks(report: &ConnectionReport, n1: usize) -> Vec<Mat> {
    let idx: Vec<usize> = (0..n1).collect();
    report.connection[..n1].iter().map(|m| m.select_rows(&idx).select_cols(&idx)).collect()
}

/// `∇_{F_d}` on `E` from a solver report.
pub fn block_at(report: &ConnectionReport, d: usize, n1: usize) -> Mat {
    let idx: Vec<usize> = (0..n1).collect();
    report.connection[d].select_rows(&idx).select_cols(&idx)
}

/// Components where a solver report and an oracle disagree, as
/// `(name, solver, oracle)` triples.
pub fn compare(report: &ConnectionReport, oracle: &OracleReport) -> Vec<(String, String, String)> {
    let n1 = oracle.horizontal.len();
    let mut out = Vec::new();
    let show = |v: &[Rat]| format!("{:?}", v.iter().map(crate::exactla::rat_to_string).collect::<Vec<_>>());
    for (d, f) in &oracle.grading {
        if report.grading[*d] != *f {
            out.push((format!("F{d}(p)"), show(&report.grading[*d]), show(f)));
        }
    }
    for (k, m) in horizontal_blocks(report, n1).iter().zip(&oracle.horizontal).enumerate().filter(|(_, (a, b))| a != b) {
        out.push((format!("∇_X{}", k + 1), show(m.0.entries()), show(m.1.entries())));
    }
    for (d, m) in &oracle.vertical {
        let s = block_at(report, *d, n1);
        if s != *m {
            out.push((format!("∇_F{d}"), show(s.entries()), show(m.entries())));
        }
    }
    out
}

/// Affine function of the unknowns `μ_{ij;k}` (`i < j`), constant term last.
type Affine = Vec<Rat>;

/// Free step two under the default normalisation rule of the generic solver:
/// for every `t` and `s ∈ so(n1)`,
/// `Σ_{p<q} ⟨T(X_t, Z_pq), s·Z_pq⟩ + Σ_{r,q} ⟨T(X_r, Z_tq), [X_r, sX_q]⟩ = 0`,
/// with `⟨T(Z_ij, X_k), Z_pq⟩` expanded in `ν` and `μ`. Solved exactly as a
/// linear system in the `μ_{ij;k}` at `p`.
pub fn free_step2_projected(frame: &FrameSpec) -> Result<OracleReport, OracleError> {
    if detect_family(&frame.symbol) != Some(Family::FreeStep2) {
        return Err(OracleError::UnsupportedModel("not a free step-two frame".into()));
    }
    let d = FreeData::from_frame(frame)?;
    let n1 = d.n1;
    let pairs: Vec<(usize, usize)> = (0..n1).flat_map(|p| (p + 1..n1).map(move |q| (p, q))).collect();
    let np = pairs.len();
    let nu_count = n1 * np;
    let unknown = |i: usize, j: usize, k: usize| -> Option<(usize, Rat)> {
        if i == j {
            return None;
        }
        let (a, b, sign) = if i < j { (i, j, Rat::one()) } else { (j, i, -Rat::one()) };
        let m = pairs.iter().position(|&q| q == (a, b)).expect("pair");
        Some((k * np + m, sign))
    };
    let zero = || vec![Rat::zero(); nu_count + 1];
    let mu = |i: usize, j: usize, k: usize, c: Rat, acc: &mut Affine| {
        if let Some((u, s)) = unknown(i, j, k) {
            acc[u] += c * s;
        }
    };
    let delta = |a: usize, b: usize| if a == b { Rat::one() } else { Rat::zero() };
    // ⟨T(Z_ij, X_k), Z_pq⟩ for i ≠ j, p ≠ q
    let t_zx = |i: usize, j: usize, k: usize, p: usize, q: usize| -> Affine {
        let mut acc = zero();
        acc[nu_count] = d.nu[k][i][j][p][q].clone();
        mu(q, i, j, delta(k, p), &mut acc);
        mu(q, j, i, -delta(k, p), &mut acc);
        mu(p, i, j, -delta(k, q), &mut acc);
        mu(p, j, i, delta(k, q), &mut acc);
        mu(p, i, k, -delta(q, j), &mut acc);
        mu(p, j, k, delta(q, i), &mut acc);
        mu(q, i, k, delta(p, j), &mut acc);
        mu(q, j, k, -delta(p, i), &mut acc);
        acc
    };
    // K(r; pq) as affine vectors over the B_uv basis
    let k_vec = |r: usize, p: usize, q: usize| -> Vec<Affine> {
        if p == q {
            return vec![zero(); np];
        }
        pairs.iter().map(|&(u, v)| t_zx(p, q, r, u, v).into_iter().map(|x| -x).collect()).collect()
    };
    // [A_m, A_q] in the B_uv basis
    let bvec = |m: usize, q: usize| -> Vec<Rat> {
        let mut v = vec![Rat::zero(); np];
        if m != q {
            let (a, b, s) = if m < q { (m, q, Rat::one()) } else { (q, m, -Rat::one()) };
            v[pairs.iter().position(|&x| x == (a, b)).expect("pair")] = s;
        }
        v
    };
    let pair_with = |k: &[Affine], v: &[Rat], acc: &mut Affine| {
        for (ku, vu) in k.iter().zip(v) {
            if vu.is_zero() {
                continue;
            }
            for (a, x) in acc.iter_mut().zip(ku) {
                *a += x * vu;
            }
        }
    };
    let mut rows: Vec<Affine> = Vec::new();
    for t in 0..n1 {
        for &(a, b) in &pairs {
            // s A_b = A_a, s A_a = −A_b
            let s_of = |q: usize| -> Vec<(usize, Rat)> {
                if q == b {
                    vec![(a, Rat::one())]
                } else if q == a {
                    vec![(b, -Rat::one())]
                } else {
                    vec![]
                }
            };
            let mut acc = zero();
            for &(p, q) in &pairs {
                let mut sb = vec![Rat::zero(); np];
                for (m, c) in s_of(p) {
                    for (x, y) in sb.iter_mut().zip(bvec(m, q)) {
                        *x += &c * y;
                    }
                }
                for (m, c) in s_of(q) {
                    for (x, y) in sb.iter_mut().zip(bvec(p, m)) {
                        *x += &c * y;
                    }
                }
                pair_with(&k_vec(t, p, q), &sb, &mut acc);
            }
            for r in 0..n1 {
                for q in 0..n1 {
                    let mut v = vec![Rat::zero(); np];
                    for (m, c) in s_of(q) {
                        for (x, y) in v.iter_mut().zip(bvec(r, m)) {
                            *x += &c * y;
                        }
                    }
                    pair_with(&k_vec(r, t, q), &v, &mut acc);
                }
            }
            rows.push(acc);
        }
    }
    let lhs = Mat::from_rows(rows.iter().map(|r| r[..nu_count].to_vec()).collect());
    let rhs: Vec<Rat> = rows.iter().map(|r| -&r[nu_count]).collect();
    if lhs.rank() < nu_count {
        return Err(OracleError::Degenerate);
    }
    let sol = lhs.solve(&rhs).ok_or(OracleError::Degenerate)?;
    let mut horizontal = vec![Mat::zeros(n1, n1); n1];
    for (k, m) in horizontal.iter_mut().enumerate() {
        for i in 0..n1 {
            for j in 0..n1 {
                if let Some((u, s)) = unknown(i, j, k) {
                    m[(i, j)] = &sol[u] * s;
                }
            }
        }
    }
    let grading = free_grading(frame, &horizontal);
    Ok(OracleReport { family: Family::FreeStep2, data: vec![], grading, horizontal, vertical: vec![] })
}

/// `Z_{ij}(p) = [X_i, X_j] + Σ_r (μ_{ri;j} − μ_{rj;i}) X_r` at `p`.
fn free_grading(frame: &FrameSpec, mu: &[Mat]) -> Vec<(usize, Vec<Rat>)> {
    let n1 = mu.len();
    let b = Brackets::new(frame);
    let xs: Vec<Vec<Rat>> = b.x.iter().map(|x| field_value(x).expect("jet degree covers p")).collect();
    let mut grading = Vec::new();
    for i in 0..n1 {
        for j in i + 1..n1 {
            let mut z = field_value(&field_bracket(&b.x[i], &b.x[j])).expect("jet degree covers p");
            for (r, xr) in xs.iter().enumerate() {
                let c = &mu[j][(r, i)] - &mu[i][(r, j)];
                for (zc, x) in z.iter_mut().zip(xr) {
                    *zc += &c * x;
                }
            }
            grading.push((n1 + grading.len(), z));
        }
    }
    grading
}
