//! Degree-one normalisation: given a reference curvature `κ̃`, find the unique
//! `α1 ∈ c^1_1` with `∂_b⁻¹(∂α1 + κ̃1) = 0` and a normalisation condition on
//! `κ1 = ∂α1 + κ̃1`, and certify the result.
//!
//! Two normalisation rules are available. [`Rule::Literal`] asks for
//! `∂*(id − ∂_b⁻¹∂_b)κ1 = 0`, i.e. `Πκ1 ⊥ Π∂c^1_1`. [`Rule::Projected`] asks
//! for `P^∞* ∂*(id − ∂_b⁻¹∂_b)κ1 = 0`, i.e. `Πκ1 ⊥ Π∂P^∞c^1_1`. The two agree
//! whenever `Π∂P^∞c^1_1 = Π∂c^1_1` (Heisenberg and contact symbols). Where
//! they differ (rolling, free step two) the literal system is overdetermined:
//! admissible changes of `α1` are confined to `P^1`, and `κ1` has components
//! along `Π∂c^1_1` that no such change can reach. The projected rule is the
//! default; it always has exactly one solution.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::cochain::{Cochain, ComplexOperators};
use crate::exactla::{decompose, Mat, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("reference curvature is not realisable: {reason}")]
    Inconsistent { reason: String, residual: Vec<Rat> },
    #[error("degree-one system has a {kernel_dim}-dimensional kernel")]
    NonUniqueSolution { kernel_dim: usize },
    #[error("the complex must be materialised up to form degree 2")]
    ComplexTooSmall,
}

/// Reference curvature; only its homogeneity-one part enters the solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurvatureData {
    pub kappa_tilde: Cochain,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostics {
    pub unknowns: usize,
    pub equations: usize,
    pub rank: usize,
    pub solution_space_dim: usize,
    pub residual: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizationSolution {
    pub alpha_1: Cochain,
    pub kappa_1: Cochain,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub residual: Vec<Rat>,
}

impl Check {
    fn from_residual(name: &str, residual: Vec<Rat>) -> Self {
        Check { name: name.into(), pass: residual.iter().all(Zero::is_zero), residual }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Certificate {
    pub checks: Vec<Check>,
}

impl Certificate {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passes(&self, name: &str) -> bool {
        self.get(name).is_some_and(|c| c.pass)
    }

    /// Every check except those for the literal rule.
    pub fn canonical_pass(&self) -> bool {
        self.checks.iter().filter(|c| c.name != "normalization" && c.name != "orthogonality").all(|c| c.pass)
    }
}

/// The homogeneity-one slice of `κ`.
pub fn degree_one_part(ops: &ComplexOperators, kappa: &Cochain) -> Cochain {
    let space = ops.space(kappa.k);
    space.embed(1, &space.restrict(kappa, 1))
}

/// Which normalisation condition the degree-one system imposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rule {
    /// `∂*(id − ∂_b⁻¹∂_b)κ1 = 0`.
    Literal,
    /// `P^∞* ∂*(id − ∂_b⁻¹∂_b)κ1 = 0`.
    #[default]
    Projected,
}

/// Linear data of the degree-one system on the slices `c^1_1` and `c^2_1`.
#[derive(Debug, Clone)]
pub struct DegreeOneSystem {
    pub rule: Rule,
    /// `∂: c^1_1 → c^2_1`.
    pub d: Mat,
    /// Stacked operator acting on `α1`.
    pub lhs: Mat,
    /// Stacked operator acting on `κ̃1`; the system is `lhs α = −rhs κ̃`.
    pub rhs: Mat,
    /// `∂: c^2_1 → c^3_1`.
    pub bianchi: Mat,
    pub rank: usize,
}

impl DegreeOneSystem {
    pub fn new(ops: &ComplexOperators) -> Result<Self, NormalizeError> {
        Self::with_rule(ops, Rule::default())
    }

    pub fn with_rule(ops: &ComplexOperators, rule: Rule) -> Result<Self, NormalizeError> {
        if ops.max_k() < 2 {
            return Err(NormalizeError::ComplexTooSmall);
        }
        let u = ops.space(1).slice(1).len();
        let v = ops.space(2).slice(1).len();
        let w = ops.space(3).slice(1).len();
        let block = |m: Option<&Mat>, r: usize, c: usize| m.cloned().unwrap_or_else(|| Mat::zeros(r, c));
        let d = block(ops.d(1).block(1), v, u);
        let db_inv = block(ops.db_inv(1).block(1), u, v);
        let d_star = block(ops.d_star(1).block(1), u, v);
        let q = Mat::identity(v).sub(&block(ops.db_inv(2).block(1), v, w).mul(&block(ops.db(2).block(1), w, v)));
        let mut norm = d_star.mul(&q);
        if rule == Rule::Projected {
            norm = block(ops.p_inf(1).adjoint().block(1), u, u).mul(&norm);
        }
        let rhs = db_inv.vstack(&norm);
        let lhs = rhs.mul(&d);
        let rank = lhs.rank();
        let bianchi = block(ops.d(2).block(1), w, v);
        Ok(DegreeOneSystem { rule, d, lhs, rhs, bianchi, rank })
    }

    pub fn unknowns(&self) -> usize {
        self.lhs.cols()
    }

    /// `S` with `α1 = S κ̃1` for every realisable `κ̃1`.
    pub fn solution_operator(&self) -> Result<Mat, NormalizeError> {
        let n = self.unknowns();
        if self.rank < n {
            return Err(NormalizeError::NonUniqueSolution { kernel_dim: n - self.rank });
        }
        let lt = self.lhs.transpose();
        let left_inv = lt.mul(&self.lhs).inverse().expect("full column rank").mul(&lt);
        Ok(left_inv.mul(&self.rhs).neg())
    }

    /// `lhs S + rhs`; vanishes on `κ̃1` exactly when the system is consistent.
    pub fn residual_operator(&self) -> Result<Mat, NormalizeError> {
        Ok(self.lhs.mul(&self.solution_operator()?).add(&self.rhs))
    }
}

/// `∂κ̃1 = 0`.
pub fn check_bianchi_deg1(ops: &ComplexOperators, data: &CurvatureData) -> bool {
    let k1 = degree_one_part(ops, &data.kappa_tilde);
    ops.d(2).apply(&k1).is_zero()
}

/// Solve with the default [`Rule::Projected`].
pub fn solve_alpha1(ops: &ComplexOperators, data: &CurvatureData) -> Result<NormalizationSolution, NormalizeError> {
    solve_alpha1_with(ops, data, Rule::default())
}

pub fn solve_alpha1_with(
    ops: &ComplexOperators,
    data: &CurvatureData,
    rule: Rule,
) -> Result<NormalizationSolution, NormalizeError> {
    let sys = DegreeOneSystem::with_rule(ops, rule)?;
    let c1 = ops.space(1);
    let c2 = ops.space(2);
    let kt = c2.restrict(&data.kappa_tilde, 1);
    let bianchi = sys.bianchi.mul_vec(&kt);
    if bianchi.iter().any(|x| !x.is_zero()) {
        return Err(NormalizeError::Inconsistent { reason: "∂κ̃1 ≠ 0".into(), residual: bianchi });
    }
    let n = sys.unknowns();
    if sys.rank < n {
        return Err(NormalizeError::NonUniqueSolution { kernel_dim: n - sys.rank });
    }
    let b: Vec<Rat> = sys.rhs.mul_vec(&kt).into_iter().map(|x| -x).collect();
    let Some(alpha) = sys.lhs.solve(&b) else {
        let s = sys.solution_operator()?;
        let residual = sys.lhs.mul_vec(&s.mul_vec(&kt)).iter().zip(&b).map(|(x, y)| x - y).collect();
        return Err(NormalizeError::Inconsistent { reason: "stacked system has no solution".into(), residual });
    };
    let residual: Vec<Rat> = sys.lhs.mul_vec(&alpha).iter().zip(&b).map(|(x, y)| x - y).collect();
    let alpha_1 = c1.embed(1, &alpha);
    let kappa_1 = ops.d(1).apply(&alpha_1).add(&degree_one_part(ops, &data.kappa_tilde));
    Ok(NormalizationSolution {
        alpha_1,
        kappa_1,
        diagnostics: Diagnostics {
            unknowns: n,
            equations: sys.lhs.rows(),
            rank: sys.rank,
            solution_space_dim: decompose(&sys.lhs).kernel_basis.cols(),
            residual,
        },
    })
}

/// `ι_A κ` for the basis vector `A = b_i` of `g_-`.
pub fn contract(ops: &ComplexOperators, i: usize, kappa: &Cochain) -> Cochain {
    let src = ops.space(kappa.k);
    let tgt = ops.space(kappa.k - 1);
    let mut out = tgt.zero();
    for (x, c) in kappa.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let (a, set) = src.basis(x);
        if let Some(pos) = set.iter().position(|&j| j == i) {
            let rest: Vec<usize> = set.iter().copied().filter(|&j| j != i).collect();
            let t = tgt.index(a, &rest).unwrap();
            // moving b_i to the front
            out.coeffs[t] += if pos % 2 == 0 { c.clone() } else { -c };
        }
    }
    out
}

/// `∂*(ι_A κ1) = ∂*(ι_A ∂_b⁻¹∂_b κ1)` for every basis `A` of `g_-`.
pub fn corollary_form_check(ops: &ComplexOperators, kappa_1: &Cochain) -> bool {
    let proj = ops.db_inv(2).apply(&ops.db(2).apply(kappa_1));
    (0..ops.ext().dim_minus()).all(|i| {
        let l = ops.d_star(0).apply(&contract(ops, i, kappa_1));
        let r = ops.d_star(0).apply(&contract(ops, i, &proj));
        l == r
    })
}

/// Checks on `κ ∈ c^2`: `extension`, `normalization` (literal rule),
/// `normalization_projected`, `positive_homogeneity`, `orthogonality`
/// (`Πκ1 ⊥ Π∂c^1_1`) and `orthogonality_projected` (`Πκ1 ⊥ Π∂P^∞c^1_1`).
pub fn certify(ops: &ComplexOperators, kappa: &Cochain) -> Certificate {
    let c1 = ops.space(1);
    let c2 = ops.space(2);
    let k1 = degree_one_part(ops, kappa);
    let extension = ops.db_inv(1).apply(kappa).coeffs;
    let proj = ops.db_inv(2).apply(&ops.db(2).apply(&k1));
    let literal = ops.d_star(1).apply(&k1).sub(&ops.d_star(1).apply(&proj));
    let projected = ops.p_inf(1).adjoint().apply(&literal).coeffs;
    let normalization = literal.coeffs;
    let positivity: Vec<Rat> = kappa
        .coeffs
        .iter()
        .enumerate()
        .filter(|(i, _)| c2.homogeneity(*i) <= 0)
        .map(|(_, c)| c.clone())
        .collect();
    let pk = ops.pi(2).apply(&k1);
    let against = |f: &dyn Fn(&Cochain) -> Cochain| -> Vec<Rat> {
        c1.slice(1).iter().map(|&x| c2.inner(&pk, &ops.pi(2).apply(&ops.d(1).apply(&f(&c1.basis_vector(x)))))).collect()
    };
    let orthogonality = against(&|e| e.clone());
    let orthogonality_projected = against(&|e| ops.p_inf(1).apply(e));
    Certificate {
        checks: vec![
            Check::from_residual("extension", extension),
            Check::from_residual("normalization", normalization),
            Check::from_residual("normalization_projected", projected),
            Check::from_residual("positive_homogeneity", positivity),
            Check::from_residual("orthogonality", orthogonality),
            Check::from_residual("orthogonality_projected", orthogonality_projected),
        ],
    }
}

/// Degree-one unit vector of `c^2` at `(a, I)`.
pub fn unit_curvature(ops: &ComplexOperators, a: usize, set: &[usize]) -> CurvatureData {
    let c2 = ops.space(2);
    let mut k = c2.zero();
    k.coeffs[c2.index(a, set).expect("basis element")] = Rat::one();
    CurvatureData { kappa_tilde: k }
}
