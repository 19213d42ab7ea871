#![allow(dead_code)]

use std::sync::Arc;

use carnot_core::carnot::ExtendedAlgebra;
use carnot_core::cochain::{Cochain, ComplexOperators, ComplexOptions};
use carnot_core::exactla::{rat, Rat};
use carnot_core::fixtures;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small rational with numerator in `-5..=5` and denominator in `1..=4`.
pub fn random_rat(rng: &mut ChaCha8Rng) -> Rat {
    rat(rng.gen_range(-5..=5), rng.gen_range(1..=4))
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rat> {
    (0..n).map(|_| random_rat(rng)).collect()
}

pub fn random_cochain(rng: &mut ChaCha8Rng, ops: &ComplexOperators, k: usize) -> Cochain {
    Cochain { k, coeffs: random_vec(rng, ops.space(k).dim()) }
}

/// Random element of the homogeneity-`h` slice of `c^k`.
pub fn random_in_slice(rng: &mut ChaCha8Rng, ops: &ComplexOperators, k: usize, h: i64) -> Cochain {
    let space = ops.space(k);
    let v = random_vec(rng, space.slice(h).len());
    space.embed(h, &v)
}

/// Operators up to form degree 2, which is all the normalisation needs.
pub fn ops2(spec: carnot_core::carnot::CarnotSpec) -> ComplexOperators {
    let ext = Arc::new(ExtendedAlgebra::from_spec(spec).expect("fixture algebra"));
    ComplexOperators::with_options(ext, ComplexOptions { max_k: Some(2) })
}

pub fn all_ops2() -> Vec<(&'static str, ComplexOperators)> {
    fixtures::all().into_iter().map(|(n, s)| (n, ops2(s))).collect()
}

/// Basis of the valid degree-one inputs: closed elements of `c^2_1`.
pub fn closed_degree_one_basis(ops: &ComplexOperators) -> Vec<Cochain> {
    let c2 = ops.space(2);
    let n = c2.slice(1).len();
    let kernel = match ops.d(2).block(1) {
        Some(m) => carnot_core::exactla::decompose(m).kernel_basis,
        None => carnot_core::exactla::Mat::identity(n),
    };
    (0..kernel.cols()).map(|j| c2.embed(1, &kernel.column(j))).collect()
}

pub fn random_closed(rng: &mut ChaCha8Rng, basis: &[Cochain], space_dim: usize) -> Cochain {
    let mut out = Cochain { k: 2, coeffs: vec![Rat::from_integer(0.into()); space_dim] };
    for b in basis {
        out = out.add(&b.scale(&random_rat(rng)));
    }
    out
}

/// Which argument the `α_1(B)` lines of the rolling display pair with `A_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RollingReading {
    /// `κ̃_1(A_j, C_j)`, as written.
    AsWritten,
    /// `κ̃_1(A_j, B)`.
    WithB,
}

const A1: usize = 0;
const A2: usize = 1;
const B: usize = 2;
const C1: usize = 3;
const C2: usize = 4;
const S: usize = 5;

/// `(α(A_1)^s, α(A_2)^s, α(B)^{A_1}, α(B)^{A_2}, α(C_1)^B, α(C_2)^B)` from the
/// closed-form display for the rolling algebra.
pub fn rolling_display(ops: &ComplexOperators, kt: &Cochain, reading: RollingReading) -> [Rat; 6] {
    let c2 = ops.space(2);
    let k = |a: usize, b: usize| c2.eval(kt, &[a, b]);
    let partner = |j: usize| match reading {
        RollingReading::AsWritten => [C1, C2][j],
        RollingReading::WithB => B,
    };
    let c1 = -k(A1, C1)[C1].clone();
    let c2v = -k(A2, C2)[C2].clone();
    let b_a1 = -(c2v.clone() - k(A2, partner(1))[B].clone());
    let b_a2 = c1.clone() - k(A1, partner(0))[B].clone();
    let k12 = k(A1, A2);
    let a1 = -b_a1.clone() + k12[A1].clone();
    let a2 = -b_a2.clone() + k12[A2].clone();
    [a1, a2, b_a1, b_a2, c1, c2v]
}

/// The same six components read off a one-cochain.
pub fn rolling_components(ops: &ComplexOperators, alpha: &Cochain) -> [Rat; 6] {
    let c1 = ops.space(1);
    let at = |value: usize, arg: usize| alpha.coeffs[c1.index(value, &[arg]).expect("basis element")].clone();
    [at(S, A1), at(S, A2), at(A1, B), at(A2, B), at(B, C1), at(B, C2)]
}

/// The same components as a one-cochain.
pub fn rolling_cochain(ops: &ComplexOperators, v: &[Rat; 6]) -> Cochain {
    let c1 = ops.space(1);
    let mut out = c1.zero();
    let slots = [(S, A1), (S, A2), (A1, B), (A2, B), (B, C1), (B, C2)];
    for ((value, arg), x) in slots.iter().zip(v) {
        out.coeffs[c1.index(*value, &[*arg]).expect("basis element")] = x.clone();
    }
    out
}

/// Residuals of the equations the rolling display is derived from:
/// `(∂α + κ̃)(A_1, A_2) = 0`, `(∂α + κ̃)(A_j, B) = 0` and
/// `⟨C_j, (∂α + κ̃)(A_j, C_j)⟩ = 0`.
pub fn rolling_display_equations(ops: &ComplexOperators, alpha: &Cochain, kt: &Cochain) -> Vec<Rat> {
    let c2 = ops.space(2);
    let total = ops.d(1).apply(alpha).add(kt);
    let mut out = c2.eval(&total, &[A1, A2]);
    out.extend(c2.eval(&total, &[A1, B]));
    out.extend(c2.eval(&total, &[A2, B]));
    out.push(c2.eval(&total, &[A1, C1])[C1].clone());
    out.push(c2.eval(&total, &[A2, C2])[C2].clone());
    out
}
