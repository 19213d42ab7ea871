//! Carnot algebras used throughout the tests and examples.

use num_traits::Zero;

use crate::carnot::{BracketEntry, CarnotSpec};
use crate::exactla::{rat, ri, Mat, Rat};
use crate::frames::{FrameSpec, PolyVec, DEFAULT_JET_DEGREE};

fn entry(n: usize, left: usize, right: usize, terms: &[(usize, Rat)]) -> BracketEntry {
    let mut result = vec![Rat::zero(); n];
    for (i, c) in terms {
        result[*i] = c.clone();
    }
    BracketEntry { left, right, result }
}

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Heisenberg algebra: `[A1, A2] = B`.
pub fn heisenberg23() -> CarnotSpec {
    CarnotSpec {
        step: 2,
        layer_dims: vec![2, 1],
        labels: labels(&["A1", "A2", "B"]),
        brackets: vec![entry(3, 0, 1, &[(2, ri(1))])],
        gram_minus1: Mat::identity(2),
    }
}

/// `(2,3,5)` algebra: `[A1, A2] = B`, `[Aj, B] = Cj`.
pub fn rolling235() -> CarnotSpec {
    CarnotSpec {
        step: 3,
        layer_dims: vec![2, 1, 2],
        labels: labels(&["A1", "A2", "B", "C1", "C2"]),
        brackets: vec![
            entry(5, 0, 1, &[(2, ri(1))]),
            entry(5, 0, 2, &[(3, ri(1))]),
            entry(5, 1, 2, &[(4, ri(1))]),
        ],
        gram_minus1: Mat::identity(2),
    }
}

/// Index pairs `(i, j)`, `i < j`, labelling the second layer of the free step-two algebra.
pub fn free_step2_pairs(n1: usize) -> Vec<(usize, usize)> {
    (0..n1).flat_map(|i| (i + 1..n1).map(move |j| (i, j))).collect()
}

/// Free step-two algebra on `n1` generators: `[Ai, Aj] = Bij` for `i < j`.
pub fn free_step2(n1: usize) -> CarnotSpec {
    let pairs = free_step2_pairs(n1);
    let n = n1 + pairs.len();
    let mut names: Vec<String> = (1..=n1).map(|i| format!("A{i}")).collect();
    names.extend(pairs.iter().map(|(i, j)| format!("B{}{}", i + 1, j + 1)));
    let brackets = pairs
        .iter()
        .enumerate()
        .map(|(k, &(i, j))| entry(n, i, j, &[(n1 + k, ri(1))]))
        .collect();
    CarnotSpec {
        step: 2,
        layer_dims: vec![n1, pairs.len()],
        labels: names,
        brackets,
        gram_minus1: Mat::identity(n1),
    }
}

/// Contact algebra with `[A_{2r-1}, A_{2r}] = λ_r B`.
pub fn contact(lambdas: &[Rat]) -> CarnotSpec {
    let n1 = 2 * lambdas.len();
    let n = n1 + 1;
    let mut names: Vec<String> = (1..=n1).map(|i| format!("A{i}")).collect();
    names.push("B".into());
    let brackets = lambdas
        .iter()
        .enumerate()
        .map(|(r, l)| entry(n, 2 * r, 2 * r + 1, &[(n1, l.clone())]))
        .collect();
    CarnotSpec {
        step: 2,
        layer_dims: vec![n1, 1],
        labels: names,
        brackets,
        gram_minus1: Mat::identity(n1),
    }
}

/// Five-dimensional Heisenberg algebra with `Λ = id`.
pub fn contact_std() -> CarnotSpec {
    contact(&[ri(1), ri(1)])
}

/// Five-dimensional contact algebra with eigenvalues `1` and `1/2`.
pub fn contact_two_eigen() -> CarnotSpec {
    contact(&[ri(1), rat(1, 2)])
}

/// Named fixture set used by the acceptance run.
pub fn all() -> Vec<(&'static str, CarnotSpec)> {
    vec![
        ("heisenberg23", heisenberg23()),
        ("rolling235", rolling235()),
        ("free_step2_n3", free_step2(3)),
        ("free_step2_n4", free_step2(4)),
        ("contact_std", contact_std()),
        ("contact_two_eigen", contact_two_eigen()),
    ]
}

fn model(symbol: CarnotSpec, fields: &[&[&str]], point: &[Rat]) -> FrameSpec {
    let dim = point.len();
    FrameSpec {
        dim,
        fields: fields.iter().map(|f| PolyVec::parse(f).expect("fixture polynomial")).collect(),
        point: point.to_vec(),
        symbol,
        jet_degree: DEFAULT_JET_DEGREE,
    }
}

fn origin(n: usize) -> Vec<Rat> {
    vec![Rat::zero(); n]
}

/// Left-invariant Heisenberg frame `X1 = ∂1 − x2/2 ∂3`, `X2 = ∂2 + x1/2 ∂3`.
pub fn heis_model() -> FrameSpec {
    model(heisenberg23(), &[&["1", "0", "-1/2*x2"], &["0", "1", "1/2*x1"]], &origin(3))
}

/// `X1 = ∂1`, `X2 = ∂2 + x1(1 + x2) ∂3` at the origin.
pub fn heis_perturbed() -> FrameSpec {
    model(heisenberg23(), &[&["1", "0", "0"], &["0", "1", "x1 + x1*x2"]], &origin(3))
}

/// A less symmetric contact frame on `ℝ³`, away from the origin.
pub fn heis_polynomial() -> FrameSpec {
    model(
        heisenberg23(),
        &[&["1", "x3", "x2^2 - x2*x3"], &["0", "1 + x1^2", "x1 + 2*x1*x3 + 1/3*x1^3"]],
        &[rat(1, 2), ri(-1), rat(2, 3)],
    )
}

/// Hilbert–Cartan frame with growth `(2,3,5)`.
pub fn rolling_model() -> FrameSpec {
    model(
        rolling235(),
        &[&["1", "0", "0", "0", "0"], &["0", "1", "x1", "1/2*x1^2", "x1*x2"]],
        &origin(5),
    )
}

/// Perturbed `(2,3,5)` frame with nonzero structure functions at the base point.
pub fn rolling_perturbed() -> FrameSpec {
    model(
        rolling235(),
        &[
            &["1", "0", "0", "x2^2*x3", "x3*x2 + x1^3"],
            &["0", "1", "x1", "1/2*x1^2 + x3^2", "x1*x2 + x1*x3^2"],
        ],
        &[ri(1), rat(-1, 2), rat(1, 3), ri(0), ri(2)],
    )
}

/// Free step-two frame `X_i = ∂_i + Σ_{j<i} x_j ∂_{z_ji}` plus quadratic terms.
pub fn free_step2_model(n1: usize) -> FrameSpec {
    let pairs = free_step2_pairs(n1);
    let n = n1 + pairs.len();
    let z = |i: usize, j: usize| n1 + pairs.iter().position(|&q| q == (i, j)).expect("pair");
    let mut comps: Vec<Vec<String>> = vec![vec!["0".to_string(); n]; n1];
    for (i, row) in comps.iter_mut().enumerate() {
        row[i] = "1".into();
        for j in 0..i {
            row[z(j, i)] = format!("x{}", j + 1);
        }
    }
    // perturbations generating nonzero ν
    let extra: &[(usize, usize, &str)] = &[
        (0, z(0, 2), "x1*x2"),
        (0, z(1, 2), "x3^2 - x1*x3"),
        (1, z(0, 1), "2*x2*x3"),
        (1, z(0, 2), "x1^2"),
        (2, z(0, 1), "x1^2 + x2*x3"),
        (2, z(1, 2), "1/2*x2^2"),
    ];
    for &(f, c, s) in extra {
        let cur = &comps[f][c];
        comps[f][c] = if cur == "0" { s.to_string() } else { format!("{cur} + {s}") };
    }
    if n1 > 3 {
        comps[3][z(0, 1)] = format!("{} + x4^2 - x2*x4", comps[3][z(0, 1)]);
        comps[0][z(2, 3)] = format!("{} + x1*x4", comps[0][z(2, 3)]);
    }
    let refs: Vec<Vec<&str>> = comps.iter().map(|r| r.iter().map(|s| s.as_str()).collect()).collect();
    let fields: Vec<&[&str]> = refs.iter().map(|r| r.as_slice()).collect();
    model(free_step2(n1), &fields, &origin(n))
}

/// Conformally rescaled five-dimensional Heisenberg frame, `φ = 1 + x1`.
pub fn contact_std_model() -> FrameSpec {
    model(
        contact_std(),
        &[
            &["1 + x1", "0", "0", "0", "-1/2*x2 - 1/2*x1*x2"],
            &["0", "1 + x1", "0", "0", "1/2*x1 + 1/2*x1^2"],
            &["0", "0", "1 + x1", "0", "-1/2*x4 - 1/2*x1*x4"],
            &["0", "0", "0", "1 + x1", "1/2*x3 + 1/2*x1*x3"],
        ],
        &origin(5),
    )
}

/// Eigenvalues `(1, 1/2)`: `X_i = φ(∂_i + h a_i ∂5)` with `φ = 1 + x1 + x3`,
/// `h = 1 + x5`, away from the origin so that the Reeb field is not vertical.
pub fn contact_two_eigen_model() -> FrameSpec {
    model(
        contact_two_eigen(),
        &[
            &["1 + x1 + x3", "0", "0", "0", "-1/2*x1*x2*x5 - 1/2*x1*x2 - 1/2*x2*x3*x5 - 1/2*x2*x3 - 1/2*x2*x5 - 1/2*x2"],
            &["0", "1 + x1 + x3", "0", "0", "1/2*x1^2*x5 + 1/2*x1^2 + 1/2*x1*x3*x5 + 1/2*x1*x3 + 1/2*x1*x5 + 1/2*x1"],
            &["0", "0", "1 + x1 + x3", "0", "-1/4*x1*x4*x5 - 1/4*x1*x4 - 1/4*x3*x4*x5 - 1/4*x3*x4 - 1/4*x4*x5 - 1/4*x4"],
            &["0", "0", "0", "1 + x1 + x3", "1/4*x1*x3*x5 + 1/4*x1*x3 + 1/4*x3^2*x5 + 1/4*x3^2 + 1/4*x3*x5 + 1/4*x3"],
        ],
        &[rat(1, 2), ri(-1), rat(1, 3), ri(1), rat(1, 4)],
    )
}

/// Named frame models used by the end-to-end checks.
pub fn all_models() -> Vec<(&'static str, FrameSpec)> {
    vec![
        ("heis_model", heis_model()),
        ("heis_perturbed", heis_perturbed()),
        ("heis_polynomial", heis_polynomial()),
        ("rolling_model", rolling_model()),
        ("rolling_perturbed", rolling_perturbed()),
        ("free2_n3_model", free_step2_model(3)),
        ("free2_n4_model", free_step2_model(4)),
        ("contact_std_model", contact_std_model()),
        ("contact_two_eigen_model", contact_two_eigen_model()),
    ]
}
