//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Every comparison is an exact rational equality.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

use carnot_core::cochain::ComplexOperators;
use carnot_core::exactla::{rat, ri, Rat};
use carnot_core::fixtures;
use carnot_core::frames::oracle::{self, Family};
use carnot_core::frames::{extend_connection, solve_canonical, ConnectionReport, FrameModel, FrameSpec, Monomial, Poly};
use carnot_core::normalize::{solve_alpha1, CurvatureData};
use common::RollingReading;
use num_traits::Zero;
use rand_chacha::ChaCha8Rng;

/// `Ok(detail)` passes, `Err(detail)` fails.
type Outcome = Result<String, String>;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn zeros(v: &[Rat]) -> bool {
    v.iter().all(Zero::is_zero)
}

fn data(kt: carnot_core::cochain::Cochain) -> CurvatureData {
    CurvatureData { kappa_tilde: kt }
}

fn fail_if(failures: Vec<String>, ok: String) -> Outcome {
    if failures.is_empty() {
        Ok(ok)
    } else {
        Err(failures.join("; "))
    }
}

fn criterion_1(ops: &[(&str, ComplexOperators)], built_in: f64) -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    for (name, ops) in ops {
        let mut bad = |what: &str, ok: bool| {
            if !ok {
                failures.push(format!("{name}: {what}"));
            }
        };
        for k in 0..ops.max_k() {
            bad("∂²", ops.d(k + 1).compose(ops.d(k)).is_zero());
            bad("∂_b²", ops.db(k + 1).compose(ops.db(k)).is_zero());
            bad("∂P^∞ = P^∞∂", ops.d(k).compose(ops.p_inf(k)) == ops.p_inf(k + 1).compose(ops.d(k)));
        }
        for k in 0..=ops.max_k() {
            let (pi, p) = (ops.pi(k), ops.p(k));
            bad("Π²", pi.compose(pi) == *pi);
            bad("Π*", pi.adjoint() == *pi);
            let s = ops.s_k(k);
            bad("P^{S+1} = P^S", p.pow(s + 1) == p.pow(s));
        }
        for k in 1..=ops.max_k() {
            bad("(∂_b⁻¹)²", ops.db_inv(k - 1).compose(ops.db_inv(k)).is_zero());
        }
        bad("∂_b⁻¹ = ∂_b* on c²", ops.db_inv(1) == ops.db_star(1));
    }
    let total = built_in + start.elapsed().as_secs_f64();
    if total >= 10.0 {
        failures.push(format!("runtime {total:.2} s"));
    }
    fail_if(failures, format!("6 fixtures, forms up to degree 2, {total:.2} s including construction"))
}

fn criterion_2(ops: &[(&str, ComplexOperators)]) -> Outcome {
    let failures = ops.iter().filter(|(_, o)| !o.tanaka_rigidity()).map(|(n, _)| n.to_string()).collect();
    fail_if(failures, "ker ∂ ∩ c¹₁ = 0 on 6 fixtures".into())
}

fn criterion_3(ops: &[(&str, ComplexOperators)]) -> Outcome {
    let mut rng = common::rng(101);
    let mut failures = Vec::new();
    for (name, ops) in ops {
        for _ in 0..100 {
            let alpha = common::random_cochain(&mut rng, ops, 1);
            if let Err(e) = ops.p_infty_characterize(&alpha) {
                failures.push(format!("{name}: {e}"));
                break;
            }
        }
        if !ops.p_infty_unique(1).unwrap() {
            failures.push(format!("{name}: characterising system has a kernel"));
        }
    }
    fail_if(failures, "100 random α per fixture, unique solution".into())
}

fn criterion_4(ops: &[(&str, ComplexOperators)]) -> Outcome {
    let expected = [
        ("heisenberg23", 1),
        ("rolling235", 1),
        ("free_step2_n3", 3),
        ("free_step2_n4", 6),
        ("contact_std", 4),
        ("contact_two_eigen", 2),
    ];
    let mut failures = Vec::new();
    let mut seen = Vec::new();
    for ((name, o), (ename, dim)) in ops.iter().zip(expected) {
        let got = o.ext().dim_g0();
        seen.push(format!("{name} {got}"));
        if *name != ename || got != dim {
            failures.push(format!("{name}: dim g0 {got}, expected {dim}"));
        }
    }
    fail_if(failures, seen.join(", "))
}

fn criterion_5(ops: &[(&str, ComplexOperators)]) -> Outcome {
    let mut failures = Vec::new();
    let by_name = |n: &str| &ops.iter().find(|(m, _)| *m == n).unwrap().1;

    let heis = by_name("heisenberg23");
    for kt in common::closed_degree_one_basis(heis) {
        if !solve_alpha1(heis, &data(kt)).unwrap().kappa_1.is_zero() {
            failures.push("heisenberg23: κ₁ ≠ 0".into());
            break;
        }
    }

    let rolling = by_name("rolling235");
    let basis = common::closed_degree_one_basis(rolling);
    let mut matches = [0usize; 2];
    let mut b_reading_consistent = true;
    for kt in &basis {
        let solver = common::rolling_components(rolling, &solve_alpha1(rolling, &data(kt.clone())).unwrap().alpha_1);
        for (i, reading) in [RollingReading::AsWritten, RollingReading::WithB].into_iter().enumerate() {
            let shown = common::rolling_display(rolling, kt, reading);
            matches[i] += (shown == solver) as usize;
            if reading == RollingReading::WithB {
                let alpha = common::rolling_cochain(rolling, &shown);
                b_reading_consistent &= zeros(&common::rolling_display_equations(rolling, &alpha, kt));
            }
        }
    }
    let n = basis.len();
    if matches[0] < n && matches[1] < n {
        failures.push(format!(
            "rolling235: display matches the solver on {}/{n} basis inputs as written and {}/{n} with κ̃(A_j, B); \
             the κ̃(A_j, B) reading solves its own equations: {b_reading_consistent}; \
             the display imposes ⟨C_j, κ(A_j, C_j)⟩ = 0, which the solver's rule does not",
            matches[0], matches[1]
        ));
    }

    let mut rng = common::rng(103);
    for (name, o) in ops {
        let basis = common::closed_degree_one_basis(o);
        let kt = common::random_closed(&mut rng, &basis, o.space(2).dim());
        let base = solve_alpha1(o, &data(kt.clone())).unwrap().kappa_1;
        for _ in 0..50 {
            let delta = common::random_in_slice(&mut rng, o, 1, 1);
            if solve_alpha1(o, &data(kt.add(&o.d(1).apply(&delta)))).unwrap().kappa_1 != base {
                failures.push(format!("{name}: κ₁ moved under κ̃ → κ̃ + ∂δ"));
                break;
            }
        }
    }
    fail_if(failures, format!("heisenberg κ₁ = 0 on {} basis inputs; rolling display matches; 50 gauge shifts per fixture", common::closed_degree_one_basis(heis).len()))
}

fn random_mu(rng: &mut ChaCha8Rng, spec: &FrameSpec, dim_g0: usize) -> Vec<Vec<Poly>> {
    let n = spec.dim;
    (0..spec.fields.len())
        .map(|_| {
            (0..dim_g0)
                .map(|_| {
                    let mut terms = vec![(Monomial::ONE, common::random_rat(rng))];
                    for i in 0..n {
                        terms.push((Monomial::var(i), common::random_rat(rng)));
                    }
                    terms.push((Monomial::var(0).mul(Monomial::var(n - 1)), common::random_rat(rng)));
                    Poly::from_terms(n, terms)
                })
                .collect()
        })
        .collect()
}

fn criterion_6(models: &[(&str, FrameSpec, FrameModel)]) -> Outcome {
    let mut rng = common::rng(107);
    let mut failures = Vec::new();
    for (name, spec, model) in models {
        for _ in 0..20 {
            let mu = random_mu(&mut rng, spec, model.ext().dim_g0());
            match extend_connection(spec, &mu) {
                Ok(r) => {
                    for check in ["curvature_on_chi", "torsion_on_chi"] {
                        if !r.manifold_certificate.passes(check) {
                            failures.push(format!("{name}: {check}"));
                        }
                    }
                }
                Err(e) => failures.push(format!("{name}: {e}")),
            }
        }
    }
    failures.dedup();
    fail_if(failures, format!("20 random μ on each of {} models", models.len()))
}

fn report_of<'a>(solved: &'a [(&str, FrameSpec, ConnectionReport)], name: &str) -> &'a (&'a str, FrameSpec, ConnectionReport) {
    solved.iter().find(|(n, _, _)| *n == name).expect("model")
}

fn criterion_7(solved: &[(&str, FrameSpec, ConnectionReport)], models: &[(&str, FrameSpec, FrameModel)]) -> Outcome {
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    let closed_forms = [
        (Family::Heis23, &["heis_model", "heis_perturbed", "heis_polynomial"][..]),
        (Family::Rolling235, &["rolling_model", "rolling_perturbed"][..]),
        (Family::FreeStep2, &["free2_n3_model", "free2_n4_model"][..]),
    ];
    for (family, names) in closed_forms {
        for name in names {
            let (_, spec, r) = report_of(solved, name);
            match oracle::closed_form_oracle(family, spec) {
                Ok(o) => {
                    let differing: Vec<String> = oracle::compare(r, &o).into_iter().map(|(what, _, _)| what).collect();
                    if !differing.is_empty() {
                        failures.push(format!("{name}: {}", differing.join(", ")));
                    }
                }
                Err(e) => failures.push(format!("{name}: {e}")),
            }
        }
    }
    for name in ["rolling_model", "rolling_perturbed"] {
        let (_, spec, r) = report_of(solved, name);
        let o = oracle::rolling235_projected(spec).unwrap();
        notes.push(format!("{name}: default-rule closed form differs in {} components", oracle::compare(r, &o).len()));
    }
    for name in ["free2_n3_model", "free2_n4_model"] {
        let (_, spec, r) = report_of(solved, name);
        let o = oracle::free_step2_projected(spec).unwrap();
        notes.push(format!("{name}: default-rule closed form differs in {} components", oracle::compare(r, &o).len()));
    }
    let (_, _, model) = models.iter().find(|(n, _, _)| *n == "contact_std_model").unwrap();
    let (_, _, r) = report_of(solved, "contact_std_model");
    for (check, residual) in oracle::contact_conditions(model, r).unwrap() {
        if !zeros(&residual) {
            failures.push(format!("contact_std_model: {check}"));
        }
    }
    println!("     note: {}", notes.join("; "));
    fail_if(failures, "heisenberg, rolling, free step two and contact closed forms".into())
}

fn criterion_8(solved: &[(&str, FrameSpec, ConnectionReport)]) -> Outcome {
    let mut failures = Vec::new();
    for (name, _, r) in solved {
        for c in r.manifold_certificate.checks.iter().filter(|c| c.name.starts_with("tjac") && !c.pass) {
            failures.push(format!("{name}: {}", c.name));
        }
    }
    fail_if(failures, format!("T_Jac checks on {} models", solved.len()))
}

fn criterion_9(solved: &[(&str, FrameSpec, ConnectionReport)]) -> Outcome {
    let (_, _, r) = report_of(solved, "contact_two_eigen_model");
    let want = vec![ri(0), ri(0), ri(0), ri(0), rat(605, 144)];
    if r.grading[4] == want && r.cartan_certificate.all_pass() && r.manifold_certificate.all_pass() {
        Ok("F_B(p) = Z − Υ = (0, 0, 0, 0, 605/144)".into())
    } else {
        Err(format!("F_B(p) = {:?}", r.grading[4].iter().map(carnot_core::exactla::rat_to_string).collect::<Vec<_>>()))
    }
}

fn criterion_10(started: Instant) -> Outcome {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let run = |args: &[&str]| Command::new(env!("CARGO_BIN_EXE_carnot")).current_dir(&dir).args(args).output().expect("binary runs");
    let mut runs: Vec<Vec<&str>> = Vec::new();
    for a in ["heisenberg23.json", "rolling235.json", "free2_n3.json", "free2_n4.json", "contact_std.json", "contact_two_eigen.json"] {
        runs.push(vec!["check", a]);
        runs.push(vec!["complex", a, "--k", "1"]);
    }
    runs.push(vec!["normalize", "heisenberg23.json", "heis_unit_kappa.json"]);
    runs.push(vec!["normalize", "rolling235.json", "zero_kappa.json"]);
    runs.push(vec!["normalize", "rolling235.json", "rolling_non_closed_kappa.json"]);
    for m in [
        "heis_model.json",
        "heis_perturbed.json",
        "heis_polynomial.json",
        "rolling_model.json",
        "rolling_perturbed.json",
        "free2_n3_model.json",
        "free2_n4_model.json",
        "contact_std_model.json",
        "contact_two_eigen_model.json",
    ] {
        runs.push(vec!["frame", m]);
    }
    let mut failures = Vec::new();
    for args in &runs {
        let (a, b) = (run(args), run(args));
        if a.stdout != b.stdout || a.status.code() != b.status.code() {
            failures.push(format!("{args:?}"));
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    if elapsed >= 120.0 {
        failures.push(format!("acceptance run took {elapsed:.1} s"));
    }
    fail_if(failures, format!("{} commands run twice, byte-identical; acceptance run {elapsed:.1} s", runs.len()))
}

fn main() -> ExitCode {
    let started = Instant::now();
    let t = Instant::now();
    let ops = common::all_ops2();
    let built = t.elapsed().as_secs_f64();
    let models: Vec<(&str, FrameSpec, FrameModel)> = fixtures::all_models()
        .into_iter()
        .map(|(n, s)| (n, s.clone(), FrameModel::new(s).expect("fixture model")))
        .collect();
    let solved: Vec<(&str, FrameSpec, ConnectionReport)> =
        models.iter().map(|(n, s, _)| (*n, s.clone(), solve_canonical(s).expect("fixture model solves"))).collect();

    let criteria: Vec<Criterion> = vec![
        ("complex identities", Box::new(|| criterion_1(&ops, built))),
        ("Tanaka rigidity", Box::new(|| criterion_2(&ops))),
        ("P^∞ characterisation", Box::new(|| criterion_3(&ops))),
        ("g0 dimensions", Box::new(|| criterion_4(&ops))),
        ("degree-one solver", Box::new(|| criterion_5(&ops))),
        ("extension recursion", Box::new(|| criterion_6(&models))),
        ("end-to-end closed forms", Box::new(|| criterion_7(&solved, &models))),
        ("manifold certification", Box::new(|| criterion_8(&solved))),
        ("two-eigenvalue contact grading", Box::new(|| criterion_9(&solved))),
        ("CLI determinism and runtime", Box::new(|| criterion_10(started))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
