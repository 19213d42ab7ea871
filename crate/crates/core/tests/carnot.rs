use carnot_core::carnot::{wedge_gram, CarnotAlgebra, ExtendedAlgebra};
use carnot_core::exactla::{induced_gram, rat, IPSpace, Mat, Rat};
use carnot_core::fixtures;
use num_traits::Zero;

fn unit(n: usize, i: usize) -> Vec<Rat> {
    let mut v = vec![Rat::zero(); n];
    v[i] = rat(1, 1);
    v
}

#[test]
fn jacobi_on_every_basis_triple_of_g() {
    for (name, spec) in fixtures::all() {
        let ext = ExtendedAlgebra::from_spec(spec).unwrap();
        let n = ext.dim();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let (ua, ub, uc) = (unit(n, a), unit(n, b), unit(n, c));
                    let t1 = ext.bracket(&ua, &ext.bracket(&ub, &uc));
                    let t2 = ext.bracket(&ub, &ext.bracket(&uc, &ua));
                    let t3 = ext.bracket(&uc, &ext.bracket(&ua, &ub));
                    assert!(t1.iter().zip(&t2).zip(&t3).all(|((x, y), z)| (x + y + z).is_zero()), "{name}: ({a},{b},{c})");
                }
            }
        }
        assert!(ext.jacobi_holds(), "{name}");
    }
}

#[test]
fn g0_dimensions() {
    let expected = [
        ("heisenberg23", 1),
        ("rolling235", 1),
        ("free_step2_n3", 3),
        ("free_step2_n4", 6),
        ("contact_std", 4),
        ("contact_two_eigen", 2),
    ];
    for ((name, spec), (ename, dim)) in fixtures::all().into_iter().zip(expected) {
        assert_eq!(name, ename);
        let ext = ExtendedAlgebra::from_spec(spec).unwrap();
        assert_eq!(ext.dim_g0(), dim, "{name}");
    }
}

#[test]
fn derivations_preserve_layers_and_are_fixed_by_the_first_layer() {
    for (name, spec) in fixtures::all() {
        let alg = CarnotAlgebra::build(spec).unwrap();
        let g0 = alg.isometry_algebra();
        for d in &g0 {
            assert!(d.is_derivation_of(&alg), "{name}");
            for (r, wr) in alg.weights().iter().enumerate() {
                for (c, wc) in alg.weights().iter().enumerate() {
                    if wr != wc {
                        assert!(d.matrix[(r, c)].is_zero(), "{name}: entry ({r},{c})");
                    }
                }
            }
            // skew on g_{-1}
            let r1 = d.restrict_to_layer(&alg, 1);
            let g = &alg.spec().gram_minus1;
            assert_eq!(r1.transpose().mul(g), g.mul(&r1).neg(), "{name}");
        }
        // restriction to g_{-1} is injective on span g_0
        let flat = Mat::from_columns(
            alg.layer_dim(1).pow(2),
            &g0.iter().map(|d| d.restrict_to_layer(&alg, 1).entries().to_vec()).collect::<Vec<_>>(),
        );
        assert_eq!(flat.rank(), g0.len(), "{name}");
    }
}

#[test]
fn g0_is_closed_under_commutators() {
    for (name, spec) in fixtures::all() {
        let alg = CarnotAlgebra::build(spec).unwrap();
        let g0 = alg.isometry_algebra();
        let n = alg.dim();
        let basis = Mat::from_columns(n * n, &g0.iter().map(|d| d.matrix.entries().to_vec()).collect::<Vec<_>>());
        for x in &g0 {
            for y in &g0 {
                let c = x.commutator(y);
                assert!(c.is_derivation_of(&alg), "{name}");
                let with = basis.hstack(&Mat::column_vector(c.matrix.entries()));
                assert_eq!(with.rank(), basis.rank(), "{name}");
            }
        }
    }
}

#[test]
fn full_gram_layout() {
    for (name, spec) in fixtures::all() {
        let alg = CarnotAlgebra::build(spec.clone()).unwrap();
        let g = alg.full_gram().gram();
        for a in 0..alg.dim() {
            for b in 0..alg.dim() {
                if alg.weight(a) != alg.weight(b) {
                    assert!(g[(a, b)].is_zero(), "{name}");
                }
            }
        }
        let l1: Vec<usize> = alg.layer(1).collect();
        assert_eq!(g.select_rows(&l1).select_cols(&l1), spec.gram_minus1, "{name}");
    }
}

/// Rebuilding each layer's gram from `∧²` with a changed basis of the
/// spanning set reproduces the stored one.
#[test]
fn induced_inner_products_do_not_see_the_spanning_set() {
    for (name, spec) in fixtures::all() {
        let alg = CarnotAlgebra::build(spec).unwrap();
        let full = alg.full_gram().gram().clone();
        for w in 2..=alg.step() {
            let (pairs, l) = alg.wedge_bracket_map(w);
            let dom = wedge_gram(&full, &pairs);
            let m = pairs.len();
            // upper unitriangular change of basis with a nontrivial diagonal
            let mut t = Mat::identity(m);
            for i in 0..m {
                t[(i, i)] = rat(i as i64 + 2, 1);
                for j in i + 1..m {
                    t[(i, j)] = rat((i + 2 * j) as i64 % 5 - 2, 3);
                }
            }
            let g1 = induced_gram(&l, &IPSpace::new(dom.clone()).unwrap()).unwrap();
            let g2 = induced_gram(&l.mul(&t), &IPSpace::new(t.transpose().mul(&dom).mul(&t)).unwrap()).unwrap();
            assert_eq!(g1.gram(), g2.gram(), "{name}: layer {w}");
            let idx: Vec<usize> = alg.layer(w).collect();
            assert_eq!(*g1.gram(), full.select_rows(&idx).select_cols(&idx), "{name}: layer {w}");
        }
        // idempotent under re-derivation
        let again = CarnotAlgebra::build(alg.spec().clone()).unwrap();
        assert_eq!(again.full_gram().gram(), alg.full_gram().gram(), "{name}");
    }
}

#[test]
fn extended_bracket_follows_the_derivation_action() {
    for (name, spec) in fixtures::all() {
        let ext = ExtendedAlgebra::from_spec(spec).unwrap();
        let n = ext.dim_minus();
        let dim = ext.dim();
        for (i, s) in ext.g0().iter().enumerate() {
            for a in 0..n {
                let got = ext.bracket(&unit(dim, n + i), &unit(dim, a));
                let mut want = s.matrix.column(a);
                want.resize(dim, Rat::zero());
                assert_eq!(got, want, "{name}");
            }
        }
        let g = ext.gram().gram();
        for a in 0..n {
            for i in 0..ext.dim_g0() {
                assert!(g[(a, n + i)].is_zero(), "{name}");
            }
        }
    }
}
