use carnot_core::exactla::{decompose, gram_adjoint, gram_pinv, induced_gram, rat, IPSpace, Mat, Rat};
use num_traits::Zero;
use proptest::prelude::*;

fn small_rat() -> impl Strategy<Value = Rat> {
    (-4i64..=4, 1i64..=3).prop_map(|(n, d)| rat(n, d))
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Mat> {
    prop::collection::vec(small_rat(), rows * cols).prop_map(move |v| Mat::from_rows(v.chunks(cols).map(<[Rat]>::to_vec).collect()))
}

/// `AᵀA + I`, positive definite.
fn spd(n: usize) -> impl Strategy<Value = IPSpace> {
    matrix(n, n).prop_map(move |a| IPSpace::new(a.transpose().mul(&a).add(&Mat::identity(n))).expect("positive definite"))
}

/// Matrix of prescribed shape together with grams on both sides. Low rank is
/// forced half of the time by a product through a thin middle.
fn problem() -> impl Strategy<Value = (Mat, IPSpace, IPSpace)> {
    (1usize..=4, 1usize..=4, 0usize..=4).prop_flat_map(|(r, c, mid)| {
        let m = if mid == 0 || mid >= r.min(c) {
            matrix(r, c).boxed()
        } else {
            (matrix(r, mid), matrix(mid, c)).prop_map(|(a, b)| a.mul(&b)).boxed()
        };
        (m, spd(c), spd(r))
    })
}

fn inner(g: &IPSpace, u: &[Rat], v: &[Rat]) -> Rat {
    g.inner(u, v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pinv_satisfies_penrose_conditions((m, dom, cod) in problem()) {
        let p = gram_pinv(&m, &dom, &cod).unwrap();
        prop_assert_eq!(m.mul(&p).mul(&m), m.clone());
        prop_assert_eq!(p.mul(&m).mul(&p), p.clone());
        let mp = m.mul(&p);
        let pm = p.mul(&m);
        prop_assert_eq!(gram_adjoint(&mp, &cod, &cod).unwrap(), mp);
        prop_assert_eq!(gram_adjoint(&pm, &dom, &dom).unwrap(), pm);
    }

    #[test]
    fn adjoint_moves_across_the_pairing((m, dom, cod) in problem(), v in prop::collection::vec(small_rat(), 4), w in prop::collection::vec(small_rat(), 4)) {
        let a = gram_adjoint(&m, &dom, &cod).unwrap();
        let (v, w) = (&v[..m.cols()], &w[..m.rows()]);
        prop_assert_eq!(inner(&cod, &m.mul_vec(v), w), inner(&dom, v, &a.mul_vec(w)));
    }

    #[test]
    fn pinv_and_adjoint_share_image_and_kernel((m, dom, cod) in problem()) {
        let p = gram_pinv(&m, &dom, &cod).unwrap();
        let a = gram_adjoint(&m, &dom, &cod).unwrap();
        let r = m.rank();
        prop_assert_eq!(p.rank(), r);
        prop_assert_eq!(a.rank(), r);
        prop_assert_eq!(p.hstack(&a).rank(), r);
        prop_assert_eq!(p.vstack(&a).rank(), r);
    }

    #[test]
    fn rank_nullity((m, _dom, _cod) in problem()) {
        let d = decompose(&m);
        prop_assert_eq!(d.rank + d.kernel_basis.cols(), m.cols());
        prop_assert!(m.mul(&d.kernel_basis).is_zero());
        prop_assert_eq!(d.kernel_basis.rank(), d.kernel_basis.cols());
        prop_assert_eq!(d.image_basis.cols(), d.rank);
        prop_assert_eq!(d.image_basis.hstack(&m).rank(), d.rank);
    }

    /// For `M*M` idempotent the pseudo-inverse is the adjoint.
    #[test]
    fn pinv_is_adjoint_on_partial_isometries(
        (n, cols, picks) in (1usize..=4).prop_flat_map(|n| (Just(n), Just((0..n).collect::<Vec<_>>()).prop_shuffle(), prop::collection::vec(any::<bool>(), n))),
    ) {
        let mut m = Mat::zeros(n, n);
        for (j, &c) in cols.iter().enumerate() {
            if picks[j] {
                m[(c, j)] = rat(1, 1);
            }
        }
        let std = IPSpace::standard(n);
        let a = gram_adjoint(&m, &std, &std).unwrap();
        prop_assert_eq!(a.mul(&m).mul(&a.mul(&m)), a.mul(&m));
        prop_assert_eq!(gram_pinv(&m, &std, &std).unwrap(), a);
    }

    #[test]
    fn induced_gram_does_not_see_the_spanning_set(
        (l, dom) in (1usize..=3).prop_flat_map(|r| (Just(r), 0usize..=2)).prop_flat_map(|(r, extra)| (matrix(r, r + extra), spd(r + extra))),
        t in matrix(5, 5),
    ) {
        prop_assume!(l.rank() == l.rows());
        let c = l.cols();
        let t = t.select_rows(&(0..c).collect::<Vec<_>>()).select_cols(&(0..c).collect::<Vec<_>>()).add(&Mat::identity(c).scale(&rat(7, 1)));
        prop_assume!(!t.det().is_zero());
        // same map and same inner product, written in the basis given by the columns of `t`
        let l2 = l.mul(&t);
        let dom2 = IPSpace::new(t.transpose().mul(dom.gram()).mul(&t)).unwrap();
        let (g1, g2) = (induced_gram(&l, &dom).unwrap(), induced_gram(&l2, &dom2).unwrap());
        prop_assert_eq!(g1.gram(), g2.gram());
    }
}
