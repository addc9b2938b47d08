mod common;

use kstab::corpus::corpus;
use kstab::error::Error;
use kstab::exactgeom::{integrate_pl, lattice_points, QPolytope};
use kstab::filtration::{convolve, Filtration};
use kstab::rational::int;
use kstab::Rational;
use proptest::prelude::*;

fn grid_gap(a: &kstab::convexfn::ConvexPL, b: &kstab::convexfn::ConvexPL, p: &QPolytope, k: u32) -> Rational {
    lattice_points(p, k)
        .iter()
        .map(|x| a.value(x) - b.value(x))
        .max()
        .expect("grid is nonempty")
}

#[test]
fn corpus_is_multiplicative() {
    for e in corpus(12).unwrap() {
        e.build().unwrap().check_multiplicativity(12).unwrap();
    }
}

#[test]
fn corpus_integrals_dominate() {
    for e in corpus(8).unwrap() {
        let chi = e.build().unwrap();
        let Some(g) = chi.transform() else { continue };
        let base = integrate_pl(&g);
        for k in 1..=8 {
            let gk = chi.table(k).unwrap().envelope().unwrap();
            assert!(integrate_pl(&gk) >= base, "{} k={k}", e.name);
        }
    }
}

#[test]
fn non_multiplicative_tables_are_rejected() {
    let seg = kstab::corpus::segment();
    // i_2(1) = 5 > i_1(0) + i_1(1) = 2
    let err = Filtration::explicit(seg, vec![(1, vec![1, 1]), (2, vec![2, 5, 2])], Some(1)).unwrap_err();
    assert!(matches!(err, Error::NotMultiplicative(_)), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn toric_filtrations_are_multiplicative(chi in common::toric()) {
        prop_assert!(chi.check_multiplicativity(8).is_ok());
    }

    #[test]
    fn extensions_approximate_from_above(chi in common::toric(), k in 1u32..=3, l in 1u32..=3) {
        let tc = chi.testconfig(k).unwrap();
        let base = chi.table(k).unwrap();
        let first = tc.extension(1).unwrap();
        prop_assert_eq!(first.levels(), base.levels());
        let ext = tc.extension(l).unwrap();
        let direct = chi.table(k * l).unwrap();
        let n = chi.bound().unwrap();
        for (a, b) in ext.levels().iter().zip(direct.levels()) {
            prop_assert!(a >= b);
            prop_assert!(*a <= n * (k * l) as i64);
        }
        let gk = base.envelope().unwrap();
        prop_assert!(gk.max() <= int(n));
    }

    #[test]
    fn transform_gap_shrinks_along_divisibility(chi in common::toric()) {
        let g = chi.transform().unwrap();
        let p = chi.polytope();
        let gaps: Vec<Rational> = [1u32, 2, 4, 8]
            .iter()
            .map(|&k| grid_gap(&chi.table(k).unwrap().envelope().unwrap(), &g, p, 8))
            .collect();
        for w in gaps.windows(2) {
            prop_assert!(w[0] >= int(0) && w[1] <= w[0]);
        }
        prop_assert!(integrate_pl(&chi.table(4).unwrap().envelope().unwrap()) >= integrate_pl(&g));
    }

    #[test]
    fn extension_envelopes_decrease_to_the_hull(chi in common::toric(), k in 1u32..=2) {
        let tc = chi.testconfig(k).unwrap();
        let hull = tc.base().envelope().unwrap();
        let p = chi.polytope();
        let mut last: Option<Rational> = None;
        for l in [1u32, 2, 4] {
            let env = tc.extension(l).unwrap().envelope().unwrap();
            let gap = grid_gap(&env, &hull, p, 4 * k);
            prop_assert!(gap >= int(0));
            if let Some(prev) = &last {
                prop_assert!(&gap <= prev);
            }
            last = Some(gap);
        }
    }

    #[test]
    fn convolution_is_commutative(chi in common::toric(), a in 1u32..=3, b in 1u32..=3) {
        let p = chi.polytope();
        let (ta, tb) = (chi.table(a).unwrap(), chi.table(b).unwrap());
        let ab = convolve(p, &ta, &tb).unwrap();
        let ba = convolve(p, &tb, &ta).unwrap();
        prop_assert_eq!(ab.levels(), ba.levels());
        for (x, y) in ab.levels().iter().zip(chi.table(a + b).unwrap().levels()) {
            prop_assert!(x >= y);
        }
    }
}
