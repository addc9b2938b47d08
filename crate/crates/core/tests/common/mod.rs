#![allow(dead_code)]

use kstab::convexfn::ConvexPL;
use kstab::corpus::{segment, square, triangle};
use kstab::exactgeom::QPolytope;
use kstab::filtration::{pl_from_ints, Filtration};
use proptest::prelude::*;

pub fn domain(which: usize) -> QPolytope {
    match which {
        0 => segment(),
        1 => square(),
        _ => triangle(),
    }
}

/// Max of 1 to 3 affine forms with small integer data on the segment, square or triangle.
pub fn convex_pl() -> impl Strategy<Value = ConvexPL> {
    (0usize..3).prop_flat_map(|which| {
        let n = if which == 0 { 1 } else { 2 };
        prop::collection::vec((prop::collection::vec(-3i64..=3, n), -2i64..=2), 1..=3).prop_map(move |pieces| {
            let refs: Vec<(&[i64], i64)> = pieces.iter().map(|(a, c)| (a.as_slice(), *c)).collect();
            pl_from_ints(&domain(which), &refs).expect("valid pieces")
        })
    })
}

pub fn toric() -> impl Strategy<Value = Filtration> {
    convex_pl().prop_map(|f| Filtration::toric(f).expect("toric filtration"))
}
