use diophantine_core::geometry::covering::union_measure;
use diophantine_core::geometry::{cover_5r, essential_mass_bound, essential_split};
use diophantine_core::{Ball, BallFamily, Interval, MeasureModel};
use proptest::prelude::*;

fn family(dim: usize) -> impl Strategy<Value = BallFamily> {
    prop::collection::vec((prop::collection::vec(-5.0f64..5.0, dim), 0.01f64..2.0), 1..60)
        .prop_map(|v| BallFamily::new(v.into_iter().map(|(c, r)| Ball::new(c, r).unwrap()).collect()).unwrap())
}

fn disjoint_intervals() -> impl Strategy<Value = Vec<Interval>> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..8).prop_map(|cuts| {
        let mut pts: Vec<f64> = cuts.iter().flat_map(|&(a, b)| [a, b]).collect();
        pts.sort_by(f64::total_cmp);
        pts.chunks(2).filter(|c| c[1] > c[0]).map(|c| Interval::new(c[0], c[1])).collect()
    })
}

proptest! {
    #[test]
    fn selection_is_disjoint_and_covers(fam in (1usize..=3).prop_flat_map(family)) {
        let sel = cover_5r(&fam);
        prop_assert!(sel.family(&fam).pairwise_disjoint());
        prop_assert!(sel.containment_violations(&fam).is_empty());
        prop_assert_eq!(sel.witness.len(), fam.len());
        for &w in &sel.witness {
            prop_assert!(sel.selected.contains(&w));
        }
    }

    #[test]
    fn selection_is_deterministic(fam in family(2)) {
        prop_assert_eq!(cover_5r(&fam).selected, cover_5r(&fam).selected);
    }

    #[test]
    fn essential_mass_at_most_two(fams in prop::collection::vec(disjoint_intervals(), 1..6)) {
        let fams: Vec<_> = fams.into_iter().filter(|f| !f.is_empty()).collect();
        prop_assume!(!fams.is_empty());
        let mu = MeasureModel::LebesgueInterval { lo: 0.0, hi: 1.0 };
        let split = essential_split(&fams, &mu).unwrap();
        let all: Vec<Interval> = fams.concat();
        let omega = union_measure(all, &mu).unwrap();
        prop_assert!(essential_mass_bound(&split, omega).holds);
    }
}
