use inclab_core::energy::{additive_energy_seq, sum_multiplicities_seq};
use inclab_core::hyperplanes::{build_family, sum_hyperplane, select_level};
use inclab_core::incidence::count_incidences_seq;
use inclab_core::lattice::{build_point_set_with_bound, is_on_paraboloid, PointSet};
use inclab_core::rational::{format_rat, parse_rat, rat, Rat};
use inclab_core::rng::SplitMix64;
use inclab_core::transforms::{
    dual_hyperplane_of_point, dual_point_of_hyperplane, invert_point,
};
use inclab_core::exponents::fit_exponent;
use num_traits::Zero;
use proptest::prelude::*;

fn small_point_set() -> impl Strategy<Value = PointSet> {
    ((2usize..=5), (1i64..=2)).prop_map(|(d, b)| build_point_set_with_bound(d, b).unwrap())
}

fn rational() -> impl Strategy<Value = Rat> {
    ((-50i64..=50), (1i64..=20)).prop_map(|(n, d)| rat(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn points_lie_on_paraboloid_and_are_sorted(ps in small_point_set()) {
        let pts: Vec<_> = ps.iter().collect();
        prop_assert!(pts.iter().all(|p| is_on_paraboloid(p)));
        prop_assert!(pts.windows(2).all(|w| w[0] < w[1]));
        let b = ps.truncation();
        let expected = (2 * b as usize + 1).pow(ps.dimension() as u32 - 1);
        prop_assert_eq!(ps.len(), expected);
    }

    #[test]
    fn point_set_text_round_trip(ps in small_point_set()) {
        let text = ps.to_text();
        let back = PointSet::from_text(&text).unwrap();
        prop_assert_eq!(&back, &ps);
        prop_assert_eq!(back.to_text(), text);
    }

    #[test]
    fn sum_table_accounts_for_all_ordered_pairs(ps in small_point_set()) {
        let table = sum_multiplicities_seq(&ps);
        let m = ps.len() as u128;
        prop_assert_eq!(table.total_ordered(), m * m);
        prop_assert_eq!(table.total_unordered(), m * (m + 1) / 2);
    }

    #[test]
    fn energy_dominates_count_squared(ps in small_point_set()) {
        // Cauchy-Schwarz: |P|^4 = (sum r)^2 <= #sums * E <= |P|^2 E.
        let report = additive_energy_seq(&ps);
        let m = ps.len() as u128;
        prop_assert!(report.energy >= m * m);
    }

    #[test]
    fn both_summands_lie_on_their_sum_plane(ps in small_point_set(), ai in any::<prop::sample::Index>(), bi in any::<prop::sample::Index>()) {
        let a = ps.point(ai.index(ps.len())).to_vec();
        let b = ps.point(bi.index(ps.len())).to_vec();
        let v: Vec<i64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let h = sum_hyperplane(&v, ps.dimension()).unwrap();
        prop_assert!(h.contains_lattice(&a));
        prop_assert!(h.contains_lattice(&b));
    }

    #[test]
    fn family_mu_totals_unordered_pairs(ps in small_point_set()) {
        let family = build_family(&ps);
        let m = ps.len() as u128;
        prop_assert_eq!(family.total_mu(), m * (m + 1) / 2);
        for member in family.members() {
            let plane = sum_hyperplane(&member.sum, ps.dimension()).unwrap();
            let count = ps.iter().filter(|p| plane.contains_lattice(p)).count();
            prop_assert!(count as u64 >= member.mu);
        }
    }

    #[test]
    fn selected_level_is_a_pure_dyadic_slice(ps in small_point_set(), bn in 3i64..=6) {
        let family = build_family(&ps);
        let beta = rat(bn, 1);
        let sel = select_level(&family, &beta).unwrap();
        prop_assert!(!sel.subfamily.is_empty());
        for member in sel.subfamily.members() {
            prop_assert_eq!(member.mu.ilog2(), sel.k_prime);
        }
        let expected = family
            .members()
            .iter()
            .filter(|m| m.mu.ilog2() == sel.k_prime)
            .count();
        prop_assert_eq!(sel.subfamily.len(), expected);
    }

    #[test]
    fn incidence_count_matches_naive(ps in small_point_set()) {
        let family = build_family(&ps);
        let idx: Vec<usize> = (0..family.len().min(40)).collect();
        let planes = family.subset(&idx).planes();
        let naive: u64 = planes
            .iter()
            .map(|h| ps.iter().filter(|p| h.contains_lattice(p)).count() as u64)
            .sum();
        prop_assert_eq!(count_incidences_seq(&ps, &planes), naive);
    }

    #[test]
    fn duality_round_trips_points(p in prop::collection::vec(rational(), 2..=6)) {
        let h = dual_hyperplane_of_point(&p).unwrap();
        let back = dual_point_of_hyperplane(&h).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn duality_preserves_incidence(
        p in prop::collection::vec(rational(), 3..=5),
        q in prop::collection::vec(rational(), 3..=5),
    ) {
        prop_assume!(p.len() == q.len());
        let h = dual_hyperplane_of_point(&q).unwrap();
        let dual_h = dual_hyperplane_of_point(&p).unwrap();
        let dual_p = dual_point_of_hyperplane(&h).unwrap();
        prop_assert_eq!(h.contains(&p), dual_h.contains(&dual_p));
    }

    #[test]
    fn inversion_is_an_involution(p in prop::collection::vec(rational(), 2..=6)) {
        prop_assume!(p.iter().any(|c| !c.is_zero()));
        let twice = invert_point(&invert_point(&p).unwrap()).unwrap();
        prop_assert_eq!(twice, p);
    }

    #[test]
    fn rational_text_round_trip(x in rational()) {
        prop_assert_eq!(parse_rat(&format_rat(&x)).unwrap(), x);
    }

    #[test]
    fn rng_nth_matches_streaming(seed in any::<u64>(), len in 1usize..=20) {
        let base = SplitMix64::new(seed);
        let mut streaming = SplitMix64::new(seed);
        for i in 0..len {
            prop_assert_eq!(base.nth(i as u64), streaming.next_u64());
        }
    }

    #[test]
    fn fit_recovers_exact_power_laws(
        slope in -3.0f64..3.0,
        scale in 0.1f64..10.0,
        xs in prop::collection::btree_set(2u32..2000, 3..=12),
    ) {
        let samples: Vec<(f64, f64)> = xs
            .iter()
            .map(|&x| {
                let x = f64::from(x);
                (x, scale * x.powf(slope))
            })
            .collect();
        let fit = fit_exponent(&samples).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-9);
        prop_assert!(fit.residual < 1e-12);
    }
}
