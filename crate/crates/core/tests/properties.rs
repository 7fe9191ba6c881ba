//! Randomized invariants: parametrization round trips, projection
//! linearity, relabeling invariance, duality between membership
//! screening and convex certificates, and normal-form confluence of the
//! operator algebra.

use proptest::prelude::*;

use bellcomm::model::{
    one_way_no_signaling, table_to_vector, to_correlation, validate_prob_table, vector_to_table,
    Direction, Picture, PointList, ProbTable, Scenario,
};
use bellcomm::ncpoly::{nc_mul, NCMonomial, NCPolynomial};
use bellcomm::polytope::{
    convex_certificate, facets_to_vertices, membership, vertices_to_facets, CertificateOutcome,
};
use bellcomm::protocols::{vertex_set, DEFAULT_PROTOCOL_CAP};
use bellcomm::Rat;

fn scenario221() -> Scenario {
    Scenario::new(2, 2, 1).unwrap()
}

/// A valid random table: nonnegative integer weights per context,
/// normalized by their sum.
fn table_strategy() -> impl Strategy<Value = ProbTable> {
    proptest::collection::vec(0u32..20, 16).prop_filter_map("context sums to zero", |weights| {
        let s = scenario221();
        let mut ok = true;
        let t = ProbTable::from_fn(s, |a, b, i, j| {
            let ctx = (i * 2 + j) * 4;
            let total: u32 = weights[ctx..ctx + 4].iter().sum();
            if total == 0 {
                ok = false;
                return Rat::zero();
            }
            Rat::new(weights[ctx + a * 2 + b] as i64, total as i64)
        });
        ok.then_some(t)
    })
}

fn rat_weight() -> impl Strategy<Value = Rat> {
    (0i64..50).prop_map(Rat::int)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_tables_are_valid(t in table_strategy()) {
        prop_assert!(validate_prob_table(&t).is_valid());
    }

    #[test]
    fn table_vector_round_trip(t in table_strategy()) {
        let v = table_to_vector(&t);
        prop_assert_eq!(v.coords().len(), 12);
        let back = vector_to_table(&v);
        prop_assert_eq!(back, t);
    }

    #[test]
    fn correlation_is_linear_under_mixing(
        t1 in table_strategy(),
        t2 in table_strategy(),
        num in 0i64..=10,
    ) {
        let lambda = Rat::new(num, 10);
        let mixed = t1.mix(&t2, &lambda);
        let lhs = to_correlation(&mixed).unwrap();
        let c1 = to_correlation(&t1).unwrap();
        let c2 = to_correlation(&t2).unwrap();
        let mu = Rat::one() - &lambda;
        for (i, j) in scenario221().contexts() {
            let expected = &lambda * c1.entry(i, j) + &mu * c2.entry(i, j);
            prop_assert_eq!(lhs.entry(i, j), &expected);
        }
    }

    #[test]
    fn no_signaling_invariant_under_receiver_relabeling(t in table_strategy()) {
        // relabeling B's outcomes must not change the A-to-B verdict
        let relabeled = ProbTable::from_fn(scenario221(), |a, b, i, j| {
            t.entry(a, 1 - b, i, j).clone()
        });
        let before = one_way_no_signaling(&t, Direction::AtoB).unwrap().holds;
        let after = one_way_no_signaling(&relabeled, Direction::AtoB).unwrap().holds;
        prop_assert_eq!(before, after);
        // and mirrored for B-to-A under relabeling A's outcomes
        let relabeled_a = ProbTable::from_fn(scenario221(), |a, b, i, j| {
            t.entry(1 - a, b, i, j).clone()
        });
        let before = one_way_no_signaling(&t, Direction::BtoA).unwrap().holds;
        let after = one_way_no_signaling(&relabeled_a, Direction::BtoA).unwrap().holds;
        prop_assert_eq!(before, after);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// membership against the facet side agrees with the exact convex
    /// certificate against the vertex side, on mixtures and on scaled-out
    /// points alike.
    #[test]
    fn membership_matches_convex_certificate(
        weights in proptest::collection::vec(rat_weight(), 16),
        stretch_num in 1i64..=3,
    ) {
        let s = Scenario::new(2, 2, 0).unwrap();
        let locals = vertex_set(&s, Picture::Probability, DEFAULT_PROTOCOL_CAP).unwrap();
        let h = vertices_to_facets(&locals).unwrap();
        let total: Rat = weights.iter().sum();
        prop_assume!(!total.is_zero());
        let mixture: Vec<Rat> = (0..12)
            .map(|c| {
                let acc: Rat = weights.iter().zip(&locals.points).map(|(w, p)| w * &p[c]).sum();
                acc / &total
            })
            .collect();
        // stretch away from the uniform center; factor 1 keeps the point
        let center = Rat::new(1, 4);
        let stretch = Rat::int(stretch_num);
        let point: Vec<Rat> = mixture
            .iter()
            .map(|x| &center + &stretch * (x - &center))
            .collect();
        let member = membership(&point, &h).unwrap().member;
        let cert = convex_certificate(&point, &locals.points).unwrap();
        match cert {
            CertificateOutcome::Member(c) => {
                prop_assert!(member, "certificate found but facet screening refused");
                let sum: Rat = c.weights.iter().sum();
                prop_assert_eq!(sum, Rat::one());
            }
            CertificateOutcome::Separated { .. } => prop_assert!(!member),
        }
    }

    /// Every nonempty subset of 0/1 vertices is reproduced by the
    /// V -> H -> V round trip: 0/1 points are extreme in any hull.
    #[test]
    fn dd_round_trip_on_random_vertex_subsets(mask in 1u16..u16::MAX) {
        let s = Scenario::new(2, 2, 0).unwrap();
        let locals = vertex_set(&s, Picture::Probability, DEFAULT_PROTOCOL_CAP).unwrap();
        let subset: Vec<Vec<Rat>> = locals
            .points
            .iter()
            .enumerate()
            .filter(|(idx, _)| mask & (1 << idx) != 0)
            .map(|(_, p)| p.clone())
            .collect();
        let v = PointList::new(Picture::Probability, None, subset);
        let h = vertices_to_facets(&v).unwrap();
        let back = facets_to_vertices(&h).unwrap();
        prop_assert_eq!(back.points, v.points);
    }
}

fn small_poly_strategy() -> impl Strategy<Value = NCPolynomial> {
    proptest::collection::vec(
        (
            proptest::collection::vec(0u8..3, 0..3),
            proptest::collection::vec(0u8..3, 0..3),
            -6i64..=6,
        ),
        1..5,
    )
    .prop_map(|terms| {
        let mut p = NCPolynomial::zero();
        for (a_raw, b_raw, num) in terms {
            // build the monomial through generator products so it is reduced
            let mut mono = NCMonomial::identity();
            for a in a_raw {
                mono = mono.mul(&NCMonomial::generator_a(a));
            }
            for b in b_raw {
                mono = mono.mul(&NCMonomial::generator_b(b));
            }
            p.add_term(mono, Rat::new(num, 3));
        }
        p
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The normal form does not depend on multiplication order.
    #[test]
    fn nc_mul_is_associative(
        p in small_poly_strategy(),
        q in small_poly_strategy(),
        r in small_poly_strategy(),
    ) {
        let left = nc_mul(&nc_mul(&p, &q), &r);
        let right = nc_mul(&p, &nc_mul(&q, &r));
        prop_assert_eq!(left, right);
    }

    #[test]
    fn abs_sum_is_submultiplicative(
        p in small_poly_strategy(),
        q in small_poly_strategy(),
    ) {
        let prod = nc_mul(&p, &q);
        prop_assert!(prod.coeff_abs_sum() <= p.coeff_abs_sum() * q.coeff_abs_sum());
    }
}
