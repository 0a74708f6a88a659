use invlin_core::loss::{estimate_loss, fenchel_young_loss, suboptimality_loss, LossBreakdown};
use invlin_core::oracle::argmax;
use invlin_core::{EnumerationCap, FeasibleSet, Vector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tau(a: f64, b: f64) -> f64 {
    invlin_core::tau(a, b)
}

/// A set, one of its members, and two objectives.
fn triple() -> impl Strategy<Value = (FeasibleSet, Vector, Vector, Vector)> {
    let set = prop_oneof![
        (1usize..6, 1usize..10).prop_flat_map(|(n, m)| prop::collection::vec(prop::collection::vec(0.0f64..1.0, n), m)
            .prop_map(|pts| FeasibleSet::vertices(pts.into_iter().map(|p| Vector::new(p).unwrap()).collect()).unwrap())),
        (1usize..9).prop_map(|n| FeasibleSet::hypercube(n).unwrap()),
        prop::collection::vec(1u64..10, 1..9).prop_map(|w| {
            let c = w.iter().sum::<u64>() / 2;
            FeasibleSet::knapsack(w, c).unwrap()
        }),
    ];
    (set, any::<u64>()).prop_flat_map(|(s, seed)| {
        let n = s.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = s.sample_member(&mut rng, EnumerationCap::default()).unwrap();
        let v = || prop::collection::vec(-1.0f64..1.0, n).prop_map(|v| Vector::new(v).unwrap());
        (Just(s), Just(x), v(), v())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn fenchel_young_equals_suboptimality((set, x, c, _) in triple()) {
        let fy = fenchel_young_loss(&set, &x, &c).unwrap();
        let sub = suboptimality_loss(&set, &x, &c).unwrap().value;
        prop_assert!((fy - sub).abs() <= tau(fy, sub));
    }

    #[test]
    fn suboptimality_is_nonnegative((set, x, c, _) in triple()) {
        prop_assert!(suboptimality_loss(&set, &x, &c).unwrap().value >= 0.0);
    }

    #[test]
    fn residual_is_a_subgradient((set, x, c, c2) in triple()) {
        let at_c = suboptimality_loss(&set, &x, &c).unwrap();
        let g = at_c.x_hat.sub(&x).unwrap();
        let lhs = suboptimality_loss(&set, &x, &c2).unwrap().value;
        let rhs = at_c.value + g.dot(&c2.sub(&c).unwrap()).unwrap();
        prop_assert!(lhs >= rhs - tau(lhs, rhs));
    }

    #[test]
    fn convex_along_segments((set, x, c1, c2) in triple(), theta in 0.0f64..=1.0) {
        let mid = c1.scale(theta).add(&c2.scale(1.0 - theta)).unwrap();
        let l = |c: &Vector| suboptimality_loss(&set, &x, c).unwrap().value;
        let lhs = l(&mid);
        let rhs = theta * l(&c1) + (1.0 - theta) * l(&c2);
        prop_assert!(lhs <= rhs + tau(lhs, rhs));
    }

    #[test]
    fn losses_sum_to_the_linearized_term((set, x, c, c_star) in triple()) {
        let b = LossBreakdown::evaluate(&set, &x, &c, Some(&c_star)).unwrap();
        let x_hat = argmax(&set, &c).unwrap().maximizer;
        let est = estimate_loss(&c_star, &x, &x_hat).unwrap();
        let lin = x_hat.sub(&x).unwrap().dot(&c.sub(&c_star).unwrap()).unwrap();
        let total = b.suboptimality + est;
        prop_assert!((total - lin).abs() <= tau(total, lin));
    }
}
