use invlin_core::oracle::{argmax, argmax_bruteforce, has_unique_maximizer};
use invlin_core::{EnumerationCap, FeasibleSet, Vector};
use proptest::prelude::*;

fn cap() -> EnumerationCap {
    EnumerationCap::default()
}

fn vector(n: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-1.0f64..1.0, n).prop_map(|v| Vector::new(v).unwrap())
}

/// Integer-valued objectives produce ties, which exercise the tie-breaking paths.
fn tied_vector(n: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-2i32..=2, n).prop_map(|v| Vector::new(v.into_iter().map(f64::from).collect()).unwrap())
}

fn vertex_set() -> impl Strategy<Value = FeasibleSet> {
    (1usize..6, 1usize..10).prop_flat_map(|(n, m)| {
        prop::collection::vec(prop::collection::vec(0u8..=4, n), m).prop_map(|pts| {
            FeasibleSet::vertices(
                pts.into_iter().map(|p| Vector::new(p.into_iter().map(|x| f64::from(x) / 4.0).collect()).unwrap()).collect(),
            )
            .unwrap()
        })
    })
}

fn knapsack() -> impl Strategy<Value = FeasibleSet> {
    prop::collection::vec(1u64..10, 1..9).prop_flat_map(|w| {
        let total: u64 = w.iter().sum();
        (Just(w), 0..=total + 2).prop_map(|(w, c)| FeasibleSet::knapsack(w, c).unwrap())
    })
}

fn dag() -> impl Strategy<Value = FeasibleSet> {
    (3usize..7).prop_flat_map(|k| {
        let pairs: Vec<(usize, usize)> = (0..k).flat_map(|u| (u + 1..k).map(move |v| (u, v))).collect();
        let len = pairs.len();
        prop::collection::vec(any::<bool>(), len).prop_filter_map("no source-sink path", move |keep| {
            let arcs: Vec<_> = pairs.iter().zip(&keep).filter(|(_, k)| **k).map(|(a, _)| *a).collect();
            if arcs.is_empty() {
                return None;
            }
            FeasibleSet::dag(k, arcs, 0, k - 1).ok()
        })
    })
}

fn any_set() -> impl Strategy<Value = FeasibleSet> {
    prop_oneof![vertex_set(), (1usize..9).prop_map(|n| FeasibleSet::hypercube(n).unwrap()), knapsack(), dag()]
}

fn with_objective(tied: bool) -> impl Strategy<Value = (FeasibleSet, Vector)> {
    any_set().prop_flat_map(move |s| {
        let n = s.dim();
        let c = if tied { tied_vector(n).boxed() } else { vector(n).boxed() };
        (Just(s), c)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn oracle_matches_enumeration((set, c) in with_objective(false)) {
        let fast = argmax(&set, &c).unwrap();
        let slow = argmax_bruteforce(&set, &c, cap()).unwrap();
        prop_assert!(set.contains(&fast.maximizer));
        prop_assert!((fast.optimal_value - slow.optimal_value).abs() <= 1e-12 * (1.0 + slow.optimal_value.abs()));
        prop_assert!((c.dot(&fast.maximizer).unwrap() - fast.optimal_value).abs() <= 1e-12 * (1.0 + fast.optimal_value.abs()));
    }

    #[test]
    fn oracle_matches_enumeration_under_ties((set, c) in with_objective(true)) {
        let fast = argmax(&set, &c).unwrap();
        let slow = argmax_bruteforce(&set, &c, cap()).unwrap();
        prop_assert_eq!(fast.optimal_value, slow.optimal_value);
        prop_assert_eq!(has_unique_maximizer(&set, &c, cap()).unwrap(), slow.tie_count == 1);
    }

    #[test]
    fn maximizer_dominates_every_member((set, c) in with_objective(false)) {
        let best = argmax(&set, &c).unwrap().optimal_value;
        for m in set.members(cap()).unwrap() {
            prop_assert!(c.dot(&m).unwrap() <= best + 1e-12 * (1.0 + best.abs()));
        }
    }
}

#[test]
fn enumeration_is_refused_past_the_cap() {
    let set = FeasibleSet::hypercube(12).unwrap();
    assert!(set.members(EnumerationCap(100)).is_err());
    let c = Vector::new(vec![0.5; 12]).unwrap();
    // the sign rule needs no enumeration
    assert_eq!(argmax(&set, &c).unwrap().optimal_value, 6.0);
}
