use crate::vector::Vector;

/// A primal norm on the action space paired with its dual on predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormPair {
    /// Primal `ℓ∞`, dual `ℓ1`.
    LinfL1,
    /// Primal and dual `ℓ2`.
    L2L2,
}

impl NormPair {
    pub fn primal(self, v: &Vector) -> f64 {
        match self {
            NormPair::LinfL1 => linf(v),
            NormPair::L2L2 => l2(v),
        }
    }

    pub fn dual(self, v: &Vector) -> f64 {
        match self {
            NormPair::LinfL1 => l1(v),
            NormPair::L2L2 => l2(v),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NormPair::LinfL1 => "linf-l1",
            NormPair::L2L2 => "l2-l2",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "linf-l1" => Some(NormPair::LinfL1),
            "l2-l2" => Some(NormPair::L2L2),
            _ => None,
        }
    }
}

fn linf(v: &Vector) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn l1(v: &Vector) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

fn l2(v: &Vector) -> f64 {
    // hypot-style scaling keeps large entries from overflowing
    let scale = linf(v);
    if scale == 0.0 {
        return 0.0;
    }
    scale * v.iter().map(|x| (x / scale).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(NormPair::LinfL1.primal(&v(&[1.0, -3.0, 2.0])), 3.0);
        assert_eq!(NormPair::LinfL1.dual(&v(&[1.0, -3.0, 2.0])), 6.0);
        assert_eq!(NormPair::L2L2.primal(&v(&[3.0, 4.0])), 5.0);
        assert_eq!(NormPair::L2L2.dual(&Vector::zeros(3)), 0.0);
    }

    fn vec_strategy(n: usize) -> impl Strategy<Value = Vector> {
        prop::collection::vec(-10.0f64..10.0, n).prop_map(|e| Vector::new(e).unwrap())
    }

    fn pair() -> impl Strategy<Value = NormPair> {
        prop_oneof![Just(NormPair::LinfL1), Just(NormPair::L2L2)]
    }

    proptest! {
        #[test]
        fn norm_axioms(p in pair(), a in vec_strategy(5), b in vec_strategy(5), s in -5.0f64..5.0) {
            for norm in [|p: NormPair, v: &Vector| p.primal(v), |p: NormPair, v: &Vector| p.dual(v)] {
                let na = norm(p, &a);
                prop_assert!(na >= 0.0);
                prop_assert!((norm(p, &a.scale(s)) - s.abs() * na).abs() <= 1e-9 * (1.0 + na * s.abs()));
                let sum = a.add(&b).unwrap();
                prop_assert!(norm(p, &sum) <= na + norm(p, &b) + 1e-9);
            }
            prop_assert_eq!(p.primal(&Vector::zeros(5)), 0.0);
        }

        #[test]
        fn holder_inequality(p in pair(), c in vec_strategy(6), x in vec_strategy(6)) {
            let lhs = c.dot(&x).unwrap().abs();
            prop_assert!(lhs <= p.dual(&c) * p.primal(&x) + 1e-9 * (1.0 + lhs));
        }

        #[test]
        fn dual_norm_is_max_over_primal_unit_ball(p in pair(), c in vec_strategy(4)) {
            // extreme points of the primal unit ball: sign vectors for ℓ∞, c/‖c‖ for ℓ2
            let best = match p {
                NormPair::LinfL1 => (0..16u32)
                    .map(|mask| {
                        let u = Vector::new((0..4).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect()).unwrap();
                        c.dot(&u).unwrap()
                    })
                    .fold(f64::NEG_INFINITY, f64::max),
                NormPair::L2L2 => {
                    let n = p.primal(&c);
                    if n == 0.0 { 0.0 } else { c.dot(&c.scale(1.0 / n)).unwrap() }
                }
            };
            prop_assert!((best - p.dual(&c)).abs() <= 1e-9 * (1.0 + best.abs()));
        }
    }
}
