//! Normalized 2-D hypervolume and hypervolume ratio of fronts.

use serde::{Deserialize, Serialize};

use crate::dse::Front;
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationBox {
    pub period: (Rational, Rational),
    pub energy: (Rational, Rational),
}

impl NormalizationBox {
    /// Per-objective bounds over the union of `fronts`. `None` when every
    /// front is empty.
    pub fn from_fronts(fronts: &[&Front]) -> Option<Self> {
        let mut points = fronts.iter().flat_map(|f| f.iter());
        let first = points.next()?;
        let mut b = NormalizationBox {
            period: (first.period.clone(), first.period.clone()),
            energy: (first.energy.clone(), first.energy.clone()),
        };
        for p in points {
            if p.period < b.period.0 {
                b.period.0 = p.period.clone();
            }
            if p.period > b.period.1 {
                b.period.1 = p.period.clone();
            }
            if p.energy < b.energy.0 {
                b.energy.0 = p.energy.clone();
            }
            if p.energy > b.energy.1 {
                b.energy.1 = p.energy.clone();
            }
        }
        Some(b)
    }
}

fn scale(v: &Rational, (lo, hi): &(Rational, Rational)) -> Rational {
    if hi == lo {
        Rational::zero()
    } else {
        (v - lo) / (hi - lo)
    }
}

/// Maps every point into `[0, 1]^2`; a degenerate objective maps to 0.
pub fn normalize(front: &Front, b: &NormalizationBox) -> Result<Vec<(Rational, Rational)>> {
    front
        .iter()
        .map(|p| {
            let inside = |v: &Rational, (lo, hi): &(Rational, Rational)| v >= lo && v <= hi;
            if !inside(&p.period, &b.period) || !inside(&p.energy, &b.energy) {
                return Err(Error::OutOfBox {
                    p: Box::new(p.period.clone()),
                    e: Box::new(p.energy.clone()),
                });
            }
            Ok((scale(&p.period, &b.period), scale(&p.energy, &b.energy)))
        })
        .collect()
}

/// Area of the part of `[0, 1]^2` weakly dominated by `points`, with the
/// reference point at `(1, 1)`. Input order does not matter, and dominated
/// input points add nothing.
pub fn hypervolume(points: &[(Rational, Rational)]) -> Rational {
    let mut sorted: Vec<&(Rational, Rational)> = points.iter().collect();
    sorted.sort();
    let one = Rational::one();
    let mut area = Rational::zero();
    let mut best_y = one.clone();
    for (i, (x, y)) in sorted.iter().enumerate() {
        if *y < best_y {
            best_y = y.clone();
        }
        let next_x = sorted.get(i + 1).map(|p| &p.0).unwrap_or(&one);
        let width = next_x - x;
        area += width * (&one - &best_y);
    }
    area
}

/// `HV(app) / HV(reference)`; both must be normalized with the same box.
pub fn hypervolume_ratio(app: &[(Rational, Rational)], reference: &[(Rational, Rational)]) -> Result<Rational> {
    let denom = hypervolume(reference);
    if denom.is_zero() {
        return Err(Error::Degenerate);
    }
    Ok(hypervolume(app) / denom)
}

/// Normalizes both fronts over their union and returns the ratio.
pub fn compare_fronts(app: &Front, reference: &Front) -> Result<Rational> {
    let b = NormalizationBox::from_fronts(&[app, reference]).ok_or(Error::Degenerate)?;
    hypervolume_ratio(&normalize(app, &b)?, &normalize(reference, &b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dse::{pareto_filter, ExploredPoint};
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    fn front(pairs: &[(i64, i64)]) -> Front {
        pareto_filter(
            &pairs
                .iter()
                .map(|&(p, e)| ExploredPoint::new(Rational::integer(p), Rational::integer(e), "0".parse().unwrap()))
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn unit_truths() {
        assert_eq!(hypervolume(&[(r(0, 1), r(0, 1))]), r(1, 1));
        assert_eq!(hypervolume(&[(r(1, 2), r(1, 2))]), r(1, 4));
        assert_eq!(hypervolume(&[(r(0, 1), r(1, 2)), (r(1, 2), r(0, 1))]), r(3, 4));
        assert_eq!(hypervolume(&[]), Rational::zero());
    }

    #[test]
    fn normalization() {
        let b = NormalizationBox {
            period: (r(0, 1), r(10, 1)),
            energy: (r(0, 1), r(10, 1)),
        };
        let f = front(&[(5, 5)]);
        assert_eq!(normalize(&f, &b).unwrap(), vec![(r(1, 2), r(1, 2))]);
        let f = front(&[(0, 0)]);
        assert_eq!(normalize(&f, &b).unwrap(), vec![(r(0, 1), r(0, 1))]);
        let f = front(&[(11, 0)]);
        assert!(matches!(normalize(&f, &b), Err(Error::OutOfBox { .. })));
        let flat = NormalizationBox {
            period: (r(3, 1), r(3, 1)),
            energy: (r(0, 1), r(10, 1)),
        };
        assert_eq!(normalize(&front(&[(3, 10)]), &flat).unwrap(), vec![(r(0, 1), r(1, 1))]);
    }

    #[test]
    fn ratio_cases() {
        let reference = front(&[(0, 10), (5, 5), (10, 0)]);
        assert_eq!(compare_fronts(&reference, &reference).unwrap(), Rational::one());
        let missing = front(&[(0, 10), (10, 0)]);
        assert!(compare_fronts(&missing, &reference).unwrap() < Rational::one());
        // a box whose reference front sits on the far corner has no volume
        let pts = [(r(1, 1), r(1, 1))];
        assert!(matches!(hypervolume_ratio(&pts, &pts), Err(Error::Degenerate)));
    }

    fn arb_points() -> impl Strategy<Value = Vec<(Rational, Rational)>> {
        proptest::collection::vec((0i64..=20, 0i64..=20), 0..8)
            .prop_map(|v| v.into_iter().map(|(a, b)| (r(a, 20), r(b, 20))).collect())
    }

    proptest! {
        #[test]
        fn bounded_and_monotone(points in arb_points(), extra in (0i64..=20, 0i64..=20)) {
            let hv = hypervolume(&points);
            prop_assert!(hv <= Rational::one());
            let has_origin = points.iter().any(|p| p.0.is_zero() && p.1.is_zero());
            prop_assert_eq!(hv == Rational::one(), has_origin);
            let mut more = points.clone();
            more.push((r(extra.0, 20), r(extra.1, 20)));
            prop_assert!(hypervolume(&more) >= hv);
        }

        #[test]
        fn order_invariant(points in arb_points(), seed in any::<u64>()) {
            let mut shuffled = points.clone();
            let len = shuffled.len();
            if len > 1 {
                for i in 0..len {
                    let j = (seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64) % len as u64) as usize;
                    shuffled.swap(i, j);
                }
            }
            prop_assert_eq!(hypervolume(&shuffled), hypervolume(&points));
        }

        #[test]
        fn self_ratio_is_one(points in arb_points()) {
            prop_assume!(!hypervolume(&points).is_zero());
            prop_assert_eq!(hypervolume_ratio(&points, &points).unwrap(), Rational::one());
        }
    }
}
