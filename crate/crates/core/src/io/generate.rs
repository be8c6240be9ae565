//! Seeded random SDF graphs with a fixed repetition-vector sum.

use std::collections::BTreeSet;

use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::annotate::{augment, AugmentationPolicy};
use crate::error::{Error, Result};
use crate::graph::{repetition_vector, unroll, validate_liveness, SdfActor, SdfChannel, SdfGraph};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub actors: usize,
    /// Mean and variance of the total (in plus out) degree of an actor.
    pub degree_mean: f64,
    pub degree_variance: f64,
    /// Bounds, mean and variance of channel rates.
    pub rate_range: (u64, u64),
    pub rate_mean: f64,
    pub rate_variance: f64,
    pub repetition_sum: u64,
    /// Chance that an extra channel closes a cycle.
    pub back_edge_probability: f64,
    /// Give every actor a one-token self-loop so its firings are sequential.
    pub self_loops: bool,
    /// Base execution times before augmentation, drawn uniformly.
    pub exec_range: (u64, u64),
    pub seed: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            actors: 15,
            degree_mean: 3.0,
            degree_variance: 3.0,
            rate_range: (1, 20),
            rate_mean: 3.0,
            rate_variance: 6.0,
            repetition_sum: 250,
            back_edge_probability: 0.2,
            self_loops: true,
            exec_range: (1, 16),
            seed: 1,
        }
    }
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidGraph(format!("generator parameters: {m}")));
        let (lo, hi) = self.rate_range;
        if self.actors == 0 {
            return bad("actor count must be positive");
        }
        if lo < 1 || lo > hi {
            return bad("rate range must be non-empty and start at 1 or more");
        }
        if self.exec_range.0 > self.exec_range.1 {
            return bad("execution-time range is empty");
        }
        if !(self.degree_mean > 0.0 && self.degree_variance >= 0.0 && self.rate_mean > 0.0 && self.rate_variance >= 0.0)
        {
            return bad("means must be positive and variances non-negative");
        }
        if !(0.0..=1.0).contains(&self.back_edge_probability) {
            return bad("back-edge probability must lie in [0, 1]");
        }
        if self.repetition_sum < self.actors as u64 {
            return bad("repetition sum must be at least the actor count");
        }
        Ok(())
    }
}

/// Integer draw from a normal distribution, clipped to `[lo, hi]`.
fn discrete_normal(rng: &mut ChaCha8Rng, mean: f64, variance: f64, lo: u64, hi: u64) -> u64 {
    let v = match Normal::new(mean, variance.sqrt()) {
        Ok(n) => n.sample(rng).round(),
        Err(_) => mean.round(),
    };
    (v.max(lo as f64).min(hi as f64)) as u64
}

/// A repetition vector summing to the target with `gcd = 1`. Entries stay
/// within the upper rate bound when the sum leaves room for it, which keeps
/// every derived channel rate in range.
fn draw_repetition(rng: &mut ChaCha8Rng, p: &GeneratorParams) -> Option<Vec<u64>> {
    let n = p.actors as u64;
    let hi = p.rate_range.1;
    let cap = if p.repetition_sum + n <= n * hi {
        hi
    } else {
        p.repetition_sum
    };
    let mut q = vec![1u64; p.actors];
    for _ in n..p.repetition_sum {
        loop {
            let i = rng.gen_range(0..q.len());
            if q[i] < cap {
                q[i] += 1;
                break;
            }
        }
    }
    let g = q.iter().fold(0u64, |g, &v| g.gcd(&v));
    (g == 1).then_some(q)
}

fn rates(q: &[u64], src: usize, dst: usize) -> (u64, u64) {
    let g = q[src].gcd(&q[dst]);
    (q[dst] / g, q[src] / g)
}

/// Among `candidates`, a pair whose larger rate is closest to a rate drawn
/// from the rate distribution; pairs outside the rate range are used only
/// when nothing else is left.
fn pick_pair(
    rng: &mut ChaCha8Rng,
    p: &GeneratorParams,
    q: &[u64],
    candidates: &[(usize, usize)],
) -> Option<(usize, usize)> {
    let (lo, hi) = p.rate_range;
    let target = discrete_normal(rng, p.rate_mean, p.rate_variance, lo, hi);
    let score = |&(a, b): &(usize, usize)| {
        let (x, y) = rates(q, a, b);
        let r = x.max(y);
        (r > hi, r.abs_diff(target))
    };
    let best = candidates.iter().map(score).min()?;
    let ties: Vec<&(usize, usize)> = candidates.iter().filter(|c| score(c) == best).collect();
    ties.choose(rng).map(|c| **c)
}

fn draw_structure(rng: &mut ChaCha8Rng, p: &GeneratorParams, q: &[u64]) -> Vec<SdfChannel> {
    let n = p.actors;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut rank = vec![0; n];
    for (k, &a) in order.iter().enumerate() {
        rank[a] = k;
    }
    let degrees: u64 = (0..n)
        .map(|_| discrete_normal(rng, p.degree_mean, p.degree_variance, 1, 2 * n as u64))
        .sum();
    let max_pairs = n * (n - 1) / 2;
    let wanted = ((degrees as usize).div_ceil(2)).clamp(n - 1, max_pairs);

    // unordered pairs; a spanning tree first keeps the graph connected
    let mut pairs = BTreeSet::new();
    for k in 1..n {
        let candidates: Vec<(usize, usize)> = (0..k).map(|j| (order[j], order[k])).collect();
        if let Some(pair) = pick_pair(rng, p, q, &candidates) {
            pairs.insert(pair);
        }
    }
    while pairs.len() < wanted {
        let candidates: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|&(a, b)| !pairs.contains(&(a, b)) && !pairs.contains(&(b, a)))
            .collect();
        match pick_pair(rng, p, q, &candidates) {
            Some(pair) => {
                pairs.insert(pair);
            }
            None => break,
        }
    }

    let mut channels = Vec::new();
    for (a, b) in pairs {
        // forward follows the random topological order; back edges close cycles
        let (early, late) = if rank[a] < rank[b] { (a, b) } else { (b, a) };
        let back = rng.gen_bool(p.back_edge_probability);
        let (src, dst) = if back { (late, early) } else { (early, late) };
        let (prod, cons) = rates(q, src, dst);
        channels.push(SdfChannel {
            src,
            dst,
            prod,
            cons,
            tokens: if back { cons * q[dst] } else { 0 },
        });
    }
    if p.self_loops {
        for a in 0..n {
            channels.push(SdfChannel {
                src: a,
                dst: a,
                prod: 1,
                cons: 1,
                tokens: 1,
            });
        }
    }
    channels
}

const MAX_ATTEMPTS: usize = 64;

/// A connected, consistent SDF graph whose repetition vector sums to
/// `params.repetition_sum` and whose unrolled marked graph is live,
/// annotated by [`augment`] with a seed derived from `params.seed`.
pub fn generate_random(params: &GeneratorParams) -> Result<SdfGraph> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for _ in 0..MAX_ATTEMPTS {
        let Some(q) = draw_repetition(&mut rng, params) else {
            continue;
        };
        let channels = draw_structure(&mut rng, params, &q);
        let actors = (0..params.actors)
            .map(|i| {
                let d = rng.gen_range(params.exec_range.0..=params.exec_range.1);
                SdfActor::new(format!("n{i}"), d)
            })
            .collect();
        let g = SdfGraph::new(actors, channels)?;
        if repetition_vector(&g)? != q {
            continue;
        }
        let unrolled = unroll(&g, params.repetition_sum)?;
        if !validate_liveness(&unrolled.graph).is_live() {
            continue;
        }
        let policy = AugmentationPolicy {
            seed: rng.gen(),
            ..Default::default()
        };
        return augment(&g, &policy);
    }
    Err(Error::GenerationFailed(format!(
        "no graph with {} actors and repetition sum {} after {MAX_ATTEMPTS} attempts",
        params.actors, params.repetition_sum
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::sdf3::write_sdf3;
    use proptest::prelude::*;

    #[test]
    fn default_parameters() {
        let g = generate_random(&GeneratorParams::default()).unwrap();
        assert_eq!(g.actors().len(), 15);
        assert_eq!(repetition_vector(&g).unwrap().iter().sum::<u64>(), 250);
        assert!(g.channels().iter().all(|c| c.prod <= 20 && c.cons <= 20));
        assert!(g
            .actors()
            .iter()
            .all(|a| a.wakeup == 1 && a.shutdown == 2 && a.exec_time >= 1));
    }

    #[test]
    fn deterministic() {
        let p = GeneratorParams {
            seed: 42,
            ..Default::default()
        };
        let a = generate_random(&p).unwrap();
        let b = generate_random(&p).unwrap();
        assert_eq!(write_sdf3("g", &a), write_sdf3("g", &b));
        let other = generate_random(&GeneratorParams { seed: 43, ..p }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn rejects_bad_parameters() {
        let p = GeneratorParams {
            rate_range: (5, 2),
            ..Default::default()
        };
        assert!(generate_random(&p).is_err());
        // a lone actor can only have q = (1)
        let impossible = GeneratorParams {
            actors: 1,
            repetition_sum: 2,
            ..Default::default()
        };
        assert!(matches!(generate_random(&impossible), Err(Error::GenerationFailed(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn always_consistent_and_live(seed in any::<u64>(), actors in 2usize..10, sum in prop::sample::select(vec![24u64, 60, 120])) {
            let p = GeneratorParams { seed, actors, repetition_sum: sum, ..Default::default() };
            let g = generate_random(&p).unwrap();
            let q = repetition_vector(&g).unwrap();
            prop_assert_eq!(q.iter().sum::<u64>(), sum);
            let u = unroll(&g, sum).unwrap();
            prop_assert!(validate_liveness(&u.graph).is_live());
        }
    }
}
