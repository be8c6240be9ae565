//! Synchronous dataflow graphs and their expansion into marked graphs.

use std::collections::{BTreeMap, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{ActorSpec, Channel, MarkedGraph, PowerParams};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Default bound on the number of actor instances `unroll` may create.
pub const DEFAULT_INSTANCE_CAP: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SdfActor {
    pub name: String,
    pub exec_time: u64,
    pub wakeup: u64,
    pub shutdown: u64,
    pub power: PowerParams,
}

impl SdfActor {
    /// An actor with execution time `d`, no mode-switch delays and the
    /// normalized power model.
    pub fn new(name: impl Into<String>, exec_time: u64) -> Self {
        SdfActor {
            name: name.into(),
            exec_time,
            wakeup: 0,
            shutdown: 0,
            power: PowerParams::normalized(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SdfChannel {
    pub src: usize,
    pub dst: usize,
    /// Tokens produced per firing of `src`.
    pub prod: u64,
    /// Tokens consumed per firing of `dst`.
    pub cons: u64,
    pub tokens: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SdfGraph {
    actors: Vec<SdfActor>,
    channels: Vec<SdfChannel>,
}

impl SdfGraph {
    pub fn new(actors: Vec<SdfActor>, channels: Vec<SdfChannel>) -> Result<Self> {
        for (k, c) in channels.iter().enumerate() {
            if c.src >= actors.len() || c.dst >= actors.len() {
                return Err(Error::InvalidGraph(format!("channel {k} references a missing actor")));
            }
            if c.prod == 0 || c.cons == 0 {
                return Err(Error::InvalidGraph(format!("channel {k} has a zero rate")));
            }
        }
        for a in &actors {
            a.power.validate()?;
        }
        Ok(SdfGraph { actors, channels })
    }

    pub fn actors(&self) -> &[SdfActor] {
        &self.actors
    }

    pub fn actors_mut(&mut self) -> &mut [SdfActor] {
        &mut self.actors
    }

    pub fn channels(&self) -> &[SdfChannel] {
        &self.channels
    }

    pub fn actor_index(&self, name: &str) -> Option<usize> {
        self.actors.iter().position(|a| a.name == name)
    }

    /// True when every rate is 1, i.e. the graph already is a marked graph.
    pub fn is_homogeneous(&self) -> bool {
        self.channels.iter().all(|c| c.prod == 1 && c.cons == 1)
    }
}

/// Smallest positive integer solution of the balance equations
/// `q[src] * prod = q[dst] * cons`, normalized per weakly connected component.
pub fn repetition_vector(sdf: &SdfGraph) -> Result<Vec<u64>> {
    let n = sdf.actors.len();
    if n == 0 {
        return Err(Error::InvalidGraph("SDF graph has no actors".into()));
    }
    let mut adj: Vec<Vec<(usize, BigInt, BigInt)>> = vec![Vec::new(); n];
    for c in &sdf.channels {
        // q[dst] = q[src] * prod / cons
        adj[c.src].push((c.dst, BigInt::from(c.prod), BigInt::from(c.cons)));
        adj[c.dst].push((c.src, BigInt::from(c.cons), BigInt::from(c.prod)));
    }

    let mut ratio: Vec<Option<Rational>> = vec![None; n];
    let mut q = vec![0u64; n];
    for root in 0..n {
        if ratio[root].is_some() {
            continue;
        }
        ratio[root] = Some(Rational::one());
        let mut component = vec![root];
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            let rv = ratio[v].clone().expect("visited");
            for (w, num, den) in &adj[v] {
                let expected = &rv * Rational::from_bigints(num.clone(), den.clone())?;
                match &ratio[*w] {
                    None => {
                        ratio[*w] = Some(expected);
                        component.push(*w);
                        queue.push_back(*w);
                    }
                    Some(existing) if *existing != expected => {
                        return Err(Error::Inconsistent(format!(
                            "actors {} and {} disagree on relative firing rates",
                            sdf.actors[v].name, sdf.actors[*w].name
                        )));
                    }
                    Some(_) => {}
                }
            }
        }
        let lcm = component
            .iter()
            .fold(BigInt::one(), |acc, &v| acc.lcm(ratio[v].as_ref().unwrap().denom()));
        let scaled: Vec<BigInt> = component
            .iter()
            .map(|&v| {
                let r = ratio[v].as_ref().unwrap();
                r.numer() * (&lcm / r.denom())
            })
            .collect();
        let gcd = scaled.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
        for (&v, s) in component.iter().zip(&scaled) {
            q[v] = (s / &gcd)
                .to_u64()
                .ok_or(Error::ArithmeticOverflow("repetition vector"))?;
        }
    }
    Ok(q)
}

/// A marked graph expanded from an SDF graph.
#[derive(Clone, Debug)]
pub struct Unrolled {
    pub graph: MarkedGraph,
    /// SDF actor each instance comes from.
    pub instance_of: Vec<usize>,
    /// Zero-based firing index of each instance within one iteration.
    pub firing: Vec<u64>,
    pub repetition: Vec<u64>,
}

/// Expands `sdf` into a marked graph with one actor per firing in an
/// iteration.
///
/// Tokens on each channel are consumed first-in first-out, initial tokens
/// first. Consumer firing `k` of an iteration reads tokens
/// `k*cons .. (k+1)*cons`; token `t` is produced by global producer firing
/// `floor((t - tokens) / prod)`, which may lie in an earlier iteration. That
/// iteration distance becomes the number of initial tokens on the
/// precedence edge. Each instance joins the decision group of its SDF actor.
pub fn unroll(sdf: &SdfGraph, cap: u64) -> Result<Unrolled> {
    let q = repetition_vector(sdf)?;
    let total: u128 = q.iter().map(|&v| v as u128).sum();
    if total > cap as u128 {
        return Err(Error::Overflow { needed: total, cap });
    }

    let mut base = Vec::with_capacity(q.len());
    let mut actors = Vec::with_capacity(total as usize);
    let mut instance_of = Vec::with_capacity(total as usize);
    let mut firing = Vec::with_capacity(total as usize);
    for (a, (sa, &qa)) in sdf.actors.iter().zip(&q).enumerate() {
        base.push(actors.len());
        for k in 0..qa {
            let name = if qa == 1 {
                sa.name.clone()
            } else {
                format!("{}_{}", sa.name, k + 1)
            };
            actors.push(ActorSpec {
                id: actors.len(),
                name,
                exec_time: sa.exec_time,
                wakeup: sa.wakeup,
                shutdown: sa.shutdown,
                power: sa.power.clone(),
                group: a,
            });
            instance_of.push(a);
            firing.push(k);
        }
    }

    let mut channels = Vec::new();
    for c in &sdf.channels {
        let qa = q[c.src] as i128;
        let prod = c.prod as i128;
        let cons = c.cons as i128;
        let delay = c.tokens as i128;
        // (consumer firing, producer instance) -> fewest tokens
        let mut edges: BTreeMap<(u64, u64), u64> = BTreeMap::new();
        for k in 0..q[c.dst] {
            let first = k as i128 * cons;
            for t in first..first + cons {
                let produced = Integer::div_floor(&(t - delay), &prod);
                let instance = produced.mod_floor(&qa) as u64;
                let distance = -Integer::div_floor(&produced, &qa);
                let tokens = u64::try_from(distance).map_err(|_| Error::ArithmeticOverflow("unroll token distance"))?;
                edges
                    .entry((k, instance))
                    .and_modify(|e| *e = (*e).min(tokens))
                    .or_insert(tokens);
            }
        }
        for ((k, instance), tokens) in edges {
            channels.push(Channel {
                src: base[c.src] + instance as usize,
                dst: base[c.dst] + k as usize,
                tokens,
            });
        }
    }

    let names = sdf.actors.iter().map(|a| a.name.clone()).collect();
    Ok(Unrolled {
        graph: MarkedGraph::new(actors, channels, names)?,
        instance_of,
        firing,
        repetition: q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{validate_liveness, Liveness};
    use proptest::prelude::*;

    fn chan(src: usize, dst: usize, prod: u64, cons: u64, tokens: u64) -> SdfChannel {
        SdfChannel {
            src,
            dst,
            prod,
            cons,
            tokens,
        }
    }

    fn actors(n: usize) -> Vec<SdfActor> {
        (0..n).map(|i| SdfActor::new(format!("s{i}"), 1)).collect()
    }

    #[test]
    fn single_actor() {
        let g = SdfGraph::new(actors(1), vec![]).unwrap();
        assert_eq!(repetition_vector(&g).unwrap(), vec![1]);
    }

    #[test]
    fn two_to_three() {
        let g = SdfGraph::new(actors(2), vec![chan(0, 1, 2, 3, 0)]).unwrap();
        let q = repetition_vector(&g).unwrap();
        assert_eq!(q, vec![3, 2]);
        // substitution check
        assert_eq!(q[0] * 2, q[1] * 3);
    }

    #[test]
    fn symmetric_pair() {
        let g = SdfGraph::new(actors(2), vec![chan(0, 1, 1, 1, 0), chan(1, 0, 1, 1, 1)]).unwrap();
        assert_eq!(repetition_vector(&g).unwrap(), vec![1, 1]);
    }

    #[test]
    fn inconsistent_cycle() {
        let g = SdfGraph::new(actors(2), vec![chan(0, 1, 2, 1, 0), chan(1, 0, 1, 1, 1)]).unwrap();
        assert!(matches!(repetition_vector(&g), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn components_are_normalized_separately() {
        let g = SdfGraph::new(actors(4), vec![chan(0, 1, 2, 4, 0), chan(2, 3, 3, 1, 0)]).unwrap();
        assert_eq!(repetition_vector(&g).unwrap(), vec![2, 1, 1, 3]);
    }

    #[test]
    fn samplerate_chain() {
        let g = SdfGraph::new(
            actors(6),
            vec![
                chan(0, 1, 1, 1, 0),
                chan(1, 2, 2, 3, 0),
                chan(2, 3, 2, 7, 0),
                chan(3, 4, 8, 7, 0),
                chan(4, 5, 5, 1, 0),
            ],
        )
        .unwrap();
        let q = repetition_vector(&g).unwrap();
        assert_eq!(q, vec![147, 147, 98, 28, 32, 160]);
        assert_eq!(q.iter().sum::<u64>(), 612);
    }

    #[test]
    fn unroll_two_to_three_precedences() {
        let g = SdfGraph::new(actors(2), vec![chan(0, 1, 2, 3, 0)]).unwrap();
        let u = unroll(&g, DEFAULT_INSTANCE_CAP).unwrap();
        assert_eq!(u.graph.len(), 5);
        assert_eq!(u.instance_of, vec![0, 0, 0, 1, 1]);
        let mut edges: Vec<(usize, usize, u64)> = u.graph.channels().iter().map(|c| (c.src, c.dst, c.tokens)).collect();
        edges.sort();
        // b1 <- a1, a2 ; b2 <- a2, a3
        assert_eq!(edges, vec![(0, 3, 0), (1, 3, 0), (1, 4, 0), (2, 4, 0)]);
        assert_eq!(u.graph.groups(), 2);
    }

    #[test]
    fn unroll_self_loop_serializes_firings() {
        let g = SdfGraph::new(actors(2), vec![chan(0, 1, 3, 1, 0), chan(1, 1, 1, 1, 1)]).unwrap();
        let u = unroll(&g, DEFAULT_INSTANCE_CAP).unwrap();
        let mut self_chain: Vec<(usize, usize, u64)> = u
            .graph
            .channels()
            .iter()
            .filter(|c| u.instance_of[c.src] == 1 && u.instance_of[c.dst] == 1)
            .map(|c| (c.src, c.dst, c.tokens))
            .collect();
        self_chain.sort();
        assert_eq!(self_chain, vec![(1, 2, 0), (2, 3, 0), (3, 1, 1)]);
    }

    #[test]
    fn unroll_initial_tokens_on_multirate_back_edge() {
        // a -> b (2:3), b -> a (3:2) carrying 4 initial tokens
        let g = SdfGraph::new(actors(2), vec![chan(0, 1, 2, 3, 0), chan(1, 0, 3, 2, 4)]).unwrap();
        let u = unroll(&g, DEFAULT_INSTANCE_CAP).unwrap();
        assert!(validate_liveness(&u.graph).is_live());
        let back: Vec<(usize, usize, u64)> = u
            .graph
            .channels()
            .iter()
            .filter(|c| u.instance_of[c.src] == 1)
            .map(|c| (c.src, c.dst, c.tokens))
            .collect();
        // the initial tokens stand for the last four outputs of the previous
        // iteration: a1 reads b1', b2'; a2 reads b2', b2'; a3 reads b1 of
        // the current iteration
        assert_eq!(back, vec![(3, 0, 1), (4, 0, 1), (4, 1, 1), (3, 2, 0)]);
    }

    #[test]
    fn unroll_deadlocked_sdf_gives_dead_cycle() {
        let g = SdfGraph::new(actors(2), vec![chan(0, 1, 1, 1, 0), chan(1, 0, 1, 1, 0)]).unwrap();
        let u = unroll(&g, DEFAULT_INSTANCE_CAP).unwrap();
        assert!(matches!(validate_liveness(&u.graph), Liveness::DeadCycle(_)));
    }

    #[test]
    fn instance_cap() {
        let g = SdfGraph::new(actors(2), vec![chan(0, 1, 1000, 1, 0)]).unwrap();
        assert!(matches!(
            unroll(&g, 500),
            Err(Error::Overflow { needed: 1001, cap: 500 })
        ));
    }

    #[test]
    fn homogeneous_unroll_is_identity() {
        let g = SdfGraph::new(
            actors(3),
            vec![
                chan(0, 1, 1, 1, 0),
                chan(1, 2, 1, 1, 2),
                chan(2, 0, 1, 1, 1),
                chan(0, 1, 1, 1, 3),
            ],
        )
        .unwrap();
        let u = unroll(&g, DEFAULT_INSTANCE_CAP).unwrap();
        let direct: Vec<Channel> = g
            .channels()
            .iter()
            .map(|c| Channel {
                src: c.src,
                dst: c.dst,
                tokens: c.tokens,
            })
            .collect();
        assert_eq!(u.graph.channels(), direct.as_slice());
        assert_eq!(u.instance_of, vec![0, 1, 2]);
    }

    proptest! {
        #[test]
        fn repetition_vector_is_minimal_solution(
            rates in proptest::collection::vec((1u64..9, 1u64..9), 1..6)
        ) {
            let n = rates.len() + 1;
            let channels: Vec<SdfChannel> = rates
                .iter()
                .enumerate()
                .map(|(i, &(p, c))| chan(i, i + 1, p, c, 0))
                .collect();
            let g = SdfGraph::new(actors(n), channels.clone()).unwrap();
            let q = repetition_vector(&g).unwrap();
            for c in &channels {
                prop_assert_eq!(q[c.src] * c.prod, q[c.dst] * c.cons);
                // any positive multiple still balances
                prop_assert_eq!(3 * q[c.src] * c.prod, 3 * q[c.dst] * c.cons);
            }
            let gcd = q.iter().fold(0u64, |acc, &v| acc.gcd(&v));
            prop_assert_eq!(gcd, 1);

            let u = unroll(&g, DEFAULT_INSTANCE_CAP).unwrap();
            prop_assert_eq!(u.graph.len() as u64, q.iter().sum::<u64>());
            for (inst, &a) in u.instance_of.iter().enumerate() {
                let src = &g.actors()[a];
                let act = &u.graph.actors()[inst];
                prop_assert_eq!(act.exec_time, src.exec_time);
                prop_assert_eq!(act.group, a);
            }
            let mut seen = vec![false; n];
            for &a in &u.instance_of { seen[a] = true; }
            prop_assert!(seen.iter().all(|&s| s));
        }
    }
}
