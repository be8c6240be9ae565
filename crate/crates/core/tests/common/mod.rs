//! Independent oracles and random instances shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use hopskip::{ActorSpec, Channel, DecisionVector, MarkedGraph, PowerParams, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_power(rng: &mut ChaCha8Rng, positive_rest: bool) -> PowerParams {
    let lo = if positive_rest { 1 } else { 0 };
    let mut draw = |lo: i64| r(rng.gen_range(lo..=20), 10);
    PowerParams {
        exe: draw(0),
        idle: draw(lo),
        sd: draw(0),
        wu: draw(0),
        slp: draw(lo),
    }
}

/// A live marked graph with `n` actors, one decision group each. Channels
/// that go forward in a random order carry 0 to 2 tokens, the others at
/// least one.
pub fn random_marked_graph(rng: &mut ChaCha8Rng, n: usize) -> MarkedGraph {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut rank = vec![0; n];
    for (k, &a) in order.iter().enumerate() {
        rank[a] = k;
    }
    let actors = (0..n)
        .map(|id| ActorSpec {
            id,
            name: format!("v{id}"),
            exec_time: rng.gen_range(0..=9),
            wakeup: rng.gen_range(0..=3),
            shutdown: rng.gen_range(0..=3),
            power: random_power(rng, true),
            group: id,
        })
        .collect();
    let edges = rng.gen_range(n..=2 * n + 2);
    let mut channels = Vec::new();
    for _ in 0..edges {
        let src = rng.gen_range(0..n);
        let dst = rng.gen_range(0..n);
        let tokens = if rank[src] < rank[dst] {
            rng.gen_range(0..=2)
        } else {
            rng.gen_range(1..=3)
        };
        channels.push(Channel { src, dst, tokens });
    }
    MarkedGraph::with_actor_groups(actors, channels).unwrap()
}

/// Every simple cycle as a list of actors, each with the fewest tokens over
/// parallel channels on its edges. Enumerated by DFS from each cycle's
/// smallest actor.
pub fn simple_cycles(g: &MarkedGraph) -> Vec<(Vec<usize>, u64)> {
    let n = g.len();
    let mut best: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for c in g.channels() {
        let e = best.entry((c.src, c.dst)).or_insert(c.tokens);
        *e = (*e).min(c.tokens);
    }
    let mut adj = vec![Vec::new(); n];
    for (&(s, d), &t) in &best {
        adj[s].push((d, t));
    }
    let mut out = Vec::new();
    for start in 0..n {
        let mut path = vec![start];
        let mut on_path = vec![false; n];
        on_path[start] = true;
        dfs(start, start, 0, &adj, &mut path, &mut on_path, &mut out);
    }
    out
}

fn dfs(
    start: usize,
    v: usize,
    tokens: u64,
    adj: &[Vec<(usize, u64)>],
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<(Vec<usize>, u64)>,
) {
    for &(w, t) in &adj[v] {
        if w == start {
            out.push((path.clone(), tokens + t));
        } else if w > start && !on_path[w] {
            on_path[w] = true;
            path.push(w);
            dfs(start, w, tokens + t, adj, path, on_path, out);
            path.pop();
            on_path[w] = false;
        }
    }
}

/// Largest cycle ratio with weights `d + x * w`, and every actor's own bound
/// `d + x * (w + s)`. `None` for a token-free cycle.
pub fn oracle_min_period(g: &MarkedGraph, cycles: &[(Vec<usize>, u64)], x: &DecisionVector) -> Option<Rational> {
    let on = |i: usize| x.get(g.actors()[i].group);
    let mut best = Rational::zero();
    for a in g.actors() {
        let bound = a.exec_time + if on(a.id) { a.wakeup + a.shutdown } else { 0 };
        best = best.max(Rational::from(bound));
    }
    for (cycle, tokens) in cycles {
        let weight: u64 = cycle
            .iter()
            .map(|&i| {
                let a = &g.actors()[i];
                a.exec_time + if on(i) { a.wakeup } else { 0 }
            })
            .sum();
        if *tokens == 0 {
            return None;
        }
        best = best.max(r(weight as i64, *tokens as i64));
    }
    Some(best)
}

/// Energy per iteration written out term by term.
pub fn oracle_energy(g: &MarkedGraph, period: &Rational, x: &DecisionVector) -> Rational {
    let mut e = Rational::zero();
    for a in g.actors() {
        let p = &a.power;
        let d = Rational::from(a.exec_time);
        if x.get(a.group) {
            let w = Rational::from(a.wakeup);
            let s = Rational::from(a.shutdown);
            let sleep = period - &w - &d - &s;
            e += &p.wu * &w + &p.exe * &d + &p.sd * &s + &p.slp * sleep;
        } else {
            e += &p.exe * &d + &p.idle * (period - &d);
        }
    }
    e
}

pub fn all_vectors(groups: usize) -> Vec<DecisionVector> {
    (0..1u64 << groups)
        .map(|m| DecisionVector::from_mask(groups, m))
        .collect()
}

/// Non-dominated `(P, E)` pairs in increasing `P`, computed by pairwise
/// comparison.
pub fn oracle_front(points: &[(Rational, Rational)]) -> Vec<(Rational, Rational)> {
    let mut front: Vec<(Rational, Rational)> = points
        .iter()
        .filter(|(p, e)| !points.iter().any(|(q, f)| q <= p && f <= e && (q < p || f < e)))
        .cloned()
        .collect();
    front.sort();
    front.dedup();
    front
}

/// The true front: for every candidate period, the cheapest configuration
/// whose own minimum period fits.
pub fn double_brute_force(g: &MarkedGraph) -> Vec<(Rational, Rational)> {
    let cycles = simple_cycles(g);
    let xs = all_vectors(g.groups());
    let minima: Vec<Rational> = xs
        .iter()
        .map(|x| oracle_min_period(g, &cycles, x).expect("live graph"))
        .collect();
    let mut candidates = minima.clone();
    candidates.sort();
    candidates.dedup();
    let mut points = Vec::new();
    for p in &candidates {
        let best = xs
            .iter()
            .zip(&minima)
            .filter(|(_, m)| *m <= p)
            .map(|(x, _)| oracle_energy(g, p, x))
            .min()
            .expect("some configuration fits");
        points.push((p.clone(), best));
    }
    oracle_front(&points)
}

/// Three actors in a ring holding two tokens, `d = 3`, `w = s = 1`, with
/// free transitions and sleep but costly idling. Each self-powered actor
/// adds `1/2` to the period and saves energy, so the front is
/// `(9/2, 27/2), (5, 13), (11/2, 23/2), (6, 9)` and its `11/2` point is
/// invisible to a sweep over integer periods.
pub fn rational_ring() -> MarkedGraph {
    let actors = (0..3)
        .map(|id| ActorSpec {
            id,
            name: format!("r{id}"),
            exec_time: 3,
            wakeup: 1,
            shutdown: 1,
            power: PowerParams {
                exe: r(1, 1),
                idle: r(1, 1),
                sd: r(0, 1),
                wu: r(0, 1),
                slp: r(0, 1),
            },
            group: id,
        })
        .collect();
    let channels = vec![
        Channel {
            src: 0,
            dst: 1,
            tokens: 0,
        },
        Channel {
            src: 1,
            dst: 2,
            tokens: 1,
        },
        Channel {
            src: 2,
            dst: 0,
            tokens: 1,
        },
    ];
    MarkedGraph::with_actor_groups(actors, channels).unwrap()
}
