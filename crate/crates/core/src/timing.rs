//! Minimum sustainable period and periodic schedules for a fixed decision
//! vector.
//!
//! For a period `P` the channel constraints
//! `tau_j + tokens * P >= tau_i + d_i + x_i * w_i` form a system of
//! difference constraints. It is feasible iff the constraint graph with edge
//! weights `d_i + x_i * w_i - tokens * P` has no positive cycle, and the
//! longest-path potentials are a valid schedule. The minimum period is the
//! largest cycle ratio `sum(weight) / sum(tokens)`, bounded below by every
//! actor's own busy time; it is found by repeatedly raising a candidate
//! period to the ratio of a positive cycle until none remains.
//!
//! With `P = p/q` every edge weight is scaled by `q`, so the longest-path
//! search runs on checked `i128` integers and the results stay exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{validate_liveness, DecisionVector, MarkedGraph};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EffectiveWeight {
    /// Delay from the start of a firing until its outputs are available:
    /// `d + x * w`.
    pub edge: u64,
    /// Minimum period the actor alone can sustain: `d + x * (w + s)`.
    pub self_bound: u64,
}

pub fn effective_weights(g: &MarkedGraph, x: &DecisionVector) -> Result<Vec<EffectiveWeight>> {
    g.check_decisions(x)?;
    Ok(g.actors()
        .iter()
        .map(|a| {
            if x.get(a.group) {
                EffectiveWeight {
                    edge: a.exec_time + a.wakeup,
                    self_bound: a.busy_sp(),
                }
            } else {
                EffectiveWeight {
                    edge: a.exec_time,
                    self_bound: a.exec_time,
                }
            }
        })
        .collect())
}

/// How start times relate to the actor's activity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartAnchor {
    /// `tau_i` is the instant the actor becomes fireable; a self-powered
    /// actor then wakes up for `w` before executing.
    #[default]
    Fireability,
    /// `tau_i` is the instant execution begins; a self-powered actor has
    /// already woken up during `[tau_i - w, tau_i)`.
    ExecutionStart,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub period: Rational,
    pub starts: Vec<Rational>,
    #[serde(default)]
    pub anchor: StartAnchor,
}

impl Schedule {
    /// Fireability instants, whatever the anchor.
    pub fn fireability_times(&self, g: &MarkedGraph, x: &DecisionVector) -> Result<Vec<Rational>> {
        g.check_decisions(x)?;
        if self.starts.len() != g.len() {
            return Err(Error::DimensionMismatch {
                expected: g.len(),
                got: self.starts.len(),
            });
        }
        Ok(match self.anchor {
            StartAnchor::Fireability => self.starts.clone(),
            StartAnchor::ExecutionStart => g
                .actors()
                .iter()
                .zip(&self.starts)
                .map(|(a, t)| {
                    if x.get(a.group) {
                        t - Rational::from(a.wakeup)
                    } else {
                        t.clone()
                    }
                })
                .collect(),
        })
    }

    /// Converts to execution-start times, shifted so the earliest is 0.
    pub fn to_execution_starts(&self, g: &MarkedGraph, x: &DecisionVector) -> Result<Schedule> {
        let fire = self.fireability_times(g, x)?;
        let starts: Vec<Rational> = g
            .actors()
            .iter()
            .zip(fire)
            .map(|(a, t)| {
                if x.get(a.group) {
                    t + Rational::from(a.wakeup)
                } else {
                    t
                }
            })
            .collect();
        Ok(Schedule {
            period: self.period.clone(),
            starts: normalize(starts),
            anchor: StartAnchor::ExecutionStart,
        })
    }
}

fn normalize(mut starts: Vec<Rational>) -> Vec<Rational> {
    if let Some(min) = starts.iter().min().cloned() {
        for t in &mut starts {
            *t = &*t - &min;
        }
    }
    starts
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// `tau_dst + tokens * P >= tau_src + weight` fails.
    Channel {
        channel: usize,
        src: usize,
        dst: usize,
        available: Rational,
        required: Rational,
    },
    /// `P >= d + x * (w + s)` fails.
    SelfLoop {
        actor: usize,
        period: Rational,
        required: Rational,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Channel {
                channel,
                src,
                dst,
                available,
                required,
            } => write!(
                f,
                "channel {channel} ({src} -> {dst}): data available at {available}, needed by {required}"
            ),
            Violation::SelfLoop {
                actor,
                period,
                required,
            } => {
                write!(f, "actor {actor}: period {period} below its own bound {required}")
            }
        }
    }
}

/// Checks every channel and self-loop constraint exactly and returns all
/// violations; an empty list means the schedule is valid.
pub fn verify_schedule(g: &MarkedGraph, x: &DecisionVector, sched: &Schedule) -> Result<Vec<Violation>> {
    let weights = effective_weights(g, x)?;
    let fire = sched.fireability_times(g, x)?;
    let p = &sched.period;
    let mut out = Vec::new();
    for (i, w) in weights.iter().enumerate() {
        let required = Rational::from(w.self_bound);
        if *p < required {
            out.push(Violation::SelfLoop {
                actor: i,
                period: p.clone(),
                required,
            });
        }
    }
    for (k, c) in g.channels().iter().enumerate() {
        let available = &fire[c.dst] + Rational::from(c.tokens) * p;
        let required = &fire[c.src] + Rational::from(weights[c.src].edge);
        if available < required {
            out.push(Violation::Channel {
                channel: k,
                src: c.src,
                dst: c.dst,
                available,
                required,
            });
        }
    }
    Ok(out)
}

/// What bounds the minimum period from below.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Critical {
    /// No actors, or all weights zero.
    Unbounded,
    /// An actor's own busy time.
    SelfLoop(usize),
    /// A directed cycle, as actor ids in edge order.
    Cycle(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodAnalysis {
    pub period: Rational,
    pub critical: Critical,
}

struct Edge {
    src: usize,
    dst: usize,
    tokens: i128,
}

/// Precomputed constraint structure of a graph, reusable across decision
/// vectors and periods.
pub struct TimingModel<'g> {
    graph: &'g MarkedGraph,
    edges: Vec<Edge>,
}

enum LongestPath {
    Potentials(Vec<i128>),
    PositiveCycle(Vec<usize>),
}

impl<'g> TimingModel<'g> {
    /// Fails with `Deadlock` if the graph has a token-free cycle.
    pub fn new(graph: &'g MarkedGraph) -> Result<Self> {
        validate_liveness(graph).into_result()?;
        let mut order: Vec<usize> = (0..graph.channels().len()).collect();
        order.sort_by_key(|&k| graph.channels()[k].src);
        let edges = order
            .into_iter()
            .map(|k| {
                let c = graph.channels()[k];
                Edge {
                    src: c.src,
                    dst: c.dst,
                    tokens: c.tokens as i128,
                }
            })
            .collect();
        Ok(TimingModel { graph, edges })
    }

    pub fn graph(&self) -> &MarkedGraph {
        self.graph
    }

    /// Longest paths with edge weight `den * weight - num * tokens`.
    fn longest_path(&self, weights: &[EffectiveWeight], num: i128, den: i128) -> Result<LongestPath> {
        let n = self.graph.len();
        let scaled: Vec<i128> = self
            .edges
            .iter()
            .map(|e| {
                den.checked_mul(weights[e.src].edge as i128)
                    .and_then(|a| num.checked_mul(e.tokens).and_then(|b| a.checked_sub(b)))
                    .ok_or(Error::ArithmeticOverflow("constraint weights"))
            })
            .collect::<Result<_>>()?;
        let mut dist = vec![0i128; n];
        let mut pred = vec![usize::MAX; n];
        for _pass in 0..=n {
            let mut changed = false;
            for (k, e) in self.edges.iter().enumerate() {
                let cand = dist[e.src]
                    .checked_add(scaled[k])
                    .ok_or(Error::ArithmeticOverflow("longest path"))?;
                if cand > dist[e.dst] {
                    dist[e.dst] = cand;
                    pred[e.dst] = k;
                    changed = true;
                }
            }
            if !changed {
                return Ok(LongestPath::Potentials(dist));
            }
            if let Some(cycle) = self.predecessor_cycle(&pred) {
                return Ok(LongestPath::PositiveCycle(cycle));
            }
        }
        // a relaxation in pass n+1 guarantees a cycle among predecessors
        Ok(LongestPath::PositiveCycle(
            self.predecessor_cycle(&pred).expect("positive cycle"),
        ))
    }

    /// A cycle in the predecessor graph as edge indices in forward order,
    /// if any; such a cycle always has positive weight.
    fn predecessor_cycle(&self, pred: &[usize]) -> Option<Vec<usize>> {
        let n = pred.len();
        let mut mark = vec![usize::MAX; n];
        for start in 0..n {
            let mut v = start;
            while mark[v] == usize::MAX && pred[v] != usize::MAX {
                mark[v] = start;
                v = self.edges[pred[v]].src;
            }
            if mark[v] == start && pred[v] != usize::MAX {
                let mut cycle = vec![pred[v]];
                let mut u = self.edges[pred[v]].src;
                while u != v {
                    cycle.push(pred[u]);
                    u = self.edges[pred[u]].src;
                }
                cycle.reverse();
                return Some(cycle);
            }
        }
        None
    }

    fn cycle_actors(&self, cycle: &[usize]) -> Vec<usize> {
        cycle.iter().map(|&k| self.edges[k].src).collect()
    }

    fn cycle_ratio(&self, weights: &[EffectiveWeight], cycle: &[usize]) -> Result<Rational> {
        let weight: u64 = cycle.iter().map(|&k| weights[self.edges[k].src].edge).sum();
        let tokens: i128 = cycle.iter().map(|&k| self.edges[k].tokens).sum();
        if tokens == 0 {
            return Err(Error::Deadlock {
                cycle: self.cycle_actors(cycle),
            });
        }
        let num = i64::try_from(weight).map_err(|_| Error::ArithmeticOverflow("cycle weight"))?;
        let den = i64::try_from(tokens).map_err(|_| Error::ArithmeticOverflow("cycle tokens"))?;
        Rational::new(num, den)
    }

    pub fn analyze(&self, x: &DecisionVector) -> Result<PeriodAnalysis> {
        let weights = effective_weights(self.graph, x)?;
        let (mut critical, mut bound) = match weights
            .iter()
            .enumerate()
            .max_by_key(|(i, w)| (w.self_bound, std::cmp::Reverse(*i)))
        {
            Some((i, w)) if w.self_bound > 0 => (Critical::SelfLoop(i), Rational::from(w.self_bound)),
            _ => (Critical::Unbounded, Rational::zero()),
        };
        loop {
            let (num, den) = bound.to_i128_parts().ok_or(Error::ArithmeticOverflow("period"))?;
            match self.longest_path(&weights, num, den)? {
                LongestPath::Potentials(_) => {
                    return Ok(PeriodAnalysis {
                        period: bound,
                        critical,
                    })
                }
                LongestPath::PositiveCycle(cycle) => {
                    let ratio = self.cycle_ratio(&weights, &cycle)?;
                    debug_assert!(ratio > bound);
                    bound = ratio;
                    critical = Critical::Cycle(self.cycle_actors(&cycle));
                }
            }
        }
    }

    pub fn min_period(&self, x: &DecisionVector) -> Result<Rational> {
        Ok(self.analyze(x)?.period)
    }

    /// A schedule of period `period` for `x`, or `Infeasible` with a
    /// witness cycle (a single actor for a violated self-loop bound).
    pub fn schedule(&self, x: &DecisionVector, period: &Rational) -> Result<Schedule> {
        if !period.is_positive() {
            return Err(Error::NonPositivePeriod(period.clone()));
        }
        let weights = effective_weights(self.graph, x)?;
        if let Some((i, _)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| Rational::from(w.self_bound) > *period)
        {
            return Err(Error::Infeasible {
                period: Box::new(period.clone()),
                cycle: vec![i],
            });
        }
        let (num, den) = period.to_i128_parts().ok_or(Error::ArithmeticOverflow("period"))?;
        match self.longest_path(&weights, num, den)? {
            LongestPath::PositiveCycle(cycle) => Err(Error::Infeasible {
                period: Box::new(period.clone()),
                cycle: self.cycle_actors(&cycle),
            }),
            LongestPath::Potentials(dist) => {
                let min = dist.iter().copied().min().unwrap_or(0);
                let starts = dist
                    .into_iter()
                    .map(|d| Rational::from_bigints((d - min).into(), den.into()))
                    .collect::<Result<_>>()?;
                Ok(Schedule {
                    period: period.clone(),
                    starts,
                    anchor: StartAnchor::Fireability,
                })
            }
        }
    }

    /// Whether `x` admits a schedule of period `period`.
    pub fn is_feasible(&self, x: &DecisionVector, period: &Rational) -> Result<bool> {
        match self.schedule(x, period) {
            Ok(_) => Ok(true),
            Err(Error::Infeasible { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    }
}

/// Minimum period sustainable under `x`: the maximum cycle mean with
/// mode-dependent weights, bounded below by every actor's busy time.
pub fn min_period(g: &MarkedGraph, x: &DecisionVector) -> Result<Rational> {
    g.check_decisions(x)?;
    TimingModel::new(g)?.min_period(x)
}

/// A periodic schedule at `period`, with the earliest start at 0.
pub fn schedule_for(g: &MarkedGraph, x: &DecisionVector, period: &Rational) -> Result<Schedule> {
    g.check_decisions(x)?;
    TimingModel::new(g)?.schedule(x, period)
}
