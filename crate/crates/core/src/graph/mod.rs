//! Marked graphs, decision vectors and liveness.
//!
//! A [`MarkedGraph`] is the analysis substrate: every actor consumes and
//! produces one token per channel per firing, and channels carry initial
//! tokens. Every actor belongs to a decision group; all actors in a group
//! switch between always-active and self-powered mode together. For graphs
//! unrolled from SDF, a group is one SDF actor.

mod sdf;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub use sdf::{repetition_vector, unroll, SdfActor, SdfChannel, SdfGraph, Unrolled, DEFAULT_INSTANCE_CAP};

/// Power draw of an actor in each of its phases.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerParams {
    pub exe: Rational,
    pub idle: Rational,
    pub sd: Rational,
    pub wu: Rational,
    pub slp: Rational,
}

impl PowerParams {
    pub fn new(exe: Rational, idle: Rational, sd: Rational, wu: Rational, slp: Rational) -> Result<Self> {
        let p = PowerParams { exe, idle, sd, wu, slp };
        p.validate()?;
        Ok(p)
    }

    /// The normalized base model: exe 1, idle 0.9, shutdown 0.5, wake-up 0.5,
    /// sleep 0.1.
    pub fn normalized() -> Self {
        PowerParams {
            exe: Rational::integer(1),
            idle: Rational::new(9, 10).unwrap(),
            sd: Rational::new(1, 2).unwrap(),
            wu: Rational::new(1, 2).unwrap(),
            slp: Rational::new(1, 10).unwrap(),
        }
    }

    /// All five powers set to `p`.
    pub fn uniform(p: Rational) -> Self {
        PowerParams {
            exe: p.clone(),
            idle: p.clone(),
            sd: p.clone(),
            wu: p.clone(),
            slp: p,
        }
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        PowerParams {
            exe: &self.exe * factor,
            idle: &self.idle * factor,
            sd: &self.sd * factor,
            wu: &self.wu * factor,
            slp: &self.slp * factor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("p_exe", &self.exe),
            ("p_idle", &self.idle),
            ("p_sd", &self.sd),
            ("p_wu", &self.wu),
            ("p_slp", &self.slp),
        ] {
            if v.is_negative() {
                return Err(Error::InvalidGraph(format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    /// Advisory check of the usual ordering `p_slp <= p_idle <= p_exe`.
    pub fn ordering_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.slp > self.idle {
            out.push(format!("sleep power {} exceeds idle power {}", self.slp, self.idle));
        }
        if self.idle > self.exe {
            out.push(format!("idle power {} exceeds execution power {}", self.idle, self.exe));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActorSpec {
    pub id: usize,
    pub name: String,
    /// Execution time `d`.
    pub exec_time: u64,
    /// Wake-up delay `w`, paid only in self-powered mode.
    pub wakeup: u64,
    /// Shutdown delay `s`, paid only in self-powered mode.
    pub shutdown: u64,
    pub power: PowerParams,
    pub group: usize,
}

impl ActorSpec {
    /// Time an active firing occupies the actor in self-powered mode.
    pub fn busy_sp(&self) -> u64 {
        self.wakeup + self.exec_time + self.shutdown
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Channel {
    pub src: usize,
    pub dst: usize,
    pub tokens: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkedGraph {
    actors: Vec<ActorSpec>,
    channels: Vec<Channel>,
    group_names: Vec<String>,
}

impl MarkedGraph {
    /// Builds a graph whose decision groups are named by `group_names`.
    pub fn new(actors: Vec<ActorSpec>, channels: Vec<Channel>, group_names: Vec<String>) -> Result<Self> {
        let groups = group_names.len();
        for (i, a) in actors.iter().enumerate() {
            if a.id != i {
                return Err(Error::InvalidGraph(format!(
                    "actor ids must be dense: position {i} holds id {}",
                    a.id
                )));
            }
            if a.group >= groups {
                return Err(Error::InvalidGraph(format!(
                    "actor {} references group {} but the graph has {groups}",
                    a.name, a.group
                )));
            }
            a.power.validate()?;
        }
        for (k, c) in channels.iter().enumerate() {
            if c.src >= actors.len() || c.dst >= actors.len() {
                return Err(Error::InvalidGraph(format!(
                    "channel {k} ({} -> {}) references a missing actor",
                    c.src, c.dst
                )));
            }
        }
        Ok(MarkedGraph {
            actors,
            channels,
            group_names,
        })
    }

    /// Builds a graph where every actor is its own decision group. The
    /// `group` field of each actor is overwritten with its id.
    pub fn with_actor_groups(mut actors: Vec<ActorSpec>, channels: Vec<Channel>) -> Result<Self> {
        let names = actors.iter().map(|a| a.name.clone()).collect();
        for (i, a) in actors.iter_mut().enumerate() {
            a.group = i;
        }
        MarkedGraph::new(actors, channels, names)
    }

    pub fn actors(&self) -> &[ActorSpec] {
        &self.actors
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn groups(&self) -> usize {
        self.group_names.len()
    }

    pub fn group_names(&self) -> &[String] {
        &self.group_names
    }

    pub fn len(&self) -> usize {
        self.actors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actors.is_empty()
    }

    /// Actor ids of each decision group.
    pub fn group_members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.groups()];
        for a in &self.actors {
            members[a.group].push(a.id);
        }
        members
    }

    /// Largest number of initial tokens on any channel.
    pub fn max_tokens(&self) -> u64 {
        self.channels.iter().map(|c| c.tokens).max().unwrap_or(0)
    }

    /// Checks that `x` has one bit per decision group.
    pub fn check_decisions(&self, x: &DecisionVector) -> Result<()> {
        if x.len() != self.groups() {
            return Err(Error::DimensionMismatch {
                expected: self.groups(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Whether actor `i` runs self-powered under `x`.
    pub fn self_powered(&self, x: &DecisionVector, i: usize) -> bool {
        x.get(self.actors[i].group)
    }
}

/// Outcome of [`validate_liveness`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Liveness {
    Live,
    /// A directed cycle whose channels carry no tokens, listed in edge order.
    DeadCycle(Vec<usize>),
}

impl Liveness {
    pub fn is_live(&self) -> bool {
        matches!(self, Liveness::Live)
    }

    pub fn into_result(self) -> Result<()> {
        match self {
            Liveness::Live => Ok(()),
            Liveness::DeadCycle(cycle) => Err(Error::Deadlock { cycle }),
        }
    }
}

/// Finds a token-free directed cycle if one exists.
pub fn validate_liveness(g: &MarkedGraph) -> Liveness {
    let n = g.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for c in g.channels() {
        if c.tokens == 0 {
            adj[c.src].push(c.dst);
        }
    }

    // iterative DFS; 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        state[root] = 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if let Some(&w) = adj[v].get(*next) {
                *next += 1;
                match state[w] {
                    0 => {
                        state[w] = 1;
                        parent[w] = v;
                        stack.push((w, 0));
                    }
                    1 => {
                        let mut cycle = vec![v];
                        let mut u = v;
                        while u != w {
                            u = parent[u];
                            cycle.push(u);
                        }
                        cycle.reverse();
                        return Liveness::DeadCycle(cycle);
                    }
                    _ => {}
                }
            } else {
                state[v] = 2;
                stack.pop();
            }
        }
    }
    Liveness::Live
}

/// One mode bit per decision group: `true` is self-powered, `false`
/// always-active.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct DecisionVector {
    bits: Vec<bool>,
}

impl DecisionVector {
    pub fn new(bits: Vec<bool>) -> Self {
        DecisionVector { bits }
    }

    pub fn zeros(n: usize) -> Self {
        DecisionVector { bits: vec![false; n] }
    }

    pub fn ones(n: usize) -> Self {
        DecisionVector { bits: vec![true; n] }
    }

    /// Bit `i` is taken from bit `i` of `mask`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        DecisionVector {
            bits: (0..n).map(|i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, v: bool) {
        self.bits[i] = v;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Componentwise `self <= other`.
    pub fn is_subset_of(&self, other: &DecisionVector) -> bool {
        self.bits.len() == other.bits.len() && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Deterministic preference among equal-energy optima: more self-powered
    /// groups first, then lexicographically smallest bit string.
    pub fn tie_break_cmp(&self, other: &DecisionVector) -> std::cmp::Ordering {
        other
            .count_ones()
            .cmp(&self.count_ones())
            .then_with(|| self.bits.cmp(&other.bits))
    }
}

impl fmt::Display for DecisionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for DecisionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x={self}")
    }
}

impl FromStr for DecisionVector {
    type Err = Error;

    /// Accepts `100001` or `1,0,0,0,0,1`.
    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .filter(|c| !matches!(c, ',' | ' ' | '(' | ')'))
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::parse(
                    "decision vector",
                    format!("unexpected character {other:?}"),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DecisionVector { bits })
    }
}

impl Serialize for DecisionVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DecisionVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn actor(id: usize, d: u64) -> ActorSpec {
        ActorSpec {
            id,
            name: format!("a{}", id + 1),
            exec_time: d,
            wakeup: 1,
            shutdown: 2,
            power: PowerParams::normalized(),
            group: id,
        }
    }

    fn ch(src: usize, dst: usize, tokens: u64) -> Channel {
        Channel { src, dst, tokens }
    }

    #[test]
    fn two_actor_token_free_cycle_is_dead() {
        let g = MarkedGraph::with_actor_groups(vec![actor(0, 1), actor(1, 1)], vec![ch(0, 1, 0), ch(1, 0, 0)]).unwrap();
        match validate_liveness(&g) {
            Liveness::DeadCycle(c) => {
                let mut sorted = c.clone();
                sorted.sort();
                assert_eq!(sorted, vec![0, 1]);
            }
            Liveness::Live => panic!("expected a dead cycle"),
        }
    }

    #[test]
    fn acyclic_chain_is_live() {
        let g = MarkedGraph::with_actor_groups(
            vec![actor(0, 1), actor(1, 1), actor(2, 1)],
            vec![ch(0, 1, 0), ch(1, 2, 0)],
        )
        .unwrap();
        assert!(validate_liveness(&g).is_live());
    }

    #[test]
    fn token_free_self_loop_is_dead() {
        let g = MarkedGraph::with_actor_groups(vec![actor(0, 1)], vec![ch(0, 0, 0)]).unwrap();
        assert_eq!(validate_liveness(&g), Liveness::DeadCycle(vec![0]));
    }

    #[test]
    fn dead_cycle_witness_is_a_cycle() {
        // 0 -> 1 -> 2 -> 3 -> 1, plus a live back edge 3 -> 0
        let g = MarkedGraph::with_actor_groups(
            (0..4).map(|i| actor(i, 1)).collect(),
            vec![ch(0, 1, 0), ch(1, 2, 0), ch(2, 3, 0), ch(3, 1, 0), ch(3, 0, 1)],
        )
        .unwrap();
        let Liveness::DeadCycle(c) = validate_liveness(&g) else {
            panic!("expected dead cycle")
        };
        assert_eq!(c, vec![1, 2, 3]);
    }

    #[test]
    fn rejects_bad_references() {
        assert!(MarkedGraph::with_actor_groups(vec![actor(0, 1)], vec![ch(0, 3, 0)]).is_err());
        let mut a = actor(0, 1);
        a.group = 4;
        assert!(MarkedGraph::new(vec![a], vec![], vec!["g".into()]).is_err());
        let mut b = actor(1, 1);
        b.id = 7;
        assert!(MarkedGraph::with_actor_groups(vec![actor(0, 1), b], vec![]).is_err());
    }

    #[test]
    fn negative_power_rejected() {
        let mut a = actor(0, 1);
        a.power.slp = Rational::integer(-1);
        assert!(MarkedGraph::with_actor_groups(vec![a], vec![]).is_err());
    }

    #[test]
    fn ordering_lint() {
        assert!(PowerParams::normalized().ordering_warnings().is_empty());
        let mut p = PowerParams::normalized();
        p.slp = Rational::integer(2);
        assert_eq!(p.ordering_warnings().len(), 1);
        p.idle = Rational::new(3, 2).unwrap();
        assert_eq!(p.ordering_warnings().len(), 2);
    }

    #[test]
    fn decision_vector_parsing_and_tie_break() {
        let x: DecisionVector = "1,0,0,0,0,1".parse().unwrap();
        assert_eq!(x.to_string(), "100001");
        assert_eq!(x, DecisionVector::from_mask(6, 0b100001));
        assert!("10a".parse::<DecisionVector>().is_err());

        let more: DecisionVector = "110".parse().unwrap();
        let fewer: DecisionVector = "100".parse().unwrap();
        assert_eq!(more.tie_break_cmp(&fewer), std::cmp::Ordering::Less);
        let a: DecisionVector = "011".parse().unwrap();
        let b: DecisionVector = "101".parse().unwrap();
        assert_eq!(a.tie_break_cmp(&b), std::cmp::Ordering::Less);
        assert!(fewer.is_subset_of(&more));
        assert!(!more.is_subset_of(&fewer));
    }
}
