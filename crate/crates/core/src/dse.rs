//! Design-space exploration of the period/energy tradeoff.
//!
//! Three strategies produce sets of explored points:
//!
//! * [`dse_xs`] sweeps every decision vector and evaluates each at its own
//!   minimum period. Its non-dominated subset is the true Pareto front,
//!   because energy is strictly increasing in the period for a fixed
//!   decision vector.
//! * [`dse_ps`] sweeps the integer periods between the all-always-active and
//!   all-self-powered minimum periods and solves for the energy-minimal
//!   vector at each.
//! * [`dse_hs`] starts at the all-self-powered period, hops to the
//!   energy-minimal vector for the current period, skips down to that
//!   vector's own minimum period, and steps below it by `epsilon`.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::total_energy;
use crate::error::{Error, Result};
use crate::graph::{DecisionVector, MarkedGraph};
use crate::milp::MilpSolver;
use crate::rational::Rational;
use crate::timing::TimingModel;

/// Default cap on decision groups for the exhaustive sweep.
pub const DEFAULT_GROUP_CAP: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExploredPoint {
    pub period: Rational,
    pub energy: Rational,
    pub x: DecisionVector,
    /// Set on the extra point the period sweep adds when the lower period
    /// bound is not an integer.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub endpoint: bool,
}

impl ExploredPoint {
    pub fn new(period: Rational, energy: Rational, x: DecisionVector) -> Self {
        ExploredPoint {
            period,
            energy,
            x,
            endpoint: false,
        }
    }

    /// `self` is no worse than `other` in both objectives.
    pub fn weakly_dominates(&self, other: &ExploredPoint) -> bool {
        self.period <= other.period && self.energy <= other.energy
    }
}

/// Non-dominated points sorted by strictly increasing period and strictly
/// decreasing energy.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Front {
    pub points: Vec<ExploredPoint>,
}

impl Front {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ExploredPoint> {
        self.points.iter()
    }
}

/// Keeps the points no other point weakly dominates. Points with equal
/// `(period, energy)` collapse to the one preferred by the decision-vector
/// tie-break.
pub fn pareto_filter(points: &[ExploredPoint]) -> Front {
    let mut sorted: Vec<&ExploredPoint> = points.iter().collect();
    sorted.sort_by(|a, b| {
        a.period
            .cmp(&b.period)
            .then_with(|| a.energy.cmp(&b.energy))
            .then_with(|| a.x.tie_break_cmp(&b.x))
    });
    let mut front: Vec<ExploredPoint> = Vec::new();
    for p in sorted {
        match front.last() {
            Some(last) if p.energy >= last.energy => {}
            _ => front.push(p.clone()),
        }
    }
    Front { points: front }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DseStats {
    /// Minimum-period and feasibility computations, including those made
    /// inside the energy minimization.
    pub lp_calls: u64,
    pub milp_calls: u64,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct DseRun {
    pub points: Vec<ExploredPoint>,
    pub stats: DseStats,
}

impl DseRun {
    pub fn front(&self) -> Front {
        pareto_filter(&self.points)
    }
}

/// Lower and upper period bounds: all always-active and all self-powered.
pub fn period_bounds(g: &MarkedGraph) -> Result<(Rational, Rational)> {
    let model = TimingModel::new(g)?;
    let n = g.groups();
    Ok((
        model.min_period(&DecisionVector::zeros(n))?,
        model.min_period(&DecisionVector::ones(n))?,
    ))
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    builder
        .build()
        .map_err(|e| Error::InvalidGraph(format!("cannot start worker pool: {e}")))
}

/// One point per decision vector, in mask order (bit `i` of the mask is
/// group `i`).
pub fn dse_xs(g: &MarkedGraph, cap: usize, workers: Option<usize>) -> Result<DseRun> {
    let n = g.groups();
    if n > cap || n >= 64 {
        return Err(Error::TooManyGroups { groups: n, cap });
    }
    let started = Instant::now();
    let model = TimingModel::new(g)?;
    let points = pool(workers)?.install(|| {
        (0..1u64 << n)
            .into_par_iter()
            .map(|mask| {
                let x = DecisionVector::from_mask(n, mask);
                let period = model.min_period(&x)?;
                let energy = total_energy(g, &period, &x)?;
                Ok(ExploredPoint::new(period, energy, x))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(DseRun {
        stats: DseStats {
            lp_calls: points.len() as u64,
            milp_calls: 0,
            elapsed: started.elapsed(),
        },
        points,
    })
}

/// The energy-minimal configuration at every integer period between the
/// bounds. When the lower bound is fractional, the all-always-active point
/// at that bound is added and flagged as an endpoint.
pub fn dse_ps(g: &MarkedGraph, workers: Option<usize>) -> Result<DseRun> {
    let started = Instant::now();
    let solver = MilpSolver::new(g)?;
    let n = g.groups();
    let p_min = solver.model().min_period(&DecisionVector::zeros(n))?;
    let p_max = solver.model().min_period(&DecisionVector::ones(n))?;
    let lo = p_min
        .ceil()
        .to_i64()
        .ok_or(Error::ArithmeticOverflow("period sweep"))?
        .max(1);
    let hi = p_max
        .floor()
        .to_i64()
        .ok_or(Error::ArithmeticOverflow("period sweep"))?;

    let solved = pool(workers)?.install(|| {
        (lo..=hi)
            .into_par_iter()
            .map(|p| {
                let period = Rational::integer(p);
                let sol = solver.solve(&period)?;
                Ok((ExploredPoint::new(period, sol.energy, sol.x), sol.stats.lp_calls))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut stats = DseStats {
        lp_calls: 2,
        milp_calls: solved.len() as u64,
        elapsed: Duration::ZERO,
    };
    let mut points = Vec::with_capacity(solved.len() + 1);
    if !p_min.is_integer() {
        let x = DecisionVector::zeros(n);
        let energy = total_energy(g, &p_min, &x)?;
        points.push(ExploredPoint {
            period: p_min,
            energy,
            x,
            endpoint: true,
        });
    }
    for (point, lp) in solved {
        stats.lp_calls += lp;
        points.push(point);
    }
    stats.elapsed = started.elapsed();
    Ok(DseRun { points, stats })
}

/// Hop & Skip. Points are recorded in discovery order; a repeated
/// `(period, x)` is recorded once.
pub fn dse_hs(g: &MarkedGraph, epsilon: &Rational) -> Result<DseRun> {
    if !epsilon.is_positive() {
        return Err(Error::parse("epsilon", format!("must be positive, got {epsilon}")));
    }
    let started = Instant::now();
    let solver = MilpSolver::new(g)?;
    let model = solver.model();
    let n = g.groups();
    let p_min = model.min_period(&DecisionVector::zeros(n))?;
    let p_max = model.min_period(&DecisionVector::ones(n))?;
    let mut stats = DseStats {
        lp_calls: 2,
        ..DseStats::default()
    };

    let mut points: Vec<ExploredPoint> = Vec::new();
    let mut period = p_max;
    while period >= p_min && period.is_positive() {
        // hop
        let sol = solver.solve(&period)?;
        stats.milp_calls += 1;
        stats.lp_calls += sol.stats.lp_calls;
        // skip
        let reached = model.min_period(&sol.x)?;
        stats.lp_calls += 1;
        debug_assert!(reached <= period);
        let energy = total_energy(g, &reached, &sol.x)?;
        if !points.iter().any(|p| p.period == reached && p.x == sol.x) {
            points.push(ExploredPoint::new(reached.clone(), energy, sol.x));
        }
        period = reached - epsilon;
    }
    stats.elapsed = started.elapsed();
    Ok(DseRun { points, stats })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Xs,
    Ps,
    Hs,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Xs => "xs",
            Strategy::Ps => "ps",
            Strategy::Hs => "hs",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xs" => Ok(Strategy::Xs),
            "ps" => Ok(Strategy::Ps),
            "hs" => Ok(Strategy::Hs),
            other => Err(Error::parse("strategy", format!("unknown strategy {other:?}"))),
        }
    }
}
