//! Minimum-energy decision vector for a fixed period.
//!
//! Exact branch-and-bound over decision groups. Two facts make this work
//! without a general MILP solver:
//!
//! * Switching a group to self-powered only adds wake-up and shutdown time,
//!   so constraints only tighten. If the partial assignment with every open
//!   group left always-active is infeasible, so is every completion.
//! * Energy is separable per group, so decided energies plus the cheaper
//!   mode of every open group is a lower bound on any completion.
//!
//! When the completion that takes every open group's cheaper mode is
//! feasible it meets the bound and no further branching is needed below
//! that node.

use std::cmp::Ordering;

use crate::energy::GroupEnergy;
use crate::error::{Error, Result};
use crate::graph::{DecisionVector, MarkedGraph};
use crate::rational::Rational;
use crate::timing::{Schedule, TimingModel};

/// One entry per decision group; `None` is undecided.
pub type PartialAssignment = Vec<Option<bool>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prune {
    FeasiblePossible,
    ProvablyInfeasible,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MilpStats {
    pub nodes: u64,
    pub lp_calls: u64,
}

#[derive(Clone, Debug)]
pub struct MilpSolution {
    pub x: DecisionVector,
    pub schedule: Schedule,
    pub energy: Rational,
    pub stats: MilpStats,
}

pub struct MilpSolver<'g> {
    model: TimingModel<'g>,
    groups: Vec<GroupEnergy>,
}

/// Per-group energies at a fixed period; `sp` is `None` when the period is
/// too short for the group to run self-powered at all.
struct ModeEnergies {
    aa: Rational,
    sp: Option<Rational>,
}

impl ModeEnergies {
    fn cheaper_is_sp(&self) -> bool {
        matches!(&self.sp, Some(sp) if *sp <= self.aa)
    }

    fn cheapest(&self) -> &Rational {
        match &self.sp {
            Some(sp) if *sp < self.aa => sp,
            _ => &self.aa,
        }
    }

    fn leverage(&self) -> Rational {
        match &self.sp {
            Some(sp) => (&self.aa - sp).abs(),
            None => Rational::zero(),
        }
    }
}

impl<'g> MilpSolver<'g> {
    pub fn new(g: &'g MarkedGraph) -> Result<Self> {
        Ok(MilpSolver {
            model: TimingModel::new(g)?,
            groups: GroupEnergy::for_groups(g),
        })
    }

    pub fn model(&self) -> &TimingModel<'g> {
        &self.model
    }

    fn mode_energies(&self, period: &Rational) -> Result<Vec<ModeEnergies>> {
        let g = self.model.graph();
        self.groups
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let aa = e.aa(period).ok_or_else(|| {
                    let actor = g
                        .actors()
                        .iter()
                        .filter(|a| a.group == i)
                        .max_by_key(|a| a.exec_time)
                        .map(|a| a.id)
                        .unwrap_or(0);
                    Error::PeriodTooShort {
                        actor,
                        period: Box::new(period.clone()),
                        required: e.min_period_aa,
                    }
                })?;
                Ok(ModeEnergies { aa, sp: e.sp(period) })
            })
            .collect()
    }

    fn check_partial(&self, partial: &PartialAssignment) -> Result<()> {
        if partial.len() != self.groups.len() {
            return Err(Error::DimensionMismatch {
                expected: self.groups.len(),
                got: partial.len(),
            });
        }
        Ok(())
    }

    /// Decided groups at their chosen mode plus every undecided group at its
    /// cheaper admissible mode.
    pub fn relaxation_bound(&self, period: &Rational, partial: &PartialAssignment) -> Result<Rational> {
        self.check_partial(partial)?;
        let energies = self.mode_energies(period)?;
        let mut total = Rational::zero();
        for (i, (choice, e)) in partial.iter().zip(&energies).enumerate() {
            match choice {
                Some(false) => total += &e.aa,
                Some(true) => match &e.sp {
                    Some(sp) => total += sp,
                    None => {
                        return Err(Error::PeriodTooShort {
                            actor: self.first_actor(i),
                            period: Box::new(period.clone()),
                            required: self.groups[i].min_period_sp,
                        })
                    }
                },
                None => total += e.cheapest(),
            }
        }
        Ok(total)
    }

    fn first_actor(&self, group: usize) -> usize {
        self.model
            .graph()
            .actors()
            .iter()
            .find(|a| a.group == group)
            .map(|a| a.id)
            .unwrap_or(0)
    }

    /// Tests the least-constraining completion (undecided groups
    /// always-active).
    pub fn feasibility_prune(&self, period: &Rational, partial: &PartialAssignment) -> Result<Prune> {
        self.check_partial(partial)?;
        let x = DecisionVector::new(partial.iter().map(|c| c.unwrap_or(false)).collect());
        Ok(if self.model.is_feasible(&x, period)? {
            Prune::FeasiblePossible
        } else {
            Prune::ProvablyInfeasible
        })
    }

    pub fn solve(&self, period: &Rational) -> Result<MilpSolution> {
        if !period.is_positive() {
            return Err(Error::NonPositivePeriod(period.clone()));
        }
        let n = self.groups.len();
        let mut stats = MilpStats::default();

        // infeasible for all-always-active means infeasible for everything
        stats.lp_calls += 1;
        self.model.schedule(&DecisionVector::zeros(n), period)?;
        let energies = self.mode_energies(period)?;

        let mut order: Vec<usize> = (0..n).filter(|&i| energies[i].sp.is_some()).collect();
        order.sort_by(|&a, &b| energies[b].leverage().cmp(&energies[a].leverage()).then(a.cmp(&b)));

        let mut root: PartialAssignment = vec![None; n];
        for (i, e) in energies.iter().enumerate() {
            if e.sp.is_none() {
                root[i] = Some(false);
            }
        }

        let mut best: Option<(Rational, DecisionVector)> = None;
        let mut stack: Vec<(PartialAssignment, usize)> = vec![(root, 0)];
        while let Some((partial, depth)) = stack.pop() {
            stats.nodes += 1;
            let bound: Rational = partial
                .iter()
                .zip(&energies)
                .map(|(c, e)| match c {
                    Some(false) => e.aa.clone(),
                    Some(true) => e.sp.clone().expect("admissible"),
                    None => e.cheapest().clone(),
                })
                .sum();
            if matches!(&best, Some((b, _)) if bound > *b) {
                continue;
            }

            let greedy = DecisionVector::new(
                partial
                    .iter()
                    .zip(&energies)
                    .map(|(c, e)| c.unwrap_or_else(|| e.cheaper_is_sp()))
                    .collect(),
            );
            stats.lp_calls += 1;
            if self.model.is_feasible(&greedy, period)? {
                let better = match &best {
                    None => true,
                    Some((b, bx)) => match bound.cmp(b) {
                        Ordering::Less => true,
                        Ordering::Equal => greedy.tie_break_cmp(bx) == Ordering::Less,
                        Ordering::Greater => false,
                    },
                };
                if better {
                    best = Some((bound, greedy));
                }
                continue;
            }
            if depth == order.len() {
                continue;
            }

            let relaxed = DecisionVector::new(partial.iter().map(|c| c.unwrap_or(false)).collect());
            stats.lp_calls += 1;
            if !self.model.is_feasible(&relaxed, period)? {
                continue;
            }

            let group = order[depth];
            let first = energies[group].cheaper_is_sp();
            // push the preferred value last so it is explored first
            for value in [!first, first] {
                let mut child = partial.clone();
                child[group] = Some(value);
                stack.push((child, depth + 1));
            }
        }

        let (energy, x) = best.expect("all-always-active completion is feasible");
        stats.lp_calls += 1;
        let schedule = self.model.schedule(&x, period)?;
        Ok(MilpSolution {
            x,
            schedule,
            energy,
            stats,
        })
    }
}

/// Energy-minimal decision vector and a witness schedule at `period`.
pub fn min_energy_config(g: &MarkedGraph, period: &Rational) -> Result<MilpSolution> {
    MilpSolver::new(g)?.solve(period)
}

pub fn relaxation_bound(g: &MarkedGraph, period: &Rational, partial: &PartialAssignment) -> Result<Rational> {
    MilpSolver::new(g)?.relaxation_bound(period, partial)
}

pub fn feasibility_prune(g: &MarkedGraph, period: &Rational, partial: &PartialAssignment) -> Result<Prune> {
    MilpSolver::new(g)?.feasibility_prune(period, partial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::total_energy;
    use crate::fixtures::aec;
    use crate::timing::verify_schedule;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    /// Exhaustive scan: (energy, x) of the tie-break-preferred optimum.
    fn brute_force(g: &MarkedGraph, period: &Rational) -> Option<(Rational, DecisionVector)> {
        let model = TimingModel::new(g).unwrap();
        let n = g.groups();
        let mut best: Option<(Rational, DecisionVector)> = None;
        for mask in 0..(1u64 << n) {
            let x = DecisionVector::from_mask(n, mask);
            if !model.is_feasible(&x, period).unwrap() {
                continue;
            }
            let e = total_energy(g, period, &x).unwrap();
            let replace = match &best {
                None => true,
                Some((be, bx)) => e < *be || (e == *be && x.tie_break_cmp(bx) == Ordering::Less),
            };
            if replace {
                best = Some((e, x));
            }
        }
        best
    }

    #[test]
    fn aec_at_pmin() {
        let g = aec();
        let sol = min_energy_config(&g, &r(23, 1)).unwrap();
        assert_eq!(sol.x.to_string(), "100001");
        assert!(verify_schedule(&g, &sol.x, &sol.schedule).unwrap().is_empty());
        let (e, x) = brute_force(&g, &r(23, 1)).unwrap();
        assert_eq!(sol.energy, e);
        assert_eq!(sol.x, x);
    }

    #[test]
    fn aec_at_pmax() {
        let g = aec();
        let sol = min_energy_config(&g, &r(27, 1)).unwrap();
        assert_eq!(sol.x, DecisionVector::ones(6));
        assert_eq!(brute_force(&g, &r(27, 1)).unwrap().1, sol.x);
    }

    #[test]
    fn aec_below_pmin() {
        let g = aec();
        assert!(matches!(
            min_energy_config(&g, &r(22, 1)),
            Err(Error::Infeasible { .. })
        ));
        assert!(brute_force(&g, &r(22, 1)).is_none());
    }

    #[test]
    fn aec_between() {
        let g = aec();
        for p in [r(24, 1), r(49, 2), r(26, 1)] {
            let sol = min_energy_config(&g, &p).unwrap();
            let (e, x) = brute_force(&g, &p).unwrap();
            assert_eq!(sol.energy, e);
            assert_eq!(sol.x, x);
        }
    }

    #[test]
    fn relaxation_bounds() {
        let g = aec();
        let p = r(23, 1);
        let open = vec![None; 6];
        // 7.1 + 6.2 + 6.2 + 11.6 + 10.7 + 7.1
        assert_eq!(relaxation_bound(&g, &p, &open).unwrap(), r(489, 10));
        let ones = DecisionVector::ones(6);
        assert_eq!(
            relaxation_bound(&g, &p, &open).unwrap(),
            total_energy(&g, &p, &ones).unwrap()
        );
        let decided: PartialAssignment = "100001".chars().map(|c| Some(c == '1')).collect();
        assert_eq!(
            relaxation_bound(&g, &p, &decided).unwrap(),
            total_energy(&g, &p, &"100001".parse().unwrap()).unwrap()
        );
    }

    #[test]
    fn pruning() {
        let g = aec();
        let p = r(23, 1);
        let mut partial = vec![None; 6];
        partial[1] = Some(true);
        assert_eq!(feasibility_prune(&g, &p, &partial).unwrap(), Prune::ProvablyInfeasible);
        assert_eq!(
            feasibility_prune(&g, &p, &vec![None; 6]).unwrap(),
            Prune::FeasiblePossible
        );
        let full: PartialAssignment = "100001".chars().map(|c| Some(c == '1')).collect();
        assert_eq!(feasibility_prune(&g, &p, &full).unwrap(), Prune::FeasiblePossible);
        let full: PartialAssignment = "111111".chars().map(|c| Some(c == '1')).collect();
        assert_eq!(feasibility_prune(&g, &p, &full).unwrap(), Prune::ProvablyInfeasible);
        assert!(matches!(
            feasibility_prune(&g, &p, &vec![None; 2]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
