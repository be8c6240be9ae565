//! Per-iteration energy of always-active and self-powered actors, and the
//! power profile of one period.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ActorSpec, DecisionVector, MarkedGraph};
use crate::rational::Rational;

fn too_short(a: &ActorSpec, period: &Rational, required: u64) -> Error {
    Error::PeriodTooShort {
        actor: a.id,
        period: Box::new(period.clone()),
        required,
    }
}

/// `p_exe * d + p_idle * (P - d)`.
pub fn energy_aa(a: &ActorSpec, period: &Rational) -> Result<Rational> {
    let d = Rational::from(a.exec_time);
    if *period < d {
        return Err(too_short(a, period, a.exec_time));
    }
    Ok(&a.power.exe * &d + &a.power.idle * (period - &d))
}

/// `p_wu * w + p_exe * d + p_sd * s + p_slp * (P - w - d - s)`.
pub fn energy_sp(a: &ActorSpec, period: &Rational) -> Result<Rational> {
    let busy = a.busy_sp();
    if *period < Rational::from(busy) {
        return Err(too_short(a, period, busy));
    }
    let p = &a.power;
    Ok(&p.wu * Rational::from(a.wakeup)
        + &p.exe * Rational::from(a.exec_time)
        + &p.sd * Rational::from(a.shutdown)
        + &p.slp * (period - Rational::from(busy)))
}

pub fn actor_energy(a: &ActorSpec, self_powered: bool, period: &Rational) -> Result<Rational> {
    if self_powered {
        energy_sp(a, period)
    } else {
        energy_aa(a, period)
    }
}

/// Energy per iteration of the whole graph under `x`.
pub fn total_energy(g: &MarkedGraph, period: &Rational, x: &DecisionVector) -> Result<Rational> {
    g.check_decisions(x)?;
    g.actors().iter().map(|a| actor_energy(a, x.get(a.group), period)).sum()
}

/// Energy of one decision group as an affine function of the period,
/// `constant + slope * P`, for each mode. Valid once `P` is at least
/// `min_period_aa` / `min_period_sp` respectively.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupEnergy {
    pub aa_constant: Rational,
    pub aa_slope: Rational,
    pub sp_constant: Rational,
    pub sp_slope: Rational,
    pub min_period_aa: u64,
    pub min_period_sp: u64,
}

impl GroupEnergy {
    pub fn for_groups(g: &MarkedGraph) -> Vec<GroupEnergy> {
        let mut out = vec![
            GroupEnergy {
                aa_constant: Rational::zero(),
                aa_slope: Rational::zero(),
                sp_constant: Rational::zero(),
                sp_slope: Rational::zero(),
                min_period_aa: 0,
                min_period_sp: 0,
            };
            g.groups()
        ];
        for a in g.actors() {
            let e = &mut out[a.group];
            let p = &a.power;
            let d = Rational::from(a.exec_time);
            e.aa_constant += (&p.exe - &p.idle) * &d;
            e.aa_slope += &p.idle;
            e.sp_constant += &p.wu * Rational::from(a.wakeup) + &p.exe * &d + &p.sd * Rational::from(a.shutdown)
                - &p.slp * Rational::from(a.busy_sp());
            e.sp_slope += &p.slp;
            e.min_period_aa = e.min_period_aa.max(a.exec_time);
            e.min_period_sp = e.min_period_sp.max(a.busy_sp());
        }
        out
    }

    /// Always-active energy at `period`, or `None` below its precondition.
    pub fn aa(&self, period: &Rational) -> Option<Rational> {
        (*period >= Rational::from(self.min_period_aa)).then(|| &self.aa_constant + &self.aa_slope * period)
    }

    /// Self-powered energy at `period`, or `None` below its precondition.
    pub fn sp(&self, period: &Rational) -> Option<Rational> {
        (*period >= Rational::from(self.min_period_sp)).then(|| &self.sp_constant + &self.sp_slope * period)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Wakeup,
    Execution,
    Shutdown,
    Sleep,
    Idle,
}

impl SegmentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SegmentKind::Wakeup => "wakeup",
            SegmentKind::Execution => "execution",
            SegmentKind::Shutdown => "shutdown",
            SegmentKind::Sleep => "sleep",
            SegmentKind::Idle => "idle",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileSegment {
    pub kind: SegmentKind,
    pub start: Rational,
    pub duration: Rational,
    pub power: Rational,
}

impl ProfileSegment {
    pub fn energy(&self) -> Rational {
        &self.duration * &self.power
    }
}

/// Phases of one period `[fire, fire + P)` for an actor that becomes
/// fireable at `fire`. A self-powered actor wakes up first, then executes,
/// shuts down and sleeps; an always-active one executes then idles.
/// Zero-length phases are left out.
pub fn power_profile(
    a: &ActorSpec,
    self_powered: bool,
    period: &Rational,
    fire: &Rational,
) -> Result<Vec<ProfileSegment>> {
    let p = &a.power;
    let phases: Vec<(SegmentKind, Rational, &Rational)> = if self_powered {
        let busy = a.busy_sp();
        if *period < Rational::from(busy) {
            return Err(too_short(a, period, busy));
        }
        vec![
            (SegmentKind::Wakeup, Rational::from(a.wakeup), &p.wu),
            (SegmentKind::Execution, Rational::from(a.exec_time), &p.exe),
            (SegmentKind::Shutdown, Rational::from(a.shutdown), &p.sd),
            (SegmentKind::Sleep, period - Rational::from(busy), &p.slp),
        ]
    } else {
        if *period < Rational::from(a.exec_time) {
            return Err(too_short(a, period, a.exec_time));
        }
        vec![
            (SegmentKind::Execution, Rational::from(a.exec_time), &p.exe),
            (SegmentKind::Idle, period - Rational::from(a.exec_time), &p.idle),
        ]
    };
    let mut at = fire.clone();
    let mut out = Vec::with_capacity(phases.len());
    for (kind, duration, power) in phases {
        if duration.is_zero() {
            continue;
        }
        let next = &at + &duration;
        out.push(ProfileSegment {
            kind,
            start: at,
            duration,
            power: power.clone(),
        });
        at = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::aec;
    use crate::graph::PowerParams;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    fn actor(d: u64, w: u64, s: u64) -> ActorSpec {
        ActorSpec {
            id: 0,
            name: "a".into(),
            exec_time: d,
            wakeup: w,
            shutdown: s,
            power: PowerParams::normalized(),
            group: 0,
        }
    }

    #[test]
    fn always_active_examples() {
        assert_eq!(energy_aa(&actor(4, 1, 2), &r(23, 1)).unwrap(), r(211, 10));
        let mut flat = actor(4, 0, 0);
        flat.power = PowerParams::uniform(r(3, 2));
        assert_eq!(energy_aa(&flat, &r(10, 1)).unwrap(), r(15, 1));
        assert_eq!(energy_aa(&actor(7, 0, 0), &r(7, 1)).unwrap(), r(7, 1));
        assert!(matches!(
            energy_aa(&actor(7, 0, 0), &r(6, 1)),
            Err(Error::PeriodTooShort { .. })
        ));
    }

    #[test]
    fn self_powered_examples() {
        assert_eq!(energy_sp(&actor(4, 1, 2), &r(23, 1)).unwrap(), r(71, 10));
        // zero sleep
        assert_eq!(energy_sp(&actor(4, 1, 2), &r(7, 1)).unwrap(), r(11, 2));
        assert!(matches!(
            energy_sp(&actor(4, 1, 2), &r(13, 2)),
            Err(Error::PeriodTooShort { .. })
        ));
        // models coincide without delays and with p_slp = p_idle
        let mut a = actor(4, 0, 0);
        a.power.slp = a.power.idle.clone();
        assert_eq!(energy_sp(&a, &r(23, 1)).unwrap(), energy_aa(&a, &r(23, 1)).unwrap());
    }

    #[test]
    fn total_energy_hybrid_cheaper() {
        let g = aec();
        let p = r(23, 1);
        let zero = total_energy(&g, &p, &DecisionVector::zeros(6)).unwrap();
        let hybrid = total_energy(&g, &p, &"100001".parse().unwrap()).unwrap();
        assert!(hybrid < zero);
        // a1 and a6 each go from 21.1 to 7.1
        assert_eq!(&zero - &hybrid, r(28, 1));
        let empty = MarkedGraph::with_actor_groups(vec![], vec![]).unwrap();
        assert_eq!(
            total_energy(&empty, &p, &DecisionVector::zeros(0)).unwrap(),
            Rational::zero()
        );
    }

    #[test]
    fn total_energy_names_offending_actor() {
        let g = aec();
        match total_energy(&g, &r(8, 1), &DecisionVector::zeros(6)) {
            Err(Error::PeriodTooShort { actor, .. }) => assert_eq!(actor, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn group_energy_matches_closed_forms() {
        let g = aec();
        let groups = GroupEnergy::for_groups(&g);
        let p = r(47, 2);
        for a in g.actors() {
            assert_eq!(groups[a.group].aa(&p).unwrap(), energy_aa(a, &p).unwrap());
            assert_eq!(groups[a.group].sp(&p).unwrap(), energy_sp(a, &p).unwrap());
        }
        assert!(groups[3].sp(&r(11, 1)).is_none());
    }

    #[test]
    fn profiles() {
        let aa = power_profile(&actor(9, 1, 2), false, &r(23, 1), &Rational::zero()).unwrap();
        let kinds: Vec<_> = aa.iter().map(|s| (s.kind, s.duration.clone())).collect();
        assert_eq!(
            kinds,
            vec![(SegmentKind::Execution, r(9, 1)), (SegmentKind::Idle, r(14, 1))]
        );

        let sp = power_profile(&actor(9, 1, 2), true, &r(23, 1), &r(10, 1)).unwrap();
        let kinds: Vec<_> = sp
            .iter()
            .map(|s| (s.kind, s.start.clone(), s.duration.clone()))
            .collect();
        assert_eq!(
            kinds,
            vec![
                (SegmentKind::Wakeup, r(10, 1), r(1, 1)),
                (SegmentKind::Execution, r(11, 1), r(9, 1)),
                (SegmentKind::Shutdown, r(20, 1), r(2, 1)),
                (SegmentKind::Sleep, r(22, 1), r(11, 1)),
            ]
        );

        let no_wake = power_profile(&actor(9, 0, 2), true, &r(23, 1), &Rational::zero()).unwrap();
        assert_eq!(no_wake[0].kind, SegmentKind::Execution);
        assert_eq!(no_wake.len(), 3);
        assert!(power_profile(&actor(9, 1, 2), true, &r(11, 1), &Rational::zero()).is_err());
    }
}
