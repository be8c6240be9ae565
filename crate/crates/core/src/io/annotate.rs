//! Per-actor timing and power annotations: the JSON sidecar format and the
//! randomized augmentation of benchmark graphs.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{PowerParams, SdfGraph};
use crate::rational::Rational;

pub const SCHEMA_VERSION: u32 = 1;

/// Name of the random generator recorded in emitted metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8";

/// Decimal strings for one actor. Absent fields keep the graph's value.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActorAnnotation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_exe: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_idle: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_sd: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_wu: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_slp: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotations {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, serde_json::Value>,
    pub actors: BTreeMap<String, ActorAnnotation>,
}

impl Annotations {
    /// Full annotations for every actor of `sdf`.
    pub fn from_graph(sdf: &SdfGraph) -> Self {
        let actors = sdf
            .actors()
            .iter()
            .map(|a| {
                let p = &a.power;
                let ann = ActorAnnotation {
                    d: Some(a.exec_time.to_string()),
                    w: Some(a.wakeup.to_string()),
                    s: Some(a.shutdown.to_string()),
                    p_exe: Some(p.exe.to_plain_string()),
                    p_idle: Some(p.idle.to_plain_string()),
                    p_sd: Some(p.sd.to_plain_string()),
                    p_wu: Some(p.wu.to_plain_string()),
                    p_slp: Some(p.slp.to_plain_string()),
                };
                (a.name.clone(), ann)
            })
            .collect();
        Annotations {
            schema: SCHEMA_VERSION,
            metadata: BTreeMap::new(),
            actors,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ann: Annotations =
            serde_json::from_str(text).map_err(|e| Error::parse("annotation file", e.to_string()))?;
        if ann.schema != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "annotation schema {} is not supported (expected {SCHEMA_VERSION})",
                ann.schema
            )));
        }
        Ok(ann)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("annotations serialize");
        text.push('\n');
        text
    }

    /// Writes these annotations into `sdf`. `has_exec_time[i]` tells whether
    /// actor `i` already has an execution time; every actor must end up
    /// with one.
    pub fn apply(&self, sdf: &mut SdfGraph, has_exec_time: &[bool]) -> Result<()> {
        for name in self.actors.keys() {
            if sdf.actor_index(name).is_none() {
                return Err(Error::Schema(format!("annotation for unknown actor {name:?}")));
            }
        }
        for (i, a) in sdf.actors_mut().iter_mut().enumerate() {
            let ann = self.actors.get(&a.name);
            let field = |v: Option<&Option<String>>, what: &str| -> Result<Option<Rational>> {
                v.and_then(|o| o.as_deref())
                    .map(|t| {
                        Rational::parse(t).map_err(|_| {
                            Error::parse(
                                format!("annotation {}.{what}", a.name),
                                format!("{t:?} is not a number"),
                            )
                        })
                    })
                    .transpose()
            };
            let time = |v: Option<&Option<String>>, what: &str| -> Result<Option<u64>> {
                field(v, what)?
                    .map(|r| {
                        r.to_i64().and_then(|v| u64::try_from(v).ok()).ok_or_else(|| {
                            Error::parse(
                                format!("annotation {}.{what}", a.name),
                                format!("{r} is not a non-negative integer"),
                            )
                        })
                    })
                    .transpose()
            };
            let d = time(ann.map(|x| &x.d), "d")?;
            let w = time(ann.map(|x| &x.w), "w")?;
            let s = time(ann.map(|x| &x.s), "s")?;
            let powers = [
                (field(ann.map(|x| &x.p_exe), "p_exe")?, &mut a.power.exe),
                (field(ann.map(|x| &x.p_idle), "p_idle")?, &mut a.power.idle),
                (field(ann.map(|x| &x.p_sd), "p_sd")?, &mut a.power.sd),
                (field(ann.map(|x| &x.p_wu), "p_wu")?, &mut a.power.wu),
                (field(ann.map(|x| &x.p_slp), "p_slp")?, &mut a.power.slp),
            ];
            for (value, slot) in powers {
                if let Some(v) = value {
                    *slot = v;
                }
            }
            a.power.validate()?;
            match d {
                Some(d) => a.exec_time = d,
                None if has_exec_time.get(i).copied().unwrap_or(false) => {}
                None => {
                    return Err(Error::Schema(format!("actor {:?} has no execution time", a.name)));
                }
            }
            if let Some(w) = w {
                a.wakeup = w;
            }
            if let Some(s) = s {
                a.shutdown = s;
            }
        }
        Ok(())
    }
}

/// How [`augment`] annotates a graph: every actor draws an integer scaling
/// factor `psi` uniformly from `psi_range`, its execution time becomes
/// `round(d / psi)` (at least 1 unless `d` is 0) and its powers become
/// `base * psi`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentationPolicy {
    pub base: PowerParams,
    pub wakeup: u64,
    pub shutdown: u64,
    pub psi_range: (u64, u64),
    pub seed: u64,
}

impl Default for AugmentationPolicy {
    fn default() -> Self {
        AugmentationPolicy {
            base: PowerParams::normalized(),
            wakeup: 1,
            shutdown: 2,
            psi_range: (1, 8),
            seed: 0,
        }
    }
}

impl AugmentationPolicy {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.psi_range;
        if lo < 1 || lo > hi {
            return Err(Error::InvalidGraph(format!(
                "scaling range [{lo}, {hi}] is empty or below 1"
            )));
        }
        self.base.validate()
    }
}

/// `round(d / psi)` with halves rounded up, clamped to at least 1 for
/// positive `d`.
pub fn scaled_exec_time(d: u64, psi: u64) -> u64 {
    if d == 0 {
        return 0;
    }
    ((2 * d + psi) / (2 * psi)).max(1)
}

/// Annotates `sdf` with the given per-actor scaling factors.
pub fn augment_with_factors(sdf: &SdfGraph, policy: &AugmentationPolicy, psi: &[u64]) -> Result<SdfGraph> {
    policy.validate()?;
    if psi.len() != sdf.actors().len() {
        return Err(Error::DimensionMismatch {
            expected: sdf.actors().len(),
            got: psi.len(),
        });
    }
    let mut out = sdf.clone();
    for (a, &f) in out.actors_mut().iter_mut().zip(psi) {
        if f == 0 {
            return Err(Error::InvalidGraph("scaling factor must be at least 1".into()));
        }
        a.exec_time = scaled_exec_time(a.exec_time, f);
        a.wakeup = policy.wakeup;
        a.shutdown = policy.shutdown;
        a.power = policy.base.scaled(&Rational::from(f));
    }
    Ok(out)
}

/// Draws one scaling factor per actor, in actor order.
pub fn draw_factors(policy: &AugmentationPolicy, actors: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
    let (lo, hi) = policy.psi_range;
    (0..actors).map(|_| rng.gen_range(lo..=hi)).collect()
}

/// Annotates `sdf` with powers and delays; deterministic for a fixed seed.
pub fn augment(sdf: &SdfGraph, policy: &AugmentationPolicy) -> Result<SdfGraph> {
    policy.validate()?;
    augment_with_factors(sdf, policy, &draw_factors(policy, sdf.actors().len()))
}
