//! Bundled example graphs.

use crate::graph::{ActorSpec, Channel, MarkedGraph, PowerParams, SdfActor, SdfChannel, SdfGraph};
use crate::io::load_sdf3;

pub const AEC_XML: &str = include_str!("../fixtures/aec.xml");
pub const AEC_ANNOTATIONS: &str = include_str!("../fixtures/aec.annotations.json");
pub const SAMPLERATE_XML: &str = include_str!("../fixtures/samplerate.xml");
pub const SAMPLERATE_ANNOTATIONS: &str = include_str!("../fixtures/samplerate.annotations.json");

const AEC_NAMES: [&str; 6] = ["a1", "a2", "a3", "a4", "a5", "a6"];
const AEC_TIMES: [u64; 6] = [4, 3, 3, 9, 8, 4];
const AEC_CHANNELS: [(usize, usize, u64); 7] = [
    (0, 1, 0),
    (1, 2, 0),
    (2, 3, 0),
    (3, 4, 0),
    (4, 1, 1),
    (5, 4, 0),
    (5, 3, 0),
];

/// The six-actor echo-canceller graph: one cycle `a2 -> a3 -> a4 -> a5 ->
/// a2` holding a single token, `w = 1`, `s = 2` and the normalized power
/// model on every actor.
pub fn aec() -> MarkedGraph {
    let actors = AEC_NAMES
        .iter()
        .zip(AEC_TIMES)
        .enumerate()
        .map(|(id, (name, d))| ActorSpec {
            id,
            name: (*name).to_string(),
            exec_time: d,
            wakeup: 1,
            shutdown: 2,
            power: PowerParams::normalized(),
            group: id,
        })
        .collect();
    let channels = AEC_CHANNELS
        .iter()
        .map(|&(src, dst, tokens)| Channel { src, dst, tokens })
        .collect();
    MarkedGraph::with_actor_groups(actors, channels).expect("fixture is valid")
}

/// [`aec`] as a homogeneous SDF graph.
pub fn aec_sdf() -> SdfGraph {
    let actors = AEC_NAMES
        .iter()
        .zip(AEC_TIMES)
        .map(|(name, d)| SdfActor {
            wakeup: 1,
            shutdown: 2,
            ..SdfActor::new(*name, d)
        })
        .collect();
    let channels = AEC_CHANNELS
        .iter()
        .map(|&(src, dst, tokens)| SdfChannel {
            src,
            dst,
            prod: 1,
            cons: 1,
            tokens,
        })
        .collect();
    SdfGraph::new(actors, channels).expect("fixture is valid")
}

/// A six-actor multirate chain shaped like the Samplerate benchmark, with
/// one-token self-loops and annotations that make the last actor eight times
/// as power hungry as the others.
pub fn samplerate() -> SdfGraph {
    load_sdf3(SAMPLERATE_XML, Some(SAMPLERATE_ANNOTATIONS))
        .expect("fixture is valid")
        .1
}
