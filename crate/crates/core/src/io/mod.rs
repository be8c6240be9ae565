//! Benchmark ingestion, random graph generation and result files.

pub mod annotate;
pub mod generate;
pub mod results;
pub mod sdf3;

use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::graph::SdfGraph;

pub use annotate::{augment, augment_with_factors, ActorAnnotation, Annotations, AugmentationPolicy};
pub use generate::{generate_random, GeneratorParams};
pub use results::{
    gantt_csv, points_csv, read_front_file, read_points_csv, read_report, write_report, Report, ScheduleFile,
};
pub use sdf3::{parse_sdf3, write_sdf3, Sdf3Graph};

/// `graph.xml` -> `graph.annotations.json`.
pub fn sidecar_path(xml: &Path) -> PathBuf {
    let stem = xml
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    xml.with_file_name(format!("{stem}.annotations.json"))
}

/// Parses SDF3 text and applies annotations when given.
pub fn load_sdf3(xml: &str, annotations: Option<&str>) -> Result<(String, SdfGraph)> {
    let Sdf3Graph {
        name,
        mut graph,
        has_exec_time,
    } = parse_sdf3(xml)?;
    let ann = match annotations {
        Some(text) => Annotations::from_json(text)?,
        None => Annotations {
            schema: annotate::SCHEMA_VERSION,
            metadata: Default::default(),
            actors: Default::default(),
        },
    };
    ann.apply(&mut graph, &has_exec_time)?;
    Ok((name, graph))
}

/// Reads an SDF3 file with its annotations: `annotations` when given,
/// otherwise the sidecar next to the file if it exists.
pub fn load_sdf3_file(path: &Path, annotations: Option<&Path>) -> Result<(String, SdfGraph)> {
    let xml = std::fs::read_to_string(path)?;
    let side = match annotations {
        Some(p) => Some(std::fs::read_to_string(p)?),
        None => {
            let p = sidecar_path(path);
            p.exists().then(|| std::fs::read_to_string(p)).transpose()?
        }
    };
    load_sdf3(&xml, side.as_deref())
}
