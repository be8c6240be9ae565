//! Reading and writing the SDF3 XML subset: actors with rated ports,
//! channels with initial tokens, and per-actor execution times.

use std::collections::HashMap;
use std::fmt::Write as _;

use roxmltree::{Document, Node};

use crate::error::{Error, Result};
use crate::graph::{SdfActor, SdfChannel, SdfGraph};

/// A parsed SDF3 file.
#[derive(Clone, Debug)]
pub struct Sdf3Graph {
    pub name: String,
    pub graph: SdfGraph,
    /// Whether `actorProperties` supplied an execution time for each actor.
    pub has_exec_time: Vec<bool>,
}

fn context(doc: &Document, node: Node) -> String {
    let pos = doc.text_pos_at(node.range().start);
    format!("line {}, <{}>", pos.row, node.tag_name().name())
}

fn attr<'a>(doc: &Document, node: Node<'a, 'a>, name: &str) -> Result<&'a str> {
    node.attribute(name)
        .ok_or_else(|| Error::parse(context(doc, node), format!("missing attribute {name:?}")))
}

fn number(doc: &Document, node: Node, name: &str, text: &str) -> Result<u64> {
    if text.contains(',') {
        return Err(Error::UnsupportedFeature(format!(
            "cyclo-static rate list {text:?} at {}",
            context(doc, node)
        )));
    }
    text.trim().parse().map_err(|_| {
        Error::parse(
            context(doc, node),
            format!("{name} {text:?} is not a non-negative integer"),
        )
    })
}

fn child<'a>(node: Node<'a, 'a>, tag: &str) -> impl Iterator<Item = Node<'a, 'a>> + 'a {
    let tag = tag.to_string();
    node.children()
        .filter(move |c| c.is_element() && c.tag_name().name() == tag)
}

/// Parses the first `sdf` element in `xml`.
pub fn parse_sdf3(xml: &str) -> Result<Sdf3Graph> {
    let doc = Document::parse(xml).map_err(|e| Error::parse("xml", e.to_string()))?;
    if let Some(csdf) = doc.descendants().find(|n| n.has_tag_name("csdf")) {
        return Err(Error::UnsupportedFeature(format!(
            "cyclo-static graph at {}",
            context(&doc, csdf)
        )));
    }
    let sdf = doc
        .descendants()
        .find(|n| n.has_tag_name("sdf"))
        .ok_or_else(|| Error::parse("xml", "no <sdf> element"))?;
    let name = sdf
        .attribute("name")
        .or_else(|| sdf.parent_element().and_then(|p| p.attribute("name")))
        .unwrap_or("graph")
        .to_string();

    let mut actors = Vec::new();
    let mut index = HashMap::new();
    // (actor, port) -> rate
    let mut ports: HashMap<(usize, &str), u64> = HashMap::new();
    for a in child(sdf, "actor") {
        let actor_name = attr(&doc, a, "name")?;
        let id = actors.len();
        if index.insert(actor_name, id).is_some() {
            return Err(Error::parse(
                context(&doc, a),
                format!("duplicate actor {actor_name:?}"),
            ));
        }
        for p in child(a, "port") {
            let port = attr(&doc, p, "name")?;
            let rate = number(&doc, p, "rate", attr(&doc, p, "rate")?)?;
            if rate == 0 {
                return Err(Error::parse(context(&doc, p), "port rate must be at least 1"));
            }
            ports.insert((id, port), rate);
        }
        actors.push(SdfActor::new(actor_name, 0));
    }

    let lookup = |node: Node, actor_attr: &str, port_attr: &str| -> Result<(usize, u64)> {
        let actor = attr(&doc, node, actor_attr)?;
        let id = *index
            .get(actor)
            .ok_or_else(|| Error::parse(context(&doc, node), format!("unknown actor {actor:?}")))?;
        let port = attr(&doc, node, port_attr)?;
        let rate = *ports
            .get(&(id, port))
            .ok_or_else(|| Error::parse(context(&doc, node), format!("actor {actor:?} has no port {port:?}")))?;
        Ok((id, rate))
    };
    let mut channels = Vec::new();
    for c in child(sdf, "channel") {
        let (src, prod) = lookup(c, "srcActor", "srcPort")?;
        let (dst, cons) = lookup(c, "dstActor", "dstPort")?;
        let tokens = match c.attribute("initialTokens") {
            Some(t) => number(&doc, c, "initialTokens", t)?,
            None => 0,
        };
        channels.push(SdfChannel {
            src,
            dst,
            prod,
            cons,
            tokens,
        });
    }

    let mut has_exec_time = vec![false; actors.len()];
    let properties = sdf.next_siblings().find(|n| n.has_tag_name("sdfProperties"));
    for props in properties.into_iter().flat_map(|p| child(p, "actorProperties")) {
        let actor = attr(&doc, props, "actor")?;
        let id = *index
            .get(actor)
            .ok_or_else(|| Error::parse(context(&doc, props), format!("unknown actor {actor:?}")))?;
        let processors: Vec<Node> = child(props, "processor").collect();
        let chosen = processors
            .iter()
            .find(|p| p.attribute("default") == Some("true"))
            .or(processors.first());
        let Some(time) = chosen.and_then(|p| child(*p, "executionTime").next()) else {
            continue;
        };
        actors[id].exec_time = number(&doc, time, "time", attr(&doc, time, "time")?)?;
        has_exec_time[id] = true;
    }

    Ok(Sdf3Graph {
        name,
        graph: SdfGraph::new(actors, channels)?,
        has_exec_time,
    })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Serializes `graph` in the subset [`parse_sdf3`] reads, including every
/// actor's execution time.
pub fn write_sdf3(name: &str, graph: &SdfGraph) -> String {
    let mut ports: Vec<Vec<(String, &str, u64)>> = vec![Vec::new(); graph.actors().len()];
    for (i, c) in graph.channels().iter().enumerate() {
        ports[c.src].push((format!("out{i}"), "out", c.prod));
        ports[c.dst].push((format!("in{i}"), "in", c.cons));
    }
    let name = escape(name);
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<sdf3 type=\"sdf\" version=\"1.0\">\n");
    let _ = writeln!(out, "  <applicationGraph name=\"{name}\">");
    let _ = writeln!(out, "    <sdf name=\"{name}\" type=\"{name}\">");
    for (a, actor_ports) in graph.actors().iter().zip(&ports) {
        let an = escape(&a.name);
        let _ = writeln!(out, "      <actor name=\"{an}\" type=\"{an}\">");
        for (port, dir, rate) in actor_ports {
            let _ = writeln!(out, "        <port name=\"{port}\" type=\"{dir}\" rate=\"{rate}\"/>");
        }
        out.push_str("      </actor>\n");
    }
    for (i, c) in graph.channels().iter().enumerate() {
        let src = escape(&graph.actors()[c.src].name);
        let dst = escape(&graph.actors()[c.dst].name);
        let _ = write!(
            out,
            "      <channel name=\"ch{i}\" srcActor=\"{src}\" srcPort=\"out{i}\" dstActor=\"{dst}\" dstPort=\"in{i}\""
        );
        if c.tokens > 0 {
            let _ = write!(out, " initialTokens=\"{}\"", c.tokens);
        }
        out.push_str("/>\n");
    }
    out.push_str("    </sdf>\n    <sdfProperties>\n");
    for a in graph.actors() {
        let _ = writeln!(out, "      <actorProperties actor=\"{}\">", escape(&a.name));
        out.push_str("        <processor type=\"proc_0\" default=\"true\">\n");
        let _ = writeln!(out, "          <executionTime time=\"{}\"/>", a.exec_time);
        out.push_str("        </processor>\n      </actorProperties>\n");
    }
    out.push_str("    </sdfProperties>\n  </applicationGraph>\n</sdf3>\n");
    out
}
