use std::collections::BTreeSet;

use super::xml::{
    check_attributes, elements, expect_root, id_list, leaf, num, optional_f64, parse_document,
    required, required_f64, required_i64, XmlWriter,
};
use super::ParseError;
use crate::net_model::{
    build_network, Edge, LightState, Network, Node, NodeKind, Phase, TrafficLightProgram,
};

pub fn parse_network_file(bytes: &[u8]) -> Result<Network, ParseError> {
    let doc = parse_document(bytes)?;
    let root = expect_root(&doc, "network")?;

    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut programs = Vec::new();
    for el in elements(root)? {
        match el.tag_name().name() {
            "node" => {
                check_attributes(el, &["id", "kind", "tls", "x", "y"])?;
                leaf(el)?;
                let kind = match required(el, "kind")? {
                    "plain" => NodeKind::Plain,
                    "traffic_light" => NodeKind::TrafficLight,
                    other => return Err(super::xml::bad_value(el, "kind", other)),
                };
                nodes.push(Node {
                    id: required(el, "id")?.to_string(),
                    kind,
                    tls: el.attribute("tls").map(str::to_string),
                    x: optional_f64(el, "x")?,
                    y: optional_f64(el, "y")?,
                });
            }
            "edge" => {
                check_attributes(
                    el,
                    &["id", "from", "to", "length", "speed", "priority", "allow"],
                )?;
                leaf(el)?;
                edges.push(Edge {
                    id: required(el, "id")?.to_string(),
                    from: required(el, "from")?.to_string(),
                    to: required(el, "to")?.to_string(),
                    length: required_f64(el, "length")?,
                    speed_limit: required_f64(el, "speed")?,
                    priority: required_i64(el, "priority")?,
                    allowed: el
                        .attribute("allow")
                        .map(|a| id_list(a).into_iter().collect())
                        .unwrap_or_else(BTreeSet::new),
                });
            }
            "tlProgram" => {
                check_attributes(el, &["id", "offset", "edges"])?;
                let controlled = id_list(required(el, "edges")?);
                let mut phases = Vec::new();
                for ph in elements(el)? {
                    if ph.tag_name().name() != "phase" {
                        return Err(ParseError::Schema {
                            element: ph.tag_name().name().to_string(),
                            message: "unknown element inside <tlProgram>".into(),
                        });
                    }
                    check_attributes(ph, &["dur", "state"])?;
                    leaf(ph)?;
                    let raw = required(ph, "state")?;
                    let states = raw
                        .chars()
                        .map(LightState::from_char)
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| super::xml::bad_value(ph, "state", raw))?;
                    phases.push(Phase {
                        duration: required_f64(ph, "dur")?,
                        states,
                    });
                }
                programs.push(TrafficLightProgram {
                    id: required(el, "id")?.to_string(),
                    offset: required_f64(el, "offset")?,
                    controlled,
                    phases,
                });
            }
            other => {
                return Err(ParseError::Schema {
                    element: other.to_string(),
                    message: "unknown element inside <network>".into(),
                })
            }
        }
    }
    if edges.is_empty() {
        return Err(ParseError::NoEdges);
    }
    Ok(build_network(nodes, edges, programs)?)
}

pub fn write_network_file(network: &Network) -> Vec<u8> {
    let mut w = XmlWriter::new();
    w.open(0, "network", &[]);
    for n in network.nodes() {
        let mut attrs = vec![("id", n.id.clone()), ("kind", n.kind.as_str().to_string())];
        if let Some(tls) = &n.tls {
            attrs.push(("tls", tls.clone()));
        }
        if let Some(x) = n.x {
            attrs.push(("x", num(x)));
        }
        if let Some(y) = n.y {
            attrs.push(("y", num(y)));
        }
        w.empty(1, "node", &attrs);
    }
    for e in network.edges() {
        let mut attrs = vec![
            ("id", e.id.clone()),
            ("from", e.from.clone()),
            ("to", e.to.clone()),
            ("length", num(e.length)),
            ("speed", num(e.speed_limit)),
            ("priority", e.priority.to_string()),
        ];
        if !e.allowed.is_empty() {
            let tags: Vec<&str> = e.allowed.iter().map(String::as_str).collect();
            attrs.push(("allow", tags.join(" ")));
        }
        w.empty(1, "edge", &attrs);
    }
    for p in network.programs() {
        w.open(
            1,
            "tlProgram",
            &[
                ("id", p.id.clone()),
                ("offset", num(p.offset)),
                ("edges", p.controlled.join(" ")),
            ],
        );
        for ph in &p.phases {
            let state: String = ph.states.iter().map(|s| s.as_char()).collect();
            w.empty(2, "phase", &[("dur", num(ph.duration)), ("state", state)]);
        }
        w.close(1, "tlProgram");
    }
    w.close(0, "network");
    w.finish()
}
