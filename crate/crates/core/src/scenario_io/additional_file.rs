use std::collections::HashSet;

use super::xml::{
    check_attributes, elements, expect_root, leaf, num, parse_document, required, required_f64,
    unique, XmlWriter,
};
use super::{ContainerStopSpec, DetectorSpec, ParseError};
use crate::net_model::Network;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdditionalFile {
    pub detectors: Vec<DetectorSpec>,
    pub stops: Vec<ContainerStopSpec>,
}

fn edge_length(network: &Network, id: &str, edge: &str) -> Result<f64, ParseError> {
    network
        .edge(edge)
        .map(|e| e.length)
        .ok_or_else(|| ParseError::UnknownEdge {
            id: id.to_string(),
            edge: edge.to_string(),
        })
}

fn in_range(id: &str, edge: &str, pos: f64, length: f64) -> Result<(), ParseError> {
    if (0.0..=length).contains(&pos) {
        Ok(())
    } else {
        Err(ParseError::PosOutOfRange {
            id: id.to_string(),
            edge: edge.to_string(),
            pos,
            length,
        })
    }
}

/// Parses detectors and container stops, checking positions against the
/// edges of `network`.
pub fn parse_additional_file(bytes: &[u8], network: &Network) -> Result<AdditionalFile, ParseError> {
    let doc = parse_document(bytes)?;
    let root = expect_root(&doc, "additional")?;
    let mut out = AdditionalFile::default();
    let mut ids = HashSet::new();
    for el in elements(root)? {
        match el.tag_name().name() {
            "inductionLoop" => {
                check_attributes(el, &["id", "edge", "pos", "freq"])?;
                leaf(el)?;
                let id = required(el, "id")?;
                unique(&mut ids, id)?;
                let edge = required(el, "edge")?;
                let pos = required_f64(el, "pos")?;
                let freq = required_f64(el, "freq")?;
                in_range(id, edge, pos, edge_length(network, id, edge)?)?;
                if !(freq > 0.0) {
                    return Err(ParseError::NonPositiveFreq(id.to_string()));
                }
                out.detectors.push(DetectorSpec {
                    id: id.to_string(),
                    edge: edge.to_string(),
                    pos,
                    freq,
                });
            }
            "containerStop" => {
                check_attributes(el, &["id", "edge", "startPos", "endPos"])?;
                leaf(el)?;
                let id = required(el, "id")?;
                unique(&mut ids, id)?;
                let edge = required(el, "edge")?;
                let start_pos = required_f64(el, "startPos")?;
                let end_pos = required_f64(el, "endPos")?;
                let length = edge_length(network, id, edge)?;
                in_range(id, edge, start_pos, length)?;
                in_range(id, edge, end_pos, length)?;
                if start_pos >= end_pos {
                    return Err(ParseError::EmptyStopInterval(id.to_string()));
                }
                out.stops.push(ContainerStopSpec {
                    id: id.to_string(),
                    edge: edge.to_string(),
                    start_pos,
                    end_pos,
                });
            }
            other => {
                return Err(ParseError::Schema {
                    element: other.to_string(),
                    message: "unknown element inside <additional>".into(),
                })
            }
        }
    }
    Ok(out)
}

pub fn write_additional_file(file: &AdditionalFile) -> Vec<u8> {
    let mut w = XmlWriter::new();
    w.open(0, "additional", &[]);
    for d in &file.detectors {
        w.empty(
            1,
            "inductionLoop",
            &[
                ("id", d.id.clone()),
                ("edge", d.edge.clone()),
                ("pos", num(d.pos)),
                ("freq", num(d.freq)),
            ],
        );
    }
    for s in &file.stops {
        w.empty(
            1,
            "containerStop",
            &[
                ("id", s.id.clone()),
                ("edge", s.edge.clone()),
                ("startPos", num(s.start_pos)),
                ("endPos", num(s.end_pos)),
            ],
        );
    }
    w.close(0, "additional");
    w.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net_model::{build_network, Edge, Node};

    fn net() -> Network {
        build_network(
            vec![Node::plain("a"), Node::plain("b")],
            vec![Edge::new("e", "a", "b", 100.0, 13.89, 10)],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn parses_and_round_trips() {
        let xml = br#"<additional>
            <inductionLoop id="d0" edge="e" pos="50" freq="50"/>
            <containerStop id="s" edge="e" startPos="60" endPos="80"/>
        </additional>"#;
        let f = parse_additional_file(xml, &net()).unwrap();
        assert_eq!(f.detectors[0].freq, 50.0);
        assert_eq!(f.stops[0].end_pos, 80.0);
        assert_eq!(parse_additional_file(&write_additional_file(&f), &net()).unwrap(), f);
    }

    #[test]
    fn stop_beyond_edge_end() {
        let xml = br#"<additional><containerStop id="s" edge="e" startPos="60" endPos="120"/></additional>"#;
        assert!(matches!(
            parse_additional_file(xml, &net()),
            Err(ParseError::PosOutOfRange { pos, .. }) if pos == 120.0
        ));
    }

    #[test]
    fn zero_detectors_is_fine() {
        let f = parse_additional_file(b"<additional/>", &net()).unwrap();
        assert!(f.detectors.is_empty() && f.stops.is_empty());
    }

    #[test]
    fn bad_references() {
        let xml = br#"<additional><inductionLoop id="d" edge="nope" pos="1" freq="50"/></additional>"#;
        assert!(matches!(parse_additional_file(xml, &net()), Err(ParseError::UnknownEdge { .. })));
        let xml = br#"<additional><inductionLoop id="d" edge="e" pos="1" freq="0"/></additional>"#;
        assert_eq!(
            parse_additional_file(xml, &net()).unwrap_err(),
            ParseError::NonPositiveFreq("d".into())
        );
        let xml = br#"<additional><containerStop id="s" edge="e" startPos="8" endPos="8"/></additional>"#;
        assert_eq!(
            parse_additional_file(xml, &net()).unwrap_err(),
            ParseError::EmptyStopInterval("s".into())
        );
    }
}
