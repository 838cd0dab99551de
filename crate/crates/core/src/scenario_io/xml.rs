//! Small helpers shared by the file-kind parsers and writers.

use std::collections::HashSet;
use std::fmt::Write as _;

use roxmltree::{Document, Node};

use super::ParseError;

pub(crate) fn parse_document(bytes: &[u8]) -> Result<Document<'_>, ParseError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ParseError::Utf8(e.to_string()))?;
    Document::parse(text).map_err(|e| ParseError::Xml(e.to_string()))
}

pub(crate) fn expect_root<'a, 'i>(
    doc: &'a Document<'i>,
    name: &str,
) -> Result<Node<'a, 'i>, ParseError> {
    let root = doc.root_element();
    if root.tag_name().name() != name || root.tag_name().namespace().is_some() {
        return Err(ParseError::Schema {
            element: root.tag_name().name().to_string(),
            message: format!("expected root element <{name}>"),
        });
    }
    no_attributes(root)?;
    Ok(root)
}

/// Element children, rejecting stray non-whitespace text.
pub(crate) fn elements<'a, 'i>(
    node: Node<'a, 'i>,
) -> Result<Vec<Node<'a, 'i>>, ParseError> {
    let mut out = Vec::new();
    for child in node.children() {
        if child.is_element() {
            out.push(child);
        } else if child.is_text() && !child.text().unwrap_or("").trim().is_empty() {
            return Err(ParseError::Schema {
                element: node.tag_name().name().to_string(),
                message: "unexpected text content".into(),
            });
        }
    }
    Ok(out)
}

fn no_attributes(node: Node) -> Result<(), ParseError> {
    check_attributes(node, &[])
}

/// Reject attributes outside `allowed`.
pub(crate) fn check_attributes(node: Node, allowed: &[&str]) -> Result<(), ParseError> {
    for attr in node.attributes() {
        if attr.namespace().is_some() || !allowed.contains(&attr.name()) {
            return Err(ParseError::Schema {
                element: node.tag_name().name().to_string(),
                message: format!("unknown attribute `{}`", attr.name()),
            });
        }
    }
    Ok(())
}

pub(crate) fn leaf(node: Node) -> Result<(), ParseError> {
    if elements(node)?.is_empty() {
        Ok(())
    } else {
        Err(ParseError::Schema {
            element: node.tag_name().name().to_string(),
            message: "unexpected child elements".into(),
        })
    }
}

pub(crate) fn required<'a>(node: Node<'a, '_>, name: &str) -> Result<&'a str, ParseError> {
    node.attribute(name).ok_or_else(|| ParseError::Schema {
        element: node.tag_name().name().to_string(),
        message: format!("missing attribute `{name}`"),
    })
}

pub(crate) fn bad_value(node: Node, name: &str, value: &str) -> ParseError {
    ParseError::Schema {
        element: node.tag_name().name().to_string(),
        message: format!("attribute `{name}` has invalid value `{value}`"),
    }
}

pub(crate) fn required_f64(node: Node, name: &str) -> Result<f64, ParseError> {
    let raw = required(node, name)?;
    parse_f64(raw).ok_or_else(|| bad_value(node, name, raw))
}

pub(crate) fn optional_f64(node: Node, name: &str) -> Result<Option<f64>, ParseError> {
    node.attribute(name)
        .map(|raw| parse_f64(raw).ok_or_else(|| bad_value(node, name, raw)))
        .transpose()
}

pub(crate) fn required_i64(node: Node, name: &str) -> Result<i64, ParseError> {
    let raw = required(node, name)?;
    raw.trim().parse().map_err(|_| bad_value(node, name, raw))
}

/// Finite decimal floats only.
fn parse_f64(raw: &str) -> Option<f64> {
    raw.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

pub(crate) fn id_list(raw: &str) -> Vec<String> {
    raw.split_whitespace().map(str::to_string).collect()
}

pub(crate) fn unique<'a>(seen: &mut HashSet<&'a str>, id: &'a str) -> Result<(), ParseError> {
    if seen.insert(id) {
        Ok(())
    } else {
        Err(ParseError::DuplicateId(id.to_string()))
    }
}

pub(crate) fn escape(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\t' => out.push_str("&#9;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
    out
}

/// Writes indented elements with attributes in the order given.
pub(crate) struct XmlWriter {
    buf: String,
}

impl XmlWriter {
    pub fn new() -> Self {
        XmlWriter {
            buf: String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"),
        }
    }

    fn tag(&mut self, depth: usize, name: &str, attrs: &[(&str, String)], close: &str) {
        for _ in 0..depth {
            self.buf.push_str("    ");
        }
        self.buf.push('<');
        self.buf.push_str(name);
        for (k, v) in attrs {
            let _ = write!(self.buf, " {k}=\"{}\"", escape(v));
        }
        self.buf.push_str(close);
        self.buf.push('\n');
    }

    pub fn empty(&mut self, depth: usize, name: &str, attrs: &[(&str, String)]) {
        self.tag(depth, name, attrs, "/>");
    }

    pub fn open(&mut self, depth: usize, name: &str, attrs: &[(&str, String)]) {
        self.tag(depth, name, attrs, ">");
    }

    pub fn close(&mut self, depth: usize, name: &str) {
        for _ in 0..depth {
            self.buf.push_str("    ");
        }
        let _ = writeln!(self.buf, "</{name}>");
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf.into_bytes()
    }
}

/// Shortest decimal that parses back to the same value.
pub(crate) fn num(v: f64) -> String {
    format!("{v}")
}
