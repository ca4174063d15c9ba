//! Text and JSON file formats for systems, certificates and glue maps.
//!
//! Text systems look like
//!
//! ```text
//! sts v=7 complete=1
//! b 0 1 2
//! b 0 3 4
//! ...
//! cert doubling u=13 seed=0 phi=... cycle=...
//! ```

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sts_core::doubling::Certificate;
use sts_core::{PartialSts, Point};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    System(#[from] sts_core::Error),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Structured,
}

/// A system together with any certificate lines attached to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub system: PartialSts,
    pub certificates: Vec<Certificate>,
}

impl Document {
    pub fn new(system: PartialSts) -> Document {
        Document {
            system,
            certificates: Vec::new(),
        }
    }
}

pub fn to_text(doc: &Document) -> String {
    let ps = &doc.system;
    let mut out = String::with_capacity(16 + 16 * ps.num_blocks());
    writeln!(out, "sts v={} complete={}", ps.order(), u8::from(ps.is_complete())).unwrap();
    for b in ps.blocks() {
        let [p, q, r] = b.points();
        writeln!(out, "b {p} {q} {r}").unwrap();
    }
    for c in &doc.certificates {
        writeln!(out, "{c}").unwrap();
    }
    out
}

fn parse_err(line: usize, msg: impl Into<String>) -> IoError {
    IoError::Parse { line, msg: msg.into() }
}

fn field<'a>(word: Option<&'a str>, key: &str, line: usize) -> Result<&'a str, IoError> {
    word.and_then(|w| w.strip_prefix(key))
        .and_then(|w| w.strip_prefix('='))
        .ok_or_else(|| parse_err(line, format!("expected {key}=")))
}

pub fn parse_text(text: &str) -> Result<Document, IoError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (n, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let mut words = header.split_whitespace();
    if words.next() != Some("sts") {
        return Err(parse_err(n, "expected header 'sts v=<order> complete=<0|1>'"));
    }
    let order: usize = field(words.next(), "v", n)?
        .parse()
        .map_err(|_| parse_err(n, "bad order"))?;
    let complete = match field(words.next(), "complete", n)? {
        "0" => false,
        "1" => true,
        other => return Err(parse_err(n, format!("bad complete flag {other}"))),
    };
    let mut blocks = Vec::new();
    let mut certificates = Vec::new();
    for (n, line) in lines {
        if line.starts_with("cert ") {
            certificates.push(line.parse::<Certificate>().map_err(|e| parse_err(n, e.to_string()))?);
            continue;
        }
        let mut words = line.split_whitespace();
        if words.next() != Some("b") {
            return Err(parse_err(n, format!("unexpected line '{line}'")));
        }
        let pts: Vec<Point> = words
            .map(|w| w.parse().map_err(|_| parse_err(n, format!("bad point '{w}'"))))
            .collect::<Result<_, _>>()?;
        let block: [Point; 3] = pts.try_into().map_err(|_| parse_err(n, "a block needs three points"))?;
        blocks.push(block);
    }
    let system = PartialSts::new(order, blocks)?;
    if system.is_complete() != complete {
        return Err(parse_err(
            1,
            format!("header says complete={}, blocks disagree", u8::from(complete)),
        ));
    }
    Ok(Document { system, certificates })
}

#[derive(Serialize, Deserialize)]
struct JsonCertificate {
    u: usize,
    seed: u64,
    phi: Vec<Point>,
    cycle: [Point; 6],
}

#[derive(Serialize, Deserialize)]
struct JsonSystem {
    order: usize,
    complete: bool,
    blocks: Vec<[Point; 3]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    certificates: Vec<JsonCertificate>,
}

pub fn to_json(doc: &Document) -> String {
    let ps = &doc.system;
    let json = JsonSystem {
        order: ps.order(),
        complete: ps.is_complete(),
        blocks: ps.blocks().iter().map(|b| b.points()).collect(),
        certificates: doc
            .certificates
            .iter()
            .map(|c| JsonCertificate {
                u: c.u,
                seed: c.seed,
                phi: c.phi.clone(),
                cycle: c.cycle,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&json).expect("plain data serialises");
    s.push('\n');
    s
}

pub fn parse_json(text: &str) -> Result<Document, IoError> {
    let json: JsonSystem = serde_json::from_str(text)?;
    let system = PartialSts::new(json.order, json.blocks)?;
    if system.is_complete() != json.complete {
        return Err(parse_err(1, "complete flag disagrees with the blocks"));
    }
    let certificates = json
        .certificates
        .into_iter()
        .map(|c| Certificate {
            u: c.u,
            seed: c.seed,
            phi: c.phi,
            cycle: c.cycle,
        })
        .collect();
    Ok(Document { system, certificates })
}

/// Reads either format; JSON is recognised by a leading `{`.
pub fn parse_any(text: &str) -> Result<Document, IoError> {
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        parse_text(text)
    }
}

pub fn render(doc: &Document, format: Format) -> String {
    match format {
        Format::Text => to_text(doc),
        Format::Structured => to_json(doc),
    }
}

pub fn read_file(path: &Path) -> Result<Document, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })?;
    parse_any(&text)
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), IoError> {
    std::fs::write(path, contents).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

/// Glue files list one `left right` point pair per line; `#` starts a comment.
pub fn parse_glue(text: &str) -> Result<Vec<(Point, Point)>, IoError> {
    let mut pairs = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<Point> = line
            .split_whitespace()
            .map(|w| w.parse().map_err(|_| parse_err(k + 1, format!("bad point '{w}'"))))
            .collect::<Result<_, _>>()?;
        match nums[..] {
            [a, b] => pairs.push((a, b)),
            _ => return Err(parse_err(k + 1, "expected two points")),
        }
    }
    Ok(pairs)
}
