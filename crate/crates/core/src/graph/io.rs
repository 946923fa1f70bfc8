//! Edge-list ingestion.
//!
//! Format: UTF-8 text, one edge per line as `u<TAB>v` or `u<TAB>v<TAB>w`.
//! Lines starting with `#` are comments, except an optional first line
//! `#nodes N` which fixes the node count so isolated trailing ids exist.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{Graph, NodeId, MAX_NODE_ID};
use crate::error::{Error, Result};

pub fn load_edge_list_path(path: impl AsRef<Path>, weighted: bool) -> Result<Graph> {
    let file = File::open(path)?;
    load_edge_list(BufReader::new(file), weighted)
}

/// Parses an edge list. With `weighted`, every line must carry a third
/// column; otherwise edges get weight `1/d⁺(u)`. Any bad line rejects the
/// whole load.
pub fn load_edge_list(reader: impl BufRead, weighted: bool) -> Result<Graph> {
    let mut declared_n: Option<u64> = None;
    let mut edges: Vec<(NodeId, NodeId, f64)> = Vec::new();
    let mut seen: HashSet<(NodeId, NodeId)> = HashSet::new();
    let mut max_id: Option<u64> = None;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if let Some(count) = rest.trim_start().strip_prefix("nodes") {
                if line_no != 1 {
                    return Err(parse_err(line_no, "#nodes header must be the first line"));
                }
                let count: u64 = count
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(line_no, "malformed #nodes header"))?;
                if count > MAX_NODE_ID + 1 {
                    return Err(Error::NodeIdOverflow {
                        line: line_no,
                        id: count - 1,
                    });
                }
                declared_n = Some(count);
            }
            continue;
        }

        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let expected = if weighted { 3 } else { 2 };
        if fields.len() != expected {
            return Err(parse_err(
                line_no,
                format!("expected {expected} fields, found {}", fields.len()),
            ));
        }
        let u = parse_id(fields[0], line_no)?;
        let v = parse_id(fields[1], line_no)?;
        if let Some(n) = declared_n {
            for id in [u, v] {
                if id >= n {
                    return Err(Error::UnknownNode {
                        line: line_no,
                        id,
                        n: n as usize,
                    });
                }
            }
        }
        let w = if weighted {
            let w: f64 = fields[2]
                .parse()
                .map_err(|_| parse_err(line_no, format!("malformed weight {:?}", fields[2])))?;
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::NonPositiveWeight {
                    line: line_no,
                    weight: w,
                });
            }
            w
        } else {
            1.0
        };
        let (u, v) = (u as NodeId, v as NodeId);
        if !seen.insert((u, v)) {
            return Err(Error::DuplicateEdge {
                line: line_no,
                from: u,
                to: v,
            });
        }
        max_id = Some(max_id.map_or(u.max(v) as u64, |m| m.max(u.max(v) as u64)));
        edges.push((u, v, w));
    }

    let n = match (declared_n, max_id) {
        (Some(n), _) => n as usize,
        (None, Some(max)) => max as usize + 1,
        (None, None) => return Err(Error::param("edge list contains no edges")),
    };
    Graph::build(n, edges, !weighted)
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_id(field: &str, line: usize) -> Result<u64> {
    if field.starts_with('-') {
        return Err(parse_err(line, format!("negative node id {field:?}")));
    }
    if !field.bytes().all(|b| b.is_ascii_digit()) {
        return Err(parse_err(line, format!("malformed node id {field:?}")));
    }
    match field.parse::<u64>() {
        Ok(id) if id <= MAX_NODE_ID => Ok(id),
        Ok(id) => Err(Error::NodeIdOverflow { line, id }),
        Err(_) => Err(Error::NodeIdOverflow { line, id: u64::MAX }),
    }
}
