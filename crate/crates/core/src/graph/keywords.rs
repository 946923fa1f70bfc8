//! Keyword file: lines `node<TAB>kw1,kw2,...`. Each keyword induces a target
//! set `T`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::NodeId;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeywordMap {
    targets: BTreeMap<String, Vec<NodeId>>,
    by_node: BTreeMap<NodeId, Vec<String>>,
}

impl KeywordMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, node: NodeId, keyword: &str) {
        let list = self.targets.entry(keyword.to_string()).or_default();
        if let Err(pos) = list.binary_search(&node) {
            list.insert(pos, node);
            let kws = self.by_node.entry(node).or_default();
            if let Err(pos) = kws.binary_search_by(|k| k.as_str().cmp(keyword)) {
                kws.insert(pos, keyword.to_string());
            }
        }
    }

    /// Sorted, duplicate-free target set for `keyword`.
    pub fn targets(&self, keyword: &str) -> Option<&[NodeId]> {
        self.targets.get(keyword).map(Vec::as_slice)
    }

    pub fn keywords_of(&self, node: NodeId) -> &[String] {
        self.by_node.get(&node).map_or(&[], Vec::as_slice)
    }

    /// Keywords in lexicographic order with their target sets.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[NodeId])> {
        self.targets.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Maximum number of keywords attached to any node.
    pub fn gamma(&self) -> usize {
        self.by_node.values().map(Vec::len).max().unwrap_or(0)
    }
}

pub fn load_keywords_path(path: impl AsRef<Path>, n: usize) -> Result<KeywordMap> {
    let file = File::open(path)?;
    load_keywords(BufReader::new(file), n)
}

/// Parses a keyword file for a graph with `n` nodes.
pub fn load_keywords(reader: impl BufRead, n: usize) -> Result<KeywordMap> {
    let mut map = KeywordMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (node, rest) = trimmed
            .split_once(|c: char| c.is_whitespace())
            .ok_or_else(|| Error::Parse {
                line: line_no,
                message: "expected `node<TAB>keywords`".into(),
            })?;
        let id: u64 = node.parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("malformed node id {node:?}"),
        })?;
        if id >= n as u64 {
            return Err(Error::UnknownNode {
                line: line_no,
                id,
                n,
            });
        }
        for kw in rest.split(',').map(str::trim).filter(|k| !k.is_empty()) {
            map.insert(id as NodeId, kw);
        }
    }
    Ok(map)
}
