//! Text and JSON formats for graphs and vertex functions.
//!
//! Graph text format, one record per line:
//!
//! ```text
//! # comment
//! graph 3            (or `graph 3 directed`)
//! mu 0 1.5
//! edge 0 1 2.0
//! ```
//!
//! Vertex tokens are either all integers in `0..n`, or arbitrary labels that
//! are numbered in order of first appearance and kept in a side table.
//! Vertices without a `mu` line get measure 1. In a directed file every
//! orientation is listed explicitly.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::graph::{EdgeRecord, GraphData, WeightedGraph};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("expected a number, got {tok:?}")))
}

enum Record<'a> {
    Mu(&'a str, f64),
    Edge(&'a str, &'a str, f64),
}

pub fn parse_graph_text<'a>(src: &'a str) -> Result<GraphData> {
    let mut header: Option<(usize, bool)> = None;
    let mut records = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = text.split_whitespace().collect();
        match toks[0] {
            "graph" => {
                if header.is_some() {
                    return Err(parse_err(line, "duplicate graph header"));
                }
                let n = toks
                    .get(1)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| parse_err(line, "expected `graph <n_vertices>`"))?;
                let directed = match toks.get(2) {
                    None => false,
                    Some(&"directed") => true,
                    Some(other) => return Err(parse_err(line, format!("unknown flag {other:?}"))),
                };
                if toks.len() > 3 {
                    return Err(parse_err(line, "trailing tokens after header"));
                }
                header = Some((n, directed));
            }
            "mu" if toks.len() == 3 => records.push((line, Record::Mu(toks[1], parse_f64(toks[2], line)?))),
            "edge" if toks.len() == 4 => records.push((
                line,
                Record::Edge(toks[1], toks[2], parse_f64(toks[3], line)?),
            )),
            "mu" | "edge" => return Err(parse_err(line, format!("wrong field count for {}", toks[0]))),
            other => return Err(parse_err(line, format!("unknown record {other:?}"))),
        }
        if header.is_none() {
            return Err(parse_err(line, "records before `graph` header"));
        }
    }
    let (n, directed) = header.ok_or_else(|| parse_err(0, "missing `graph` header"))?;

    let tokens = records.iter().flat_map(|(_, r)| match r {
        Record::Mu(v, _) => vec![*v],
        Record::Edge(u, v, _) => vec![*u, *v],
    });
    let numeric = tokens
        .clone()
        .all(|t| t.parse::<usize>().is_ok_and(|v| v < n));
    let mut ids: HashMap<&'a str, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut resolve = |tok: &'a str, line: usize| -> Result<usize> {
        if numeric {
            return Ok(tok.parse().unwrap());
        }
        if let Some(&id) = ids.get(tok) {
            return Ok(id);
        }
        if labels.len() == n {
            return Err(parse_err(line, format!("more than {n} distinct vertex labels")));
        }
        labels.push(tok.to_string());
        ids.insert(tok, labels.len() - 1);
        Ok(labels.len() - 1)
    };
    let mut measure = vec![1.0; n];
    let mut measured = vec![false; n];
    let mut edges = Vec::new();
    for (line, rec) in &records {
        match *rec {
            Record::Mu(v, value) => {
                let id = resolve(v, *line)?;
                if measured[id] {
                    return Err(parse_err(*line, format!("duplicate mu for {v:?}")));
                }
                measured[id] = true;
                measure[id] = value;
            }
            Record::Edge(u, v, w) => {
                let a = resolve(u, *line)?;
                let b = resolve(v, *line)?;
                edges.push(EdgeRecord { u: a, v: b, w });
            }
        }
    }
    if !numeric {
        while labels.len() < n {
            labels.push(format!("_{}", labels.len()));
        }
    }
    let data = GraphData {
        n,
        directed,
        measure,
        edges,
        labels: (!numeric).then_some(labels),
    };
    data.validate()?;
    Ok(data)
}

/// Writes the text format. Labels, if any, replace numeric ids.
pub fn graph_to_text(data: &GraphData) -> String {
    let name = |v: usize| match &data.labels {
        Some(l) => l[v].clone(),
        None => v.to_string(),
    };
    let mut out = format!(
        "graph {}{}\n",
        data.n,
        if data.directed { " directed" } else { "" }
    );
    for (v, m) in data.measure.iter().enumerate() {
        out.push_str(&format!("mu {} {m}\n", name(v)));
    }
    for e in &data.edges {
        out.push_str(&format!("edge {} {} {}\n", name(e.u), name(e.v), e.w));
    }
    out
}

pub fn parse_graph_json(src: &str) -> Result<GraphData> {
    let data: GraphData = serde_json::from_str(src)?;
    data.validate()?;
    Ok(data)
}

pub fn graph_to_json(data: &GraphData) -> String {
    serde_json::to_string_pretty(data).expect("graph data serializes")
}

/// Parses either format, choosing JSON when the first non-blank character is `{`.
pub fn parse_graph(src: &str) -> Result<WeightedGraph> {
    let data = if src.trim_start().starts_with('{') {
        parse_graph_json(src)?
    } else {
        parse_graph_text(src)?
    };
    WeightedGraph::from_data(data)
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<WeightedGraph> {
    parse_graph(&std::fs::read_to_string(path)?)
}

/// Parses `<vertex> <value>` lines, or a JSON array of numbers.
///
/// Vertex tokens are ids, or labels resolved through `labels` when given.
pub fn parse_function(src: &str, n: usize, labels: Option<&[String]>) -> Result<VertexFunction> {
    if src.trim_start().starts_with('[') {
        let values: Vec<f64> = serde_json::from_str(src)?;
        if values.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: values.len(),
            });
        }
        return Ok(VertexFunction::new(values));
    }
    let mut values = vec![None; n];
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = text.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(parse_err(line, "expected `<vertex> <value>`"));
        }
        let id = match labels.and_then(|l| l.iter().position(|s| s == toks[0])) {
            Some(id) => id,
            None => toks[0]
                .parse::<usize>()
                .ok()
                .filter(|&v| v < n)
                .ok_or_else(|| parse_err(line, format!("unknown vertex {:?}", toks[0])))?,
        };
        if values[id].replace(parse_f64(toks[1], line)?).is_some() {
            return Err(parse_err(line, format!("duplicate value for vertex {}", toks[0])));
        }
    }
    values
        .into_iter()
        .enumerate()
        .map(|(x, v)| v.ok_or_else(|| parse_err(0, format!("no value for vertex {x}"))))
        .collect::<Result<Vec<_>>>()
        .map(VertexFunction::new)
}

pub fn read_function(path: impl AsRef<Path>, g: &WeightedGraph) -> Result<VertexFunction> {
    parse_function(
        &std::fs::read_to_string(path)?,
        g.n(),
        g.data().labels.as_deref(),
    )
}

pub fn function_to_text(f: &VertexFunction) -> String {
    f.iter()
        .enumerate()
        .map(|(x, v)| format!("{x} {v}\n"))
        .collect()
}
