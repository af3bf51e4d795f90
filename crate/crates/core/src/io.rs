//! Text formats for designs, flows, and weighted factorizations.
//!
//! Design files: a header `design v=<v> lambda=<l> k=<k> b=<b>`, then b
//! lines of k ascending 0-based point indices. Flow files: b signed integers,
//! one per line, aligned with the design's block order. Factorization files:
//! `graph n=<n> edges=<e>`, then per factor a `factor <i>` line followed by
//! `u v w` edge lines. Lines starting with `#` are comments everywhere;
//! all files use LF line endings.

use std::error::Error;
use std::fmt;

use crate::design::{make_design, Design, DesignError};
use crate::factorizations::{Graph, WeightedFactorization};
use crate::flows::FlowAssignment;

#[derive(Debug)]
pub enum IoError {
    Parse(String),
    Design(DesignError),
}

impl fmt::Display for IoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IoError::Parse(m) => write!(f, "parse error: {m}"),
            IoError::Design(e) => write!(f, "invalid design: {e}"),
        }
    }
}

impl Error for IoError {}

impl From<DesignError> for IoError {
    fn from(e: DesignError) -> Self {
        IoError::Design(e)
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn parse_kv(token: &str, key: &str) -> Result<usize, IoError> {
    let rest = token
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| IoError::Parse(format!("expected {key}=<int>, got '{token}'")))?;
    rest.parse()
        .map_err(|_| IoError::Parse(format!("bad integer in '{token}'")))
}

pub fn write_design(design: &Design, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str(&format!("# {c}\n"));
    }
    out.push_str(&format!(
        "design v={} lambda={} k={} b={}\n",
        design.v(),
        design.lambda(),
        design.k(),
        design.num_blocks()
    ));
    for block in design.blocks() {
        let words: Vec<String> = block.iter().map(|p| p.to_string()).collect();
        out.push_str(&words.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_design(text: &str) -> Result<Design, IoError> {
    let mut lines = content_lines(text);
    let header = lines
        .next()
        .ok_or_else(|| IoError::Parse("empty design file".into()))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 5 || tokens[0] != "design" {
        return Err(IoError::Parse(format!("bad header '{header}'")));
    }
    let v = parse_kv(tokens[1], "v")?;
    let lambda = parse_kv(tokens[2], "lambda")?;
    let k = parse_kv(tokens[3], "k")?;
    let b = parse_kv(tokens[4], "b")?;
    let mut blocks = Vec::with_capacity(b);
    for line in lines {
        let block: Result<Vec<usize>, _> = line.split_whitespace().map(str::parse).collect();
        let block = block.map_err(|_| IoError::Parse(format!("bad block line '{line}'")))?;
        blocks.push(block);
    }
    if blocks.len() != b {
        return Err(IoError::Parse(format!(
            "header promises {b} blocks, file has {}",
            blocks.len()
        )));
    }
    Ok(make_design(v, lambda, k, blocks)?)
}

pub fn write_flow(flow: &FlowAssignment, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str(&format!("# {c}\n"));
    }
    for w in &flow.weights {
        out.push_str(&format!("{w}\n"));
    }
    out
}

pub fn read_flow(text: &str) -> Result<FlowAssignment, IoError> {
    let mut weights = Vec::new();
    for line in content_lines(text) {
        let w: i64 = line
            .parse()
            .map_err(|_| IoError::Parse(format!("bad weight line '{line}'")))?;
        weights.push(w);
    }
    if weights.is_empty() {
        return Err(IoError::Parse("empty flow file".into()));
    }
    Ok(FlowAssignment::new(weights))
}

pub fn write_factorization(wf: &WeightedFactorization, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str(&format!("# {c}\n"));
    }
    out.push_str(&format!(
        "graph n={} edges={}\n",
        wf.host.num_vertices(),
        wf.host.num_edges()
    ));
    for (fi, factor) in wf.factors.iter().enumerate() {
        out.push_str(&format!("factor {fi}\n"));
        for &ei in factor {
            let (u, v) = wf.host.edge(ei);
            out.push_str(&format!("{u} {v} {}\n", wf.weights[ei]));
        }
    }
    out
}

pub fn read_factorization(text: &str) -> Result<WeightedFactorization, IoError> {
    let mut lines = content_lines(text);
    let header = lines
        .next()
        .ok_or_else(|| IoError::Parse("empty factorization file".into()))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 3 || tokens[0] != "graph" {
        return Err(IoError::Parse(format!("bad header '{header}'")));
    }
    let n = parse_kv(tokens[1], "n")?;
    let ecount = parse_kv(tokens[2], "edges")?;
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(ecount);
    let mut edge_weights: Vec<i64> = Vec::with_capacity(ecount);
    let mut factor_edges: Vec<Vec<usize>> = Vec::new();
    for line in lines {
        if let Some(rest) = line.strip_prefix("factor") {
            let idx: usize = rest
                .trim()
                .parse()
                .map_err(|_| IoError::Parse(format!("bad factor line '{line}'")))?;
            if idx != factor_edges.len() {
                return Err(IoError::Parse(format!(
                    "factors out of order at '{line}'"
                )));
            }
            factor_edges.push(Vec::new());
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(IoError::Parse(format!("bad edge line '{line}'")));
        }
        let u: usize = parts[0]
            .parse()
            .map_err(|_| IoError::Parse(format!("bad vertex in '{line}'")))?;
        let v: usize = parts[1]
            .parse()
            .map_err(|_| IoError::Parse(format!("bad vertex in '{line}'")))?;
        let w: i64 = parts[2]
            .parse()
            .map_err(|_| IoError::Parse(format!("bad weight in '{line}'")))?;
        let current = factor_edges
            .last_mut()
            .ok_or_else(|| IoError::Parse("edge line before any factor".into()))?;
        current.push(edges.len());
        edges.push((u, v));
        edge_weights.push(w);
    }
    if edges.len() != ecount {
        return Err(IoError::Parse(format!(
            "header promises {ecount} edges, file has {}",
            edges.len()
        )));
    }
    // Re-map through the canonical Graph edge order.
    let host = Graph::new(n, edges.clone());
    let mut weights = vec![0i64; host.num_edges()];
    let mut factors: Vec<Vec<usize>> = Vec::with_capacity(factor_edges.len());
    for fe in &factor_edges {
        let mut f = Vec::with_capacity(fe.len());
        for &raw in fe {
            let (u, v) = edges[raw];
            let ei = host
                .index_of(u, v)
                .ok_or_else(|| IoError::Parse("edge lost in canonicalization".into()))?;
            weights[ei] = edge_weights[raw];
            f.push(ei);
        }
        factors.push(f);
    }
    Ok(WeightedFactorization {
        host,
        factors,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn design_round_trip_is_byte_identical() {
        let (d, _) = crate::constructions::ts62();
        let text = write_design(&d, &["provenance: fixed TS(6,2)".into()]);
        let d2 = read_design(&text).unwrap();
        assert_eq!(d, d2);
        let text2 = write_design(&d2, &["provenance: fixed TS(6,2)".into()]);
        assert_eq!(text, text2);
    }

    #[test]
    fn flow_round_trip() {
        let (_, f) = crate::constructions::ts62();
        let text = write_flow(&f, &[]);
        let f2 = read_flow(&text).unwrap();
        assert_eq!(f, f2);
    }

    #[test]
    fn factorization_round_trip() {
        let wf = crate::factorizations::knn_null(4).unwrap();
        let text = write_factorization(&wf, &[]);
        let wf2 = read_factorization(&text).unwrap();
        assert_eq!(wf.host, wf2.host);
        assert_eq!(wf.weights, wf2.weights);
        assert_eq!(wf.factors, wf2.factors);
        let text2 = write_factorization(&wf2, &[]);
        assert_eq!(text, text2);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# a comment\n\ndesign v=3 lambda=2 k=3 b=2\n0 1 2\n# mid comment\n0 1 2\n";
        let d = read_design(text).unwrap();
        assert_eq!(d.num_blocks(), 2);
    }

    #[test]
    fn bad_headers_are_rejected() {
        assert!(read_design("blocks v=3").is_err());
        assert!(read_design("design v=3 lambda=1 k=3 b=5\n0 1 2\n").is_err());
        assert!(read_flow("# only comments\n").is_err());
    }
}
