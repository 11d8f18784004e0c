//! Plain-text graph files.
//!
//! ```text
//! qnet-graph v1
//! n=<N> kind=<binary|weighted|sampled>
//! <node_id> <x_km> <y_km>        (N lines)
//! <i> <j> <weight>               (one per edge, i < j)
//! ```
//!
//! Floats are written in Rust's shortest round-trip form, so a load after a
//! save reproduces every value bit for bit.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::adjacency::{AdjacencyKind, Edge, WeightedAdjacency};
use super::models::Point;
use crate::error::{Error, Result};

const MAGIC: &str = "qnet-graph v1";

pub fn write_graph<W: Write>(
    out: &mut W,
    w: &WeightedAdjacency,
    positions: &[Point],
) -> Result<()> {
    if positions.len() != w.n() {
        return Err(Error::invalid(format!(
            "{} positions for {} nodes",
            positions.len(),
            w.n()
        )));
    }
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "n={} kind={}", w.n(), w.kind().file_token())?;
    for (id, p) in positions.iter().enumerate() {
        writeln!(out, "{id} {:?} {:?}", p.x, p.y)?;
    }
    for e in w.edges() {
        writeln!(out, "{} {} {:?}", e.i, e.j, e.weight)?;
    }
    Ok(())
}

pub fn save_graph(w: &WeightedAdjacency, positions: &[Point], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    write_graph(&mut out, w, positions)?;
    out.flush()?;
    Ok(())
}

struct LineReader<'a, R> {
    lines: std::io::Lines<R>,
    line_no: usize,
    path: &'a Path,
}

impl<R: BufRead> LineReader<'_, R> {
    fn malformed(&self, line: usize, message: impl Into<String>) -> Error {
        Error::MalformedFile {
            path: self.path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    fn next_line(&mut self) -> Option<Result<String>> {
        let line = self.lines.next()?;
        self.line_no += 1;
        Some(line.map_err(Error::from))
    }

    fn require(&mut self, what: &str) -> Result<String> {
        match self.next_line() {
            Some(line) => line,
            None => Err(self.malformed(
                self.line_no + 1,
                format!("unexpected end of file, expected {what}"),
            )),
        }
    }

    fn field<T: std::str::FromStr>(&self, tok: Option<&str>, what: &str) -> Result<T> {
        let tok = tok.ok_or_else(|| self.malformed(self.line_no, format!("missing {what}")))?;
        tok.parse()
            .map_err(|_| self.malformed(self.line_no, format!("cannot parse {what} from {tok:?}")))
    }
}

pub fn read_graph<R: BufRead>(input: R, path: &Path) -> Result<(WeightedAdjacency, Vec<Point>)> {
    let mut rd = LineReader {
        lines: input.lines(),
        line_no: 0,
        path,
    };

    let magic = rd.require("header")?;
    if magic != MAGIC {
        return Err(rd.malformed(1, format!("expected {MAGIC:?}, found {magic:?}")));
    }

    let header = rd.require("size line")?;
    let mut n = None;
    let mut kind = None;
    for tok in header.split_whitespace() {
        if let Some(v) = tok.strip_prefix("n=") {
            n = Some(rd.field::<usize>(Some(v), "node count")?);
        } else if let Some(v) = tok.strip_prefix("kind=") {
            kind = Some(
                AdjacencyKind::from_file_token(v)
                    .ok_or_else(|| rd.malformed(2, format!("unknown kind {v:?}")))?,
            );
        } else {
            return Err(rd.malformed(2, format!("unexpected token {tok:?}")));
        }
    }
    let n = n.ok_or_else(|| rd.malformed(2, "missing n="))?;
    let kind = kind.ok_or_else(|| rd.malformed(2, "missing kind="))?;

    let mut positions = Vec::with_capacity(n);
    for id in 0..n {
        let line = rd.require("node position")?;
        let mut toks = line.split_whitespace();
        let got: usize = rd.field(toks.next(), "node id")?;
        if got != id {
            return Err(rd.malformed(rd.line_no, format!("expected node id {id}, found {got}")));
        }
        let x: f64 = rd.field(toks.next(), "x coordinate")?;
        let y: f64 = rd.field(toks.next(), "y coordinate")?;
        if toks.next().is_some() {
            return Err(rd.malformed(rd.line_no, "trailing fields"));
        }
        positions.push(Point { x, y });
    }

    let mut edges: Vec<Edge> = Vec::new();
    while let Some(line) = rd.next_line() {
        let line = line?;
        let mut toks = line.split_whitespace();
        let i: usize = rd.field(toks.next(), "edge source")?;
        let j: usize = rd.field(toks.next(), "edge target")?;
        let weight: f64 = rd.field(toks.next(), "edge weight")?;
        if toks.next().is_some() {
            return Err(rd.malformed(rd.line_no, "trailing fields"));
        }
        if !(i < j && j < n) {
            return Err(rd.malformed(rd.line_no, format!("edge ({i}, {j}) needs i < j < {n}")));
        }
        if !(weight > 0.0 && weight <= 1.0) || (kind.is_binary() && weight != 1.0) {
            return Err(rd.malformed(
                rd.line_no,
                format!("weight {weight} invalid for {kind} graph"),
            ));
        }
        if let Some(prev) = edges.last() {
            if (prev.i, prev.j) >= (i, j) {
                return Err(rd.malformed(rd.line_no, "edges must be sorted and unique"));
            }
        }
        edges.push(Edge { i, j, weight });
    }

    Ok((
        WeightedAdjacency::from_sorted_edges(n, kind, edges),
        positions,
    ))
}

pub fn load_graph(path: &Path) -> Result<(WeightedAdjacency, Vec<Point>)> {
    let file = fs::File::open(path)?;
    read_graph(BufReader::new(file), path)
}
