use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Graph, NodeId};
use crate::error::{Error, Result};

/// Loads a SNAP-style edge list.
///
/// Each non-comment line holds `u v` and optionally a third column with the
/// edge probability (default `1.0`). Lines starting with `#` or `%` are
/// skipped. Labels are compacted to `0..n` in order of first appearance,
/// self-loops are dropped and repeated pairs keep their first occurrence.
/// With `directed == false` every line contributes both directions.
pub fn load_edge_list(path: impl AsRef<Path>, directed: bool) -> Result<Graph> {
    let path = path.as_ref();
    let file = File::open(path)?;
    parse_edge_list(BufReader::new(file), directed, path)
}

pub fn parse_edge_list<R: BufRead>(reader: R, directed: bool, path: &Path) -> Result<Graph> {
    let mut ids: HashMap<u64, NodeId> = HashMap::new();
    let mut labels: Vec<u64> = Vec::new();
    let mut seen: HashSet<(NodeId, NodeId)> = HashSet::new();
    let mut edges = Vec::new();

    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let mut label = |what: &str| -> Result<u64> {
            let tok = fields
                .next()
                .ok_or_else(|| parse_err(lineno, format!("missing {what} node")))?;
            tok.parse::<u64>()
                .map_err(|_| parse_err(lineno, format!("invalid {what} node `{tok}`")))
        };
        let (a, b) = (label("source")?, label("target")?);
        let prob = match fields.next() {
            None => 1.0,
            Some(tok) => {
                let p: f64 = tok
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("invalid probability `{tok}`")))?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(parse_err(lineno, format!("probability {p} outside [0, 1]")));
                }
                p
            }
        };
        if let Some(extra) = fields.next() {
            return Err(parse_err(lineno, format!("unexpected field `{extra}`")));
        }

        let mut intern = |label: u64| {
            *ids.entry(label).or_insert_with(|| {
                labels.push(label);
                (labels.len() - 1) as NodeId
            })
        };
        let (u, v) = (intern(a), intern(b));
        if u == v {
            continue;
        }
        let mut add = |u: NodeId, v: NodeId| {
            if seen.insert((u, v)) {
                edges.push((u, v, prob));
            }
        };
        add(u, v);
        if !directed {
            add(v, u);
        }
    }

    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    Graph::with_labels(labels, edges)
}

/// Writes `label_u label_v p` lines, readable by [`load_edge_list`].
pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "# n={} m={}", g.n(), g.m())?;
    for (u, v, p) in g.edges() {
        writeln!(out, "{} {} {}", g.label(u), g.label(v), p)?;
    }
    out.flush()?;
    Ok(())
}

const CACHE_MAGIC: &[u8; 8] = b"IMINGRPH";
const CACHE_VERSION: u32 = 1;

/// Binary cache of a normalized graph: magic, version, `n`, `m`, the label
/// table and the edges in id order, all little-endian.
pub fn write_cache(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(CACHE_MAGIC)?;
    out.write_all(&CACHE_VERSION.to_le_bytes())?;
    out.write_all(&(g.n() as u64).to_le_bytes())?;
    out.write_all(&(g.m() as u64).to_le_bytes())?;
    for &l in g.labels() {
        out.write_all(&l.to_le_bytes())?;
    }
    for (u, v, p) in g.edges() {
        out.write_all(&u.to_le_bytes())?;
        out.write_all(&v.to_le_bytes())?;
        out.write_all(&p.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_cache(path: impl AsRef<Path>) -> Result<Graph> {
    let mut input = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != CACHE_MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut input)?);
    if version != CACHE_VERSION {
        return Err(Error::Cache(format!("version {version}, expected {CACHE_VERSION}")));
    }
    let n = u64::from_le_bytes(read_array(&mut input)?) as usize;
    let m = u64::from_le_bytes(read_array(&mut input)?) as usize;
    let labels = (0..n)
        .map(|_| read_array(&mut input).map(u64::from_le_bytes))
        .collect::<std::io::Result<Vec<_>>>()?;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let u = u32::from_le_bytes(read_array(&mut input)?);
        let v = u32::from_le_bytes(read_array(&mut input)?);
        let p = f64::from_le_bytes(read_array(&mut input)?);
        edges.push((u, v, p));
    }
    Graph::with_labels(labels, edges)
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> std::io::Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}
