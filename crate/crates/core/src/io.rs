//! Plain-text file formats: degree files, edge lists, matrix CSV and family blocks.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{DegreeSequence, SimpleGraph, SymmetricProbMatrix};

/// One non-negative integer per line; vertex index = line number.
pub fn parse_degrees(text: &str) -> Result<DegreeSequence> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: u32 = line
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: expected a non-negative integer, got {line:?}", lineno + 1)))?;
        out.push(v);
    }
    DegreeSequence::new(out)
}

pub fn read_degrees(path: &Path) -> Result<DegreeSequence> {
    parse_degrees(&fs::read_to_string(path)?)
}

pub fn format_degrees(d: &DegreeSequence) -> String {
    let mut s = String::new();
    for v in d.degrees() {
        s.push_str(&v.to_string());
        s.push('\n');
    }
    s
}

pub fn write_degrees(path: &Path, d: &DegreeSequence) -> Result<()> {
    fs::write(path, format_degrees(d))?;
    Ok(())
}

/// Edge list, one `"j k"` line per edge with `j < k`.
pub fn format_edges(g: &SimpleGraph) -> String {
    let mut s = String::with_capacity(g.edge_count() * 8);
    for e in g.edges() {
        s.push_str(&e.to_string());
        s.push('\n');
    }
    s
}

pub fn parse_edges(n: usize, text: &str) -> Result<SimpleGraph> {
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace().map(str::parse::<usize>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(j)), Some(Ok(k)), None) => pairs.push((j, k)),
            _ => return Err(Error::Parse(format!("line {}: expected \"j k\", got {line:?}", lineno + 1))),
        }
    }
    SimpleGraph::from_pairs(n, pairs)
}

pub fn write_edges(path: &Path, g: &SimpleGraph) -> Result<()> {
    fs::write(path, format_edges(g))?;
    Ok(())
}

/// CSV with header `i,j,value`, upper triangle only.
pub fn write_matrix_csv<W: Write>(mut w: W, m: &SymmetricProbMatrix) -> Result<()> {
    writeln!(w, "i,j,value")?;
    for (e, v) in m.iter() {
        writeln!(w, "{},{},{}", e.lo(), e.hi(), v)?;
    }
    Ok(())
}

pub fn read_matrix_csv<R: BufRead>(r: R, n: usize) -> Result<SymmetricProbMatrix> {
    let mut values = vec![0.0; crate::graph::pair_count(n)];
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if lineno == 0 {
            if line.trim() != "i,j,value" {
                return Err(Error::Parse(format!("bad matrix header {line:?}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let bad = || Error::Parse(format!("line {}: malformed row {line:?}", lineno + 1));
        if fields.len() != 3 {
            return Err(bad());
        }
        let i: usize = fields[0].trim().parse().map_err(|_| bad())?;
        let j: usize = fields[1].trim().parse().map_err(|_| bad())?;
        let v: f64 = fields[2].trim().parse().map_err(|_| bad())?;
        if i >= j || j >= n {
            return Err(bad());
        }
        values[crate::graph::pair_index(n, i, j)] = v;
    }
    let mut it = values.into_iter();
    SymmetricProbMatrix::from_fn(n, |_, _| it.next().unwrap())
}

pub fn read_matrix_file(path: &Path, n: usize) -> Result<SymmetricProbMatrix> {
    read_matrix_csv(BufReader::new(fs::File::open(path)?), n)
}

/// Edge-list blocks separated by one blank line.
pub fn format_family<'a, I>(graphs: I) -> String
where
    I: IntoIterator<Item = &'a SimpleGraph>,
{
    graphs
        .into_iter()
        .map(format_edges)
        .collect::<Vec<_>>()
        .join("\n")
}

/// Inverse of [`format_family`]. An empty member is written as an empty block,
/// so this parser splits on single blank lines rather than skipping runs of them.
pub fn parse_family(n: usize, text: &str) -> Result<Vec<SimpleGraph>> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let mut blocks = vec![String::new()];
    for line in text.lines() {
        if line.trim().is_empty() {
            blocks.push(String::new());
        } else {
            let b = blocks.last_mut().unwrap();
            b.push_str(line);
            b.push('\n');
        }
    }
    blocks.iter().map(|b| parse_edges(n, b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::p_matrix;

    #[test]
    fn degree_file_roundtrip() {
        let d = DegreeSequence::new(vec![3, 1, 1, 1]).unwrap();
        let text = format_degrees(&d);
        assert_eq!(text, "3\n1\n1\n1\n");
        assert_eq!(parse_degrees(&text).unwrap(), d);
        assert!(parse_degrees("1\n-1\n").is_err());
    }

    #[test]
    fn edge_list_format() {
        let g = SimpleGraph::from_pairs(4, [(2, 0), (1, 3)]).unwrap();
        let text = format_edges(&g);
        assert_eq!(text, "0 2\n1 3\n");
        assert_eq!(parse_edges(4, &text).unwrap(), g);
        assert!(parse_edges(4, "0 1 2\n").is_err());
    }

    #[test]
    fn matrix_csv_roundtrip() {
        let p = p_matrix(&DegreeSequence::new(vec![2, 2, 1, 1]).unwrap());
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &p).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("i,j,value\n0,1,"));
        assert_eq!(text.lines().count(), 1 + 6);
        assert_eq!(read_matrix_csv(&buf[..], 4).unwrap(), p);
    }

    #[test]
    fn family_blocks_keep_empty_members() {
        let a = SimpleGraph::empty(3);
        let b = SimpleGraph::from_pairs(3, [(0, 1)]).unwrap();
        let text = format_family([&b, &a, &b]);
        assert_eq!(parse_family(3, &text).unwrap(), vec![b.clone(), a, b]);
    }
}
