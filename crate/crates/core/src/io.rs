//! Text formats for hypergraphs and coefficient tensors.
//!
//! Hypergraphs: a header line `n d`, then one line per edge with `d`
//! vertex indices followed by the weight. Lines starting with `#` and blank
//! lines are skipped.
//!
//! Tensors: order 2 as CSV (one row per first index), any order as JSON
//! `{"dims": [...], "values": [...]}` with row-major values.

use std::fmt::Write as _;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::model::{CoeffTensor, Edge, WeightedHypergraph};

fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .map(|(i, line)| line.map(|l| (i + 1, l)).map_err(Error::from))
        .filter(|r| match r {
            Ok((_, l)) => {
                let t = l.trim();
                !t.is_empty() && !t.starts_with('#')
            }
            Err(_) => true,
        })
}

fn parse_field<T: std::str::FromStr>(line: usize, token: &str, what: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} {token:?}")))
}

pub fn parse_hypergraph<R: BufRead>(reader: R) -> Result<WeightedHypergraph> {
    let mut lines = content_lines(reader);
    let (line_no, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing header line \"n d\""))??;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 2 {
        return Err(Error::parse(line_no, "header must be \"n d\""));
    }
    let n: usize = parse_field(line_no, tokens[0], "vertex count")?;
    let d: usize = parse_field(line_no, tokens[1], "arity")?;

    let mut edges = Vec::new();
    for line in lines {
        let (line_no, text) = line?;
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() != d + 1 {
            return Err(Error::parse(
                line_no,
                format!("expected {d} vertices and a weight, found {} fields", tokens.len()),
            ));
        }
        let vertices = tokens[..d]
            .iter()
            .map(|t| parse_field::<usize>(line_no, t, "vertex"))
            .collect::<Result<Vec<_>>>()?;
        let weight: f64 = parse_field(line_no, tokens[d], "weight")?;
        if !weight.is_finite() {
            return Err(Error::parse(line_no, "weight must be finite"));
        }
        if !vertices.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::parse(
                line_no,
                format!("edge vertices {vertices:?} must be strictly increasing"),
            ));
        }
        edges.push(Edge { vertices, weight });
    }
    WeightedHypergraph::new(n, d, edges)
}

pub fn write_hypergraph(h: &WeightedHypergraph) -> String {
    let mut out = format!("{} {}\n", h.n(), h.d());
    for e in h.edges() {
        for v in &e.vertices {
            write!(out, "{v} ").unwrap();
        }
        writeln!(out, "{:?}", e.weight).unwrap();
    }
    out
}

/// Reads an order-2 tensor from CSV rows.
pub fn parse_tensor_csv<R: BufRead>(reader: R) -> Result<CoeffTensor> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in content_lines(reader) {
        let (line_no, text) = line?;
        let row = text
            .split(',')
            .map(|t| parse_field::<f64>(line_no, t.trim(), "entry"))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(
                    line_no,
                    format!("row has {} entries, expected {}", row.len(), first.len()),
                ));
            }
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(line_no, "entries must be finite"));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(1, "empty matrix"));
    }
    CoeffTensor::from_rows(&rows)
}

pub fn parse_tensor_json(text: &str) -> Result<CoeffTensor> {
    serde_json::from_str(text).map_err(|e| {
        let message = e.to_string();
        if e.is_data() && message.contains("invariant") {
            Error::Invariant(message)
        } else {
            Error::parse(e.line(), message)
        }
    })
}

/// Reads a tensor in either format: JSON when the first non-blank character is `{`.
pub fn parse_tensor(text: &str) -> Result<CoeffTensor> {
    if text.trim_start().starts_with('{') {
        parse_tensor_json(text)
    } else {
        parse_tensor_csv(text.as_bytes())
    }
}

pub fn write_tensor_csv(a: &CoeffTensor) -> Result<String> {
    if a.order() != 2 {
        return Err(Error::Shape(format!(
            "CSV holds order-2 tensors only, got order {}",
            a.order()
        )));
    }
    let m = a.dims()[1];
    let mut out = String::new();
    for row in a.values().chunks(m) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn write_tensor_json(a: &CoeffTensor) -> String {
    serde_json::to_string(a).expect("tensor serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_complete;

    #[test]
    fn parses_k3() {
        let h = parse_hypergraph("3 2\n0 1 1.0\n0 2 1.0\n1 2 1.0".as_bytes()).unwrap();
        assert_eq!(h, build_complete(3, 2, 1.0).unwrap());
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = "# K3\n\n3 2\n# edges\n0 1 1\n0 2 1\n\n1 2 1\n";
        assert_eq!(parse_hypergraph(text.as_bytes()).unwrap().edge_count(), 3);
    }

    #[test]
    fn repeated_vertex_is_rejected_with_line() {
        let err = parse_hypergraph("3 2\n0 0 1.0".as_bytes()).unwrap_err();
        assert_eq!(err, Error::parse(2, "edge vertices [0, 0] must be strictly increasing"));
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let err = parse_hypergraph("3 2\n0 1 1.0\n0 2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let err = parse_hypergraph("3 2\n0 1 x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(matches!(parse_hypergraph("".as_bytes()), Err(Error::Parse { .. })));
    }

    #[test]
    fn invariant_errors_surface() {
        let dup = parse_hypergraph("3 2\n0 1 1\n0 1 2\n".as_bytes()).unwrap_err();
        assert!(matches!(dup, Error::Invariant(_)));
        let range = parse_hypergraph("3 2\n0 3 1\n".as_bytes()).unwrap_err();
        assert!(matches!(range, Error::Invariant(_)));
    }

    #[test]
    fn parses_csv_matrix() {
        let a = parse_tensor("1,-1\n-1,1").unwrap();
        assert_eq!(a.dims(), &[2, 2]);
        assert_eq!(a.values(), &[1.0, -1.0, -1.0, 1.0]);
        assert!(matches!(parse_tensor("1,2\n3"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn parses_json_tensor() {
        let a = parse_tensor(r#"{"dims": [2, 1, 2], "values": [1, 2, 3, 4]}"#).unwrap();
        assert_eq!(a.order(), 3);
        assert_eq!(a.get(&[1, 0, 1]), 4.0);
        assert!(matches!(
            parse_tensor(r#"{"dims": [2, 2], "values": [1]}"#),
            Err(Error::Invariant(_))
        ));
        assert!(matches!(parse_tensor(r#"{"dims": [2"#), Err(Error::Parse { .. })));
    }

    #[test]
    fn csv_writer_rejects_higher_order() {
        let a = CoeffTensor::zeros(vec![1, 1, 1]).unwrap();
        assert!(write_tensor_csv(&a).is_err());
    }
}
