//! Text formats: Matrix Market coordinate files for square real general
//! matrices, and whitespace-separated directed edge lists (`src dst` per
//! line, `#` comments).

use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sparse::SparseMatrix;

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::ParseError { line, reason: reason.into() }
}

/// Reads a Matrix Market `coordinate real general` file describing a square
/// matrix. Indices in the file are 1-based.
pub fn read_matrix_market<T: Real, R: Read>(reader: R) -> Result<SparseMatrix<T>> {
    let buf = BufReader::new(reader);
    let mut lines = buf.lines().enumerate();

    let (lno, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header.map_err(|e| parse_err(lno + 1, e.to_string()))?;
    let lower = header.to_ascii_lowercase();
    if !lower.starts_with("%%matrixmarket") {
        return Err(parse_err(lno + 1, "missing MatrixMarket banner"));
    }
    let fields: Vec<&str> = lower.split_whitespace().collect();
    if fields.len() < 5
        || fields[1] != "matrix"
        || fields[2] != "coordinate"
        || fields[3] != "real"
        || fields[4] != "general"
    {
        return Err(parse_err(lno + 1, "only `matrix coordinate real general` is supported"));
    }

    // Skip comment lines, then the size line.
    let mut size_line = None;
    for (lno, line) in &mut lines {
        let line = line.map_err(|e| parse_err(lno + 1, e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        size_line = Some((lno + 1, trimmed.to_string()));
        break;
    }
    let (size_lno, size_line) = size_line.ok_or_else(|| parse_err(2, "missing size line"))?;
    let parts: Vec<&str> = size_line.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(parse_err(size_lno, "size line needs `rows cols nnz`"));
    }
    let rows: usize = parts[0].parse().map_err(|_| parse_err(size_lno, "bad row count"))?;
    let cols: usize = parts[1].parse().map_err(|_| parse_err(size_lno, "bad column count"))?;
    let nnz: usize = parts[2].parse().map_err(|_| parse_err(size_lno, "bad nnz count"))?;
    if rows != cols {
        return Err(parse_err(size_lno, format!("matrix must be square, got {rows}x{cols}")));
    }

    let mut trips: Vec<(usize, usize, T)> = Vec::with_capacity(nnz);
    for (lno, line) in &mut lines {
        let lno = lno + 1;
        let line = line.map_err(|e| parse_err(lno, e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = trimmed.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(parse_err(lno, "entry line needs `row col value`"));
        }
        let r: usize = parts[0].parse().map_err(|_| parse_err(lno, "bad row index"))?;
        let c: usize = parts[1].parse().map_err(|_| parse_err(lno, "bad column index"))?;
        let v: f64 = parts[2].parse().map_err(|_| parse_err(lno, "bad value"))?;
        if r == 0 || c == 0 || r > rows || c > cols {
            return Err(parse_err(lno, format!("index ({r}, {c}) outside 1..={rows}")));
        }
        trips.push((r - 1, c - 1, T::c(v)));
        if trips.len() == nnz {
            break;
        }
    }
    if trips.len() != nnz {
        return Err(parse_err(size_lno, format!("expected {nnz} entries, found {}", trips.len())));
    }
    SparseMatrix::from_coo(rows, &trips)
}

/// Writes `a` as Matrix Market `coordinate real general` with 1-based
/// indices and 17-significant-digit values, in CSR order.
pub fn write_matrix_market<T: Real, W: Write>(a: &SparseMatrix<T>, mut out: W) -> std::io::Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", a.n(), a.n(), a.nnz())?;
    for (r, c, v) in a.triplets() {
        writeln!(out, "{} {} {:.16e}", r + 1, c + 1, v)?;
    }
    Ok(())
}

/// Reads a directed edge list: one `src dst` pair per whitespace-separated
/// line, lines starting with `#` skipped. Node ids are nonnegative integers.
pub fn read_edge_list<R: Read>(reader: R) -> Result<Vec<(usize, usize)>> {
    let buf = BufReader::new(reader);
    let mut edges = Vec::new();
    for (lno, line) in buf.lines().enumerate() {
        let lno = lno + 1;
        let line = line.map_err(|e| parse_err(lno, e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let src = parts
            .next()
            .ok_or_else(|| parse_err(lno, "missing source id"))?
            .parse::<usize>()
            .map_err(|_| parse_err(lno, "bad source id"))?;
        let dst = parts
            .next()
            .ok_or_else(|| parse_err(lno, "missing destination id"))?
            .parse::<usize>()
            .map_err(|_| parse_err(lno, "bad destination id"))?;
        if parts.next().is_some() {
            return Err(parse_err(lno, "trailing tokens after edge"));
        }
        edges.push((src, dst));
    }
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_preserves_csr() {
        let a = SparseMatrix::from_coo(
            4,
            &[(0, 1, 0.5f64), (2, 3, -1.25), (3, 0, 1.0 / 3.0), (1, 1, 2.0)],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&a, &mut buf).unwrap();
        let b: SparseMatrix<f64> = read_matrix_market(&buf[..]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = "%%MatrixMarket matrix coordinate real general\n% a comment\n\n2 2 1\n% another\n1 2 3.5\n";
        let a: SparseMatrix<f64> = read_matrix_market(text.as_bytes()).unwrap();
        assert_eq!(a.triplets().collect::<Vec<_>>(), vec![(0, 1, 3.5)]);
    }

    #[test]
    fn malformed_entry_reports_line() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 oops 3.5\n";
        match read_matrix_market::<f64, _>(text.as_bytes()) {
            Err(Error::ParseError { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected ParseError, got {other:?}"),
        }
    }

    #[test]
    fn non_square_is_rejected() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 3 0\n";
        assert!(matches!(
            read_matrix_market::<f64, _>(text.as_bytes()),
            Err(Error::ParseError { line: 2, .. })
        ));
    }

    #[test]
    fn unsupported_banner_is_rejected() {
        let text = "%%MatrixMarket matrix coordinate complex general\n1 1 0\n";
        assert!(matches!(
            read_matrix_market::<f64, _>(text.as_bytes()),
            Err(Error::ParseError { line: 1, .. })
        ));
    }

    #[test]
    fn edge_list_parses_and_reports_errors() {
        let text = "# comment\n0 1\n3 2\n";
        assert_eq!(read_edge_list(text.as_bytes()).unwrap(), vec![(0, 1), (3, 2)]);
        match read_edge_list("0 1\nx 2\n".as_bytes()) {
            Err(Error::ParseError { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected ParseError, got {other:?}"),
        }
        match read_edge_list("0 1 7\n".as_bytes()) {
            Err(Error::ParseError { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected ParseError, got {other:?}"),
        }
    }
}
