//! Matrix Market coordinate format reader and writer for sparse matrices.
//! Indices are 1-based on disk and 0-based in memory. The `general` and
//! `symmetric` coordinate variants of real/integer/pattern fields are
//! accepted; writing always produces `coordinate real general`.

use crate::sparse::SparseMatrix;
use std::io::{BufRead, Write};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum MmError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported matrix market header: {0}")]
    Format(String),
}

fn parse_err(line: usize, msg: impl Into<String>) -> MmError {
    MmError::Parse { line, msg: msg.into() }
}

pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<SparseMatrix, MmError> {
    let mut lines = reader.lines().enumerate();
    let (lineno, header) = loop {
        match lines.next() {
            Some((n, line)) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break (n + 1, line);
                }
            }
            None => return Err(MmError::Format("empty file".into())),
        }
    };
    if !header.starts_with("%%MatrixMarket") {
        return Err(parse_err(lineno, "missing %%MatrixMarket header"));
    }
    let fields: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if fields.len() < 5 || fields[1] != "matrix" || fields[2] != "coordinate" {
        return Err(MmError::Format(header));
    }
    let value_kind = fields[3].as_str();
    if !matches!(value_kind, "real" | "integer" | "pattern") {
        return Err(MmError::Format(header));
    }
    let symmetric = match fields[4].as_str() {
        "general" => false,
        "symmetric" => true,
        _ => return Err(MmError::Format(header)),
    };

    // Size line: first non-comment, non-empty line after the header.
    let (size_lineno, size_line) = loop {
        match lines.next() {
            Some((n, line)) => {
                let line = line?;
                let t = line.trim();
                if !t.is_empty() && !t.starts_with('%') {
                    break (n + 1, line);
                }
            }
            None => return Err(MmError::Format("missing size line".into())),
        }
    };
    let mut it = size_line.split_whitespace();
    let rows: usize = next_field(&mut it, size_lineno, "rows")?;
    let cols: usize = next_field(&mut it, size_lineno, "cols")?;
    let nnz: usize = next_field(&mut it, size_lineno, "nnz")?;

    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(nnz);
    let mut seen = 0usize;
    for (n, line) in lines {
        if seen == nnz {
            break;
        }
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let lineno = n + 1;
        let mut it = t.split_whitespace();
        let r: usize = next_field(&mut it, lineno, "row index")?;
        let c: usize = next_field(&mut it, lineno, "col index")?;
        let v: f64 = if value_kind == "pattern" {
            1.0
        } else {
            next_field(&mut it, lineno, "value")?
        };
        if r == 0 || c == 0 || r > rows || c > cols {
            return Err(parse_err(lineno, format!("entry ({r},{c}) outside {rows}x{cols}")));
        }
        triplets.push((r - 1, c - 1, v));
        if symmetric && r != c {
            triplets.push((c - 1, r - 1, v));
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(MmError::Format(format!("expected {nnz} entries, found {seen}")));
    }
    Ok(SparseMatrix::from_triplets(rows, cols, &triplets))
}

fn next_field<T: std::str::FromStr>(
    it: &mut std::str::SplitWhitespace<'_>,
    line: usize,
    what: &str,
) -> Result<T, MmError> {
    let tok = it.next().ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| parse_err(line, format!("bad {what}: {tok:?}")))
}

pub fn write_matrix_market<W: Write>(writer: &mut W, m: &SparseMatrix) -> Result<(), MmError> {
    writeln!(writer, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(writer, "{} {} {}", m.rows(), m.cols(), m.nnz())?;
    for (i, j, v) in m.iter_entries() {
        // {:e} keeps full round-trip precision for f64.
        writeln!(writer, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

pub fn read_matrix_market_file(path: impl AsRef<Path>) -> Result<SparseMatrix, MmError> {
    let file = std::fs::File::open(path)?;
    read_matrix_market(std::io::BufReader::new(file))
}

pub fn write_matrix_market_file(path: impl AsRef<Path>, m: &SparseMatrix) -> Result<(), MmError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_matrix_market(&mut file, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_sparse_matrix, Rng64};

    #[test]
    fn round_trip_preserves_matrix() {
        let mut rng = Rng64::new(4);
        let m = random_sparse_matrix(23, 17, 0.1, &mut rng);
        let mut buf = Vec::new();
        write_matrix_market(&mut buf, &m).unwrap();
        let back = read_matrix_market(std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn reads_symmetric_and_pattern() {
        let text = "%%MatrixMarket matrix coordinate pattern symmetric\n% comment\n3 3 2\n2 1\n3 3\n";
        let m = read_matrix_market(std::io::Cursor::new(text)).unwrap();
        assert_eq!(m.col(0).get(1), 1.0);
        assert_eq!(m.col(1).get(0), 1.0);
        assert_eq!(m.col(2).get(2), 1.0);
        assert_eq!(m.nnz(), 3);
    }

    #[test]
    fn reports_line_numbers_on_garbage() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 3.0\n";
        match read_matrix_market(std::io::Cursor::new(text)) {
            Err(MmError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
