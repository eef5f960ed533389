//! MatrixMarket coordinate format.

use std::fmt::Write as _;
use std::path::Path;

use super::{csr_from_triplets, SolveError, SparseMatrixCSR};

/// `%%MatrixMarket matrix coordinate real general` text with 1-based indices.
pub fn to_matrix_market(a: &SparseMatrixCSR) -> String {
    let mut s = String::with_capacity(32 * a.nnz() + 64);
    s.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(s, "{} {} {}", a.nrows(), a.ncols(), a.nnz());
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            let _ = writeln!(s, "{} {} {:.17e}", i + 1, j + 1, v);
        }
    }
    s
}

/// Parses coordinate real/integer/pattern matrices, `general` or `symmetric`.
pub fn from_matrix_market(text: &str) -> Result<SparseMatrixCSR, SolveError> {
    let err = |line: usize, msg: &str| SolveError::MatrixMarket(format!("line {line}: {msg}"));
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty input"))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" || tokens[2] != "coordinate" {
        return Err(err(1, "expected '%%MatrixMarket matrix coordinate <field> <symmetry>'"));
    }
    let pattern = match tokens[3].as_str() {
        "real" | "integer" => false,
        "pattern" => true,
        other => return Err(err(1, &format!("unsupported field '{other}'"))),
    };
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(err(1, &format!("unsupported symmetry '{other}'"))),
    };
    let mut body = lines.filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('%'));
    let (ln, size) = body.next().ok_or_else(|| err(2, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| err(ln + 1, "bad size line")))
        .collect::<Result<_, _>>()?;
    let [nrows, ncols, nnz] = dims[..] else {
        return Err(err(ln + 1, "size line needs three integers"));
    };
    let mut trip = Vec::with_capacity(if symmetric { 2 * nnz } else { nnz });
    let mut entries = 0;
    for (ln, line) in body {
        entries += 1;
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() < if pattern { 2 } else { 3 } {
            return Err(err(ln + 1, "too few fields"));
        }
        let i: usize = t[0].parse().map_err(|_| err(ln + 1, "bad row index"))?;
        let j: usize = t[1].parse().map_err(|_| err(ln + 1, "bad column index"))?;
        if i == 0 || j == 0 {
            return Err(err(ln + 1, "indices are 1-based"));
        }
        let v: f64 = if pattern { 1.0 } else { t[2].parse().map_err(|_| err(ln + 1, "bad value"))? };
        trip.push((i - 1, j - 1, v));
        if symmetric && i != j {
            trip.push((j - 1, i - 1, v));
        }
    }
    if entries != nnz {
        return Err(SolveError::MatrixMarket(format!("expected {nnz} entries, found {entries}")));
    }
    csr_from_triplets(nrows, ncols, &trip)
}

pub fn write_matrix_market(a: &SparseMatrixCSR, path: &Path) -> Result<(), SolveError> {
    std::fs::write(path, to_matrix_market(a))
        .map_err(|e| SolveError::MatrixMarket(format!("cannot write {}: {e}", path.display())))
}

pub fn read_matrix_market(path: &Path) -> Result<SparseMatrixCSR, SolveError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SolveError::MatrixMarket(format!("cannot read {}: {e}", path.display())))?;
    from_matrix_market(&text)
}
