//! Matrix Market coordinate format (`complex` or `real`, `general` or `symmetric`).

use std::fmt::Write as _;
use std::path::Path;

use crate::sparse::{CsrMatrix, TripletBuilder};
use crate::{Error, Result, C64};

const HEADER: &str = "%%MatrixMarket matrix coordinate complex general";
const MAX_DIM: usize = 1 << 22;

/// Writes `a` as a general complex coordinate matrix with 17 significant digits.
pub fn to_matrix_market(a: &CsrMatrix, comment: Option<&str>) -> String {
    let mut out = String::with_capacity(64 + 52 * a.nnz());
    out.push_str(HEADER);
    out.push('\n');
    if let Some(c) = comment {
        for line in c.lines() {
            let _ = writeln!(out, "% {line}");
        }
    }
    let _ = writeln!(out, "{} {} {}", a.nrows(), a.ncols(), a.nnz());
    for (r, c, v) in a.iter() {
        let _ = writeln!(out, "{} {} {:.16e} {:.16e}", r + 1, c + 1, v.re, v.im);
    }
    out
}

pub fn write_matrix_market(path: &Path, a: &CsrMatrix, comment: Option<&str>) -> Result<()> {
    std::fs::write(path, to_matrix_market(a, comment))?;
    Ok(())
}

pub fn read_matrix_market(path: &Path) -> Result<CsrMatrix> {
    parse_matrix_market(&std::fs::read_to_string(path)?)
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line}: {msg}"))
}

/// Parses a coordinate Matrix Market document. Duplicate entries are summed.
pub fn parse_matrix_market(text: &str) -> Result<CsrMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty document"))?;
    let fields: Vec<String> = header.split_whitespace().map(|s| s.to_ascii_lowercase()).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_err(1, "expected `%%MatrixMarket matrix ...` banner"));
    }
    if fields[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported format `{}`", fields[2])));
    }
    let complex = match fields[3].as_str() {
        "complex" => true,
        "real" | "integer" => false,
        other => return Err(parse_err(1, format!("unsupported field `{other}`"))),
    };
    let symmetric = match fields[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(1, format!("unsupported symmetry `{other}`"))),
    };

    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = data.next().ok_or_else(|| parse_err(2, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|s| s.parse::<usize>().map_err(|e| parse_err(size_line, e)))
        .collect::<Result<_>>()?;
    let [nrows, ncols, nnz] = dims[..] else {
        return Err(parse_err(size_line, "size line needs `rows cols entries`"));
    };
    if nrows > MAX_DIM || ncols > MAX_DIM {
        return Err(parse_err(size_line, format!("dimension above {MAX_DIM}")));
    }
    if symmetric && nrows != ncols {
        return Err(parse_err(size_line, "symmetric matrix must be square"));
    }
    let mut t = TripletBuilder::with_capacity(nrows, ncols, nnz.min(1 << 20));
    let mut seen = 0usize;
    for (ln, line) in data {
        if seen == nnz {
            return Err(parse_err(ln, format!("more than {nnz} entries")));
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        let want = if complex { 4 } else { 3 };
        if tok.len() != want {
            return Err(parse_err(ln, format!("expected {want} fields, found {}", tok.len())));
        }
        let r: usize = tok[0].parse().map_err(|e| parse_err(ln, e))?;
        let c: usize = tok[1].parse().map_err(|e| parse_err(ln, e))?;
        if r == 0 || c == 0 || r > nrows || c > ncols {
            return Err(parse_err(ln, format!("index ({r}, {c}) outside {nrows}×{ncols}")));
        }
        let re: f64 = tok[2].parse().map_err(|e| parse_err(ln, e))?;
        let im: f64 = if complex { tok[3].parse().map_err(|e| parse_err(ln, e))? } else { 0.0 };
        if !(re.is_finite() && im.is_finite()) {
            return Err(parse_err(ln, "non-finite value"));
        }
        let v = C64::new(re, im);
        t.push(r - 1, c - 1, v);
        if symmetric && r != c {
            t.push(c - 1, r - 1, v);
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(parse_err(size_line, format!("declared {nnz} entries, found {seen}")));
    }
    Ok(t.build())
}
