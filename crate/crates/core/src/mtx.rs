//! Matrix Market coordinate files (`real`/`integer`, `general`/`symmetric`).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use faer::{Mat, MatRef};

use crate::error::{Error, Result};
use crate::matrix::SysMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    General,
    Symmetric,
}

/// Parsed contents of a coordinate file, 0-based, symmetric entries
/// already mirrored.
#[derive(Clone, Debug, PartialEq)]
pub struct MtxData {
    pub nrows: usize,
    pub ncols: usize,
    pub symmetry: Symmetry,
    pub entries: Vec<(usize, usize, f64)>,
}

impl MtxData {
    pub fn to_sparse(&self) -> Result<SysMatrix> {
        SysMatrix::from_triplets(self.nrows, self.ncols, &self.entries)
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.nrows, self.ncols);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Parses Matrix Market text; `path` only labels errors.
pub fn parse_mtx(text: &str, path: &Path) -> Result<MtxData> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = lines.next().ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(path, hline, "expected '%%MatrixMarket matrix coordinate real general'"));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(path, hline, format!("unsupported format '{}'", tokens[2])));
    }
    if tokens[3] != "real" && tokens[3] != "integer" {
        return Err(parse_err(path, hline, format!("unsupported field '{}'", tokens[3])));
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(parse_err(path, hline, format!("unsupported symmetry '{other}'"))),
    };

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (sline, size) = body.next().ok_or_else(|| parse_err(path, hline, "missing size line"))?;
    let dims: Vec<&str> = size.split_whitespace().collect();
    if dims.len() != 3 {
        return Err(parse_err(path, sline, "size line needs 'rows cols nnz'"));
    }
    let num = |s: &str, what: &str| {
        s.parse::<usize>()
            .map_err(|_| parse_err(path, sline, format!("invalid {what} '{s}'")))
    };
    let (nrows, ncols, nnz) = (num(dims[0], "row count")?, num(dims[1], "column count")?, num(dims[2], "entry count")?);
    if symmetry == Symmetry::Symmetric && nrows != ncols {
        return Err(parse_err(path, sline, "symmetric matrix must be square"));
    }
    if nnz > nrows.saturating_mul(ncols) {
        return Err(parse_err(path, sline, "more entries than matrix positions"));
    }

    let mut entries = Vec::with_capacity(nnz.min(1 << 20));
    let mut seen = 0;
    for (ln, l) in body {
        if seen == nnz {
            return Err(parse_err(path, ln, "more entries than declared"));
        }
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 3 {
            return Err(parse_err(path, ln, "entry needs 'row col value'"));
        }
        let idx = |s: &str, bound: usize| -> Result<usize> {
            match s.parse::<usize>() {
                Ok(k) if (1..=bound).contains(&k) => Ok(k - 1),
                _ => Err(parse_err(path, ln, format!("index '{s}' outside 1..={bound}"))),
            }
        };
        let i = idx(f[0], nrows)?;
        let j = idx(f[1], ncols)?;
        let v: f64 = f[2]
            .parse()
            .map_err(|_| parse_err(path, ln, format!("invalid value '{}'", f[2])))?;
        if !v.is_finite() {
            return Err(parse_err(path, ln, "non-finite value"));
        }
        if symmetry == Symmetry::Symmetric {
            if j > i {
                return Err(parse_err(path, ln, "symmetric files store the lower triangle only"));
            }
            if i != j {
                entries.push((j, i, v));
            }
        }
        entries.push((i, j, v));
        seen += 1;
    }
    if seen != nnz {
        return Err(parse_err(path, text.lines().count(), format!("expected {nnz} entries, found {seen}")));
    }
    Ok(MtxData {
        nrows,
        ncols,
        symmetry,
        entries,
    })
}

pub fn read_mtx(path: &Path) -> Result<MtxData> {
    let text = std::fs::read_to_string(path).map_err(|e| parse_err(path, 0, format!("cannot read file: {e}")))?;
    parse_mtx(&text, path)
}

pub fn read_sparse(path: &Path) -> Result<SysMatrix> {
    read_mtx(path)?.to_sparse()
}

pub fn read_dense(path: &Path) -> Result<Mat<f64>> {
    Ok(read_mtx(path)?.to_dense())
}

/// Coordinate `general` text with shortest round-trip float formatting.
pub fn format_mtx(nrows: usize, ncols: usize, entries: &[(usize, usize, f64)]) -> String {
    let mut out = String::with_capacity(64 + 40 * entries.len());
    out.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(out, "{nrows} {ncols} {}", entries.len());
    for &(i, j, v) in entries {
        let _ = writeln!(out, "{} {} {v:e}", i + 1, j + 1);
    }
    out
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(PathBuf::from(path), e))
}

pub fn write_matrix(path: &Path, m: &SysMatrix) -> Result<()> {
    let entries: Vec<_> = m.triplets().into_iter().filter(|&(_, _, v)| v != 0.0).collect();
    write_text(path, &format_mtx(m.nrows(), m.ncols(), &entries))
}

pub fn write_dense(path: &Path, m: MatRef<'_, f64>) -> Result<()> {
    let mut entries = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)] != 0.0 {
                entries.push((i, j, m[(i, j)]));
            }
        }
    }
    write_text(path, &format_mtx(m.nrows(), m.ncols(), &entries))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("t.mtx")
    }

    #[test]
    fn general_file() {
        let text = "%%MatrixMarket matrix coordinate real general\n% comment\n2 3 2\n1 1 1.5\n2 3 -2e-3\n";
        let d = parse_mtx(text, p()).unwrap();
        assert_eq!((d.nrows, d.ncols), (2, 3));
        assert_eq!(d.entries, vec![(0, 0, 1.5), (1, 2, -2e-3)]);
    }

    #[test]
    fn symmetric_file_is_mirrored() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 4\n2 1 -1\n";
        let m = parse_mtx(text, p()).unwrap().to_dense();
        assert_eq!(m[(0, 1)], -1.0);
        assert_eq!(m[(1, 0)], -1.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n";
        match parse_mtx(text, p()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_mtx("", p()).is_err());
        assert!(parse_mtx("%%MatrixMarket matrix array real general\n", p()).is_err());
        assert!(parse_mtx("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n", p()).is_err());
    }

    #[test]
    fn write_read_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.mtx");
        let m = Mat::from_fn(3, 2, |i, j| if i == j { 0.1 + i as f64 } else { 1.0 / 3.0 });
        write_dense(&path, m.as_ref()).unwrap();
        assert_eq!(read_dense(&path).unwrap(), m);
        assert!(matches!(read_mtx(&dir.path().join("missing.mtx")), Err(Error::Parse { .. })));
    }
}
