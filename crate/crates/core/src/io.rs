//! The `grothmat v1` text format.
//!
//! ```text
//! grothmat v1
//! kind: sym|rect
//! field: real|complex
//! size: n            (or `size: m n` for rect)
//! <entries, row-major, whitespace separated; complex as a+bi or a-bi>
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::{Field, RectMatrix, SymMatrix, C64};

#[derive(Clone, Debug, PartialEq)]
pub enum MatrixFile {
    Sym(SymMatrix),
    Rect(RectMatrix),
}

impl MatrixFile {
    pub fn field(&self) -> Field {
        match self {
            MatrixFile::Sym(a) => a.field(),
            MatrixFile::Rect(b) => b.field(),
        }
    }
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

/// Parse a scalar written as `a`, `bi`, `a+bi` or `a-bi`.
pub fn parse_scalar(tok: &str) -> Option<C64> {
    let Some(body) = tok.strip_suffix('i') else {
        return tok.parse::<f64>().ok().map(|re| C64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (body[..k].parse::<f64>().ok()?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => s.parse::<f64>().ok()?,
    };
    Some(C64::new(re, im))
}

pub fn parse_matrix(text: &str) -> Result<MatrixFile> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    match lines.next() {
        Some((_, "grothmat v1")) => {}
        Some((no, _)) => return perr(no, "expected `grothmat v1`"),
        None => return perr(1, "empty file"),
    }
    let mut header = |key: &str| -> Result<(usize, String)> {
        let Some((no, line)) = lines.next() else {
            return perr(0, format!("missing `{key}` header"));
        };
        match line.split_once(':') {
            Some((k, v)) if k.trim() == key => Ok((no, v.trim().to_string())),
            _ => perr(no, format!("expected `{key}: ...`")),
        }
    };

    let (kno, kind) = header("kind")?;
    let (fno, field) = header("field")?;
    let field = match field.as_str() {
        "real" => Field::Real,
        "complex" => Field::Complex,
        _ => return perr(fno, format!("unknown field `{field}`")),
    };
    let (sno, size) = header("size")?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|s| s.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .or_else(|_| perr(sno, "size must be one or two positive integers"))?;
    let (m, n) = match (kind.as_str(), dims.as_slice()) {
        ("sym", [n]) => (*n, *n),
        ("rect", [m, n]) => (*m, *n),
        ("sym", _) => return perr(sno, "sym matrices take `size: n`"),
        ("rect", _) => return perr(sno, "rect matrices take `size: m n`"),
        _ => return perr(kno, format!("unknown kind `{kind}`")),
    };
    if m == 0 || n == 0 {
        return perr(sno, "size must be positive");
    }

    let mut entries = Vec::with_capacity(m * n);
    let mut last_line = sno;
    for (no, line) in lines {
        last_line = no;
        for tok in line.split_whitespace() {
            let Some(v) = parse_scalar(tok) else {
                return perr(no, format!("cannot parse entry `{tok}`"));
            };
            if field == Field::Real && v.im != 0.0 {
                return perr(no, format!("complex entry `{tok}` in a real matrix"));
            }
            if entries.len() == m * n {
                return perr(no, "too many entries");
            }
            entries.push(v);
        }
    }
    if entries.len() != m * n {
        return perr(last_line, format!("expected {} entries, found {}", m * n, entries.len()));
    }
    if kind == "sym" {
        SymMatrix::from_entries(n, field, &entries).map(MatrixFile::Sym)
    } else {
        RectMatrix::from_entries(m, n, field, &entries).map(MatrixFile::Rect)
    }
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<MatrixFile> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

fn fmt_scalar(out: &mut String, v: C64, field: Field) {
    match field {
        Field::Real => write!(out, "{:.16e}", v.re),
        Field::Complex => write!(out, "{:.16e}{:+.16e}i", v.re, v.im),
    }
    .unwrap();
}

fn format_rows(kind: &str, size: String, field: Field, rows: usize, cols: usize, get: impl Fn(usize, usize) -> C64) -> String {
    let mut out = format!("grothmat v1\nkind: {kind}\nfield: {field}\nsize: {size}\n");
    for i in 0..rows {
        for j in 0..cols {
            if j > 0 {
                out.push(' ');
            }
            fmt_scalar(&mut out, get(i, j), field);
        }
        out.push('\n');
    }
    out
}

/// Serialize with 17 significant digits per component.
pub fn format_matrix(m: &MatrixFile) -> String {
    match m {
        MatrixFile::Sym(a) => format_rows("sym", a.n().to_string(), a.field(), a.n(), a.n(), |i, j| a.get(i, j)),
        MatrixFile::Rect(b) => {
            format_rows("rect", format!("{} {}", b.rows(), b.cols()), b.field(), b.rows(), b.cols(), |i, j| b.get(i, j))
        }
    }
}

pub fn write_matrix(path: impl AsRef<Path>, m: &MatrixFile) -> Result<()> {
    std::fs::write(path, format_matrix(m))?;
    Ok(())
}
