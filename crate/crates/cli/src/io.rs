//! Matrix Market and CSV reading/writing.
//!
//! Matrix Market input accepts `coordinate` and `array` layouts with `real`,
//! `double` or `integer` fields and `general` or `symmetric` symmetry.
//! Coordinate indices are 1-based; unlisted entries are zero and repeated
//! coordinates are summed. Output is always `coordinate real general`.
//!
//! CSV is one matrix row per line, comma-separated decimals, no header.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use elemsparse_core::{DenseMatrix, SparseCoo};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    MatrixMarket,
    Csv,
}

impl MatrixFormat {
    /// `.mtx` / `.mm` map to Matrix Market, `.csv` to CSV.
    pub fn from_extension(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "mtx" | "mm" => Some(Self::MatrixMarket),
            "csv" => Some(Self::Csv),
            _ => None,
        }
    }
}

impl FromStr for MatrixFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mm" | "mtx" | "matrix-market" | "matrixmarket" => Ok(Self::MatrixMarket),
            "csv" => Ok(Self::Csv),
            other => Err(HarnessError::Config(format!("unknown matrix format '{other}'"))),
        }
    }
}

pub fn load_matrix(path: &Path, format: Option<MatrixFormat>) -> Result<DenseMatrix> {
    let format = format.or_else(|| MatrixFormat::from_extension(path)).ok_or_else(|| {
        HarnessError::Config(format!(
            "cannot infer matrix format of {}; pass --format",
            path.display()
        ))
    })?;
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    match format {
        MatrixFormat::MatrixMarket => read_matrix_market(BufReader::new(file)),
        MatrixFormat::Csv => read_csv(file),
    }
}

/// Whitespace-separated tokens with their 1-based column.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut rest = line;
    let mut offset = 0;
    std::iter::from_fn(move || {
        let skip = rest.len() - rest.trim_start().len();
        rest = &rest[skip..];
        offset += skip;
        if rest.is_empty() {
            return None;
        }
        let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
        let tok = &rest[..end];
        let col = offset + 1;
        rest = &rest[end..];
        offset += end;
        Some((col, tok))
    })
}

fn parse_token<T: FromStr>(line: usize, tok: Option<(usize, &str)>, what: &str, eol: usize) -> Result<T> {
    let (col, s) = tok.ok_or_else(|| HarnessError::parse(line, eol, format!("missing {what}")))?;
    s.parse()
        .map_err(|_| HarnessError::parse(line, col, format!("invalid {what} '{s}'")))
}

#[derive(Clone, Copy, PartialEq)]
enum Layout {
    Coordinate,
    Array,
}

pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<DenseMatrix> {
    let mut lines = reader.lines().enumerate().map(|(k, l)| (k + 1, l));

    let (hline, header) = match lines.next() {
        Some((k, l)) => (k, l.map_err(HarnessError::Write)?),
        None => return Err(HarnessError::parse(1, 1, "empty file")),
    };
    let head: Vec<(usize, String)> = tokens(&header).map(|(c, t)| (c, t.to_ascii_lowercase())).collect();
    if head.len() != 5 || head[0].1 != "%%matrixmarket" || head[1].1 != "matrix" {
        return Err(HarnessError::parse(hline, 1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    let layout = match head[2].1.as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(HarnessError::parse(hline, head[2].0, format!("unsupported format '{other}'"))),
    };
    match head[3].1.as_str() {
        "real" | "double" | "integer" => {}
        other => return Err(HarnessError::parse(hline, head[3].0, format!("unsupported field '{other}'"))),
    }
    let symmetric = match head[4].1.as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(HarnessError::parse(hline, head[4].0, format!("unsupported symmetry '{other}'"))),
    };

    let mut body = lines.filter_map(|(k, l)| match l {
        Ok(l) if l.trim().is_empty() || l.trim_start().starts_with('%') => None,
        other => Some((k, other)),
    });

    let (sline, size) = match body.next() {
        Some((k, l)) => (k, l.map_err(HarnessError::Write)?),
        None => return Err(HarnessError::parse(hline + 1, 1, "missing size line")),
    };
    let eol = size.len() + 1;
    let mut it = tokens(&size);
    let m: usize = parse_token(sline, it.next(), "row count", eol)?;
    let n: usize = parse_token(sline, it.next(), "column count", eol)?;
    let entries: usize = match layout {
        Layout::Coordinate => parse_token(sline, it.next(), "entry count", eol)?,
        Layout::Array => m * n,
    };
    if let Some((c, t)) = it.next() {
        return Err(HarnessError::parse(sline, c, format!("unexpected token '{t}'")));
    }
    if m == 0 || n == 0 {
        return Err(HarnessError::parse(sline, 1, "matrix dimensions must be positive"));
    }
    if symmetric && m != n {
        return Err(HarnessError::parse(sline, 1, "symmetric matrix must be square"));
    }

    let mut data = vec![0.0; m * n];
    let mut seen = 0usize;
    let mut last_line = sline;
    for (k, l) in body {
        let l = l.map_err(HarnessError::Write)?;
        last_line = k;
        if seen == entries {
            return Err(HarnessError::parse(k, 1, format!("more than {entries} entries")));
        }
        let eol = l.len() + 1;
        let mut it = tokens(&l);
        let (i, j) = match layout {
            Layout::Coordinate => {
                let (ci, ti) = it.next().ok_or_else(|| HarnessError::parse(k, 1, "missing row index"))?;
                let i: usize = ti
                    .parse()
                    .map_err(|_| HarnessError::parse(k, ci, format!("invalid row index '{ti}'")))?;
                let (cj, tj) = it.next().ok_or_else(|| HarnessError::parse(k, eol, "missing column index"))?;
                let j: usize = tj
                    .parse()
                    .map_err(|_| HarnessError::parse(k, cj, format!("invalid column index '{tj}'")))?;
                if i == 0 || i > m {
                    return Err(HarnessError::parse(k, ci, format!("row index {i} outside 1..={m}")));
                }
                if j == 0 || j > n {
                    return Err(HarnessError::parse(k, cj, format!("column index {j} outside 1..={n}")));
                }
                (i - 1, j - 1)
            }
            // column-major
            Layout::Array => (seen % m, seen / m),
        };
        let (cv, tv) = it.next().ok_or_else(|| HarnessError::parse(k, eol, "missing value"))?;
        let v: f64 = tv
            .parse()
            .map_err(|_| HarnessError::parse(k, cv, format!("invalid value '{tv}'")))?;
        if !v.is_finite() {
            return Err(HarnessError::parse(k, cv, "non-finite value"));
        }
        if let Some((c, t)) = it.next() {
            return Err(HarnessError::parse(k, c, format!("unexpected token '{t}'")));
        }
        data[i * n + j] += v;
        if symmetric && i != j {
            data[j * n + i] += v;
        }
        seen += 1;
    }
    if seen != entries {
        return Err(HarnessError::parse(
            last_line + 1,
            1,
            format!("expected {entries} entries, found {seen}"),
        ));
    }
    Ok(DenseMatrix::new(m, n, data)?)
}

pub fn read_csv<R: Read>(reader: R) -> Result<DenseMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut cols = None;
    let mut rows = 0usize;
    let mut data = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(rows + 1, |p| p.line() as usize);
        let expected = *cols.get_or_insert(record.len());
        if record.len() != expected {
            return Err(HarnessError::Dimension {
                line,
                expected,
                found: record.len(),
            });
        }
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| HarnessError::parse(line, c + 1, format!("invalid number '{field}'")))?;
            if !v.is_finite() {
                return Err(HarnessError::parse(line, c + 1, "non-finite value"));
            }
            data.push(v);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| HarnessError::parse(1, 1, "empty file"))?;
    Ok(DenseMatrix::new(rows, cols, data)?)
}

/// Writes `s` as `coordinate real general`, 1-indexed, in stored order.
pub fn write_matrix_market<W: Write>(mut w: W, s: &SparseCoo, comment: Option<&str>) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    if let Some(c) = comment {
        for line in c.lines() {
            writeln!(w, "% {line}")?;
        }
    }
    writeln!(w, "{} {} {}", s.rows(), s.cols(), s.nnz())?;
    for t in s.triples() {
        writeln!(w, "{} {} {}", t.row + 1, t.col + 1, t.value)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the nonzeros of `x` in coordinate form.
pub fn write_dense_matrix_market<W: Write>(w: W, x: &DenseMatrix) -> Result<()> {
    let triples = (0..x.rows())
        .flat_map(|i| (0..x.cols()).map(move |j| (i, j)))
        .filter(|(i, j)| x.get(*i, *j) != 0.0)
        .map(|(i, j)| elemsparse_core::matrix::Triple::new(i, j, x.get(i, j)))
        .collect();
    write_matrix_market(w, &SparseCoo::new(x.rows(), x.cols(), triples)?, None)
}

pub fn write_csv<W: Write>(w: W, x: &DenseMatrix) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for i in 0..x.rows() {
        wtr.write_record(x.row(i).iter().map(|v| v.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn create_file(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| HarnessError::io(path, e))
}
