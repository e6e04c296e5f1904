//! Matrix Market reader and writer for dense complex matrices.
//!
//! Reads the `array` (column-major) and `coordinate` (1-based) layouts with
//! `real` or `complex` fields and `general` symmetry. Writes the coordinate
//! layout with a complex field, listing nonzero entries only.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Array,
    Coordinate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_header(line: &str) -> Result<(Layout, Field)> {
    let words: Vec<String> = line
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(parse_err(
            1,
            "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'",
        ));
    }
    let layout = match words[2].as_str() {
        "array" => Layout::Array,
        "coordinate" => Layout::Coordinate,
        other => return Err(parse_err(1, format!("unsupported layout '{other}'"))),
    };
    let field = match words[3].as_str() {
        "real" => Field::Real,
        "complex" => Field::Complex,
        other => return Err(parse_err(1, format!("unsupported field '{other}'"))),
    };
    if words[4] != "general" {
        return Err(parse_err(1, format!("unsupported symmetry '{}'", words[4])));
    }
    Ok((layout, field))
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid number '{tok}'")))
}

fn parse_value(toks: &[&str], field: Field, line: usize) -> Result<Complex64> {
    let v = match field {
        Field::Real => Complex64::new(parse_num(toks[0], line)?, 0.0),
        Field::Complex => Complex64::new(parse_num(toks[0], line)?, parse_num(toks[1], line)?),
    };
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(parse_err(line, "non-finite entry"));
    }
    Ok(v)
}

/// Parses a Matrix Market document.
pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<ComplexMatrix> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let header = match lines.next() {
        Some((_, l)) => l?,
        None => return Err(parse_err(1, "empty input")),
    };
    let (layout, field) = parse_header(&header)?;
    let width = match field {
        Field::Real => 1,
        Field::Complex => 2,
    };

    let mut data = Vec::new();
    for (no, line) in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        data.push((no, t.to_owned()));
    }
    let mut data = data.into_iter();
    let (size_line, size_text) = data
        .next()
        .ok_or_else(|| parse_err(2, "missing size line"))?;
    let dims: Vec<&str> = size_text.split_whitespace().collect();
    let expected_dims = match layout {
        Layout::Array => 2,
        Layout::Coordinate => 3,
    };
    if dims.len() != expected_dims {
        return Err(parse_err(
            size_line,
            format!("size line needs {expected_dims} integers"),
        ));
    }
    let rows: usize = parse_num(dims[0], size_line)?;
    let cols: usize = parse_num(dims[1], size_line)?;
    let mut entries = vec![ZERO; rows * cols];

    match layout {
        Layout::Array => {
            let mut count = 0;
            for (no, text) in data {
                let toks: Vec<&str> = text.split_whitespace().collect();
                if toks.len() != width {
                    return Err(parse_err(no, format!("expected {width} values")));
                }
                if count >= rows * cols {
                    return Err(parse_err(no, "more entries than declared"));
                }
                let (i, j) = (count % rows, count / rows);
                entries[i * cols + j] = parse_value(&toks, field, no)?;
                count += 1;
            }
            if count != rows * cols {
                return Err(parse_err(
                    size_line,
                    format!("declared {} entries, found {count}", rows * cols),
                ));
            }
        }
        Layout::Coordinate => {
            let nnz: usize = parse_num(dims[2], size_line)?;
            let mut count = 0;
            for (no, text) in data {
                let toks: Vec<&str> = text.split_whitespace().collect();
                if toks.len() != 2 + width {
                    return Err(parse_err(
                        no,
                        format!("expected 2 indices and {width} values"),
                    ));
                }
                let i: usize = parse_num(toks[0], no)?;
                let j: usize = parse_num(toks[1], no)?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(parse_err(
                        no,
                        format!("index ({i}, {j}) outside {rows}x{cols}"),
                    ));
                }
                count += 1;
                if count > nnz {
                    return Err(parse_err(no, "more entries than declared"));
                }
                entries[(i - 1) * cols + (j - 1)] += parse_value(&toks[2..], field, no)?;
            }
            if count != nnz {
                return Err(parse_err(
                    size_line,
                    format!("declared {nnz} entries, found {count}"),
                ));
            }
        }
    }
    ComplexMatrix::new(rows, cols, entries)
}

pub fn read_matrix_file(path: impl AsRef<Path>) -> Result<ComplexMatrix> {
    read_matrix_market(BufReader::new(File::open(path)?))
}

/// Writes `a` in coordinate layout; `{:e}` formatting round-trips every `f64`.
pub fn write_matrix_market<W: Write>(w: W, a: &ComplexMatrix) -> Result<()> {
    write_matrix_market_with_comments(w, a, &[])
}

/// As [`write_matrix_market`], with `%` comment lines after the header.
pub fn write_matrix_market_with_comments<W: Write>(
    mut w: W,
    a: &ComplexMatrix,
    comments: &[String],
) -> Result<()> {
    let nnz = a.entries().iter().filter(|v| **v != ZERO).count();
    writeln!(w, "%%MatrixMarket matrix coordinate complex general")?;
    for c in comments {
        for line in c.lines() {
            writeln!(w, "% {line}")?;
        }
    }
    writeln!(w, "{} {} {}", a.rows(), a.cols(), nnz)?;
    for i in 0..a.rows() {
        for (j, v) in a.row(i).iter().enumerate() {
            if *v != ZERO {
                writeln!(w, "{} {} {:e} {:e}", i + 1, j + 1, v.re, v.im)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_matrix_file(path: impl AsRef<Path>, a: &ComplexMatrix) -> Result<()> {
    write_matrix_market(BufWriter::new(File::create(path)?), a)
}

/// Text of the `%` comment lines, without the header line and the marker.
pub fn read_comments<R: BufRead>(reader: R) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for line in reader.lines().skip(1) {
        let line = line?;
        match line.trim_start().strip_prefix('%') {
            Some(rest) => out.push(rest.trim().to_owned()),
            None if line.trim().is_empty() => continue,
            None => break,
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ONE;

    fn read(s: &str) -> Result<ComplexMatrix> {
        read_matrix_market(s.as_bytes())
    }

    #[test]
    fn array_is_column_major() {
        let a =
            read("%%MatrixMarket matrix array real general\n% note\n2 2\n1\n2\n3\n4\n").unwrap();
        assert_eq!(
            a,
            ComplexMatrix::from_real_rows(&[&[1.0, 3.0], &[2.0, 4.0]]).unwrap()
        );
    }

    #[test]
    fn coordinate_complex() {
        let a = read(
            "%%MatrixMarket matrix coordinate complex general\n3 3 2\n1 1 1.5 -2\n3 2 0 1e-3\n",
        )
        .unwrap();
        assert_eq!(a[(0, 0)], Complex64::new(1.5, -2.0));
        assert_eq!(a[(2, 1)], Complex64::new(0.0, 1e-3));
        assert_eq!(a[(1, 1)], ZERO);
    }

    #[test]
    fn rejects_unsupported_headers() {
        for h in [
            "pattern general",
            "integer general",
            "real symmetric",
            "complex hermitian",
        ] {
            let text = format!("%%MatrixMarket matrix coordinate {h}\n1 1 1\n1 1 1\n");
            assert!(
                matches!(read(&text), Err(Error::Parse { line: 1, .. })),
                "{h}"
            );
        }
        assert!(read("").is_err());
        assert!(read("hello\n").is_err());
    }

    #[test]
    fn reports_bad_lines() {
        let err =
            read("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let err = read("%%MatrixMarket matrix array real general\n2 2\n1\n2\nx\n4\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 5, .. }));
        assert!(read("%%MatrixMarket matrix array real general\n2 2\n1\n2\n").is_err());
    }

    #[test]
    fn write_read_round_trip_is_exact() {
        let a = ComplexMatrix::from_fn(5, 5, |i, j| {
            if (i + j) % 3 == 0 {
                ZERO
            } else {
                Complex64::new(1.0 / (1.0 + i as f64), (j as f64).sqrt() - 0.1)
            }
        });
        let mut buf = Vec::new();
        write_matrix_market(&mut buf, &a).unwrap();
        let b = read_matrix_market(buf.as_slice()).unwrap();
        assert_eq!(a, b);
        let mut buf = Vec::new();
        write_matrix_market(&mut buf, &ComplexMatrix::identity(3).scale(ONE * 0.1)).unwrap();
        assert!(String::from_utf8(buf).unwrap().contains("1 1 1e-1 0e0"));
    }

    #[test]
    fn comments_survive_a_round_trip() {
        let mut buf = Vec::new();
        let a = ComplexMatrix::identity(2);
        write_matrix_market_with_comments(&mut buf, &a, &["seed: 7".into(), "two\nlines".into()])
            .unwrap();
        assert_eq!(read_matrix_market(buf.as_slice()).unwrap(), a);
        assert_eq!(
            read_comments(buf.as_slice()).unwrap(),
            vec!["seed: 7", "two", "lines"]
        );
    }
}
