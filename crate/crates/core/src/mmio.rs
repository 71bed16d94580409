//! Matrix Market "array complex general" files.
//!
//! Entries are written column-major, one "re im" pair per line, with 17
//! significant digits so that write-then-read is bit-exact. An alternative
//! JSON encoding of the same data is provided for interoperability; readers
//! sniff the format from the first byte.

use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::ComplexMatrix;

pub const MM_HEADER: &str = "%%MatrixMarket matrix array complex general";

/// Serialize in Matrix Market array format (column-major).
pub fn write_matrix<W: Write>(w: &mut W, a: &ComplexMatrix) -> Result<()> {
    writeln!(w, "{MM_HEADER}")?;
    writeln!(w, "{} {}", a.rows(), a.cols())?;
    for c in 0..a.cols() {
        for r in 0..a.rows() {
            let z = a.get(r, c);
            writeln!(w, "{:.16e} {:.16e}", z.re, z.im)?;
        }
    }
    Ok(())
}

pub fn write_matrix_file<P: AsRef<Path>>(path: P, a: &ComplexMatrix) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    write_matrix(&mut w, a)?;
    w.flush()?;
    Ok(())
}

fn parse_f64(tok: &str, line_no: usize) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| Error::Parse(format!("line {line_no}: cannot parse '{tok}' as a float")))
}

/// Parse a Matrix Market array complex general file.
pub fn read_matrix<R: BufRead>(r: &mut R) -> Result<ComplexMatrix> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))
        .and_then(|(n, l)| l.map(|l| (n, l)).map_err(Error::Io))?;
    let fields: Vec<String> =
        header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    let expect = ["%%matrixmarket", "matrix", "array", "complex", "general"];
    if fields.len() != expect.len() || fields.iter().zip(expect).any(|(a, b)| a != b) {
        return Err(Error::Parse(format!("unsupported Matrix Market header: '{header}'")));
    }

    let mut dims: Option<(usize, usize)> = None;
    let mut data: Vec<Complex64> = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        match dims {
            None => {
                if toks.len() != 2 {
                    return Err(Error::Parse(format!(
                        "line {line_no}: expected 'rows cols', got '{trimmed}'"
                    )));
                }
                let rows = toks[0]
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("line {line_no}: bad row count")))?;
                let cols = toks[1]
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("line {line_no}: bad column count")))?;
                dims = Some((rows, cols));
                data.reserve(rows * cols);
            }
            Some((rows, cols)) => {
                if toks.len() != 2 {
                    return Err(Error::Parse(format!(
                        "line {line_no}: expected 're im', got '{trimmed}'"
                    )));
                }
                if data.len() >= rows * cols {
                    return Err(Error::Parse(format!("line {line_no}: too many entries")));
                }
                data.push(Complex64::new(
                    parse_f64(toks[0], line_no)?,
                    parse_f64(toks[1], line_no)?,
                ));
            }
        }
    }
    let (rows, cols) = dims.ok_or_else(|| Error::Parse("missing dimension line".into()))?;
    if data.len() != rows * cols {
        return Err(Error::Parse(format!(
            "expected {} entries, found {}",
            rows * cols,
            data.len()
        )));
    }
    // Stored column-major; transpose into the row-major carrier.
    let mut out = ComplexMatrix::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            let z = data[c * rows + r];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFiniteEntry { row: r, col: c });
            }
            out.set(r, c, z);
        }
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct JsonMatrix {
    rows: usize,
    cols: usize,
    /// Row-major [re, im] pairs.
    entries: Vec<[f64; 2]>,
}

pub fn write_matrix_json<W: Write>(w: &mut W, a: &ComplexMatrix) -> Result<()> {
    let jm = JsonMatrix {
        rows: a.rows(),
        cols: a.cols(),
        entries: a.entries().iter().map(|z| [z.re, z.im]).collect(),
    };
    serde_json::to_writer(&mut *w, &jm).map_err(|e| Error::Parse(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

pub fn read_matrix_json<R: BufRead>(r: &mut R) -> Result<ComplexMatrix> {
    let jm: JsonMatrix =
        serde_json::from_reader(r).map_err(|e| Error::Parse(format!("json matrix: {e}")))?;
    ComplexMatrix::new(
        jm.rows,
        jm.cols,
        jm.entries.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
    )
}

/// Read either encoding, sniffing Matrix Market by its '%%' banner.
pub fn read_matrix_file<P: AsRef<Path>>(path: P) -> Result<ComplexMatrix> {
    let bytes = std::fs::read(&path)?;
    let mut reader = std::io::BufReader::new(bytes.as_slice());
    if bytes.first() == Some(&b'{') {
        read_matrix_json(&mut reader)
    } else {
        read_matrix(&mut reader)
    }
}

pub fn write_matrix_file_json<P: AsRef<Path>>(path: P, a: &ComplexMatrix) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    write_matrix_json(&mut w, a)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::random_trace_zero;

    #[test]
    fn round_trip_is_bit_exact() {
        let a = random_trace_zero(7, 123).unwrap();
        let mut buf = Vec::new();
        write_matrix(&mut buf, &a).unwrap();
        let b = read_matrix(&mut std::io::BufReader::new(buf.as_slice())).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn column_major_layout() {
        let a = ComplexMatrix::from_fn(2, 3, |r, c| Complex64::new((10 * r + c) as f64, 0.0));
        let mut buf = Vec::new();
        write_matrix(&mut buf, &a).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], MM_HEADER);
        assert_eq!(lines[1], "2 3");
        // Column 0 first: entries (0,0)=0, (1,0)=10, then (0,1)=1, (1,1)=11.
        assert_eq!(lines[2], "0.0000000000000000e0 0.0000000000000000e0");
        assert_eq!(lines[3], "1.0000000000000000e1 0.0000000000000000e0");
        assert_eq!(lines[4], "1.0000000000000000e0 0.0000000000000000e0");
        assert_eq!(lines[5], "1.1000000000000000e1 0.0000000000000000e0");
    }

    #[test]
    fn rejects_malformed_files() {
        let no_header = "1 1\n0 0\n";
        assert!(read_matrix(&mut std::io::BufReader::new(no_header.as_bytes())).is_err());
        let short = format!("{MM_HEADER}\n2 2\n0 0\n");
        assert!(read_matrix(&mut std::io::BufReader::new(short.as_bytes())).is_err());
        let bad_tok = format!("{MM_HEADER}\n1 1\nx y\n");
        assert!(read_matrix(&mut std::io::BufReader::new(bad_tok.as_bytes())).is_err());
    }

    #[test]
    fn comments_after_header_are_skipped() {
        let text = format!("{MM_HEADER}\n% a comment\n1 2\n1 0\n2 0\n");
        let m = read_matrix(&mut std::io::BufReader::new(text.as_bytes())).unwrap();
        assert_eq!(m.get(0, 1), Complex64::new(2.0, 0.0));
    }

    #[test]
    fn json_round_trip() {
        let a = random_trace_zero(4, 5).unwrap();
        let mut buf = Vec::new();
        write_matrix_json(&mut buf, &a).unwrap();
        let b = read_matrix_json(&mut std::io::BufReader::new(buf.as_slice())).unwrap();
        assert_eq!(a, b);
    }
}
