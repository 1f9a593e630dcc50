//! Matrix, label and trace files.
//!
//! Dense text: a `rows cols` line, then `rows * cols` whitespace-separated
//! values in row-major order (conventionally one row per line).
//!
//! Coordinate text (`.mtx`): optional `%%MatrixMarket` banner and `%`
//! comments, a `rows cols nnz` line, then `nnz` lines `i j value` with
//! 1-based indices. A file holding only one triangle (or declared
//! `symmetric`) is mirrored into the other.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::classical::SolverTrace;
use crate::linalg::DenseMatrix;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: malformed header: {msg}")]
    Header {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("{path}:{line}: not a number: {token:?}")]
    Token {
        path: PathBuf,
        line: usize,
        token: String,
    },
    #[error("{path}:{line}: expected {expected} values, found {found}")]
    Length {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}:{line}: index ({i}, {j}) outside a {rows}x{cols} matrix")]
    Index {
        path: PathBuf,
        line: usize,
        i: usize,
        j: usize,
        rows: usize,
        cols: usize,
    },
    #[error("{path}:{line}: duplicate entry ({i}, {j})")]
    Duplicate {
        path: PathBuf,
        line: usize,
        i: usize,
        j: usize,
    },
}

fn read(path: &Path) -> Result<String, FileError> {
    fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), FileError> {
    fs::write(path, text).map_err(|source| FileError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn is_sparse(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("mtx"))
}

/// Loads a matrix, choosing the format by extension (`.mtx` is coordinate,
/// anything else dense).
pub fn load_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix, FileError> {
    let path = path.as_ref();
    let text = read(path)?;
    if is_sparse(path) {
        parse_coordinate(&text, path)
    } else {
        parse_dense(&text, path)
    }
}

pub fn save_matrix(m: &DenseMatrix, path: impl AsRef<Path>) -> Result<(), FileError> {
    let path = path.as_ref();
    let text = if is_sparse(path) {
        format_coordinate(m)
    } else {
        format_dense(m)
    };
    write(path, &text)
}

/// Content lines with their 1-based numbers; blank lines and `#` comments
/// are skipped.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_f64(tok: &str, path: &Path, line: usize) -> Result<f64, FileError> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(FileError::Token {
            path: path.to_path_buf(),
            line,
            token: tok.to_string(),
        }),
    }
}

fn parse_dims<const N: usize>(
    line: &str,
    lineno: usize,
    path: &Path,
) -> Result<[usize; N], FileError> {
    let header = |msg: String| FileError::Header {
        path: path.to_path_buf(),
        line: lineno,
        msg,
    };
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() != N {
        return Err(header(format!("expected {N} integers, found {:?}", line)));
    }
    let mut out = [0usize; N];
    for (o, t) in out.iter_mut().zip(&toks) {
        *o = t
            .parse()
            .map_err(|_| header(format!("{t:?} is not a nonnegative integer")))?;
    }
    Ok(out)
}

pub fn parse_dense(text: &str, path: &Path) -> Result<DenseMatrix, FileError> {
    let mut lines = content_lines(text);
    let Some((hline, header)) = lines.next() else {
        return Err(FileError::Header {
            path: path.to_path_buf(),
            line: 1,
            msg: "empty file".into(),
        });
    };
    let [rows, cols] = parse_dims::<2>(header, hline, path)?;
    if rows == 0 || cols == 0 {
        return Err(FileError::Header {
            path: path.to_path_buf(),
            line: hline,
            msg: format!("degenerate shape {rows}x{cols}"),
        });
    }
    let expected = rows * cols;
    let mut data = Vec::with_capacity(expected);
    let mut last_line = hline;
    for (lineno, line) in lines {
        last_line = lineno;
        for tok in line.split_whitespace() {
            if data.len() == expected {
                return Err(FileError::Length {
                    path: path.to_path_buf(),
                    line: lineno,
                    expected,
                    found: data.len() + 1,
                });
            }
            data.push(parse_f64(tok, path, lineno)?);
        }
    }
    if data.len() != expected {
        return Err(FileError::Length {
            path: path.to_path_buf(),
            line: last_line,
            expected,
            found: data.len(),
        });
    }
    Ok(DenseMatrix::from_vec(rows, cols, data).expect("length and finiteness checked"))
}

pub fn parse_coordinate(text: &str, path: &Path) -> Result<DenseMatrix, FileError> {
    let mut declared_symmetric = false;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .filter(|(_, l)| {
            if l.starts_with("%%") {
                declared_symmetric |= l.to_ascii_lowercase().contains("symmetric");
            }
            !l.starts_with('%')
        });
    let Some((hline, header)) = lines.next() else {
        return Err(FileError::Header {
            path: path.to_path_buf(),
            line: 1,
            msg: "missing size line".into(),
        });
    };
    let [rows, cols, nnz] = parse_dims::<3>(header, hline, path)?;
    if rows == 0 || cols == 0 {
        return Err(FileError::Header {
            path: path.to_path_buf(),
            line: hline,
            msg: format!("degenerate shape {rows}x{cols}"),
        });
    }
    let mut m = DenseMatrix::zeros(rows, cols);
    let mut seen = vec![false; rows * cols];
    let (mut upper, mut lower) = (false, false);
    let mut count = 0;
    let mut last_line = hline;
    for (lineno, line) in lines {
        last_line = lineno;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(FileError::Length {
                path: path.to_path_buf(),
                line: lineno,
                expected: 3,
                found: toks.len(),
            });
        }
        count += 1;
        if count > nnz {
            return Err(FileError::Length {
                path: path.to_path_buf(),
                line: lineno,
                expected: nnz,
                found: count,
            });
        }
        let index = |t: &str| {
            t.parse::<usize>().map_err(|_| FileError::Token {
                path: path.to_path_buf(),
                line: lineno,
                token: t.to_string(),
            })
        };
        let (i, j) = (index(toks[0])?, index(toks[1])?);
        if i == 0 || j == 0 || i > rows || j > cols {
            return Err(FileError::Index {
                path: path.to_path_buf(),
                line: lineno,
                i,
                j,
                rows,
                cols,
            });
        }
        let v = parse_f64(toks[2], path, lineno)?;
        let (i, j) = (i - 1, j - 1);
        if std::mem::replace(&mut seen[i * cols + j], true) {
            return Err(FileError::Duplicate {
                path: path.to_path_buf(),
                line: lineno,
                i: i + 1,
                j: j + 1,
            });
        }
        upper |= i < j;
        lower |= i > j;
        m.set(i, j, v);
    }
    if count != nnz {
        return Err(FileError::Length {
            path: path.to_path_buf(),
            line: last_line,
            expected: nnz,
            found: count,
        });
    }
    if rows == cols && (declared_symmetric || upper != lower) {
        for i in 0..rows {
            for j in 0..i {
                let v = if seen[i * cols + j] {
                    m.get(i, j)
                } else {
                    m.get(j, i)
                };
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
    }
    Ok(m)
}

pub fn format_dense(m: &DenseMatrix) -> String {
    let mut s = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

pub fn format_coordinate(m: &DenseMatrix) -> String {
    let nnz = m.as_slice().iter().filter(|&&v| v != 0.0).count();
    let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(s, "{} {} {nnz}", m.rows(), m.cols());
    for i in 0..m.rows() {
        for (j, &v) in m.row(i).iter().enumerate() {
            if v != 0.0 {
                let _ = writeln!(s, "{} {} {v:.16e}", i + 1, j + 1);
            }
        }
    }
    s
}

/// One nonnegative integer label per line.
pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<usize>, FileError> {
    let path = path.as_ref();
    let text = read(path)?;
    content_lines(&text)
        .map(|(line, tok)| {
            tok.parse::<usize>().map_err(|_| FileError::Token {
                path: path.to_path_buf(),
                line,
                token: tok.to_string(),
            })
        })
        .collect()
}

pub fn save_labels(labels: &[usize], path: impl AsRef<Path>) -> Result<(), FileError> {
    let mut s = String::with_capacity(labels.len() * 3);
    for l in labels {
        let _ = writeln!(s, "{l}");
    }
    write(path.as_ref(), &s)
}

/// The deterministic part of a trace as CSV; the loss column appears when
/// the trace carries losses.
pub fn format_trace(trace: &SolverTrace) -> String {
    let with_loss = trace.records.iter().any(|r| r.loss.is_some());
    let mut s = String::from("iteration,relative_error,factor_norm,lambda");
    s.push_str(if with_loss { ",loss\n" } else { "\n" });
    for r in &trace.records {
        let _ = write!(
            s,
            "{},{:.17e},{:.17e},{:.17e}",
            r.iteration, r.relative_error, r.factor_norm, r.lambda
        );
        if with_loss {
            let _ = write!(s, ",{:.17e}", r.loss.unwrap_or(f64::NAN));
        }
        s.push('\n');
    }
    s
}

pub fn format_timing(trace: &SolverTrace) -> String {
    let mut s = String::from("iteration,elapsed_seconds\n");
    for r in &trace.records {
        let _ = writeln!(s, "{},{:.6}", r.iteration, r.elapsed);
    }
    s
}

pub fn save_text(text: &str, path: impl AsRef<Path>) -> Result<(), FileError> {
    write(path.as_ref(), text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("m.txt")
    }

    #[test]
    fn dense_parses_and_formats() {
        let m = parse_dense("2 3\n1 2 3\n4 5 6e-1\n", p()).unwrap();
        assert_eq!(
            m,
            DenseMatrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 0.6]])
        );
        let again = parse_dense(&format_dense(&m), p()).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn dense_length_errors_point_at_lines() {
        match parse_dense("2 2\n1 2\n3\n", p()) {
            Err(FileError::Length {
                line: 3,
                expected: 4,
                found: 3,
                ..
            }) => {}
            other => panic!("{other:?}"),
        }
        match parse_dense("2 2\n1 2\n3 4\n5\n", p()) {
            Err(FileError::Length { line: 4, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dense_header_and_token_errors() {
        assert!(matches!(
            parse_dense("", p()),
            Err(FileError::Header { .. })
        ));
        assert!(matches!(
            parse_dense("2 x\n", p()),
            Err(FileError::Header { line: 1, .. })
        ));
        assert!(matches!(
            parse_dense("1 2\n1 nan\n", p()),
            Err(FileError::Token { line: 2, .. })
        ));
    }

    #[test]
    fn coordinate_upper_triangle_is_mirrored() {
        let text = "%%MatrixMarket matrix coordinate real general\n% c\n3 3 4\n1 1 2\n1 2 0.5\n2 3 0.25\n3 3 1\n";
        let m = parse_coordinate(text, p()).unwrap();
        assert_eq!(m.max_asymmetry(), Some(0.0));
        assert_eq!(m.get(1, 0), 0.5);
        assert_eq!(m.get(2, 1), 0.25);
    }

    #[test]
    fn coordinate_full_matrix_kept_as_is() {
        let m = parse_coordinate("2 2 2\n1 2 1\n2 1 3\n", p()).unwrap();
        assert_eq!(m, DenseMatrix::from_rows(&[[0.0, 1.0], [3.0, 0.0]]));
    }

    #[test]
    fn coordinate_errors_are_distinct() {
        assert!(matches!(
            parse_coordinate("2 2 1\n3 1 1\n", p()),
            Err(FileError::Index { line: 2, i: 3, .. })
        ));
        assert!(matches!(
            parse_coordinate("2 2 2\n1 1 1\n", p()),
            Err(FileError::Length { .. })
        ));
        assert!(matches!(
            parse_coordinate("2 2 2\n1 1 1\n1 1 2\n", p()),
            Err(FileError::Duplicate { line: 3, .. })
        ));
        assert!(matches!(
            parse_coordinate("2 2\n", p()),
            Err(FileError::Header { .. })
        ));
        assert!(matches!(
            parse_coordinate("1 1 1\n1 1 abc\n", p()),
            Err(FileError::Token { .. })
        ));
    }

    #[test]
    fn labels_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("l.txt");
        save_labels(&[2, 0, 1], &path).unwrap();
        assert_eq!(load_labels(&path).unwrap(), vec![2, 0, 1]);
        fs::write(&path, "1\n-1\n").unwrap();
        assert!(matches!(
            load_labels(&path),
            Err(FileError::Token { line: 2, .. })
        ));
    }
}
