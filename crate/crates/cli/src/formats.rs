//! Plain-text file formats.
//!
//! Edge lists have a header `# p=<p> s=<s> format=1` and then one edge per
//! line, `i<TAB>j<TAB>weight` with 1-based `i > j` and 17 significant digits.
//!
//! Matrix files (covariances and sample sets) start with a line `p n`
//! followed by whitespace-separated rows: `p` rows for a covariance, `n` rows
//! for samples.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sparselap_core::{DMatrix, EdgeSet, Error, Result, WeightVector};

pub const EDGE_LIST_FORMAT: u32 = 1;

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// 17 significant digits: enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    pub p: usize,
    /// Edge budget recorded in the header.
    pub s: usize,
    /// 1-based `(i, j, weight)`, `i > j`.
    pub edges: Vec<(usize, usize, f64)>,
}

impl EdgeList {
    /// Edges of `x` above `threshold`.
    pub fn from_weights(x: &WeightVector, s: usize, threshold: f64) -> Self {
        EdgeList {
            p: x.p(),
            s,
            edges: x.edges().filter(|&(_, _, w)| w > threshold).collect(),
        }
    }

    pub fn weights(&self) -> Result<WeightVector> {
        WeightVector::from_edges(self.p, &self.edges)
    }

    pub fn edge_set(&self) -> Result<EdgeSet> {
        EdgeSet::new(self.p, self.edges.iter().map(|&(i, j, _)| (i, j)))
    }

    pub fn render(&self) -> String {
        let mut out = format!("# p={} s={} format={EDGE_LIST_FORMAT}\n", self.p, self.s);
        for &(i, j, w) in &self.edges {
            let _ = writeln!(out, "{i}\t{j}\t{}", fmt_f64(w));
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| parse_err(path, "empty edge list"))?;
        let (mut p, mut s, mut format) = (None, None, None);
        let fields = header
            .strip_prefix('#')
            .ok_or_else(|| parse_err(path, "edge list header must start with '#'"))?;
        for field in fields.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| parse_err(path, format!("bad header field {field:?}")))?;
            let value: usize = value
                .parse()
                .map_err(|_| parse_err(path, format!("bad header value {field:?}")))?;
            match key {
                "p" => p = Some(value),
                "s" => s = Some(value),
                "format" => format = Some(value),
                _ => return Err(parse_err(path, format!("unknown header field {key:?}"))),
            }
        }
        let p = p.ok_or_else(|| parse_err(path, "header lacks p="))?;
        let s = s.ok_or_else(|| parse_err(path, "header lacks s="))?;
        if format != Some(EDGE_LIST_FORMAT as usize) {
            return Err(parse_err(path, format!("unsupported format {format:?}")));
        }
        let mut edges = Vec::new();
        for (idx, line) in lines.enumerate() {
            let line_no = idx + 2;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() < 3 {
                return Err(parse_err(
                    path,
                    format!("line {line_no}: expected i<TAB>j<TAB>weight"),
                ));
            }
            let bad = |what: &str| parse_err(path, format!("line {line_no}: bad {what}"));
            let i: usize = cols[0].trim().parse().map_err(|_| bad("vertex"))?;
            let j: usize = cols[1].trim().parse().map_err(|_| bad("vertex"))?;
            let w: f64 = cols[2].trim().parse().map_err(|_| bad("weight"))?;
            if !(j >= 1 && i > j && i <= p) {
                return Err(parse_err(
                    path,
                    format!("line {line_no}: edge ({i}, {j}) needs 1 <= j < i <= {p}"),
                ));
            }
            edges.push((i, j, w));
        }
        Ok(EdgeList { p, s, edges })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?, path)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_file(path, &self.render())
    }
}

/// A matrix file: header `p n`, then rows.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile {
    pub p: usize,
    pub n: usize,
    pub rows: DMatrix<f64>,
}

impl MatrixFile {
    pub fn render(&self) -> String {
        let mut out = format!("{} {}\n", self.p, self.n);
        for row in self.rows.row_iter() {
            let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    /// `expected_rows` picks the row count from the header.
    pub fn parse(
        text: &str,
        path: &Path,
        expected_rows: impl Fn(usize, usize) -> usize,
    ) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let mut header = |what: &str| -> Result<usize> {
            tokens
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| parse_err(path, format!("header lacks {what}")))
        };
        let p = header("p")?;
        let n = header("n")?;
        let rows = expected_rows(p, n);
        let values: Vec<f64> = tokens
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| parse_err(path, format!("bad number {t:?}")))
            })
            .collect::<Result<_>>()?;
        if values.len() != rows * p {
            return Err(parse_err(
                path,
                format!(
                    "expected {rows} rows of {p} values, found {} values",
                    values.len()
                ),
            ));
        }
        Ok(MatrixFile {
            p,
            n,
            rows: DMatrix::from_row_slice(rows, p, &values),
        })
    }

    pub fn read_covariance(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?, path, |p, _| p)
    }

    pub fn read_samples(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?, path, |_, n| n)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_file(path, &self.render())
    }
}

/// `ticker,sector` rows in file order, for labeling vertices `1..=p`.
pub fn read_labels_in_order(path: &Path) -> Result<Vec<(String, String)>> {
    let text = read(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| parse_err(path, "empty sectors file"))?;
    if header.trim() != "ticker,sector" {
        return Err(parse_err(path, "sectors header must be 'ticker,sector'"));
    }
    lines
        .enumerate()
        .map(|(idx, line)| {
            line.split_once(',')
                .map(|(t, s)| (t.trim().to_string(), s.trim().to_string()))
                .ok_or_else(|| parse_err(path, format!("line {}: expected ticker,sector", idx + 2)))
        })
        .collect()
}
