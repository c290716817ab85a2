//! Closing-price tables to log-returns to a sample covariance.
//!
//! Price files are CSV with header `date,TICKER1,TICKER2,...` and ISO-8601
//! dates in the first column. Sector files are CSV with header `ticker,sector`.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::metrics::SectorLabeling;
use crate::objective::SampleCovariance;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Drop rows with a missing or non-positive price instead of failing.
    pub drop_bad_rows: bool,
}

/// `T x p` strictly positive closing prices.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceMatrix {
    pub dates: Vec<NaiveDate>,
    pub tickers: Vec<String>,
    pub prices: DMatrix<f64>,
}

impl PriceMatrix {
    pub fn rows(&self) -> usize {
        self.prices.nrows()
    }

    pub fn p(&self) -> usize {
        self.tickers.len()
    }
}

/// `(T-1) x p` day-over-day log-returns.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnsMatrix {
    pub values: DMatrix<f64>,
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_prices(path: &Path, options: LoadOptions) -> Result<PriceMatrix> {
    parse_prices(open(path)?, path, options)
}

fn is_missing(cell: &str) -> bool {
    matches!(
        cell.to_ascii_lowercase().as_str(),
        "" | "nan" | "na" | "n/a" | "null"
    )
}

/// Parse a price table from any reader; `source` is only used in messages.
pub fn parse_prices(reader: impl Read, source: &Path, options: LoadOptions) -> Result<PriceMatrix> {
    let parse_err = |message: String| Error::Parse {
        path: source.to_path_buf(),
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| parse_err(format!("reading header: {e}")))?
        .clone();
    if header.len() < 2 {
        return Err(parse_err("empty file or header without tickers".into()));
    }
    let tickers: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut seen = HashSet::new();
    for t in &tickers {
        if t.is_empty() {
            return Err(parse_err("empty ticker name in header".into()));
        }
        if !seen.insert(t.as_str()) {
            return Err(parse_err(format!("duplicate ticker column: {t}")));
        }
    }
    let p = tickers.len();

    let mut dates: Vec<NaiveDate> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        // Header is line 1.
        let line = idx + 2;
        let record = record.map_err(|e| parse_err(format!("line {line}: {e}")))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let date_cell = record.get(0).unwrap_or("");
        let date = NaiveDate::parse_from_str(date_cell, "%Y-%m-%d")
            .map_err(|e| parse_err(format!("line {line}: bad date {date_cell:?}: {e}")))?;
        if record.len() > p + 1 {
            return Err(parse_err(format!(
                "line {line}: {} cells, header has {}",
                record.len(),
                p + 1
            )));
        }

        let mut row = Vec::with_capacity(p);
        let mut bad: Option<&str> = None;
        for (col, ticker) in tickers.iter().enumerate() {
            let cell = record.get(col + 1).unwrap_or("");
            let value = if is_missing(cell) {
                None
            } else {
                let v: f64 = cell.parse().map_err(|_| {
                    parse_err(format!(
                        "line {line}, ticker {ticker}: unparseable price {cell:?}"
                    ))
                })?;
                (v > 0.0 && v.is_finite()).then_some(v)
            };
            match value {
                Some(v) => row.push(v),
                None => {
                    bad.get_or_insert(ticker);
                }
            }
        }
        if let Some(ticker) = bad {
            if options.drop_bad_rows {
                continue;
            }
            return Err(parse_err(format!(
                "line {line} ({date}), ticker {ticker}: missing or non-positive price"
            )));
        }
        if let Some(&prev) = dates.last() {
            if date <= prev {
                return Err(parse_err(format!(
                    "line {line}: date {date} does not follow {prev}"
                )));
            }
        }
        dates.push(date);
        values.extend(row);
    }
    if dates.is_empty() {
        return Err(parse_err("no price rows".into()));
    }
    let prices = DMatrix::from_row_slice(dates.len(), p, &values);
    Ok(PriceMatrix {
        dates,
        tickers,
        prices,
    })
}

/// Read `ticker,sector` rows and order the labels like `tickers`.
pub fn load_sectors(path: &Path, tickers: &[String]) -> Result<SectorLabeling> {
    parse_sectors(open(path)?, path, tickers)
}

pub fn parse_sectors(
    reader: impl Read,
    source: &Path,
    tickers: &[String],
) -> Result<SectorLabeling> {
    let parse_err = |message: String| Error::Parse {
        path: source.to_path_buf(),
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut by_ticker: HashMap<String, String> = HashMap::new();
    for (idx, record) in rdr.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| parse_err(format!("line {line}: {e}")))?;
        if record.len() != 2 {
            return Err(parse_err(format!("line {line}: expected ticker,sector")));
        }
        let (ticker, sector) = (record[0].to_string(), record[1].to_string());
        if by_ticker.insert(ticker.clone(), sector).is_some() {
            return Err(parse_err(format!(
                "duplicate ticker in sectors file: {ticker}"
            )));
        }
    }
    let known: HashSet<&str> = tickers.iter().map(String::as_str).collect();
    let mut extra: Vec<&str> = by_ticker
        .keys()
        .map(String::as_str)
        .filter(|t| !known.contains(t))
        .collect();
    extra.sort_unstable();
    if let Some(t) = extra.first() {
        return Err(parse_err(format!("ticker {t} is not in the price table")));
    }
    let labels = tickers
        .iter()
        .map(|t| {
            by_ticker
                .get(t)
                .cloned()
                .ok_or_else(|| parse_err(format!("no sector for ticker {t}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SectorLabeling::new(labels))
}

/// `X_ij = ln(price_ij) - ln(price_{i-1,j})`.
pub fn log_returns(prices: &PriceMatrix) -> Result<ReturnsMatrix> {
    let t = prices.rows();
    if t < 2 {
        return Err(Error::invalid(format!(
            "log-returns need at least 2 price rows, got {t}"
        )));
    }
    let logs = prices.prices.map(f64::ln);
    let values = logs.rows(1, t - 1) - logs.rows(0, t - 1);
    Ok(ReturnsMatrix { values })
}

/// `S = (1/n) XᵀX` over the `n` rows, after centering each column if `demean`.
pub fn covariance_from_returns(returns: &ReturnsMatrix, demean: bool) -> Result<SampleCovariance> {
    let mut x = returns.values.clone();
    let n = x.nrows();
    let min_rows = if demean { 2 } else { 1 };
    if n < min_rows {
        return Err(Error::invalid(format!(
            "covariance needs at least {min_rows} return rows, got {n}"
        )));
    }
    if demean {
        for mut col in x.column_iter_mut() {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
        }
    }
    let s = (x.transpose() * &x) / n as f64;
    SampleCovariance::new((&s + s.transpose()) * 0.5, n)
}
