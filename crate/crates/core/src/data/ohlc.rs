use std::collections::BTreeMap;
use std::io::Write;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One trading day of prices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OhlcRecord {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
}

impl OhlcRecord {
    /// Validates positivity and that the range brackets open and close.
    pub fn new(date: NaiveDate, open: f64, high: f64, low: f64, close: f64) -> Result<Self> {
        let prices = [open, high, low, close];
        if prices.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::Data(format!("non-positive price on {date}")));
        }
        if low > open.min(close) || high < open.max(close) {
            return Err(Error::Data(format!(
                "inconsistent range on {date}: low {low}, high {high}, open {open}, close {close}"
            )));
        }
        Ok(Self {
            date,
            open,
            high,
            low,
            close,
        })
    }
}

/// Column names used to read a price file. High and low are optional; when
/// absent the range is taken from open and close.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub date: String,
    pub open: String,
    pub high: Option<String>,
    pub low: Option<String>,
    pub close: String,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        Self {
            date: "Date".into(),
            open: "Open".into(),
            high: Some("High".into()),
            low: Some("Low".into()),
            close: "Close".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedOhlc {
    /// Sorted by date, ascending.
    pub records: Vec<OhlcRecord>,
    /// Rows skipped for a missing or unparseable date or price, or an
    /// inconsistent price range.
    pub dropped: usize,
}

/// Accepts `YYYY-MM-DD` and ISO-8601 / RFC 3339 timestamps (date part kept).
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .or_else(|| DateTime::parse_from_rfc3339(s).ok().map(|d| d.date_naive()))
        .or_else(|| {
            NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S")
                .ok()
                .map(|d| d.date())
        })
        .or_else(|| {
            NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S")
                .ok()
                .map(|d| d.date())
        })
}

fn parse_price(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim().trim_start_matches('\u{feff}') == name)
        .ok_or_else(|| Error::Data(format!("column '{name}' not found in header")))
}

pub fn parse_ohlc_csv(bytes: &[u8], schema: &ColumnSchema) -> Result<ParsedOhlc> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(bytes);
    let headers = reader.headers()?.clone();
    if headers.is_empty() || headers.iter().all(|h| h.trim().is_empty()) {
        return Err(Error::Data("missing header row".into()));
    }
    let date_col = column(&headers, &schema.date)?;
    let open_col = column(&headers, &schema.open)?;
    let close_col = column(&headers, &schema.close)?;
    let high_col = schema
        .high
        .as_deref()
        .map(|h| column(&headers, h))
        .transpose()?;
    let low_col = schema
        .low
        .as_deref()
        .map(|l| column(&headers, l))
        .transpose()?;

    let mut by_date = BTreeMap::new();
    let mut dropped = 0;
    for row in reader.records() {
        let row = row?;
        let field = |i: usize| row.get(i).unwrap_or("");
        let parsed = (|| {
            let date = parse_date(field(date_col))?;
            let open = parse_price(field(open_col))?;
            let close = parse_price(field(close_col))?;
            let high = match high_col {
                Some(i) => parse_price(field(i))?,
                None => open.max(close),
            };
            let low = match low_col {
                Some(i) => parse_price(field(i))?,
                None => open.min(close),
            };
            OhlcRecord::new(date, open, high, low, close).ok()
        })();
        match parsed {
            Some(record) => {
                if by_date.insert(record.date, record).is_some() {
                    return Err(Error::DuplicateDate(record.date));
                }
            }
            None => dropped += 1,
        }
    }
    if by_date.is_empty() {
        return Err(Error::Data("no parsable rows".into()));
    }
    Ok(ParsedOhlc {
        records: by_date.into_values().collect(),
        dropped,
    })
}

/// Writes records with the default schema's header, full precision.
pub fn write_ohlc_csv<W: Write>(records: &[OhlcRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["Date", "Open", "High", "Low", "Close"])?;
    for r in records {
        w.write_record([
            r.date.format("%Y-%m-%d").to_string(),
            format!("{:.16e}", r.open),
            format!("{:.16e}", r.high),
            format!("{:.16e}", r.low),
            format!("{:.16e}", r.close),
        ])?;
    }
    w.flush()?;
    Ok(())
}
