use std::io::{Read, Write};

use chrono::{Datelike, Days, NaiveDate, Weekday};

use super::{parse_date, OhlcRecord};
use crate::{Error, Result};

/// Single-day log returns at or beyond this magnitude are treated as data
/// errors (a move of more than ~170%).
pub const RETURN_SANITY_BOUND: f64 = 1.0;

/// Evenly spaced (in trading time) series with one date per value.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    values: Vec<f64>,
    timestamps: Vec<NaiveDate>,
    source_symbol: String,
}

/// `n` consecutive weekdays starting 2000-01-03, used to date synthetic series.
pub fn trading_days(n: usize) -> Vec<NaiveDate> {
    let mut day = NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date");
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        if !matches!(day.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(day);
        }
        day = day + Days::new(1);
    }
    out
}

impl ReturnSeries {
    pub fn new(
        values: Vec<f64>,
        timestamps: Vec<NaiveDate>,
        source_symbol: impl Into<String>,
    ) -> Result<Self> {
        if values.len() != timestamps.len() {
            return Err(Error::Data(format!(
                "{} values but {} timestamps",
                values.len(),
                timestamps.len()
            )));
        }
        if let Some(w) = timestamps.windows(2).find(|w| w[1] <= w[0]) {
            return Err(if w[1] == w[0] {
                Error::DuplicateDate(w[0])
            } else {
                Error::Data(format!("timestamps out of order at {}", w[1]))
            });
        }
        Ok(Self {
            values,
            timestamps,
            source_symbol: source_symbol.into(),
        })
    }

    /// Dates the values on the synthetic weekday calendar of [`trading_days`].
    pub fn from_values(values: Vec<f64>, source_symbol: impl Into<String>) -> Result<Self> {
        let timestamps = trading_days(values.len());
        Self::new(values, timestamps, source_symbol)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn timestamps(&self) -> &[NaiveDate] {
        &self.timestamps
    }

    pub fn symbol(&self) -> &str {
        &self.source_symbol
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Population variance (1/n).
    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / self.values.len() as f64
    }

    /// Keeps the dates within `[from, to]` (inclusive, either end open).
    pub fn restrict(&self, from: Option<NaiveDate>, to: Option<NaiveDate>) -> Result<Self> {
        let keep = |d: &NaiveDate| from.is_none_or(|f| *d >= f) && to.is_none_or(|t| *d <= t);
        let (values, timestamps): (Vec<f64>, Vec<NaiveDate>) = self
            .values
            .iter()
            .zip(&self.timestamps)
            .filter(|(_, d)| keep(d))
            .map(|(v, d)| (*v, *d))
            .unzip();
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        Self::new(values, timestamps, self.source_symbol.clone())
    }

    /// Writes `date,log_return` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["date", "log_return"])?;
        for (d, v) in self.timestamps.iter().zip(&self.values) {
            w.write_record([d.format("%Y-%m-%d").to_string(), format!("{v:.16e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads the `date,log_return` format written by [`ReturnSeries::write_csv`].
pub fn read_returns_csv<R: Read>(input: R, source_symbol: &str) -> Result<ReturnSeries> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["date", "log_return"] {
        return Err(Error::Data(format!(
            "expected header date,log_return, got {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut values = Vec::new();
    let mut timestamps = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let date = parse_date(&row[0])
            .ok_or_else(|| Error::Data(format!("bad date '{}' on row {}", &row[0], i + 1)))?;
        let value: f64 = row[1]
            .trim()
            .parse()
            .map_err(|_| Error::Data(format!("bad value '{}' on row {}", &row[1], i + 1)))?;
        timestamps.push(date);
        values.push(value);
    }
    ReturnSeries::new(values, timestamps, source_symbol)
}

/// Open-to-close log returns r_t = ln(C_t) − ln(O_t), one per record.
/// Records are sorted by date first, so input order does not matter.
pub fn log_returns(records: &[OhlcRecord], source_symbol: &str) -> Result<ReturnSeries> {
    if records.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut sorted = records.to_vec();
    sorted.sort_by_key(|r| r.date);
    let mut values = Vec::with_capacity(sorted.len());
    for r in &sorted {
        if !(r.open > 0.0 && r.close > 0.0) {
            return Err(Error::Data(format!(
                "non-positive price on {}: open {}, close {}",
                r.date, r.open, r.close
            )));
        }
        let ret = r.close.ln() - r.open.ln();
        if !(ret.abs() < RETURN_SANITY_BOUND) {
            return Err(Error::Data(format!(
                "implausible return {ret} on {} (|r| >= {RETURN_SANITY_BOUND})",
                r.date
            )));
        }
        values.push(ret);
    }
    ReturnSeries::new(
        values,
        sorted.iter().map(|r| r.date).collect(),
        source_symbol,
    )
}
