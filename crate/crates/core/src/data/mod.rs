//! Price ingestion and daily open-to-close log returns.

mod fetch;
mod ohlc;
mod returns;

pub use fetch::{fetch_csv, fetch_csv_with_backoff};
pub use ohlc::{parse_date, parse_ohlc_csv, write_ohlc_csv, ColumnSchema, OhlcRecord, ParsedOhlc};
pub use returns::{log_returns, read_returns_csv, trading_days, ReturnSeries, RETURN_SANITY_BOUND};
