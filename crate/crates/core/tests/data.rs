use std::io::{Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use chrono::NaiveDate;
use cwt_spectra::data::{
    fetch_csv_with_backoff, read_returns_csv, write_ohlc_csv, RETURN_SANITY_BOUND,
};
use cwt_spectra::prelude::*;
use cwt_spectra::ErrorKind;
use proptest::prelude::*;

const CSV: &str = "Date,Open,High,Low,Close,Volume\n\
2008-10-01,100,106,99,105,10\n\
2008-10-02,105,105,90,91,10\n\
2008-10-03,91,95,88,93.5,10\n";

/// Reply to the k-th connection (0-based) as `respond(k)` decides: Some
/// (status, body, delay) writes a response after the delay, None drops it.
fn serve(
    respond: impl Fn(usize) -> Option<(u16, String, Duration)> + Send + Sync + 'static,
) -> (String, Arc<AtomicUsize>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/data.csv", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    let respond = Arc::new(respond);
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { break };
            let k = counter.fetch_add(1, Ordering::SeqCst);
            let respond = respond.clone();
            // One thread per connection so a stalled reply does not block retries.
            thread::spawn(move || {
                let mut buf = [0u8; 4096];
                let _ = stream.read(&mut buf);
                if let Some((status, body, delay)) = respond(k) {
                    thread::sleep(delay);
                    let reason = if status == 200 { "OK" } else { "Error" };
                    let _ = write!(
                        stream,
                        "HTTP/1.1 {status} {reason}\r\nContent-Type: text/csv\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                        body.len()
                    );
                }
            });
        }
    });
    (url, hits)
}

const QUICK: Duration = Duration::from_millis(10);

#[test]
fn fetch_returns_body_on_success() {
    let (url, hits) = serve(|_| Some((200, CSV.to_string(), Duration::ZERO)));
    let body = fetch_csv(&url, Duration::from_secs(5), 3).unwrap();
    assert_eq!(body, CSV.as_bytes());
    assert_eq!(hits.load(Ordering::SeqCst), 1);
    let parsed = parse_ohlc_csv(&body, &ColumnSchema::default()).unwrap();
    assert_eq!(parsed.records.len(), 3);
}

#[test]
fn fetch_does_not_retry_client_errors() {
    let (url, hits) = serve(|_| Some((404, "missing".into(), Duration::ZERO)));
    let err = fetch_csv_with_backoff(&url, Duration::from_secs(5), 3, QUICK).unwrap_err();
    assert!(
        matches!(err, Error::HttpStatus { status: 404, .. }),
        "{err}"
    );
    assert_eq!(hits.load(Ordering::SeqCst), 1);
}

#[test]
fn fetch_retries_after_timeout() {
    let (url, hits) = serve(|k| {
        let delay = if k == 0 {
            Duration::from_secs(3)
        } else {
            Duration::ZERO
        };
        Some((200, CSV.to_string(), delay))
    });
    let body = fetch_csv_with_backoff(&url, Duration::from_millis(500), 2, QUICK).unwrap();
    assert_eq!(body, CSV.as_bytes());
    assert_eq!(hits.load(Ordering::SeqCst), 2);
}

#[test]
fn fetch_gives_up_after_server_errors() {
    let (url, hits) = serve(|_| Some((503, "busy".into(), Duration::ZERO)));
    let err = fetch_csv_with_backoff(&url, Duration::from_secs(5), 3, QUICK).unwrap_err();
    assert!(
        matches!(err, Error::HttpStatus { status: 503, .. }),
        "{err}"
    );
    assert_eq!(hits.load(Ordering::SeqCst), 3);
}

#[test]
fn fetch_reports_transport_failures() {
    let (url, hits) = serve(|_| None);
    let err = fetch_csv_with_backoff(&url, Duration::from_secs(2), 2, QUICK).unwrap_err();
    assert!(matches!(err, Error::Network { attempts: 2, .. }), "{err}");
    assert_eq!(err.kind(), ErrorKind::Network);
    assert_eq!(hits.load(Ordering::SeqCst), 2);
}

#[test]
fn fetch_rejects_non_http_urls() {
    let err = fetch_csv("file:///etc/passwd", Duration::from_secs(1), 1).unwrap_err();
    assert!(matches!(err, Error::Data(_)));
}

fn day(m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(2008, m, d).unwrap()
}

#[test]
fn open_to_close_log_returns() {
    let parsed = parse_ohlc_csv(CSV.as_bytes(), &ColumnSchema::default()).unwrap();
    assert_eq!(parsed.dropped, 0);
    let s = log_returns(&parsed.records, "IXIC").unwrap();
    assert_eq!(s.len(), 3);
    assert!((s.values()[0] - 1.05f64.ln()).abs() < 1e-15);
    assert!((s.values()[1] - (91.0f64 / 105.0).ln()).abs() < 1e-15);
    assert_eq!(s.timestamps()[2], day(10, 3));
    assert_eq!(s.symbol(), "IXIC");
}

#[test]
fn malformed_rows_are_dropped_and_counted() {
    let csv = "Date,Open,High,Low,Close\n\
2008-10-01,100,106,99,105\n\
not-a-date,100,106,99,105\n\
2008-10-03,,95,88,93\n\
2008-10-06,100,95,99,105\n\
2008-10-07,-3,1,-4,1\n\
2008-10-08,50,55,45,52\n";
    let parsed = parse_ohlc_csv(csv.as_bytes(), &ColumnSchema::default()).unwrap();
    assert_eq!(parsed.dropped, 4);
    assert_eq!(
        parsed.records.iter().map(|r| r.date).collect::<Vec<_>>(),
        vec![day(10, 1), day(10, 8)]
    );
}

#[test]
fn duplicate_dates_are_fatal_and_named() {
    let csv =
        "Date,Open,High,Low,Close\n2008-10-01,1,1,1,1\n2008-10-02,1,1,1,1\n2008-10-01,2,2,2,2\n";
    let err = parse_ohlc_csv(csv.as_bytes(), &ColumnSchema::default()).unwrap_err();
    assert!(matches!(err, Error::DuplicateDate(d) if d == day(10, 1)));
    assert!(err.to_string().contains("2008-10-01"));
}

#[test]
fn missing_columns_and_empty_files_are_errors() {
    let err = parse_ohlc_csv(b"Date,Open,Close\n", &ColumnSchema::default()).unwrap_err();
    assert!(err.to_string().contains("High"), "{err}");
    assert!(parse_ohlc_csv(b"", &ColumnSchema::default()).is_err());
    let no_rows = "Date,Open,High,Low,Close\nbad,1,1,1,1\n";
    assert!(parse_ohlc_csv(no_rows.as_bytes(), &ColumnSchema::default()).is_err());
}

#[test]
fn custom_schema_without_range_columns() {
    let csv = "timestamp,o,c\n2008-10-02T00:00:00Z,10,11\n2008-10-01T00:00:00Z,10,9\n";
    let schema = ColumnSchema {
        date: "timestamp".into(),
        open: "o".into(),
        high: None,
        low: None,
        close: "c".into(),
    };
    let parsed = parse_ohlc_csv(csv.as_bytes(), &schema).unwrap();
    assert_eq!(parsed.records[0].date, day(10, 1));
    assert_eq!(parsed.records[1].high, 11.0);
    assert_eq!(parsed.records[0].low, 9.0);
}

#[test]
fn row_order_does_not_matter() {
    let lines: Vec<&str> = CSV.lines().collect();
    let shuffled = format!("{}\n{}\n{}\n{}\n", lines[0], lines[3], lines[1], lines[2]);
    let a = parse_ohlc_csv(CSV.as_bytes(), &ColumnSchema::default()).unwrap();
    let b = parse_ohlc_csv(shuffled.as_bytes(), &ColumnSchema::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        log_returns(&a.records, "X").unwrap(),
        log_returns(&b.records, "X").unwrap()
    );
}

#[test]
fn implausible_returns_are_rejected() {
    let d = day(10, 1);
    let r = OhlcRecord::new(d, 1.0, 10.0, 1.0, 10.0).unwrap();
    assert!((10f64).ln() > RETURN_SANITY_BOUND);
    assert!(matches!(log_returns(&[r], "X"), Err(Error::Data(_))));
    assert!(matches!(log_returns(&[], "X"), Err(Error::EmptySeries)));
    assert!(OhlcRecord::new(d, 0.0, 1.0, 0.0, 1.0).is_err());
    assert!(OhlcRecord::new(d, 5.0, 4.0, 3.0, 3.5).is_err());
}

#[test]
fn restrict_keeps_inclusive_range() {
    let s = ReturnSeries::from_values((0..20).map(|i| i as f64).collect(), "X").unwrap();
    let from = s.timestamps()[3];
    let to = s.timestamps()[7];
    let r = s.restrict(Some(from), Some(to)).unwrap();
    assert_eq!(r.values(), &[3.0, 4.0, 5.0, 6.0, 7.0]);
    assert!(matches!(
        s.restrict(Some(to), Some(from)),
        Err(Error::EmptySeries)
    ));
    assert_eq!(s.restrict(None, None).unwrap(), s);
}

#[test]
fn series_constructor_validates_timestamps() {
    let d = vec![day(10, 2), day(10, 1)];
    assert!(ReturnSeries::new(vec![0.0, 0.0], d, "X").is_err());
    let d = vec![day(10, 1), day(10, 1)];
    assert!(matches!(
        ReturnSeries::new(vec![0.0, 0.0], d, "X"),
        Err(Error::DuplicateDate(_))
    ));
    assert!(ReturnSeries::new(vec![0.0], vec![], "X").is_err());
}

#[test]
fn returns_file_rejects_bad_header() {
    assert!(read_returns_csv("date,value\n2008-10-01,0.1\n".as_bytes(), "X").is_err());
    assert!(read_returns_csv("date,log_return\n2008-10-01,abc\n".as_bytes(), "X").is_err());
}

fn records_strategy() -> impl Strategy<Value = Vec<OhlcRecord>> {
    prop::collection::btree_map(0u32..3000, (1.0f64..1e4, 1.0f64..1e4, 0.0f64..50.0), 1..40)
        .prop_map(|days| {
            let base = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
            days.into_iter()
                .map(|(d, (open, close, spread))| {
                    let date = base + chrono::Days::new(d as u64);
                    let high = open.max(close) + spread;
                    let low = (open.min(close) - spread).max(open.min(close) * 0.5);
                    OhlcRecord::new(date, open, high, low, close).unwrap()
                })
                .collect()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ohlc_round_trips_exactly(records in records_strategy()) {
        let mut buf = Vec::new();
        write_ohlc_csv(&records, &mut buf).unwrap();
        let parsed = parse_ohlc_csv(&buf, &ColumnSchema::default()).unwrap();
        prop_assert_eq!(parsed.dropped, 0);
        prop_assert_eq!(&parsed.records, &records);
    }

    #[test]
    fn returns_round_trip_exactly(values in prop::collection::vec(-0.5f64..0.5, 1..200)) {
        let s = ReturnSeries::from_values(values, "RT").unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        prop_assert_eq!(read_returns_csv(buf.as_slice(), "RT").unwrap(), s);
    }
}
