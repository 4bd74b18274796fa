use std::thread;
use std::time::Duration;

use crate::{Error, Result};

const MAX_BODY_BYTES: u64 = 256 * 1024 * 1024;
const DEFAULT_BACKOFF: Duration = Duration::from_millis(250);

/// Downloads a CSV body over HTTP(S), making up to `retries` attempts with
/// exponential backoff. Only a 200 response is accepted; 4xx statuses fail
/// immediately, 5xx statuses and transport errors are retried. The body is
/// returned whole or not at all.
pub fn fetch_csv(url: &str, timeout: Duration, retries: usize) -> Result<Vec<u8>> {
    fetch_csv_with_backoff(url, timeout, retries, DEFAULT_BACKOFF)
}

pub fn fetch_csv_with_backoff(
    url: &str,
    timeout: Duration,
    retries: usize,
    backoff: Duration,
) -> Result<Vec<u8>> {
    if !(url.starts_with("http://") || url.starts_with("https://")) {
        return Err(Error::Data(format!("not an http(s) URL: {url}")));
    }
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .http_status_as_error(false)
        .build()
        .into();
    let attempts = retries.max(1);
    let mut last = String::new();
    for attempt in 0..attempts {
        if attempt > 0 {
            thread::sleep(backoff * (1u32 << (attempt - 1).min(16)));
        }
        match agent.get(url).call() {
            Ok(mut response) => {
                let status = response.status().as_u16();
                if status == 200 {
                    match response
                        .body_mut()
                        .with_config()
                        .limit(MAX_BODY_BYTES)
                        .read_to_vec()
                    {
                        Ok(body) => return Ok(body),
                        Err(e) => last = e.to_string(),
                    }
                } else if (400..500).contains(&status) {
                    return Err(Error::HttpStatus {
                        status,
                        url: url.to_string(),
                    });
                } else {
                    last = format!("HTTP status {status}");
                    if attempt + 1 == attempts {
                        return Err(Error::HttpStatus {
                            status,
                            url: url.to_string(),
                        });
                    }
                }
            }
            Err(e) => last = e.to_string(),
        }
    }
    Err(Error::Network {
        attempts,
        message: last,
    })
}
