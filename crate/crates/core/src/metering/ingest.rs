use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use super::{DailyProfile, MeterReading, MeteringError, Result};

const HEADER: [&str; 2] = ["timestamp_min", "wh"];

/// Reads and validates a profile CSV (`timestamp_min,wh`, 144 rows).
pub fn ingest_profile(path: &Path, meter_id: &str) -> Result<DailyProfile> {
    let file = std::fs::File::open(path).map_err(|source| MeteringError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_profile(file, meter_id)
}

pub fn parse_profile<R: Read>(input: R, meter_id: &str) -> Result<DailyProfile> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(input);

    let headers = reader.headers().map_err(|e| parse_err(1, e))?;
    if headers.iter().ne(HEADER) {
        return Err(MeteringError::Parse {
            line: 1,
            message: format!(
                "expected header `timestamp_min,wh`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut readings = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e)
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let timestamp: u16 = record[0].parse().map_err(|_| MeteringError::Parse {
            line,
            message: format!("timestamp `{}` is not a decimal integer", &record[0]),
        })?;
        let wh = parse_wh(&record[1]).ok_or_else(|| MeteringError::Parse {
            line,
            message: format!("wh `{}` is not a decimal with at most 3 fraction digits", &record[1]),
        })?;
        let reading = MeterReading::new(timestamp, wh)
            .map_err(|e| MeteringError::Validation(format!("line {line}: {}", strip_prefix(&e))))?;
        readings.push(reading);
    }
    DailyProfile::new(meter_id, readings)
}

fn parse_err(line: u64, e: csv::Error) -> MeteringError {
    MeteringError::Parse {
        line,
        message: e.to_string(),
    }
}

fn strip_prefix(e: &MeteringError) -> String {
    match e {
        MeteringError::Validation(m) => m.clone(),
        other => other.to_string(),
    }
}

fn parse_wh(s: &str) -> Option<f64> {
    let unsigned = s.strip_prefix('-').unwrap_or(s);
    let (int, frac) = unsigned.split_once('.').unwrap_or((unsigned, ""));
    let digits_ok = !int.is_empty()
        && int.bytes().all(|b| b.is_ascii_digit())
        && frac.len() <= 3
        && frac.bytes().all(|b| b.is_ascii_digit())
        && !(unsigned.contains('.') && frac.is_empty());
    if !digits_ok {
        return None;
    }
    s.parse().ok()
}

/// Renders a profile in the ingest format, three fraction digits per value.
pub fn profile_to_csv(profile: &DailyProfile) -> String {
    let mut out = String::from("timestamp_min,wh\n");
    for r in profile.readings() {
        writeln!(out, "{},{:.3}", r.timestamp_min, r.wh).unwrap();
    }
    out
}
