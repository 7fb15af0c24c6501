//! Deterministic JSON and CSV emission with atomic file replacement.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};
use tempfile::NamedTempFile;

/// Compact JSON whose floats carry 17 significant digits in scientific notation.
struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", fmt_f64(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{}", fmt_f64(value as f64))
    }
}

/// Round-trip-exact float text, shared by the JSON and CSV writers.
pub fn fmt_f64(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<Vec<u8>> {
    let mut buf = Vec::new();
    value.serialize(&mut Serializer::with_formatter(&mut buf, FixedDigits))?;
    buf.push(b'\n');
    Ok(buf)
}

/// Writes to `out` through a temporary file in the same directory, or to stdout.
pub fn emit(bytes: &[u8], out: Option<&Path>) -> io::Result<()> {
    match out {
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()
        }
        Some(path) => {
            let dir = path
                .parent()
                .filter(|d| !d.as_os_str().is_empty())
                .unwrap_or(Path::new("."));
            let mut tmp = NamedTempFile::new_in(dir)?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).map_err(|e| e.error)?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        for x in [0.1, -0.23104906018664842, 1e-300, 6.02214076e23, 0.0] {
            let text = fmt_f64(x);
            assert_eq!(text.parse::<f64>().unwrap(), x, "{text}");
        }
    }

    #[test]
    fn json_uses_fixed_digits() {
        let bytes = to_json(&serde_json::json!({"a": 0.5, "b": [1, 2]})).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "{\"a\":5.0000000000000000e-1,\"b\":[1,2]}\n");
    }

    #[test]
    fn non_finite_becomes_null() {
        let bytes = to_json(&f64::NAN).unwrap();
        assert_eq!(bytes, b"null\n");
    }

    #[test]
    fn file_output_replaces_atomically() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        emit(b"first", Some(&path)).unwrap();
        emit(b"second", Some(&path)).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"second");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
