//! Output writers: CSV for curves, JSON for scalars and events, little-endian
//! binary rows with a JSON header for profiles. Floats are written with 17
//! significant digits so identical runs give identical files.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::Result;

/// `v` with 17 significant digits; `nan`, `inf` and `-inf` otherwise.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Writes `header` and `rows` as comma-separated lines.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Pretty JSON with 17-digit floats; non-finite floats become `null`.
struct Fixed17(PrettyFormatter<'static>);

impl Formatter for Fixed17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(format!("{v:.16e}").as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(v))
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// `value` as JSON text.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)?)?;
    Ok(())
}

/// Writes equal-length `rows` to `<stem>.bin` as little-endian `f64` and
/// `header` plus the row shape to `<stem>.json`.
pub fn write_profiles(dir: &Path, stem: &str, header: serde_json::Value, rows: &[Vec<f64>]) -> Result<()> {
    let width = rows.first().map_or(0, Vec::len);
    let mut bytes = Vec::with_capacity(rows.len() * width * 8);
    for r in rows {
        if r.len() != width {
            return Err(crate::Error::InvalidState("profile rows differ in length".into()));
        }
        for v in r {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(dir.join(format!("{stem}.bin")), bytes)?;
    let mut h = serde_json::json!({ "rows": rows.len(), "columns": width, "dtype": "f64-le" });
    if let (Some(m), serde_json::Value::Object(extra)) = (h.as_object_mut(), header) {
        m.extend(extra);
    }
    write_json(&dir.join(format!("{stem}.json")), &h)
}

/// Reads rows written by [`write_profiles`].
pub fn read_profiles(dir: &Path, stem: &str) -> Result<(serde_json::Value, Vec<Vec<f64>>)> {
    let header: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join(format!("{stem}.json")))?)?;
    let width = header["columns"].as_u64().unwrap_or(0) as usize;
    let bytes = fs::read(dir.join(format!("{stem}.bin")))?;
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunks of 8")))
        .collect();
    let rows = if width == 0 { Vec::new() } else { values.chunks(width).map(<[f64]>::to_vec).collect() };
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            let s = fmt17(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt17(f64::NAN), "nan");
    }

    #[test]
    fn json_floats_are_fixed_width() {
        let s = to_json(&serde_json::json!({ "a": 0.5, "b": [1.0, f64::NAN] })).unwrap();
        assert!(s.contains("5.0000000000000000e-1"), "{s}");
        assert!(s.contains("null"), "{s}");
    }

    #[test]
    fn profiles_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![vec![1.0, -2.0, 3.5], vec![0.25, 0.0, -1e-9]];
        write_profiles(dir.path(), "w", serde_json::json!({ "lambda": 0.9 }), &rows).unwrap();
        let (h, back) = read_profiles(dir.path(), "w").unwrap();
        assert_eq!(back, rows);
        assert_eq!(h["lambda"].as_f64(), Some(0.9));
        assert_eq!(h["columns"].as_u64(), Some(3));
    }
}
