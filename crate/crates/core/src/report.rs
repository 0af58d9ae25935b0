//! Verification reports and their JSON / CSV encodings.
//!
//! Floating-point fields are written with 17 significant digits so every
//! value survives a text round trip exactly.

use std::fmt::Write as _;
use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::characters::Parity;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 14] = [
    "d",
    "q",
    "label",
    "parity",
    "check",
    "lhs_re",
    "lhs_im",
    "rhs_re",
    "rhs_im",
    "abs_error",
    "tol",
    "terms",
    "tail_bound",
    "pass",
];

/// Formats a float with 17 significant digits; non-finite values use Rust's
/// spelling (`NaN`, `inf`, `-inf`), which `str::parse` reads back.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn sig17<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if !x.is_finite() {
        return s.serialize_none();
    }
    let raw = RawValue::from_string(format_f64(*x)).map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub command: String,
    pub modulus: u64,
    pub discriminant: Option<i64>,
    pub label: String,
    pub parity: Parity,
    pub check: String,
    #[serde(serialize_with = "sig17")]
    pub lhs_re: f64,
    #[serde(serialize_with = "sig17")]
    pub lhs_im: f64,
    #[serde(serialize_with = "sig17")]
    pub rhs_re: f64,
    #[serde(serialize_with = "sig17")]
    pub rhs_im: f64,
    #[serde(serialize_with = "sig17")]
    pub abs_error: f64,
    #[serde(serialize_with = "sig17")]
    pub tolerance: f64,
    pub terms_used: u64,
    #[serde(serialize_with = "sig17")]
    pub tail_bound: f64,
    pub pass: bool,
    pub notes: String,
    pub wall_time_ms: f64,
}

impl VerificationReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        modulus: u64,
        discriminant: Option<i64>,
        label: String,
        parity: Parity,
        check: impl Into<String>,
        lhs: Complex64,
        rhs: Complex64,
        tolerance: f64,
    ) -> VerificationReport {
        let abs_error = (lhs - rhs).norm();
        VerificationReport {
            schema_version: SCHEMA_VERSION,
            command: String::new(),
            modulus,
            discriminant,
            label,
            parity,
            check: check.into(),
            lhs_re: lhs.re,
            lhs_im: lhs.im,
            rhs_re: rhs.re,
            rhs_im: rhs.im,
            abs_error,
            tolerance,
            terms_used: 0,
            tail_bound: 0.0,
            pass: abs_error <= tolerance,
            notes: String::new(),
            wall_time_ms: 0.0,
        }
    }

    pub fn lhs(&self) -> Complex64 {
        Complex64::new(self.lhs_re, self.lhs_im)
    }

    pub fn rhs(&self) -> Complex64 {
        Complex64::new(self.rhs_re, self.rhs_im)
    }
}

/// JSON array of reports.
pub fn to_json(reports: &[VerificationReport]) -> Result<String> {
    serde_json::to_string_pretty(reports).map_err(|e| Error::Io(e.to_string()))
}

pub fn write_csv<W: Write>(out: W, reports: &[VerificationReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in reports {
        w.write_record([
            r.discriminant.map(|d| d.to_string()).unwrap_or_default(),
            r.modulus.to_string(),
            r.label.clone(),
            r.parity.to_string(),
            r.check.clone(),
            format_f64(r.lhs_re),
            format_f64(r.lhs_im),
            format_f64(r.rhs_re),
            format_f64(r.rhs_im),
            format_f64(r.abs_error),
            format_f64(r.tolerance),
            r.terms_used.to_string(),
            format_f64(r.tail_bound),
            r.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One parsed CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub d: Option<i64>,
    pub q: u64,
    pub label: String,
    pub parity: Parity,
    pub check: String,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub abs_error: f64,
    pub tol: f64,
    pub terms: u64,
    pub tail_bound: f64,
    pub pass: bool,
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse().map_err(|_| {
        Error::Parse(format!(
            "column {} has unparsable value {raw:?}",
            CSV_HEADER[i]
        ))
    })
}

/// Reads a report CSV, checking the header exactly.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?;
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        if rec.len() != CSV_HEADER.len() {
            return Err(Error::Parse(format!("row has {} fields", rec.len())));
        }
        let d = match rec.get(0) {
            Some("") | None => None,
            Some(_) => Some(field(&rec, 0)?),
        };
        let parity = match rec.get(3) {
            Some("even") => Parity::Even,
            Some("odd") => Parity::Odd,
            other => return Err(Error::Parse(format!("bad parity {other:?}"))),
        };
        rows.push(CsvRow {
            d,
            q: field(&rec, 1)?,
            label: rec[2].to_string(),
            parity,
            check: rec[4].to_string(),
            lhs: Complex64::new(field(&rec, 5)?, field(&rec, 6)?),
            rhs: Complex64::new(field(&rec, 7)?, field(&rec, 8)?),
            abs_error: field(&rec, 9)?,
            tol: field(&rec, 10)?,
            terms: field(&rec, 11)?,
            tail_bound: field(&rec, 12)?,
            pass: field(&rec, 13)?,
        });
    }
    Ok(rows)
}

/// Human-readable table.
pub fn to_pretty(reports: &[VerificationReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<8} {:<10} {:<5} {:<18} {:>24} {:>24} {:>10} {:>10} {:>5}",
        "d", "label", "par", "check", "lhs", "rhs", "error", "tol", "pass"
    );
    for r in reports {
        let show = |re: f64, im: f64| {
            if im == 0.0 {
                format!("{re:.12}")
            } else {
                format!("{re:.6}{im:+.6}i")
            }
        };
        let _ = writeln!(
            out,
            "{:<8} {:<10} {:<5} {:<18} {:>24} {:>24} {:>10.2e} {:>10.2e} {:>5}",
            r.discriminant
                .map(|d| d.to_string())
                .unwrap_or_else(|| "-".into()),
            r.label,
            r.parity,
            r.check,
            show(r.lhs_re, r.lhs_im),
            show(r.rhs_re, r.rhs_im),
            r.abs_error,
            r.tolerance,
            if r.pass { "ok" } else { "FAIL" }
        );
        if !r.notes.is_empty() {
            let _ = writeln!(out, "         {}", r.notes);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(lhs: f64, rhs: f64) -> VerificationReport {
        VerificationReport::new(
            5,
            Some(5),
            "5.2".into(),
            Parity::Even,
            "example3",
            Complex64::new(lhs, 0.0),
            Complex64::new(rhs, -0.0),
            1e-8,
        )
    }

    #[test]
    fn json_has_fixed_field_order_and_17_digits() {
        let json = to_json(&[sample(0.1, 0.1)]).unwrap();
        let keys: Vec<_> = json
            .lines()
            .filter_map(|l| l.trim().strip_prefix('"'))
            .filter_map(|l| l.split('"').next())
            .collect();
        assert_eq!(
            keys,
            [
                "schema_version",
                "command",
                "modulus",
                "discriminant",
                "label",
                "parity",
                "check",
                "lhs_re",
                "lhs_im",
                "rhs_re",
                "rhs_im",
                "abs_error",
                "tolerance",
                "terms_used",
                "tail_bound",
                "pass",
                "notes",
                "wall_time_ms"
            ]
        );
        assert!(json.contains("\"lhs_re\": 1.0000000000000001e-1"));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v[0]["lhs_re"].as_f64(), Some(0.1));
        assert_eq!(v[0]["parity"], "even");
    }

    #[test]
    fn non_finite_becomes_null() {
        let json = to_json(&[sample(f64::NAN, 0.0)]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v[0]["lhs_re"].is_null());
        assert_eq!(v[0]["pass"], false);
    }

    #[test]
    fn empty_csv_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), CSV_HEADER.join(",") + "\n");
    }

    #[test]
    fn bad_header_is_rejected() {
        assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trips(lhs in any::<f64>(), rhs in -1e300f64..1e300, d in proptest::option::of(-1000i64..1000)) {
            let mut r = sample(lhs, rhs);
            r.discriminant = d;
            let mut buf = Vec::new();
            write_csv(&mut buf, std::slice::from_ref(&r)).unwrap();
            let rows = read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(rows.len(), 1);
            let row = &rows[0];
            prop_assert_eq!(row.d, d);
            prop_assert!(row.lhs.re == lhs || (lhs.is_nan() && row.lhs.re.is_nan()));
            prop_assert_eq!(row.rhs.re.to_bits(), rhs.to_bits());
            prop_assert_eq!(row.pass, r.pass);
        }
    }
}
