//! HITRAN 2004+ `.par` records: 160-character fixed-width lines.
//!
//! Column layout (1-based, inclusive) of the fields kept here:
//!
//! | field      | cols    | format |
//! |------------|---------|--------|
//! | molec_id   | 1–2     | I2     |
//! | local_iso  | 3       | I1     |
//! | nu0        | 4–15    | F12.6  |
//! | sw         | 16–25   | E10.3  |
//! | A          | 26–35   | E10.3 (ignored) |
//! | gamma_air  | 36–40   | F5.4   |
//! | gamma_self | 41–45   | F5.3   |
//! | elower     | 46–55   | F10.4  |
//! | n_air      | 56–59   | F4.2   |
//! | delta_air  | 60–67   | F8.6   |
//!
//! Everything after column 67 (quantum numbers, error and reference codes,
//! statistical weights) is ignored.

use std::io::BufRead;

use super::{LineList, LineListError, SpectralLine};

pub const RECORD_LEN: usize = 160;

/// Retained columns as 0-based half-open byte ranges.
pub const RETAINED_COLUMNS: [(usize, usize); 9] = [
    (0, 2),
    (2, 3),
    (3, 15),
    (15, 25),
    (35, 40),
    (40, 45),
    (45, 55),
    (55, 59),
    (59, 67),
];

fn field<'a>(record: &'a str, index: usize, cols: (usize, usize)) -> Result<&'a str, LineListError> {
    record.get(cols.0..cols.1).ok_or_else(|| LineListError::FieldParse {
        record: index,
        columns: (cols.0 + 1, cols.1),
        text: String::new(),
    })
}

fn parse_f64(record: &str, index: usize, cols: (usize, usize)) -> Result<f64, LineListError> {
    let raw = field(record, index, cols)?;
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| LineListError::FieldParse {
            record: index,
            columns: (cols.0 + 1, cols.1),
            text: raw.to_string(),
        })
}

fn parse_iso(record: &str, index: usize) -> Result<u8, LineListError> {
    let raw = field(record, index, (2, 3))?;
    // HITRAN encodes isotopologue 10 as '0' and 11, 12, ... as 'A', 'B', ...
    match raw.as_bytes()[0] {
        b'0' => Ok(10),
        c @ b'1'..=b'9' => Ok(c - b'0'),
        c @ b'A'..=b'Z' => Ok(c - b'A' + 11),
        _ => Err(LineListError::FieldParse { record: index, columns: (3, 3), text: raw.to_string() }),
    }
}

/// Parse one record. `index` is carried into errors to locate the record.
pub fn parse_par_record(record: &str, index: usize) -> Result<SpectralLine, LineListError> {
    let record = record.trim_end_matches(['\r', '\n']);
    if record.len() < RECORD_LEN {
        return Err(LineListError::RecordTooShort { record: index, len: record.len() });
    }
    let molec_raw = field(record, index, (0, 2))?;
    let molec_id = molec_raw.trim().parse::<u8>().map_err(|_| LineListError::FieldParse {
        record: index,
        columns: (1, 2),
        text: molec_raw.to_string(),
    })?;
    let line = SpectralLine {
        molec_id,
        local_iso_id: parse_iso(record, index)?,
        nu0: parse_f64(record, index, (3, 15))?,
        sw: parse_f64(record, index, (15, 25))?,
        gamma_air: parse_f64(record, index, (35, 40))?,
        gamma_self: parse_f64(record, index, (40, 45))?,
        elower: parse_f64(record, index, (45, 55))?,
        n_air: parse_f64(record, index, (55, 59))?,
        delta_air: parse_f64(record, index, (59, 67))?,
    };
    line.validate(index)?;
    Ok(line)
}

/// Read a `.par` stream. Blank lines are skipped; record indices in errors are 1-based line numbers.
pub fn load_linelist<R: BufRead>(source: R, species_tag: &str) -> Result<LineList, LineListError> {
    let mut lines = Vec::new();
    for (i, text) in source.lines().enumerate() {
        let text = text.map_err(|e| LineListError::Io(e.to_string()))?;
        if text.trim().is_empty() {
            continue;
        }
        lines.push(parse_par_record(&text, i + 1)?);
    }
    LineList::new(species_tag, lines)
}

/// Fortran `Fw.d`. Drops the leading zero (`0.06` -> `.0600`) when that is what makes it fit.
fn fortran_f(value: f64, width: usize, decimals: usize) -> Option<String> {
    let mut s = format!("{value:.decimals$}");
    if s.len() > width {
        if let Some(rest) = s.strip_prefix("0.") {
            s = format!(".{rest}");
        } else if let Some(rest) = s.strip_prefix("-0.") {
            s = format!("-.{rest}");
        }
    }
    (s.len() <= width).then(|| format!("{s:>width$}"))
}

/// Fortran `Ew.d` with a signed two-digit exponent, e.g. `1.000E-19`.
fn fortran_e(value: f64, width: usize, decimals: usize) -> Option<String> {
    let s = format!("{value:.decimals$E}");
    let (mantissa, exp) = s.split_once('E')?;
    let exp: i32 = exp.parse().ok()?;
    let sign = if exp < 0 { '-' } else { '+' };
    let s = format!("{mantissa}E{sign}{:02}", exp.abs());
    (s.len() <= width).then(|| format!("{s:>width$}"))
}

/// Serialize the retained fields into a full 160-character record.
///
/// Ignored columns are filled with neutral placeholders (zero Einstein-A,
/// blank quanta, zero error and reference codes, zero statistical weights).
pub fn to_par_record(line: &SpectralLine) -> Result<String, LineListError> {
    let overflow = |name: &'static str| LineListError::FieldOverflow { field: name };
    let iso = match line.local_iso_id {
        1..=9 => (b'0' + line.local_iso_id) as char,
        10 => '0',
        11..=36 => (b'A' + line.local_iso_id - 11) as char,
        _ => return Err(overflow("local_iso_id")),
    };
    if line.molec_id > 99 {
        return Err(overflow("molec_id"));
    }
    let mut s = String::with_capacity(RECORD_LEN);
    s.push_str(&format!("{:>2}", line.molec_id));
    s.push(iso);
    s.push_str(&fortran_f(line.nu0, 12, 6).ok_or(overflow("nu0"))?);
    s.push_str(&fortran_e(line.sw, 10, 3).ok_or(overflow("sw"))?);
    s.push_str(" 0.000E+00");
    s.push_str(&fortran_f(line.gamma_air, 5, 4).ok_or(overflow("gamma_air"))?);
    s.push_str(&fortran_f(line.gamma_self, 5, 3).ok_or(overflow("gamma_self"))?);
    s.push_str(&fortran_f(line.elower, 10, 4).ok_or(overflow("elower"))?);
    s.push_str(&fortran_f(line.n_air, 4, 2).ok_or(overflow("n_air"))?);
    s.push_str(&fortran_f(line.delta_air, 8, 6).ok_or(overflow("delta_air"))?);
    s.push_str(&" ".repeat(60));
    s.push_str("000000");
    s.push_str(&" 0".repeat(6));
    s.push(' ');
    s.push_str("    0.0    0.0");
    debug_assert_eq!(s.len(), RECORD_LEN);
    Ok(s)
}

/// Retained substrings of a record, in column order.
pub fn retained_fields(record: &str) -> Vec<&str> {
    RETAINED_COLUMNS.iter().filter_map(|&(a, b)| record.get(a..b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Crafted record in the HITRAN layout, including quantum-number and reference columns.
    pub(crate) const CH4_RECORD: &str =
        " 61 3018.000000 1.000E-19 2.130E+01.06000.080  104.77600.75-.006000      0 0 1 0F2      0 0 0 0A1    5F1  1          4F2 54    465544333129151576    66.0   54.0";

    #[test]
    fn crafted_record_fields() {
        assert_eq!(CH4_RECORD.len(), 160);
        let l = parse_par_record(CH4_RECORD, 1).unwrap();
        assert_eq!(l.molec_id, 6);
        assert_eq!(l.local_iso_id, 1);
        assert_eq!(l.nu0, 3018.0);
        assert_eq!(l.sw, 1.0e-19);
        assert_eq!(l.gamma_air, 0.060);
        assert_eq!(l.gamma_self, 0.080);
        assert_eq!(l.elower, 104.776);
        assert_eq!(l.n_air, 0.75);
        assert_eq!(l.delta_air, -0.006);
    }

    #[test]
    fn crafted_record_round_trips_retained_columns() {
        let l = parse_par_record(CH4_RECORD, 1).unwrap();
        let out = to_par_record(&l).unwrap();
        assert_eq!(out.len(), RECORD_LEN);
        assert_eq!(retained_fields(&out), retained_fields(CH4_RECORD));
    }

    #[test]
    fn short_record_rejected() {
        let short = &CH4_RECORD[..159];
        assert!(matches!(
            parse_par_record(short, 7),
            Err(LineListError::RecordTooShort { record: 7, len: 159 })
        ));
    }

    #[test]
    fn bad_field_reports_columns() {
        let mut rec = CH4_RECORD.to_string();
        rec.replace_range(15..25, " 1.00XE-19");
        match parse_par_record(&rec, 3) {
            Err(LineListError::FieldParse { record: 3, columns: (16, 25), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn iso_letter_codes() {
        let mut rec = CH4_RECORD.to_string();
        rec.replace_range(2..3, "0");
        assert_eq!(parse_par_record(&rec, 1).unwrap().local_iso_id, 10);
        rec.replace_range(2..3, "B");
        assert_eq!(parse_par_record(&rec, 1).unwrap().local_iso_id, 12);
    }

    #[test]
    fn fortran_formats() {
        assert_eq!(fortran_f(0.06, 5, 4).unwrap(), ".0600");
        assert_eq!(fortran_f(0.75, 4, 2).unwrap(), "0.75");
        assert_eq!(fortran_f(-0.005, 8, 6).unwrap(), "-.005000");
        assert_eq!(fortran_e(1e-19, 10, 3).unwrap(), " 1.000E-19");
        assert_eq!(fortran_e(2.5e5, 10, 3).unwrap(), " 2.500E+05");
        assert!(fortran_f(123456.0, 5, 3).is_none());
    }
}
