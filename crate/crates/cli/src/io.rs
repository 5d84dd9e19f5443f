//! CSV ingestion and output.
//!
//! Samples are either a single `theta` column (radians) or `x1..xd` columns.
//! Parsed tables keep the raw field text so that writing a table back out
//! reproduces the input bytes.

use std::fs;
use std::io::Write;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim};
use dirframe::order::{OrderField, Rod};
use dirframe::sphere::INGEST_NORM_TOLERANCE;
use dirframe::{SampleSet, UnitVector};

use crate::error::{data, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Columns {
    Theta,
    Vectors(usize),
}

#[derive(Debug, Clone)]
pub struct SampleTable {
    pub columns: Columns,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub sample: SampleSet,
}

impl SampleTable {
    /// The table exactly as parsed, one line per row.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// Twelve significant digits in scientific notation.
pub fn format_value(x: f64) -> String {
    format!("{x:.11e}")
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::File::create(path)
        .and_then(|mut f| f.write_all(contents.as_bytes()))
        .map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// Comment handling stays out of the csv reader so record line numbers
/// match the file.
struct Records<'a> {
    inner: csv::StringRecordsIntoIter<&'a [u8]>,
}

impl Iterator for Records<'_> {
    type Item = CliResult<StringRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let rec = match self.inner.next()? {
                Ok(r) => r,
                Err(e) => return Some(Err(data(format!("cannot read row: {e}")))),
            };
            if !rec.get(0).is_some_and(|f| f.starts_with('#')) {
                return Some(Ok(rec));
            }
        }
    }
}

fn records(text: &str) -> CliResult<(StringRecord, Records<'_>)> {
    let inner = ReaderBuilder::new()
        .has_headers(false)
        .trim(Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes())
        .into_records();
    let mut recs = Records { inner };
    let header = recs.next().ok_or_else(|| data("missing header row"))??;
    Ok((header, recs))
}

fn line_of(record: &StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn parse_float(field: &str) -> Option<f64> {
    field.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn classify(header: &[String]) -> CliResult<Columns> {
    if header.len() == 1 && header[0] == "theta" {
        return Ok(Columns::Theta);
    }
    let is_vector = header.len() >= 2 && header.iter().enumerate().all(|(i, h)| *h == format!("x{}", i + 1));
    if is_vector {
        Ok(Columns::Vectors(header.len()))
    } else {
        Err(data(format!(
            "unrecognized header '{}': expected 'theta' or 'x1,...,xd'",
            header.join(",")
        )))
    }
}

fn malformed(lines: &[(u64, String)]) -> CliError {
    let list: Vec<String> = lines.iter().map(|(l, _)| l.to_string()).collect();
    let first = &lines[0];
    data(format!(
        "malformed rows at lines {} (line {}: {})",
        list.join(", "),
        first.0,
        first.1
    ))
}

pub fn parse_sample(text: &str, degrees: bool) -> CliResult<SampleTable> {
    let (header, recs) = records(text)?;
    let header: Vec<String> = header.iter().map(str::to_string).collect();
    let columns = classify(&header)?;
    let width = header.len();
    let mut rows = Vec::new();
    let mut points = Vec::new();
    let mut bad = Vec::new();
    for rec in recs {
        let rec = rec?;
        let line = line_of(&rec);
        if rec.len() != width {
            bad.push((line, format!("expected {width} fields, found {}", rec.len())));
            continue;
        }
        let values: Option<Vec<f64>> = rec.iter().map(parse_float).collect();
        let Some(values) = values else {
            bad.push((line, "non-numeric or non-finite value".to_string()));
            continue;
        };
        let point = match columns {
            Columns::Theta => {
                let t = if degrees { values[0].to_radians() } else { values[0] };
                Ok(UnitVector::from_angle(t))
            }
            Columns::Vectors(_) => UnitVector::from_near_unit(values, INGEST_NORM_TOLERANCE),
        };
        match point {
            Ok(p) => {
                points.push(p);
                rows.push(rec.iter().map(str::to_string).collect());
            }
            Err(e) => bad.push((line, e.to_string())),
        }
    }
    if !bad.is_empty() {
        return Err(malformed(&bad));
    }
    if points.is_empty() {
        return Err(data("the sample has no rows"));
    }
    Ok(SampleTable {
        columns,
        header,
        rows,
        sample: SampleSet::new(points)?,
    })
}

pub fn read_sample(path: &Path, degrees: bool) -> CliResult<SampleTable> {
    parse_sample(&read_file(path)?, degrees)
}

/// Serializes a sample as `x1..xd` columns, or as `theta` for planar data.
pub fn sample_csv(sample: &SampleSet, theta: bool, degrees: bool) -> String {
    let mut out = String::new();
    if theta {
        out.push_str("theta\n");
        for p in sample.points() {
            let t = if degrees { p.angle().to_degrees() } else { p.angle() };
            out.push_str(&format_value(t));
            out.push('\n');
        }
    } else {
        let header: Vec<String> = (1..=sample.dim()).map(|i| format!("x{i}")).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for p in sample.points() {
            let row: Vec<String> = p.coords().iter().map(|&c| format_value(c)).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
    }
    out
}

pub fn parse_rods(text: &str, degrees: bool) -> CliResult<Vec<Rod>> {
    let (header, recs) = records(text)?;
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| data(format!("missing column '{name}'")))
    };
    let (ix, iy, it) = (col("x")?, col("y")?, col("theta")?);
    let mut rods = Vec::new();
    let mut bad = Vec::new();
    for rec in recs {
        let rec = rec?;
        let get = |i: usize| rec.get(i).and_then(parse_float);
        match (get(ix), get(iy), get(it)) {
            (Some(x), Some(y), Some(t)) => {
                let t = if degrees { t.to_radians() } else { t };
                rods.push(Rod::new([x, y], t));
            }
            _ => bad.push((line_of(&rec), "missing, non-numeric or non-finite value".to_string())),
        }
    }
    if !bad.is_empty() {
        return Err(malformed(&bad));
    }
    if rods.is_empty() {
        return Err(data("the rod file has no rows"));
    }
    Ok(rods)
}

pub fn read_rods(path: &Path, degrees: bool) -> CliResult<Vec<Rod>> {
    parse_rods(&read_file(path)?, degrees)
}

/// Per-cell table; absent values are empty fields.
pub fn field_csv(field: &OrderField, degrees: bool) -> String {
    let mut out = String::from("cx,cy,lambda,director_angle,count\n");
    let opt = |v: Option<f64>| v.map(format_value).unwrap_or_default();
    for c in &field.cells {
        let angle = c.director_angle.map(|a| if degrees { a.to_degrees() } else { a });
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            format_value(c.center[0]),
            format_value(c.center[1]),
            opt(c.order_parameter),
            opt(angle),
            c.count
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_and_vector_headers() {
        let t = parse_sample("# leading comment\ntheta\n0\n# note\n1.5\n", false).unwrap();
        assert_eq!(t.columns, Columns::Theta);
        assert_eq!(t.sample.len(), 2);
        let v = parse_sample("x1,x2,x3\n1,0,0\n0,0.6,0.8\n", false).unwrap();
        assert_eq!(v.columns, Columns::Vectors(3));
        assert!(parse_sample("a,b\n1,2\n", false).is_err());
        assert!(parse_sample("x2,x1\n1,0\n", false).is_err());
    }

    #[test]
    fn malformed_rows_are_listed() {
        let err = parse_sample("x1,x2\n1,0\nfoo,1\n0,1\n2,0\n", false).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("lines 3, 5"), "{msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn near_unit_rows_are_renormalized() {
        let t = parse_sample("x1,x2\n1.0000001,0\n", false).unwrap();
        assert_eq!(t.sample.points()[0].coords(), &[1.0, 0.0]);
        assert!(parse_sample("x1,x2\n1.1,0\n", false).is_err());
    }

    #[test]
    fn degrees_convert_on_load() {
        let t = parse_sample("theta\n90\n", true).unwrap();
        assert!((t.sample.points()[0].coords()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rods_need_all_columns() {
        let err = parse_rods("x,y\n0,0\n", false).unwrap_err();
        assert!(err.to_string().contains("'theta'"));
        let rods = parse_rods("theta,y,x\n4.0,1,2\n", false).unwrap();
        assert_eq!(rods[0].position(), [2.0, 1.0]);
        assert!((rods[0].orientation() - (4.0 - std::f64::consts::PI)).abs() < 1e-15);
    }

    #[test]
    fn formatting_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 12345.678901234567] {
            let s = format_value(x);
            assert_eq!(format_value(s.parse().unwrap()), s);
        }
    }
}
