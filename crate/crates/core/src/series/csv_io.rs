//! CSV reading and writing for series and station panels.
//!
//! Layout: a header row `date,<col1>,...`, ISO dates (`YYYY-MM-DD` for daily
//! data, `YYYY-MM-DDTHH:MM` for sub-daily), `.` decimal point, LF endings.
//! Missing values are read from `NA` or an empty field and written as `NA`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};

use super::{StationPanel, Step, TimeSeries};
use crate::error::{Error, Result};
use crate::scalar::Real;

const DAY_FMT: &str = "%Y-%m-%d";
const STAMP_FMT: &str = "%Y-%m-%dT%H:%M";

fn parse_stamp(field: &str) -> Result<(NaiveDateTime, bool)> {
    let field = field.trim();
    if let Ok(d) = NaiveDate::parse_from_str(field, DAY_FMT) {
        return Ok((d.and_hms_opt(0, 0, 0).expect("midnight"), true));
    }
    NaiveDateTime::parse_from_str(field, STAMP_FMT)
        .map(|t| (t, false))
        .map_err(|_| Error::Csv(format!("unparseable date '{field}'")))
}

fn parse_value<T: Real>(field: &str, line: usize) -> Result<Option<T>> {
    let field = field.trim();
    if field.is_empty() || field == "NA" {
        return Ok(None);
    }
    let x: f64 = field
        .parse()
        .map_err(|_| Error::Csv(format!("line {line}: bad number '{field}'")))?;
    if !x.is_finite() {
        return Err(Error::Csv(format!("line {line}: non-finite value '{field}'")));
    }
    Ok(Some(T::lit(x)))
}

fn format_stamp(t: NaiveDateTime, step: Step) -> String {
    match step {
        Step::Daily => t.format(DAY_FMT).to_string(),
        _ => t.format(STAMP_FMT).to_string(),
    }
}

fn format_value<T: Real>(v: Option<T>) -> String {
    match v {
        Some(x) => format!("{}", x.as_f64()),
        None => "NA".to_string(),
    }
}

struct Table<T> {
    headers: Vec<String>,
    start: NaiveDateTime,
    step: Step,
    columns: Vec<Vec<Option<T>>>,
}

fn read_table<T: Real, R: Read>(reader: R) -> Result<Table<T>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if headers.len() < 2 {
        return Err(Error::Csv("expected a date column and at least one value column".into()));
    }
    let ncol = headers.len() - 1;
    let mut stamps = Vec::new();
    let mut daily_format = true;
    let mut columns: Vec<Vec<Option<T>>> = vec![Vec::new(); ncol];
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != headers.len() {
            return Err(Error::Csv(format!("line {line}: expected {} fields", headers.len())));
        }
        let (t, is_day) = parse_stamp(&rec[0])?;
        daily_format &= is_day;
        stamps.push(t);
        for j in 0..ncol {
            columns[j].push(parse_value(&rec[j + 1], line)?);
        }
    }
    let start = *stamps
        .first()
        .ok_or_else(|| Error::Csv("no data rows".into()))?;
    let step = if daily_format {
        Step::Daily
    } else if stamps.len() >= 2 {
        let m = (stamps[1] - stamps[0]).num_minutes();
        Step::from_minutes(m)
            .ok_or_else(|| Error::Csv(format!("unsupported sampling interval of {m} minutes")))?
    } else {
        return Err(Error::Csv("cannot infer sub-daily step from a single row".into()));
    };
    for w in stamps.windows(2) {
        if (w[1] - w[0]).num_minutes() != step.minutes() {
            return Err(Error::Csv(format!("irregular timestamps at {}", w[1])));
        }
    }
    Ok(Table {
        headers,
        start,
        step,
        columns,
    })
}

/// Reads a `date,value` CSV.
pub fn read_series_from<T: Real, R: Read>(reader: R, name: &str) -> Result<TimeSeries<T>> {
    let table = read_table::<T, R>(reader)?;
    if table.columns.len() != 1 {
        return Err(Error::Csv(format!(
            "expected one value column, found {}",
            table.columns.len()
        )));
    }
    let values = table.columns.into_iter().next().expect("one column");
    TimeSeries::new(name, table.start, table.step, values)
}

pub fn read_series<T: Real>(path: impl AsRef<Path>) -> Result<TimeSeries<T>> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_series_from(BufReader::new(File::open(path)?), &name)
}

/// Reads a `date,station1,...,stationK` CSV.
pub fn read_panel_from<T: Real, R: Read>(reader: R) -> Result<StationPanel<T>> {
    let table = read_table::<T, R>(reader)?;
    let series = table
        .columns
        .into_iter()
        .zip(&table.headers[1..])
        .map(|(values, name)| TimeSeries::new(name.clone(), table.start, table.step, values))
        .collect::<Result<Vec<_>>>()?;
    StationPanel::new(series)
}

pub fn read_panel<T: Real>(path: impl AsRef<Path>) -> Result<StationPanel<T>> {
    read_panel_from(BufReader::new(File::open(path)?))
}

pub fn write_series_to<T: Real, W: Write>(mut w: W, s: &TimeSeries<T>) -> Result<()> {
    writeln!(w, "date,value")?;
    for (i, v) in s.values().iter().enumerate() {
        writeln!(w, "{},{}", format_stamp(s.timestamp(i), s.step()), format_value(*v))?;
    }
    Ok(())
}

pub fn write_series<T: Real>(path: impl AsRef<Path>, s: &TimeSeries<T>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_series_to(&mut w, s)?;
    w.flush()?;
    Ok(())
}

pub fn write_panel_to<T: Real, W: Write>(w: W, p: &StationPanel<T>) -> Result<()> {
    let columns: Vec<(&str, Vec<Option<T>>)> = p
        .series()
        .iter()
        .map(|s| (s.name(), s.values().to_vec()))
        .collect();
    write_columns(w, p.start(), p.step(), &columns)
}

pub fn write_panel<T: Real>(path: impl AsRef<Path>, p: &StationPanel<T>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_panel_to(&mut w, p)?;
    w.flush()?;
    Ok(())
}

/// Writes complete columns on the calendar of `calendar`.
pub fn write_table_to<T: Real, W: Write, S: AsRef<str>>(
    w: W,
    calendar: &TimeSeries<T>,
    columns: &[(S, Vec<T>)],
) -> Result<()> {
    let columns: Vec<(&str, Vec<Option<T>>)> = columns
        .iter()
        .map(|(n, v)| (n.as_ref(), v.iter().copied().map(Some).collect()))
        .collect();
    if let Some((name, c)) = columns.iter().find(|(_, c)| c.len() != calendar.len()) {
        return Err(Error::InvalidArgument(format!(
            "column '{name}' has length {} but calendar has {}",
            c.len(),
            calendar.len()
        )));
    }
    write_columns(w, calendar.start(), calendar.step(), &columns)
}

pub fn write_table<T: Real, S: AsRef<str>>(
    path: impl AsRef<Path>,
    calendar: &TimeSeries<T>,
    columns: &[(S, Vec<T>)],
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_table_to(&mut w, calendar, columns)?;
    w.flush()?;
    Ok(())
}

fn write_columns<T: Real, W: Write>(
    mut w: W,
    start: NaiveDateTime,
    step: Step,
    columns: &[(&str, Vec<Option<T>>)],
) -> Result<()> {
    let names: Vec<&str> = columns.iter().map(|c| c.0).collect();
    writeln!(w, "date,{}", names.join(","))?;
    let n = columns.first().map_or(0, |c| c.1.len());
    for t in 0..n {
        let stamp = start + step.duration() * t as i32;
        let fields: Vec<String> = columns.iter().map(|c| format_value(c.1[t])).collect();
        writeln!(w, "{},{}", format_stamp(stamp, step), fields.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_missing_tokens_and_writes_na() {
        let text = "date,value\n2000-06-01,1.5\n2000-06-02,NA\n2000-06-03,\n2000-06-04,4\n";
        let s: TimeSeries<f64> = read_series_from(text.as_bytes(), "pm").unwrap();
        assert_eq!(s.step(), Step::Daily);
        assert_eq!(s.values(), &[Some(1.5), None, None, Some(4.0)]);
        let mut out = Vec::new();
        write_series_to(&mut out, &s).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "date,value\n2000-06-01,1.5\n2000-06-02,NA\n2000-06-03,NA\n2000-06-04,4\n"
        );
    }

    #[test]
    fn panel_with_sub_daily_step() {
        let text = "date,a,b\n2000-06-01T00:00,1,2\n2000-06-01T02:00,NA,3\n2000-06-01T04:00,5,\n";
        let p: StationPanel<f64> = read_panel_from(text.as_bytes()).unwrap();
        assert_eq!(p.step(), Step::BiHourly);
        assert_eq!(p.station_ids(), &["a".to_string(), "b".to_string()]);
        assert_eq!(p.row(2), vec![Some(5.0), None]);
        let mut out = Vec::new();
        write_panel_to(&mut out, &p).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "date,a,b\n2000-06-01T00:00,1,2\n2000-06-01T02:00,NA,3\n2000-06-01T04:00,5,NA\n"
        );
    }

    #[test]
    fn rejects_irregular_and_garbage() {
        let gap = "date,value\n2000-06-01,1\n2000-06-03,2\n";
        assert!(read_series_from::<f64, _>(gap.as_bytes(), "x").is_err());
        let bad = "date,value\n2000-06-01,abc\n";
        assert!(read_series_from::<f64, _>(bad.as_bytes(), "x").is_err());
        let two = "date,a,b\n2000-06-01,1,2\n";
        assert!(read_series_from::<f64, _>(two.as_bytes(), "x").is_err());
    }
}
