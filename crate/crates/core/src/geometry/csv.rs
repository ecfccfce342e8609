//! Instance files: UTF-8 CSV with header `x,y,color`, one point per row in
//! increasing x, color `R` or `B`.

use std::io::{Read, Write};

use super::{Color, ColoredPoint, Instance};
use crate::error::{Error, Result};

/// Fixed-point rendering with 17 significant digits (enough to round-trip any f64).
fn format_coord(v: f64) -> String {
    let magnitude = if v == 0.0 { 0 } else { v.abs().log10().floor() as i32 };
    let decimals = (16 - magnitude).max(1) as usize;
    format!("{v:.decimals$}")
}

pub fn write_instance_csv<W: Write>(inst: &Instance, mut out: W) -> Result<()> {
    writeln!(out, "x,y,color")?;
    for p in inst.points() {
        writeln!(out, "{},{},{}", format_coord(p.x), format_coord(p.y), p.color.letter())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_instance_csv<R: Read>(input: R) -> Result<Instance> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let parse_err = |line: u64, message: String| Error::Parse { line, message };

    let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["x", "y", "color"] {
        return Err(parse_err(
            1,
            format!("expected header `x,y,color`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        ));
    }

    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let coord = |k: usize, name: &str| -> Result<f64> {
            let v: f64 =
                record[k].parse().map_err(|_| parse_err(line, format!("{name} = `{}` is not a number", &record[k])))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(parse_err(line, format!("{name} = {v} outside [0,1]")));
            }
            Ok(v)
        };
        let x = coord(0, "x")?;
        let y = coord(1, "y")?;
        let color = match &record[2] {
            "R" => Color::Red,
            "B" => Color::Blue,
            other => return Err(parse_err(line, format!("color `{other}` is not R or B"))),
        };
        if let Some(prev) = points.last().map(|p: &ColoredPoint| p.x) {
            if x <= prev {
                return Err(parse_err(line, format!("x = {x} does not increase (previous {prev})")));
            }
        }
        points.push(ColoredPoint::new(x, y, color));
    }
    Instance::new(points)
}
