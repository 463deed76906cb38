//! CSV, SVG and JSON writers. Floats are printed in shortest round-trip
//! scientific notation, so identical inputs give identical bytes.

use std::fs;
use std::path::Path;

use lk_core::oracle::ResidualReport;
use lk_core::{CoefficientTable, TailModel, TruncatedSeries};
use serde::Serialize;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub fn num(x: f64) -> String {
    format!("{x:e}")
}

fn with_comments(
    comments: &[String],
    rows: impl FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()>,
) -> Result<String, CliError> {
    let mut buf = Vec::new();
    for c in comments {
        buf.extend_from_slice(b"# ");
        buf.extend_from_slice(c.as_bytes());
        buf.push(b'\n');
    }
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        rows(&mut w).map_err(|e| CliError::Serialize(e.to_string()))?;
        w.flush().map_err(|e| CliError::Serialize(e.to_string()))?;
    }
    String::from_utf8(buf).map_err(|e| CliError::Serialize(e.to_string()))
}

/// Columns `t, Re C, Im C, Re c1, Im c1, …`; the method tag is in the header
/// comment.
pub fn coefficients_csv(table: &CoefficientTable) -> Result<String, CliError> {
    let order = table.order();
    let comments = vec![
        format!("method: {}", table.method().as_str()),
        format!("order: {order}"),
        "f_t(z) = C(t) (z + sum_n c_n(t) z^(n+1))".to_string(),
    ];
    with_comments(&comments, |w| {
        let mut header = vec!["t".to_string(), "Re C".into(), "Im C".into()];
        for n in 1..=order {
            header.push(format!("Re c{n}"));
            header.push(format!("Im c{n}"));
        }
        w.write_record(&header)?;
        for (j, &t) in table.grid().points().iter().enumerate() {
            let c = table.prefactor()[j];
            let mut row = vec![num(t), num(c.re), num(c.im)];
            for n in 1..=order {
                let cn = table.coeff(n, j);
                row.push(num(cn.re));
                row.push(num(cn.im));
            }
            w.write_record(&row)?;
        }
        Ok(())
    })
}

/// Rows `n, Re c_n, Im c_n` with `C` and the tail model in the header.
pub fn series_csv(series: &TruncatedSeries, t: f64) -> Result<String, CliError> {
    let tail = match series.tail {
        TailModel::Exact => "tail: exact".to_string(),
        TailModel::Majorant { omega0t } => format!("tail: majorant omega0t={}", num(omega0t)),
        TailModel::Unknown => "tail: unknown".to_string(),
    };
    let comments = vec![
        format!("t: {}", num(t)),
        format!(
            "C: {} {}",
            num(series.prefactor.re),
            num(series.prefactor.im)
        ),
        tail,
    ];
    with_comments(&comments, |w| {
        w.write_record(["n", "Re c", "Im c"])?;
        for (i, c) in series.coeffs.iter().enumerate() {
            w.write_record([(i + 1).to_string(), num(c.re), num(c.im)])?;
        }
        Ok(())
    })
}

pub fn residual_csv(report: &ResidualReport) -> Result<String, CliError> {
    let comments = vec![
        format!("grid intervals: {}", report.intervals),
        format!("max residual: {}", num(report.max_residual)),
    ];
    with_comments(&comments, |w| {
        w.write_record(["Re z", "Im z", "t", "residual"])?;
        for s in &report.samples {
            w.write_record([num(s.z[0]), num(s.z[1]), num(s.t), num(s.residual)])?;
        }
        Ok(())
    })
}

/// One closed curve per label, drawn in a fixed 512×512 viewport scaled to
/// the largest coordinate.
pub fn polyline_svg(title: &str, curves: &[(String, Vec<[f64; 2]>)]) -> String {
    const SIZE: f64 = 512.0;
    const COLORS: [&str; 6] = [
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
    ];
    let extent = curves
        .iter()
        .flat_map(|(_, pts)| pts.iter())
        .map(|p| p[0].abs().max(p[1].abs()))
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max)
        .max(1e-12)
        * 1.1;
    let map = |p: [f64; 2]| {
        (
            (p[0] / extent + 1.0) * SIZE / 2.0,
            (1.0 - p[1] / extent) * SIZE / 2.0,
        )
    };
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{s}\" height=\"{s}\" viewBox=\"0 0 {s} {s}\">\n",
        s = SIZE
    );
    svg.push_str(&format!("<title>{title}</title>\n"));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<line x1=\"0\" y1=\"{h}\" x2=\"{s}\" y2=\"{h}\" stroke=\"#ccc\"/>\n<line x1=\"{h}\" y1=\"0\" x2=\"{h}\" y2=\"{s}\" stroke=\"#ccc\"/>\n",
        h = SIZE / 2.0,
        s = SIZE
    ));
    for (i, (label, pts)) in curves.iter().enumerate() {
        let mut coords: Vec<String> = pts
            .iter()
            .map(|&p| {
                let (x, y) = map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        if let Some(first) = coords.first().cloned() {
            coords.push(first);
        }
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1\" points=\"{}\"><title>{label}</title></polyline>\n",
            COLORS[i % COLORS.len()],
            coords.join(" ")
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Serialize(e.to_string()))
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(path, e))
}
