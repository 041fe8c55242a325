//! CSV tables and SVG line charts for sweep results.
//!
//! CSV columns, in order:
//! `value,mode,avg_cost,congestion_ratio,avg_hub_users,std_hub_users,n_p,ne_best,ne_worst`.
//! UTF-8, LF line endings, `.` as decimal point. The NE columns are empty
//! when the sweep ran without the equilibrium baseline.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::sim::AgentMode;
use crate::sweep::{OptimalLambda, SweepRow};

pub const CSV_HEADER: &str = "value,mode,avg_cost,congestion_ratio,avg_hub_users,std_hub_users,n_p,ne_best,ne_worst";

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    let mut w = csv_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::InconsistentLengths(format!(
            "unexpected CSV header `{}`",
            header.join(",")
        )));
    }
    Ok(r.deserialize().collect::<std::result::Result<Vec<SweepRow>, _>>()?)
}

/// Writes `rows` to `path`. Nothing is created when `rows` is empty.
pub fn write_csv_file(rows: &[SweepRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

/// `capacity_ratio,capacity,optimal_lambda,avg_cost`.
pub fn write_optimal_lambda_csv<W: Write>(table: &[OptimalLambda], out: W) -> Result<()> {
    if table.is_empty() {
        return Err(Error::EmptyRows);
    }
    let mut w = csv_writer(out);
    w.write_record(["capacity_ratio", "capacity", "optimal_lambda", "avg_cost"])?;
    for t in table {
        w.write_record([
            t.capacity_ratio.to_string(),
            t.capacity.to_string(),
            t.lambda.to_string(),
            t.avg_cost.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    AvgCost,
    CongestionRatio,
    AvgHubUsers,
    StdHubUsers,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::AvgCost,
        Metric::CongestionRatio,
        Metric::AvgHubUsers,
        Metric::StdHubUsers,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Metric::AvgCost => "avg_cost",
            Metric::CongestionRatio => "congestion_ratio",
            Metric::AvgHubUsers => "avg_hub_users",
            Metric::StdHubUsers => "std_hub_users",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Metric::AvgCost => "Average cost",
            Metric::CongestionRatio => "Congestion ratio",
            Metric::AvgHubUsers => "Number of hub users",
            Metric::StdHubUsers => "Standard deviation of hub users",
        }
    }

    fn of(self, row: &SweepRow) -> f64 {
        match self {
            Metric::AvgCost => row.avg_cost,
            Metric::CongestionRatio => row.congestion_ratio,
            Metric::AvgHubUsers => row.avg_hub_users,
            Metric::StdHubUsers => row.std_hub_users,
        }
    }
}

struct Series {
    label: String,
    color: &'static str,
    dashed: bool,
    points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn series_for(rows: &[SweepRow], metric: Metric) -> Vec<Series> {
    let mut modes: Vec<AgentMode> = Vec::new();
    for r in rows {
        if !modes.contains(&r.mode) {
            modes.push(r.mode);
        }
    }
    let mut out: Vec<Series> = modes
        .iter()
        .enumerate()
        .map(|(i, &mode)| Series {
            label: mode.to_string(),
            color: PALETTE[i % PALETTE.len()],
            dashed: false,
            points: rows
                .iter()
                .filter(|r| r.mode == mode)
                .map(|r| (r.value, metric.of(r)))
                .collect(),
        })
        .collect();

    // Reference curves taken from the first mode's rows: the NE costs and
    // the potential-user count do not depend on the agents' policy.
    let first: Vec<&SweepRow> = rows.iter().filter(|r| Some(&r.mode) == modes.first()).collect();
    let mut reference = |label: &str, color, f: &dyn Fn(&SweepRow) -> Option<f64>| {
        let points: Vec<(f64, f64)> = first.iter().filter_map(|r| f(r).map(|y| (r.value, y))).collect();
        if !points.is_empty() {
            out.push(Series {
                label: label.to_string(),
                color,
                dashed: true,
                points,
            });
        }
    };
    match metric {
        Metric::AvgCost => {
            reference("NE best", "#555555", &|r| r.ne_best);
            reference("NE worst", "#999999", &|r| r.ne_worst);
        }
        Metric::AvgHubUsers => reference("potential users", "#7f3fbf", &|r| Some(r.n_p)),
        _ => {}
    }
    out
}

fn nice_ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let span = (hi - lo).max(f64::EPSILON);
    let raw = span / count as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| span / s <= count as f64)
        .unwrap_or(10.0 * mag);
    let start = (lo / step).ceil() * step;
    (0..)
        .map(|i| start + i as f64 * step)
        .take_while(|t| *t <= hi + step * 1e-9)
        .collect()
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One line chart: the sweep variable on x, `metric` on y, one polyline per
/// agent mode plus dashed reference curves.
pub fn render_svg(rows: &[SweepRow], metric: Metric, x_label: &str) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    let series = series_for(rows, metric);
    let finite = |v: &f64| v.is_finite();
    let xs: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.0))
        .filter(finite)
        .collect();
    let ys: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .filter(finite)
        .collect();
    let (mut x0, mut x1) = bounds(&xs);
    let (mut y0, mut y1) = bounds(&ys);
    if x0 == x1 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    let pad = if y1 > y0 { 0.05 * (y1 - y0) } else { 1.0 };
    y0 = if y0 >= 0.0 { (y0 - pad).max(0.0) } else { y0 - pad };
    y1 += pad;

    let (width, height) = (720.0, 440.0);
    let (left, right, top, bottom) = (70.0, 160.0, 40.0, 55.0);
    let plot_w = width - left - right;
    let plot_h = height - top - bottom;
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| top + plot_h - (y - y0) / (y1 - y0) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        left + plot_w / 2.0,
        escape(metric.title())
    );
    for t in nice_ticks(x0, x1, 8) {
        let x = sx(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{top}" x2="{x:.2}" y2="{:.2}" stroke="#eeeeee"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            top + plot_h,
            top + plot_h + 16.0,
            fmt_tick(t)
        );
    }
    for t in nice_ticks(y0, y1, 6) {
        let y = sy(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{left}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#eeeeee"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            left + plot_w,
            left - 6.0,
            y + 4.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        left + plot_w / 2.0,
        height - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        top + plot_h / 2.0,
        escape(metric.key())
    );

    for (i, s) in series.iter().enumerate() {
        let points: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.6"{dash} points="{}"/>"#,
            s.color,
            points.join(" ")
        );
        if points.len() == 1 {
            let (x, y) = points[0].split_once(',').unwrap_or(("0", "0"));
            let _ = writeln!(svg, r#"<circle cx="{x}" cy="{y}" r="3" fill="{}"/>"#, s.color);
        }
        let ly = top + 10.0 + 18.0 * i as f64;
        let lx = left + plot_w + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="2"{dash}/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 22.0,
            s.color,
            lx + 28.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo.is_finite() && hi.is_finite() {
        (lo, hi)
    } else {
        (0.0, 1.0)
    }
}

/// Writes `<stem>_<metric>.svg` for every metric into `dir`.
pub fn write_svg_files(rows: &[SweepRow], dir: &Path, stem: &str, x_label: &str) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    Metric::ALL
        .iter()
        .map(|&metric| {
            let path = dir.join(format!("{stem}_{}.svg", metric.key()));
            fs::write(&path, render_svg(rows, metric, x_label)?)?;
            Ok(path)
        })
        .collect()
}
