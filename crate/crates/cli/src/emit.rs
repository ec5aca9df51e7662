//! File emission: time-series CSV/JSON, result and fit JSON, a minimal SVG
//! line plot, and the run manifest. All numbers go out with 17 significant
//! digits so a re-parse recovers every f64 bit for bit.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ctqw::TimeSeries;
use serde_json::{json, Value};

pub const SERIES_HEADER: &str = "t,p_gamma,p_ball,delta,norm_sq";

/// 17 significant digits: enough to round-trip any finite f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Quotes a CSV field when it contains a delimiter, quote, or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_series_csv(path: &Path, series: &TimeSeries) -> Result<()> {
    let mut out = String::with_capacity(series.len() * 120 + 64);
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for i in 0..series.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(series.t[i]),
            fmt_f64(series.p_gamma[i]),
            fmt_f64(series.p_ball[i]),
            fmt_f64(series.delta[i]),
            fmt_f64(series.norm_sq[i]),
        );
    }
    write_file(path, &out)
}

pub fn series_json(series: &TimeSeries) -> Value {
    json!({
        "t": series.t,
        "p_gamma": series.p_gamma,
        "p_ball": series.p_ball,
        "delta": series.delta,
        "norm_sq": series.norm_sq,
    })
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).context("serialize json")?;
    text.push('\n');
    write_file(path, &text)
}

/// Bare-bones line plot: white canvas, two axes, one polyline, range labels.
pub fn write_svg(path: &Path, xs: &[f64], ys: &[f64], x_label: &str, y_label: &str) -> Result<()> {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const ML: f64 = 60.0; // left margin
    const MR: f64 = 20.0;
    const MT: f64 = 20.0;
    const MB: f64 = 40.0;

    let (x_lo, x_hi) = span(xs);
    let (y_lo, y_hi) = span(ys);
    let sx = |x: f64| ML + (x - x_lo) / (x_hi - x_lo).max(f64::MIN_POSITIVE) * (W - ML - MR);
    let sy = |y: f64| H - MB - (y - y_lo) / (y_hi - y_lo).max(f64::MIN_POSITIVE) * (H - MT - MB);

    let mut points = String::new();
    for (x, y) in xs.iter().zip(ys) {
        let _ = write!(points, "{:.2},{:.2} ", sx(*x), sy(*y));
    }

    let svg = format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" ",
            "viewBox=\"0 0 640 400\">\n",
            "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n",
            "<line x1=\"{ml}\" y1=\"{yb}\" x2=\"{xr}\" y2=\"{yb}\" stroke=\"black\"/>\n",
            "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{yb}\" stroke=\"black\"/>\n",
            "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"{points}\"/>\n",
            "<text x=\"{ml}\" y=\"{ybl}\" font-size=\"12\">{xlo:.4}</text>\n",
            "<text x=\"{xr}\" y=\"{ybl}\" font-size=\"12\" text-anchor=\"end\">{xhi:.4}</text>\n",
            "<text x=\"{mll}\" y=\"{yb}\" font-size=\"12\" text-anchor=\"end\">{ylo:.4}</text>\n",
            "<text x=\"{mll}\" y=\"{mtt}\" font-size=\"12\" text-anchor=\"end\">{yhi:.4}</text>\n",
            "<text x=\"{xc}\" y=\"{ybl2}\" font-size=\"13\" text-anchor=\"middle\">{xl}</text>\n",
            "<text x=\"14\" y=\"{yc}\" font-size=\"13\" transform=\"rotate(-90 14 {yc})\" ",
            "text-anchor=\"middle\">{yl}</text>\n",
            "</svg>\n"
        ),
        ml = ML,
        mll = ML - 6.0,
        mt = MT,
        mtt = MT + 10.0,
        xr = W - MR,
        yb = H - MB,
        ybl = H - MB + 16.0,
        ybl2 = H - 8.0,
        xc = (ML + W - MR) / 2.0,
        yc = (MT + H - MB) / 2.0,
        xlo = x_lo,
        xhi = x_hi,
        ylo = y_lo,
        yhi = y_hi,
        xl = x_label,
        yl = y_label,
        points = points.trim_end(),
    );
    write_file(path, &svg)
}

fn span(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo.is_finite() && hi.is_finite() && lo < hi {
        (lo, hi)
    } else if lo.is_finite() {
        (lo, lo + 1.0)
    } else {
        (0.0, 1.0)
    }
}

/// Accumulates emitted files; `finish` writes the manifest naming all of
/// them (itself included) so no output is ever orphaned.
pub struct Emitter {
    dir: PathBuf,
    files: Vec<String>,
    started: std::time::Instant,
}

impl Emitter {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Emitter {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            started: std::time::Instant::now(),
        })
    }

    pub fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    pub fn finish(mut self, command: &str, config: Value) -> Result<PathBuf> {
        let path = self.path("manifest.json");
        let manifest = json!({
            "command": command,
            "config": config,
            "tool_version": env!("CARGO_PKG_VERSION"),
            "wall_time_seconds": self.started.elapsed().as_secs_f64(),
            "outputs": self.files,
        });
        write_json(&path, &manifest)?;
        Ok(path)
    }
}
