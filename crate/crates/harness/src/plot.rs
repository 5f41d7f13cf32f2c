//! Error-vs-m curves rendered as standalone SVG.
//!
//! Each algorithm becomes one polyline through its per-`m` means. Whiskers
//! span the minimum and maximum over images at that `m`, and each vertex
//! carries a text label with its mean.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    L1,
    L2,
    Linf,
    Measurement,
}

impl Metric {
    pub fn column(self) -> &'static str {
        match self {
            Metric::L1 => "l1_err",
            Metric::L2 => "l2_err",
            Metric::Linf => "linf_err",
            Metric::Measurement => "measurement_err",
        }
    }
}

impl FromStr for Metric {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" | "l1_err" => Ok(Metric::L1),
            "l2" | "l2_err" => Ok(Metric::L2),
            "linf" | "linf_err" => Ok(Metric::Linf),
            "measurement" | "measurement_err" => Ok(Metric::Measurement),
            other => Err(HarnessError::Invalid(format!(
                "unknown metric '{other}' (l1, l2, linf, measurement)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub m: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// Per-algorithm summaries ordered by `m`; algorithms in name order.
pub type Series = BTreeMap<String, Vec<Summary>>;

/// Reads the `algorithm`, `m` and metric columns and aggregates them.
pub fn summarize_csv(path: &Path, metric: Metric) -> Result<Series> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| HarnessError::MissingColumn(name.into()))
    };
    let (ia, im, iv) = (col("algorithm")?, col("m")?, col(metric.column())?);
    let mut groups: BTreeMap<String, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let m: usize = field(im)
            .parse()
            .map_err(|_| HarnessError::Invalid(format!("bad m value '{}'", field(im))))?;
        let v: f64 = field(iv)
            .parse()
            .map_err(|_| HarnessError::Invalid(format!("bad {} value '{}'", metric.column(), field(iv))))?;
        groups.entry(field(ia).to_string()).or_default().entry(m).or_default().push(v);
    }
    if groups.is_empty() {
        return Err(HarnessError::Empty(format!("{} has no rows", path.display())));
    }
    Ok(groups
        .into_iter()
        .map(|(alg, by_m)| {
            let s = by_m
                .into_iter()
                .map(|(m, vals)| Summary {
                    m,
                    mean: vals.iter().sum::<f64>() / vals.len() as f64,
                    min: vals.iter().copied().fold(f64::INFINITY, f64::min),
                    max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    count: vals.len(),
                })
                .collect();
            (alg, s)
        })
        .collect())
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 7] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render_svg(series: &Series, metric: Metric) -> String {
    let all = series.values().flatten();
    let (m_lo, m_hi) = all.clone().fold((usize::MAX, 0), |(lo, hi), s| (lo.min(s.m), hi.max(s.m)));
    let y_hi = all.clone().map(|s| s.max).fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
    let sx = |m: usize| {
        if m_hi == m_lo {
            WIDTH / 2.0
        } else {
            MARGIN + (m - m_lo) as f64 / (m_hi - m_lo) as f64 * (WIDTH - 2.0 * MARGIN)
        }
    };
    let sy = |v: f64| HEIGHT - MARGIN - v / y_hi * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    let _ = writeln!(svg, r#"<line class="axis" x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(svg, r#"<line class="axis" x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">m (measurements)</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">mean {}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        metric.column()
    );
    let _ = writeln!(svg, r#"<text x="{x0}" y="{}" text-anchor="middle">{m_lo}</text>"#, y0 + 18.0);
    if m_hi != m_lo {
        let _ = writeln!(svg, r#"<text x="{x1}" y="{}" text-anchor="middle">{m_hi}</text>"#, y0 + 18.0);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{y1}" text-anchor="end">{y_hi:.3}</text>"#, x0 - 4.0);

    for (k, (alg, points)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let name = escape(alg);
        let _ = writeln!(svg, r#"<g class="series" data-algorithm="{name}">"#);
        let coords: Vec<String> = points.iter().map(|s| format!("{:.2},{:.2}", sx(s.m), sy(s.mean))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            coords.join(" ")
        );
        for s in points {
            let (x, y) = (sx(s.m), sy(s.mean));
            let _ = writeln!(
                svg,
                r#"<line class="whisker" x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}"/>"#,
                sy(s.min),
                sy(s.max)
            );
            let _ = writeln!(svg, r#"<circle class="point" cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#);
            // The data attributes carry full precision; the visible label is rounded.
            let _ = writeln!(
                svg,
                r#"<text class="mean" data-algorithm="{name}" data-m="{}" data-mean="{:?}" data-min="{:?}" data-max="{:?}" data-count="{}" x="{:.2}" y="{:.2}" font-size="10">{:.4}</text>"#,
                s.m,
                s.mean,
                s.min,
                s.max,
                s.count,
                x + 5.0,
                y - 5.0,
                s.mean
            );
        }
        let _ = writeln!(svg, "</g>");
        let ly = MARGIN + 16.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<text class="legend" x="{}" y="{ly}" fill="{color}">{name}</text>"#,
            WIDTH - MARGIN - 120.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn plot(csv_path: &Path, metric: Metric, out_svg: &Path) -> Result<Series> {
    let series = summarize_csv(csv_path, metric)?;
    std::fs::write(out_svg, render_svg(&series, metric))?;
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn single_row_gives_one_marker() {
        let dir = tempfile::tempdir().unwrap();
        let csv = write(dir.path(), "a.csv", "algorithm,m,l2_err\nlasso,50,0.3\n");
        let svg = dir.path().join("a.svg");
        plot(&csv, Metric::L2, &svg).unwrap();
        let text = std::fs::read_to_string(svg).unwrap();
        assert_eq!(text.matches("<circle").count(), 1);
        assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn missing_column_and_empty_data() {
        let dir = tempfile::tempdir().unwrap();
        let csv = write(dir.path(), "a.csv", "algorithm,m\nlasso,50\n");
        assert!(matches!(summarize_csv(&csv, Metric::L2), Err(HarnessError::MissingColumn(c)) if c == "l2_err"));
        let empty = write(dir.path(), "b.csv", "algorithm,m,l2_err\n");
        assert!(matches!(summarize_csv(&empty, Metric::L2), Err(HarnessError::Empty(_))));
    }

    #[test]
    fn metric_names() {
        assert_eq!("linf".parse::<Metric>().unwrap().column(), "linf_err");
        assert!("l3".parse::<Metric>().is_err());
    }
}
