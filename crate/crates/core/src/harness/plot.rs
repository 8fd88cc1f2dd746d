//! Scatter of catalogue against estimated thickness, as CSV and standalone SVG.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::eval::EvalReport;
use crate::error::{Error, Result};

const SIZE: f64 = 480.0;
const MARGIN: f64 = 60.0;

/// Paths written by [`emit_scatter`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScatterFiles {
    pub csv: PathBuf,
    pub svg: PathBuf,
}

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// `catalogue_nm,ann_argmax_nm,ann_expect_nm`, one row per record.
pub fn scatter_csv(report: &EvalReport) -> String {
    let mut out = String::from("catalogue_nm,ann_argmax_nm,ann_expect_nm\n");
    for r in &report.records {
        let _ = writeln!(out, "{},{},{}", r.catalogue_nm, r.ann_nm_argmax, r.ann_nm_expect);
    }
    out
}

struct Axes {
    lo: f64,
    hi: f64,
}

impl Axes {
    fn for_report(report: &EvalReport) -> Self {
        let max = report
            .records
            .iter()
            .flat_map(|r| [r.catalogue_nm, r.ann_nm_argmax, r.ann_nm_expect])
            .fold(200.0f64, f64::max);
        Self {
            lo: 0.0,
            hi: (max / 50.0).ceil() * 50.0,
        }
    }

    fn px(&self, v: f64) -> f64 {
        MARGIN + (v - self.lo) / (self.hi - self.lo) * (SIZE - 2.0 * MARGIN)
    }

    fn py(&self, v: f64) -> f64 {
        SIZE - self.px(v)
    }
}

/// SVG scatter with an identity line and the detector noise annotation.
/// Every marker carries its data-space coordinates in `data-catalogue` and
/// `data-ann`.
pub fn scatter_svg(report: &EvalReport) -> String {
    let ax = Axes::for_report(report);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);

    let (x0, x1) = (ax.px(ax.lo), ax.px(ax.hi));
    let (y0, y1) = (ax.py(ax.lo), ax.py(ax.hi));
    let _ = writeln!(s, r#"<g class="axes" stroke="black" fill="none">"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>"#);
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g class="ticks" text-anchor="middle">"#);
    let mut t = ax.lo;
    while t <= ax.hi + 1e-9 {
        let (x, y) = (ax.px(t), ax.py(t));
        let _ = writeln!(s, r#"<line x1="{x}" y1="{y0}" x2="{x}" y2="{}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(s, r#"<text x="{x}" y="{}">{t}</text>"#, y0 + 18.0);
        let _ = writeln!(s, r#"<line x1="{x0}" y1="{y}" x2="{}" y2="{y}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{t}</text>"#, x0 - 8.0, y + 4.0);
        t += 50.0;
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(
        s,
        r#"<line class="identity" x1="{x0}" y1="{y0}" x2="{x1}" y2="{y1}" stroke="gray" stroke-dasharray="4 3"/>"#
    );

    let _ = writeln!(s, r#"<g class="series" data-decoder="argmax" fill="none" stroke="steelblue">"#);
    for r in &report.records {
        let _ = writeln!(
            s,
            r#"<circle class="marker" cx="{:.3}" cy="{:.3}" r="4" data-catalogue="{}" data-ann="{}"/>"#,
            ax.px(r.catalogue_nm),
            ax.py(r.ann_nm_argmax),
            r.catalogue_nm,
            r.ann_nm_argmax
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g class="series" data-decoder="expectation" fill="darkorange">"#);
    for r in &report.records {
        let _ = writeln!(
            s,
            r#"<rect class="marker" x="{:.3}" y="{:.3}" width="5" height="5" data-catalogue="{}" data-ann="{}"/>"#,
            ax.px(r.catalogue_nm) - 2.5,
            ax.py(r.ann_nm_expect) - 2.5,
            r.catalogue_nm,
            r.ann_nm_expect
        );
    }
    let _ = writeln!(s, "</g>");

    let mid = SIZE / 2.0;
    let _ = writeln!(s, r#"<text x="{mid}" y="{}" text-anchor="middle">Catalogue (nm)</text>"#, SIZE - 15.0);
    let _ = writeln!(
        s,
        r#"<text x="18" y="{mid}" text-anchor="middle" transform="rotate(-90 18 {mid})">ANN (nm)</text>"#
    );
    let note = match report.detector {
        Some(d) => format!("σ_noise = {:.4} ({}-bit)", d.noise_figure(), d.bit_depth()),
        None => "noiseless".to_string(),
    };
    let _ = writeln!(s, r#"<text class="annotation" x="{}" y="{}">{note}</text>"#, MARGIN + 10.0, MARGIN);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}">RMS argmax {:.3} nm, expectation {:.3} nm</text>"#,
        MARGIN + 10.0,
        MARGIN + 16.0,
        report.rms_argmax,
        report.rms_expect
    );
    let (lx, ly) = (SIZE - MARGIN - 80.0, SIZE - MARGIN - 30.0);
    let _ = writeln!(
        s,
        r#"<g class="legend"><circle cx="{lx}" cy="{ly}" r="4" fill="none" stroke="steelblue"/><text x="{}" y="{}">argmax</text><rect x="{}" y="{}" width="5" height="5" fill="darkorange"/><text x="{}" y="{}">expectation</text></g>"#,
        lx + 8.0,
        ly + 4.0,
        lx - 2.5,
        ly + 13.5,
        lx + 8.0,
        ly + 20.0,
    );
    s.push_str("</svg>\n");
    s
}

/// Writes `<stem>.csv` and `<stem>.svg`. An empty report writes nothing.
pub fn emit_scatter(report: &EvalReport, stem: impl AsRef<Path>) -> Result<ScatterFiles> {
    if report.records.is_empty() {
        return Err(Error::Empty("scatter of an empty report"));
    }
    let stem = stem.as_ref();
    let files = ScatterFiles {
        csv: with_ext(stem, "csv"),
        svg: with_ext(stem, "svg"),
    };
    fs::write(&files.csv, scatter_csv(report)).map_err(|e| Error::io(&files.csv, e))?;
    fs::write(&files.svg, scatter_svg(report)).map_err(|e| Error::io(&files.svg, e))?;
    Ok(files)
}
