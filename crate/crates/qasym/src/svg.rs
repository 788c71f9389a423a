//! Spectrum plots: a single self-contained SVG with the eigenvalues marked
//! in the complex plane, the peripheral region guide (unit circle for maps,
//! imaginary axis for generators), and the gap annotation. Output is
//! byte-deterministic for identical inputs — coordinates are formatted with
//! a fixed precision and no timestamps or random ids are embedded.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::report::{AnalysisReport, ReportBody, SpectrumSummary};

const SIZE: f64 = 420.0;
const MARGIN: f64 = 30.0;

/// Which guide curve separates peripheral from bulk eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guide {
    UnitCircle,
    ImaginaryAxis,
}

fn close_to(z: [f64; 2], set: &[[f64; 2]]) -> bool {
    set.iter()
        .any(|w| (z[0] - w[0]).abs() + (z[1] - w[1]).abs() < 1e-12)
}

/// Render a classified spectrum. Peripheral eigenvalues are drawn as filled
/// markers, bulk eigenvalues hollow.
pub fn spectrum_svg(spectrum: &SpectrumSummary, guide: Guide) -> String {
    // Plot range: symmetric box covering every eigenvalue and the guide.
    let mut extent = 1.1f64;
    for z in &spectrum.eigenvalues {
        extent = extent.max(z[0].abs() * 1.1).max(z[1].abs() * 1.1);
    }
    let scale = (SIZE / 2.0 - MARGIN) / extent;
    let cx = SIZE / 2.0;
    let cy = SIZE / 2.0;
    let px = |re: f64| cx + re * scale;
    let py = |im: f64| cy - im * scale;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    // Axes.
    let _ = writeln!(
        s,
        r##"<line x1="0" y1="{cy:.3}" x2="{SIZE}" y2="{cy:.3}" stroke="#cccccc" stroke-width="1"/>"##
    );
    let _ = writeln!(
        s,
        r##"<line x1="{cx:.3}" y1="0" x2="{cx:.3}" y2="{SIZE}" stroke="#cccccc" stroke-width="1"/>"##
    );
    match guide {
        Guide::UnitCircle => {
            let _ = writeln!(
                s,
                r##"<circle cx="{cx:.3}" cy="{cy:.3}" r="{:.3}" fill="none" stroke="#888888" stroke-width="1" stroke-dasharray="4 3"/>"##,
                scale
            );
        }
        Guide::ImaginaryAxis => {
            let _ = writeln!(
                s,
                r##"<line x1="{cx:.3}" y1="0" x2="{cx:.3}" y2="{SIZE}" stroke="#888888" stroke-width="2" stroke-dasharray="4 3"/>"##
            );
        }
    }
    for z in &spectrum.eigenvalues {
        let peripheral = close_to(*z, &spectrum.peripheral);
        let (fill, stroke) = if peripheral {
            ("#c0392b", "#c0392b")
        } else {
            ("none", "#2980b9")
        };
        let _ = writeln!(
            s,
            r#"<circle cx="{:.3}" cy="{:.3}" r="5" fill="{fill}" stroke="{stroke}" stroke-width="1.5"/>"#,
            px(z[0]),
            py(z[1])
        );
    }
    let _ = writeln!(
        s,
        r##"<text x="{MARGIN:.3}" y="{:.3}" font-family="monospace" font-size="13" fill="#333333">gap = {:.6}</text>"##,
        SIZE - 10.0,
        spectrum.gap
    );
    let _ = writeln!(s, "</svg>");
    s
}

/// Render the spectrum of an analysis report to a file; the guide curve
/// follows the instance kind.
pub fn render_spectrum_svg(report: &AnalysisReport, path: &Path) -> Result<()> {
    let (spectrum, guide) = match &report.body {
        ReportBody::Channel(c) => (&c.spectrum, Guide::UnitCircle),
        ReportBody::Generator(g) => (&g.spectrum, Guide::ImaginaryAxis),
        ReportBody::Pukanszky(_) => {
            return Err(Error::InvalidInput(
                "truncation reports carry no spectrum figure".into(),
            ))
        }
    };
    std::fs::write(path, spectrum_svg(spectrum, guide))
        .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
}
