//! Instance files end to end: write a channel instance as JSON (complex
//! entries as [re, im] pairs, matrices row-major), parse and validate it,
//! run the analysis pipeline, serialize the report, and render the spectrum
//! figure. The report round-trips byte-identically through its own JSON.

use qasym::instance::{parse_instance, InstanceSpec};
use qasym::op::{Operator, Picture, Tolerances};
use qasym::report::{run_analysis, AnalysisReport, ReportBody};
use qasym::svg::render_spectrum_svg;

fn main() -> qasym::error::Result<()> {
    let tol = Tolerances::default();
    let dir = std::env::temp_dir().join("qasym-instance-demo");
    std::fs::create_dir_all(&dir).ok();

    // Dephasing channel Φ(X) = 0.75 X + 0.25 ZXZ as an instance file.
    let kraus = vec![
        Operator::identity(2).scale_re(0.75f64.sqrt()),
        Operator::pauli_z().scale_re(0.25f64.sqrt()),
    ];
    let spec = InstanceSpec::channel_from_kraus(&kraus, Picture::Heisenberg, Some(1));
    let path = dir.join("dephasing.json");
    std::fs::write(&path, serde_json::to_string_pretty(&spec).unwrap()).unwrap();
    println!("wrote {}", path.display());

    let parsed = parse_instance(&path)?;
    let report = run_analysis(&parsed, &tol)?;
    let ReportBody::Channel(c) = &report.body else { unreachable!() };
    println!("gap {}, dim Attr {}, faithful {}, consistent {}",
        c.spectrum.gap, c.attr.dim, c.faithful, report.consistent);

    let json = report.to_json()?;
    let back: AnalysisReport = serde_json::from_str(&json).unwrap();
    println!("report round-trips byte-identically: {}", back.to_json()? == json);

    let svg_path = dir.join("dephasing-spectrum.svg");
    render_spectrum_svg(&report, &svg_path)?;
    println!("wrote {}", svg_path.display());
    Ok(())
}
