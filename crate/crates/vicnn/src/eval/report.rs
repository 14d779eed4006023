//! CSV and SVG artifacts. Floats are written with Rust's shortest
//! round-trip formatting so a re-parse reproduces the exact bits.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::eval::EffectRow;
use crate::stimuli::Stimulus;
use crate::tensor::Tensor;

pub const CSV_HEADER: &str = "model,stimulus,colored,scale,kernel,channel,effect,expected,verdict,tau";

pub fn effect_csv(rows: &[EffectRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let kernel = r.kernel.map_or(String::new(), |k| k.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.model,
            r.stimulus,
            r.colored,
            r.scale,
            kernel,
            r.channel,
            r.effect,
            r.expected,
            r.verdict.name(),
            r.tau
        );
    }
    out
}

pub fn write_effect_csv(rows: &[EffectRow], path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, effect_csv(rows))?;
    Ok(())
}

/// Luminance profile along the first probe row of `stim`, for the input
/// image and a model output, as an SVG polyline plot. Target-mask spans on
/// the probe row are shaded.
pub fn profile_svg(stim: &Stimulus, output: &Tensor<f32>, title: &str) -> Result<String> {
    let probe = stim.probes.first().copied().unwrap_or(crate::stimuli::Probe {
        row: stim.image.height / 2,
        x0: 0,
        x1: stim.image.width - 1,
    });
    let input_gray = crate::stimuli::to_grayscale(&stim.image)?;
    let output_gray = crate::stimuli::to_grayscale(output)?;

    const W: f64 = 640.0;
    const H: f64 = 360.0;
    const ML: f64 = 50.0;
    const MR: f64 = 15.0;
    const MT: f64 = 30.0;
    const MB: f64 = 35.0;
    let plot_w = W - ML - MR;
    let plot_h = H - MT - MB;

    let xs: Vec<usize> = (probe.x0..=probe.x1).collect();
    let series = |t: &Tensor<f32>| -> Vec<f64> {
        xs.iter().map(|&x| t.get(0, probe.row, x) as f64).collect()
    };
    let inp = series(&input_gray);
    let out = series(&output_gray);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in inp.iter().chain(&out) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let pad = ((hi - lo) * 0.05).max(1e-3);
    let (lo, hi) = (lo - pad, hi + pad);

    let px = |x: usize| ML + (x - probe.x0) as f64 / (probe.x1 - probe.x0).max(1) as f64 * plot_w;
    let py = |v: f64| MT + (hi - v) / (hi - lo) * plot_h;
    let polyline = |vals: &[f64]| {
        let mut pts = String::new();
        for (&x, &v) in xs.iter().zip(vals) {
            let _ = write!(pts, "{:.2},{:.2} ", px(x), py(v));
        }
        pts.trim_end().to_string()
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{ML}" y="18">{}</text>"#, xml_escape(title));

    // shaded target spans on the probe row
    let w = stim.image.width;
    for (mask, color) in [(&stim.mask_a, "#fde2c8"), (&stim.mask_b, "#cfe3f7")] {
        let mut x = probe.x0;
        while x <= probe.x1 {
            if mask[probe.row * w + x] {
                let start = x;
                while x <= probe.x1 && mask[probe.row * w + x] {
                    x += 1;
                }
                let _ = writeln!(
                    svg,
                    r#"<rect x="{:.2}" y="{MT}" width="{:.2}" height="{plot_h:.2}" fill="{color}"/>"#,
                    px(start),
                    px(x - 1) - px(start) + plot_w / xs.len() as f64,
                );
            } else {
                x += 1;
            }
        }
    }

    let _ = writeln!(
        svg,
        r##"<rect x="{ML}" y="{MT}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="#888"/>"##
    );
    for (frac, label) in [(0.0, hi), (0.5, (lo + hi) / 2.0), (1.0, lo)] {
        let y = MT + frac * plot_h;
        let _ = writeln!(
            svg,
            r#"<text x="6" y="{:.2}">{label:.3}</text>"#,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}">x (probe row {})</text>"#,
        ML + plot_w / 2.0 - 40.0,
        H - 10.0,
        probe.row
    );
    let _ = writeln!(
        svg,
        r##"<polyline points="{}" fill="none" stroke="#999" stroke-dasharray="4 3"/>"##,
        polyline(&inp)
    );
    let _ = writeln!(
        svg,
        r##"<polyline points="{}" fill="none" stroke="#d33" stroke-width="1.5"/>"##,
        polyline(&out)
    );
    let _ = writeln!(
        svg,
        r##"<text x="{:.2}" y="{MT}" dy="14" fill="#999">input</text>"##,
        W - MR - 90.0
    );
    let _ = writeln!(
        svg,
        r##"<text x="{:.2}" y="{MT}" dy="28" fill="#d33">output</text>"##,
        W - MR - 90.0
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn write_profile_svg(
    stim: &Stimulus,
    output: &Tensor<f32>,
    title: &str,
    path: &Path,
) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, profile_svg(stim, output, title)?)?;
    Ok(())
}

/// |E| (or any scalar) against a swept value, as a marked polyline.
pub fn series_svg(title: &str, xlabel: &str, points: &[(f64, f64)]) -> String {
    const W: f64 = 480.0;
    const H: f64 = 320.0;
    const ML: f64 = 60.0;
    const MR: f64 = 15.0;
    const MT: f64 = 30.0;
    const MB: f64 = 40.0;
    let plot_w = W - ML - MR;
    let plot_h = H - MT - MB;
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    if points.is_empty() {
        (x_lo, x_hi, y_lo, y_hi) = (0.0, 1.0, 0.0, 1.0);
    }
    let y_lo = y_lo.min(0.0);
    let x_span = (x_hi - x_lo).max(1e-9);
    let y_span = (y_hi - y_lo).max(1e-9) * 1.05;
    let px = |x: f64| ML + (x - x_lo) / x_span * plot_w;
    let py = |y: f64| MT + plot_h - (y - y_lo) / y_span * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{ML}" y="18">{}</text>"#, xml_escape(title));
    let _ = writeln!(
        svg,
        r##"<rect x="{ML}" y="{MT}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="#888"/>"##
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
        ML + plot_w / 2.0 - 30.0,
        H - 12.0,
        xml_escape(xlabel)
    );
    let _ = writeln!(svg, r#"<text x="6" y="{:.2}">{y_hi:.4}</text>"#, MT + 10.0);
    let _ = writeln!(svg, r#"<text x="6" y="{:.2}">{y_lo:.4}</text>"#, MT + plot_h);
    if !points.is_empty() {
        let mut pts = String::new();
        for &(x, y) in points {
            let _ = write!(pts, "{:.2},{:.2} ", px(x), py(y));
        }
        let _ = writeln!(
            svg,
            r##"<polyline points="{}" fill="none" stroke="#36c" stroke-width="1.5"/>"##,
            pts.trim_end()
        );
        for &(x, y) in points {
            let _ = writeln!(
                svg,
                r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#36c"/>"##,
                px(x),
                py(y)
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}">{x}</text>"#,
                px(x) - 6.0,
                MT + plot_h + 16.0
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn write_series_svg(title: &str, xlabel: &str, points: &[(f64, f64)], path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, series_svg(title, xlabel, points))?;
    Ok(())
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{evaluate_output, oracle_output};
    use crate::stimuli::{generate, StimulusKind, StimulusSpec};

    #[test]
    fn csv_floats_round_trip_bit_exactly() {
        let stim = generate(&StimulusSpec::baseline(StimulusKind::Dungeon, false)).unwrap();
        let out = oracle_output(&stim).unwrap();
        let rows = evaluate_output("oracle", Some(3), &out, &stim).unwrap();
        let csv = effect_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        for (line, row) in lines.zip(&rows) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 10);
            let effect: f64 = fields[6].parse().unwrap();
            assert_eq!(effect.to_bits(), row.effect.to_bits());
            let tau: f64 = fields[9].parse().unwrap();
            assert_eq!(tau.to_bits(), row.tau.to_bits());
        }
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let stim = generate(&StimulusSpec::baseline(StimulusKind::White, false)).unwrap();
        let out = oracle_output(&stim).unwrap();
        let svg = profile_svg(&stim, &out, "white <test>").unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("&lt;test&gt;"));
        assert!(!svg.contains("<test>"));
    }
}
