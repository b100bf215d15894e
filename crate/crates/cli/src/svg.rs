//! Minimal self-contained SVG renderings of the evaluation plots. Data CSVs
//! are the primary artifact; these are quick-look figures with no styling
//! dependencies.

use std::fmt::Write as _;
use std::path::Path;

use ekde_screen::evaluation::RocCurve;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 50.0;

fn header(title: &str) -> String {
    format!(
        concat!(
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" "#,
            r#"viewBox="0 0 {w} {h}">"#,
            r#"<rect width="{w}" height="{h}" fill="white"/>"#,
            r#"<text x="{tx}" y="24" font-family="sans-serif" font-size="16" "#,
            r#"text-anchor="middle">{title}</text>"#
        ),
        w = W,
        h = H,
        tx = W / 2.0,
        title = title,
    )
}

fn axes() -> String {
    format!(
        r#"<rect x="{m}" y="{m}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        pw = W - 2.0 * MARGIN,
        ph = H - 2.0 * MARGIN,
    )
}

fn to_px(x: f64, y: f64, y_max: f64) -> (f64, f64) {
    let px = MARGIN + x.clamp(0.0, 1.0) * (W - 2.0 * MARGIN);
    let py = H - MARGIN - (y / y_max).clamp(0.0, 1.0) * (H - 2.0 * MARGIN);
    (px, py)
}

fn polyline(points: impl Iterator<Item = (f64, f64)>, y_max: f64, color: &str) -> String {
    let mut coords = String::new();
    for (x, y) in points {
        let (px, py) = to_px(x, y, y_max);
        let _ = write!(coords, "{px:.2},{py:.2} ");
    }
    format!(r#"<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>"#)
}

/// ROC curve with the chance diagonal.
pub fn write_roc_svg(curve: &RocCurve, title: &str, path: &Path) -> std::io::Result<()> {
    let mut svg = header(title);
    svg.push_str(&axes());
    let (dx0, dy0) = to_px(0.0, 0.0, 1.0);
    let (dx1, dy1) = to_px(1.0, 1.0, 1.0);
    let _ = write!(
        svg,
        r#"<line x1="{dx0}" y1="{dy0}" x2="{dx1}" y2="{dy1}" stroke="gray" stroke-dasharray="4"/>"#
    );
    svg.push_str(&polyline(curve.points.iter().map(|p| (p.fpr, p.tpr)), 1.0, "crimson"));
    let _ = write!(
        svg,
        concat!(
            r#"<text x="{lx}" y="{ly}" font-family="sans-serif" font-size="13">AUC = {auc:.4}</text>"#,
            r#"<text x="{cx}" y="{bx}" font-family="sans-serif" font-size="13" text-anchor="middle">false positive rate</text>"#,
            r#"<text x="16" y="{cy}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {cy})">true positive rate</text>"#,
            "</svg>"
        ),
        lx = MARGIN + 12.0,
        ly = MARGIN + 20.0,
        auc = curve.auc,
        cx = W / 2.0,
        bx = H - 14.0,
        cy = H / 2.0,
    );
    std::fs::write(path, svg)
}

/// Per-class probability densities with the decision threshold marked.
pub fn write_density_svg(
    series: &[(u8, Vec<(f64, f64)>)],
    threshold: f64,
    title: &str,
    path: &Path,
) -> std::io::Result<()> {
    let y_max = series
        .iter()
        .flat_map(|(_, pts)| pts.iter().map(|&(_, d)| d))
        .fold(1e-12, f64::max);
    let mut svg = header(title);
    svg.push_str(&axes());
    for (label, pts) in series {
        let color = if *label == 1 { "crimson" } else { "steelblue" };
        svg.push_str(&polyline(pts.iter().copied(), y_max, color));
    }
    let (tx, _) = to_px(threshold, 0.0, 1.0);
    let _ = write!(
        svg,
        concat!(
            r#"<line x1="{tx}" y1="{m}" x2="{tx}" y2="{hb}" stroke="red" stroke-dasharray="6"/>"#,
            r#"<text x="{lx}" y="{ly}" font-family="sans-serif" font-size="13">threshold = {t:.3}</text>"#,
            r#"<text x="{cx}" y="{bx}" font-family="sans-serif" font-size="13" text-anchor="middle">predicted disease probability</text>"#,
            "</svg>"
        ),
        tx = tx,
        m = MARGIN,
        hb = H - MARGIN,
        lx = MARGIN + 12.0,
        ly = MARGIN + 20.0,
        t = threshold,
        cx = W / 2.0,
        bx = H - 14.0,
    );
    std::fs::write(path, svg)
}
