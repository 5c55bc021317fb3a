//! SVG heatmaps of mode amplitudes: rows are modes, columns are ions.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::CliError;

const CELL: f64 = 6.0;
const MARGIN: f64 = 48.0;
const BAR_WIDTH: f64 = 14.0;
const BAR_STEPS: usize = 64;

/// Viridis control points, interpolated linearly.
const VIRIDIS: [(f64, [f64; 3]); 5] = [
    (0.00, [68.0, 1.0, 84.0]),
    (0.25, [59.0, 82.0, 139.0]),
    (0.50, [33.0, 145.0, 140.0]),
    (0.75, [94.0, 201.0, 98.0]),
    (1.00, [253.0, 231.0, 37.0]),
];

pub fn colour(x: f64) -> String {
    let x = x.clamp(0.0, 1.0);
    let k = VIRIDIS.iter().position(|&(t, _)| t >= x).unwrap_or(VIRIDIS.len() - 1).max(1);
    let (t0, c0) = VIRIDIS[k - 1];
    let (t1, c1) = VIRIDIS[k];
    let f = (x - t0) / (t1 - t0);
    let c: Vec<u8> = (0..3).map(|i| (c0[i] + f * (c1[i] - c0[i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Renders `matrix` with a linear map from 0 to its largest entry (1 when all entries are zero).
pub fn render(matrix: &DMatrix<f64>, row_label: &str, col_label: &str, title: &str) -> Result<String, CliError> {
    if matrix.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Validation("heatmap entries must be finite".into()));
    }
    let (rows, cols) = matrix.shape();
    let top = matrix.iter().fold(0.0f64, |a, &x| a.max(x));
    let scale = if top > 0.0 { top } else { 1.0 };
    let w = cols as f64 * CELL;
    let h = rows as f64 * CELL;
    let bar_x = MARGIN + w + 16.0;
    let width = bar_x + BAR_WIDTH + 60.0;
    let height = MARGIN + h + 40.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(s, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="20" font-family="sans-serif" font-size="13">{}</text>"#, escape(title));
    let _ = writeln!(s, r#"<g id="cells" shape-rendering="crispEdges">"#);
    for r in 0..rows {
        for c in 0..cols {
            let v = matrix[(r, c)];
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="{}" data-row="{}" data-col="{}" data-value="{v:?}"/>"#,
                MARGIN + c as f64 * CELL,
                MARGIN + r as f64 * CELL,
                colour(v / scale),
                r + 1,
                c + 1,
            );
        }
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
        MARGIN + w / 2.0,
        MARGIN + h + 24.0,
        escape(col_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        MARGIN + h / 2.0,
        MARGIN + h / 2.0,
        escape(row_label)
    );
    // colour bar, top = maximum
    let _ = writeln!(s, r#"<g id="colorbar" shape-rendering="crispEdges">"#);
    let step_h = h.max(CELL) / BAR_STEPS as f64;
    for k in 0..BAR_STEPS {
        let x = 1.0 - (k as f64 + 0.5) / BAR_STEPS as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{bar_x}" y="{}" width="{BAR_WIDTH}" height="{step_h}" fill="{}"/>"#,
            MARGIN + k as f64 * step_h,
            colour(x)
        );
    }
    let _ = writeln!(s, "</g>");
    for (y, v) in [(MARGIN + 8.0, scale), (MARGIN + h.max(CELL), 0.0)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{y}" font-family="sans-serif" font-size="10">{v:.3}</text>"#,
            bar_x + BAR_WIDTH + 4.0
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_heatmap(
    matrix: &DMatrix<f64>,
    row_label: &str,
    col_label: &str,
    title: &str,
    path: &Path,
) -> Result<(), CliError> {
    let svg = render(matrix, row_label, col_label, title)?;
    std::fs::write(path, svg).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
