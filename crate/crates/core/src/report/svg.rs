use std::collections::BTreeSet;
use std::fmt::Write;

use super::Summary;

const PANEL_W: f64 = 280.0;
const PANEL_H: f64 = 220.0;
const PLOT: f64 = 150.0;
const LEFT: f64 = 45.0;
const TOP: f64 = 30.0;

const COLORS: [(&str, &str); 6] = [
    ("independent", "#1f77b4"),
    ("sequential", "#ff7f0e"),
    ("one-to-n", "#2ca02c"),
    ("n-to-one", "#d62728"),
    ("mixed", "#9467bd"),
    ("other", "#7f7f7f"),
];

fn color(ty: &str) -> &'static str {
    COLORS.iter().find(|c| c.0 == ty).map_or("#000000", |c| c.1)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// One panel per (driver, data size, TR); within a panel one CDF line per
/// workflow type, labelled with its area above the curve.
pub fn render_svg(summary: &Summary) -> String {
    let rows: BTreeSet<(&str, &str)> = summary
        .cells
        .iter()
        .map(|c| (c.driver.as_str(), c.data_size.as_str()))
        .collect();
    let cols: BTreeSet<u64> = summary.cells.iter().map(|c| c.time_req).collect();
    let rows: Vec<_> = rows.into_iter().collect();
    let cols: Vec<_> = cols.into_iter().collect();
    let width = PANEL_W * cols.len().max(1) as f64;
    let height = PANEL_H * rows.len().max(1) as f64;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="10">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (ri, (driver, size)) in rows.iter().enumerate() {
        for (ci, tr) in cols.iter().enumerate() {
            let x0 = ci as f64 * PANEL_W + LEFT;
            let y0 = ri as f64 * PANEL_H + TOP;
            let _ = writeln!(
                s,
                r#"<text x="{x0}" y="{}" font-weight="bold">{} {} TR={}ms</text>"#,
                y0 - 12.0,
                escape(driver),
                escape(size),
                tr
            );
            let _ = writeln!(
                s,
                r##"<rect x="{x0}" y="{y0}" width="{PLOT}" height="{PLOT}" fill="none" stroke="#444"/>"##
            );
            for t in [0.0, 0.5, 1.0] {
                let _ = writeln!(
                    s,
                    r#"<text x="{}" y="{}" text-anchor="middle">{t}</text>"#,
                    x0 + t * PLOT,
                    y0 + PLOT + 12.0
                );
                let _ = writeln!(
                    s,
                    r#"<text x="{}" y="{}" text-anchor="end">{t}</text>"#,
                    x0 - 4.0,
                    y0 + (1.0 - t) * PLOT + 3.0
                );
            }
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle">mean relative error</text>"#,
                x0 + PLOT / 2.0,
                y0 + PLOT + 25.0
            );
            let cells = summary
                .cells
                .iter()
                .filter(|c| c.driver == *driver && c.data_size == *size && c.time_req == *tr);
            for (li, c) in cells.enumerate() {
                let col = color(&c.workflow_type);
                if !c.mre_cdf.is_empty() {
                    let pts: Vec<String> = c
                        .mre_cdf
                        .iter()
                        .map(|(e, p)| format!("{:.2},{:.2}", x0 + e * PLOT, y0 + (1.0 - p) * PLOT))
                        .collect();
                    let _ = writeln!(
                        s,
                        r#"<polyline fill="none" stroke="{col}" stroke-width="1.5" points="{}"/>"#,
                        pts.join(" ")
                    );
                }
                let area = c
                    .area_above_curve
                    .map_or("n/a".to_string(), |a| format!("{:.1}%", a * 100.0));
                let _ = writeln!(
                    s,
                    r#"<text x="{}" y="{}" fill="{col}">{} {area}</text>"#,
                    x0 + PLOT + 6.0,
                    y0 + 10.0 + li as f64 * 12.0,
                    escape(&c.workflow_type)
                );
            }
        }
    }
    s.push_str("</svg>\n");
    s
}
