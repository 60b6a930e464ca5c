//! Static SVG charts.

use std::fmt::Write as _;

use volboot_core::montecarlo::{FanChartTable, PowerTable};

use crate::error::{AppError, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

struct Frame {
    x_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN + v / self.x_max * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN - v * (HEIGHT - 2.0 * MARGIN)
    }

    fn points(&self, xs: &[f64], ys: &[f64]) -> String {
        let mut s = String::new();
        for (x, y) in xs.iter().zip(ys) {
            if !s.is_empty() {
                s.push(' ');
            }
            let _ = write!(s, "{:.2},{:.2}", self.x(*x), self.y(*y));
        }
        s
    }

    fn open(&self, title: &str, x_label: &str, y_label: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}</text>"#, WIDTH / 2.0);
        let (x0, x1, y0, y1) = (self.x(0.0), self.x(self.x_max), self.y(0.0), self.y(1.0));
        let _ = writeln!(s, r#"<g stroke="black" stroke-width="1">"#);
        let _ = writeln!(s, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/>"#);
        let _ = writeln!(s, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/>"#);
        let _ = writeln!(s, "</g>");
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let (tx, ty) = (self.x(f * self.x_max), self.y(f));
            let _ = writeln!(s, r#"<text x="{tx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y0 + 18.0, f * self.x_max);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{f}</text>"#, x0 - 6.0, ty + 4.0);
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, WIDTH / 2.0, HEIGHT - 12.0);
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{y_label}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0
        );
        s
    }
}

/// Per-path conditional cdfs (thin, translucent), the unconditional cdf
/// (solid) and the U(0,1) cdf (dashed) on `[0,1]²`.
pub fn render_fanchart(table: &FanChartTable) -> Result<String> {
    if table.q_grid.is_empty() {
        return Err(AppError::Config("fan chart needs a nonempty q grid".into()));
    }
    let frame = Frame { x_max: 1.0 };
    let mut s = frame.open(
        &format!("Conditional cdfs of bootstrap p-values ({})", table.stat.short_name()),
        "q",
        "P(p* ≤ q)",
    );
    let _ = writeln!(s, r##"<g fill="none" stroke="#1f5fbf" stroke-opacity="0.25" stroke-width="0.8">"##);
    for row in &table.per_path_cdf {
        let _ = writeln!(s, r#"<polyline points="{}"/>"#, frame.points(&table.q_grid, row));
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="black" stroke-width="2" points="{}"/>"#,
        frame.points(&table.q_grid, &table.unconditional_cdf)
    );
    let _ = writeln!(
        s,
        r##"<polyline fill="none" stroke="#c0392b" stroke-width="1.5" stroke-dasharray="6 4" points="{}"/>"##,
        frame.points(&[0.0, 1.0], &[0.0, 1.0])
    );
    s.push_str("</svg>\n");
    Ok(s)
}

/// Per-path rejection frequencies against `c`, their mean (solid) and the
/// nominal level (dashed).
pub fn render_power(table: &PowerTable) -> Result<String> {
    let Some(&c_max) = table.c_grid.last() else {
        return Err(AppError::Config("power chart needs a nonempty c grid".into()));
    };
    let frame = Frame {
        x_max: if c_max > 0.0 { c_max } else { 1.0 },
    };
    let mut s = frame.open(
        &format!("Rejection frequencies at level {} ({})", table.alpha, table.stat.short_name()),
        "c",
        "rejection rate",
    );
    let _ = writeln!(s, r##"<g fill="none" stroke="#1f5fbf" stroke-opacity="0.35" stroke-width="0.8">"##);
    for row in &table.per_path_rejection {
        let _ = writeln!(s, r#"<polyline points="{}"/>"#, frame.points(&table.c_grid, row));
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="black" stroke-width="2" points="{}"/>"#,
        frame.points(&table.c_grid, &table.mean_rejection())
    );
    let _ = writeln!(
        s,
        r##"<polyline fill="none" stroke="#c0392b" stroke-width="1.5" stroke-dasharray="6 4" points="{}"/>"##,
        frame.points(&[0.0, frame.x_max], &[table.alpha, table.alpha])
    );
    s.push_str("</svg>\n");
    Ok(s)
}
