//! Self-contained SVG heatmaps.

use std::fmt::Write as _;

/// How values map to colours.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scale {
    /// Blue through white to red, symmetric about zero.
    Diverging,
    /// Dark to light over `[lo, hi]`.
    Sequential { lo: f64, hi: f64 },
}

/// A row-by-column grid of optional values. Missing cells are hatched.
#[derive(Debug, Clone)]
pub struct Heatmap {
    pub title: String,
    pub unit: String,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
    pub scale: Scale,
    /// Cells drawn with a black outline, as `(row, col)`.
    pub marks: Vec<(usize, usize)>,
}

const CELL_W: f64 = 14.0;
const CELL_H: f64 = 14.0;
const LEFT: f64 = 96.0;
const TOP: f64 = 40.0;
const LEGEND_W: f64 = 160.0;

const SEQUENTIAL: [(f64, [u8; 3]); 5] = [
    (0.0, [68, 1, 84]),
    (0.25, [59, 82, 139]),
    (0.5, [33, 145, 140]),
    (0.75, [94, 201, 98]),
    (1.0, [253, 231, 37]),
];

const DIVERGING: [(f64, [u8; 3]); 3] = [
    (0.0, [33, 102, 172]),
    (0.5, [247, 247, 247]),
    (1.0, [178, 24, 43]),
];

fn ramp(stops: &[(f64, [u8; 3])], t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    let k = stops
        .windows(2)
        .position(|w| t <= w[1].0)
        .unwrap_or(stops.len() - 2);
    let (a, b) = (stops[k], stops[k + 1]);
    let f = if b.0 > a.0 {
        (t - a.0) / (b.0 - a.0)
    } else {
        0.0
    };
    let mut c = [0u8; 3];
    for i in 0..3 {
        c[i] = (a.1[i] as f64 + f * (b.1[i] as f64 - a.1[i] as f64)).round() as u8;
    }
    c
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

impl Heatmap {
    /// Value range covered by the colour scale.
    pub fn limits(&self) -> (f64, f64) {
        match self.scale {
            Scale::Sequential { lo, hi } => (lo, hi),
            Scale::Diverging => {
                let m = self
                    .cells
                    .iter()
                    .flatten()
                    .flatten()
                    .fold(0.0f64, |m, v| m.max(v.abs()));
                let m = if m > 0.0 { m } else { 1.0 };
                (-m, m)
            }
        }
    }

    pub fn colour(&self, v: f64) -> String {
        let (lo, hi) = self.limits();
        let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
        let c = match self.scale {
            Scale::Diverging => ramp(&DIVERGING, t),
            Scale::Sequential { .. } => ramp(&SEQUENTIAL, t),
        };
        format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
    }

    /// SVG text. `stamp`, when given, goes into a leading comment.
    pub fn render(&self, stamp: Option<&str>) -> String {
        let rows = self.cells.len();
        let cols = self.cells.iter().map(Vec::len).max().unwrap_or(0);
        let label_step = (cols / 12).max(1);
        let width = LEFT + cols as f64 * CELL_W + 24.0 + LEGEND_W;
        let height = TOP + rows as f64 * CELL_H + 64.0;
        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        if let Some(stamp) = stamp {
            let _ = writeln!(
                s,
                "<!-- generated {} -->",
                escape(stamp).replace("--", "- -")
            );
        }
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="10">"#
        );
        let _ = writeln!(
            s,
            concat!(
                r#"<defs><pattern id="hatch" width="4" height="4" patternUnits="userSpaceOnUse" patternTransform="rotate(45)">"#,
                r##"<rect width="4" height="4" fill="#ffffff"/><line x1="0" y1="0" x2="0" y2="4" stroke="#999999" stroke-width="1.5"/></pattern></defs>"##
            )
        );
        let _ = writeln!(s, r#"<title>{}</title>"#, escape(&self.title));
        let _ = writeln!(
            s,
            r#"<text x="{LEFT}" y="16" font-size="13">{}</text>"#,
            escape(&self.title)
        );

        for (r, row) in self.cells.iter().enumerate() {
            let y = TOP + r as f64 * CELL_H;
            if let Some(label) = self.row_labels.get(r) {
                let _ = writeln!(
                    s,
                    r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
                    LEFT - 4.0,
                    y + CELL_H - 3.0,
                    escape(label)
                );
            }
            for c in 0..cols {
                let x = LEFT + c as f64 * CELL_W;
                let fill = match row.get(c).copied().flatten() {
                    Some(v) if v.is_finite() => self.colour(v),
                    _ => "url(#hatch)".to_string(),
                };
                let _ = writeln!(
                    s,
                    r#"<rect x="{x}" y="{y}" width="{CELL_W}" height="{CELL_H}" fill="{fill}"/>"#
                );
            }
        }
        for &(r, c) in &self.marks {
            if r < rows && c < cols {
                let _ = writeln!(
                    s,
                    r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#000000" stroke-width="1.5"/>"##,
                    LEFT + c as f64 * CELL_W + 0.75,
                    TOP + r as f64 * CELL_H + 0.75,
                    CELL_W - 1.5,
                    CELL_H - 1.5
                );
            }
        }
        let axis_y = TOP + rows as f64 * CELL_H + 12.0;
        for (c, label) in self.col_labels.iter().enumerate().step_by(label_step) {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{axis_y}" text-anchor="middle">{}</text>"#,
                LEFT + (c as f64 + 0.5) * CELL_W,
                escape(label)
            );
        }
        self.legend(&mut s, LEFT + cols as f64 * CELL_W + 24.0);
        s.push_str("</svg>\n");
        s
    }

    fn legend(&self, s: &mut String, x: f64) {
        let (lo, hi) = self.limits();
        let steps = 20;
        let w = (LEGEND_W - 40.0) / steps as f64;
        for k in 0..steps {
            let v = lo + (hi - lo) * (k as f64 + 0.5) / steps as f64;
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{TOP}" width="{w}" height="10" fill="{}"/>"#,
                x + k as f64 * w,
                self.colour(v)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{}">{}</text>"#,
            TOP + 22.0,
            fmt_tick(lo)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            x + LEGEND_W - 40.0,
            TOP + 22.0,
            fmt_tick(hi)
        );
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{}">{}</text>"#,
            TOP + 36.0,
            escape(&self.unit)
        );
        let _ = writeln!(
            s,
            r##"<rect x="{x}" y="{}" width="10" height="10" fill="url(#hatch)" stroke="#999999"/>"##,
            TOP + 44.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">missing</text>"#,
            x + 14.0,
            TOP + 53.0
        );
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 0.01 && v.abs() < 1e4) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}
