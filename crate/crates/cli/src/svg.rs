//! Minimal SVG emission for planar reachable sets.

use std::fmt::Write;

const SIZE: f64 = 520.0;
const PAD: f64 = 48.0;

#[derive(Debug, Default)]
pub struct Plot {
    pub title: String,
    /// Closed polylines drawn solid.
    pub members: Vec<Vec<[f64; 2]>>,
    /// Closed polyline drawn dashed (the data-free ball).
    pub reference: Option<Vec<[f64; 2]>>,
    /// Marked point (the least-squares prediction).
    pub marker: Option<[f64; 2]>,
}

struct Frame {
    x0: f64,
    y0: f64,
    scale: f64,
}

impl Frame {
    fn px(&self, p: [f64; 2]) -> (f64, f64) {
        (
            PAD + (p[0] - self.x0) * self.scale,
            SIZE - PAD - (p[1] - self.y0) * self.scale,
        )
    }
}

impl Plot {
    fn frame(&self) -> Frame {
        let pts = self
            .members
            .iter()
            .flatten()
            .chain(self.reference.iter().flatten())
            .chain(self.marker.iter());
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in pts {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if !lo[0].is_finite() {
            lo = [-1.0, -1.0];
            hi = [1.0, 1.0];
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9) * 1.1;
        let cx = 0.5 * (lo[0] + hi[0]);
        let cy = 0.5 * (lo[1] + hi[1]);
        Frame {
            x0: cx - span / 2.0,
            y0: cy - span / 2.0,
            scale: (SIZE - 2.0 * PAD) / span,
        }
    }

    pub fn render(&self) -> String {
        let f = self.frame();
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
            SIZE / 2.0,
            escape(&self.title)
        );
        // Axes through the origin when visible, frame otherwise.
        let span = (SIZE - 2.0 * PAD) / f.scale;
        let (ox, oy) = f.px([0.0, 0.0]);
        let _ = writeln!(
            s,
            r##"<rect x="{PAD}" y="{PAD}" width="{w}" height="{w}" fill="none" stroke="#999"/>"##,
            w = SIZE - 2.0 * PAD
        );
        if (PAD..=SIZE - PAD).contains(&ox) {
            let _ = writeln!(
                s,
                r##"<line x1="{ox:.2}" y1="{PAD}" x2="{ox:.2}" y2="{}" stroke="#ccc"/>"##,
                SIZE - PAD
            );
        }
        if (PAD..=SIZE - PAD).contains(&oy) {
            let _ = writeln!(
                s,
                r##"<line x1="{PAD}" y1="{oy:.2}" x2="{}" y2="{oy:.2}" stroke="#ccc"/>"##,
                SIZE - PAD
            );
        }
        for (v, anchor, x, y) in [
            (f.x0, "start", PAD, SIZE - PAD + 16.0),
            (f.x0 + span, "end", SIZE - PAD, SIZE - PAD + 16.0),
        ] {
            let _ = writeln!(
                s,
                r#"<text x="{x}" y="{y}" text-anchor="{anchor}">{v:.3}</text>"#
            );
        }
        for (v, y) in [(f.y0, SIZE - PAD), (f.y0 + span, PAD + 4.0)] {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{y}" text-anchor="end">{v:.3}</text>"#,
                PAD - 4.0
            );
        }
        if let Some(r) = &self.reference {
            let _ = writeln!(
                s,
                r##"<polygon points="{}" fill="none" stroke="#c0392b" stroke-dasharray="6 4"/>"##,
                points(&f, r)
            );
        }
        for m in &self.members {
            let _ = writeln!(
                s,
                r##"<polygon points="{}" fill="#2e86de" fill-opacity="0.04" stroke="#2e86de" stroke-width="1.2"/>"##,
                points(&f, m)
            );
        }
        if let Some(p) = self.marker {
            let (x, y) = f.px(p);
            let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="black"/>"#);
        }
        s.push_str("</svg>\n");
        s
    }
}

fn points(f: &Frame, pts: &[[f64; 2]]) -> String {
    pts.iter()
        .map(|&p| {
            let (x, y) = f.px(p);
            format!("{x:.2},{y:.2}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
