//! Minimal SVG renderings of worlds, landscapes, paths and search logs.

use std::fmt::Write;

use trailforge::geom::Point2;
use trailforge::landscape::{LandscapePlane, PlaneKind};
use trailforge::planner::Visit;
use trailforge::{CellPath, GridWorld, MultiplierSet};

const MARGIN: f64 = 40.0;
const TARGET: f64 = 800.0;

pub fn escape(s: &str) -> String {
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

/// Document with a plot area and two axes.
struct Canvas {
    body: String,
    width: f64,
    height: f64,
}

impl Canvas {
    fn new(width: f64, height: f64, title: &str, x_label: &str, y_label: &str) -> Self {
        let mut body = String::new();
        let (w, h) = (width + 2.0 * MARGIN, height + 2.0 * MARGIN);
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
        );
        let _ = writeln!(body, r#"<title>{}</title>"#, escape(title));
        let _ = writeln!(body, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
        let (x0, y0, x1, y1) = (MARGIN, MARGIN + height, MARGIN + width, MARGIN);
        let _ = writeln!(body, r#"<line class="axis" x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
        let _ = writeln!(body, r#"<line class="axis" x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
        let _ = writeln!(
            body,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
            MARGIN + width / 2.0,
            h - 10.0,
            escape(x_label)
        );
        let _ = writeln!(
            body,
            r#"<text x="12" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 12 {})">{}</text>"#,
            MARGIN + height / 2.0,
            MARGIN + height / 2.0,
            escape(y_label)
        );
        Self { body, width, height }
    }

    fn finish(mut self) -> String {
        let _ = self.width + self.height;
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn grid_scale(rows: usize, cols: usize) -> f64 {
    (TARGET / rows.max(cols) as f64).clamp(0.5, 20.0)
}

/// Blue-to-red ramp for `t` in `[0, 1]`.
fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * t).round() as u8;
    let b = (255.0 * (1.0 - t)).round() as u8;
    let g = (255.0 * (1.0 - (2.0 * t - 1.0).abs()) * 0.6).round() as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Attraction heat map on a log scale, block-averaged down to at most
/// 160 blocks per side, with road cells overlaid.
pub fn heatmap(world: &GridWorld, m: &MultiplierSet) -> String {
    let (rows, cols) = (world.rows(), world.cols());
    let block = rows.max(cols).div_ceil(160).max(1);
    let s = grid_scale(rows, cols);
    let mut c = Canvas::new(cols as f64 * s, rows as f64 * s, "attraction field", "col", "row");
    let max = world.max_field_value(m).max(f64::MIN_POSITIVE);
    let floor = max * 1e-4;
    for br in (0..rows).step_by(block) {
        for bc in (0..cols).step_by(block) {
            let (mut sum, mut n) = (0.0, 0.0);
            for r in br..(br + block).min(rows) {
                for cc in bc..(bc + block).min(cols) {
                    sum += world.attraction(trailforge::Cell::new(r, cc), m).unwrap_or(0.0);
                    n += 1.0;
                }
            }
            let v = (sum / n).max(floor);
            let t = (v / floor).ln() / (max / floor).ln();
            let _ = writeln!(
                c.body,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                MARGIN + bc as f64 * s,
                MARGIN + br as f64 * s,
                block as f64 * s,
                block as f64 * s,
                ramp(t)
            );
        }
    }
    let mut d = String::new();
    for cell in world.road_cells() {
        let _ = write!(
            d,
            "M{:.2} {:.2}h{:.2}v{:.2}h-{:.2}z",
            MARGIN + cell.col as f64 * s,
            MARGIN + cell.row as f64 * s,
            s,
            s,
            s
        );
    }
    let _ = writeln!(c.body, r#"<path class="roads" d="{d}" fill="black" fill-opacity="0.35"/>"#);
    c.finish()
}

struct Bounds {
    lo: Point2,
    hi: Point2,
}

impl Bounds {
    fn of(points: impl Iterator<Item = Point2>) -> Self {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        if !lo.x.is_finite() {
            return Self { lo: Point2::new(0.0, 0.0), hi: Point2::new(1.0, 1.0) };
        }
        let pad = |a: f64, b: f64| if b > a { (b - a) * 0.05 } else { 1.0 };
        let (px, py) = (pad(lo.x, hi.x), pad(lo.y, hi.y));
        Self {
            lo: Point2::new(lo.x - px, lo.y - py),
            hi: Point2::new(hi.x + px, hi.y + py),
        }
    }

    fn map(&self, p: Point2, size: f64) -> (f64, f64) {
        let x = MARGIN + (p.x - self.lo.x) / (self.hi.x - self.lo.x) * size;
        let y = MARGIN + size - (p.y - self.lo.y) / (self.hi.y - self.lo.y) * size;
        (x, y)
    }
}

fn polygon(c: &mut Canvas, b: &Bounds, pts: &[Point2], class: &str, stroke: &str) {
    let coords: Vec<String> = pts
        .iter()
        .map(|&p| {
            let (x, y) = b.map(p, TARGET);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    let _ = writeln!(
        c.body,
        r#"<polygon class="{class}" points="{}" fill="none" stroke="{stroke}" stroke-width="2"/>"#,
        coords.join(" ")
    );
}

/// One landscape plane: corpus points with outer and inner hulls.
pub fn landscape_plane(plane: &LandscapePlane, corpus: &[Point2]) -> String {
    let kind: PlaneKind = plane.kind;
    let (xl, yl) = kind.axes();
    let hull_pts = plane.outer_hull.vertices().iter().copied();
    let b = Bounds::of(corpus.iter().copied().chain(hull_pts));
    let mut c = Canvas::new(TARGET, TARGET, kind.name(), xl, yl);
    for &p in corpus {
        let (x, y) = b.map(p, TARGET);
        let _ = writeln!(c.body, r##"<circle class="corpus" cx="{x:.2}" cy="{y:.2}" r="2" fill="#888888"/>"##);
    }
    polygon(&mut c, &b, plane.outer_hull.vertices(), "outer-hull", "#1f77b4");
    polygon(&mut c, &b, plane.inner_hull.vertices(), "inner-hull", "#d62728");
    c.finish()
}

/// Paths drawn over the grid extent: one marker per cell and a larger dot
/// at each start.
pub fn paths(rows: usize, cols: usize, paths: &[(String, CellPath)]) -> String {
    let s = grid_scale(rows, cols);
    let mut c = Canvas::new(cols as f64 * s, rows as f64 * s, "trajectories", "col", "row");
    let at = |cell: trailforge::Cell| (MARGIN + (cell.col as f64 + 0.5) * s, MARGIN + (cell.row as f64 + 0.5) * s);
    for (k, (id, p)) in paths.iter().enumerate() {
        let color = ramp(if paths.len() > 1 { k as f64 / (paths.len() - 1) as f64 } else { 0.0 });
        let _ = writeln!(c.body, r#"<g class="path" data-id="{}">"#, escape(id));
        let pts: Vec<String> = p
            .cells
            .iter()
            .map(|&cell| {
                let (x, y) = at(cell);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            c.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1"/>"#,
            pts.join(" ")
        );
        for &cell in &p.cells {
            let (x, y) = at(cell);
            let _ = writeln!(c.body, r#"<circle class="marker" cx="{x:.2}" cy="{y:.2}" r="{:.2}" fill="{color}"/>"#, (s * 0.3).max(0.6));
        }
        if let Some(start) = p.start() {
            let (x, y) = at(start);
            let _ = writeln!(
                c.body,
                r#"<circle class="start" cx="{x:.2}" cy="{y:.2}" r="{:.2}" fill="black" stroke="white"/>"#,
                (s * 1.5).max(4.0)
            );
        }
        c.body.push_str("</g>\n");
    }
    c.finish()
}

/// Expanded cells colored by visit order, early blue to late red.
pub fn search(rows: usize, cols: usize, visits: &[Visit]) -> String {
    let s = grid_scale(rows, cols);
    let mut c = Canvas::new(cols as f64 * s, rows as f64 * s, "search progression", "col", "row");
    let n = visits.len().max(2) as f64 - 1.0;
    for (k, v) in visits.iter().enumerate() {
        let _ = writeln!(
            c.body,
            r#"<rect class="visit" x="{:.2}" y="{:.2}" width="{s:.2}" height="{s:.2}" fill="{}"/>"#,
            MARGIN + v.cell.col as f64 * s,
            MARGIN + v.cell.row as f64 * s,
            ramp(k as f64 / n)
        );
    }
    c.finish()
}
