//! Minimal SVG writer: 800×600 canvas, coordinates with six decimals.

use std::fmt::Write;

use robcov::export::fmt_sig;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Linear map from a data box onto the plotting area.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    /// Box around `points`, padded by 5% on each side.
    pub fn around(points: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in points {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let pad = |a: f64, b: f64| {
            let w = if b > a { b - a } else { a.abs().max(1.0) };
            (a - 0.05 * w, b + 0.05 * w)
        };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        Frame { x0, x1, y0, y1 }
    }

    pub fn with_x(mut self, x0: f64, x1: f64) -> Self {
        self.x0 = x0;
        self.x1 = x1;
        self
    }

    pub fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    pub fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.x0, self.x1)
    }

    pub fn y_range(&self) -> (f64, f64) {
        (self.y0, self.y1)
    }
}

pub struct Svg {
    body: String,
}

impl Svg {
    pub fn new(title: &str) -> Self {
        let mut s = Svg { body: String::new() };
        s.text(WIDTH / 2.0, 28.0, title, "middle", 16.0);
        s
    }

    pub fn line(&mut self, a: (f64, f64), b: (f64, f64), stroke: &str, dashed: bool) {
        let dash = if dashed { " stroke-dasharray=\"6 4\"" } else { "" };
        let _ = writeln!(
            self.body,
            "<line x1=\"{:.6}\" y1=\"{:.6}\" x2=\"{:.6}\" y2=\"{:.6}\" stroke=\"{stroke}\" stroke-width=\"1.000000\"{dash}/>",
            a.0, a.1, b.0, b.1
        );
    }

    pub fn polygon(&mut self, pts: &[(f64, f64)], stroke: &str, dashed: bool) {
        let dash = if dashed { " stroke-dasharray=\"6 4\"" } else { "" };
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.6},{y:.6}")).collect();
        let _ = writeln!(
            self.body,
            "<polygon points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.500000\"{dash}/>",
            coords.join(" ")
        );
    }

    pub fn circle(&mut self, c: (f64, f64), r: f64, fill: &str) {
        let _ = writeln!(self.body, "<circle cx=\"{:.6}\" cy=\"{:.6}\" r=\"{r:.6}\" fill=\"{fill}\"/>", c.0, c.1);
    }

    pub fn arrow(&mut self, from: (f64, f64), to: (f64, f64), stroke: &str) {
        let _ = writeln!(
            self.body,
            "<line x1=\"{:.6}\" y1=\"{:.6}\" x2=\"{:.6}\" y2=\"{:.6}\" stroke=\"{stroke}\" stroke-width=\"1.200000\" marker-end=\"url(#head)\"/>",
            from.0, from.1, to.0, to.1
        );
    }

    pub fn text(&mut self, x: f64, y: f64, s: &str, anchor: &str, size: f64) {
        let _ = writeln!(
            self.body,
            "<text x=\"{x:.6}\" y=\"{y:.6}\" font-family=\"sans-serif\" font-size=\"{size:.6}\" text-anchor=\"{anchor}\">{}</text>",
            esc(s)
        );
    }

    /// Plot border with the x range and name below it.
    pub fn x_axis(&mut self, f: &Frame, x_name: &str) {
        let (l, r) = (LEFT, WIDTH - RIGHT);
        let (t, b) = (TOP, HEIGHT - BOTTOM);
        let _ = writeln!(
            self.body,
            "<rect x=\"{l:.6}\" y=\"{t:.6}\" width=\"{:.6}\" height=\"{:.6}\" fill=\"none\" stroke=\"#444\"/>",
            r - l,
            b - t
        );
        let (x0, x1) = f.x_range();
        self.text(l, b + 18.0, &fmt_sig(x0), "start", 11.0);
        self.text(r, b + 18.0, &fmt_sig(x1), "end", 11.0);
        self.text((l + r) / 2.0, HEIGHT - 25.0, x_name, "middle", 13.0);
    }

    /// Border, both ranges and both axis names.
    pub fn axes(&mut self, f: &Frame, x_name: &str, y_name: &str) {
        self.x_axis(f, x_name);
        let (t, b) = (TOP, HEIGHT - BOTTOM);
        let (y0, y1) = f.y_range();
        self.text(LEFT - 6.0, b, &fmt_sig(y0), "end", 11.0);
        self.text(LEFT - 6.0, t + 10.0, &fmt_sig(y1), "end", 11.0);
        let mid = (t + b) / 2.0;
        let _ = writeln!(
            self.body,
            "<text x=\"20.000000\" y=\"{mid:.6}\" font-family=\"sans-serif\" font-size=\"13.000000\" text-anchor=\"middle\" transform=\"rotate(-90 20.000000 {mid:.6})\">{}</text>",
            esc(y_name)
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH:.0} {HEIGHT:.0}\" width=\"{WIDTH:.0}\" height=\"{HEIGHT:.0}\">\n\
             <defs><marker id=\"head\" markerWidth=\"8\" markerHeight=\"8\" refX=\"7\" refY=\"4\" orient=\"auto\"><path d=\"M0,0 L8,4 L0,8 z\" fill=\"#b22\"/></marker></defs>\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body
        )
    }
}

pub const PLOT_LEFT: f64 = LEFT;
pub const PLOT_TOP: f64 = TOP;
pub const PLOT_BOTTOM: f64 = HEIGHT - BOTTOM;
