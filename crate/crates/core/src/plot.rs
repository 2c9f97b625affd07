//! Minimal SVG line charts.

use std::fmt::Write;

const W: f64 = 720.0;
const H: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone, Default)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Axis { lo: 0.0, hi: 1.0, log };
        }
        if hi - lo < 1e-12 * lo.abs().max(1e-300) {
            let pad = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
            lo -= pad;
            hi += pad;
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil();
        }
        Axis { lo, hi, log }
    }

    fn map(&self, v: f64, a: f64, b: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        a + (v - self.lo) / (self.hi - self.lo) * (b - a)
    }

    /// Tick values in data units.
    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let step = ((self.hi - self.lo) / 8.0).ceil().max(1.0);
            let mut t = Vec::new();
            let mut e = self.lo;
            while e <= self.hi + 1e-9 {
                t.push(10f64.powf(e));
                e += step;
            }
            return t;
        }
        let raw = (self.hi - self.lo) / 6.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
        let mut v = (self.lo / step).ceil() * step;
        let mut t = Vec::new();
        while v <= self.hi + 1e-9 * step {
            t.push(if v.abs() < 1e-12 * step { 0.0 } else { v });
            v += step;
        }
        t
    }
}

fn label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.0e}")
    } else {
        format!("{}", (v * 1e6).round() / 1e6)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl LineChart {
    /// Points that cannot be drawn (non-finite, or non-positive on a log
    /// axis) are skipped and break the polyline.
    pub fn render(&self) -> String {
        let usable = |(x, y): &(f64, f64)| {
            x.is_finite() && y.is_finite() && (!self.log_x || *x > 0.0) && (!self.log_y || *y > 0.0)
        };
        let pts = || self.series.iter().flat_map(|s| s.1.iter().copied().filter(usable));
        let xa = Axis::fit(pts().map(|p| p.0), self.log_x);
        let ya = Axis::fit(pts().map(|p| p.1), self.log_y);
        let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, (x0 + x1) / 2.0, escape(&self.title));
        for t in xa.ticks() {
            let x = xa.map(t, x0, x1);
            let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{y1}" x2="{x:.2}" y2="{y0}" stroke="#e6e6e6"/>"##);
            let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, y0 + 16.0, label(t));
        }
        for t in ya.ticks() {
            let y = ya.map(t, y0, y1);
            let _ = writeln!(s, r##"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#e6e6e6"/>"##);
            let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 6.0, y + 4.0, label(t));
        }
        let _ = writeln!(s, r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y0 - y1);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, H - 14.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
            (y0 + y1) / 2.0,
            escape(&self.y_label)
        );
        let drawable = self.series.iter().filter(|(_, d)| d.iter().any(usable));
        for (i, (name, data)) in drawable.enumerate() {
            let color = COLORS[i % COLORS.len()];
            let mut run: Vec<String> = Vec::new();
            let flush = |run: &mut Vec<String>, s: &mut String| {
                if run.len() > 1 {
                    let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, run.join(" "));
                }
                run.clear();
            };
            for p in data {
                if usable(p) {
                    run.push(format!("{:.2},{:.2}", xa.map(p.0, x0, x1), ya.map(p.1, y0, y1)));
                } else {
                    flush(&mut run, &mut s);
                }
            }
            flush(&mut run, &mut s);
            let ly = y1 + 16.0 + 18.0 * i as f64;
            let _ = writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, x1 + 12.0, x1 + 32.0);
            let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, x1 + 38.0, ly + 4.0, escape(name));
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_log_chart_and_skips_bad_points() {
        let c = LineChart {
            title: "a < b".into(),
            log_y: true,
            series: vec![("s".into(), vec![(0.0, 1.0), (1.0, 10.0), (2.0, -1.0), (3.0, 1e3), (4.0, 1e4)])],
            ..Default::default()
        };
        let svg = c.render();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">1e4<"));
    }

    #[test]
    fn empty_series_stay_out_of_the_legend() {
        let c = LineChart {
            log_y: true,
            series: vec![("zero".into(), vec![(1.0, 0.0), (2.0, 0.0)]), ("kept".into(), vec![(1.0, 1.0), (2.0, 3.0)])],
            ..Default::default()
        };
        let svg = c.render();
        assert!(svg.contains(">kept<") && !svg.contains(">zero<"));
    }

    #[test]
    fn linear_ticks_are_round() {
        let a = Axis::fit([0.0, 0.93].into_iter(), false);
        assert_eq!(a.ticks(), vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8]);
    }
}
