//! Minimal self-contained SVG plotting: polylines, scatter points, and
//! overlaid histograms, with linear or log-scale y axes. The CSVs next to
//! each figure are the ground truth; these renders exist so the report is
//! viewable without external tooling.

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 74.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 42.0;
const MARGIN_B: f64 = 56.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SeriesKind {
    Line,
    Scatter,
}

#[derive(Debug, Clone)]
struct Series {
    label: String,
    points: Vec<(f64, f64)>,
    kind: SeriesKind,
}

/// A single panel with any mix of line and scatter series.
#[derive(Debug, Clone)]
pub struct Plot {
    title: String,
    x_label: String,
    y_label: String,
    log_y: bool,
    series: Vec<Series>,
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_y: false,
            series: Vec::new(),
        }
    }

    /// Plot y on a log10 scale; non-positive values are dropped.
    pub fn log_y(mut self) -> Self {
        self.log_y = true;
        self
    }

    pub fn line(mut self, label: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series {
            label: label.into(),
            points,
            kind: SeriesKind::Line,
        });
        self
    }

    pub fn scatter(mut self, label: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series {
            label: label.into(),
            points,
            kind: SeriesKind::Scatter,
        });
        self
    }

    fn visible_points(&self) -> Vec<(f64, f64)> {
        self.series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter(|(x, y)| x.is_finite() && y.is_finite() && (!self.log_y || *y > 0.0))
            .copied()
            .collect()
    }

    /// Render the panel as an SVG document.
    pub fn render(&self) -> String {
        let mut out = String::with_capacity(4096);
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n\
             <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
            WIDTH / 2.0,
            escape(&self.title)
        ));

        let pts = self.visible_points();
        if pts.is_empty() {
            out.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">no data</text>\n</svg>\n",
                WIDTH / 2.0,
                HEIGHT / 2.0
            ));
            return out;
        }

        let (x0, x1) = padded_range(pts.iter().map(|p| p.0));
        let ty = |y: f64| if self.log_y { y.log10() } else { y };
        let (y0, y1) = padded_range(pts.iter().map(|p| ty(p.1)));
        let plot_w = WIDTH - MARGIN_L - MARGIN_R;
        let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
        let px = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * plot_w;
        let py = |y: f64| HEIGHT - MARGIN_B - (ty(y) - y0) / (y1 - y0) * plot_h;

        // frame
        out.push_str(&format!(
            "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{plot_w:.1}\" height=\"{plot_h:.1}\" \
             fill=\"none\" stroke=\"#333\"/>\n"
        ));
        // x ticks
        for k in 0..=4 {
            let x = x0 + (x1 - x0) * k as f64 / 4.0;
            let xp = px(x);
            out.push_str(&format!(
                "<line x1=\"{xp:.1}\" y1=\"{:.1}\" x2=\"{xp:.1}\" y2=\"{:.1}\" stroke=\"#333\"/>\n\
                 <text x=\"{xp:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
                HEIGHT - MARGIN_B,
                HEIGHT - MARGIN_B + 5.0,
                HEIGHT - MARGIN_B + 20.0,
                format_tick(x)
            ));
        }
        // y ticks (decade ticks when log)
        let y_ticks: Vec<f64> = if self.log_y {
            let lo = y0.ceil() as i64;
            let hi = y1.floor() as i64;
            if hi - lo >= 2 {
                let step = (((hi - lo) as usize / 6) + 1) as i64;
                (lo..=hi).step_by(step as usize).map(|e| e as f64).collect()
            } else {
                // fewer than three decades visible: spread ticks evenly
                (0..=4).map(|k| y0 + (y1 - y0) * k as f64 / 4.0).collect()
            }
        } else {
            (0..=4).map(|k| y0 + (y1 - y0) * k as f64 / 4.0).collect()
        };
        for &yv in &y_ticks {
            if yv < y0 - 1e-12 || yv > y1 + 1e-12 {
                continue;
            }
            let yp = HEIGHT - MARGIN_B - (yv - y0) / (y1 - y0) * plot_h;
            let label = if self.log_y {
                if (yv - yv.round()).abs() < 1e-9 {
                    format!("1e{}", yv.round() as i64)
                } else {
                    format_tick(10f64.powf(yv))
                }
            } else {
                format_tick(yv)
            };
            out.push_str(&format!(
                "<line x1=\"{:.1}\" y1=\"{yp:.1}\" x2=\"{MARGIN_L}\" y2=\"{yp:.1}\" stroke=\"#333\"/>\n\
                 <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{label}</text>\n",
                MARGIN_L - 5.0,
                MARGIN_L - 8.0,
                yp + 4.0
            ));
        }
        // axis labels
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            MARGIN_L + plot_w / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        ));
        out.push_str(&format!(
            "<text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">{}</text>\n",
            MARGIN_T + plot_h / 2.0,
            MARGIN_T + plot_h / 2.0,
            escape(&self.y_label)
        ));

        // series
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let visible = |p: &&(f64, f64)| {
                p.0.is_finite() && p.1.is_finite() && (!self.log_y || p.1 > 0.0)
            };
            match s.kind {
                SeriesKind::Line => {
                    let coords: Vec<String> = s
                        .points
                        .iter()
                        .filter(visible)
                        .map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y)))
                        .collect();
                    if coords.len() >= 2 {
                        out.push_str(&format!(
                            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" \
                             stroke-width=\"1.5\" stroke-opacity=\"0.85\"/>\n",
                            coords.join(" ")
                        ));
                    }
                }
                SeriesKind::Scatter => {
                    for (x, y) in s.points.iter().filter(visible) {
                        out.push_str(&format!(
                            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\" \
                             fill-opacity=\"0.8\"/>\n",
                            px(*x),
                            py(*y)
                        ));
                    }
                }
            }
        }

        // legend (skipped for crowded panels)
        if self.series.len() <= PALETTE.len() {
            for (i, s) in self.series.iter().enumerate() {
                let y = MARGIN_T + 16.0 + 16.0 * i as f64;
                let x = WIDTH - MARGIN_R - 150.0;
                let color = PALETTE[i % PALETTE.len()];
                out.push_str(&format!(
                    "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" \
                     stroke=\"{color}\" stroke-width=\"2\"/>\n\
                     <text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
                    y - 4.0,
                    x + 22.0,
                    y - 4.0,
                    x + 28.0,
                    y,
                    escape(&s.label)
                ));
            }
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Overlaid histograms of one or more labeled samples on a shared binning.
pub fn render_histogram(title: &str, x_label: &str, groups: &[(String, Vec<f64>)], bins: usize) -> String {
    let finite: Vec<f64> = groups
        .iter()
        .flat_map(|(_, v)| v.iter())
        .copied()
        .filter(|v| v.is_finite())
        .collect();
    let mut plot = Plot::new(title, x_label, "count");
    if finite.is_empty() || bins == 0 {
        return plot.render();
    }
    let (lo, hi) = padded_range(finite.iter().copied());
    let width = (hi - lo) / bins as f64;
    for (label, values) in groups {
        let mut counts = vec![0usize; bins];
        for &v in values.iter().filter(|v| v.is_finite()) {
            let k = (((v - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        // render each histogram as a step outline
        let mut points = Vec::with_capacity(2 * bins + 2);
        points.push((lo, 0.0));
        for (k, &c) in counts.iter().enumerate() {
            points.push((lo + k as f64 * width, c as f64));
            points.push((lo + (k + 1) as f64 * width, c as f64));
        }
        points.push((hi, 0.0));
        plot = plot.line(label, points);
    }
    plot.render()
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

fn format_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if a >= 10_000.0 || a < 0.01 {
        format!("{v:.1e}")
    } else if a >= 100.0 {
        format!("{v:.0}")
    } else {
        let s = format!("{v:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
