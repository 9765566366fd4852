//! Self-contained SVG semi-log charts for the convergence experiments.
//!
//! Pure shapes and text in a single `<svg>` element, no external resources:
//! decade gridlines on a log10 y axis, one polyline-with-markers per series,
//! and a legend. Mirrors the axes of the published convergence figures.

use crate::csvio::ErrorRecord;
use crate::experiment::Family;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 36.0;
const MARGIN_TOP: f64 = 52.0;
const MARGIN_BOTTOM: f64 = 72.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];
/// Values at or below zero cannot sit on a log axis; they are clamped here.
const Y_CLAMP: f64 = 1e-17;

/// One plotted curve.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Renders a scatter-with-lines semi-log chart (log10 on y).
pub fn semilog_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            xs.push(x);
            ys.push(y.max(Y_CLAMP));
        }
    }
    let (x_min, x_max) = bounds(&xs, 0.0, 1.0);
    let (y_min, y_max) = bounds(&ys, Y_CLAMP, 1.0);
    let dec_min = y_min.log10().floor() as i32;
    let dec_max = y_max.log10().ceil() as i32;
    let dec_max = if dec_max == dec_min { dec_min + 1 } else { dec_max };

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };
    let to_x = |x: f64| MARGIN_LEFT + (x - x_min) / x_span * plot_w;
    let to_y = |y: f64| {
        let ly = y.max(Y_CLAMP).log10();
        MARGIN_TOP + (dec_max as f64 - ly) / (dec_max - dec_min) as f64 * plot_h
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"Helvetica, Arial, sans-serif\">\n"
    ));
    svg.push_str(&format!(
        "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"28\" text-anchor=\"middle\" font-size=\"17\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    ));

    // Decade gridlines and y tick labels.
    for dec in dec_min..=dec_max {
        let y = to_y(10f64.powi(dec));
        svg.push_str(&format!(
            "  <line x1=\"{MARGIN_LEFT:.1}\" y1=\"{y:.2}\" x2=\"{:.1}\" y2=\"{y:.2}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            MARGIN_LEFT + plot_w
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"12\">1e{}</text>\n",
            MARGIN_LEFT - 8.0,
            y + 4.0,
            dec
        ));
    }

    // X ticks at up to 13 round positions.
    for tick in x_ticks(x_min, x_max) {
        let x = to_x(tick);
        svg.push_str(&format!(
            "  <line x1=\"{x:.2}\" y1=\"{:.1}\" x2=\"{x:.2}\" y2=\"{:.1}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            MARGIN_TOP,
            MARGIN_TOP + plot_h
        ));
        svg.push_str(&format!(
            "  <text x=\"{x:.2}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"12\">{}</text>\n",
            MARGIN_TOP + plot_h + 20.0,
            format_tick(tick)
        ));
    }

    // Axes.
    svg.push_str(&format!(
        "  <rect x=\"{MARGIN_LEFT:.1}\" y=\"{MARGIN_TOP:.1}\" width=\"{plot_w:.1}\" \
         height=\"{plot_h:.1}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.2\"/>\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 22.0,
        escape(x_label)
    ));
    svg.push_str(&format!(
        "  <text x=\"24\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"14\" \
         transform=\"rotate(-90 24 {:.1})\">{}</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(y_label)
    ));

    // Series.
    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", to_x(x), to_y(y)))
            .collect();
        if path.len() > 1 {
            svg.push_str(&format!(
                "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
                path.join(" ")
            ));
        }
        for &(x, y) in &s.points {
            svg.push_str(&format!(
                "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.4\" fill=\"{color}\"/>\n",
                to_x(x),
                to_y(y)
            ));
        }
    }

    // Legend, top right inside the frame.
    let legend_x = MARGIN_LEFT + plot_w - 150.0;
    for (idx, s) in series.iter().enumerate() {
        let y = MARGIN_TOP + 18.0 + idx as f64 * 20.0;
        let color = PALETTE[idx % PALETTE.len()];
        svg.push_str(&format!(
            "  <line x1=\"{legend_x:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" \
             stroke=\"{color}\" stroke-width=\"2.4\"/>\n",
            legend_x + 26.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\">{}</text>\n",
            legend_x + 34.0,
            y + 4.0,
            escape(&s.label)
        ));
    }

    svg.push_str("</svg>\n");
    svg
}

/// Groups experiment records into plot series and axis labels per family.
pub fn experiment_chart(family: Family, records: &[ErrorRecord]) -> (String, String, Vec<Series>) {
    match family {
        Family::ErrorVsM => {
            let coarse = records.first().map_or(0, |r| r.coarse_degree);
            let series = vec![Series {
                label: format!("Mc={coarse}"),
                points: records
                    .iter()
                    .map(|r| (r.fine_degree as f64, r.linf_error))
                    .collect(),
            }];
            (
                "L\u{221e} errors versus fine approximation degree M".into(),
                "fine degree M".into(),
                series,
            )
        }
        Family::ErrorVsK => {
            let mut series = Vec::new();
            let mut coarse_values: Vec<usize> =
                records.iter().map(|r| r.coarse_degree).collect();
            coarse_values.sort_unstable();
            coarse_values.dedup();
            for coarse in coarse_values {
                series.push(Series {
                    label: format!("Mc={coarse}"),
                    points: records
                        .iter()
                        .filter(|r| r.coarse_degree == coarse)
                        .map(|r| (r.iteration as f64, r.linf_error))
                        .collect(),
                });
            }
            (
                "L\u{221e} errors versus iteration number k".into(),
                "iteration k".into(),
                series,
            )
        }
        Family::ErrorVsMc => {
            let mut series = Vec::new();
            let mut ks: Vec<usize> = records.iter().map(|r| r.iteration).collect();
            ks.sort_unstable();
            ks.dedup();
            for k in ks {
                series.push(Series {
                    label: format!("k={k}"),
                    points: records
                        .iter()
                        .filter(|r| r.iteration == k)
                        .map(|r| (r.coarse_degree as f64, r.linf_error))
                        .collect(),
                });
            }
            (
                "L\u{221e} errors versus coarse approximation degree Mc".into(),
                "coarse degree Mc".into(),
                series,
            )
        }
        Family::Single => {
            let series = vec![
                Series {
                    label: "linf error".into(),
                    points: records
                        .iter()
                        .map(|r| (r.iteration as f64, r.linf_error))
                        .collect(),
                },
                Series {
                    label: "increment".into(),
                    points: records
                        .iter()
                        .filter(|r| r.iteration > 0)
                        .map(|r| (r.iteration as f64, r.increment))
                        .collect(),
                },
            ];
            (
                "L\u{221e} error and increment versus iteration number k".into(),
                "iteration k".into(),
                series,
            )
        }
    }
}

fn bounds(values: &[f64], fallback_min: f64, fallback_span: f64) -> (f64, f64) {
    if values.is_empty() {
        return (fallback_min, fallback_min + fallback_span);
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

fn x_ticks(min: f64, max: f64) -> Vec<f64> {
    let span = (max - min).max(1e-12);
    let raw_step = span / 12.0;
    let magnitude = 10f64.powf(raw_step.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * magnitude)
        .find(|&s| span / s <= 12.0)
        .unwrap_or(magnitude * 10.0);
    let start = (min / step).ceil() * step;
    let mut ticks = Vec::new();
    let mut t = start;
    while t <= max + 1e-9 * span {
        ticks.push(t);
        t += step;
    }
    ticks
}

fn format_tick(t: f64) -> String {
    if (t - t.round()).abs() < 1e-9 {
        format!("{}", t.round() as i64)
    } else {
        format!("{t}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_series() -> Vec<Series> {
        vec![
            Series {
                label: "Mc=11".into(),
                points: vec![(1.0, 1e-2), (2.0, 1e-4), (3.0, 1e-7)],
            },
            Series {
                label: "Mc=13".into(),
                points: vec![(1.0, 1e-3), (2.0, 1e-6), (3.0, 1e-9)],
            },
        ]
    }

    #[test]
    fn svg_is_well_formed_and_self_contained() {
        let svg = semilog_svg("errors", "iteration k", "L\u{221e} error", &sample_series());
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("href"));
        assert!(!svg.contains("url("));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 6);
        assert!(svg.contains("Mc=11"));
        assert!(svg.contains("1e-9"));
    }

    #[test]
    fn zero_errors_are_clamped_not_dropped() {
        let series = vec![Series {
            label: "exact".into(),
            points: vec![(1.0, 0.0), (2.0, 0.0)],
        }];
        let svg = semilog_svg("t", "x", "y", &series);
        assert_eq!(svg.matches("<circle").count(), 2);
    }

    #[test]
    fn chart_grouping_by_family() {
        let mut records = Vec::new();
        for k in 1..=2 {
            for mc in [3usize, 5] {
                records.push(crate::csvio::ErrorRecord {
                    experiment: "error-vs-Mc".into(),
                    problem: "sin-kernel".into(),
                    horizon: 1.0,
                    subintervals: 2,
                    fine_degree: 9,
                    coarse_degree: mc,
                    iteration: k,
                    linf_error: 1e-3,
                    increment: 1e-3,
                    wall_ms: 0.0,
                    fine_sweeps: 0,
                    coarse_sweeps: 0,
                });
            }
        }
        let (_, x_label, series) = experiment_chart(Family::ErrorVsMc, &records);
        assert_eq!(x_label, "coarse degree Mc");
        assert_eq!(series.len(), 2);
        assert_eq!(series[0].label, "k=1");
        assert_eq!(series[0].points.len(), 2);
    }
}
