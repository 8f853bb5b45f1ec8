//! Self-contained SVG learning curves: cumulative reward per episode
//! with a moving-average overlay.

use crate::metrics::read_metrics_csv;
use crate::trainer::HarnessError;
use std::fmt::Write as _;
use std::path::Path;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 50.0;

/// Trailing moving average with window `w`: element `i` averages the
/// last `min(i + 1, w)` values.
pub fn moving_average(values: &[f64], w: usize) -> Vec<f64> {
    assert!(w > 0);
    let mut out = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    for i in 0..values.len() {
        sum += values[i];
        if i >= w {
            sum -= values[i - w];
        }
        let n = (i + 1).min(w);
        out.push(sum / n as f64);
    }
    out
}

fn polyline(points: &[(f64, f64)], color: &str, width: f64) -> String {
    let coords: Vec<String> = points
        .iter()
        .map(|(x, y)| format!("{x:.2},{y:.2}"))
        .collect();
    format!(
        "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"{width}\" points=\"{}\"/>\n",
        coords.join(" ")
    )
}

/// Render reward-per-episode data as a standalone SVG document.
pub fn learning_curve_svg(episodes: &[u32], rewards: &[f64], ma_window: usize) -> String {
    assert_eq!(episodes.len(), rewards.len());
    assert!(episodes.len() >= 2, "a curve needs at least two points");

    let x_min = *episodes.first().unwrap() as f64;
    let x_max = *episodes.last().unwrap() as f64;
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &r in rewards {
        y_min = y_min.min(r);
        y_max = y_max.max(r);
    }
    if (y_max - y_min).abs() < 1e-12 {
        y_min -= 1.0;
        y_max += 1.0;
    }
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min).max(1e-12) * plot_w;
    let sy = |y: f64| MARGIN_TOP + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h;

    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    )
    .unwrap();
    writeln!(svg, "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>").unwrap();

    // Axes.
    writeln!(
        svg,
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        HEIGHT - MARGIN_BOTTOM,
        WIDTH - MARGIN_RIGHT,
        HEIGHT - MARGIN_BOTTOM
    )
    .unwrap();
    writeln!(
        svg,
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{MARGIN_TOP}\" x2=\"{MARGIN_LEFT}\" y2=\"{}\" stroke=\"black\"/>",
        HEIGHT - MARGIN_BOTTOM
    )
    .unwrap();

    // Tick labels.
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let y_val = y_min + t * (y_max - y_min);
        let y = sy(y_val);
        writeln!(
            svg,
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{:.1}</text>",
            MARGIN_LEFT - 6.0,
            y + 4.0,
            y_val
        )
        .unwrap();
        let x_val = x_min + t * (x_max - x_min);
        let x = sx(x_val);
        writeln!(
            svg,
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{:.0}</text>",
            x,
            HEIGHT - MARGIN_BOTTOM + 18.0,
            x_val
        )
        .unwrap();
    }
    writeln!(
        svg,
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">episode</text>",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    )
    .unwrap();
    writeln!(
        svg,
        "  <text x=\"16\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">cumulative reward</text>",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    )
    .unwrap();

    let raw: Vec<(f64, f64)> = episodes
        .iter()
        .zip(rewards)
        .map(|(&e, &r)| (sx(e as f64), sy(r)))
        .collect();
    svg.push_str(&polyline(&raw, "steelblue", 1.0));
    if ma_window > 1 {
        let ma = moving_average(rewards, ma_window);
        let smooth: Vec<(f64, f64)> = episodes
            .iter()
            .zip(&ma)
            .map(|(&e, &r)| (sx(e as f64), sy(r)))
            .collect();
        svg.push_str(&polyline(&smooth, "orangered", 2.0));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Read a metrics CSV and write its learning curve as SVG.
pub fn emit_learning_curve(
    metrics_csv: &Path,
    output: &Path,
    ma_window: usize,
) -> Result<(), HarnessError> {
    let records = read_metrics_csv(metrics_csv)?;
    if records.len() < 2 {
        return Err(HarnessError::Invalid(
            "plotting needs at least two episodes".into(),
        ));
    }
    let episodes: Vec<u32> = records.iter().map(|r| r.episode).collect();
    let rewards: Vec<f64> = records.iter().map(|r| r.cum_reward).collect();
    let svg = learning_curve_svg(&episodes, &rewards, ma_window);
    std::fs::write(output, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn moving_average_of_ramp() {
        // 1, 2, ..., 6 with window 3.
        let values = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let ma = moving_average(&values, 3);
        let expected = [1.0, 1.5, 2.0, 3.0, 4.0, 5.0];
        for (a, b) in ma.iter().zip(&expected) {
            assert_relative_eq!(a, b);
        }
    }

    #[test]
    fn two_point_curve_has_two_point_polyline() {
        let svg = learning_curve_svg(&[0, 1], &[1.0, 3.0], 1);
        let polylines = svg.matches("<polyline").count();
        assert_eq!(polylines, 1);
        let points = svg.split("points=\"").nth(1).unwrap();
        let coords = points.split('"').next().unwrap();
        assert_eq!(coords.split(' ').count(), 2);
    }

    #[test]
    fn constant_rewards_give_horizontal_polyline() {
        let svg = learning_curve_svg(&[0, 1, 2, 3], &[5.0; 4], 1);
        let points = svg.split("points=\"").nth(1).unwrap();
        let coords = points.split('"').next().unwrap();
        let ys: Vec<&str> = coords
            .split(' ')
            .map(|p| p.split(',').nth(1).unwrap())
            .collect();
        assert!(ys.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn overlay_appears_with_window() {
        let svg = learning_curve_svg(&[0, 1, 2, 3], &[0.0, 1.0, 4.0, 9.0], 10);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("orangered"));
    }
}
