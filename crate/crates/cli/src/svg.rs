//! Deterministic SVG rendering of a variogram with its fitted line.
//!
//! Fixed 800x600 canvas, no timestamps, stable decimal formatting: the same
//! inputs always produce the same bytes.

use rainvar_core::modelfit::FitRecord;
use rainvar_core::variogram::EmpiricalVariogram;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;
const TICK_INTERVALS: usize = 5;

fn fmt_coord(x: f64) -> String {
    format!("{x:.2}")
}

fn fmt_tick(x: f64) -> String {
    let s = format!("{x:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Renders the chart: axes with numeric ticks, one circle marker per bin,
/// and one line segment for the fitted model from h = 0 to max_lag.
pub fn render(v: &EmpiricalVariogram, record: &FitRecord) -> String {
    let fit = &record.fit;
    let xmax = v.max_lag;
    let mut ymax = v.bins.iter().map(|b| b.semivariance).fold(0.0, f64::max);
    for y in [fit.intercept, fit.intercept + fit.slope * xmax] {
        ymax = ymax.max(y);
    }
    let ymax = if ymax > 0.0 { ymax * 1.05 } else { 1.0 };

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |h: f64| MARGIN_LEFT + h / xmax * plot_w;
    let sy = |val: f64| HEIGHT - MARGIN_BOTTOM - val / ymax * plot_h;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>\n"
    ));
    out.push_str(&format!(
        "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333333\"/>\n",
        fmt_coord(MARGIN_LEFT),
        fmt_coord(MARGIN_TOP),
        fmt_coord(plot_w),
        fmt_coord(plot_h)
    ));

    for i in 0..=TICK_INTERVALS {
        let frac = i as f64 / TICK_INTERVALS as f64;
        let h = xmax * frac;
        let x = sx(h);
        out.push_str(&format!(
            "  <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"#333333\"/>\n",
            x0 = fmt_coord(x),
            y0 = fmt_coord(HEIGHT - MARGIN_BOTTOM),
            y1 = fmt_coord(HEIGHT - MARGIN_BOTTOM + 6.0)
        ));
        out.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            fmt_coord(x),
            fmt_coord(HEIGHT - MARGIN_BOTTOM + 20.0),
            fmt_tick(h)
        ));

        let val = ymax * frac;
        let y = sy(val);
        out.push_str(&format!(
            "  <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"#333333\"/>\n",
            x0 = fmt_coord(MARGIN_LEFT - 6.0),
            x1 = fmt_coord(MARGIN_LEFT),
            y0 = fmt_coord(y)
        ));
        out.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
            fmt_coord(MARGIN_LEFT - 10.0),
            fmt_coord(y + 4.0),
            fmt_tick(val)
        ));
    }

    out.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\">lag h</text>\n",
        fmt_coord(MARGIN_LEFT + plot_w / 2.0),
        fmt_coord(HEIGHT - 10.0)
    ));
    out.push_str(&format!(
        "  <text x=\"18\" y=\"{0}\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">V(h)</text>\n",
        fmt_coord(MARGIN_TOP + plot_h / 2.0)
    ));
    out.push_str(&format!(
        "  <text x=\"{}\" y=\"24\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\">{}: V(h) = {:.4} + {:.4} h, {:.2}% explained</text>\n",
        fmt_coord(WIDTH / 2.0),
        escape(&v.label),
        fit.intercept,
        fit.slope,
        fit.pct_explained
    ));

    let line_at = |h: f64| fit.intercept + fit.slope * h;
    let (mut h0, mut h1) = (0.0f64, xmax);
    if line_at(h0) >= 0.0 || line_at(h1) >= 0.0 {
        if line_at(h0) < 0.0 {
            h0 = -fit.intercept / fit.slope;
        }
        if line_at(h1) < 0.0 {
            h1 = -fit.intercept / fit.slope;
        }
        out.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#c4452d\" stroke-width=\"1.5\"/>\n",
            fmt_coord(sx(h0)),
            fmt_coord(sy(line_at(h0))),
            fmt_coord(sx(h1)),
            fmt_coord(sy(line_at(h1)))
        ));
    }

    for bin in &v.bins {
        out.push_str(&format!(
            "  <circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"#2a6f97\"/>\n",
            fmt_coord(sx(bin.mean_lag)),
            fmt_coord(sy(bin.semivariance))
        ));
    }

    out.push_str("</svg>\n");
    out
}
