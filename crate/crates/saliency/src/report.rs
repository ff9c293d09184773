//! Static SVG output: mean-with-SEM bar charts and saliency heatmaps.
//! Strings only; callers decide where the files go.

use crate::core::SaliencyMap;
use crate::stats::SummaryCell;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Bar chart of per-model means with 1.96 SEM error bars (95% CI whisker).
pub fn bar_chart_svg(title: &str, entries: &[(String, f64, f64)]) -> String {
    let bar_w = 48.0;
    let gap = 24.0;
    let margin = 60.0;
    let plot_h = 240.0;
    let width = margin * 2.0 + entries.len() as f64 * (bar_w + gap);
    let height = plot_h + 110.0;
    let top = entries
        .iter()
        .map(|(_, m, s)| m + 1.96 * s)
        .fold(0.0_f64, f64::max)
        .max(1e-12);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{:.0}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        width / 2.0,
        esc(title)
    ));
    let baseline = 40.0 + plot_h;
    svg.push_str(&format!(
        "<line x1=\"{margin:.0}\" y1=\"{baseline:.0}\" x2=\"{:.0}\" y2=\"{baseline:.0}\" \
         stroke=\"black\"/>\n",
        width - margin
    ));
    for (i, (label, mean, sem)) in entries.iter().enumerate() {
        let x = margin + i as f64 * (bar_w + gap) + gap / 2.0;
        let h = (mean / top).max(0.0) * plot_h;
        let y = baseline - h;
        svg.push_str(&format!(
            "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{bar_w:.1}\" height=\"{h:.1}\" \
             fill=\"steelblue\"/>\n"
        ));
        let cx = x + bar_w / 2.0;
        let err = 1.96 * sem / top * plot_h;
        svg.push_str(&format!(
            "<line x1=\"{cx:.1}\" y1=\"{:.1}\" x2=\"{cx:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
            y - err,
            (y + err).min(baseline)
        ));
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
            cx - 6.0,
            y - err,
            cx + 6.0,
            y - err
        ));
        svg.push_str(&format!(
            "<text x=\"{cx:.1}\" y=\"{:.0}\" text-anchor=\"middle\">{}</text>\n",
            baseline + 18.0,
            esc(label)
        ));
        svg.push_str(&format!(
            "<text x=\"{cx:.1}\" y=\"{:.0}\" text-anchor=\"middle\" font-size=\"10\">{:.3}</text>\n",
            baseline + 34.0,
            mean
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// One bar chart per (sequence, metric): model pooled means.
pub fn summary_bar_chart(sequence: &str, metric_label: &str, cells: &[&SummaryCell]) -> String {
    let entries: Vec<(String, f64, f64)> = cells
        .iter()
        .map(|c| (c.model.clone(), c.mean, c.sem))
        .collect();
    bar_chart_svg(&format!("{metric_label} on {sequence}"), &entries)
}

/// Grayscale heatmap of a saliency map, downsampled so the longer side
/// is at most `max_cells` rects.
pub fn heatmap_svg(title: &str, map: &SaliencyMap, max_cells: usize) -> String {
    let step = (map.width().max(map.height()) + max_cells - 1) / max_cells.max(1);
    let step = step.max(1);
    let gw = map.width().div_ceil(step);
    let gh = map.height().div_ceil(step);
    let cell = 4.0;
    let width = gw as f64 * cell + 20.0;
    let height = gh as f64 * cell + 50.0;
    let max = map.max_value().max(1e-12);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<text x=\"10\" y=\"20\" font-size=\"14\">{}</text>\n",
        esc(title)
    ));
    for gy in 0..gh {
        for gx in 0..gw {
            // block mean over the downsampling window
            let mut acc = 0.0;
            let mut n = 0;
            for y in (gy * step)..((gy + 1) * step).min(map.height()) {
                for x in (gx * step)..((gx + 1) * step).min(map.width()) {
                    acc += map.get(x, y);
                    n += 1;
                }
            }
            let v = acc / n as f64 / max;
            let level = (v * 255.0).round() as u8;
            svg.push_str(&format!(
                "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{cell}\" height=\"{cell}\" \
                 fill=\"rgb({level},{level},{level})\"/>\n",
                10.0 + gx as f64 * cell,
                30.0 + gy as f64 * cell
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}
