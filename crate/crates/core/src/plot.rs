//! Histogram data and a minimal SVG bar chart for bootstrap null distributions.

use std::fmt::Write as _;

use serde::Serialize;

pub const DEFAULT_BINS: usize = 30;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

/// Equal-width bins over the range of `values` extended to include `marker`.
pub fn histogram(values: &[f64], marker: f64, bins: usize) -> Vec<Bin> {
    let bins = bins.max(1);
    let (mut lo, mut hi) = values.iter().fold((marker, marker), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi - lo <= f64::EPSILON * lo.abs().max(hi.abs()).max(1.0) {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let idx = (((v - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| Bin {
            lower: lo + i as f64 * width,
            upper: if i + 1 == bins { hi } else { lo + (i + 1) as f64 * width },
            count,
        })
        .collect()
}

pub fn histogram_csv(bins: &[Bin]) -> String {
    let mut out = String::from("bin_lower,bin_upper,count\n");
    for b in bins {
        let _ = writeln!(out, "{},{},{}", b.lower, b.upper, b.count);
    }
    out
}

pub fn values_csv(header: &str, values: &[f64]) -> String {
    let mut out = format!("{header}\n");
    for v in values {
        let _ = writeln!(out, "{v}");
    }
    out
}

/// Bar chart of `bins` with a vertical line at `marker`.
pub fn histogram_svg(bins: &[Bin], marker: f64, title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 40.0;
    let lo = bins.first().map_or(0.0, |b| b.lower);
    let hi = bins.last().map_or(1.0, |b| b.upper);
    let max_count = bins.iter().map(|b| b.count).max().unwrap_or(0).max(1) as f64;
    let x = |v: f64| PAD + (v - lo) / (hi - lo) * (W - 2.0 * PAD);
    let y = |c: f64| H - PAD - c / max_count * (H - 2.0 * PAD);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    for b in bins {
        let (x0, x1) = (x(b.lower), x(b.upper));
        let top = y(b.count as f64);
        let _ = writeln!(
            svg,
            r##"<rect x="{x0:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="#8da0cb" stroke="#4a5a8a"/>"##,
            (x1 - x0).max(0.0),
            (H - PAD - top).max(0.0)
        );
    }
    let _ = writeln!(svg, r#"<line x1="{PAD}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/>"#, H - PAD, W - PAD);
    let mx = x(marker);
    let _ =
        writeln!(svg, r#"<line x1="{mx:.2}" y1="{PAD}" x2="{mx:.2}" y2="{}" stroke="red" stroke-width="2"/>"#, H - PAD);
    let _ = writeln!(
        svg,
        r#"<text x="{PAD}" y="{}" font-family="sans-serif" font-size="11">{lo:.4}</text>"#,
        H - PAD + 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{hi:.4}</text>"#,
        W - PAD,
        H - PAD + 16.0
    );
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_cover_marker_and_values() {
        let values = [0.0, 0.1, 0.2, 0.3];
        let bins = histogram(&values, 1.0, 10);
        assert_eq!(bins.len(), 10);
        assert_eq!(bins[0].lower, 0.0);
        assert_eq!(bins[9].upper, 1.0);
        assert_eq!(bins.iter().map(|b| b.count).sum::<usize>(), 4);
        assert_eq!(bins[9].count, 0);
    }

    #[test]
    fn degenerate_range_is_widened() {
        let bins = histogram(&[2.0, 2.0], 2.0, 30);
        assert_eq!(bins.len(), 30);
        assert!(bins[0].lower < 2.0 && bins[29].upper > 2.0);
        assert_eq!(bins.iter().map(|b| b.count).sum::<usize>(), 2);
    }

    #[test]
    fn csv_and_svg_shapes() {
        let bins = histogram(&[0.0, 1.0], 0.5, 2);
        assert_eq!(histogram_csv(&bins), "bin_lower,bin_upper,count\n0,0.5,1\n0.5,1,1\n");
        let svg = histogram_svg(&bins, 0.5, "a < b");
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg.matches("<rect").count(), 3);
        assert_eq!(values_csv("null_stat", &[1.5]), "null_stat\n1.5\n");
    }
}
