//! Dependency-free SVG charts built from the CSV documents in this module.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{FigureKind, FigureSpec};
use crate::error::{format_err, Result};
use crate::theory::Mode;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;

const SERIES_COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];
// Viridis, sampled at five points.
const RAMP: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

struct Table {
    columns: Vec<usize>,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn parse(text: &str, wanted: &[&str]) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| format_err!("unreadable CSV header: {e}"))?
            .clone();
        let columns = wanted
            .iter()
            .map(|name| {
                headers
                    .iter()
                    .position(|h| h == *name)
                    .ok_or_else(|| format_err!("CSV is missing the `{name}` column"))
            })
            .collect::<Result<Vec<_>>>()?;
        let rows = reader
            .records()
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| format_err!("malformed CSV row: {e}"))?;
        if rows.is_empty() {
            return Err(format_err!("CSV has no data rows"));
        }
        Ok(Self { columns, rows })
    }

    fn number(&self, row: &csv::StringRecord, column: usize) -> Result<f64> {
        let raw = &row[self.columns[column]];
        raw.parse::<f64>()
            .map_err(|_| format_err!("`{raw}` is not a number"))
    }
}

/// Renders `csv` (a theory grid for surface figures, an experiment summary
/// for curve figures) as a standalone SVG document.
pub fn render_chart(csv: &str, spec: &FigureSpec) -> Result<String> {
    spec.validate()?;
    match spec.kind {
        FigureKind::Surface | FigureKind::LogSurface => heatmap(csv, spec),
        FigureKind::ExperimentCurves => curves(csv, spec),
    }
}

fn open_document(title: &str) -> String {
    let mut svg = String::new();
    let _ = write!(
        svg,
        concat!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n",
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
            "<style>text{{font-family:sans-serif;font-size:12px}} .title{{font-size:16px}} ",
            ".axis{{stroke:#333;stroke-width:1}} .empirical{{fill:none;stroke-width:2}} ",
            ".theory{{fill:none;stroke-width:1.5;stroke-dasharray:6 4}}</style>\n",
            "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
            "<text class=\"title\" x=\"{tx}\" y=\"28\" text-anchor=\"middle\">{title}</text>\n",
        ),
        w = WIDTH,
        h = HEIGHT,
        tx = WIDTH / 2.0,
        title = title,
    );
    svg
}

fn plot_width() -> f64 {
    WIDTH - LEFT - RIGHT
}

fn plot_height() -> f64 {
    HEIGHT - TOP - BOTTOM
}

fn axes(svg: &mut String, x_label: &str, y_label: &str) {
    let (x0, y0) = (LEFT, TOP + plot_height());
    let _ = writeln!(
        svg,
        "<line class=\"axis\" x1=\"{x0}\" y1=\"{y0}\" x2=\"{}\" y2=\"{y0}\"/>",
        x0 + plot_width()
    );
    let _ = writeln!(
        svg,
        "<line class=\"axis\" x1=\"{x0}\" y1=\"{TOP}\" x2=\"{x0}\" y2=\"{y0}\"/>"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{x_label}</text>",
        LEFT + plot_width() / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"20\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {:.1})\">{y_label}</text>",
        TOP + plot_height() / 2.0,
        TOP + plot_height() / 2.0
    );
}

fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0) * (RAMP.len() - 1) as f64;
    let i = (t.floor() as usize).min(RAMP.len() - 2);
    let f = t - i as f64;
    let (a, b) = (RAMP[i], RAMP[i + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(a.0, b.0),
        mix(a.1, b.1),
        mix(a.2, b.2)
    )
}

/// At most `max` evenly spaced indices into `0..n`, always including the last.
fn tick_indices(n: usize, max: usize) -> Vec<usize> {
    let step = n.div_ceil(max).max(1);
    let mut ticks: Vec<usize> = (0..n).step_by(step).collect();
    if ticks.last() != Some(&(n - 1)) {
        ticks.push(n - 1);
    }
    ticks
}

fn heatmap(csv: &str, spec: &FigureSpec) -> Result<String> {
    let table = Table::parse(csv, &["m", "k", "log10_p"])?;
    let mut cells = BTreeMap::new();
    for row in &table.rows {
        let m = table.number(row, 0)? as u32;
        let k = table.number(row, 1)? as u64;
        cells.insert((m, k), table.number(row, 2)?);
    }
    let mut ms: Vec<u32> = cells.keys().map(|c| c.0).collect();
    ms.dedup();
    let mut ks: Vec<u64> = cells.keys().map(|c| c.1).collect();
    ks.sort_unstable();
    ks.dedup();

    let finite = cells.values().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };

    let mode = match spec.mode {
        Mode::Standard => "standard",
        Mode::BirthdayAttack => "birthday-attack",
    };
    let mut svg = open_document(&format!("Root collision probability ({mode} mode)"));
    let cw = plot_width() / ks.len() as f64;
    let ch = plot_height() / ms.len() as f64;
    let _ = writeln!(svg, "<g class=\"cells\">");
    for (&(m, k), &v) in &cells {
        let col = ks.binary_search(&k).expect("collected key");
        let row = ms.binary_search(&m).expect("collected key");
        // Larger m at the top.
        let y = TOP + (ms.len() - 1 - row) as f64 * ch;
        let _ = writeln!(
            svg,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"><title>m={m} k={k} log10 p={v:.4}</title></rect>",
            LEFT + col as f64 * cw,
            y,
            cw + 0.05,
            ch + 0.05,
            ramp((v - lo) / span)
        );
    }
    let _ = writeln!(svg, "</g>");
    axes(&mut svg, "path length k", "hash length m (bits)");
    for i in tick_indices(ks.len(), 10) {
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            LEFT + (i as f64 + 0.5) * cw,
            TOP + plot_height() + 18.0,
            ks[i]
        );
    }
    for i in tick_indices(ms.len(), 17) {
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" dominant-baseline=\"middle\">{}</text>",
            LEFT - 6.0,
            TOP + (ms.len() - 1 - i) as f64 * ch + ch / 2.0,
            ms[i]
        );
    }

    // Colour bar.
    let bx = WIDTH - RIGHT + 30.0;
    let _ = writeln!(
        svg,
        "<defs><linearGradient id=\"ramp\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">"
    );
    for i in 0..=10 {
        let t = f64::from(i) / 10.0;
        let _ = writeln!(svg, "<stop offset=\"{t}\" stop-color=\"{}\"/>", ramp(t));
    }
    let _ = writeln!(svg, "</linearGradient></defs>");
    let _ = writeln!(
        svg,
        "<rect x=\"{bx}\" y=\"{TOP}\" width=\"20\" height=\"{}\" fill=\"url(#ramp)\"/>",
        plot_height()
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{TOP}\" dominant-baseline=\"hanging\">{hi:.3}</text>",
        bx + 26.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\">{lo:.3}</text>",
        bx + 26.0,
        TOP + plot_height()
    );
    let _ = writeln!(svg, "<text x=\"{bx}\" y=\"{}\">log10 p</text>", TOP - 8.0);
    svg.push_str("</svg>\n");
    Ok(svg)
}

struct Point {
    k: f64,
    empirical: f64,
    theoretical: f64,
}

fn curves(csv: &str, spec: &FigureSpec) -> Result<String> {
    let table = Table::parse(csv, &["m", "k", "empirical_mean", "theoretical"])?;
    let mut series: BTreeMap<u32, Vec<Point>> = BTreeMap::new();
    for row in &table.rows {
        series
            .entry(table.number(row, 0)? as u32)
            .or_default()
            .push(Point {
                k: table.number(row, 1)?,
                empirical: table.number(row, 2)?,
                theoretical: table.number(row, 3)?,
            });
    }
    for points in series.values_mut() {
        points.sort_by(|a, b| a.k.total_cmp(&b.k));
    }
    let all = || series.values().flatten();
    let k_lo = all().map(|p| p.k).fold(f64::INFINITY, f64::min);
    let k_hi = all().map(|p| p.k).fold(f64::NEG_INFINITY, f64::max);
    let k_span = if k_hi > k_lo { k_hi - k_lo } else { 1.0 };
    let values = || all().flat_map(|p| [p.empirical, p.theoretical]);

    let (y_lo, y_hi) = if spec.log_y {
        let min_pos = values().filter(|&v| v > 0.0).fold(1.0, f64::min);
        (min_pos.log10().floor().min(-1.0), 0.0)
    } else {
        (0.0, values().fold(0.0, f64::max).max(f64::MIN_POSITIVE))
    };
    let scale_y = |v: f64| -> Option<f64> {
        let v = if spec.log_y {
            if v <= 0.0 {
                return None;
            }
            v.log10()
        } else {
            v
        };
        Some(TOP + plot_height() * (1.0 - (v - y_lo) / (y_hi - y_lo)))
    };
    let scale_x = |k: f64| LEFT + plot_width() * (k - k_lo) / k_span;

    let mut svg = open_document("Root collision frequency: experiment against theory");
    axes(
        &mut svg,
        "path length k",
        if spec.log_y {
            "collision probability (log scale)"
        } else {
            "collision probability"
        },
    );
    let mut ks: Vec<f64> = all().map(|p| p.k).collect();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    for i in tick_indices(ks.len(), 16) {
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            scale_x(ks[i]),
            TOP + plot_height() + 18.0,
            ks[i]
        );
    }
    if spec.log_y {
        for e in (y_lo as i32)..=0 {
            let _ = writeln!(
                svg,
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" dominant-baseline=\"middle\">1e{e}</text>",
                LEFT - 6.0,
                TOP + plot_height() * (1.0 - (f64::from(e) - y_lo) / (y_hi - y_lo))
            );
        }
    } else {
        for i in 0..=4 {
            let v = y_lo + (y_hi - y_lo) * f64::from(i) / 4.0;
            let _ = writeln!(
                svg,
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" dominant-baseline=\"middle\">{v:.3}</text>",
                LEFT - 6.0,
                scale_y(v).unwrap_or(TOP)
            );
        }
    }

    for (i, (m, points)) in series.iter().enumerate() {
        let color = SERIES_COLORS[i % SERIES_COLORS.len()];
        // Zero frequencies have no logarithm; they break the line instead.
        let mut empirical = String::new();
        let mut pen_down = false;
        for p in points {
            match scale_y(p.empirical) {
                Some(y) => {
                    let cmd = if pen_down { 'L' } else { 'M' };
                    let _ = write!(empirical, "{cmd}{:.2},{y:.2} ", scale_x(p.k));
                    pen_down = true;
                }
                None => pen_down = false,
            }
        }
        let mut theory = String::new();
        let mut pen_down = false;
        for p in points {
            if let Some(y) = scale_y(p.theoretical) {
                let cmd = if pen_down { 'L' } else { 'M' };
                let _ = write!(theory, "{cmd}{:.2},{y:.2} ", scale_x(p.k));
                pen_down = true;
            }
        }
        let _ = writeln!(
            svg,
            "<path class=\"empirical\" data-m=\"{m}\" stroke=\"{color}\" d=\"{}\"/>",
            empirical.trim_end()
        );
        let _ = writeln!(
            svg,
            "<path class=\"theory\" data-m=\"{m}\" stroke=\"{color}\" d=\"{}\"/>",
            theory.trim_end()
        );
        let ly = TOP + 10.0 + i as f64 * 20.0;
        let lx = WIDTH - RIGHT + 20.0;
        let _ = writeln!(
            svg,
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/><text x=\"{}\" y=\"{ly}\" dominant-baseline=\"middle\">m = {m}</text>",
            lx + 24.0,
            lx + 30.0
        );
    }
    let ly = TOP + 20.0 + series.len() as f64 * 20.0;
    let lx = WIDTH - RIGHT + 20.0;
    let _ = writeln!(
        svg,
        "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"#333\" stroke-width=\"2\"/><text x=\"{}\" y=\"{ly}\" dominant-baseline=\"middle\">empirical</text>",
        lx + 24.0,
        lx + 30.0
    );
    let _ = writeln!(
        svg,
        "<line class=\"theory\" x1=\"{lx}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333\"/><text x=\"{}\" y=\"{}\" dominant-baseline=\"middle\">theory</text>",
        ly + 20.0,
        lx + 24.0,
        ly + 20.0,
        lx + 30.0,
        ly + 20.0
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::emit_theory_grid;

    fn parse(svg: &str) -> roxmltree::Document<'_> {
        roxmltree::Document::parse(svg).expect("well-formed XML")
    }

    #[test]
    fn surface_has_one_cell_per_grid_point() {
        let spec = FigureSpec::figure2();
        let svg = render_chart(&emit_theory_grid(&spec).unwrap(), &spec).unwrap();
        assert!(svg.len() < 2 * 1024 * 1024);
        let doc = parse(&svg);
        let cells = doc
            .descendants()
            .find(|n| n.attribute("class") == Some("cells"))
            .unwrap()
            .children()
            .filter(|n| n.has_tag_name("rect"))
            .count();
        assert_eq!(cells, 17 * 65);
    }

    #[test]
    fn curves_break_on_zero_frequencies() {
        let csv = "m,k,trials,repeats,empirical_mean,empirical_std,theoretical,seed\n\
                   4,1,10,2,0.1,0.01,0.12,1\n4,2,10,2,0.0,0.0,0.18,1\n4,3,10,2,0.2,0.01,0.23,1\n\
                   8,1,10,2,0.01,0.0,0.008,1\n8,2,10,2,0.02,0.0,0.012,1\n";
        let spec = FigureSpec::figure4(vec![4, 8], vec![1, 2, 3]);
        let svg = render_chart(csv, &spec).unwrap();
        let doc = parse(&svg);
        let paths: Vec<_> = doc
            .descendants()
            .filter(|n| n.has_tag_name("path"))
            .collect();
        assert_eq!(paths.len(), 4);
        let m4 = paths
            .iter()
            .find(|n| {
                n.attribute("class") == Some("empirical") && n.attribute("data-m") == Some("4")
            })
            .unwrap();
        assert_eq!(m4.attribute("d").unwrap().matches('M').count(), 2);
    }

    #[test]
    fn bad_input_is_a_format_error() {
        let spec = FigureSpec::figure1();
        for csv in [
            "",
            "m,k,mode,p,log10_p\n",
            "a,b\n1,2\n",
            "m,k,mode,p,log10_p\n1,2,standard\n",
        ] {
            assert!(
                matches!(render_chart(csv, &spec), Err(crate::Error::Format(_))),
                "{csv:?}"
            );
        }
        let bad_number = "m,k,mode,p,log10_p\n1,2,standard,x,y\n";
        assert!(matches!(
            render_chart(bad_number, &spec),
            Err(crate::Error::Format(_))
        ));
    }

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp(0.0), "#440154");
        assert_eq!(ramp(1.0), "#fde725");
        assert_eq!(ramp(7.0), "#fde725");
    }

    #[test]
    fn ticks_cover_both_ends() {
        assert_eq!(
            tick_indices(65, 10),
            vec![0, 7, 14, 21, 28, 35, 42, 49, 56, 63, 64]
        );
        assert_eq!(tick_indices(1, 10), vec![0]);
    }
}
