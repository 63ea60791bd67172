//! Plain SVG charts of training metrics and spectrum evolution.
//!
//! Every series is one `<polyline>` whose `points` attribute lists one
//! `x,y` pair per data point, so charts can be checked by parsing.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

const WIDTH: f64 = 720.0;
const PANEL_HEIGHT: f64 = 260.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_Y: f64 = 30.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub color: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Panel {
    pub title: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

/// Parsed rows of a CSV file; `line` numbers are 1-based with the header on line 1.
struct Table {
    header: Vec<String>,
    rows: Vec<(usize, Vec<String>)>,
}

fn config_err(name: &str, line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{name}: line {line}: {msg}"))
}

fn read_table(name: &str, text: &str) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| config_err(name, 1, e))?
        .iter()
        .map(|s| s.to_string())
        .collect();
    if header.is_empty() || header == [""] {
        return Err(config_err(name, 1, "missing header"));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            config_err(name, line, e)
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        rows.push((line, rec.iter().map(|s| s.to_string()).collect()));
    }
    Ok(Table { header, rows })
}

fn number(name: &str, line: usize, cell: &str) -> Result<f64> {
    cell.trim().parse::<f64>().map_err(|_| config_err(name, line, format!("not a number: {cell:?}")))
}

/// What a CSV file holds, judged by its header.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CsvKind {
    Metrics,
    Spectrum,
    Modes,
}

pub fn detect_kind(name: &str, text: &str) -> Result<CsvKind> {
    let first = text.lines().next().unwrap_or("").trim();
    if first.starts_with("epoch,train_l2,test_l2,lr,wall_ms") {
        Ok(CsvKind::Metrics)
    } else if first == "epoch,layer,dim,mode,strength" {
        Ok(CsvKind::Spectrum)
    } else if first == "epoch,layer,dim,k_before,k_after,ratio" {
        Ok(CsvKind::Modes)
    } else {
        Err(config_err(name, 1, format!("unrecognized header {first:?}")))
    }
}

/// Loss panel (train and test, log scale) above a panel of effective modes per layer and axis.
pub fn metrics_panels(name: &str, text: &str) -> Result<Vec<Panel>> {
    let table = read_table(name, text)?;
    let layers = table.header.len().saturating_sub(5);
    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut modes: BTreeMap<(usize, usize), Vec<(f64, f64)>> = BTreeMap::new();
    for (line, row) in &table.rows {
        if row.len() != table.header.len() {
            return Err(config_err(name, *line, format!("expected {} fields, found {}", table.header.len(), row.len())));
        }
        let epoch = number(name, *line, &row[0])?;
        train.push((epoch, number(name, *line, &row[1])?));
        test.push((epoch, number(name, *line, &row[2])?));
        for l in 0..layers {
            for (dim, k) in row[5 + l].split('x').enumerate() {
                modes.entry((l, dim)).or_default().push((epoch, number(name, *line, k)?));
            }
        }
    }
    let loss_series = vec![
        Series { label: "train".into(), color: PALETTE[0].into(), points: train },
        Series { label: "test".into(), color: PALETTE[1].into(), points: test },
    ];
    let log_y = loss_series.iter().flat_map(|s| &s.points).all(|p| p.1 > 0.0);
    let multi_axis = modes.keys().any(|k| k.1 > 0);
    let mode_series = modes
        .into_iter()
        .enumerate()
        .map(|(i, ((l, dim), points))| Series {
            label: if !multi_axis { format!("K layer {}", l + 1) } else { format!("K layer {} axis {}", l + 1, dim) },
            color: PALETTE[i % PALETTE.len()].into(),
            points,
        })
        .collect();
    Ok(vec![
        Panel { title: "relative L2 loss".into(), y_label: "loss".into(), log_y, series: loss_series },
        Panel { title: "effective modes".into(), y_label: "K".into(), log_y: false, series: mode_series },
    ])
}

/// One panel per layer with a line per (axis, mode) over epochs; darker lines are lower modes.
pub fn spectrum_panels(name: &str, text: &str) -> Result<Vec<Panel>> {
    let table = read_table(name, text)?;
    let mut lines: BTreeMap<usize, BTreeMap<(usize, usize), Vec<(f64, f64)>>> = BTreeMap::new();
    for (line, row) in &table.rows {
        if row.len() != 5 {
            return Err(config_err(name, *line, format!("expected 5 fields, found {}", row.len())));
        }
        let epoch = number(name, *line, &row[0])?;
        let index = |i: usize| -> Result<usize> {
            row[i].trim().parse().map_err(|_| config_err(name, *line, format!("not an index: {:?}", row[i])))
        };
        let (layer, dim, mode) = (index(1)?, index(2)?, index(3)?);
        let strength = number(name, *line, &row[4])?;
        lines.entry(layer).or_default().entry((dim, mode)).or_default().push((epoch, strength));
    }
    let mut panels = Vec::new();
    for (layer, series) in lines {
        let max_mode = series.keys().map(|k| k.1).max().unwrap_or(0).max(1) as f64;
        let out: Vec<Series> = series
            .into_iter()
            .map(|((dim, mode), points)| {
                let hue = if dim == 0 { 220 } else { 20 };
                let lightness = 15.0 + 65.0 * mode as f64 / max_mode;
                Series { label: format!("axis {dim} mode {mode}"), color: format!("hsl({hue},70%,{lightness:.0}%)"), points }
            })
            .collect();
        let log_y = out.iter().flat_map(|s| &s.points).all(|p| p.1 > 0.0);
        panels.push(Panel { title: format!("layer {} frequency strength", layer + 1), y_label: "S_k".into(), log_y, series: out });
    }
    if panels.is_empty() {
        panels.push(Panel { title: "frequency strength".into(), y_label: "S_k".into(), log_y: false, series: Vec::new() });
    }
    Ok(panels)
}

/// Effective modes before and after each check, one line per (layer, axis).
pub fn modes_panels(name: &str, text: &str) -> Result<Vec<Panel>> {
    let table = read_table(name, text)?;
    let mut lines: BTreeMap<(usize, usize), Vec<(f64, f64)>> = BTreeMap::new();
    for (line, row) in &table.rows {
        if row.len() != 6 {
            return Err(config_err(name, *line, format!("expected 6 fields, found {}", row.len())));
        }
        let epoch = number(name, *line, &row[0])?;
        let layer = number(name, *line, &row[1])? as usize;
        let dim = number(name, *line, &row[2])? as usize;
        lines.entry((layer, dim)).or_default().push((epoch, number(name, *line, &row[4])?));
    }
    let series = lines
        .into_iter()
        .enumerate()
        .map(|(i, ((l, d), points))| Series {
            label: format!("layer {} axis {d}", l + 1),
            color: PALETTE[i % PALETTE.len()].into(),
            points,
        })
        .collect();
    Ok(vec![Panel { title: "effective modes after each check".into(), y_label: "K".into(), log_y: false, series }])
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders panels stacked vertically, sharing the x axis label.
pub fn render(title: &str, x_label: &str, panels: &[Panel]) -> String {
    let height = MARGIN_Y + panels.len() as f64 * (PANEL_HEIGHT + MARGIN_Y) + 20.0;
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(svg, r#"<text x="{}" y="18" font-size="14" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title)).unwrap();
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    for (i, panel) in panels.iter().enumerate() {
        let top = MARGIN_Y + i as f64 * (PANEL_HEIGHT + MARGIN_Y);
        let plot_h = PANEL_HEIGHT - 30.0;
        let all: Vec<(f64, f64)> = panel.series.iter().flat_map(|s| s.points.iter().copied()).collect();
        let ty = |y: f64| if panel.log_y { y.log10() } else { y };
        let (mut x0, mut x1) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
        let (mut y0, mut y1) =
            all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(ty(p.1)), b.max(ty(p.1))));
        if !x0.is_finite() {
            (x0, x1) = (0.0, 1.0);
        }
        if !y0.is_finite() {
            (y0, y1) = (0.0, 1.0);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
        let px = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
        let py = |y: f64| top + plot_h - (ty(y) - y0) / (y1 - y0) * plot_h;

        writeln!(svg, r#"<g class="panel">"#).unwrap();
        writeln!(svg, r#"<text x="{MARGIN_LEFT}" y="{:.2}" font-size="12">{}</text>"#, top - 6.0, escape(&panel.title)).unwrap();
        writeln!(
            svg,
            r##"<rect class="axes" x="{MARGIN_LEFT}" y="{top:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="#333"/>"##
        )
        .unwrap();
        for t in 0..=4 {
            let f = t as f64 / 4.0;
            let xv = x0 + f * (x1 - x0);
            let yv = y0 + f * (y1 - y0);
            let label_y = if panel.log_y { 10f64.powf(yv) } else { yv };
            let sx = MARGIN_LEFT + f * plot_w;
            let sy = top + plot_h - f * plot_h;
            writeln!(svg, r#"<text x="{sx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, top + plot_h + 14.0, fmt_tick(xv)).unwrap();
            writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, MARGIN_LEFT - 4.0, sy + 4.0, fmt_tick(label_y)).unwrap();
        }
        writeln!(
            svg,
            r#"<text x="14" y="{:.2}" transform="rotate(-90 14 {:.2})" text-anchor="middle">{}</text>"#,
            top + plot_h / 2.0,
            top + plot_h / 2.0,
            escape(&panel.y_label)
        )
        .unwrap();
        writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, MARGIN_LEFT + plot_w / 2.0, top + plot_h + 27.0, escape(x_label)).unwrap();
        for (j, s) in panel.series.iter().filter(|s| !s.points.is_empty()).enumerate() {
            let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            writeln!(
                svg,
                r#"<polyline class="series" data-label="{}" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                escape(&s.label),
                s.color,
                pts.join(" ")
            )
            .unwrap();
            if j < 16 {
                let ly = top + 10.0 + j as f64 * 13.0;
                let lx = MARGIN_LEFT + plot_w + 10.0;
                writeln!(svg, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="2"/>"#, lx + 16.0, s.color)
                    .unwrap();
                writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 20.0, ly + 4.0, escape(&s.label)).unwrap();
            }
        }
        writeln!(svg, "</g>").unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

/// Chart for a CSV produced by training, chosen by its header.
pub fn plot_csv(name: &str, text: &str) -> Result<String> {
    let (title, panels) = match detect_kind(name, text)? {
        CsvKind::Metrics => ("loss and effective modes", metrics_panels(name, text)?),
        CsvKind::Spectrum => ("frequency evolution", spectrum_panels(name, text)?),
        CsvKind::Modes => ("scheduler checks", modes_panels(name, text)?),
    };
    Ok(render(title, "epoch", &panels))
}

/// Number of points in every polyline of an SVG produced by [`render`].
pub fn polyline_point_counts(svg: &str) -> Vec<usize> {
    svg.match_indices("<polyline")
        .map(|(i, _)| {
            let rest = &svg[i..];
            let start = rest.find("points=\"").map(|p| p + 8).unwrap_or(0);
            let end = rest[start..].find('"').unwrap_or(0);
            rest[start..start + end].split_whitespace().count()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_metrics_has_axes_and_no_series() {
        let svg = plot_csv("m.csv", "epoch,train_l2,test_l2,lr,wall_ms,K_l1\n").unwrap();
        assert!(svg.contains("class=\"axes\""));
        assert!(polyline_point_counts(&svg).is_empty());
    }

    #[test]
    fn two_epochs_two_points_per_series() {
        let text = "epoch,train_l2,test_l2,lr,wall_ms,K_l1,K_l2\n0,0.5,0.6,0.001,0,1,1\n1,0.4,0.5,0.001,0,2,1\n";
        let svg = plot_csv("m.csv", text).unwrap();
        let counts = polyline_point_counts(&svg);
        assert_eq!(counts, vec![2, 2, 2, 2]);
    }

    #[test]
    fn spectrum_one_line_per_mode() {
        let mut text = String::from("epoch,layer,dim,mode,strength\n");
        for e in 0..10 {
            for m in 0..6 {
                text.push_str(&format!("{e},0,0,{m},{}\n", 1.0 / (m + 1) as f64));
            }
        }
        let svg = plot_csv("s.csv", &text).unwrap();
        assert_eq!(polyline_point_counts(&svg), vec![10; 6]);
        assert_eq!(svg, plot_csv("s.csv", &text).unwrap());
    }

    #[test]
    fn malformed_rows_name_the_line() {
        let text = "epoch,layer,dim,mode,strength\n0,0,0,0,1.0\n1,0,0,zero,1.0\n";
        let err = plot_csv("s.csv", text).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        let err = plot_csv("x.csv", "a,b\n1,2\n").unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }
}
