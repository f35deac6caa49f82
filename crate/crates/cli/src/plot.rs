//! Renders margin charts from a report CSV: relative margin against grid
//! resolution (cell count) on the left, against the first varying surface
//! parameter on the right. One polyline per report name.

use std::collections::BTreeMap;
use std::path::Path;

use crate::config::CliError;

const PALETTE: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

struct PlotRow {
    name: String,
    relative_margin: f64,
    cells: f64,
    params: BTreeMap<String, f64>,
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

struct Panel {
    title: String,
    x_label: String,
    series: Vec<Series>,
}

/// Reads `csv` (the report schema written by `run`) and writes a two-panel
/// SVG chart to `output`. An empty CSV is a usage error.
pub fn plot_reports(csv: &Path, output: &Path) -> Result<(), CliError> {
    let rows = read_rows(csv)?;
    if rows.is_empty() {
        return Err(CliError::usage(format!(
            "report CSV `{}` has no data rows",
            csv.display()
        )));
    }

    let resolution_panel = Panel {
        title: "relative margin vs resolution".into(),
        x_label: "grid cells".into(),
        series: group_series(&rows, |row| Some(row.cells)),
    };
    let (param_key, param_label) = pick_parameter(&rows);
    let parameter_panel = Panel {
        title: format!("relative margin vs {param_label}"),
        x_label: param_label,
        series: group_series(&rows, |row| match &param_key {
            Some(key) => row.params.get(key).copied(),
            None => Some(row.cells),
        }),
    };

    let svg = render(&[resolution_panel, parameter_panel]);
    std::fs::write(output, svg)?;
    println!("wrote {}", output.display());
    Ok(())
}

fn read_rows(path: &Path) -> Result<Vec<PlotRow>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::usage(format!("report CSV `{}`: {e}", path.display())))?;

    let headers = reader
        .headers()
        .map_err(|e| CliError::usage(format!("report CSV `{}`: {e}", path.display())))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let (name_col, margin_col, resolution_col) = match (
        column("name"),
        column("relative_margin"),
        column("resolution"),
    ) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => {
            return Err(CliError::usage(format!(
                "report CSV `{}` is missing the name/relative_margin/resolution columns",
                path.display()
            )));
        }
    };
    let params_col = column("params");

    let mut rows = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| CliError::usage(format!("report CSV `{}`: {e}", path.display())))?;
        let field = |col: usize| record.get(col).unwrap_or("");
        let relative_margin: f64 = field(margin_col).parse().map_err(|_| {
            CliError::usage(format!(
                "report CSV `{}` row {}: relative_margin `{}` is not a number",
                path.display(),
                index + 1,
                field(margin_col)
            ))
        })?;
        let cells = field(resolution_col)
            .split(';')
            .filter_map(|part| part.trim().parse::<f64>().ok())
            .fold(1.0, |acc, n| acc * n.max(1.0));
        let params = params_col
            .map(|col| parse_param_map(field(col)))
            .unwrap_or_default();
        rows.push(PlotRow {
            name: field(name_col).to_owned(),
            relative_margin,
            cells,
            params,
        });
    }
    Ok(rows)
}

fn parse_param_map(field: &str) -> BTreeMap<String, f64> {
    field
        .split(';')
        .filter_map(|pair| {
            let (key, value) = pair.split_once('=')?;
            Some((key.trim().to_owned(), value.trim().parse().ok()?))
        })
        .collect()
}

/// First parameter key (alphabetically) whose values vary across rows;
/// falls back to the first key at all, then to the cell count.
fn pick_parameter(rows: &[PlotRow]) -> (Option<String>, String) {
    let mut keys: Vec<&String> = rows.iter().flat_map(|r| r.params.keys()).collect();
    keys.sort();
    keys.dedup();
    for key in &keys {
        let values: Vec<f64> = rows.iter().filter_map(|r| r.params.get(*key)).copied().collect();
        if values.windows(2).any(|w| w[0] != w[1]) {
            return (Some((*key).clone()), (*key).clone());
        }
    }
    match keys.first() {
        Some(key) => (Some((*key).clone()), (*key).clone()),
        None => (None, "grid cells".to_owned()),
    }
}

fn group_series(rows: &[PlotRow], x_of: impl Fn(&PlotRow) -> Option<f64>) -> Vec<Series> {
    let mut order: Vec<String> = Vec::new();
    let mut by_name: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for row in rows {
        let Some(x) = x_of(row) else { continue };
        if !(x.is_finite() && row.relative_margin.is_finite()) {
            continue;
        }
        if !order.contains(&row.name) {
            order.push(row.name.clone());
        }
        by_name
            .entry(row.name.clone())
            .or_default()
            .push((x, row.relative_margin));
    }
    order
        .into_iter()
        .map(|label| {
            let mut points = by_name.remove(&label).unwrap_or_default();
            points.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite x"));
            Series { label, points }
        })
        .collect()
}

fn render(panels: &[Panel]) -> String {
    let (width, height) = (980.0, 470.0);
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    ));
    let plot_w = 330.0;
    let plot_h = 300.0;
    for (i, panel) in panels.iter().enumerate() {
        let origin_x = 70.0 + i as f64 * 490.0;
        svg.push_str(&panel_svg(panel, origin_x, 60.0, plot_w, plot_h));
    }
    svg.push_str("</svg>\n");
    svg
}

fn panel_svg(panel: &Panel, px: f64, py: f64, pw: f64, ph: f64) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"14\" font-weight=\"bold\">{}</text>\n",
        px,
        py - 18.0,
        escape(&panel.title)
    ));

    let points: Vec<(f64, f64)> = panel
        .series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .collect();
    let (x_lo, x_hi) = padded_range(points.iter().map(|p| p.0));
    let (y_lo, y_hi) = padded_range(points.iter().map(|p| p.1));
    let to_px = |x: f64| px + (x - x_lo) / (x_hi - x_lo) * pw;
    let to_py = |y: f64| py + ph - (y - y_lo) / (y_hi - y_lo) * ph;

    // Axes.
    out.push_str(&format!(
        "<rect x=\"{px}\" y=\"{py}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"#444\"/>\n"
    ));
    // Zero line when the margin changes sign inside the frame.
    if y_lo < 0.0 && y_hi > 0.0 {
        let zero = to_py(0.0);
        out.push_str(&format!(
            "<line x1=\"{px}\" y1=\"{zero}\" x2=\"{}\" y2=\"{zero}\" stroke=\"#bbb\" stroke-dasharray=\"4 3\"/>\n",
            px + pw
        ));
    }
    // Ticks.
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let x = x_lo + f * (x_hi - x_lo);
        let y = y_lo + f * (y_hi - y_lo);
        out.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#444\"/>\n\
             <text x=\"{0}\" y=\"{3}\" text-anchor=\"middle\">{4}</text>\n",
            to_px(x),
            py + ph,
            py + ph + 5.0,
            py + ph + 20.0,
            tick_label(x)
        ));
        out.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"#444\"/>\n\
             <text x=\"{3}\" y=\"{4}\" text-anchor=\"end\">{5}</text>\n",
            px - 5.0,
            px,
            to_py(y),
            px - 8.0,
            to_py(y) + 4.0,
            tick_label(y)
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        px + pw / 2.0,
        py + ph + 40.0,
        escape(&panel.x_label)
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 {} {})\">relative margin</text>\n",
        px - 52.0,
        py + ph / 2.0,
        px - 52.0,
        py + ph / 2.0
    ));

    // Series: polylines (when more than one point) plus markers.
    for (s, series) in panel.series.iter().enumerate() {
        let colour = PALETTE[s % PALETTE.len()];
        if series.points.len() > 1 {
            let path: Vec<String> = series
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", to_px(x), to_py(y)))
                .collect();
            out.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.5\"/>\n",
                path.join(" ")
            ));
        }
        for &(x, y) in &series.points {
            out.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{colour}\"/>\n",
                to_px(x),
                to_py(y)
            ));
        }
        // Legend entry.
        let ly = py + 14.0 + s as f64 * 16.0;
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{colour}\"/>\n\
             <text x=\"{}\" y=\"{}\">{}</text>\n",
            px + pw + 12.0,
            ly - 9.0,
            px + pw + 27.0,
            ly,
            escape(&series.label)
        ));
    }
    out
}

/// Range with 5% padding; degenerate ranges are widened so a single point
/// still renders mid-frame.
fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    let span = hi - lo;
    if span <= f64::EPSILON * lo.abs().max(hi.abs()).max(1.0) {
        let pad = lo.abs().max(1.0) * 0.1;
        return (lo - pad, hi + pad);
    }
    (lo - 0.05 * span, hi + 0.05 * span)
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".to_owned()
    } else if v.abs() >= 0.01 && v.abs() < 100_000.0 {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        format!("{v:.2e}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
