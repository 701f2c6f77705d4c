//! Deterministic SVG renderings of the plot-data CSV files.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use robstat::cellwise::CellColor;
use serde_json::Value;

use crate::args::PlotKind;
use crate::CliError;

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 32.0;
const BOTTOM: f64 = 48.0;

type Table = Vec<HashMap<String, String>>;

fn bad(msg: impl std::fmt::Display) -> CliError {
    CliError::Compute(format!("malformed plot data: {msg}"))
}

pub fn sidecar_path(data: &Path) -> PathBuf {
    data.with_extension("json")
}

fn read_table(path: &Path) -> Result<Table, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = r.headers().map_err(bad)?.iter().map(String::from).collect();
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(bad)?;
        out.push(header.iter().cloned().zip(rec.iter().map(String::from)).collect());
    }
    Ok(out)
}

fn field<'a>(row: &'a HashMap<String, String>, key: &str) -> Result<&'a str, CliError> {
    row.get(key).map(String::as_str).ok_or_else(|| bad(format!("missing column {key:?}")))
}

fn number(row: &HashMap<String, String>, key: &str) -> Result<f64, CliError> {
    let s = field(row, key)?;
    if s == "NA" {
        return Ok(f64::NAN);
    }
    s.parse().map_err(|_| bad(format!("{key} = {s:?} is not a number")))
}

fn side_f64(side: &Value, key: &str) -> Result<f64, CliError> {
    side.get(key).and_then(Value::as_f64).ok_or_else(|| bad(format!("sidecar lacks {key:?}")))
}

fn side_list(side: &Value, key: &str) -> Vec<f64> {
    side.get(key).and_then(Value::as_array).map_or(vec![], |a| a.iter().filter_map(Value::as_f64).collect())
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn open(w: f64, h: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" \
         font-family=\"DejaVu Sans, Arial, sans-serif\" font-size=\"11\">\n"
    )
}

struct Scatter {
    title: String,
    x_label: String,
    y_label: String,
    /// (x, y, highlighted)
    points: Vec<(f64, f64, bool)>,
    h_lines: Vec<f64>,
    v_lines: Vec<f64>,
    diagonal: bool,
    curve: Vec<(f64, f64)>,
    labels: Vec<(f64, f64, String)>,
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
    (lo - pad, hi + pad)
}

fn scatter_svg(s: &Scatter) -> String {
    let (x0, x1) = range(
        s.points.iter().map(|p| p.0).chain(s.v_lines.iter().copied()).chain(s.curve.iter().map(|c| c.0)),
    );
    let (y0, y1) = range(
        s.points.iter().map(|p| p.1).chain(s.h_lines.iter().copied()).chain(s.curve.iter().map(|c| c.1)),
    );
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let py = |y: f64| H - BOTTOM - (y - y0) / (y1 - y0) * (H - TOP - BOTTOM);
    let mut out = open(W, H);
    let _ = writeln!(out, "<text x=\"{:.2}\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">{}</text>", W / 2.0, esc(&s.title));
    let _ = writeln!(
        out,
        "<line class=\"axis\" x1=\"{LEFT:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
        H - BOTTOM,
        W - RIGHT,
        H - BOTTOM
    );
    let _ = writeln!(out, "<line class=\"axis\" x1=\"{LEFT:.2}\" y1=\"{TOP:.2}\" x2=\"{LEFT:.2}\" y2=\"{:.2}\" stroke=\"black\"/>", H - BOTTOM);
    for (v, x) in [(x0, LEFT), (x1, W - RIGHT)] {
        let _ = writeln!(out, "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{v:.3}</text>", H - BOTTOM + 14.0);
    }
    for (v, y) in [(y0, H - BOTTOM), (y1, TOP)] {
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{y:.2}\" text-anchor=\"end\">{v:.3}</text>", LEFT - 4.0);
    }
    let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>", W / 2.0, H - 10.0, esc(&s.x_label));
    let _ = writeln!(
        out,
        "<text x=\"14\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.2})\">{}</text>",
        H / 2.0,
        H / 2.0,
        esc(&s.y_label)
    );
    for &y in &s.h_lines {
        let _ = writeln!(
            out,
            "<line class=\"cutoff\" x1=\"{LEFT:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"grey\" stroke-dasharray=\"4 3\"/>",
            py(y),
            W - RIGHT,
            py(y)
        );
    }
    for &x in &s.v_lines {
        let _ = writeln!(
            out,
            "<line class=\"cutoff\" x1=\"{:.2}\" y1=\"{TOP:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"grey\" stroke-dasharray=\"4 3\"/>",
            px(x),
            px(x),
            H - BOTTOM
        );
    }
    if s.diagonal {
        let lo = x0.max(y0);
        let hi = x1.min(y1);
        if hi > lo {
            let _ = writeln!(
                out,
                "<line class=\"diagonal\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"grey\"/>",
                px(lo),
                py(lo),
                px(hi),
                py(hi)
            );
        }
    }
    if !s.curve.is_empty() {
        let pts: Vec<String> = s.curve.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(out, "<polyline class=\"ellipse\" points=\"{}\" fill=\"none\" stroke=\"steelblue\"/>", pts.join(" "));
    }
    for &(x, y, hi) in &s.points {
        if x.is_finite() && y.is_finite() {
            let fill = if hi { "firebrick" } else { "black" };
            let _ = writeln!(out, "<circle class=\"marker\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{fill}\"/>", px(x), py(y));
        }
    }
    for (x, y, t) in &s.labels {
        let _ = writeln!(out, "<text class=\"label\" x=\"{:.2}\" y=\"{:.2}\" font-size=\"9\">{}</text>", px(*x) + 4.0, py(*y) - 3.0, esc(t));
    }
    out.push_str("</svg>\n");
    out
}

fn ddplot(t: &Table, side: &Value) -> Result<String, CliError> {
    let cutoff = side_f64(side, "cutoff")?;
    let points = t
        .iter()
        .map(|r| Ok((number(r, "md")?, number(r, "rd")?, field(r, "flagged")? == "true")))
        .collect::<Result<_, CliError>>()?;
    Ok(scatter_svg(&Scatter {
        title: "Distance-distance plot".into(),
        x_label: "Mahalanobis distance".into(),
        y_label: "robust distance".into(),
        points,
        h_lines: vec![cutoff],
        v_lines: vec![],
        diagonal: false,
        curve: vec![],
        labels: vec![],
    }))
}

fn outlier_map(t: &Table, side: &Value) -> Result<String, CliError> {
    let v = side_f64(side, "v_threshold")?;
    let h = side_f64(side, "h_threshold")?;
    let points = t
        .iter()
        .map(|r| Ok((number(r, "x_distance")?, number(r, "std_residual")?, field(r, "class")? != "regular")))
        .collect::<Result<_, CliError>>()?;
    Ok(scatter_svg(&Scatter {
        title: "Regression outlier map".into(),
        x_label: "robust distance".into(),
        y_label: "standardized residual".into(),
        points,
        h_lines: vec![-v, v],
        v_lines: vec![h],
        diagonal: false,
        curve: vec![],
        labels: vec![],
    }))
}

fn pca_map(t: &Table, side: &Value) -> Result<String, CliError> {
    let sd = side_f64(side, "sd_cutoff")?;
    let od = side_f64(side, "od_cutoff")?;
    let points = t
        .iter()
        .map(|r| Ok((number(r, "sd")?, number(r, "od")?, field(r, "class")? != "regular")))
        .collect::<Result<_, CliError>>()?;
    Ok(scatter_svg(&Scatter {
        title: "PCA outlier map".into(),
        x_label: "score distance".into(),
        y_label: "orthogonal distance".into(),
        points,
        h_lines: vec![od],
        v_lines: vec![sd],
        diagonal: false,
        curve: vec![],
        labels: vec![],
    }))
}

fn cellmcd(t: &Table, side: &Value) -> Result<String, CliError> {
    let label = |k: &str| side.get(k).and_then(Value::as_str).unwrap_or("").to_string();
    let mut points = Vec::with_capacity(t.len());
    let mut labels = Vec::new();
    for r in t {
        let (x, y) = (number(r, "x")?, number(r, "y")?);
        let ann = field(r, "annotated")? == "true";
        points.push((x, y, ann));
        if ann {
            labels.push((x, y, field(r, "row_id")?.to_string()));
        }
    }
    let curve = side
        .get("ellipse")
        .and_then(Value::as_array)
        .map_or(vec![], |a| {
            a.iter()
                .filter_map(|p| {
                    let p = p.as_array()?;
                    Some((p.first()?.as_f64()?, p.get(1)?.as_f64()?))
                })
                .collect()
        });
    Ok(scatter_svg(&Scatter {
        title: format!("cellwise MCD: {}", label("plottype")),
        x_label: label("x_label"),
        y_label: label("y_label"),
        points,
        h_lines: side_list(side, "h_lines"),
        v_lines: side_list(side, "v_lines"),
        diagonal: side.get("diagonal").and_then(Value::as_bool).unwrap_or(false),
        curve,
        labels,
    }))
}

pub fn cell_fill(c: CellColor) -> &'static str {
    const POS: [&str; 5] = ["#fdae61", "#f46d43", "#e34a33", "#d7301f", "#b30000"];
    const NEG: [&str; 5] = ["#9ecae1", "#6baed6", "#4292c6", "#2171b5", "#08519c"];
    match c {
        CellColor::Inlier => "#fff7bc",
        CellColor::Missing => "#ffffff",
        CellColor::Pos(k) => POS[(k as usize).clamp(1, 5) - 1],
        CellColor::Neg(k) => NEG[(k as usize).clamp(1, 5) - 1],
    }
}

fn cellmap(t: &Table, side: &Value) -> Result<String, CliError> {
    let rows: Vec<String> = side
        .get("rows")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("sidecar lacks rows"))?
        .iter()
        .map(|v| v.to_string())
        .collect();
    let cols: Vec<String> = side
        .get("columns")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("sidecar lacks columns"))?
        .iter()
        .filter_map(|v| v.as_str().map(String::from))
        .collect();
    let mut colors: HashMap<(String, String), CellColor> = HashMap::new();
    for r in t {
        let c = CellColor::parse(field(r, "color_bin")?).ok_or_else(|| bad("unknown color bin"))?;
        colors.insert((field(r, "row_id")?.to_string(), field(r, "column")?.to_string()), c);
    }
    let cell = 16.0;
    let (left, top) = (72.0, 96.0);
    let w = left + cell * cols.len() as f64 + 16.0;
    let h = top + cell * rows.len() as f64 + 16.0;
    let mut out = open(w, h);
    for (j, c) in cols.iter().enumerate() {
        let x = left + cell * (j as f64 + 0.5);
        let _ = writeln!(out, "<text x=\"{x:.2}\" y=\"{:.2}\" transform=\"rotate(-60 {x:.2} {:.2})\">{}</text>", top - 4.0, top - 4.0, esc(c));
    }
    for (i, r) in rows.iter().enumerate() {
        let y = top + cell * i as f64;
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>", left - 4.0, y + cell * 0.75, esc(r));
        for (j, c) in cols.iter().enumerate() {
            let color = *colors.get(&(r.clone(), c.clone())).ok_or_else(|| bad(format!("no cell for row {r}, column {c}")))?;
            let _ = writeln!(
                out,
                "<rect class=\"cell\" x=\"{:.2}\" y=\"{y:.2}\" width=\"{cell}\" height=\"{cell}\" fill=\"{}\" stroke=\"#999999\" stroke-width=\"0.5\"/>",
                left + cell * j as f64,
                cell_fill(color)
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn boxplot(t: &Table, side: &Value) -> Result<String, CliError> {
    let k = t.len().max(1) as f64;
    let strip = (W - LEFT - RIGHT) / k;
    let mut out = open(W, H);
    let outliers = side.get("outliers").and_then(Value::as_array).cloned().unwrap_or_default();
    for (j, r) in t.iter().enumerate() {
        let name = field(r, "column")?;
        let get = |k: &str| number(r, k);
        let (q1, med, q3) = (get("q1")?, get("median")?, get("q3")?);
        let (wl, wh) = (get("whisker_low")?, get("whisker_high")?);
        let (fl, fu) = (get("lower_fence")?, get("upper_fence")?);
        let pts: Vec<f64> = outliers
            .iter()
            .filter(|o| o.get("column").and_then(Value::as_str) == Some(name))
            .filter_map(|o| o.get("value").and_then(Value::as_f64))
            .collect();
        let (lo, hi) = range([wl, wh, q1, q3].into_iter().chain(pts.iter().copied()));
        let py = |y: f64| H - BOTTOM - (y - lo) / (hi - lo) * (H - TOP - BOTTOM);
        let cx = LEFT + strip * (j as f64 + 0.5);
        let half = (strip * 0.25).min(30.0);
        let _ = writeln!(out, "<text x=\"{cx:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>", H - BOTTOM + 16.0, esc(name));
        let _ = writeln!(out, "<line class=\"whisker\" x1=\"{cx:.2}\" y1=\"{:.2}\" x2=\"{cx:.2}\" y2=\"{:.2}\" stroke=\"black\"/>", py(wl), py(q1));
        let _ = writeln!(out, "<line class=\"whisker\" x1=\"{cx:.2}\" y1=\"{:.2}\" x2=\"{cx:.2}\" y2=\"{:.2}\" stroke=\"black\"/>", py(q3), py(wh));
        let _ = writeln!(
            out,
            "<rect class=\"box\" x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#dddddd\" stroke=\"black\"/>",
            cx - half,
            py(q3),
            2.0 * half,
            (py(q1) - py(q3)).max(0.0)
        );
        let _ = writeln!(out, "<line class=\"median\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\" stroke-width=\"2\"/>", cx - half, py(med), cx + half, py(med));
        for f in [fl, fu] {
            if f >= lo && f <= hi {
                let _ = writeln!(
                    out,
                    "<line class=\"cutoff\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"grey\" stroke-dasharray=\"4 3\"/>",
                    cx - half,
                    py(f),
                    cx + half,
                    py(f)
                );
            }
        }
        for v in pts {
            let _ = writeln!(out, "<circle class=\"marker\" cx=\"{cx:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"firebrick\"/>", py(v));
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// SVG text for a plot-data CSV and its sidecar.
pub fn render_svg(data: &Path, kind: PlotKind) -> Result<String, CliError> {
    let table = read_table(data)?;
    let side_path = sidecar_path(data);
    let side: Value = serde_json::from_str(
        &std::fs::read_to_string(&side_path).map_err(|e| bad(format!("{}: {e}", side_path.display())))?,
    )
    .map_err(bad)?;
    match kind {
        PlotKind::Ddplot => ddplot(&table, &side),
        PlotKind::OutlierMap => outlier_map(&table, &side),
        PlotKind::PcaMap => pca_map(&table, &side),
        PlotKind::Cellmap => cellmap(&table, &side),
        PlotKind::Boxplot => boxplot(&table, &side),
        PlotKind::Cellmcd => cellmcd(&table, &side),
    }
}
