//! Static SVG plots derived from experiment CSV files. Output is fully
//! deterministic (fixed canvas, fixed palette, fixed float formatting,
//! no timestamps), so plots can be snapshot-tested byte-for-byte.

use crate::CliError;
use std::fmt::Write as _;
use std::path::Path;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    CostVsIteration,
    BoundsVsPurity,
    LogVarianceVsN,
}

impl PlotKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "cost-vs-iteration" => Some(Self::CostVsIteration),
            "bounds-vs-purity" => Some(Self::BoundsVsPurity),
            "log-variance-vs-n" => Some(Self::LogVarianceVsN),
            _ => None,
        }
    }
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_csv(path: &Path) -> Result<Csv, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| CliError::Config("malformed CSV: missing header".into()))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for line in lines {
        let fields: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        if fields.len() != header.len() {
            return Err(CliError::Config(format!(
                "malformed CSV: row has {} fields, header has {}",
                fields.len(),
                header.len()
            )));
        }
        rows.push(fields);
    }
    if rows.is_empty() {
        return Err(CliError::Config("malformed CSV: no data rows".into()));
    }
    Ok(Csv { header, rows })
}

fn column(csv: &Csv, name: &str) -> Result<usize, CliError> {
    csv.header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CliError::Config(format!("malformed CSV: missing column '{name}'")))
}

fn num(field: &str) -> Result<f64, CliError> {
    field
        .parse()
        .map_err(|_| CliError::Config(format!("malformed CSV: non-numeric field '{field}'")))
}

struct Series {
    name: String,
    points: Vec<(f64, f64)>,
}

struct Panel {
    title: String,
    series: Vec<Series>,
}

/// Render a CSV produced by one of the experiments into an SVG file.
pub fn plot(csv_path: &Path, kind: PlotKind, out_path: &Path) -> Result<(), CliError> {
    let csv = read_csv(csv_path)?;
    let (panels, x_label, y_label) = match kind {
        PlotKind::CostVsIteration => {
            let li = column(&csv, "label")?;
            let ri = column(&csv, "restart")?;
            let ii = column(&csv, "iteration")?;
            let ci = column(&csv, "cost")?;
            // best restart per label, judged by its final cost
            let mut labels: Vec<String> = Vec::new();
            for row in &csv.rows {
                if !labels.contains(&row[li]) {
                    labels.push(row[li].clone());
                }
            }
            let mut series = Vec::new();
            for label in &labels {
                let mut per_restart: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
                for row in csv.rows.iter().filter(|r| &r[li] == label) {
                    let restart = row[ri].clone();
                    let point = (num(&row[ii])?, num(&row[ci])?);
                    match per_restart.iter_mut().find(|(r, _)| *r == restart) {
                        Some((_, pts)) => pts.push(point),
                        None => per_restart.push((restart, vec![point])),
                    }
                }
                let best = per_restart
                    .into_iter()
                    .max_by(|a, b| {
                        let fa = a.1.last().map(|p| p.1).unwrap_or(f64::NEG_INFINITY);
                        let fb = b.1.last().map(|p| p.1).unwrap_or(f64::NEG_INFINITY);
                        fa.partial_cmp(&fb).unwrap()
                    })
                    .ok_or_else(|| CliError::Config("malformed CSV: empty series".into()))?;
                series.push(Series {
                    name: label.clone(),
                    points: best.1,
                });
            }
            (
                vec![Panel {
                    title: "cost vs iteration".into(),
                    series,
                }],
                "iteration",
                "cost",
            )
        }
        PlotKind::BoundsVsPurity => {
            let ni = column(&csv, "n")?;
            let pi = column(&csv, "purity")?;
            let value_cols: Vec<usize> = (0..csv.header.len())
                .filter(|&c| c != ni && c != pi)
                .collect();
            let mut ns: Vec<String> = Vec::new();
            for row in &csv.rows {
                if !ns.contains(&row[ni]) {
                    ns.push(row[ni].clone());
                }
            }
            let mut panels = Vec::new();
            for n in &ns {
                let mut series: Vec<Series> = value_cols
                    .iter()
                    .map(|&c| Series {
                        name: csv.header[c].clone(),
                        points: Vec::new(),
                    })
                    .collect();
                for row in csv.rows.iter().filter(|r| &r[ni] == n) {
                    let x = num(&row[pi])?;
                    for (s, &c) in series.iter_mut().zip(value_cols.iter()) {
                        s.points.push((x, num(&row[c])?));
                    }
                }
                panels.push(Panel {
                    title: format!("n = {n}"),
                    series,
                });
            }
            (panels, "purity", "bound value")
        }
        PlotKind::LogVarianceVsN => {
            let ni = column(&csv, "n")?;
            let di = column(&csv, "delta")?;
            let vi = column(&csv, "var_delta_cost_over_n2")?;
            let mut deltas: Vec<String> = Vec::new();
            for row in &csv.rows {
                if !deltas.contains(&row[di]) {
                    deltas.push(row[di].clone());
                }
            }
            let mut series = Vec::new();
            for delta in &deltas {
                let mut points = Vec::new();
                for row in csv.rows.iter().filter(|r| &r[di] == delta) {
                    let var = num(&row[vi])?;
                    if var > 0.0 {
                        points.push((num(&row[ni])?, var.ln()));
                    }
                }
                series.push(Series {
                    name: format!("delta={delta}"),
                    points,
                });
            }
            (
                vec![Panel {
                    title: "trainability scan".into(),
                    series,
                }],
                "n",
                "ln variance",
            )
        }
    };
    let svg = render(&panels, x_label, y_label)?;
    if let Some(parent) = out_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(out_path, svg)?;
    Ok(())
}

fn render(panels: &[Panel], x_label: &str, y_label: &str) -> Result<String, CliError> {
    const PANEL_W: f64 = 340.0;
    const PANEL_H: f64 = 340.0;
    const ML: f64 = 64.0; // margins inside a panel
    const MR: f64 = 16.0;
    const MT: f64 = 34.0;
    const MB: f64 = 48.0;

    if panels.iter().all(|p| p.series.iter().all(|s| s.points.is_empty())) {
        return Err(CliError::Config("malformed CSV: nothing to plot".into()));
    }

    let width = PANEL_W * panels.len() as f64;
    let height = PANEL_H;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{width}" height="{height}" fill="white"/>"#
    );

    for (pi, panel) in panels.iter().enumerate() {
        let x0 = pi as f64 * PANEL_W + ML;
        let x1 = (pi + 1) as f64 * PANEL_W - MR;
        let y0 = MT;
        let y1 = PANEL_H - MB;

        let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
        for s in &panel.series {
            for &(x, y) in &s.points {
                xmin = xmin.min(x);
                xmax = xmax.max(x);
                ymin = ymin.min(y);
                ymax = ymax.max(y);
            }
        }
        if !xmin.is_finite() {
            continue;
        }
        if (xmax - xmin).abs() < 1e-300 {
            xmax = xmin + 1.0;
        }
        if (ymax - ymin).abs() < 1e-300 {
            ymax = ymin + 1.0;
        }
        let px = |x: f64| x0 + (x - xmin) / (xmax - xmin) * (x1 - x0);
        let py = |y: f64| y1 - (y - ymin) / (ymax - ymin) * (y1 - y0);

        // frame and title
        let _ = writeln!(
            svg,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black" stroke-width="1"/>"#,
            x0,
            y0,
            x1 - x0,
            y1 - y0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            y0 - 12.0,
            panel.title
        );

        // ticks
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let xv = xmin + f * (xmax - xmin);
            let yv = ymin + f * (ymax - ymin);
            let xp = px(xv);
            let yp = py(yv);
            let _ = writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1"/>"#,
                xp, y1, xp, y1 + 4.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="middle">{}</text>"#,
                xp,
                y1 + 16.0,
                tick_label(xv)
            );
            let _ = writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1"/>"#,
                x0 - 4.0,
                yp,
                x0,
                yp
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="end">{}</text>"#,
                x0 - 6.0,
                yp + 3.0,
                tick_label(yv)
            );
        }
        // axis labels
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            y1 + 34.0,
            x_label
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
            x0 - 46.0,
            (y0 + y1) / 2.0,
            x0 - 46.0,
            (y0 + y1) / 2.0,
            y_label
        );

        // series
        for (si, s) in panel.series.iter().enumerate() {
            if s.points.is_empty() {
                continue;
            }
            let color = PALETTE[si % PALETTE.len()];
            let mut path = String::new();
            for &(x, y) in &s.points {
                if path.is_empty() {
                    let _ = write!(path, "{:.2},{:.2}", px(x), py(y));
                } else {
                    let _ = write!(path, " {:.2},{:.2}", px(x), py(y));
                }
            }
            let _ = writeln!(
                svg,
                r#"<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>"#
            );
            // legend entry
            let ly = y0 + 14.0 * si as f64 + 10.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#,
                x1 - 86.0,
                ly,
                x1 - 70.0,
                ly
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="9">{}</text>"#,
                x1 - 66.0,
                ly + 3.0,
                s.name
            );
        }
    }
    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.2e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_file_and_empty_data_are_config_errors() {
        let err = plot(
            Path::new("/nonexistent/input.csv"),
            PlotKind::CostVsIteration,
            Path::new("/tmp/never.svg"),
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);

        let dir = std::env::temp_dir().join("qfisher_plot_empty_test");
        std::fs::create_dir_all(&dir).unwrap();
        let csv = dir.join("empty.csv");
        std::fs::write(&csv, "label,restart,iteration,cost\n").unwrap();
        let out = dir.join("out.svg");
        let err = plot(&csv, PlotKind::CostVsIteration, &out).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(!out.exists(), "no file may be written on error");
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn single_series_renders_polyline_and_labels() {
        let dir = std::env::temp_dir().join("qfisher_plot_single_test");
        std::fs::create_dir_all(&dir).unwrap();
        let csv = dir.join("hist.csv");
        std::fs::write(
            &csv,
            "# seed = 1\nlabel,restart,iteration,cost\np0.95,0,0,1.5\np0.95,0,1,2.5\np0.95,0,2,3.0\n",
        )
        .unwrap();
        let out = dir.join("hist.svg");
        plot(&csv, PlotKind::CostVsIteration, &out).unwrap();
        let svg = std::fs::read_to_string(&out).unwrap();
        assert!(svg.contains("<polyline"));
        assert!(svg.contains("iteration"));
        assert!(svg.contains("cost"));
        std::fs::remove_dir_all(&dir).ok();
    }
}
