use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::sweep::SweepResult;

pub const CSV_FILE: &str = "results.csv";
pub const SVG_FILE: &str = "accuracy.svg";
pub const CSV_HEADER: [&str; 4] = ["magnitude", "seed", "accuracy", "label_divergence"];

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

/// One row per record, in `(grid index, repeat)` order. Numbers use the
/// shortest representation that parses back to the same value.
pub fn render_csv(sweep: &SweepResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in &sweep.records {
        w.write_record([
            r.magnitude.to_string(),
            r.seed.to_string(),
            r.accuracy.to_string(),
            r.label_divergence.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Horizontal position of each grid magnitude in log10 units. A zero
/// magnitude is drawn half a decade left of the smallest positive one.
fn log_positions(grid: &[f64]) -> Vec<f64> {
    let min_log = grid
        .iter()
        .filter(|&&m| m > 0.0)
        .map(|m| m.log10())
        .fold(f64::INFINITY, f64::min);
    let zero_at = if min_log.is_finite() { min_log - 0.5 } else { 0.0 };
    grid.iter()
        .map(|&m| if m > 0.0 { m.log10() } else { zero_at })
        .collect()
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Mean accuracy against log10(magnitude), with every repeat scattered
/// underneath and the baseline and chance levels as reference lines. Each
/// mean marker carries `data-magnitude` and `data-mean` attributes holding
/// the exact plotted values.
pub fn render_svg(sweep: &SweepResult) -> String {
    let xs = log_positions(&sweep.grid);
    let (mut lo, mut hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if hi - lo < 1e-9 {
        lo -= 0.5;
        hi += 0.5;
    }
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - lo) / (hi - lo) * plot_w;
    let py = |acc: f64| TOP + (1.0 - acc) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="13">accuracy vs log10 magnitude: {} on {}</text>"#,
        WIDTH / 2.0,
        sweep.erosion.method,
        esc(&sweep.erosion.selector.to_string())
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let acc = k as f64 / 4.0;
        let y = py(acc);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{acc:.2}</text>"#,
            LEFT - 4.0,
            LEFT - 6.0,
            y + 4.0
        );
    }
    for (&x, &m) in xs.iter().zip(&sweep.grid) {
        let label = if m > 0.0 { format!("{x:.1}") } else { "0".to_owned() };
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
            px(x),
            TOP + plot_h,
            px(x),
            TOP + plot_h + 4.0,
            px(x),
            TOP + plot_h + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">log10(magnitude)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    for (class, level) in [("baseline", sweep.baseline_accuracy), ("chance", sweep.chance_level)] {
        let _ = writeln!(
            s,
            r#"<line class="{class}" x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="gray" stroke-dasharray="4 3" data-level="{level}"/>"#,
            LEFT + plot_w,
            y = py(level)
        );
    }
    for r in &sweep.records {
        let _ = writeln!(
            s,
            r#"<circle class="repeat" cx="{:.2}" cy="{:.2}" r="2" fill="steelblue" fill-opacity="0.5" data-magnitude="{}" data-accuracy="{}"/>"#,
            px(xs[r.grid_index]),
            py(r.accuracy),
            r.magnitude,
            r.accuracy
        );
    }
    let means = sweep.mean_accuracy();
    let points: Vec<String> = means
        .iter()
        .zip(&xs)
        .map(|(&(_, acc), &x)| format!("{:.2},{:.2}", px(x), py(acc)))
        .collect();
    let _ = writeln!(
        s,
        r#"<polyline class="mean" points="{}" fill="none" stroke="darkred" stroke-width="2"/>"#,
        points.join(" ")
    );
    for (&(m, acc), &x) in means.iter().zip(&xs) {
        let _ = writeln!(
            s,
            r#"<circle class="mean" cx="{:.2}" cy="{:.2}" r="4" fill="darkred" data-magnitude="{m}" data-mean="{acc}"/>"#,
            px(x),
            py(acc)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `results.csv` and `accuracy.svg` into `dir`, creating it if needed.
pub fn write_report(sweep: &SweepResult, dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
    if sweep.records.is_empty() {
        return Err(Error::invalid("sweep has no records"));
    }
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::from(e).at_path(dir))?;
    let csv_path = dir.join(CSV_FILE);
    let svg_path = dir.join(SVG_FILE);
    std::fs::write(&csv_path, render_csv(sweep)?).map_err(|e| Error::from(e).at_path(&csv_path))?;
    std::fs::write(&svg_path, render_svg(sweep)).map_err(|e| Error::from(e).at_path(&svg_path))?;
    Ok((csv_path, svg_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::erosion::{ErosionMethod, TargetSelector};
    use crate::harness::config::{noise_grid_default, ErosionTemplate};
    use crate::harness::sweep::SweepRecord;

    pub(crate) fn fake_sweep() -> SweepResult {
        let grid = noise_grid_default();
        let mut records = Vec::new();
        for (g, &m) in grid.iter().enumerate() {
            for r in 0..3 {
                records.push(SweepRecord {
                    grid_index: g,
                    repeat: r,
                    magnitude: m,
                    seed: (g * 10 + r) as u64,
                    accuracy: 0.95 - 0.05 * g as f64 + 0.01 * r as f64,
                    label_divergence: 0.02 * g as f64,
                    predictions_digest: String::new(),
                });
            }
        }
        SweepResult {
            erosion: ErosionTemplate::new(ErosionMethod::NoisePost, TargetSelector::All),
            grid,
            repeats: 3,
            master_seed: 0,
            chance_level: 0.5,
            baseline_accuracy: 0.96,
            baseline_predictions: vec![0, 1],
            records,
        }
    }

    #[test]
    fn csv_shape() {
        let text = String::from_utf8(render_csv(&fake_sweep()).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "magnitude,seed,accuracy,label_divergence");
        assert_eq!(lines.len(), 28);
        assert!(lines[1].starts_with("0.0001,0,"));
    }

    #[test]
    fn byte_stable() {
        let s = fake_sweep();
        assert_eq!(render_svg(&s), render_svg(&s));
        assert_eq!(render_csv(&s).unwrap(), render_csv(&s).unwrap());
    }

    #[test]
    fn zero_magnitude_is_plotted() {
        let mut s = fake_sweep();
        s.grid[0] = 0.0;
        for r in s.records.iter_mut().filter(|r| r.grid_index == 0) {
            r.magnitude = 0.0;
        }
        let svg = render_svg(&s);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
        assert!(svg.contains(r#"data-magnitude="0" data-mean"#));
    }
}
