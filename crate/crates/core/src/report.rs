//! Report rendering: confusion heatmaps, MSE/objective curves, and a plain
//! text summary table, all emitted as standalone files.

use crate::container::load_manifest;
use crate::error::{Error, Result};
use image::{Rgb, RgbImage};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// White-to-blue color ramp for a value in [0, 1].
fn ramp(v: f64) -> Rgb<u8> {
    let v = v.clamp(0.0, 1.0);
    let r = (255.0 - 225.0 * v) as u8;
    let g = (255.0 - 180.0 * v) as u8;
    let b = (255.0 - 80.0 * v) as u8;
    Rgb([r, g, b])
}

/// Render a row-stochastic percentage matrix as an N x N cell heatmap.
pub fn render_heatmap(percentages: &[Vec<f64>], path: &Path) -> Result<()> {
    let n = percentages.len();
    if n == 0 || percentages.iter().any(|r| r.len() != n) {
        return Err(Error::ShapeMismatch("heatmap needs a square matrix".into()));
    }
    let cell = 48u32;
    let side = cell * n as u32 + 1;
    let mut img = RgbImage::from_pixel(side, side, Rgb([40, 40, 40]));
    for (i, row) in percentages.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let color = ramp(v / 100.0);
            for y in 1..cell {
                for x in 1..cell {
                    img.put_pixel(j as u32 * cell + x, i as u32 * cell + y, color);
                }
            }
        }
    }
    img.save(path).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    Ok(())
}

/// Render one or more positive series as log10-scaled polylines.
pub fn render_curves(series: &[(&str, &[f64], [u8; 3])], path: &Path) -> Result<()> {
    if series.is_empty() || series.iter().all(|(_, s, _)| s.is_empty()) {
        return Err(Error::InvalidConfig("nothing to plot".into()));
    }
    let (w, h, margin) = (640u32, 400u32, 20i64);
    let mut img = RgbImage::from_pixel(w, h, Rgb([255, 255, 255]));
    let floor = 1e-12;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut max_len = 1usize;
    for (_, s, _) in series {
        for &v in *s {
            let v = v.max(floor).log10();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        max_len = max_len.max(s.len());
    }
    if !lo.is_finite() || hi - lo < 1e-9 {
        hi = lo + 1.0;
    }
    let plot_w = w as i64 - 2 * margin;
    let plot_h = h as i64 - 2 * margin;
    for (_, s, color) in series {
        let mut prev: Option<(i64, i64)> = None;
        for (i, &v) in s.iter().enumerate() {
            let x = margin + plot_w * i as i64 / max_len.max(2) as i64;
            let frac = (v.max(floor).log10() - lo) / (hi - lo);
            let y = margin + plot_h - (plot_h as f64 * frac) as i64;
            if let Some((px, py)) = prev {
                let steps = (x - px).abs().max((y - py).abs()).max(1);
                for t in 0..=steps {
                    let ix = px + (x - px) * t / steps;
                    let iy = py + (y - py) * t / steps;
                    if (0..w as i64).contains(&ix) && (0..h as i64).contains(&iy) {
                        img.put_pixel(ix as u32, iy as u32, Rgb(*color));
                    }
                }
            }
            prev = Some((x, y));
        }
    }
    img.save(path).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    Ok(())
}

/// Parse the confusion CSV format written by the harness.
pub fn parse_confusion_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Incompatible("empty confusion CSV".into()))?;
    let labels: Vec<String> = header.split(',').skip(1).map(str::to_string).collect();
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        parts.next();
        let row = parts
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| Error::Incompatible(format!("bad CSV value `{p}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.len() != labels.len() {
        return Err(Error::Incompatible(format!(
            "confusion CSV has {} labels but {} rows",
            labels.len(),
            rows.len()
        )));
    }
    Ok((labels, rows))
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into())
}

/// Render every input (confusion CSVs, graybox dirs, pulse dirs) into the
/// output directory plus a `summary.txt` table.
pub fn report(inputs: &[PathBuf], out_dir: &Path) -> Result<()> {
    if inputs.is_empty() {
        return Err(Error::InvalidConfig("report needs at least one input".into()));
    }
    std::fs::create_dir_all(out_dir)?;
    let mut summary = String::from("input\tkind\tdetail\n");
    for input in inputs {
        if input.is_file() {
            let (labels, rows) = parse_confusion_csv(&std::fs::read_to_string(input)?)?;
            let stem = file_stem(input);
            render_heatmap(&rows, &out_dir.join(format!("{stem}_heatmap.png")))?;
            let n = labels.len();
            let diag: f64 = (0..n).map(|i| rows[i][i]).sum::<f64>() / n as f64;
            let per: Vec<String> = labels
                .iter()
                .zip(&rows)
                .enumerate()
                .map(|(i, (l, r))| format!("{l}={:.1}%", r[i]))
                .collect();
            writeln!(
                summary,
                "{stem}\tconfusion\tmean diagonal {diag:.1}% ({})",
                per.join(", ")
            )
            .unwrap();
            continue;
        }
        let manifest = load_manifest(input)?;
        let stem = file_stem(input);
        match manifest.kind.as_str() {
            "graybox" => {
                let (_, arrays) = crate::container::load(input)?;
                let train = &arrays["train_mse"].data;
                let test = &arrays["test_mse"].data;
                let name = manifest
                    .extra
                    .get("profile")
                    .and_then(|v| v.as_str())
                    .unwrap_or(&stem)
                    .to_string();
                render_curves(
                    &[
                        ("train", train, [30, 60, 200]),
                        ("test", test, [200, 60, 30]),
                    ],
                    &out_dir.join(format!("mse_{name}.png")),
                )?;
                writeln!(
                    summary,
                    "{stem}\tgraybox\tbest test MSE {:.3e} at iteration {}",
                    manifest.require_f64("best_test_mse")?,
                    manifest.require_u64("best_iteration")?
                )
                .unwrap();
            }
            "pulse" => {
                let (_, arrays) = crate::container::load(input)?;
                let hist = &arrays["objective_history"].data;
                render_curves(
                    &[("objective", hist, [20, 120, 60])],
                    &out_dir.join(format!("objective_{stem}.png")),
                )?;
                writeln!(
                    summary,
                    "{stem}\tpulse\tfinal objective {:.6}",
                    hist.last().copied().unwrap_or(0.0)
                )
                .unwrap();
            }
            other => {
                return Err(Error::Incompatible(format!(
                    "manifest field `kind` is `{other}`; report renders graybox and pulse dirs"
                )))
            }
        }
    }
    std::fs::write(out_dir.join("summary.txt"), summary)?;
    Ok(())
}
