//! Standalone SVG plot emission from KPI CSV files. Hand-rolled vector
//! output: no raster dependencies, deterministic bytes.

use std::fmt::Write as _;
use std::path::Path;

use isac_core::SimError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone)]
struct Row {
    framework: String,
    csi: String,
    pilot_len: u32,
    throughput_bps: f64,
    jain: f64,
    nmse_gamma: f64,
}

fn parse_rows(path: &Path) -> Result<Vec<Row>, SimError> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if n == 0 || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() < 11 {
            return Err(SimError::Config(format!("bad KPI row at line {}", n + 1)));
        }
        let num = |s: &str| s.parse::<f64>().unwrap_or(f64::NAN);
        rows.push(Row {
            framework: f[1].to_string(),
            csi: f[2].to_string(),
            pilot_len: f[3].parse().unwrap_or(0),
            throughput_bps: num(f[4]),
            jain: num(f[5]),
            nmse_gamma: num(f[7]),
        });
    }
    Ok(rows)
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

fn nice_range(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if (hi - lo).abs() < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

fn svg_header(title: &str) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">
<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{:.1}" y="22" font-family="sans-serif" font-size="15" text-anchor="middle">{title}</text>
"#,
        MARGIN_L + (WIDTH - MARGIN_L - MARGIN_R) / 2.0
    );
    s
}

fn axes(s: &mut String, x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64, xlabel: &str, ylabel: &str) {
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let _ = write!(
        s,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>
"#
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = x_lo + f * (x_hi - x_lo);
        let yv = y_lo + f * (y_hi - y_lo);
        let xp = MARGIN_L + f * plot_w;
        let yp = HEIGHT - MARGIN_B - f * plot_h;
        let _ = write!(
            s,
            r#"<line x1="{xp:.1}" y1="{:.1}" x2="{xp:.1}" y2="{:.1}" stroke="black"/>
<text x="{xp:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>
<line x1="{:.1}" y1="{yp:.1}" x2="{MARGIN_L}" y2="{yp:.1}" stroke="black"/>
<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>
"#,
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 5.0,
            HEIGHT - MARGIN_B + 20.0,
            fmt_tick(xv),
            MARGIN_L - 5.0,
            MARGIN_L - 8.0,
            yp + 4.0,
            fmt_tick(yv)
        );
    }
    let _ = write!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle">{xlabel}</text>
<text x="18" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.1})">{ylabel}</text>
"#,
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 12.0,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0
    );
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if a >= 1e5 || a < 1e-3 {
        format!("{v:.1e}")
    } else if a >= 10.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn line_chart(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[Series],
    path: &Path,
) -> Result<(), SimError> {
    let pts: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().cloned()).collect();
    let (x_lo, x_hi) = nice_range(
        pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
    );
    let (y_lo, y_hi) = nice_range(
        pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
        pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
    );
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |y: f64| HEIGHT - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * plot_h;

    let mut s = svg_header(title);
    axes(&mut s, x_lo, x_hi, y_lo, y_hi, xlabel, ylabel);
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> =
            ser.points.iter().map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y))).collect();
        let _ = write!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>
"#,
            coords.join(" ")
        );
        for &(x, y) in &ser.points {
            let _ = write!(
                s,
                r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>
"#,
                sx(x),
                sy(y)
            );
        }
        let ly = MARGIN_T + 16.0 + 18.0 * i as f64;
        let _ = write!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>
<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12">{}</text>
"#,
            WIDTH - MARGIN_R + 10.0,
            WIDTH - MARGIN_R + 34.0,
            WIDTH - MARGIN_R + 40.0,
            ly + 4.0,
            ser.label
        );
    }
    s.push_str("</svg>\n");
    std::fs::write(path, s)?;
    Ok(())
}

fn quartiles(sorted: &[f64]) -> (f64, f64, f64, f64, f64) {
    let q = |f: f64| {
        let idx = f * (sorted.len() - 1) as f64;
        let lo = idx.floor() as usize;
        let hi = idx.ceil() as usize;
        let t = idx - lo as f64;
        sorted[lo] * (1.0 - t) + sorted[hi] * t
    };
    (sorted[0], q(0.25), q(0.5), q(0.75), sorted[sorted.len() - 1])
}

fn box_plot(title: &str, ylabel: &str, groups: &[(String, Vec<f64>)], path: &Path) -> Result<(), SimError> {
    let all: Vec<f64> = groups.iter().flat_map(|g| g.1.iter().cloned()).collect();
    let (y_lo, y_hi) = nice_range(
        all.iter().cloned().fold(f64::INFINITY, f64::min),
        all.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sy = |y: f64| HEIGHT - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * plot_h;

    let mut s = svg_header(title);
    axes(&mut s, 0.0, groups.len() as f64, y_lo, y_hi, "", ylabel);
    let slot = plot_w / groups.len() as f64;
    for (i, (label, values)) in groups.iter().enumerate() {
        let mut sorted = values.clone();
        sorted.retain(|v| v.is_finite());
        if sorted.is_empty() {
            continue;
        }
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (min, q1, med, q3, max) = quartiles(&sorted);
        let cx = MARGIN_L + slot * (i as f64 + 0.5);
        let bw = (slot * 0.4).min(40.0);
        let color = COLORS[i % COLORS.len()];
        let _ = write!(
            s,
            r#"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="black"/>
<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{color}" fill-opacity="0.4" stroke="black"/>
<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black" stroke-width="2"/>
<text x="{cx:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{label}</text>
"#,
            sy(min),
            sy(max),
            cx - bw / 2.0,
            sy(q3),
            bw,
            (sy(q1) - sy(q3)).max(1.0),
            cx - bw / 2.0,
            sy(med),
            cx + bw / 2.0,
            sy(med),
            HEIGHT - MARGIN_B + 34.0
        );
    }
    s.push_str("</svg>\n");
    std::fs::write(path, s)?;
    Ok(())
}

fn group_key(r: &Row) -> String {
    format!("{}/{}", r.framework, r.csi)
}

/// Emits the standard plot set from a KPI CSV (plus an optional sweep
/// summary for parameter-axis plots).
pub fn emit(csv: &Path, summary: Option<&Path>, out: &Path) -> Result<(), SimError> {
    std::fs::create_dir_all(out)?;
    let rows = parse_rows(csv)?;
    if rows.is_empty() {
        return Err(SimError::Config("no KPI rows to plot".into()));
    }

    // Jain distribution per framework/csi group.
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    for r in &rows {
        let key = group_key(r);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r.jain),
            None => groups.push((key, vec![r.jain])),
        }
    }
    box_plot("Fairness across frames", "Jain index", &groups, &out.join("jain_box.svg"))?;
    println!("wrote {}", out.join("jain_box.svg").display());

    // Pilot-length axes when the CSV spans several pilot lengths.
    let mut lens: Vec<u32> = rows.iter().map(|r| r.pilot_len).collect();
    lens.sort_unstable();
    lens.dedup();
    if lens.len() > 1 {
        let mut tp_series = Vec::new();
        let mut nmse_series = Vec::new();
        let mut keys: Vec<String> = rows.iter().map(group_key).collect();
        keys.sort();
        keys.dedup();
        for key in &keys {
            let mut tp = Vec::new();
            let mut nm = Vec::new();
            for &l in &lens {
                let vals: Vec<&Row> =
                    rows.iter().filter(|r| r.pilot_len == l && group_key(r) == *key).collect();
                if vals.is_empty() {
                    continue;
                }
                let n = vals.len() as f64;
                tp.push((
                    (l as f64).log2(),
                    vals.iter().map(|r| r.throughput_bps).sum::<f64>() / n,
                ));
                let finite: Vec<f64> =
                    vals.iter().map(|r| r.nmse_gamma).filter(|v| v.is_finite() && *v > 0.0).collect();
                if !finite.is_empty() {
                    nm.push((
                        (l as f64).log2(),
                        (finite.iter().sum::<f64>() / finite.len() as f64).log10(),
                    ));
                }
            }
            tp_series.push(Series { label: key.clone(), points: tp });
            if !nm.is_empty() {
                nmse_series.push(Series { label: key.clone(), points: nm });
            }
        }
        line_chart(
            "Throughput vs pilot length",
            "log2 pilot length",
            "throughput [bit/s]",
            &tp_series,
            &out.join("throughput_vs_pilot_len.svg"),
        )?;
        println!("wrote {}", out.join("throughput_vs_pilot_len.svg").display());
        if !nmse_series.is_empty() {
            line_chart(
                "SNR estimation error vs pilot length",
                "log2 pilot length",
                "log10 NMSE",
                &nmse_series,
                &out.join("nmse_vs_pilot_len.svg"),
            )?;
            println!("wrote {}", out.join("nmse_vs_pilot_len.svg").display());
        }
    }

    // Frame-length axis from the sweep summary.
    if let Some(sum_path) = summary {
        let text = std::fs::read_to_string(sum_path)?;
        let mut points = Vec::new();
        for line in text.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() >= 5 && f[0] == "t_f" {
                if let (Ok(x), Ok(y)) = (f[1].parse::<f64>(), f[4].parse::<f64>()) {
                    points.push((x, y));
                }
            }
        }
        if !points.is_empty() {
            points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            line_chart(
                "Throughput vs system frame length",
                "frame length [s]",
                "throughput [bit/s]",
                &[Series { label: "mean".into(), points }],
                &out.join("throughput_vs_t_f.svg"),
            )?;
            println!("wrote {}", out.join("throughput_vs_t_f.svg").display());
        }
    }
    Ok(())
}
