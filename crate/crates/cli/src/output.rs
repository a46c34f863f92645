//! CSV, JSON, SVG and wavefunction writers. All output is deterministic:
//! floats use the shortest round-trip form and lines end with `\n`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use robinwave::WavefunctionGrid;
use serde::Serialize;

use crate::config::SweepParameter;
use crate::run::{ComparisonRow, NamedSweep, SweepResult};
use crate::CliError;

pub const SPECTRUM_HEADER: &str = "sweep_value,sector,n,lambda,lambda_pi2,sigma_min,bracket_lo,bracket_hi,gap1";

/// Shortest decimal that parses back to the same `f64`, with an exponent
/// for very small or large magnitudes.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn opt_label<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| CliError::Io {
            path: parent.display().to_string(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn spectrum_csv(result: &SweepResult) -> String {
    let mut out = String::from(SPECTRUM_HEADER);
    out.push('\n');
    for r in &result.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            num(r.sweep_value),
            r.sector,
            r.n,
            num(r.lambda),
            num(r.lambda_pi2),
            num(r.sigma_min),
            num(r.bracket_lo),
            num(r.bracket_hi),
            opt(r.gap1)
        )
        .unwrap();
    }
    out
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("n,sector_mm,lambda_mm,sector_fd,lambda_fd,fd_error,fd_margin,diff\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.n,
            opt_label(r.sector_mm),
            opt(r.lambda_mm),
            opt_label(r.sector_fd),
            opt(r.lambda_fd),
            opt(r.fd_error),
            opt(r.fd_margin),
            opt(r.diff)
        )
        .unwrap();
    }
    out
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Header line, a line with the header values, then one row of `ψ(x_i, ·)`
/// per x sample.
pub fn wavefunction_text(grid: &WavefunctionGrid) -> String {
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut out = String::from("# nx ny x0 x1 y0 y1 lambda parity\n");
    writeln!(
        out,
        "# {nx} {ny} {} {} {} {} {} {}",
        num(grid.x_samples[0]),
        num(grid.x_samples[nx - 1]),
        num(grid.y_samples[0]),
        num(grid.y_samples[ny - 1]),
        num(grid.state.lambda),
        grid.state.parity
    )
    .unwrap();
    for i in 0..nx {
        let row: Vec<String> = (0..ny).map(|j| num(grid.at(i, j))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn axis_label(p: SweepParameter) -> &'static str {
    match p {
        SweepParameter::AOverD => "a/d",
        SweepParameter::Alpha0 => "alpha0",
        SweepParameter::Alpha1 => "alpha1",
    }
}

/// Line plot of `λ/(π/d)²` against the sweep value, one polyline per
/// eigenvalue branch and family.
pub fn sweep_svg(sweeps: &[NamedSweep]) -> String {
    let (w, h, m) = (640.0, 480.0, 60.0);
    let points: Vec<(f64, f64)> = sweeps
        .iter()
        .flat_map(|s| s.result.rows.iter().map(|r| (r.sweep_value, r.lambda_pi2)))
        .collect();
    let span = |f: fn(&(f64, f64)) -> f64| {
        let lo = points.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (x0, x1) = span(|p| p.0);
    let (y0, y1) = span(|p| p.1);
    let px = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let py = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let xlabel = sweeps.first().map(|s| axis_label(s.parameter)).unwrap_or("a/d");

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<path d="M{m} {t} L{m} {b} L{r} {b}" stroke="black" fill="none"/>"#,
        t = m,
        b = h - m,
        r = w - m
    )
    .unwrap();
    for (x, anchor, v) in [(m, "start", x0), (w - m, "end", x1)] {
        writeln!(
            out,
            r#"<text x="{x}" y="{}" font-size="12" text-anchor="{anchor}">{v:.3}</text>"#,
            h - m + 16.0
        )
        .unwrap();
    }
    for (y, v) in [(h - m, y0), (m, y1)] {
        writeln!(
            out,
            r#"<text x="{}" y="{y}" font-size="12" text-anchor="end">{v:.3}</text>"#,
            m - 4.0
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">{xlabel}</text>"#,
        w / 2.0,
        h - 16.0
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="16" y="{}" font-size="14" text-anchor="middle" transform="rotate(-90 16 {})">E/(π/d)^2</text>"#,
        h / 2.0,
        h / 2.0
    )
    .unwrap();
    for (f, sweep) in sweeps.iter().enumerate() {
        let color = PALETTE[f % PALETTE.len()];
        let max_n = sweep.result.rows.iter().map(|r| r.n).max().unwrap_or(0);
        for n in 1..=max_n {
            let coords: Vec<String> = sweep
                .result
                .rows
                .iter()
                .filter(|r| r.n == n)
                .map(|r| format!("{:.2},{:.2}", px(r.sweep_value), py(r.lambda_pi2)))
                .collect();
            writeln!(
                out,
                r#"<polyline data-family="{}" data-branch="{n}" points="{}" stroke="{color}" fill="none"/>"#,
                sweep.label,
                coords.join(" ")
            )
            .unwrap();
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::run::SpectrumRow;
    use robinwave::ParitySector;

    fn row(v: f64, n: usize, lambda: f64) -> SpectrumRow {
        SpectrumRow {
            sweep_value: v,
            sector: ParitySector::Symmetric,
            n,
            lambda,
            lambda_pi2: lambda / 9.0,
            sigma_min: 1e-12,
            bracket_lo: 0.0,
            bracket_hi: 10.0,
            gap1: (n == 1).then_some(0.5),
        }
    }

    #[test]
    fn csv_uses_shortest_round_trip() {
        let r = SweepResult {
            rows: vec![row(0.3, 1, 0.1 + 0.2)],
        };
        let csv = spectrum_csv(&r);
        let line = csv.lines().nth(1).unwrap();
        assert!(line.starts_with("0.3,symmetric,1,0.30000000000000004,"));
        assert!(line.ends_with(",0.5"));
        assert!(!csv.contains('\r'));
        let back: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(back, 0.1 + 0.2);
    }

    #[test]
    fn svg_has_one_polyline_per_branch() {
        let sweep = NamedSweep {
            label: "x".into(),
            parameter: SweepParameter::AOverD,
            alpha0: 1.0,
            alpha1: 0.5,
            result: SweepResult {
                rows: vec![row(0.2, 1, 1.0), row(0.4, 1, 0.8), row(0.4, 2, 0.9)],
            },
        };
        let svg = sweep_svg(&[sweep]);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">a/d<") && svg.contains("E/(π/d)^2"));
    }

    #[test]
    fn empty_svg_is_well_formed() {
        let svg = sweep_svg(&[]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }
}
