//! Report files. Output is a pure function of its inputs, so re-emitting a
//! bundle yields byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use bvphi::phi::PhiPipeline;
use bvphi::tracker::{FrontKind, Snapshot};
use bvphi::verify::ConvergenceTable;
use serde::Serialize;

use crate::Bundle;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

pub const ALL_FORMATS: [Format; 3] = [Format::Csv, Format::Json, Format::Svg];

fn kind(k: Option<FrontKind>) -> &'static str {
    k.map_or("none", FrontKind::as_str)
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub const PROFILE_HEADER: [&str; 7] = ["t", "x_left", "x_right", "u", "chi", "left_front_kind", "right_front_kind"];
pub const EVENT_HEADER: [&str; 5] = ["t", "x", "classification", "in_count", "out_count"];

/// One row per constant region of every reported snapshot.
pub fn profiles_csv(snapshots: &[Snapshot<f64>]) -> Result<String> {
    let rows = snapshots.iter().flat_map(|s| {
        s.regions.iter().map(move |r| {
            vec![
                s.time.to_string(),
                r.x_left.to_string(),
                r.x_right.to_string(),
                r.u.to_string(),
                r.chi.to_string(),
                kind(r.left_front).to_string(),
                kind(r.right_front).to_string(),
            ]
        })
    });
    csv_string(&PROFILE_HEADER, rows)
}

pub fn events_csv(bundle: &Bundle) -> Result<String> {
    let rows = bundle.report.final_state.events().iter().map(|e| {
        vec![
            e.time.to_string(),
            e.position.to_string(),
            e.classification.as_str().to_string(),
            e.in_count().to_string(),
            e.out_count().to_string(),
        ]
    });
    csv_string(&EVENT_HEADER, rows)
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn checks_json(bundle: &Bundle) -> Result<String> {
    json(&bundle.report.checks)
}

const WIDTH: f64 = 640.0;
const PANEL: f64 = 200.0;
const PAD: f64 = 30.0;

struct Axis {
    lo: f64,
    hi: f64,
    px0: f64,
    px1: f64,
}

impl Axis {
    fn map(&self, v: f64) -> f64 {
        let v = v.clamp(self.lo, self.hi);
        self.px0 + (v - self.lo) / (self.hi - self.lo) * (self.px1 - self.px0)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        (-1.0, 1.0)
    } else if hi > lo {
        let m = 0.05 * (hi - lo);
        (lo - m, hi + m)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

/// `u` and `χ` of one snapshot, one path per constant region in each panel.
pub fn profile_svg(snap: &Snapshot<f64>) -> String {
    let finite: Vec<f64> = snap
        .regions
        .iter()
        .flat_map(|r| [r.x_left, r.x_right])
        .filter(|x| x.is_finite())
        .collect();
    let (x0, x1) = match (finite.first(), finite.last()) {
        (Some(&a), Some(&b)) => (a - 0.25 * (b - a).max(1.0), b + 0.25 * (b - a).max(1.0)),
        _ => (-1.0, 1.0),
    };
    let xa = Axis { lo: x0, hi: x1, px0: PAD, px1: WIDTH - PAD };
    let height = 2.0 * PANEL + 3.0 * PAD;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#
    );
    let _ = writeln!(s, r#"<text x="{PAD}" y="20" font-size="12">t = {}</text>"#, snap.time);
    for (k, (label, color)) in [("u", "#1f4e9c"), ("chi", "#b03a2e")].into_iter().enumerate() {
        let value = |r: &bvphi::tracker::Region<f64>| if k == 0 { r.u } else { r.chi };
        let vs: Vec<f64> = snap.regions.iter().map(value).collect();
        let (lo, hi) = padded(vs.iter().copied().fold(f64::INFINITY, f64::min), vs.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        let top = PAD + k as f64 * (PANEL + PAD);
        let ya = Axis { lo, hi, px0: top + PANEL, px1: top };
        let _ = writeln!(
            s,
            r##"<g id="{label}"><rect x="{PAD}" y="{top}" width="{}" height="{PANEL}" fill="none" stroke="#999"/><text x="{}" y="{}" font-size="12">{label}</text>"##,
            WIDTH - 2.0 * PAD,
            PAD + 4.0,
            top + 14.0
        );
        for r in &snap.regions {
            let y = ya.map(value(r));
            let _ = writeln!(
                s,
                r#"<path d="M{:.3} {y:.3} H{:.3}" stroke="{color}" stroke-width="2" fill="none"/>"#,
                xa.map(r.x_left),
                xa.map(r.x_right)
            );
        }
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    s
}

/// A polyline graph of `(x, y)` points, for the Φ tables.
pub fn graph_svg(title: &str, pts: &[(f64, f64)]) -> String {
    let (x0, x1) = padded(
        pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
    );
    let (y0, y1) = padded(
        pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
        pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
    );
    let xa = Axis { lo: x0, hi: x1, px0: PAD, px1: WIDTH - PAD };
    let ya = Axis { lo: y0, hi: y1, px0: PAD + PANEL, px1: PAD };
    let height = PANEL + 2.0 * PAD;
    let mut d = String::new();
    for (i, p) in pts.iter().enumerate() {
        let _ = write!(d, "{}{:.3} {:.3}", if i == 0 { "M" } else { " L" }, xa.map(p.0), ya.map(p.1));
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height}\" viewBox=\"0 0 {WIDTH} {height}\">\n\
         <text x=\"{PAD}\" y=\"20\" font-size=\"12\">{title}</text>\n\
         <rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{PANEL}\" fill=\"none\" stroke=\"#999\"/>\n\
         <path d=\"{d}\" stroke=\"#1f4e9c\" stroke-width=\"2\" fill=\"none\"/>\n</svg>\n",
        WIDTH - 2.0 * PAD
    )
}

fn write(dir: &Path, name: &str, body: &str, out: &mut Vec<PathBuf>) -> Result<()> {
    let p = dir.join(name);
    fs::write(&p, body).with_context(|| format!("cannot write {}", p.display()))?;
    out.push(p);
    Ok(())
}

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

/// Writes the bundle of a run; returns the files in writing order.
pub fn write_bundle(bundle: &Bundle, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    prepare(dir)?;
    let mut out = Vec::new();
    if formats.contains(&Format::Csv) {
        write(dir, "profiles.csv", &profiles_csv(&bundle.report.snapshots)?, &mut out)?;
        write(dir, "events.csv", &events_csv(bundle)?, &mut out)?;
    }
    if formats.contains(&Format::Json) {
        write(dir, "checks.json", &checks_json(bundle)?, &mut out)?;
    }
    if formats.contains(&Format::Svg) {
        for (k, snap) in bundle.report.snapshots.iter().enumerate() {
            write(dir, &format!("profile_{k}.svg"), &profile_svg(snap), &mut out)?;
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct PhiTables<'a> {
    omega: &'a [(f64, f64)],
    phi: Vec<(f64, f64, f64)>,
    gauge: &'a [(f64, f64)],
}

/// Writes `ω`, `φ` (left and right limits) and Φ.
pub fn write_phi(p: &PhiPipeline<f64>, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    prepare(dir)?;
    let mut out = Vec::new();
    let phi: Vec<(f64, f64, f64)> = p.phi.graph().knots().iter().map(|k| (k.x, k.left, k.right)).collect();
    let pairs = |v: &[(f64, f64)]| v.iter().map(|&(a, b)| vec![a.to_string(), b.to_string()]).collect::<Vec<_>>();
    if formats.contains(&Format::Csv) {
        write(dir, "omega.csv", &csv_string(&["h", "omega"], pairs(p.omega.knots()))?, &mut out)?;
        let rows = phi.iter().map(|&(x, l, r)| vec![x.to_string(), l.to_string(), r.to_string()]);
        write(dir, "phi.csv", &csv_string(&["y", "phi_left", "phi_right"], rows)?, &mut out)?;
        write(dir, "gauge.csv", &csv_string(&["s", "Phi"], pairs(p.gauge.knots()))?, &mut out)?;
    }
    if formats.contains(&Format::Json) {
        let tables = PhiTables { omega: p.omega.knots(), phi: phi.clone(), gauge: p.gauge.knots() };
        write(dir, "phi.json", &json(&tables)?, &mut out)?;
    }
    if formats.contains(&Format::Svg) {
        write(dir, "omega.svg", &graph_svg("omega", p.omega.knots()), &mut out)?;
        let pts: Vec<(f64, f64)> = phi.iter().flat_map(|&(x, l, r)| [(x, l), (x, r)]).collect();
        write(dir, "phi.svg", &graph_svg("phi", &pts), &mut out)?;
        write(dir, "gauge.svg", &graph_svg("Phi", p.gauge.knots()), &mut out)?;
    }
    Ok(out)
}

pub const CONVERGENCE_HEADER: [&str; 10] =
    ["eps", "m", "m_eps", "states", "max_gap", "fronts", "events", "l1_error", "tv_plus_chi", "tv_chi"];

pub fn write_convergence(table: &ConvergenceTable, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    prepare(dir)?;
    let mut out = Vec::new();
    if formats.contains(&Format::Csv) {
        let rows = table.rows.iter().map(|r| {
            vec![
                r.eps.to_string(),
                r.m.to_string(),
                r.m_eps.to_string(),
                r.states.to_string(),
                r.max_gap.to_string(),
                r.fronts.to_string(),
                r.events.to_string(),
                r.l1_error.to_string(),
                r.tv_plus_chi.to_string(),
                r.tv_chi.to_string(),
            ]
        });
        write(dir, "convergence.csv", &csv_string(&CONVERGENCE_HEADER, rows)?, &mut out)?;
    }
    if formats.contains(&Format::Json) {
        write(dir, "convergence.json", &json(table)?, &mut out)?;
    }
    if formats.contains(&Format::Svg) {
        let pts: Vec<(f64, f64)> = table.rows.iter().map(|r| (r.eps.ln(), r.l1_error.max(1e-300).ln())).collect();
        write(dir, "convergence.svg", &graph_svg("log L1 error against log eps", &pts), &mut out)?;
    }
    Ok(out)
}
