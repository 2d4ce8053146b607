//! Scenario execution: every scenario turns into one or more CSV tables.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{Scenario, ScenarioKind};
use super::table::Table;
use crate::error::{Error, Result};
use crate::geom::{norm, Grid};
use crate::interference::{
    classical_radius_squared, count_maxima, exact_intensity, refined_visibility, semiclassical_field_pattern,
};
use crate::observables::{current_at, current_density, default_step, dos, find_peaks, total_current};
use crate::propagators::FieldConfig;
use crate::sources::{gaussian_wave, scatter_wave, virtual_point_source, SourceKind, SourceSpec};

/// Files written by a run and headline numbers for the console.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub summary: Vec<(String, String)>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("scenario {scenario}: {source}")]
    Compute {
        scenario: &'static str,
        #[source]
        source: Error,
    },
    #[error("writing {path}: {message}")]
    Output { path: PathBuf, message: String },
}

/// Runs `s` and writes its tables into `out_dir`.
pub fn run_scenario(s: &Scenario, out_dir: &Path) -> std::result::Result<RunReport, RunError> {
    let tables = compute(s).map_err(|source| RunError::Compute {
        scenario: s.kind.name(),
        source,
    })?;
    std::fs::create_dir_all(out_dir).map_err(|e| RunError::Output {
        path: out_dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut files = Vec::new();
    let mut summary = Vec::new();
    for (suffix, table) in tables {
        let name = if suffix.is_empty() {
            format!("{}.csv", s.stem)
        } else {
            format!("{}_{suffix}.csv", s.stem)
        };
        let path = out_dir.join(name);
        table.write(&path).map_err(|e| RunError::Output {
            path: path.clone(),
            message: e.to_string(),
        })?;
        summary.extend(table.metadata.iter().filter(|(k, _)| k.starts_with("result.")).cloned());
        files.push(path);
    }
    Ok(RunReport { files, summary })
}

/// The tables of a scenario, keyed by file suffix.
pub fn compute(s: &Scenario) -> Result<Vec<(String, Table)>> {
    match s.kind {
        ScenarioKind::FreePoint | ScenarioKind::Custom | ScenarioKind::EbParallel => {
            Ok(vec![(String::new(), grid_table(s)?)])
        }
        ScenarioKind::FieldFringes => Ok(vec![(String::new(), fringes_table(s)?)]),
        ScenarioKind::AtomLaser => atom_laser_tables(s),
        ScenarioKind::DosCrossed => Ok(vec![(String::new(), dos_table(s)?)]),
    }
}

fn fmt(x: f64) -> String {
    format!("{x:?}")
}

fn fmt3(v: [f64; 3]) -> String {
    format!("{} {} {}", fmt(v[0]), fmt(v[1]), fmt(v[2]))
}

/// Metadata shared by every output: scenario, version, units and the
/// effective configuration entries verbatim.
fn preamble(t: &mut Table, s: &Scenario, field: &FieldConfig) {
    t.meta("scenario", s.kind.name());
    if let Some(title) = &s.title {
        t.meta("title", title);
    }
    t.meta("qsource_version", env!("CARGO_PKG_VERSION"));
    t.meta("species", &s.species);
    t.meta("units", s.units.derivation);
    t.meta("length_scale_m", fmt(s.units.length_scale));
    t.meta("energy_scale_j", fmt(s.units.energy_scale));
    t.meta("time_scale_s", fmt(s.units.time_scale));
    t.meta("hbar_j_s", fmt(s.units.hbar));
    t.meta("natural.mass", fmt(field.mass));
    t.meta("natural.force", fmt3(field.force));
    t.meta("natural.qb", fmt(field.b_field));
    t.meta("natural.charge_sign", fmt(field.charge_sign));
    for (k, v) in &s.params {
        t.meta(format!("config.{k}"), v);
    }
}

fn source_of(s: &Scenario, energy: f64, width: Option<f64>) -> SourceSpec {
    match (s.source_kind, width) {
        (SourceKind::Gaussian, Some(a)) => SourceSpec::gaussian(s.position, s.strength, a, energy),
        _ => SourceSpec::point(s.position, s.strength, energy),
    }
}

/// The grid with two extra layers on every non-flat axis, so the stencils of
/// the requested points fit.
fn padded(grid: &Grid) -> Result<(Grid, [usize; 3])> {
    let mut origin = grid.origin;
    let mut shape = grid.shape;
    let mut offset = [0; 3];
    for a in 0..3 {
        if grid.shape[a] > 1 {
            origin[a] -= 2.0 * grid.spacing[a];
            shape[a] += 4;
            offset[a] = 2;
        }
    }
    Ok((Grid::new(origin, grid.spacing, shape)?, offset))
}

fn grid_table(s: &Scenario) -> Result<Table> {
    let grid = s.grid.expect("validated");
    let src = source_of(s, s.energies[0], s.widths.first().copied());
    let (big, off) = padded(&grid)?;
    let wave = scatter_wave(&src, &s.field, &big)?;
    let current = current_density(&wave)?;

    let mut t = Table::new(&["x", "y", "z", "re_psi", "im_psi", "jx", "jy", "jz", "abs_j"]);
    preamble(&mut t, s, &s.field);
    t.meta("natural.energy", fmt(src.energy));
    if src.kind == SourceKind::Gaussian {
        t.meta("natural.width", fmt(src.width));
    }
    t.meta("grid.shape", format!("{} {} {}", grid.shape[0], grid.shape[1], grid.shape[2]));
    t.meta("grid.order", "x slowest, z fastest");
    t.meta("result.max_rel_error", fmt(wave.max_rel_error));
    t.meta("result.order_mismatch", fmt(current.order_mismatch));
    t.meta("result.total_current", fmt(total_current(&src, &s.field, 0.0)?));
    for idx in 0..grid.len() {
        let [i, j, k] = grid.unravel(idx);
        let at = big.index(i + off[0], j + off[1], k + off[2]);
        let r = grid.point_at(idx);
        let psi = wave.values[at];
        let jv = current.j[at];
        t.push(vec![r[0], r[1], r[2], psi.re, psi.im, jv[0], jv[1], jv[2], norm(jv)]);
    }
    Ok(t)
}

fn fringes_table(s: &Scenario) -> Result<Table> {
    let cut = s.cut.expect("validated");
    let cfg = s.field;
    let f = cfg.force[2];
    let mut t = Table::new(&["energy", "rho", "z", "exact_intensity", "semiclassical_intensity", "phase_difference"]);
    preamble(&mut t, s, &cfg);
    t.meta("natural.depth", fmt(cut.depth));
    let mut rows = Vec::new();
    for (n, &e) in s.energies.iter().enumerate() {
        let rho_max = classical_radius_squared(e, f, cut.depth).sqrt();
        let points: Vec<[f64; 3]> = (0..cut.samples)
            .map(|i| [cut.span * rho_max * i as f64 / (cut.samples - 1) as f64, 0.0, cut.depth])
            .collect();
        let exact: Vec<f64> = exact_intensity(&points, e, &cfg)?.iter().map(|v| v * s.strength.norm_sqr()).collect();
        let semi: Vec<(f64, f64)> = points
            .par_iter()
            .map(|p| match semiclassical_field_pattern(&[*p], e, &cfg) {
                Ok(pat) => (pat.intensity[0] * s.strength.norm_sqr(), pat.phase_difference[0]),
                Err(_) => (f64::NAN, f64::NAN),
            })
            .collect();
        let inside: Vec<f64> = semi.iter().filter(|v| v.0.is_finite()).map(|v| v.0).collect();
        let beyond: Vec<f64> = points
            .iter()
            .zip(&exact)
            .filter(|(p, _)| p[0] > rho_max)
            .map(|(_, v)| *v)
            .collect();
        let monotone = beyond.windows(2).all(|w| w[1] < w[0]);
        t.meta(format!("natural.energy.{n}"), fmt(e));
        t.meta(format!("result.classical_radius.{n}"), fmt(rho_max));
        t.meta(format!("result.fringes_exact.{n}"), count_maxima(&exact));
        t.meta(format!("result.fringes_semiclassical.{n}"), count_maxima(&inside));
        t.meta(format!("result.monotone_outside.{n}"), monotone);
        for ((p, ex), (sc, dphi)) in points.iter().zip(&exact).zip(&semi) {
            rows.push(vec![e, p[0], p[2], *ex, *sc, *dphi]);
        }
    }
    t.rows = rows;
    Ok(t)
}

fn atom_laser_tables(s: &Scenario) -> Result<Vec<(String, Table)>> {
    let cut = s.cut.expect("validated");
    let cfg = s.field;
    let e = s.energies[0];
    let rho_max = classical_radius_squared(e, cfg.force[2], cut.depth).sqrt();
    let half = cut.span * rho_max;

    let mut cut_t = Table::new(&["width", "x", "z", "re_psi", "im_psi", "density"]);
    preamble(&mut cut_t, s, &cfg);
    cut_t.meta("natural.energy", fmt(e));
    cut_t.meta("natural.depth", fmt(cut.depth));
    cut_t.meta("result.classical_radius", fmt(rho_max));
    let xs: Vec<f64> = (0..cut.samples)
        .map(|i| -half + 2.0 * half * i as f64 / (cut.samples - 1) as f64)
        .collect();
    for (n, &a) in s.widths.iter().enumerate() {
        let src = source_of(s, e, Some(a));
        let virt = virtual_point_source(&src, &cfg)?;
        let psi: Vec<Complex64> = xs
            .par_iter()
            .map(|&x| gaussian_wave(&src, &cfg, [x, 0.0, cut.depth]).map(|v| v.0))
            .collect::<Result<_>>()?;
        let density: Vec<f64> = psi.iter().map(|p| p.norm_sqr()).collect();
        let visibility = refined_visibility(
            |x| gaussian_wave(&src, &cfg, [x, 0.0, cut.depth]).map(|v| v.0.norm_sqr()),
            0.0,
            half,
            cut.samples / 2 + 1,
        )?;
        cut_t.meta(format!("natural.width.{n}"), fmt(a));
        cut_t.meta(format!("result.effective_energy.{n}"), fmt(virt.effective_energy));
        cut_t.meta(format!("result.virtual_shift.{n}"), fmt3(virt.shift));
        cut_t.meta(format!("result.maxima.{n}"), count_maxima(&density));
        cut_t.meta(format!("result.visibility.{n}"), fmt(visibility));
        for ((x, p), d) in xs.iter().zip(&psi).zip(&density) {
            cut_t.push(vec![a, *x, cut.depth, p.re, p.im, *d]);
        }
    }
    let mut out = vec![("cut".to_string(), cut_t)];

    if let Some(grid) = s.grid {
        let mut t = Table::new(&["width", "x", "y", "z", "re_psi", "im_psi", "density", "jx", "jy", "jz", "abs_j"]);
        preamble(&mut t, s, &cfg);
        t.meta("grid.shape", format!("{} {} {}", grid.shape[0], grid.shape[1], grid.shape[2]));
        t.meta("grid.order", "width, then x slowest, z fastest");
        t.meta("grid.current", "pointwise 4th-order differences");
        for &a in &s.widths {
            let src = source_of(s, e, Some(a));
            let rows: Vec<Vec<f64>> = (0..grid.len())
                .into_par_iter()
                .map(|idx| {
                    let r = grid.point_at(idx);
                    let psi = gaussian_wave(&src, &cfg, r)?.0;
                    let j = current_at(&src, &cfg, r, default_step(&src, &cfg, r))?;
                    Ok(vec![a, r[0], r[1], r[2], psi.re, psi.im, psi.norm_sqr(), j[0], j[1], j[2], norm(j)])
                })
                .collect::<Result<_>>()?;
            t.rows.extend(rows);
        }
        out.push(("grid".to_string(), t));
    }
    Ok(out)
}

fn dos_table(s: &Scenario) -> Result<Table> {
    let spec = s.spectrum.as_ref().expect("validated");
    let mut t = Table::new(&["force_y", "energy", "dos"]);
    preamble(&mut t, s, &s.field);
    t.meta("natural.eta", fmt(spec.eta));
    t.meta("natural.omega", fmt(s.field.omega()));
    for (n, &fy) in s.force_y_sweep.iter().enumerate() {
        let cfg = FieldConfig {
            force: [0.0, fy, 0.0],
            ..s.field
        };
        let spectrum = dos(spec.position, &spec.energies, &cfg, spec.eta)?;
        let peaks = find_peaks(&spectrum);
        let list = |f: fn(&crate::observables::Peak) -> f64| {
            peaks.iter().take(8).map(|p| fmt(f(p))).collect::<Vec<_>>().join(" ")
        };
        t.meta(format!("natural.force_y.{n}"), fmt(fy));
        t.meta(format!("result.peak_centers.{n}"), list(|p| p.center));
        t.meta(format!("result.peak_widths.{n}"), list(|p| p.width));
        for (e, v) in spectrum.energies.iter().zip(&spectrum.values) {
            t.push(vec![fy, *e, *v]);
        }
    }
    Ok(t)
}
