//! `portrait`, `resonances`, `resolvent` and `validate`.

use std::path::Path;

use serde::Serialize;

use super::config::{RunConfig, SCHEMA_VERSION};
use super::mtx::write_matrix_market;
use super::svg::{auto_window, render, Portrait};
use super::{fmt_f64, to_csv, to_json, write};
use crate::analytic::{continuation_scan, ContinuationScan};
use crate::assembly::{assemble_deformed, assemble_principal, ScaledOperator};
use crate::eigen::{solve, EigenResult};
use crate::geometry::{CrossSection, EndMap};
use crate::scaling::{ProfileParams, ScalingParameter, ScalingProfile};
use crate::spectral::{
    classify, detect_resonances, essential_rays, fiber_distance, ray_point, sector_check, RayFamily,
    ResonanceSearch, SpectrumReport, Tag, Window,
};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, Default)]
pub struct CommandOptions {
    /// Overrides the configured seed.
    pub seed: Option<u64>,
    pub dump_matrices: bool,
}

impl CommandOptions {
    fn seed(&self, cfg: &RunConfig) -> u64 {
        self.seed.unwrap_or(cfg.seed)
    }
}

fn context(what: &str, e: Error) -> Error {
    match e {
        Error::Config { .. } => e,
        other => Error::Numerical(format!("{what}: {other}")),
    }
}

fn rays_for(cfg: &RunConfig, end: &EndMap, op: &ScaledOperator) -> Result<RayFamily> {
    let cs = CrossSection::new(cfg.analysis.modes)?;
    let param = ScalingParameter::for_end(op.lambda, end)?;
    Ok(essential_rays(&cs, &param, cfg.analysis.modes)?.with_truncation(op.contour_end()))
}

#[derive(Debug, Clone, Serialize)]
struct SpectrumRow {
    mu: C64,
    tag: Tag,
    ray_index: Option<usize>,
    residual: f64,
}

#[derive(Debug, Clone, Serialize)]
struct SpectrumFile<'a> {
    schema_version: u32,
    command: &'static str,
    geometry: String,
    lambda: C64,
    ray_angle: f64,
    truncation_angle: Option<f64>,
    thresholds: &'a [f64],
    grid: crate::assembly::Grid,
    profile: ProfileParams,
    converged: bool,
    requested: usize,
    max_residual: f64,
    entries: Vec<SpectrumRow>,
}

/// Rendered portrait outputs, before they are written.
#[derive(Debug, Clone)]
pub struct PortraitFiles {
    pub json: String,
    pub csv: String,
    pub svg: String,
    pub report: SpectrumReport,
    pub eigen: EigenResult,
    pub rays: RayFamily,
}

pub fn portrait_files(cfg: &RunConfig) -> Result<(PortraitFiles, ScaledOperator)> {
    cfg.validate()?;
    let end = cfg.end_map()?;
    let profile = ScalingProfile::from_params(cfg.profile())?;
    profile.onset_warning(&end);
    let lambda = cfg.lambdas[0];
    let op = assemble_deformed(&cfg.grid, &end, &profile, lambda).map_err(|e| context("assembly", e))?;
    let eigen = solve(&op.k, &op.m, &cfg.eigen.request()).map_err(|e| context("eigensolve", e))?;
    let rays = rays_for(cfg, &end, &op)?;
    let report = if eigen.is_empty() {
        SpectrumReport {
            lambda,
            ray_angle: rays.angle,
            entries: Vec::new(),
        }
    } else {
        classify(&eigen.eigenvalues, &rays, cfg.analysis.angular_tol, cfg.analysis.radial_margin)?
    };
    let rows: Vec<SpectrumRow> = report
        .entries
        .iter()
        .zip(&eigen.residuals)
        .map(|(e, &r)| SpectrumRow {
            mu: e.mu,
            tag: e.tag,
            ray_index: e.ray_index,
            residual: r,
        })
        .collect();
    let file = SpectrumFile {
        schema_version: SCHEMA_VERSION,
        command: "portrait",
        geometry: cfg.geometry.label(),
        lambda,
        ray_angle: rays.angle,
        truncation_angle: rays.truncation_angle,
        thresholds: &rays.thresholds,
        grid: cfg.grid,
        profile: cfg.profile(),
        converged: eigen.converged,
        requested: eigen.requested,
        max_residual: eigen.max_residual(),
        entries: rows.clone(),
    };
    let json = to_json(&file)?;
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.mu.re),
                fmt_f64(r.mu.im),
                r.tag.as_str().to_string(),
                r.ray_index.map_or(String::new(), |j| j.to_string()),
                fmt_f64(r.residual),
            ]
        })
        .collect();
    let csv = to_csv(&["mu_re", "mu_im", "tag", "ray_index", "residual"], &csv_rows)?;
    let window = cfg
        .window
        .unwrap_or_else(|| auto_window(&rays.thresholds, &eigen.eigenvalues));
    let svg = render(&Portrait {
        lambda,
        thresholds: &rays.thresholds,
        ray_angle: rays.angle,
        truncation_angle: rays.truncation_angle,
        report: &report,
        window,
    });
    Ok((
        PortraitFiles {
            json,
            csv,
            svg,
            report,
            eigen,
            rays,
        },
        op,
    ))
}

/// Writes `spectrum.json`, `spectrum.csv` and `portrait.svg`.
pub fn cmd_portrait(cfg: &RunConfig, out: &Path, opts: &CommandOptions) -> Result<PortraitFiles> {
    let (files, op) = portrait_files(cfg)?;
    write(out, "spectrum.json", &files.json)?;
    write(out, "spectrum.csv", &files.csv)?;
    write(out, "portrait.svg", &files.svg)?;
    if opts.dump_matrices {
        dump(out, &op)?;
    }
    Ok(files)
}

fn dump(out: &Path, op: &ScaledOperator) -> Result<()> {
    let note = format!(
        "lambda = {} {}\ngrid = {} x {} on [0, {}] x [0, 1]",
        op.lambda.re, op.lambda.im, op.grid.nx, op.grid.ny, op.grid.x_max
    );
    write_matrix_market(&out.join("K.mtx"), &op.k, Some(&note))?;
    write_matrix_market(&out.join("M.mtx"), &op.m, Some(&note))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct ReportFile<'a> {
    schema_version: u32,
    command: &'static str,
    geometry: String,
    lambdas: &'a [C64],
    profiles: &'a [ProfileParams],
    grid: crate::assembly::Grid,
    refined_grid: crate::assembly::Grid,
    window: Window,
    resonances: usize,
    report: &'a SpectrumReport,
}

fn default_window(cfg: &RunConfig) -> Window {
    let nu2 = crate::geometry::threshold(2);
    cfg.window.unwrap_or(Window {
        re_min: 0.0,
        re_max: nu2,
        im_min: -nu2,
        im_max: nu2,
    })
}

/// Resonance detection over all configured `λ` and profile variants.
pub fn cmd_resonances(cfg: &RunConfig, out: &Path, opts: &CommandOptions) -> Result<SpectrumReport> {
    cfg.validate()?;
    let end = cfg.end_map()?;
    let window = default_window(cfg);
    let search = ResonanceSearch {
        end,
        grid: cfg.grid,
        lambdas: cfg.lambdas.clone(),
        profiles: cfg.profiles.clone(),
        eigen: cfg.eigen.request(),
        window,
        modes: cfg.analysis.modes,
        angular_tol: cfg.analysis.angular_tol,
        radial_margin: cfg.analysis.radial_margin,
        stability_tol: cfg.analysis.stability_tol,
        real_tol: cfg.analysis.real_tol,
    };
    let outcome = detect_resonances(&search).map_err(|e| context("resonance detection", e))?;
    let report = outcome.report;
    let file = ReportFile {
        schema_version: SCHEMA_VERSION,
        command: "resonances",
        geometry: cfg.geometry.label(),
        lambdas: &cfg.lambdas,
        profiles: &cfg.profiles,
        grid: cfg.grid,
        refined_grid: cfg.grid.refined(),
        window,
        resonances: report.count(Tag::Resonance),
        report: &report,
    };
    write(out, "report.json", &to_json(&file)?)?;
    let rows: Vec<Vec<String>> = report
        .entries
        .iter()
        .map(|e| {
            let s = e.stability;
            let opt = |f: fn(&crate::spectral::StabilityRecord) -> f64| s.as_ref().map_or(String::new(), |r| fmt_f64(f(r)));
            vec![
                fmt_f64(e.mu.re),
                fmt_f64(e.mu.im),
                e.tag.as_str().to_string(),
                opt(|r| r.drift),
                opt(|r| r.refined_drift),
                opt(|r| r.tolerance),
                opt(|r| r.min_ray_distance),
            ]
        })
        .collect();
    write(
        out,
        "report.csv",
        &to_csv(
            &["mu_re", "mu_im", "tag", "drift", "refined_drift", "tolerance", "min_ray_distance"],
            &rows,
        )?,
    )?;
    if opts.dump_matrices {
        let profile = ScalingProfile::from_params(cfg.profile())?;
        dump(out, &assemble_deformed(&cfg.grid, &end, &profile, cfg.lambdas[0])?)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
struct TraceFile<'a> {
    schema_version: u32,
    command: &'static str,
    geometry: String,
    profile: ProfileParams,
    agreement: f64,
    agreement_tol: f64,
    within_tolerance: bool,
    scan: &'a ContinuationScan,
}

/// Resolvent traces along the configured μ path, one per `λ`.
///
/// `trace.csv` lists the traces one after another in the order of `lambdas`,
/// each with one row per path point.
pub fn cmd_resolvent(cfg: &RunConfig, out: &Path, opts: &CommandOptions) -> Result<ContinuationScan> {
    cfg.validate()?;
    let block = cfg
        .resolvent
        .as_ref()
        .ok_or_else(|| Error::config("resolvent", "the resolvent command needs a `resolvent` block"))?;
    let end = cfg.end_map()?;
    let profile = ScalingProfile::from_params(cfg.profile())?;
    let cs = CrossSection::new(cfg.analysis.modes)?;
    let rays = cfg
        .lambdas
        .iter()
        .map(|&l| essential_rays(&cs, &ScalingParameter::for_end(l, &end)?, cfg.analysis.modes))
        .collect::<Result<Vec<_>>>()?;
    let path = block.path.points();
    let scan = continuation_scan(&cfg.grid, &end, &profile, &cfg.lambdas, &path, &rays, &block.f, &block.g)?;
    let file = TraceFile {
        schema_version: SCHEMA_VERSION,
        command: "resolvent",
        geometry: cfg.geometry.label(),
        profile: cfg.profile(),
        agreement: scan.agreement,
        agreement_tol: cfg.analysis.agreement_tol,
        within_tolerance: scan.agreement <= cfg.analysis.agreement_tol,
        scan: &scan,
    };
    write(out, "trace.json", &to_json(&file)?)?;
    let rows: Vec<Vec<String>> = scan
        .traces
        .iter()
        .flat_map(|t| {
            t.mu.iter().zip(&t.values).zip(&t.residuals).map(|((m, v), r)| {
                vec![fmt_f64(m.re), fmt_f64(m.im), fmt_f64(v.re), fmt_f64(v.im), fmt_f64(*r)]
            })
        })
        .collect();
    write(out, "trace.csv", &to_csv(&["mu_re", "mu_im", "val_re", "val_im", "residual"], &rows)?)?;
    if opts.dump_matrices {
        dump(out, &assemble_deformed(&cfg.grid, &end, &profile, cfg.lambdas[0])?)?;
    }
    Ok(scan)
}

/// One invariant check with its measured value.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

fn check(name: impl Into<String>, measured: f64, threshold: f64, passes: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed: passes,
        measured,
        threshold,
        detail: detail.into(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub schema_version: u32,
    pub passed: bool,
    pub seed: u64,
    pub checks: Vec<Check>,
}

fn diff_bits(a: &ScaledOperator, b: &ScaledOperator) -> f64 {
    let same = a.k == b.k && a.m == b.m;
    if same {
        0.0
    } else {
        a.k.max_abs_diff(&b.k).max(a.m.max_abs_diff(&b.m)).max(f64::MIN_POSITIVE)
    }
}

/// Runs the invariant suite on the configured geometry and writes `validation.json`.
pub fn cmd_validate(cfg: &RunConfig, out: &Path, opts: &CommandOptions) -> Result<ValidationReport> {
    cfg.validate()?;
    let seed = opts.seed(cfg);
    let end = cfg.end_map()?;
    let profile = ScalingProfile::from_params(cfg.profile())?;
    let cs = CrossSection::new(cfg.analysis.modes)?;
    let mut checks = Vec::new();

    for (i, &lam) in cfg.lambdas.iter().enumerate() {
        let op = assemble_deformed(&cfg.grid, &end, &profile, lam)?;
        let again = assemble_deformed(&cfg.grid, &end, &profile, lam)?;
        let refl = assemble_deformed(&cfg.grid, &end, &profile, lam.conj())?;
        let sym = op.k.asymmetry().max(op.m.asymmetry());
        checks.push(check(format!("complex_symmetry[{i}]"), sym, 0.0, sym == 0.0, "max |K − Kᵀ|, |M − Mᵀ|"));
        let r = refl.k.max_abs_diff(&op.k.conj()).max(refl.m.max_abs_diff(&op.m.conj()));
        checks.push(check(format!("reflection[{i}]"), r, 0.0, r == 0.0, "max |K(λ̄) − conj K(λ)|"));
        let d = diff_bits(&op, &again);
        checks.push(check(format!("assembly_determinism[{i}]"), d, 0.0, d == 0.0, "bitwise rerun"));

        let principal = assemble_principal(&cfg.grid, &end, &profile, lam)?;
        let s = sector_check(&principal, cfg.analysis.sector_trials, end.alpha, cfg.analysis.sector_sigma, seed)?;
        checks.push(check(
            format!("sector_bound[{i}]"),
            s.max_abs_arg,
            s.bound,
            s.max_abs_arg < s.bound,
            format!("{} trials, 2α + σ", s.trials),
        ));

        let param = ScalingParameter::for_end(lam, &end)?;
        let rays = essential_rays(&cs, &param, cfg.analysis.modes)?;
        let expected = -2.0 * lam.im.atan2(1.0 + lam.re);
        let da = (rays.angle - expected).abs();
        checks.push(check(format!("ray_angle[{i}]"), rays.angle, expected, da <= 1e-15, "−2 arg(1 + λ)"));

        let mut worst_on = 0.0f64;
        for j in 1..=cfg.analysis.modes {
            for k in 0..10 {
                let mu = ray_point(lam, j, 0.5 * k as f64);
                let fd = fiber_distance(&cs, &param, mu, 100.0, 201);
                worst_on = worst_on.max(fd / (1.0 + mu.norm()));
            }
        }
        checks.push(check(format!("fiber_on_ray[{i}]"), worst_on, 1e-12, worst_on <= 1e-12, "relative fiber distance on rays"));

        let grid_pts = off_ray_grid(cfg.analysis.angular_tol);
        let mut min_off = f64::INFINITY;
        let mut inconsistent = 0usize;
        let rep = classify(&grid_pts, &rays, cfg.analysis.angular_tol, cfg.analysis.radial_margin)?;
        for (mu, e) in grid_pts.iter().zip(&rep.entries) {
            let fd = fiber_distance(&cs, &param, *mu, 100.0, 201);
            min_off = min_off.min(fd);
            if (fd > 0.0) != (e.tag == Tag::Discrete) {
                inconsistent += 1;
            }
        }
        checks.push(check(
            format!("fiber_off_ray[{i}]"),
            min_off,
            0.0,
            min_off > 0.0 && inconsistent == 0,
            format!("100 off-ray points, {inconsistent} disagreements with classify"),
        ));
    }

    let (a, _) = portrait_files(cfg)?;
    let (b, _) = portrait_files(cfg)?;
    let same = a.json == b.json && a.csv == b.csv && a.svg == b.svg;
    checks.push(check("output_determinism", if same { 0.0 } else { 1.0 }, 0.0, same, "byte-identical portrait outputs"));
    let tol = cfg.eigen.tol;
    let max_res = a.eigen.max_residual();
    checks.push(check(
        "eigen_residual",
        max_res,
        tol,
        max_res <= tol && a.eigen.converged,
        format!("{} eigenpairs, converged = {}", a.eigen.len(), a.eigen.converged),
    ));

    let op0 = assemble_deformed(&cfg.grid, &end, &profile, C64::new(0.0, 0.0))?;
    let e0 = solve(&op0.k, &op0.m, &cfg.eigen.request())?;
    let worst_im = e0
        .eigenvalues
        .iter()
        .map(|m| m.im.abs() / (1.0 + m.re.abs()))
        .fold(0.0, f64::max);
    checks.push(check("unscaled_real_spectrum", worst_im, 1e-9, worst_im <= 1e-9, "|Im μ| / (1 + |Re μ|) at λ = 0"));
    let p0 = assemble_principal(&cfg.grid, &end, &profile, C64::new(0.0, 0.0))?;
    let s0 = sector_check(&p0, cfg.analysis.sector_trials, end.alpha, cfg.analysis.sector_sigma, seed)?;
    checks.push(check("sector_unscaled", s0.max_abs_arg, 1e-9, s0.max_abs_arg < 1e-9, "max |arg| at λ = 0"));

    let report = ValidationReport {
        schema_version: SCHEMA_VERSION,
        passed: checks.iter().all(|c| c.passed),
        seed,
        checks,
    };
    write(out, "validation.json", &to_json(&report)?)?;
    Ok(report)
}

/// 10 × 10 points in the upper half-plane between the first two thresholds.
fn off_ray_grid(angular_tol: f64) -> Vec<C64> {
    let nu1 = crate::geometry::threshold(1);
    let lo = (3.0 * angular_tol).max(0.15);
    (0..10)
        .flat_map(|a| {
            let r = 1.0 + a as f64;
            (0..10).map(move |b| {
                let theta = lo + (std::f64::consts::PI - 2.0 * lo) * b as f64 / 9.0;
                nu1 + C64::from_polar(r, theta)
            })
        })
        .collect()
}
