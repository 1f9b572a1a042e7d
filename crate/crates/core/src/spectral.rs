//! Interpretation of computed spectra: rotated threshold rays, ray/discrete
//! classification, resonance detection by stability under changes of `λ` and
//! `v`, numerical-range sampling, fiber distance and quasimode residuals.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_deformed, hermitian_rayleigh, Grid, ScaledOperator};
use crate::eigen::{solve, EigenRequest, EigenResult};
use crate::geometry::{threshold, CrossSection, EndMap};
use crate::scaling::{smoothstep, ProfileParams, ScalingParameter, ScalingProfile};
use crate::{Error, Result, C64};

/// Rays `ν_j + e^{iθ}·[0, ∞)` with the common angle `θ = −2 arg(1 + λ)`.
///
/// On a grid truncated at `X_max` with Dirichlet ends, approximants of the rays
/// lie along `−2 arg(X_max + λ v(X_max))` instead; `truncation_angle` records
/// that direction when known and classification accepts the angular sector in
/// between.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayFamily {
    pub lambda: C64,
    pub angle: f64,
    pub thresholds: Vec<f64>,
    pub truncation_angle: Option<f64>,
}

/// Ray direction `−2 arg(1 + λ)`.
pub fn ray_angle(lambda: C64) -> f64 {
    -2.0 * (1.0 + lambda).arg()
}

pub fn essential_rays(cs: &CrossSection, param: &ScalingParameter, modes: usize) -> Result<RayFamily> {
    if modes == 0 {
        return Err(Error::Argument("at least one ray is required".into()));
    }
    let thresholds = (1..=modes).map(|j| cs.threshold(j)).collect::<Result<_>>()?;
    Ok(RayFamily {
        lambda: param.lambda(),
        angle: ray_angle(param.lambda()),
        thresholds,
        truncation_angle: None,
    })
}

impl RayFamily {
    /// Records the direction `−2 arg(Z)` of the truncated contour end `Z`.
    pub fn with_truncation(mut self, contour_end: C64) -> Self {
        self.truncation_angle = Some(-2.0 * contour_end.arg());
        self
    }

    /// Angular interval accepted as "on a ray".
    pub fn angle_range(&self) -> (f64, f64) {
        match self.truncation_angle {
            Some(t) => (self.angle.min(t), self.angle.max(t)),
            None => (self.angle, self.angle),
        }
    }

    /// Angular distance of `μ` to ray `j` (0-based), or `None` inside the radial margin.
    pub fn angular_distance(&self, j: usize, mu: C64, radial_margin: f64) -> Option<f64> {
        let d = mu - self.thresholds[j];
        if d.norm() <= radial_margin {
            return None;
        }
        let phi = d.arg();
        let (lo, hi) = self.angle_range();
        if (lo..=hi).contains(&phi) {
            return Some(0.0);
        }
        let wrap = |a: f64| {
            let mut x = (a).rem_euclid(2.0 * PI);
            if x > PI {
                x = 2.0 * PI - x;
            }
            x
        };
        Some(wrap(phi - lo).min(wrap(phi - hi)))
    }

    /// Euclidean distance from `μ` to the nearest ray (true direction only).
    pub fn distance(&self, mu: C64) -> f64 {
        let e = C64::from_polar(1.0, self.angle);
        self.thresholds
            .iter()
            .map(|&nu| {
                let d = mu - nu;
                let t = (d * e.conj()).re.max(0.0);
                (d - e * t).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Ray,
    Discrete,
    Resonance,
    Unresolved,
}

impl Tag {
    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Ray => "ray",
            Tag::Discrete => "discrete",
            Tag::Resonance => "resonance",
            Tag::Unresolved => "unresolved",
        }
    }
}

/// Drift of a candidate across the variant set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub drift: f64,
    pub refined_drift: f64,
    pub tolerance: f64,
    pub variants: usize,
    /// Smallest distance to a true ray over all variants.
    pub min_ray_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub mu: C64,
    pub tag: Tag,
    pub ray_index: Option<usize>,
    pub stability: Option<StabilityRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub lambda: C64,
    pub ray_angle: f64,
    pub entries: Vec<SpectrumEntry>,
}

impl SpectrumReport {
    pub fn with_tag(&self, tag: Tag) -> impl Iterator<Item = &SpectrumEntry> {
        self.entries.iter().filter(move |e| e.tag == tag)
    }

    pub fn count(&self, tag: Tag) -> usize {
        self.with_tag(tag).count()
    }
}

pub const DEFAULT_ANGULAR_TOL: f64 = 0.05;
pub const DEFAULT_RADIAL_MARGIN: f64 = 0.5;

/// Tags each eigenvalue `ray` (with the nearest ray's index) or `discrete`.
pub fn classify(eigs: &[C64], rays: &RayFamily, angular_tol: f64, radial_margin: f64) -> Result<SpectrumReport> {
    if eigs.is_empty() {
        return Err(Error::Argument("classification needs at least one eigenvalue".into()));
    }
    let entries = eigs
        .iter()
        .map(|&mu| {
            let best = (0..rays.thresholds.len())
                .filter_map(|j| rays.angular_distance(j, mu, radial_margin).map(|d| (j, d)))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match best {
                Some((j, d)) if d < angular_tol => SpectrumEntry {
                    mu,
                    tag: Tag::Ray,
                    ray_index: Some(j + 1),
                    stability: None,
                },
                _ => SpectrumEntry {
                    mu,
                    tag: Tag::Discrete,
                    ray_index: None,
                    stability: None,
                },
            }
        })
        .collect();
    Ok(SpectrumReport {
        lambda: rays.lambda,
        ray_angle: rays.angle,
        entries,
    })
}

/// Rectangle of the μ-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn contains(&self, mu: C64) -> bool {
        (self.re_min..=self.re_max).contains(&mu.re) && (self.im_min..=self.im_max).contains(&mu.im)
    }
}

/// Inputs of [`detect_resonances`].
#[derive(Debug, Clone)]
pub struct ResonanceSearch {
    pub end: EndMap,
    pub grid: Grid,
    pub lambdas: Vec<C64>,
    pub profiles: Vec<ProfileParams>,
    pub eigen: EigenRequest,
    pub window: Window,
    pub modes: usize,
    pub angular_tol: f64,
    pub radial_margin: f64,
    /// Relative drift tolerance; the absolute tolerance is `stability_tol·(1 + |μ|)`.
    pub stability_tol: f64,
    pub real_tol: f64,
}

impl ResonanceSearch {
    pub fn new(end: EndMap, grid: Grid, lambdas: Vec<C64>, profiles: Vec<ProfileParams>, window: Window) -> Self {
        Self {
            end,
            grid,
            lambdas,
            profiles,
            eigen: EigenRequest::all(),
            window,
            modes: 3,
            angular_tol: DEFAULT_ANGULAR_TOL,
            radial_margin: DEFAULT_RADIAL_MARGIN,
            stability_tol: 1e-3,
            real_tol: 1e-6,
        }
    }
}

/// One `(λ, v)` run: its operator metadata, spectrum and classification.
#[derive(Debug, Clone)]
pub struct VariantRun {
    pub lambda: C64,
    pub profile: ProfileParams,
    pub grid: Grid,
    pub eigen: EigenResult,
    pub report: SpectrumReport,
    pub rays: RayFamily,
}

/// Assembles, solves and classifies one variant.
pub fn run_variant(search: &ResonanceSearch, lambda: C64, profile: ProfileParams, grid: Grid) -> Result<VariantRun> {
    let prof = ScalingProfile::from_params(profile)?;
    let op = assemble_deformed(&grid, &search.end, &prof, lambda)?;
    let eigen = solve(&op.k, &op.m, &search.eigen)?;
    let rays = variant_rays(search, &op)?;
    let report = if eigen.is_empty() {
        SpectrumReport {
            lambda,
            ray_angle: rays.angle,
            entries: Vec::new(),
        }
    } else {
        classify(&eigen.eigenvalues, &rays, search.angular_tol, search.radial_margin)?
    };
    Ok(VariantRun {
        lambda,
        profile,
        grid,
        eigen,
        report,
        rays,
    })
}

fn variant_rays(search: &ResonanceSearch, op: &ScaledOperator) -> Result<RayFamily> {
    let cs = CrossSection::new(search.modes)?;
    let param = ScalingParameter::for_end(op.lambda, &search.end)?;
    Ok(essential_rays(&cs, &param, search.modes)?.with_truncation(op.contour_end()))
}

fn variant_jobs(search: &ResonanceSearch, grid: Grid) -> Vec<(C64, ProfileParams, Grid)> {
    search
        .lambdas
        .iter()
        .flat_map(|&l| search.profiles.iter().map(move |&p| (l, p, grid)))
        .collect()
}

fn run_all(search: &ResonanceSearch, grid: Grid) -> Result<Vec<VariantRun>> {
    variant_jobs(search, grid)
        .into_par_iter()
        .map(|(l, p, g)| run_variant(search, l, p, g))
        .collect()
}

fn discrete_in_window(run: &VariantRun, window: &Window) -> Vec<C64> {
    run.report
        .with_tag(Tag::Discrete)
        .map(|e| e.mu)
        .filter(|mu| window.contains(*mu))
        .collect()
}

/// Largest distance from `mu` to the nearest discrete candidate of each variant.
fn drift(mu: C64, runs: &[VariantRun], window: &Window) -> (f64, f64) {
    let mut worst = 0.0f64;
    let mut ray_dist = f64::INFINITY;
    for run in runs {
        let d = discrete_in_window(run, window)
            .into_iter()
            .map(|c| (c - mu).norm())
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
        ray_dist = ray_dist.min(run.rays.distance(mu));
    }
    (worst, ray_dist)
}

/// Outcome of [`detect_resonances`], including the raw variant runs.
#[derive(Debug, Clone)]
pub struct ResonanceOutcome {
    pub report: SpectrumReport,
    pub runs: Vec<VariantRun>,
    pub refined_runs: Vec<VariantRun>,
}

/// Promotes discrete candidates of the first variant that are stable across all
/// `(λ, v)` variants, at the configured grid and at the doubled grid.
pub fn detect_resonances(search: &ResonanceSearch) -> Result<ResonanceOutcome> {
    if search.lambdas.len() < 2 {
        return Err(Error::Argument(format!(
            "resonance detection needs at least 2 scaling parameters, got {}",
            search.lambdas.len()
        )));
    }
    let mut angles: Vec<f64> = search.lambdas.iter().map(|&l| (1.0 + l).arg()).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if angles.len() < 2 {
        return Err(Error::Argument("scaling parameters must have distinct arg(1 + λ)".into()));
    }
    if search.profiles.len() < 2 {
        return Err(Error::Argument(format!(
            "resonance detection needs at least 2 profile variants, got {}",
            search.profiles.len()
        )));
    }
    let runs = run_all(search, search.grid)?;
    let refined_runs = run_all(search, search.grid.refined())?;
    let reference = &runs[0];
    let refined_reference = &refined_runs[0];
    let mut entries = Vec::new();
    for e in &reference.report.entries {
        if e.tag != Tag::Discrete || !search.window.contains(e.mu) {
            entries.push(e.clone());
            continue;
        }
        let tol = search.stability_tol * (1.0 + e.mu.norm());
        let (coarse, ray_dist) = drift(e.mu, &runs, &search.window);
        // follow the candidate to the refined grid
        let refined_mu = discrete_in_window(refined_reference, &search.window)
            .into_iter()
            .min_by(|a, b| (a - e.mu).norm().total_cmp(&(b - e.mu).norm()));
        let (fine, fine_ray_dist) = match refined_mu {
            Some(m) => drift(m, &refined_runs, &search.window),
            None => (f64::INFINITY, ray_dist),
        };
        let noise = 1e-8 * (1.0 + e.mu.norm());
        let stable = coarse < tol && fine < tol && (fine <= coarse || fine < noise);
        let mu = refined_mu.filter(|_| stable).unwrap_or(e.mu);
        let tag = if !stable {
            Tag::Unresolved
        } else if mu.im.abs() <= search.real_tol * (1.0 + mu.norm()) {
            Tag::Discrete
        } else {
            Tag::Resonance
        };
        entries.push(SpectrumEntry {
            mu,
            tag,
            ray_index: None,
            stability: Some(StabilityRecord {
                drift: coarse,
                refined_drift: fine,
                tolerance: tol,
                variants: runs.len(),
                min_ray_distance: ray_dist.min(fine_ray_dist),
            }),
        });
    }
    Ok(ResonanceOutcome {
        report: SpectrumReport {
            lambda: reference.lambda,
            ray_angle: reference.rays.angle,
            entries,
        },
        runs,
        refined_runs,
    })
}

/// Result of sampling the numerical range of the principal pencil.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorSample {
    pub max_abs_arg: f64,
    pub bound: f64,
    pub trials: usize,
}

/// Max `|arg((K̂u, u)/(M̂u, u))|` over seeded random complex trial vectors.
pub fn sector_check(principal: &ScaledOperator, trials: usize, alpha: f64, sigma: f64, seed: u64) -> Result<SectorSample> {
    if trials == 0 {
        return Err(Error::Argument("sector check needs at least one trial".into()));
    }
    let n = principal.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_abs_arg = 0.0f64;
    let mut done = 0;
    while done < trials {
        let u: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        if u.iter().all(|z| z.norm() == 0.0) {
            continue;
        }
        let q = hermitian_rayleigh(&principal.k, &principal.m, &u);
        max_abs_arg = max_abs_arg.max(q.arg().abs());
        done += 1;
    }
    Ok(SectorSample {
        max_abs_arg,
        bound: 2.0 * alpha + sigma,
        trials,
    })
}

/// `min |μ − (1 + λ)^{-2}τ² − ν_j|` over `τ ∈ [0, τ_max]` and `j ≤ modes`.
///
/// Each `τ²`-segment is a straight segment in the μ-plane, so the sampled
/// minimum is combined with the exact projection onto the segment.
pub fn fiber_distance(cs: &CrossSection, param: &ScalingParameter, mu: C64, tau_max: f64, tau_samples: usize) -> f64 {
    let one_plus = 1.0 + param.lambda();
    let w = (one_plus * one_plus).inv();
    let t_max = tau_max * tau_max;
    if (w * t_max).norm() < (mu - threshold(1)).norm() {
        log::warn!("fiber curve with τ_max = {tau_max} ends before reaching |μ − ν_1| = {}", (mu - threshold(1)).norm());
    }
    let n = tau_samples.max(2);
    let mut best = f64::INFINITY;
    for nu in cs.thresholds() {
        let d = mu - nu;
        for k in 0..n {
            let tau = tau_max * k as f64 / (n - 1) as f64;
            best = best.min((d - w * (tau * tau)).norm());
        }
        let t = ((d * w.conj()).re / w.norm_sqr()).clamp(0.0, t_max);
        best = best.min((d - w * t).norm());
    }
    best
}

/// Uniform 1D grid `x_i = i·h` on `[0, length]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1d {
    pub length: f64,
    pub n: usize,
}

impl Grid1d {
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length > 0.0) || n < 4 {
            return Err(Error::Argument(format!("1D grid needs positive length and ≥ 4 cells, got {length}, {n}")));
        }
        Ok(Self { length, n })
    }

    pub fn h(&self) -> f64 {
        self.length / self.n as f64
    }
}

/// Cut-off equal to 1 on `[2, 4]`, 0 outside `(1, 5)`, smoothstep ramps in between.
pub fn cutoff(s: f64) -> f64 {
    if s <= 1.0 || s >= 5.0 {
        0.0
    } else if s < 2.0 {
        smoothstep(s - 1.0)
    } else if s <= 4.0 {
        1.0
    } else {
        smoothstep(5.0 - s)
    }
}

/// Point `ν_j + e^{−2i arg(1+λ)} t` of the `j`-th ray.
pub fn ray_point(lambda: C64, j: usize, t: f64) -> C64 {
    threshold(j) + C64::from_polar(t, ray_angle(lambda))
}

/// Quasimode residual ratio at a point of the `j`-th ray.
pub fn quasimode_ratio(grid: &Grid1d, lambda: C64, j: usize, ell: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Argument(format!("ray parameter t must be positive, got {t}")));
    }
    quasimode_ratio_at(grid, lambda, j, ell, ray_point(lambda, j, t))
}

/// `‖(Δ_Ω − (1+λ)^{-2}∂_x² − μ)u_ℓ‖ / ‖u_ℓ‖_{H²}` for
/// `u_ℓ = χ(x/ℓ) e^{i(1+λ)√(μ−ν_j)x} Φ_j(y)`.
///
/// The transverse factor is exact, so `Δ_Ω` contributes `ν_j` and the `y`
/// derivatives enter the `H²` norm through `ν_j` and `ν_j²`.
pub fn quasimode_ratio_at(grid: &Grid1d, lambda: C64, j: usize, ell: f64, mu: C64) -> Result<f64> {
    if !(ell >= 1.0) {
        return Err(Error::Argument(format!("ℓ must be at least 1, got {ell}")));
    }
    if j == 0 {
        return Err(Error::Argument("mode index starts at 1".into()));
    }
    if grid.length < 5.0 * ell + 2.0 * grid.h() {
        return Err(Error::Argument(format!(
            "1D domain of length {} is too short for the cut-off support [ℓ, 5ℓ] with ℓ = {ell}",
            grid.length
        )));
    }
    let nu = threshold(j);
    let one_plus = 1.0 + lambda;
    let c = (one_plus * one_plus).inv();
    let k = one_plus * (mu - nu).sqrt();
    let h = grid.h();
    let u: Vec<C64> = (0..=grid.n)
        .map(|i| {
            let x = i as f64 * h;
            (C64::new(0.0, 1.0) * k * x).exp() * cutoff(x / ell)
        })
        .collect();
    let mut res = 0.0;
    let mut h2 = 0.0;
    for i in 1..grid.n {
        let d1 = (u[i + 1] - u[i - 1]) / (2.0 * h);
        let d2 = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
        let r = -c * d2 + (nu - mu) * u[i];
        res += r.norm_sqr();
        let a = u[i].norm_sqr();
        h2 += a * (1.0 + nu + nu * nu) + d1.norm_sqr() * (1.0 + nu) + d2.norm_sqr();
    }
    Ok((res / h2).sqrt())
}
