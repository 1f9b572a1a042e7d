//! Gaussian-polynomial analytic vectors, scaled evaluation, resolvent matrix
//! elements, continuation scans in `μ`, contour residues and the Weierstrass
//! mollifier.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_deformed, pairing_lambda, Grid, ScaledOperator, ShiftedSolver};
use crate::geometry::{transverse_mode, EndMap};
use crate::quadrature::integrate_adaptive;
use crate::scaling::{smoothstep, ScalingProfile};
use crate::spectral::RayFamily;
use crate::{Error, Result, C64};

/// `e^{−γ(z−z₀)²} (Σ_p c_p z^p) Φ_j(y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussTerm {
    pub gamma: f64,
    pub z0: f64,
    pub coeffs: Vec<C64>,
    pub mode: usize,
}

impl GaussTerm {
    pub fn axial(&self, z: C64) -> C64 {
        let poly = self
            .coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c);
        let d = z - self.z0;
        (-self.gamma * d * d).exp() * poly
    }
}

/// Finite sum of [`GaussTerm`]s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialAnalyticVector {
    pub terms: Vec<GaussTerm>,
}

impl PartialAnalyticVector {
    pub fn new(terms: Vec<GaussTerm>) -> Result<Self> {
        let v = Self { terms };
        v.validate()?;
        Ok(v)
    }

    /// Single term with constant polynomial `1`.
    pub fn gaussian(gamma: f64, z0: f64, mode: usize) -> Result<Self> {
        Self::new(vec![GaussTerm {
            gamma,
            z0,
            coeffs: vec![C64::new(1.0, 0.0)],
            mode,
        }])
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::Argument("analytic vector needs at least one term".into()));
        }
        for (i, t) in self.terms.iter().enumerate() {
            if !(t.gamma > 0.0 && t.gamma.is_finite()) {
                return Err(Error::Argument(format!("term {i}: γ must be positive, got {}", t.gamma)));
            }
            if !t.z0.is_finite() || t.coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
                return Err(Error::Argument(format!("term {i}: centre and coefficients must be finite")));
            }
            if t.mode == 0 {
                return Err(Error::Argument(format!("term {i}: mode index starts at 1")));
            }
        }
        Ok(())
    }

    pub fn eval(&self, z: C64, y: f64) -> C64 {
        self.terms
            .iter()
            .map(|t| t.axial(z) * transverse_mode(t.mode, y))
            .sum()
    }

    /// Coefficientwise conjugate, so that `conj(f)(z̄) = conj(f(z))`.
    pub fn conj(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| GaussTerm {
                    coeffs: t.coeffs.iter().map(|c| c.conj()).collect(),
                    ..t.clone()
                })
                .collect(),
        }
    }
}

/// Samples `f(x + λv(x), y)` at the interior nodes of `grid`.
pub fn evaluate_scaled(f: &PartialAnalyticVector, profile: &ScalingProfile, lambda: C64, grid: &Grid) -> Vec<C64> {
    grid.sample(|x, y| f.eval(x + lambda * profile.value(x), y))
}

/// Resolvent element with its solver residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolventValue {
    pub value: C64,
    pub residual: f64,
}

/// Pencil and scaled data reused across many `μ`.
#[derive(Debug, Clone)]
pub struct ResolventContext {
    pub op: ScaledOperator,
    pub f: Vec<C64>,
    pub g: Vec<C64>,
}

impl ResolventContext {
    pub fn new(
        grid: &Grid,
        end: &EndMap,
        profile: &ScalingProfile,
        lambda: C64,
        f: &PartialAnalyticVector,
        g: &PartialAnalyticVector,
    ) -> Result<Self> {
        f.validate()?;
        g.validate()?;
        let op = assemble_deformed(grid, end, profile, lambda)?;
        Ok(Self::from_operator(op, f, g))
    }

    pub fn from_operator(op: ScaledOperator, f: &PartialAnalyticVector, g: &PartialAnalyticVector) -> Self {
        let fs = evaluate_scaled(f, &op.profile, op.lambda, &op.grid);
        let gs = evaluate_scaled(g, &op.profile, op.lambda.conj(), &op.grid);
        Self { op, f: fs, g: gs }
    }

    /// `((K − μM)⁻¹ M F_λ, G_λ̄)_λ`.
    pub fn element(&self, mu: C64) -> Result<ResolventValue> {
        let solver = ShiftedSolver::for_operator(&self.op, mu)?;
        let (u, residual) = solver.apply(&self.op.m, &self.f)?;
        if residual > 1e-10 {
            return Err(Error::Numerical(format!(
                "resolvent solve at μ = {mu} reached residual {residual:e}"
            )));
        }
        Ok(ResolventValue {
            value: pairing_lambda(&self.op, &u, &self.g)?,
            residual,
        })
    }
}

pub fn resolvent_element(
    grid: &Grid,
    end: &EndMap,
    profile: &ScalingProfile,
    lambda: C64,
    mu: C64,
    f: &PartialAnalyticVector,
    g: &PartialAnalyticVector,
) -> Result<ResolventValue> {
    ResolventContext::new(grid, end, profile, lambda, f, g)?.element(mu)
}

/// Resolvent element sampled along a `μ` path for one `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventTrace {
    pub lambda: C64,
    pub grid: Grid,
    pub mu: Vec<C64>,
    pub values: Vec<C64>,
    pub residuals: Vec<f64>,
}

impl ResolventTrace {
    pub fn compute(ctx: &ResolventContext, path: &[C64]) -> Result<Self> {
        let vals: Vec<ResolventValue> = path.par_iter().map(|&mu| ctx.element(mu)).collect::<Result<_>>()?;
        Ok(Self {
            lambda: ctx.op.lambda,
            grid: ctx.op.grid,
            mu: path.to_vec(),
            values: vals.iter().map(|v| v.value).collect(),
            residuals: vals.iter().map(|v| v.residual).collect(),
        })
    }
}

/// Max over samples and traces of `|T_a − T_0| / max(|T_a|, |T_0|)`.
pub fn agreement(traces: &[ResolventTrace]) -> f64 {
    let Some(first) = traces.first() else { return 0.0 };
    let mut worst = 0.0f64;
    for t in &traces[1..] {
        for (a, b) in t.values.iter().zip(&first.values) {
            let scale = a.norm().max(b.norm());
            if scale > 0.0 {
                worst = worst.max((a - b).norm() / scale);
            }
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationScan {
    pub traces: Vec<ResolventTrace>,
    pub agreement: f64,
}

/// First parameter `s ∈ [0, 1]` where the segment `a + s(b − a)` meets a ray.
pub fn segment_ray_crossing(rays: &RayFamily, a: C64, b: C64) -> Option<C64> {
    let e = C64::from_polar(1.0, rays.angle);
    let d = b - a;
    let mut best: Option<f64> = None;
    for &nu in &rays.thresholds {
        // a + s d = ν + t e  ⇔  s d − t e = ν − a
        let rhs = nu - a;
        let det = -d.re * e.im + d.im * e.re;
        if det.abs() < 1e-300 {
            // parallel: touching only if collinear
            let cross = rhs.re * e.im - rhs.im * e.re;
            if cross.abs() <= 1e-14 * (1.0 + rhs.norm()) {
                for s in [0.0, 1.0] {
                    let p = a + d * s - nu;
                    if (p * e.conj()).re >= 0.0 {
                        best = Some(best.map_or(s, |b: f64| b.min(s)));
                    }
                }
            }
            continue;
        }
        let s = (-rhs.re * e.im + rhs.im * e.re) / det;
        let t = (d.re * rhs.im - d.im * rhs.re) / det;
        if (0.0..=1.0).contains(&s) && t >= 0.0 {
            best = Some(best.map_or(s, |b: f64| b.min(s)));
        }
    }
    best.map(|s| a + d * s)
}

/// One trace per `λ` over a common path, with their agreement metric.
#[allow(clippy::too_many_arguments)]
pub fn continuation_scan(
    grid: &Grid,
    end: &EndMap,
    profile: &ScalingProfile,
    lambdas: &[C64],
    path: &[C64],
    rays: &[RayFamily],
    f: &PartialAnalyticVector,
    g: &PartialAnalyticVector,
) -> Result<ContinuationScan> {
    if lambdas.len() < 2 {
        return Err(Error::Argument(format!("continuation scan needs at least 2 λ values, got {}", lambdas.len())));
    }
    if rays.len() != lambdas.len() {
        return Err(Error::Dimension {
            expected: lambdas.len(),
            found: rays.len(),
        });
    }
    if path.is_empty() {
        return Err(Error::Argument("μ path is empty".into()));
    }
    for (&lam, r) in lambdas.iter().zip(rays) {
        for w in path.windows(2) {
            if let Some(x) = segment_ray_crossing(r, w[0], w[1]) {
                return Err(Error::Argument(format!("μ path crosses a ray of λ = {lam} at μ = {x}")));
            }
        }
        if let [only] = path {
            if let Some(x) = segment_ray_crossing(r, *only, *only) {
                return Err(Error::Argument(format!("μ path crosses a ray of λ = {lam} at μ = {x}")));
            }
        }
    }
    let traces = lambdas
        .iter()
        .map(|&lam| {
            let ctx = ResolventContext::new(grid, end, profile, lam, f, g)?;
            ResolventTrace::compute(&ctx, path)
        })
        .collect::<Result<Vec<_>>>()?;
    let agreement = agreement(&traces);
    Ok(ContinuationScan { traces, agreement })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleProbe {
    pub center: C64,
    pub radius: f64,
    pub points: usize,
    pub residue: C64,
    /// `max |f|` on the circle times the radius, the natural residue scale.
    pub scale: f64,
}

/// Trapezoid estimate of `(1/2πi) ∮ f(μ) dμ` on the circle `|μ − μ₀| = r`.
pub fn pole_probe(
    ctx: &ResolventContext,
    center: C64,
    radius: f64,
    points: usize,
    rays: Option<&RayFamily>,
    candidates: &[C64],
) -> Result<PoleProbe> {
    if points < 16 {
        return Err(Error::Argument(format!("pole probe needs at least 16 contour points, got {points}")));
    }
    if !(radius > 0.0) {
        return Err(Error::Argument(format!("pole probe radius must be positive, got {radius}")));
    }
    if let Some(r) = rays {
        let d = r.distance(center);
        if d <= radius {
            return Err(Error::Argument(format!(
                "contour |μ − {center}| = {radius} meets a ray (distance {d})"
            )));
        }
    }
    let same = 1e-9 * (1.0 + center.norm());
    for &c in candidates {
        let d = (c - center).norm();
        if d > same && d <= 1.5 * radius {
            return Err(Error::Argument(format!("contour around {center} encloses or touches candidate {c}")));
        }
    }
    let nodes: Vec<C64> = (0..points)
        .map(|k| C64::from_polar(radius, 2.0 * PI * k as f64 / points as f64))
        .collect();
    let vals: Vec<C64> = nodes
        .par_iter()
        .map(|&w| ctx.element(center + w).map(|v| v.value))
        .collect::<Result<_>>()?;
    let residue = vals.iter().zip(&nodes).map(|(f, w)| f * w).sum::<C64>() / points as f64;
    let scale = radius * vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(PoleProbe {
        center,
        radius,
        points,
        residue,
        scale,
    })
}

/// Smooth bump equal to 1 on `[a + w, b − w]`, 0 outside `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothBump {
    pub a: f64,
    pub b: f64,
    pub ramp: f64,
}

impl SmoothBump {
    pub fn new(a: f64, b: f64, ramp: f64) -> Result<Self> {
        if !(a < b && ramp > 0.0 && 2.0 * ramp <= b - a) {
            return Err(Error::Argument(format!("invalid bump [{a}, {b}] with ramp {ramp}")));
        }
        Ok(Self { a, b, ramp })
    }

    pub fn eval(&self, x: f64) -> f64 {
        smoothstep(((x - self.a) / self.ramp).clamp(0.0, 1.0)) * smoothstep(((self.b - x) / self.ramp).clamp(0.0, 1.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MollifierResult {
    pub ell: f64,
    pub lambda: C64,
    pub x: Vec<f64>,
    pub samples: Vec<C64>,
    pub l2_error: f64,
    pub sup_error: f64,
}

/// Lower bound `ε` of `Re (1 + λs)²` over `s ∈ [0, 1]`, the Gaussian kernel decay rate.
fn kernel_decay(lambda: C64) -> f64 {
    (0..=100)
        .map(|k| {
            let w = 1.0 + lambda * (k as f64 / 100.0);
            (w * w).re
        })
        .fold(f64::INFINITY, f64::min)
}

/// `g_ℓ(x̃) = f_ℓ(x̃ + λv(x̃))` with
/// `f_ℓ(z) = √(ℓ/π) ∫ h(x) e^{−ℓ(z − x − λv(x))²} (1 + λv′(x)) dx`, sampled at
/// `n + 1` equispaced points of `[0, x_max]`, with discrete `L²` and sup errors
/// against `h`. The transverse mode has unit norm and is left out.
pub fn weierstrass_mollify(
    h: &SmoothBump,
    ell: f64,
    profile: &ScalingProfile,
    lambda: C64,
    x_max: f64,
    n: usize,
) -> Result<MollifierResult> {
    if !(ell >= 1.0) {
        return Err(Error::Argument(format!("ℓ must be at least 1, got {ell}")));
    }
    if !(h.a > 0.0 && h.b < x_max - 2.0) {
        return Err(Error::Argument(format!(
            "bump support [{}, {}] must lie in (0, X_max − 2) = (0, {})",
            h.a,
            h.b,
            x_max - 2.0
        )));
    }
    if lambda.norm() >= std::f64::consts::FRAC_1_SQRT_2 {
        return Err(Error::OutsideDisc {
            lambda,
            radius: std::f64::consts::FRAC_1_SQRT_2,
        });
    }
    if n < 2 {
        return Err(Error::Argument("mollifier needs at least 2 sample cells".into()));
    }
    let eps = kernel_decay(lambda);
    let norm = (ell / PI).sqrt();
    let xs: Vec<f64> = (0..=n).map(|i| x_max * i as f64 / n as f64).collect();
    let samples: Vec<C64> = xs
        .par_iter()
        .map(|&xt| {
            let dist = if xt < h.a {
                h.a - xt
            } else if xt > h.b {
                xt - h.b
            } else {
                0.0
            };
            if eps > 0.0 && eps * ell * dist * dist > 50.0 {
                return Ok(C64::new(0.0, 0.0));
            }
            let z = xt + lambda * profile.value(xt);
            let integrand = |x: f64| {
                let d = z - x - lambda * profile.value(x);
                (-ell * d * d).exp() * (1.0 + lambda * profile.derivative(x)) * h.eval(x)
            };
            integrate_adaptive(integrand, h.a, h.b, 1e-10, 1e-15, 4000).map(|r| r.value * norm)
        })
        .collect::<Result<_>>()?;
    let dx = x_max / n as f64;
    let mut l2 = 0.0;
    let mut sup = 0.0f64;
    for (&x, g) in xs.iter().zip(&samples) {
        let e = (g - h.eval(x)).norm();
        l2 += e * e * dx;
        sup = sup.max(e);
    }
    Ok(MollifierResult {
        ell,
        lambda,
        x: xs,
        samples,
        l2_error: l2.sqrt(),
        sup_error: sup,
    })
}
