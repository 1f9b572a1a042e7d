//! The scaling function `v`, the parameter disc `|λ| < sin α`, and the
//! deformed metric `g_λ = D·g(x + λv(x), y)·D` with `D = diag{1 + λv′(x), 1}`.

use serde::{Deserialize, Serialize};

use crate::geometry::{EndMap, Mat2};
use crate::quadrature::gauss_legendre;
use crate::{max_entry_norm, Error, Result, C64};

const RAMP_PANELS: usize = 8;
const RAMP_NODES: usize = 32;

fn bump_tail(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// C^∞ smoothstep: 0 for `t ≤ 0`, 1 for `t ≥ 1`, monotone in between.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = bump_tail(t);
    let b = bump_tail(1.0 - t);
    a / (a + b)
}

/// Scaling function with `v = 0` on `x ≤ R` and `v′ = 1` on `x ≥ R̃`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingProfile {
    r: f64,
    r_tilde: f64,
    // v at the panel boundaries of the ramp [R, R̃]
    cumulative: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// `(R, R̃)` pair as it appears in run configurations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileParams {
    pub r: f64,
    pub r_tilde: f64,
}

impl ScalingProfile {
    pub fn new(r: f64, r_tilde: f64) -> Result<Self> {
        if !(r.is_finite() && r_tilde.is_finite()) {
            return Err(Error::Argument("profile parameters must be finite".into()));
        }
        if r <= 0.0 {
            return Err(Error::Argument(format!("profile onset R must be positive, got {r}")));
        }
        if r >= r_tilde {
            return Err(Error::Argument(format!(
                "profile requires R < R̃, got R = {r}, R̃ = {r_tilde}"
            )));
        }
        let (nodes, weights) = gauss_legendre(RAMP_NODES);
        let mut profile = Self {
            r,
            r_tilde,
            cumulative: vec![0.0; RAMP_PANELS + 1],
            nodes,
            weights,
        };
        let width = (r_tilde - r) / RAMP_PANELS as f64;
        for p in 0..RAMP_PANELS {
            let a = r + width * p as f64;
            profile.cumulative[p + 1] = profile.cumulative[p] + profile.ramp_integral(a, a + width);
        }
        Ok(profile)
    }

    pub fn from_params(p: ProfileParams) -> Result<Self> {
        Self::new(p.r, p.r_tilde)
    }

    pub fn params(&self) -> ProfileParams {
        ProfileParams {
            r: self.r,
            r_tilde: self.r_tilde,
        }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn r_tilde(&self) -> f64 {
        self.r_tilde
    }

    fn ramp_integral(&self, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(t, w)| w * self.derivative(mid + half * t))
            .sum::<f64>()
            * half
    }

    /// `v′(x)`.
    pub fn derivative(&self, x: f64) -> f64 {
        smoothstep((x - self.r) / (self.r_tilde - self.r))
    }

    /// `v(x) = ∫_R^x v′`.
    pub fn value(&self, x: f64) -> f64 {
        if x <= self.r {
            return 0.0;
        }
        let ramp_total = self.cumulative[RAMP_PANELS];
        if x >= self.r_tilde {
            return ramp_total + (x - self.r_tilde);
        }
        let width = (self.r_tilde - self.r) / RAMP_PANELS as f64;
        let p = (((x - self.r) / width) as usize).min(RAMP_PANELS - 1);
        let a = self.r + width * p as f64;
        self.cumulative[p] + self.ramp_integral(a, x)
    }

    /// Diagnostic for the "sufficiently large R" requirement: `Some(message)` when the
    /// metric still deviates from the identity by more than 0.2 beyond `R`.
    pub fn onset_warning(&self, end: &EndMap) -> Option<String> {
        let bound = end.stabilization_bound(self.r, 12);
        if bound > 0.2 {
            let msg = format!(
                "R = {} may be too small for {}: metric deviation beyond R is {bound:.3} > 0.2",
                self.r,
                end.preset.label()
            );
            log::warn!("{msg}");
            Some(msg)
        } else {
            None
        }
    }
}

/// A complex scaling parameter inside the disc `|λ| < sin α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingParameter {
    lambda: C64,
    alpha: f64,
}

impl ScalingParameter {
    pub fn new(lambda: C64, alpha: f64) -> Result<Self> {
        let radius = alpha.sin();
        if !(lambda.norm() < radius) {
            return Err(Error::OutsideDisc { lambda, radius });
        }
        Ok(Self { lambda, alpha })
    }

    /// Parameter checked against the sector of `end`.
    pub fn for_end(lambda: C64, end: &EndMap) -> Result<Self> {
        Self::new(lambda, end.alpha)
    }

    pub fn lambda(&self) -> C64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Parameter with conjugated `λ`.
    pub fn conj(&self) -> Self {
        Self {
            lambda: self.lambda.conj(),
            alpha: self.alpha,
        }
    }

    /// Point `x + λv(x)` on the deformed contour.
    pub fn curve_point(&self, profile: &ScalingProfile, x: f64) -> Result<C64> {
        if !(x >= 0.0) {
            return Err(Error::Argument(format!("contour abscissa must be non-negative, got {x}")));
        }
        Ok(x + self.lambda * profile.value(x))
    }
}

/// The deformed metric at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformedMetric {
    pub g: Mat2,
    pub g_inv: Mat2,
    pub det: C64,
    /// Analytic square root of `det g_λ`: `(1 + λv′)·det κ′`.
    pub weight: C64,
    /// Contour point `x + λv(x)`.
    pub z: C64,
}

/// `g_λ(x, y)`, its inverse, determinant and volume weight.
pub fn deformed_metric(
    end: &EndMap,
    profile: &ScalingProfile,
    param: &ScalingParameter,
    x: f64,
    y: f64,
) -> Result<DeformedMetric> {
    let lambda = param.lambda();
    let z = param.curve_point(profile, x)?;
    let s = 1.0 + lambda * profile.derivative(x);
    let base = end.metric(z, y)?;
    let g0 = base.g;
    let det_base = base.det();
    if det_base.norm() < 1e-12 || s.norm() < 1e-12 {
        return Err(Error::DegenerateMetric {
            x,
            y,
            det_abs: (det_base * s * s).norm(),
        });
    }
    let off = g0[0][1] * s;
    let g = [[g0[0][0] * s * s, off], [off, g0[1][1]]];
    let inv_det = det_base.inv();
    let inv_off = -g0[0][1] * inv_det / s;
    let g_inv = [[g0[1][1] * inv_det / (s * s), inv_off], [inv_off, g0[0][0] * inv_det]];
    Ok(DeformedMetric {
        g,
        g_inv,
        det: s * s * det_base,
        weight: s * end.jacobian_det_unchecked(z, y),
        z,
    })
}

/// `‖g_λ⁻¹ − diag{(1 + λv′)^{-2}, 1}‖` in the max-entry norm.
pub fn deviation_norm(
    end: &EndMap,
    profile: &ScalingProfile,
    param: &ScalingParameter,
    x: f64,
    y: f64,
) -> Result<f64> {
    let m = deformed_metric(end, profile, param, x, y)?;
    let s = 1.0 + param.lambda() * profile.derivative(x);
    let dev = [
        [m.g_inv[0][0] - (s * s).inv(), m.g_inv[0][1]],
        [m.g_inv[1][0], m.g_inv[1][1] - 1.0],
    ];
    Ok(max_entry_norm(&dev))
}
