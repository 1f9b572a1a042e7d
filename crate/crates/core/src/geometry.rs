//! Cross-section data and the analytic end maps `κ(z, y)`.
//!
//! The end of the waveguide is parametrised over the half-strip
//! `(0, ∞) × (0, 1)`. Every preset map is analytic in the axial coordinate
//! `z` on a sector `|arg z| < α`, which is what makes complex scaling of the
//! axial variable possible.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{max_entry_norm, Error, Result, C64};

/// The unit interval `Ω = (0, 1)` with its first `modes` Dirichlet eigenpairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossSection {
    pub modes: usize,
}

impl CrossSection {
    pub fn new(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::Argument("cross-section needs at least one mode".into()));
        }
        Ok(Self { modes })
    }

    /// Threshold `ν_j = (jπ)²`, `1 ≤ j ≤ modes`.
    pub fn threshold(&self, j: usize) -> Result<f64> {
        if j == 0 || j > self.modes {
            return Err(Error::Argument(format!(
                "threshold index {j} outside 1..={}",
                self.modes
            )));
        }
        Ok(threshold(j))
    }

    /// All thresholds `ν_1 < … < ν_J`.
    pub fn thresholds(&self) -> Vec<f64> {
        (1..=self.modes).map(threshold).collect()
    }
}

/// `(jπ)²` without range checks.
pub fn threshold(j: usize) -> f64 {
    let k = j as f64 * PI;
    k * k
}

/// Normalised transverse eigenfunction `√2 sin(jπy)`.
pub fn transverse_mode(j: usize, y: f64) -> f64 {
    std::f64::consts::SQRT_2 * (j as f64 * PI * y).sin()
}

/// Axial profile functions usable for `φ` and `ψ` in [`EndPreset::ProfileProduct`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// `1`
    One,
    /// `1 + e^{-z}`
    ExpDecay,
    /// `1 + (z+1)^{-s}`
    PowerDecay,
    /// `1 + 1/log(z+2)`
    InvLog,
}

impl ProfileKind {
    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::One => "one",
            ProfileKind::ExpDecay => "exp_decay",
            ProfileKind::PowerDecay => "power_decay",
            ProfileKind::InvLog => "inv_log",
        }
    }

    /// Returns `(f(z), f'(z))`.
    fn value_and_derivative(self, z: C64, s: f64) -> (C64, C64) {
        let one = C64::new(1.0, 0.0);
        match self {
            ProfileKind::One => (one, C64::new(0.0, 0.0)),
            ProfileKind::ExpDecay => {
                let e = (-z).exp();
                (one + e, -e)
            }
            ProfileKind::PowerDecay => {
                let w = z + 1.0;
                let p = w.powf(-s);
                (one + p, -s * p / w)
            }
            ProfileKind::InvLog => {
                let w = z + 2.0;
                let l = w.ln();
                (one + l.inv(), -(w * l * l).inv())
            }
        }
    }

    /// Closed-form antiderivative `∫_0^z f(t) dt`.
    fn antiderivative(self, z: C64, s: f64) -> C64 {
        match self {
            ProfileKind::One => z,
            ProfileKind::ExpDecay => z + 1.0 - (-z).exp(),
            ProfileKind::PowerDecay => {
                let w = z + 1.0;
                if (s - 1.0).abs() < 1e-12 {
                    z + w.ln()
                } else {
                    z + (w.powf(1.0 - s) - 1.0) / (1.0 - s)
                }
            }
            ProfileKind::InvLog => z + log_integral(z + 2.0) - LI_2,
        }
    }
}

/// `li(2)`.
const LI_2: f64 = 1.045_163_780_117_493;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Logarithmic integral `li(w) = Ei(log w)` on the principal branch,
/// valid for `w` near the positive real axis with `|w| > 1`.
pub(crate) fn log_integral(w: C64) -> C64 {
    let zeta = w.ln();
    // Ei(ζ) = γ + log ζ + Σ ζ^k / (k·k!)
    let mut sum = C64::new(0.0, 0.0);
    let mut power = C64::new(1.0, 0.0);
    let mut factorial = 1.0;
    for k in 1..400 {
        let kf = k as f64;
        power *= zeta;
        factorial *= kf;
        let term = power / (kf * factorial);
        sum += term;
        if term.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    sum + EULER_GAMMA + zeta.ln()
}

/// Analytic end-map families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum EndPreset {
    /// `κ(x, y) = (x, y)`: the straight half-strip.
    Straight,
    /// `κ(x, y) = (x, y + log(x + 2))`.
    LogShear,
    /// `κ(x, y) = (∫_0^x φ, y·ψ(x))`.
    ProfileProduct {
        phi: ProfileKind,
        psi: ProfileKind,
        #[serde(default = "default_s")]
        s: f64,
    },
}

fn default_s() -> f64 {
    1.0
}

impl EndPreset {
    /// Sector half-angle on which the preset is continued.
    pub fn sector_half_angle(&self) -> f64 {
        match self {
            EndPreset::Straight => PI / 4.0 - 0.01,
            EndPreset::LogShear | EndPreset::ProfileProduct { .. } => PI / 6.0,
        }
    }

    pub fn label(&self) -> String {
        match self {
            EndPreset::Straight => "straight".into(),
            EndPreset::LogShear => "log_shear".into(),
            EndPreset::ProfileProduct { phi, psi, s } => {
                format!("profile_product({},{},s={s})", phi.name(), psi.name())
            }
        }
    }
}

/// A 2×2 complex matrix, row-major.
pub type Mat2 = [[C64; 2]; 2];

pub(crate) fn mat2_identity() -> Mat2 {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    [[one, zero], [zero, one]]
}

/// `AᵀB` without conjugation.
pub(crate) fn mat2_transpose_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for (l, row) in out.iter_mut().enumerate() {
        for (m, entry) in row.iter_mut().enumerate() {
            *entry = a[0][l] * b[0][m] + a[1][l] * b[1][m];
        }
    }
    out
}

/// The metric `g = (κ′)ᵀκ′` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample {
    pub g: Mat2,
    pub z: C64,
    pub y: f64,
}

impl MetricSample {
    pub fn det(&self) -> C64 {
        self.g[0][0] * self.g[1][1] - self.g[0][1] * self.g[1][0]
    }
}

/// An end map with its continuation sector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndMap {
    pub preset: EndPreset,
    pub alpha: f64,
}

impl EndMap {
    pub fn new(preset: EndPreset) -> Result<Self> {
        if let EndPreset::ProfileProduct { s, .. } = preset {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Argument(format!("power exponent s must be positive, got {s}")));
            }
        }
        Ok(Self {
            preset,
            alpha: preset.sector_half_angle(),
        })
    }

    pub fn straight() -> Self {
        Self::new(EndPreset::Straight).expect("valid preset")
    }

    pub fn log_shear() -> Self {
        Self::new(EndPreset::LogShear).expect("valid preset")
    }

    /// Whether `z` is an admissible axial point: real non-negative, or inside the open sector.
    pub fn contains(&self, z: C64) -> bool {
        if z.im == 0.0 {
            return z.re >= 0.0;
        }
        z.re > 0.0 && z.arg().abs() < self.alpha
    }

    fn check(&self, z: C64, y: f64) -> Result<()> {
        if !self.contains(z) {
            return Err(Error::OutsideSector { z, alpha: self.alpha });
        }
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::Argument(format!("transverse coordinate y = {y} outside [0, 1]")));
        }
        Ok(())
    }

    /// `κ(z, y) = (ζ, η)`.
    pub fn evaluate(&self, z: C64, y: f64) -> Result<(C64, C64)> {
        self.check(z, y)?;
        let yc = C64::new(y, 0.0);
        Ok(match self.preset {
            EndPreset::Straight => (z, yc),
            EndPreset::LogShear => (z, yc + (z + 2.0).ln()),
            EndPreset::ProfileProduct { phi, psi, s } => {
                let (psi_v, _) = psi.value_and_derivative(z, s);
                (phi.antiderivative(z, s), yc * psi_v)
            }
        })
    }

    /// Jacobian `κ′` with rows `(ζ, η)` and columns `(x, y)`.
    pub fn jacobian(&self, z: C64, y: f64) -> Result<Mat2> {
        self.check(z, y)?;
        Ok(self.jacobian_unchecked(z, y))
    }

    pub(crate) fn jacobian_unchecked(&self, z: C64, y: f64) -> Mat2 {
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        match self.preset {
            EndPreset::Straight => mat2_identity(),
            EndPreset::LogShear => [[one, zero], [(z + 2.0).inv(), one]],
            EndPreset::ProfileProduct { phi, psi, s } => {
                let (phi_v, _) = phi.value_and_derivative(z, s);
                let (psi_v, psi_d) = psi.value_and_derivative(z, s);
                [[phi_v, zero], [psi_d * y, psi_v]]
            }
        }
    }

    /// `det κ′`, the analytic square root of `det g`.
    pub(crate) fn jacobian_det_unchecked(&self, z: C64, y: f64) -> C64 {
        let j = self.jacobian_unchecked(z, y);
        j[0][0] * j[1][1] - j[0][1] * j[1][0]
    }

    /// Metric `g = (κ′)ᵀκ′` (no conjugation).
    pub fn metric(&self, z: C64, y: f64) -> Result<MetricSample> {
        self.check(z, y)?;
        Ok(self.metric_unchecked(z, y))
    }

    pub(crate) fn metric_unchecked(&self, z: C64, y: f64) -> MetricSample {
        let g = match self.preset {
            EndPreset::Straight => mat2_identity(),
            EndPreset::LogShear => {
                let a = (z + 2.0).inv();
                let one = C64::new(1.0, 0.0);
                [[one + a * a, a], [a, one]]
            }
            EndPreset::ProfileProduct { .. } => {
                let j = self.jacobian_unchecked(z, y);
                let mut g = mat2_transpose_mul(&j, &j);
                // keep the off-diagonal pair bitwise equal
                g[1][0] = g[0][1];
                g
            }
        };
        MetricSample { g, z, y }
    }

    /// Max-entry deviation `‖g(z, y) − Id‖` sampled over `Re z ≥ x0`, `|arg z| ≤ α`, `y ∈ [0, 1]`.
    ///
    /// Axial samples are geometric in `[x0, 8·x0]`; the nearest real point
    /// `z = x0` is always included.
    pub fn stabilization_bound(&self, x0: f64, samples: usize) -> f64 {
        let n = samples.max(2);
        let angle = self.alpha * (1.0 - 1e-9);
        // odd angular count so the real axis is sampled
        let na = 2 * (n / 2) + 1;
        let mut worst = 0.0f64;
        for i in 0..n {
            let t = x0 * 8f64.powf(i as f64 / (n - 1) as f64);
            for k in 0..na {
                let theta = -angle + 2.0 * angle * k as f64 / (na - 1) as f64;
                let z = C64::new(t, t * theta.tan());
                for m in 0..n {
                    let y = m as f64 / (n - 1) as f64;
                    let g = self.metric_unchecked(z, y).g;
                    let dev = [[g[0][0] - 1.0, g[0][1]], [g[1][0], g[1][1] - 1.0]];
                    worst = worst.max(max_entry_norm(&dev));
                }
            }
        }
        worst
    }

    /// Relative Cauchy–Riemann residual `max |∂g/∂z̄| / max |g|` by central differences.
    pub fn cauchy_riemann_residual(&self, z: C64, y: f64, step: f64) -> f64 {
        let gx_p = self.metric_unchecked(z + step, y).g;
        let gx_m = self.metric_unchecked(z - step, y).g;
        let gy_p = self.metric_unchecked(z + C64::new(0.0, step), y).g;
        let gy_m = self.metric_unchecked(z - C64::new(0.0, step), y).g;
        let g0 = self.metric_unchecked(z, y).g;
        let mut worst = 0.0f64;
        for l in 0..2 {
            for m in 0..2 {
                let dx = (gx_p[l][m] - gx_m[l][m]) / (2.0 * step);
                let dy = (gy_p[l][m] - gy_m[l][m]) / (2.0 * step);
                let dzbar = 0.5 * (dx + C64::new(0.0, 1.0) * dy);
                worst = worst.max(dzbar.norm());
            }
        }
        worst / max_entry_norm(&g0).max(f64::MIN_POSITIVE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn all_presets() -> Vec<EndMap> {
        let mut out = vec![EndMap::straight(), EndMap::log_shear()];
        for phi in [ProfileKind::One, ProfileKind::ExpDecay, ProfileKind::PowerDecay, ProfileKind::InvLog] {
            for psi in [ProfileKind::One, ProfileKind::ExpDecay, ProfileKind::PowerDecay, ProfileKind::InvLog] {
                out.push(EndMap::new(EndPreset::ProfileProduct { phi, psi, s: 1.5 }).unwrap());
            }
        }
        out
    }

    #[test]
    fn thresholds_are_squares_of_multiples_of_pi() {
        let cs = CrossSection::new(3).unwrap();
        assert!((cs.threshold(1).unwrap() - 9.869_604_401_089_358).abs() < 1e-12);
        assert!((cs.threshold(2).unwrap() - 39.478_417_604_357_43).abs() < 1e-11);
        assert!((cs.threshold(3).unwrap() - 88.826_439_609_804_22).abs() < 1e-11);
        assert!(cs.threshold(0).is_err());
        assert!(cs.threshold(4).is_err());
        let t = cs.thresholds();
        assert!(t.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn transverse_modes_are_orthonormal() {
        let (x, w) = crate::quadrature::gauss_legendre(40);
        for j in 1..=4 {
            for k in 1..=4 {
                let ip: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(x, w)| 0.5 * w * transverse_mode(j, 0.5 * (x + 1.0)) * transverse_mode(k, 0.5 * (x + 1.0)))
                    .sum();
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-10, "j={j} k={k} ip={ip}");
            }
        }
    }

    #[test]
    fn straight_map_is_identity() {
        let em = EndMap::straight();
        let (zeta, eta) = em.evaluate(c(2.5, 0.0), 0.3).unwrap();
        assert_eq!(zeta, c(2.5, 0.0));
        assert_eq!(eta, c(0.3, 0.0));
        assert_eq!(em.jacobian(c(3.0, 0.5), 0.7).unwrap(), mat2_identity());
        assert_eq!(em.metric(c(3.0, 0.5), 0.7).unwrap().g, mat2_identity());
        assert_eq!(em.stabilization_bound(1.0, 8), 0.0);
    }

    #[test]
    fn log_shear_evaluation() {
        let em = EndMap::log_shear();
        let (zeta, eta) = em.evaluate(c(0.0, 0.0), 0.0).unwrap();
        assert_eq!(zeta, c(0.0, 0.0));
        assert!((eta.re - 2f64.ln()).abs() < 1e-15 && eta.im == 0.0);

        let (zeta, eta) = em.evaluate(c(2.0, 0.5), 0.0).unwrap();
        assert_eq!(zeta, c(2.0, 0.5));
        // log(4 + 0.5i) = log|·| + i atan(0.125)
        let expect = c(0.5 * (16.25f64).ln(), (0.125f64).atan());
        assert!((eta - expect).norm() < 1e-15);
    }

    #[test]
    fn log_shear_jacobian_and_metric_at_origin() {
        let em = EndMap::log_shear();
        let j = em.jacobian(c(0.0, 0.0), 0.4).unwrap();
        assert_eq!(j, [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.5, 0.0), c(1.0, 0.0)]]);
        assert_eq!(em.jacobian_det_unchecked(c(0.0, 0.0), 0.4), c(1.0, 0.0));
        let g = em.metric(c(0.0, 0.0), 0.4).unwrap().g;
        assert_eq!(g, [[c(1.25, 0.0), c(0.5, 0.0)], [c(0.5, 0.0), c(1.0, 0.0)]]);
        for x in [0.0, 0.7, 3.0, 11.0, 40.0] {
            let det = em.metric(c(x, 0.0), 0.5).unwrap().det();
            assert!((det - 1.0).norm() < 1e-14);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences_at_real_points() {
        for em in all_presets() {
            for &(x, y) in &[(0.3, 0.2), (2.0, 0.9), (7.5, 0.5)] {
                let j = em.jacobian(c(x, 0.0), y).unwrap();
                let h = 1e-6;
                let (zp, ep) = em.evaluate(c(x + h, 0.0), y).unwrap();
                let (zm, emn) = em.evaluate(c(x - h, 0.0), y).unwrap();
                let (zyp, eyp) = em.evaluate(c(x, 0.0), y + h).unwrap();
                let (zym, eym) = em.evaluate(c(x, 0.0), y - h).unwrap();
                let fd = [
                    [(zp - zm) / (2.0 * h), (zyp - zym) / (2.0 * h)],
                    [(ep - emn) / (2.0 * h), (eyp - eym) / (2.0 * h)],
                ];
                for l in 0..2 {
                    for m in 0..2 {
                        assert!(
                            (fd[l][m] - j[l][m]).norm() < 1e-7,
                            "{} at ({x},{y}) entry ({l},{m}): fd {} vs {}",
                            em.preset.label(),
                            fd[l][m],
                            j[l][m]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn metric_is_symmetric_and_real_positive_definite_on_real_axis() {
        for em in all_presets() {
            for &(x, y) in &[(0.0, 0.0), (1.0, 0.5), (9.0, 1.0)] {
                let g = em.metric(c(x, 0.0), y).unwrap().g;
                assert_eq!(g[0][1], g[1][0]);
                assert!(g.iter().flatten().all(|e| e.im == 0.0));
                assert!(g[0][0].re > 0.0);
                assert!(g[0][0].re * g[1][1].re - g[0][1].re * g[1][0].re > 0.0);
            }
        }
    }

    #[test]
    fn sector_violation_names_bound() {
        let em = EndMap::log_shear();
        let err = em.evaluate(c(1.0, 1.0), 0.5).unwrap_err();
        match err {
            Error::OutsideSector { alpha, .. } => assert!((alpha - PI / 6.0).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        assert!(em.evaluate(c(-1.0, 0.0), 0.5).is_err());
        assert!(em.evaluate(c(1.0, 0.0), 1.5).is_err());
    }

    #[test]
    fn log_shear_stabilization_bound_is_nearest_corner() {
        let em = EndMap::log_shear();
        // deviation entries are a and a² with a = 1/(z+2); the largest is |a| at z = X
        let b8 = em.stabilization_bound(8.0, 24);
        assert!((b8 - 0.1).abs() < 1e-12, "{b8}");
        let b16 = em.stabilization_bound(16.0, 24);
        assert!(b16 <= b8);
        assert!((b16 - 1.0 / 18.0).abs() < 1e-12);
    }

    #[test]
    fn decay_along_doubling_sequence() {
        for em in all_presets().into_iter().skip(1) {
            let bounds: Vec<f64> = [4.0, 8.0, 16.0, 32.0].iter().map(|&x| em.stabilization_bound(x, 10)).collect();
            for w in bounds.windows(2) {
                assert!(w[1] <= w[0] * 1.01, "{}: {bounds:?}", em.preset.label());
            }
        }
    }

    #[test]
    fn cauchy_riemann_residual_small_in_sector() {
        for em in all_presets() {
            for i in 0..20 {
                let r = 1.0 + i as f64 * 0.7;
                let theta = em.alpha * 0.8 * ((i as f64) / 10.0 - 1.0);
                let z = C64::from_polar(r, theta);
                let res = em.cauchy_riemann_residual(z, 0.37, 1e-4);
                assert!(res < 1e-6, "{} at {z}: {res}", em.preset.label());
            }
        }
    }

    #[test]
    fn reflection_of_metric_is_conjugation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for em in all_presets() {
            for _ in 0..50 {
                let r: f64 = rng.random_range(0.1..30.0);
                let th: f64 = rng.random_range(-0.95..0.95) * em.alpha;
                let y: f64 = rng.random_range(0.0..1.0);
                let z = C64::from_polar(r, th);
                let g = em.metric(z, y).unwrap().g;
                let gc = em.metric(z.conj(), y).unwrap().g;
                for l in 0..2 {
                    for m in 0..2 {
                        assert!((gc[l][m] - g[l][m].conj()).norm() <= 4.0 * f64::EPSILON * g[l][m].norm().max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn log_integral_matches_real_quadrature() {
        // li(w) - li(2) = ∫_2^w dt / log t
        for w in [2.5, 4.0, 20.0] {
            let q = crate::quadrature::integrate_adaptive(|t| C64::new(1.0 / t.ln(), 0.0), 2.0, w, 1e-13, 0.0, 200)
                .unwrap()
                .value;
            let li = log_integral(C64::new(w, 0.0)) - LI_2;
            assert!((li - q).norm() < 1e-11, "w={w}: {li} vs {q}");
        }
    }
}
