//! Q1 finite element assembly of the deformed operator on the truncated
//! half-strip `(0, X_max) × (0, 1)` with Dirichlet conditions on all sides.
//!
//! The weak form is bilinear (no conjugation):
//!
//! ```text
//! K[u, w] = ∫ (g_λ⁻¹ ∇u)·∇w  √det g_λ dx dy
//! M[u, w] = ∫ u w            √det g_λ dx dy
//! ```
//!
//! so that `K` and `M` are complex symmetric for every `λ`. The principal
//! part uses weight 1 in both forms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{CrossSection, EndMap};
use crate::scaling::{deformed_metric, ScalingParameter, ScalingProfile};
use crate::sparse::{dot_u, norm2, BandLu, CsrMatrix, TripletBuilder};
use crate::{Error, Result, C64};

/// Uniform rectangular grid on `(0, X_max) × (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub x_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn new(x_max: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(x_max > 0.0 && x_max.is_finite()) {
            return Err(Error::Argument(format!("grid length must be positive, got {x_max}")));
        }
        if nx < 2 || ny < 2 {
            return Err(Error::Argument(format!("grid needs at least 2×2 cells, got {nx}×{ny}")));
        }
        Ok(Self { x_max, nx, ny })
    }

    /// Checks that the scaled region lies inside the truncated domain.
    pub fn check_profile(&self, profile: &ScalingProfile) -> Result<()> {
        if self.x_max <= profile.r_tilde() + 2.0 {
            return Err(Error::Argument(format!(
                "truncation X_max = {} must exceed R̃ + 2 = {}",
                self.x_max,
                profile.r_tilde() + 2.0
            )));
        }
        Ok(())
    }

    pub fn hx(&self) -> f64 {
        self.x_max / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        1.0 / self.ny as f64
    }

    /// Number of interior nodes `(nx − 1)(ny − 1)`.
    pub fn dofs(&self) -> usize {
        (self.nx - 1) * (self.ny - 1)
    }

    /// Grid with both cell counts doubled.
    pub fn refined(&self) -> Self {
        Self {
            x_max: self.x_max,
            nx: 2 * self.nx,
            ny: 2 * self.ny,
        }
    }

    /// Degree of freedom of interior node `(i, j)`, `1 ≤ i < nx`, `1 ≤ j < ny`.
    pub fn dof(&self, i: usize, j: usize) -> Option<usize> {
        if i == 0 || j == 0 || i >= self.nx || j >= self.ny {
            None
        } else {
            Some((i - 1) * (self.ny - 1) + (j - 1))
        }
    }

    /// Coordinates of degree of freedom `k`.
    pub fn node(&self, k: usize) -> (f64, f64) {
        let i = k / (self.ny - 1) + 1;
        let j = k % (self.ny - 1) + 1;
        (i as f64 * self.hx(), j as f64 * self.hy())
    }

    /// Samples `f(x, y)` at every interior node.
    pub fn sample<F: Fn(f64, f64) -> C64>(&self, f: F) -> Vec<C64> {
        (0..self.dofs())
            .map(|k| {
                let (x, y) = self.node(k);
                f(x, y)
            })
            .collect()
    }
}

/// Which bilinear forms to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorForm {
    /// Volume weight `√det g_λ` in both forms.
    Deformed,
    /// Weight 1 in both forms.
    Principal,
}

/// The assembled pencil `(K, M)` and the data it was built from.
#[derive(Debug, Clone)]
pub struct ScaledOperator {
    pub k: CsrMatrix,
    pub m: CsrMatrix,
    pub lambda: C64,
    pub end: EndMap,
    pub profile: ScalingProfile,
    pub grid: Grid,
    pub form: OperatorForm,
}

impl ScaledOperator {
    pub fn dim(&self) -> usize {
        self.grid.dofs()
    }

    /// Contour end point `X_max + λ v(X_max)`.
    pub fn contour_end(&self) -> C64 {
        self.grid.x_max + self.lambda * self.profile.value(self.grid.x_max)
    }
}

type LocalBlock = ([[C64; 4]; 4], [[C64; 4]; 4]);

fn local_matrices(
    grid: &Grid,
    end: &EndMap,
    profile: &ScalingProfile,
    param: &ScalingParameter,
    form: OperatorForm,
    ci: usize,
    cj: usize,
) -> Result<LocalBlock> {
    let hx = grid.hx();
    let hy = grid.hy();
    let g = 1.0 / 3f64.sqrt();
    let gauss = [-g, g];
    // local node order: (0,0), (1,0), (1,1), (0,1) in (ξ, η) corners
    let sx = [-1.0, 1.0, 1.0, -1.0];
    let sy = [-1.0, -1.0, 1.0, 1.0];
    let jac = 0.25 * hx * hy;
    let zero = C64::new(0.0, 0.0);
    let mut kl = [[zero; 4]; 4];
    let mut ml = [[zero; 4]; 4];
    for &xi in &gauss {
        for &eta in &gauss {
            let x = (ci as f64 + 0.5 * (1.0 + xi)) * hx;
            let y = (cj as f64 + 0.5 * (1.0 + eta)) * hy;
            let met = deformed_metric(end, profile, param, x, y)?;
            let w = match form {
                OperatorForm::Deformed => met.weight,
                OperatorForm::Principal => C64::new(1.0, 0.0),
            } * jac;
            let mut phi = [0.0; 4];
            let mut dphi = [[0.0; 2]; 4];
            for a in 0..4 {
                phi[a] = 0.25 * (1.0 + sx[a] * xi) * (1.0 + sy[a] * eta);
                dphi[a][0] = 0.25 * sx[a] * (1.0 + sy[a] * eta) * 2.0 / hx;
                dphi[a][1] = 0.25 * sy[a] * (1.0 + sx[a] * xi) * 2.0 / hy;
            }
            let gi = met.g_inv;
            for a in 0..4 {
                for b in a..4 {
                    let quad = gi[0][0] * (dphi[b][0] * dphi[a][0])
                        + gi[0][1] * (dphi[b][1] * dphi[a][0] + dphi[b][0] * dphi[a][1])
                        + gi[1][1] * (dphi[b][1] * dphi[a][1]);
                    kl[a][b] += quad * w;
                    ml[a][b] += w * (phi[a] * phi[b]);
                }
            }
        }
    }
    for a in 0..4 {
        for b in 0..a {
            kl[a][b] = kl[b][a];
            ml[a][b] = ml[b][a];
        }
    }
    Ok((kl, ml))
}

/// Assembles the pencil for the requested form.
pub fn assemble(
    grid: &Grid,
    end: &EndMap,
    profile: &ScalingProfile,
    lambda: C64,
    form: OperatorForm,
) -> Result<ScaledOperator> {
    let param = ScalingParameter::for_end(lambda, end)?;
    grid.check_profile(profile)?;
    let cells: Vec<(usize, usize)> = (0..grid.nx)
        .flat_map(|ci| (0..grid.ny).map(move |cj| (ci, cj)))
        .collect();
    let blocks: Vec<LocalBlock> = cells
        .par_iter()
        .map(|&(ci, cj)| local_matrices(grid, end, profile, &param, form, ci, cj))
        .collect::<Result<_>>()?;
    let n = grid.dofs();
    let mut kt = TripletBuilder::with_capacity(n, n, 16 * cells.len());
    let mut mt = TripletBuilder::with_capacity(n, n, 16 * cells.len());
    let corner = [(0usize, 0usize), (1, 0), (1, 1), (0, 1)];
    for (&(ci, cj), (kl, ml)) in cells.iter().zip(&blocks) {
        let dofs: Vec<Option<usize>> = corner.iter().map(|&(di, dj)| grid.dof(ci + di, cj + dj)).collect();
        for a in 0..4 {
            let Some(p) = dofs[a] else { continue };
            for b in 0..4 {
                let Some(q) = dofs[b] else { continue };
                kt.push(p, q, kl[a][b]);
                mt.push(p, q, ml[a][b]);
            }
        }
    }
    Ok(ScaledOperator {
        k: kt.build(),
        m: mt.build(),
        lambda,
        end: *end,
        profile: profile.clone(),
        grid: *grid,
        form,
    })
}

/// Pencil of the deformed operator (weight `√det g_λ`).
pub fn assemble_deformed(grid: &Grid, end: &EndMap, profile: &ScalingProfile, lambda: C64) -> Result<ScaledOperator> {
    assemble(grid, end, profile, lambda, OperatorForm::Deformed)
}

/// Pencil of the principal part (weight 1).
pub fn assemble_principal(grid: &Grid, end: &EndMap, profile: &ScalingProfile, lambda: C64) -> Result<ScaledOperator> {
    assemble(grid, end, profile, lambda, OperatorForm::Principal)
}

/// Discrete `(F, G)_λ = ∫ F·conj(G) √det g_λ` = `conj(G)ᵀ M F`.
pub fn pairing_lambda(op: &ScaledOperator, f: &[C64], g: &[C64]) -> Result<C64> {
    let n = op.dim();
    for v in [f, g] {
        if v.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: v.len(),
            });
        }
    }
    let mf = op.m.mul_vec(f);
    Ok(g.iter().zip(&mf).map(|(g, mf)| g.conj() * mf).sum())
}

/// Factorisation of `K − μM` for repeated resolvent applications.
#[derive(Debug, Clone)]
pub struct ShiftedSolver {
    pub mu: C64,
    shifted: CsrMatrix,
    lu: BandLu,
    rcond_estimate: f64,
}

const PIVOT_RATIO_FLOOR: f64 = 1e-14;
const RCOND_FLOOR: f64 = 1e-12;

impl ShiftedSolver {
    /// Factors `K − μM`; refuses shifts at (or numerically at) the spectrum.
    pub fn new(k: &CsrMatrix, m: &CsrMatrix, mu: C64) -> Result<Self> {
        let shifted = k.linear_combination(C64::new(1.0, 0.0), m, -mu);
        let lu = BandLu::factor(&shifted).map_err(|e| Error::AtSpectrum {
            mu,
            detail: e.to_string(),
        })?;
        let ratio = lu.pivot_ratio();
        if ratio < PIVOT_RATIO_FLOOR {
            return Err(Error::AtSpectrum {
                mu,
                detail: format!("pivot ratio {ratio:e} below {PIVOT_RATIO_FLOOR:e}"),
            });
        }
        // two steps of inverse iteration estimate ‖A⁻¹‖
        let n = shifted.nrows();
        let mut v: Vec<C64> = (0..n).map(|i| C64::from_polar(1.0, 0.7 * i as f64)).collect();
        let mut growth = 0.0;
        for _ in 0..2 {
            let nv = norm2(&v);
            v.iter_mut().for_each(|x| *x /= nv);
            lu.solve_in_place(&mut v);
            growth = norm2(&v);
            if !growth.is_finite() {
                break;
            }
        }
        let rcond_estimate = 1.0 / (growth * shifted.norm_inf());
        if !(rcond_estimate >= RCOND_FLOOR) {
            return Err(Error::AtSpectrum {
                mu,
                detail: format!("reciprocal condition estimate {rcond_estimate:e} below {RCOND_FLOOR:e}"),
            });
        }
        Ok(Self {
            mu,
            shifted,
            lu,
            rcond_estimate,
        })
    }

    pub fn for_operator(op: &ScaledOperator, mu: C64) -> Result<Self> {
        Self::new(&op.k, &op.m, mu)
    }

    pub fn rcond_estimate(&self) -> f64 {
        self.rcond_estimate
    }

    /// Solves `(K − μM) x = rhs` with up to two steps of iterative refinement.
    /// Returns the solution and its relative residual.
    pub fn solve_rhs(&self, rhs: &[C64]) -> (Vec<C64>, f64) {
        let mut x = self.lu.solve(rhs);
        let rhs_norm = norm2(rhs).max(f64::MIN_POSITIVE);
        let mut res = f64::INFINITY;
        for step in 0..3 {
            let ax = self.shifted.mul_vec(&x);
            let r: Vec<C64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
            res = norm2(&r) / rhs_norm;
            if res <= 1e-12 || step == 2 {
                break;
            }
            let d = self.lu.solve(&r);
            x.iter_mut().zip(&d).for_each(|(x, d)| *x += d);
        }
        (x, res)
    }

    /// `(K − μM)⁻¹ M b`.
    pub fn apply(&self, m: &CsrMatrix, b: &[C64]) -> Result<(Vec<C64>, f64)> {
        if b.len() != m.ncols() {
            return Err(Error::Dimension {
                expected: m.ncols(),
                found: b.len(),
            });
        }
        Ok(self.solve_rhs(&m.mul_vec(b)))
    }
}

/// Resolvent application `u = (K − μM)⁻¹ M b` with residual check `≤ 1e-10`.
pub fn solve_shifted(op: &ScaledOperator, mu: C64, b: &[C64]) -> Result<Vec<C64>> {
    let solver = ShiftedSolver::for_operator(op, mu)?;
    let (u, res) = solver.apply(&op.m, b)?;
    if res > 1e-10 {
        return Err(Error::Numerical(format!(
            "shifted solve at μ = {mu} reached residual {res:e} > 1e-10"
        )));
    }
    Ok(u)
}

/// Transverse operator `−∂_y² + (1 + λ)^{-2} τ²` by second differences.
#[derive(Debug, Clone)]
pub struct FiberOperator {
    pub matrix: CsrMatrix,
    pub tau: f64,
    pub lambda: C64,
    pub shift: C64,
}

impl FiberOperator {
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        let mut ev = self
            .matrix
            .to_dense()
            .eigenvalues()
            .map_err(|e| Error::Numerical(format!("fiber eigenvalues: {e:?}")))?;
        ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok(ev)
    }
}

pub fn assemble_fiber(_cs: &CrossSection, ny: usize, param: &ScalingParameter, tau: f64) -> Result<FiberOperator> {
    if ny < 2 {
        return Err(Error::Argument(format!("fiber grid needs ny ≥ 2, got {ny}")));
    }
    let n = ny - 1;
    let h = 1.0 / ny as f64;
    let one_plus = 1.0 + param.lambda();
    let shift = (one_plus * one_plus).inv() * (tau * tau);
    let mut t = TripletBuilder::new(n, n);
    let d = C64::new(2.0 / (h * h), 0.0) + shift;
    let o = C64::new(-1.0 / (h * h), 0.0);
    for i in 0..n {
        t.push(i, i, d);
        if i + 1 < n {
            t.push(i, i + 1, o);
            t.push(i + 1, i, o);
        }
    }
    Ok(FiberOperator {
        matrix: t.build(),
        tau,
        lambda: param.lambda(),
        shift,
    })
}

/// Rayleigh quotient `(uᴴ K u) / (uᴴ M u)` with Hermitian pairings.
pub fn hermitian_rayleigh(k: &CsrMatrix, m: &CsrMatrix, u: &[C64]) -> C64 {
    let ku = k.mul_vec(u);
    let mu = m.mul_vec(u);
    let num: C64 = u.iter().zip(&ku).map(|(a, b)| a.conj() * b).sum();
    let den: C64 = u.iter().zip(&mu).map(|(a, b)| a.conj() * b).sum();
    num / den
}

/// Bilinear quotient `(uᵀ K u) / (uᵀ M u)`.
pub fn bilinear_rayleigh(k: &CsrMatrix, m: &CsrMatrix, u: &[C64]) -> C64 {
    dot_u(u, &k.mul_vec(u)) / dot_u(u, &m.mul_vec(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn profile() -> ScalingProfile {
        ScalingProfile::new(4.0, 6.0).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(0.0, 4, 4).is_err());
        assert!(Grid::new(3.0, 1, 4).is_err());
        let g = Grid::new(7.0, 10, 4).unwrap();
        assert!(g.check_profile(&profile()).is_err());
        let g = Grid::new(12.0, 24, 6).unwrap();
        assert_eq!(g.dofs(), 23 * 5);
        assert_eq!(g.dof(1, 1), Some(0));
        assert_eq!(g.dof(0, 1), None);
        assert_eq!(g.node(g.dof(3, 2).unwrap()), (3.0 * 0.5, 2.0 / 6.0));
    }

    #[test]
    fn stiffness_is_complex_symmetric_and_reflects() {
        let grid = Grid::new(9.0, 18, 6).unwrap();
        for end in [EndMap::straight(), EndMap::log_shear()] {
            let lam = c(0.1, 0.3);
            let op = assemble_deformed(&grid, &end, &profile(), lam).unwrap();
            assert_eq!(op.k.asymmetry(), 0.0);
            assert_eq!(op.m.asymmetry(), 0.0);
            let opc = assemble_deformed(&grid, &end, &profile(), lam.conj()).unwrap();
            assert_eq!(opc.k.max_abs_diff(&op.k.conj()), 0.0);
            assert_eq!(opc.m.max_abs_diff(&op.m.conj()), 0.0);
        }
    }

    #[test]
    fn unscaled_pencil_is_real_and_mass_positive() {
        let grid = Grid::new(9.0, 18, 6).unwrap();
        let op = assemble_deformed(&grid, &EndMap::log_shear(), &profile(), c(0.0, 0.0)).unwrap();
        assert!(op.k.values().iter().all(|v| v.im == 0.0));
        assert!(op.m.values().iter().all(|v| v.im == 0.0));
        let u: Vec<C64> = (0..op.dim()).map(|i| c((i as f64 * 0.37).sin(), 0.0)).collect();
        assert!(dot_u(&u, &op.m.mul_vec(&u)).re > 0.0);
        assert!(dot_u(&u, &op.k.mul_vec(&u)).re >= 0.0);
    }

    #[test]
    fn principal_equals_deformed_for_straight_end_at_zero() {
        let grid = Grid::new(9.0, 18, 6).unwrap();
        let a = assemble_deformed(&grid, &EndMap::straight(), &profile(), c(0.0, 0.0)).unwrap();
        let b = assemble_principal(&grid, &EndMap::straight(), &profile(), c(0.0, 0.0)).unwrap();
        assert_eq!(a.k.max_abs_diff(&b.k), 0.0);
        assert_eq!(a.m.max_abs_diff(&b.m), 0.0);
    }

    #[test]
    fn straight_unscaled_stiffness_is_standard_q1_stencil() {
        // Q1 Laplacian on a square cell: diagonal 8/3, neighbours -1/3 for hx = hy
        let grid = Grid::new(9.0, 9, 9).unwrap();
        let p = ScalingProfile::new(4.0, 6.0).unwrap();
        let op = assemble_principal(&grid, &EndMap::straight(), &p, c(0.0, 0.0)).unwrap();
        // hx = 1, hy = 1/9: not square; check against the tensor-product formula instead
        let (hx, hy) = (grid.hx(), grid.hy());
        let k_diag = 2.0 * (2.0 / 3.0) * (hy / hx + hx / hy);
        let centre = grid.dof(4, 4).unwrap();
        assert!((op.k.get(centre, centre).re - k_diag).abs() < 1e-12);
        let east = grid.dof(5, 4).unwrap();
        let expect_e = -(2.0 / 3.0) * hy / hx + (1.0 / 3.0) * hx / hy;
        assert!((op.k.get(centre, east).re - expect_e).abs() < 1e-12);
        let ne = grid.dof(5, 5).unwrap();
        let expect_ne = -(1.0 / 6.0) * hy / hx - (1.0 / 6.0) * hx / hy;
        assert!((op.k.get(centre, ne).re - expect_ne).abs() < 1e-12);
        let m_diag = 4.0 / 9.0 * hx * hy;
        assert!((op.m.get(centre, centre).re - m_diag).abs() < 1e-14);
    }

    #[test]
    fn scaled_straight_element_uses_rotated_coefficients() {
        // in x ≥ R̃ the integrand is diag{(1+λ)^{-2}, 1}·(1+λ): stiffness of a cell equals
        // (1+λ)^{-1}·Kxx + (1+λ)·Kyy and mass (1+λ)·M0
        let lam = c(0.0, 0.25);
        let grid = Grid::new(12.0, 24, 6).unwrap();
        let p = profile();
        let op = assemble_deformed(&grid, &EndMap::straight(), &p, lam).unwrap();
        let op0 = assemble_deformed(&grid, &EndMap::straight(), &p, c(0.0, 0.0)).unwrap();
        let (hx, hy) = (grid.hx(), grid.hy());
        let s = 1.0 + lam;
        let i = 20; // x = 10, deep inside the scaled region
        let centre = grid.dof(i, 3).unwrap();
        let east = grid.dof(i + 1, 3).unwrap();
        let north = grid.dof(i, 4).unwrap();
        let kxx_c = 2.0 * (2.0 / 3.0) * hy / hx;
        let kyy_c = 2.0 * (2.0 / 3.0) * hx / hy;
        assert!((op.k.get(centre, centre) - (kxx_c / s + kyy_c * s)).norm() < 1e-12);
        let kxx_e = -(2.0 / 3.0) * hy / hx;
        let kyy_e = (1.0 / 3.0) * hx / hy;
        assert!((op.k.get(centre, east) - (kxx_e / s + kyy_e * s)).norm() < 1e-12);
        let kxx_n = (1.0 / 3.0) * hy / hx;
        let kyy_n = -(2.0 / 3.0) * hx / hy;
        assert!((op.k.get(centre, north) - (kxx_n / s + kyy_n * s)).norm() < 1e-12);
        assert!((op.m.get(centre, east) - op0.m.get(centre, east) * s).norm() < 1e-14);
    }

    #[test]
    fn pairing_of_product_mode() {
        let x_max = 12.0;
        let grid = Grid::new(x_max, 96, 24).unwrap();
        let op = assemble_deformed(&grid, &EndMap::straight(), &profile(), c(0.0, 0.0)).unwrap();
        let f = grid.sample(|x, y| c((PI * x / x_max).sin() * (PI * y).sin(), 0.0));
        let p = pairing_lambda(&op, &f, &f).unwrap();
        assert!((p.re - x_max / 4.0).abs() < 5e-3 * x_max / 4.0, "{p}");
        assert!(p.im.abs() < 1e-14);
        assert!(pairing_lambda(&op, &f[1..], &f).is_err());
    }

    #[test]
    fn shifted_solve_residual_and_spectrum_detection() {
        let grid = Grid::new(9.0, 18, 6).unwrap();
        let op = assemble_deformed(&grid, &EndMap::log_shear(), &profile(), c(0.0, 0.0)).unwrap();
        let b: Vec<C64> = (0..op.dim()).map(|i| c(1.0, (i % 3) as f64)).collect();
        let u = solve_shifted(&op, c(-1.0, 0.0), &b).unwrap();
        let lhs = op.k.linear_combination(c(1.0, 0.0), &op.m, c(1.0, 0.0)).mul_vec(&u);
        let rhs = op.m.mul_vec(&b);
        let r: Vec<C64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
        assert!(norm2(&r) <= 1e-10 * norm2(&rhs));
    }

    #[test]
    fn exact_singular_shift_is_rejected() {
        let k = CsrMatrix::from_dense(&[vec![c(2.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(3.0, 0.0)]]);
        let m = CsrMatrix::identity(2);
        assert!(matches!(ShiftedSolver::new(&k, &m, c(2.0, 0.0)), Err(Error::AtSpectrum { .. })));
        assert!(ShiftedSolver::new(&k, &m, c(2.5, 0.0)).is_ok());
    }

    #[test]
    fn fiber_operator_spectrum() {
        let cs = CrossSection::new(3).unwrap();
        let alpha = PI / 6.0;
        let p0 = ScalingParameter::new(c(0.0, 0.0), alpha).unwrap();
        let f = assemble_fiber(&cs, 64, &p0, 0.0).unwrap();
        let ev = f.eigenvalues().unwrap();
        assert!((ev[0].re - PI * PI).abs() < 1e-3 * PI * PI);
        let f2 = assemble_fiber(&cs, 64, &p0, 2.0).unwrap();
        let ev2 = f2.eigenvalues().unwrap();
        for (a, b) in ev.iter().zip(&ev2) {
            assert!((b - a - 4.0).norm() < 1e-9);
        }
        let p3 = ScalingParameter::new(c(0.0, 0.3), alpha).unwrap();
        let f3 = assemble_fiber(&cs, 64, &p3, 1.0).unwrap();
        assert!((f3.shift - c(0.765_928_793_872_569_6, -0.505_007_995_959_936)).norm() < 1e-14);
    }
}
