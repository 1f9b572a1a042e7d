//! Gauss–Legendre rules and an adaptive Gauss–Kronrod integrator for
//! complex-valued integrands.

use crate::{Error, Result, C64};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Nodes are returned in increasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let f1 = f(c - h * x);
        let f2 = f(c + h * x);
        kronrod += (f1 + f2) * w;
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let value = kronrod * h;
    let err = ((kronrod - gauss) * h).norm();
    (value, err)
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: C64,
    pub error: f64,
    pub intervals: usize,
}

/// Adaptive Gauss–Kronrod (7/15) integration of a complex integrand on `[a, b]`.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate is below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate_adaptive<F: Fn(f64) -> C64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Argument("integration bounds must be finite".into()));
    }
    if a == b {
        return Ok(Integral {
            value: C64::new(0.0, 0.0),
            error: 0.0,
            intervals: 0,
        });
    }
    // Seed with a handful of panels so narrow features are not missed.
    let seed = 8;
    let mut pieces: Vec<(f64, f64, C64, f64)> = (0..seed)
        .map(|i| {
            let lo = a + (b - a) * i as f64 / seed as f64;
            let hi = a + (b - a) * (i + 1) as f64 / seed as f64;
            let (v, e) = gk15(&f, lo, hi);
            (lo, hi, v, e)
        })
        .collect();
    loop {
        let total: C64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.norm()) {
            return Ok(Integral {
                value: total,
                error: err,
                intervals: pieces.len(),
            });
        }
        if pieces.len() >= max_intervals {
            return Err(Error::Numerical(format!(
                "adaptive quadrature did not converge: achieved error {err:e} on |I| = {:e}",
                total.norm()
            )));
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, _, _) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 16, 32] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg} q={q}");
            }
        }
    }

    #[test]
    fn two_point_rule_nodes() {
        let (x, w) = gauss_legendre(2);
        assert!((x[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_gaussian() {
        let r = integrate_adaptive(|x| C64::new((-x * x).exp(), 0.0), -10.0, 10.0, 1e-12, 0.0, 500)
            .unwrap();
        assert!((r.value.re - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn adaptive_oscillatory_complex() {
        // ∫_0^π e^{ix} dx = 2i
        let r = integrate_adaptive(|x| C64::new(0.0, x).exp(), 0.0, std::f64::consts::PI, 1e-12, 0.0, 200)
            .unwrap();
        assert!((r.value - C64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let r = integrate_adaptive(|x| C64::new(1.0 / x.abs().sqrt().max(1e-300), 0.0), -1.0, 1.0, 1e-14, 0.0, 10);
        assert!(matches!(r, Err(Error::Numerical(_))));
    }
}
