//! Gauss–Legendre rules and adaptive Gauss–Kronrod integration.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = -(PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre settings for oscillatory integrals over `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Upper bound on the panel width.
    pub max_panel_width: f64,
    pub nodes_per_panel: usize,
    /// Node count of the companion rule used to check each panel.
    pub check_nodes: usize,
    /// Allowed |fine − companion| summed over panels, relative to the total.
    pub refinement_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { max_panel_width: 0.25, nodes_per_panel: 8, check_nodes: 4, refinement_tol: 0.01 }
    }
}

impl QuadratureSpec {
    /// Panel width `min(max_panel_width, π/log(T/2π))` for height `t_max`.
    pub fn panel_width(&self, t_max: f64) -> f64 {
        let l = (t_max / (2.0 * PI)).ln();
        if l <= 0.0 {
            self.max_panel_width
        } else {
            self.max_panel_width.min(PI / l)
        }
    }
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
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs = fc.norm() * WGK[7];
    for i in 0..7 {
        let x = h * XGK[i];
        let f1 = f(c - x);
        let f2 = f(c + x);
        kron += (f1 + f2) * WGK[i];
        abs += (f1.norm() + f2.norm()) * WGK[i];
        if i % 2 == 1 {
            gauss += (f1 + f2) * WG[i / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm(), abs * h.abs())
}

/// Result of [`adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    /// Integral of `|f|`, for relative error statements.
    pub magnitude: f64,
}

/// Globally adaptive Gauss–Kronrod (7–15) integration of a complex
/// integrand on `[a, b]`.
pub fn adaptive<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Integral> {
    const MAX_INTERVALS: usize = 2000;
    let mut intervals: Vec<(f64, f64, Complex64, f64, f64)> = Vec::new();
    let (v, e, m) = gk15(&f, a, b);
    intervals.push((a, b, v, e, m));
    loop {
        let mut total = Complex64::new(0.0, 0.0);
        let mut err = 0.0;
        let mut mag = 0.0;
        let mut worst = 0;
        for (i, iv) in intervals.iter().enumerate() {
            total += iv.2;
            err += iv.3;
            mag += iv.4;
            if iv.3 > intervals[worst].3 {
                worst = i;
            }
        }
        let tol = abs_tol.max(rel_tol * total.norm());
        if err <= tol || err <= 50.0 * f64::EPSILON * mag {
            return Ok(Integral { value: total, error: err, magnitude: mag });
        }
        if intervals.len() >= MAX_INTERVALS {
            return Err(Error::NoConvergence {
                routine: "adaptive Gauss-Kronrod",
                detail: alloc::format!("estimated error {err:e} above tolerance {tol:e} on [{a}, {b}]"),
            });
        }
        let (lo, hi, ..) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1, m1) = gk15(&f, lo, mid);
        let (v2, e2, m2) = gk15(&f, mid, hi);
        intervals.push((lo, mid, v1, e1, m1));
        intervals.push((mid, hi, v2, e2, m2));
    }
}
