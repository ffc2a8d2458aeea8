//! Complex log-gamma, digamma, polygamma and upper incomplete gamma in
//! binary64.
//!
//! Gamma-type functions shift the argument with the recurrence until it is
//! in the asymptotic region and then sum the Stirling series through `B_20`.

use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Accuracy knobs shared by the special functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionPolicy {
    pub target_rel_err: f64,
    pub max_recurrence_shift: u32,
    /// `|z|` beyond which Stirling tails are used directly.
    pub asymptotic_threshold: f64,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy { target_rel_err: 1e-13, max_recurrence_shift: 256, asymptotic_threshold: 12.0 }
    }
}

impl PrecisionPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_rel_err > 0.0 && self.target_rel_err <= 1e-6) {
            return Err(Error::Domain(alloc::format!(
                "target_rel_err {} outside (0, 1e-6]",
                self.target_rel_err
            )));
        }
        if self.asymptotic_threshold <= 0.0 || self.max_recurrence_shift == 0 {
            return Err(Error::Domain("precision thresholds must be positive".into()));
        }
        Ok(())
    }
}

/// `B_2, B_4, …, B_20`.
const BERNOULLI: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

fn check_pole(function: &'static str, z: Complex64) -> Result<()> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::Pole { function, re: z.re, im: z.im });
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(alloc::format!("{function}: non-finite argument")));
    }
    Ok(())
}

/// Number of unit shifts that move `z` into the Stirling region.
fn shift_count(z: Complex64, policy: &PrecisionPolicy, function: &'static str) -> Result<u32> {
    let thr = policy.asymptotic_threshold;
    let mut n = if z.re < 0.0 { (-z.re).ceil() } else { 0.0 };
    let im2 = z.im * z.im;
    let re = z.re + n;
    if re * re + im2 < thr * thr {
        n += (thr * thr - im2).max(0.0).sqrt().ceil() - re.floor();
        n = n.max(0.0);
    }
    if n > policy.max_recurrence_shift as f64 {
        return Err(Error::Domain(alloc::format!(
            "{function}: argument {z} needs {n} recurrence shifts (limit {})",
            policy.max_recurrence_shift
        )));
    }
    Ok(n as u32)
}

/// Analytic `log Γ(z)`; agrees with the principal branch on the positive
/// real axis and with `log Γ(z+1) = log Γ(z) + log z` along paths in the
/// right half-plane.
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    ln_gamma_with(z, &PrecisionPolicy::default())
}

pub fn ln_gamma_with(z: Complex64, policy: &PrecisionPolicy) -> Result<Complex64> {
    check_pole("ln_gamma", z)?;
    if z.re < 0.5 && z.re < -(policy.max_recurrence_shift as f64) + policy.asymptotic_threshold {
        // log Γ(z) = log π − log sin(πz) − log Γ(1−z)
        let s = (z * PI).sin();
        return Ok(Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma_with(1.0 - z, policy)?);
    }
    let n = shift_count(z, policy, "ln_gamma")?;
    let mut correction = Complex64::new(0.0, 0.0);
    for j in 0..n {
        correction += (z + j as f64).ln();
    }
    Ok(stirling_ln_gamma(z + n as f64) - correction)
}

fn stirling_ln_gamma(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for (k, b) in BERNOULLI.iter().enumerate() {
        let m = 2.0 * (k as f64 + 1.0);
        series += pow * (b / (m * (m - 1.0)));
        pow *= inv2;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + series
}

/// `Γ'(z)/Γ(z)`.
pub fn digamma(z: Complex64) -> Result<Complex64> {
    polygamma_with(0, z, &PrecisionPolicy::default())
}

/// `ψ^(j)(z)`, the `(j+1)`-th derivative of `log Γ`, for `0 ≤ j ≤ 8`.
pub fn polygamma(j: u32, z: Complex64) -> Result<Complex64> {
    polygamma_with(j, z, &PrecisionPolicy::default())
}

pub fn polygamma_with(j: u32, z: Complex64, policy: &PrecisionPolicy) -> Result<Complex64> {
    if j > 8 {
        return Err(Error::OutOfRange { what: "polygamma order", value: j as f64, limit: 8.0 });
    }
    check_pole("polygamma", z)?;
    let n = shift_count(z, policy, "polygamma")?;
    let jf = factorial(j);
    let sign = if j % 2 == 0 { -1.0 } else { 1.0 }; // (−1)^{j+1}
    let mut correction = Complex64::new(0.0, 0.0);
    for i in 0..n {
        correction += (z + i as f64).inv().powu(j + 1);
    }
    let w = z + n as f64;
    Ok(asymptotic_polygamma(j, w) + correction * (sign * jf))
}

fn asymptotic_polygamma(j: u32, z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    if j == 0 {
        let mut s = z.ln() - inv * 0.5;
        let mut pow = inv2;
        for (k, b) in BERNOULLI.iter().enumerate() {
            s -= pow * (b / (2.0 * (k as f64 + 1.0)));
            pow *= inv2;
        }
        return s;
    }
    let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
    let zj = inv.powu(j);
    let mut s = zj * factorial(j - 1) + zj * inv * (factorial(j) / 2.0);
    let mut pow = zj * inv2;
    for (k, b) in BERNOULLI.iter().enumerate() {
        let m = 2 * (k as u32 + 1);
        s += pow * (b * factorial(m + j - 1) / factorial(m));
        pow *= inv2;
    }
    s * sign
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

const INCGAMMA_MAX_ITER: usize = 20_000;
const TINY: f64 = 1e-300;

/// `Q(a, z) = Γ(a, z)/Γ(a)` with precomputed `log Γ(a)`, for complex `a`
/// with `Re a > 0` and `|arg z| < π/2`.
#[derive(Debug, Clone, Copy)]
pub struct RegularizedUpperGamma {
    a: Complex64,
    ln_gamma_a: Complex64,
    ln_gamma_a1: Complex64,
}

impl RegularizedUpperGamma {
    pub fn new(a: Complex64) -> Result<Self> {
        if a.re <= 0.0 {
            return Err(Error::Domain(alloc::format!("incomplete gamma needs Re a > 0, got {a}")));
        }
        let ln_gamma_a = ln_gamma(a)?;
        Ok(RegularizedUpperGamma { a, ln_gamma_a, ln_gamma_a1: ln_gamma_a + a.ln() })
    }

    pub fn ln_gamma_a(&self) -> Complex64 {
        self.ln_gamma_a
    }

    /// `Q(a, z)` given `z` and its principal logarithm.
    pub fn eval_with_ln(&self, z: Complex64, ln_z: Complex64) -> Result<Complex64> {
        let a = self.a;
        if z.norm() < a.norm() {
            // P(a,z) = z^a e^{-z}/Γ(a+1) Σ z^k/((a+1)…(a+k))
            let mut term = Complex64::new(1.0, 0.0);
            let mut sum = term;
            let mut converged = false;
            for k in 1..INCGAMMA_MAX_ITER {
                term = term * z / (a + k as f64);
                sum += term;
                if term.norm() <= 1e-17 * sum.norm() {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NoConvergence {
                    routine: "incomplete gamma series",
                    detail: alloc::format!("a = {a}, z = {z}, partial sum {sum}"),
                });
            }
            let p = (a * ln_z - z - self.ln_gamma_a1).exp() * sum;
            Ok(1.0 - p)
        } else {
            let h = continued_fraction(a, z)?;
            Ok((a * ln_z - z - self.ln_gamma_a).exp() * h)
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.eval_with_ln(z, z.ln())
    }
}

/// Modified Lentz evaluation of the Legendre continued fraction
/// `Γ(a,z) = e^{−z} z^a · h`.
fn continued_fraction(a: Complex64, z: Complex64) -> Result<Complex64> {
    let tiny = Complex64::new(TINY, 0.0);
    let mut b = z + 1.0 - a;
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = if b.norm() < TINY { tiny.inv() } else { b.inv() };
    let mut h = d;
    let mut last = f64::INFINITY;
    for i in 1..INCGAMMA_MAX_ITER {
        let fi = i as f64;
        let an = -(a - fi) * (-fi); // −i(i − a)
        b += 2.0;
        d = an * d + b;
        if d.norm() < TINY {
            d = tiny;
        }
        c = b + an / c;
        if c.norm() < TINY {
            c = tiny;
        }
        d = d.inv();
        let del = d * c;
        h *= del;
        last = (del - 1.0).norm();
        if last < 1e-16 {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence {
        routine: "incomplete gamma continued fraction",
        detail: alloc::format!("a = {a}, z = {z}, last |δ−1| = {last:e} after {INCGAMMA_MAX_ITER} steps"),
    })
}

/// Upper incomplete gamma `Γ(a, x) = ∫_x^∞ e^{−u} u^{a−1} du` for real
/// `x ≥ 1`.
pub fn upper_incomplete_gamma(a: Complex64, x: f64) -> Result<Complex64> {
    if !(x >= 1.0) || !x.is_finite() {
        return Err(Error::Domain(alloc::format!("upper_incomplete_gamma needs x ≥ 1, got {x}")));
    }
    let z = Complex64::new(x, 0.0);
    if z.norm() >= a.norm() || a.re <= 0.0 {
        let h = continued_fraction(a, z)?;
        return Ok((a * x.ln() - x).exp() * h);
    }
    let q = RegularizedUpperGamma::new(a)?;
    Ok(q.eval(z)? * q.ln_gamma_a.exp())
}
