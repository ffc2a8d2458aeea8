//! Smooth cutoffs of class R: real C∞ functions on `[0, ∞)` equal to 1 on
//! `[0, 1/2]` and 0 on `[2, ∞)`, their reflections `φ₀(ρ) = 1 − φ(1/ρ)`, the
//! compressed family `ψ_α`, L¹ norms of derivatives and the moment function
//! `K_φ(w)`.
//!
//! The standard bump is `φ(ρ) = g(2−ρ)/(g(2−ρ) + g(ρ−1/2))` with
//! `g(x) = e^{−1/x}`. Its derivatives are exact: `g^(j)(x) = P_j(1/x) e^{−1/x}`
//! with `P_{j+1}(u) = u²(P_j(u) − P_j'(u))`, and the quotient is differentiated
//! by the Leibniz rule.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{jet, quad, Error, Result};

/// Default highest derivative order.
pub const DEFAULT_MAX_ORDER: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmoothingKind {
    StandardBump,
    /// `ψ_α(ρ) = φ(1 + (ρ−1)|t|^α)` with the standard bump `φ`.
    PsiAlpha { alpha: f64, t_abs: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingFunction {
    kind: SmoothingKind,
    reflected: bool,
    max_order: usize,
    /// `P_0, …, P_max_order` as ascending coefficient lists.
    polys: Vec<Vec<f64>>,
}

fn bump_polynomials(max_order: usize) -> Vec<Vec<f64>> {
    let mut polys = vec![vec![1.0]];
    for j in 0..max_order {
        let p = &polys[j];
        let mut q = vec![0.0; p.len() + 2];
        for i in 0..p.len() {
            let deriv_next = if i + 1 < p.len() { (i + 1) as f64 * p[i + 1] } else { 0.0 };
            q[i + 2] = p[i] - deriv_next;
        }
        polys.push(q);
    }
    polys
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut b = 1.0;
    for i in 0..k {
        b = b * (n - i) as f64 / (i + 1) as f64;
    }
    b
}

/// The standard bump.
pub fn make_phi() -> SmoothingFunction {
    SmoothingFunction::standard(DEFAULT_MAX_ORDER)
}

impl SmoothingFunction {
    pub fn standard(max_order: usize) -> Self {
        SmoothingFunction {
            kind: SmoothingKind::StandardBump,
            reflected: false,
            max_order,
            polys: bump_polynomials(max_order),
        }
    }

    /// Same function supporting derivatives up to `max_order`.
    pub fn with_max_order(&self, max_order: usize) -> Self {
        SmoothingFunction { max_order, polys: bump_polynomials(max_order), ..self.clone() }
    }

    /// `ψ_α` built from this (standard, unreflected) bump.
    pub fn make_psi_alpha(&self, alpha: f64, t_abs: f64) -> Result<Self> {
        if self.kind != SmoothingKind::StandardBump || self.reflected {
            return Err(Error::Domain("ψ_α is built from the unreflected standard bump".into()));
        }
        if !(0.0..=0.5).contains(&alpha) {
            return Err(Error::OutOfRange { what: "alpha", value: alpha, limit: 0.5 });
        }
        if !(t_abs >= 10.0) {
            return Err(Error::Domain(alloc::format!("ψ_α needs |t| ≥ 10, got {t_abs}")));
        }
        Ok(SmoothingFunction { kind: SmoothingKind::PsiAlpha { alpha, t_abs }, ..self.clone() })
    }

    /// The reflection `ρ ↦ 1 − self(1/ρ)`.
    pub fn reflect(&self) -> Self {
        SmoothingFunction { reflected: !self.reflected, ..self.clone() }
    }

    pub fn kind(&self) -> SmoothingKind {
        self.kind
    }

    pub fn is_reflected(&self) -> bool {
        self.reflected
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    fn unreflected_transition(&self) -> (f64, f64) {
        match self.kind {
            SmoothingKind::StandardBump => (0.5, 2.0),
            SmoothingKind::PsiAlpha { alpha, t_abs } => {
                let s = t_abs.powf(alpha);
                (1.0 - 0.5 / s, 1.0 + 1.0 / s)
            }
        }
    }

    /// Interval outside which every derivative of order ≥ 1 vanishes.
    pub fn transition(&self) -> (f64, f64) {
        let (a, b) = self.unreflected_transition();
        if self.reflected {
            (1.0 / b, 1.0 / a)
        } else {
            (a, b)
        }
    }

    /// `g^(j)(y)` for `y > 0`.
    fn g_deriv(&self, j: usize, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let u = 1.0 / y;
        let lu = u.ln();
        self.polys[j]
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(p, c)| c * (p as f64 * lu - u).exp())
            .sum()
    }

    /// Derivatives of the standard bump at `x`, orders `0..=n`.
    fn bump_derivs(&self, x: f64, n: usize) -> Vec<f64> {
        let mut d = vec![0.0; n + 1];
        if x <= 0.5 {
            d[0] = 1.0;
            return d;
        }
        if x >= 2.0 {
            return d;
        }
        let a: Vec<f64> = (0..=n)
            .map(|i| {
                let v = self.g_deriv(i, 2.0 - x);
                if i % 2 == 0 {
                    v
                } else {
                    -v
                }
            })
            .collect();
        let den: Vec<f64> = (0..=n).map(|i| a[i] + self.g_deriv(i, x - 0.5)).collect();
        for k in 0..=n {
            let mut acc = a[k];
            for i in 0..k {
                acc -= binomial(k, i) * d[i] * den[k - i];
            }
            d[k] = acc / den[0];
        }
        d
    }

    fn unreflected_derivs(&self, x: f64, n: usize) -> Vec<f64> {
        match self.kind {
            SmoothingKind::StandardBump => self.bump_derivs(x, n),
            SmoothingKind::PsiAlpha { alpha, t_abs } => {
                let s = t_abs.powf(alpha);
                let mut d = self.bump_derivs(1.0 + (x - 1.0) * s, n);
                let mut scale = 1.0;
                for v in d.iter_mut() {
                    *v *= scale;
                    scale *= s;
                }
                d
            }
        }
    }

    /// `[f(ρ), f'(ρ), …, f^(n)(ρ)]` for `ρ ≥ 0`.
    pub fn derivs(&self, rho: f64, n: usize) -> Result<Vec<f64>> {
        if n > self.max_order {
            return Err(Error::OutOfRange { what: "derivative order", value: n as f64, limit: self.max_order as f64 });
        }
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(Error::Domain(alloc::format!("cutoff argument must be finite and ≥ 0, got {rho}")));
        }
        if !self.reflected {
            return Ok(self.unreflected_derivs(rho, n));
        }
        let (a, b) = self.transition();
        let mut out = vec![0.0; n + 1];
        if rho <= a {
            out[0] = 1.0;
            return Ok(out);
        }
        if rho >= b {
            return Ok(out);
        }
        let inner = jet::reciprocal(rho, n + 1);
        let outer = jet::from_derivatives(&self.unreflected_derivs(inner[0], n));
        let composed = jet::to_derivatives(&jet::compose(&outer, &inner));
        for (o, c) in out.iter_mut().zip(&composed) {
            *o = -c;
        }
        out[0] += 1.0;
        Ok(out)
    }

    /// `f^(j)(ρ)`.
    pub fn deriv(&self, j: usize, rho: f64) -> Result<f64> {
        Ok(self.derivs(rho, j)?[j])
    }

    pub fn value(&self, rho: f64) -> f64 {
        self.derivs(rho, 0).map(|d| d[0]).unwrap_or(f64::NAN)
    }

    /// `‖f^(j)‖₁ = ∫₀^∞ |f^(j)(ρ)| dρ`.
    pub fn phi_norm(&self, j: usize) -> Result<f64> {
        self.phi_norm_with_tol(j, 1e-13)
    }

    pub fn phi_norm_with_tol(&self, j: usize, rel_tol: f64) -> Result<f64> {
        if j > self.max_order {
            return Err(Error::OutOfRange { what: "derivative order", value: j as f64, limit: self.max_order as f64 });
        }
        let (a, b) = self.transition();
        let r = quad::adaptive(
            |x| Complex64::new(self.derivs(x, j).map(|d| d[j].abs()).unwrap_or(f64::NAN), 0.0),
            a,
            b,
            0.0,
            rel_tol,
        )?;
        let plateau = if j == 0 { a } else { 0.0 };
        Ok(plateau + r.value.re)
    }

    /// `K_f(w)` through the representation
    /// `K(w) = (−1)^{l+1}/((w+1)⋯(w+l)) ∫ f^{(l+1)}(ρ) ρ^{w+l} dρ`, with
    /// `K(0) = 1`.
    pub fn k_phi(&self, w: Complex64, l: usize) -> Result<Complex64> {
        if w == Complex64::new(0.0, 0.0) {
            return Ok(Complex64::new(1.0, 0.0));
        }
        self.k_phi_representation(w, l)
    }

    /// The `l`-representation without the `w = 0` convention.
    pub fn k_phi_representation(&self, w: Complex64, l: usize) -> Result<Complex64> {
        if l + 1 > self.max_order {
            return Err(Error::OutOfRange { what: "K_phi depth l", value: l as f64, limit: (self.max_order - 1) as f64 });
        }
        let mut den = Complex64::new(1.0, 0.0);
        for i in 1..=l {
            let f = w + i as f64;
            if f.norm() == 0.0 {
                return Err(Error::Pole { function: "k_phi", re: w.re, im: w.im });
            }
            den *= f;
        }
        let (a, b) = self.transition();
        let e = w + l as f64;
        let r = quad::adaptive(
            |x| {
                let d = self.derivs(x, l + 1).map(|d| d[l + 1]).unwrap_or(f64::NAN);
                (e * x.ln()).exp() * d
            },
            a,
            b,
            1e-300,
            1e-12,
        )?;
        let sign = if l % 2 == 0 { -1.0 } else { 1.0 };
        Ok(r.value * sign / den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn plateau_support_and_reflection() {
        let phi = make_phi();
        assert_eq!(phi.value(0.25), 1.0);
        assert_eq!(phi.value(0.5), 1.0);
        assert_eq!(phi.value(3.0), 0.0);
        assert_eq!(phi.value(2.0), 0.0);
        let phi0 = phi.reflect();
        assert!((phi0.value(0.8) - (1.0 - phi.value(1.25))).abs() < 1e-15);
        assert_eq!(phi0.value(0.3), 1.0);
        assert_eq!(phi0.value(2.5), 0.0);
        assert_eq!(phi0.reflect(), phi);
        // symmetric bump: φ(1.25) is the midpoint of the transition
        assert!((phi.value(1.25) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn derivative_examples() {
        let phi = make_phi();
        assert_eq!(phi.deriv(1, 0.3).unwrap(), 0.0);
        let d1 = phi.deriv(1, 1.0).unwrap();
        let h = 1e-5;
        let fd = (phi.value(1.0 + h) - phi.value(1.0 - h)) / (2.0 * h);
        assert!(d1 < 0.0 && (d1 - fd).abs() < 1e-7, "{d1} {fd}");
        assert!(phi.deriv(3, 1.9999).unwrap().abs() < 1e-3);
        assert!(phi.deriv(13, 1.0).is_err());
    }

    fn check_derivs_by_differences(f: &SmoothingFunction, points: &[f64], orders: usize) {
        let h = 1e-6;
        for &x in points {
            let lo = f.derivs(x - h, orders).unwrap();
            let hi = f.derivs(x + h, orders).unwrap();
            let mid = f.derivs(x, orders).unwrap();
            for j in 0..orders {
                let fd = (hi[j] - lo[j]) / (2.0 * h);
                let scale = mid[j + 1].abs().max(1.0);
                assert!((fd - mid[j + 1]).abs() < 1e-5 * scale, "x={x} j={j}: {fd} vs {}", mid[j + 1]);
            }
        }
    }

    #[test]
    fn derivatives_are_consistent_with_differences() {
        let phi = make_phi();
        check_derivs_by_differences(&phi, &[0.7, 1.0, 1.3, 1.8], 8);
        check_derivs_by_differences(&phi.reflect(), &[0.6, 0.9, 1.4, 1.9], 6);
        let psi = phi.make_psi_alpha(0.4, 100.0).unwrap();
        check_derivs_by_differences(&psi, &[0.9, 1.0, 1.1], 4);
        check_derivs_by_differences(&psi.reflect(), &[0.95, 1.02], 4);
    }

    #[test]
    fn flat_at_the_joins() {
        let phi = make_phi();
        for x in [0.5 + 1e-9, 2.0 - 1e-9, 0.5 + 1e-3, 2.0 - 1e-3] {
            let d = phi.derivs(x, 12).unwrap();
            for (j, v) in d.iter().enumerate().skip(1) {
                assert!(v.abs() < 1e-8, "x={x} j={j}: {v}");
            }
        }
        assert!((phi.value(2.0 - 1e-9)).abs() < 1e-8);
        assert!((phi.value(0.5 + 1e-9) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn norms() {
        let phi = make_phi();
        assert!((phi.phi_norm(1).unwrap() - 1.0).abs() < 1e-12);
        assert!((phi.reflect().phi_norm(1).unwrap() - 1.0).abs() < 1e-12);
        let n0 = phi.phi_norm(0).unwrap();
        assert!(n0 > 0.5 && n0 < 2.0);
        // symmetric transition: ∫φ = 1/2 + 3/4
        assert!((n0 - 1.25).abs() < 1e-12);
        let coarse = phi.phi_norm_with_tol(2, 1e-8).unwrap();
        let fine = phi.phi_norm_with_tol(2, 1e-13).unwrap();
        assert!((coarse - fine).abs() < 1e-8);
    }

    #[test]
    fn k_phi_identities() {
        let phi = make_phi();
        assert_eq!(phi.k_phi(c(0.0, 0.0), 3).unwrap(), c(1.0, 0.0));
        let limit = phi.k_phi_representation(c(0.0, 0.0), 2).unwrap();
        assert!((limit - 1.0).norm() < 1e-8);
        let w = c(1.0, 1.0);
        let k1 = phi.k_phi(w, 1).unwrap();
        let k3 = phi.k_phi(w, 3).unwrap();
        assert!((k1 - k3).norm() < 1e-9, "{k1} {k3}");
        let k0 = phi.reflect().k_phi(-w, 3).unwrap();
        assert!((k1 - k0).norm() < 1e-8);
        assert!(phi.k_phi(c(-2.0, 0.0), 3).is_err());
        // K(1) = ∫φ
        let k = phi.k_phi(c(1.0, 0.0), 2).unwrap();
        assert!((k.re - phi.phi_norm(0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn k_phi_matches_defining_integral() {
        let phi = make_phi();
        let w = c(0.7, 2.5);
        let r = quad::adaptive(|x| (w * x.ln()).exp() / x * phi.value(x), 0.5, 2.0, 0.0, 1e-14).unwrap();
        let plateau = (w * 0.5f64.ln()).exp() / w;
        let direct = w * (plateau + r.value);
        assert!((direct - phi.k_phi(w, 4).unwrap()).norm() < 1e-11);
    }

    #[test]
    fn psi_alpha_shape_and_scaling() {
        let phi = make_phi();
        let t: f64 = 100.0;
        let alpha = 0.4;
        let psi = phi.make_psi_alpha(alpha, t).unwrap();
        assert_eq!(psi.value(1.0 - 1.0 / t.powf(alpha)), 1.0);
        assert_eq!(psi.value(1.0 + 2.0 / t.powf(alpha)), 0.0);
        let max_slope = |t: f64| {
            let psi = phi.make_psi_alpha(alpha, t).unwrap();
            let (a, b) = psi.transition();
            (0..=4000)
                .map(|i| psi.deriv(1, a + (b - a) * i as f64 / 4000.0).unwrap().abs())
                .fold(0.0, f64::max)
        };
        let ratio = max_slope(400.0) / max_slope(100.0);
        assert!((ratio / 4f64.powf(0.4) - 1.0).abs() < 1e-3, "{ratio}");
        assert!(phi.make_psi_alpha(0.6, 100.0).is_err());
        assert!(phi.reflect().make_psi_alpha(0.3, 100.0).is_err());
        let psi0 = psi.reflect();
        let (a, b) = psi0.transition();
        assert_eq!(psi0.value(a * 0.99), 1.0);
        assert_eq!(psi0.value(b * 1.01), 0.0);
    }

    proptest! {
        #[test]
        fn class_membership(x in 0.0f64..3.0, dx in 1e-4f64..0.5) {
            for f in [make_phi(), make_phi().reflect()] {
                let v = f.value(x);
                prop_assert!((0.0..=1.0).contains(&v));
                prop_assert!(f.value(x + dx) <= v + 1e-15);
            }
        }

        #[test]
        fn k_phi_two_depths_agree(re in -0.9f64..5.0, im in -5.0f64..5.0) {
            let phi = make_phi();
            let w = c(re, im);
            prop_assume!(w.norm() <= 5.0 && (w + 1.0).norm() > 0.05);
            let a = phi.k_phi(w, 1).unwrap();
            let b = phi.k_phi(w, 3).unwrap();
            prop_assert!((a - b).norm() < 1e-9 * a.norm().max(1.0));
            let r = phi.reflect().k_phi(-w, 2).unwrap();
            prop_assert!((a - r).norm() < 1e-8 * a.norm().max(1.0));
        }
    }
}
