//! The functional-equation factor
//! `χ_f(s) = (−1)^{k/2} (2π)^{2s−1} Γ(1−s+(k−1)/2)/Γ(s+(k−1)/2)`,
//! its derivatives, and the correction integrals `γ_j^(r)(s, ρ)`.
//!
//! `χ^(r)/χ` is a polynomial in `G^(1), …, G^(r)` where `G = log χ`; the
//! polynomial is generated by `h_{r+1} = h_r' + h_r·G^(1)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::special::{self, factorial, PrecisionPolicy};
use crate::{quad, CuspForm, Error, Result};

/// Highest derivative order of `χ` supported.
pub const MAX_RATIO_ORDER: usize = 8;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Monomial `c · Π g_i^{e_i}` in the symbols `g_i = G^(i)`.
#[derive(Debug, Clone, PartialEq)]
struct Monomial {
    coeff: u64,
    exps: [u8; MAX_RATIO_ORDER],
}

fn ratio_polynomials() -> Vec<Vec<Monomial>> {
    let mut polys = vec![vec![Monomial { coeff: 1, exps: [0; MAX_RATIO_ORDER] }]];
    for _ in 0..MAX_RATIO_ORDER {
        let h = polys.last().unwrap();
        let mut next: Vec<Monomial> = Vec::new();
        let mut push = |exps: [u8; MAX_RATIO_ORDER], coeff: u64| {
            if let Some(m) = next.iter_mut().find(|m| m.exps == exps) {
                m.coeff += coeff;
            } else {
                next.push(Monomial { coeff, exps });
            }
        };
        for m in h {
            // h·g_1
            let mut e = m.exps;
            e[0] += 1;
            push(e, m.coeff);
            // h'
            for i in 0..MAX_RATIO_ORDER - 1 {
                if m.exps[i] > 0 {
                    let mut e = m.exps;
                    e[i] -= 1;
                    e[i + 1] += 1;
                    push(e, m.coeff * m.exps[i] as u64);
                }
            }
        }
        polys.push(next);
    }
    polys
}

/// Weight-dependent data for `χ_f`.
#[derive(Debug, Clone)]
pub struct ChiContext {
    weight: u32,
    precision: PrecisionPolicy,
    polys: Vec<Vec<Monomial>>,
}

/// The stadium contour `F` for a point `s = σ + it`: two half circles of
/// radius `√|t|` centred at `−1/2−σ` and `3/2−σ`, joined by horizontal
/// segments at `Im w = ±√|t|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    pub center_left: f64,
    pub center_right: f64,
    pub radius: f64,
    pub nodes_per_arc: usize,
    pub nodes_per_segment: usize,
}

impl ContourSpec {
    pub fn for_point(s: Complex64) -> Self {
        ContourSpec {
            center_left: -0.5 - s.re,
            center_right: 1.5 - s.re,
            radius: s.im.abs().sqrt(),
            nodes_per_arc: 64,
            nodes_per_segment: 32,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) || self.center_right <= self.center_left {
            return Err(Error::Domain("contour needs a positive radius and ordered centres".into()));
        }
        if self.nodes_per_arc < 16 || self.nodes_per_segment < 16 {
            return Err(Error::Domain("contour node counts must be at least 16".into()));
        }
        Ok(())
    }

    /// Nodes `w` and weights `dw` (counterclockwise) of a composite
    /// Gauss–Legendre rule with 16-point panels.
    fn rule(&self, scale: usize) -> Vec<(Complex64, Complex64)> {
        const PANEL: usize = 16;
        let (x, wts) = quad::gauss_legendre(PANEL);
        let arc_panels = (self.nodes_per_arc * scale).div_ceil(PANEL);
        let seg_panels = (self.nodes_per_segment * scale).div_ceil(PANEL);
        let r = self.radius;
        let mut out = Vec::with_capacity(PANEL * 2 * (arc_panels + seg_panels));
        let mut line = |panels: usize, a: f64, b: f64, map: &dyn Fn(f64) -> (Complex64, Complex64)| {
            let h = (b - a) / panels as f64;
            for p in 0..panels {
                let mid = a + (p as f64 + 0.5) * h;
                for (xi, wi) in x.iter().zip(&wts) {
                    let (w, dw) = map(mid + 0.5 * h * xi);
                    out.push((w, dw * (0.5 * h * wi)));
                }
            }
        };
        let (cl, cr) = (self.center_left, self.center_right);
        line(arc_panels, -PI / 2.0, PI / 2.0, &|th| {
            let e = Complex64::from_polar(r, th);
            (cr + e, Complex64::i() * e)
        });
        line(seg_panels, cr, cl, &|u| (Complex64::new(u, r), Complex64::new(1.0, 0.0)));
        line(arc_panels, PI / 2.0, 1.5 * PI, &|th| {
            let e = Complex64::from_polar(r, th);
            (cl + e, Complex64::i() * e)
        });
        line(seg_panels, cl, cr, &|u| (Complex64::new(u, -r), Complex64::new(1.0, 0.0)));
        out
    }
}

fn sgn(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl ChiContext {
    pub fn new(form: &CuspForm) -> Self {
        Self::for_weight(form.weight()).expect("cusp forms carry a supported weight")
    }

    pub fn for_weight(weight: u32) -> Result<Self> {
        Self::with_precision(weight, PrecisionPolicy::default())
    }

    pub fn with_precision(weight: u32, precision: PrecisionPolicy) -> Result<Self> {
        if weight < 12 || weight % 2 == 1 {
            return Err(Error::UnsupportedWeight(weight));
        }
        precision.validate()?;
        Ok(ChiContext { weight, precision, polys: ratio_polynomials() })
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn precision(&self) -> &PrecisionPolicy {
        &self.precision
    }

    /// `(k−1)/2`.
    pub fn shift(&self) -> f64 {
        (self.weight as f64 - 1.0) / 2.0
    }

    fn parity(&self) -> f64 {
        if (self.weight / 2) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// `log χ_f(s)` up to the sign `(−1)^{k/2}`.
    fn ln_chi_core(&self, s: Complex64) -> Result<Complex64> {
        let c = self.shift();
        let num = special::ln_gamma_with(1.0 - s + c, &self.precision)?;
        let den = special::ln_gamma_with(s + c, &self.precision)?;
        Ok((2.0 * s - 1.0) * LN_2PI + num - den)
    }

    pub fn chi(&self, s: Complex64) -> Result<Complex64> {
        Ok(self.ln_chi_core(s)?.exp() * self.parity())
    }

    /// Leading Stirling approximant
    /// `(−1)^{k/2}(2π)^{2σ−1}|t|^{1−2σ} e^{i(π(1−k)sgn(t)/2 − 2t log(|t|/2πe))}`.
    pub fn chi_asymptotic(&self, s: Complex64) -> Result<Complex64> {
        let (sigma, t) = (s.re, s.im);
        if t.abs() < 5.0 {
            return Err(Error::Domain(alloc::format!("chi_asymptotic needs |t| ≥ 5, got {t}")));
        }
        let modulus = (2.0 * PI).powf(2.0 * sigma - 1.0) * t.abs().powf(1.0 - 2.0 * sigma);
        let phase = PI / 2.0 * (1.0 - self.weight as f64) * sgn(t) - 2.0 * t * (t.abs() / (2.0 * PI * core::f64::consts::E)).ln();
        Ok(Complex64::from_polar(modulus * self.parity(), phase))
    }

    fn check_domain(&self, s: Complex64) -> Result<()> {
        let edge = self.weight as f64 / 2.0 - 1.0;
        if s.re.abs() >= edge && s.im.abs() <= 0.5 {
            return Err(Error::Domain(alloc::format!(
                "s = {s} lies in the excluded region |σ| ≥ {edge}, |t| ≤ 1/2 of χ^(r)/χ"
            )));
        }
        Ok(())
    }

    /// `[G^(1)(s), …, G^(r)(s)]` with `G = log χ_f`.
    pub fn log_derivatives(&self, r: usize, s: Complex64) -> Result<Vec<Complex64>> {
        if r > MAX_RATIO_ORDER {
            return Err(Error::OutOfRange { what: "chi derivative order", value: r as f64, limit: MAX_RATIO_ORDER as f64 });
        }
        self.check_domain(s)?;
        let c = self.shift();
        let a = 1.0 - s + c;
        let b = s + c;
        let mut g = Vec::with_capacity(r);
        for j in 1..=r {
            let n = (j - 1) as u32;
            let pa = special::polygamma_with(n, a, &self.precision)?;
            let pb = special::polygamma_with(n, b, &self.precision)?;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 }; // (−1)^{j−1}
            let mut v = -pa * sign - pb;
            if j == 1 {
                v += 2.0 * LN_2PI;
            }
            g.push(v);
        }
        Ok(g)
    }

    /// `χ^(r)(s)/χ(s)` for `0 ≤ r ≤ 8`.
    pub fn chi_log_deriv_ratio(&self, r: usize, s: Complex64) -> Result<Complex64> {
        if r == 0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let g = self.log_derivatives(r, s)?;
        Ok(self.eval_ratio(r, &g))
    }

    fn eval_ratio(&self, r: usize, g: &[Complex64]) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for m in &self.polys[r] {
            let mut term = Complex64::new(m.coeff as f64, 0.0);
            for (i, &e) in m.exps.iter().enumerate() {
                if e > 0 {
                    term *= g[i].powu(e as u32);
                }
            }
            total += term;
        }
        total
    }

    /// `χ^(r)/χ` for all orders `0..=r` at one point.
    pub fn ratios_upto(&self, r: usize, s: Complex64) -> Result<Vec<Complex64>> {
        if r == 0 {
            return Ok(vec![Complex64::new(1.0, 0.0)]);
        }
        let g = self.log_derivatives(r, s)?;
        Ok((0..=r).map(|q| self.eval_ratio(q, &g)).collect())
    }

    /// Integer coefficients of `χ^(r)/χ` as pairs (coefficient, exponents of
    /// `G^(1), …, G^(r)`).
    pub fn ratio_polynomial(&self, r: usize) -> Vec<(u64, Vec<u8>)> {
        self.polys[r.min(MAX_RATIO_ORDER)]
            .iter()
            .map(|m| (m.coeff, m.exps[..r.max(1)].to_vec()))
            .collect()
    }

    /// `χ^(r)(s)`.
    pub fn chi_derivative(&self, r: usize, s: Complex64) -> Result<Complex64> {
        Ok(self.chi(s)? * self.chi_log_deriv_ratio(r, s)?)
    }

    fn check_gamma_args(&self, r: usize, s: Complex64, rho: f64) -> Result<()> {
        if s.im.abs() < 10.0 {
            return Err(Error::Domain(alloc::format!("gamma_j needs |t| ≥ 10, got t = {}", s.im)));
        }
        if !(rho > 0.0) {
            return Err(Error::Domain(alloc::format!("gamma_j needs ρ > 0, got {rho}")));
        }
        if r > MAX_RATIO_ORDER {
            return Err(Error::OutOfRange { what: "chi derivative order", value: r as f64, limit: MAX_RATIO_ORDER as f64 });
        }
        Ok(())
    }

    /// `γ_j^(r)(s, ρ)` by quadrature along `F`, doubling the node counts until
    /// two successive rules agree.
    pub fn gamma_j(&self, j: usize, r: usize, s: Complex64, rho: f64, contour: &ContourSpec) -> Result<Complex64> {
        self.check_gamma_args(r, s, rho)?;
        contour.validate()?;
        let left_edge = contour.center_left - contour.radius;
        for i in 0..=j {
            if (-(i as f64) - left_edge).abs() < 1e-3 {
                return Err(Error::Pole { function: "gamma_j integrand on contour", re: -(i as f64), im: 0.0 });
            }
        }
        let c = self.shift();
        let ln_g0 = special::ln_gamma_with(s + c, &self.precision)?;
        let phase = Complex64::new(rho.ln(), -PI / 2.0 * sgn(s.im));
        let integrand = |w: Complex64| -> Result<Complex64> {
            let mut den = w;
            for i in 1..=j {
                den *= w + i as f64;
            }
            let ratio = self.chi_log_deriv_ratio(r, 1.0 - s - w)?;
            let lg = special::ln_gamma_with(s + w + c, &self.precision)? - ln_g0;
            Ok(ratio / den * (lg + w * phase).exp())
        };
        let run = |scale: usize| -> Result<(Complex64, f64)> {
            let mut total = Complex64::new(0.0, 0.0);
            let mut mag = 0.0;
            for (w, dw) in contour.rule(scale) {
                let v = integrand(w)? * dw;
                total += v;
                mag += v.norm();
            }
            let norm = Complex64::new(0.0, 2.0 * PI);
            Ok((total / norm, mag / (2.0 * PI)))
        };
        let (mut prev, _) = run(1)?;
        let mut scale = 2;
        for _ in 0..7 {
            let (cur, mag) = run(scale)?;
            if (cur - prev).norm() <= 1e-11 * mag {
                return Ok(cur);
            }
            prev = cur;
            scale *= 2;
        }
        Err(Error::NoConvergence {
            routine: "gamma_j contour quadrature",
            detail: alloc::format!("j = {j}, r = {r}, s = {s}: no agreement after {scale} × base nodes"),
        })
    }

    /// Residue terms `(χ^(r)/χ)(1−s+i) · Γ(s−i+c)/Γ(s+c) · (ρe^{−iπ sgn(t)/2})^{−i}`
    /// for `i = 0..=l`.
    fn residue_terms(&self, l: usize, r: usize, s: Complex64, rho: f64) -> Result<Vec<Complex64>> {
        let c = self.shift();
        let step = Complex64::from_polar(1.0 / rho, PI / 2.0 * sgn(s.im));
        let mut out = Vec::with_capacity(l + 1);
        let mut factor = Complex64::new(1.0, 0.0);
        for i in 0..=l {
            if i > 0 {
                factor = factor * step / (s + c - i as f64);
            }
            out.push(self.chi_log_deriv_ratio(r, 1.0 - s + i as f64)? * factor);
        }
        Ok(out)
    }

    fn combine(terms: &[Complex64], j: usize) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (i, term) in terms.iter().enumerate().take(j + 1) {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            total += term * (sign / (factorial(i as u32) * factorial((j - i) as u32)));
        }
        total
    }

    /// `γ_j^(r)(s, ρ)` by the residue theorem: the sum over the poles
    /// `w = 0, −1, …, −j` that lie inside `F`.
    pub fn gamma_j_residue(&self, j: usize, r: usize, s: Complex64, rho: f64) -> Result<Complex64> {
        self.check_gamma_args(r, s, rho)?;
        let edge = 0.5 + s.re + s.im.abs().sqrt();
        if (0..=j).any(|i| (i as f64 - edge).abs() < 1e-9) {
            return Err(Error::Pole { function: "gamma_j integrand on contour", re: -edge, im: 0.0 });
        }
        let inside = (0..=j).filter(|&i| (i as f64) < edge).count();
        let terms = self.residue_terms(inside.saturating_sub(1), r, s, rho)?;
        let mut total = Complex64::new(0.0, 0.0);
        for (i, term) in terms.iter().enumerate().take(inside) {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            total += term * (sign / (factorial(i as u32) * factorial((j - i) as u32)));
        }
        Ok(total)
    }

    /// `[γ̂_0, …, γ̂_l]` where `γ̂_j` sums the residues at all of
    /// `w = 0, −1, …, −j`, i.e. the divided difference of
    /// `w ↦ (χ^(r)/χ)(1−s−w) Γ(s+w+c)/Γ(s+c) (ρe^{−iπ sgn(t)/2})^w` on those
    /// nodes. Equal to `γ_j^(r)(s, ρ)` whenever `F` encloses every node.
    pub fn newton_coefficients(&self, l: usize, r: usize, s: Complex64, rho: f64) -> Result<Vec<Complex64>> {
        self.check_gamma_args(r, s, rho)?;
        let terms = self.residue_terms(l, r, s, rho)?;
        Ok((0..=l).map(|j| Self::combine(&terms, j)).collect())
    }
}
