//! Four evaluators for `L_f^(m)(s) = Σ λ_f(n)(−log n)^m n^{−s}`:
//!
//! - the Dirichlet series itself (`σ ≥ 1.25`),
//! - an oracle built from the Mellin integral of `f` split at the fixed
//!   point of `y ↦ 1/y`, with the integration ray rotated towards
//!   `e^{±iπ/2}` so the incomplete gamma terms do not cancel catastrophically
//!   (derivatives by Cauchy circles),
//! - the sharp approximate functional equation,
//! - the smoothed approximate functional equation with its correction terms.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::special::{factorial, RegularizedUpperGamma};
use crate::{ChiContext, CuspForm, Error, Result, SmoothingFunction};

/// Highest derivative order `m`.
pub const MAX_DERIVATIVE: usize = 4;
/// Smallest `σ` accepted by [`dirichlet_eval`].
pub const DIRICHLET_SIGMA_MIN: f64 = 1.25;
/// Largest `|t|` accepted by the oracle.
pub const ORACLE_T_MAX: f64 = 1000.0;
/// Largest `|t|` for which [`Method::Auto`] picks the oracle.
pub const AUTO_ORACLE_T_MAX: f64 = 300.0;
/// Smallest `|t|` accepted by the approximate functional equations.
pub const AFE_T_MIN: f64 = 10.0;
/// Default Cauchy circle radius and node count for [`oracle_derivative`].
pub const CAUCHY_RADIUS: f64 = 0.25;
pub const CAUCHY_NODES: usize = 32;
/// Exponent slack `ε` in the sharp-AFE error envelope.
pub const SHARP_AFE_EPS: f64 = 0.05;
/// Constants `c_m` of the sharp-AFE envelope `c_m |t|^{1/2−σ+ε}`: the
/// largest ratio seen against the oracle over all six weights, σ ∈ [0, 1]
/// and 20 ≤ t ≤ 200, rounded up.
pub const SHARP_AFE_C: [f64; MAX_DERIVATIVE + 1] = [1.8, 2.7, 6.2, 21.2, 73.2];

/// Rotation slack: the oracle ray has argument `π/2 − ORACLE_SLACK/|t|`.
const ORACLE_SLACK: f64 = 3.0;
const DERIVATIVE_TOL: f64 = 1e-6;
/// Safety factor on the last correction terms in the smoothed-AFE estimate.
const SMOOTHED_ERR_FACTOR: f64 = 2.0;
/// Safety factor on the omitted first corrections when they are skipped.
const UNCORRECTED_ERR_FACTOR: f64 = 3.0;
const EPS: f64 = f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Dirichlet,
    Oracle,
    AfeSharp,
    AfeSmoothed,
    Auto,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Dirichlet => "dirichlet",
            Method::Oracle => "oracle",
            Method::AfeSharp => "afe_sharp",
            Method::AfeSmoothed => "afe_smoothed",
            Method::Auto => "auto",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "dirichlet" => Method::Dirichlet,
            "oracle" => Method::Oracle,
            "afe_sharp" => Method::AfeSharp,
            "afe_smoothed" => Method::AfeSmoothed,
            "auto" => Method::Auto,
            _ => return Err(Error::Domain(alloc::format!("unknown method {s:?}"))),
        })
    }
}

/// One evaluation of `L_f^(m)(s)`.
#[derive(Debug, Clone)]
pub struct EvalRequest<'a> {
    pub form: &'a CuspForm,
    pub m: usize,
    pub s: Complex64,
    pub method: Method,
    /// Cutoff for the smoothed AFE; the standard bump when `None`.
    pub smoothing: Option<SmoothingFunction>,
    /// Correction depth; chosen by [`afe_smoothed_best_depth`] when `None`.
    pub l: Option<usize>,
    /// Lengths of the two smoothed sums; `|t|/2π` when `None`.
    pub y1: Option<f64>,
    pub y2: Option<f64>,
    pub with_corrections: bool,
    /// Absolute tolerance for the Dirichlet series tail.
    pub tol: f64,
}

impl<'a> EvalRequest<'a> {
    pub fn new(form: &'a CuspForm, m: usize, s: Complex64) -> Self {
        EvalRequest {
            form,
            m,
            s,
            method: Method::Auto,
            smoothing: None,
            l: None,
            y1: None,
            y2: None,
            with_corrections: true,
            tol: 1e-12,
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: Complex64,
    /// The method actually used (never `Auto`).
    pub method: Method,
    pub err_estimate: f64,
    pub terms_used: usize,
}

fn check_m(m: usize) -> Result<()> {
    if m > MAX_DERIVATIVE {
        return Err(Error::OutOfRange { what: "derivative order m", value: m as f64, limit: MAX_DERIVATIVE as f64 });
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |b, i| b * (n - i) as f64 / (i + 1) as f64)
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

/// `∫_N^∞ (log x)^p x^{−a} dx` for `a > 1`.
pub fn log_power_tail(p: u32, a: f64, n: f64) -> f64 {
    let ln = n.ln();
    let base = n.powf(1.0 - a);
    let mut total = 0.0;
    let mut falling = 1.0;
    for i in 0..=p {
        total += falling * ln.powi((p - i) as i32) * base / (a - 1.0).powi(i as i32 + 1);
        falling *= (p - i) as f64;
    }
    total
}

/// Bound for `Σ_{n>N} d(n)(log n)^m n^{−σ}` from `Σ_{n≤x} d(n) ≤ x(log x + 1)`
/// and partial summation; valid once `(log x)^m x^{−σ}` decreases past `N`.
fn divisor_tail_bound(m: usize, sigma: f64, n: f64) -> f64 {
    let g = n.ln().powi(m as i32) * n.powf(-sigma);
    let p = m as u32;
    n * (n.ln() + 1.0) * g + log_power_tail(p + 1, sigma, n) + 2.0 * log_power_tail(p, sigma, n)
}

/// Partial sum of the Dirichlet series with a Deligne-based tail bound.
/// The length is the smallest `N ≤ n_max` whose bound is at most `tol`;
/// when none is, `N = n_max` and the (larger) bound is reported.
pub fn dirichlet_eval(form: &CuspForm, m: usize, s: Complex64, tol: f64) -> Result<EvalResult> {
    check_m(m)?;
    let sigma = s.re;
    if !(sigma >= DIRICHLET_SIGMA_MIN) {
        return Err(Error::Domain(alloc::format!(
            "σ = {sigma} is outside the absolute-convergence region σ ≥ {DIRICHLET_SIGMA_MIN}"
        )));
    }
    let n_max = form.n_max();
    let first = ((m as f64 / sigma).exp().ceil() as usize).max(2);
    let bound = |n: usize| divisor_tail_bound(m, sigma, n as f64);
    let n = if first >= n_max || bound(n_max) > tol {
        n_max
    } else {
        let (mut lo, mut hi) = (first, n_max);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if bound(mid) <= tol {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    };
    let lambdas = form.lambdas();
    let mut total = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    for (i, &lam) in lambdas[..n].iter().enumerate() {
        let ln = ((i + 1) as f64).ln();
        let term = (-s * ln).exp() * (lam * (-ln).powi(m as i32));
        total += term;
        mag += term.norm();
    }
    Ok(EvalResult { value: total, method: Method::Dirichlet, err_estimate: bound(n) + 4.0 * EPS * mag, terms_used: n })
}

/// `L_f(s)` through the rotated split Mellin integral
/// `L(s) = Σ λ(n) n^{−s} Q(s+c, 2πnδ) + χ(s) Σ λ(n) n^{s−1} Q(1−s+c, 2πnδ̄)`
/// with `c = (k−1)/2` and `δ = e^{iθ sgn t}`.
pub fn oracle_eval(form: &CuspForm, s: Complex64) -> Result<EvalResult> {
    let ctx = ChiContext::new(form);
    oracle_with(form, &ctx, s)
}

fn oracle_with(form: &CuspForm, ctx: &ChiContext, s: Complex64) -> Result<EvalResult> {
    let t = s.im;
    if !(t.abs() <= ORACLE_T_MAX) {
        return Err(Error::OutOfRange { what: "oracle |t| (use an approximate functional equation)", value: t.abs(), limit: ORACLE_T_MAX });
    }
    let c = ctx.shift();
    let a = s + c;
    let b = 1.0 - s + c;
    if a.re <= 0.0 || b.re <= 0.0 {
        return Err(Error::Domain(alloc::format!("oracle needs −(k−1)/2 < σ < (k+1)/2, got σ = {}", s.re)));
    }
    let theta = (PI / 2.0 - ORACLE_SLACK / t.abs()).max(0.0) * sgn(t);
    let qa = RegularizedUpperGamma::new(a)?;
    let qb = RegularizedUpperGamma::new(b)?;
    let chi = ctx.chi(s)?;
    let chi_abs = chi.norm();
    let lambdas = form.lambdas();
    let transition = a.norm().max(b.norm()) / (2.0 * PI);
    let cond_a = qa.ln_gamma_a().norm() + a.norm();
    let cond_b = qb.ln_gamma_a().norm() + b.norm();

    let mut sum_a = Complex64::new(0.0, 0.0);
    let mut sum_b = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    let mut rounding = 0.0;
    let mut quiet = 0;
    let mut last = 0.0;
    let mut n = 0;
    while quiet < 3 {
        n += 1;
        if n > lambdas.len() {
            return Err(Error::NoConvergence {
                routine: "oracle series",
                detail: alloc::format!("s = {s}: needs more than n_max = {} coefficients", lambdas.len()),
            });
        }
        let ln_n = (n as f64).ln();
        let ln_r = (2.0 * PI).ln() + ln_n;
        let za = Complex64::new(ln_r, theta);
        let zb = Complex64::new(ln_r, -theta);
        let ta = (-s * ln_n).exp() * qa.eval_with_ln(za.exp(), za)?;
        let tb = ((s - 1.0) * ln_n).exp() * qb.eval_with_ln(zb.exp(), zb)?;
        let lam = lambdas[n - 1];
        sum_a += ta * lam;
        sum_b += tb * lam;
        let size = ta.norm() + chi_abs * tb.norm();
        let bound = size * (n as f64).sqrt() * 2.0;
        mag += size * lam.abs();
        let r = (2.0 * PI * n as f64).max(1.0);
        rounding += EPS * (ta.norm() * (cond_a + a.norm() * ln_r + r) + chi_abs * tb.norm() * (cond_b + b.norm() * ln_r + r)) * lam.abs();
        last = bound;
        if n as f64 > transition && bound <= 1e-17 * mag {
            quiet += 1;
        } else {
            quiet = 0;
        }
    }
    let value = sum_a + chi * sum_b;
    Ok(EvalResult { value, method: Method::Oracle, err_estimate: last + rounding + EPS * mag, terms_used: n })
}

/// `L_f^(m)(s)` by the trapezoid rule on a circle of `nodes` points around
/// `s`; the error estimate compares with the rule on every other node.
pub fn oracle_derivative(form: &CuspForm, m: usize, s: Complex64, radius: f64, nodes: usize) -> Result<EvalResult> {
    let ctx = ChiContext::new(form);
    oracle_derivative_with(form, &ctx, m, s, radius, nodes)
}

fn oracle_derivative_with(form: &CuspForm, ctx: &ChiContext, m: usize, s: Complex64, radius: f64, nodes: usize) -> Result<EvalResult> {
    check_m(m)?;
    if m == 0 {
        return oracle_with(form, ctx, s);
    }
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(Error::OutOfRange { what: "Cauchy radius", value: radius, limit: 1.0 });
    }
    if nodes < 8 || nodes % 2 == 1 {
        return Err(Error::Domain(alloc::format!("Cauchy node count must be even and ≥ 8, got {nodes}")));
    }
    let mut fine = Complex64::new(0.0, 0.0);
    let mut coarse = Complex64::new(0.0, 0.0);
    let mut oracle_err = 0.0;
    let mut peak: f64 = 0.0;
    let mut terms = 0;
    for k in 0..nodes {
        let phase = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / nodes as f64);
        let r = oracle_with(form, ctx, s + phase * radius)?;
        let v = r.value * phase.powi(-(m as i32));
        fine += v;
        if k % 2 == 0 {
            coarse += v;
        }
        oracle_err += r.err_estimate;
        peak = peak.max(r.value.norm());
        terms += r.terms_used;
    }
    let scale = factorial(m as u32) / radius.powi(m as i32);
    let fine = fine * (scale / nodes as f64);
    let coarse = coarse * (scale * 2.0 / nodes as f64);
    let diff = (fine - coarse).norm();
    if diff > DERIVATIVE_TOL * scale * peak.max(1e-300) {
        return Err(Error::NoConvergence {
            routine: "Cauchy differentiation",
            detail: alloc::format!("m = {m}, s = {s}: {nodes} and {} nodes differ by {diff:e}", nodes / 2),
        });
    }
    Ok(EvalResult {
        value: fine,
        method: Method::Oracle,
        err_estimate: diff + scale * oracle_err / nodes as f64,
        terms_used: terms,
    })
}

fn check_afe_point(s: Complex64) -> Result<()> {
    if !(0.0..=1.0).contains(&s.re) {
        return Err(Error::Domain(alloc::format!("approximate functional equations need 0 ≤ σ ≤ 1, got σ = {}", s.re)));
    }
    if !(s.im.abs() >= AFE_T_MIN) {
        return Err(Error::Domain(alloc::format!("approximate functional equations need |t| ≥ {AFE_T_MIN}, got t = {}", s.im)));
    }
    Ok(())
}

/// `λ(n)(−log n)^p n^{−z}` for `p = 0..=m`, ascending in `p`.
fn dirichlet_terms(lam: f64, n: usize, z: Complex64, m: usize, out: &mut [Complex64]) {
    let ln = (n as f64).ln();
    let mut base = (-z * ln).exp() * lam;
    for slot in out.iter_mut().take(m + 1) {
        *slot = base;
        base *= -ln;
    }
}

fn coefficients_upto(form: &CuspForm, n: usize) -> Result<&[f64]> {
    if n > form.n_max() {
        return Err(Error::OutOfRange { what: "AFE length", value: n as f64, limit: form.n_max() as f64 });
    }
    Ok(&form.lambdas()[..n])
}

/// The sharp approximate functional equation with both sums cut at
/// `n ≤ |t|/2π`.
pub fn afe_sharp(form: &CuspForm, m: usize, s: Complex64) -> Result<EvalResult> {
    check_m(m)?;
    check_afe_point(s)?;
    let ctx = ChiContext::new(form);
    let n = (s.im.abs() / (2.0 * PI)).floor() as usize;
    let lambdas = coefficients_upto(form, n)?;
    let mut first = Complex64::new(0.0, 0.0);
    let mut second = [Complex64::new(0.0, 0.0); MAX_DERIVATIVE + 1];
    let mut buf = [Complex64::new(0.0, 0.0); MAX_DERIVATIVE + 1];
    for (i, &lam) in lambdas.iter().enumerate() {
        dirichlet_terms(lam, i + 1, s, m, &mut buf);
        first += buf[m];
        dirichlet_terms(lam, i + 1, 1.0 - s, m, &mut buf);
        for r in 0..=m {
            second[r] += buf[r];
        }
    }
    let chi = ctx.chi(s)?;
    let ratios = ctx.ratios_upto(m, s)?;
    let mut value = first;
    for r in 0..=m {
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        value += chi * ratios[m - r] * second[r] * (sign * binomial(m, r));
    }
    let err = SHARP_AFE_C[m] * s.im.abs().powf(0.5 - s.re + SHARP_AFE_EPS);
    Ok(EvalResult { value, method: Method::AfeSharp, err_estimate: err, terms_used: 2 * n })
}

/// Default correction depth `max(8, ⌈(k+1)/2⌉)`.
pub fn default_depth(weight: u32) -> usize {
    8usize.max(min_depth(weight))
}

/// Smallest correction depth `⌈(k+1)/2⌉` accepted with corrections.
pub fn min_depth(weight: u32) -> usize {
    (weight as usize + 2) / 2
}

/// The smoothed approximate functional equation
///
/// `Σ_n λ(n)(−log n)^m n^{−s} Σ_j φ^(j)(n/y₁)(−n/y₁)^j γ_j^(0)(s, 1/|t|)
///  + χ(s) Σ_r (−1)^r C(m,r) Σ_n λ(n)(−log n)^r n^{s−1}
///      Σ_j φ₀^(j)(n/y₂)(−n/y₂)^j γ_j^(m−r)(1−s, 1/|t|)`
///
/// where `j` runs over `0..=l` with corrections and `j = 0` without. The
/// `j = 0` terms are the main terms since `γ_0^(0) = 1` and
/// `χ(s)γ_0^(q)(1−s) = χ^(q)(s)`.
#[allow(clippy::too_many_arguments)]
pub fn afe_smoothed(
    form: &CuspForm,
    m: usize,
    s: Complex64,
    phi: &SmoothingFunction,
    y1: f64,
    y2: f64,
    l: usize,
    with_corrections: bool,
) -> Result<EvalResult> {
    check_smoothed_args(m, s, phi, y1, y2)?;
    if with_corrections && l < min_depth(form.weight()) {
        return Err(Error::OutOfRange { what: "correction depth l (minimum ⌈(k+1)/2⌉)", value: l as f64, limit: min_depth(form.weight()) as f64 });
    }
    if l < 1 {
        return Err(Error::OutOfRange { what: "correction depth l", value: 0.0, limit: 1.0 });
    }
    let terms = smoothed_terms(form, m, s, phi, y1, y2, l)?;
    Ok(if with_corrections { terms.corrected(l) } else { terms.uncorrected() })
}

/// Largest depth tried by [`afe_smoothed_best_depth`].
pub fn max_auto_depth(weight: u32) -> usize {
    min_depth(weight) + 5
}

/// [`afe_smoothed`] with corrections, truncated at the depth in
/// `min_depth..=max_auto_depth` with the smallest error estimate. Returns
/// the depth used.
pub fn afe_smoothed_best_depth(
    form: &CuspForm,
    m: usize,
    s: Complex64,
    phi: &SmoothingFunction,
    y1: f64,
    y2: f64,
) -> Result<(EvalResult, usize)> {
    check_smoothed_args(m, s, phi, y1, y2)?;
    let (lo, hi) = (min_depth(form.weight()), max_auto_depth(form.weight()));
    let terms = smoothed_terms(form, m, s, phi, y1, y2, hi)?;
    let l = (lo..=hi).min_by(|&a, &b| terms.truncation(a).total_cmp(&terms.truncation(b))).unwrap_or(lo);
    Ok((terms.corrected(l), l))
}

fn check_smoothed_args(m: usize, s: Complex64, phi: &SmoothingFunction, y1: f64, y2: f64) -> Result<()> {
    check_m(m)?;
    check_afe_point(s)?;
    let t = s.im.abs();
    if !(y1 > 0.0 && y2 > 0.0) {
        return Err(Error::Domain(alloc::format!("y1, y2 must be positive, got {y1}, {y2}")));
    }
    let product = (2.0 * PI).powi(2) * y1 * y2 / (t * t);
    if !((product - 1.0).abs() <= 1e-9) {
        return Err(Error::Domain(alloc::format!("(2π)²y₁y₂ must equal t², ratio is {product}")));
    }
    if phi.is_reflected() {
        return Err(Error::Domain("pass the unreflected cutoff; its reflection is taken internally".into()));
    }
    Ok(())
}

struct SmoothedTerms {
    /// `contrib[j]` totals the `j`-th terms of both sums; `mag[j]` the
    /// moduli of those terms.
    contrib: Vec<Complex64>,
    mag: Vec<f64>,
    terms_used: usize,
}

impl SmoothedTerms {
    /// Last two layers plus the spread of the partial sums `S_i`,
    /// `2 ≤ i < l`, around `S_l`.
    fn truncation(&self, l: usize) -> f64 {
        let tail = self.contrib[l].norm() + self.contrib[l - 1].norm();
        let full: Complex64 = self.contrib[..=l].iter().sum();
        let mut partial = full;
        let mut spread: f64 = 0.0;
        for i in (2..l).rev() {
            partial -= self.contrib[i + 1];
            spread = spread.max((full - partial).norm());
        }
        SMOOTHED_ERR_FACTOR * tail + spread
    }

    fn result(&self, value: Complex64, truncation: f64, orders: usize) -> EvalResult {
        let rounding = 8.0 * EPS * self.mag[..orders].iter().sum::<f64>();
        EvalResult { value, method: Method::AfeSmoothed, err_estimate: truncation + rounding, terms_used: self.terms_used }
    }

    fn corrected(&self, l: usize) -> EvalResult {
        self.result(self.contrib[..=l].iter().sum(), self.truncation(l), l + 1)
    }

    fn uncorrected(&self) -> EvalResult {
        let l = self.contrib.len() - 1;
        let omitted: f64 = self.contrib[1..=l.min(3)].iter().map(|c| c.norm()).sum();
        self.result(self.contrib[0], UNCORRECTED_ERR_FACTOR * omitted, 1)
    }
}

fn smoothed_terms(
    form: &CuspForm,
    m: usize,
    s: Complex64,
    phi: &SmoothingFunction,
    y1: f64,
    y2: f64,
    l: usize,
) -> Result<SmoothedTerms> {
    let t = s.im.abs();
    let phi = if phi.max_order() < l { phi.with_max_order(l) } else { phi.clone() };
    let phi0 = phi.reflect();
    let ctx = ChiContext::new(form);
    let rho = 1.0 / t;
    let g1 = ctx.newton_coefficients(l, 0, s, rho)?;
    let g2: Vec<Vec<Complex64>> = (0..=m).map(|q| ctx.newton_coefficients(l, q, 1.0 - s, rho)).collect::<Result<_>>()?;

    // contrib[j] = total of the j-th terms over both sums
    let mut contrib = alloc::vec![Complex64::new(0.0, 0.0); l + 1];
    let mut mag = alloc::vec![0.0; l + 1];
    let mut buf = [Complex64::new(0.0, 0.0); MAX_DERIVATIVE + 1];

    let n1 = (2.0 * y1).floor() as usize;
    let lambdas = coefficients_upto(form, n1.max(1))?;
    for (i, &lam) in lambdas.iter().enumerate() {
        let x = (i + 1) as f64 / y1;
        let d = phi.derivs(x, l)?;
        if d.iter().all(|v| *v == 0.0) {
            continue;
        }
        dirichlet_terms(lam, i + 1, s, m, &mut buf);
        let base = buf[m];
        let mut pow = 1.0;
        for j in 0..=l {
            let term = base * g1[j] * (d[j] * pow);
            contrib[j] += term;
            mag[j] += term.norm();
            pow *= -x;
        }
    }

    let chi = ctx.chi(s)?;
    let n2 = (2.0 * y2).floor() as usize;
    let lambdas = coefficients_upto(form, n2.max(1))?;
    let mut weights = alloc::vec![Complex64::new(0.0, 0.0); l + 1];
    for r in 0..=m {
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        for j in 0..=l {
            weights[j] = chi * g2[m - r][j] * (sign * binomial(m, r));
        }
        for (i, &lam) in lambdas.iter().enumerate() {
            let x = (i + 1) as f64 / y2;
            let d = phi0.derivs(x, l)?;
            if d.iter().all(|v| *v == 0.0) {
                continue;
            }
            dirichlet_terms(lam, i + 1, 1.0 - s, r, &mut buf);
            let base = buf[r];
            let mut pow = 1.0;
            for j in 0..=l {
                let term = base * weights[j] * (d[j] * pow);
                contrib[j] += term;
                mag[j] += term.norm();
                pow *= -x;
            }
        }
    }

    Ok(SmoothedTerms { contrib, mag, terms_used: n1 + (m + 1) * n2 })
}

/// `|L^(m)(s) − Σ_r C(m,r)(−1)^r χ^(m−r)(s) L^(r)(1−s)|` with every
/// `L^(r)` from the oracle.
pub fn functional_eq_residual(form: &CuspForm, m: usize, s: Complex64) -> Result<f64> {
    check_m(m)?;
    let ctx = ChiContext::new(form);
    let lhs = oracle_derivative_with(form, &ctx, m, s, CAUCHY_RADIUS, CAUCHY_NODES)?.value;
    let chi = ctx.chi(s)?;
    let ratios = ctx.ratios_upto(m, s)?;
    let mut rhs = Complex64::new(0.0, 0.0);
    for r in 0..=m {
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        let v = oracle_derivative_with(form, &ctx, r, 1.0 - s, CAUCHY_RADIUS, CAUCHY_NODES)?.value;
        rhs += chi * ratios[m - r] * v * (sign * binomial(m, r));
    }
    Ok((lhs - rhs).norm())
}

/// The method [`Method::Auto`] resolves to at `s`, if any.
pub fn auto_method(s: Complex64) -> Option<Method> {
    if s.re >= DIRICHLET_SIGMA_MIN {
        Some(Method::Dirichlet)
    } else if s.im.abs() <= AUTO_ORACLE_T_MAX {
        Some(Method::Oracle)
    } else if (0.0..=1.0).contains(&s.re) {
        Some(Method::AfeSmoothed)
    } else {
        None
    }
}

/// Dispatches a request to its method.
pub fn eval(req: &EvalRequest<'_>) -> Result<EvalResult> {
    check_m(req.m)?;
    let method = match req.method {
        Method::Auto => auto_method(req.s).ok_or_else(|| {
            Error::Domain(alloc::format!("no evaluation method covers s = {}", req.s))
        })?,
        other => other,
    };
    match method {
        Method::Dirichlet => dirichlet_eval(req.form, req.m, req.s, req.tol),
        Method::Oracle => oracle_derivative(req.form, req.m, req.s, CAUCHY_RADIUS, CAUCHY_NODES),
        Method::AfeSharp => afe_sharp(req.form, req.m, req.s),
        Method::AfeSmoothed => {
            let t = req.s.im.abs();
            let (y1, y2) = match (req.y1, req.y2) {
                (Some(a), Some(b)) => (a, b),
                (Some(a), None) => (a, t * t / ((2.0 * PI).powi(2) * a)),
                (None, Some(b)) => (t * t / ((2.0 * PI).powi(2) * b), b),
                (None, None) => (t / (2.0 * PI), t / (2.0 * PI)),
            };
            let phi = match &req.smoothing {
                Some(p) => p.clone(),
                None => crate::smoothing::make_phi(),
            };
            match req.l {
                None if req.with_corrections => {
                    afe_smoothed_best_depth(req.form, req.m, req.s, &phi, y1, y2).map(|(r, _)| r)
                }
                l => {
                    let l = l.unwrap_or_else(|| default_depth(req.form.weight()));
                    afe_smoothed(req.form, req.m, req.s, &phi, y1, y2, l, req.with_corrections)
                }
            }
        }
        Method::Auto => unreachable!(),
    }
}
