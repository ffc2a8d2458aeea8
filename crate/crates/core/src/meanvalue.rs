//! Mean squares `I(T) = ∫₀ᵀ |L_f^(m)(σ+it)|² dt`, the Rankin constant `C_f`
//! and the main terms they are compared with.
//!
//! The integral is split into `[0, 1]` (one 16-point Gauss–Legendre panel on
//! oracle values) and `[1, T]`, which is cut into panels of a fixed lattice
//! `1 + kh`, further cut at every grid height and at the oracle/AFE switch.
//! Each panel carries an 8-node and a 4-node Gauss–Legendre value. Panels are
//! independent; [`assemble`] sums them in ascending order, so the totals do
//! not depend on the order in which panels were evaluated.

use alloc::vec::Vec;

use num_complex::Complex64;
use num_integer::Integer;
#[allow(unused_imports)]
use num_traits::Float;

use crate::lseries::{self, EvalRequest, Method, AUTO_ORACLE_T_MAX};
use crate::quad::{gauss_legendre, QuadratureSpec};
use crate::{CuspForm, Error, Result};

/// Largest height accepted by [`plan`].
pub const T_MAX: f64 = 2000.0;
/// Largest derivative order accepted by [`plan`].
pub const MAX_MOMENT_DERIVATIVE: usize = 2;
/// Smallest `x_max` accepted by [`rankin_constant`].
pub const RANKIN_X_MIN: usize = 1000;

/// Slopes `Σ_{n≤x}|λ(n)|²/x` on a dyadic grid ending at `x_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankinEstimate {
    pub x_grid: Vec<usize>,
    pub partial_slopes: Vec<f64>,
    /// `Σ_{n≤x} d(n)²` at each grid point.
    pub divisor_bounds: Vec<f64>,
    pub c_f: f64,
    /// Largest `|slope/c_f − 1|` over the grid.
    pub fluctuation: f64,
}

pub fn rankin_constant(form: &CuspForm, x_max: usize) -> Result<RankinEstimate> {
    if x_max < RANKIN_X_MIN {
        return Err(Error::OutOfRange { what: "x_max (minimum)", value: x_max as f64, limit: RANKIN_X_MIN as f64 });
    }
    if x_max > form.n_max() {
        return Err(Error::OutOfRange { what: "x_max", value: x_max as f64, limit: form.n_max() as f64 });
    }
    let x_grid: Vec<usize> = (0..=4).rev().map(|i| x_max >> i).collect();
    let divisors = crate::forms::divisor_counts(x_max + 1);
    let lambdas = form.lambdas();
    let mut slopes = Vec::with_capacity(x_grid.len());
    let mut bounds = Vec::with_capacity(x_grid.len());
    let mut sum = 0.0;
    let mut dsum = 0.0;
    let mut n = 0;
    for &x in &x_grid {
        while n < x {
            n += 1;
            sum += lambdas[n - 1] * lambdas[n - 1];
            dsum += (divisors[n] as f64).powi(2);
        }
        slopes.push(sum / x as f64);
        bounds.push(dsum);
    }
    let c_f = *slopes.last().unwrap();
    let fluctuation = slopes.iter().map(|s| (s / c_f - 1.0).abs()).fold(0.0, f64::max);
    Ok(RankinEstimate { x_grid, partial_slopes: slopes, divisor_bounds: bounds, c_f, fluctuation })
}

/// The prefactor of `A_{f,m} = prefactor · C_f` as a reduced fraction
/// `(numerator, denominator)`:
/// `1/(2m+1) + Σ_{r=0}^{2m} (−2)^{2m−r}/(r+1) Σ_{r₁+r₂=r} C(m,r₁)C(m,r₂)`.
pub fn a_fm_prefactor(m: usize) -> Result<(i128, i128)> {
    if m > lseries::MAX_DERIVATIVE {
        return Err(Error::OutOfRange { what: "derivative order m", value: m as f64, limit: lseries::MAX_DERIVATIVE as f64 });
    }
    let binom = |n: usize, k: usize| -> i128 { (0..k).fold(1i128, |b, i| b * (n - i) as i128 / (i + 1) as i128) };
    let add = |(a, b): (i128, i128), (c, d): (i128, i128)| {
        let num = a * d + c * b;
        let den = b * d;
        let g = num.gcd(&den);
        (num / g, den / g)
    };
    let mut acc = (1i128, 2 * m as i128 + 1);
    for r in 0..=2 * m {
        let inner: i128 = (0..=r).filter(|&r1| r1 <= m && r - r1 <= m).map(|r1| binom(m, r1) * binom(m, r - r1)).sum();
        let pow = (-2i128).pow((2 * m - r) as u32);
        acc = add(acc, (pow * inner, r as i128 + 1));
    }
    Ok(acc)
}

/// `A_{f,m}` for a given `C_f`.
pub fn a_fm(m: usize, c_f: f64) -> Result<f64> {
    if !(c_f > 0.0) {
        return Err(Error::Domain(alloc::format!("C_f must be positive, got {c_f}")));
    }
    let (p, q) = a_fm_prefactor(m)?;
    Ok(p as f64 / q as f64 * c_f)
}

/// `Σ_n |λ(n)|²(log n)^{2m} n^{−2σ}` for `σ > 1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSum {
    /// `partial + tail_estimate`.
    pub value: f64,
    pub partial: f64,
    pub terms: usize,
    /// `C_f ∫_N^∞ (log x)^{2m} x^{−2σ} dx`.
    pub tail_estimate: f64,
    /// Upper bound for the tail from the majorant `Σ_{n≤x} d(n)² ≤ x(log x + 1)³`.
    pub tail_bound: f64,
}

/// Bound for `Σ_{n>N} d(n)²(log n)^{p} n^{−a}` by partial summation against
/// `x(log x + 1)³`.
fn divisor_square_tail_bound(p: u32, a: f64, n: f64) -> f64 {
    let u = n.ln();
    let g = u.powi(p as i32) * n.powf(-a);
    // (u+1)³ + 3(u+1)² = u³ + 6u² + 9u + 4
    let poly = [4.0, 9.0, 6.0, 1.0];
    let integral: f64 = poly.iter().enumerate().map(|(i, c)| c * lseries::log_power_tail(p + i as u32, a, n)).sum();
    n * (u + 1.0).powi(3) * g + integral
}

pub fn tail_sum(form: &CuspForm, m: usize, sigma: f64) -> Result<TailSum> {
    if !(sigma > 0.5 && sigma <= 1.0) {
        return Err(Error::Domain(alloc::format!("tail_sum needs 1/2 < σ ≤ 1 (divergent otherwise), got {sigma}")));
    }
    if m > lseries::MAX_DERIVATIVE {
        return Err(Error::OutOfRange { what: "derivative order m", value: m as f64, limit: lseries::MAX_DERIVATIVE as f64 });
    }
    let a = 2.0 * sigma;
    let p = 2 * m as u32;
    let n_max = form.n_max();
    let first = ((p as f64 / a).exp().ceil() as usize).max(3).min(n_max);
    let bound = |n: usize| divisor_square_tail_bound(p, a, n as f64);
    let target = |partial: f64| 1e-8 * partial.max(1e-300);
    let lambdas = form.lambdas();
    let mut partial = 0.0;
    let mut n = 0;
    while n < n_max {
        n += 1;
        let lam = lambdas[n - 1];
        let ln = (n as f64).ln();
        partial += lam * lam * ln.powi(p as i32) * (n as f64).powf(-a);
        if n >= first && n.is_power_of_two() && bound(n) <= target(partial) {
            break;
        }
    }
    let c_f = rankin_constant(form, n.max(RANKIN_X_MIN).min(n_max))?.c_f;
    let tail_estimate = c_f * lseries::log_power_tail(p, a, n as f64);
    Ok(TailSum { value: partial + tail_estimate, partial, terms: n, tail_estimate, tail_bound: bound(n) })
}

/// The panel decomposition of a mean-square computation.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentPlan {
    pub m: usize,
    pub sigma: f64,
    pub t_grid: Vec<f64>,
    pub quad: QuadratureSpec,
    pub panel_width: f64,
    /// Panels `[a, b]` covering `[1, T_max]` in ascending order.
    pub panels: Vec<(f64, f64)>,
    /// `ends[i]` = number of panels covering `[1, t_grid[i]]`.
    pub ends: Vec<usize>,
}

pub fn plan(m: usize, sigma: f64, t_grid: &[f64], quad: QuadratureSpec) -> Result<MomentPlan> {
    if m > MAX_MOMENT_DERIVATIVE {
        return Err(Error::OutOfRange { what: "derivative order m", value: m as f64, limit: MAX_MOMENT_DERIVATIVE as f64 });
    }
    if !(0.5..=1.0).contains(&sigma) {
        return Err(Error::Domain(alloc::format!("mean squares need 1/2 ≤ σ ≤ 1, got {sigma}")));
    }
    if t_grid.is_empty() {
        return Err(Error::Domain("empty T grid".into()));
    }
    for w in t_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Domain("T grid must be strictly increasing".into()));
        }
    }
    let t_max = *t_grid.last().unwrap();
    if !(t_grid[0] > 1.0) {
        return Err(Error::Domain(alloc::format!("T must exceed 1, got {}", t_grid[0])));
    }
    if !(t_max <= T_MAX) {
        return Err(Error::OutOfRange { what: "T (desk-scale cap)", value: t_max, limit: T_MAX });
    }
    if quad.nodes_per_panel < 2 || quad.check_nodes < 1 || !(quad.max_panel_width > 0.0) {
        return Err(Error::Domain("quadrature needs ≥ 2 nodes, ≥ 1 check node and a positive panel width".into()));
    }
    let h = quad.panel_width(t_max);
    let mut cuts: Vec<f64> = t_grid.to_vec();
    if AUTO_ORACLE_T_MAX > 1.0 && AUTO_ORACLE_T_MAX < t_max {
        cuts.push(AUTO_ORACLE_T_MAX);
    }
    let lattice = ((t_max - 1.0) / h).ceil() as usize;
    for k in 1..lattice {
        cuts.push(1.0 + k as f64 * h);
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    let mut panels = Vec::with_capacity(cuts.len());
    let mut ends = Vec::with_capacity(t_grid.len());
    let mut lo = 1.0;
    for &c in &cuts {
        if c > t_max * (1.0 + 1e-15) {
            break;
        }
        panels.push((lo, c));
        if t_grid.iter().any(|&t| (t - c).abs() <= 1e-12 * t) {
            ends.push(panels.len());
        }
        lo = c;
    }
    Ok(MomentPlan { m, sigma, t_grid: t_grid.to_vec(), quad, panel_width: h, panels, ends })
}

/// Integrals of one panel by the fine and the companion rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelResult {
    pub fine: f64,
    pub coarse: f64,
    /// Evaluations by method: dirichlet, oracle, afe_sharp, afe_smoothed.
    pub method_counts: [usize; 4],
}

fn method_slot(m: Method) -> usize {
    match m {
        Method::Dirichlet => 0,
        Method::Oracle => 1,
        Method::AfeSharp => 2,
        Method::AfeSmoothed | Method::Auto => 3,
    }
}

fn integrand(form: &CuspForm, m: usize, sigma: f64, t: f64, counts: &mut [usize; 4]) -> Result<f64> {
    let r = lseries::eval(&EvalRequest::new(form, m, Complex64::new(sigma, t)))?;
    counts[method_slot(r.method)] += 1;
    Ok(r.value.norm_sqr())
}

fn gl_panel(form: &CuspForm, m: usize, sigma: f64, a: f64, b: f64, n: usize, counts: &mut [usize; 4]) -> Result<f64> {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut total = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        total += wi * integrand(form, m, sigma, mid + half * xi, counts)?;
    }
    Ok(total * half)
}

pub fn evaluate_panel(form: &CuspForm, plan: &MomentPlan, index: usize) -> Result<PanelResult> {
    let (a, b) = *plan.panels.get(index).ok_or(Error::OutOfRange {
        what: "panel index",
        value: index as f64,
        limit: plan.panels.len() as f64,
    })?;
    let mut counts = [0; 4];
    let fine = gl_panel(form, plan.m, plan.sigma, a, b, plan.quad.nodes_per_panel, &mut counts)?;
    let coarse = gl_panel(form, plan.m, plan.sigma, a, b, plan.quad.check_nodes, &mut counts)?;
    Ok(PanelResult { fine, coarse, method_counts: counts })
}

/// `∫₀¹ |L^(m)(σ+it)|² dt` by 16-point Gauss–Legendre on oracle values.
pub fn head_integral(form: &CuspForm, m: usize, sigma: f64) -> Result<f64> {
    let mut counts = [0; 4];
    gl_panel(form, m, sigma, 0.0, 1.0, 16, &mut counts)
}

/// Which case of the asymptotic main term a report compares with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prediction {
    /// `A_{f,m} T (log T)^{2m+1}` on the critical line.
    CriticalLine { a_fm: f64, c_f: f64 },
    /// `T Σ |λ(n)|²(log n)^{2m} n^{−2σ}` for `σ > 1/2`.
    TailSum(TailSum),
}

impl Prediction {
    pub fn for_form(form: &CuspForm, m: usize, sigma: f64) -> Result<Self> {
        if sigma == 0.5 {
            let x = form.n_max().min(crate::forms::DEFAULT_N_MAX);
            let c_f = rankin_constant(form, x)?.c_f;
            Ok(Prediction::CriticalLine { a_fm: a_fm(m, c_f)?, c_f })
        } else {
            Ok(Prediction::TailSum(tail_sum(form, m, sigma)?))
        }
    }

    pub fn at(&self, m: usize, t: f64) -> f64 {
        match self {
            Prediction::CriticalLine { a_fm, .. } => a_fm * t * t.ln().powi(2 * m as i32 + 1),
            Prediction::TailSum(s) => t * s.value,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Prediction::CriticalLine { .. } => "A_fm*T*log(T)^(2m+1)",
            Prediction::TailSum(_) => "T*tail_sum",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub weight: u32,
    pub m: usize,
    pub sigma: f64,
    pub t_grid: Vec<f64>,
    pub i_values: Vec<f64>,
    pub predictions: Vec<f64>,
    pub ratios: Vec<f64>,
    pub prediction: Prediction,
    /// `∫₀¹` part of every `I(T)`.
    pub head: f64,
    pub panel_width: f64,
    pub nodes_per_panel: usize,
    pub check_nodes: usize,
    pub panels: usize,
    /// Sum over panels of `|fine − companion|`.
    pub refinement_gap: f64,
    /// Integrand evaluations by method: dirichlet, oracle, afe_sharp, afe_smoothed.
    pub method_counts: [usize; 4],
}

/// Sums panel results in ascending order and attaches the predictions.
pub fn assemble(form: &CuspForm, plan: &MomentPlan, head: f64, results: &[PanelResult]) -> Result<MomentReport> {
    if results.len() != plan.panels.len() {
        return Err(Error::Domain(alloc::format!("{} panel results for {} panels", results.len(), plan.panels.len())));
    }
    let prediction = Prediction::for_form(form, plan.m, plan.sigma)?;
    let mut total = head;
    let mut gap = 0.0;
    let mut counts = [0; 4];
    let mut i_values = Vec::with_capacity(plan.ends.len());
    let mut next = 0;
    for (i, r) in results.iter().enumerate() {
        total += r.fine;
        gap += (r.fine - r.coarse).abs();
        for (c, v) in counts.iter_mut().zip(&r.method_counts) {
            *c += v;
        }
        if gap > plan.quad.refinement_tol * total {
            let (a, b) = plan.panels[i];
            return Err(Error::NoConvergence {
                routine: "mean-square quadrature",
                detail: alloc::format!("fine and companion rules differ by {gap:e} against running total {total:e} at panel [{a}, {b}]"),
            });
        }
        while next < plan.ends.len() && plan.ends[next] == i + 1 {
            i_values.push(total);
            next += 1;
        }
    }
    let predictions: Vec<f64> = plan.t_grid.iter().map(|&t| prediction.at(plan.m, t)).collect();
    let ratios = i_values.iter().zip(&predictions).map(|(i, p)| i / p).collect();
    Ok(MomentReport {
        weight: form.weight(),
        m: plan.m,
        sigma: plan.sigma,
        t_grid: plan.t_grid.clone(),
        i_values,
        predictions,
        ratios,
        prediction,
        head,
        panel_width: plan.panel_width,
        nodes_per_panel: plan.quad.nodes_per_panel,
        check_nodes: plan.quad.check_nodes,
        panels: plan.panels.len(),
        refinement_gap: gap,
        method_counts: counts,
    })
}

/// `I(T)` at every grid height, panels evaluated sequentially.
pub fn moment_report(form: &CuspForm, m: usize, sigma: f64, t_grid: &[f64], quad: QuadratureSpec) -> Result<MomentReport> {
    let plan = plan(m, sigma, t_grid, quad)?;
    let head = head_integral(form, m, sigma)?;
    let results = (0..plan.panels.len()).map(|i| evaluate_panel(form, &plan, i)).collect::<Result<Vec<_>>>()?;
    assemble(form, &plan, head, &results)
}

/// `I(T)` for a single height.
pub fn second_moment(form: &CuspForm, m: usize, sigma: f64, t: f64, quad: QuadratureSpec) -> Result<MomentReport> {
    moment_report(form, m, sigma, &[t], quad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefactors() {
        assert_eq!(a_fm_prefactor(0).unwrap(), (2, 1));
        assert_eq!(a_fm_prefactor(1).unwrap(), (8, 3));
        assert_eq!(a_fm_prefactor(2).unwrap(), (32, 5));
        assert!(a_fm(0, 0.0).is_err());
    }

    #[test]
    fn plan_cuts_at_grid_and_switch() {
        let p = plan(0, 0.75, &[250.0, 500.0], QuadratureSpec::default()).unwrap();
        assert_eq!(p.panel_width, 0.25);
        assert_eq!(p.panels.first().unwrap().0, 1.0);
        assert_eq!(p.panels.last().unwrap().1, 500.0);
        for w in p.panels.windows(2) {
            assert_eq!(w[0].1, w[1].0);
            assert!(w[0].1 - w[0].0 <= 0.25 + 1e-12);
        }
        assert!(p.panels.iter().any(|&(_, b)| b == 300.0));
        assert_eq!(p.ends.len(), 2);
        assert_eq!(p.panels[p.ends[0] - 1].1, 250.0);
        assert!(plan(0, 0.75, &[2500.0], QuadratureSpec::default()).is_err());
        assert!(plan(3, 0.75, &[250.0], QuadratureSpec::default()).is_err());
        assert!(plan(0, 0.4, &[250.0], QuadratureSpec::default()).is_err());
        assert!(plan(0, 0.75, &[500.0, 250.0], QuadratureSpec::default()).is_err());
    }

    #[test]
    fn divisor_square_majorant_holds_for_small_x() {
        let d = crate::forms::divisor_counts(1 << 16);
        let mut sum = 0.0;
        for (n, &dn) in d.iter().enumerate().skip(1) {
            sum += (dn as f64).powi(2);
            let x = n as f64;
            assert!(sum <= x * (x.ln() + 1.0).powi(3), "n = {n}");
        }
    }
}
