//! Truncated Taylor jets `c_k = f^(k)(x₀)/k!` for composing derivatives.

use alloc::vec;
use alloc::vec::Vec;

use crate::special::factorial;

/// Converts derivatives `f^(k)` into Taylor coefficients.
pub fn from_derivatives(d: &[f64]) -> Vec<f64> {
    d.iter().enumerate().map(|(k, v)| v / factorial(k as u32)).collect()
}

/// Converts Taylor coefficients back into derivatives.
pub fn to_derivatives(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().map(|(k, v)| v * factorial(k as u32)).collect()
}

/// Product of two jets, truncated to the shorter length.
pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().min(b.len());
    let mut out = vec![0.0; n];
    for i in 0..n {
        for j in 0..n - i {
            out[i + j] += a[i] * b[j];
        }
    }
    out
}

/// Jet of `f ∘ g` given the jet of `f` at `g(x₀)` and the jet of `g` at `x₀`.
pub fn compose(outer: &[f64], inner: &[f64]) -> Vec<f64> {
    let n = outer.len().min(inner.len());
    let mut h = inner[..n].to_vec();
    h[0] = 0.0;
    let mut out = vec![0.0; n];
    let mut pow = vec![0.0; n];
    pow[0] = 1.0;
    for (k, &c) in outer.iter().take(n).enumerate() {
        if k > 0 {
            pow = mul(&pow, &h);
        }
        for i in 0..n {
            out[i] += c * pow[i];
        }
    }
    out
}

/// Jet of `x ↦ 1/x` at `x₀`.
pub fn reciprocal(x0: f64, n: usize) -> Vec<f64> {
    let inv = 1.0 / x0;
    let mut out = Vec::with_capacity(n);
    let mut c = inv;
    for _ in 0..n {
        out.push(c);
        c *= -inv;
    }
    out
}
