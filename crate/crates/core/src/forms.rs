//! Level-one normalized Hecke eigenforms with one-dimensional cusp-form
//! spaces, built exactly from the eta product and Eisenstein series.
//!
//! `Δ = q·∏(1−q^n)^24` is obtained as `q·(∏(1−q^n)^3)^8`, where the cube has
//! the sparse Jacobi expansion `Σ (−1)^j (2j+1) q^{j(j+1)/2}`. Weights 16–26
//! multiply `Δ` by `E4`, `E6`. All products run modulo several NTT primes and
//! are recombined with the Chinese remainder theorem into exact integers.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint, Sign};
use num_complex::Complex64;
use num_integer::Integer;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{One, ToPrimitive, Zero};

use crate::ntt::{self, Field};
use crate::{Error, Result};

/// Weights `k` with `dim S_k(SL2(Z)) = 1`.
pub const SUPPORTED_WEIGHTS: [u32; 6] = [12, 16, 18, 20, 22, 26];

/// Largest coefficient table the exact builder can produce.
pub const MAX_COEFFICIENTS: usize = 1 << (ntt::MAX_LOG_LEN - 1);

/// Default table size used by the cache and the CLI.
pub const DEFAULT_N_MAX: usize = 1 << 20;

/// A normalized Hecke eigenform with a dense coefficient table.
#[derive(Debug, Clone, PartialEq)]
pub struct CuspForm {
    weight: u32,
    /// `coeffs[n-1] = a_f(n)`.
    coeffs: Vec<BigInt>,
    /// `lambda[n-1] = a_f(n) / n^((k-1)/2)`.
    lambda: Vec<f64>,
}

impl CuspForm {
    /// Wraps an externally supplied coefficient table (for example one read
    /// from a cache file). Only `a(1) = 1` is checked; use [`verify_hecke`]
    /// for the full eigenform identities.
    pub fn from_coefficients(weight: u32, coeffs: Vec<BigInt>) -> Result<Self> {
        if !SUPPORTED_WEIGHTS.contains(&weight) {
            return Err(Error::UnsupportedWeight(weight));
        }
        if coeffs.len() < 2 {
            return Err(Error::OutOfRange { what: "n_max", value: coeffs.len() as f64, limit: 2.0 });
        }
        if !coeffs[0].is_one() {
            return Err(Error::Domain(alloc::format!("a(1) = {} but must be 1", coeffs[0])));
        }
        let lambda = coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| normalize(a, (i + 1) as u64, weight))
            .collect();
        Ok(CuspForm { weight, coeffs, lambda })
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len()
    }

    /// `(k-1)/2`.
    pub fn half_weight_shift(&self) -> f64 {
        (self.weight as f64 - 1.0) / 2.0
    }

    /// Exact coefficient `a_f(n)`.
    pub fn coefficient(&self, n: usize) -> Result<&BigInt> {
        self.check_index(n)?;
        Ok(&self.coeffs[n - 1])
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// `lambda[n-1] = λ_f(n)`; the slice covers `1..=n_max`.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    /// `λ_f(n) = a_f(n)/n^((k-1)/2)`.
    pub fn lambda(&self, n: usize) -> Result<f64> {
        self.check_index(n)?;
        Ok(self.lambda[n - 1])
    }

    /// Roots `(α, β)` of `X² − λ_f(p)X + 1`.
    pub fn satake_params(&self, p: usize) -> Result<(Complex64, Complex64)> {
        self.check_index(p)?;
        if !ntt::is_prime_u64(p as u64) {
            return Err(Error::Domain(alloc::format!("{p} is not prime")));
        }
        Ok(quadratic_unit_roots(self.lambda[p - 1]))
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.coeffs.len() {
            return Err(Error::OutOfRange { what: "n", value: n as f64, limit: self.coeffs.len() as f64 });
        }
        Ok(())
    }
}

/// Roots of `X² − λX + 1`, unit-modulus conjugates when `|λ| ≤ 2`.
pub fn quadratic_unit_roots(lambda: f64) -> (Complex64, Complex64) {
    let disc = lambda * lambda - 4.0;
    if disc <= 0.0 {
        let im = (-disc).sqrt() / 2.0;
        (Complex64::new(lambda / 2.0, im), Complex64::new(lambda / 2.0, -im))
    } else {
        // Avoid cancellation: take the larger root first, then use αβ = 1.
        let big = (lambda + lambda.signum() * disc.sqrt()) / 2.0;
        (Complex64::new(big, 0.0), Complex64::new(1.0 / big, 0.0))
    }
}

/// `a / n^((k-1)/2)` in binary64 (three correctly rounded steps).
fn normalize(a: &BigInt, n: u64, weight: u32) -> f64 {
    let e = weight / 2 - 1;
    let num = a.to_f64().unwrap_or(f64::NAN);
    num / pow_as_f64(n, e) / (n as f64).sqrt()
}

fn pow_as_f64(n: u64, e: u32) -> f64 {
    let bits = 64 - n.leading_zeros();
    if bits * e <= 127 {
        (n as u128).pow(e) as f64
    } else {
        BigUint::from(n).pow(e).to_f64().unwrap_or(f64::INFINITY)
    }
}

fn eisenstein_exponents(weight: u32) -> Result<(u32, u32)> {
    Ok(match weight {
        12 => (0, 0),
        16 => (1, 0),
        18 => (0, 1),
        20 => (2, 0),
        22 => (1, 1),
        26 => (2, 1),
        k => return Err(Error::UnsupportedWeight(k)),
    })
}

/// `σ_j(n)` for `n < len`, exactly (index 0 unused).
fn divisor_power_sums(len: usize, j: u32) -> Vec<u128> {
    let mut s = vec![0u128; len];
    for d in 1..len {
        let dj = (d as u128).pow(j);
        let mut m = d;
        while m < len {
            s[m] += dj;
            m += d;
        }
    }
    s
}

/// Builds the normalized eigenform of the given weight with coefficients
/// `a_f(1..=n_max)`.
pub fn build_eigenform(weight: u32, n_max: usize) -> Result<CuspForm> {
    let (e4_pow, e6_pow) = eisenstein_exponents(weight)?;
    if n_max < 2 {
        return Err(Error::OutOfRange { what: "n_max", value: n_max as f64, limit: 2.0 });
    }
    if n_max > MAX_COEFFICIENTS {
        return Err(Error::OutOfRange {
            what: "n_max",
            value: n_max as f64,
            limit: MAX_COEFFICIENTS as f64,
        });
    }
    let len = n_max; // series g with f = q·g, a_f(n) = g[n-1]

    // |a(n)| ≤ d(n) n^((k-1)/2) ≤ 2 n^(k/2); need a modulus above twice that.
    let needed_bits = 2.0 + (weight as f64 / 2.0) * (n_max as f64).log2() + 2.0;
    let log_len = (2 * len - 1).next_power_of_two().trailing_zeros();
    let mut candidates = ntt::transform_primes(log_len);
    let mut primes = Vec::new();
    let mut bits = 0.0;
    while bits < needed_bits {
        let p = candidates.next().ok_or(Error::OutOfRange { what: "coefficient bits", value: needed_bits, limit: bits })?;
        bits += (p as f64).log2();
        primes.push(p);
    }
    // One extra prime only checks the reconstruction.
    primes.push(candidates.next().ok_or(Error::OutOfRange { what: "coefficient bits", value: needed_bits, limit: bits })?);

    let sigma3 = (e4_pow > 0).then(|| divisor_power_sums(len, 3));
    let sigma5 = (e6_pow > 0).then(|| divisor_power_sums(len, 5));

    let residues: Vec<Vec<u32>> = primes
        .iter()
        .map(|&p| {
            let f = Field::new(p);
            let mut cube = vec![0u32; len];
            let mut j = 0usize;
            while j * (j + 1) / 2 < len {
                let c = if j % 2 == 0 { 2 * j as i64 + 1 } else { -(2 * j as i64 + 1) };
                cube[j * (j + 1) / 2] = f.from_i64(c);
                j += 1;
            }
            let mut g = cube;
            for _ in 0..3 {
                g = f.mul_trunc(&g, &g, len);
            }
            let eis = |sigma: &[u128], c: i64| -> Vec<u32> {
                let p = f.p as u128;
                let cm = f.from_i64(c);
                let mut e: Vec<u32> =
                    sigma.iter().map(|&s| f.mul(cm, f.to_mont((s % p) as u32))).collect();
                e[0] = f.to_mont(1);
                e
            };
            if let Some(s3) = &sigma3 {
                let e4 = eis(s3, 240);
                for _ in 0..e4_pow {
                    g = f.mul_trunc(&g, &e4, len);
                }
            }
            if let Some(s5) = &sigma5 {
                let e6 = eis(s5, -504);
                for _ in 0..e6_pow {
                    g = f.mul_trunc(&g, &e6, len);
                }
            }
            g.into_iter().map(|x| f.from_mont(x)).collect()
        })
        .collect();

    let coeffs = crt_reconstruct(&primes, &residues)?;
    CuspForm::from_coefficients(weight, coeffs)
}

/// Garner reconstruction into the symmetric range, validated against the
/// last prime.
fn crt_reconstruct(primes: &[u32], residues: &[Vec<u32>]) -> Result<Vec<BigInt>> {
    let r = primes.len() - 1;
    let check = primes[r] as u64;
    let ps: Vec<u64> = primes[..r].iter().map(|&p| p as u64).collect();
    // inv[i] = (p_0 ⋯ p_{i-1})^{-1} mod p_i
    let inv: Vec<u64> = (0..r)
        .map(|i| {
            let prod = ps[..i].iter().fold(1u64, |acc, &q| acc * (q % ps[i]) % ps[i]);
            mod_inverse(prod, ps[i])
        })
        .collect();
    let modulus: BigUint = ps.iter().fold(BigUint::one(), |acc, &q| acc * q);
    let half = &modulus >> 1u32;
    let modulus = BigInt::from_biguint(Sign::Plus, modulus);
    let half = BigInt::from_biguint(Sign::Plus, half);

    let len = residues[0].len();
    let mut out = Vec::with_capacity(len);
    let mut digits = vec![0u64; r];
    for n in 0..len {
        for i in 0..r {
            let p = ps[i];
            let mut acc = 0u64;
            let mut mult = 1u64;
            for j in 0..i {
                acc = (acc + digits[j] * mult) % p;
                mult = mult * (ps[j] % p) % p;
            }
            let x = residues[i][n] as u64;
            digits[i] = (x + p - acc) % p * inv[i] % p;
        }
        let mut value = BigInt::zero();
        for i in (0..r).rev() {
            value = value * ps[i] + digits[i];
        }
        if value > half {
            value -= &modulus;
        }
        let want = residues[r][n] as u64;
        let got = value.mod_floor(&BigInt::from(check)).to_u64().unwrap_or(u64::MAX);
        if got != want {
            return Err(Error::NoConvergence {
                routine: "CRT reconstruction",
                detail: alloc::format!("coefficient {} fails the check prime", n + 1),
            });
        }
        out.push(value);
    }
    Ok(out)
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    let e = num_integer::Integer::extended_gcd(&(a as i64), &(m as i64));
    e.x.rem_euclid(m as i64) as u64
}

/// Smallest prime factor for every `n < len` (`spf[0] = spf[1] = 0`).
pub fn smallest_prime_factors(len: usize) -> Vec<u32> {
    let mut spf = vec![0u32; len];
    for i in 2..len {
        if spf[i] == 0 {
            let mut m = i;
            while m < len {
                if spf[m] == 0 {
                    spf[m] = i as u32;
                }
                m += i;
            }
        }
    }
    spf
}

/// Number of divisors `d(n)` for every `n < len`.
pub fn divisor_counts(len: usize) -> Vec<u32> {
    let mut d = vec![0u32; len];
    for i in 1..len {
        let mut m = i;
        while m < len {
            d[m] += 1;
            m += i;
        }
    }
    d
}

/// Which eigenform identity failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeckeIdentity {
    /// `a(mn) = a(m)a(n)` for coprime `m, n`.
    Multiplicativity { m: usize, n: usize },
    /// `a(p^{r+1}) = a(p)a(p^r) − p^{k−1}a(p^{r−1})`.
    PrimePowerRecursion { p: usize, r: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeckeReport {
    pub n_limit: usize,
    pub identities_checked: usize,
    /// First `n` (in increasing order) at which an identity fails.
    pub first_failure: Option<(usize, HeckeIdentity)>,
}

impl HeckeReport {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Exact check of Hecke multiplicativity and the prime-power recursion for
/// every `n ≤ n_limit`.
pub fn verify_hecke(form: &CuspForm, n_limit: usize) -> Result<HeckeReport> {
    if n_limit > form.n_max() {
        return Err(Error::OutOfRange { what: "n_limit", value: n_limit as f64, limit: form.n_max() as f64 });
    }
    let spf = smallest_prime_factors(n_limit + 1);
    let a = |n: usize| &form.coeffs[n - 1];
    let k1 = form.weight - 1;
    let mut checked = 0;
    for n in 2..=n_limit {
        let p = spf[n] as usize;
        let mut pe = 1usize;
        let mut r = 0u32;
        while (n / pe) % p == 0 {
            pe *= p;
            r += 1;
        }
        let rest = n / pe;
        checked += 1;
        if rest > 1 {
            if a(n) != &(a(pe) * a(rest)) {
                return Ok(HeckeReport {
                    n_limit,
                    identities_checked: checked,
                    first_failure: Some((n, HeckeIdentity::Multiplicativity { m: pe, n: rest })),
                });
            }
        } else if r >= 2 {
            let prev = pe / p;
            let prev2 = prev / p;
            let pk = BigInt::from(p).pow(k1);
            let rhs = a(p) * a(prev) - pk * a(prev2);
            if a(n) != &rhs {
                return Ok(HeckeReport {
                    n_limit,
                    identities_checked: checked,
                    first_failure: Some((n, HeckeIdentity::PrimePowerRecursion { p, r: r - 1 })),
                });
            }
        } else {
            checked -= 1; // primes carry no identity
        }
    }
    Ok(HeckeReport { n_limit, identities_checked: checked, first_failure: None })
}

/// First `n ≤ limit` with `|λ_f(n)| > d(n)` (relative slack `1e-12`), if any.
pub fn deligne_violation(form: &CuspForm, limit: usize) -> Option<usize> {
    let limit = limit.min(form.n_max());
    let d = divisor_counts(limit + 1);
    (1..=limit).find(|&n| form.lambda[n - 1].abs() > d[n] as f64 * (1.0 + 1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Schoolbook expansion of `q·∏(1−q^n)^24`.
    fn delta_by_direct_product(len: usize) -> Vec<i64> {
        let mut poly = vec![0i64; len];
        poly[0] = 1;
        for n in 1..len {
            for _ in 0..24 {
                for i in (n..len).rev() {
                    poly[i] -= poly[i - n];
                }
            }
        }
        let mut out = vec![0i64; len];
        out[1..].copy_from_slice(&poly[..len - 1]);
        out
    }

    #[test]
    fn delta_matches_direct_product() {
        let oracle = delta_by_direct_product(31);
        let form = build_eigenform(12, 30).unwrap();
        for n in 1..=30 {
            assert_eq!(form.coefficient(n).unwrap(), &BigInt::from(oracle[n]), "tau({n})");
        }
        assert_eq!(form.coefficient(2).unwrap(), &BigInt::from(-24));
        assert_eq!(form.coefficient(3).unwrap(), &BigInt::from(252));
        assert_eq!(form.coefficient(6).unwrap(), &BigInt::from(-6048));
    }

    #[test]
    fn weight_14_is_rejected() {
        let err = build_eigenform(14, 10).unwrap_err();
        assert_eq!(err, Error::UnsupportedWeight(14));
        assert!(alloc::format!("{err}").contains("no one-dimensional cusp-form space"));
    }

    #[test]
    fn capacity_is_enforced() {
        assert!(matches!(build_eigenform(12, 1), Err(Error::OutOfRange { .. })));
        assert!(matches!(build_eigenform(12, MAX_COEFFICIENTS + 1), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn lambda_values() {
        let form = build_eigenform(12, 10).unwrap();
        assert_eq!(form.lambda(1).unwrap(), 1.0);
        let l2 = form.lambda(2).unwrap();
        assert!((l2 + 24.0 / 2f64.powf(5.5)).abs() < 1e-15);
        assert!((l2 + 0.530_330_085_9).abs() < 1e-10);
        assert_eq!(form.lambda(4).unwrap(), -0.71875);
        assert!((form.lambda(4).unwrap() - (l2 * l2 - 1.0)).abs() < 1e-15);
        assert!(form.lambda(0).is_err());
        assert!(form.lambda(11).is_err());
    }

    #[test]
    fn satake_roots() {
        let (a, b) = quadratic_unit_roots(2.0);
        assert!((a - 1.0).norm() < 1e-15 && (b - 1.0).norm() < 1e-15);
        let form = build_eigenform(12, 10).unwrap();
        let (a, b) = form.satake_params(2).unwrap();
        assert!(((a + b).re + 0.530_33).abs() < 1e-5);
        assert!((a.norm() - 1.0).abs() < 1e-15 && (b.norm() - 1.0).abs() < 1e-15);
        let (a, b) = form.satake_params(3).unwrap();
        assert!((a * b - 1.0).norm() < 1e-15);
        assert!(form.satake_params(4).is_err());
        let (a, b) = quadratic_unit_roots(2.5);
        assert!((a * b - 1.0).norm() < 1e-15 && (a + b - 2.5).norm() < 1e-15);
    }

    #[test]
    fn hecke_on_delta_and_corrupted_table() {
        let form = build_eigenform(12, 100).unwrap();
        let report = verify_hecke(&form, 100).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(form.coefficient(4).unwrap(), &BigInt::from(576 - 2048));

        let mut coeffs = form.coefficients().to_vec();
        coeffs[5] = -coeffs[5].clone();
        let bad = CuspForm::from_coefficients(12, coeffs).unwrap();
        let report = verify_hecke(&bad, 100).unwrap();
        assert_eq!(report.first_failure.map(|f| f.0), Some(6));
    }

    #[test]
    fn every_weight_is_an_eigenform() {
        for &k in &SUPPORTED_WEIGHTS {
            let form = build_eigenform(k, 300).unwrap();
            assert!(verify_hecke(&form, 300).unwrap().passed(), "weight {k}");
            assert_eq!(deligne_violation(&form, 300), None, "weight {k}");
        }
        // Weight 16 eigenform: a(2) = 216.
        let f16 = build_eigenform(16, 5).unwrap();
        assert_eq!(f16.coefficient(2).unwrap(), &BigInt::from(216));
    }

    #[test]
    fn normalization_is_within_four_ulp() {
        let form = build_eigenform(26, 2000).unwrap();
        for n in [2usize, 3, 97, 1024, 1999] {
            // Exact rational a / n^12 scaled to 80 bits, then the sqrt.
            let a = form.coefficient(n).unwrap().clone();
            let den = BigInt::from(n).pow(12);
            let scaled: BigInt = (a << 200u32) / den;
            let exact = scaled.to_f64().unwrap() / 2f64.powi(200) / (n as f64).sqrt();
            let got = form.lambda(n).unwrap();
            let ulp = exact.abs() * f64::EPSILON;
            assert!((got - exact).abs() <= 4.0 * ulp, "n={n}: {got} vs {exact}");
        }
    }

    #[test]
    fn lambda_is_bit_reproducible() {
        let a = build_eigenform(18, 500).unwrap();
        let b = build_eigenform(18, 500).unwrap();
        assert!(a.lambdas().iter().zip(b.lambdas()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn divisor_tables() {
        let d = divisor_counts(13);
        assert_eq!(&d[1..], &[1, 2, 2, 3, 2, 4, 2, 4, 3, 4, 2, 6]);
        let spf = smallest_prime_factors(10);
        assert_eq!(&spf[2..], &[2, 3, 2, 5, 2, 7, 2, 3]);
    }
}
