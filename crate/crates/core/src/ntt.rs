//! Number-theoretic transforms over 31-bit primes `p = c·2^23 + 1`, used to
//! multiply truncated integer power series modulo several primes before
//! Chinese remaindering.

use alloc::vec;
use alloc::vec::Vec;

/// log2 of the largest transform length supported by every prime.
pub(crate) const MAX_LOG_LEN: u32 = 23;

/// Prime field with Montgomery arithmetic (`R = 2^32`).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Field {
    pub p: u32,
    neg_pinv: u32,
    r2: u32,
    /// Primitive root, Montgomery form.
    g: u32,
}

impl Field {
    pub fn new(p: u32) -> Self {
        debug_assert!(p % 2 == 1 && p < (1 << 31));
        // Newton iteration for p^{-1} mod 2^32.
        let mut inv: u32 = 1;
        for _ in 0..5 {
            inv = inv.wrapping_mul(2u32.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r = ((1u64 << 32) % p as u64) as u32;
        let r2 = ((r as u64 * r as u64) % p as u64) as u32;
        let mut f = Field { p, neg_pinv: inv.wrapping_neg(), r2, g: 0 };
        f.g = f.to_mont(primitive_root(p));
        f
    }

    #[inline(always)]
    fn redc(&self, t: u64) -> u32 {
        let m = (t as u32).wrapping_mul(self.neg_pinv);
        let u = ((t + m as u64 * self.p as u64) >> 32) as u32;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline(always)]
    pub fn to_mont(&self, x: u32) -> u32 {
        self.redc(x as u64 * self.r2 as u64)
    }

    #[inline(always)]
    pub fn from_mont(&self, x: u32) -> u32 {
        self.redc(x as u64)
    }

    #[inline(always)]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.redc(a as u64 * b as u64)
    }

    #[inline(always)]
    fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline(always)]
    fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    fn pow(&self, mut base: u32, mut e: u64) -> u32 {
        let mut acc = self.to_mont(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Reduces a signed integer into Montgomery form.
    pub fn from_i64(&self, x: i64) -> u32 {
        let r = x.rem_euclid(self.p as i64) as u32;
        self.to_mont(r)
    }

    fn transform(&self, a: &mut [u32], inverse: bool) {
        let n = a.len();
        debug_assert!(n.is_power_of_two());
        let mut j = 0usize;
        for i in 1..n {
            let mut bit = n >> 1;
            while j & bit != 0 {
                j ^= bit;
                bit >>= 1;
            }
            j |= bit;
            if i < j {
                a.swap(i, j);
            }
        }
        let mut tw = vec![0u32; n / 2];
        let mut len = 2;
        while len <= n {
            let mut w = self.pow(self.g, (self.p as u64 - 1) / len as u64);
            if inverse {
                w = self.pow(w, self.p as u64 - 2);
            }
            let half = len / 2;
            tw[0] = self.to_mont(1);
            for k in 1..half {
                tw[k] = self.mul(tw[k - 1], w);
            }
            for chunk in a.chunks_exact_mut(len) {
                let (lo, hi) = chunk.split_at_mut(half);
                for k in 0..half {
                    let u = lo[k];
                    let v = self.mul(hi[k], tw[k]);
                    lo[k] = self.add(u, v);
                    hi[k] = self.sub(u, v);
                }
            }
            len <<= 1;
        }
        if inverse {
            let inv_n = self.pow(self.to_mont(n as u32 % self.p), self.p as u64 - 2);
            for x in a.iter_mut() {
                *x = self.mul(*x, inv_n);
            }
        }
    }

    /// Product of two series (Montgomery form), truncated to `len` terms.
    pub fn mul_trunc(&self, a: &[u32], b: &[u32], len: usize) -> Vec<u32> {
        let la = a.len().min(len);
        let lb = b.len().min(len);
        let size = (la + lb - 1).next_power_of_two();
        let mut fa = vec![0u32; size];
        fa[..la].copy_from_slice(&a[..la]);
        self.transform(&mut fa, false);
        if core::ptr::eq(a, b) {
            for x in fa.iter_mut() {
                *x = self.mul(*x, *x);
            }
        } else {
            let mut fb = vec![0u32; size];
            fb[..lb].copy_from_slice(&b[..lb]);
            self.transform(&mut fb, false);
            for (x, y) in fa.iter_mut().zip(&fb) {
                *x = self.mul(*x, *y);
            }
        }
        self.transform(&mut fa, true);
        fa.truncate(len);
        fa.resize(len, 0);
        fa
    }
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for `n < 3.4e14`.
pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = x * x % n;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn primitive_root(p: u32) -> u32 {
    let pm1 = p as u64 - 1;
    let mut factors = Vec::new();
    let mut m = pm1;
    let mut q = 2;
    while q * q <= m {
        if m % q == 0 {
            factors.push(q);
            while m % q == 0 {
                m /= q;
            }
        }
        q += 1;
    }
    if m > 1 {
        factors.push(m);
    }
    (2..p as u64)
        .find(|&g| factors.iter().all(|&f| pow_mod(g, pm1 / f, p as u64) != 1))
        .expect("prime field has a primitive root") as u32
}

/// All primes `p < 2^31` with `2^log_len | p − 1`, in decreasing order.
pub(crate) fn transform_primes(log_len: u32) -> impl Iterator<Item = u32> {
    let step = 1u64 << log_len;
    (1..(1u64 << 31) / step)
        .rev()
        .map(move |c| c * step + 1)
        .filter(|&p| p < (1 << 31) && is_prime_u64(p))
        .map(|p| p as u32)
}
