//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use cuspl_core::chifactor::ContourSpec;
use cuspl_core::forms::{self, build_eigenform, deligne_violation, verify_hecke};
use cuspl_core::lseries::{self, afe_sharp, afe_smoothed, dirichlet_eval, functional_eq_residual, oracle_derivative};
use cuspl_core::meanvalue::{self, a_fm_prefactor, rankin_constant, tail_sum};
use cuspl_core::smoothing::make_phi;
use cuspl_core::{ChiContext, Complex64, CuspForm, QuadratureSpec};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = (bool, String);

const N_MAX: usize = forms::MAX_COEFFICIENTS;

fn delta() -> &'static CuspForm {
    static F: OnceLock<CuspForm> = OnceLock::new();
    F.get_or_init(|| build_eigenform(12, N_MAX).expect("weight 12 builds"))
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn uniform(seed: u64) -> impl FnMut() -> f64 {
    let mut rng = StdRng::seed_from_u64(seed);
    move || rng.random::<f64>()
}

fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

/// `q ∏ (1 − q^n)^24` up to `q^limit` in exact integers.
fn tau_eta_product(limit: usize) -> Vec<i128> {
    let mut series = vec![0i128; limit];
    series[0] = 1;
    for n in 1..limit {
        for _ in 0..24 {
            for i in (n..limit).rev() {
                series[i] -= series[i - n];
            }
        }
    }
    series
}

fn coefficients() -> Outcome {
    let f = delta();
    let tau = tau_eta_product(100);
    let mismatches = (1..=100).filter(|&n| f.coefficient(n).unwrap() != &tau[n - 1].into()).count();
    let hecke = verify_hecke(f, 100).unwrap();
    let mut deligne = Vec::new();
    for k in forms::SUPPORTED_WEIGHTS {
        let g = build_eigenform(k, 10_000).unwrap();
        if let Some(n) = deligne_violation(&g, 10_000) {
            deligne.push((k, n));
        }
        if !verify_hecke(&g, 100).unwrap().passed() {
            deligne.push((k, 0));
        }
    }
    (
        mismatches == 0 && hecke.passed() && deligne.is_empty(),
        format!(
            "eta product vs tau(1..100): {mismatches} mismatches; Hecke identities checked {}, failure {:?}; Deligne violations {:?}",
            hecke.identities_checked, hecke.first_failure, deligne
        ),
    )
}

fn chi_identities() -> Outcome {
    let mut worst_fe = 0.0f64;
    let mut worst_mod = 0.0f64;
    for k in forms::SUPPORTED_WEIGHTS {
        let x = ChiContext::for_weight(k).unwrap();
        for sigma in [0.0, 0.25, 0.5, 0.75, 1.0] {
            for t in [5.0, 50.0, 500.0] {
                let s = c(sigma, t);
                worst_fe = worst_fe.max((x.chi(s).unwrap() * x.chi(1.0 - s).unwrap() - 1.0).norm());
            }
        }
        for t in [10.0, 100.0, 1000.0] {
            worst_mod = worst_mod.max((x.chi(c(0.5, t)).unwrap().norm() - 1.0).abs());
        }
    }
    (
        worst_fe <= 1e-10 && worst_mod <= 1e-10,
        format!("max |chi(s)chi(1-s) - 1| = {worst_fe:.2e}, max ||chi(1/2+it)| - 1| = {worst_mod:.2e}"),
    )
}

fn fd_ratio(x: &ChiContext, r: usize, s: Complex64, h: f64) -> Complex64 {
    let binom = |n: usize, k: usize| (0..k).fold(1.0, |b, i| b * (n - i) as f64 / (i + 1) as f64);
    let stencil = |h: f64| {
        let mut acc = c(0.0, 0.0);
        for i in 0..=r {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            acc += x.chi(s + h * (r as f64 / 2.0 - i as f64)).unwrap() * (sign * binom(r, i));
        }
        acc / h.powi(r as i32)
    };
    (stencil(h / 2.0) * 4.0 - stencil(h)) / 3.0 / x.chi(s).unwrap()
}

fn derivative_ratios() -> Outcome {
    let x = ChiContext::for_weight(12).unwrap();
    let s = c(0.5, 40.0);
    let mut fd_worst = 0.0f64;
    for (r, h) in [(1, 1e-2), (2, 1e-2), (3, 2e-2)] {
        let exact = x.chi_log_deriv_ratio(r, s).unwrap();
        fd_worst = fd_worst.max((fd_ratio(&x, r, s, h) - exact).norm() / exact.norm());
    }
    let t = 1000.0;
    let mut asym_worst = 0.0f64;
    for r in 1..=3 {
        let exact = x.chi_log_deriv_ratio(r, c(0.5, t)).unwrap();
        let approx = (-2.0 * (t / (2.0 * PI)).ln()).powi(r as i32);
        asym_worst = asym_worst.max((exact / approx - 1.0).norm());
    }
    (
        fd_worst <= 1e-6 && asym_worst <= 1e-2,
        format!("finite differences at 1/2+40i: max rel err {fd_worst:.2e}; (-2 log(t/2pi))^r at t=1000: max rel dev {asym_worst:.2e}"),
    )
}

fn gamma_identities() -> Outcome {
    let x = ChiContext::for_weight(12).unwrap();
    let cc = x.shift();
    let mut j0 = 0.0f64;
    let mut j1 = 0.0f64;
    for t in [20.0, 50.0, 100.0] {
        let s = c(0.5, t);
        let contour = ContourSpec::for_point(s);
        for r in 0..=2 {
            let g0 = x.gamma_j(0, r, s, 1.0 / t, &contour).unwrap();
            let want0 = x.chi_log_deriv_ratio(r, 1.0 - s).unwrap();
            j0 = j0.max((g0 - want0).norm() / want0.norm().max(1.0));
            let g1 = x.gamma_j(1, r, s, 1.0 / t, &contour).unwrap();
            let want1 = x.chi_log_deriv_ratio(r, 1.0 - s).unwrap()
                - x.chi_log_deriv_ratio(r, 2.0 - s).unwrap() * c(0.0, s.im) / (s + cc - 1.0);
            j1 = j1.max((g1 - want1).norm());
        }
    }
    let ts = [50.0f64, 200.0, 800.0];
    let mut slopes = Vec::new();
    let mut decay_ok = true;
    for j in [2usize, 3] {
        let logs: Vec<f64> = ts
            .iter()
            .map(|&t| {
                let s = c(0.5, t);
                x.gamma_j(j, 0, s, 1.0 / t, &ContourSpec::for_point(s)).unwrap().norm().ln()
            })
            .collect();
        let slope = fit_slope(&ts.map(f64::ln), &logs);
        decay_ok &= slope <= -(j as f64) / 2.0 + 0.15;
        slopes.push(slope);
    }
    (
        j0 <= 1e-6 && j1 <= 1e-6 && decay_ok,
        format!(
            "j=0 identity max err {j0:.2e}; j=1 two-term max err {j1:.2e}; decay exponents j=2: {:.3} (need <= -0.85), j=3: {:.3} (need <= -1.35)",
            slopes[0], slopes[1]
        ),
    )
}

fn k_phi_suite() -> Outcome {
    let phi = make_phi();
    let phi0 = phi.reflect();
    let zero = c(0.0, 0.0);
    let conv = phi.k_phi(zero, 1).unwrap() == c(1.0, 0.0);
    let limit = (1..=3).map(|l| (phi.k_phi_representation(zero, l).unwrap() - 1.0).norm()).fold(0.0, f64::max);
    let mut refl = 0.0f64;
    for w in [c(1.0, 1.0), c(0.5, -2.0), c(-0.5, 0.7), c(2.5, 3.0), c(4.0, -1.0)] {
        refl = refl.max((phi.k_phi(w, 2).unwrap() - phi0.k_phi(-w, 2).unwrap()).norm());
    }
    let mut next = uniform(0x5eed_cafe_f00d_0001);
    let mut depth = 0.0f64;
    let mut count = 0;
    while count < 10 {
        let w = c(-0.9 + 5.9 * next(), -5.0 + 10.0 * next());
        if w.norm() > 5.0 || (w + 1.0).norm() < 0.05 {
            continue;
        }
        depth = depth.max((phi.k_phi(w, 1).unwrap() - phi.k_phi(w, 3).unwrap()).norm());
        count += 1;
    }
    (
        conv && limit <= 1e-8 && refl <= 1e-8 && depth <= 1e-9,
        format!("K(0)=1 by convention: {conv}; depth-l limit err {limit:.2e}; reflection max err {refl:.2e}; depths 1 vs 3 max diff {depth:.2e}"),
    )
}

fn oracle_consistency() -> Outcome {
    let f = delta();
    let mut rel = 0.0f64;
    let mut bound = 0.0f64;
    for s in [c(3.0, 0.0), c(2.0, 7.0)] {
        for m in 0..=2 {
            let d = dirichlet_eval(f, m, s, 1e-12).unwrap();
            let o = oracle_derivative(f, m, s, lseries::CAUCHY_RADIUS, lseries::CAUCHY_NODES).unwrap();
            rel = rel.max((d.value - o.value).norm() / d.value.norm());
            bound = bound.max(d.err_estimate);
        }
    }
    let mut next = uniform(0x0bad_5eed_1234_5678);
    let mut residual = 0.0f64;
    for i in 0..20 {
        let s = c(next(), 10.0 + 90.0 * next());
        residual = residual.max(functional_eq_residual(f, i % 3, s).unwrap());
    }
    (
        rel <= 1e-8 && residual <= 1e-6,
        format!("oracle vs Dirichlet (m<=2) max rel err {rel:.2e} (Dirichlet tail bound {bound:.1e}); max FE residual at 20 points {residual:.2e}"),
    )
}

fn sharp_afe_shape() -> Outcome {
    let f = delta();
    let ts = [50.0f64, 100.0, 200.0, 400.0, 800.0];
    let err = |m: usize, sigma: f64, t: f64| {
        let s = c(sigma, t);
        let a = afe_sharp(f, m, s).unwrap().value;
        let o = oracle_derivative(f, m, s, lseries::CAUCHY_RADIUS, lseries::CAUCHY_NODES).unwrap().value;
        (a - o).norm()
    };
    let e1: Vec<f64> = ts.iter().map(|&t| err(0, 1.0, t)).collect();
    let slope = fit_slope(&ts.map(f64::ln), &e1.iter().map(|e| e.ln()).collect::<Vec<_>>());
    let mut envelope_ok = true;
    let mut detail = String::new();
    for m in 0..=1 {
        let e: Vec<f64> = ts.iter().map(|&t| err(m, 0.5, t)).collect();
        let cst = e[0] / ts[0].ln().powi(m as i32 + 1);
        let worst = e.iter().zip(&ts).map(|(e, t)| e / (cst * t.ln().powi(m as i32 + 1))).fold(0.0, f64::max);
        envelope_ok &= worst <= 1.0;
        detail.push_str(&format!("; sigma=1/2 m={m}: errors {:?}, max err/(c log^{} t) = {worst:.3}", fmt_list(&e), m + 1));
    }
    (slope <= -0.4 && envelope_ok, format!("sigma=1 slope {slope:.3} (need <= -0.4), errors {:?}{detail}", fmt_list(&e1)))
}

fn fmt_list(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| format!("{x:.3e}")).collect()
}

fn smoothed_dominance() -> Outcome {
    let f = delta();
    let t = 100.0;
    let s = c(0.5, t);
    let y = t / (2.0 * PI);
    let phi = make_phi();
    let l0 = lseries::min_depth(12);
    let mut ok = true;
    let mut detail = String::new();
    for m in 0..=1 {
        let o = oracle_derivative(f, m, s, lseries::CAUCHY_RADIUS, lseries::CAUCHY_NODES).unwrap().value;
        let sharp = (afe_sharp(f, m, s).unwrap().value - o).norm();
        let errs: Vec<f64> =
            (l0..=l0 + 4).map(|l| (afe_smoothed(f, m, s, &phi, y, y, l, true).unwrap().value - o).norm()).collect();
        let main = (afe_smoothed(f, m, s, &phi, y, y, l0, false).unwrap().value - o).norm();
        let beats = errs.iter().all(|&e| e < sharp);
        let decreasing = errs.windows(2).filter(|w| w[1] < w[0]).count();
        ok &= beats && decreasing >= 3;
        detail.push_str(&format!(
            "m={m}: sharp {sharp:.3e}, main terms only {main:.3e}, corrected l={l0}..{} {:?} ({decreasing}/4 decreasing); ",
            l0 + 4,
            fmt_list(&errs)
        ));
    }
    (ok, detail.trim_end_matches("; ").to_string())
}

fn moment(m: usize, sigma: f64, grid: &[f64]) -> meanvalue::MomentReport {
    meanvalue::moment_report(delta(), m, sigma, grid, QuadratureSpec::default()).unwrap()
}

fn moment_three_quarters() -> Outcome {
    let grid = [250.0, 500.0, 1000.0];
    let mut ok = true;
    let mut detail = String::new();
    for m in 0..=1 {
        let rep = moment(m, 0.75, &grid);
        let d: Vec<f64> = rep.i_values.iter().zip(&rep.predictions).map(|(i, p)| (i - p).abs()).collect();
        let env = |t: f64| t.sqrt() * t.ln().powi(2 * m as i32);
        let cst = d[0] / env(grid[0]);
        let bounded = d.iter().zip(&grid).skip(1).all(|(d, &t)| *d <= cst * env(t));
        ok &= bounded;
        detail.push_str(&format!(
            "m={m}: |I - T*tail| {:?}, C = {cst:.3e}, bounds {:?}, ratios {:?}; ",
            fmt_list(&d),
            fmt_list(&grid.map(|t| cst * env(t))),
            rep.ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>()
        ));
    }
    (ok, detail.trim_end_matches("; ").to_string())
}

fn moment_critical_line() -> Outcome {
    let grid = [250.0, 1000.0];
    let mut ok = true;
    let mut detail = String::new();
    for (m, lo, hi) in [(0usize, 0.5, 1.6), (1, 0.4, 1.8)] {
        let rep = moment(m, 0.5, &grid);
        let r = &rep.ratios;
        let in_band = r.iter().all(|&x| (lo..=hi).contains(&x));
        let closer = (r[1] - 1.0).abs() < (r[0] - 1.0).abs();
        ok &= in_band && closer;
        detail.push_str(&format!(
            "m={m}: ratios {:.4} (T=250), {:.4} (T=1000), band [{lo}, {hi}] {}, closer at 1000 {}; ",
            r[0],
            r[1],
            if in_band { "ok" } else { "violated" },
            closer
        ));
    }
    (ok, detail.trim_end_matches("; ").to_string())
}

fn rankin_stability() -> Outcome {
    let f = delta();
    let a = rankin_constant(f, 100_000).unwrap();
    let b = rankin_constant(f, 1_000_000).unwrap();
    let rel = (a.c_f / b.c_f - 1.0).abs();
    let positive = a.partial_slopes.iter().chain(&b.partial_slopes).all(|&s| s > 0.0);
    (rel <= 0.02 && positive, format!("c_f(1e5) = {:.6}, c_f(1e6) = {:.6}, rel diff {rel:.2e}, slopes positive {positive}", a.c_f, b.c_f))
}

fn prefactors() -> Outcome {
    let got: Vec<(i128, i128)> = (0..=2).map(|m| a_fm_prefactor(m).unwrap()).collect();
    let ok = got == [(2, 1), (8, 3), (32, 5)];
    let ts = tail_sum(delta(), 0, 1.0).unwrap();
    (ok, format!("A_f,m/C_f = {got:?}; tail_sum(m=0, sigma=1) = {:.6}", ts.value))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_cuspl"))
            .args(args)
            .env("CUSPL_CACHE_DIR", dir.path())
            .output()
            .expect("binary runs")
    };
    let mut csvs = Vec::new();
    for threads in ["1", "2", "3"] {
        let out = dir.path().join(format!("m{threads}.csv"));
        let o = run(&[
            "meanvalue", "--n-max", "8192", "--m", "1", "--sigma", "0.5", "--T-grid", "30,60,90", "--threads", threads, "--out",
            out.to_str().unwrap(),
        ]);
        if !o.status.success() {
            return (false, format!("meanvalue failed: {}", String::from_utf8_lossy(&o.stderr)));
        }
        csvs.push(std::fs::read(&out).unwrap());
    }
    let coeffs: Vec<Vec<u8>> = (0..2).map(|_| run(&["coeffs", "--n-max", "500"]).stdout).collect();
    let ok = csvs.windows(2).all(|w| w[0] == w[1]) && coeffs[0] == coeffs[1];
    (ok, format!("meanvalue CSV identical for threads 1/2/3: {}; coeffs CSV identical: {}", csvs.windows(2).all(|w| w[0] == w[1]), coeffs[0] == coeffs[1]))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("coefficient exactness", coefficients),
        ("chi identities", chi_identities),
        ("derivative ratios", derivative_ratios),
        ("gamma_j identities", gamma_identities),
        ("K_phi suite", k_phi_suite),
        ("oracle consistency", oracle_consistency),
        ("sharp AFE error shape", sharp_afe_shape),
        ("smoothed AFE dominance", smoothed_dominance),
        ("second moment sigma=3/4", moment_three_quarters),
        ("second moment sigma=1/2", moment_critical_line),
        ("Rankin stability", rankin_stability),
        ("A_f,m prefactors", prefactors),
        ("determinism", determinism),
    ];
    let only: Vec<usize> = std::env::var("CUSPL_ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect())
        .unwrap_or_default();
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = check();
        let status = if pass { "PASS" } else { "FAIL" };
        println!("criterion {n} ({name}): {status} [{:.1}s] {detail}", start.elapsed().as_secs_f64());
        if !pass {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
