//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines are always printed; exits nonzero if any
//! criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use hyperloc::cone::Weight;
use hyperloc::expr::{Expr, C64};
use hyperloc::fourier::{
    contour_integral_1d, fourier_transform, indicator_pm1, mixed_partition_2d, orthant_partition, residue_sum_1d,
    ContourConfig, PartitionOfUnity, ResidueFamily,
};
use hyperloc::hyperfunction::{
    boundary_evaluate, equality_probe, infinite_product, BoundaryOptions, HyperfunctionError, ProbeOptions, ProductOptions,
    Verdict,
};
use hyperloc::localization::{picken, LocalizationProblem};
use hyperloc::loop_su2::{
    certify_polarization, classify_subtorus, default_height, euler_closed_form, isotropy_weights, picken_eval,
    polarization_cone, slow_increase_probe, solve_fixed_loop, standard_polarization, truncated_euler_product,
    unregularized_factor, unregularized_factor_sequence, verify_fixed_loop, Levi, LoopError, PickenOptions,
};
use hyperloc::rational::{int, rat, Rational};
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Check {
    Check {
        pass,
        detail: detail.into(),
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// S² pipeline reproduces the indicator of `[−1, 1]` to `1e-3` in under 60 s.
fn s2_golden() -> Check {
    let start = Instant::now();
    let l = picken(&LocalizationProblem::builtin_s2()).expect("S² problem is valid");
    let ft = match fourier_transform(&l, &orthant_partition(1), &ContourConfig::default()) {
        Ok(r) => r.hyperfunction,
        Err(e) => return check(false, format!("fourier transform failed: {e}")),
    };
    let opts = BoundaryOptions::halving(3, 8, 3);
    let mut worst: f64 = 0.0;
    for xi in [0.0, 0.5, -0.5, 0.9, -0.9, 1.1, -1.1, 2.0, -2.0] {
        match boundary_evaluate(&ft, &[xi], &opts) {
            Ok(bv) => worst = worst.max((bv.value - indicator_pm1(xi)).norm()),
            Err(e) => return check(false, format!("xi = {xi}: {e}")),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst < 1e-3 && secs < 60.0,
        format!("max |DH - indicator| = {worst:.2e} (tol 1e-3), runtime {secs:.1} s (limit 60 s)"),
    )
}

/// Contour quadrature against the residue closed forms at 50 random `ζ`,
/// and contour-height independence.
fn residue_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let base = ContourConfig::default();
    let mut worst: f64 = 0.0;
    let mut height: f64 = 0.0;
    for i in 0..50 {
        let family = if i % 2 == 0 { ResidueFamily::Minus } else { ResidueFamily::Plus };
        let a = if i % 4 < 2 { 1.0 } else { -1.0 };
        let im = rng.gen_range(0.1..0.9);
        let zeta = c(rng.gen_range(-3.0..3.0), if family == ResidueFamily::Minus { im } else { -im });
        let e = family.integrand(a, zeta);
        let closed = residue_sum_1d(a, family).and_then(|f| Ok(f.evaluate(&[zeta])?));
        let (Ok(low), Ok(high), Ok(closed)) = (
            contour_integral_1d(&e, -0.1, &base),
            contour_integral_1d(&e, -0.3, &base),
            closed,
        ) else {
            return check(false, format!("evaluation failed at zeta = {zeta}"));
        };
        worst = worst.max((low.value - closed).norm());
        height = height.max((low.value - high.value).norm());
    }
    check(
        worst < 1e-6 && height < 1e-6,
        format!("max |contour - residue| = {worst:.2e}, max |delta 0.1 - delta 0.3| = {height:.2e} (tol 1e-6)"),
    )
}

/// Regularized Euler product at `K = 10⁴` against the sinc closed form on a
/// 100-point grid; the unregularized product's Cauchy estimate grows.
fn euler_class() -> Check {
    let re = [-1.85, -1.4, -1.15, -0.65, -0.2, 0.2, 0.65, 1.15, 1.4, 1.85];
    let mut worst: f64 = 0.0;
    let mut closest: f64 = f64::INFINITY;
    for n in [0i64, 1, -1, 3] {
        let product = truncated_euler_product(n, 10_000);
        let closed = euler_closed_form(n);
        for &x in &re {
            for j in 0..10 {
                let w = c(x, -0.225 + 0.05 * j as f64);
                // Zeros of the closed form sit at w ∈ ½Z \ {−n}.
                let u = w + n as f64;
                let nearest = (2.0 * u.re).round() / 2.0;
                for cand in [nearest - 0.5, nearest, nearest + 0.5] {
                    if cand != 0.0 {
                        closest = closest.min((u - cand).norm());
                    }
                }
                let z = [w, c(1.0, 0.0)];
                match (product.evaluate(&z), closed.evaluate(&z)) {
                    (Ok(p), Ok(q)) => worst = worst.max((p - q).norm()),
                    _ => return check(false, format!("evaluation failed at n = {n}, w = {w}")),
                }
            }
        }
    }
    // Relative Cauchy estimates |P_2K − P_K| / |P_K| of the unregularized
    // product at K = 2, 4, 8, 16 (P_64 overflows a double).
    let z = [c(0.13, 0.05), c(1.7, 0.3)];
    let raw = |k: u64| Expr::truncated_product(unregularized_factor(1), k).evaluate(&z);
    let mut cauchy = Vec::new();
    for k in [2u64, 4, 8, 16] {
        match (raw(k), raw(2 * k)) {
            (Ok(a), Ok(b)) => cauchy.push((b - a).norm() / a.norm()),
            (a, b) => return check(false, format!("unregularized product evaluation failed: {a:?} {b:?}")),
        }
    }
    let rejected = matches!(
        infinite_product(&unregularized_factor_sequence(1), 200, &ProductOptions::default()),
        Err(HyperfunctionError::ConvergenceError { .. })
    );
    let grows = cauchy.windows(2).all(|w| w[1] > 10.0 * w[0]) && rejected;
    check(
        worst < 1e-3 && closest >= 0.1 && grows,
        format!(
            "max |product - sinc| = {worst:.2e} (tol 1e-3) on 400 points, min zero distance {closest:.2}, \
             unregularized relative Cauchy estimates {:.1e} -> {:.1e} -> {:.1e} -> {:.1e}, rejected: {rejected}",
            cauchy[0], cauchy[1], cauchy[2], cauchy[3]
        ),
    )
}

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Fitted decay rate of every piece along every lattice direction leaving
/// its closed orthant, against `Σ c_i |d_i|` over the leaving axes.
fn decay_fits(p: &PartitionOfUnity, rates: [f64; 2]) -> Result<f64, String> {
    let ts: Vec<f64> = (0..=20).map(|i| 5.0 + 1.5 * i as f64).collect();
    let mut worst: f64 = 0.0;
    for piece in &p.pieces {
        let sigma: Vec<f64> = piece.label.chars().map(|ch| if ch == '+' { 1.0 } else { -1.0 }).collect();
        for d in [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]] {
            let leaving: Vec<usize> = (0..2).filter(|&i| d[i] * sigma[i] < 0.0).collect();
            if leaving.is_empty() {
                continue;
            }
            let expect: f64 = leaving.iter().map(|&i| rates[i] * f64::abs(d[i])).sum();
            let logs = ts
                .iter()
                .map(|&t| piece.chi.evaluate(&[c(t * d[0], 0.0), c(t * d[1], 0.0)]).map(|v| v.norm().ln()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| format!("piece {}: {e}", piece.label))?;
            let fitted = -slope(&ts, &logs);
            worst = worst.max((fitted - expect).abs() / expect);
        }
    }
    Ok(worst)
}

/// Partition sums at 10⁴ random points and decay-rate fits.
fn partitions() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let parts = [orthant_partition(2), mixed_partition_2d()];
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let z = [
            c(rng.gen_range(-40.0..40.0), rng.gen_range(-0.3..0.3)),
            c(rng.gen_range(-40.0..40.0), rng.gen_range(-0.3..0.3)),
        ];
        for p in &parts {
            match p.sum_at(&z) {
                Ok(s) => worst = worst.max((s - 1.0).norm()),
                Err(e) => return check(false, format!("sum failed at {z:?}: {e}")),
            }
        }
    }
    let fits = decay_fits(&parts[0], [1.0, 1.0]).and_then(|a| Ok(a.max(decay_fits(&parts[1], [1.0, PI])?)));
    match fits {
        Ok(fit) => check(
            worst < 1e-13 && fit < 0.02,
            format!("max |sum - 1| = {worst:.2e} (tol 1e-13) at 10^4 points, worst relative decay-rate misfit {fit:.2e} (tol 2e-2)"),
        ),
        Err(e) => check(false, e),
    }
}

/// Cones `γ₀`, `γ≠0` by exact membership; flipped weights and signs for
/// `|n| ≤ 10`, levels `k ≤ 100`.
fn cone_suite() -> Check {
    let mut failures = Vec::new();
    let xi = standard_polarization();
    let grid: Vec<Rational> = (-12..=12).map(|p| rat(p, 4)).collect();
    for n in -10i64..=10 {
        let cone = polarization_cone(n);
        for y1 in &grid {
            for y2 in &grid {
                let inside_gamma0 = (y1.abs() * int(2)) < *y2;
                let expect = inside_gamma0 && (n == 0 || y1.is_positive());
                if cone.contains(&[y1.clone(), y2.clone()]) != expect {
                    failures.push(format!("membership n={n} y=({y1},{y2})"));
                }
            }
        }
        // Weights per level: λ_h twice, λ_e, λ_f; the negative ones on ξ.
        let weights: Vec<Weight> = isotropy_weights(n, 100);
        let negative: Vec<(i64, usize)> = weights
            .iter()
            .enumerate()
            .filter(|(_, w)| w.pair(&xi).is_negative())
            .map(|(i, _)| (i as i64 / 4 + 1, i % 4))
            .collect();
        let expect: Vec<(i64, usize)> = if n > 0 {
            (1..=2 * n).map(|k| (k, 3)).collect()
        } else {
            (1..2 * n.abs()).map(|k| (k, 2)).collect()
        };
        if negative != expect {
            failures.push(format!("flipped weights n={n}: {negative:?}"));
        }
        let sign = if negative.len() % 2 == 0 { 1 } else { -1 };
        match certify_polarization(n, 100) {
            Ok(cert) if cert.holds() && cert.sign == sign => {}
            other => failures.push(format!("certificate n={n}: {other:?}")),
        }
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            "membership on 625 rational points, flipped weights and signs exact for |n| <= 10, k <= 100".to_string()
        } else {
            failures.join("; ")
        },
    )
}

/// Fixed loops for `(1,2)`, `(3,2)`, `(2,1)`; none for `(1,3)`.
fn fixed_loops() -> Check {
    let mut notes = Vec::new();
    let mut pass = true;
    // (n, m, k, k'): A = −n/m + C cos φ, b = C sin φ e^{iψ}, C = |k − k'|/2.
    for (n, m, k, k2) in [(1i64, 2i64, 0i64, 1i64), (3, 2, 1, 2), (2, 1, 1, 3)] {
        let r = n as f64 / m as f64;
        let cc = (k - k2).abs() as f64 / 2.0;
        let (phi, psi) = (1.1, 0.4);
        let a = -r + cc * f64::cos(phi);
        let b = cc * f64::sin(phi) * c(0.0, psi).exp();
        match solve_fixed_loop(n, m, a, b) {
            Ok(l) => {
                let rep = verify_fixed_loop(&l, 512);
                let ode = rep.ode_alpha.max(rep.ode_beta);
                let ok = ode < 1e-8 && rep.unitarity < 1e-10 && l.nonzero_alpha_modes() <= 2;
                pass &= ok;
                notes.push(format!("({n},{m}) ode {ode:.1e} unitarity {:.1e} modes {:?}", rep.unitarity, l.modes()));
            }
            Err(e) => {
                pass = false;
                notes.push(format!("({n},{m}) {e}"));
            }
        }
    }
    let none = matches!(solve_fixed_loop(1, 3, 0.3, c(0.2, 0.1)), Err(LoopError::NoPeriodicSolution { .. }));
    pass &= none;
    notes.push(format!("(1,3) no periodic solution: {none}"));
    let mut levi_ok = true;
    for n in -6i64..=6 {
        for m in 1i64..=6 {
            let half_integer = (2 * n) % m == 0;
            let expect = if half_integer { Levi::LeviIsG } else { Levi::LeviIsT };
            levi_ok &= classify_subtorus(n, m).ok() == Some(expect);
        }
    }
    pass &= levi_ok;
    notes.push(format!("Levi dichotomy on |n| <= 6, 1 <= m <= 6: {levi_ok}"));
    check(pass, notes.join(", "))
}

/// Truncated `ΩSU(2)` Picken sum at five probe points, and equality of the
/// `S²` Picken hyperfunctions for `ξ = ±1`.
fn picken_probes() -> Check {
    let y = default_height();
    let mut worst: f64 = 0.0;
    let mut all = true;
    let mut truncations = Vec::new();
    for x in [[0.13, 1.7], [-0.4, 0.9], [1.2, -0.5], [0.0, 0.0], [2.5, 3.0]] {
        match picken_eval(x, y, 1e-6, None, PickenOptions::default()) {
            Ok(r) => {
                all &= r.certified && r.cauchy < 1e-6;
                worst = worst.max(r.cauchy);
                truncations.push(r.truncation);
            }
            Err(e) => return check(false, format!("x = {x:?}: {e}")),
        }
    }
    let minus = picken(&LocalizationProblem::builtin_s2()).expect("valid");
    let plus = picken(&LocalizationProblem::builtin_s2().with_polarization(vec![int(1)])).expect("valid");
    let probe = equality_probe(&minus, &plus, &[(-2.0, 2.0)], &ProbeOptions::default());
    let equal = matches!(probe.as_ref().map(|p| &p.verdict), Ok(Verdict::ConsistentWithEqual));
    check(
        all && equal,
        format!(
            "max |val(2N) - val(N)| = {worst:.2e} (tol 1e-6) at N = {truncations:?}, S2 xi = +-1 probe: {}",
            if equal { "ConsistentWithEqual" } else { "not equal" }
        ),
    )
}

/// `|I_n| e^{−0.1|Re z|} → 0` along three rays for `n ∈ {0, 1}`.
fn slow_increase() -> Check {
    let y = default_height();
    let mut notes = Vec::new();
    let mut pass = true;
    for n in [0i64, 1] {
        for slope in [-1.0, 0.5, 2.0] {
            match slow_increase_probe(n, slope, y, 0.1, 1000.0) {
                Ok(p) => {
                    pass &= p.decays;
                    if !p.decays {
                        notes.push(format!("n={n} slope {slope} does not decay"));
                    }
                }
                Err(e) => {
                    pass = false;
                    notes.push(format!("n={n} slope {slope}: {e}"));
                }
            }
        }
    }
    if pass {
        notes.push("weighted modulus decays on rays x1 = m x2, m in {-1, 0.5, 2}, n in {0, 1}, to |Re z| = 1000".into());
    }
    check(pass, notes.join("; "))
}

fn main() {
    // `cargo test` passes libtest flags; a listing request gets one entry.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let criteria: [(&str, fn() -> Check); 8] = [
        ("S2 golden test", s2_golden),
        ("closed-form oracle agreement", residue_oracle),
        ("Euler class", euler_class),
        ("partition identities", partitions),
        ("cone suite", cone_suite),
        ("fixed-loop suite", fixed_loops),
        ("OmegaSU(2) Picken evaluation", picken_probes),
        ("slow-increase probes", slow_increase),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = run();
        if !r.pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} [{}] {} ({:.1} s)",
            i + 1,
            if r.pass { "PASS" } else { "FAIL" },
            name,
            r.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {} failed", criteria.len() - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
