//! The based loop group `ΩSU(2)` with its `T × S¹` action: isotropy weights,
//! polarization cones and signs, regularized Euler classes, the truncated
//! Picken hyperfunction and the Duistermaat–Heckman integrand.
//!
//! Coordinates are `(z₁, z₂)`, dual to the coroot of `T` and the rotation
//! generator normalized so the fixed loop `γ_n` has moment `(n, n²/2)`.

mod fixed_loop;

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

pub use fixed_loop::{
    classify_subtorus, fixed_loop_from_modes, solve_fixed_loop, verify_fixed_loop, FixedLoopReport, FixedLoopSU2,
    Levi, Mode,
};

use crate::cone::{polarize, ConeError, ConvexCone, PolarizedWeightSet, Weight};
use crate::expr::{EvalError, Expr, C64};
use crate::fourier::{contour_integral_nd, mixed_partition_2d, ContourConfig, FourierError, Integral};
use crate::hyperfunction::{BoundaryValueTerm, Hyperfunction, HyperfunctionError, TermSequence};
use crate::rational::{int, rat, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LoopError {
    #[error("m = 0 generates only the torus action; the fixed-point problem is trivial")]
    TrivialCase,
    #[error("no periodic solution for n/m = {n}/{m}, A = {a}, beta'(0) = {b}: {reason}")]
    NoPeriodicSolution { n: i64, m: i64, a: f64, b: C64, reason: String },
    #[error("inconsistent mode pair: {0}")]
    InconsistentModes(String),
    #[error("unknown partition piece {0:?}")]
    UnknownPiece(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Hyperfunction(#[from] HyperfunctionError),
    #[error(transparent)]
    Fourier(#[from] FourierError),
}

/// Fixed point `γ_n(θ) = diag(e^{inθ}, e^{-inθ})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LoopFixedPoint {
    pub n: i64,
}

impl LoopFixedPoint {
    /// `μ(γ_n) = (n, n²/2)`.
    pub fn moment_exact(&self) -> [Rational; 2] {
        [int(self.n), rat(self.n * self.n, 2)]
    }

    pub fn moment(&self) -> [f64; 2] {
        [self.n as f64, (self.n * self.n) as f64 / 2.0]
    }
}

/// The polarization `ξ = (1/4, 1)`.
pub fn standard_polarization() -> Vec<Rational> {
    vec![rat(1, 4), int(1)]
}

/// `λ_h^{(k)}` (twice), `λ_e^{(k)}`, `λ_f^{(k)}` at level `k`, as coefficient
/// vectors on `(z₁, z₂)`.
pub fn level_weights(n: i64, k: i64) -> [Weight; 4] {
    [
        Weight::from_ints(&[0, k]),
        Weight::from_ints(&[0, k]),
        Weight::from_ints(&[2, k + 2 * n]),
        Weight::from_ints(&[-2, k - 2 * n]),
    ]
}

/// Isotropy weights at `γ_n` for `k = 1..=k_max`.
pub fn isotropy_weights(n: i64, k_max: u64) -> Vec<Weight> {
    (1..=k_max as i64).flat_map(|k| level_weights(n, k)).collect()
}

/// The weights at `γ_n` up to level `k_max`, polarized by `ξ = (1/4, 1)`.
pub fn polarized_weights(n: i64, k_max: u64) -> Result<PolarizedWeightSet, LoopError> {
    Ok(polarize(&isotropy_weights(n, k_max), &standard_polarization())?)
}

/// `γ₀ = {|y₁| < y₂/2}` for `n = 0`, `γ_{≠0} = γ₀ ∩ {y₁ > 0}` otherwise.
pub fn polarization_cone(n: i64) -> ConvexCone {
    let mut hs = vec![Weight::from_ints(&[2, 1]), Weight::from_ints(&[-2, 1])];
    if n != 0 {
        hs.push(Weight::from_ints(&[1, 0]));
    }
    ConvexCone::new(2, hs).expect("two-dimensional weights")
}

/// `(−1)^{p_n}`: the number of weights negative on `ξ` is `2n` for `n > 0`
/// and `2|n| − 1` for `n < 0`.
pub fn fixed_point_sign(n: i64) -> i8 {
    if n < 0 {
        -1
    } else {
        1
    }
}

/// Exact check of the polarized weights at `γ_n` for levels `1..=k_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolarizationCertificate {
    pub n: i64,
    pub k_max: u64,
    /// Levels `k` with a flipped weight, and which weight (`e` or `f`).
    pub flips: Vec<(u64, char)>,
    pub sign: i8,
    /// The cone cut out by the polarized weights equals `polarization_cone(n)`.
    pub cone_matches: bool,
    /// Every polarized weight is positive on the witness of `polarization_cone(n)`.
    pub positive_on_witness: bool,
    /// No weight flips above level `2|n|` and the level step `(0, 1)` is
    /// positive on the cone, so positivity at `k_max` carries to all `k`.
    pub tail_monotone: bool,
}

impl PolarizationCertificate {
    pub fn holds(&self) -> bool {
        self.sign == fixed_point_sign(self.n) && self.cone_matches && self.positive_on_witness && self.tail_monotone
    }
}

pub fn certify_polarization(n: i64, k_max: u64) -> Result<PolarizationCertificate, LoopError> {
    if k_max == 0 {
        return Err(LoopError::InvalidArgument("k_max must be positive".into()));
    }
    let set = polarized_weights(n, k_max)?;
    let flips = set
        .flipped
        .iter()
        .enumerate()
        .filter(|(_, f)| **f)
        .map(|(i, _)| ((i / 4 + 1) as u64, if i % 4 == 2 { 'e' } else { 'f' }))
        .collect::<Vec<_>>();
    let target = polarization_cone(n);
    let cone_matches = set.cone.same_as(&target)?;
    let witness = target.interior_witness()?;
    let positive_on_witness = set.polarized.iter().all(|w| num_traits::Signed::is_positive(&w.pair(&witness)));
    let step = Weight::from_ints(&[0, 1]);
    let tail_monotone = flips.iter().all(|(k, _)| *k <= 2 * n.unsigned_abs())
        && target.closure_generators()?.iter().all(|g| !num_traits::Signed::is_negative(&step.pair(g.coeffs())));
    Ok(PolarizationCertificate {
        n,
        k_max,
        flips,
        sign: set.sign,
        cone_matches,
        positive_on_witness,
        tail_monotone,
    })
}

fn z1() -> Expr {
    Expr::coord(0)
}

fn z2() -> Expr {
    Expr::coord(1)
}

/// `2π(n + z₁/z₂)`.
fn shifted_ratio(n: i64) -> Expr {
    let w = z1() / z2();
    let inner = if n == 0 { w } else { Expr::real(n as f64) + w };
    2.0 * Expr::pi() * inner
}

/// `Π_{k=1}^{K} (1 − (2(n z₂ + z₁)/(k z₂))²)`.
pub fn truncated_euler_product(n: i64, order: u64) -> Expr {
    Expr::truncated_product(regularized_factor(n), order)
}

/// `λ_e^{(k)} λ_f^{(k)} / (k z₂)²` in the product index `k`.
pub fn regularized_factor(n: i64) -> Expr {
    let a = (2.0 * (Expr::real(n as f64) * z2() + z1())) / (Expr::index() * z2());
    Expr::real(1.0) - a.powi(2)
}

/// `(λ_h^{(k)})² λ_e^{(k)} λ_f^{(k)}` without the `k z₂` normalization.
pub fn unregularized_factor(n: i64) -> Expr {
    let kz2 = Expr::index() * z2();
    let shift = 2.0 * (Expr::real(n as f64) * z2() + z1());
    kz2.powi(2) * (kz2.clone() + shift.clone()) * (kz2 - shift)
}

fn level_cone(n: i64, k: u64) -> ConvexCone {
    let set = polarize(&level_weights(n, k as i64), &standard_polarization()).expect("ξ polarizes every level");
    set.cone
}

/// Factors `b_{γ_k}(λ_e λ_f/(k z₂)²)` with `γ_k` cut out by the polarized
/// level-`k` weights.
pub fn regularized_factor_sequence(n: i64) -> TermSequence {
    TermSequence::new(2, regularized_factor(n), move |k| level_cone(n, k))
}

pub fn unregularized_factor_sequence(n: i64) -> TermSequence {
    TermSequence::new(2, unregularized_factor(n), move |k| level_cone(n, k))
}

/// `sin(2π(n + z₁/z₂)) / (2π(n + z₁/z₂))`.
pub fn euler_closed_form(n: i64) -> Expr {
    shifted_ratio(n).sinc()
}

/// `b_{γ_n}(2π(n + z₁/z₂) / sin(2π(n + z₁/z₂)))`, the reciprocal of the
/// regularized Euler class, written through `sinc` so the removable point
/// `z₁ = −n z₂` evaluates.
pub fn regularized_euler(n: i64) -> Result<BoundaryValueTerm, LoopError> {
    Ok(BoundaryValueTerm::new(euler_closed_form(n).recip(), polarization_cone(n))?)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PickenOptions {
    /// Use `sin(2π(n + z₁/z₂))` in the `n`-th denominator instead of the
    /// common `sin(2π z₁/z₂)`.
    pub per_n_closed_form: bool,
}

/// `e^{i(n z₁ + n² z₂/2)}`.
fn loop_phase(n: i64) -> Expr {
    let [a, b] = LoopFixedPoint { n }.moment();
    (Expr::constant(C64::new(0.0, a)) * z1() + Expr::constant(C64::new(0.0, b)) * z2()).exp()
}

/// `I_n(z) = sign(n) e^{i(n z₁ + n² z₂/2)} 2π(n + z₁/z₂) / sin(2π z₁/z₂)`;
/// for `n = 0` this is `1/sinc(2π z₁/z₂)`.
pub fn picken_summand(n: i64, opts: PickenOptions) -> Expr {
    if n == 0 {
        return shifted_ratio(0).sinc().recip();
    }
    let den = if opts.per_n_closed_form {
        shifted_ratio(n).sin()
    } else {
        shifted_ratio(0).sin()
    };
    let body = loop_phase(n) * shifted_ratio(n) / den;
    if fixed_point_sign(n) < 0 {
        -body
    } else {
        body
    }
}

/// `(2πi)^{-2} [b_{γ≠0}(Σ_{0<|n|≤N} I_n) + b_{γ₀}(I_0)]`.
pub fn picken_omega_su2(truncation: u64, opts: PickenOptions) -> Result<Hyperfunction, LoopError> {
    let norm = Expr::constant(C64::new(0.0, 2.0 * PI).powi(-2));
    let mut terms = Vec::new();
    let nonzero = (1..=truncation as i64)
        .flat_map(|n| [n, -n])
        .map(|n| picken_summand(n, opts))
        .reduce(|a, b| a + b);
    if let Some(sum) = nonzero {
        terms.push(BoundaryValueTerm::new(norm.clone() * sum, polarization_cone(1))?);
    }
    terms.push(BoundaryValueTerm::new(norm * picken_summand(0, opts), polarization_cone(0))?);
    Ok(Hyperfunction::from_terms(2, terms)?)
}

/// Number of fixed points `γ_n` with `|n| ≤ N`.
pub fn summand_count(truncation: u64) -> u64 {
    2 * truncation + 1
}

/// Unit witness of `γ≠0` scaled to length `1/4`; the default contour
/// height for the loop-group integrals.
pub fn default_height() -> [f64; 2] {
    let w = polarization_cone(1).witness_f64().expect("γ≠0 is open");
    let norm = (w[0] * w[0] + w[1] * w[1]).sqrt();
    [0.25 * w[0] / norm, 0.25 * w[1] / norm]
}

/// Bound on `|Σ_{|n|>N} (2πi)^{-2} I_n(x + iy)|` from
/// `|I_n| ≤ 2π(|n| + |w|) e^{|n||y₁| − n² y₂/2} / |sin(2πw)|`.
pub fn tail_bound(truncation: u64, z: [C64; 2]) -> f64 {
    let y = [z[0].im, z[1].im];
    if y[1] <= 0.0 {
        return f64::INFINITY;
    }
    let w = z[0] / z[1];
    let s = (2.0 * PI * w).sin().norm();
    if s == 0.0 {
        return f64::INFINITY;
    }
    let peak = y[0].abs() / y[1];
    let mut total = 0.0;
    let mut n = truncation as f64 + 1.0;
    loop {
        let term = 2.0 * 2.0 * PI * (n + w.norm()) * (n * y[0].abs() - n * n * y[1] / 2.0).exp() / s;
        total += term;
        if n > peak && term < 1e-18 * total.max(f64::MIN_POSITIVE) {
            break;
        }
        if n > 1e7 {
            return f64::INFINITY;
        }
        n += 1.0;
    }
    total / (4.0 * PI * PI)
}

/// Smallest `N` whose tail bound at `z` is below `tol`.
pub fn default_truncation(z: [C64; 2], tol: f64) -> Result<u64, LoopError> {
    (0..100_000u64)
        .find(|&n| tail_bound(n, z) < tol)
        .ok_or_else(|| LoopError::InvalidArgument(format!("no truncation reaches {tol:e} at {z:?}")))
}

/// Truncated Picken hyperfunction evaluated on the wedge, with its
/// convergence certificate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PickenEvaluation {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub truncation: u64,
    pub value: C64,
    /// Value at truncation `2N`.
    pub doubled: C64,
    /// `|value(2N) − value(N)|`.
    pub cauchy: f64,
    pub tail_bound: f64,
    pub certified: bool,
}

fn evaluate_terms(h: &Hyperfunction, z: &[C64]) -> Result<C64, EvalError> {
    h.terms().iter().try_fold(C64::new(0.0, 0.0), |acc, t| Ok(acc + t.expr().evaluate(z)?))
}

/// Evaluates `L_{ΩSU(2)}` truncated at `|n| ≤ N` at `x + iy` (`y ∈ γ≠0`),
/// with `N` chosen from the tail bound unless given.
pub fn picken_eval(
    x: [f64; 2],
    y: [f64; 2],
    tol: f64,
    truncation: Option<u64>,
    opts: PickenOptions,
) -> Result<PickenEvaluation, LoopError> {
    if !(tol > 0.0) {
        return Err(LoopError::InvalidArgument(format!("tolerance {tol}")));
    }
    if !polarization_cone(1).contains_f64(&y) {
        return Err(LoopError::InvalidArgument(format!("height {y:?} is not in the cone γ≠0")));
    }
    let z = [C64::new(x[0], y[0]), C64::new(x[1], y[1])];
    let n = match truncation {
        Some(n) => n,
        None => default_truncation(z, tol)?,
    };
    let value = evaluate_terms(&picken_omega_su2(n, opts)?, &z)?;
    let doubled = evaluate_terms(&picken_omega_su2(2 * n, opts)?, &z)?;
    let cauchy = (doubled - value).norm();
    let bound = tail_bound(n, z);
    Ok(PickenEvaluation {
        x,
        y,
        truncation: n,
        value,
        doubled,
        cauchy,
        tail_bound: bound,
        certified: cauchy < tol && bound < tol,
    })
}

/// `χ` of the named piece of the mixed partition.
fn piece_chi(piece: &str) -> Result<Expr, LoopError> {
    mixed_partition_2d()
        .piece(piece)
        .map(|p| p.chi.clone())
        .ok_or_else(|| LoopError::UnknownPiece(piece.to_string()))
}

/// `e^{−i(ζ₁−n)z₁ − i(ζ₂−n²/2)z₂} · 2π(n + z₁/z₂)/sin(2π z₁/z₂) · χ_piece(z)`
/// as an expression in `z`.
pub fn dh_integrand_expr(n: i64, zeta: [C64; 2], piece: &str) -> Result<Expr, LoopError> {
    let [m1, m2] = LoopFixedPoint { n }.moment();
    let minus_i = C64::new(0.0, -1.0);
    let kernel = (Expr::constant(minus_i * (zeta[0] - m1)) * z1() + Expr::constant(minus_i * (zeta[1] - m2)) * z2()).exp();
    let euler = if n == 0 {
        shifted_ratio(0).sinc().recip()
    } else {
        shifted_ratio(n) / shifted_ratio(0).sin()
    };
    Ok(kernel * euler * piece_chi(piece)?)
}

pub fn dh_integrand(n: i64, zeta: [C64; 2], z: [C64; 2], piece: &str) -> Result<C64, LoopError> {
    Ok(dh_integrand_expr(n, zeta, piece)?.evaluate(&z)?)
}

/// Two iterated contour integrals of the DH integrand at different heights.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DhProbeReport {
    pub n: i64,
    pub piece: String,
    pub zeta: [C64; 2],
    pub heights: [[f64; 2]; 2],
    pub values: [C64; 2],
    pub errors: [f64; 2],
    pub difference: f64,
    /// `difference` within ten times the combined error estimates.
    pub contour_independent: bool,
}

/// Integrates over `R² + i·h` for both heights in `heights`, which must lie
/// in `γ≠0` below the poles of the partition (`y₁ < π`, `y₂ < 1`).
pub fn dh_su2_probe(
    n: i64,
    piece: &str,
    zeta: [C64; 2],
    heights: [[f64; 2]; 2],
    cfg: &ContourConfig,
) -> Result<DhProbeReport, LoopError> {
    for h in &heights {
        if !polarization_cone(1).contains_f64(h) || h[0] >= PI || h[1] >= 1.0 {
            return Err(LoopError::InvalidArgument(format!("height {h:?} leaves the admissible region")));
        }
    }
    let e = dh_integrand_expr(n, zeta, piece)?;
    let run = |h: &[f64; 2]| -> Result<Integral, LoopError> {
        let f = |z: &[C64]| e.evaluate(z).map(|v| (v, 0.0));
        Ok(contour_integral_nd(&f, h, cfg)?)
    };
    let a = run(&heights[0])?;
    let b = run(&heights[1])?;
    let difference = (a.value - b.value).norm();
    Ok(DhProbeReport {
        n,
        piece: piece.to_string(),
        zeta,
        heights,
        values: [a.value, b.value],
        errors: [a.error, b.error],
        difference,
        contour_independent: difference <= 10.0 * (a.error + b.error).max(cfg.tol),
    })
}

/// `|I_n(x + iy)| e^{−ε|x|}` sampled along the ray `x = t·(slope, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlowIncreaseProbe {
    pub n: i64,
    pub slope: f64,
    pub y: [f64; 2],
    pub eps: f64,
    /// `(|x|, |I_n| e^{−ε|x|})`.
    pub samples: Vec<(f64, f64)>,
    pub decays: bool,
}

/// Samples `|t|` up to `reach` on both halves of the ray; `decays` when the
/// weighted modulus over the outer tenth of the ray is below `1e-6` of its
/// maximum.
pub fn slow_increase_probe(n: i64, slope: f64, y: [f64; 2], eps: f64, reach: f64) -> Result<SlowIncreaseProbe, LoopError> {
    if !polarization_cone(n).contains_f64(&y) || !(eps > 0.0) || !(reach > 0.0) {
        return Err(LoopError::InvalidArgument(format!("probe n={n}, y={y:?}, eps={eps}, reach={reach}")));
    }
    let e = picken_summand(n, PickenOptions::default());
    let scale = (1.0 + slope * slope).sqrt();
    let steps = 2000;
    let mut samples = Vec::with_capacity(2 * steps + 1);
    for i in -(steps as i64)..=steps as i64 {
        let r = reach * i as f64 / steps as f64;
        let t = r / scale;
        let z = [C64::new(slope * t, y[0]), C64::new(t, y[1])];
        let v = match e.evaluate(&z) {
            Ok(v) => v.norm(),
            Err(EvalError::Pole(_)) => continue,
            Err(other) => return Err(other.into()),
        };
        samples.push((r.abs(), v * (-eps * r.abs()).exp()));
    }
    let peak = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    let outer = samples.iter().filter(|s| s.0 >= 0.9 * reach).map(|s| s.1).fold(0.0, f64::max);
    Ok(SlowIncreaseProbe {
        n,
        slope,
        y,
        eps,
        decays: peak.is_finite() && outer < 1e-6 * peak,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::GrowthClass;
    use crate::hyperfunction::{infinite_product, ProductOptions};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn weights_at_level_one() {
        let ws = isotropy_weights(1, 1);
        let vals: Vec<f64> = ws.iter().map(|w| w.apply(&[c(1.0, 0.0), c(1.0, 0.0)]).re).collect();
        assert_eq!(vals, vec![1.0, 1.0, 5.0, -3.0]);
        let flips = certify_polarization(1, 10).unwrap().flips;
        assert_eq!(flips, vec![(1, 'f'), (2, 'f')]);
    }

    #[test]
    fn n_zero_weights_are_symmetric() {
        for k in 1..5 {
            let [_, _, e, f] = level_weights(0, k);
            assert_eq!(-&e, Weight::from_ints(&[-2, -k]));
            assert_eq!(f, Weight::from_ints(&[-2, k]));
        }
    }

    #[test]
    fn cones_and_signs() {
        assert!(polarization_cone(-3).same_as(&polarization_cone(7)).unwrap());
        assert!(polarization_cone(1).is_subset_of(&polarization_cone(0)).unwrap());
        assert!(!polarization_cone(0).is_subset_of(&polarization_cone(1)).unwrap());
        for n in -4..=4 {
            let cert = certify_polarization(n, 30).unwrap();
            assert!(cert.holds(), "{cert:?}");
        }
        assert_eq!(fixed_point_sign(0), 1);
        assert_eq!(fixed_point_sign(3), 1);
        assert_eq!(fixed_point_sign(-2), -1);
    }

    #[test]
    fn euler_product_against_sinc() {
        let p = truncated_euler_product(0, 1000).evaluate(&[c(0.25, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((p.re - 2.0 / PI).abs() < 1e-3);
        let p0 = truncated_euler_product(0, 7).evaluate(&[c(0.0, 0.0), c(1.3, 0.2)]).unwrap();
        assert_eq!(p0, c(1.0, 0.0));
        let z = [c(0.1, 0.0), c(1.0, 0.5)];
        let p1 = truncated_euler_product(1, 10_000).evaluate(&z).unwrap();
        let w = 1.0 + z[0] / z[1];
        let closed = (2.0 * PI * w).sin() / (2.0 * PI * w);
        assert!((p1 - closed).norm() < 1e-3);
        assert!((euler_closed_form(1).evaluate(&z).unwrap() - closed).norm() < 1e-14);
    }

    #[test]
    fn regularized_euler_values_and_poles() {
        let t = regularized_euler(0).unwrap();
        assert_eq!(*t.growth(), GrowthClass::SlowlyIncreasing);
        assert!((t.expr().evaluate(&[c(0.0, 0.0), c(1.0, 0.3)]).unwrap() - 1.0).norm() < 1e-15);
        let r1 = regularized_euler(1).unwrap();
        assert!(matches!(r1.expr().evaluate(&[c(0.5, 0.0), c(1.0, 0.0)]), Err(EvalError::Pole(_))));
        let z = [c(0.25, 0.1), c(1.0, 0.0)];
        let prod = truncated_euler_product(0, 10_000).evaluate(&z).unwrap();
        assert!((t.expr().evaluate(&z).unwrap() * prod - 1.0).norm() < 1e-3);
    }

    #[test]
    fn regularized_product_converges_and_raw_one_does_not() {
        let ok = infinite_product(&regularized_factor_sequence(1), 2000, &ProductOptions::default()).unwrap();
        assert!(ok.term.cone().same_as(&polarization_cone(1)).unwrap());
        let bad = infinite_product(&unregularized_factor_sequence(1), 200, &ProductOptions::default());
        assert!(matches!(bad, Err(HyperfunctionError::ConvergenceError { .. })), "{bad:?}");
    }

    #[test]
    fn picken_structure() {
        let h0 = picken_omega_su2(0, PickenOptions::default()).unwrap();
        assert_eq!(h0.terms().len(), 1);
        let h3 = picken_omega_su2(3, PickenOptions::default()).unwrap();
        assert_eq!(h3.terms().len(), 2);
        assert_eq!(summand_count(3), 7);
        for t in h3.terms() {
            assert_eq!(*t.growth(), GrowthClass::SlowlyIncreasing, "{t:?}");
        }
        let per_n = picken_omega_su2(3, PickenOptions { per_n_closed_form: true }).unwrap();
        let z = [c(0.13, 0.05), c(1.7, 0.3)];
        let a = evaluate_terms(&h3, &z).unwrap();
        let b = evaluate_terms(&per_n, &z).unwrap();
        assert!((a - b).norm() < 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn picken_evaluation_is_certified() {
        let r = picken_eval([0.13, 1.7], default_height(), 1e-6, None, PickenOptions::default()).unwrap();
        assert!(r.certified, "{r:?}");
        assert!(picken_eval([0.0, 0.0], [-0.1, 1.0], 1e-6, None, PickenOptions::default()).is_err());
    }

    #[test]
    fn dh_integrand_factorizes() {
        let zeta = [c(0.0, 0.0), c(0.0, 0.0)];
        // z₂ = i is a pole of the partition; the same ratio at half height.
        let z = [c(0.0, 0.125), c(0.0, 0.5)];
        let v = dh_integrand(0, zeta, z, "++").unwrap();
        let chi = piece_chi("++").unwrap().evaluate(&z).unwrap();
        let euler = regularized_euler(0).unwrap().expr().evaluate(&z).unwrap();
        assert!((v - euler * chi).norm() < 1e-14);
        let z = [c(0.25, 0.1), c(1.0, 0.0)];
        for piece in ["--", "+-", "-+", "++"] {
            assert!(dh_integrand(1, [c(0.3, 0.1), c(0.2, 0.0)], z, piece).unwrap().norm().is_finite());
        }
        assert!(matches!(dh_integrand(0, zeta, z, "+0"), Err(LoopError::UnknownPiece(_))));
    }

    #[test]
    fn slow_increase_along_a_ray() {
        let p = slow_increase_probe(1, 0.3, default_height(), 0.1, 1000.0).unwrap();
        assert!(p.decays);
    }
}
