//! Fourier transforms of slowly increasing hyperfunctions through holomorphic
//! partitions of unity:
//! `F(b_γ(F)) = Σ_σ b_{-σ°}(∫_{R^n + iy₀} e^{-iζ·z} F(z) χ_σ(z) dz)`, `y₀ ∈ γ`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cone::{ConeError, ConvexCone};
use crate::expr::{EvalError, Expr, NumericFunction, C64};
use crate::growth::GrowthClass;
use crate::hyperfunction::{BoundaryValueTerm, Hyperfunction, HyperfunctionError};
use crate::quadrature::{integrate_line, LineError, LineSettings};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FourierError {
    #[error("pole at {at} lies within {distance:e} of the contour")]
    ContourBlocked { at: C64, distance: f64 },
    #[error("integrand does not decay along coordinate {axis} (radius {radius})")]
    NotIntegrable { axis: usize, radius: f64 },
    #[error("term {term} is not classified as slowly increasing")]
    NotSlowlyIncreasing { term: usize },
    #[error("no closed form for this integrand family: {0}")]
    Unsupported(String),
    #[error("contour offset has {found} components, integrand needs {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid contour settings: {0}")]
    InvalidSettings(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Hyperfunction(#[from] HyperfunctionError),
}

/// One piece `χ_σ` of a partition of unity with its closed cone `σ`
/// (stored through its interior).
#[derive(Clone)]
pub struct PartitionPiece {
    pub label: String,
    pub chi: Expr,
    pub cone: ConvexCone,
}

impl fmt::Debug for PartitionPiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} on {:?}", self.label, self.chi, self.cone)
    }
}

#[derive(Clone, Debug)]
pub struct PartitionOfUnity {
    pub dim: usize,
    pub pieces: Vec<PartitionPiece>,
}

impl PartitionOfUnity {
    pub fn piece(&self, label: &str) -> Option<&PartitionPiece> {
        self.pieces.iter().find(|p| p.label == label)
    }

    /// `Σ_σ χ_σ(z)`.
    pub fn sum_at(&self, z: &[C64]) -> Result<C64, EvalError> {
        self.pieces.iter().try_fold(C64::new(0.0, 0.0), |acc, p| Ok(acc + p.chi.evaluate(z)?))
    }
}

fn sign_label(signs: &[i8]) -> String {
    signs.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
}

/// The `2^n` pieces `χ_σ(z) = Π_i 1/(1 + e^{-σ_i z_i})`, each decaying off
/// the orthant `σ`.
pub fn orthant_partition(n: usize) -> PartitionOfUnity {
    let mut pieces = Vec::with_capacity(1 << n);
    for mask in 0..(1usize << n) {
        let signs: Vec<i8> = (0..n).map(|i| if mask >> i & 1 == 0 { 1 } else { -1 }).collect();
        let chi = Expr::product(
            signs
                .iter()
                .enumerate()
                .map(|(i, &s)| (f64::from(s) * Expr::coord(i)).logistic())
                .collect(),
        );
        pieces.push(PartitionPiece {
            label: sign_label(&signs),
            chi,
            cone: ConvexCone::orthant(&signs),
        });
    }
    PartitionOfUnity { dim: n, pieces }
}

/// `1 = Σ 1/(1+e^{∓z₁}) · 1/(1+e^{∓πz₂})`, pieces in the printed order
/// `(−,−), (+,−), (−,+), (+,+)`.
pub fn mixed_partition_2d() -> PartitionOfUnity {
    let order: [[i8; 2]; 4] = [[-1, -1], [1, -1], [-1, 1], [1, 1]];
    let pieces = order
        .iter()
        .map(|s| {
            let a = (f64::from(s[0]) * Expr::coord(0)).logistic();
            let b = (f64::from(s[1]) * Expr::pi() * Expr::coord(1)).logistic();
            PartitionPiece {
                label: sign_label(s),
                chi: a * b,
                cone: ConvexCone::orthant(s),
            }
        })
        .collect();
    PartitionOfUnity { dim: 2, pieces }
}

/// Contour and quadrature settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContourConfig {
    /// Scale of the imaginary offset: `y₀ = δ · v` with `v` the unit
    /// witness of the term's cone.
    pub delta: f64,
    pub r0: f64,
    pub r_max: f64,
    pub tol: f64,
    pub order: usize,
    pub panel_width: f64,
    /// Poles closer than this to the contour block it.
    pub min_pole_distance: f64,
    /// Integration order for several variables, innermost first.
    pub axis_order: Option<Vec<usize>>,
}

impl Default for ContourConfig {
    fn default() -> Self {
        ContourConfig {
            delta: 0.1,
            r0: 16.0,
            r_max: 65536.0,
            tol: 1e-10,
            order: 64,
            panel_width: 1.0,
            min_pole_distance: 1e-3,
            axis_order: None,
        }
    }
}

impl ContourConfig {
    fn line(&self) -> LineSettings {
        LineSettings {
            r0: self.r0,
            r_max: self.r_max,
            tol: self.tol,
            order: self.order,
            panel_width: self.panel_width,
            ..LineSettings::default()
        }
    }

    fn validate(&self) -> Result<(), FourierError> {
        let ok = self.delta > 0.0
            && self.r0 > 0.0
            && self.r_max >= self.r0
            && self.tol > 0.0
            && self.order >= 2
            && self.panel_width > 0.0
            && self.min_pole_distance >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(FourierError::InvalidSettings(format!("{self:?}")))
        }
    }
}

/// Value of a contour integral with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: C64,
    pub error: f64,
}

fn map_line(axis: usize, e: LineError<FourierError>) -> FourierError {
    match e {
        LineError::NotDecaying { radius, .. } => FourierError::NotIntegrable { axis, radius },
        LineError::Integrand(inner) => inner,
    }
}

fn map_eval(e: EvalError, z: &[C64]) -> FourierError {
    match e {
        EvalError::Pole(_) => FourierError::ContourBlocked {
            at: z.first().copied().unwrap_or_default(),
            distance: 0.0,
        },
        other => FourierError::Eval(other),
    }
}

/// Zeros of the denominators of `e` within `min_distance` of the line
/// `Im z = y0`, found by Newton iteration from points spaced 0.25 apart on
/// `[-r0, r0]`.
fn scan_poles(e: &Expr, y0: f64, cfg: &ContourConfig) -> Result<(), FourierError> {
    let one = [C64::new(1.0, 0.0)];
    for den in e.singular_denominators() {
        let steps = (cfg.r0 / 0.25).ceil() as i64;
        for s in -steps..=steps {
            let mut z = C64::new(0.25 * s as f64, y0);
            for _ in 0..30 {
                let Ok((v, d)) = den.evaluate_directional(&[z], &one) else {
                    break;
                };
                if d.norm() == 0.0 || !d.re.is_finite() || !d.im.is_finite() {
                    break;
                }
                let step = v / d;
                z -= step;
                if step.norm() < 1e-13 * z.norm().max(1.0) {
                    break;
                }
                if z.norm() > 4.0 * cfg.r_max {
                    break;
                }
            }
            let Ok(v) = den.evaluate(&[z]).or_else(|e| match e {
                EvalError::Pole(_) => Ok(C64::new(0.0, 0.0)),
                other => Err(other),
            }) else {
                continue;
            };
            let distance = (z.im - y0).abs();
            if v.norm() < 1e-10 && distance < cfg.min_pole_distance {
                return Err(FourierError::ContourBlocked { at: z, distance });
            }
        }
    }
    Ok(())
}

/// `∫_{R + i·offset} e(z) dz` for an expression in one variable.
pub fn contour_integral_1d(e: &Expr, offset: f64, cfg: &ContourConfig) -> Result<Integral, FourierError> {
    cfg.validate()?;
    if e.arity() > 1 {
        return Err(FourierError::DimensionMismatch {
            expected: e.arity(),
            found: 1,
        });
    }
    scan_poles(e, offset, cfg)?;
    let mut f = |x: f64| -> Result<(C64, f64), FourierError> {
        let z = [C64::new(x, offset)];
        if e.has_numeric() {
            e.evaluate_with_error(&z).map_err(|err| map_eval(err, &z))
        } else {
            e.evaluate(&z).map(|v| (v, 0.0)).map_err(|err| map_eval(err, &z))
        }
    };
    let r = integrate_line(&mut f, &cfg.line()).map_err(|err| map_line(0, err))?;
    Ok(Integral {
        value: r.value,
        error: r.error,
    })
}

/// Iterated `∫_{R^n + i·offset} h(z) dz`, innermost axis first in
/// `cfg.axis_order` (default `0, 1, …`). No pole scan is done in several
/// variables; a node landing on a pole reports `ContourBlocked`.
pub fn contour_integral_nd(
    h: &(dyn Fn(&[C64]) -> Result<(C64, f64), EvalError> + Sync),
    offset: &[f64],
    cfg: &ContourConfig,
) -> Result<Integral, FourierError> {
    cfg.validate()?;
    let n = offset.len();
    let order: Vec<usize> = match &cfg.axis_order {
        Some(o) => o.clone(),
        None => (0..n).collect(),
    };
    let mut sorted = order.clone();
    sorted.sort_unstable();
    if sorted != (0..n).collect::<Vec<_>>() {
        return Err(FourierError::InvalidSettings(format!(
            "axis order {order:?} is not a permutation of 0..{n}"
        )));
    }
    let line = cfg.line();
    let mut x = vec![0.0; n];
    let (v, e) = iterate(h, offset, &order, n, &mut x, &line)?;
    Ok(Integral { value: v, error: e })
}

fn iterate(
    h: &(dyn Fn(&[C64]) -> Result<(C64, f64), EvalError> + Sync),
    offset: &[f64],
    order: &[usize],
    remaining: usize,
    x: &mut Vec<f64>,
    line: &LineSettings,
) -> Result<(C64, f64), FourierError> {
    if remaining == 0 {
        let z: Vec<C64> = x.iter().zip(offset).map(|(&a, &b)| C64::new(a, b)).collect();
        return h(&z).map_err(|e| map_eval(e, &z));
    }
    let axis = order[remaining - 1];
    let cell = std::cell::RefCell::new(std::mem::take(x));
    let mut f = |t: f64| -> Result<(C64, f64), FourierError> {
        let mut xs = cell.borrow_mut();
        xs[axis] = t;
        let mut local = xs.clone();
        drop(xs);
        iterate(h, offset, order, remaining - 1, &mut local, line)
    };
    let r = integrate_line(&mut f, line).map_err(|e| map_line(axis, e));
    *x = cell.into_inner();
    let r = r?;
    Ok((r.value, r.error))
}

/// Which logistic factor the S² family carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResidueFamily {
    /// `1/(1+e^{z})`, the `χ₋` piece.
    Minus,
    /// `1/(1+e^{-z})`, the `χ₊` piece.
    Plus,
}

impl ResidueFamily {
    pub fn chi(self) -> Expr {
        match self {
            ResidueFamily::Minus => (-Expr::coord(0)).logistic(),
            ResidueFamily::Plus => Expr::coord(0).logistic(),
        }
    }

    /// The integrand `e^{-i(ζ-a)z} / (z(1+e^{±z}))` at fixed `ζ`.
    pub fn integrand(self, a: f64, zeta: C64) -> Expr {
        let phase = Expr::constant(-C64::i() * (zeta - a)) * Expr::coord(0);
        phase.exp() * self.chi() / Expr::coord(0)
    }

    /// Strip of `Im ζ` where the closed form holds.
    pub fn strip(self) -> (f64, f64) {
        match self {
            ResidueFamily::Minus => (0.0, 1.0),
            ResidueFamily::Plus => (-1.0, 0.0),
        }
    }
}

/// Closed form of `∫_{R - iδ} e^{-i(ζ-a)z} / (z(1+e^{±z})) dz` (contour
/// below the pole at 0) as an expression in `ζ`, from summing the residues
/// at `z = ∓(2k+1)πi`:
///
/// * `Minus`: `Log tanh(π(ζ-a)/2)` for `0 < Im ζ < 1`;
/// * `Plus`: `πi − Log tanh(π(a-ζ)/2)` for `-1 < Im ζ < 0`.
pub fn residue_sum_1d(a: f64, family: ResidueFamily) -> Result<Expr, FourierError> {
    if !a.is_finite() {
        return Err(FourierError::Unsupported(format!("shift {a}")));
    }
    let zeta = Expr::coord(0);
    Ok(match family {
        ResidueFamily::Minus => (Expr::pi() * 0.5 * (zeta - a)).tanh().log(),
        ResidueFamily::Plus => {
            Expr::pi() * Expr::imag_unit() - (Expr::pi() * 0.5 * (a - zeta)).tanh().log()
        }
    })
}

/// `ζ ↦ ∫_{R^n + iy₀} e^{-iζ·z} H(z) dz`, memoised per `ζ`.
pub struct FourierIntegral {
    integrand: Expr,
    offset: Vec<f64>,
    config: ContourConfig,
    label: String,
    memo: Mutex<HashMap<Vec<u64>, (C64, f64)>>,
}

impl fmt::Debug for FourierIntegral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FourierIntegral({})", self.label)
    }
}

impl FourierIntegral {
    pub fn new(integrand: Expr, offset: Vec<f64>, config: ContourConfig, label: String) -> Self {
        FourierIntegral {
            integrand,
            offset,
            config,
            label,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn integrand(&self) -> &Expr {
        &self.integrand
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn compute(&self, zeta: &[C64]) -> Result<Integral, FourierError> {
        let key: Vec<u64> = zeta.iter().flat_map(|c| [c.re.to_bits(), c.im.to_bits()]).collect();
        if let Some(&(v, e)) = self.memo.lock().unwrap_or_else(|p| p.into_inner()).get(&key) {
            return Ok(Integral { value: v, error: e });
        }
        let r = if self.offset.len() == 1 {
            let kernel = (Expr::constant(-C64::i() * zeta[0]) * Expr::coord(0)).exp();
            contour_integral_1d(&(kernel * &self.integrand), self.offset[0], &self.config)?
        } else {
            let h = |z: &[C64]| -> Result<(C64, f64), EvalError> {
                let phase: C64 = zeta.iter().zip(z).map(|(a, b)| a * b).sum();
                let (v, e) = self.integrand.evaluate_with_error(z)?;
                let k = (-C64::i() * phase).exp();
                Ok((k * v, k.norm() * e))
            };
            contour_integral_nd(&h, &self.offset, &self.config)?
        };
        self.memo
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .insert(key, (r.value, r.error));
        Ok(r)
    }
}

impl NumericFunction for FourierIntegral {
    fn dim(&self) -> usize {
        self.offset.len()
    }

    fn eval(&self, z: &[C64]) -> Result<(C64, f64), EvalError> {
        match self.compute(z) {
            Ok(r) => Ok((r.value, r.error)),
            Err(FourierError::Eval(e)) => Err(e),
            Err(FourierError::ContourBlocked { .. }) => Err(EvalError::Pole("contour integral")),
            Err(other) => Err(EvalError::Numeric(other.to_string())),
        }
    }

    fn describe(&self) -> String {
        format!("fourier integral of {}", self.label)
    }
}

/// Where an output term of a transform came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub source_term: usize,
    pub piece: String,
    /// `-σ°`.
    pub cone: ConvexCone,
}

#[derive(Clone, Debug)]
pub struct FourierResult {
    pub hyperfunction: Hyperfunction,
    pub provenance: Vec<Provenance>,
}

/// `F(f) = Σ_terms Σ_σ b_{-σ°}(∫_{R^n + iδv} e^{-iζ·z} F(z) χ_σ(z) dz)`.
pub fn fourier_transform(
    f: &Hyperfunction,
    partition: &PartitionOfUnity,
    cfg: &ContourConfig,
) -> Result<FourierResult, FourierError> {
    cfg.validate()?;
    if partition.dim != f.dim() {
        return Err(FourierError::DimensionMismatch {
            expected: f.dim(),
            found: partition.dim,
        });
    }
    let mut terms = Vec::new();
    let mut provenance = Vec::new();
    for (j, term) in f.terms().iter().enumerate() {
        if !term.growth().is_slowly_increasing() {
            return Err(FourierError::NotSlowlyIncreasing { term: j });
        }
        let norm = term.direction().iter().map(|v| v * v).sum::<f64>().sqrt();
        let offset: Vec<f64> = term.direction().iter().map(|v| cfg.delta * v / norm).collect();
        for piece in &partition.pieces {
            let cone = piece.cone.polar_dual()?.negated();
            let label = format!("term {j}, piece {}", piece.label);
            let integrand = term.expr() * &piece.chi;
            let fi = FourierIntegral::new(integrand, offset.clone(), cfg.clone(), label);
            let out = BoundaryValueTerm::with_growth(Expr::numeric(Arc::new(fi)), cone.clone(), GrowthClass::Unclassified)?;
            terms.push(out);
            provenance.push(Provenance {
                source_term: j,
                piece: piece.label.clone(),
                cone,
            });
        }
    }
    Ok(FourierResult {
        hyperfunction: Hyperfunction::from_terms(f.dim(), terms)?,
        provenance,
    })
}

/// `χ_{[-1,1]}` with the value `1/2` at the jumps.
pub fn indicator_pm1(xi: f64) -> f64 {
    match xi.abs() {
        a if a < 1.0 => 1.0,
        a if a == 1.0 => 0.5,
        _ => 0.0,
    }
}

/// Standard defining function `-(1/2πi) Log((ζ-1)/(ζ+1))` of `χ_{[-1,1]}`,
/// used on both half-planes with opposite signs.
pub fn standard_indicator_defining_function() -> Expr {
    let zeta = Expr::coord(0);
    let c = -1.0 / (2.0 * PI);
    Expr::constant(C64::new(0.0, -c)) * ((zeta.clone() - 1.0) / (zeta + 1.0)).log()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::Weight;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn orthant_partition_in_one_and_two_dimensions() {
        let p1 = orthant_partition(1);
        assert_eq!(p1.pieces.len(), 2);
        let z = [c(0.3, 0.1)];
        let plus = p1.piece("+").unwrap().chi.evaluate(&z).unwrap();
        assert!((plus - 1.0 / (1.0 + (-z[0]).exp())).norm() < 1e-15);
        assert!((p1.sum_at(&z).unwrap() - 1.0).norm() < 1e-15);
        let p2 = orthant_partition(2);
        assert_eq!(p2.pieces.len(), 4);
        assert!((p2.sum_at(&[c(1.0, 1.0), c(2.0, -1.0)]).unwrap() - 1.0).norm() < 1e-14);
        let pp = p2.piece("++").unwrap().chi.evaluate(&[c(-10.0, 0.0), c(-10.0, 0.0)]).unwrap();
        assert!(pp.norm() < (-10.0f64).exp());
    }

    #[test]
    fn mixed_partition_matches_the_printed_pieces() {
        let p = mixed_partition_2d();
        let z = [c(0.5, 0.2), c(-1.0, 0.1)];
        assert!((p.sum_at(&z).unwrap() - 1.0).norm() < 1e-14);
        let first = p.pieces[0].chi.evaluate(&z).unwrap();
        let direct = 1.0 / ((1.0 + z[0].exp()) * (1.0 + (PI * z[1]).exp()));
        assert!((first - direct).norm() < 1e-15);
        for piece in &p.pieces {
            assert!((piece.chi.evaluate(&[c(0.0, 0.0), c(0.0, 0.0)]).unwrap() - 0.25).norm() < 1e-15);
        }
    }

    #[test]
    fn contour_integral_matches_residue_closed_form() {
        let cfg = ContourConfig::default();
        for (a, fam, zeta) in [
            (1.0, ResidueFamily::Minus, c(0.3, 0.5)),
            (-1.0, ResidueFamily::Minus, c(-2.0, 0.25)),
            (1.0, ResidueFamily::Plus, c(0.7, -0.4)),
            (-1.0, ResidueFamily::Plus, c(1.5, -0.6)),
        ] {
            let num = contour_integral_1d(&fam.integrand(a, zeta), -0.1, &cfg).unwrap();
            let closed = residue_sum_1d(a, fam).unwrap().evaluate(&[zeta]).unwrap();
            assert!((num.value - closed).norm() < 1e-8, "{a} {fam:?} {zeta}: {} vs {closed}", num.value);
        }
    }

    #[test]
    fn pole_on_the_contour_blocks_it() {
        let e = (Expr::coord(0) - Expr::constant(c(0.0, -0.1))).recip() * Expr::coord(0).logistic() * (-Expr::coord(0)).logistic();
        assert!(matches!(
            contour_integral_1d(&e, -0.1, &ContourConfig::default()),
            Err(FourierError::ContourBlocked { .. })
        ));
    }

    #[test]
    fn residue_closed_form_has_a_branch_point() {
        let e = residue_sum_1d(1.0, ResidueFamily::Minus).unwrap();
        assert!(matches!(e.evaluate(&[c(1.0, 0.0)]), Err(EvalError::Pole(_))));
    }

    #[test]
    fn output_cones_are_negated_duals() {
        let f = Hyperfunction::single(
            BoundaryValueTerm::new((Expr::imag_unit() * Expr::coord(0)).exp() / Expr::coord(0), ConvexCone::orthant(&[-1])).unwrap(),
        );
        let r = fourier_transform(&f, &orthant_partition(1), &ContourConfig::default()).unwrap();
        assert_eq!(r.provenance.len(), 2);
        let plus = r.provenance.iter().find(|p| p.piece == "+").unwrap();
        assert!(plus.cone.same_as(&ConvexCone::half_space(Weight::from_ints(&[-1]))).unwrap());
        let zero = fourier_transform(&Hyperfunction::zero(1), &orthant_partition(1), &ContourConfig::default()).unwrap();
        assert!(zero.hyperfunction.is_empty());
    }

    #[test]
    fn two_dimensional_gaussian() {
        let h = |z: &[C64]| -> Result<(C64, f64), EvalError> { Ok(((-(z[0] * z[0]) - z[1] * z[1]).exp(), 0.0)) };
        let cfg = ContourConfig {
            order: 32,
            r0: 8.0,
            ..ContourConfig::default()
        };
        let r = contour_integral_nd(&h, &[0.1, -0.2], &cfg).unwrap();
        assert!((r.value - PI).norm() < 1e-10, "{r:?}");
    }
}
