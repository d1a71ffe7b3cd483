//! Tree-walking evaluation, generic over the number type so the same walker
//! gives plain values, forward-mode derivatives and propagated error bounds.

use super::{EvalError, Expr, Node, NumericFunction, C64};
use crate::rational::to_f64;

/// A denominator smaller than this times the local scale is a pole.
pub const POLE_TOLERANCE: f64 = 1e-12;

/// Unary functions of the grammar with stable `f64` implementations.
#[derive(Clone, Copy)]
pub(crate) enum Unary {
    Exp,
    Sin,
    Cos,
    Tanh,
    Log,
    Sinc,
    Logistic,
}

impl Unary {
    pub(crate) fn name(self) -> &'static str {
        match self {
            Unary::Exp => "exp",
            Unary::Sin => "sin",
            Unary::Cos => "cos",
            Unary::Tanh => "tanh",
            Unary::Log => "log",
            Unary::Sinc => "sinc",
            Unary::Logistic => "logistic",
        }
    }
}

/// Magnitude of the vanishing quantity behind a singularity of `f` at `w`
/// (`None` when `f` is entire).
fn singular_gauge(f: Unary, w: C64, scale: f64) -> Option<f64> {
    match f {
        Unary::Log => Some(w.norm() / scale),
        Unary::Tanh => {
            let t = if w.re >= 0.0 { (-2.0 * w).exp() } else { (2.0 * w).exp() };
            Some((1.0 + t).norm())
        }
        Unary::Logistic => {
            let t = if w.re >= 0.0 { (-w).exp() } else { w.exp() };
            Some((1.0 + t).norm())
        }
        _ => None,
    }
}

/// Value and derivative of a unary function at `w`.
pub(crate) fn unary_c64(f: Unary, w: C64) -> (C64, C64) {
    match f {
        Unary::Exp => {
            let e = w.exp();
            (e, e)
        }
        Unary::Sin => (w.sin(), w.cos()),
        Unary::Cos => (w.cos(), -w.sin()),
        Unary::Tanh => {
            let t = if w.re >= 0.0 {
                let e = (-2.0 * w).exp();
                (1.0 - e) / (1.0 + e)
            } else {
                let e = (2.0 * w).exp();
                (e - 1.0) / (e + 1.0)
            };
            (t, 1.0 - t * t)
        }
        Unary::Log => (w.ln(), 1.0 / w),
        Unary::Sinc => {
            if w.norm() < 1e-4 {
                let w2 = w * w;
                (1.0 - w2 / 6.0 + w2 * w2 / 120.0, -w / 3.0 + w * w2 / 30.0)
            } else {
                let s = w.sin() / w;
                (s, (w.cos() - s) / w)
            }
        }
        Unary::Logistic => {
            let s = if w.re >= 0.0 {
                1.0 / (1.0 + (-w).exp())
            } else {
                let e = w.exp();
                e / (1.0 + e)
            };
            (s, s * (1.0 - s))
        }
    }
}

pub(crate) trait Scalar: Clone + Sized {
    fn constant(c: C64) -> Self;
    fn pi() -> Self {
        Self::constant(C64::new(std::f64::consts::PI, 0.0))
    }
    fn value(&self) -> C64;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn unary(&self, f: Unary) -> Self;
    fn powi(&self, k: i32) -> Self;
    fn numeric(_f: &dyn NumericFunction, _args: &[Self]) -> Result<Self, EvalError> {
        Err(EvalError::Unsupported("numeric node"))
    }
}

impl Scalar for C64 {
    fn constant(c: C64) -> Self {
        c
    }
    fn value(&self) -> C64 {
        *self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn unary(&self, f: Unary) -> Self {
        unary_c64(f, *self).0
    }
    fn powi(&self, k: i32) -> Self {
        self.powi(k)
    }
    fn numeric(f: &dyn NumericFunction, args: &[Self]) -> Result<Self, EvalError> {
        f.eval(args).map(|(v, _)| v)
    }
}

/// Value with a directional derivative.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Dual {
    pub v: C64,
    pub d: C64,
}

impl Scalar for Dual {
    fn constant(c: C64) -> Self {
        Dual { v: c, d: C64::new(0.0, 0.0) }
    }
    fn value(&self) -> C64 {
        self.v
    }
    fn add(&self, o: &Self) -> Self {
        Dual { v: self.v + o.v, d: self.d + o.d }
    }
    fn sub(&self, o: &Self) -> Self {
        Dual { v: self.v - o.v, d: self.d - o.d }
    }
    fn mul(&self, o: &Self) -> Self {
        Dual { v: self.v * o.v, d: self.d * o.v + self.v * o.d }
    }
    fn div(&self, o: &Self) -> Self {
        let q = self.v / o.v;
        Dual { v: q, d: (self.d - q * o.d) / o.v }
    }
    fn neg(&self) -> Self {
        Dual { v: -self.v, d: -self.d }
    }
    fn unary(&self, f: Unary) -> Self {
        let (v, dv) = unary_c64(f, self.v);
        Dual { v, d: dv * self.d }
    }
    fn powi(&self, k: i32) -> Self {
        let v = self.v.powi(k);
        let d = if k == 0 { C64::new(0.0, 0.0) } else { self.v.powi(k - 1) * k as f64 * self.d };
        Dual { v, d }
    }
}

/// Value with a first-order absolute error bound inherited from numeric
/// leaves.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Tracked {
    pub v: C64,
    pub e: f64,
}

impl Scalar for Tracked {
    fn constant(c: C64) -> Self {
        Tracked { v: c, e: 0.0 }
    }
    fn value(&self) -> C64 {
        self.v
    }
    fn add(&self, o: &Self) -> Self {
        Tracked { v: self.v + o.v, e: self.e + o.e }
    }
    fn sub(&self, o: &Self) -> Self {
        Tracked { v: self.v - o.v, e: self.e + o.e }
    }
    fn mul(&self, o: &Self) -> Self {
        Tracked {
            v: self.v * o.v,
            e: self.v.norm() * o.e + o.v.norm() * self.e + self.e * o.e,
        }
    }
    fn div(&self, o: &Self) -> Self {
        let q = self.v / o.v;
        let b = o.v.norm();
        Tracked { v: q, e: (self.e + q.norm() * o.e) / b }
    }
    fn neg(&self) -> Self {
        Tracked { v: -self.v, e: self.e }
    }
    fn unary(&self, f: Unary) -> Self {
        let (v, dv) = unary_c64(f, self.v);
        Tracked { v, e: dv.norm() * self.e }
    }
    fn powi(&self, k: i32) -> Self {
        let v = self.v.powi(k);
        let e = if k == 0 { 0.0 } else { (self.v.powi(k - 1) * k as f64).norm() * self.e };
        Tracked { v, e }
    }
    fn numeric(f: &dyn NumericFunction, args: &[Self]) -> Result<Self, EvalError> {
        let z: Vec<C64> = args.iter().map(|a| a.v).collect();
        let (v, e) = f.eval(&z)?;
        Ok(Tracked { v, e })
    }
}

pub(crate) struct Ctx<'a, S> {
    pub z: &'a [S],
    pub scale: f64,
    pub index: Option<f64>,
}

fn check<S: Scalar>(s: S, what: &'static str) -> Result<S, EvalError> {
    let v = s.value();
    if v.re.is_finite() && v.im.is_finite() {
        Ok(s)
    } else {
        Err(EvalError::NonFinite(what))
    }
}

pub(crate) fn eval_node<S: Scalar>(e: &Expr, ctx: &Ctx<'_, S>) -> Result<S, EvalError> {
    let un = |a: &Expr, f: Unary| -> Result<S, EvalError> {
        let w = eval_node(a, ctx)?;
        if let Some(g) = singular_gauge(f, w.value(), ctx.scale) {
            if g <= POLE_TOLERANCE {
                return Err(EvalError::Pole(f.name()));
            }
        }
        check(w.unary(f), f.name())
    };
    match e.node() {
        Node::Const(c) => Ok(S::constant(*c)),
        Node::Pi => Ok(S::pi()),
        Node::Coord(i) => ctx.z.get(*i).cloned().ok_or(EvalError::DimensionMismatch {
            needed: i + 1,
            given: ctx.z.len(),
        }),
        Node::Affine(w) => {
            if w.dim() > ctx.z.len() {
                return Err(EvalError::DimensionMismatch {
                    needed: w.dim(),
                    given: ctx.z.len(),
                });
            }
            let mut acc = S::constant(C64::new(0.0, 0.0));
            for (q, zi) in w.coeffs().iter().zip(ctx.z) {
                if !num_traits::Zero::is_zero(q) {
                    acc = acc.add(&zi.mul(&S::constant(C64::new(to_f64(q), 0.0))));
                }
            }
            Ok(acc)
        }
        Node::Index => ctx
            .index
            .map(|k| S::constant(C64::new(k, 0.0)))
            .ok_or(EvalError::UnboundIndex),
        Node::Add(a, b) => check(eval_node(a, ctx)?.add(&eval_node(b, ctx)?), "add"),
        Node::Sub(a, b) => check(eval_node(a, ctx)?.sub(&eval_node(b, ctx)?), "sub"),
        Node::Mul(a, b) => check(eval_node(a, ctx)?.mul(&eval_node(b, ctx)?), "mul"),
        Node::Div(a, b) => {
            let num = eval_node(a, ctx)?;
            let den = eval_node(b, ctx)?;
            if den.value().norm() <= POLE_TOLERANCE * ctx.scale {
                return Err(EvalError::Pole("division"));
            }
            check(num.div(&den), "div")
        }
        Node::Neg(a) => Ok(eval_node(a, ctx)?.neg()),
        Node::Exp(a) => un(a, Unary::Exp),
        Node::Sin(a) => un(a, Unary::Sin),
        Node::Cos(a) => un(a, Unary::Cos),
        Node::Tanh(a) => un(a, Unary::Tanh),
        Node::Log(a) => un(a, Unary::Log),
        Node::Sinc(a) => un(a, Unary::Sinc),
        Node::Logistic(a) => un(a, Unary::Logistic),
        Node::Pow(a, k) => {
            let b = eval_node(a, ctx)?;
            if *k < 0 && b.value().norm() <= POLE_TOLERANCE * ctx.scale {
                return Err(EvalError::Pole("negative power"));
            }
            check(b.powi(*k), "pow")
        }
        Node::Product(fs) => {
            let mut acc = S::constant(C64::new(1.0, 0.0));
            for f in fs {
                acc = check(acc.mul(&eval_node(f, ctx)?), "product")?;
            }
            Ok(acc)
        }
        Node::TruncatedProduct { factor, order } => {
            let mut acc = S::constant(C64::new(1.0, 0.0));
            for k in 1..=*order {
                let inner = Ctx {
                    z: ctx.z,
                    scale: ctx.scale,
                    index: Some(k as f64),
                };
                acc = check(acc.mul(&eval_node(factor, &inner)?), "truncated product")?;
            }
            Ok(acc)
        }
        Node::Numeric(f) => {
            if f.dim() > ctx.z.len() {
                return Err(EvalError::DimensionMismatch {
                    needed: f.dim(),
                    given: ctx.z.len(),
                });
            }
            check(S::numeric(f.as_ref(), &ctx.z[..f.dim()])?, "numeric")
        }
    }
}

fn local_scale(z: &[C64]) -> f64 {
    z.iter().map(|v| v.norm()).fold(1.0, f64::max)
}

impl Expr {
    /// Value at `z`, with poles and non-finite intermediates reported.
    pub fn evaluate(&self, z: &[C64]) -> Result<C64, EvalError> {
        let ctx = Ctx {
            z,
            scale: local_scale(z),
            index: None,
        };
        eval_node(self, &ctx)
    }

    /// Value plus a propagated absolute error bound from numeric leaves.
    pub fn evaluate_with_error(&self, z: &[C64]) -> Result<(C64, f64), EvalError> {
        let zs: Vec<Tracked> = z.iter().map(|&v| Tracked { v, e: 0.0 }).collect();
        let ctx = Ctx {
            z: &zs,
            scale: local_scale(z),
            index: None,
        };
        let t = eval_node(self, &ctx)?;
        Ok((t.v, t.e))
    }

    /// Value and derivative along `direction`.
    pub fn evaluate_directional(&self, z: &[C64], direction: &[C64]) -> Result<(C64, C64), EvalError> {
        let zs: Vec<Dual> = z
            .iter()
            .zip(direction.iter().chain(std::iter::repeat(&C64::new(0.0, 0.0))))
            .map(|(&v, &d)| Dual { v, d })
            .collect();
        let ctx = Ctx {
            z: &zs,
            scale: local_scale(z),
            index: None,
        };
        let r = eval_node(self, &ctx)?;
        Ok((r.v, r.d))
    }

    /// Evaluates at real points `x` (convenience for grids).
    pub fn evaluate_real(&self, x: &[f64]) -> Result<C64, EvalError> {
        let z: Vec<C64> = x.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.evaluate(&z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::Weight;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn z1() -> Expr {
        Expr::coord(0)
    }

    #[test]
    fn exp_iz_over_z() {
        let e = (Expr::imag_unit() * z1()).exp() / z1();
        let v = e.evaluate(&[c(1.0, 0.0)]).unwrap();
        let expect = c(1.0f64.cos(), 1.0f64.sin());
        assert!((v - expect).norm() < 1e-15);
        assert_eq!(e.evaluate(&[c(0.0, 0.0)]), Err(EvalError::Pole("division")));
    }

    #[test]
    fn log_branch_point_is_a_pole() {
        let e = (PI / 2.0 * (z1() - 1.0)).tanh().log();
        assert_eq!(e.evaluate(&[c(1.0, 0.0)]), Err(EvalError::Pole("log")));
        let v = e.evaluate(&[c(0.3, 0.5)]).unwrap();
        let direct = (PI / 2.0 * c(-0.7, 0.5)).tanh().ln();
        assert!((v - direct).norm() < 1e-14);
    }

    #[test]
    fn logistic_is_stable_far_out() {
        let e = z1().logistic();
        assert!(e.evaluate(&[c(-800.0, 0.1)]).unwrap().norm() < 1e-300);
        assert!((e.evaluate(&[c(800.0, 0.1)]).unwrap() - 1.0).norm() < 1e-15);
        assert_eq!(
            e.evaluate(&[c(0.0, PI)]),
            Err(EvalError::Pole("logistic"))
        );
        let tanh = z1().tanh();
        assert!((tanh.evaluate(&[c(900.0, 0.3)]).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn sinc_near_zero_and_affine_forms() {
        let e = z1().sinc();
        assert!((e.evaluate(&[c(1e-9, 0.0)]).unwrap() - 1.0).norm() < 1e-15);
        let w = Expr::affine(Weight::from_ints(&[2, 3]));
        let v = w.evaluate(&[c(1.0, 1.0), c(0.5, -1.0)]).unwrap();
        assert!((v - c(3.5, -1.0)).norm() < 1e-15);
        assert!(matches!(
            w.evaluate(&[c(1.0, 0.0)]),
            Err(EvalError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn non_finite_is_reported() {
        let e = z1().exp() * (-z1()).exp();
        assert!(matches!(
            e.evaluate(&[c(800.0, 0.0)]),
            Err(EvalError::NonFinite(_))
        ));
    }

    #[test]
    fn truncated_product_binds_index() {
        // Π_{k=1}^{3} (1 + z/k) = (1+z)(1+z/2)(1+z/3)
        let f = 1.0 + z1() / Expr::index();
        let p = Expr::truncated_product(f.clone(), 3);
        let z = c(0.7, -0.2);
        let expect = (1.0 + z) * (1.0 + z / 2.0) * (1.0 + z / 3.0);
        assert!((p.evaluate(&[z]).unwrap() - expect).norm() < 1e-14);
        assert_eq!(f.evaluate(&[z]), Err(EvalError::UnboundIndex));
        assert!((f.bind_index(2).evaluate(&[z]).unwrap() - (1.0 + z / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn directional_derivative_matches_difference_quotient() {
        let e = (Expr::imag_unit() * z1()).exp() * z1().sinc() / (z1() + 2.0) + z1().logistic().powi(3);
        let z = c(0.4, -0.3);
        let (_, d) = e.evaluate_directional(&[z], &[c(1.0, 0.0)]).unwrap();
        let h = 1e-6;
        let fd = (e.evaluate(&[z + h]).unwrap() - e.evaluate(&[z - h]).unwrap()) / (2.0 * h);
        assert!((d - fd).norm() < 1e-8);
    }
}
