//! Extended-precision evaluation (128-bit mantissa, ~38 digits) used to
//! cross-check the double-precision evaluator.
//!
//! Constants stored as `f64` enter exactly as those doubles; only `Pi` is
//! rounded at full precision.

use std::cell::RefCell;

use astro_float::{BigFloat, Consts, RoundingMode};

use super::eval::{eval_node, Ctx, Scalar, Unary};
use super::{EvalError, Expr, C64};

const PREC: usize = 128;
const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

fn bf(x: f64) -> BigFloat {
    BigFloat::from_f64(x, PREC)
}

fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    x.to_string().parse().unwrap_or(f64::NAN)
}

/// Complex number with `BigFloat` parts.
#[derive(Clone, Debug)]
pub struct HpValue {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl HpValue {
    fn new(re: BigFloat, im: BigFloat) -> Self {
        HpValue { re, im }
    }

    pub fn to_c64(&self) -> C64 {
        C64::new(to_f64(&self.re), to_f64(&self.im))
    }

    /// `|self - z|` evaluated at full precision, then rounded.
    pub fn distance_to(&self, z: C64) -> f64 {
        let dr = self.re.sub(&bf(z.re), PREC, RM);
        let di = self.im.sub(&bf(z.im), PREC, RM);
        let n2 = dr.mul(&dr, PREC, RM).add(&di.mul(&di, PREC, RM), PREC, RM);
        to_f64(&n2.sqrt(PREC, RM))
    }

    fn norm2(&self) -> BigFloat {
        self.re
            .mul(&self.re, PREC, RM)
            .add(&self.im.mul(&self.im, PREC, RM), PREC, RM)
    }

    fn recip(&self) -> Self {
        let n2 = self.norm2();
        HpValue::new(self.re.div(&n2, PREC, RM), self.im.neg().div(&n2, PREC, RM))
    }

    fn exp_hp(&self) -> Self {
        with_consts(|cc| {
            let m = self.re.exp(PREC, RM, cc);
            let c = self.im.cos(PREC, RM, cc);
            let s = self.im.sin(PREC, RM, cc);
            HpValue::new(m.mul(&c, PREC, RM), m.mul(&s, PREC, RM))
        })
    }

    fn atan2(y: &BigFloat, x: &BigFloat) -> BigFloat {
        with_consts(|cc| {
            let pi = cc.pi(PREC, RM);
            if x.is_zero() {
                let half = pi.div(&bf(2.0), PREC, RM);
                return if y.is_negative() { half.neg() } else { half };
            }
            let base = y.div(x, PREC, RM).atan(PREC, RM, cc);
            if x.is_positive() {
                base
            } else if y.is_negative() {
                base.sub(&pi, PREC, RM)
            } else {
                base.add(&pi, PREC, RM)
            }
        })
    }
}

impl Scalar for HpValue {
    fn constant(c: C64) -> Self {
        HpValue::new(bf(c.re), bf(c.im))
    }

    fn pi() -> Self {
        hp_pi()
    }

    fn value(&self) -> C64 {
        self.to_c64()
    }

    fn add(&self, o: &Self) -> Self {
        HpValue::new(self.re.add(&o.re, PREC, RM), self.im.add(&o.im, PREC, RM))
    }

    fn sub(&self, o: &Self) -> Self {
        HpValue::new(self.re.sub(&o.re, PREC, RM), self.im.sub(&o.im, PREC, RM))
    }

    fn mul(&self, o: &Self) -> Self {
        let re = self.re.mul(&o.re, PREC, RM).sub(&self.im.mul(&o.im, PREC, RM), PREC, RM);
        let im = self.re.mul(&o.im, PREC, RM).add(&self.im.mul(&o.re, PREC, RM), PREC, RM);
        HpValue::new(re, im)
    }

    fn div(&self, o: &Self) -> Self {
        self.mul(&o.recip())
    }

    fn neg(&self) -> Self {
        HpValue::new(self.re.neg(), self.im.neg())
    }

    fn unary(&self, f: Unary) -> Self {
        let one = HpValue::constant(C64::new(1.0, 0.0));
        match f {
            Unary::Exp => self.exp_hp(),
            Unary::Sin | Unary::Cos => with_consts(|cc| {
                let sa = self.re.sin(PREC, RM, cc);
                let ca = self.re.cos(PREC, RM, cc);
                let shb = self.im.sinh(PREC, RM, cc);
                let chb = self.im.cosh(PREC, RM, cc);
                if matches!(f, Unary::Sin) {
                    HpValue::new(sa.mul(&chb, PREC, RM), ca.mul(&shb, PREC, RM))
                } else {
                    HpValue::new(ca.mul(&chb, PREC, RM), sa.mul(&shb, PREC, RM).neg())
                }
            }),
            Unary::Tanh => {
                let e = self.add(self).exp_hp();
                e.sub(&one).div(&e.add(&one))
            }
            Unary::Log => {
                let modulus = self.norm2().sqrt(PREC, RM);
                let re = with_consts(|cc| modulus.ln(PREC, RM, cc));
                HpValue::new(re, HpValue::atan2(&self.im, &self.re))
            }
            Unary::Sinc => {
                if self.to_c64().norm() < 1e-12 {
                    let w2 = self.mul(self);
                    one.sub(&w2.div(&HpValue::constant(C64::new(6.0, 0.0))))
                } else {
                    self.unary(Unary::Sin).div(self)
                }
            }
            Unary::Logistic => one.div(&one.add(&self.neg().exp_hp())),
        }
    }

    fn powi(&self, k: i32) -> Self {
        let mut base = if k < 0 { self.recip() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = HpValue::constant(C64::new(1.0, 0.0));
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }
}

pub(super) fn hp_pi() -> HpValue {
    HpValue::new(with_consts(|cc| cc.pi(PREC, RM)), bf(0.0))
}

impl Expr {
    /// Evaluation at ~38 significant digits. Numeric nodes are unsupported.
    pub fn evaluate_hp(&self, z: &[C64]) -> Result<HpValue, EvalError> {
        let zs: Vec<HpValue> = z.iter().map(|&v| HpValue::constant(v)).collect();
        let ctx = Ctx {
            z: &zs,
            scale: z.iter().map(|v| v.norm()).fold(1.0, f64::max),
            index: None,
        };
        eval_node(self, &ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agrees_with_double_precision() {
        let z1 = Expr::coord(0);
        let e = (Expr::pi() * 0.5 * (z1.clone() - 1.0)).tanh().log()
            + (Expr::imag_unit() * z1.clone()).exp() * z1.sinc() / (z1.clone() + 2.0)
            + z1.logistic().powi(-2);
        for z in [C64::new(0.3, 0.5), C64::new(-2.0, 0.2), C64::new(1.7, -0.4)] {
            let lo = e.evaluate(&[z]).unwrap();
            let hi = e.evaluate_hp(&[z]).unwrap();
            assert!(hi.distance_to(lo) < 1e-13 * (1.0 + lo.norm()), "{z}");
        }
    }

    #[test]
    fn pi_is_exact_at_full_precision() {
        let hi = Expr::pi().sin().evaluate_hp(&[]).unwrap();
        assert!(hi.distance_to(C64::new(0.0, 0.0)) < 1e-35);
    }
}
