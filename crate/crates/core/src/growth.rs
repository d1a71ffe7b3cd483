//! Rule-based growth classification of defining functions on a wedge
//! `R^n + iγ`.
//!
//! `SlowlyIncreasing` means `|F(x+iy)| ≤ C_ε e^{ε|x|}` for `y` in compacts of
//! `γ`; `ExponentiallyDecreasingOn(Δ)` additionally asserts `|F| ≤ C e^{-δ|x|}`
//! for `x` in the union of the open cones `Δ`. Anything the rules cannot
//! certify is `Unclassified`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cone::{ConvexCone, Weight};
use crate::expr::{Expr, Node, C64};
use crate::lp::{Constraint, LinearProgram, LpOutcome, Relation};
use crate::rational::{from_f64, to_f64, Rational};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GrowthClass {
    SlowlyIncreasing,
    /// Slowly increasing everywhere and exponentially decreasing along real
    /// directions in the union of these open cones.
    ExponentiallyDecreasingOn(Vec<ConvexCone>),
    Unclassified,
}

impl GrowthClass {
    pub fn is_slowly_increasing(&self) -> bool {
        !matches!(self, GrowthClass::Unclassified)
    }

    /// Growth class of a product.
    pub fn times(&self, other: &GrowthClass) -> GrowthClass {
        use GrowthClass::*;
        match (self, other) {
            (Unclassified, _) | (_, Unclassified) => Unclassified,
            (SlowlyIncreasing, SlowlyIncreasing) => SlowlyIncreasing,
            (SlowlyIncreasing, d @ ExponentiallyDecreasingOn(_))
            | (d @ ExponentiallyDecreasingOn(_), SlowlyIncreasing) => d.clone(),
            (ExponentiallyDecreasingOn(a), ExponentiallyDecreasingOn(b)) => {
                let mut u = a.clone();
                for c in b {
                    if !u.contains(c) {
                        u.push(c.clone());
                    }
                }
                ExponentiallyDecreasingOn(u)
            }
        }
    }

    /// Growth class of a sum.
    pub fn plus(&self, other: &GrowthClass) -> GrowthClass {
        use GrowthClass::*;
        match (self, other) {
            (Unclassified, _) | (_, Unclassified) => Unclassified,
            (ExponentiallyDecreasingOn(a), ExponentiallyDecreasingOn(b)) if a == b => self.clone(),
            _ => SlowlyIncreasing,
        }
    }
}

/// `konst + Σ lin_i z_i`; `indexed` when the product index entered as a
/// (positive) constant.
#[derive(Clone, Debug)]
struct AffineForm {
    lin: Vec<C64>,
    konst: C64,
    indexed: bool,
}

impl AffineForm {
    fn constant(c: C64, n: usize) -> Self {
        AffineForm {
            lin: vec![C64::new(0.0, 0.0); n],
            konst: c,
            indexed: false,
        }
    }

    fn is_constant(&self) -> bool {
        self.lin.iter().all(|c| *c == C64::new(0.0, 0.0))
    }

    fn scale(mut self, s: C64, indexed: bool) -> Self {
        self.lin.iter_mut().for_each(|c| *c *= s);
        self.konst *= s;
        self.indexed |= indexed;
        self
    }

    fn combine(mut self, other: AffineForm, sign: f64) -> Self {
        for (a, b) in self.lin.iter_mut().zip(other.lin) {
            *a += sign * b;
        }
        self.konst += sign * other.konst;
        self.indexed |= other.indexed;
        self
    }

    fn real_linear(&self) -> Option<Vec<f64>> {
        self.lin.iter().all(|c| c.im == 0.0).then(|| self.lin.iter().map(|c| c.re).collect())
    }

    fn imaginary_linear(&self) -> bool {
        self.lin.iter().all(|c| c.re == 0.0)
    }
}

fn affine_of(e: &Expr, n: usize) -> Option<AffineForm> {
    match e.node() {
        Node::Const(c) => Some(AffineForm::constant(*c, n)),
        Node::Pi => Some(AffineForm::constant(C64::new(PI, 0.0), n)),
        Node::Index => Some(AffineForm {
            indexed: true,
            ..AffineForm::constant(C64::new(1.0, 0.0), n)
        }),
        Node::Coord(i) if *i < n => {
            let mut f = AffineForm::constant(C64::new(0.0, 0.0), n);
            f.lin[*i] = C64::new(1.0, 0.0);
            Some(f)
        }
        Node::Affine(w) if w.dim() <= n => {
            let mut f = AffineForm::constant(C64::new(0.0, 0.0), n);
            for (slot, q) in f.lin.iter_mut().zip(w.coeffs()) {
                *slot = C64::new(to_f64(q), 0.0);
            }
            Some(f)
        }
        Node::Add(a, b) => Some(affine_of(a, n)?.combine(affine_of(b, n)?, 1.0)),
        Node::Sub(a, b) => Some(affine_of(a, n)?.combine(affine_of(b, n)?, -1.0)),
        Node::Neg(a) => Some(affine_of(a, n)?.scale(C64::new(-1.0, 0.0), false)),
        Node::Mul(a, b) => {
            let (fa, fb) = (affine_of(a, n)?, affine_of(b, n)?);
            if fa.is_constant() {
                Some(fb.scale(fa.konst, fa.indexed))
            } else if fb.is_constant() {
                Some(fa.scale(fb.konst, fb.indexed))
            } else {
                None
            }
        }
        Node::Div(a, b) => {
            let fb = affine_of(b, n)?;
            if fb.is_constant() && fb.konst != C64::new(0.0, 0.0) {
                Some(affine_of(a, n)?.scale(1.0 / fb.konst, fb.indexed))
            } else {
                None
            }
        }
        _ => None,
    }
}

/// `num / den` with both affine.
struct Ratio {
    num: AffineForm,
    den: AffineForm,
}

fn ratio_of(e: &Expr, n: usize) -> Option<Ratio> {
    if let Some(a) = affine_of(e, n) {
        return Some(Ratio {
            num: a,
            den: AffineForm::constant(C64::new(1.0, 0.0), n),
        });
    }
    match e.node() {
        Node::Div(a, b) => {
            let (na, db) = (affine_of(a, n)?, affine_of(b, n)?);
            Some(Ratio { num: na, den: db })
        }
        Node::Neg(a) => {
            let r = ratio_of(a, n)?;
            Some(Ratio {
                num: r.num.scale(C64::new(-1.0, 0.0), false),
                den: r.den,
            })
        }
        Node::Add(a, b) | Node::Sub(a, b) => {
            let sign = if matches!(e.node(), Node::Add(..)) { 1.0 } else { -1.0 };
            let (ra, rb) = (ratio_of(a, n)?, ratio_of(b, n)?);
            // Only sums where one side has a constant denominator.
            if rb.den.is_constant() {
                let shift = rb.num.scale(1.0 / rb.den.konst, rb.den.indexed);
                let lifted = multiply_affine(&shift, &ra.den)?;
                Some(Ratio {
                    num: ra.num.combine(lifted, sign),
                    den: ra.den,
                })
            } else if ra.den.is_constant() {
                let shift = ra.num.scale(1.0 / ra.den.konst, ra.den.indexed);
                let lifted = multiply_affine(&shift, &rb.den)?;
                Some(Ratio {
                    num: lifted.combine(rb.num, sign),
                    den: rb.den,
                })
            } else {
                None
            }
        }
        Node::Mul(a, b) => {
            let (ra, rb) = (ratio_of(a, n)?, ratio_of(b, n)?);
            if ra.num.is_constant() && ra.den.is_constant() {
                let s = ra.num.konst / ra.den.konst;
                Some(Ratio {
                    num: rb.num.scale(s, ra.num.indexed || ra.den.indexed),
                    den: rb.den,
                })
            } else if rb.num.is_constant() && rb.den.is_constant() {
                let s = rb.num.konst / rb.den.konst;
                Some(Ratio {
                    num: ra.num.scale(s, rb.num.indexed || rb.den.indexed),
                    den: ra.den,
                })
            } else {
                None
            }
        }
        _ => None,
    }
}

fn multiply_affine(a: &AffineForm, b: &AffineForm) -> Option<AffineForm> {
    if a.is_constant() {
        Some(b.clone().scale(a.konst, a.indexed))
    } else if b.is_constant() {
        Some(a.clone().scale(b.konst, b.indexed))
    } else {
        None
    }
}

fn weight_of(lin: &[f64]) -> Option<Weight> {
    let nonzero: Vec<usize> = (0..lin.len()).filter(|&i| lin[i] != 0.0).collect();
    if nonzero.len() == 1 {
        // Only the sign matters for a coordinate functional.
        let mut c = vec![0i64; lin.len()];
        c[nonzero[0]] = lin[nonzero[0]].signum() as i64;
        return Some(Weight::from_ints(&c));
    }
    lin.iter().map(|&x| from_f64(x)).collect::<Option<Vec<_>>>().map(Weight::new)
}

/// `+1` / `-1` when the linear form is positive / negative on all of `cone`.
fn definite_sign(lin: &[f64], cone: &ConvexCone) -> Option<i8> {
    let w = weight_of(lin)?;
    if w.is_zero() || w.dim() != cone.dim() {
        return None;
    }
    if cone.is_subset_of(&ConvexCone::half_space(w.clone())).ok()? {
        Some(1)
    } else if cone.is_subset_of(&ConvexCone::half_space(-w)).ok()? {
        Some(-1)
    } else {
        None
    }
}

/// Range of `n(y)/d(y)` over the closed cone, given `d > 0` there
/// (Charnes–Cooper: optimise `n(y)` subject to `d(y) = 1`).
fn ratio_range(num: &Weight, den: &Weight, cone: &ConvexCone) -> (f64, f64) {
    let n = cone.dim();
    let mut constraints: Vec<Constraint> = cone
        .half_spaces()
        .iter()
        .map(|h| Constraint::new(h.coeffs().to_vec(), Relation::Ge, Rational::from_integer(0.into())))
        .collect();
    constraints.push(Constraint::new(
        den.coeffs().to_vec(),
        Relation::Eq,
        Rational::from_integer(1.into()),
    ));
    let bound = |sign: i64| -> f64 {
        let objective = num
            .coeffs()
            .iter()
            .map(|q| q * Rational::from_integer(sign.into()))
            .collect();
        let lp = LinearProgram {
            objective,
            free: vec![true; n],
            constraints: constraints.clone(),
        };
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => sign as f64 * to_f64(&value),
            _ => sign as f64 * f64::INFINITY,
        }
    };
    let hi = bound(1);
    let lo = bound(-1);
    (lo, hi)
}

/// Whether some zero `kπ` of `sin` (or `sinc` when `skip_origin`) lies
/// strictly inside `(lo, hi)`.
fn zero_inside(lo: f64, hi: f64, skip_origin: bool) -> bool {
    if !lo.is_finite() || !hi.is_finite() {
        return true;
    }
    let k_lo = (lo / PI).floor() as i64;
    let k_hi = (hi / PI).ceil() as i64;
    (k_lo..=k_hi).any(|k| {
        if skip_origin && k == 0 {
            return false;
        }
        let z = k as f64 * PI;
        let slack = 1e-12 * (1.0 + z.abs());
        z > lo + slack && z < hi - slack
    })
}

struct Classifier<'a> {
    cone: &'a ConvexCone,
    n: usize,
}

impl Classifier<'_> {
    fn class(&self, e: &Expr) -> GrowthClass {
        use GrowthClass::*;
        match e.node() {
            Node::Const(_) | Node::Pi | Node::Index | Node::Coord(_) | Node::Affine(_) => SlowlyIncreasing,
            Node::Add(a, b) | Node::Sub(a, b) => self.class(a).plus(&self.class(b)),
            Node::Mul(a, b) => self.class(a).times(&self.class(b)),
            Node::Div(a, b) => match b.node() {
                // w / sin(w) is 1/sinc(w).
                Node::Sin(w) if a.structurally_eq(w) => self.recip_sine(w, true),
                _ => self.class(a).times(&self.recip(b)),
            },
            Node::Neg(a) => self.class(a),
            Node::Exp(a) => self.exp_class(a),
            Node::Sin(a) | Node::Cos(a) | Node::Sinc(a) | Node::Tanh(a) => self.bounded_if_real(a),
            Node::Logistic(a) => match affine_of(a, self.n) {
                Some(f) if f.is_constant() => SlowlyIncreasing,
                Some(f) if f.konst.im == 0.0 => match f.real_linear() {
                    Some(lin) => match weight_of(&lin) {
                        // 1/(1+e^{-w}) decays where Re w → -∞.
                        Some(w) => ExponentiallyDecreasingOn(vec![ConvexCone::half_space(-w)]),
                        None => Unclassified,
                    },
                    None => Unclassified,
                },
                _ => Unclassified,
            },
            Node::Log(_) | Node::Numeric(_) => Unclassified,
            Node::Pow(a, k) => {
                if *k >= 0 {
                    self.class(a)
                } else {
                    self.recip(a)
                }
            }
            Node::Product(fs) => fs.iter().fold(SlowlyIncreasing, |acc, f| acc.times(&self.class(f))),
            Node::TruncatedProduct { factor, .. } => self.class(factor),
        }
    }

    /// `sin`, `cos`, `sinc`, `tanh` of an argument with bounded imaginary
    /// part are bounded on compacts of the wedge.
    fn bounded_if_real(&self, a: &Expr) -> GrowthClass {
        match affine_of(a, self.n) {
            Some(f) if f.real_linear().is_some() => GrowthClass::SlowlyIncreasing,
            _ => GrowthClass::Unclassified,
        }
    }

    /// `e^{±a}`: slowly increasing when `a` is `i` times a real form.
    fn exp_class(&self, a: &Expr) -> GrowthClass {
        match affine_of(a, self.n) {
            Some(f) if f.is_constant() || f.imaginary_linear() => GrowthClass::SlowlyIncreasing,
            _ => GrowthClass::Unclassified,
        }
    }

    /// Class of `1/b`.
    fn recip(&self, b: &Expr) -> GrowthClass {
        use GrowthClass::*;
        if let Some(f) = affine_of(b, self.n) {
            if f.is_constant() {
                return if f.konst != C64::new(0.0, 0.0) { SlowlyIncreasing } else { Unclassified };
            }
            // |λ(x+iy) + c| ≥ |λ(y)| > 0 on compacts of the cone.
            return match f.real_linear() {
                Some(lin) if f.konst.im == 0.0 && definite_sign(&lin, self.cone).is_some() => SlowlyIncreasing,
                _ => Unclassified,
            };
        }
        match b.node() {
            Node::Mul(x, y) => self.recip(x).times(&self.recip(y)),
            Node::Div(x, y) => self.class(y).times(&self.recip(x)),
            Node::Neg(x) => self.recip(x),
            Node::Pow(x, k) => {
                if *k >= 0 {
                    self.recip(x)
                } else {
                    self.class(x)
                }
            }
            Node::Product(fs) => fs.iter().fold(SlowlyIncreasing, |acc, f| acc.times(&self.recip(f))),
            Node::Exp(a) => self.exp_class(a),
            Node::Sin(a) => self.recip_sine(a, false),
            Node::Sinc(a) => self.recip_sine(a, true),
            _ => Unclassified,
        }
    }

    /// `1/sin(w)` or `1/sinc(w)` for `w` affine or a ratio of affine forms.
    fn recip_sine(&self, a: &Expr, sinc: bool) -> GrowthClass {
        use GrowthClass::*;
        let Some(r) = ratio_of(a, self.n) else {
            return Unclassified;
        };
        if r.num.indexed || r.den.indexed {
            return Unclassified;
        }
        let (Some(nl), Some(dl)) = (r.num.real_linear(), r.den.real_linear()) else {
            return Unclassified;
        };
        if r.den.is_constant() {
            let d0 = r.den.konst;
            if d0.im != 0.0 || d0.re == 0.0 {
                return Unclassified;
            }
            if r.num.is_constant() {
                let w = r.num.konst / d0;
                let s = if sinc { w.sin() / w } else { w.sin() };
                return if w.norm() > 0.0 && s.norm() > 0.0 || sinc && w.norm() == 0.0 {
                    SlowlyIncreasing
                } else {
                    Unclassified
                };
            }
            // Im w = (Im n0 + n(y))/d0 stays away from 0 iff n is definite and
            // n0 real.
            return if r.num.konst.im == 0.0 && definite_sign(&nl, self.cone).is_some() {
                SlowlyIncreasing
            } else {
                Unclassified
            };
        }
        if r.den.konst != C64::new(0.0, 0.0) || r.num.konst.im != 0.0 {
            return Unclassified;
        }
        let Some(sd) = definite_sign(&dl, self.cone) else {
            return Unclassified;
        };
        // w is real only when w = n(y)/d(y); those values must miss the zeros.
        let s = f64::from(sd);
        let dn: Vec<f64> = dl.iter().map(|c| c * s).collect();
        let nn: Vec<f64> = nl.iter().map(|c| c * s).collect();
        let (Some(dw), Some(nw)) = (weight_of_exact(&dn), weight_of_exact(&nn)) else {
            return Unclassified;
        };
        let (lo, hi) = ratio_range(&nw, &dw, self.cone);
        if zero_inside(lo, hi, sinc) {
            Unclassified
        } else {
            SlowlyIncreasing
        }
    }
}

fn weight_of_exact(lin: &[f64]) -> Option<Weight> {
    lin.iter().map(|&x| from_f64(x)).collect::<Option<Vec<_>>>().map(Weight::new)
}

/// Classifies `e` on the wedge over `cone`. Never returns a class the rules
/// cannot justify.
pub fn classify_growth(e: &Expr, cone: &ConvexCone) -> GrowthClass {
    let n = cone.dim().max(e.arity());
    if e.arity() > cone.dim() {
        return GrowthClass::Unclassified;
    }
    Classifier { cone, n }.class(e)
}
