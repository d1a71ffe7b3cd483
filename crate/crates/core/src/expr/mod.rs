//! Closed grammar of holomorphic expressions in `z = (z_1, …, z_n)`.
//!
//! Nodes are shared through `Arc`, so cloning and composing expressions is
//! cheap. Evaluation is eager and reports poles instead of returning
//! infinities.

mod eval;
#[cfg(feature = "high-precision")]
mod hp;
mod sexpr;

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::cone::Weight;

pub use eval::POLE_TOLERANCE;
#[cfg(feature = "high-precision")]
pub use hp::HpValue;
pub use sexpr::SexprError;

pub type C64 = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("pole of {0}")]
    Pole(&'static str),
    #[error("non-finite intermediate value in {0}")]
    NonFinite(&'static str),
    #[error("expression needs {needed} coordinates, got {given}")]
    DimensionMismatch { needed: usize, given: usize },
    #[error("product index used outside a truncated product")]
    UnboundIndex,
    #[error("argument outside the domain of a numeric function: {0}")]
    OutsideDomain(String),
    #[error("numeric function failed: {0}")]
    Numeric(String),
    #[error("{0} is not supported in this evaluation mode")]
    Unsupported(&'static str),
}

/// A function of `z` available only numerically, with an error estimate.
pub trait NumericFunction: fmt::Debug + Send + Sync {
    fn dim(&self) -> usize;
    /// Value and absolute error estimate.
    fn eval(&self, z: &[C64]) -> Result<(C64, f64), EvalError>;
    fn describe(&self) -> String;
}

#[derive(Debug, Clone)]
pub enum Node {
    Const(C64),
    /// `π`, kept symbolic so extended-precision evaluation sees it exactly.
    Pi,
    /// 0-based coordinate index.
    Coord(usize),
    /// Linear form `Σ λ_i z_i`.
    Affine(Weight),
    /// The running index `k` of the innermost truncated product.
    Index,
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Exp(Expr),
    Sin(Expr),
    Cos(Expr),
    Tanh(Expr),
    /// Principal branch.
    Log(Expr),
    /// `sin(w)/w`, entire.
    Sinc(Expr),
    /// `1/(1 + e^{-w})`.
    Logistic(Expr),
    Pow(Expr, i32),
    Product(Vec<Expr>),
    /// `Π_{k=1}^{order} factor(k)`.
    TruncatedProduct { factor: Expr, order: u64 },
    Numeric(Arc<dyn NumericFunction>),
}

#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn wrap(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: C64) -> Expr {
        Expr::wrap(Node::Const(c))
    }

    pub fn real(x: f64) -> Expr {
        Expr::constant(C64::new(x, 0.0))
    }

    pub fn pi() -> Expr {
        Expr::wrap(Node::Pi)
    }

    pub fn imag_unit() -> Expr {
        Expr::constant(C64::new(0.0, 1.0))
    }

    pub fn coord(i: usize) -> Expr {
        Expr::wrap(Node::Coord(i))
    }

    pub fn affine(w: Weight) -> Expr {
        Expr::wrap(Node::Affine(w))
    }

    pub fn index() -> Expr {
        Expr::wrap(Node::Index)
    }

    pub fn exp(&self) -> Expr {
        Expr::wrap(Node::Exp(self.clone()))
    }

    pub fn sin(&self) -> Expr {
        Expr::wrap(Node::Sin(self.clone()))
    }

    pub fn cos(&self) -> Expr {
        Expr::wrap(Node::Cos(self.clone()))
    }

    pub fn tanh(&self) -> Expr {
        Expr::wrap(Node::Tanh(self.clone()))
    }

    pub fn log(&self) -> Expr {
        Expr::wrap(Node::Log(self.clone()))
    }

    pub fn sinc(&self) -> Expr {
        Expr::wrap(Node::Sinc(self.clone()))
    }

    pub fn logistic(&self) -> Expr {
        Expr::wrap(Node::Logistic(self.clone()))
    }

    pub fn powi(&self, k: i32) -> Expr {
        Expr::wrap(Node::Pow(self.clone(), k))
    }

    pub fn recip(&self) -> Expr {
        Expr::real(1.0) / self
    }

    pub fn product(factors: Vec<Expr>) -> Expr {
        Expr::wrap(Node::Product(factors))
    }

    pub fn truncated_product(factor: Expr, order: u64) -> Expr {
        Expr::wrap(Node::TruncatedProduct { factor, order })
    }

    pub fn numeric(f: Arc<dyn NumericFunction>) -> Expr {
        Expr::wrap(Node::Numeric(f))
    }

    /// Number of coordinates the expression reads (`max index + 1`).
    pub fn arity(&self) -> usize {
        match self.node() {
            Node::Const(_) | Node::Pi | Node::Index => 0,
            Node::Coord(i) => i + 1,
            Node::Affine(w) => w.dim(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.arity().max(b.arity())
            }
            Node::Neg(a)
            | Node::Exp(a)
            | Node::Sin(a)
            | Node::Cos(a)
            | Node::Tanh(a)
            | Node::Log(a)
            | Node::Sinc(a)
            | Node::Logistic(a)
            | Node::Pow(a, _) => a.arity(),
            Node::Product(fs) => fs.iter().map(Expr::arity).max().unwrap_or(0),
            Node::TruncatedProduct { factor, .. } => factor.arity(),
            Node::Numeric(f) => f.dim(),
        }
    }

    /// Replaces the product index by the constant `k`.
    pub fn bind_index(&self, k: u64) -> Expr {
        let kc = || Expr::real(k as f64);
        let un = |a: &Expr, f: fn(Expr) -> Node| Expr::wrap(f(a.bind_index(k)));
        match self.node() {
            Node::Index => kc(),
            Node::Const(_) | Node::Pi | Node::Coord(_) | Node::Affine(_) | Node::Numeric(_) => self.clone(),
            // An inner truncated product rebinds its own index.
            Node::TruncatedProduct { .. } => self.clone(),
            Node::Add(a, b) => a.bind_index(k) + b.bind_index(k),
            Node::Sub(a, b) => a.bind_index(k) - b.bind_index(k),
            Node::Mul(a, b) => a.bind_index(k) * b.bind_index(k),
            Node::Div(a, b) => a.bind_index(k) / b.bind_index(k),
            Node::Neg(a) => un(a, Node::Neg),
            Node::Exp(a) => un(a, Node::Exp),
            Node::Sin(a) => un(a, Node::Sin),
            Node::Cos(a) => un(a, Node::Cos),
            Node::Tanh(a) => un(a, Node::Tanh),
            Node::Log(a) => un(a, Node::Log),
            Node::Sinc(a) => un(a, Node::Sinc),
            Node::Logistic(a) => un(a, Node::Logistic),
            Node::Pow(a, p) => a.bind_index(k).powi(*p),
            Node::Product(fs) => Expr::product(fs.iter().map(|f| f.bind_index(k)).collect()),
        }
    }

    /// Sub-expressions whose zeros are singularities of `self`.
    pub fn singular_denominators(&self) -> Vec<Expr> {
        let mut out = Vec::new();
        self.collect_denominators(&mut out);
        out
    }

    fn collect_denominators(&self, out: &mut Vec<Expr>) {
        match self.node() {
            Node::Const(_) | Node::Pi | Node::Coord(_) | Node::Affine(_) | Node::Index => {}
            Node::Numeric(_) | Node::TruncatedProduct { .. } => {}
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) => {
                a.collect_denominators(out);
                b.collect_denominators(out);
            }
            Node::Div(a, b) => {
                a.collect_denominators(out);
                b.collect_denominators(out);
                out.push(b.clone());
            }
            Node::Neg(a) | Node::Exp(a) | Node::Sin(a) | Node::Cos(a) | Node::Sinc(a) => {
                a.collect_denominators(out)
            }
            Node::Log(a) => {
                a.collect_denominators(out);
                out.push(a.clone());
            }
            Node::Tanh(a) => {
                a.collect_denominators(out);
                out.push(a.exp() + (-a).exp());
            }
            Node::Logistic(a) => {
                a.collect_denominators(out);
                out.push(Expr::real(1.0) + (-a).exp());
            }
            Node::Pow(a, p) => {
                a.collect_denominators(out);
                if *p < 0 {
                    out.push(a.clone());
                }
            }
            Node::Product(fs) => fs.iter().for_each(|f| f.collect_denominators(out)),
        }
    }

    /// Same tree (shared node or identical serialised form).
    pub fn structurally_eq(&self, other: &Expr) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        match (self.to_sexpr(), other.to_sexpr()) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        }
    }

    pub fn has_numeric(&self) -> bool {
        match self.node() {
            Node::Numeric(_) => true,
            Node::Const(_) | Node::Pi | Node::Coord(_) | Node::Affine(_) | Node::Index => false,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.has_numeric() || b.has_numeric()
            }
            Node::Neg(a)
            | Node::Exp(a)
            | Node::Sin(a)
            | Node::Cos(a)
            | Node::Tanh(a)
            | Node::Log(a)
            | Node::Sinc(a)
            | Node::Logistic(a)
            | Node::Pow(a, _) => a.has_numeric(),
            Node::Product(fs) => fs.iter().any(Expr::has_numeric),
            Node::TruncatedProduct { factor, .. } => factor.has_numeric(),
        }
    }
}

macro_rules! binary_op {
    ($tr:ident, $method:ident, $variant:ident) => {
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::wrap(Node::$variant(self, rhs))
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::wrap(Node::$variant(self, rhs.clone()))
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::wrap(Node::$variant(self.clone(), rhs))
            }
        }
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::wrap(Node::$variant(self.clone(), rhs.clone()))
            }
        }
        impl $tr<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::wrap(Node::$variant(self, Expr::real(rhs)))
            }
        }
        impl $tr<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::wrap(Node::$variant(Expr::real(self), rhs))
            }
        }
        impl $tr<C64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: C64) -> Expr {
                Expr::wrap(Node::$variant(self, Expr::constant(rhs)))
            }
        }
        impl $tr<Expr> for C64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::wrap(Node::$variant(Expr::constant(self), rhs))
            }
        }
    };
}

binary_op!(Add, add, Add);
binary_op!(Sub, sub, Sub);
binary_op!(Mul, mul, Mul);
binary_op!(Div, div, Div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::wrap(Node::Neg(self))
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::wrap(Node::Neg(self.clone()))
    }
}

fn fmt_c64(c: &C64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.im == 0.0 {
        write!(f, "{}", c.re)
    } else if c.re == 0.0 {
        if c.im == 1.0 {
            write!(f, "i")
        } else {
            write!(f, "{}i", c.im)
        }
    } else {
        write!(f, "({}{:+}i)", c.re, c.im)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => fmt_c64(c, f),
            Node::Pi => write!(f, "pi"),
            Node::Coord(i) => write!(f, "z{}", i + 1),
            Node::Affine(w) => {
                let terms: Vec<String> = w
                    .coeffs()
                    .iter()
                    .enumerate()
                    .filter(|(_, q)| !num_traits::Zero::is_zero(*q))
                    .map(|(i, q)| format!("{}*z{}", crate::rational::format_rational(q), i + 1))
                    .collect();
                if terms.is_empty() {
                    write!(f, "0")
                } else {
                    write!(f, "({})", terms.join(" + "))
                }
            }
            Node::Index => write!(f, "k"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "{a}*{b}"),
            Node::Div(a, b) => write!(f, "{a}/({b})"),
            Node::Neg(a) => write!(f, "-{a}"),
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Sin(a) => write!(f, "sin({a})"),
            Node::Cos(a) => write!(f, "cos({a})"),
            Node::Tanh(a) => write!(f, "tanh({a})"),
            Node::Log(a) => write!(f, "Log({a})"),
            Node::Sinc(a) => write!(f, "sinc({a})"),
            Node::Logistic(a) => write!(f, "logistic({a})"),
            Node::Pow(a, p) => write!(f, "({a})^{p}"),
            Node::Product(fs) => {
                let parts: Vec<String> = fs.iter().map(|e| e.to_string()).collect();
                write!(f, "[{}]", parts.join(" * "))
            }
            Node::TruncatedProduct { factor, order } => write!(f, "prod_{{k=1..{order}}} {factor}"),
            Node::Numeric(n) => write!(f, "<{}>", n.describe()),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
