//! JSON s-expression form, e.g. `["div", ["exp", ["mul", "i", "z1"]], "z1"]`.
//!
//! Atoms: numbers, `"i"`, `"pi"`, `"k"` (product index) and `"z1"`, `"z2"`, ….
//! Complex constants are `["c", re, im]`; linear forms are
//! `["affine", "p/q", …]`. Floats are written in shortest round-trip form,
//! so serialise → parse → serialise is bit-exact.

use serde_json::{json, Value};
use thiserror::Error;

use super::{Expr, Node, C64};
use crate::cone::Weight;
use crate::rational::{format_rational, parse_rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SexprError {
    #[error("numeric node {0} has no s-expression form")]
    NotSerializable(String),
    #[error("non-finite constant cannot be written to JSON")]
    NonFiniteConstant,
    #[error("malformed s-expression: {0}")]
    Malformed(String),
}

fn num(x: f64) -> Result<Value, SexprError> {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .ok_or(SexprError::NonFiniteConstant)
}

impl Expr {
    pub fn to_sexpr(&self) -> Result<Value, SexprError> {
        let un = |tag: &str, a: &Expr| -> Result<Value, SexprError> { Ok(json!([tag, a.to_sexpr()?])) };
        let bin = |tag: &str, a: &Expr, b: &Expr| -> Result<Value, SexprError> {
            Ok(json!([tag, a.to_sexpr()?, b.to_sexpr()?]))
        };
        match self.node() {
            Node::Const(c) if c.im == 0.0 => num(c.re),
            Node::Const(c) => Ok(json!(["c", num(c.re)?, num(c.im)?])),
            Node::Pi => Ok(Value::String("pi".into())),
            Node::Coord(i) => Ok(Value::String(format!("z{}", i + 1))),
            Node::Affine(w) => {
                let mut v = vec![Value::String("affine".into())];
                v.extend(w.coeffs().iter().map(|q| Value::String(format_rational(q))));
                Ok(Value::Array(v))
            }
            Node::Index => Ok(Value::String("k".into())),
            Node::Add(a, b) => bin("add", a, b),
            Node::Sub(a, b) => bin("sub", a, b),
            Node::Mul(a, b) => bin("mul", a, b),
            Node::Div(a, b) => bin("div", a, b),
            Node::Neg(a) => un("neg", a),
            Node::Exp(a) => un("exp", a),
            Node::Sin(a) => un("sin", a),
            Node::Cos(a) => un("cos", a),
            Node::Tanh(a) => un("tanh", a),
            Node::Log(a) => un("log", a),
            Node::Sinc(a) => un("sinc", a),
            Node::Logistic(a) => un("logistic", a),
            Node::Pow(a, k) => Ok(json!(["pow", a.to_sexpr()?, k])),
            Node::Product(fs) => {
                let mut v = vec![Value::String("prod".into())];
                for f in fs {
                    v.push(f.to_sexpr()?);
                }
                Ok(Value::Array(v))
            }
            Node::TruncatedProduct { factor, order } => {
                Ok(json!(["tprod", order, factor.to_sexpr()?]))
            }
            Node::Numeric(f) => Err(SexprError::NotSerializable(f.describe())),
        }
    }

    pub fn from_sexpr(v: &Value) -> Result<Expr, SexprError> {
        let bad = |what: &str| SexprError::Malformed(format!("{what}: {v}"));
        match v {
            Value::Number(n) => n.as_f64().map(Expr::real).ok_or_else(|| bad("number")),
            Value::String(s) => match s.as_str() {
                "i" => Ok(Expr::imag_unit()),
                "pi" => Ok(Expr::pi()),
                "k" => Ok(Expr::index()),
                s if s.starts_with('z') => match s[1..].parse::<usize>() {
                    Ok(i) if i >= 1 => Ok(Expr::coord(i - 1)),
                    _ => Err(bad("coordinate")),
                },
                _ => Err(bad("atom")),
            },
            Value::Array(items) => {
                let tag = items.first().and_then(Value::as_str).ok_or_else(|| bad("head"))?;
                let args = &items[1..];
                let arg = |i: usize| -> Result<Expr, SexprError> {
                    Expr::from_sexpr(args.get(i).ok_or_else(|| bad("arity"))?)
                };
                let unary = |f: fn(&Expr) -> Expr| -> Result<Expr, SexprError> {
                    if args.len() != 1 {
                        return Err(bad("arity"));
                    }
                    Ok(f(&arg(0)?))
                };
                let fold = |op: fn(Expr, Expr) -> Expr| -> Result<Expr, SexprError> {
                    if args.len() < 2 {
                        return Err(bad("arity"));
                    }
                    let mut acc = arg(0)?;
                    for i in 1..args.len() {
                        acc = op(acc, arg(i)?);
                    }
                    Ok(acc)
                };
                match tag {
                    "c" => {
                        let re = args.first().and_then(Value::as_f64).ok_or_else(|| bad("re"))?;
                        let im = args.get(1).and_then(Value::as_f64).ok_or_else(|| bad("im"))?;
                        Ok(Expr::constant(C64::new(re, im)))
                    }
                    "affine" => {
                        let coeffs = args
                            .iter()
                            .map(|a| a.as_str().and_then(parse_rational).ok_or_else(|| bad("rational")))
                            .collect::<Result<Vec<_>, _>>()?;
                        Ok(Expr::affine(Weight::new(coeffs)))
                    }
                    "add" => fold(|a, b| a + b),
                    "sub" => fold(|a, b| a - b),
                    "mul" => fold(|a, b| a * b),
                    "div" => fold(|a, b| a / b),
                    "neg" => unary(|a| -a),
                    "exp" => unary(Expr::exp),
                    "sin" => unary(Expr::sin),
                    "cos" => unary(Expr::cos),
                    "tanh" => unary(Expr::tanh),
                    "log" => unary(Expr::log),
                    "sinc" => unary(Expr::sinc),
                    "logistic" => unary(Expr::logistic),
                    "pow" => {
                        let k = args
                            .get(1)
                            .and_then(Value::as_i64)
                            .and_then(|k| i32::try_from(k).ok())
                            .ok_or_else(|| bad("exponent"))?;
                        Ok(arg(0)?.powi(k))
                    }
                    "prod" => Ok(Expr::product(
                        (0..args.len()).map(arg).collect::<Result<Vec<_>, _>>()?,
                    )),
                    "tprod" => {
                        let order = args.first().and_then(Value::as_u64).ok_or_else(|| bad("order"))?;
                        Ok(Expr::truncated_product(arg(1)?, order))
                    }
                    _ => Err(bad("operator")),
                }
            }
            _ => Err(bad("value")),
        }
    }
}
