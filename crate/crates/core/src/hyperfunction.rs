//! Hyperfunctions as raw sums of boundary values `Σ_j b_{γ_j}(F_j)`.
//!
//! No quotient by the equivalence relation is taken; two presentations are
//! compared only numerically through [`equality_probe`].

use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

use crate::cone::{ConeError, ConvexCone};
use crate::expr::{EvalError, Expr, SexprError, C64};
use crate::growth::{classify_growth, GrowthClass};
use crate::rational::to_f64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HyperfunctionError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cone has empty interior")]
    ConeEmpty,
    #[error("product undefined: {0}")]
    ProductUndefined(String),
    #[error("truncated product does not converge (Cauchy estimate {estimate:e})")]
    ConvergenceError { estimate: f64 },
    #[error("evaluation of term {term} blocked at eps = {eps}: {source}")]
    EvaluationBlocked {
        term: usize,
        eps: f64,
        #[source]
        source: EvalError,
    },
    #[error("boundary values diverge like eps^-{trend:.2} (last |S| = {last:e})")]
    Divergent { trend: f64, last: f64 },
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("malformed hyperfunction JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

impl From<SexprError> for HyperfunctionError {
    fn from(e: SexprError) -> Self {
        HyperfunctionError::Json(e.to_string())
    }
}

/// One boundary value `b_γ(F)`.
#[derive(Clone)]
pub struct BoundaryValueTerm {
    expr: Expr,
    cone: ConvexCone,
    growth: GrowthClass,
    /// Interior witness of `cone`, unit ℓ¹ norm (zero for `R^n`).
    direction: Vec<f64>,
}

impl fmt::Debug for BoundaryValueTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b_{:?}({})", self.cone, self.expr)
    }
}

impl BoundaryValueTerm {
    /// Builds `b_γ(F)`, classifying the growth of `F` on `γ`.
    pub fn new(expr: Expr, cone: ConvexCone) -> Result<Self, HyperfunctionError> {
        let growth = classify_growth(&expr, &cone);
        Self::with_growth(expr, cone, growth)
    }

    /// Builds a term with a growth class established elsewhere.
    pub fn with_growth(expr: Expr, cone: ConvexCone, growth: GrowthClass) -> Result<Self, HyperfunctionError> {
        if expr.arity() > cone.dim() {
            return Err(HyperfunctionError::DimensionMismatch {
                expected: cone.dim(),
                found: expr.arity(),
            });
        }
        let witness = cone.interior_witness().map_err(|_| HyperfunctionError::ConeEmpty)?;
        let direction = witness.iter().map(to_f64).collect();
        let term = BoundaryValueTerm {
            expr,
            cone,
            growth,
            direction,
        };
        if !term.expr.has_numeric() {
            term.probe_definedness()?;
        }
        Ok(term)
    }

    /// Rejects expressions that already fail at a generic point of the wedge.
    fn probe_definedness(&self) -> Result<(), HyperfunctionError> {
        let n = self.cone.dim();
        let eps = 0.1;
        let x: Vec<f64> = (0..n).map(|i| 0.3 + 0.17 * i as f64).collect();
        match self.evaluate_at(&x, eps) {
            Err(source @ EvalError::Pole(_)) => Err(HyperfunctionError::EvaluationBlocked { term: 0, eps, source }),
            _ => Ok(()),
        }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn cone(&self) -> &ConvexCone {
        &self.cone
    }

    pub fn growth(&self) -> &GrowthClass {
        &self.growth
    }

    pub fn dim(&self) -> usize {
        self.cone.dim()
    }

    /// Probe direction `v` used for `F(x + iεv)`.
    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn scaled(&self, c: C64) -> BoundaryValueTerm {
        BoundaryValueTerm {
            expr: Expr::constant(c) * &self.expr,
            ..self.clone()
        }
    }

    /// `F(x + iεv)`.
    pub fn evaluate_at(&self, x: &[f64], eps: f64) -> Result<C64, EvalError> {
        self.evaluate_at_with_error(x, eps).map(|(v, _)| v)
    }

    /// `F(x + iεv)` with the error inherited from numeric sub-expressions.
    pub fn evaluate_at_with_error(&self, x: &[f64], eps: f64) -> Result<(C64, f64), EvalError> {
        let z: Vec<C64> = x
            .iter()
            .zip(&self.direction)
            .map(|(&xi, &vi)| C64::new(xi, eps * vi))
            .collect();
        if self.expr.has_numeric() {
            self.expr.evaluate_with_error(&z)
        } else {
            self.expr.evaluate(&z).map(|v| (v, 0.0))
        }
    }

    pub fn to_json(&self) -> Result<Value, HyperfunctionError> {
        Ok(json!({
            "expr": self.expr.to_sexpr()?,
            "cone": serde_json::to_value(&self.cone).map_err(|e| HyperfunctionError::Json(e.to_string()))?,
            "growth": serde_json::to_value(&self.growth).map_err(|e| HyperfunctionError::Json(e.to_string()))?,
        }))
    }

    pub fn from_json(v: &Value) -> Result<Self, HyperfunctionError> {
        let field = |k: &str| v.get(k).ok_or_else(|| HyperfunctionError::Json(format!("missing field {k}")));
        let expr = Expr::from_sexpr(field("expr")?)?;
        let cone: ConvexCone =
            serde_json::from_value(field("cone")?.clone()).map_err(|e| HyperfunctionError::Json(e.to_string()))?;
        let growth: GrowthClass =
            serde_json::from_value(field("growth")?.clone()).map_err(|e| HyperfunctionError::Json(e.to_string()))?;
        Self::with_growth(expr, cone, growth)
    }
}

/// A finite formal sum of boundary values on `R^dim`.
#[derive(Clone, Debug)]
pub struct Hyperfunction {
    dim: usize,
    terms: Vec<BoundaryValueTerm>,
}

impl Hyperfunction {
    pub fn zero(dim: usize) -> Self {
        Hyperfunction { dim, terms: Vec::new() }
    }

    pub fn from_terms(dim: usize, terms: Vec<BoundaryValueTerm>) -> Result<Self, HyperfunctionError> {
        for t in &terms {
            if t.dim() != dim {
                return Err(HyperfunctionError::DimensionMismatch {
                    expected: dim,
                    found: t.dim(),
                });
            }
        }
        Ok(Hyperfunction { dim, terms })
    }

    pub fn single(term: BoundaryValueTerm) -> Self {
        Hyperfunction {
            dim: term.dim(),
            terms: vec![term],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[BoundaryValueTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: C64) -> Hyperfunction {
        Hyperfunction {
            dim: self.dim,
            terms: self.terms.iter().map(|t| t.scaled(c)).collect(),
        }
    }

    pub fn to_json(&self) -> Result<Value, HyperfunctionError> {
        Ok(Value::Array(
            self.terms.iter().map(BoundaryValueTerm::to_json).collect::<Result<_, _>>()?,
        ))
    }

    /// Parses a term array; `dim` is needed for the empty sum.
    pub fn from_json(v: &Value, dim: usize) -> Result<Self, HyperfunctionError> {
        let items = v
            .as_array()
            .ok_or_else(|| HyperfunctionError::Json("expected an array of terms".into()))?;
        let terms = items
            .iter()
            .map(BoundaryValueTerm::from_json)
            .collect::<Result<Vec<_>, _>>()?;
        Hyperfunction::from_terms(dim, terms)
    }
}

/// `f + g`: the concatenated term list.
pub fn add(f: &Hyperfunction, g: &Hyperfunction) -> Result<Hyperfunction, HyperfunctionError> {
    if f.dim != g.dim {
        return Err(HyperfunctionError::DimensionMismatch {
            expected: f.dim,
            found: g.dim,
        });
    }
    let mut terms = f.terms.clone();
    terms.extend(g.terms.iter().cloned());
    Ok(Hyperfunction { dim: f.dim, terms })
}

/// `f - g`.
pub fn sub(f: &Hyperfunction, g: &Hyperfunction) -> Result<Hyperfunction, HyperfunctionError> {
    add(f, &g.scale(C64::new(-1.0, 0.0)))
}

/// `f · g` as `Σ_{j,k} b_{γ_j ∩ Δ_k}(F_j G_k)`; every pairwise cone
/// intersection must have interior.
pub fn product(f: &Hyperfunction, g: &Hyperfunction) -> Result<Hyperfunction, HyperfunctionError> {
    if f.dim != g.dim {
        return Err(HyperfunctionError::DimensionMismatch {
            expected: f.dim,
            found: g.dim,
        });
    }
    let mut terms = Vec::with_capacity(f.terms.len() * g.terms.len());
    for (j, a) in f.terms.iter().enumerate() {
        for (k, b) in g.terms.iter().enumerate() {
            let cone = a.cone.intersect(&b.cone)?;
            let cone = cone
                .pruned()
                .map_err(|_| HyperfunctionError::ProductUndefined(format!("cones of terms ({j}, {k}) do not meet")))?;
            let expr = &a.expr * &b.expr;
            let growth = a.growth.times(&b.growth);
            terms.push(BoundaryValueTerm::with_growth(expr, cone, growth)?);
        }
    }
    Ok(Hyperfunction { dim: f.dim, terms })
}

/// The sequence of factors `b_{γ_k}(F_k)`, `k = 1, 2, …`, with `F_k` given
/// symbolically in the product index.
pub struct TermSequence {
    dim: usize,
    factor: Expr,
    cones: Box<dyn Fn(u64) -> ConvexCone + Send + Sync>,
}

impl TermSequence {
    /// `factor` uses [`Expr::index`] for `k`; `cones(k)` gives `γ_k`.
    pub fn new(dim: usize, factor: Expr, cones: impl Fn(u64) -> ConvexCone + Send + Sync + 'static) -> Self {
        TermSequence {
            dim,
            factor,
            cones: Box::new(cones),
        }
    }

    pub fn factor(&self) -> &Expr {
        &self.factor
    }

    pub fn cone(&self, k: u64) -> ConvexCone {
        (self.cones)(k)
    }

    pub fn term(&self, k: u64) -> Result<BoundaryValueTerm, HyperfunctionError> {
        BoundaryValueTerm::new(self.factor.bind_index(k), self.cone(k))
    }
}

#[derive(Clone, Debug)]
pub struct ProductOptions {
    /// Probe points `z` for the Cauchy test; empty means points
    /// `x + i·v` around the witness `v` of the intersected cone.
    pub probes: Vec<Vec<C64>>,
    /// Relative tolerance on `|P_{2K} - P_K| / max(1, |P_{2K}|)`.
    pub tolerance: f64,
}

impl Default for ProductOptions {
    fn default() -> Self {
        ProductOptions {
            probes: Vec::new(),
            tolerance: 1e-3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct InfiniteProduct {
    pub term: BoundaryValueTerm,
    /// Largest `|P_{2K} - P_K|` over the probes.
    pub cauchy_estimate: f64,
    /// Number of probes used.
    pub probes: usize,
}

fn implied(w: &crate::cone::Weight, generators: &[crate::cone::Weight]) -> bool {
    use num_traits::Signed;
    generators.iter().all(|g| !w.pair(g.coeffs()).is_negative())
}

/// `Π_{k=1}^{K} b_{γ_k}(F_k)` as a single term on `∩ γ_k`.
///
/// The intersection is exact for `k ≤ K`; for `K < k ≤ 2K` every new
/// half-space is checked on a sample grid of the accumulated cone.
pub fn infinite_product(
    seq: &TermSequence,
    order: u64,
    opts: &ProductOptions,
) -> Result<InfiniteProduct, HyperfunctionError> {
    if order == 0 {
        return Err(HyperfunctionError::InvalidOptions("truncation order must be positive".into()));
    }
    let mut acc = ConvexCone::full(seq.dim);
    let mut gens = acc.closure_generators()?;
    for k in 1..=order {
        let ck = seq.cone(k);
        if ck.dim() != seq.dim {
            return Err(HyperfunctionError::DimensionMismatch {
                expected: seq.dim,
                found: ck.dim(),
            });
        }
        let new: Vec<_> = ck.half_spaces().iter().filter(|w| !implied(w, &gens)).cloned().collect();
        if new.is_empty() {
            continue;
        }
        let next = acc.intersect(&ConvexCone::new(seq.dim, new)?)?;
        acc = next.pruned().map_err(|_| {
            HyperfunctionError::ProductUndefined(format!("factor {k} empties the intersection of the cones"))
        })?;
        gens = acc.closure_generators()?;
    }
    let witness = acc.witness_f64()?;
    let grid = sample_grid(&witness, &gens);
    for k in order + 1..=2 * order {
        for w in seq.cone(k).half_spaces() {
            if let Some(y) = grid.iter().find(|y| w.pair_f64(y) <= 0.0) {
                return Err(HyperfunctionError::ProductUndefined(format!(
                    "factor {k} cuts the intersection (sample point {y:?})"
                )));
            }
        }
    }

    let probes = if opts.probes.is_empty() {
        default_probes(&witness)
    } else {
        opts.probes.clone()
    };
    let pk = Expr::truncated_product(seq.factor.clone(), order);
    let p2k = Expr::truncated_product(seq.factor.clone(), 2 * order);
    let mut estimate: f64 = 0.0;
    for z in &probes {
        let a = pk.evaluate(z);
        let b = p2k.evaluate(z);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                let d = (b - a).norm();
                estimate = estimate.max(d);
                if !(d <= opts.tolerance * b.norm().max(1.0)) {
                    return Err(HyperfunctionError::ConvergenceError { estimate: d });
                }
            }
            (Err(EvalError::NonFinite(_)), _) | (_, Err(EvalError::NonFinite(_))) => {
                return Err(HyperfunctionError::ConvergenceError { estimate: f64::INFINITY });
            }
            (Err(source), _) | (_, Err(source)) => {
                return Err(HyperfunctionError::EvaluationBlocked { term: 0, eps: 1.0, source });
            }
        }
    }
    let term = BoundaryValueTerm::new(pk, acc)?;
    Ok(InfiniteProduct {
        term,
        cauchy_estimate: estimate,
        probes: probes.len(),
    })
}

/// Interior points `(1-s)·w + s·g/|g|₁` between the witness and each
/// generator of the closure.
fn sample_grid(witness: &[f64], gens: &[crate::cone::Weight]) -> Vec<Vec<f64>> {
    let mut out = vec![witness.to_vec()];
    for g in gens {
        let gf = g.to_f64();
        let norm: f64 = gf.iter().map(|v| v.abs()).sum();
        if norm == 0.0 {
            continue;
        }
        for s in [0.25, 0.5, 0.75, 0.9375] {
            out.push(witness.iter().zip(&gf).map(|(w, g)| (1.0 - s) * w + s * g / norm).collect());
        }
    }
    out
}

fn default_probes(witness: &[f64]) -> Vec<Vec<C64>> {
    let n = witness.len();
    let at = |x: &[f64]| -> Vec<C64> { x.iter().zip(witness).map(|(&a, &b)| C64::new(a, b)).collect() };
    let mut out = vec![at(&vec![0.0; n])];
    for i in 0..n {
        for s in [-0.25, 0.25] {
            let mut x = vec![0.0; n];
            x[i] = s;
            out.push(at(&x));
        }
    }
    out
}

/// Boundary value with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryValue {
    pub value: C64,
    pub error: f64,
}

/// Sequence `ε_k` and number of Richardson levels for `ε → 0⁺`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryOptions {
    pub eps: Vec<f64>,
    pub levels: usize,
}

impl Default for BoundaryOptions {
    fn default() -> Self {
        BoundaryOptions::halving(4, 14, 3)
    }
}

impl BoundaryOptions {
    /// `ε_k = 2^{-k}`, `k = first..=last`.
    pub fn halving(first: i32, last: i32, levels: usize) -> Self {
        BoundaryOptions {
            eps: (first..=last).map(|k| 2f64.powi(-k)).collect(),
            levels,
        }
    }

    fn validate(&self) -> Result<(), HyperfunctionError> {
        if self.eps.len() < self.levels + 2 {
            return Err(HyperfunctionError::InvalidOptions(format!(
                "{} levels need at least {} eps values",
                self.levels,
                self.levels + 2
            )));
        }
        if self.eps.iter().any(|e| !(*e > 0.0)) || self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(HyperfunctionError::InvalidOptions(
                "eps must be positive and strictly decreasing".into(),
            ));
        }
        Ok(())
    }
}

/// Limit of `Σ_j F_j(x + iεv_j)` as `ε → 0⁺` by Richardson extrapolation.
///
/// The error is the last extrapolation increment plus the propagated error
/// of numeric sub-expressions.
pub fn boundary_evaluate(
    f: &Hyperfunction,
    x: &[f64],
    opts: &BoundaryOptions,
) -> Result<BoundaryValue, HyperfunctionError> {
    opts.validate()?;
    if x.len() != f.dim {
        return Err(HyperfunctionError::DimensionMismatch {
            expected: f.dim,
            found: x.len(),
        });
    }
    let mut samples = Vec::with_capacity(opts.eps.len());
    let mut sample_err = Vec::with_capacity(opts.eps.len());
    for &eps in &opts.eps {
        let mut s = C64::new(0.0, 0.0);
        let mut e = 0.0;
        for (j, t) in f.terms.iter().enumerate() {
            let (v, err) = t
                .evaluate_at_with_error(x, eps)
                .map_err(|source| HyperfunctionError::EvaluationBlocked { term: j, eps, source })?;
            s += v;
            e += err;
        }
        samples.push(s);
        sample_err.push(e);
    }
    richardson(&opts.eps, &samples, &sample_err, opts.levels)
}

fn richardson(eps: &[f64], s: &[C64], err: &[f64], levels: usize) -> Result<BoundaryValue, HyperfunctionError> {
    let m = s.len();
    // Divergence: |S| growing like a power of 1/ε over the last three steps.
    let trend: Vec<f64> = (m - 3..m)
        .map(|i| (s[i].norm() / s[i - 1].norm()).ln() / (eps[i - 1] / eps[i]).ln())
        .collect();
    if s[m - 1].norm() > 1e-6 && trend.iter().all(|p| *p > 0.5) {
        return Err(HyperfunctionError::Divergent {
            trend: trend[2],
            last: s[m - 1].norm(),
        });
    }
    // Neville-type table for an expansion in integer powers of ε.
    let mut t = vec![vec![C64::new(0.0, 0.0); levels + 1]; m];
    let mut e = vec![vec![0.0; levels + 1]; m];
    for i in 0..m {
        t[i][0] = s[i];
        e[i][0] = err[i];
        for j in 1..=levels.min(i) {
            let r = eps[i - j] / eps[i];
            t[i][j] = t[i][j - 1] + (t[i][j - 1] - t[i - 1][j - 1]) / (r - 1.0);
            e[i][j] = (r * e[i][j - 1] + e[i - 1][j - 1]) / (r - 1.0);
        }
    }
    let value = t[m - 1][levels];
    let increment = (t[m - 1][levels] - t[m - 2][levels]).norm();
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(HyperfunctionError::Divergent {
            trend: f64::INFINITY,
            last: f64::INFINITY,
        });
    }
    Ok(BoundaryValue {
        value,
        error: increment + e[m - 1][levels],
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    ConsistentWithEqual,
    /// A point where `f - g` is visibly nonzero, with `|f - g|` there.
    Distinguished { x: Vec<f64>, gap: f64 },
}

#[derive(Clone, Debug)]
pub struct ProbeOptions {
    /// Grid points per axis.
    pub steps: usize,
    pub boundary: BoundaryOptions,
    /// `|f - g|` must exceed this as well as 10× its error estimate.
    pub floor: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            steps: 9,
            boundary: BoundaryOptions::default(),
            floor: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub verdict: Verdict,
    /// Grid points where evaluation was blocked by a pole.
    pub blocked: Vec<Vec<f64>>,
    pub evaluated: usize,
}

/// Heuristic comparison of `f` and `g` on the box `window` (one `(lo, hi)`
/// per axis). Never a proof of equality.
pub fn equality_probe(
    f: &Hyperfunction,
    g: &Hyperfunction,
    window: &[(f64, f64)],
    opts: &ProbeOptions,
) -> Result<ProbeReport, HyperfunctionError> {
    let diff = sub(f, g)?;
    if window.len() != diff.dim {
        return Err(HyperfunctionError::DimensionMismatch {
            expected: diff.dim,
            found: window.len(),
        });
    }
    if opts.steps == 0 {
        return Err(HyperfunctionError::InvalidOptions("probe grid is empty".into()));
    }
    let axis = |(lo, hi): (f64, f64)| -> Vec<f64> {
        if opts.steps == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..opts.steps)
                .map(|i| lo + (hi - lo) * i as f64 / (opts.steps - 1) as f64)
                .collect()
        }
    };
    let axes: Vec<Vec<f64>> = window.iter().map(|&w| axis(w)).collect();
    let mut blocked = Vec::new();
    let mut evaluated = 0;
    for x in cartesian(&axes) {
        match boundary_evaluate(&diff, &x, &opts.boundary) {
            Ok(bv) => {
                evaluated += 1;
                let gap = bv.value.norm();
                if gap > 10.0 * bv.error && gap > opts.floor {
                    return Ok(ProbeReport {
                        verdict: Verdict::Distinguished { x, gap },
                        blocked,
                        evaluated,
                    });
                }
            }
            Err(HyperfunctionError::Divergent { last, .. }) => {
                evaluated += 1;
                return Ok(ProbeReport {
                    verdict: Verdict::Distinguished { x, gap: last },
                    blocked,
                    evaluated,
                });
            }
            Err(HyperfunctionError::EvaluationBlocked { .. }) => blocked.push(x),
            Err(e) => return Err(e),
        }
    }
    Ok(ProbeReport {
        verdict: Verdict::ConsistentWithEqual,
        blocked,
        evaluated,
    })
}

pub(crate) fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}
