//! Open polyhedral cones cut out by rational half-spaces, polarization of
//! weight sets and polar duality.
//!
//! A cone is stored as the list of functionals `λ` with `λ(y) > 0`; the empty
//! list is the whole space. Everything here is exact.

use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{null_space, Constraint, LinearProgram, LpOutcome, Relation};
use crate::rational::{format_rational, serde_vec, to_f64, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConeError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("weight #{index} is zero")]
    ZeroWeight { index: usize },
    #[error("weight #{index} vanishes on the polarization vector")]
    VanishingWeight { index: usize },
    #[error("cone has empty interior")]
    ConeEmpty,
}

/// A rational linear functional on `R^n`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Weight(#[serde(with = "serde_vec")] Vec<Rational>);

impl Weight {
    pub fn new(coeffs: Vec<Rational>) -> Self {
        Weight(coeffs)
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Weight(coeffs.iter().map(|&c| Rational::from_integer(BigInt::from(c))).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn pair(&self, y: &[Rational]) -> Rational {
        self.0.iter().zip(y).fold(Rational::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn pair_f64(&self, y: &[f64]) -> f64 {
        self.0.iter().zip(y).map(|(a, b)| to_f64(a) * b).sum()
    }

    pub fn apply(&self, z: &[Complex64]) -> Complex64 {
        self.0.iter().zip(z).map(|(a, b)| b * to_f64(a)).sum()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(to_f64).collect()
    }

    /// The positive multiple with coprime integer entries.
    pub fn primitive(&self) -> Weight {
        if self.is_zero() {
            return self.clone();
        }
        let lcm = self
            .0
            .iter()
            .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let ints: Vec<BigInt> = self.0.iter().map(|q| (q * &lcm).to_integer()).collect();
        let gcd = ints
            .iter()
            .fold(BigInt::zero(), |acc, v| acc.gcd(v));
        Weight(
            ints.into_iter()
                .map(|v| Rational::from_integer(v / &gcd))
                .collect(),
        )
    }
}

impl Neg for Weight {
    type Output = Weight;
    fn neg(self) -> Weight {
        Weight(self.0.into_iter().map(|q| -q).collect())
    }
}

impl Neg for &Weight {
    type Output = Weight;
    fn neg(self) -> Weight {
        -self.clone()
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(format_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// `H_λ = {y : λ(y) > 0}` for a nonzero `λ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfSpace(Weight);

impl HalfSpace {
    pub fn weight(&self) -> &Weight {
        &self.0
    }

    pub fn contains(&self, y: &[Rational]) -> bool {
        y.len() == self.0.dim() && self.0.pair(y).is_positive()
    }
}

impl From<HalfSpace> for ConvexCone {
    fn from(h: HalfSpace) -> Self {
        ConvexCone::half_space(h.0)
    }
}

pub fn halfspace_of_weight(w: &Weight) -> Result<HalfSpace, ConeError> {
    if w.dim() == 0 || w.is_zero() {
        return Err(ConeError::ZeroWeight { index: 0 });
    }
    Ok(HalfSpace(w.clone()))
}

/// Open cone `{y : λ(y) > 0 for every listed λ}`.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvexCone {
    dim: usize,
    half_spaces: Vec<Weight>,
}

impl fmt::Debug for ConvexCone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.half_spaces.is_empty() {
            return write!(f, "R^{}", self.dim);
        }
        let parts: Vec<String> = self.half_spaces.iter().map(|w| format!("{w:?}>0")).collect();
        write!(f, "{{{}}}", parts.join(" & "))
    }
}

impl ConvexCone {
    pub fn full(dim: usize) -> Self {
        ConvexCone {
            dim,
            half_spaces: Vec::new(),
        }
    }

    pub fn new(dim: usize, half_spaces: Vec<Weight>) -> Result<Self, ConeError> {
        for w in &half_spaces {
            if w.dim() != dim {
                return Err(ConeError::DimensionMismatch {
                    expected: dim,
                    found: w.dim(),
                });
            }
        }
        Ok(ConvexCone { dim, half_spaces })
    }

    pub fn half_space(w: Weight) -> Self {
        ConvexCone {
            dim: w.dim(),
            half_spaces: vec![w],
        }
    }

    /// The open orthant `{σ_i y_i > 0}`.
    pub fn orthant(signs: &[i8]) -> Self {
        let n = signs.len();
        let half_spaces = signs
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let mut c = vec![0i64; n];
                c[i] = if s >= 0 { 1 } else { -1 };
                Weight::from_ints(&c)
            })
            .collect();
        ConvexCone { dim: n, half_spaces }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_spaces(&self) -> &[Weight] {
        &self.half_spaces
    }

    pub fn is_full(&self) -> bool {
        self.half_spaces.is_empty()
    }

    pub fn contains(&self, y: &[Rational]) -> bool {
        y.len() == self.dim && self.half_spaces.iter().all(|w| w.pair(y).is_positive())
    }

    pub fn closure_contains(&self, y: &[Rational]) -> bool {
        y.len() == self.dim && self.half_spaces.iter().all(|w| !w.pair(y).is_negative())
    }

    pub fn contains_f64(&self, y: &[f64]) -> bool {
        y.len() == self.dim && self.half_spaces.iter().all(|w| w.pair_f64(y) > 0.0)
    }

    pub fn negated(&self) -> ConvexCone {
        ConvexCone {
            dim: self.dim,
            half_spaces: self.half_spaces.iter().map(|w| -w).collect(),
        }
    }

    pub fn intersect(&self, other: &ConvexCone) -> Result<ConvexCone, ConeError> {
        if self.dim != other.dim {
            return Err(ConeError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut half_spaces = self.half_spaces.clone();
        half_spaces.extend(other.half_spaces.iter().cloned());
        Ok(ConvexCone {
            dim: self.dim,
            half_spaces,
        })
    }

    pub fn is_open_nonempty(&self) -> bool {
        self.interior_witness().is_ok()
    }

    /// A point of the cone maximising the smallest defining functional on
    /// the unit ℓ¹ sphere. The whole space gets the origin.
    pub fn interior_witness(&self) -> Result<Vec<Rational>, ConeError> {
        if self.half_spaces.is_empty() {
            return Ok(vec![Rational::zero(); self.dim]);
        }
        if self.half_spaces.iter().any(Weight::is_zero) {
            return Err(ConeError::ConeEmpty);
        }
        // Row generation: solve on a growing subset of the constraints until
        // the optimum of the relaxation satisfies all of them.
        let mut active: Vec<usize> = (0..self.half_spaces.len().min(2 * self.dim + 1)).collect();
        loop {
            let (y, t) = self.witness_lp(&active);
            if !t.is_positive() {
                return Err(ConeError::ConeEmpty);
            }
            let worst = self
                .half_spaces
                .iter()
                .enumerate()
                .map(|(i, w)| (i, w.pair(&y)))
                .min_by(|a, b| a.1.cmp(&b.1))
                .expect("non-empty");
            if worst.1 >= t {
                return Ok(y);
            }
            active.push(worst.0);
        }
    }

    fn witness_lp(&self, active: &[usize]) -> (Vec<Rational>, Rational) {
        let n = self.dim;
        // Variables: u_0..u_{n-1}, w_0..w_{n-1} >= 0 with y = u - w, and t free.
        let mut constraints = Vec::with_capacity(active.len() + 1);
        for &i in active {
            let a = self.half_spaces[i].coeffs();
            let mut c: Vec<Rational> = a.to_vec();
            c.extend(a.iter().map(|q| -q));
            c.push(-Rational::one());
            constraints.push(Constraint::new(c, Relation::Ge, Rational::zero()));
        }
        let mut norm = vec![Rational::one(); 2 * n];
        norm.push(Rational::zero());
        constraints.push(Constraint::new(norm, Relation::Eq, Rational::one()));
        let mut objective = vec![Rational::zero(); 2 * n];
        objective.push(Rational::one());
        let mut free = vec![false; 2 * n];
        free.push(true);
        let lp = LinearProgram {
            objective,
            free,
            constraints,
        };
        match lp.solve() {
            LpOutcome::Optimal { x, value } => {
                let y: Vec<Rational> = (0..n).map(|j| &x[j] - &x[n + j]).collect();
                // Rescale onto the unit ℓ¹ sphere if the optimum left slack.
                let l1 = y.iter().fold(Rational::zero(), |acc, v| acc + v.abs());
                if l1.is_zero() {
                    (y, Rational::zero())
                } else {
                    let y: Vec<Rational> = y.into_iter().map(|v| v / &l1).collect();
                    (y, value / l1)
                }
            }
            _ => (vec![Rational::zero(); n], Rational::zero()),
        }
    }

    /// Drops redundant half-spaces. Errors on an empty cone.
    pub fn pruned(&self) -> Result<ConvexCone, ConeError> {
        let witness = self.interior_witness()?;
        let mut unique: Vec<Weight> = Vec::new();
        for w in &self.half_spaces {
            let p = w.primitive();
            if !unique.contains(&p) {
                unique.push(p);
            }
        }
        let kept = match self.dim {
            0 => Vec::new(),
            1 => unique.into_iter().take(1).collect(),
            2 => prune_planar(unique, &witness),
            _ => prune_by_lp(unique, self.dim),
        };
        Ok(ConvexCone {
            dim: self.dim,
            half_spaces: kept,
        })
    }

    /// Inclusion of open cones, decided on closures (both must be non-empty).
    pub fn is_subset_of(&self, other: &ConvexCone) -> Result<bool, ConeError> {
        if self.dim != other.dim {
            return Err(ConeError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mine = self.pruned()?;
        other.interior_witness()?;
        Ok(other
            .half_spaces
            .iter()
            .all(|w| implied_by(&mine.half_spaces, w, self.dim)))
    }

    pub fn same_as(&self, other: &ConvexCone) -> Result<bool, ConeError> {
        Ok(self.is_subset_of(other)? && other.is_subset_of(self)?)
    }

    /// Generators of the closure: extreme rays plus `±` a lineality basis.
    pub fn closure_generators(&self) -> Result<Vec<Weight>, ConeError> {
        let pruned = self.pruned()?;
        let n = self.dim;
        let rows: Vec<Vec<Rational>> = pruned.half_spaces.iter().map(|w| w.0.clone()).collect();
        let lineality = null_space(&rows, n);
        let mut gens: Vec<Weight> = Vec::new();
        for l in &lineality {
            let w = Weight(l.clone()).primitive();
            gens.push(-&w);
            gens.push(w);
        }
        let target = n - lineality.len();
        if target == 0 {
            return Ok(gens);
        }
        for subset in subsets(rows.len(), target - 1) {
            let mut eqs: Vec<Vec<Rational>> = subset.iter().map(|&i| rows[i].clone()).collect();
            eqs.extend(lineality.iter().cloned());
            let ns = null_space(&eqs, n);
            if ns.len() != 1 {
                continue;
            }
            let d = Weight(ns[0].clone());
            for cand in [d.primitive(), (-&d).primitive()] {
                let ok = pruned.half_spaces.iter().all(|w| !w.pair(&cand.0).is_negative())
                    && pruned.half_spaces.iter().any(|w| w.pair(&cand.0).is_positive());
                if ok && !gens.contains(&cand) {
                    gens.push(cand);
                }
            }
        }
        Ok(gens)
    }

    /// `interior_witness` rounded to floats.
    pub fn witness_f64(&self) -> Result<Vec<f64>, ConeError> {
        Ok(self.interior_witness()?.iter().map(to_f64).collect())
    }

    /// Polar dual `{ξ : ξ(y) ≥ 0 on the cone}`, returned through its interior
    /// description: the generators of this cone become its functionals. A
    /// dual with empty interior (this cone not pointed) is still returned; it
    /// then reports `is_open_nonempty() == false` and is meaningful through
    /// `closure_contains`.
    pub fn polar_dual(&self) -> Result<ConvexCone, ConeError> {
        Ok(ConvexCone {
            dim: self.dim,
            half_spaces: self.closure_generators()?,
        })
    }
}

fn implied_by(half_spaces: &[Weight], w: &Weight, n: usize) -> bool {
    // cl(C) ⊆ {w ≥ 0}  iff  {A y ≥ 0, w·y ≤ -1} is infeasible.
    let mut constraints: Vec<Constraint> = half_spaces
        .iter()
        .map(|h| Constraint::new(h.0.clone(), Relation::Ge, Rational::zero()))
        .collect();
    constraints.push(Constraint::new(w.0.clone(), Relation::Le, -Rational::one()));
    let lp = LinearProgram {
        objective: vec![Rational::zero(); n],
        free: vec![true; n],
        constraints,
    };
    !lp.solve().is_feasible()
}

fn prune_planar(ws: Vec<Weight>, witness: &[Rational]) -> Vec<Weight> {
    // Every functional is positive on the witness, so the functionals span an
    // arc shorter than π; the two angular extremes generate them all.
    let key = |w: &Weight| {
        let a = w.coeffs();
        let cross = &witness[0] * &a[1] - &witness[1] * &a[0];
        cross / w.pair(witness)
    };
    let lo = ws.iter().min_by(|a, b| key(a).cmp(&key(b))).cloned();
    let hi = ws.iter().max_by(|a, b| key(a).cmp(&key(b))).cloned();
    match (lo, hi) {
        (Some(lo), Some(hi)) if lo == hi => vec![lo],
        (Some(lo), Some(hi)) => vec![lo, hi],
        _ => Vec::new(),
    }
}

fn prune_by_lp(mut ws: Vec<Weight>, n: usize) -> Vec<Weight> {
    let mut i = 0;
    while i < ws.len() {
        let others: Vec<Weight> = ws
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, w)| w.clone())
            .collect();
        if implied_by(&others, &ws[i], n) {
            ws.remove(i);
        } else {
            i += 1;
        }
    }
    ws
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

pub fn intersect_cones(a: &ConvexCone, b: &ConvexCone) -> Result<ConvexCone, ConeError> {
    a.intersect(b)
}

pub fn is_open_nonempty(c: &ConvexCone) -> bool {
    c.is_open_nonempty()
}

pub fn polar_dual(c: &ConvexCone) -> Result<ConvexCone, ConeError> {
    c.polar_dual()
}

/// Weights flipped to be positive on a polarization vector `ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizedWeightSet {
    pub original: Vec<Weight>,
    pub polarized: Vec<Weight>,
    pub flipped: Vec<bool>,
    /// Product of `sgn λ(ξ)`.
    pub sign: i8,
    /// `∩ {λ̃ > 0}`, unpruned.
    pub cone: ConvexCone,
}

impl PolarizedWeightSet {
    pub fn flip_count(&self) -> usize {
        self.flipped.iter().filter(|f| **f).count()
    }
}

pub fn polarize(weights: &[Weight], xi: &[Rational]) -> Result<PolarizedWeightSet, ConeError> {
    let n = xi.len();
    let mut polarized = Vec::with_capacity(weights.len());
    let mut flipped = Vec::with_capacity(weights.len());
    for (index, w) in weights.iter().enumerate() {
        if w.dim() != n {
            return Err(ConeError::DimensionMismatch {
                expected: n,
                found: w.dim(),
            });
        }
        if w.is_zero() {
            return Err(ConeError::ZeroWeight { index });
        }
        let v = w.pair(xi);
        if v.is_zero() {
            return Err(ConeError::VanishingWeight { index });
        }
        let flip = v.is_negative();
        flipped.push(flip);
        polarized.push(if flip { -w } else { w.clone() });
    }
    let sign = if flipped.iter().filter(|f| **f).count() % 2 == 0 {
        1
    } else {
        -1
    };
    let cone = ConvexCone::new(n, polarized.clone())?;
    Ok(PolarizedWeightSet {
        original: weights.to_vec(),
        polarized,
        flipped,
        sign,
        cone,
    })
}
