//! Picken hyperfunctions assembled from isolated fixed-point data:
//! `L = (2πi)^{-d} Σ_p (−1)^p b_{γ_p}(e^{iμ(p)(z)} Π_λ 1/λ̃(z))`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cone::{polarize, ConeError, ConvexCone, PolarizedWeightSet, Weight};
use crate::expr::{Expr, C64};
use crate::hyperfunction::{BoundaryValueTerm, Hyperfunction, HyperfunctionError};
use crate::rational::{int, serde_vec, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LocalizationError {
    #[error("fixed point {label}: moment has {found} components, torus rank is {rank}")]
    MomentDimension { label: String, rank: usize, found: usize },
    #[error("fixed point {label}: polarized weights span no open cone")]
    ConeEmpty { label: String },
    #[error("fixed point {label}: {source}")]
    Polarization {
        label: String,
        #[source]
        source: ConeError,
    },
    #[error("malformed localization problem: {0}")]
    Json(String),
    #[error(transparent)]
    Hyperfunction(#[from] HyperfunctionError),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

/// One isolated fixed point: its moment value and isotropy weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointDatum {
    pub label: String,
    pub moment: Vec<f64>,
    pub weights: Vec<Weight>,
}

/// Fixed-point data with a polarization vector `ξ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationProblem {
    pub rank: usize,
    #[serde(with = "serde_vec")]
    pub polarization: Vec<Rational>,
    pub fixed_points: Vec<FixedPointDatum>,
}

/// A fixed point after polarization.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarizedFixedPoint {
    pub label: String,
    pub moment: Vec<f64>,
    pub weights: PolarizedWeightSet,
}

impl PolarizedFixedPoint {
    /// `(−1)^p`.
    pub fn sign(&self) -> i8 {
        self.weights.sign
    }

    /// `γ_p = ∩ {λ̃ > 0}`.
    pub fn cone(&self) -> &ConvexCone {
        &self.weights.cone
    }
}

impl FixedPointDatum {
    pub fn new(label: impl Into<String>, moment: Vec<f64>, weights: Vec<Weight>) -> Self {
        FixedPointDatum {
            label: label.into(),
            moment,
            weights,
        }
    }

    pub fn polarize(&self, xi: &[Rational]) -> Result<PolarizedFixedPoint, LocalizationError> {
        if self.moment.len() != xi.len() {
            return Err(LocalizationError::MomentDimension {
                label: self.label.clone(),
                rank: xi.len(),
                found: self.moment.len(),
            });
        }
        let weights = polarize(&self.weights, xi).map_err(|source| LocalizationError::Polarization {
            label: self.label.clone(),
            source,
        })?;
        if !weights.cone.is_open_nonempty() {
            return Err(LocalizationError::ConeEmpty {
                label: self.label.clone(),
            });
        }
        Ok(PolarizedFixedPoint {
            label: self.label.clone(),
            moment: self.moment.clone(),
            weights,
        })
    }
}

impl LocalizationProblem {
    /// `S²` rotated about its axis: `N` with `μ = 1`, weight `1`; `S` with
    /// `μ = −1`, weight `−1`; `ξ = −1`.
    pub fn builtin_s2() -> Self {
        LocalizationProblem {
            rank: 1,
            polarization: vec![int(-1)],
            fixed_points: vec![
                FixedPointDatum::new("N", vec![1.0], vec![Weight::from_ints(&[1])]),
                FixedPointDatum::new("S", vec![-1.0], vec![Weight::from_ints(&[-1])]),
            ],
        }
    }

    pub fn with_polarization(mut self, xi: Vec<Rational>) -> Self {
        self.polarization = xi;
        self
    }

    pub fn polarized(&self) -> Result<Vec<PolarizedFixedPoint>, LocalizationError> {
        if self.polarization.len() != self.rank {
            return Err(LocalizationError::Json(format!(
                "polarization has {} components, rank is {}",
                self.polarization.len(),
                self.rank
            )));
        }
        self.fixed_points.iter().map(|p| p.polarize(&self.polarization)).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("problem serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, LocalizationError> {
        let p: LocalizationProblem = serde_json::from_value(v.clone()).map_err(|e| LocalizationError::Json(e.to_string()))?;
        p.polarized()?;
        Ok(p)
    }
}

/// `b_{γ_p}(Π 1/λ̃(z))`; the sign `(−1)^p` is carried by `p`, not the term.
pub fn euler_reciprocal(p: &PolarizedFixedPoint) -> Result<BoundaryValueTerm, LocalizationError> {
    let cone = p.cone().pruned().map_err(|_| LocalizationError::ConeEmpty { label: p.label.clone() })?;
    Ok(BoundaryValueTerm::new(reciprocal_expr(p), cone)?)
}

fn reciprocal_expr(p: &PolarizedFixedPoint) -> Expr {
    Expr::product(p.weights.polarized.iter().map(|w| Expr::affine(w.clone()).recip()).collect())
}

/// `e^{iμ(z)}`.
pub fn phase(moment: &[f64]) -> Expr {
    let exponent = moment
        .iter()
        .enumerate()
        .filter(|(_, m)| **m != 0.0)
        .map(|(j, &m)| Expr::constant(C64::new(0.0, m)) * Expr::coord(j))
        .reduce(|a, b| a + b);
    match exponent {
        Some(e) => e.exp(),
        None => Expr::real(1.0),
    }
}

/// `(2πi)^{-d}`.
pub fn normalization(rank: usize) -> C64 {
    C64::new(0.0, 2.0 * PI).powi(-(rank as i32))
}

/// Picken hyperfunction of `problem`. Fixed points sharing a cone are
/// merged into one boundary-value term.
pub fn picken(problem: &LocalizationProblem) -> Result<Hyperfunction, LocalizationError> {
    let points = problem.polarized()?;
    let scale = normalization(problem.rank);
    let mut grouped: Vec<(ConvexCone, Expr)> = Vec::new();
    for p in &points {
        let cone = p.cone().pruned().map_err(|_| LocalizationError::ConeEmpty { label: p.label.clone() })?;
        let summand = Expr::constant(scale * f64::from(p.sign())) * phase(&p.moment) * reciprocal_expr(p);
        let mut merged = false;
        for (c, e) in grouped.iter_mut() {
            if c.same_as(&cone)? {
                *e = e.clone() + summand.clone();
                merged = true;
                break;
            }
        }
        if !merged {
            grouped.push((cone, summand));
        }
    }
    let terms = grouped
        .into_iter()
        .map(|(cone, e)| BoundaryValueTerm::new(e, cone))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Hyperfunction::from_terms(problem.rank, terms)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::GrowthClass;
    use crate::rational::rat;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn s2_signs_and_cones() {
        let pts = LocalizationProblem::builtin_s2().polarized().unwrap();
        assert_eq!(pts[0].sign(), -1);
        assert_eq!(pts[1].sign(), 1);
        let lower = ConvexCone::orthant(&[-1]);
        for p in &pts {
            assert!(p.cone().same_as(&lower).unwrap());
        }
        let t = euler_reciprocal(&pts[0]).unwrap();
        let z = c(0.3, -0.2);
        assert!((t.expr().evaluate(&[z]).unwrap() - 1.0 / -z).norm() < 1e-15);
    }

    #[test]
    fn single_weight_in_the_plane() {
        let p = FixedPointDatum::new("p", vec![0.0, 0.0], vec![Weight::from_ints(&[1, 0])]);
        let pp = p.polarize(&[int(1), int(0)]).unwrap();
        let t = euler_reciprocal(&pp).unwrap();
        assert!(t.cone().same_as(&ConvexCone::half_space(Weight::from_ints(&[1, 0]))).unwrap());
        let z = [c(0.5, 1.0), c(2.0, 0.0)];
        assert!((t.expr().evaluate(&z).unwrap() - 1.0 / z[0]).norm() < 1e-15);
    }

    #[test]
    fn opposite_weights_cannot_both_vanish_on_a_polarization() {
        let p = FixedPointDatum::new("p", vec![0.0, 0.0], vec![Weight::from_ints(&[1, 0]), Weight::from_ints(&[-1, 0])]);
        let pp = p.polarize(&[int(1), int(1)]).unwrap();
        assert_eq!(pp.sign(), -1);
        assert!(matches!(
            p.polarize(&[int(0), int(1)]),
            Err(LocalizationError::Polarization {
                source: ConeError::VanishingWeight { .. },
                ..
            })
        ));
    }

    #[test]
    fn s2_picken_is_one_slowly_increasing_term() {
        let l = picken(&LocalizationProblem::builtin_s2()).unwrap();
        assert_eq!(l.terms().len(), 1);
        let t = &l.terms()[0];
        assert_eq!(*t.growth(), GrowthClass::SlowlyIncreasing);
        let z = c(0.7, -0.3);
        let expect = ((C64::i() * z).exp() - (-C64::i() * z).exp()) / z / C64::new(0.0, 2.0 * PI);
        assert!((t.expr().evaluate(&[z]).unwrap() - expect).norm() < 1e-15);
        let up = picken(&LocalizationProblem::builtin_s2().with_polarization(vec![int(1)])).unwrap();
        assert!(up.terms()[0].cone().same_as(&ConvexCone::orthant(&[1])).unwrap());
        assert!((up.terms()[0].expr().evaluate(&[z]).unwrap() - expect).norm() < 1e-15);
    }

    #[test]
    fn empty_problem_gives_zero() {
        let p = LocalizationProblem {
            rank: 2,
            polarization: vec![rat(1, 2), int(1)],
            fixed_points: vec![],
        };
        assert!(picken(&p).unwrap().is_empty());
    }

    #[test]
    fn json_round_trip() {
        let p = LocalizationProblem::builtin_s2();
        let v = p.to_json();
        assert_eq!(v["polarization"][0], "-1/1");
        assert_eq!(LocalizationProblem::from_json(&v).unwrap(), p);
        let bad = serde_json::json!({"rank": 1, "polarization": ["0"], "fixed_points": v["fixed_points"]});
        assert!(LocalizationProblem::from_json(&bad).is_err());
    }
}
