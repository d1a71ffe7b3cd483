//! Loops `γ(t) = [[α, −β*], [β, α*]]` in `ΩSU(2)` fixed by the circle
//! generated by `(n, m) ∈ t ⊕ R`, solved through their Fourier modes
//! `α(t) = Σ α_k e^{−ikt}`, `β(t) = Σ β_k e^{−ikt}`.

use std::f64::consts::PI;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::LoopError;
use crate::expr::C64;

/// Levi subgroup of the circle generated by `(n, m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Levi {
    /// `n/m ∈ ½Z`: centralizer is all of `SU(2)`.
    LeviIsG,
    LeviIsT,
}

pub fn classify_subtorus(n: i64, m: i64) -> Result<Levi, LoopError> {
    if m == 0 {
        return Err(LoopError::TrivialCase);
    }
    Ok(if (2 * n).is_multiple_of(&m) {
        Levi::LeviIsG
    } else {
        Levi::LeviIsT
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub k: i64,
    pub coeff: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedLoopSU2 {
    pub n: i64,
    pub m: i64,
    pub alpha: Vec<Mode>,
    pub beta: Vec<Mode>,
}

fn series(modes: &[Mode], t: f64) -> C64 {
    modes.iter().map(|md| md.coeff * C64::new(0.0, -(md.k as f64) * t).exp()).sum()
}

fn series_dot(modes: &[Mode], t: f64) -> C64 {
    modes
        .iter()
        .map(|md| md.coeff * C64::new(0.0, -(md.k as f64)) * C64::new(0.0, -(md.k as f64) * t).exp())
        .sum()
}

type Mat = [[C64; 2]; 2];

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

impl FixedLoopSU2 {
    pub fn alpha_at(&self, t: f64) -> C64 {
        series(&self.alpha, t)
    }

    pub fn beta_at(&self, t: f64) -> C64 {
        series(&self.beta, t)
    }

    pub fn alpha_dot(&self, t: f64) -> C64 {
        series_dot(&self.alpha, t)
    }

    pub fn beta_dot(&self, t: f64) -> C64 {
        series_dot(&self.beta, t)
    }

    /// `α'(0) = iA`, read off the modes.
    pub fn alpha_prime0(&self) -> C64 {
        self.alpha_dot(0.0)
    }

    pub fn beta_prime0(&self) -> C64 {
        self.beta_dot(0.0)
    }

    /// `A` with `α'(0) = iA`.
    pub fn a(&self) -> f64 {
        self.alpha_prime0().im
    }

    pub fn nonzero_alpha_modes(&self) -> usize {
        self.alpha.iter().filter(|md| md.coeff.norm() > 1e-14).count()
    }

    pub fn modes(&self) -> Vec<i64> {
        let mut ks: Vec<i64> = self.alpha.iter().filter(|md| md.coeff.norm() > 1e-14).map(|md| md.k).collect();
        ks.sort_unstable();
        ks
    }

    pub fn gamma_at(&self, t: f64) -> Mat {
        let (a, b) = (self.alpha_at(t), self.beta_at(t));
        [[a, -b.conj()], [b, a.conj()]]
    }

    fn gamma_dot(&self, t: f64) -> Mat {
        let (a, b) = (self.alpha_dot(t), self.beta_dot(t));
        [[a, -b.conj()], [b, a.conj()]]
    }
}

fn near_integer(x: f64) -> Option<i64> {
    let r = x.round();
    ((x - r).abs() <= 1e-9 * r.abs().max(1.0)).then_some(r as i64)
}

/// Fixed loop with `α'(0) = iA`, `β'(0) = b`. Periodic solutions need
/// `(k − n/m)² = (A + n/m)² + |b|²` to have two integer roots `k` (one,
/// `k = −A`, when `b = 0`).
pub fn solve_fixed_loop(n: i64, m: i64, a: f64, b: C64) -> Result<FixedLoopSU2, LoopError> {
    if m == 0 {
        return Err(LoopError::TrivialCase);
    }
    if !a.is_finite() || !b.re.is_finite() || !b.im.is_finite() {
        return Err(LoopError::InvalidArgument(format!("A = {a}, beta'(0) = {b}")));
    }
    let fail = |reason: &str| LoopError::NoPeriodicSolution {
        n,
        m,
        a,
        b,
        reason: reason.to_string(),
    };
    let r = n as f64 / m as f64;
    if b.norm() == 0.0 {
        let k = near_integer(-a).ok_or_else(|| fail("beta'(0) = 0 needs an integer A"))?;
        return Ok(FixedLoopSU2 {
            n,
            m,
            alpha: vec![Mode {
                k,
                coeff: C64::new(1.0, 0.0),
            }],
            beta: vec![],
        });
    }
    let c = ((a + r).powi(2) + b.norm_sqr()).sqrt();
    let hi = near_integer(r + c).ok_or_else(|| fail("n/m + C is not an integer"))?;
    let lo = near_integer(r - c).ok_or_else(|| fail("n/m - C is not an integer"))?;
    // Use the exact half-sum and half-difference from here on.
    let c = (hi - lo) as f64 / 2.0;
    let r = (hi + lo) as f64 / 2.0;
    if (r * m as f64 - n as f64).abs() > 1e-9 * (n.abs().max(1) as f64) {
        return Err(fail("mode pair does not average to n/m"));
    }
    // Σ α_k = 1 and Σ k α_k = −A.
    let alpha_hi = (c - r - a) / (2.0 * c);
    let alpha_lo = 1.0 - alpha_hi;
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    for (k, ak) in [(lo, alpha_lo), (hi, alpha_hi)] {
        alpha.push(Mode {
            k,
            coeff: C64::new(ak, 0.0),
        });
        // Conjugated second mode relation at −k:
        // b α_k* + i(2n/m − k + A) β_{−k} = 0.
        let den = 2.0 * r - k as f64 + a;
        let bk = C64::new(0.0, 1.0) * b * ak / den;
        beta.push(Mode { k: -k, coeff: bk });
    }
    beta.sort_by_key(|md| md.k);
    Ok(FixedLoopSU2 { n, m, alpha, beta })
}

/// Fixed loop with prescribed modes `k ≠ k'` (`k + k' = 2n/m`), parametrized
/// on the orbit `(A + n/m)² + |b|² = C²` by `A = −n/m + C cos φ`,
/// `b = C sin φ e^{iψ}`.
pub fn fixed_loop_from_modes(n: i64, m: i64, k: i64, k2: i64, phi: f64, psi: f64) -> Result<FixedLoopSU2, LoopError> {
    if m == 0 {
        return Err(LoopError::TrivialCase);
    }
    if k == k2 {
        return Err(LoopError::InconsistentModes(format!("modes coincide at {k}")));
    }
    if m * (k + k2) != 2 * n {
        return Err(LoopError::InconsistentModes(format!(
            "modes {k}, {k2} have mean {} but n/m = {n}/{m}",
            (k + k2) as f64 / 2.0
        )));
    }
    let r = n as f64 / m as f64;
    let c = (k - k2).abs() as f64 / 2.0;
    let a = -r + c * phi.cos();
    let b = c * phi.sin() * C64::new(0.0, psi).exp();
    solve_fixed_loop(n, m, a, b)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedLoopReport {
    /// `max |α' − (α α'(0) − β* β'(0))|`.
    pub ode_alpha: f64,
    /// `max |β' − (β'(0) α* + (2in/m + α'(0)) β)|`.
    pub ode_beta: f64,
    /// `max ||α|² + |β|² − 1|`.
    pub unitarity: f64,
    /// `max |m(γ' − γ γ'(0)) + τγ − γτ|` with `τ = n·diag(i, −i)`.
    pub hamiltonian: f64,
    /// `|α(0) − 1| + |β(0)|`.
    pub initial: f64,
    pub samples: usize,
}

impl FixedLoopReport {
    pub const TOLERANCE: f64 = 1e-8;

    pub fn max_residual(&self) -> f64 {
        [self.ode_alpha, self.ode_beta, self.unitarity, self.hamiltonian, self.initial]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn pass(&self) -> bool {
        self.max_residual() < Self::TOLERANCE
    }
}

/// Residuals at `samples` equally spaced `t ∈ [0, 2π)`, with `α'(0)`,
/// `β'(0)` taken from the modes.
pub fn verify_fixed_loop(l: &FixedLoopSU2, samples: usize) -> FixedLoopReport {
    let ap0 = l.alpha_prime0();
    let bp0 = l.beta_prime0();
    let ratio = l.n as f64 / l.m as f64;
    let i = C64::new(0.0, 1.0);
    let tau = [[C64::new(0.0, l.n as f64), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(0.0, -(l.n as f64))]];
    let g0dot = l.gamma_dot(0.0);
    let mut rep = FixedLoopReport {
        ode_alpha: 0.0,
        ode_beta: 0.0,
        unitarity: 0.0,
        hamiltonian: 0.0,
        initial: (l.alpha_at(0.0) - 1.0).norm() + l.beta_at(0.0).norm(),
        samples,
    };
    for s in 0..samples.max(1) {
        let t = 2.0 * PI * s as f64 / samples.max(1) as f64;
        let (a, b) = (l.alpha_at(t), l.beta_at(t));
        let (ad, bd) = (l.alpha_dot(t), l.beta_dot(t));
        rep.ode_alpha = rep.ode_alpha.max((ad - (a * ap0 - b.conj() * bp0)).norm());
        rep.ode_beta = rep.ode_beta.max((bd - (bp0 * a.conj() + (2.0 * i * ratio + ap0) * b)).norm());
        rep.unitarity = rep.unitarity.max((a.norm_sqr() + b.norm_sqr() - 1.0).abs());
        let g = l.gamma_at(t);
        let gd = l.gamma_dot(t);
        let gg0 = mat_mul(&g, &g0dot);
        let tg = mat_mul(&tau, &g);
        let gt = mat_mul(&g, &tau);
        let mut norm2 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                let v = l.m as f64 * (gd[r][c] - gg0[r][c]) + tg[r][c] - gt[r][c];
                norm2 += v.norm_sqr();
            }
        }
        rep.hamiltonian = rep.hamiltonian.max(norm2.sqrt());
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levi_dichotomy() {
        assert_eq!(classify_subtorus(1, 2).unwrap(), Levi::LeviIsG);
        assert_eq!(classify_subtorus(1, 3).unwrap(), Levi::LeviIsT);
        assert_eq!(classify_subtorus(2, 1).unwrap(), Levi::LeviIsG);
        assert_eq!(classify_subtorus(-3, 2).unwrap(), Levi::LeviIsG);
        assert_eq!(classify_subtorus(1, 0), Err(LoopError::TrivialCase));
    }

    #[test]
    fn half_integer_ratio_gives_adjacent_modes() {
        let l = fixed_loop_from_modes(1, 2, 0, 1, 1.1, 0.4).unwrap();
        assert_eq!(l.modes(), vec![0, 1]);
        let rep = verify_fixed_loop(&l, 256);
        assert!(rep.max_residual() < 1e-10, "{rep:?}");
        let l = fixed_loop_from_modes(3, 2, 1, 2, 2.0, -1.0).unwrap();
        assert_eq!(l.modes(), vec![1, 2]);
        assert!(verify_fixed_loop(&l, 256).pass());
    }

    #[test]
    fn direct_parameters_round_trip() {
        let l = fixed_loop_from_modes(1, 2, 0, 1, 0.7, 0.3).unwrap();
        let again = solve_fixed_loop(1, 2, l.a(), l.beta_prime0()).unwrap();
        assert_eq!(again.modes(), vec![0, 1]);
        assert!((again.beta_prime0() - l.beta_prime0()).norm() < 1e-12);
    }

    #[test]
    fn third_has_no_periodic_solution() {
        assert!(matches!(
            solve_fixed_loop(1, 3, 0.37, C64::new(0.2, -0.5)),
            Err(LoopError::NoPeriodicSolution { .. })
        ));
        assert!(matches!(
            fixed_loop_from_modes(1, 3, 0, 1, 0.5, 0.0),
            Err(LoopError::InconsistentModes(_))
        ));
    }

    #[test]
    fn constant_loop_and_corruption() {
        let e = solve_fixed_loop(1, 3, 0.0, C64::new(0.0, 0.0)).unwrap();
        assert_eq!(e.modes(), vec![0]);
        assert!(verify_fixed_loop(&e, 64).pass());
        let mut bad = fixed_loop_from_modes(1, 2, 0, 1, 1.1, 0.4).unwrap();
        bad.alpha[0].coeff += 0.01;
        let rep = verify_fixed_loop(&bad, 256);
        assert!(!rep.pass());
        assert!(rep.max_residual() > 1e-3 && rep.max_residual() < 1e-1, "{rep:?}");
    }
}
