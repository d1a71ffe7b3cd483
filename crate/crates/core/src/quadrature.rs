//! Composite Gauss–Legendre quadrature over the real line with adaptive
//! truncation radius and a fitted exponential tail bound.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::expr::C64;

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule; nodes by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Shared cached rule.
    pub fn cached(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|p| p.into_inner());
        guard.entry(n).or_insert_with(|| Arc::new(GaussLegendre::new(n))).clone()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSettings {
    /// Initial half-width `R₀` of the truncated line.
    pub r0: f64,
    /// Largest half-width tried before giving up.
    pub r_max: f64,
    /// Absolute tolerance on the total (quadrature + tail) error.
    pub tol: f64,
    pub order: usize,
    pub panel_width: f64,
    /// Bisection depth limit for panels that fail the order check.
    pub max_depth: u32,
}

impl Default for LineSettings {
    fn default() -> Self {
        LineSettings {
            r0: 16.0,
            r_max: 65536.0,
            tol: 1e-10,
            order: 64,
            panel_width: 1.0,
            max_depth: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineIntegral {
    pub value: C64,
    pub error: f64,
    /// Final truncation radii `(left, right)`.
    pub radius: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum LineError<E> {
    /// The integrand does not decay on the given side (`-1` or `+1`).
    NotDecaying { side: i8, radius: f64 },
    Integrand(E),
}

struct Panel {
    value: C64,
    error: f64,
    envelope: f64,
}

struct LineIntegrator<'a, E> {
    f: &'a mut dyn FnMut(f64) -> Result<(C64, f64), E>,
    high: Arc<GaussLegendre>,
    low: Arc<GaussLegendre>,
    settings: &'a LineSettings,
    panel_tol: f64,
}

impl<E> LineIntegrator<'_, E> {
    fn rule(&mut self, rule: &GaussLegendre, a: f64, b: f64) -> Result<(C64, f64, f64), E> {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let mut sum = C64::new(0.0, 0.0);
        let mut err = 0.0;
        let mut env: f64 = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let (v, e) = (self.f)(mid + half * x)?;
            sum += w * v;
            err += w * e;
            env = env.max(v.norm());
        }
        Ok((sum * half, err * half, env))
    }

    fn panel(&mut self, a: f64, b: f64, depth: u32) -> Result<Panel, E> {
        let high = self.high.clone();
        let low = self.low.clone();
        let (hi, inherited, env) = self.rule(&high, a, b)?;
        let (lo, _, _) = self.rule(&low, a, b)?;
        let diff = (hi - lo).norm();
        let allowed = (self.panel_tol * (b - a) / self.settings.panel_width).max(1e-14 * hi.norm());
        if diff <= allowed || depth >= self.settings.max_depth {
            return Ok(Panel {
                value: hi,
                error: diff + inherited,
                envelope: env,
            });
        }
        let m = 0.5 * (a + b);
        let l = self.panel(a, m, depth + 1)?;
        let r = self.panel(m, b, depth + 1)?;
        Ok(Panel {
            value: l.value + r.value,
            error: l.error + r.error,
            envelope: l.envelope.max(r.envelope),
        })
    }

    /// Integral over `[0, ∞)` in direction `side`, with its tail bound.
    fn half_line(&mut self, side: i8) -> Result<(C64, f64, f64), LineError<E>> {
        let h = self.settings.panel_width;
        let s = f64::from(side);
        let mut value = C64::new(0.0, 0.0);
        let mut error = 0.0;
        let mut envelopes: Vec<f64> = Vec::new();
        let mut radius = self.settings.r0;
        let mut covered = 0.0;
        loop {
            while covered < radius - 0.5 * h {
                let (a, b) = (covered, covered + h);
                let p = if side > 0 { self.panel(a, b, 0) } else { self.panel(-b, -a, 0) }.map_err(LineError::Integrand)?;
                value += p.value;
                error += p.error;
                envelopes.push(p.envelope);
                covered = b;
            }
            let last = *envelopes.last().unwrap_or(&0.0);
            if last == 0.0 {
                return Ok((value, error, radius));
            }
            let half_idx = ((radius / 2.0) / h).ceil() as usize;
            let at_half = envelopes[half_idx.saturating_sub(1).min(envelopes.len() - 1)];
            let rate = (at_half / last).ln() / (radius / 2.0);
            if rate > 0.0 && rate.is_finite() {
                let tail = last / rate;
                if tail <= 0.5 * self.settings.tol || radius >= self.settings.r_max {
                    return Ok((value, error + tail, radius));
                }
            } else if radius >= self.settings.r_max {
                return Err(LineError::NotDecaying { side, radius: s * radius });
            }
            radius *= 2.0;
        }
    }
}

/// `∫_R f(x) dx` for `f` returning a value and its own error estimate.
pub fn integrate_line<E>(
    f: &mut dyn FnMut(f64) -> Result<(C64, f64), E>,
    settings: &LineSettings,
) -> Result<LineIntegral, LineError<E>> {
    let high = GaussLegendre::cached(settings.order);
    let low = GaussLegendre::cached((settings.order / 2).max(1));
    let mut it = LineIntegrator {
        f,
        high,
        low,
        settings,
        panel_tol: 1e-3 * settings.tol,
    };
    let (vr, er, rr) = it.half_line(1)?;
    let (vl, el, rl) = it.half_line(-1)?;
    Ok(LineIntegral {
        value: vr + vl,
        error: er + el,
        radius: (rl, rr),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let g = GaussLegendre::new(64);
        let s: f64 = g.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let m: f64 = g.nodes.iter().zip(&g.weights).map(|(x, w)| w * x.powi(126)).sum();
        assert!((m - 2.0 / 127.0).abs() < 1e-14);
        let g5 = GaussLegendre::new(5);
        assert!((g5.nodes[4] - (5.0 + 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_and_lorentzian_like_integrals() {
        let mut f = |x: f64| -> Result<(C64, f64), ()> { Ok((C64::new((-x * x).exp(), 0.0), 0.0)) };
        let r = integrate_line(&mut f, &LineSettings::default()).unwrap();
        assert!((r.value.re - PI.sqrt()).abs() < 1e-13);
        // ∫ dx / cosh(x) = π, slow exponential tail.
        let mut g = |x: f64| -> Result<(C64, f64), ()> { Ok((C64::new(1.0 / x.cosh(), 0.0), 0.0)) };
        let r = integrate_line(&mut g, &LineSettings::default()).unwrap();
        assert!((r.value.re - PI).abs() < 1e-9, "{r:?}");
        assert!(r.error < 1e-9);
    }

    #[test]
    fn near_pole_panels_are_refined() {
        // ∫ dx / ((x - 0.01i)(cosh x)) has a pole 0.01 from the line.
        let mut f = |x: f64| -> Result<(C64, f64), ()> {
            Ok((1.0 / (C64::new(x, -0.01) * x.cosh()), 0.0))
        };
        let coarse = integrate_line(&mut f, &LineSettings::default()).unwrap();
        let mut g = |x: f64| -> Result<(C64, f64), ()> {
            Ok((1.0 / (C64::new(x, -0.01) * x.cosh()), 0.0))
        };
        let fine = integrate_line(
            &mut g,
            &LineSettings {
                panel_width: 0.125,
                ..LineSettings::default()
            },
        )
        .unwrap();
        assert!((coarse.value - fine.value).norm() < 1e-9);
    }

    #[test]
    fn non_decaying_integrand_is_rejected() {
        let mut f = |_x: f64| -> Result<(C64, f64), ()> { Ok((C64::new(1.0, 0.0), 0.0)) };
        let r = integrate_line(
            &mut f,
            &LineSettings {
                r_max: 64.0,
                ..LineSettings::default()
            },
        );
        assert!(matches!(r, Err(LineError::NotDecaying { .. })));
    }
}
