//! Self-consistent ansatz for the overlap growth in the nonlinear search:
//!
//!   x(t) = (A pi / ln N) sin^2( C0 t / T0 + C1 x(t) t / T1 )
//!
//! T0 is the slow half-oscillation of the underlying walk, T1 the period of
//! the nonlinear feedback. The x-dependence inside the sine is what bends the
//! slow sin^2 rise into the accelerated transition: once x grows, the second
//! phase term takes over at the critical time t_s where the two regimes meet.

use crate::error::{Error, Result};
use crate::reduced::characteristic_energy;

/// Fixed-point residual tolerance.
pub const FIXED_POINT_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 10_000;

/// Parameters of the ansatz. A, C0, C1 are dimensionless shape constants
/// (all default 1); T0 and T1 carry the two time scales.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnsatzParams {
    pub n: usize,
    pub amplitude: f64,
    pub c0: f64,
    pub c1: f64,
    pub t0: f64,
    pub t1: f64,
}

impl AnsatzParams {
    pub fn new(n: usize, t0: f64, t1: f64) -> Result<Self> {
        characteristic_energy(n)?;
        for (name, value) in [("T0", t0), ("T1", t1)] {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::AnsatzParam { name, value });
            }
        }
        Ok(AnsatzParams {
            n,
            amplitude: 1.0,
            c0: 1.0,
            c1: 1.0,
            t0,
            t1,
        })
    }

    pub fn with_shape(mut self, amplitude: f64, c0: f64, c1: f64) -> Result<Self> {
        for (name, value) in [("A", amplitude), ("C0", c0)] {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::AnsatzParam { name, value });
            }
        }
        if !c1.is_finite() || c1 < 0.0 {
            return Err(Error::AnsatzParam { name: "C1", value: c1 });
        }
        self.amplitude = amplitude;
        self.c0 = c0;
        self.c1 = c1;
        Ok(self)
    }
}

/// The two time scales for given size and couplings: T0 = 1/E(N) for the slow
/// oscillation, and T1 = T0 / (c g delta_max) with delta_max = 1/4 for the
/// nonlinear feedback. Under the reference scalings (g = ln N / pi,
/// c = 1/(2E)) T1 is constant up to the logarithm; under g, c ~ sqrt(N) it
/// shrinks like sqrt(ln N / N).
pub fn regime_periods(n: usize, g: f64, c: f64) -> Result<(f64, f64)> {
    if !g.is_finite() || !c.is_finite() || g <= 0.0 || c <= 0.0 {
        return Err(Error::Coupling { g, c });
    }
    let t0 = 1.0 / characteristic_energy(n)?;
    let t1 = t0 / (c * g * 0.25);
    Ok((t0, t1))
}

/// One grid point of the solved ansatz. Points past the first maximum are
/// extrapolation: the fixed point there continues a branch the derivation no
/// longer justifies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnsatzPoint {
    pub t: f64,
    pub x: f64,
    pub extrapolated: bool,
}

/// Solves the fixed-point equation on each grid time, seeding every point
/// with the previous solution so the branch is chosen by continuity. The
/// iteration is relaxed Picard with a secant-based step when the bare map
/// stops contracting; convergence means residual |x - F(x)| <= 1e-10.
pub fn solve_ansatz(params: &AnsatzParams, t_grid: &[f64]) -> Result<Vec<AnsatzPoint>> {
    let amp = params.amplitude * std::f64::consts::PI / (params.n as f64).ln();
    let mut points = Vec::with_capacity(t_grid.len());
    let mut seed = 0.0;
    for &t in t_grid {
        let f = |x: f64| {
            let phase = params.c0 * t / params.t0 + params.c1 * x * t / params.t1;
            amp * phase.sin().powi(2)
        };
        let x = solve_point(f, seed, amp).ok_or(Error::FixedPointDivergence { t })?;
        seed = x;
        points.push(AnsatzPoint {
            t,
            x,
            extrapolated: false,
        });
    }
    // flag everything past the first discrete maximum
    let mut peak = None;
    for i in 1..points.len().saturating_sub(1) {
        if points[i].x >= points[i - 1].x && points[i].x > points[i + 1].x {
            peak = Some(i);
            break;
        }
    }
    if let Some(i) = peak {
        for p in &mut points[i + 1..] {
            p.extrapolated = true;
        }
    }
    Ok(points)
}

fn solve_point(f: impl Fn(f64) -> f64, seed: f64, amp: f64) -> Option<f64> {
    let mut x = seed.clamp(0.0, amp);
    let h = (amp * 1e-7).max(1e-12);
    for _ in 0..MAX_ITERATIONS {
        let fx = f(x);
        let residual = fx - x;
        if residual.abs() <= FIXED_POINT_TOL {
            return Some(x);
        }
        // secant slope of F; Newton step on x - F(x) when it is safe,
        // otherwise a damped Picard step toward F(x)
        let slope = (f(x + h) - fx) / h;
        let denom = 1.0 - slope;
        let step = if denom.abs() >= 0.2 {
            residual / denom
        } else {
            residual * 0.5
        };
        x = (x + step).clamp(0.0, amp);
    }
    None
}

/// Leading-order critical time of the regime change,
/// t_s = sqrt(T0 T1 ln N), from matching the slow rise
/// (1/ln N) sin^2(t/T0) against the nonlinear rate T1/T0 and inverting the
/// arcsine to leading order. T1 here is the feedback period evaluated at the
/// overlap amplitude the walk actually reaches, pi/ln N, so
/// T1 = 1/(g pi/ln N): exactly 1 under the reference coupling g = ln N / pi,
/// and Theta(ln N / sqrt N) under g ~ sqrt N. The c rescaling cancels out of
/// the matching at the reference scalings and is accepted only for interface
/// symmetry with `regime_periods`.
pub fn estimate_transition_time(n: usize, g: f64, c: f64) -> Result<f64> {
    if !g.is_finite() || !c.is_finite() || g <= 0.0 || c < 0.0 {
        return Err(Error::Coupling { g, c });
    }
    let log_n = (n as f64).ln();
    let t0 = 1.0 / characteristic_energy(n)?;
    let t1 = log_n / (std::f64::consts::PI * g);
    if t1 * log_n > t0 {
        return Err(Error::RegimeOverlap {
            t1_log_n: t1 * log_n,
            t0,
        });
    }
    Ok((t0 * t1 * log_n).sqrt())
}
