//! Closed two-level model of the search: the walker is projected onto the
//! pair (target overlap a, uniform-cell overlap b). The linear walk couples
//! the pair with strength E(N); the nonlinearity turns the splitting into the
//! feedback term g*delta with delta = |a|^2/4 - 4|b|^2/N, and rescaling the
//! walk by (1 + c g delta) keeps the pair on resonance while delta grows.

use num_complex::Complex64;

use crate::dynamics::{TimeSeries, MAX_TIME_STEP};
use crate::error::{Error, Result};
use crate::lattice::grid_for_vertex_count;

/// Two-level norm must stay this close to 1 on construction.
pub const NORM_TOL: f64 = 1e-9;

/// Gap of the effective two-level Hamiltonian for the linear walk on N
/// vertices: E(N) = sqrt(16*pi / (N ln N)). Natural logarithm throughout.
pub fn characteristic_energy(n: usize) -> Result<f64> {
    grid_for_vertex_count(n)?;
    let nf = n as f64;
    Ok((16.0 * std::f64::consts::PI / (nf * nf.ln())).sqrt())
}

/// Feasibility window for the rescaling strength: c must exceed
/// c_min = 1/(2 E(N)) for the rescaled gap to dominate the detuning, and stay
/// below c_max = N/(4g) for the rescaled walk to remain a perturbation.
pub fn c_bounds(n: usize, g: f64) -> Result<(f64, f64)> {
    if !g.is_finite() || g <= 0.0 {
        return Err(Error::Coupling { g, c: 0.0 });
    }
    let energy = characteristic_energy(n)?;
    let c_min = 1.0 / (2.0 * energy);
    let c_max = n as f64 / (4.0 * g);
    if c_min >= c_max {
        return Err(Error::InfeasibleCoupling { c_min, c_max });
    }
    Ok((c_min, c_max))
}

/// Eigenpairs of the two-level Hamiltonian at a frozen delta, with the
/// coupling rescaled to E~ = E (1 + c g delta).
///
/// Components are ordered (uniform-cell weight, target weight), i.e. the
/// matrix is [[g delta, E~], [E~, 0]]; eigenvectors are left unnormalized as
/// (g delta/(2E~) +- sqrt((g delta)^2 + 4 E~^2)/(2E~), 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedEigensystem {
    pub e_plus: f64,
    pub e_minus: f64,
    pub v_plus: [f64; 2],
    pub v_minus: [f64; 2],
}

pub fn reduced_eigensystem(delta: f64, g: f64, c: f64, energy: f64) -> Result<ReducedEigensystem> {
    let gd = g * delta;
    let coupled = energy * (1.0 + c * gd);
    if !coupled.is_finite() || coupled == 0.0 {
        return Err(Error::DegenerateCoupling);
    }
    let split = gd.hypot(2.0 * coupled);
    let e_plus = (gd + split) / 2.0;
    let e_minus = (gd - split) / 2.0;
    Ok(ReducedEigensystem {
        e_plus,
        e_minus,
        v_plus: [e_plus / coupled, 1.0],
        v_minus: [e_minus / coupled, 1.0],
    })
}

/// Two-level state (a, b); unit norm within `NORM_TOL`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoLevelState {
    pub a: Complex64,
    pub b: Complex64,
}

impl TwoLevelState {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let norm_sq = a.norm_sqr() + b.norm_sqr();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(TwoLevelState { a, b })
    }

    /// All weight on the uniform-cell component, like the full walk at t = 0.
    pub fn start() -> Self {
        TwoLevelState {
            a: Complex64::ZERO,
            b: Complex64::ONE,
        }
    }
}

const REDUCED_SAMPLE_STRIDE: usize = 10;

/// RK4 on i d/dt (a, b) = H'(delta) (a, b) with
/// H' = [[0, E~], [E~, g delta]], E~ = E (1 + c g delta(t)), both re-evaluated
/// at every stage. Sampling matches `evolve`: every 10 steps, p_gamma = |a|^2,
/// p_ball = |a|^2 + 4|b|^2/N.
pub fn evolve_reduced(
    init: TwoLevelState,
    n: usize,
    g: f64,
    c: f64,
    dt: f64,
    t_max: f64,
) -> Result<TimeSeries> {
    if !g.is_finite() || !c.is_finite() || g < 0.0 || c < 0.0 {
        return Err(Error::Coupling { g, c });
    }
    if !dt.is_finite() || dt <= 0.0 || dt > MAX_TIME_STEP {
        return Err(Error::TimeStep { dt });
    }
    if !t_max.is_finite() || t_max <= 0.0 {
        return Err(Error::TimeHorizon { t_max });
    }
    let energy = characteristic_energy(n)?;
    let nf = n as f64;

    let delta_of = |a: Complex64, b: Complex64| a.norm_sqr() / 4.0 - 4.0 * b.norm_sqr() / nf;
    let deriv = |a: Complex64, b: Complex64| {
        let delta = delta_of(a, b);
        let coupled = energy * (1.0 + c * g * delta);
        let da = b * coupled;
        let db = a * coupled + b * (g * delta);
        // multiply by -i
        (
            Complex64::new(da.im, -da.re),
            Complex64::new(db.im, -db.re),
        )
    };

    let raw_steps = (t_max / dt - 1e-9).ceil().max(1.0) as usize;
    let n_steps = raw_steps.div_ceil(REDUCED_SAMPLE_STRIDE) * REDUCED_SAMPLE_STRIDE;
    let (mut a, mut b) = (init.a, init.b);
    let mut series = TimeSeries::default();
    let sample = |series: &mut TimeSeries, t: f64, a: Complex64, b: Complex64| {
        series.t.push(t);
        series.p_gamma.push(a.norm_sqr());
        series.p_ball.push(a.norm_sqr() + 4.0 * b.norm_sqr() / nf);
        series.delta.push(delta_of(a, b));
        series.norm_sq.push(a.norm_sqr() + b.norm_sqr());
    };
    sample(&mut series, 0.0, a, b);
    for k in 0..n_steps {
        let (k1a, k1b) = deriv(a, b);
        let (k2a, k2b) = deriv(a + k1a * (dt / 2.0), b + k1b * (dt / 2.0));
        let (k3a, k3b) = deriv(a + k2a * (dt / 2.0), b + k2b * (dt / 2.0));
        let (k4a, k4b) = deriv(a + k3a * dt, b + k3b * dt);
        a += (k1a + (k2a + k3a) * 2.0 + k4a) * (dt / 6.0);
        b += (k1b + (k2b + k3b) * 2.0 + k4b) * (dt / 6.0);
        if (k + 1) % REDUCED_SAMPLE_STRIDE == 0 {
            sample(&mut series, (k + 1) as f64 * dt, a, b);
        }
    }
    Ok(series)
}
