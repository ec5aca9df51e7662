//! Time evolution of the walker under the effective Hamiltonian
//!
//!   H_eff(psi) = (1 + g c delta(psi)) (H0 + H_or) + H_nl(psi)
//!
//! where delta = |<Gamma|psi>|^2 / 4 - 4 |<s|psi>|^2 / N measures how far the
//! walker has moved from the uniform cell state s toward the target state
//! Gamma. The flow is integrated with classical RK4; the nonlinearity and
//! delta are re-evaluated at every internal stage. The state is never
//! renormalized: norm drift is a correctness signal, not noise to hide.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{
    apply_search_into, initial_support, target_support, GridSpec, MarkedVertex, WalkerState,
};
use crate::reduced::characteristic_energy;

/// A single step may not change the squared norm by more than this.
pub const STEP_DRIFT_LIMIT: f64 = 1e-6;

/// Largest admissible integrator step.
pub const MAX_TIME_STEP: f64 = 0.05;

pub const DEFAULT_TIME_STEP: f64 = 0.01;
pub const DEFAULT_SAMPLE_STRIDE: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Linear,
    Nonlinear,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Linear => "linear",
            Mode::Nonlinear => "nonlinear",
        }
    }
}

/// Which eigenstate of the search Hamiltonian the run targets plus all
/// integration knobs. Linear mode pins g = c = 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchConfig {
    grid: GridSpec,
    marked: MarkedVertex,
    mode: Mode,
    g: f64,
    c: f64,
    dt: f64,
    t_max: f64,
    sample_stride: usize,
}

impl SearchConfig {
    pub fn linear(grid: GridSpec, marked: MarkedVertex) -> Self {
        SearchConfig {
            grid,
            marked,
            mode: Mode::Linear,
            g: 0.0,
            c: 0.0,
            dt: DEFAULT_TIME_STEP,
            t_max: default_horizon(grid),
            sample_stride: DEFAULT_SAMPLE_STRIDE,
        }
    }

    pub fn nonlinear(grid: GridSpec, marked: MarkedVertex, g: f64, c: f64) -> Result<Self> {
        if !g.is_finite() || !c.is_finite() || g < 0.0 || c < 0.0 {
            return Err(Error::Coupling { g, c });
        }
        Ok(SearchConfig {
            grid,
            marked,
            mode: Mode::Nonlinear,
            g,
            c,
            dt: DEFAULT_TIME_STEP,
            t_max: default_horizon(grid),
            sample_stride: DEFAULT_SAMPLE_STRIDE,
        })
    }

    pub fn with_time_step(mut self, dt: f64) -> Result<Self> {
        if !dt.is_finite() || dt <= 0.0 || dt > MAX_TIME_STEP {
            return Err(Error::TimeStep { dt });
        }
        self.dt = dt;
        Ok(self)
    }

    pub fn with_horizon(mut self, t_max: f64) -> Result<Self> {
        if !t_max.is_finite() || t_max <= 0.0 {
            return Err(Error::TimeHorizon { t_max });
        }
        self.t_max = t_max;
        Ok(self)
    }

    pub fn with_sample_stride(mut self, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::SampleStride);
        }
        self.sample_stride = stride;
        Ok(self)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }
    pub fn marked(&self) -> MarkedVertex {
        self.marked
    }
    pub fn mode(&self) -> Mode {
        self.mode
    }
    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn t_max(&self) -> f64 {
        self.t_max
    }
    pub fn sample_stride(&self) -> usize {
        self.sample_stride
    }
}

/// Three half-periods of the slow oscillation, enough to bracket the first
/// peak with room to spare.
pub fn default_horizon(grid: GridSpec) -> f64 {
    let energy = characteristic_energy(grid.n_vertices())
        .expect("grid guarantees a valid vertex count");
    3.0 * std::f64::consts::PI / (2.0 * energy)
}

/// Overlaps of a state with the target/initial pair and the resulting
/// nonlinear detuning measure delta = |a|^2/4 - 4|b|^2/N.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubspaceAmplitudes {
    pub a: Complex64,
    pub b: Complex64,
    pub delta: f64,
}

/// Overlaps a = <Gamma|psi>, b = <s|psi> for arbitrary states on one grid.
pub fn subspace_amplitudes(
    psi: &WalkerState,
    gamma: &WalkerState,
    s: &WalkerState,
) -> SubspaceAmplitudes {
    let a = gamma.overlap(psi);
    let b = s.overlap(psi);
    let n = psi.grid().n_vertices() as f64;
    SubspaceAmplitudes {
        a,
        b,
        delta: a.norm_sqr() / 4.0 - 4.0 * b.norm_sqr() / n,
    }
}

/// Sampled observables of one run; parallel columns, t strictly increasing.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub p_gamma: Vec<f64>,
    pub p_ball: Vec<f64>,
    pub delta: Vec<f64>,
    pub norm_sq: Vec<f64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn push(&mut self, t: f64, p_gamma: f64, p_ball: f64, delta: f64, norm_sq: f64) {
        self.t.push(t);
        self.p_gamma.push(p_gamma);
        self.p_ball.push(p_ball);
        self.delta.push(delta);
        self.norm_sq.push(norm_sq);
    }
}

/// Reusable buffers plus the sparse supports of Gamma and s; owning one of
/// these amortizes all allocation across a run.
pub struct Stepper {
    cfg: SearchConfig,
    gamma_support: [(usize, f64); 4],
    s_support: Vec<usize>,
    s_amp: f64,
    ball: [usize; 5],
    h: Vec<Complex64>,
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    stage: Vec<Complex64>,
    steps_taken: u64,
}

impl Stepper {
    pub fn new(cfg: SearchConfig) -> Self {
        let grid = cfg.grid;
        let n = grid.n_vertices();
        let gamma_support = target_support(grid, cfg.marked);
        let m_idx = grid.index(cfg.marked.vertex());
        let mut ball = [m_idx; 5];
        for (slot, (idx, _)) in ball.iter_mut().skip(1).zip(gamma_support) {
            *slot = idx;
        }
        Stepper {
            cfg,
            gamma_support,
            s_support: initial_support(grid, cfg.marked.alpha()),
            s_amp: 2.0 / (n as f64).sqrt(),
            ball,
            h: vec![Complex64::ZERO; n],
            k1: vec![Complex64::ZERO; n],
            k2: vec![Complex64::ZERO; n],
            k3: vec![Complex64::ZERO; n],
            k4: vec![Complex64::ZERO; n],
            stage: vec![Complex64::ZERO; n],
            steps_taken: 0,
        }
    }

    pub fn config(&self) -> &SearchConfig {
        &self.cfg
    }

    fn overlaps(&self, psi: &[Complex64]) -> (Complex64, Complex64) {
        let mut a = Complex64::ZERO;
        for &(idx, amp) in &self.gamma_support {
            a += psi[idx] * amp;
        }
        let mut b = Complex64::ZERO;
        for &idx in &self.s_support {
            b += psi[idx];
        }
        (a, b * self.s_amp)
    }

    /// d psi/dt = -i H_eff(psi) psi, with delta and the on-site term taken
    /// from the stage state itself.
    fn derivative(&mut self, psi: &[Complex64], out_slot: usize) {
        apply_search_into(self.cfg.grid, self.cfg.marked, psi, &mut self.h);
        let out = match out_slot {
            1 => &mut self.k1,
            2 => &mut self.k2,
            3 => &mut self.k3,
            _ => &mut self.k4,
        };
        match self.cfg.mode {
            Mode::Linear => {
                for (o, &hval) in out.iter_mut().zip(self.h.iter()) {
                    *o = Complex64::new(hval.im, -hval.re);
                }
            }
            Mode::Nonlinear => {
                let mut a = Complex64::ZERO;
                for &(idx, amp) in &self.gamma_support {
                    a += psi[idx] * amp;
                }
                let mut b = Complex64::ZERO;
                for &idx in &self.s_support {
                    b += psi[idx];
                }
                b *= self.s_amp;
                let delta =
                    a.norm_sqr() / 4.0 - 4.0 * b.norm_sqr() / self.cfg.grid.n_vertices() as f64;
                let scale = 1.0 + self.cfg.g * self.cfg.c * delta;
                let g = self.cfg.g;
                for ((o, &hval), &p) in out.iter_mut().zip(self.h.iter()).zip(psi.iter()) {
                    let w = hval * scale - p * (g * p.norm_sqr());
                    *o = Complex64::new(w.im, -w.re);
                }
            }
        }
    }

    /// One RK4 step in place. `t` is only used for diagnostics.
    pub fn step_in_place(&mut self, psi: &mut Vec<Complex64>, t: f64) -> Result<()> {
        let dt = self.cfg.dt;
        let before: f64 = psi.iter().map(|z| z.norm_sqr()).sum();

        self.derivative(psi, 1);
        for i in 0..psi.len() {
            self.stage[i] = psi[i] + self.k1[i] * (dt / 2.0);
        }
        let stage = std::mem::take(&mut self.stage);
        self.derivative(&stage, 2);
        self.stage = stage;
        for i in 0..psi.len() {
            self.stage[i] = psi[i] + self.k2[i] * (dt / 2.0);
        }
        let stage = std::mem::take(&mut self.stage);
        self.derivative(&stage, 3);
        self.stage = stage;
        for i in 0..psi.len() {
            self.stage[i] = psi[i] + self.k3[i] * dt;
        }
        let stage = std::mem::take(&mut self.stage);
        self.derivative(&stage, 4);
        self.stage = stage;
        let w = dt / 6.0;
        for i in 0..psi.len() {
            psi[i] += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * w;
        }

        let after: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let drift = (after - before).abs();
        if drift > STEP_DRIFT_LIMIT {
            return Err(Error::IntegrationFailure { t, drift });
        }
        self.steps_taken += 1;
        Ok(())
    }

    fn sample(&self, psi: &[Complex64], t: f64, series: &mut TimeSeries) {
        let (a, b) = self.overlaps(psi);
        let delta = a.norm_sqr() / 4.0 - 4.0 * b.norm_sqr() / self.cfg.grid.n_vertices() as f64;
        let p_ball: f64 = self.ball.iter().map(|&i| psi[i].norm_sqr()).sum();
        let norm_sq: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        series.push(t, a.norm_sqr(), p_ball, delta, norm_sq);
    }
}

/// Single RK4 step as a standalone operation; for repeated stepping hold a
/// `Stepper` instead.
pub fn step(psi: &WalkerState, cfg: &SearchConfig) -> Result<WalkerState> {
    let mut stepper = Stepper::new(*cfg);
    let mut amps = psi.amplitudes().to_vec();
    stepper.step_in_place(&mut amps, 0.0)?;
    Ok(WalkerState::from_parts_unchecked(psi.grid(), amps))
}

/// Integrates from `psi0` to the configured horizon, sampling every
/// `sample_stride` steps (the step count is rounded up to a whole number of
/// strides so samples stay uniformly spaced).
pub fn evolve(psi0: &WalkerState, cfg: &SearchConfig) -> Result<TimeSeries> {
    if psi0.grid() != cfg.grid {
        return Err(Error::StateLength {
            expected: cfg.grid.n_vertices(),
            got: psi0.amplitudes().len(),
        });
    }
    let dt = cfg.dt;
    let stride = cfg.sample_stride;
    let raw_steps = (cfg.t_max / dt - 1e-9).ceil().max(1.0) as usize;
    let n_steps = raw_steps.div_ceil(stride) * stride;

    let mut stepper = Stepper::new(*cfg);
    let mut psi = psi0.amplitudes().to_vec();
    let mut series = TimeSeries::default();
    stepper.sample(&psi, 0.0, &mut series);
    for k in 0..n_steps {
        let t = k as f64 * dt;
        stepper.step_in_place(&mut psi, t)?;
        if (k + 1) % stride == 0 {
            stepper.sample(&psi, (k + 1) as f64 * dt, &mut series);
        }
    }
    Ok(series)
}
