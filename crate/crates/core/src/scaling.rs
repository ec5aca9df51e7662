//! Sweeps over grid sizes or coupling strengths and the power-law fits that
//! turn them into scaling exponents. Runs are independent, so sweeps fan out
//! over a worker pool; results are collected by input index, which keeps row
//! order and file output deterministic for any worker count.

use rayon::prelude::*;

use crate::dynamics::{Mode, SearchConfig};
use crate::error::{Error, Result};
use crate::lattice::{GridSpec, MarkedVertex};
use crate::reduced::characteristic_energy;
use crate::search::run_search;

/// How couplings are chosen per grid size in a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamRule {
    /// Plain walk, g = c = 0.
    Linear,
    /// Reference nonlinear scalings: g = ln N / pi and c picked by `CSelector`.
    LogCoupling(CSelector),
    /// Both couplings grow like sqrt N (g = sqrt N / pi, c = sqrt N / 2);
    /// trades success probability for a narrower, earlier peak.
    SqrtCoupling,
}

/// The two readings of the reference rescaling strength.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CSelector {
    /// c = 1/(2 E(N)), the choice matching the quoted value 5.52 at N = 900.
    #[default]
    HalfInverseEnergy,
    /// c = 1/E(N), the literal text.
    InverseEnergy,
}

impl CSelector {
    pub fn value(self, n: usize) -> Result<f64> {
        let energy = characteristic_energy(n)?;
        Ok(match self {
            CSelector::HalfInverseEnergy => 1.0 / (2.0 * energy),
            CSelector::InverseEnergy => 1.0 / energy,
        })
    }
}

impl ParamRule {
    /// (mode, g, c) for a grid of N vertices.
    pub fn couplings(self, n: usize) -> Result<(Mode, f64, f64)> {
        match self {
            ParamRule::Linear => Ok((Mode::Linear, 0.0, 0.0)),
            ParamRule::LogCoupling(selector) => {
                let g = (n as f64).ln() / std::f64::consts::PI;
                Ok((Mode::Nonlinear, g, selector.value(n)?))
            }
            ParamRule::SqrtCoupling => {
                let sqrt_n = (n as f64).sqrt();
                Ok((Mode::Nonlinear, sqrt_n / std::f64::consts::PI, sqrt_n / 2.0))
            }
        }
    }
}

/// Default sweep sides, N = 100 .. 4096.
pub const DEFAULT_SWEEP_SIDES: [usize; 7] = [10, 14, 20, 28, 40, 56, 64];

/// Numbers measured from one converged run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunMetrics {
    pub searching_time: f64,
    pub peak_probability: f64,
    pub p_ball_at_peak: f64,
    pub peak_width: Option<f64>,
}

/// One sweep row; failed runs keep their place with the error message.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub side: usize,
    pub n: usize,
    pub mode: Mode,
    pub g: f64,
    pub c: f64,
    pub metrics: std::result::Result<RunMetrics, String>,
}

#[derive(Clone, Debug, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// (N, metrics) for the rows that converged.
    pub fn converged(&self) -> Vec<(usize, RunMetrics)> {
        self.rows
            .iter()
            .filter_map(|r| r.metrics.as_ref().ok().map(|m| (r.n, *m)))
            .collect()
    }
}

fn measure(side: usize, rule: ParamRule, dt: f64) -> Result<SweepRow> {
    let grid = GridSpec::new(side)?;
    let n = grid.n_vertices();
    let (mode, g, c) = rule.couplings(n)?;
    let marked = MarkedVertex::centered(grid);
    let cfg = match mode {
        Mode::Linear => SearchConfig::linear(grid, marked),
        Mode::Nonlinear => SearchConfig::nonlinear(grid, marked, g, c)?,
    }
    .with_time_step(dt)?;
    let metrics = run_search(&cfg)
        .map(|outcome| RunMetrics {
            searching_time: outcome.searching_time,
            peak_probability: outcome.peak_probability,
            p_ball_at_peak: outcome.p_ball_at_peak,
            peak_width: outcome.peak_width,
        })
        .map_err(|e| e.to_string());
    Ok(SweepRow {
        side,
        n,
        mode,
        g,
        c,
        metrics,
    })
}

/// One run per side, couplings chosen by the rule. Grid or rule errors abort
/// the sweep; run failures are recorded in their row.
pub fn sweep_sizes(sides: &[usize], rule: ParamRule, dt: f64) -> Result<SweepResult> {
    let rows: Result<Vec<SweepRow>> = sides
        .par_iter()
        .map(|&side| measure(side, rule, dt))
        .collect();
    Ok(SweepResult { rows: rows? })
}

/// One nonlinear run per rescaling strength at fixed size, g = ln N / pi.
/// c = 0 is allowed: it isolates the bare on-site term.
pub fn sweep_coupling(side: usize, c_list: &[f64], dt: f64) -> Result<SweepResult> {
    let grid = GridSpec::new(side)?;
    let n = grid.n_vertices();
    let g = (n as f64).ln() / std::f64::consts::PI;
    let marked = MarkedVertex::centered(grid);
    let rows: Result<Vec<SweepRow>> = c_list
        .par_iter()
        .map(|&c| {
            let cfg = SearchConfig::nonlinear(grid, marked, g, c)?.with_time_step(dt)?;
            let metrics = run_search(&cfg)
                .map(|outcome| RunMetrics {
                    searching_time: outcome.searching_time,
                    peak_probability: outcome.peak_probability,
                    p_ball_at_peak: outcome.p_ball_at_peak,
                    peak_width: outcome.peak_width,
                })
                .map_err(|e| e.to_string());
            Ok(SweepRow {
                side,
                n,
                mode: Mode::Nonlinear,
                g,
                c,
                metrics,
            })
        })
        .collect();
    Ok(SweepResult { rows: rows? })
}

/// Model families for the scaling fits. The T-models fix the logarithm power
/// gamma and fit prefactor and the power of N; the probability model fits a
/// single prefactor against 1/ln N through the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FitModel {
    /// value = prefactor * N^beta * (ln N)^{1/2}, expected beta = 1/2
    SqrtNLogN,
    /// value = prefactor * N^beta * (ln N)^{3/4}, expected beta = 1/4
    QuarterPower,
    /// value = prefactor / ln N
    InverseLog,
    /// value = prefactor * N^beta * (ln N)^gamma for a caller-chosen gamma
    Custom { gamma: f64 },
}

impl FitModel {
    pub fn name(self) -> &'static str {
        match self {
            FitModel::SqrtNLogN => "sqrt_NlogN",
            FitModel::QuarterPower => "quarter_power",
            FitModel::InverseLog => "inverse_log",
            FitModel::Custom { .. } => "custom",
        }
    }

    fn gamma(self) -> f64 {
        match self {
            FitModel::SqrtNLogN => 0.5,
            FitModel::QuarterPower => 0.75,
            FitModel::InverseLog => -1.0,
            FitModel::Custom { gamma } => gamma,
        }
    }
}

/// Fitted scaling law. beta is the power of N, gamma the power of ln N
/// (fixed by the model), r_squared the coefficient of determination in the
/// fit's own coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingFit {
    pub model: FitModel,
    pub prefactor: f64,
    pub beta: f64,
    pub gamma: f64,
    pub r_squared: f64,
    pub rows_used: usize,
}

/// Least squares on (N, value) pairs in the model's coordinates: T-models fit
/// ln(value) - gamma ln(ln N) linearly in ln N; the probability model fits
/// value = prefactor / ln N through the origin.
pub fn fit_values(points: &[(usize, f64)], model: FitModel) -> Result<ScalingFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, v)| *n >= 16 && v.is_finite() && *v > 0.0)
        .map(|&(n, v)| (n as f64, v))
        .collect();
    if usable.len() < 5 {
        return Err(Error::FitRows { got: usable.len() });
    }
    let rows_used = usable.len();

    if let FitModel::InverseLog = model {
        let mut suv = 0.0;
        let mut suu = 0.0;
        for &(n, v) in &usable {
            let u = 1.0 / n.ln();
            suv += u * v;
            suu += u * u;
        }
        let prefactor = suv / suu;
        let mean: f64 = usable.iter().map(|p| p.1).sum::<f64>() / rows_used as f64;
        let ss_res: f64 = usable
            .iter()
            .map(|&(n, v)| (v - prefactor / n.ln()).powi(2))
            .sum();
        let ss_tot: f64 = usable.iter().map(|&(_, v)| (v - mean).powi(2)).sum();
        let r_squared = if ss_tot > 0.0 {
            (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
        } else {
            1.0
        };
        return Ok(ScalingFit {
            model,
            prefactor,
            beta: 0.0,
            gamma: -1.0,
            r_squared,
            rows_used,
        });
    }

    let gamma = model.gamma();
    let pts: Vec<(f64, f64)> = usable
        .iter()
        .map(|&(n, v)| (n.ln(), v.ln() - gamma * n.ln().ln()))
        .collect();
    let len = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let beta = (len * sxy - sx * sy) / (len * sxx - sx * sx);
    let intercept = (sy - beta * sx) / len;
    let mean_y = sy / len;
    let ss_res: f64 = pts
        .iter()
        .map(|&(x, y)| (y - intercept - beta * x).powi(2))
        .sum();
    let ss_tot: f64 = pts.iter().map(|&(_, y)| (y - mean_y).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(ScalingFit {
        model,
        prefactor: intercept.exp(),
        beta,
        gamma,
        r_squared,
        rows_used,
    })
}

/// Fits the sweep's searching times (T-models) or peak probabilities
/// (`InverseLog`) against N.
pub fn fit_scaling(sweep: &SweepResult, model: FitModel) -> Result<ScalingFit> {
    let points: Vec<(usize, f64)> = sweep
        .converged()
        .into_iter()
        .map(|(n, m)| {
            let value = match model {
                FitModel::InverseLog => m.peak_probability,
                _ => m.searching_time,
            };
            (n, value)
        })
        .collect();
    fit_values(&points, model)
}
