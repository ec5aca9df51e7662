//! Continuous-time quantum walk search on the 2D periodic grid.
//!
//! The crate simulates a walker driven by a staggered hopping Hamiltonian
//! plus a marking term that disconnects one vertex, optionally augmented by
//! a cubic on-site nonlinearity with state-dependent rescaling. Modules:
//!
//! - [`lattice`]: grid geometry, states, and the sparse Hamiltonian actions
//! - [`dynamics`]: RK4 time evolution and time-series sampling
//! - [`search`]: peak detection, searching time, and peak width
//! - [`reduced`]: two-level reduction, characteristic energy, coupling window
//! - [`ansatz`]: self-consistent closed form for the target weight
//! - [`scaling`]: size and coupling sweeps with power-law fits

pub mod ansatz;
pub mod dynamics;
pub mod error;
pub mod lattice;
pub mod reduced;
pub mod scaling;
pub mod search;

pub use num_complex::Complex64;

pub use error::{Error, Result};

pub use lattice::{
    apply_free, apply_nonlinear, apply_oracle, apply_search, cell_to_vertex, initial_state,
    target_state, vertex_to_cell, CellCoord, GridSpec, MarkedVertex, VertexCoord, WalkerState,
};

pub use dynamics::{
    default_horizon, evolve, step, subspace_amplitudes, Mode, SearchConfig, SubspaceAmplitudes,
    TimeSeries, DEFAULT_SAMPLE_STRIDE, DEFAULT_TIME_STEP,
};

pub use search::{
    ball_probability, detect_first_peak, peak_width, run_search, run_search_each_offset,
    SearchOutcome,
};

pub use reduced::{
    c_bounds, characteristic_energy, evolve_reduced, reduced_eigensystem, ReducedEigensystem,
    TwoLevelState,
};

pub use ansatz::{
    estimate_transition_time, regime_periods, solve_ansatz, AnsatzParams, AnsatzPoint,
};

pub use scaling::{
    fit_scaling, fit_values, sweep_coupling, sweep_sizes, CSelector, FitModel, ParamRule,
    RunMetrics, ScalingFit, SweepResult, SweepRow, DEFAULT_SWEEP_SIDES,
};
