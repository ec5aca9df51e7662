//! Subcommand implementations: resolve parameters (flag, config file,
//! default), validate the physics, run the core routines, and emit files.
//! Every command ends by writing a manifest naming all of its outputs.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use ctqw::{
    c_bounds, default_horizon, detect_first_peak, evolve_reduced, fit_scaling, fit_values,
    peak_width, regime_periods, run_search, solve_ansatz, sweep_coupling, sweep_sizes,
    AnsatzParams, CSelector, FitModel, GridSpec, MarkedVertex, Mode, ParamRule, ScalingFit,
    SearchConfig, SweepResult, TwoLevelState, DEFAULT_SWEEP_SIDES, DEFAULT_TIME_STEP,
};

use crate::config::{
    parse_list, pick_bool, pick_f64, pick_opt_usize, pick_str, pick_string, pick_usize, FileConfig,
};
use crate::emit::{
    csv_field, fmt_f64, series_json, write_json, write_series_csv, write_svg, Emitter,
};
use crate::{
    AnsatzArgs, Cli, Command, CommonArgs, PeakwidthArgs, ReducedArgs, SearchArgs, SweepArgs,
    SweepCArgs,
};

const DEFAULT_SIDE: usize = 30;
const DEFAULT_C_LIST: [f64; 5] = [0.0, 2.0, 5.52, 11.0, 20.0];
/// Sample spacing of emitted series; also the ansatz time grid step.
const SAMPLE_SPACING: f64 = 0.1;
/// Under the sqrt coupling rule the rescaling factor grows like sqrt(N), so
/// the stable step is smaller than the everyday default.
const SQRT_RULE_TIME_STEP: f64 = 0.002;

pub fn dispatch(cli: Cli) -> Result<()> {
    let command_line: String = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    match cli.command {
        Command::Search(args) => search(args, &command_line),
        Command::Sweep(args) => sweep(args, &command_line),
        Command::SweepC(args) => sweep_c(args, &command_line),
        Command::Reduced(args) => reduced(args, &command_line),
        Command::Ansatz(args) => ansatz(args, &command_line),
        Command::Peakwidth(args) => peakwidth(args, &command_line),
    }
}

fn out_dir(common: &CommonArgs, cfg: &FileConfig) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| cfg.get("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn parse_mode(raw: &str) -> Result<Mode> {
    match raw {
        "linear" => Ok(Mode::Linear),
        "nonlinear" => Ok(Mode::Nonlinear),
        other => bail!("mode must be linear or nonlinear, got {other:?}"),
    }
}

fn parse_g(raw: &str, n: usize) -> Result<f64> {
    if raw == "auto" {
        return Ok((n as f64).ln() / std::f64::consts::PI);
    }
    raw.parse::<f64>()
        .with_context(|| format!("g must be a number or auto, got {raw:?}"))
}

fn parse_c(raw: &str, n: usize) -> Result<f64> {
    let raw = raw.strip_prefix("cmode:").unwrap_or(raw);
    match raw {
        "auto" | "half-inverse-E" | "half-inverse-e" => {
            Ok(CSelector::HalfInverseEnergy.value(n)?)
        }
        "inverse-E" | "inverse-e" => Ok(CSelector::InverseEnergy.value(n)?),
        number => number.parse::<f64>().with_context(|| {
            format!("c must be a number, auto, half-inverse-E, or inverse-E, got {number:?}")
        }),
    }
}

fn parse_t_max(raw: &str, auto: f64) -> Result<f64> {
    if raw == "auto" {
        return Ok(auto);
    }
    raw.parse::<f64>()
        .with_context(|| format!("t-max must be a number or auto, got {raw:?}"))
}

fn parse_marked(raw: &str, grid: GridSpec) -> Result<MarkedVertex> {
    if raw == "auto" {
        return Ok(MarkedVertex::centered(grid));
    }
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        bail!("marked must be wx,wy,ax,ay or auto, got {raw:?}");
    }
    let wx: usize = parts[0].parse().context("marked: bad wx")?;
    let wy: usize = parts[1].parse().context("marked: bad wy")?;
    let ax: u8 = parts[2].parse().context("marked: bad ax")?;
    let ay: u8 = parts[3].parse().context("marked: bad ay")?;
    Ok(MarkedVertex::new(grid, (wx, wy), (ax, ay))?)
}

fn parse_fit_model(raw: &str) -> Result<FitModel> {
    match raw {
        "sqrt_NlogN" => Ok(FitModel::SqrtNLogN),
        "quarter_power" => Ok(FitModel::QuarterPower),
        "inverse_log" => Ok(FitModel::InverseLog),
        other => match other.strip_prefix("custom:") {
            Some(gamma_raw) => {
                let gamma: f64 = gamma_raw
                    .parse()
                    .with_context(|| format!("custom fit model: bad gamma {gamma_raw:?}"))?;
                Ok(FitModel::Custom { gamma })
            }
            None => bail!(
                "unknown fit model {other:?}: expected sqrt_NlogN, quarter_power, \
                 inverse_log, or custom:<gamma>"
            ),
        },
    }
}

fn parse_rule(raw: &str) -> Result<ParamRule> {
    match raw {
        "sqrt" => Ok(ParamRule::SqrtCoupling),
        "log" => Ok(ParamRule::LogCoupling(CSelector::default())),
        other => bail!("rule must be sqrt or log, got {other:?}"),
    }
}

/// Rejects couplings the integrator cannot hold stable, citing the bound.
fn check_couplings(n: usize, g: f64, c: f64) -> Result<()> {
    if !g.is_finite() || g < 0.0 {
        bail!("g = {g} violates g >= 0 (the nonlinearity must be attractive or absent)");
    }
    if !c.is_finite() || c < 0.0 {
        bail!("c = {c} violates c >= 0 (the rescaling strength cannot be negative)");
    }
    if g > 0.0 && c > 0.0 {
        let (c_ref, c_max) = c_bounds(n, g)?;
        if c >= c_max {
            bail!(
                "c = {c} is outside the stable rescaling window: need c < c_max = N/(4g) = \
                 {c_max:.4} at N = {n} (reference value c = {c_ref:.4})"
            );
        }
    }
    Ok(())
}

fn with_pool<T: Send>(
    workers: Option<usize>,
    op: impl FnOnce() -> Result<T> + Send,
) -> Result<T> {
    match workers {
        None => op(),
        Some(w) => {
            if w == 0 {
                bail!("workers must be at least 1");
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .context("cannot build worker pool")?;
            pool.install(op)
        }
    }
}

struct SeriesFormat {
    csv: bool,
    json: bool,
}

fn parse_format(raw: &str) -> Result<SeriesFormat> {
    match raw {
        "csv" => Ok(SeriesFormat { csv: true, json: false }),
        "json" => Ok(SeriesFormat { csv: false, json: true }),
        "both" => Ok(SeriesFormat { csv: true, json: true }),
        other => bail!("format must be csv, json, or both, got {other:?}"),
    }
}

impl SeriesFormat {
    fn name(&self) -> &'static str {
        match (self.csv, self.json) {
            (true, true) => "both",
            (false, true) => "json",
            _ => "csv",
        }
    }
}

fn marked_label(m: MarkedVertex) -> String {
    let (wx, wy) = m.cell();
    let (ax, ay) = m.alpha();
    format!("{wx},{wy},{ax},{ay}")
}

fn interp(ts: &[f64], vs: &[f64], t: f64) -> f64 {
    match ts.iter().position(|&x| x >= t) {
        None => vs.last().copied().unwrap_or(f64::NAN),
        Some(0) => vs[0],
        Some(i) => {
            let w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
            vs[i - 1] + w * (vs[i] - vs[i - 1])
        }
    }
}

fn result_json(
    n: usize,
    l: usize,
    mode: &str,
    g: f64,
    c: f64,
    dt: f64,
    t: f64,
    p_bar: f64,
    p_ball_at_t: f64,
    width: Option<f64>,
) -> Value {
    json!({
        "N": n,
        "L": l,
        "mode": mode,
        "g": g,
        "c": c,
        "dt": dt,
        "T": t,
        "p_bar": p_bar,
        "p_ball_at_T": p_ball_at_t,
        "peak_width": width,
    })
}

fn fit_json(fit: &ScalingFit) -> Value {
    json!({
        "model": fit.model.name(),
        "prefactor": fit.prefactor,
        "beta": fit.beta,
        "gamma": fit.gamma,
        "r_squared": fit.r_squared,
        "rows_used": fit.rows_used,
    })
}

fn write_sweep_csv(path: &Path, result: &SweepResult) -> Result<()> {
    use std::fmt::Write as _;
    let mut out = String::from("L,N,mode,g,c,T,p_bar,p_ball_at_T,peak_width,error\n");
    for row in &result.rows {
        match &row.metrics {
            Ok(m) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},",
                    row.side,
                    row.n,
                    row.mode.as_str(),
                    fmt_f64(row.g),
                    fmt_f64(row.c),
                    fmt_f64(m.searching_time),
                    fmt_f64(m.peak_probability),
                    fmt_f64(m.p_ball_at_peak),
                    row_width(m.peak_width),
                );
            }
            Err(e) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},,,,,{}",
                    row.side,
                    row.n,
                    row.mode.as_str(),
                    fmt_f64(row.g),
                    fmt_f64(row.c),
                    csv_field(e),
                );
            }
        }
    }
    std::fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))
}

fn row_width(width: Option<f64>) -> String {
    width.map(fmt_f64).unwrap_or_default()
}

fn search(args: SearchArgs, command: &str) -> Result<()> {
    let cfg = FileConfig::load_optional(args.common.config.as_deref())?;
    let l = pick_usize(args.l, &cfg, "L", DEFAULT_SIDE)?;
    let grid = GridSpec::new(l)?;
    let n = grid.n_vertices();
    let mode = parse_mode(&pick_string(args.mode.as_deref(), &cfg, "mode", "linear"))?;
    let g_raw = pick_string(args.g.as_deref(), &cfg, "g", "auto");
    let c_raw = pick_string(args.c.as_deref(), &cfg, "c", "auto");
    let dt = pick_f64(args.dt, &cfg, "dt", DEFAULT_TIME_STEP)?;
    let t_max = parse_t_max(
        &pick_string(args.t_max.as_deref(), &cfg, "t-max", "auto"),
        default_horizon(grid),
    )?;
    let marked = parse_marked(&pick_string(args.marked.as_deref(), &cfg, "marked", "auto"), grid)?;
    let format = parse_format(&pick_string(args.format.as_deref(), &cfg, "format", "csv"))?;
    let svg = pick_bool(args.svg, &cfg, "svg")?;
    let out = out_dir(&args.common, &cfg);

    let (g, c) = match mode {
        Mode::Linear => {
            if g_raw != "auto" || c_raw != "auto" {
                bail!("g and c only apply to nonlinear mode");
            }
            (0.0, 0.0)
        }
        Mode::Nonlinear => {
            let g = parse_g(&g_raw, n)?;
            let c = parse_c(&c_raw, n)?;
            check_couplings(n, g, c)?;
            (g, c)
        }
    };

    let search_cfg = match mode {
        Mode::Linear => SearchConfig::linear(grid, marked),
        Mode::Nonlinear => SearchConfig::nonlinear(grid, marked, g, c)?,
    }
    .with_time_step(dt)?
    .with_horizon(t_max)?;
    let outcome = run_search(&search_cfg)?;

    let mut emitter = Emitter::new(&out)?;
    if format.csv {
        write_series_csv(&emitter.path("series.csv"), &outcome.series)?;
    }
    if format.json {
        write_json(&emitter.path("series.json"), &series_json(&outcome.series))?;
    }
    write_json(
        &emitter.path("result.json"),
        &result_json(
            n,
            l,
            mode.as_str(),
            g,
            c,
            dt,
            outcome.searching_time,
            outcome.peak_probability,
            outcome.p_ball_at_peak,
            outcome.peak_width,
        ),
    )?;
    if svg {
        write_svg(
            &emitter.path("plot.svg"),
            &outcome.series.t,
            &outcome.series.p_gamma,
            "t",
            "p_gamma",
        )?;
    }
    let snapshot = json!({
        "L": l,
        "mode": mode.as_str(),
        "g": g,
        "c": c,
        "dt": dt,
        "t-max": t_max,
        "marked": marked_label(marked),
        "format": format.name(),
        "svg": svg,
        "out": out.display().to_string(),
    });
    emitter.finish(command, snapshot)?;
    Ok(())
}

fn sweep(args: SweepArgs, command: &str) -> Result<()> {
    let cfg = FileConfig::load_optional(args.common.config.as_deref())?;
    let sides: Vec<usize> = match pick_str(args.l_list.as_deref(), &cfg, "L-list") {
        Some(raw) => parse_list(raw, "L-list")?,
        None => DEFAULT_SWEEP_SIDES.to_vec(),
    };
    let mode = parse_mode(&pick_string(args.mode.as_deref(), &cfg, "mode", "linear"))?;
    let fit_model = pick_str(args.fit.as_deref(), &cfg, "fit")
        .map(parse_fit_model)
        .transpose()?;
    let workers = pick_opt_usize(args.workers, &cfg, "workers")?;
    let dt = pick_f64(args.dt, &cfg, "dt", DEFAULT_TIME_STEP)?;
    let out = out_dir(&args.common, &cfg);

    let rule = match mode {
        Mode::Linear => ParamRule::Linear,
        Mode::Nonlinear => ParamRule::LogCoupling(CSelector::default()),
    };
    let result = with_pool(workers, || {
        sweep_sizes(&sides, rule, dt).map_err(anyhow::Error::from)
    })?;
    let fit_outcome = fit_model.map(|model| fit_scaling(&result, model));

    let mut emitter = Emitter::new(&out)?;
    write_sweep_csv(&emitter.path("sweep.csv"), &result)?;
    if let Some(Ok(fit)) = &fit_outcome {
        write_json(&emitter.path("fit.json"), &fit_json(fit))?;
    }
    let snapshot = json!({
        "L-list": sides,
        "mode": mode.as_str(),
        "fit": fit_model.map(|m| m.name()),
        "workers": workers,
        "dt": dt,
        "out": out.display().to_string(),
    });
    emitter.finish(command, snapshot)?;
    if let Some(Err(e)) = fit_outcome {
        return Err(anyhow::Error::from(e).context("scaling fit failed; sweep rows were written"));
    }
    Ok(())
}

fn sweep_c(args: SweepCArgs, command: &str) -> Result<()> {
    let cfg = FileConfig::load_optional(args.common.config.as_deref())?;
    let l = pick_usize(args.l, &cfg, "L", DEFAULT_SIDE)?;
    let grid = GridSpec::new(l)?;
    let n = grid.n_vertices();
    let c_values: Vec<f64> = match pick_str(args.c_list.as_deref(), &cfg, "c-list") {
        Some(raw) => parse_list(raw, "c-list")?,
        None => DEFAULT_C_LIST.to_vec(),
    };
    let workers = pick_opt_usize(args.workers, &cfg, "workers")?;
    let dt = pick_f64(args.dt, &cfg, "dt", DEFAULT_TIME_STEP)?;
    let out = out_dir(&args.common, &cfg);

    let g = (n as f64).ln() / std::f64::consts::PI;
    for &c in &c_values {
        check_couplings(n, g, c)?;
    }
    let result = with_pool(workers, || {
        sweep_coupling(l, &c_values, dt).map_err(anyhow::Error::from)
    })?;

    let mut emitter = Emitter::new(&out)?;
    {
        use std::fmt::Write as _;
        let mut text = String::from("c,N,g,T,p_bar,p_ball_at_T,peak_width,error\n");
        for row in &result.rows {
            match &row.metrics {
                Ok(m) => {
                    let _ = writeln!(
                        text,
                        "{},{},{},{},{},{},{},",
                        fmt_f64(row.c),
                        row.n,
                        fmt_f64(row.g),
                        fmt_f64(m.searching_time),
                        fmt_f64(m.peak_probability),
                        fmt_f64(m.p_ball_at_peak),
                        row_width(m.peak_width),
                    );
                }
                Err(e) => {
                    let _ = writeln!(
                        text,
                        "{},{},{},,,,,{}",
                        fmt_f64(row.c),
                        row.n,
                        fmt_f64(row.g),
                        csv_field(e),
                    );
                }
            }
        }
        let path = emitter.path("sweep_c.csv");
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let snapshot = json!({
        "L": l,
        "c-list": c_values,
        "workers": workers,
        "dt": dt,
        "out": out.display().to_string(),
    });
    emitter.finish(command, snapshot)?;
    Ok(())
}

fn reduced(args: ReducedArgs, command: &str) -> Result<()> {
    let cfg = FileConfig::load_optional(args.common.config.as_deref())?;
    let l = pick_usize(args.l, &cfg, "L", DEFAULT_SIDE)?;
    let grid = GridSpec::new(l)?;
    let n = grid.n_vertices();
    let g = parse_g(&pick_string(args.g.as_deref(), &cfg, "g", "auto"), n)?;
    let c = parse_c(&pick_string(args.c.as_deref(), &cfg, "c", "auto"), n)?;
    let dt = pick_f64(args.dt, &cfg, "dt", DEFAULT_TIME_STEP)?;
    let t_max = parse_t_max(
        &pick_string(args.t_max.as_deref(), &cfg, "t-max", "auto"),
        default_horizon(grid),
    )?;
    let out = out_dir(&args.common, &cfg);
    check_couplings(n, g, c)?;

    let series = evolve_reduced(TwoLevelState::start(), n, g, c, dt, t_max)?;
    let (t_peak, p_peak) = detect_first_peak(&series)?;
    let width = peak_width(&series).ok();
    let p_ball_at_t = interp(&series.t, &series.p_ball, t_peak);

    let mut emitter = Emitter::new(&out)?;
    write_series_csv(&emitter.path("series.csv"), &series)?;
    write_json(
        &emitter.path("result.json"),
        &result_json(n, l, "reduced", g, c, dt, t_peak, p_peak, p_ball_at_t, width),
    )?;
    let snapshot = json!({
        "L": l,
        "g": g,
        "c": c,
        "dt": dt,
        "t-max": t_max,
        "out": out.display().to_string(),
    });
    emitter.finish(command, snapshot)?;
    Ok(())
}

fn ansatz(args: AnsatzArgs, command: &str) -> Result<()> {
    let cfg = FileConfig::load_optional(args.common.config.as_deref())?;
    let l = pick_usize(args.l, &cfg, "L", DEFAULT_SIDE)?;
    let grid = GridSpec::new(l)?;
    let n = grid.n_vertices();
    let amplitude = pick_f64(args.amplitude, &cfg, "A", 1.0)?;
    let c0 = pick_f64(args.c0, &cfg, "C0", 1.0)?;
    let c1 = pick_f64(args.c1, &cfg, "C1", 1.0)?;
    let g = parse_g(&pick_string(args.g.as_deref(), &cfg, "g", "auto"), n)?;
    let c = parse_c(&pick_string(args.c.as_deref(), &cfg, "c", "auto"), n)?;
    let dt = pick_f64(args.dt, &cfg, "dt", SAMPLE_SPACING)?;
    let t_max = parse_t_max(
        &pick_string(args.t_max.as_deref(), &cfg, "t-max", "auto"),
        default_horizon(grid),
    )?;
    let out = out_dir(&args.common, &cfg);
    if dt <= 0.0 || !dt.is_finite() {
        bail!("dt = {dt} violates dt > 0");
    }

    let (t0, t1) = regime_periods(n, g, c)?;
    let params = AnsatzParams::new(n, t0, t1)?.with_shape(amplitude, c0, c1)?;
    let steps = (t_max / dt).floor() as usize;
    let t_grid: Vec<f64> = (0..=steps).map(|i| i as f64 * dt).collect();
    let points = solve_ansatz(&params, &t_grid)?;

    let mut emitter = Emitter::new(&out)?;
    {
        use std::fmt::Write as _;
        let mut text = String::from("t,x,extrapolated\n");
        for p in &points {
            let _ = writeln!(text, "{},{},{}", fmt_f64(p.t), fmt_f64(p.x), p.extrapolated);
        }
        let path = emitter.path("ansatz.csv");
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let snapshot = json!({
        "A": amplitude,
        "C0": c0,
        "C1": c1,
        "L": l,
        "g": g,
        "c": c,
        "dt": dt,
        "t-max": t_max,
        "out": out.display().to_string(),
    });
    emitter.finish(command, snapshot)?;
    Ok(())
}

fn peakwidth(args: PeakwidthArgs, command: &str) -> Result<()> {
    let cfg = FileConfig::load_optional(args.common.config.as_deref())?;
    let sides: Vec<usize> = match pick_str(args.l_list.as_deref(), &cfg, "L-list") {
        Some(raw) => parse_list(raw, "L-list")?,
        None => DEFAULT_SWEEP_SIDES.to_vec(),
    };
    let rule_name = pick_string(args.rule.as_deref(), &cfg, "rule", "sqrt");
    let rule = parse_rule(&rule_name)?;
    let fit_model = pick_str(args.fit.as_deref(), &cfg, "fit")
        .map(parse_fit_model)
        .transpose()?;
    let workers = pick_opt_usize(args.workers, &cfg, "workers")?;
    let default_dt = match rule {
        ParamRule::SqrtCoupling => SQRT_RULE_TIME_STEP,
        _ => DEFAULT_TIME_STEP,
    };
    let dt = pick_f64(args.dt, &cfg, "dt", default_dt)?;
    let out = out_dir(&args.common, &cfg);

    let result = with_pool(workers, || {
        sweep_sizes(&sides, rule, dt).map_err(anyhow::Error::from)
    })?;
    let width_points: Vec<(usize, f64)> = result
        .converged()
        .into_iter()
        .filter_map(|(n, m)| m.peak_width.map(|w| (n, w)))
        .collect();
    let fit_outcome = fit_model.map(|model| fit_values(&width_points, model));

    let mut emitter = Emitter::new(&out)?;
    {
        use std::fmt::Write as _;
        let mut text = String::from("L,N,g,c,T,width,error\n");
        for row in &result.rows {
            match &row.metrics {
                Ok(m) => {
                    let _ = writeln!(
                        text,
                        "{},{},{},{},{},{},",
                        row.side,
                        row.n,
                        fmt_f64(row.g),
                        fmt_f64(row.c),
                        fmt_f64(m.searching_time),
                        row_width(m.peak_width),
                    );
                }
                Err(e) => {
                    let _ = writeln!(
                        text,
                        "{},{},{},{},,,{}",
                        row.side,
                        row.n,
                        fmt_f64(row.g),
                        fmt_f64(row.c),
                        csv_field(e),
                    );
                }
            }
        }
        let path = emitter.path("width.csv");
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    if let Some(Ok(fit)) = &fit_outcome {
        write_json(&emitter.path("fit.json"), &fit_json(fit))?;
    }
    let snapshot = json!({
        "L-list": sides,
        "rule": rule_name,
        "fit": fit_model.map(|m| m.name()),
        "workers": workers,
        "dt": dt,
        "out": out.display().to_string(),
    });
    emitter.finish(command, snapshot)?;
    if let Some(Err(e)) = fit_outcome {
        return Err(anyhow::Error::from(e).context("width fit failed; width rows were written"));
    }
    Ok(())
}
