//! Measurements on simulation output: front positions and speeds, shape
//! distances modulo translation, tail drift, and the model comparison
//! matrix.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fit::line_fit;
use crate::pde_sim::{init_from_profile, run, ModelKind, SimError, SimParams, SimState, Trajectory};
use crate::potential::{golden_min, DoubleWell};
use crate::profile::{
    existence_gate, solve_profile, GateReport, ProfileError, Side, WaveProfile,
};

/// Fraction of a run discarded as transient before fitting the speed.
pub const TRANSIENT_FRACTION: f64 = 0.5;
/// Minimum number of snapshots inside the speed-fit window.
pub const MIN_FIT_SNAPSHOTS: usize = 10;
/// Tail drift below this magnitude counts as no drift.
pub const DRIFT_TOL: f64 = 1e-9;
/// Relative speed error allowed for a front to count as traveling at the
/// predicted speed.
pub const SPEED_TOL: f64 = 0.05;
const SHIFT_TOL: f64 = 1e-6;
const SHIFT_SCAN_POINTS: usize = 400;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("field never crosses level {level}")]
    NoCrossing { level: f64 },
    #[error("field crosses level {level} {count} times")]
    MultipleCrossings { level: f64, count: usize },
    #[error("{got} snapshots in the fit window, need {MIN_FIT_SNAPSHOTS}")]
    TooFewSnapshots { got: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Abscissa where the piecewise linear interpolant of `v` crosses `level`.
pub fn front_position(state: &SimState, level: f64) -> Result<f64, AnalysisError> {
    crossing(&state.x, &state.v, level)
}

pub fn crossing(x: &[f64], v: &[f64], level: f64) -> Result<f64, AnalysisError> {
    let mut found = Vec::new();
    for i in 0..v.len() {
        let a = v[i] - level;
        if a == 0.0 {
            found.push(x[i]);
            continue;
        }
        if i + 1 < v.len() {
            let b = v[i + 1] - level;
            if a * b < 0.0 {
                found.push(x[i] + (x[i + 1] - x[i]) * a / (a - b));
            }
        }
    }
    match found.len() {
        0 => Err(AnalysisError::NoCrossing { level }),
        1 => Ok(found[0]),
        count => Err(AnalysisError::MultipleCrossings { level, count }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedFit {
    pub s_measured: f64,
    pub s_predicted: Option<f64>,
    /// `|s − s_pred|/|s_pred|`, or the absolute error when the prediction
    /// is zero.
    pub relative_error: Option<f64>,
    pub fit_window: (f64, f64),
    pub r_squared: f64,
}

/// Least-squares slope of the front position over the second half of
/// the run.
pub fn measure_speed(
    trajectory: &Trajectory,
    level: f64,
    predicted: Option<f64>,
) -> Result<SpeedFit, AnalysisError> {
    let times: Vec<f64> = trajectory.frames.iter().map(|f| f.t).collect();
    let x = &trajectory.last.x;
    let positions = trajectory
        .frames
        .iter()
        .map(|f| crossing(x, &f.v, level))
        .collect::<Result<Vec<_>, _>>()?;
    measure_speed_from_positions(&times, &positions, predicted)
}

pub fn measure_speed_from_positions(
    times: &[f64],
    positions: &[f64],
    predicted: Option<f64>,
) -> Result<SpeedFit, AnalysisError> {
    let (t0, t1) = match (times.first(), times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(AnalysisError::TooFewSnapshots { got: 0 }),
    };
    let start = t0 + TRANSIENT_FRACTION * (t1 - t0);
    let (t, p): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(positions)
        .filter(|(&t, _)| t >= start)
        .map(|(&t, &p)| (t, p))
        .unzip();
    if t.len() < MIN_FIT_SNAPSHOTS {
        return Err(AnalysisError::TooFewSnapshots { got: t.len() });
    }
    let fit = line_fit(&t, &p).ok_or(AnalysisError::TooFewSnapshots { got: t.len() })?;
    let s = fit.slope;
    let relative_error = predicted.map(|sp| {
        if sp == 0.0 {
            s.abs()
        } else {
            ((s - sp) / sp).abs()
        }
    });
    Ok(SpeedFit {
        s_measured: s,
        s_predicted: predicted,
        relative_error,
        fit_window: (t[0], t[t.len() - 1]),
        r_squared: fit.r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeDistance {
    /// `state(x) ≈ reference(x − shift)`
    pub shift: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Distance from `state` to `profile` after the best translation.
pub fn profile_distance(state: &SimState, profile: &WaveProfile) -> ShapeDistance {
    best_shift(state, |y| profile.eval(y), |y| profile.eval_slope(y))
}

/// Distance between two states on possibly different grids after the best
/// translation of `reference`.
pub fn state_distance(state: &SimState, reference: &SimState) -> ShapeDistance {
    let interp = GridInterp::new(reference);
    best_shift(state, |y| interp.eval(y), |y| interp.slope(y))
}

fn best_shift(
    state: &SimState,
    reference: impl Fn(f64) -> f64,
    slope: impl Fn(f64) -> f64,
) -> ShapeDistance {
    let n = state.cells();
    let weights: Vec<f64> = (0..=n).map(|i| state.weight(i)).collect();
    let l2sq = |h: f64| -> f64 {
        state
            .x
            .iter()
            .zip(&state.v)
            .zip(&weights)
            .map(|((&x, &v), &w)| {
                let r = v - reference(x - h);
                w * r * r
            })
            .sum()
    };

    let half = 0.5 * state.l();
    let step = 2.0 * half / SHIFT_SCAN_POINTS as f64;
    let (mut best_h, mut best) = (0.0, l2sq(0.0));
    for k in 0..=SHIFT_SCAN_POINTS {
        let h = -half + k as f64 * step;
        let e = l2sq(h);
        if e < best {
            best = e;
            best_h = h;
        }
    }
    let lo = (best_h - step).max(-half);
    let hi = (best_h + step).min(half);
    let (h, e) = golden_min(l2sq, lo, hi, SHIFT_TOL);
    if e < best {
        best_h = h;
        best = e;
    }

    // Gauss–Newton on the residual r_i(h) = v_i − ref(x_i − h).
    for _ in 0..5 {
        let (mut num, mut den) = (0.0, 0.0);
        for ((&x, &v), &w) in state.x.iter().zip(&state.v).zip(&weights) {
            let y = x - best_h;
            let r = v - reference(y);
            let j = slope(y);
            num += w * r * j;
            den += w * j * j;
        }
        if den <= 0.0 {
            break;
        }
        let h = best_h - num / den;
        if h.abs() > half {
            break;
        }
        let e = l2sq(h);
        if e < best {
            best = e;
            best_h = h;
        } else {
            break;
        }
    }

    let linf = state
        .x
        .iter()
        .zip(&state.v)
        .map(|(&x, &v)| (v - reference(x - best_h)).abs())
        .fold(0.0, f64::max);
    ShapeDistance {
        shift: best_h,
        l2: best.sqrt(),
        linf,
    }
}

/// Cubic Hermite interpolation of grid data with centred slopes, constant
/// beyond the ends.
struct GridInterp<'a> {
    x0: f64,
    dx: f64,
    v: &'a [f64],
}

impl<'a> GridInterp<'a> {
    fn new(state: &'a SimState) -> Self {
        Self {
            x0: state.x[0],
            dx: state.dx(),
            v: &state.v,
        }
    }

    fn node_slope(&self, i: usize) -> f64 {
        let n = self.v.len() - 1;
        match i {
            0 => (self.v[1] - self.v[0]) / self.dx,
            i if i == n => (self.v[n] - self.v[n - 1]) / self.dx,
            i => (self.v[i + 1] - self.v[i - 1]) / (2.0 * self.dx),
        }
    }

    fn locate(&self, y: f64) -> Option<(usize, f64)> {
        let n = self.v.len() - 1;
        let s = (y - self.x0) / self.dx;
        if !(s >= 0.0 && s <= n as f64) {
            return None;
        }
        let k = (s.floor() as usize).min(n - 1);
        Some((k, s - k as f64))
    }

    fn eval(&self, y: f64) -> f64 {
        let Some((k, t)) = self.locate(y) else {
            return if y < self.x0 { self.v[0] } else { self.v[self.v.len() - 1] };
        };
        let (m0, m1) = (self.node_slope(k) * self.dx, self.node_slope(k + 1) * self.dx);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.v[k]
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * self.v[k + 1]
            + (t3 - t2) * m1
    }

    fn slope(&self, y: f64) -> f64 {
        let Some((k, t)) = self.locate(y) else {
            return 0.0;
        };
        let (m0, m1) = (self.node_slope(k), self.node_slope(k + 1));
        let t2 = t * t;
        (6.0 * t2 - 6.0 * t) / self.dx * self.v[k]
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) / self.dx * self.v[k + 1]
            + (3.0 * t2 - 2.0 * t) * m1
    }
}

/// Initial rate of change at the node next to the `side` boundary,
/// estimated from the first two frames.
pub fn tail_drift_rate(trajectory: &Trajectory, side: Side) -> f64 {
    let (a, b) = (&trajectory.frames[0], &trajectory.frames[1]);
    let k = match side {
        Side::Minus => 1,
        Side::Plus => a.v.len() - 2,
    };
    (b.v[k] - a.v[k]) / (b.t - a.t)
}

/// Run `state` for a single step and return the tail drift of larger
/// magnitude (signed).
pub fn probe_tail_drift(state: &SimState) -> Result<f64, AnalysisError> {
    let tr = run(state, state.t + state.dt, state.dt)?;
    let m = tail_drift_rate(&tr, Side::Minus);
    let p = tail_drift_rate(&tr, Side::Plus);
    Ok(if m.abs() >= p.abs() { m } else { p })
}

/// Grid and run length for one family of models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSetup {
    pub l: f64,
    pub dx: f64,
    pub t_end: f64,
    pub snapshot_every: f64,
    /// `None` uses half the stability bound.
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareConfig {
    pub well: DoubleWell,
    pub models: Vec<ModelKind>,
    pub mus: Vec<f64>,
    pub ac: RunSetup,
    pub ch: RunSetup,
    pub profile_half_width: f64,
    pub profile_dx: f64,
    pub delta: f64,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
}

impl CompareConfig {
    /// The full 4 × {0, 0.2} matrix at desk-scale resolution.
    pub fn standard(well: DoubleWell) -> Self {
        Self {
            well,
            models: ModelKind::ALL.to_vec(),
            mus: vec![0.0, 0.2],
            ac: RunSetup {
                l: 20.0,
                dx: 0.02,
                t_end: 20.0,
                snapshot_every: 0.1,
                dt: None,
            },
            ch: RunSetup {
                l: 12.0,
                dx: 0.1,
                t_end: 10.0,
                snapshot_every: 0.1,
                dt: None,
            },
            profile_half_width: 10.0,
            profile_dx: 1e-3,
            delta: 0.0,
            jobs: 0,
        }
    }

    pub fn setup_for(&self, model: ModelKind) -> RunSetup {
        if model.is_conserved() {
            self.ch
        } else {
            self.ac
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: ModelKind,
    pub mu: f64,
    pub front_exists: bool,
    pub s_measured: Option<f64>,
    pub s_predicted: Option<f64>,
    pub tail_drift: f64,
    pub l2_distance: Option<f64>,
    pub linf_distance: Option<f64>,
    pub gate: GateReport,
}

/// Speed the theory predicts for `model` at forcing `mu`, if any.
pub fn predicted_speed(well: &DoubleWell, model: ModelKind, mu: f64) -> Option<f64> {
    if !well.equal_wells() {
        return None;
    }
    match model {
        ModelKind::ModifiedAC => Some(if mu == 0.0 { 0.0 } else { -mu }),
        ModelKind::ClassicAC => (mu == 0.0).then_some(0.0),
        ModelKind::ModifiedCH | ModelKind::ClassicCH => Some(0.0),
    }
}

/// Initial state for one cell: the wave profile when the wells are equal,
/// otherwise a generic `tanh` front between the wells.
pub fn cell_initial_state(
    config: &CompareConfig,
    model: ModelKind,
    mu: f64,
) -> Result<(SimState, Option<WaveProfile>), AnalysisError> {
    let setup = config.setup_for(model);
    let mut params = SimParams::new(model, mu, setup.l, setup.dx).with_delta(config.delta);
    params.dt = setup.dt;
    let well = &config.well;
    if well.equal_wells() {
        let profile = solve_profile(
            well,
            config.profile_half_width,
            config.profile_dx,
            model.conservation(),
        )?;
        let state = init_from_profile(&profile, well, &params)?;
        Ok((state, Some(profile)))
    } else {
        let (vm, vp) = (well.v_minus, well.v_plus);
        let state = SimState::from_fn(well, &params, |x| {
            0.5 * (vm + vp) + 0.5 * (vp - vm) * (x / 2f64.sqrt()).tanh()
        })?;
        Ok((state, None))
    }
}

pub fn run_cell(config: &CompareConfig, model: ModelKind, mu: f64) -> Result<ComparisonRow, AnalysisError> {
    run_cell_with_trajectory(config, model, mu).map(|(row, _)| row)
}

/// [`run_cell`] that also hands back the full run.
pub fn run_cell_with_trajectory(
    config: &CompareConfig,
    model: ModelKind,
    mu: f64,
) -> Result<(ComparisonRow, Trajectory), AnalysisError> {
    let well = &config.well;
    let gate = existence_gate(well, mu, model);
    let setup = config.setup_for(model);
    let (state, profile) = cell_initial_state(config, model, mu)?;
    let tail_drift = probe_tail_drift(&state)?;
    let trajectory = run(&state, setup.t_end, setup.snapshot_every)?;
    let s_predicted = predicted_speed(well, model, mu);
    let fit = measure_speed(&trajectory, well.v_star, s_predicted).ok();
    let distance = profile.as_ref().map(|p| profile_distance(&trajectory.last, p));

    let speed_ok = match (&fit, s_predicted) {
        (Some(f), Some(sp)) if sp != 0.0 => ((f.s_measured - sp) / sp).abs() <= SPEED_TOL,
        (Some(f), Some(_)) => f.s_measured.abs() * (f.fit_window.1 - f.fit_window.0) <= setup.dx,
        _ => false,
    };
    let shape_ok = distance.is_some_and(|d| d.linf <= 10.0 * setup.dx * setup.dx);
    let front_exists = gate.passed && speed_ok && shape_ok && tail_drift.abs() <= DRIFT_TOL;

    let row = ComparisonRow {
        model,
        mu,
        front_exists,
        s_measured: fit.map(|f| f.s_measured),
        s_predicted,
        tail_drift,
        l2_distance: distance.map(|d| d.l2),
        linf_distance: distance.map(|d| d.linf),
        gate,
    };
    Ok((row, trajectory))
}

/// Runs every (model, μ) cell, in parallel over `config.jobs` workers.
/// Rows come back in model-major order regardless of scheduling.
pub fn comparison_matrix(config: &CompareConfig) -> Result<Vec<ComparisonRow>, AnalysisError> {
    let cells: Vec<(ModelKind, f64)> = config
        .models
        .iter()
        .flat_map(|&m| config.mus.iter().map(move |&mu| (m, mu)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| AnalysisError::Pool(e.to_string()))?;
    pool.install(|| {
        cells
            .par_iter()
            .map(|&(m, mu)| run_cell(config, m, mu))
            .collect()
    })
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

/// CSV `model,mu,front_exists,s_measured,s_predicted,tail_drift,l2_distance`;
/// missing values are empty fields.
pub fn write_comparison_csv<W: Write>(rows: &[ComparisonRow], mut out: W) -> io::Result<()> {
    writeln!(out, "model,mu,front_exists,s_measured,s_predicted,tail_drift,l2_distance")?;
    for r in rows {
        writeln!(
            out,
            "{},{:.16e},{},{},{},{:.16e},{}",
            r.model,
            r.mu,
            r.front_exists,
            opt(r.s_measured),
            opt(r.s_predicted),
            r.tail_drift,
            opt(r.l2_distance)
        )?;
    }
    Ok(())
}

/// CSV `t,front_position,mass,energy`, one row per frame. A frame without
/// a unique crossing leaves the position empty.
pub fn write_trajectory_csv<W: Write>(trajectory: &Trajectory, level: f64, mut out: W) -> io::Result<()> {
    writeln!(out, "t,front_position,mass,energy")?;
    let x = &trajectory.last.x;
    for (k, f) in trajectory.frames.iter().enumerate() {
        let state = trajectory.state(k);
        writeln!(
            out,
            "{:.16e},{},{:.16e},{:.16e}",
            f.t,
            opt(crossing(x, &f.v, level).ok()),
            state.mass(),
            state.energy()
        )?;
    }
    Ok(())
}
