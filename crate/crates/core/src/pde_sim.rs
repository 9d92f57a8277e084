//! Explicit finite-difference solvers for the four 1D evolution equations.
//!
//! | model        | equation                                      | boundary  |
//! |--------------|-----------------------------------------------|-----------|
//! | `ModifiedAC` | `v_t = (μ − f′(v) + v_xx)·|v_x|`              | Dirichlet |
//! | `ClassicAC`  | `v_t = v_xx + μ − f′(v)`                      | Dirichlet |
//! | `ModifiedCH` | `v_t = ((f′(v) − v_xx)_x·|v_x|)_x`            | no-flux   |
//! | `ClassicCH`  | `v_t = (f′(v) − v_xx)_xx`                     | no-flux   |
//!
//! The grid is `x_i = −L + i·dx`, `i = 0..=N`. Allen–Cahn models hold the
//! end nodes at `v₋`, `v₊` and evolve the interior. Cahn–Hilliard models
//! evolve every node in flux form
//!
//! ```text
//! ω_i v̇_i = J_{i+½} − J_{i−½},   J_{i+½} = M_{i+½} (φ_{i+1} − φ_i)/dx
//! ```
//!
//! with trapezoid weights `ω` (half cells at the ends), zero end fluxes,
//! `φ = f′(v) − v_xx` using a reflected Laplacian at the ends, and mobility
//! `M = |v_{i+1} − v_i|/dx` (modified) or `1` (classic). The total
//! `Σ ω_i v_i` then telescopes exactly, and the discrete energy
//! [`SimState::energy`] is a Lyapunov function of the semi-discrete
//! system for every model.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::potential::DoubleWell;
use crate::profile::{Conservation, WaveProfile};

/// `dt ≤ AC_STABILITY·dx²/max(1, max|v_x|)`
pub const AC_STABILITY: f64 = 0.2;
/// `dt ≤ CH_STABILITY·dx⁴/max(1, max|v_x|)`
pub const CH_STABILITY: f64 = 0.05;
const MIN_INTERIOR_NODES: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("non-finite value at node {node} (x = {x}) at t = {t}; last finite time {last_t}")]
    Blowup { node: usize, x: f64, t: f64, last_t: f64 },
    #[error("dt = {dt:e} exceeds the stability bound {bound:e} at t = {t}")]
    Unstable { dt: f64, bound: f64, t: f64 },
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("invalid time interval: {0}")]
    BadTime(String),
    #[error("profile has no samples")]
    EmptyProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "modified_ac")]
    ModifiedAC,
    #[serde(rename = "modified_ch")]
    ModifiedCH,
    #[serde(rename = "classic_ac")]
    ClassicAC,
    #[serde(rename = "classic_ch")]
    ClassicCH,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::ModifiedAC,
        ModelKind::ClassicAC,
        ModelKind::ModifiedCH,
        ModelKind::ClassicCH,
    ];

    pub fn is_conserved(self) -> bool {
        matches!(self, ModelKind::ModifiedCH | ModelKind::ClassicCH)
    }

    pub fn is_modified(self) -> bool {
        matches!(self, ModelKind::ModifiedAC | ModelKind::ModifiedCH)
    }

    pub fn conservation(self) -> Conservation {
        if self.is_conserved() {
            Conservation::Conserved
        } else {
            Conservation::Nonconserved
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::ModifiedAC => "modified_ac",
            ModelKind::ModifiedCH => "modified_ch",
            ModelKind::ClassicAC => "classic_ac",
            ModelKind::ClassicCH => "classic_ch",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                format!("unknown model `{s}` (expected modified_ac, modified_ch, classic_ac or classic_ch)")
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    Dirichlet { v_minus: f64, v_plus: f64 },
    NoFlux,
}

impl BoundaryCondition {
    pub fn tag(&self) -> &'static str {
        match self {
            BoundaryCondition::Dirichlet { .. } => "dirichlet",
            BoundaryCondition::NoFlux => "no_flux",
        }
    }
}

/// Things worth knowing about a run that are not errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SimWarning {
    /// The initial profile did not cover `[−L, L]`; its tails were padded
    /// with the well values.
    DomainTooWide { profile_half_width: f64, l: f64 },
}

/// Discretisation choices shared by all initialisers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub model: ModelKind,
    /// Forcing `α·T₁₁ + β`; ignored (stored as 0) for Cahn–Hilliard models.
    pub mu: f64,
    pub l: f64,
    pub dx: f64,
    /// Defaults to half the stability bound of the initial data.
    pub dt: Option<f64>,
    /// Optional smoothing `√(v_x² + δ²)` of the degenerate factor.
    pub delta: f64,
}

impl SimParams {
    pub fn new(model: ModelKind, mu: f64, l: f64, dx: f64) -> Self {
        Self {
            model,
            mu,
            l,
            dx,
            dt: None,
            delta: 0.0,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    fn node_count(&self) -> Result<usize, SimError> {
        let (l, dx) = (self.l, self.dx);
        if !(l > 0.0 && dx > 0.0 && l.is_finite() && dx.is_finite()) {
            return Err(SimError::BadGrid(format!("L = {l}, dx = {dx}")));
        }
        let cells = 2.0 * l / dx;
        let n = cells.round();
        if (cells - n).abs() > 1e-9 * cells.max(1.0) {
            return Err(SimError::BadGrid(format!("2L/dx = {cells} is not an integer")));
        }
        let n = n as usize;
        if n < MIN_INTERIOR_NODES + 1 {
            return Err(SimError::BadGrid(format!(
                "{} interior nodes, need at least {MIN_INTERIOR_NODES}",
                n.saturating_sub(1)
            )));
        }
        Ok(n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
    pub model: ModelKind,
    pub mu: f64,
    pub bc: BoundaryCondition,
    pub dt: f64,
    pub delta: f64,
    pub well: DoubleWell,
    pub warnings: Vec<SimWarning>,
    dx: f64,
    l: f64,
}

impl SimState {
    /// Builds a state from node values; Dirichlet end values are replaced
    /// by the wells.
    pub fn from_values(well: &DoubleWell, params: &SimParams, mut v: Vec<f64>) -> Result<Self, SimError> {
        let n = params.node_count()?;
        if v.len() != n + 1 {
            return Err(SimError::BadGrid(format!(
                "expected {} values, got {}",
                n + 1,
                v.len()
            )));
        }
        let x = (0..=n).map(|i| -params.l + i as f64 * params.dx).collect();
        let (bc, mu) = if params.model.is_conserved() {
            (BoundaryCondition::NoFlux, 0.0)
        } else {
            v[0] = well.v_minus;
            v[n] = well.v_plus;
            (
                BoundaryCondition::Dirichlet {
                    v_minus: well.v_minus,
                    v_plus: well.v_plus,
                },
                params.mu,
            )
        };
        if !(params.delta >= 0.0 && params.delta.is_finite()) {
            return Err(SimError::BadGrid(format!("delta = {}", params.delta)));
        }
        let mut state = Self {
            x,
            v,
            t: 0.0,
            model: params.model,
            mu,
            bc,
            dt: 0.0,
            delta: params.delta,
            well: well.clone(),
            warnings: Vec::new(),
            dx: params.dx,
            l: params.l,
        };
        state.dt = match params.dt {
            Some(dt) if dt > 0.0 && dt.is_finite() => dt,
            Some(dt) => return Err(SimError::BadTime(format!("dt = {dt}"))),
            None => 0.5 * state.stability_bound(),
        };
        Ok(state)
    }

    pub fn from_fn(well: &DoubleWell, params: &SimParams, init: impl Fn(f64) -> f64) -> Result<Self, SimError> {
        let n = params.node_count()?;
        let v = (0..=n).map(|i| init(-params.l + i as f64 * params.dx)).collect();
        Self::from_values(well, params, v)
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn cells(&self) -> usize {
        self.v.len() - 1
    }

    /// Trapezoid quadrature weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.cells() {
            0.5 * self.dx
        } else {
            self.dx
        }
    }

    /// Largest one-sided difference quotient, including the regulariser.
    pub fn max_gradient(&self) -> f64 {
        max_gradient(&self.v, self.dx, self.delta)
    }

    /// Largest stable `dt` for the current field.
    pub fn stability_bound(&self) -> f64 {
        let g = self.max_gradient().max(1.0);
        if self.model.is_conserved() {
            CH_STABILITY * self.dx.powi(4) / g
        } else {
            AC_STABILITY * self.dx * self.dx / g
        }
    }

    /// `Σ ω_i v_i`
    pub fn mass(&self) -> f64 {
        mass_of(&self.v, self.dx)
    }

    /// `Σ ω_i |v_i|`, the scale against which mass drift is judged.
    pub fn mass_scale(&self) -> f64 {
        let n = self.cells();
        self.v
            .iter()
            .enumerate()
            .map(|(i, v)| v.abs() * if i == 0 || i == n { 0.5 } else { 1.0 })
            .sum::<f64>()
            * self.dx
    }

    /// `Σ ½((v_{i+1} − v_i)/dx)² dx + Σ ω_i (f(v_i) − μ v_i)`
    pub fn energy(&self) -> f64 {
        self.energy_of(&self.v)
    }

    pub fn energy_of(&self, v: &[f64]) -> f64 {
        let dx = self.dx;
        let n = v.len() - 1;
        let grad: f64 = v
            .windows(2)
            .map(|w| {
                let g = (w[1] - w[0]) / dx;
                0.5 * g * g
            })
            .sum::<f64>()
            * dx;
        let pot: f64 = v
            .iter()
            .enumerate()
            .map(|(i, &vi)| {
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * (self.well.f(vi) - self.mu * vi)
            })
            .sum::<f64>()
            * dx;
        grad + pot
    }

    /// Copy carrying different values and time, for frames of a trajectory.
    pub fn with_values(&self, t: f64, v: Vec<f64>) -> SimState {
        let mut s = self.clone();
        s.t = t;
        s.v = v;
        s
    }

    /// Time derivative of every node under the semi-discrete scheme.
    pub fn rate(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.v.len()];
        let mut scratch = Scratch::new(self.v.len());
        rate_into(self, &self.v, &mut out, &mut scratch);
        out
    }

    /// One forward Euler step in place.
    fn advance(&mut self, dt: f64, scratch: &mut Scratch) -> Result<(), SimError> {
        let bound = self.stability_bound();
        if dt > bound {
            return Err(SimError::Unstable {
                dt,
                bound,
                t: self.t,
            });
        }
        let mut rate = std::mem::take(&mut scratch.rate);
        rate_into(self, &self.v, &mut rate, scratch);
        let t_new = self.t + dt;
        for (i, (vi, r)) in self.v.iter_mut().zip(&rate).enumerate() {
            let next = *vi + dt * r;
            if !next.is_finite() {
                return Err(SimError::Blowup {
                    node: i,
                    x: self.x[i],
                    t: t_new,
                    last_t: self.t,
                });
            }
            *vi = next;
        }
        scratch.rate = rate;
        Ok(())
    }

    pub fn write_csv_rows<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (x, v) in self.x.iter().zip(&self.v) {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", self.t, x, v)?;
        }
        Ok(())
    }
}

fn mass_of(v: &[f64], dx: f64) -> f64 {
    let n = v.len() - 1;
    let inner: f64 = v[1..n].iter().sum();
    (inner + 0.5 * (v[0] + v[n])) * dx
}

fn max_gradient(v: &[f64], dx: f64, delta: f64) -> f64 {
    let g = v
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max)
        / dx;
    if delta > 0.0 {
        g.hypot(delta)
    } else {
        g
    }
}

struct Scratch {
    rate: Vec<f64>,
    phi: Vec<f64>,
    flux: Vec<f64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self {
            rate: vec![0.0; n],
            phi: vec![0.0; n],
            flux: vec![0.0; n + 1],
        }
    }
}

#[inline]
fn regularised(g: f64, delta: f64) -> f64 {
    if delta > 0.0 {
        g.hypot(delta)
    } else {
        g.abs()
    }
}

fn rate_into(state: &SimState, v: &[f64], out: &mut [f64], scratch: &mut Scratch) {
    let n = v.len() - 1;
    let dx = state.dx;
    let inv_dx2 = 1.0 / (dx * dx);
    let well = &state.well;
    match state.model {
        ModelKind::ModifiedAC | ModelKind::ClassicAC => {
            let modified = state.model == ModelKind::ModifiedAC;
            out[0] = 0.0;
            out[n] = 0.0;
            for i in 1..n {
                let lap = (v[i + 1] - 2.0 * v[i] + v[i - 1]) * inv_dx2;
                let force = state.mu - well.f1(v[i]) + lap;
                out[i] = if modified {
                    force * regularised((v[i + 1] - v[i - 1]) / (2.0 * dx), state.delta)
                } else {
                    force
                };
            }
        }
        ModelKind::ModifiedCH | ModelKind::ClassicCH => {
            let modified = state.model == ModelKind::ModifiedCH;
            let phi = &mut scratch.phi;
            let flux = &mut scratch.flux;
            phi[0] = well.f1(v[0]) - 2.0 * (v[1] - v[0]) * inv_dx2;
            phi[n] = well.f1(v[n]) - 2.0 * (v[n - 1] - v[n]) * inv_dx2;
            for i in 1..n {
                phi[i] = well.f1(v[i]) - (v[i + 1] - 2.0 * v[i] + v[i - 1]) * inv_dx2;
            }
            // flux[i] is J_{i−½}; the two end fluxes vanish.
            flux[0] = 0.0;
            flux[n + 1] = 0.0;
            for i in 0..n {
                let m = if modified {
                    regularised((v[i + 1] - v[i]) / dx, state.delta)
                } else {
                    1.0
                };
                flux[i + 1] = m * (phi[i + 1] - phi[i]) / dx;
            }
            for i in 0..=n {
                let w = if i == 0 || i == n { 0.5 * dx } else { dx };
                out[i] = (flux[i + 1] - flux[i]) / w;
            }
        }
    }
}

/// Fresh state one forward Euler step later.
pub fn step(state: &SimState) -> Result<SimState, SimError> {
    let mut next = state.clone();
    let mut scratch = Scratch::new(state.v.len());
    let dt = next.dt;
    next.advance(dt, &mut scratch)?;
    next.t = state.t + dt;
    Ok(next)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub t: f64,
    pub v: Vec<f64>,
}

/// Snapshots of a run. `last` is the final state; frames share its grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub frames: Vec<Frame>,
    pub last: SimState,
    pub steps: usize,
}

impl Trajectory {
    pub fn state(&self, k: usize) -> SimState {
        let f = &self.frames[k];
        self.last.with_values(f.t, f.v.clone())
    }

    pub fn initial(&self) -> SimState {
        self.state(0)
    }

    /// Long-format CSV `t,x,v`.
    pub fn write_snapshots_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,x,v")?;
        for f in &self.frames {
            for (x, v) in self.last.x.iter().zip(&f.v) {
                writeln!(out, "{:.16e},{:.16e},{:.16e}", f.t, x, v)?;
            }
        }
        Ok(())
    }
}

/// Steps from `state.t` to exactly `t_end`, keeping the initial state, a
/// frame every `snapshot_every` (rounded to whole steps), and the final
/// state. The last step is shortened to land on `t_end`.
pub fn run(state: &SimState, t_end: f64, snapshot_every: f64) -> Result<Trajectory, SimError> {
    let t0 = state.t;
    if !(t_end > t0) || !t_end.is_finite() {
        return Err(SimError::BadTime(format!("t_end = {t_end} must exceed t = {t0}")));
    }
    if !(snapshot_every > 0.0) {
        return Err(SimError::BadTime(format!("snapshot_every = {snapshot_every}")));
    }
    let dt = state.dt;
    let span = t_end - t0;
    let mut steps = (span / dt).ceil() as usize;
    // Guard against a final sliver step caused by rounding.
    if steps > 1 && t0 + (steps - 1) as f64 * dt >= t_end - 1e-12 * span {
        steps -= 1;
    }
    let every = ((snapshot_every / dt).round() as usize).max(1);

    let mut cur = state.clone();
    let mut scratch = Scratch::new(cur.v.len());
    let mut frames = vec![Frame {
        t: cur.t,
        v: cur.v.clone(),
    }];
    for k in 1..=steps {
        let t_next = if k == steps { t_end } else { t0 + k as f64 * dt };
        let h = t_next - cur.t;
        cur.advance(h, &mut scratch)?;
        cur.t = t_next;
        if k % every == 0 || k == steps {
            frames.push(Frame {
                t: cur.t,
                v: cur.v.clone(),
            });
        }
    }
    Ok(Trajectory {
        frames,
        last: cur,
        steps,
    })
}

/// Samples `profile` on the simulation grid. Where the grid extends past
/// the profile the well values are used and a warning is recorded.
pub fn init_from_profile(
    profile: &WaveProfile,
    well: &DoubleWell,
    params: &SimParams,
) -> Result<SimState, SimError> {
    if profile.is_empty() {
        return Err(SimError::EmptyProfile);
    }
    let mut state = SimState::from_fn(well, params, |x| profile.eval(x))?;
    let hw = profile.half_width();
    if hw < params.l {
        state.warnings.push(SimWarning::DomainTooWide {
            profile_half_width: hw,
            l: params.l,
        });
    }
    Ok(state)
}

const RANDOM_MODES: usize = 6;

fn random_modes(rng: &mut ChaCha8Rng, amplitude: f64) -> Vec<f64> {
    (1..=RANDOM_MODES)
        .map(|k| rng.gen_range(-amplitude..=amplitude) / k as f64)
        .collect()
}

/// Sine modes vanish at both ends (Dirichlet); cosine modes have zero
/// slope there (no-flux).
fn mode_sum(coeffs: &[f64], x: f64, l: f64, conserved: bool) -> f64 {
    let theta = std::f64::consts::PI * (x + l) / (2.0 * l);
    coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let arg = (k + 1) as f64 * theta;
            c * if conserved { arg.cos() } else { arg.sin() }
        })
        .sum()
}

/// Smooth random data. Allen–Cahn: a linear ramp between the wells plus
/// sine modes. Cahn–Hilliard: a random constant plus cosine modes.
pub fn init_random(
    well: &DoubleWell,
    params: &SimParams,
    seed: u64,
    amplitude: f64,
) -> Result<SimState, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = random_modes(&mut rng, amplitude);
    let (vm, vp) = (well.v_minus, well.v_plus);
    let base = 0.5 * (vm + vp) + rng.gen_range(0.1..0.4) * (vp - vm);
    let l = params.l;
    let conserved = params.model.is_conserved();
    SimState::from_fn(well, params, |x| {
        let modes = mode_sum(&coeffs, x, l, conserved);
        if conserved {
            base + modes
        } else {
            vm + (vp - vm) * (x + l) / (2.0 * l) + modes
        }
    })
}

impl SimState {
    /// Adds a smooth random perturbation compatible with the boundary
    /// condition. The dt is kept.
    pub fn perturbed(&self, seed: u64, amplitude: f64) -> SimState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = random_modes(&mut rng, amplitude);
        let conserved = self.model.is_conserved();
        let mut out = self.clone();
        for (v, &x) in out.v.iter_mut().zip(&self.x) {
            *v += mode_sum(&coeffs, x, self.l, conserved);
        }
        if let BoundaryCondition::Dirichlet { v_minus, v_plus } = self.bc {
            let n = out.cells();
            out.v[0] = v_minus;
            out.v[n] = v_plus;
        }
        out
    }
}

/// Maximum over interior nodes of `|rate_i + s·v′(x_i)|` when the
/// modified Allen–Cahn scheme is applied to the sampled profile. Tends to
/// zero like `dx²`.
pub fn traveling_frame_residual(
    profile: &WaveProfile,
    well: &DoubleWell,
    mu: f64,
    l: f64,
    dx: f64,
) -> Result<f64, SimError> {
    let params = SimParams::new(ModelKind::ModifiedAC, mu, l, dx);
    let state = init_from_profile(profile, well, &params)?;
    let rate = state.rate();
    let n = state.cells();
    Ok((1..n)
        .map(|i| (rate[i] + profile.s * profile.eval_slope(state.x[i])).abs())
        .fold(0.0, f64::max))
}
