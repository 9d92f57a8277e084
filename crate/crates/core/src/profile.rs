//! Traveling and standing wave profiles connecting the two wells.
//!
//! A monotone profile `v(ξ)` with `v(−∞) = v₋`, `v(+∞) = v₊` satisfies
//! `½ v′² = f(v) − f(v₊)`, which for equal wells is integrated in the
//! factorised form
//!
//! ```text
//! v′ = √a(v) · (v₊ − v)^{m₁} · (v − v₋)^{m₂}
//! ```
//!
//! The right-hand side is smooth, so classical RK4 applies without any
//! endpoint singularity. Both the conserved and nonconserved models lead to
//! the same profile; they differ only in the speed.
//!
//! Integration runs in offset variables (`v₊ − v` on the right branch,
//! `v − v₋` on the left) so the tails keep full relative precision long
//! after `v` itself has rounded to a well value. The derivative column is
//! recovered independently by integrating `v″ = f′(v)` inward from the far
//! tail, which makes [`residual_3_15`] an honest measure of integration
//! error.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fit::line_fit;
use crate::pde_sim::ModelKind;
use crate::potential::{DoubleWell, PotentialError, EQUAL_WELLS_TOL};
use crate::tensor_reduction::ReducedCoefficients;

/// Smallest number of tail nodes a decay fit accepts.
pub const MIN_TAIL_NODES: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("wells have unequal heights (gap {gap:e}); no connecting wave exists")]
    UnequalWells { gap: f64 },
    #[error("monotonicity lost at xi = {xi} with dx = {dx}; refine the step")]
    StepTooLarge { xi: f64, dx: f64 },
    #[error("tail offset underflowed at xi = {xi}; reduce the half width")]
    TailUnderflow { xi: f64 },
    #[error("{side} tail has {nodes} nodes in the fit window, need {MIN_TAIL_NODES}")]
    InsufficientTail { side: Side, nodes: usize },
    #[error("anchor {anchor} is not strictly between the wells")]
    AnchorOutOfRange { anchor: f64 },
    #[error("invalid grid: {0}")]
    BadGrid(String),
}

impl From<PotentialError> for ProfileError {
    fn from(e: PotentialError) -> Self {
        match e {
            PotentialError::UnequalWells { gap } => Self::UnequalWells { gap },
            other => Self::BadGrid(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Conservation {
    Conserved,
    Nonconserved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Plus => "plus",
            Side::Minus => "minus",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayKind {
    Exponential,
    Algebraic,
}

/// Tail decay fit. `value` is the exponential rate or the algebraic
/// exponent, reported as a positive magnitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub side: Side,
    pub kind: DecayKind,
    pub value: f64,
    pub expected: f64,
    pub r_squared: f64,
}

impl DecayFit {
    pub fn relative_error(&self) -> f64 {
        ((self.value - self.expected) / self.expected).abs()
    }
}

/// Range of `|v − v±|` used by the tail fits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayWindow {
    pub lo: f64,
    pub hi: f64,
}

impl Default for DecayWindow {
    fn default() -> Self {
        Self { lo: 1e-8, hi: 1e-2 }
    }
}

/// Sampled monotone profile on the uniform grid `ξᵢ = i·dx`, `|i| ≤ n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveProfile {
    pub xi: Vec<f64>,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
    pub s: f64,
    pub model: Conservation,
    /// The value pinned at `ξ = 0`.
    pub anchor: f64,
    dx: f64,
    v_minus: f64,
    v_plus: f64,
    /// Distance to the nearer well (`v₊ − v` for `ξ ≥ 0`, `v − v₋` otherwise),
    /// carried at full relative precision.
    offset: Vec<f64>,
}

impl WaveProfile {
    /// Wraps externally produced samples on a uniform grid. Offsets are
    /// recomputed from `v`, so they only carry the precision of `v`.
    pub fn from_samples(
        xi: Vec<f64>,
        v: Vec<f64>,
        dv: Vec<f64>,
        well: &DoubleWell,
        model: Conservation,
    ) -> Result<Self, ProfileError> {
        if xi.len() < 2 || v.len() != xi.len() || dv.len() != xi.len() {
            return Err(ProfileError::BadGrid(
                "need at least two nodes and matching column lengths".into(),
            ));
        }
        let dx = xi[1] - xi[0];
        if !(dx > 0.0) {
            return Err(ProfileError::BadGrid("xi must increase".into()));
        }
        let offset = xi
            .iter()
            .zip(&v)
            .map(|(&x, &vv)| {
                if x >= 0.0 {
                    well.v_plus - vv
                } else {
                    vv - well.v_minus
                }
            })
            .collect();
        let anchor = v[xi.iter().position(|&x| x >= 0.0).unwrap_or(0)];
        Ok(Self {
            xi,
            v,
            dv,
            s: 0.0,
            model,
            anchor,
            dx,
            v_minus: well.v_minus,
            v_plus: well.v_plus,
            offset,
        })
    }

    pub fn with_speed(mut self, s: f64) -> Self {
        self.s = s;
        self
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn half_width(&self) -> f64 {
        self.xi.last().copied().unwrap_or(0.0)
    }

    pub fn wells(&self) -> (f64, f64) {
        (self.v_minus, self.v_plus)
    }

    /// Distance of each node to the nearer well at full precision.
    pub fn offsets(&self) -> &[f64] {
        &self.offset
    }

    /// Strictly positive derivative and strictly shrinking offsets towards
    /// both ends. The `v` column itself may round onto `v±` in deep tails.
    pub fn is_strictly_monotone(&self) -> bool {
        let mid = self.len() / 2;
        self.dv.iter().all(|&d| d > 0.0)
            && self.offset.iter().all(|&o| o > 0.0)
            && self.offset[mid..].windows(2).all(|w| w[1] < w[0])
            && self.offset[..=mid].windows(2).all(|w| w[0] < w[1])
    }

    /// Monotone cubic Hermite interpolation using the stored derivative,
    /// with a Fritsch–Carlson limiter. Outside the grid the wells are
    /// returned.
    pub fn eval(&self, xi: f64) -> f64 {
        let n = self.len();
        if xi < self.xi[0] {
            return self.v_minus;
        }
        if xi > self.xi[n - 1] {
            return self.v_plus;
        }
        let (k, t, m0, m1) = self.hermite_segment(xi);
        let h = self.dx;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.v[k] + h10 * h * m0 + h01 * self.v[k + 1] + h11 * h * m1
    }

    /// Derivative of the interpolant behind [`WaveProfile::eval`].
    pub fn eval_slope(&self, xi: f64) -> f64 {
        let n = self.len();
        if xi < self.xi[0] || xi > self.xi[n - 1] {
            return 0.0;
        }
        let (k, t, m0, m1) = self.hermite_segment(xi);
        let h = self.dx;
        let t2 = t * t;
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        d00 * self.v[k] + d10 * m0 + d01 * self.v[k + 1] + d11 * m1
    }

    /// Segment index, local coordinate in `[0, 1]` and limited end slopes.
    fn hermite_segment(&self, xi: f64) -> (usize, f64, f64, f64) {
        let n = self.len();
        let k = (((xi - self.xi[0]) / self.dx).floor().max(0.0) as usize).min(n - 2);
        let t = ((xi - self.xi[k]) / self.dx).clamp(0.0, 1.0);
        let secant = (self.v[k + 1] - self.v[k]) / self.dx;
        let (m0, m1) = (self.dv[k], self.dv[k + 1]);
        if secant == 0.0 {
            return (k, t, 0.0, 0.0);
        }
        let (a, b) = (m0 / secant, m1 / secant);
        let r2 = a * a + b * b;
        if r2 > 9.0 {
            let tau = 3.0 / r2.sqrt();
            (k, t, tau * m0, tau * m1)
        } else {
            (k, t, m0, m1)
        }
    }

    /// CSV with header `xi,v,dv`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "xi,v,dv")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e}",
                self.xi[i], self.v[i], self.dv[i]
            )?;
        }
        Ok(())
    }
}

/// Which clause of the existence conditions failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "clause")]
pub enum GateClause {
    /// `f(v₊) ≠ f(v₋)`.
    UnequalWells { gap: f64 },
    /// Classic Allen–Cahn with nonzero forcing: constant tails are not
    /// equilibria.
    NonzeroForcing { mu: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub model: ModelKind,
    pub mu: f64,
    pub passed: bool,
    pub failures: Vec<GateClause>,
}

/// Whether a front connecting the wells can exist for `model` at forcing
/// `mu`. Cahn–Hilliard models ignore `mu`.
pub fn existence_gate(well: &DoubleWell, mu: f64, model: ModelKind) -> GateReport {
    let mut failures = Vec::new();
    let gap = well.gap();
    if gap.abs() > EQUAL_WELLS_TOL {
        failures.push(GateClause::UnequalWells { gap });
    }
    if model == ModelKind::ClassicAC && mu != 0.0 {
        failures.push(GateClause::NonzeroForcing { mu });
    }
    GateReport {
        model,
        mu,
        passed: failures.is_empty(),
        failures,
    }
}

/// Speed of the connecting wave for the reduced coefficients at the given
/// constant axial stress `t11`.
pub fn wave_speed(
    coeffs: &ReducedCoefficients,
    t11: f64,
    well: &DoubleWell,
    model: Conservation,
) -> Result<f64, ProfileError> {
    speed_for_forcing(coeffs.mu(t11), well, model)
}

/// Same as [`wave_speed`] with the forcing `μ = α·t11 + β` given directly:
/// `s = −μ` for the nonconserved model and `s = 0` for the conserved one.
pub fn speed_for_forcing(mu: f64, well: &DoubleWell, model: Conservation) -> Result<f64, ProfileError> {
    if !well.equal_wells() {
        return Err(ProfileError::UnequalWells { gap: well.gap() });
    }
    Ok(match model {
        Conservation::Nonconserved => -mu,
        Conservation::Conserved => 0.0,
    })
}

/// Profile anchored at `v(0) = v*`, with `s = 0`; attach a speed with
/// [`WaveProfile::with_speed`].
pub fn solve_profile(
    well: &DoubleWell,
    half_width: f64,
    dx: f64,
    model: Conservation,
) -> Result<WaveProfile, ProfileError> {
    solve_profile_anchored(well, half_width, dx, model, well.v_star)
}

/// Gate, speed and profile in one call.
pub fn traveling_wave(
    well: &DoubleWell,
    mu: f64,
    half_width: f64,
    dx: f64,
    model: Conservation,
) -> Result<WaveProfile, ProfileError> {
    let s = speed_for_forcing(mu, well, model)?;
    Ok(solve_profile(well, half_width, dx, model)?.with_speed(s))
}

/// One half of the profile, written in the outward coordinate `ζ = |ξ|`.
struct Branch<'a> {
    well: &'a DoubleWell,
    side: Side,
}

impl Branch<'_> {
    fn v(&self, offset: f64) -> f64 {
        match self.side {
            Side::Plus => self.well.v_plus - offset,
            Side::Minus => self.well.v_minus + offset,
        }
    }

    /// `|v′|` as a function of the offset.
    fn slope(&self, offset: f64) -> f64 {
        let w = self.well.width();
        let cof = self.well.cofactor().expect("equal wells checked");
        let (dp, dm) = match self.side {
            Side::Plus => (offset, w - offset),
            Side::Minus => (w - offset, offset),
        };
        let a = (2.0 * cof.eval(self.v(offset))).max(0.0);
        a.sqrt() * dp.powi(self.well.m1 as i32) * dm.powi(self.well.m2 as i32)
    }

    /// Outward rate of change of `v′`, `|f′(v)|` with the sign fixed by the
    /// branch; positive inside `(v₋, v₊)`.
    fn curvature(&self, offset: f64) -> f64 {
        let w = self.well.width();
        let f1 = match self.side {
            Side::Plus => self.well.f1_factored(offset, w - offset).map(|d| -d),
            Side::Minus => self.well.f1_factored(w - offset, offset),
        };
        f1.expect("equal wells checked")
    }

    fn rk4_step(&self, d: f64, h: f64) -> f64 {
        let k1 = -self.slope(d);
        let k2 = -self.slope(d + 0.5 * h * k1);
        let k3 = -self.slope(d + 0.5 * h * k2);
        let k4 = -self.slope(d + h * k3);
        d + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    }

    /// Offsets at `ζ = 0, dx, …, n·dx`.
    fn offsets(&self, start: f64, n: usize, dx: f64) -> Result<Vec<f64>, ProfileError> {
        let sign = match self.side {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        };
        let mut out = Vec::with_capacity(n + 1);
        out.push(start);
        let mut d = start;
        for j in 1..=n {
            let next = self.rk4_step(d, dx);
            let xi = sign * j as f64 * dx;
            if !next.is_finite() || next <= 0.0 || next >= d {
                return Err(ProfileError::StepTooLarge { xi, dx });
            }
            if next < f64::MIN_POSITIVE {
                return Err(ProfileError::TailUnderflow { xi });
            }
            out.push(next);
            d = next;
        }
        Ok(out)
    }

    /// `v′` at every node from inward Simpson quadrature of `v″ = f′(v)`,
    /// seeded with the first-order relation at the far end.
    fn derivative(&self, offsets: &[f64], dx: f64) -> Vec<f64> {
        let n = offsets.len() - 1;
        let mut p = vec![0.0; n + 1];
        let slopes: Vec<f64> = offsets.iter().map(|&d| self.slope(d)).collect();
        let curv: Vec<f64> = offsets.iter().map(|&d| self.curvature(d)).collect();
        p[n] = slopes[n];
        let (mut sum, mut comp) = (p[n], 0.0);
        for j in (0..n).rev() {
            let (d0, d1) = (offsets[j], offsets[j + 1]);
            // Hermite midpoint; offset derivative is -slope.
            let mid = (0.5 * (d0 + d1) + dx / 8.0 * (slopes[j + 1] - slopes[j])).clamp(d1, d0);
            let inc = dx / 6.0 * (curv[j] + 4.0 * self.curvature(mid) + curv[j + 1]);
            // Kahan summation
            let y = inc - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            p[j] = sum;
        }
        p
    }
}

/// Profile with `v(0) = anchor` for any anchor strictly between the wells.
pub fn solve_profile_anchored(
    well: &DoubleWell,
    half_width: f64,
    dx: f64,
    model: Conservation,
    anchor: f64,
) -> Result<WaveProfile, ProfileError> {
    if !well.equal_wells() {
        return Err(ProfileError::UnequalWells { gap: well.gap() });
    }
    if !(half_width > 0.0 && dx > 0.0 && half_width.is_finite() && dx.is_finite()) {
        return Err(ProfileError::BadGrid(format!(
            "half_width = {half_width}, dx = {dx}"
        )));
    }
    if !(anchor > well.v_minus && anchor < well.v_plus) {
        return Err(ProfileError::AnchorOutOfRange { anchor });
    }
    let n = (half_width / dx).round() as usize;
    if n == 0 {
        return Err(ProfileError::BadGrid("dx exceeds half_width".into()));
    }

    let plus = Branch { well, side: Side::Plus };
    let minus = Branch { well, side: Side::Minus };
    let op = plus.offsets(well.v_plus - anchor, n, dx)?;
    let om = minus.offsets(anchor - well.v_minus, n, dx)?;
    let pp = plus.derivative(&op, dx);
    let pm = minus.derivative(&om, dx);

    let len = 2 * n + 1;
    let mut xi = Vec::with_capacity(len);
    let mut v = Vec::with_capacity(len);
    let mut dv = Vec::with_capacity(len);
    let mut offset = Vec::with_capacity(len);
    for j in (1..=n).rev() {
        xi.push(-(j as f64) * dx);
        v.push(minus.v(om[j]));
        dv.push(pm[j]);
        offset.push(om[j]);
    }
    xi.push(0.0);
    v.push(anchor);
    dv.push(0.5 * (pp[0] + pm[0]));
    offset.push(op[0]);
    for j in 1..=n {
        xi.push(j as f64 * dx);
        v.push(plus.v(op[j]));
        dv.push(pp[j]);
        offset.push(op[j]);
    }

    Ok(WaveProfile {
        xi,
        v,
        dv,
        s: 0.0,
        model,
        anchor,
        dx,
        v_minus: well.v_minus,
        v_plus: well.v_plus,
        offset,
    })
}

/// `max |½ v′² − (f(v) − f(v₊))|` over the nodes.
pub fn residual_3_15(profile: &WaveProfile, well: &DoubleWell) -> f64 {
    let fp = well.f(well.v_plus);
    profile
        .v
        .iter()
        .zip(&profile.dv)
        .map(|(&v, &d)| (0.5 * d * d - (well.f(v) - fp)).abs())
        .fold(0.0, f64::max)
}

pub fn decay_rates(profile: &WaveProfile, well: &DoubleWell) -> Result<(DecayFit, DecayFit), ProfileError> {
    decay_rates_in(profile, well, DecayWindow::default())
}

/// Fits the plus and minus tails. An `m = 1` side is fitted as
/// `log|v − v±|` against `|ξ|` (exponential, expected rate `√f″(v±)`);
/// otherwise against `log(1 + |ξ|)` (algebraic, expected exponent
/// `1/(m − 1)`).
pub fn decay_rates_in(
    profile: &WaveProfile,
    well: &DoubleWell,
    window: DecayWindow,
) -> Result<(DecayFit, DecayFit), ProfileError> {
    Ok((
        fit_side(profile, well, window, Side::Plus)?,
        fit_side(profile, well, window, Side::Minus)?,
    ))
}

fn fit_side(
    profile: &WaveProfile,
    well: &DoubleWell,
    window: DecayWindow,
    side: Side,
) -> Result<DecayFit, ProfileError> {
    let (m, v_end) = match side {
        Side::Plus => (well.m1, well.v_plus),
        Side::Minus => (well.m2, well.v_minus),
    };
    let kind = if m == 1 {
        DecayKind::Exponential
    } else {
        DecayKind::Algebraic
    };
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (&xi, &o) in profile.xi.iter().zip(&profile.offset) {
        let on_side = match side {
            Side::Plus => xi > 0.0,
            Side::Minus => xi < 0.0,
        };
        if on_side && o >= window.lo && o <= window.hi {
            let z = xi.abs();
            x.push(match kind {
                DecayKind::Exponential => z,
                DecayKind::Algebraic => z.ln_1p(),
            });
            y.push(o.ln());
        }
    }
    if x.len() < MIN_TAIL_NODES {
        return Err(ProfileError::InsufficientTail {
            side,
            nodes: x.len(),
        });
    }
    let fit = line_fit(&x, &y).ok_or(ProfileError::InsufficientTail {
        side,
        nodes: x.len(),
    })?;
    let expected = match kind {
        DecayKind::Exponential => well.fk(v_end, 2).sqrt(),
        DecayKind::Algebraic => 1.0 / (m as f64 - 1.0),
    };
    Ok(DecayFit {
        side,
        kind,
        value: -fit.slope,
        expected,
        r_squared: fit.r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_reduction::{reduce, ElasticSystem, ElasticityTensor, SymMatrix};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn quartic_profile(dx: f64) -> WaveProfile {
        solve_profile(&DoubleWell::quartic(), 10.0, dx, Conservation::Nonconserved).unwrap()
    }

    #[test]
    fn quartic_matches_tanh() {
        let p = quartic_profile(1e-3);
        let err = p
            .xi
            .iter()
            .zip(&p.v)
            .map(|(&x, &v)| (v - (x / 2f64.sqrt()).tanh()).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-6, "max error {err:e}");
        assert_abs_diff_eq!(p.v[p.len() / 2], 0.0, epsilon = 1e-15);
        let x_half = 2f64.sqrt() * 0.5f64.atanh();
        assert_abs_diff_eq!(p.eval(x_half), 0.5, epsilon = 1e-6);
        assert!(p.is_strictly_monotone());
    }

    #[test]
    fn residual_converges_at_fourth_order() {
        let w = DoubleWell::quartic();
        let r1 = residual_3_15(&quartic_profile(1e-2), &w);
        let r2 = residual_3_15(&quartic_profile(5e-3), &w);
        assert!(r1 <= 1e-8);
        assert!(r1 / r2 >= 12.0, "ratio {}", r1 / r2);
    }

    #[test]
    fn constant_fake_profile_residual() {
        let w = DoubleWell::quartic();
        let xi: Vec<f64> = (-5..=5).map(|i| i as f64 * 0.1).collect();
        let p = WaveProfile::from_samples(
            xi.clone(),
            vec![w.v_star; xi.len()],
            vec![0.0; xi.len()],
            &w,
            Conservation::Nonconserved,
        )
        .unwrap();
        assert_relative_eq!(residual_3_15(&p, &w), 0.25, max_relative = 1e-14);
    }

    #[test]
    fn conserved_and_nonconserved_profiles_coincide() {
        let w = DoubleWell::sextic_m1_2();
        let a = solve_profile(&w, 5.0, 1e-2, Conservation::Conserved).unwrap();
        let b = solve_profile(&w, 5.0, 1e-2, Conservation::Nonconserved).unwrap();
        assert_eq!(a.v, b.v);
        assert_eq!(a.dv, b.dv);
    }

    #[test]
    fn translation_quotient() {
        let w = DoubleWell::sextic_m1_2();
        let a = solve_profile(&w, 8.0, 1e-3, Conservation::Nonconserved).unwrap();
        let mid = 0.5 * (w.v_minus + w.v_plus);
        let b = solve_profile_anchored(&w, 8.0, 1e-3, Conservation::Nonconserved, mid).unwrap();
        // position of v* on b by bisection on the interpolant
        let (mut lo, mut hi) = (-8.0, 8.0);
        for _ in 0..100 {
            let m = 0.5 * (lo + hi);
            if b.eval(m) < w.v_star {
                lo = m;
            } else {
                hi = m;
            }
        }
        let shift = 0.5 * (lo + hi);
        for i in (0..a.len()).step_by(97) {
            let x = a.xi[i];
            if (x + shift).abs() < 4.0 {
                assert_abs_diff_eq!(a.v[i], b.eval(x + shift), epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn quartic_decay_rates() {
        let w = DoubleWell::quartic();
        let p = solve_profile(&w, 20.0, 1e-3, Conservation::Nonconserved).unwrap();
        let (plus, minus) = decay_rates(&p, &w).unwrap();
        for fit in [&plus, &minus] {
            assert_eq!(fit.kind, DecayKind::Exponential);
            assert_relative_eq!(fit.expected, 2f64.sqrt(), max_relative = 1e-12);
            assert!(fit.relative_error() <= 0.05, "{fit:?}");
        }
    }

    #[test]
    fn sextic_decay_dichotomy() {
        let w = DoubleWell::sextic_m1_2();
        let p = solve_profile(&w, 100.0, 1e-3, Conservation::Nonconserved).unwrap();
        let (plus, minus) = decay_rates(&p, &w).unwrap();
        assert_eq!(plus.kind, DecayKind::Algebraic);
        assert_eq!(plus.expected, 1.0);
        assert!(plus.relative_error() <= 0.10, "{plus:?}");
        assert_eq!(minus.kind, DecayKind::Exponential);
        assert_relative_eq!(minus.expected, 32f64.sqrt(), max_relative = 1e-12);
        assert!(minus.relative_error() <= 0.05, "{minus:?}");
    }

    #[test]
    fn short_profile_has_insufficient_tail() {
        let w = DoubleWell::quartic();
        let p = solve_profile(&w, 1.0, 1e-2, Conservation::Nonconserved).unwrap();
        assert!(matches!(
            decay_rates(&p, &w),
            Err(ProfileError::InsufficientTail { .. })
        ));
    }

    #[test]
    fn coarse_step_is_rejected() {
        let w = DoubleWell::quartic();
        assert!(matches!(
            solve_profile(&w, 10.0, 3.0, Conservation::Nonconserved),
            Err(ProfileError::StepTooLarge { .. })
        ));
    }

    #[test]
    fn unequal_wells_rejected() {
        let w = DoubleWell::tilted_quartic(0.1).unwrap();
        for model in [Conservation::Conserved, Conservation::Nonconserved] {
            assert!(matches!(
                solve_profile(&w, 5.0, 1e-2, model),
                Err(ProfileError::UnequalWells { .. })
            ));
            assert!(matches!(
                speed_for_forcing(0.0, &w, model),
                Err(ProfileError::UnequalWells { .. })
            ));
        }
    }

    #[test]
    fn speed_formula() {
        let w = DoubleWell::quartic();
        let system = ElasticSystem::new(
            ElasticityTensor::isotropic(2, 1.0, 1.0),
            SymMatrix::zeros(2),
            SymMatrix::diag(&[1.0, 0.0]),
        )
        .unwrap();
        let mut c = reduce(&system).unwrap();
        assert_relative_eq!(c.alpha, 1.0, max_relative = 1e-14);
        c.beta = -0.1;
        let s = wave_speed(&c, 0.3, &w, Conservation::Nonconserved).unwrap();
        assert_relative_eq!(s, -0.2, max_relative = 1e-12);
        assert_eq!(wave_speed(&c, 0.3, &w, Conservation::Conserved).unwrap(), 0.0);
    }

    #[test]
    fn gate_clauses() {
        let q = DoubleWell::quartic();
        assert!(existence_gate(&q, 0.2, ModelKind::ModifiedAC).passed);
        let r = existence_gate(&q, 0.2, ModelKind::ClassicAC);
        assert_eq!(r.failures, vec![GateClause::NonzeroForcing { mu: 0.2 }]);
        assert!(existence_gate(&q, 0.0, ModelKind::ClassicAC).passed);
        let t = DoubleWell::tilted_quartic(0.1).unwrap();
        for m in [ModelKind::ModifiedAC, ModelKind::ClassicAC] {
            let r = existence_gate(&t, 0.0, m);
            assert!(!r.passed);
            assert!(matches!(r.failures[0], GateClause::UnequalWells { .. }));
        }
    }

    #[test]
    fn eval_interpolates_and_pads() {
        let p = quartic_profile(1e-2);
        assert_eq!(p.eval(-50.0), -1.0);
        assert_eq!(p.eval(50.0), 1.0);
        for i in 0..200 {
            let x = -9.9 + i as f64 * 0.099;
            assert_abs_diff_eq!(p.eval(x), (x / 2f64.sqrt()).tanh(), epsilon = 1e-8);
        }
    }

    #[test]
    fn csv_layout() {
        let p = quartic_profile(0.5);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("xi,v,dv"));
        let row: Vec<f64> = lines
            .nth(20)
            .unwrap()
            .split(',')
            .map(|t| t.parse().unwrap())
            .collect();
        assert_eq!(row, vec![p.xi[20], p.v[20], p.dv[20]]);
    }
}
