//! Polynomial double-well potentials.
//!
//! A [`DoubleWell`] certifies the structure the wave analysis relies on:
//! exactly three real critical points `v₋ < v* < v₊` forming a
//! min/max/min pattern, and flatness orders `m₁`, `m₂` such that the first
//! non-vanishing derivative of `f` at `v₊` (resp. `v₋`) has order `2m₁`
//! (resp. `2m₂`) and is positive.
//!
//! When the two wells have equal height the polynomial factors as
//!
//! ```text
//! f(v) − f(v₊) = ½ a(v) (v₊ − v)^{2m₁} (v − v₋)^{2m₂}
//! ```
//!
//! and the smooth cofactor `a` is stored as an exact quotient polynomial.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::Polynomial;

/// Wells whose heights differ by at most this much are treated as equal.
pub const EQUAL_WELLS_TOL: f64 = 1e-10;

/// Points per side of `[v₋, v₊]` used for sign sampling and the `g` scan.
const SAMPLE_POINTS: usize = 10_000;

/// Relative window around `v±` in which [`DoubleWell::a_factor`] switches
/// from the direct ratio to the cofactor polynomial.
const ENDPOINT_WINDOW: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("not a double well: {0}")]
    NotDoubleWell(String),
    #[error("flatness order detection failed: every derivative vanishes at v = {at}")]
    OrderDetectionFailure { at: f64 },
    #[error("wells have unequal heights: f(v+) - f(v-) = {gap:e}")]
    UnequalWells { gap: f64 },
    #[error("bad potential spec `{0}`")]
    BadSpec(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleWell {
    f: Polynomial,
    df: Polynomial,
    pub v_minus: f64,
    pub v_star: f64,
    pub v_plus: f64,
    pub m1: usize,
    pub m2: usize,
    /// `a(v)/2` as a polynomial, present only for equal wells.
    cofactor: Option<Polynomial>,
}

impl DoubleWell {
    /// Detects the well structure of `f` given by ascending coefficients.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<Self, PotentialError> {
        let f = Polynomial::new(coeffs);
        if f.is_zero() {
            return Err(PotentialError::OrderDetectionFailure { at: 0.0 });
        }
        let df = f.derivative();
        let crit = df.real_roots();
        if crit.len() != 3 {
            return Err(PotentialError::NotDoubleWell(format!(
                "expected 3 distinct real critical points, found {}",
                crit.len()
            )));
        }
        let (v_minus, v_star, v_plus) = (crit[0], crit[1], crit[2]);

        // Sign of f' on each gap between critical points: -, +, -, +.
        let probes = [
            v_minus - 1.0,
            0.5 * (v_minus + v_star),
            0.5 * (v_star + v_plus),
            v_plus + 1.0,
        ];
        let expected = [-1.0, 1.0, -1.0, 1.0];
        for (x, s) in probes.iter().zip(expected) {
            let d = df.eval(*x);
            if d * s <= 0.0 {
                return Err(PotentialError::NotDoubleWell(format!(
                    "critical points {crit:?} do not form a min/max/min pattern"
                )));
            }
        }
        check_sign_pattern(&df, v_minus, v_star, v_plus)?;

        let tol = 1e-9 * f.leading().abs().max(1.0);
        let m1 = flatness_order(&f, v_plus, tol)?;
        let m2 = flatness_order(&f, v_minus, tol)?;

        let mut well = Self {
            f,
            df,
            v_minus,
            v_star,
            v_plus,
            m1,
            m2,
            cofactor: None,
        };
        if well.gap().abs() <= EQUAL_WELLS_TOL {
            well.cofactor = Some(well.factor_out_wells());
        }
        Ok(well)
    }

    /// `¼(v² − 1)²`
    pub fn quartic() -> Self {
        Self::from_coeffs(vec![0.25, 0.0, -0.5, 0.0, 0.25]).expect("quartic preset")
    }

    /// `(v + 1)²(v − 1)⁴`, flat to fourth order at `v₊ = 1`.
    pub fn sextic_m1_2() -> Self {
        let f = Polynomial::linear_power(-1.0, 2).mul(&Polynomial::linear_power(1.0, 4));
        Self::from_coeffs(f.coeffs().to_vec()).expect("sextic preset")
    }

    /// `¼(v² − 1)² + t·v`
    pub fn tilted_quartic(t: f64) -> Result<Self, PotentialError> {
        Self::from_coeffs(vec![0.25, t, -0.5, 0.0, 0.25])
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.f
    }

    pub fn cofactor(&self) -> Option<&Polynomial> {
        self.cofactor.as_ref()
    }

    pub fn f(&self, v: f64) -> f64 {
        self.f.eval(v)
    }

    pub fn f1(&self, v: f64) -> f64 {
        self.df.eval(v)
    }

    pub fn fk(&self, v: f64, k: usize) -> f64 {
        self.f.eval_derivative(v, k)
    }

    /// `f(v₊) − f(v₋)`
    pub fn gap(&self) -> f64 {
        self.f(self.v_plus) - self.f(self.v_minus)
    }

    pub fn equal_wells(&self) -> bool {
        self.cofactor.is_some()
    }

    pub fn width(&self) -> f64 {
        self.v_plus - self.v_minus
    }

    fn factor_out_wells(&self) -> Polynomial {
        let shifted = self.f.sub(&Polynomial::constant(self.f(self.v_plus)));
        let divisor = Polynomial::linear_power(self.v_plus, 2 * self.m1)
            .mul(&Polynomial::linear_power(self.v_minus, 2 * self.m2));
        shifted.div_rem(&divisor).0
    }

    fn require_cofactor(&self) -> Result<&Polynomial, PotentialError> {
        self.cofactor
            .as_ref()
            .ok_or(PotentialError::UnequalWells { gap: self.gap() })
    }

    /// The positive smooth factor `a(v)` in
    /// `f(v) − f(v₊) = ½ a(v)(v₊ − v)^{2m₁}(v − v₋)^{2m₂}`.
    pub fn a_factor(&self, v: f64) -> Result<f64, PotentialError> {
        let cof = self.require_cofactor()?;
        let w = self.width();
        let (m1, m2) = (self.m1 as i32, self.m2 as i32);
        if v == self.v_plus {
            return Ok(2.0 * self.fk(v, 2 * self.m1)
                / (factorial(2 * self.m1) * w.powi(2 * m2)));
        }
        if v == self.v_minus {
            return Ok(2.0 * self.fk(v, 2 * self.m2)
                / (factorial(2 * self.m2) * w.powi(2 * m1)));
        }
        let window = ENDPOINT_WINDOW * w;
        if (v - self.v_plus).abs() < window || (v - self.v_minus).abs() < window {
            return Ok(2.0 * cof.eval(v));
        }
        let denom = (self.v_plus - v).powi(2 * m1) * (v - self.v_minus).powi(2 * m2);
        Ok(2.0 * (self.f(v) - self.f(self.v_plus)) / denom)
    }

    /// `f'(v)` evaluated through the factorisation, given the offsets
    /// `dp = v₊ − v` and `dm = v − v₋` directly. Keeps the correct sign and
    /// full relative precision when `v` is within rounding of a well.
    pub fn f1_factored(&self, dp: f64, dm: f64) -> Result<f64, PotentialError> {
        let cof = self.require_cofactor()?;
        let v = if dp <= dm { self.v_plus - dp } else { self.v_minus + dm };
        let (m1, m2) = (self.m1 as i32, self.m2 as i32);
        let c = cof.eval(v);
        let dc = cof.eval_derivative(v, 1);
        let pp = dp.powi(2 * m1 - 1);
        let pm = dm.powi(2 * m2 - 1);
        Ok(dc * pp * dp * pm * dm + c * pp * pm * (2.0 * m2 as f64 * dp - 2.0 * m1 as f64 * dm))
    }

    /// `max(v − v₊, v₋ − v, 0)` over the samples.
    pub fn overshoot(&self, values: &[f64]) -> f64 {
        values.iter().fold(0.0_f64, |m, &v| {
            m.max(v - self.v_plus).max(self.v_minus - v)
        })
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|t| t as f64).product()
}

/// Index `m` such that the first derivative of `f` at `v` exceeding `tol`
/// in magnitude has order `2m` and is positive.
fn flatness_order(f: &Polynomial, v: f64, tol: f64) -> Result<usize, PotentialError> {
    let degree = f.degree().unwrap_or(0);
    for k in 1..=degree {
        let d = f.eval_derivative(v, k);
        if d.abs() > tol {
            if k % 2 == 1 || d < 0.0 {
                return Err(PotentialError::NotDoubleWell(format!(
                    "v = {v} is not a strict local minimum (f^({k}) = {d:e})"
                )));
            }
            return Ok(k / 2);
        }
    }
    Err(PotentialError::OrderDetectionFailure { at: v })
}

fn check_sign_pattern(
    df: &Polynomial,
    v_minus: f64,
    v_star: f64,
    v_plus: f64,
) -> Result<(), PotentialError> {
    let h = (v_plus - v_minus) / SAMPLE_POINTS as f64;
    for i in 1..SAMPLE_POINTS {
        let v = v_minus + i as f64 * h;
        let d = df.eval(v);
        // Samples within rounding of a root carry no sign information.
        if (v - v_star).abs() < 1e-9 * (v_plus - v_minus) {
            continue;
        }
        let ok = if v < v_star { d > 0.0 } else { d < 0.0 };
        if !ok && d != 0.0 {
            return Err(PotentialError::NotDoubleWell(format!(
                "f' has the wrong sign at v = {v}"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellDiagnostics {
    pub equal_wells: bool,
    /// `f(v₊) − f(v₋)`
    pub gap: f64,
    pub m1: usize,
    pub m2: usize,
    /// Minimum over `[v₋, v₊]` of `g(v) = f(v) − f(v₋) − (gap/(v₊−v₋))(v − v₋)`.
    pub g_min: f64,
    pub g_argmin: f64,
    /// `μ − f'(v₋)` and `μ − f'(v₊)`: the constant-state forcing of the
    /// classic Allen–Cahn equation. Both vanish only when `μ = 0`.
    pub classic_forcing: [f64; 2],
}

pub fn diagnostics(well: &DoubleWell, mu: f64) -> WellDiagnostics {
    let gap = well.gap();
    let slope = gap / well.width();
    let g = |v: f64| well.f(v) - well.f(well.v_minus) - slope * (v - well.v_minus);

    let h = well.width() / SAMPLE_POINTS as f64;
    let (mut best_i, mut best) = (0, g(well.v_minus));
    for i in 1..=SAMPLE_POINTS {
        let gv = g(well.v_minus + i as f64 * h);
        if gv < best {
            best = gv;
            best_i = i;
        }
    }
    let lo = (well.v_minus + (best_i as f64 - 1.0) * h).max(well.v_minus);
    let hi = (well.v_minus + (best_i as f64 + 1.0) * h).min(well.v_plus);
    let (g_argmin, g_min) = golden_min(g, lo, hi, 1e-14);
    let (g_argmin, g_min) = if g_min < best {
        (g_argmin, g_min)
    } else {
        (well.v_minus + best_i as f64 * h, best)
    };

    WellDiagnostics {
        equal_wells: gap.abs() <= EQUAL_WELLS_TOL,
        gap,
        m1: well.m1,
        m2: well.m2,
        g_min,
        g_argmin,
        classic_forcing: [mu - well.f1(well.v_minus), mu - well.f1(well.v_plus)],
    }
}

/// Golden-section minimisation on `[a, b]`; returns `(argmin, min)`.
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Textual potential selector shared by configs and run manifests.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Quartic,
    SexticM1M2,
    TiltedQuartic(f64),
    Poly(Vec<f64>),
}

impl PotentialSpec {
    pub fn build(&self) -> Result<DoubleWell, PotentialError> {
        match self {
            Self::Quartic => Ok(DoubleWell::quartic()),
            Self::SexticM1M2 => Ok(DoubleWell::sextic_m1_2()),
            Self::TiltedQuartic(t) => DoubleWell::tilted_quartic(*t),
            Self::Poly(c) => DoubleWell::from_coeffs(c.clone()),
        }
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Quartic => write!(f, "quartic"),
            Self::SexticM1M2 => write!(f, "sextic_m1_2"),
            Self::TiltedQuartic(t) => write!(f, "tilted_quartic {t:?}"),
            Self::Poly(c) => {
                let parts: Vec<String> = c.iter().map(|x| format!("{x:?}")).collect();
                write!(f, "poly {}", parts.join(","))
            }
        }
    }
}

pub(crate) fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect()
}

impl FromStr for PotentialSpec {
    type Err = PotentialError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (head, rest) = match s.split_once(char::is_whitespace) {
            Some((h, r)) => (h, r.trim()),
            None => (s, ""),
        };
        let bad = || PotentialError::BadSpec(s.to_string());
        match head {
            "quartic" if rest.is_empty() => Ok(Self::Quartic),
            "sextic_m1_2" if rest.is_empty() => Ok(Self::SexticM1M2),
            "tilted_quartic" => rest.parse().map(Self::TiltedQuartic).map_err(|_| bad()),
            "poly" => {
                let rest = rest.trim_start_matches('=').trim();
                let c = parse_list(rest).map_err(|_| bad())?;
                if c.is_empty() {
                    return Err(bad());
                }
                Ok(Self::Poly(c))
            }
            _ => Err(bad()),
        }
    }
}
