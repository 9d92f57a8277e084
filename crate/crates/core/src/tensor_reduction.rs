//! Linear elasticity data and its reduction to one space dimension.
//!
//! Index convention: the component written `D^{ij}_{kl}` is stored at
//! `[i][j][k][l]` with zero-based indices, so the "11" component is
//! `[0][0]`. `D^{ij}` is the matrix `(D^{ij}_{kl})_{kl}` and `D_{11}` is
//! the matrix `(D^{ij}_{11})_{ij}`.
//!
//! For a displacement of the form `u = (u¹(x₁, t), 0, …, 0)` the stress
//! depends on `(T₁₁, v)` only through
//!
//! ```text
//! T = σ T₁₁ + τ⁽⁰⁾ + τ⁽¹⁾ v,        T:ε⁽¹⁾ = α T₁₁ + β + γ v
//! ```
//!
//! and the structural conditions A1/A2 make the first column of `T` and
//! the driving force `T:ε⁽¹⁾` independent of `v`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance for every residual-valued check in this module.
pub const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error("expected {expected} entries, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("matrix is not symmetric: |A - Aᵀ| = {residual:e}")]
    NotSymmetric { residual: f64 },
    #[error("dimension mismatch: tensor n = {tensor}, strain n = {strain}")]
    DimensionMismatch { tensor: usize, strain: usize },
    #[error("D¹¹₁₁ = {d1111:e} is too close to zero to eliminate u¹ₓ₁")]
    DivisionGuard { d1111: f64 },
    #[error("dimension must be at least 1")]
    EmptyDimension,
}

/// An `n×n` real symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n);
        for (i, &d) in values.iter().enumerate() {
            m.entries[i * n + i] = d;
        }
        m
    }

    /// Row-major entries; rejected unless symmetric to [`RESIDUAL_TOL`].
    pub fn from_row_major(n: usize, entries: Vec<f64>) -> Result<Self, ReductionError> {
        if n == 0 {
            return Err(ReductionError::EmptyDimension);
        }
        if entries.len() != n * n {
            return Err(ReductionError::WrongLength {
                expected: n * n,
                got: entries.len(),
            });
        }
        let m = Self { n, entries };
        let residual = m.asymmetry();
        if residual > RESIDUAL_TOL {
            return Err(ReductionError::NotSymmetric { residual });
        }
        Ok(m)
    }

    /// Unchecked constructor for results of tensor algebra; symmetry is
    /// reported by [`validate`] instead of enforced here.
    fn raw(n: usize, entries: Vec<f64>) -> Self {
        Self { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// `max |A_ij - A_ji|`
    pub fn asymmetry(&self) -> f64 {
        let mut r = 0.0_f64;
        for i in 0..self.n {
            for j in 0..i {
                r = r.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        r
    }

    /// Frobenius product `A:B = Σ A_ij B_ij`.
    pub fn contract(&self, other: &SymMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::raw(self.n, self.entries.iter().map(|a| a * s).collect())
    }

    pub fn plus(&self, other: &SymMatrix) -> Self {
        Self::raw(
            self.n,
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Rank-4 elasticity tensor acting on symmetric matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticityTensor {
    n: usize,
    d: Vec<f64>,
}

impl ElasticityTensor {
    /// Dense entries in lexicographic `(i, j, k, l)` order.
    pub fn from_dense(n: usize, d: Vec<f64>) -> Result<Self, ReductionError> {
        if n == 0 {
            return Err(ReductionError::EmptyDimension);
        }
        let expected = n.pow(4);
        if d.len() != expected {
            return Err(ReductionError::WrongLength {
                expected,
                got: d.len(),
            });
        }
        Ok(Self { n, d })
    }

    /// `Dσ = 2·shear·σ + bulk·tr(σ)·I`, i.e.
    /// `D^{ij}_{kl} = shear(δ_ik δ_jl + δ_il δ_jk) + bulk δ_ij δ_kl`.
    pub fn isotropic(n: usize, shear: f64, bulk: f64) -> Self {
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let mut d = Vec::with_capacity(n.pow(4));
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        d.push(
                            shear * (delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k))
                                + bulk * delta(i, j) * delta(k, l),
                        );
                    }
                }
            }
        }
        Self { n, d }
    }

    /// The identity on symmetric matrices, `Dσ = σ`.
    pub fn identity(n: usize) -> Self {
        Self::isotropic(n, 0.5, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.n;
        self.d[((i * n + j) * n + k) * n + l]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, value: f64) {
        let n = self.n;
        self.d[((i * n + j) * n + k) * n + l] = value;
    }

    pub fn entries(&self) -> &[f64] {
        &self.d
    }

    /// `D^{ij}:σ = Σ_kl D^{ij}_{kl} σ_kl`
    pub fn row_contract(&self, i: usize, j: usize, sigma: &SymMatrix) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.n {
            for l in 0..self.n {
                acc += self.get(i, j, k, l) * sigma.get(k, l);
            }
        }
        acc
    }

    /// `D_{11}:σ = Σ_ij D^{ij}_{11} σ_ij`
    pub fn column11_contract(&self, sigma: &SymMatrix) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                acc += self.get(i, j, 0, 0) * sigma.get(i, j);
            }
        }
        acc
    }

    pub fn apply(&self, sigma: &SymMatrix) -> SymMatrix {
        let n = self.n;
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.row_contract(i, j, sigma));
            }
        }
        SymMatrix::raw(n, out)
    }

    /// `D^{11}_{11}`
    pub fn d1111(&self) -> f64 {
        self.get(0, 0, 0, 0)
    }

    /// `max |D^{ij}_{kl} - D^{ji}_{kl}|` and `max |D^{ij}_{kl} - D^{ij}_{lk}|`
    pub fn minor_symmetry_residual(&self) -> f64 {
        let n = self.n;
        let mut r = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let d = self.get(i, j, k, l);
                        r = r
                            .max((d - self.get(j, i, k, l)).abs())
                            .max((d - self.get(i, j, l, k)).abs());
                    }
                }
            }
        }
        r
    }

    /// `max |D^{ij}_{kl} - D^{kl}_{ij}|`
    pub fn major_symmetry_residual(&self) -> f64 {
        let n = self.n;
        let mut r = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        r = r.max((self.get(i, j, k, l) - self.get(k, l, i, j)).abs());
                    }
                }
            }
        }
        r
    }

    /// Matrix of the induced operator on symmetric matrices in the
    /// orthonormal basis `{E_ii} ∪ {(E_ij + E_ji)/√2 : i < j}`.
    pub fn operator_matrix(&self) -> DMatrix<f64> {
        let n = self.n;
        let basis: Vec<SymMatrix> = (0..n)
            .flat_map(|i| (i..n).map(move |j| (i, j)))
            .map(|(i, j)| {
                let mut b = SymMatrix::zeros(n);
                if i == j {
                    b.entries[i * n + i] = 1.0;
                } else {
                    let s = std::f64::consts::FRAC_1_SQRT_2;
                    b.entries[i * n + j] = s;
                    b.entries[j * n + i] = s;
                }
                b
            })
            .collect();
        let images: Vec<SymMatrix> = basis.iter().map(|b| self.apply(b)).collect();
        let m = basis.len();
        DMatrix::from_fn(m, m, |a, b| basis[a].contract(&images[b]))
    }

    /// Smallest eigenvalue of the (symmetrised) induced operator; the
    /// coercivity constant `c` in `(Dσ):σ ≥ c|σ|²`.
    pub fn coercivity(&self) -> f64 {
        let m = self.operator_matrix();
        let sym = (&m + m.transpose()) * 0.5;
        SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Elasticity tensor together with the stress-free strain
/// `ε̄(v) = ε⁽⁰⁾ + ε⁽¹⁾ v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticSystem {
    pub d: ElasticityTensor,
    pub eps0: SymMatrix,
    pub eps1: SymMatrix,
}

impl ElasticSystem {
    pub fn new(
        d: ElasticityTensor,
        eps0: SymMatrix,
        eps1: SymMatrix,
    ) -> Result<Self, ReductionError> {
        for strain in [&eps0, &eps1] {
            if strain.dim() != d.dim() {
                return Err(ReductionError::DimensionMismatch {
                    tensor: d.dim(),
                    strain: strain.dim(),
                });
            }
        }
        Ok(Self { d, eps0, eps1 })
    }

    pub fn dim(&self) -> usize {
        self.d.dim()
    }

    fn guarded_d1111(&self) -> Result<f64, ReductionError> {
        let d1111 = self.d.d1111();
        if d1111.abs() <= RESIDUAL_TOL {
            Err(ReductionError::DivisionGuard { d1111 })
        } else {
            Ok(d1111)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub minor_symmetry_residual: f64,
    pub major_symmetry_residual: f64,
    pub strain_symmetry_residual: f64,
    /// Smallest eigenvalue of the induced operator.
    pub c: f64,
    pub d1111: f64,
    pub failures: Vec<String>,
}

pub fn validate(system: &ElasticSystem) -> ValidationReport {
    let minor = system.d.minor_symmetry_residual();
    let major = system.d.major_symmetry_residual();
    let strain = system.eps0.asymmetry().max(system.eps1.asymmetry());
    let c = system.d.coercivity();
    let d1111 = system.d.d1111();

    let mut failures = Vec::new();
    if minor > RESIDUAL_TOL {
        failures.push(format!("minor symmetry residual {minor:e}"));
    }
    if major > RESIDUAL_TOL {
        failures.push(format!("major symmetry residual {major:e}"));
    }
    if strain > RESIDUAL_TOL {
        failures.push(format!("transformation strain asymmetry {strain:e}"));
    }
    if !(c > RESIDUAL_TOL) {
        failures.push(format!("not positive definite: smallest eigenvalue {c:e}"));
    }
    if d1111.abs() <= RESIDUAL_TOL {
        failures.push(format!("division guard: D¹¹₁₁ = {d1111:e}"));
    }
    ValidationReport {
        valid: failures.is_empty(),
        minor_symmetry_residual: minor,
        major_symmetry_residual: major,
        strain_symmetry_residual: strain,
        c,
        d1111,
        failures,
    }
}

/// Residuals of A1: `rᵢ = D¹¹₁₁ (D^{i1}:ε⁽¹⁾) − D^{i1}₁₁ (D¹¹:ε⁽¹⁾)`.
pub fn check_a1(system: &ElasticSystem) -> Vec<f64> {
    let d = &system.d;
    let d1111 = d.d1111();
    let d11_eps1 = d.row_contract(0, 0, &system.eps1);
    (0..system.dim())
        .map(|i| d1111 * d.row_contract(i, 0, &system.eps1) - d.get(i, 0, 0, 0) * d11_eps1)
        .collect()
}

/// Residual of A2: `(D₁₁:ε⁽¹⁾)(D¹¹:ε⁽¹⁾) − D¹¹₁₁ (Dε⁽¹⁾:ε⁽¹⁾)`.
pub fn check_a2(system: &ElasticSystem) -> f64 {
    let d = &system.d;
    let eps1 = &system.eps1;
    d.column11_contract(eps1) * d.row_contract(0, 0, eps1) - d.d1111() * d.apply(eps1).contract(eps1)
}

pub fn a1_holds(system: &ElasticSystem) -> bool {
    check_a1(system).iter().all(|r| r.abs() <= RESIDUAL_TOL)
}

pub fn a2_holds(system: &ElasticSystem) -> bool {
    check_a2(system).abs() <= RESIDUAL_TOL
}

/// Coefficients of `T = σ T₁₁ + τ⁽⁰⁾ + τ⁽¹⁾ v` and `T:ε⁽¹⁾ = α T₁₁ + β + γ v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedCoefficients {
    pub sigma: SymMatrix,
    pub tau0: SymMatrix,
    pub tau1: SymMatrix,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl ReducedCoefficients {
    /// `μ = α T₁₁ + β`, the constant forcing in the reduced equations.
    pub fn mu(&self, t11: f64) -> f64 {
        self.alpha * t11 + self.beta
    }
}

pub fn reduce(system: &ElasticSystem) -> Result<ReducedCoefficients, ReductionError> {
    let d = &system.d;
    let d1111 = system.guarded_d1111()?;
    let n = system.dim();

    let d11_eps0 = d.row_contract(0, 0, &system.eps0);
    let d11_eps1 = d.row_contract(0, 0, &system.eps1);
    let mut sigma = Vec::with_capacity(n * n);
    let mut tau0 = Vec::with_capacity(n * n);
    let mut tau1 = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let dij11 = d.get(i, j, 0, 0);
            sigma.push(dij11 / d1111);
            tau0.push((dij11 * d11_eps0 - d1111 * d.row_contract(i, j, &system.eps0)) / d1111);
            tau1.push((dij11 * d11_eps1 - d1111 * d.row_contract(i, j, &system.eps1)) / d1111);
        }
    }

    let col_eps1 = d.column11_contract(&system.eps1);
    let alpha = col_eps1 / d1111;
    let beta = (col_eps1 * d11_eps0 - d1111 * d.apply(&system.eps0).contract(&system.eps1)) / d1111;
    let gamma = (col_eps1 * d11_eps1 - d1111 * d.apply(&system.eps1).contract(&system.eps1)) / d1111;

    Ok(ReducedCoefficients {
        sigma: SymMatrix::raw(n, sigma),
        tau0: SymMatrix::raw(n, tau0),
        tau1: SymMatrix::raw(n, tau1),
        alpha,
        beta,
        gamma,
    })
}

/// `T = σ t₁₁ + τ⁽⁰⁾ + τ⁽¹⁾ v`
pub fn stress(coeffs: &ReducedCoefficients, t11: f64, v: f64) -> SymMatrix {
    coeffs
        .sigma
        .scaled(t11)
        .plus(&coeffs.tau0)
        .plus(&coeffs.tau1.scaled(v))
}

/// `u¹ₓ₁` recovered from a prescribed constant `T₁₁`:
/// `w = (t₁₁ + D¹¹:ε⁽⁰⁾ + (D¹¹:ε⁽¹⁾) v) / D¹¹₁₁`.
pub fn displacement_gradient(system: &ElasticSystem, t11: f64, v: f64) -> Result<f64, ReductionError> {
    let d1111 = system.guarded_d1111()?;
    let d = &system.d;
    Ok((t11 + d.row_contract(0, 0, &system.eps0) + d.row_contract(0, 0, &system.eps1) * v) / d1111)
}

/// Full stress for the uniaxial displacement gradient `w = u¹ₓ₁`:
/// `T_ij = D^{ij}₁₁ w − D^{ij}:ε⁽⁰⁾ − (D^{ij}:ε⁽¹⁾) v`.
pub fn stress_from_displacement_gradient(system: &ElasticSystem, w: f64, v: f64) -> SymMatrix {
    let d = &system.d;
    let n = system.dim();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(
                d.get(i, j, 0, 0) * w
                    - d.row_contract(i, j, &system.eps0)
                    - d.row_contract(i, j, &system.eps1) * v,
            );
        }
    }
    SymMatrix::raw(n, out)
}

/// Jump of the displacement gradient across a front connecting `v_minus`
/// to `v_plus`: `(D¹¹:ε⁽¹⁾)(v₊ − v₋) / D¹¹₁₁`.
pub fn jump_w(system: &ElasticSystem, v_minus: f64, v_plus: f64) -> Result<f64, ReductionError> {
    let d1111 = system.guarded_d1111()?;
    Ok(system.d.row_contract(0, 0, &system.eps1) * (v_plus - v_minus) / d1111)
}
