//! Dense real polynomials with ascending coefficients.
//!
//! Only what the potential layer needs: Horner evaluation, exact
//! derivatives, long division, a floating-point squarefree part, and real
//! root isolation by interval bisection with Descartes sign counting.

use serde::{Deserialize, Serialize};

/// Coefficients smaller than this fraction of the largest one are treated
/// as zero when running the Euclidean algorithm.
const GCD_RELATIVE_TOL: f64 = 1e-10;

/// Isolating intervals narrower than this (relative to the root bound) are
/// reported as a single root cluster.
const CLUSTER_RELATIVE_WIDTH: f64 = 1e-13;

/// Off-centre split point for bisection, so that roots at simple rationals
/// do not land on interval endpoints where rounding can hide them.
const SPLIT_RATIO: f64 = 0.487_654_321;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial from ascending coefficients; trailing exact zeros
    /// are dropped.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `(x - root)^power`
    pub fn linear_power(root: f64, power: usize) -> Self {
        let factor = Self::new(vec![-root, 1.0]);
        (0..power).fold(Self::constant(1.0), |acc, _| acc.mul(&factor))
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn nth_derivative(&self, k: usize) -> Self {
        (0..k).fold(self.clone(), |p, _| p.derivative())
    }

    /// Value of the k-th derivative at `x`; zero when `k` exceeds the degree.
    pub fn eval_derivative(&self, x: f64, k: usize) -> f64 {
        if k >= self.coeffs.len() {
            return 0.0;
        }
        // c_j * j!/(j-k)! * x^(j-k), accumulated by Horner.
        let mut acc = 0.0;
        for j in (k..self.coeffs.len()).rev() {
            let falling: f64 = ((j - k + 1)..=j).map(|t| t as f64).product();
            acc = acc * x + self.coeffs[j] * falling;
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or(0.0)
                        + other.coeffs.get(i).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Polynomial long division: `self = q * divisor + r` with
    /// `deg r < deg divisor`.
    ///
    /// # Panics
    /// Panics if `divisor` is the zero polynomial.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let Some(nd) = self.degree() else {
            return (Self::zero(), Self::zero());
        };
        if nd < dd {
            return (Self::zero(), self.clone());
        }
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0.0; nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let q = rem[k + dd] / lead;
            quot[k] = q;
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= q * d;
            }
            rem[k + dd] = 0.0;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    /// Drops coefficients below `tol * max|c|`.
    fn chop(&self, tol: f64) -> Self {
        let cut = tol * self.max_abs();
        Self::new(
            self.coeffs
                .iter()
                .map(|&c| if c.abs() <= cut { 0.0 } else { c })
                .collect(),
        )
    }

    fn normalized(&self) -> Self {
        let m = self.max_abs();
        if m == 0.0 {
            self.clone()
        } else {
            self.scale(1.0 / m)
        }
    }

    /// Approximate greatest common divisor by the Euclidean algorithm with
    /// relative coefficient chopping.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.normalized();
        let mut b = other.normalized();
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        loop {
            if b.is_zero() {
                return a.normalized();
            }
            if b.degree() == Some(0) {
                return Self::constant(1.0);
            }
            let (_, r) = a.div_rem(&b);
            let r = if r.max_abs() <= GCD_RELATIVE_TOL * a.max_abs() {
                Self::zero()
            } else {
                r.chop(GCD_RELATIVE_TOL)
            };
            a = b;
            b = r.normalized();
        }
    }

    /// `p / gcd(p, p')`: same real roots, each simple.
    pub fn squarefree_part(&self) -> Self {
        if self.degree().unwrap_or(0) < 2 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        if g.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        self.div_rem(&g).0
    }

    /// Cauchy bound: every real root lies strictly inside `(-B, B)`.
    fn root_bound(&self) -> f64 {
        let lead = self.leading().abs();
        let n = self.coeffs.len() - 1;
        1.0 + self.coeffs[..n]
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.abs() / lead))
    }

    /// Sign variations of `(1+x)^n p((a + b x)/(1 + x))`, an upper bound on
    /// the number of roots in the open interval `(a, b)` with the same
    /// parity.
    fn descartes_count(&self, a: f64, b: f64) -> usize {
        let n = self.coeffs.len() - 1;
        let lin = Self::new(vec![a, b]);
        let mut acc = Self::zero();
        let mut lin_pow = Self::constant(1.0);
        for (k, &c) in self.coeffs.iter().enumerate() {
            let term = lin_pow.mul(&Self::linear_power(-1.0, n - k)).scale(c);
            acc = acc.add(&term);
            if k < n {
                lin_pow = lin_pow.mul(&lin);
            }
        }
        let cut = 1e-14 * acc.max_abs();
        let mut count = 0;
        let mut last = 0.0_f64;
        for &c in acc.coeffs() {
            if c.abs() <= cut {
                continue;
            }
            if last != 0.0 && (c > 0.0) != (last > 0.0) {
                count += 1;
            }
            last = c;
        }
        count
    }

    /// Distinct real roots in ascending order.
    ///
    /// Works on the squarefree part so that multiple roots collapse to one
    /// entry. Returns an empty list for constants and the zero polynomial.
    pub fn real_roots(&self) -> Vec<f64> {
        let p = self.squarefree_part();
        match p.degree() {
            None | Some(0) => return Vec::new(),
            Some(1) => return vec![-p.coeffs[0] / p.coeffs[1]],
            _ => {}
        }
        let bound = p.root_bound();
        let min_width = CLUSTER_RELATIVE_WIDTH * bound;
        let mut roots = Vec::new();
        let mut stack = vec![(-bound, bound)];
        while let Some((a, b)) = stack.pop() {
            let count = p.descartes_count(a, b);
            if count == 0 {
                continue;
            }
            if count == 1 || b - a < min_width {
                roots.push(refine_root(&p, a, b));
                continue;
            }
            let m = a + SPLIT_RATIO * (b - a);
            if p.eval(m) == 0.0 {
                roots.push(m);
            }
            stack.push((a, m));
            stack.push((m, b));
        }
        roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
        roots.dedup_by(|x, y| (*x - *y).abs() <= min_width);
        roots
    }
}

/// Bisection on a sign change inside `[a, b]`; falls back to the midpoint
/// when the endpoint signs agree (a cluster collapsed by the width cutoff).
fn refine_root(p: &Polynomial, mut a: f64, mut b: f64) -> f64 {
    let mut fa = p.eval(a);
    let fb = p.eval(b);
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    if (fa > 0.0) == (fb > 0.0) {
        return 0.5 * (a + b);
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = p.eval(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    // Pick the endpoint with the smaller residual.
    if p.eval(a).abs() <= p.eval(b).abs() {
        a
    } else {
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn from_roots(roots: &[(f64, usize)]) -> Polynomial {
        roots
            .iter()
            .fold(Polynomial::constant(1.0), |acc, &(r, k)| {
                acc.mul(&Polynomial::linear_power(r, k))
            })
    }

    #[test]
    fn horner_and_derivatives() {
        let p = Polynomial::new(vec![0.25, 0.0, -0.5, 0.0, 0.25]);
        assert_eq!(p.eval(0.0), 0.25);
        assert_eq!(p.eval(1.0), 0.0);
        assert_eq!(p.eval_derivative(1.0, 1), 0.0);
        assert_eq!(p.eval_derivative(1.0, 2), 2.0);
        assert_eq!(p.eval_derivative(1.0, 4), 6.0);
        assert_eq!(p.eval_derivative(0.3, 5), 0.0);
        assert_eq!(p.derivative().eval(0.7), p.eval_derivative(0.7, 1));
    }

    #[test]
    fn trailing_zeros_trimmed() {
        let p = Polynomial::new(vec![1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), Some(1));
        assert!(Polynomial::new(vec![0.0, 0.0]).is_zero());
    }

    #[test]
    fn division_recovers_factor() {
        let a = from_roots(&[(1.0, 2), (-0.5, 1)]);
        let b = from_roots(&[(3.0, 1)]);
        let (q, r) = a.mul(&b).div_rem(&b);
        for (x, y) in q.coeffs().iter().zip(a.coeffs()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-13);
        }
        assert!(r.coeffs().iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn squarefree_collapses_multiple_roots() {
        let p = from_roots(&[(1.0, 3), (-1.0, 1), (-1.0 / 3.0, 1)]);
        let s = p.squarefree_part();
        assert_eq!(s.degree(), Some(3));
    }

    #[test]
    fn real_roots_of_sextic_derivative() {
        // f = (v+1)^2 (v-1)^4, f' = 2 (v+1)(v-1)^3(3v+1)
        let f = from_roots(&[(-1.0, 2), (1.0, 4)]);
        let roots = f.derivative().real_roots();
        assert_eq!(roots.len(), 3);
        assert_abs_diff_eq!(roots[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(roots[1], -1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(roots[2], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn real_roots_skip_complex_pairs() {
        // (x^2 + 1)(x - 2)
        let p = Polynomial::new(vec![1.0, 0.0, 1.0]).mul(&Polynomial::new(vec![-2.0, 1.0]));
        let roots = p.real_roots();
        assert_eq!(roots.len(), 1);
        assert_abs_diff_eq!(roots[0], 2.0, epsilon = 1e-13);
    }

    #[test]
    fn close_simple_roots_stay_distinct() {
        let p = from_roots(&[(0.1, 1), (0.1001, 1), (5.0, 1)]);
        let roots = p.real_roots();
        assert_eq!(roots.len(), 3);
        assert_abs_diff_eq!(roots[1], 0.1001, epsilon = 1e-10);
    }
}
