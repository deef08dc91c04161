//! Formal power series for the calibration function `g_beta` of an analytic
//! well: homogeneous polynomial algebra, inversion of the linear operator
//! `L(grad P) = 2 <Lambda_beta p, grad P>` degree by degree, the radial closed
//! form, and the residual of `W = |grad g_beta + Lambda_beta p|^2`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{Mat2, Vec2};
use crate::numerics::adaptive_simpson;
use crate::potentials::{Potential, PotentialKind, WellData};

/// Default truncation degree.
pub const DEFAULT_MAX_DEGREE: usize = 10;

/// Homogeneous polynomial of degree `n`; `coeffs[k]` multiplies `p1^(n-k) p2^k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomogPoly {
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

impl HomogPoly {
    pub fn zero(degree: usize) -> Self {
        Self { degree, coeffs: vec![0.0; degree + 1] }
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Precondition("a homogeneous polynomial needs at least one coefficient".into()));
        }
        Ok(Self { degree: coeffs.len() - 1, coeffs })
    }

    /// Coefficient of `p1^a1 p2^a2`; zero unless `a1 + a2 = degree`.
    pub fn coeff(&self, a1: usize, a2: usize) -> f64 {
        if a1 + a2 == self.degree {
            self.coeffs[a2]
        } else {
            0.0
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, p: Vec2) -> f64 {
        let n = self.degree;
        let mut s = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c != 0.0 {
                s += c * p.x.powi((n - k) as i32) * p.y.powi(k as i32);
            }
        }
        s
    }

    /// Partial derivative in `p1`.
    pub fn d1(&self) -> HomogPoly {
        if self.degree == 0 {
            return HomogPoly::zero(0);
        }
        let n = self.degree;
        let coeffs = (0..n).map(|k| (n - k) as f64 * self.coeffs[k]).collect();
        HomogPoly { degree: n - 1, coeffs }
    }

    /// Partial derivative in `p2`.
    pub fn d2(&self) -> HomogPoly {
        if self.degree == 0 {
            return HomogPoly::zero(0);
        }
        let n = self.degree;
        let coeffs = (0..n).map(|k| (k + 1) as f64 * self.coeffs[k + 1]).collect();
        HomogPoly { degree: n - 1, coeffs }
    }

    pub fn grad(&self, p: Vec2) -> Vec2 {
        Vec2::new(self.d1().eval(p), self.d2().eval(p))
    }

    pub fn mul(&self, other: &HomogPoly) -> HomogPoly {
        let mut out = HomogPoly::zero(self.degree + other.degree);
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out.coeffs[i + j] += a * b;
            }
        }
        out
    }

    /// In-place `self += s * other`; degrees must agree.
    pub fn add_scaled(&mut self, other: &HomogPoly, s: f64) {
        debug_assert_eq!(self.degree, other.degree);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    /// `(p1^2 + p2^2)^m`.
    pub fn radial_power(m: usize) -> HomogPoly {
        let base = HomogPoly { degree: 2, coeffs: vec![1.0, 0.0, 1.0] };
        let mut out = HomogPoly { degree: 0, coeffs: vec![1.0] };
        for _ in 0..m {
            out = out.mul(&base);
        }
        out
    }
}

/// The matrix `Lambda_beta = [[-l1 sin, -l2 cos], [l1 cos, -l2 sin]]`.
pub fn lambda_matrix(l1: f64, l2: f64, beta: f64) -> Mat2 {
    let (s, c) = beta.sin_cos();
    Mat2::new(-l1 * s, -l2 * c, l1 * c, -l2 * s)
}

/// Matrix of `P -> L(grad P)` on degree-`n` coefficients (columns are inputs).
fn l_matrix(n: usize, l1: f64, l2: f64, beta: f64) -> DMatrix<f64> {
    let a = lambda_matrix(l1, l2, beta);
    let mut m = DMatrix::zeros(n + 1, n + 1);
    for k in 0..=n {
        let i = (n - k) as f64;
        let kk = k as f64;
        m[(k, k)] = 2.0 * (i * a[(0, 0)] + kk * a[(1, 1)]);
        if k < n {
            m[(k + 1, k)] = 2.0 * i * a[(0, 1)];
        }
        if k > 0 {
            m[(k - 1, k)] = 2.0 * kk * a[(1, 0)];
        }
    }
    m
}

/// Forward map `P -> L(grad P)`.
pub fn apply_l(p: &HomogPoly, l1: f64, l2: f64, beta: f64) -> HomogPoly {
    let m = l_matrix(p.degree, l1, l2, beta);
    let v = m * DVector::from_column_slice(&p.coeffs);
    HomogPoly { degree: p.degree, coeffs: v.iter().copied().collect() }
}

/// The unique degree-`n` polynomial `P` with `L(grad P) = Q`.
pub fn solve_l(q: &HomogPoly, l1: f64, l2: f64, beta: f64) -> Result<HomogPoly> {
    if q.degree < 3 {
        return Err(Error::Precondition(format!("solve_l needs degree >= 3, got {}", q.degree)));
    }
    let m = l_matrix(q.degree, l1, l2, beta);
    let sv = m.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if !(smax > 0.0) || smin / smax < 1e-12 {
        return Err(Error::Singular(format!(
            "coefficient matrix of degree {} has reciprocal condition {:.3e}",
            q.degree,
            if smax > 0.0 { smin / smax } else { 0.0 }
        )));
    }
    let rhs = DVector::from_column_slice(&q.coeffs);
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular(format!("LU failed at degree {}", q.degree)))?;
    Ok(HomogPoly { degree: q.degree, coeffs: sol.iter().copied().collect() })
}

/// Truncated series `g_beta = sum_{n=3}^{N} P_n` in well coordinates,
/// together with the cubic-and-higher part of `W` it was built from.
#[derive(Clone, Debug, Serialize)]
pub struct GBetaSeries {
    pub beta: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub center: Vec2,
    pub v1: Vec2,
    pub v2: Vec2,
    pub max_degree: usize,
    /// `P_3 .. P_N`.
    pub terms: Vec<HomogPoly>,
    /// `Q_3 .. Q_N`: the Taylor terms of `W` beyond the quadratic.
    pub w_terms: Vec<HomogPoly>,
    /// Largest ring radius on which the series residual stays below `1e-6`.
    pub validity_radius: f64,
}

impl GBetaSeries {
    pub fn to_local(&self, p: Vec2) -> Vec2 {
        let d = p - self.center;
        Vec2::new(self.v1.dot(&d), self.v2.dot(&d))
    }

    pub fn to_global(&self, q: Vec2) -> Vec2 {
        self.center + self.v1 * q.x + self.v2 * q.y
    }

    /// `g_beta(q)` in well coordinates.
    pub fn g(&self, q: Vec2) -> f64 {
        self.terms.iter().map(|t| t.eval(q)).sum()
    }

    pub fn grad_g(&self, q: Vec2) -> Vec2 {
        self.terms.iter().fold(Vec2::zeros(), |acc, t| acc + t.grad(q))
    }

    pub fn lambda(&self) -> Mat2 {
        lambda_matrix(self.lambda1, self.lambda2, self.beta)
    }

    /// The truncated Taylor series of `W` in well coordinates.
    pub fn w_value(&self, q: Vec2) -> f64 {
        let quad = self.lambda1 * self.lambda1 * q.x * q.x + self.lambda2 * self.lambda2 * q.y * q.y;
        quad + self.w_terms.iter().map(|t| t.eval(q)).sum::<f64>()
    }

    /// The field `grad g_beta + Lambda_beta q` whose squared norm should be `W`.
    pub fn field(&self, q: Vec2) -> Vec2 {
        self.grad_g(q) + self.lambda() * q
    }

    /// Same `W` data, recomputed for another angle.
    pub fn with_beta(&self, beta: f64) -> Result<GBetaSeries> {
        let frame = Frame { center: self.center, v1: self.v1, v2: self.v2 };
        build_series(&self.w_terms, self.lambda1, self.lambda2, beta, self.max_degree, frame)
    }
}

#[derive(Clone, Copy)]
struct Frame {
    center: Vec2,
    v1: Vec2,
    v2: Vec2,
}

/// Run the degree recursion `L(grad P_n) = Q_n - sum_{j+k=n+2} <grad P_j, grad P_k>`.
///
/// `w_terms` lists `Q_3, Q_4, ...` (missing degrees are zero). The series is
/// expressed in axis-aligned well coordinates at the origin.
pub fn gbeta_coefficients(w_terms: &[HomogPoly], l1: f64, l2: f64, beta: f64, max_degree: usize) -> Result<GBetaSeries> {
    let frame = Frame { center: Vec2::zeros(), v1: Vec2::new(1.0, 0.0), v2: Vec2::new(0.0, 1.0) };
    build_series(w_terms, l1, l2, beta, max_degree, frame)
}

/// Series for a well of a potential, in that well's eigenframe.
pub fn gbeta_for_well(pot: &Potential, which: usize, beta: f64, max_degree: usize) -> Result<GBetaSeries> {
    let well = pot.well_data(which)?;
    let w_terms = w_series(pot, &well, max_degree)?;
    let frame = Frame { center: well.center, v1: well.v1, v2: well.v2 };
    build_series(&w_terms, well.lambda1(), well.lambda2(), beta, max_degree, frame)
}

fn build_series(w_terms: &[HomogPoly], l1: f64, l2: f64, beta: f64, max_degree: usize, frame: Frame) -> Result<GBetaSeries> {
    if max_degree < 3 {
        return Err(Error::Precondition("series truncation degree must be >= 3".into()));
    }
    if !(l1 > 0.0 && l2 > 0.0) {
        return Err(Error::Degenerate("series needs positive well eigenvalues".into()));
    }
    let q_of = |n: usize| -> HomogPoly {
        w_terms.iter().find(|t| t.degree == n).cloned().unwrap_or_else(|| HomogPoly::zero(n))
    };
    let mut terms: Vec<HomogPoly> = Vec::new();
    let mut grads: Vec<(HomogPoly, HomogPoly)> = Vec::new();
    for n in 3..=max_degree {
        let mut rhs = q_of(n);
        for j in 3..=(n - 1) {
            let k = n + 2 - j;
            if k < 3 || k > n - 1 {
                continue;
            }
            let (aj1, aj2) = &grads[j - 3];
            let (ak1, ak2) = &grads[k - 3];
            rhs.add_scaled(&aj1.mul(ak1), -1.0);
            rhs.add_scaled(&aj2.mul(ak2), -1.0);
        }
        let p = solve_l(&rhs, l1, l2, beta)?;
        grads.push((p.d1(), p.d2()));
        terms.push(p);
    }
    let mut series = GBetaSeries {
        beta,
        lambda1: l1,
        lambda2: l2,
        center: frame.center,
        v1: frame.v1,
        v2: frame.v2,
        max_degree,
        terms,
        w_terms: (3..=max_degree).map(q_of).collect(),
        validity_radius: 0.0,
    };
    series.validity_radius = estimate_validity_radius(&series);
    Ok(series)
}

/// Largest ring radius up to which `|W_series - |grad g + Lambda q|^2| <= 1e-6`.
fn estimate_validity_radius(s: &GBetaSeries) -> f64 {
    let mut valid = 0.0;
    let rings = 200;
    for i in 0..rings {
        let r = 1e-3 * (1e4f64).powf(i as f64 / (rings - 1) as f64);
        let mut worst = 0.0f64;
        for k in 0..32 {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 32.0;
            let q = Vec2::new(r * t.cos(), r * t.sin());
            let res = (s.w_value(q) - s.field(q).norm_squared()).abs();
            worst = worst.max(res);
        }
        if worst.is_finite() && worst <= 1e-6 {
            valid = r;
        } else {
            break;
        }
    }
    valid
}

/// Cubic-and-higher Taylor terms of `W` at a well, in its eigenframe.
pub fn w_series(pot: &Potential, well: &WellData, max_degree: usize) -> Result<Vec<HomogPoly>> {
    match pot.kind() {
        PotentialKind::QuadraticOneWell | PotentialKind::SeparableDoubleWell => {
            Ok((3..=max_degree).map(HomogPoly::zero).collect())
        }
        PotentialKind::RadialPower if pot.is_quadratic_near(0) => Ok((3..=max_degree).map(HomogPoly::zero).collect()),
        PotentialKind::RadialAnalyticOneWell => {
            let coeffs = pot.radial_coeffs().unwrap_or(&[]);
            let _ = well;
            let mut out: Vec<HomogPoly> = (3..=max_degree).map(HomogPoly::zero).collect();
            for (i, a) in coeffs.iter().enumerate() {
                let m = i + 2; // a_k r^(2k+2) with k = i + 1
                if 2 * m <= max_degree {
                    out[2 * m - 3].add_scaled(&HomogPoly::radial_power(m), *a);
                }
            }
            Ok(out)
        }
        other => Err(Error::Precondition(format!(
            "no Taylor series available for potential kind {}",
            other.as_str()
        ))),
    }
}

/// Radial closed form `g_beta(r) = int_0^r (sin(beta) s - sqrt(sin^2(beta) s^2 + f(s))) ds`
/// with `f(s) = sum_k a_k s^(2k+2)`.
pub fn gbeta_radial(f_coeffs: &[f64], beta: f64, r: f64) -> Result<f64> {
    let sb = beta.sin();
    let f = |s: f64| -> f64 {
        let s2 = s * s;
        let mut pow = s2;
        let mut v = 0.0;
        for a in f_coeffs {
            pow *= s2;
            v += a * pow;
        }
        v
    };
    let integrand = |s: f64| -> Result<f64> {
        let fs = f(s);
        let rad = sb * sb * s * s + fs;
        if rad < 0.0 {
            return Err(Error::Domain(format!("negative radicand at s = {s}")));
        }
        let den = sb * s + rad.sqrt();
        if den == 0.0 {
            return Ok(0.0);
        }
        // sin(b) s - sqrt(rad) rewritten without cancellation
        Ok(-fs / den)
    };
    adaptive_simpson(&integrand, 0.0, r, 1e-13)
}

/// Max over samples of `|W(p) - |grad g_beta(q) + Lambda_beta q|^2|`.
pub fn residual_wexp(pot: &Potential, g: &GBetaSeries, samples: &[Vec2]) -> f64 {
    samples
        .iter()
        .map(|p| {
            let q = g.to_local(*p);
            (pot.value(*p) - g.field(q).norm_squared()).abs()
        })
        .fold(0.0, f64::max)
}

/// Residual report for a series evaluated on rings around the well.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub radius: f64,
    pub residual: f64,
    pub residual_half_radius: f64,
    pub validity_radius: f64,
}

/// Residuals on rings of radius `r` and `r / 2`, `count` points each.
pub fn residual_report(pot: &Potential, g: &GBetaSeries, r: f64, count: usize) -> ResidualReport {
    ResidualReport {
        radius: r,
        residual: residual_wexp(pot, g, &ring_samples(g, r, count)),
        residual_half_radius: residual_wexp(pot, g, &ring_samples(g, 0.5 * r, count)),
        validity_radius: g.validity_radius,
    }
}

/// Points on a ring of radius `r` around the series' well.
pub fn ring_samples(g: &GBetaSeries, r: f64, count: usize) -> Vec<Vec2> {
    (0..count)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
            g.to_global(Vec2::new(r * t.cos(), r * t.sin()))
        })
        .collect()
}
