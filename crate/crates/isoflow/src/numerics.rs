//! Small numerical kernels: adaptive quadrature, Gauss-Legendre rules,
//! banded and tridiagonal solvers, an embedded Runge-Kutta stepper and
//! bracketed root finding.

use crate::error::{Error, Result};

/// Adaptive Simpson quadrature with Richardson acceptance `|S2 - S1| <= 15 tol`.
pub fn adaptive_simpson<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> Result<f64>>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Five-point Gauss-Legendre nodes and weights on `[0, 1]`.
pub const GAUSS5: [(f64, f64); 5] = [
    (0.046_910_077_030_668_004, 0.118_463_442_528_094_54),
    (0.230_765_344_947_158_45, 0.239_314_335_249_683_23),
    (0.5, 0.284_444_444_444_444_44),
    (0.769_234_655_052_841_6, 0.239_314_335_249_683_23),
    (0.953_089_922_969_332, 0.118_463_442_528_094_54),
];

/// Solve a symmetric-or-not tridiagonal system in place (Thomas algorithm).
///
/// `lower[i]` couples row `i+1` to column `i`, `upper[i]` couples row `i` to
/// column `i+1`. Fails on a vanishing pivot.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if piv.abs() < 1e-300 {
        return Err(Error::Singular("zero pivot in tridiagonal solve".into()));
    }
    if n > 1 {
        c[0] = upper[0] / piv;
    }
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - lower[i - 1] * c[i - 1];
        if piv.abs() < 1e-300 {
            return Err(Error::Singular("zero pivot in tridiagonal solve".into()));
        }
        if i + 1 < n {
            c[i] = upper[i] / piv;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / piv;
    }
    for i in (0..n.saturating_sub(1)).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Cholesky factor of a symmetric tridiagonal matrix; `None` if not positive definite.
pub struct TridiagCholesky {
    diag: Vec<f64>,
    sub: Vec<f64>,
}

impl TridiagCholesky {
    pub fn new(diag: &[f64], off: &[f64]) -> Option<Self> {
        let n = diag.len();
        let mut l = vec![0.0; n];
        let mut s = vec![0.0; n.saturating_sub(1)];
        for i in 0..n {
            let mut v = diag[i];
            if i > 0 {
                v -= s[i - 1] * s[i - 1];
            }
            if !(v > 0.0) || !v.is_finite() {
                return None;
            }
            l[i] = v.sqrt();
            if i + 1 < n {
                s[i] = off[i] / l[i];
            }
        }
        Some(Self { diag: l, sub: s })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut v = rhs[i];
            if i > 0 {
                v -= self.sub[i - 1] * y[i - 1];
            }
            y[i] = v / self.diag[i];
        }
        for i in (0..n).rev() {
            let mut v = y[i];
            if i + 1 < n {
                v -= self.sub[i] * y[i + 1];
            }
            y[i] = v / self.diag[i];
        }
        y
    }
}

/// LU factorization with partial pivoting of a square banded matrix with
/// `kl` sub- and `ku` super-diagonals (LAPACK `gbtrf` layout).
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandedLu {
    /// `entry(i, j)` must return the matrix element for `|i - j|` inside the band.
    pub fn factor<F: Fn(usize, usize) -> f64>(n: usize, kl: usize, ku: usize, entry: F) -> Result<Self> {
        let ld = 2 * kl + ku + 1;
        let mut ab = vec![0.0; ld * n];
        let idx = |i: usize, j: usize| -> usize { j * ld + (kl + ku + i - j) };
        for j in 0..n {
            let lo = j.saturating_sub(ku);
            let hi = (j + kl).min(n - 1);
            for i in lo..=hi {
                ab[idx(i, j)] = entry(i, j);
            }
        }
        let mut ipiv = vec![0; n];
        let kv = ku + kl;
        for j in 0..n {
            let last = (j + kl).min(n - 1);
            let mut p = j;
            let mut best = ab[idx(j, j)].abs();
            for i in (j + 1)..=last {
                let v = ab[idx(i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            ipiv[j] = p;
            if best == 0.0 {
                return Err(Error::Singular(format!("banded LU: zero column {j}")));
            }
            let jmax = (j + kv).min(n - 1);
            if p != j {
                for c in j..=jmax {
                    ab.swap(idx(p, c), idx(j, c));
                }
            }
            let piv = ab[idx(j, j)];
            for i in (j + 1)..=last {
                let f = ab[idx(i, j)] / piv;
                ab[idx(i, j)] = f;
                if f != 0.0 {
                    for c in (j + 1)..=jmax {
                        let u = ab[idx(j, c)];
                        ab[idx(i, c)] -= f * u;
                    }
                }
            }
        }
        Ok(Self { n, kl, ku, ld, ab, ipiv })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let kv = self.kl + self.ku;
        let idx = |i: usize, j: usize| -> usize { j * self.ld + (kv + i - j) };
        let mut x = rhs.to_vec();
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                x.swap(p, j);
            }
            let last = (j + self.kl).min(n - 1);
            let xj = x[j];
            for i in (j + 1)..=last {
                x[i] -= self.ab[idx(i, j)] * xj;
            }
        }
        for j in (0..n).rev() {
            x[j] /= self.ab[idx(j, j)];
            let xj = x[j];
            let first = j.saturating_sub(kv);
            for i in first..j {
                x[i] -= self.ab[idx(i, j)] * xj;
            }
        }
        x
    }
}

/// Find a root of a continuous function on a bracketing interval by
/// bisection refined with secant steps (Illinois variant).
pub fn bracketed_root<F: FnMut(f64) -> Result<f64>>(mut f: F, mut a: f64, mut b: f64, xtol: f64, max_iter: usize) -> Result<f64> {
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Precondition("root not bracketed".into()));
    }
    let mut side = 0i32;
    for _ in 0..max_iter {
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = f(c)?;
        if fc == 0.0 || (b - a).abs() < xtol {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() < xtol {
            return Ok(0.5 * (a + b));
        }
    }
    Ok(0.5 * (a + b))
}

/// Dormand-Prince 5(4) integration of `y' = f(t, y)` from `t0` to `t1`,
/// returning the state at `t1`.
pub fn dopri5<F: Fn(f64, &[f64]) -> Vec<f64>>(f: &F, t0: f64, y0: &[f64], t1: f64, rtol: f64, atol: f64) -> Result<Vec<f64>> {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let n = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y);
    }
    let dir = span.signum();
    let mut h = span;
    let mut steps = 0usize;
    while (t1 - t) * dir > 0.0 {
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
        for s in 0..7 {
            let mut ys = y.clone();
            for (r, kr) in k.iter().enumerate() {
                let a = A[s][r];
                if a != 0.0 {
                    for i in 0..n {
                        ys[i] += h * a * kr[i];
                    }
                }
            }
            k.push(f(t + C[s] * h, &ys));
        }
        let mut err = 0.0f64;
        let mut ynew = y.clone();
        for i in 0..n {
            let mut y5 = y[i];
            let mut y4 = y[i];
            for s in 0..7 {
                y5 += h * B5[s] * k[s][i];
                y4 += h * B4[s] * k[s][i];
            }
            let sc = atol + rtol * y[i].abs().max(y5.abs());
            err = err.max(((y5 - y4) / sc).abs());
            ynew[i] = y5;
        }
        if err <= 1.0 {
            t += h;
            y = ynew;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        steps += 1;
        if steps > 1_000_000 || h.abs() < 1e-14 * span.abs() {
            return Err(Error::NotConverged("adaptive stepper stalled".into()));
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_exp() {
        let v = adaptive_simpson(&|x: f64| Ok(x.exp()), 0.0, 1.0, 1e-13).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn gauss_rule_is_exact_for_degree_nine() {
        let v: f64 = GAUSS5.iter().map(|(x, w)| w * x.powi(9)).sum();
        assert!((v - 0.1).abs() < 1e-15);
    }

    #[test]
    fn banded_lu_matches_dense() {
        let n = 9;
        let entry = |i: usize, j: usize| -> f64 {
            let d = i as i64 - j as i64;
            match d {
                0 => 0.1 * i as f64 - 0.3,
                1 | -1 => 1.0 + 0.01 * (i + j) as f64,
                2 | -2 => -0.5,
                _ => 0.0,
            }
        };
        let lu = BandedLu::factor(n, 2, 2, entry).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = lu.solve(&b);
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                if (i as i64 - j as i64).abs() <= 2 {
                    s += entry(i, j) * x[j];
                }
            }
            assert!((s - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn tridiagonal_solvers_agree() {
        let diag = vec![4.0, 5.0, 6.0, 5.0];
        let off = vec![1.0, -1.0, 2.0];
        let rhs = vec![1.0, 2.0, 3.0, 4.0];
        let x = solve_tridiagonal(&off, &diag, &off, &rhs).unwrap();
        let y = TridiagCholesky::new(&diag, &off).unwrap().solve(&rhs);
        for i in 0..4 {
            assert!((x[i] - y[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn root_of_cubic() {
        let r = bracketed_root(|x| Ok(x * x * x - 2.0), 0.0, 2.0, 1e-15, 200).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn dopri_matches_rotation() {
        let f = |_t: f64, y: &[f64]| vec![-y[1], y[0]];
        let y = dopri5(&f, 0.0, &[1.0, 0.0], 2.0, 1e-12, 1e-14).unwrap();
        assert!((y[0] - 2f64.cos()).abs() < 1e-10 && (y[1] - 2f64.sin()).abs() < 1e-10);
    }
}
