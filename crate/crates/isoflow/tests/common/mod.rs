//! Oracles shared by the integration and acceptance suites.
#![allow(dead_code)]

use isoflow::curves::chord_momentum;
use isoflow::Vec2;

/// Exact `int_seg |p| |dp|` for a straight chord.
pub fn exact_radial_chord_energy(a: Vec2, b: Vec2) -> f64 {
    let d = b - a;
    let len = d.norm();
    if len == 0.0 {
        return 0.0;
    }
    let h = (a.x * d.y - a.y * d.x).abs() / len;
    let s0 = a.dot(&d) / len;
    let s1 = s0 + len;
    let prim = |s: f64| {
        if h == 0.0 {
            0.5 * s * s.abs()
        } else {
            0.5 * (s * (s * s + h * h).sqrt() + h * h * (s / h).asinh())
        }
    };
    prim(s1) - prim(s0)
}

pub fn exact_radial_energy(pts: &[Vec2]) -> f64 {
    pts.windows(2).map(|w| exact_radial_chord_energy(w[0], w[1])).sum()
}

fn momentum(pts: &[Vec2]) -> f64 {
    pts.windows(2).map(|w| chord_momentum(w[0], w[1])).sum()
}

fn momentum_gradient(pts: &[Vec2]) -> Vec<Vec2> {
    let n = pts.len();
    let mut g = vec![Vec2::zeros(); n];
    for k in 1..n - 1 {
        g[k] = Vec2::new(0.5 * (pts[k + 1].y - pts[k - 1].y), -0.5 * (pts[k + 1].x - pts[k - 1].x));
    }
    g
}

fn midpoint_energy(pts: &[Vec2]) -> f64 {
    pts.windows(2).map(|w| ((w[0] + w[1]) * 0.5).norm() * (w[1] - w[0]).norm()).sum()
}

fn midpoint_gradient(pts: &[Vec2]) -> Vec<Vec2> {
    let n = pts.len();
    let mut g = vec![Vec2::zeros(); n];
    for k in 0..n - 1 {
        let (a, b) = (pts[k], pts[k + 1]);
        let m = (a + b) * 0.5;
        let d = b - a;
        let (mn, dn) = (m.norm().max(1e-14), d.norm().max(1e-14));
        let from_mid = m * (0.5 * dn / mn);
        let from_len = d * (mn / dn);
        g[k] += from_mid - from_len;
        g[k + 1] += from_mid + from_len;
    }
    g[0] = Vec2::zeros();
    g[n - 1] = Vec2::zeros();
    g
}

fn restore_momentum(pts: &mut [Vec2], target: f64) {
    for _ in 0..20 {
        let r = target - momentum(pts);
        if r.abs() < 1e-13 {
            break;
        }
        let g = momentum_gradient(pts);
        let gg: f64 = g.iter().map(|v| v.norm_squared()).sum();
        let t = r / gg;
        for (p, gk) in pts.iter_mut().zip(&g) {
            *p += gk * t;
        }
    }
}

/// `(K + M) x = b` on interior nodes with `K` the 1-D stiffness matrix and `M`
/// the lumped mass, endpoints pinned to zero.
fn sobolev_smooth(g: &[Vec2]) -> Vec<Vec2> {
    let n = g.len();
    let m = n - 2;
    let h = 1.0 / (n - 1) as f64;
    let (diag, off) = (2.0 / h + h, -1.0 / h);
    let mut c = vec![0.0; m];
    let mut d = vec![Vec2::zeros(); m];
    for i in 0..m {
        let denom = diag - if i > 0 { off * c[i - 1] } else { 0.0 };
        c[i] = off / denom;
        d[i] = (g[i + 1] - if i > 0 { d[i - 1] * off } else { Vec2::zeros() }) / denom;
    }
    let mut out = vec![Vec2::zeros(); n];
    for i in (0..m).rev() {
        out[i + 1] = d[i] - if i + 1 < m { out[i + 2] * c[i] } else { Vec2::zeros() };
    }
    out
}

fn dot(a: &[Vec2], b: &[Vec2]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

/// Brute-force minimizer of the energy of `F = |p|` over `n`-node polylines
/// from `(1, 0)` to the origin with momentum `area`: projected gradient descent
/// on the midpoint energy in the discrete `H^1` metric, with a Newton momentum
/// correction each step, started from the straight segment. Returns the exact
/// energy of the final polyline, an upper bound on the constrained minimum.
pub fn brute_force_radial(area: f64, n: usize, iterations: usize) -> f64 {
    let mut pts: Vec<Vec2> = (0..n).map(|k| Vec2::new(1.0 - k as f64 / (n - 1) as f64, 0.0)).collect();
    restore_momentum(&mut pts, area);
    let mut e = midpoint_energy(&pts);
    let mut tau = 0.1;
    for _ in 0..iterations {
        let g = sobolev_smooth(&midpoint_gradient(&pts));
        let gp_raw = momentum_gradient(&pts);
        let gp = sobolev_smooth(&gp_raw);
        let proj = dot(&g, &gp_raw) / dot(&gp, &gp_raw);
        let mut trial: Vec<Vec2> = pts.iter().zip(g.iter().zip(&gp)).map(|(p, (a, b))| p - (a - b * proj) * tau).collect();
        restore_momentum(&mut trial, area);
        let et = midpoint_energy(&trial);
        if et < e {
            pts = trial;
            e = et;
            tau *= 1.2;
        } else {
            tau *= 0.5;
            if tau < 1e-14 {
                break;
            }
        }
    }
    assert!((momentum(&pts) - area).abs() < 1e-9);
    exact_radial_energy(&pts)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Taylor coefficients of the radial closed form, as homogeneous polynomials
/// keyed by degree. `g'(x) = s x (1 - sqrt(1 + u))` with `u = sum a_k x^(2k) / s^2`.
pub fn radial_taylor(coeffs: &[f64], beta: f64, max_degree: usize) -> Vec<(usize, Vec<f64>)> {
    let s = beta.sin();
    let terms = max_degree / 2;
    let u: Vec<f64> = (0..=terms).map(|m| if m == 0 { 0.0 } else { coeffs.get(m - 1).copied().unwrap_or(0.0) / (s * s) }).collect();
    let mut root = vec![0.0; terms + 1];
    root[0] = 1.0;
    for m in 1..=terms {
        let conv: f64 = (1..m).map(|i| root[i] * root[m - i]).sum();
        root[m] = 0.5 * (u[m] - conv);
    }
    let mut out = Vec::new();
    for m in 1..terms {
        let big = m + 1;
        let deg = 2 * big;
        if deg > max_degree {
            break;
        }
        let c = -s * root[m] / deg as f64;
        let mut poly = vec![0.0; deg + 1];
        for i in 0..=big {
            poly[2 * i] = c * binomial(big, i);
        }
        out.push((deg, poly));
    }
    out
}

/// Decaying solution `Re(xi e^{mu y})` of the traveling-wave equation at the
/// radial quadratic well `W = lam |U|^2`, from an eigenvector `(xi, mu xi)`
/// of the first-order matrix. Samples `y = 0, h, ..., 8` with exact slopes.
pub fn manufactured_linear_wave(lam: f64, nu: f64, h: f64) -> (isoflow::Potential, isoflow::wave::TravelingWaveProfile) {
    use isoflow::wave::{closed_form_mu_squared, linearization_matrix, TravelingWaveProfile};
    use nalgebra::{Complex, Vector4};
    let rate = lam.sqrt();
    let roots = closed_form_mu_squared(rate, rate, nu);
    let mu = roots[0].sqrt();
    let mu = if mu.re < 0.0 { mu } else { -mu };
    let xi = [Complex::new(nu, 0.0) * mu, Complex::new(2.0 * lam, 0.0) - mu * mu];
    let m = linearization_matrix(rate, rate, nu).map(|v| Complex::new(v, 0.0));
    let z = Vector4::new(xi[0], xi[1], mu * xi[0], mu * xi[1]);
    assert!((m * z - z * mu).norm() < 1e-12 * z.norm(), "not an eigenvector");
    let pot = isoflow::Potential::quadratic(Vec2::zeros(), isoflow::Mat2::identity() * lam).unwrap();
    let count = (8.0 / h).round() as usize;
    let mut y = Vec::with_capacity(count + 1);
    let mut u = Vec::with_capacity(count + 1);
    let mut du = Vec::with_capacity(count + 1);
    for k in 0..=count {
        let t = h * k as f64;
        let e = (mu * t).exp();
        y.push(t);
        u.push(Vec2::new((xi[0] * e).re, (xi[1] * e).re));
        du.push(Vec2::new((mu * xi[0] * e).re, (mu * xi[1] * e).re));
    }
    let profile = TravelingWaveProfile::from_samples(y, u, Some(du), &pot).unwrap();
    (pot, profile)
}
