//! One-well problem: geodesics to a non-degenerate well, area-constrained
//! integral curves of `V_beta`, the constraint shift between `P` and `A~`,
//! approach-rate classification, calibration certificates and the
//! accumulation-of-area sequence for wells that are too flat.

use std::f64::consts::PI;

use nalgebra::Complex;
use serde::Serialize;

use crate::curves::{Param, SampledCurve};
use crate::error::{Error, Result};
use crate::geom::{expm2, Mat2, Vec2};
use crate::numerics::{adaptive_simpson, bracketed_root, dopri5};
use crate::potentials::{Potential, WellData};
use crate::series::{lambda_matrix, GBetaSeries};

/// Default node count for solver output.
pub const DEFAULT_NODES: usize = 4096;
/// The flow stops once within this fraction of `|p0 - well|` of the well.
pub const STOP_FRACTION: f64 = 1e-8;
/// Tolerance on the series identity along an analytic-case curve.
pub const SERIES_TOLERANCE: f64 = 1e-6;

/// Eigenvalues of `Lambda_beta` and whether the approach spirals.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ApproachSpectrum {
    pub mu_plus: Complex<f64>,
    pub mu_minus: Complex<f64>,
    pub spiral: bool,
    pub threshold: f64,
}

impl ApproachSpectrum {
    /// Slowest exponential decay rate, `-max Re mu`.
    pub fn decay_rate(&self) -> f64 {
        -self.mu_plus.re.max(self.mu_minus.re)
    }
}

/// Closed-form `mu_+-` of `Lambda_beta`: trace `-(l1 + l2) sin(beta)`, determinant `l1 l2`.
pub fn approach_spectrum(l1: f64, l2: f64, beta: f64) -> ApproachSpectrum {
    let (s, c) = beta.sin_cos();
    let threshold = 2.0 * (l1 * l2).sqrt() / (l1 + l2);
    let half_trace = -0.5 * s * (l1 + l2);
    // |sin| < threshold  <=>  cos^2 > ((l1 - l2) / (l1 + l2))^2, written with
    // the cosine so it stays resolved where sin rounds to 1
    let disc = 0.25 * ((l1 - l2) * (l1 - l2) - (l1 + l2) * (l1 + l2) * c * c);
    let (mu_plus, mu_minus) = if disc >= 0.0 {
        let r = disc.sqrt();
        (Complex::new(half_trace + r, 0.0), Complex::new(half_trace - r, 0.0))
    } else {
        let r = (-disc).sqrt();
        (Complex::new(half_trace, r), Complex::new(half_trace, -r))
    };
    ApproachSpectrum { mu_plus, mu_minus, spiral: disc < 0.0, threshold }
}

/// Result of a one-well solve. The curve runs from `p0` to the well and is
/// parametrized by degenerate arclength.
#[derive(Clone, Debug, Serialize)]
pub struct OneWellSolution {
    pub beta: f64,
    #[serde(skip)]
    pub curve: SampledCurve,
    #[serde(rename = "L_beta")]
    pub l_beta: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "A_tilde")]
    pub a_tilde: f64,
    pub spectrum: ApproachSpectrum,
    pub euclidean_length: f64,
    /// Upper bound on the Euclidean length of the exact curve.
    pub euclidean_bound: f64,
    pub rtilde0: f64,
    /// `max |F |gamma'| - 1|` over interior nodes.
    pub speed_residual: f64,
    /// Largest `|W - |grad g + Lambda q|^2|` along the curve (analytic case).
    pub residual_wexp: Option<f64>,
    pub well: WellData,
    pub p0: Vec2,
    #[serde(skip)]
    pub series: Option<GBetaSeries>,
}

impl OneWellSolution {
    /// `W` of the model the curve was computed for, at a global point.
    pub fn model_w(&self, p: Vec2) -> f64 {
        let q = self.well.to_local(p);
        match &self.series {
            Some(g) => g.w_value(q),
            None => self.well.quadratic_value(q),
        }
    }

    /// Midpoint-rule energy of the sampled curve under the model potential.
    pub fn energy(&self) -> f64 {
        self.curve.energy_with(|p| self.model_w(p).max(0.0).sqrt())
    }

    /// Discrete momentum of the sampled curve.
    pub fn momentum(&self) -> f64 {
        self.curve.momentum()
    }
}

/// Correction between global and well-frame momentum:
/// `P_global = P_local + phi(q_end) - phi(q_start)`.
fn frame_phi(well: &WellData, q: Vec2) -> f64 {
    let (a, b) = (well.v1.x, well.v1.y);
    let c2 = well.center.y;
    -c2 * (a * q.x - b * q.y) + 0.5 * a * b * (q.y * q.y - q.x * q.x) + b * b * q.x * q.y
}

fn local_start(well: &WellData, p0: Vec2) -> Result<Vec2> {
    if !(p0.x.is_finite() && p0.y.is_finite()) {
        return Err(Error::Precondition("p0 must be finite".into()));
    }
    let q0 = well.to_local(p0);
    if q0.norm() == 0.0 {
        return Err(Error::EmptyCurve("p0 coincides with the well".into()));
    }
    Ok(q0)
}

/// `C = int (omega_0 - omega_1)` along the geodesic from `q0` to the well,
/// by quadrature in the flow time of `z(t) = (q01 e^{-l1 t}, q02 e^{-l2 t})`.
fn geodesic_shift(l1: f64, l2: f64, q0: Vec2) -> Result<f64> {
    let k = l1 / (l1 + l2);
    let integrand = |t: f64| -> Result<f64> {
        let (e1, e2) = ((-l1 * t).exp(), (-l2 * t).exp());
        let z = Vec2::new(q0.x * e1, q0.y * e2);
        let dz = Vec2::new(-l1 * z.x, -l2 * z.y);
        // omega_0 - omega_1 = -k (q2 dq1 + q1 dq2)
        Ok(-k * (z.y * dz.x + z.x * dz.y))
    };
    let t_end = 45.0 / l1.min(l2);
    let scale = (q0.x * q0.y).abs().max(f64::MIN_POSITIVE);
    let mut total = 0.0;
    // split so the adaptive rule sees the fast early decay
    let mut a = 0.0;
    let mut b = 0.5 / (l1 + l2);
    while a < t_end {
        let hi = b.min(t_end);
        total += adaptive_simpson(&integrand, a, hi, 1e-15 * scale)?;
        a = hi;
        b *= 2.0;
    }
    Ok(total)
}

/// `A~ = A_local - C`, where `A_local` is the constraint expressed in the well frame.
pub fn transform_constraint(well: &WellData, p0: Vec2, a: f64) -> Result<f64> {
    let q0 = local_start(well, p0)?;
    let c = geodesic_shift(well.lambda1(), well.lambda2(), q0)?;
    Ok(a + frame_phi(well, q0) - c)
}

/// The angle with `r~(p0) cot(beta) / (l1 + l2) = A~`, in `(0, pi)`.
pub fn solve_beta(well: &WellData, p0: Vec2, a_tilde: f64) -> Result<f64> {
    let q0 = local_start(well, p0)?;
    let r0 = well.rtilde(q0);
    Ok(beta_from(r0, well.lambda1() + well.lambda2(), a_tilde))
}

fn beta_from(r0: f64, lsum: f64, a_tilde: f64) -> f64 {
    1.0f64.atan2(a_tilde * lsum / r0)
}

/// Cumulative node density `int_0^t (e^{-2 a s / 3} + 0.02) ds`.
fn density_cdf(a: f64, t: f64) -> f64 {
    1.5 / a * (1.0 - (-2.0 * a * t / 3.0).exp()) + 0.02 * t
}

/// Flow times `0 = t_0 < ... < t_{m-1} = t_end`, denser where the curve is long.
fn time_grid(a: f64, t_end: f64, m: usize) -> Vec<f64> {
    let total = density_cdf(a, t_end);
    let mut out = Vec::with_capacity(m);
    let mut lo = 0.0;
    for k in 0..m {
        if k == 0 {
            out.push(0.0);
            continue;
        }
        if k == m - 1 {
            out.push(t_end);
            continue;
        }
        let target = total * k as f64 / (m - 1) as f64;
        let mut hi = t_end;
        let mut l = lo;
        for _ in 0..80 {
            let mid = 0.5 * (l + hi);
            if density_cdf(a, mid) < target {
                l = mid;
            } else {
                hi = mid;
            }
        }
        lo = 0.5 * (l + hi);
        out.push(lo);
    }
    out
}

fn check_nodes(n: usize) -> Result<()> {
    if n < 8 {
        return Err(Error::Precondition(format!("need at least 8 nodes, got {n}")));
    }
    Ok(())
}

/// Exact flow of `q' = Lambda_beta q` from `q0` sampled on a time grid,
/// followed by the well itself.
fn quadratic_flow(well: &WellData, q0: Vec2, beta: f64, n: usize) -> Result<(Vec<Vec2>, Vec<f64>, f64)> {
    let (l1, l2) = (well.lambda1(), well.lambda2());
    let lam = lambda_matrix(l1, l2, beta);
    let spec = approach_spectrum(l1, l2, beta);
    let rate = spec.decay_rate();
    let r0 = well.rtilde(q0);
    let s = beta.sin();
    let delta = STOP_FRACTION * q0.norm();
    let target = 0.5 * l1 * delta * delta;
    let rt = |t: f64| well.rtilde(expm2(&lam, t) * q0);
    let mut hi = (q0.norm() / delta).ln() / rate;
    while rt(hi) > target {
        hi *= 1.5;
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if rt(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let times = time_grid(rate, hi, n - 1);
    let mut pts = Vec::with_capacity(n);
    let mut ell = Vec::with_capacity(n);
    let mut speed_residual = 0.0f64;
    for (k, t) in times.iter().enumerate() {
        let q = if k == 0 { q0 } else { expm2(&lam, *t) * q0 };
        pts.push(well.to_global(q));
        ell.push((r0 - well.rtilde(q)) / s);
        if k > 0 {
            let f = well.quadratic_value(q).sqrt();
            speed_residual = speed_residual.max(((lam * q).norm() / f - 1.0).abs());
        }
    }
    pts.push(well.center);
    ell.push(r0 / s);
    Ok((pts, ell, speed_residual))
}

fn euclidean_bound(r0: f64, l1: f64, beta: f64) -> f64 {
    (2.0 * r0 / l1).sqrt() / beta.sin()
}

/// Geodesic from `p0` into the well: the integral curve of `V_{pi/2}`.
pub fn geodesic(well: &WellData, p0: Vec2, n: usize) -> Result<OneWellSolution> {
    check_nodes(n)?;
    let q0 = local_start(well, p0)?;
    let beta = PI / 2.0;
    let c = geodesic_shift(well.lambda1(), well.lambda2(), q0)?;
    quadratic_solution(well, p0, q0, beta, c - frame_phi(well, q0), 0.0, n)
}

/// Node counts are doubled from `n` until the sampled curve reproduces the
/// momentum within `REFINE_TOLERANCE` and its energy within the same relative
/// tolerance; strongly spiralling curves need more than the requested count.
pub const REFINE_TOLERANCE: f64 = 2e-6;
const MAX_NODES: usize = 1 << 21;

fn quadratic_solution(well: &WellData, p0: Vec2, q0: Vec2, beta: f64, a: f64, a_tilde: f64, n: usize) -> Result<OneWellSolution> {
    let r0 = well.rtilde(q0);
    let l_beta = r0 / beta.sin();
    let mut nodes = n;
    loop {
        let (pts, ell, speed_residual) = quadratic_flow(well, q0, beta, nodes)?;
        let curve = SampledCurve::with_params(pts, ell, Param::DegenerateArclength)?;
        let sol = OneWellSolution {
            beta,
            euclidean_length: curve.euclidean_length(),
            curve,
            l_beta,
            a,
            a_tilde,
            spectrum: approach_spectrum(well.lambda1(), well.lambda2(), beta),
            euclidean_bound: euclidean_bound(r0, well.lambda1(), beta),
            rtilde0: r0,
            speed_residual,
            residual_wexp: None,
            well: *well,
            p0,
            series: None,
        };
        let ok = (sol.momentum() - a).abs() <= REFINE_TOLERANCE * a.abs().max(1.0)
            && (sol.energy() - l_beta).abs() <= REFINE_TOLERANCE * l_beta;
        if ok || nodes >= MAX_NODES {
            return Ok(sol);
        }
        nodes = (2 * nodes).min(MAX_NODES);
    }
}

/// Minimizer of the degenerate length from `p0` to the well among curves with
/// momentum `a`. Without a series the well is treated as exactly quadratic
/// and the flow is the matrix exponential; with a series the field
/// `grad g_beta + Lambda_beta q` is integrated numerically and `beta` is
/// found by matching the achieved momentum over the attainable interval of
/// a sweep. In the quadratic case `n` is a minimum node count.
pub fn isoperimetric(well: &WellData, p0: Vec2, a: f64, n: usize, gbeta: Option<&GBetaSeries>) -> Result<OneWellSolution> {
    check_nodes(n)?;
    let q0 = local_start(well, p0)?;
    let c = geodesic_shift(well.lambda1(), well.lambda2(), q0)?;
    let a_local = a + frame_phi(well, q0);
    let a_tilde = a_local - c;
    match gbeta {
        None => {
            let beta = beta_from(well.rtilde(q0), well.lambda1() + well.lambda2(), a_tilde);
            quadratic_solution(well, p0, q0, beta, a, a_tilde, n)
        }
        Some(template) => analytic_solution(well, p0, q0, a, a_local, c, n, template),
    }
}

/// State `[q1, q2, ell, P_local]` integrated in flow time.
fn analytic_rhs(g: &GBetaSeries) -> impl Fn(f64, &[f64]) -> Vec<f64> + '_ {
    move |_t, y| {
        let q = Vec2::new(y[0], y[1]);
        let v = g.field(q);
        let w = g.w_value(q).max(0.0);
        vec![v.x, v.y, w.sqrt() * v.norm(), -q.y * v.x]
    }
}

struct AnalyticRun {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
}

fn analytic_run(g: &GBetaSeries, well: &WellData, q0: Vec2, nodes: Option<usize>) -> Result<AnalyticRun> {
    let (l1, l2) = (g.lambda1, g.lambda2);
    let rate = approach_spectrum(l1, l2, g.beta).decay_rate();
    let delta = STOP_FRACTION * q0.norm();
    let target = 0.5 * l1 * delta * delta;
    let t_lin = (q0.norm() / delta).ln() / rate;
    let rhs = analytic_rhs(g);
    let atol = 1e-14 * q0.norm().max(q0.norm_squared());
    let rt = |y: &[f64]| well.rtilde(Vec2::new(y[0], y[1]));
    let grid = match nodes {
        Some(m) => time_grid(rate, t_lin, m),
        None => (0..=32).map(|k| t_lin * k as f64 / 32.0).collect(),
    };
    let mut times = vec![0.0];
    let mut states = vec![vec![q0.x, q0.y, 0.0, 0.0]];
    for w in grid.windows(2) {
        let y = dopri5(&rhs, w[0], states.last().unwrap(), w[1], 1e-12, atol)?;
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::NotConverged("flow left the domain of the series".into()));
        }
        times.push(w[1]);
        states.push(y);
    }
    let step = t_lin / 32.0;
    let mut guard = 0;
    while rt(states.last().unwrap()) > target {
        guard += 1;
        if guard > 4000 {
            return Err(Error::NotConverged("flow did not reach the well".into()));
        }
        let t = *times.last().unwrap();
        let y = dopri5(&rhs, t, states.last().unwrap(), t + step, 1e-12, atol)?;
        times.push(t + step);
        states.push(y);
    }
    Ok(AnalyticRun { times, states })
}

#[allow(clippy::too_many_arguments)]
fn analytic_solution(
    well: &WellData,
    p0: Vec2,
    q0: Vec2,
    a: f64,
    a_local: f64,
    c: f64,
    n: usize,
    template: &GBetaSeries,
) -> Result<OneWellSolution> {
    if (template.center - well.center).norm() > 1e-12 * (1.0 + well.center.norm())
        || (template.lambda1 - well.lambda1()).abs() > 1e-10 * well.lambda1()
        || (template.lambda2 - well.lambda2()).abs() > 1e-10 * well.lambda2()
    {
        return Err(Error::Precondition("series was built for a different well".into()));
    }
    if q0.norm() > template.validity_radius {
        return Err(Error::Precondition(format!(
            "|p0 - well| = {:.4e} exceeds the series validity radius {:.4e}",
            q0.norm(),
            template.validity_radius
        )));
    }
    // momentum reached from p0 for a given angle; None where the series at
    // that angle does not cover p0
    let achieved = |beta: f64| -> Result<Option<f64>> {
        let g = template.with_beta(beta)?;
        if q0.norm() > g.validity_radius {
            return Ok(None);
        }
        match analytic_run(&g, well, q0, None) {
            Ok(run) => Ok(Some(run.states.last().unwrap()[3])),
            Err(Error::NotConverged(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let sweep: Vec<f64> = (1..64).map(|k| PI * k as f64 / 64.0).collect();
    let mut values = Vec::with_capacity(sweep.len());
    for b in &sweep {
        values.push(achieved(*b)?);
    }
    let (lo_val, hi_val) = values
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
    let bracket = sweep
        .windows(2)
        .zip(values.windows(2))
        .find(|(_, v)| matches!((v[0], v[1]), (Some(x), Some(y)) if (x - a_local) * (y - a_local) <= 0.0))
        .map(|(b, _)| (b[0], b[1]));
    let (b0, b1) = bracket.ok_or_else(|| {
        Error::Domain(format!(
            "constraint {a} is outside the attainable interval [{:.6e}, {:.6e}] found by the beta sweep",
            lo_val - frame_phi(well, q0),
            hi_val - frame_phi(well, q0)
        ))
    })?;
    let achieved = |beta: f64| -> Result<f64> {
        achieved(beta)?.ok_or_else(|| Error::NotConverged(format!("series does not cover p0 at beta = {beta}")))
    };
    let beta = bracketed_root(|b| Ok(achieved(b)? - a_local), b0, b1, 1e-14, 200)?;
    let g = template.with_beta(beta)?;
    let run = analytic_run(&g, well, q0, Some(n - 1))?;
    let mut pts = Vec::with_capacity(run.states.len() + 1);
    let mut ell = Vec::with_capacity(run.states.len() + 1);
    let mut speed_residual = 0.0f64;
    let mut residual = 0.0f64;
    for (k, y) in run.states.iter().enumerate() {
        let q = Vec2::new(y[0], y[1]);
        pts.push(well.to_global(q));
        ell.push(y[2]);
        let v = g.field(q);
        let w = g.w_value(q);
        residual = residual.max((w - v.norm_squared()).abs());
        if k > 0 && w > 0.0 {
            // d ell / dt = F |v|, so F |d gamma / d ell| = |v| / F
            speed_residual = speed_residual.max((v.norm() / w.sqrt() - 1.0).abs());
        }
    }
    let _ = &run.times;
    let last = run.states.last().unwrap();
    let q_stop = Vec2::new(last[0], last[1]);
    // remaining length along the linearized flow
    let l_beta = last[2] + well.rtilde(q_stop) / beta.sin();
    pts.push(well.center);
    ell.push(l_beta);
    if residual > SERIES_TOLERANCE {
        return Err(Error::CertificateInvalid(format!(
            "series identity residual {residual:.3e} exceeds {SERIES_TOLERANCE:.1e}; raise the truncation degree or start closer to the well"
        )));
    }
    let curve = SampledCurve::with_params(pts, ell, Param::DegenerateArclength)?;
    let r0 = well.rtilde(q0);
    Ok(OneWellSolution {
        beta,
        euclidean_length: curve.euclidean_length(),
        curve,
        l_beta,
        a,
        a_tilde: a_local - c,
        spectrum: approach_spectrum(well.lambda1(), well.lambda2(), beta),
        euclidean_bound: euclidean_bound(r0, well.lambda1(), beta),
        rtilde0: r0,
        speed_residual,
        residual_wexp: Some(residual),
        well: *well,
        p0,
        series: Some(g),
    })
}

/// `theta(r) = theta0 - (4 A~ / |p0|^2) ln(r / |p0|)` on a geometric radius grid
/// from `|p0|` down to `1e-8 |p0|`, closed off at the origin.
pub fn radial_spiral(p0: Vec2, a_tilde: f64, n: usize) -> Result<SampledCurve> {
    check_nodes(n)?;
    let r0 = p0.norm();
    if r0 == 0.0 {
        return Err(Error::EmptyCurve("p0 coincides with the well".into()));
    }
    let theta0 = p0.y.atan2(p0.x);
    let k = 4.0 * a_tilde / (r0 * r0);
    let m = n - 1;
    let mut pts = Vec::with_capacity(n);
    for i in 0..m {
        let log_ratio = STOP_FRACTION.ln() * i as f64 / (m - 1) as f64;
        let r = r0 * log_ratio.exp();
        let th = theta0 - k * log_ratio;
        pts.push(if i == 0 { p0 } else { Vec2::new(r * th.cos(), r * th.sin()) });
    }
    pts.push(Vec2::zeros());
    SampledCurve::from_points(pts)
}

/// Outcome of comparing a competitor against the calibrated solution.
#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    /// `int omega_beta` (plus `dg` in the analytic case) over the solution.
    pub integral_solution: f64,
    pub integral_candidate: f64,
    pub energy_solution: f64,
    pub energy_candidate: f64,
    #[serde(rename = "L_beta")]
    pub l_beta: f64,
    pub momentum_solution: f64,
    pub momentum_candidate: f64,
    /// Integrals agree within `1e-5`.
    pub integrals_agree: bool,
    /// `E(candidate) >= E(solution) - 1e-6`.
    pub minimal: bool,
}

/// Integral of the calibration form along a polyline in global coordinates.
/// The form is linear in well coordinates, so the midpoint rule is exact per chord.
pub fn calibration_integral(sol: &OneWellSolution, curve: &SampledCurve) -> f64 {
    let (l1, l2) = (sol.well.lambda1(), sol.well.lambda2());
    let (s, c) = sol.beta.sin_cos();
    let omega = |q: Vec2| Vec2::new(-c * l2 * q.y - s * l1 * q.x, c * l1 * q.x - s * l2 * q.y);
    let mut total = 0.0;
    for (a, b) in curve.chords() {
        let (qa, qb) = (sol.well.to_local(a), sol.well.to_local(b));
        total += omega((qa + qb) * 0.5).dot(&(qb - qa));
    }
    if let Some(g) = &sol.series {
        total += g.g(sol.well.to_local(curve.last())) - g.g(sol.well.to_local(curve.first()));
    }
    total
}

pub fn calibration_certificate(sol: &OneWellSolution, candidate: &SampledCurve, pot: &Potential) -> Result<CertificateReport> {
    let scale = sol.curve.bbox_diagonal().max(1e-300);
    if (candidate.first() - sol.curve.first()).norm() > 1e-9 * scale
        || (candidate.last() - sol.curve.last()).norm() > 1e-9 * scale
    {
        return Err(Error::Precondition("candidate must share both endpoints with the solution".into()));
    }
    let momentum_solution = sol.curve.momentum();
    let momentum_candidate = candidate.momentum();
    if (momentum_candidate - momentum_solution).abs() >= 1e-6 {
        return Err(Error::Precondition(format!(
            "candidate momentum {momentum_candidate:.9e} differs from the solution's {momentum_solution:.9e}"
        )));
    }
    let integral_solution = calibration_integral(sol, &sol.curve);
    let integral_candidate = calibration_integral(sol, candidate);
    let energy_solution = sol.curve.energy(pot);
    let energy_candidate = candidate.energy(pot);
    Ok(CertificateReport {
        integral_solution,
        integral_candidate,
        energy_solution,
        energy_candidate,
        l_beta: sol.l_beta,
        momentum_solution,
        momentum_candidate,
        integrals_agree: (integral_solution - integral_candidate).abs() <= 1e-5,
        minimal: energy_candidate >= energy_solution - 1e-6,
    })
}

/// Number of polygon nodes per circle turn in the accumulation sequence.
pub const NODES_PER_TURN: usize = 256;
/// Chords used on the unit segment.
pub const SEGMENT_CHORDS: usize = 1000;

/// `1/(1+q) + 2 pi j r_j^{q+1}` with `r_j = sqrt(|A| / (pi j))`.
pub fn nonexistence_closed_form(q: f64, a: f64, j: usize) -> f64 {
    let r = (a.abs() / (PI * j as f64)).sqrt();
    1.0 / (1.0 + q) + 2.0 * PI * j as f64 * r.powf(q + 1.0)
}

/// Curve from `(1, 0)` to the origin of `F = |p|^q` that collects momentum `a`
/// on `j` small circles, with its midpoint-rule energy. The circle polygons are
/// scaled so that their signed area is exactly `pi r_j^2` per turn.
pub fn nonexistence_sequence(q: f64, a: f64, j: usize) -> Result<(SampledCurve, f64)> {
    if !(q > 1.0) {
        return Err(Error::Precondition(format!("exponent must exceed 1, got {q}")));
    }
    if j == 0 {
        return Err(Error::Precondition("need at least one circle".into()));
    }
    if !a.is_finite() {
        return Err(Error::Precondition("constraint must be finite".into()));
    }
    let r = (a.abs() / (PI * j as f64)).sqrt();
    let m = NODES_PER_TURN;
    let kappa = (2.0 * PI / (m as f64 * (2.0 * PI / m as f64).sin())).sqrt();
    let rho = kappa * r;
    let sign = if a >= 0.0 { 1.0 } else { -1.0 };
    let mut pts = Vec::new();
    let outer = ((1.0 - rho).abs() * SEGMENT_CHORDS as f64).ceil().max(1.0) as usize;
    for i in 0..=outer {
        pts.push(Vec2::new(1.0 - (1.0 - rho) * i as f64 / outer as f64, 0.0));
    }
    if r > 0.0 {
        for _turn in 0..j {
            for k in 1..=m {
                let th = sign * 2.0 * PI * k as f64 / m as f64;
                pts.push(Vec2::new(rho * th.cos(), rho * th.sin()));
            }
            // close each turn on the exact start point
            *pts.last_mut().unwrap() = Vec2::new(rho, 0.0);
        }
    }
    let inner = (rho * SEGMENT_CHORDS as f64).ceil().max(1.0) as usize;
    for i in 1..=inner {
        pts.push(Vec2::new(rho * (1.0 - i as f64 / inner as f64), 0.0));
    }
    let curve = SampledCurve::from_points(pts)?;
    let energy = curve.energy_with(|p| p.norm().powf(q));
    Ok((curve, energy))
}

/// Exact Jacobian of the flow, exposed for the closed-form eigenvalue check.
pub fn linear_matrix(l1: f64, l2: f64, beta: f64) -> Mat2 {
    lambda_matrix(l1, l2, beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn radial() -> WellData {
        WellData::axis_aligned(1.0, 1.0).unwrap()
    }

    #[test]
    fn spectrum_radial_sixth_turn() {
        let s = approach_spectrum(1.0, 1.0, PI / 6.0);
        assert!((s.mu_plus.re + 0.5).abs() < 1e-15);
        assert!((s.mu_plus.im - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!(s.spiral);
        assert_eq!(s.threshold, 1.0);
    }

    #[test]
    fn spectrum_anisotropic_geodesic_is_real() {
        let s = approach_spectrum(1.0, 3.0, PI / 2.0);
        assert!((s.threshold - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!(!s.spiral);
        assert_eq!(s.mu_plus.im, 0.0);
        assert!((s.mu_plus.re + 1.0).abs() < 1e-14 && (s.mu_minus.re + 3.0).abs() < 1e-14);
    }

    #[test]
    fn radial_spiral_flag_near_quarter_turn() {
        assert!(approach_spectrum(1.0, 1.0, PI / 2.0 - 1e-9).spiral);
        let s = approach_spectrum(1.0, 1.0, PI / 2.0);
        assert!(s.mu_plus.im.abs() < 1e-15 && (s.mu_plus.re + 1.0).abs() < 1e-15);
    }

    #[test]
    fn beta_closed_forms() {
        let w = radial();
        assert_eq!(solve_beta(&w, Vec2::new(1.0, 0.0), 0.0).unwrap(), PI / 2.0);
        assert!((solve_beta(&w, Vec2::new(1.0, 0.0), 0.25).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!(solve_beta(&w, Vec2::new(1.0, 0.0), 1e12).unwrap() < 1e-11);
    }

    #[test]
    fn shift_matches_product_formula() {
        let w = WellData::axis_aligned(1.0, 4.0).unwrap();
        let p0 = Vec2::new(1.0, 1.0);
        let at = transform_constraint(&w, p0, 0.0).unwrap();
        assert!((at + 1.0 / 3.0).abs() < 1e-12, "{at}");
        assert_eq!(transform_constraint(&radial(), Vec2::new(1.0, 0.0), 0.7).unwrap(), 0.7);
    }

    #[test]
    fn geodesic_of_anisotropic_well() {
        let w = WellData::axis_aligned(1.0, 4.0).unwrap();
        let sol = geodesic(&w, Vec2::new(1.0, 1.0), 4096).unwrap();
        assert!((sol.l_beta - 1.5).abs() < 1e-15);
        assert!((sol.energy() - 1.5).abs() < 1e-5);
        // nodes lie on z(t) = (e^-t, e^-2t)
        for p in &sol.curve.points()[1..100] {
            assert!((p.y - p.x * p.x).abs() < 1e-13);
        }
        assert!(sol.speed_residual < 1e-12);
    }

    #[test]
    fn geodesic_at_well_is_empty() {
        assert!(matches!(geodesic(&radial(), Vec2::zeros(), 100), Err(Error::EmptyCurve(_))));
    }

    #[test]
    fn isoperimetric_length_identity() {
        let sol = isoperimetric(&radial(), Vec2::new(1.0, 0.0), 0.5, DEFAULT_NODES, None).unwrap();
        let expected = 0.5 * (1.0f64 + 16.0 * 0.25).sqrt();
        assert!((sol.l_beta - expected).abs() < 1e-14);
        assert!((sol.energy() - expected).abs() < 1e-5 * expected, "{}", sol.energy());
        assert!((sol.momentum() - 0.5).abs() < 1e-5, "{}", sol.momentum());
        assert!(sol.euclidean_length <= sol.euclidean_bound);
    }

    #[test]
    fn nonexistence_closed_form_values() {
        assert!((nonexistence_closed_form(2.0, PI, 4) - (1.0 / 3.0 + PI)).abs() < 1e-14);
        let (curve, e) = nonexistence_sequence(2.0, PI, 4).unwrap();
        assert!((curve.momentum() - PI).abs() < 1e-10);
        assert!((e / nonexistence_closed_form(2.0, PI, 4) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn spiral_without_area_is_a_ray() {
        let c = radial_spiral(Vec2::new(0.0, 2.0), 0.0, 50).unwrap();
        assert!(c.points().iter().all(|p| p.x.abs() < 1e-15 && p.y >= 0.0));
    }
}
