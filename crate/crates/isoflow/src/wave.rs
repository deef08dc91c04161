//! Traveling-wave profiles from isoperimetric curves: the change of variables
//! to equipartition, the fitted wave speed, the Hamiltonian energy, the
//! conserved quantities near a radial well, the second-variation spectrum of a
//! standing wave, and the speed regimes of the well linearization.

use std::io::Write;
use std::path::Path;

use nalgebra::{Complex, DMatrix, DVector, Matrix4, SymmetricEigen};
use serde::{Serialize, Serializer};

use crate::curves::{chord_momentum, SampledCurve};
use crate::error::{Error, Result};
use crate::geom::{apply_j, expm2, point_segment_distance, sym_eigen2, Mat2, Vec2};
use crate::numerics::{BandedLu, GAUSS5};
use crate::onewell;
use crate::potentials::{Potential, WellData};
use crate::series::lambda_matrix;

/// Largest allowed distance between the window ends and the wells.
pub const TAIL_TOLERANCE: f64 = 1e-6;
/// Number of eigenvalues returned by [`second_variation_spectrum`].
pub const EIGEN_COUNT: usize = 6;

/// A planar profile `U(y)` on an increasing grid with derivative samples.
#[derive(Clone, Debug, Serialize)]
pub struct TravelingWaveProfile {
    #[serde(skip)]
    pub y_grid: Vec<f64>,
    #[serde(skip)]
    pub u: Vec<Vec2>,
    #[serde(skip)]
    pub du: Vec<Vec2>,
    /// Least-squares wave speed.
    pub nu: f64,
    #[serde(rename = "H")]
    pub h_value: f64,
    /// `max |U'|^2 / 2 - W(U)|` over the nodes.
    pub equipartition_residual: f64,
    /// Weighted L2 norm of `U'' - grad W + nu J U'` after the fit.
    pub ode_residual: f64,
    /// Weighted L2 norm of `grad W(U)` over the same nodes.
    pub gradient_norm: f64,
    pub max_w: f64,
    pub window: (f64, f64),
    /// Distances of the first and last samples from the nearest well.
    pub end_gaps: (f64, f64),
    /// Radius at which the curve was cut and replaced by linear tails.
    pub truncation_radius: f64,
}

impl TravelingWaveProfile {
    /// Build a profile from samples; `du` defaults to three-point differences.
    pub fn from_samples(y: Vec<f64>, u: Vec<Vec2>, du: Option<Vec<Vec2>>, pot: &Potential) -> Result<Self> {
        if y.len() != u.len() || y.len() < 3 {
            return Err(Error::Precondition("profile needs at least 3 matching samples".into()));
        }
        if y.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Precondition("profile grid must be strictly increasing".into()));
        }
        let du = match du {
            Some(d) if d.len() == u.len() => d,
            Some(_) => return Err(Error::Precondition("derivative samples do not match".into())),
            None => differences(&y, &u),
        };
        let gap = |p: Vec2| pot.wells().iter().map(|w| (p - w).norm()).fold(f64::INFINITY, f64::min);
        let mut profile = Self {
            window: (y[0], y[y.len() - 1]),
            end_gaps: (gap(u[0]), gap(u[u.len() - 1])),
            y_grid: y,
            u,
            du,
            nu: 0.0,
            h_value: 0.0,
            equipartition_residual: 0.0,
            ode_residual: f64::NAN,
            gradient_norm: f64::NAN,
            max_w: 0.0,
            truncation_radius: 0.0,
        };
        profile.equipartition_residual = profile
            .u
            .iter()
            .zip(&profile.du)
            .map(|(p, d)| (0.5 * d.norm_squared() - pot.value(*p)).abs())
            .fold(0.0, f64::max);
        profile.max_w = profile.u.iter().map(|p| pot.value(*p)).fold(0.0, f64::max);
        profile.h_value = hamiltonian_energy(&profile, pot);
        if profile.len() >= 7 {
            let (nu, res) = estimate_speed(&profile, pot)?;
            profile.nu = nu;
            profile.ode_residual = res;
            profile.gradient_norm = weighted_norm(&profile, |i| pot.grad(profile.u[i]));
        }
        Ok(profile)
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Cubic Hermite value and derivative at `y`, clamped to the window.
    pub fn sample(&self, y: f64) -> (Vec2, Vec2) {
        let g = &self.y_grid;
        let n = g.len();
        if y <= g[0] {
            return (self.u[0], self.du[0]);
        }
        if y >= g[n - 1] {
            return (self.u[n - 1], self.du[n - 1]);
        }
        let i = g.partition_point(|v| *v <= y) - 1;
        let h = g[i + 1] - g[i];
        let t = (y - g[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let (a, b, da, db) = (self.u[i], self.u[i + 1], self.du[i], self.du[i + 1]);
        let value = a * (2.0 * t3 - 3.0 * t2 + 1.0) + da * (h * (t3 - 2.0 * t2 + t)) + b * (3.0 * t2 - 2.0 * t3) + db * (h * (t3 - t2));
        let slope = (a - b) * ((6.0 * t2 - 6.0 * t) / h) + da * (3.0 * t2 - 4.0 * t + 1.0) + db * (3.0 * t2 - 2.0 * t);
        (value, slope)
    }

    /// Translate the grid by `shift`.
    pub fn translated(&self, shift: f64) -> Self {
        let mut out = self.clone();
        out.y_grid.iter_mut().for_each(|y| *y += shift);
        out.window = (self.window.0 + shift, self.window.1 + shift);
        out
    }

    /// Columns `y,u1,u2,du1,du2`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["y", "u1", "u2", "du1", "du2"])?;
        for ((y, u), d) in self.y_grid.iter().zip(&self.u).zip(&self.du) {
            wr.write_record([y, &u.x, &u.y, &d.x, &d.y].iter().map(|v| format!("{v:.16e}")))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn write_csv_file<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Three-point derivative on a nonuniform grid, one-sided at the ends.
fn differences(y: &[f64], u: &[Vec2]) -> Vec<Vec2> {
    let n = y.len();
    let mut d = Vec::with_capacity(n);
    for i in 0..n {
        let (l, c, r) = if i == 0 { (0, 1, 2) } else if i == n - 1 { (n - 3, n - 2, n - 1) } else { (i - 1, i, i + 1) };
        // derivative of the quadratic through three samples, evaluated at y[i]
        let (x0, x1, x2) = (y[l], y[c], y[r]);
        let x = y[i];
        let w0 = (2.0 * x - x1 - x2) / ((x0 - x1) * (x0 - x2));
        let w2 = (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1));
        // the three weights sum to zero; differencing keeps constants exact
        d.push((u[l] - u[c]) * w0 + (u[r] - u[c]) * w2);
    }
    d
}

fn interior_weight(y: &[f64], i: usize) -> f64 {
    0.5 * (y[i + 1] - y[i - 1])
}

fn weighted_norm<F: Fn(usize) -> Vec2>(profile: &TravelingWaveProfile, f: F) -> f64 {
    let y = &profile.y_grid;
    (1..y.len() - 1).map(|i| interior_weight(y, i) * f(i).norm_squared()).sum::<f64>().sqrt()
}

fn second_difference(y: &[f64], u: &[Vec2], i: usize) -> Vec2 {
    let (hm, hp) = (y[i] - y[i - 1], y[i + 1] - y[i]);
    ((u[i + 1] - u[i]) / hp - (u[i] - u[i - 1]) / hm) * (2.0 / (hp + hm))
}

fn end_well(pot: &Potential, p: Vec2, tol: f64) -> Option<usize> {
    pot.wells().iter().position(|w| (p - w).norm() <= tol)
}

/// Samples of the linear approach to a well: the model optimum from `x` with
/// momentum `a`, run for a time `length` in the profile variable.
struct Tail {
    well: WellData,
    flow: Mat2,
    q0: Vec2,
}

impl Tail {
    fn new(well: WellData, x: Vec2, a: f64) -> Result<Self> {
        let a_tilde = onewell::transform_constraint(&well, x, a)?;
        let beta = onewell::solve_beta(&well, x, a_tilde)?;
        let flow = lambda_matrix(well.lambda1(), well.lambda2(), beta) * 2f64.sqrt();
        Ok(Self { q0: well.to_local(x), well, flow })
    }

    fn at(&self, tau: f64) -> (Vec2, Vec2) {
        let q = expm2(&self.flow, tau) * self.q0;
        let v = Mat2::from_columns(&[self.well.v1, self.well.v2]);
        (self.well.to_global(q), v * (self.flow * q))
    }

    fn length(&self) -> f64 {
        let r0 = self.q0.norm();
        if r0 <= TAIL_TOLERANCE {
            return 0.0;
        }
        let mut hi = 1.0;
        while self.at(hi).0.metric_distance(&self.well.center) > 0.5 * TAIL_TOLERANCE {
            hi *= 2.0;
            if hi > 1e6 {
                break;
            }
        }
        hi
    }
}

/// Convert a curve to a traveling-wave profile by `dy = |dgamma| / (sqrt 2 F)`.
///
/// Ends at a well are cut at a fixed radius and continued by the linear flow
/// of the well's quadratic model that carries the same remaining momentum.
pub fn to_profile(curve: &SampledCurve, pot: &Potential) -> Result<TravelingWaveProfile> {
    let pts = curve.points();
    let scale = curve.bbox_diagonal();
    if pts.len() < 2 || !(scale > 0.0) {
        return Err(Error::EmptyCurve("profile needs a curve with extent".into()));
    }
    let tol = 1e-9 * (1.0 + scale);
    let start = end_well(pot, pts[0], tol);
    let end = end_well(pot, pts[pts.len() - 1], tol);
    let span = (pts[pts.len() - 1] - pts[0]).norm().max(0.25 * scale);
    let mut delta = f64::INFINITY;
    for w in [start, end].into_iter().flatten() {
        delta = delta.min(pot.well_data(w)?.radius);
    }
    if pot.wells().len() == 2 {
        delta = delta.min(0.5 * (pot.wells()[1] - pot.wells()[0]).norm());
    }
    let delta = 0.5 * delta.min(span);

    let lo = match start {
        Some(w) => pts.iter().position(|p| (p - pot.wells()[w]).norm() >= delta),
        None => Some(0),
    };
    let hi = match end {
        Some(w) => pts.iter().rposition(|p| (p - pot.wells()[w]).norm() >= delta),
        None => Some(pts.len() - 1),
    };
    let (lo, hi) = match (lo, hi) {
        (Some(a), Some(b)) if b > a => (a, b),
        _ => return Err(Error::Grid("curve does not leave the well balls".into())),
    };

    let mut ys = vec![0.0];
    for k in lo..hi {
        let (a, b) = (pts[k], pts[k + 1]);
        let d = b - a;
        if pot.wells().iter().any(|w| point_segment_distance(*w, a, b) <= 1e-12 * scale) {
            return Err(Error::Degenerate("the curve passes through a well".into()));
        }
        let mut inv = 0.0;
        for (x, w) in GAUSS5 {
            let f = pot.conformal(a + d * x);
            if !(f > 1e-14) {
                return Err(Error::Degenerate(format!("W vanishes inside the curve near ({:.6}, {:.6})", (a + d * x).x, (a + d * x).y)));
            }
            inv += w / f;
        }
        ys.push(ys[k - lo] + d.norm() * inv / 2f64.sqrt());
    }
    let interior: Vec<Vec2> = pts[lo..=hi].to_vec();

    let head_tail = match start {
        Some(w) => Some(Tail::new(pot.well_data(w)?, pts[lo], -SampledCurve::from_points(pts[..=lo].to_vec())?.momentum())?),
        None => None,
    };
    let end_tail = match end {
        Some(w) => Some(Tail::new(pot.well_data(w)?, pts[hi], SampledCurve::from_points(pts[hi..].to_vec())?.momentum())?),
        None => None,
    };
    let y_end = *ys.last().unwrap();
    let mut len_head = head_tail.as_ref().map_or(0.0, Tail::length);
    let mut len_end = end_tail.as_ref().map_or(0.0, Tail::length);
    let center = 0.5 * y_end;
    if head_tail.is_some() && end_tail.is_some() {
        let half = (center + len_head).max(y_end - center + len_end);
        len_head = half - center;
        len_end = half - (y_end - center);
    }
    let spacing = |dy: f64| dy.clamp(1e-3, 0.05);

    let mut y = Vec::new();
    let mut u = Vec::new();
    let mut du = Vec::new();
    if let Some(t) = &head_tail {
        let h = spacing(ys[1] - ys[0]);
        let k = (len_head / h).ceil().max(1.0) as usize;
        for j in (1..=k).rev() {
            let tau = len_head * j as f64 / k as f64;
            let (p, v) = t.at(tau);
            y.push(-tau);
            u.push(p);
            du.push(-v);
        }
    }
    let first_interior = y.len();
    y.extend_from_slice(&ys);
    u.extend_from_slice(&interior);
    du.extend(std::iter::repeat_n(Vec2::zeros(), interior.len()));
    if let Some(t) = &end_tail {
        let h = spacing(ys[ys.len() - 1] - ys[ys.len() - 2]);
        let k = (len_end / h).ceil().max(1.0) as usize;
        for j in 1..=k {
            let tau = len_end * j as f64 / k as f64;
            let (p, v) = t.at(tau);
            y.push(y_end + tau);
            u.push(p);
            du.push(v);
        }
    }
    let fd = differences(&y, &u);
    for i in first_interior..first_interior + interior.len() {
        du[i] = fd[i];
    }
    let shift = if head_tail.is_some() && end_tail.is_some() { -center } else { 0.0 };
    y.iter_mut().for_each(|v| *v += shift);
    let mut profile = TravelingWaveProfile::from_samples(y, u, Some(du), pot)?;
    profile.truncation_radius = delta;
    Ok(profile)
}

/// Weighted least-squares `nu` for `U'' - grad W(U) + nu J U' = 0` over the
/// interior nodes, and the post-fit residual norm.
pub fn estimate_speed(profile: &TravelingWaveProfile, pot: &Potential) -> Result<(f64, f64)> {
    let n = profile.len();
    if n < 7 {
        return Err(Error::Precondition("speed fit needs at least 5 interior nodes".into()));
    }
    let y = &profile.y_grid;
    let mut aa = 0.0;
    let mut ar = 0.0;
    let mut parts = Vec::with_capacity(n - 2);
    for i in 1..n - 1 {
        let w = interior_weight(y, i);
        let a = apply_j(profile.du[i]);
        let r = pot.grad(profile.u[i]) - second_difference(y, &profile.u, i);
        aa += w * a.norm_squared();
        ar += w * a.dot(&r);
        parts.push((w, a, r));
    }
    let nu = if aa > 0.0 { ar / aa } else { 0.0 };
    let res = parts.iter().map(|(w, a, r)| w * (a * nu - r).norm_squared()).sum::<f64>().sqrt();
    Ok((nu, res))
}

/// `H = int |U'|^2 / 2 + W(U) dy` with `U` linear between samples.
pub fn hamiltonian_energy(profile: &TravelingWaveProfile, pot: &Potential) -> f64 {
    let (y, u) = (&profile.y_grid, &profile.u);
    let mut total = 0.0;
    for i in 0..u.len().saturating_sub(1) {
        let h = y[i + 1] - y[i];
        let d = u[i + 1] - u[i];
        let pot_part: f64 = GAUSS5.iter().map(|(x, w)| w * pot.value(u[i] + d * *x)).sum();
        total += 0.5 * d.norm_squared() / h + h * pot_part;
    }
    total
}

/// Speed regime of a well linearization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    RealDecay,
    SpiralDecay,
    OscillatoryNoWave,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::RealDecay => "real-decay",
            Regime::SpiralDecay => "spiral-decay",
            Regime::OscillatoryNoWave => "oscillatory-no-wave",
        }
    }
}

fn complex_pairs<S: Serializer>(v: &[Complex<f64>; 4], s: S) -> std::result::Result<S::Ok, S::Error> {
    let pairs: Vec<[f64; 2]> = v.iter().map(|c| [c.re, c.im]).collect();
    pairs.serialize(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub nu: f64,
    pub lambdas: (f64, f64),
    /// Eigenvalues of the first-order system, sorted by real then imaginary part.
    #[serde(serialize_with = "complex_pairs")]
    pub eigenvalues: [Complex<f64>; 4],
    pub regime: Regime,
    pub speed_admissible: bool,
    /// Largest distance of a squared eigenvalue from the closed-form roots.
    pub closed_form_residual: f64,
}

/// The matrix of `Z' = M Z`, `Z = (U, U')`, for the linearization at a well
/// with rates `l1`, `l2` in the well frame.
pub fn linearization_matrix(l1: f64, l2: f64, nu: f64) -> Matrix4<f64> {
    Matrix4::new(
        0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        2.0 * l1 * l1, 0.0, 0.0, -nu,
        0.0, 2.0 * l2 * l2, nu, 0.0,
    )
}

/// Roots of `m^2 + b m + 4 l1^2 l2^2` with `b = nu^2 - 2 (l1^2 + l2^2)`.
pub fn closed_form_mu_squared(l1: f64, l2: f64, nu: f64) -> [Complex<f64>; 2] {
    let b = nu * nu - 2.0 * (l1 * l1 + l2 * l2);
    let disc = Complex::new(b * b - 16.0 * l1 * l1 * l2 * l2, 0.0).sqrt();
    [(disc - b) * 0.5, (-disc - b) * 0.5]
}

pub fn regime_for(l1: f64, l2: f64, nu: f64) -> Regime {
    let v = nu * nu;
    if v <= 2.0 * (l1 - l2) * (l1 - l2) {
        Regime::RealDecay
    } else if v < 2.0 * (l1 + l2) * (l1 + l2) {
        Regime::SpiralDecay
    } else {
        Regime::OscillatoryNoWave
    }
}

pub fn speed_spectrum(well: &WellData, nu: f64) -> Result<SpectralReport> {
    spectrum_for_rates(well.lambda1(), well.lambda2(), nu)
}

/// Eigenvalues of a 4x4 matrix. The nalgebra Schur sweep has no exceptional
/// shifts and stalls on the nearly double roots at small speeds.
fn eigenvalues4(m: &Matrix4<f64>) -> Result<[Complex<f64>; 4]> {
    let dense = faer::Mat::<f64>::from_fn(4, 4, |i, j| m[(i, j)]);
    let ev = dense
        .eigenvalues()
        .map_err(|e| Error::Singular(format!("eigenvalue iteration did not converge: {e:?}")))?;
    Ok([0, 1, 2, 3].map(|k| Complex::new(ev[k].re, ev[k].im)))
}

/// [`speed_spectrum`] for explicit rates.
pub fn spectrum_for_rates(l1: f64, l2: f64, nu: f64) -> Result<SpectralReport> {
    if !(l1 > 0.0 && l2 > 0.0) || !nu.is_finite() {
        return Err(Error::Precondition("rates must be positive and the speed finite".into()));
    }
    let mut eigenvalues = eigenvalues4(&linearization_matrix(l1, l2, nu))?;
    eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let roots = closed_form_mu_squared(l1, l2, nu);
    let closed_form_residual = eigenvalues
        .iter()
        .map(|m| {
            let sq = m * m;
            roots.iter().map(|r| (sq - r).norm() / r.norm().max(1.0)).fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let regime = regime_for(l1, l2, nu);
    Ok(SpectralReport {
        nu,
        lambdas: (l1, l2),
        eigenvalues,
        regime,
        speed_admissible: regime != Regime::OscillatoryNoWave,
        closed_form_residual,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct WellSpeedLimit {
    pub well: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    /// `2 (l1 - l2)^2`: below it the approach does not spiral.
    pub real_decay_limit: f64,
    /// `2 (l1 + l2)^2`: at or above it no finite-energy wave exists.
    pub limit: f64,
}

/// Bound for a well where `W = l |U - p|^2 + G(|U - p|^2)`. The energy
/// integral of `|U - p|^2` gives `8 l`; the bound is also reported as `8 l^2`.
#[derive(Clone, Debug, Serialize)]
pub struct RadialSpeedBound {
    pub well: usize,
    pub coefficient: f64,
    pub bound_linear: f64,
    pub bound_squared: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpeedLimitReport {
    pub wells: Vec<WellSpeedLimit>,
    /// Minimum over the wells of `2 (l1 + l2)^2`.
    pub limit: f64,
    pub radial: Vec<RadialSpeedBound>,
}

pub fn speed_limits(pot: &Potential) -> Result<SpeedLimitReport> {
    let mut wells = Vec::new();
    let mut radial = Vec::new();
    for i in 0..pot.wells().len() {
        let w = pot.well_data(i)?;
        let (l1, l2) = (w.lambda1(), w.lambda2());
        wells.push(WellSpeedLimit {
            well: i,
            lambda1: l1,
            lambda2: l2,
            real_decay_limit: 2.0 * (l1 - l2) * (l1 - l2),
            limit: 2.0 * (l1 + l2) * (l1 + l2),
        });
        if let Some(c) = pot.radial_coefficient(i) {
            radial.push(RadialSpeedBound { well: i, coefficient: c, bound_linear: 8.0 * c, bound_squared: 8.0 * c * c });
        }
    }
    Ok(speed_limits_from(wells, radial))
}

pub fn speed_limits_from(wells: Vec<WellSpeedLimit>, radial: Vec<RadialSpeedBound>) -> SpeedLimitReport {
    let limit = wells.iter().map(|w| w.limit).fold(f64::INFINITY, f64::min);
    SpeedLimitReport { wells, limit, radial }
}

/// Residuals of the exact integrals near a radial well, each a maximum over
/// the profile nodes inside the well ball.
#[derive(Clone, Debug, Serialize)]
pub struct ConservedReport {
    pub applicable: bool,
    pub note: String,
    pub well: usize,
    pub coefficient: Option<f64>,
    pub nodes: usize,
    /// `|U'|^2 / 2 = l |U|^2 + G(|U|^2)`.
    pub energy_integral: f64,
    /// `U' . J U = -(nu / 2) |U|^2`.
    pub rotation_integral: f64,
    /// `|eta'|^2 / 4 + (nu^2 - 8 l) eta^2 / 4 = 2 eta G(eta)`, `eta = |U|^2`.
    pub modulus_integral: f64,
    /// The same identity with coefficient `1/2` on the middle term.
    pub modulus_integral_half_coefficient: f64,
}

/// Check the exact integrals about the last well (relative coordinates).
pub fn conserved_checks(profile: &TravelingWaveProfile, nu: f64, pot: &Potential) -> ConservedReport {
    let which = pot.wells().len() - 1;
    let mut report = ConservedReport {
        applicable: false,
        note: String::new(),
        well: which,
        coefficient: None,
        nodes: 0,
        energy_integral: f64::NAN,
        rotation_integral: f64::NAN,
        modulus_integral: f64::NAN,
        modulus_integral_half_coefficient: f64::NAN,
    };
    let Some(lam) = pot.radial_coefficient(which) else {
        report.note = "W is not radial about the well; the integrals do not apply".into();
        return report;
    };
    let center = pot.wells()[which];
    let mut radius = pot.well_data(which).map(|w| w.radius).unwrap_or(f64::INFINITY);
    if pot.wells().len() == 2 {
        radius = radius.min((pot.wells()[1] - pot.wells()[0]).norm());
    }
    let (mut e5, mut e6, mut e8, mut e8h) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut nodes = 0;
    for (p, d) in profile.u.iter().zip(&profile.du) {
        let q = p - center;
        if q.norm() >= radius {
            continue;
        }
        nodes += 1;
        let eta = q.norm_squared();
        let big_g = pot.value(*p) - lam * eta;
        let deta = 2.0 * q.dot(d);
        e5 = e5.max((0.5 * d.norm_squared() - lam * eta - big_g).abs());
        e6 = e6.max((d.dot(&apply_j(q)) + 0.5 * nu * eta).abs());
        let rhs = 2.0 * eta * big_g;
        let base = 0.25 * deta * deta;
        e8 = e8.max((base + 0.25 * (nu * nu - 8.0 * lam) * eta * eta - rhs).abs());
        e8h = e8h.max((base + 0.5 * (nu * nu - 8.0 * lam) * eta * eta - rhs).abs());
    }
    report.applicable = true;
    report.coefficient = Some(lam);
    report.nodes = nodes;
    report.energy_integral = e5;
    report.rotation_integral = e6;
    report.modulus_integral = e8;
    report.modulus_integral_half_coefficient = e8h;
    report.note = if nodes == 0 { "no profile node inside the well ball".into() } else { String::new() };
    report
}

#[derive(Clone, Debug, Serialize)]
pub struct SecondVariationReport {
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    pub grid_size: usize,
    pub grid_step: f64,
    /// Smallest eigenvalue of `D^2 W` over the two wells.
    pub lambda_ref: f64,
    pub zero_mode: Option<usize>,
    /// `|<phi, U'>| / (|phi| |U'|)` for the zero mode.
    pub zero_mode_correlation: f64,
    /// First eigenvalue above the zero mode.
    pub next_eigenvalue: Option<f64>,
    /// Lowest Dirichlet eigenvalue of `-d^2 + D^2 W(p)` on the window, per end.
    pub end_spectrum_min: [f64; 2],
    pub iterations: usize,
}

/// Lowest [`EIGEN_COUNT`] eigenpairs of `-Phi'' + D^2 W(U) Phi` with Dirichlet
/// ends on `m` uniform points across the profile window.
pub fn second_variation_spectrum(profile: &TravelingWaveProfile, pot: &Potential, m: usize) -> Result<SecondVariationReport> {
    if m < 200 {
        return Err(Error::Precondition(format!("grid size must be at least 200, got {m}")));
    }
    let (y0, y1) = profile.window;
    let n = profile.len();
    let near = |p: Vec2| pot.wells().iter().position(|w| (p - w).norm() <= 1e-3);
    let (Some(wa), Some(wb)) = (near(profile.u[0]), near(profile.u[n - 1])) else {
        return Err(Error::Grid("profile window does not reach the wells; decay conditions need longer tails".into()));
    };
    let end_min = |w: usize| sym_eigen2(&pot.hess(pot.wells()[w])).0;
    let (ma, mb) = (end_min(wa), end_min(wb));
    let lambda_ref = ma.min(mb);
    if !(lambda_ref > 0.0) {
        return Err(Error::Degenerate("well Hessian is not positive".into()));
    }

    let h = (y1 - y0) / (m - 1) as f64;
    let inner = m - 2;
    let dim = 2 * inner;
    let mut hess = Vec::with_capacity(inner);
    let mut slope = Vec::with_capacity(dim);
    for j in 1..=inner {
        let (u, du) = profile.sample(y0 + h * j as f64);
        hess.push(pot.hess(u));
        slope.push(du.x);
        slope.push(du.y);
    }
    let entry = |i: usize, k: usize| -> f64 {
        let (gi, ci) = (i / 2, i % 2);
        let (gk, ck) = (k / 2, k % 2);
        if gi == gk {
            hess[gi][(ci, ck)] + if ci == ck { 2.0 / (h * h) } else { 0.0 }
        } else if ci == ck && gi.abs_diff(gk) == 1 {
            -1.0 / (h * h)
        } else {
            0.0
        }
    };
    let apply = |x: &DVector<f64>| -> DVector<f64> {
        DVector::from_fn(dim, |i, _| {
            let lo = i.saturating_sub(2);
            let hi = (i + 2).min(dim - 1);
            (lo..=hi).map(|k| entry(i, k) * x[k]).sum()
        })
    };
    let sigma = -0.1 * lambda_ref;
    let lu = BandedLu::factor(dim, 2, 2, |i, k| entry(i, k) - if i == k { sigma } else { 0.0 })?;

    let k = EIGEN_COUNT;
    let block = k + 6;
    let mut x = DMatrix::from_fn(dim, block, |i, c| {
        let (g, comp) = (i / 2, i % 2);
        if comp == c % 2 {
            ((c / 2 + 1) as f64 * std::f64::consts::PI * (g + 1) as f64 / (inner + 1) as f64).sin()
        } else {
            0.0
        }
    });
    let mut theta = vec![0.0; block];
    let mut iterations = 0;
    let tol = 1e-10 * (1.0 + 4.0 / (h * h));
    for it in 1..=20000 {
        iterations = it;
        let mut y = DMatrix::zeros(dim, block);
        for c in 0..block {
            let col: Vec<f64> = x.column(c).iter().copied().collect();
            y.set_column(c, &DVector::from_vec(lu.solve(&col)));
        }
        let q = y.qr().q();
        let aq = DMatrix::from_columns(&(0..block).map(|c| apply(&q.column(c).into_owned())).collect::<Vec<_>>());
        let t = q.transpose() * &aq;
        let t = (&t + t.transpose()) * 0.5;
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
        let v = DMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>());
        x = &q * &v;
        let ax = &aq * &v;
        theta = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let worst = (0..k).map(|c| (ax.column(c) - x.column(c) * theta[c]).norm()).fold(0.0, f64::max);
        if worst <= tol {
            break;
        }
    }
    let eigenvalues: Vec<f64> = theta[..k].to_vec();
    let eigenvectors: Vec<Vec<f64>> = (0..k).map(|c| x.column(c).iter().copied().collect()).collect();
    let zero_tol = 1e-4 * lambda_ref;
    let zero_mode = eigenvalues.iter().position(|v| v.abs() <= zero_tol);
    let slope_norm = slope.iter().map(|v| v * v).sum::<f64>().sqrt();
    let zero_mode_correlation = match zero_mode {
        Some(i) if slope_norm > 0.0 => {
            let v = &eigenvectors[i];
            let dot: f64 = v.iter().zip(&slope).map(|(a, b)| a * b).sum();
            let vn = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            dot.abs() / (vn * slope_norm)
        }
        _ => 0.0,
    };
    let next_eigenvalue = zero_mode.and_then(|i| eigenvalues.get(i + 1).copied());
    let base = (std::f64::consts::PI / (y1 - y0)).powi(2);
    Ok(SecondVariationReport {
        eigenvalues,
        eigenvectors,
        grid_size: m,
        grid_step: h,
        lambda_ref,
        zero_mode,
        zero_mode_correlation,
        next_eigenvalue,
        end_spectrum_min: [base + ma, base + mb],
        iterations,
    })
}

/// Exact chord form of the degenerate length used as the reference for the
/// Hamiltonian of a profile: `E = int sqrt W |dU|` along the sampled path.
pub fn path_energy(profile: &TravelingWaveProfile, pot: &Potential) -> f64 {
    let u = &profile.u;
    (0..u.len().saturating_sub(1))
        .map(|i| {
            let d = u[i + 1] - u[i];
            d.norm() * GAUSS5.iter().map(|(x, w)| w * pot.conformal(u[i] + d * *x)).sum::<f64>()
        })
        .sum()
}

/// Signed area swept by the profile path.
pub fn path_momentum(profile: &TravelingWaveProfile) -> f64 {
    profile.u.windows(2).map(|w| chord_momentum(w[0], w[1])).sum()
}
