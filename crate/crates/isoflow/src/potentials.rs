//! Potentials `W >= 0` with one or two wells, their derivatives, local
//! quadratic data at each well, and grid-sampled hypothesis checks.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{rot90, sym_eigen2, Mat2, Vec2};

/// User supplied potential. Only `value` is required; derivatives default to
/// central differences.
pub trait CallablePotential: Send + Sync {
    fn value(&self, p: Vec2) -> f64;

    fn gradient(&self, p: Vec2) -> Vec2 {
        let h = 1e-6 * (1.0 + p.norm());
        let ex = Vec2::new(h, 0.0);
        let ey = Vec2::new(0.0, h);
        Vec2::new(
            (self.value(p + ex) - self.value(p - ex)) / (2.0 * h),
            (self.value(p + ey) - self.value(p - ey)) / (2.0 * h),
        )
    }

    fn hessian(&self, p: Vec2) -> Mat2 {
        let h = 1e-4 * (1.0 + p.norm());
        let ex = Vec2::new(h, 0.0);
        let ey = Vec2::new(0.0, h);
        let f0 = self.value(p);
        let fxx = (self.value(p + ex) - 2.0 * f0 + self.value(p - ex)) / (h * h);
        let fyy = (self.value(p + ey) - 2.0 * f0 + self.value(p - ey)) / (h * h);
        let fxy = (self.value(p + ex + ey) - self.value(p + ex - ey) - self.value(p - ex + ey)
            + self.value(p - ex - ey))
            / (4.0 * h * h);
        Mat2::new(fxx, fxy, fxy, fyy)
    }
}

/// Tag naming the family a potential belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    QuadraticOneWell,
    RadialPower,
    RadialAnalyticOneWell,
    SeparableDoubleWell,
    GeneralCallable,
}

impl PotentialKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PotentialKind::QuadraticOneWell => "quadratic-one-well",
            PotentialKind::RadialPower => "radial-power",
            PotentialKind::RadialAnalyticOneWell => "radial-analytic-one-well",
            PotentialKind::SeparableDoubleWell => "separable-double-well",
            PotentialKind::GeneralCallable => "general-callable",
        }
    }
}

#[derive(Clone)]
enum Model {
    /// `W = (p - c)^T M (p - c)` with `M` symmetric.
    Quadratic { matrix: Mat2 },
    /// `W = |p - c|^q`.
    RadialPower { exponent: f64 },
    /// `W = r^2 + sum_k a_k r^(2k+2)`, valid for `r < radius`.
    RadialAnalytic { coeffs: Vec<f64>, radius: f64 },
    /// `W = w(p1) + kappa p2^2` with wells at `(-1, 0)` and `(1, 0)`.
    Separable { transverse: f64 },
    Callable(Arc<dyn CallablePotential>),
}

/// A potential together with its wells.
#[derive(Clone)]
pub struct Potential {
    wells: Vec<Vec2>,
    model: Model,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("kind", &self.kind().as_str())
            .field("wells", &self.wells)
            .finish()
    }
}

/// Value, gradient and Hessian of `W` at a point.
#[derive(Clone, Copy, Debug)]
pub struct Evaluation {
    pub value: f64,
    pub grad: Vec2,
    pub hess: Mat2,
}

/// Local quadratic data of a well: `W ~ l1sq q1^2 + l2sq q2^2` in the frame
/// `q = [v1 v2]^T (p - center)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WellData {
    pub center: Vec2,
    pub lambda1_sq: f64,
    pub lambda2_sq: f64,
    pub v1: Vec2,
    pub v2: Vec2,
    /// Radius of the ball on which the local model is exact or the series is valid.
    pub radius: f64,
}

impl WellData {
    /// Well data of the pure quadratic `l1sq q1^2 + l2sq q2^2` at the origin.
    pub fn axis_aligned(lambda1_sq: f64, lambda2_sq: f64) -> Result<Self> {
        if !(lambda1_sq > 0.0 && lambda2_sq > 0.0) {
            return Err(Error::Degenerate("well eigenvalues must be positive".into()));
        }
        let (a, b) = if lambda1_sq <= lambda2_sq { (lambda1_sq, lambda2_sq) } else { (lambda2_sq, lambda1_sq) };
        let v1 = if lambda1_sq <= lambda2_sq { Vec2::new(1.0, 0.0) } else { Vec2::new(0.0, 1.0) };
        Ok(Self { center: Vec2::zeros(), lambda1_sq: a, lambda2_sq: b, v1, v2: rot90(v1), radius: f64::INFINITY })
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1_sq.sqrt()
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2_sq.sqrt()
    }

    /// Global point to well coordinates.
    pub fn to_local(&self, p: Vec2) -> Vec2 {
        let d = p - self.center;
        Vec2::new(self.v1.dot(&d), self.v2.dot(&d))
    }

    /// Well coordinates to a global point.
    pub fn to_global(&self, q: Vec2) -> Vec2 {
        self.center + self.v1 * q.x + self.v2 * q.y
    }

    /// Local quadratic model `l1sq q1^2 + l2sq q2^2`.
    pub fn quadratic_value(&self, q: Vec2) -> f64 {
        self.lambda1_sq * q.x * q.x + self.lambda2_sq * q.y * q.y
    }

    /// `r~(q) = (l1 q1^2 + l2 q2^2) / 2`, the degenerate distance to the well.
    pub fn rtilde(&self, q: Vec2) -> f64 {
        0.5 * (self.lambda1() * q.x * q.x + self.lambda2() * q.y * q.y)
    }
}

/// The bridge used by the separable example on `(-1/2, 1/2)`: the unique
/// even quartic matching value, slope and curvature of `(|x| - 1)^2` at `+-1/2`.
fn bridge(x: f64) -> (f64, f64, f64) {
    let x2 = x * x;
    (0.625 - 2.0 * x2 + 2.0 * x2 * x2, -4.0 * x + 8.0 * x2 * x, -4.0 + 24.0 * x2)
}

/// The even C^2 profile `w` of the separable double well with derivatives.
pub fn separable_profile(x: f64) -> (f64, f64, f64) {
    if x.abs() >= 0.5 {
        let s = x.signum();
        let d = x.abs() - 1.0;
        (d * d, 2.0 * d * s, 2.0)
    } else {
        bridge(x)
    }
}

impl Potential {
    /// `W(p) = (p - center)^T matrix (p - center)`; the matrix is symmetrized.
    pub fn quadratic(center: Vec2, matrix: Mat2) -> Result<Self> {
        let m = (matrix + matrix.transpose()) * 0.5;
        if !m.iter().all(|v| v.is_finite()) {
            return Err(Error::Config("quadratic matrix must be finite".into()));
        }
        let (small, _, _) = sym_eigen2(&m);
        if small < 0.0 {
            return Err(Error::Config("quadratic matrix must be positive semidefinite".into()));
        }
        Ok(Self { wells: vec![center], model: Model::Quadratic { matrix: m } })
    }

    /// `W(p) = |p - center|^exponent`.
    pub fn radial_power(center: Vec2, exponent: f64) -> Result<Self> {
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::Config("radial-power exponent must be positive".into()));
        }
        Ok(Self { wells: vec![center], model: Model::RadialPower { exponent } })
    }

    /// `W(p) = r^2 + sum_k coeffs[k-1] r^(2k+2)` with `r = |p - center|`.
    ///
    /// Without an explicit radius the validity radius is the first positive
    /// zero of `W / r^2`, or infinity when there is none.
    pub fn radial_analytic(center: Vec2, coeffs: Vec<f64>, radius: Option<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config("radial-analytic coefficients must be finite".into()));
        }
        let natural = positivity_radius(&coeffs);
        let radius = match radius {
            Some(r) if r > 0.0 => r.min(natural),
            Some(_) => return Err(Error::Config("radial-analytic radius must be positive".into())),
            None => natural,
        };
        Ok(Self { wells: vec![center], model: Model::RadialAnalytic { coeffs, radius } })
    }

    /// `W(p) = w(p1) + transverse * p2^2` with wells at `(-1, 0)` and `(1, 0)`.
    pub fn separable(transverse: f64) -> Result<Self> {
        if !(transverse > 0.0 && transverse.is_finite()) {
            return Err(Error::Config("separable transverse coefficient must be positive".into()));
        }
        Ok(Self {
            wells: vec![Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0)],
            model: Model::Separable { transverse },
        })
    }

    /// The separable double well with unit transverse stiffness.
    pub fn separable_example() -> Self {
        Self::separable(1.0).expect("unit transverse coefficient is valid")
    }

    /// A general potential given by a callable and its well locations.
    pub fn callable(wells: Vec<Vec2>, f: Arc<dyn CallablePotential>) -> Result<Self> {
        if wells.is_empty() || wells.len() > 2 {
            return Err(Error::Config("a potential needs one or two wells".into()));
        }
        Ok(Self { wells, model: Model::Callable(f) })
    }

    pub fn kind(&self) -> PotentialKind {
        match self.model {
            Model::Quadratic { .. } => PotentialKind::QuadraticOneWell,
            Model::RadialPower { .. } => PotentialKind::RadialPower,
            Model::RadialAnalytic { .. } => PotentialKind::RadialAnalyticOneWell,
            Model::Separable { .. } => PotentialKind::SeparableDoubleWell,
            Model::Callable(_) => PotentialKind::GeneralCallable,
        }
    }

    pub fn wells(&self) -> &[Vec2] {
        &self.wells
    }

    /// Radial series coefficients `a_k` for the radial-analytic kind.
    pub fn radial_coeffs(&self) -> Option<&[f64]> {
        match &self.model {
            Model::RadialAnalytic { coeffs, .. } => Some(coeffs),
            _ => None,
        }
    }

    /// Radius of validity around the wells; infinite when unrestricted.
    pub fn validity_radius(&self) -> f64 {
        match &self.model {
            Model::RadialAnalytic { radius, .. } => *radius,
            _ => f64::INFINITY,
        }
    }

    /// `W(p)` without domain checks.
    pub fn value(&self, p: Vec2) -> f64 {
        match &self.model {
            Model::Quadratic { matrix } => {
                let d = p - self.wells[0];
                d.dot(&(matrix * d))
            }
            Model::RadialPower { exponent } => (p - self.wells[0]).norm().powf(*exponent),
            Model::RadialAnalytic { coeffs, .. } => {
                let s = (p - self.wells[0]).norm_squared();
                radial_h(coeffs, s).0
            }
            Model::Separable { transverse } => separable_profile(p.x).0 + transverse * p.y * p.y,
            Model::Callable(f) => f.value(p),
        }
    }

    /// `F = sqrt(W)`, clamped at zero.
    pub fn conformal(&self, p: Vec2) -> f64 {
        self.value(p).max(0.0).sqrt()
    }

    pub fn grad(&self, p: Vec2) -> Vec2 {
        match &self.model {
            Model::Quadratic { matrix } => matrix * (p - self.wells[0]) * 2.0,
            Model::RadialPower { exponent } => {
                let d = p - self.wells[0];
                let r = d.norm();
                if r == 0.0 {
                    Vec2::zeros()
                } else {
                    d * (exponent * r.powf(exponent - 2.0))
                }
            }
            Model::RadialAnalytic { coeffs, .. } => {
                let d = p - self.wells[0];
                let (_, h1, _) = radial_h(coeffs, d.norm_squared());
                d * (2.0 * h1)
            }
            Model::Separable { transverse } => Vec2::new(separable_profile(p.x).1, 2.0 * transverse * p.y),
            Model::Callable(f) => f.gradient(p),
        }
    }

    pub fn hess(&self, p: Vec2) -> Mat2 {
        match &self.model {
            Model::Quadratic { matrix } => matrix * 2.0,
            Model::RadialPower { exponent } => {
                let q = *exponent;
                let d = p - self.wells[0];
                let r = d.norm();
                if r == 0.0 {
                    if q == 2.0 {
                        Mat2::identity() * 2.0
                    } else if q > 2.0 {
                        Mat2::zeros()
                    } else {
                        Mat2::identity() * f64::INFINITY
                    }
                } else {
                    Mat2::identity() * (q * r.powf(q - 2.0)) + d * d.transpose() * (q * (q - 2.0) * r.powf(q - 4.0))
                }
            }
            Model::RadialAnalytic { coeffs, .. } => {
                let d = p - self.wells[0];
                let (_, h1, h2) = radial_h(coeffs, d.norm_squared());
                Mat2::identity() * (2.0 * h1) + d * d.transpose() * (4.0 * h2)
            }
            Model::Separable { transverse } => Mat2::new(separable_profile(p.x).2, 0.0, 0.0, 2.0 * transverse),
            Model::Callable(f) => f.hessian(p),
        }
    }

    /// Value, gradient and Hessian at `p`, rejecting points outside the
    /// validity radius of the radial-analytic kind.
    pub fn eval(&self, p: Vec2) -> Result<Evaluation> {
        if let Model::RadialAnalytic { radius, .. } = &self.model {
            let r = (p - self.wells[0]).norm();
            if r > *radius {
                return Err(Error::Domain(format!("|p - well| = {r} exceeds the validity radius {radius}")));
            }
        }
        if let Model::RadialPower { exponent } = &self.model {
            if *exponent < 2.0 && p == self.wells[0] {
                return Err(Error::Domain("radial power below 2 is not twice differentiable at the well".into()));
            }
        }
        Ok(Evaluation { value: self.value(p), grad: self.grad(p), hess: self.hess(p) })
    }

    /// Local quadratic data at well `which`.
    pub fn well_data(&self, which: usize) -> Result<WellData> {
        let center = *self
            .wells
            .get(which)
            .ok_or_else(|| Error::Precondition(format!("well index {which} out of range")))?;
        let half = self.hess(center) * 0.5;
        if !half.iter().all(|v| v.is_finite()) {
            return Err(Error::Degenerate("Hessian at the well is not finite".into()));
        }
        let (small, large, v1) = sym_eigen2(&half);
        let scale = large.abs().max(1.0);
        if small < 1e-10 * scale {
            return Err(Error::Degenerate(format!(
                "Hessian at well {which} has minimum eigenvalue {:.3e}; the well is degenerate",
                2.0 * small
            )));
        }
        let radius = match &self.model {
            Model::Quadratic { .. } => f64::INFINITY,
            Model::RadialPower { .. } => f64::INFINITY,
            Model::RadialAnalytic { radius, .. } => *radius,
            Model::Separable { .. } => 0.5,
            Model::Callable(_) => {
                if self.wells.len() == 2 {
                    0.25 * (self.wells[1] - self.wells[0]).norm()
                } else {
                    1.0
                }
            }
        };
        Ok(WellData { center, lambda1_sq: small, lambda2_sq: large, v1, v2: rot90(v1), radius })
    }

    /// The coefficient `l` when `W = l |p - well|^2 + G(|p - well|^2)` with
    /// `G(t) = o(t)` inside the well ball, i.e. `W` is radial about the well.
    pub fn radial_coefficient(&self, which: usize) -> Option<f64> {
        self.wells.get(which)?;
        match &self.model {
            Model::Quadratic { matrix } => {
                let iso = matrix[(0, 1)] == 0.0 && matrix[(0, 0)] == matrix[(1, 1)] && matrix[(0, 0)] > 0.0;
                iso.then_some(matrix[(0, 0)])
            }
            Model::RadialPower { exponent } => (*exponent == 2.0).then_some(1.0),
            Model::RadialAnalytic { .. } => Some(1.0),
            Model::Separable { transverse } => (*transverse == 1.0).then_some(1.0),
            Model::Callable(_) => None,
        }
    }

    /// Whether `W` is exactly quadratic (`W = sum lambda_i^2 q_i^2`) inside the well ball.
    pub fn is_quadratic_near(&self, _which: usize) -> bool {
        matches!(self.model, Model::Quadratic { .. } | Model::Separable { .. })
            || matches!(self.model, Model::RadialPower { exponent } if exponent == 2.0)
    }

    /// Check hypotheses (W1), (W2), (W3) and (W6) on a sampling grid.
    pub fn check_hypotheses(&self, grid: &GridSpec) -> HypothesisReport {
        check_hypotheses(self, grid)
    }
}

/// `h(s) = s + sum_k a_k s^(k+1)` and its first two derivatives in `s = r^2`.
fn radial_h(coeffs: &[f64], s: f64) -> (f64, f64, f64) {
    let mut h = s;
    let mut h1 = 1.0;
    let mut h2 = 0.0;
    let mut pow = s; // s^k
    let mut pow_prev = 1.0; // s^(k-1)
    for (i, a) in coeffs.iter().enumerate() {
        let k = (i + 1) as f64;
        h += a * pow * s;
        h1 += a * (k + 1.0) * pow;
        h2 += a * (k + 1.0) * k * pow_prev;
        pow_prev = pow;
        pow *= s;
    }
    (h, h1, h2)
}

/// First positive `r` where `1 + sum_k a_k r^(2k)` vanishes.
fn positivity_radius(coeffs: &[f64]) -> f64 {
    let ratio = |s: f64| -> f64 {
        let mut v = 1.0;
        let mut pow = 1.0;
        for a in coeffs {
            pow *= s;
            v += a * pow;
        }
        v
    };
    if coeffs.iter().all(|a| *a >= 0.0) {
        return f64::INFINITY;
    }
    let n = 4000;
    let (lo, hi) = (1e-8f64.ln(), 1e8f64.ln());
    let mut prev = 0.0;
    for i in 0..=n {
        let s = (lo + (hi - lo) * i as f64 / n as f64).exp();
        if ratio(s) <= 0.0 {
            let (mut a, mut b) = (prev, s);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if ratio(m) > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            return a.sqrt();
        }
        prev = s;
    }
    f64::INFINITY
}

/// JSON description of a potential: `{"kind", "wells", "params"}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: String,
    pub wells: Vec<[f64; 2]>,
    #[serde(default)]
    pub params: serde_json::Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadraticParams {
    matrix: [[f64; 2]; 2],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RadialPowerParams {
    exponent: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RadialAnalyticParams {
    coeffs: Vec<f64>,
    #[serde(default)]
    radius: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SeparableParams {
    #[serde(default = "unit")]
    transverse: f64,
}

fn unit() -> f64 {
    1.0
}

fn params<T: serde::de::DeserializeOwned>(v: &serde_json::Value, kind: &str) -> Result<T> {
    let v = if v.is_null() { serde_json::Value::Object(Default::default()) } else { v.clone() };
    serde_json::from_value(v).map_err(|e| Error::Config(format!("params for {kind}: {e}")))
}

impl PotentialConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("potential config: {e}")))
    }

    pub fn build(&self) -> Result<Potential> {
        let wells: Vec<Vec2> = self.wells.iter().map(|w| Vec2::new(w[0], w[1])).collect();
        let one_well = |kind: &str| -> Result<Vec2> {
            if wells.len() != 1 {
                return Err(Error::Config(format!("{kind} takes exactly one well")));
            }
            Ok(wells[0])
        };
        match self.kind.as_str() {
            "quadratic-one-well" => {
                let c = one_well(&self.kind)?;
                let p: QuadraticParams = params(&self.params, &self.kind)?;
                let m = Mat2::new(p.matrix[0][0], p.matrix[0][1], p.matrix[1][0], p.matrix[1][1]);
                Potential::quadratic(c, m)
            }
            "radial-power" => {
                let c = one_well(&self.kind)?;
                let p: RadialPowerParams = params(&self.params, &self.kind)?;
                Potential::radial_power(c, p.exponent)
            }
            "radial-analytic-one-well" => {
                let c = one_well(&self.kind)?;
                let p: RadialAnalyticParams = params(&self.params, &self.kind)?;
                Potential::radial_analytic(c, p.coeffs, p.radius)
            }
            "separable-double-well" => {
                let expected = [Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0)];
                if wells.len() != 2 || (wells[0] - expected[0]).norm() > 0.0 || (wells[1] - expected[1]).norm() > 0.0 {
                    return Err(Error::Config("separable-double-well has wells [[-1,0],[1,0]]".into()));
                }
                let p: SeparableParams = params(&self.params, &self.kind)?;
                Potential::separable(p.transverse)
            }
            "general-callable" => Err(Error::Config(
                "general-callable potentials are constructed in code, not from JSON".into(),
            )),
            other => Err(Error::Config(format!("unknown potential kind '{other}'"))),
        }
    }

    /// Config describing an existing potential, when it has a JSON form.
    pub fn describe(pot: &Potential) -> Option<Self> {
        let wells = pot.wells.iter().map(|w| [w.x, w.y]).collect();
        let params = match &pot.model {
            Model::Quadratic { matrix } => serde_json::json!({
                "matrix": [[matrix[(0, 0)], matrix[(0, 1)]], [matrix[(1, 0)], matrix[(1, 1)]]]
            }),
            Model::RadialPower { exponent } => serde_json::json!({ "exponent": exponent }),
            Model::RadialAnalytic { coeffs, radius } => {
                if radius.is_finite() {
                    serde_json::json!({ "coeffs": coeffs, "radius": radius })
                } else {
                    serde_json::json!({ "coeffs": coeffs })
                }
            }
            Model::Separable { transverse } => serde_json::json!({ "transverse": transverse }),
            Model::Callable(_) => return None,
        };
        Some(Self { kind: pot.kind().as_str().to_string(), wells, params })
    }
}

/// Sampling grid for the hypothesis checks: `n x n` points on the square
/// `[-half_width, half_width]^2`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    /// Defaults to `2 (max |p_well| + 1)`.
    pub half_width: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n: 201, half_width: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

/// Outcome of one hypothesis with the point that decided it.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub status: CheckStatus,
    pub witness: Option<[f64; 2]>,
    pub detail: String,
}

impl Check {
    fn new(pass: bool, witness: Option<Vec2>, detail: String) -> Self {
        Self {
            status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
            witness: witness.map(|w| [w.x, w.y]),
            detail,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

/// Hypothesis verdicts and fitted constants.
#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    pub grid_n: usize,
    pub half_width: f64,
    pub w1: Check,
    pub w2: Check,
    pub w3: Check,
    pub w6: Check,
    /// Smallest Hessian eigenvalue over the wells.
    pub lambda: f64,
    /// Growth constant with `grad W . p >= c0 |p|^2` for `|p| >= r0`.
    pub c0: f64,
    pub r0: f64,
    /// Smallest `F` outside the well balls.
    pub m0: f64,
    /// Radius of the well balls used for `m0`, `c0_lbound`, `c1_upper`.
    pub ball_radius: f64,
    /// Best constant with `F >= c0_lbound |p - p_well|` in the balls.
    pub c0_lbound: f64,
    /// Best constant with `F <= c1_upper |p - p_well|` in the balls.
    pub c1_upper: f64,
    /// Constant with `grad W . p >= c0 |p|^2 - c1_global` everywhere sampled.
    pub c1_global: f64,
    /// Sup-norm bound for heteroclinics: `K^2 = max(c1_global / c0, max |p_well|^2)`.
    pub apriori_k: f64,
}

fn check_hypotheses(pot: &Potential, grid: &GridSpec) -> HypothesisReport {
    let wells = pot.wells().to_vec();
    let reach = wells.iter().map(|w| w.norm()).fold(0.0, f64::max);
    let half_width = grid.half_width.unwrap_or(2.0 * (reach + 1.0));
    let n = grid.n.max(3);
    let spacing = 2.0 * half_width / (n - 1) as f64;
    let mut points = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            points.push(Vec2::new(-half_width + spacing * i as f64, -half_width + spacing * j as f64));
        }
    }
    let in_domain = |p: &Vec2| wells.iter().all(|w| (p - w).norm() <= pot.validity_radius()) || pot.validity_radius().is_infinite();
    let values: Vec<Option<f64>> = points.iter().map(|p| if in_domain(p) { Some(pot.value(*p)) } else { None }).collect();

    // (W1)
    let mut w1_pass = true;
    let mut w1_witness = None;
    let mut w1_detail = String::from("W >= 0 on the grid and W vanishes only at the wells");
    for w in &wells {
        let v = pot.value(*w);
        if v.abs() > 1e-14 {
            w1_pass = false;
            w1_witness = Some(*w);
            w1_detail = format!("W = {v:.3e} at a declared well");
        }
    }
    if w1_pass {
        for (p, v) in points.iter().zip(&values) {
            let Some(v) = v else { continue };
            let at_well = wells.iter().any(|w| (p - w).norm() < 1e-12);
            if *v < 0.0 || (!at_well && *v <= 0.0) {
                w1_pass = false;
                w1_witness = Some(*p);
                w1_detail = format!("W = {v:.3e} away from the wells");
                break;
            }
        }
    }
    let w1 = Check::new(w1_pass, w1_witness, w1_detail);

    // (W2)
    let mut lambda = f64::INFINITY;
    let mut lambda_at = wells[0];
    for w in &wells {
        let (small, _, _) = sym_eigen2(&pot.hess(*w));
        let small = if small.is_finite() { small } else { 0.0 };
        if small < lambda {
            lambda = small;
            lambda_at = *w;
        }
    }
    let w2 = Check::new(
        lambda > 1e-10,
        Some(lambda_at),
        format!("smallest Hessian eigenvalue at the wells is {lambda:.6e}"),
    );

    // (W3)
    let mut r_pos = 0.0f64;
    let mut ratios = Vec::with_capacity(points.len());
    for (p, v) in points.iter().zip(&values) {
        let r2 = p.norm_squared();
        if v.is_none() || r2 == 0.0 {
            ratios.push(None);
            continue;
        }
        let ratio = pot.grad(*p).dot(p) / r2;
        if ratio <= 0.0 {
            r_pos = r_pos.max(r2.sqrt());
        }
        ratios.push(Some(ratio));
    }
    let r0 = (2.0 * r_pos).max(r_pos + spacing).min(0.75 * half_width);
    let mut c0 = f64::INFINITY;
    let mut c0_at = None;
    for (p, ratio) in points.iter().zip(&ratios) {
        if let Some(ratio) = ratio {
            if p.norm() >= r0 && *ratio < c0 {
                c0 = *ratio;
                c0_at = Some(*p);
            }
        }
    }
    if !c0.is_finite() {
        c0 = 0.0;
    }
    let w3 = Check::new(
        c0 > 0.0,
        c0_at,
        format!("min of grad W . p / |p|^2 over {r0:.4} <= |p| <= {half_width:.4} is {c0:.6e}"),
    );
    let mut c1_global = 0.0f64;
    for (p, v) in points.iter().zip(&values) {
        if v.is_some() {
            c1_global = c1_global.max(c0 * p.norm_squared() - pot.grad(*p).dot(p));
        }
    }
    let apriori_k = if c0 > 0.0 { (c1_global / c0).max(reach * reach).sqrt() } else { f64::INFINITY };

    // (W6)
    let w6 = if wells.len() != 2 {
        Check { status: CheckStatus::NotApplicable, witness: None, detail: "needs two wells".into() }
    } else if wells.iter().any(|w| w.y.abs() > 1e-12) {
        Check::new(false, Some(wells[0]), "wells are not on the p1-axis".into())
    } else {
        let mut pass = true;
        let mut witness = None;
        'cols: for i in 0..n {
            let x = -half_width + spacing * i as f64;
            let base = pot.value(Vec2::new(x, 0.0));
            for j in 0..n {
                let p = Vec2::new(x, -half_width + spacing * j as f64);
                let v = pot.value(p);
                if v < base - 1e-12 * base.abs().max(1.0) {
                    pass = false;
                    witness = Some(p);
                    break 'cols;
                }
            }
        }
        Check::new(pass, witness, "W(p1, p2) >= W(p1, 0) on every sampled column".into())
    };

    // ball constants
    let mut ball_radius = (0..wells.len())
        .map(|i| pot.well_data(i).map(|d| d.radius).unwrap_or(1.0))
        .fold(f64::INFINITY, f64::min);
    if wells.len() == 2 {
        ball_radius = ball_radius.min(0.5 * (wells[1] - wells[0]).norm());
    }
    ball_radius = ball_radius.min(0.25 * half_width);
    let mut m0 = f64::INFINITY;
    let mut c0_lbound = f64::INFINITY;
    let mut c1_upper = 0.0f64;
    for (p, v) in points.iter().zip(&values) {
        let Some(v) = v else { continue };
        let f = v.max(0.0).sqrt();
        let d = wells.iter().map(|w| (p - w).norm()).fold(f64::INFINITY, f64::min);
        if d >= ball_radius {
            m0 = m0.min(f);
        } else if d > 1e-12 {
            c0_lbound = c0_lbound.min(f / d);
            c1_upper = c1_upper.max(f / d);
        }
    }

    HypothesisReport {
        grid_n: n,
        half_width,
        w1,
        w2,
        w3,
        w6,
        lambda,
        c0,
        r0,
        m0,
        ball_radius,
        c0_lbound,
        c1_upper,
        c1_global,
        apriori_k,
    }
}
