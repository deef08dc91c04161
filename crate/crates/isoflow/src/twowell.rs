//! Two-well problem: minimize the degenerate length between the wells among
//! polylines with prescribed momentum, plus the semicircular bubble, the
//! no-bubble threshold and bubble detection.
//!
//! The end chords are geodesic pieces of each well's quadratic model, so
//! their energy and momentum are closed forms and the singular point itself
//! never enters a midpoint rule.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{chord_momentum, Param, SampledCurve};
use crate::error::{Error, Result};
use crate::geom::{rot90, Mat2, Vec2};
use crate::onewell;
use crate::potentials::{GridSpec, HypothesisReport, Potential, WellData};

pub const DEFAULT_NODES: usize = 801;

/// Where a multi-start branch begins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartKind {
    Supplied,
    Segment,
    Bubble,
    OneWellComposite,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimizeOptions {
    /// Augmented-Lagrangian rounds.
    pub rounds: usize,
    pub penalty_start: f64,
    pub penalty_factor: f64,
    /// Bound on the normal component of the Lagrangian gradient per unit length.
    pub tolerance: f64,
    /// Newton steps per normal-offset solve.
    pub max_newton: usize,
    /// Normal-offset solves per round.
    pub max_cycles: usize,
    pub starts: Vec<StartKind>,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            rounds: 8,
            penalty_start: 10.0,
            penalty_factor: 10.0,
            tolerance: 1e-6,
            max_newton: 100,
            max_cycles: 60,
            starts: vec![StartKind::Segment, StartKind::Bubble, StartKind::OneWellComposite],
        }
    }
}

#[derive(Clone, Debug)]
pub struct TwoWellProblem {
    pub pot: Potential,
    pub a0: f64,
    pub n: usize,
    pub opts: MinimizeOptions,
    pub hypotheses: HypothesisReport,
}

impl TwoWellProblem {
    pub fn new(pot: Potential, a0: f64, n: usize, opts: MinimizeOptions) -> Result<Self> {
        if pot.wells().len() != 2 {
            return Err(Error::Precondition(format!("two-well problem needs 2 wells, got {}", pot.wells().len())));
        }
        if n < 5 {
            return Err(Error::Precondition(format!("need at least 5 nodes, got {n}")));
        }
        if !a0.is_finite() {
            return Err(Error::Precondition("constraint must be finite".into()));
        }
        let hypotheses = pot.check_hypotheses(&GridSpec::default());
        Ok(Self { pot, a0, n, opts, hypotheses })
    }

    /// Curve start `p_-` and end `p_+`.
    pub fn endpoints(&self) -> (Vec2, Vec2) {
        (self.pot.wells()[0], self.pot.wells()[1])
    }

    /// Radius used for bubble detection: half the well-ball radius.
    pub fn bubble_radius(&self) -> f64 {
        0.5 * self.hypotheses.ball_radius
    }
}

/// Summary of one multi-start branch.
#[derive(Clone, Debug, Serialize)]
pub struct StartSummary {
    pub start: StartKind,
    pub energy: f64,
    pub momentum: f64,
    pub kkt_residual: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimizerResult {
    #[serde(skip)]
    pub curve: SampledCurve,
    pub energy: f64,
    pub momentum: f64,
    pub kkt_residual: f64,
    pub bubble_count: usize,
    /// Constraint multiplier of the Hamiltonian formulation, `sqrt(2) dE/dA`;
    /// this is the wave speed.
    pub multiplier: f64,
    /// `dE/dA`, the multiplier of the degenerate-length problem.
    pub energy_multiplier: f64,
    pub converged: bool,
    pub start: StartKind,
    pub starts: Vec<StartSummary>,
}

/// Closed curve through `well` with momentum `eps`: the lower half of the
/// vertical diameter, the right half circle, and the upper half of the
/// diameter. The arc polygon radius is scaled so the momentum is exact.
pub fn bubble_semicircle(well: Vec2, eps: f64) -> Result<SampledCurve> {
    if eps == 0.0 || !eps.is_finite() {
        return Err(Error::Precondition("bubble needs a nonzero finite area".into()));
    }
    let r = (2.0 * eps.abs() / PI).sqrt();
    let m = 256usize;
    let rho = r * (PI / (m as f64 * (PI / m as f64).sin())).sqrt();
    let k = 32usize;
    let mut pts = Vec::with_capacity(m + 2 * k + 1);
    for i in 0..k {
        pts.push(well + Vec2::new(0.0, -rho * i as f64 / k as f64));
    }
    for i in 0..=m {
        let th = -PI / 2.0 + PI * i as f64 / m as f64;
        pts.push(well + Vec2::new(rho * th.cos(), rho * th.sin()));
    }
    // exact quarter-turn endpoints keep the diameter vertical
    pts[k] = well + Vec2::new(0.0, -rho);
    pts[k + m] = well + Vec2::new(0.0, rho);
    for i in 1..=k {
        pts.push(well + Vec2::new(0.0, rho * (1.0 - i as f64 / k as f64)));
    }
    let curve = SampledCurve::from_points(pts)?;
    Ok(if eps < 0.0 { curve.reversed() } else { curve })
}

/// `eps_0 = (c0 / c1) (pi / (2 + pi)) r_-^2`.
pub fn epsilon_threshold(c0: f64, c1: f64, r_minus: f64) -> Result<f64> {
    if !(c0 > 0.0 && c1 > 0.0 && r_minus > 0.0) {
        return Err(Error::Precondition("threshold inputs must be positive".into()));
    }
    Ok(c0 / c1 * (PI / (2.0 + PI)) * r_minus * r_minus)
}

/// Number of maximal sub-arcs that enter the `radius`-ball of a well from
/// outside and leave it again.
pub fn detect_bubbles(curve: &SampledCurve, wells: &[Vec2], radius: f64) -> usize {
    let mut count = 0;
    for w in wells {
        let mut states: Vec<bool> = Vec::new();
        for p in curve.points() {
            let near = (p - w).norm() < radius;
            if states.last() != Some(&near) {
                states.push(near);
            }
        }
        count += states.windows(3).filter(|s| !s[0] && s[1] && !s[2]).count();
    }
    count
}

/// Energy, momentum and their derivatives for one piece of the polyline.
struct Piece {
    e: f64,
    p: f64,
    ge: [Vec2; 2],
    gp: [Vec2; 2],
    he: [[Mat2; 2]; 2],
    hp: [[Mat2; 2]; 2],
}

fn outer(a: Vec2, b: Vec2) -> Mat2 {
    a * b.transpose()
}

fn chord_piece(pot: &Potential, a: Vec2, b: Vec2, hess: bool) -> Piece {
    let m = (a + b) * 0.5;
    let d = b - a;
    let len = d.norm().max(1e-300);
    let t = d / len;
    let w = pot.value(m).max(0.0);
    let f = w.sqrt().max(1e-300);
    let gw = pot.grad(m);
    let gf = gw / (2.0 * f);
    let g_m = gf * len;
    let g_d = t * f;
    let (ya, yb) = (a.y + b.y, b.x - a.x);
    let mut piece = Piece {
        e: f * len,
        p: chord_momentum(a, b),
        ge: [g_m * 0.5 - g_d, g_m * 0.5 + g_d],
        gp: [Vec2::new(0.5 * ya, -0.5 * yb), Vec2::new(-0.5 * ya, -0.5 * yb)],
        he: [[Mat2::zeros(); 2]; 2],
        hp: [
            [Mat2::new(0.0, 0.5, 0.5, 0.0), Mat2::new(0.0, 0.5, -0.5, 0.0)],
            [Mat2::new(0.0, -0.5, 0.5, 0.0), Mat2::new(0.0, -0.5, -0.5, 0.0)],
        ],
    };
    if hess {
        let hw = pot.hess(m);
        let hf = hw / (2.0 * f) - outer(gw, gw) / (4.0 * f * f * f);
        let hmm = hf * len;
        let hmd = outer(gf, t);
        let hdd = (Mat2::identity() - outer(t, t)) * (f / len);
        let sym = hmd + hmd.transpose();
        let hab = hmm * 0.25 + hmd * 0.5 - hmd.transpose() * 0.5 - hdd;
        piece.he = [
            [hmm * 0.25 - sym * 0.5 + hdd, hab],
            [hab.transpose(), hmm * 0.25 + sym * 0.5 + hdd],
        ];
    }
    piece
}

/// Quadratic-model geodesic between `x` and a well: energy `r~(q)`, momentum
/// `l1 q1 q2 / (l1 + l2) - phi(q)` toward the well (negated when leaving it).
struct WellPiece {
    e: f64,
    p: f64,
    ge: Vec2,
    gp: Vec2,
    he: Mat2,
    hp: Mat2,
}

fn well_piece(well: &WellData, x: Vec2, leaving: bool) -> WellPiece {
    let (l1, l2) = (well.lambda1(), well.lambda2());
    let v = Mat2::from_columns(&[well.v1, well.v2]);
    let q = well.to_local(x);
    let k = l1 / (l1 + l2);
    let (a, b) = (well.v1.x, well.v1.y);
    let c2 = well.center.y;
    let phi = -c2 * (a * q.x - b * q.y) + 0.5 * a * b * (q.y * q.y - q.x * q.x) + b * b * q.x * q.y;
    let dphi = Vec2::new(-c2 * a - a * b * q.x + b * b * q.y, c2 * b + a * b * q.y + b * b * q.x);
    let hphi = Mat2::new(-a * b, b * b, b * b, a * b);
    let sign = if leaving { -1.0 } else { 1.0 };
    let p = sign * (k * q.x * q.y - phi);
    let gq = (Vec2::new(k * q.y, k * q.x) - dphi) * sign;
    let hq = (Mat2::new(0.0, k, k, 0.0) - hphi) * sign;
    WellPiece {
        e: well.rtilde(q),
        p,
        ge: v * Vec2::new(l1 * q.x, l2 * q.y),
        gp: v * gq,
        he: v * Mat2::new(l1, 0.0, 0.0, l2) * v.transpose(),
        hp: v * hq * v.transpose(),
    }
}

/// Totals and derivatives with respect to interior nodes `1..n-1`.
struct Assembly {
    e: f64,
    p: f64,
    ge: Vec<Vec2>,
    gp: Vec<Vec2>,
    he_diag: Vec<Mat2>,
    he_off: Vec<Mat2>,
    hp_diag: Vec<Mat2>,
    hp_off: Vec<Mat2>,
}

struct Ctx<'a> {
    pot: &'a Potential,
    start: WellData,
    end: WellData,
}

impl Ctx<'_> {
    fn totals(&self, x: &[Vec2]) -> (f64, f64) {
        let n = x.len();
        let s = well_piece(&self.start, x[1], true);
        let t = well_piece(&self.end, x[n - 2], false);
        let mut e = s.e + t.e;
        let mut p = s.p + t.p;
        for k in 1..n - 2 {
            let a = x[k];
            let b = x[k + 1];
            e += self.pot.value((a + b) * 0.5).max(0.0).sqrt() * (b - a).norm();
            p += chord_momentum(a, b);
        }
        (e, p)
    }

    fn assemble(&self, x: &[Vec2], hess: bool) -> Assembly {
        let n = x.len();
        let m = n - 2;
        let mut asm = Assembly {
            e: 0.0,
            p: 0.0,
            ge: vec![Vec2::zeros(); m],
            gp: vec![Vec2::zeros(); m],
            he_diag: vec![Mat2::zeros(); m],
            he_off: vec![Mat2::zeros(); m.saturating_sub(1)],
            hp_diag: vec![Mat2::zeros(); m],
            hp_off: vec![Mat2::zeros(); m.saturating_sub(1)],
        };
        let s = well_piece(&self.start, x[1], true);
        let t = well_piece(&self.end, x[n - 2], false);
        asm.e += s.e + t.e;
        asm.p += s.p + t.p;
        asm.ge[0] += s.ge;
        asm.gp[0] += s.gp;
        asm.he_diag[0] += s.he;
        asm.hp_diag[0] += s.hp;
        asm.ge[m - 1] += t.ge;
        asm.gp[m - 1] += t.gp;
        asm.he_diag[m - 1] += t.he;
        asm.hp_diag[m - 1] += t.hp;
        for k in 1..n - 2 {
            // chord between interior unknowns i = k - 1 and i + 1
            let i = k - 1;
            let c = chord_piece(self.pot, x[k], x[k + 1], hess);
            asm.e += c.e;
            asm.p += c.p;
            asm.ge[i] += c.ge[0];
            asm.ge[i + 1] += c.ge[1];
            asm.gp[i] += c.gp[0];
            asm.gp[i + 1] += c.gp[1];
            asm.he_diag[i] += c.he[0][0];
            asm.he_diag[i + 1] += c.he[1][1];
            asm.he_off[i] += c.he[0][1];
            asm.hp_diag[i] += c.hp[0][0];
            asm.hp_diag[i + 1] += c.hp[1][1];
            asm.hp_off[i] += c.hp[0][1];
        }
        asm
    }
}

fn normals_and_spacing(x: &[Vec2]) -> (Vec<Vec2>, Vec<f64>) {
    let n = x.len();
    let mut normals = Vec::with_capacity(n - 2);
    let mut h = Vec::with_capacity(n - 2);
    for k in 1..n - 1 {
        let (a, b) = ((x[k] - x[k - 1]).norm(), (x[k + 1] - x[k]).norm());
        let t = (x[k + 1] - x[k]) / b.max(1e-300) + (x[k] - x[k - 1]) / a.max(1e-300);
        let t = if t.norm() > 1e-12 { t } else { x[k + 1] - x[k - 1] };
        normals.push(rot90(t).normalize());
        h.push(0.5 * (a + b));
    }
    (normals, h)
}

/// `max_i |n_i . (grad E - nu grad P)_i| / h_i`.
fn kkt(asm: &Assembly, normals: &[Vec2], h: &[f64], nu: f64) -> f64 {
    (0..normals.len())
        .map(|i| (normals[i].dot(&(asm.ge[i] - asm.gp[i] * nu))).abs() / h[i].max(1e-300))
        .fold(0.0, f64::max)
}

/// Thomas algorithm, `None` on a vanishing pivot.
fn thomas(diag: &[f64], off: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    let mut piv = diag[0];
    if piv.abs() < 1e-300 {
        return None;
    }
    c[0] = if m > 1 { off[0] / piv } else { 0.0 };
    d[0] = rhs[0] / piv;
    for i in 1..m {
        piv = diag[i] - off[i - 1] * c[i - 1];
        if piv.abs() < 1e-300 || !piv.is_finite() {
            return None;
        }
        c[i] = if i + 1 < m { off[i] / piv } else { 0.0 };
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / piv;
    }
    for i in (0..m - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Some(d)
}

struct Penalty {
    nu: f64,
    rho: f64,
    a0: f64,
}

impl Penalty {
    fn value(&self, e: f64, p: f64) -> f64 {
        let c = p - self.a0;
        e - self.nu * c + 0.5 * self.rho * c * c
    }
}

/// Damped Newton on normal offsets from `base`. Returns the new nodes, the
/// largest offset and the final normalized residual.
fn normal_newton(ctx: &Ctx, base: &[Vec2], pen: &Penalty, tol: f64, max_newton: usize) -> (Vec<Vec2>, f64, f64) {
    let m = base.len() - 2;
    let (normals, h) = normals_and_spacing(base);
    let mut x = base.to_vec();
    let mut s = vec![0.0; m];
    let mut mu = 0.0f64;
    let mut residual = f64::INFINITY;
    for _ in 0..max_newton {
        let asm = ctx.assemble(&x, true);
        let nut = pen.nu - pen.rho * (asm.p - pen.a0);
        let g: Vec<f64> = (0..m).map(|i| normals[i].dot(&(asm.ge[i] - asm.gp[i] * nut))).collect();
        residual = (0..m).map(|i| g[i].abs() / h[i]).fold(0.0, f64::max);
        if residual <= tol {
            break;
        }
        let diag: Vec<f64> = (0..m)
            .map(|i| normals[i].dot(&((asm.he_diag[i] - asm.hp_diag[i] * nut) * normals[i])))
            .collect();
        let off: Vec<f64> = (0..m - 1)
            .map(|i| normals[i].dot(&((asm.he_off[i] - asm.hp_off[i] * nut) * normals[i + 1])))
            .collect();
        let u: Vec<f64> = (0..m).map(|i| pen.rho.sqrt() * normals[i].dot(&asm.gp[i])).collect();
        let phi0 = pen.value(asm.e, asm.p);
        let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut accepted = false;
        for _ in 0..40 {
            let dd: Vec<f64> = diag.iter().enumerate().map(|(i, d)| d + mu * d.abs().max(1e-12 * h[i])).collect();
            let step = thomas(&dd, &off, &neg_g).zip(thomas(&dd, &off, &u)).map(|(y, z)| {
                let uy: f64 = u.iter().zip(&y).map(|(a, b)| a * b).sum();
                let uz: f64 = u.iter().zip(&z).map(|(a, b)| a * b).sum();
                let f = uy / (1.0 + uz);
                y.iter().zip(&z).map(|(a, b)| a - f * b).collect::<Vec<f64>>()
            });
            let Some(delta) = step.filter(|d| d.iter().all(|v| v.is_finite())) else {
                mu = (mu * 10.0).max(1e-6);
                continue;
            };
            let slope: f64 = g.iter().zip(&delta).map(|(a, b)| a * b).sum();
            if slope >= 0.0 {
                mu = (mu * 10.0).max(1e-6);
                continue;
            }
            let trial: Vec<Vec2> = x
                .iter()
                .enumerate()
                .map(|(k, p)| if k == 0 || k == m + 1 { *p } else { p + normals[k - 1] * delta[k - 1] })
                .collect();
            let (et, pt) = ctx.totals(&trial);
            let phit = pen.value(et, pt);
            // at round-off level the Newton step is accepted as is
            let tiny = slope.abs() < 1e-14 * (1.0 + phi0.abs());
            if phit.is_finite() && (phit <= phi0 + 1e-4 * slope || tiny) {
                for (si, di) in s.iter_mut().zip(&delta) {
                    *si += di;
                }
                x = trial;
                mu = if mu < 1e-9 { 0.0 } else { mu * 0.1 };
                accepted = true;
                break;
            }
            mu = (mu * 10.0).max(1e-6);
        }
        if !accepted {
            break;
        }
    }
    let shift = s.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    (x, shift, residual)
}

struct Outcome {
    start: StartKind,
    points: Vec<Vec2>,
    energy: f64,
    momentum: f64,
    kkt: f64,
    nu: f64,
    converged: bool,
}

fn run_start(problem: &TwoWellProblem, ctx: &Ctx, start: StartKind, seed: &SampledCurve) -> Result<Outcome> {
    let opts = &problem.opts;
    let n = problem.n;
    let mut x = seed.reparam(Param::ConstantSpeed, n, None)?.points().to_vec();
    let scale = seed.bbox_diagonal().max(1e-12);
    let mut pen = Penalty { nu: 0.0, rho: opts.penalty_start, a0: problem.a0 };
    let inner_tol = 0.1 * opts.tolerance;
    for _round in 0..opts.rounds {
        x = SampledCurve::from_points(x)?.reparam(Param::ConstantSpeed, n, None)?.points().to_vec();
        for _cycle in 0..opts.max_cycles {
            let (next, shift, _res) = normal_newton(ctx, &x, &pen, inner_tol, opts.max_newton);
            x = next;
            if shift <= 1e-11 * scale {
                break;
            }
        }
        let (_, p) = ctx.totals(&x);
        pen.nu -= pen.rho * (p - pen.a0);
        pen.rho *= opts.penalty_factor;
    }
    let asm = ctx.assemble(&x, false);
    let (normals, h) = normals_and_spacing(&x);
    let kkt_residual = kkt(&asm, &normals, &h, pen.nu);
    let converged = kkt_residual <= opts.tolerance && (asm.p - problem.a0).abs() <= 1e-8 * (1.0 + problem.a0.abs());
    Ok(Outcome { start, points: x, energy: asm.e, momentum: asm.p, kkt: kkt_residual, nu: pen.nu, converged })
}

fn seeds(problem: &TwoWellProblem, init: Option<&SampledCurve>) -> Result<Vec<(StartKind, SampledCurve)>> {
    let (pm, pp) = problem.endpoints();
    let segment = SampledCurve::from_points(vec![pm, pp])?;
    let mut out = Vec::new();
    if let Some(c) = init {
        let tol = 1e-9 * (1.0 + segment.bbox_diagonal());
        if (c.first() - pm).norm() > tol || (c.last() - pp).norm() > tol {
            return Err(Error::Precondition("initial curve must run from the first well to the second".into()));
        }
        out.push((StartKind::Supplied, c.clone()));
    }
    for kind in &problem.opts.starts {
        match kind {
            StartKind::Segment => out.push((StartKind::Segment, segment.clone())),
            StartKind::Bubble => {
                if problem.a0 != 0.0 {
                    let b = bubble_semicircle(pm, problem.a0)?;
                    out.push((StartKind::Bubble, SampledCurve::concat(&[b, segment.clone()])?));
                }
            }
            StartKind::OneWellComposite => {
                let mid = (pm + pp) * 0.5;
                let wm = problem.pot.well_data(0)?;
                let wp = problem.pot.well_data(1)?;
                let a = 0.5 * problem.a0;
                let left = onewell::isoperimetric(&wm, mid, -a, 256, None)?;
                let right = onewell::isoperimetric(&wp, mid, a, 256, None)?;
                out.push((StartKind::OneWellComposite, SampledCurve::concat(&[left.curve.reversed(), right.curve])?));
            }
            StartKind::Supplied => {}
        }
    }
    Ok(out)
}

/// Insert samples of the quadratic-model geodesic pieces at both ends when a
/// well is anisotropic (for radial wells the pieces are the end chords).
fn with_boundary_pieces(x: &[Vec2], start: &WellData, end: &WellData) -> Result<SampledCurve> {
    let samples = |well: &WellData, from: Vec2| -> Vec<Vec2> {
        if (well.lambda1() - well.lambda2()).abs() <= 1e-12 * well.lambda2() {
            return Vec::new();
        }
        let q0 = well.to_local(from);
        let (l1, l2) = (well.lambda1(), well.lambda2());
        (1..32)
            .map(|k| {
                let t = 40.0 / l1 * (k as f64 / 32.0).powi(2);
                well.to_global(Vec2::new(q0.x * (-l1 * t).exp(), q0.y * (-l2 * t).exp()))
            })
            .collect()
    };
    let n = x.len();
    let mut pts = vec![x[0]];
    let mut head = samples(start, x[1]);
    head.reverse();
    pts.extend(head);
    pts.extend_from_slice(&x[1..n - 1]);
    pts.extend(samples(end, x[n - 2]));
    pts.push(x[n - 1]);
    SampledCurve::from_points(pts)
}

/// Multi-start augmented-Lagrangian minimization; branches run in parallel
/// and the lowest energy among converged branches wins, ties by start order.
pub fn minimize(problem: &TwoWellProblem, init: Option<&SampledCurve>) -> Result<MinimizerResult> {
    let ctx = Ctx { pot: &problem.pot, start: problem.pot.well_data(0)?, end: problem.pot.well_data(1)? };
    let starts = seeds(problem, init)?;
    if starts.is_empty() {
        return Err(Error::Precondition("no start curves selected".into()));
    }
    let outcomes: Vec<Result<Outcome>> = starts.par_iter().map(|(k, c)| run_start(problem, &ctx, *k, c)).collect();
    let outcomes: Vec<Outcome> = outcomes.into_iter().collect::<Result<_>>()?;
    let any_converged = outcomes.iter().any(|o| o.converged);
    let best = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| o.converged || !any_converged)
        .min_by(|(i, a), (j, b)| a.energy.total_cmp(&b.energy).then(i.cmp(j)))
        .map(|(i, _)| i)
        .unwrap();
    let o = &outcomes[best];
    let curve = with_boundary_pieces(&o.points, &ctx.start, &ctx.end)?;
    let (pm, pp) = problem.endpoints();
    Ok(MinimizerResult {
        bubble_count: detect_bubbles(&curve, &[pm, pp], problem.bubble_radius()),
        curve,
        energy: o.energy,
        momentum: o.momentum,
        kkt_residual: o.kkt,
        multiplier: 2f64.sqrt() * o.nu,
        energy_multiplier: o.nu,
        converged: o.converged,
        start: o.start,
        starts: outcomes
            .iter()
            .map(|o| StartSummary { start: o.start, energy: o.energy, momentum: o.momentum, kkt_residual: o.kkt, converged: o.converged })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bubble_radius_and_momentum() {
        let b = bubble_semicircle(Vec2::zeros(), PI / 2.0).unwrap();
        assert!((b.momentum() - PI / 2.0).abs() < 1e-12);
        let top = b.points().iter().fold(0.0f64, |m, p| m.max(p.y));
        assert!((top - 1.0).abs() < 1e-4);
        let r = bubble_semicircle(Vec2::new(1.0, 2.0), -PI / 2.0).unwrap();
        assert!((r.momentum() + PI / 2.0).abs() < 1e-12);
        assert_eq!(r.first(), Vec2::new(1.0, 2.0));
        assert_eq!(r.last(), Vec2::new(1.0, 2.0));
    }

    #[test]
    fn threshold_values() {
        assert!((epsilon_threshold(1.0, 1.0, 1.0).unwrap() - 0.611_015_470_351_657_1).abs() < 1e-12);
        let a = epsilon_threshold(0.7, 1.3, 0.4).unwrap();
        assert!((epsilon_threshold(0.7, 1.3, 0.8).unwrap() - 4.0 * a).abs() < 1e-15);
        assert!((epsilon_threshold(0.7, 2.6, 0.4).unwrap() - 0.5 * a).abs() < 1e-15);
        assert!(epsilon_threshold(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn chord_derivatives_match_differences() {
        let pot = Potential::separable_example();
        let (a, b) = (Vec2::new(-0.3, 0.2), Vec2::new(0.1, 0.35));
        let c = chord_piece(&pot, a, b, true);
        let h = 1e-6;
        for (which, dir) in [(0usize, Vec2::new(1.0, 0.0)), (0, Vec2::new(0.0, 1.0)), (1, Vec2::new(1.0, 0.0)), (1, Vec2::new(0.0, 1.0))] {
            let shift = |s: f64| if which == 0 { chord_piece(&pot, a + dir * s, b, true) } else { chord_piece(&pot, a, b + dir * s, true) };
            let (cp, cm) = (shift(h), shift(-h));
            assert!(((cp.e - cm.e) / (2.0 * h) - c.ge[which].dot(&dir)).abs() < 1e-8);
            assert!(((cp.p - cm.p) / (2.0 * h) - c.gp[which].dot(&dir)).abs() < 1e-9);
            for other in 0..2 {
                let fd = (cp.ge[other] - cm.ge[other]) / (2.0 * h);
                let an = c.he[other][which] * dir;
                assert!((fd - an).norm() < 1e-6, "{fd} vs {an}");
            }
        }
    }

    #[test]
    fn well_piece_matches_sampled_geodesic() {
        let pot = Potential::quadratic(Vec2::new(0.5, -1.0), Mat2::new(2.0, 0.7, 0.7, 1.0)).unwrap();
        let w = pot.well_data(0).unwrap();
        let x = Vec2::new(1.1, -0.4);
        let piece = well_piece(&w, x, false);
        let sol = onewell::geodesic(&w, x, 8192).unwrap();
        assert!((piece.p - sol.momentum()).abs() < 1e-6);
        assert!((piece.e - sol.l_beta).abs() < 1e-14);
        let h = 1e-6;
        for dir in [Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)] {
            let (p, m) = (well_piece(&w, x + dir * h, false), well_piece(&w, x - dir * h, false));
            assert!(((p.p - m.p) / (2.0 * h) - piece.gp.dot(&dir)).abs() < 1e-8);
            assert!(((p.gp - m.gp) / (2.0 * h) - piece.hp * dir).norm() < 1e-7);
            assert!(((p.ge - m.ge) / (2.0 * h) - piece.he * dir).norm() < 1e-7);
        }
        let leaving = well_piece(&w, x, true);
        assert_eq!(leaving.p, -piece.p);
    }

    #[test]
    fn bubble_detection() {
        let pm = Vec2::new(-1.0, 0.0);
        let pp = Vec2::new(1.0, 0.0);
        let axis = SampledCurve::from_points((0..=100).map(|k| Vec2::new(-1.0 + 0.02 * k as f64, 0.0)).collect()).unwrap();
        assert_eq!(detect_bubbles(&axis, &[pm, pp], 0.25), 0);
        let b = bubble_semicircle(pm, 0.3).unwrap();
        let with = SampledCurve::concat(&[b, axis]).unwrap();
        assert_eq!(detect_bubbles(&with, &[pm, pp], 0.25), 1);
    }
}
