//! Sampled planar curves, the degenerate length `E` and the signed-area
//! momentum `P`, reparametrizations and the CSV curve format.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{point_segment_distance, Vec2};
use crate::potentials::Potential;

/// Default node count for functional evaluation.
pub const DEFAULT_NODES: usize = 2048;

/// How the parameter column of a curve relates to its geometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Param {
    /// Parameter in `[0, 1]`, no speed property.
    UniformT,
    /// Equal chord lengths.
    ConstantSpeed,
    /// Parameter equals accumulated degenerate length, `F |gamma'| = 1`.
    DegenerateArclength,
}

/// An immutable ordered sequence of planar points.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledCurve {
    points: Vec<Vec2>,
    params: Vec<f64>,
    param: Param,
    closed: bool,
}

impl SampledCurve {
    /// Open curve with a uniform parameter on `[0, 1]`.
    pub fn from_points(points: Vec<Vec2>) -> Result<Self> {
        let n = points.len();
        let params = uniform_params(n);
        Self::with_params(points, params, Param::UniformT)
    }

    /// Open curve with an explicit parameter column and tag.
    pub fn with_params(points: Vec<Vec2>, params: Vec<f64>, param: Param) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::EmptyCurve(format!("a curve needs at least 2 points, got {}", points.len())));
        }
        if params.len() != points.len() {
            return Err(Error::Precondition("parameter column length differs from point count".into()));
        }
        if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::Precondition("curve points must be finite".into()));
        }
        if points.iter().all(|p| *p == points[0]) {
            return Err(Error::EmptyCurve("all points coincide".into()));
        }
        Ok(Self { points, params, param, closed: false })
    }

    /// Closed curve; a closing chord is implied when the last point differs from the first.
    pub fn closed(points: Vec<Vec2>) -> Result<Self> {
        let mut c = Self::from_points(points)?;
        c.closed = true;
        Ok(c)
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn param(&self) -> Param {
        self.param
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> Vec2 {
        self.points[0]
    }

    pub fn last(&self) -> Vec2 {
        self.points[self.points.len() - 1]
    }

    /// Chords `(a, b)` including the closing chord of a closed curve.
    pub fn chords(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.points.len();
        let closing = if self.closed && self.points[n - 1] != self.points[0] {
            Some((self.points[n - 1], self.points[0]))
        } else {
            None
        };
        self.points.windows(2).map(|w| (w[0], w[1])).chain(closing)
    }

    /// Midpoint-rule degenerate length `sum F(mid) |chord|`.
    pub fn energy(&self, pot: &Potential) -> f64 {
        self.energy_with(|p| pot.conformal(p))
    }

    /// Midpoint-rule length for an arbitrary conformal factor.
    pub fn energy_with<F: Fn(Vec2) -> f64>(&self, f: F) -> f64 {
        self.chords().map(|(a, b)| f((a + b) * 0.5) * (b - a).norm()).sum()
    }

    /// Trapezoidal `-int y dx`, exact on polylines.
    pub fn momentum(&self) -> f64 {
        self.chords().map(|(a, b)| chord_momentum(a, b)).sum()
    }

    pub fn euclidean_length(&self) -> f64 {
        self.chords().map(|(a, b)| (b - a).norm()).sum()
    }

    /// Axis-aligned bounding box diagonal.
    pub fn bbox_diagonal(&self) -> f64 {
        let (mut lo, mut hi) = (self.points[0], self.points[0]);
        for p in &self.points {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (hi - lo).norm()
    }

    /// Orientation-reversed copy.
    pub fn reversed(&self) -> Self {
        let points: Vec<Vec2> = self.points.iter().rev().copied().collect();
        let last = *self.params.last().unwrap();
        let first = self.params[0];
        let params = self.params.iter().rev().map(|t| first + last - t).collect();
        Self { points, params, param: self.param, closed: self.closed }
    }

    /// Resample with `n` nodes and the requested speed property.
    ///
    /// The degenerate-arclength target needs the potential and rejects
    /// interior samples where `W` vanishes.
    pub fn reparam(&self, target: Param, n: usize, pot: Option<&Potential>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Precondition("reparametrization needs n >= 2".into()));
        }
        let mut poly = self.points.clone();
        if self.closed && poly[poly.len() - 1] != poly[0] {
            poly.push(poly[0]);
        }
        let out = match target {
            Param::UniformT => {
                let t0 = self.params[0];
                let t1 = *self.params.last().unwrap();
                let mut params = self.params.clone();
                if poly.len() > params.len() {
                    params.push(t1 + (t1 - t0) / (self.points.len() - 1) as f64);
                }
                let (ta, tb) = (params[0], *params.last().unwrap());
                let pts: Vec<Vec2> =
                    (0..n).map(|i| interpolate(&params, &poly, ta + (tb - ta) * i as f64 / (n - 1) as f64)).collect();
                Self::with_params(pts, uniform_params(n), Param::UniformT)?
            }
            Param::ConstantSpeed => {
                let pts = equal_chords(&poly, n)?;
                Self::with_params(pts, uniform_params(n), Param::ConstantSpeed)?
            }
            Param::DegenerateArclength => {
                let pot = pot.ok_or_else(|| Error::Precondition("degenerate arclength needs a potential".into()))?;
                for (i, p) in poly.iter().enumerate().take(poly.len() - 1).skip(1) {
                    if pot.value(*p) <= 0.0 {
                        return Err(Error::Degenerate(format!("W vanishes at interior sample {i}")));
                    }
                }
                let mut ell = Vec::with_capacity(poly.len());
                ell.push(0.0);
                for w in poly.windows(2) {
                    let e = pot.conformal((w[0] + w[1]) * 0.5) * (w[1] - w[0]).norm();
                    ell.push(ell.last().unwrap() + e);
                }
                let total = *ell.last().unwrap();
                if !(total > 0.0) {
                    return Err(Error::Degenerate("curve has zero degenerate length".into()));
                }
                let params: Vec<f64> = (0..n).map(|i| total * i as f64 / (n - 1) as f64).collect();
                let pts: Vec<Vec2> = params.iter().map(|l| interpolate(&ell, &poly, *l)).collect();
                Self::with_params(pts, params, Param::DegenerateArclength)?
            }
        };
        Ok(out)
    }

    /// Join curves end to start, dropping a repeated junction point.
    pub fn concat(parts: &[SampledCurve]) -> Result<Self> {
        let mut points: Vec<Vec2> = Vec::new();
        for part in parts {
            let mut pts = part.points.clone();
            if part.closed && pts[pts.len() - 1] != pts[0] {
                pts.push(pts[0]);
            }
            if let Some(last) = points.last() {
                if *last == pts[0] {
                    points.extend_from_slice(&pts[1..]);
                    continue;
                }
            }
            points.extend_from_slice(&pts);
        }
        Self::from_points(points)
    }

    /// Write the `param,x,y` CSV format.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["param", "x", "y"])?;
        let mut rows: Vec<(f64, Vec2)> = self.params.iter().copied().zip(self.points.iter().copied()).collect();
        if self.closed && self.last() != self.first() {
            let n = self.params.len();
            let step = (self.params[n - 1] - self.params[0]) / (n - 1) as f64;
            rows.push((self.params[n - 1] + step, self.first()));
        }
        for (t, p) in rows {
            wr.write_record([format!("{t:.16e}"), format!("{:.16e}", p.x), format!("{:.16e}", p.y)])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn write_csv_file<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Read the `param,x,y` CSV format as an open curve with the given tag.
    pub fn read_csv<R: Read>(r: R, param: Param) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let headers = rd.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["param", "x", "y"] {
            return Err(Error::Config(format!("curve CSV header must be 'param,x,y', got '{}'", headers.iter().collect::<Vec<_>>().join(","))));
        }
        let mut params = Vec::new();
        let mut points = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Config("short CSV row".into()))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad number in curve CSV: {e}")))
            };
            params.push(parse(0)?);
            points.push(Vec2::new(parse(1)?, parse(2)?));
        }
        Self::with_params(points, params, param)
    }

    pub fn read_csv_file<P: AsRef<Path>>(path: P, param: Param) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f), param)
    }
}

/// A smooth perturbation of the interior nodes of `curve` with the same
/// endpoints and the same discrete momentum.
pub fn area_preserving_perturbation<R: Rng>(curve: &SampledCurve, amplitude: f64, rng: &mut R) -> SampledCurve {
    let pts = curve.points();
    let n = pts.len();
    let bump = |rng: &mut R| -> Vec<Vec2> {
        let m = rng.gen_range(1..6) as f64;
        let dir = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        (0..n)
            .map(|k| dir * (amplitude * (std::f64::consts::PI * m * k as f64 / (n - 1) as f64).sin()))
            .collect()
    };
    let target = curve.momentum();
    loop {
        let d1 = bump(rng);
        let d2 = bump(rng);
        let base: Vec<Vec2> = pts.iter().zip(&d1).map(|(p, d)| p + d).collect();
        let at = |t: f64| -> f64 {
            let q: Vec<Vec2> = base.iter().zip(&d2).map(|(p, d)| p + d * t).collect();
            q.windows(2).map(|w| chord_momentum(w[0], w[1])).sum::<f64>() - target
        };
        // momentum is quadratic in t
        let (f0, fp, fm) = (at(0.0), at(1.0), at(-1.0));
        let qa = 0.5 * (fp + fm) - f0;
        let qb = 0.5 * (fp - fm);
        let t = if qa.abs() < 1e-300 {
            -f0 / qb
        } else {
            let disc = qb * qb - 4.0 * qa * f0;
            if disc < 0.0 {
                continue;
            }
            let qq = -0.5 * (qb + qb.signum() * disc.sqrt());
            let (r1, r2) = (qq / qa, f0 / qq);
            if r1.abs() < r2.abs() { r1 } else { r2 }
        };
        if !t.is_finite() || t.abs() > 50.0 {
            continue;
        }
        let mut out: Vec<Vec2> = base.iter().zip(&d2).map(|(p, d)| p + d * t).collect();
        out[0] = pts[0];
        out[n - 1] = pts[n - 1];
        return SampledCurve::from_points(out).expect("perturbed curve keeps distinct nodes");
    }
}

/// `-int y dx` over one chord.
#[inline]
pub fn chord_momentum(a: Vec2, b: Vec2) -> f64 {
    -0.5 * (a.y + b.y) * (b.x - a.x)
}

/// Symmetric Hausdorff distance between two polylines (vertex to polyline).
pub fn hausdorff(a: &SampledCurve, b: &SampledCurve) -> f64 {
    one_sided(a.points(), b.points()).max(one_sided(b.points(), a.points()))
}

fn one_sided(from: &[Vec2], to: &[Vec2]) -> f64 {
    let mut worst = 0.0f64;
    for p in from {
        let mut best = f64::INFINITY;
        for w in to.windows(2) {
            // cheap lower bound on the distance to this segment
            let lo = (w[0] - p).norm().min((w[1] - p).norm()) - (w[1] - w[0]).norm();
            if lo >= best {
                continue;
            }
            best = best.min(point_segment_distance(*p, w[0], w[1]));
        }
        worst = worst.max(best);
    }
    worst
}

fn uniform_params(n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Piecewise linear interpolation of points against a nondecreasing key.
fn interpolate(keys: &[f64], pts: &[Vec2], k: f64) -> Vec2 {
    let n = keys.len();
    if k <= keys[0] {
        return pts[0];
    }
    if k >= keys[n - 1] {
        return pts[n - 1];
    }
    let i = keys.partition_point(|v| *v <= k).clamp(1, n - 1);
    let (k0, k1) = (keys[i - 1], keys[i]);
    if k1 == k0 {
        return pts[i];
    }
    let s = (k - k0) / (k1 - k0);
    pts[i - 1] + (pts[i] - pts[i - 1]) * s
}

/// Walk `steps` chords of length `c` along the polyline starting at its
/// first vertex. Returns the points and the arclength position reached;
/// running off the end counts the missing distance beyond the total length.
fn walk(poly: &[Vec2], cum: &[f64], c: f64, steps: usize) -> (Vec<Vec2>, f64) {
    let mut out = Vec::with_capacity(steps + 1);
    let mut p = poly[0];
    let mut seg = 0usize;
    let mut t0 = 0.0f64;
    out.push(p);
    let total = *cum.last().unwrap();
    for _ in 0..steps {
        let mut found = None;
        let mut j = seg;
        let mut start = t0;
        while j + 1 < poly.len() {
            let a = poly[j];
            let d = poly[j + 1] - a;
            let dd = d.norm_squared();
            if dd > 0.0 {
                // |a + t d - p|^2 = c^2
                let f = a - p;
                let bq = f.dot(&d);
                let cq = f.norm_squared() - c * c;
                let disc = bq * bq - dd * cq;
                if disc >= 0.0 {
                    let sq = disc.sqrt();
                    for t in [(-bq - sq) / dd, (-bq + sq) / dd] {
                        if t >= start && t <= 1.0 {
                            found = Some((j, t));
                            break;
                        }
                    }
                }
            }
            if found.is_some() {
                break;
            }
            j += 1;
            start = 0.0;
        }
        match found {
            Some((j, t)) => {
                seg = j;
                t0 = t;
                p = poly[j] + (poly[j + 1] - poly[j]) * t;
                out.push(p);
            }
            None => {
                let end = poly[poly.len() - 1];
                let missing = c - (end - p).norm();
                let pos = total + missing.max(0.0) + c * (steps + 1 - out.len()) as f64;
                while out.len() < steps + 1 {
                    out.push(end);
                }
                return (out, pos);
            }
        }
    }
    let pos = cum[seg] + (cum[seg + 1] - cum[seg]) * t0;
    (out, pos)
}

/// Resample a polyline with `n` nodes and exactly equal chords.
fn equal_chords(poly: &[Vec2], n: usize) -> Result<Vec<Vec2>> {
    let mut cum = vec![0.0];
    for w in poly.windows(2) {
        cum.push(cum.last().unwrap() + (w[1] - w[0]).norm());
    }
    let total = *cum.last().unwrap();
    if !(total > 0.0) {
        return Err(Error::EmptyCurve("curve has zero length".into()));
    }
    let steps = n - 1;
    let mut hi = total / steps as f64;
    let (pts_hi, pos_hi) = walk(poly, &cum, hi, steps);
    if pos_hi <= total * (1.0 + 1e-15) && (pts_hi[steps] - poly[poly.len() - 1]).norm() <= 1e-14 * total {
        let mut pts = pts_hi;
        pts[steps] = poly[poly.len() - 1];
        return Ok(pts);
    }
    let mut lo = 0.0;
    let mut best = pts_hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (pts, pos) = walk(poly, &cum, mid, steps);
        if pos >= total {
            hi = mid;
            best = pts;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    // the final chord lands on the end up to the bisection resolution
    let (pts, pos) = walk(poly, &cum, hi, steps);
    let mut pts = if pos >= total { pts } else { best };
    pts[steps] = poly[poly.len() - 1];
    Ok(pts)
}
