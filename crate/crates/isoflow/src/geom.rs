//! Planar vectors, 2x2 matrices and the closed forms used throughout:
//! symmetric eigen-decomposition and the matrix exponential.

use nalgebra::{Matrix2, Vector2};

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

/// Counterclockwise rotation by a quarter turn.
#[inline]
pub fn rot90(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

/// The symplectic matrix `J = [[0, 1], [-1, 0]]` applied to `v`.
#[inline]
pub fn apply_j(v: Vec2) -> Vec2 {
    Vec2::new(v.y, -v.x)
}

/// Eigen-decomposition of a symmetric 2x2 matrix.
///
/// Returns `(small, large, v_small)` with `v_small` normalized so that the
/// pair `(v_small, rot90(v_small))` is a right-handed orthonormal basis whose
/// first vector has a nonnegative leading component.
pub fn sym_eigen2(m: &Mat2) -> (f64, f64, Vec2) {
    let a = m[(0, 0)];
    let d = m[(1, 1)];
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    if b == 0.0 {
        let v = if a <= d { Vec2::new(1.0, 0.0) } else { Vec2::new(0.0, 1.0) };
        return (a.min(d), a.max(d), v);
    }
    // angle of the eigenvector belonging to the larger eigenvalue
    let theta = 0.5 * (2.0 * b).atan2(a - d);
    let mut v = Vec2::new(-theta.sin(), theta.cos());
    if v.x < -1e-15 || (v.x.abs() <= 1e-15 && v.y < 0.0) {
        v = -v;
    }
    (mean - rad, mean + rad, v)
}

/// Exact exponential `exp(t A)` of a real 2x2 matrix.
pub fn expm2(a: &Mat2, t: f64) -> Mat2 {
    let tr = a.trace();
    let det = a.determinant();
    let half = 0.5 * tr;
    let shifted = a - Mat2::identity() * half;
    let disc = half * half - det;
    let scale = (half * t).exp();
    let (c, s) = if disc > 0.0 {
        let w = disc.sqrt();
        let wt = w * t;
        (wt.cosh(), wt.sinh() / w)
    } else if disc < 0.0 {
        let w = (-disc).sqrt();
        let wt = w * t;
        (wt.cos(), wt.sin() / w)
    } else {
        (1.0, t)
    };
    (Mat2::identity() * c + shifted * s) * scale
}

/// Distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let d = b - a;
    let len2 = d.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&d) / len2).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_coupled_matrix() {
        let m = Mat2::new(2.0, 1.0, 1.0, 2.0);
        let (l1, l2, v) = sym_eigen2(&m);
        assert!((l1 - 1.0).abs() < 1e-14 && (l2 - 3.0).abs() < 1e-14);
        let s = 0.5f64.sqrt();
        assert!((v - Vec2::new(s, -s)).norm() < 1e-14);
        assert!((rot90(v) - Vec2::new(s, s)).norm() < 1e-14);
    }

    #[test]
    fn eigen_of_diagonal_matrix() {
        let (l1, l2, v) = sym_eigen2(&Mat2::new(1.0, 0.0, 0.0, 4.0));
        assert_eq!((l1, l2), (1.0, 4.0));
        assert!((v - Vec2::new(1.0, 0.0)).norm() < 1e-15);
        let (_, _, v) = sym_eigen2(&Mat2::new(4.0, 0.0, 0.0, 1.0));
        assert!((v - Vec2::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn expm_matches_series() {
        for m in [
            Mat2::new(-1.0, -2.0, 3.0, -0.5),
            Mat2::new(-1.0, 0.3, 0.2, -2.0),
            Mat2::new(-1.0, 1.0, 0.0, -1.0),
        ] {
            let t = 0.7;
            let mut term = Mat2::identity();
            let mut sum = Mat2::identity();
            for k in 1..40 {
                term = term * m * t / k as f64;
                sum += term;
            }
            assert!((expm2(&m, t) - sum).norm() < 1e-13);
        }
    }
}
