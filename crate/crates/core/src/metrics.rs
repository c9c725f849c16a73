//! Distances and convergence diagnostics: geodesic distance on `S²`,
//! brute-force Hausdorff distance, affine contraction factors and
//! finite-difference probes of the conformal maps.

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ifs::{AffineMap2, Point2};
use crate::mobius::{mobius_raw, UnitVec3};

/// Finite-difference step for the conformality probe.
pub const CONFORMALITY_STEP: f64 = 1e-6;
/// Finite-difference step for the area-ratio probe.
pub const AREA_STEP: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Euclidean2,
    GeodesicS2,
}

/// A non-empty finite point set tagged with the metric it lives in.
#[derive(Clone, Debug, PartialEq)]
pub enum PointSet {
    Planar(Vec<Point2>),
    Spherical(Vec<UnitVec3>),
}

impl PointSet {
    pub fn planar(points: Vec<Point2>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        Ok(Self::Planar(points))
    }

    pub fn spherical(points: Vec<UnitVec3>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        if let Some(p) = points.iter().find(|p| (p.as_vec().norm() - 1.0).abs() > 1e-10) {
            return Err(Error::ZeroVector { norm: p.as_vec().norm() });
        }
        Ok(Self::Spherical(points))
    }

    pub fn metric(&self) -> Metric {
        match self {
            Self::Planar(_) => Metric::Euclidean2,
            Self::Spherical(_) => Metric::GeodesicS2,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Planar(p) => p.len(),
            Self::Spherical(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Great-circle distance in radians, `atan2(‖a×b‖, a·b)`.
pub fn geodesic_distance(a: &UnitVec3, b: &UnitVec3) -> f64 {
    let (a, b) = (a.as_vec(), b.as_vec());
    a.cross(b).norm().atan2(a.dot(b))
}

fn planar_point_to_set(p: &Point2, set: &[Point2]) -> f64 {
    set.iter().map(|s| (p - s).norm_squared()).fold(f64::INFINITY, f64::min).sqrt()
}

fn spherical_point_to_set(p: &UnitVec3, set: &[UnitVec3]) -> f64 {
    set.iter().map(|s| geodesic_distance(p, s)).fold(f64::INFINITY, f64::min)
}

/// `d(Y,Z) = max_{y∈Y} min_{z∈Z} d(y,z)`, by exhaustive search.
pub fn directed_distance(y: &PointSet, z: &PointSet) -> Result<f64> {
    match (y, z) {
        (PointSet::Planar(y), PointSet::Planar(z)) => {
            Ok(y.par_iter().map(|p| planar_point_to_set(p, z)).reduce(|| 0.0, f64::max))
        }
        (PointSet::Spherical(y), PointSet::Spherical(z)) => {
            Ok(y.par_iter().map(|p| spherical_point_to_set(p, z)).reduce(|| 0.0, f64::max))
        }
        _ => Err(Error::MetricMismatch),
    }
}

/// `h(Y,Z) = max(d(Y,Z), d(Z,Y))`.
pub fn hausdorff_distance(y: &PointSet, z: &PointSet) -> Result<f64> {
    Ok(directed_distance(y, z)?.max(directed_distance(z, y)?))
}

/// Largest singular value of the linear part.
pub fn contraction_factor(m: &AffineMap2) -> f64 {
    let a = &m.linear;
    let frob = a.norm_squared();
    let det = a.determinant();
    let disc = (frob * frob - 4.0 * det * det).max(0.0).sqrt();
    (0.5 * (frob + disc)).sqrt()
}

fn tangent_part(v: &Vector3<f64>, at: &Vector3<f64>) -> Vector3<f64> {
    v - at * v.dot(at)
}

fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// Central-difference pushforward of the unit tangent `u` at `x`.
///
/// Returns the realized input step and its image, both divided by `2h` and
/// projected onto the tangent planes at `x` and `φ_q(x)` respectively.
fn pushforward(q: &Vector3<f64>, x: &Vector3<f64>, image: &Vector3<f64>, u: &Vector3<f64>, h: f64) -> (Vector3<f64>, Vector3<f64>) {
    let plus = x + u * h;
    let minus = x - u * h;
    let input = (plus - minus) / (2.0 * h);
    let output = (mobius_raw(q, &plus) - mobius_raw(q, &minus)) / (2.0 * h);
    (tangent_part(&input, x), tangent_part(&output, image))
}

fn unit_tangent(v: &Vector3<f64>, at: &Vector3<f64>) -> Result<Vector3<f64>> {
    let t = tangent_part(v, at);
    let norm = t.norm();
    if !(norm > 0.0) {
        return Err(Error::ZeroTangent);
    }
    Ok(t / norm)
}

fn check_ball(q: &Vector3<f64>) -> Result<()> {
    let norm = q.norm();
    if !(norm < 1.0) {
        return Err(Error::OutsideUnitBall { norm });
    }
    Ok(())
}

/// `|∠(dφ_q u, dφ_q v) - ∠(u, v)|` with a central finite-difference
/// pushforward of step [`CONFORMALITY_STEP`]. `u` and `v` are projected onto
/// the tangent plane at `x` first.
pub fn conformality_defect(q: &Vector3<f64>, x: &UnitVec3, u: &Vector3<f64>, v: &Vector3<f64>) -> Result<f64> {
    check_ball(q)?;
    let xv = x.as_vec();
    let (u, v) = (unit_tangent(u, xv)?, unit_tangent(v, xv)?);
    let image = mobius_raw(q, xv).normalize();
    let (u_in, u_out) = pushforward(q, xv, &image, &u, CONFORMALITY_STEP);
    let (v_in, v_out) = pushforward(q, xv, &image, &v, CONFORMALITY_STEP);
    Ok((angle_between(&u_out, &v_out) - angle_between(&u_in, &v_in)).abs())
}

/// Finite-difference area ratio of `φ_q` at `x`: the area of the pushed-forward
/// tangent parallelogram over the area of the original one.
pub fn fd_area_ratio(q: &Vector3<f64>, x: &UnitVec3, step: f64) -> Result<f64> {
    check_ball(q)?;
    let xv = x.as_vec();
    let seed = if xv.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = unit_tangent(&seed, xv)?;
    let e2 = xv.cross(&e1);
    let image = mobius_raw(q, xv).normalize();
    let (a_in, a_out) = pushforward(q, xv, &image, &e1, step);
    let (b_in, b_out) = pushforward(q, xv, &image, &e2, step);
    Ok(a_out.cross(&b_out).norm() / a_in.cross(&b_in).norm())
}
