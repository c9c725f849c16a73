//! Conformal maps of the unit sphere induced by Lorentz boosts.
//!
//! For `q` in the open unit ball the map
//!
//! ```text
//! φ_q(p) = ((1 - q²) p + 2 (1 + q·p) q) / (1 + q² + 2 q·p)
//! ```
//!
//! sends `S²` to itself. The same map arises from the boost `P̂(q) = (I + σ(q))/2`
//! acting on the null projector `P̂(p)`: `P̂(q) P̂(p) P̂(q) = λ(q,p) P̂(φ_q(p))`
//! with `λ(q,p) = (1 + q² + 2 q·p)/4`. Both routes are implemented so that one
//! can serve as an oracle for the other.

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::pauli::{sigma_of_vec, ComplexMat2, HermMat2};

/// Tolerance on `Σ n_i = 0` for the symmetric probability formula.
pub const SYMMETRIC_SUM_TOL: f64 = 1e-9;

/// A point on the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitVec3(Vector3<f64>);

impl UnitVec3 {
    /// Normalizes any finite nonzero vector.
    pub fn normalize(v: Vector3<f64>) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroVector { norm });
        }
        Ok(Self(v / norm))
    }

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::normalize(Vector3::new(x, y, z))
    }

    /// Wraps `v` without normalizing; the caller guarantees `‖v‖ = 1`.
    pub fn new_unchecked(v: Vector3<f64>) -> Self {
        Self(v)
    }

    pub fn north() -> Self {
        Self(Vector3::z())
    }

    #[inline]
    pub fn as_vec(&self) -> &Vector3<f64> {
        &self.0
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.0.x
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.0.y
    }

    #[inline]
    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.dot(&other.0)
    }
}

impl std::ops::Neg for UnitVec3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

fn check_ball(q: &Vector3<f64>) -> Result<()> {
    let norm = q.norm();
    if !(norm < 1.0) {
        return Err(Error::OutsideUnitBall { norm });
    }
    Ok(())
}

/// Evaluates the map formula for an arbitrary `p ∈ R³` without renormalizing.
#[inline]
pub fn mobius_raw(q: &Vector3<f64>, p: &Vector3<f64>) -> Vector3<f64> {
    let q_sq = q.norm_squared();
    let qp = q.dot(p);
    ((1.0 - q_sq) * p + 2.0 * (1.0 + qp) * q) / (1.0 + q_sq + 2.0 * qp)
}

/// `φ_q(p)` followed by renormalization, together with the pre-normalization
/// defect `|‖φ_q(p)‖ - 1|`.
pub fn mobius_apply_with_defect(q: &Vector3<f64>, p: &UnitVec3) -> Result<(UnitVec3, f64)> {
    check_ball(q)?;
    let raw = mobius_raw(q, p.as_vec());
    let norm = raw.norm();
    Ok((UnitVec3(raw / norm), (norm - 1.0).abs()))
}

/// `φ_q(p)`; `‖q‖ ≥ 1` is rejected.
pub fn mobius_apply(q: &Vector3<f64>, p: &UnitVec3) -> Result<UnitVec3> {
    mobius_apply_with_defect(q, p).map(|(x, _)| x)
}

/// `P̂(y) = (I + σ(y))/2`.
pub fn half_projector(y: &Vector3<f64>) -> ComplexMat2 {
    (ComplexMat2::identity() + *sigma_of_vec(y).matrix()).scale(0.5.into())
}

/// Matrix route: forms `M = P̂(q) P̂(p) P̂(q)`, reads `λ = Tr M` and
/// `x' = (Tr σ_k M)/λ`.
pub fn mobius_apply_matrix(q: &Vector3<f64>, p: &UnitVec3) -> Result<(UnitVec3, f64)> {
    check_ball(q)?;
    let pq = half_projector(q);
    let m = pq * half_projector(p.as_vec()) * pq;
    let [m0, m1, m2, m3] = HermMat2::try_from_matrix(m)?.to_minkowski();
    let lambda = 2.0 * m0;
    let image = Vector3::new(m1, m2, m3) / m0;
    Ok((UnitVec3::normalize(image)?, lambda))
}

/// `λ(q,x) = (1 + q² + 2 q·x)/4`.
pub fn lambda_factor(q: &Vector3<f64>, x: &UnitVec3) -> Result<f64> {
    check_ball(q)?;
    Ok(lambda_unchecked(q, x.as_vec()))
}

#[inline]
fn lambda_unchecked(q: &Vector3<f64>, x: &Vector3<f64>) -> f64 {
    let value = (1.0 + q.norm_squared() + 2.0 * q.dot(x)) / 4.0;
    debug_assert!(value > 0.0);
    value
}

/// Area ratio `dS'/dS = (1 - q²)² / (1 + q² + 2 q·x)²`.
pub fn area_distortion(q: &Vector3<f64>, x: &UnitVec3) -> Result<f64> {
    check_ball(q)?;
    let q_sq = q.norm_squared();
    let denom = 1.0 + q_sq + 2.0 * q.dot(x.as_vec());
    Ok((1.0 - q_sq).powi(2) / (denom * denom))
}

/// One boost: direction `n` and velocity `0 < α < 1`, giving `q = α n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoostGenerator {
    n: UnitVec3,
    alpha: f64,
    q: Vector3<f64>,
    q_sq: f64,
}

impl BoostGenerator {
    pub fn new(n: UnitVec3, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidAlpha { alpha });
        }
        let q = n.as_vec() * alpha;
        Ok(Self { n, alpha, q, q_sq: q.norm_squared() })
    }

    pub fn direction(&self) -> &UnitVec3 {
        &self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn q(&self) -> &Vector3<f64> {
        &self.q
    }

    /// `φ_q(p)`, renormalized.
    #[inline]
    pub fn apply(&self, p: &UnitVec3) -> UnitVec3 {
        let qp = self.q.dot(p.as_vec());
        let raw = ((1.0 - self.q_sq) * p.as_vec() + 2.0 * (1.0 + qp) * self.q)
            / (1.0 + self.q_sq + 2.0 * qp);
        UnitVec3(raw / raw.norm())
    }

    /// Unnormalized weight `4 λ(q,x) = 1 + q² + 2 q·x`.
    #[inline]
    fn weight(&self, x: &UnitVec3) -> f64 {
        1.0 + self.q_sq + 2.0 * self.q.dot(x.as_vec())
    }
}

/// The unnormalized positive boost `P(q) = I + σ(q)`; eigenvalues `1 ± α`.
pub fn boost_of(g: &BoostGenerator) -> HermMat2 {
    let q = g.q();
    HermMat2::from_minkowski([1.0, q.x, q.y, q.z])
}

/// How selection probabilities are assigned to the maps of a system.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ProbabilityMode {
    /// `p_i(x) = λ(q_i,x) / Σ_j λ(q_j,x)`.
    #[default]
    LambdaWeighted,
    /// `p_i = 1/N`.
    Uniform,
}

impl FromStr for ProbabilityMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lambda" | "lambda_weighted" => Ok(Self::LambdaWeighted),
            "uniform" => Ok(Self::Uniform),
            other => Err(format!("unknown probability mode `{other}` (expected lambda or uniform)")),
        }
    }
}

impl fmt::Display for ProbabilityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::LambdaWeighted => "lambda",
            Self::Uniform => "uniform",
        })
    }
}

/// An ordered, non-empty list of boosts plus a probability mode.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSystem {
    generators: Vec<BoostGenerator>,
    mode: ProbabilityMode,
    symmetric: bool,
}

impl GeneratorSystem {
    pub fn new(generators: Vec<BoostGenerator>, mode: ProbabilityMode) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::EmptySystem);
        }
        let alpha0 = generators[0].alpha;
        let same_alpha = generators.iter().all(|g| g.alpha == alpha0);
        let direction_sum: Vector3<f64> = generators.iter().map(|g| *g.n.as_vec()).sum();
        let symmetric = same_alpha && direction_sum.norm() <= SYMMETRIC_SUM_TOL;
        Ok(Self { generators, mode, symmetric })
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[BoostGenerator] {
        &self.generators
    }

    pub fn probability_mode(&self) -> ProbabilityMode {
        self.mode
    }

    pub fn with_probability_mode(mut self, mode: ProbabilityMode) -> Self {
        self.mode = mode;
        self
    }

    /// True iff all `α_i` are equal and `‖Σ n_i‖ ≤ 1e-9`.
    pub fn symmetric_fast_path(&self) -> bool {
        self.symmetric
    }

    pub fn probabilities(&self, x: &UnitVec3) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.probabilities_into(x, &mut out);
        out
    }

    /// Writes `p_i(x)` into `out` (length `N`).
    pub fn probabilities_into(&self, x: &UnitVec3, out: &mut [f64]) {
        match self.mode {
            ProbabilityMode::Uniform => out.fill(1.0 / self.len() as f64),
            ProbabilityMode::LambdaWeighted if self.symmetric => self.symmetric_probabilities_into(x, out),
            ProbabilityMode::LambdaWeighted => self.lambda_probabilities_into(x, out),
        }
    }

    /// General route: normalized `λ(q_i, x)`.
    pub fn lambda_probabilities_into(&self, x: &UnitVec3, out: &mut [f64]) {
        let mut total = 0.0;
        for (slot, g) in out.iter_mut().zip(&self.generators) {
            let w = g.weight(x);
            debug_assert!(w > 0.0);
            *slot = w;
            total += w;
        }
        for slot in out.iter_mut() {
            *slot /= total;
        }
    }

    /// `p_i(x) = (1 + α² + 2α n_i·x) / (N (1 + α²))`, exact only when
    /// [`symmetric_fast_path`](Self::symmetric_fast_path) holds.
    pub fn symmetric_probabilities_into(&self, x: &UnitVec3, out: &mut [f64]) {
        let alpha = self.generators[0].alpha;
        let base = 1.0 + alpha * alpha;
        let norm = self.len() as f64 * base;
        for (slot, g) in out.iter_mut().zip(&self.generators) {
            *slot = (base + 2.0 * alpha * g.n.dot(x)) / norm;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, UnitSphere};

    fn unit(rng: &mut impl Rng) -> UnitVec3 {
        let [x, y, z] = UnitSphere.sample(rng);
        UnitVec3::new(x, y, z).unwrap()
    }

    fn v(x: f64, y: f64, z: f64) -> Vector3<f64> {
        Vector3::new(x, y, z)
    }

    fn close(a: &UnitVec3, b: &Vector3<f64>, tol: f64) -> bool {
        (a.as_vec() - b).amax() < tol
    }

    #[test]
    fn identity_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let p = unit(&mut rng);
            assert!(close(&mobius_apply(&Vector3::zeros(), &p).unwrap(), p.as_vec(), 1e-15));
        }
    }

    #[test]
    fn fixed_points_and_equator_image() {
        let q = v(0.0, 0.0, 0.5);
        let north = UnitVec3::north();
        assert!(close(&mobius_apply(&q, &north).unwrap(), &v(0.0, 0.0, 1.0), 1e-15));
        assert!(close(&mobius_apply(&q, &-north).unwrap(), &v(0.0, 0.0, -1.0), 1e-15));
        let e = UnitVec3::new(1.0, 0.0, 0.0).unwrap();
        let image = mobius_apply(&q, &e).unwrap();
        assert!(close(&image, &v(0.6, 0.0, 0.8), 1e-15));
    }

    #[test]
    fn rejects_outside_ball() {
        let p = UnitVec3::north();
        assert!(matches!(mobius_apply(&v(1.0, 0.0, 0.0), &p), Err(Error::OutsideUnitBall { .. })));
        assert!(mobius_apply(&v(0.0, 0.9, 0.9), &p).is_err());
        assert!(mobius_apply_matrix(&v(0.0, 0.0, 1.0), &p).is_err());
        assert!(lambda_factor(&v(2.0, 0.0, 0.0), &p).is_err());
        assert!(area_distortion(&v(f64::NAN, 0.0, 0.0), &p).is_err());
    }

    #[test]
    fn matrix_route_examples() {
        let p = UnitVec3::new(0.3, -0.4, 0.5).unwrap();
        let (x, lambda) = mobius_apply_matrix(&Vector3::zeros(), &p).unwrap();
        assert!(close(&x, p.as_vec(), 1e-15));
        assert!((lambda - 0.25).abs() < 1e-15);

        let q = v(0.0, 0.0, 0.5);
        let (_, lambda) = mobius_apply_matrix(&q, &UnitVec3::north()).unwrap();
        assert!((lambda - 0.5625).abs() < 1e-15);

        let (x, lambda) = mobius_apply_matrix(&q, &UnitVec3::new(1.0, 0.0, 0.0).unwrap()).unwrap();
        assert!(close(&x, &v(0.6, 0.0, 0.8), 1e-15));
        assert!((lambda - 1.25 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn matrix_route_agrees_with_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20_000 {
            let q = unit(&mut rng).as_vec() * rng.random_range(0.0..0.95);
            let p = unit(&mut rng);
            let (closed, defect) = mobius_apply_with_defect(&q, &p).unwrap();
            let (matrix, lambda) = mobius_apply_matrix(&q, &p).unwrap();
            assert!(defect < 1e-12);
            assert!((closed.as_vec() - matrix.as_vec()).norm() < 1e-12);
            assert!((lambda - lambda_factor(&q, &p).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_boost_returns_start() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5000 {
            let q = unit(&mut rng).as_vec() * rng.random_range(0.0..0.95);
            let p = unit(&mut rng);
            let back = mobius_apply(&-q, &mobius_apply(&q, &p).unwrap()).unwrap();
            assert!((back.as_vec() - p.as_vec()).norm() < 1e-10);
        }
    }

    #[test]
    fn lambda_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = unit(&mut rng);
        assert_eq!(lambda_factor(&Vector3::zeros(), &x).unwrap(), 0.25);
        for i in 1..10 {
            let alpha = i as f64 / 10.0;
            let n = unit(&mut rng);
            let q = n.as_vec() * alpha;
            let max = lambda_factor(&q, &n).unwrap();
            let min = lambda_factor(&q, &-n).unwrap();
            assert!((max - (1.0 + alpha).powi(2) / 4.0).abs() < 1e-15);
            assert!((min - (1.0 - alpha).powi(2) / 4.0).abs() < 1e-15);
            // point with n·x = -α
            let t = n.as_vec().cross(&Vector3::x());
            let t = if t.norm() < 0.1 { n.as_vec().cross(&Vector3::y()) } else { t }.normalize();
            let x = UnitVec3::normalize(-alpha * n.as_vec() + (1.0 - alpha * alpha).sqrt() * t).unwrap();
            let mid = lambda_factor(&q, &x).unwrap();
            assert!((mid - (1.0 - alpha * alpha) / 4.0).abs() < 1e-15);
            assert!((mid - (max * min).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn lambda_within_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5000 {
            let r = rng.random_range(0.0..0.999);
            let q = unit(&mut rng).as_vec() * r;
            let l = lambda_factor(&q, &unit(&mut rng)).unwrap();
            assert!(l > 0.0);
            assert!(l >= (1.0 - r).powi(2) / 4.0 - 1e-15 && l <= (1.0 + r).powi(2) / 4.0 + 1e-15);
        }
    }

    #[test]
    fn area_distortion_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        assert_eq!(area_distortion(&Vector3::zeros(), &unit(&mut rng)).unwrap(), 1.0);
        let a = area_distortion(&v(0.0, 0.0, 0.5), &UnitVec3::north()).unwrap();
        assert!((a - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn critical_latitude_geography() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for i in 1..10 {
            let alpha = i as f64 / 10.0;
            let q = v(0.0, 0.0, alpha);
            let phi = rng.random_range(0.0..std::f64::consts::TAU);
            let r = (1.0 - alpha * alpha).sqrt();
            let crit = UnitVec3::new(r * phi.cos(), r * phi.sin(), -alpha).unwrap();
            assert!((mobius_apply(&q, &crit).unwrap().z() - alpha).abs() < 1e-12);
            for _ in 0..200 {
                let p = unit(&mut rng);
                let z = mobius_apply(&q, &p).unwrap().z();
                if p.z() > -alpha + 1e-9 {
                    assert!(z > alpha);
                } else if p.z() < -alpha - 1e-9 {
                    assert!(z < alpha);
                }
            }
        }
    }

    #[test]
    fn boost_matrix() {
        let g = BoostGenerator::new(UnitVec3::north(), 0.5).unwrap();
        assert_eq!(*boost_of(&g).matrix(), ComplexMat2::from_real(1.5, 0.0, 0.0, 0.5));
        let g = BoostGenerator::new(UnitVec3::new(1.0, 0.0, 0.0).unwrap(), 0.5).unwrap();
        let b = boost_of(&g);
        let (lo, hi) = b.eigenvalues();
        assert!((lo - 0.5).abs() < 1e-15 && (hi - 1.5).abs() < 1e-15);
        assert!((b.det() - 0.75).abs() < 1e-15);
        let tiny = BoostGenerator::new(UnitVec3::north(), 1e-12).unwrap();
        assert!(boost_of(&tiny).matrix().max_abs_diff(&ComplexMat2::identity()) < 1e-11);
    }

    #[test]
    fn generator_validation() {
        assert!(matches!(BoostGenerator::new(UnitVec3::north(), 1.0), Err(Error::InvalidAlpha { .. })));
        assert!(BoostGenerator::new(UnitVec3::north(), 0.0).is_err());
        assert!(BoostGenerator::new(UnitVec3::north(), f64::NAN).is_err());
        assert!(matches!(GeneratorSystem::new(vec![], ProbabilityMode::Uniform), Err(Error::EmptySystem)));
    }

    #[test]
    fn symmetric_flag_is_recomputed() {
        let n = UnitVec3::north();
        let pair = vec![
            BoostGenerator::new(n, 0.5).unwrap(),
            BoostGenerator::new(-n, 0.5).unwrap(),
        ];
        assert!(GeneratorSystem::new(pair.clone(), ProbabilityMode::LambdaWeighted).unwrap().symmetric_fast_path());
        let lopsided = vec![pair[0], BoostGenerator::new(-n, 0.4).unwrap()];
        assert!(!GeneratorSystem::new(lopsided, ProbabilityMode::LambdaWeighted).unwrap().symmetric_fast_path());
        let single = vec![pair[0]];
        assert!(!GeneratorSystem::new(single, ProbabilityMode::LambdaWeighted).unwrap().symmetric_fast_path());
    }

    #[test]
    fn uniform_probabilities() {
        let n = UnitVec3::north();
        let gens = (0..4).map(|_| BoostGenerator::new(n, 0.3).unwrap()).collect();
        let sys = GeneratorSystem::new(gens, ProbabilityMode::Uniform).unwrap();
        assert_eq!(sys.probabilities(&n), vec![0.25; 4]);
    }

    #[test]
    fn asymmetric_probabilities_normalize() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let gens = (0..5)
            .map(|_| BoostGenerator::new(unit(&mut rng), rng.random_range(0.05..0.95)).unwrap())
            .collect();
        let sys = GeneratorSystem::new(gens, ProbabilityMode::LambdaWeighted).unwrap();
        assert!(!sys.symmetric_fast_path());
        for _ in 0..1000 {
            let x = unit(&mut rng);
            let p = sys.probabilities(&x);
            assert!(p.iter().all(|&v| v > 0.0));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let lambdas: Vec<f64> =
                sys.generators().iter().map(|g| lambda_factor(g.q(), &x).unwrap()).collect();
            let total: f64 = lambdas.iter().sum();
            for (pi, li) in p.iter().zip(&lambdas) {
                assert!((pi - li / total).abs() < 1e-14);
            }
        }
    }
}
