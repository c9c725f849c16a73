//! 2×2 complex matrix algebra over the Pauli basis.
//!
//! `C(2)` viewed as a real algebra is the Clifford algebra of Euclidean
//! 3-space. This module provides the Minkowski ↔ Hermitian-matrix
//! correspondence `X = x^μ σ_μ`, the checkmark anti-involution
//! `A✓ = C Aᵗ C⁻¹`, the tilde automorphism `Ã = C Ā C⁻¹`, the action
//! `X ↦ A X A⋆` of `SL(2,C)` on Hermitian matrices and two constructions
//! of the induced Lorentz matrix: the trace formula
//! `Λ^μ_ν = ½ Tr(σ_μ A σ_ν A⋆)` (ground truth) and a closed form in the
//! complex coordinates `A = a^μ σ_μ`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix2, Matrix4, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Asymmetry below which a matrix is accepted (and symmetrised) as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Maximum `|det A - 1|` accepted for an `SL(2,C)` element.
pub const UNIMODULAR_TOL: f64 = 1e-12;
/// Maximum `|a·a - 1|` accepted for complex Minkowski coordinates.
pub const COORDINATE_TOL: f64 = 1e-10;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Minkowski metric signature `(+, -, -, -)`.
pub const ETA: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// Dense 2×2 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexMat2(pub Matrix2<Complex64>);

impl ComplexMat2 {
    pub fn new(a11: Complex64, a12: Complex64, a21: Complex64, a22: Complex64) -> Self {
        Self(Matrix2::new(a11, a12, a21, a22))
    }

    pub fn from_real(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self::new(a11.into(), a12.into(), a21.into(), a22.into())
    }

    pub fn identity() -> Self {
        Self(Matrix2::identity())
    }

    pub fn zero() -> Self {
        Self(Matrix2::zeros())
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(self.0 * s)
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[(0, 0)] + self.0[(1, 1)]
    }

    /// Conjugate transpose `A⋆`.
    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// Entrywise complex conjugate `Ā`.
    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() == 0.0 {
            return None;
        }
        let m = &self.0;
        Some(Self::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]).scale(d.inv()))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.0 - other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - self⋆`.
    pub fn hermitian_asymmetry(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }
}

impl Add for ComplexMat2 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl Sub for ComplexMat2 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl Neg for ComplexMat2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl Mul for ComplexMat2 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

/// Pauli matrix `σ_μ`, `μ = 0..=3`, with `σ_0 = I`.
pub fn sigma(mu: usize) -> ComplexMat2 {
    match mu {
        0 => ComplexMat2::identity(),
        1 => ComplexMat2::new(ZERO, ONE, ONE, ZERO),
        2 => ComplexMat2::new(ZERO, -I, I, ZERO),
        3 => ComplexMat2::new(ONE, ZERO, ZERO, -ONE),
        _ => panic!("Pauli index {mu} out of range 0..=3"),
    }
}

/// Levi-Civita symbol on spatial indices `1..=3`.
pub fn levi_civita(k: usize, l: usize, m: usize) -> f64 {
    match (k, l, m) {
        (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1.0,
        (3, 2, 1) | (1, 3, 2) | (2, 1, 3) => -1.0,
        _ => 0.0,
    }
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// The symplectic form `C = [[0, -1], [1, 0]]`.
fn c_matrix() -> ComplexMat2 {
    ComplexMat2::from_real(0.0, -1.0, 1.0, 0.0)
}

fn c_matrix_inv() -> ComplexMat2 {
    ComplexMat2::from_real(0.0, 1.0, -1.0, 0.0)
}

/// Minkowski quadratic form `(x⁰)² - (x¹)² - (x²)² - (x³)²`.
pub fn minkowski_square(x: &[f64; 4]) -> f64 {
    x[0] * x[0] - x[1] * x[1] - x[2] * x[2] - x[3] * x[3]
}

/// Complex bilinear Minkowski square `(a⁰)² - a·a` (no conjugation).
pub fn complex_minkowski_square(a: &[Complex64; 4]) -> Complex64 {
    a[0] * a[0] - a[1] * a[1] - a[2] * a[2] - a[3] * a[3]
}

/// A Hermitian 2×2 matrix, equivalently a real Minkowski 4-vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermMat2(ComplexMat2);

impl HermMat2 {
    /// Accepts `m` if `‖m - m⋆‖ ≤ 1e-10`, storing the symmetrised `(m + m⋆)/2`.
    pub fn try_from_matrix(m: ComplexMat2) -> Result<Self> {
        let asymmetry = m.hermitian_asymmetry();
        if !(asymmetry <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian { asymmetry });
        }
        Ok(Self::symmetrize(m))
    }

    fn symmetrize(m: ComplexMat2) -> Self {
        let s = (m + m.adjoint()).scale(0.5.into());
        Self(s)
    }

    pub fn from_minkowski(x: [f64; 4]) -> Self {
        let [x0, x1, x2, x3] = x;
        Self(ComplexMat2::new(
            Complex64::new(x0 + x3, 0.0),
            Complex64::new(x1, -x2),
            Complex64::new(x1, x2),
            Complex64::new(x0 - x3, 0.0),
        ))
    }

    /// `x^μ = ½ Tr(σ_μ X)`.
    pub fn to_minkowski(&self) -> [f64; 4] {
        let m = &self.0;
        let (a, b, d) = (m.entry(0, 0).re, m.entry(1, 0), m.entry(1, 1).re);
        [0.5 * (a + d), b.re, b.im, 0.5 * (a - d)]
    }

    pub fn matrix(&self) -> &ComplexMat2 {
        &self.0
    }

    pub fn det(&self) -> f64 {
        self.0.det().re
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let (mean, radius) = self.spectral_center_radius();
        (mean - radius, mean + radius)
    }

    fn spectral_center_radius(&self) -> (f64, f64) {
        let m = &self.0;
        let (a, d) = (m.entry(0, 0).re, m.entry(1, 1).re);
        let half_gap = 0.5 * (a - d);
        (0.5 * (a + d), half_gap.hypot(m.entry(0, 1).norm()))
    }

    /// Positive square root of a positive semidefinite matrix, built from its
    /// spectral projectors.
    pub fn sqrt_positive(&self) -> HermMat2 {
        let (mean, radius) = self.spectral_center_radius();
        let (lo, hi) = (mean - radius, mean + radius);
        if radius <= f64::EPSILON * mean.abs() {
            return Self(ComplexMat2::identity().scale(mean.max(0.0).sqrt().into()));
        }
        let id = ComplexMat2::identity();
        let inv_gap: Complex64 = (1.0 / (2.0 * radius)).into();
        let proj_hi = (self.0 - id.scale(lo.into())).scale(inv_gap);
        let proj_lo = (id.scale(hi.into()) - self.0).scale(inv_gap);
        let root =
            proj_hi.scale(hi.max(0.0).sqrt().into()) + proj_lo.scale(lo.max(0.0).sqrt().into());
        Self::symmetrize(root)
    }
}

/// `σ(v) = v¹σ₁ + v²σ₂ + v³σ₃`.
pub fn sigma_of_vec(v: &Vector3<f64>) -> HermMat2 {
    HermMat2::from_minkowski([0.0, v.x, v.y, v.z])
}

pub fn herm_from_minkowski(x: [f64; 4]) -> HermMat2 {
    HermMat2::from_minkowski(x)
}

/// Minkowski coordinates of a Hermitian matrix; rejects non-Hermitian input.
pub fn minkowski_from_herm(x: &ComplexMat2) -> Result<[f64; 4]> {
    Ok(HermMat2::try_from_matrix(*x)?.to_minkowski())
}

/// `A✓ = C Aᵗ C⁻¹`; satisfies `A A✓ = A✓ A = det(A) I`.
pub fn checkmark(a: &ComplexMat2) -> ComplexMat2 {
    c_matrix() * a.transpose() * c_matrix_inv()
}

/// `Ã = C Ā C⁻¹`; equals `(A⋆)⁻¹` on `SL(2,C)`, so `AXÃ⁻¹ = AXA⋆`.
pub fn tilde(a: &ComplexMat2) -> ComplexMat2 {
    c_matrix() * a.conj() * c_matrix_inv()
}

/// An element of `SL(2,C)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sl2c(ComplexMat2);

impl Sl2c {
    pub fn try_new(m: ComplexMat2) -> Result<Self> {
        let defect = (m.det() - ONE).norm();
        if !(defect <= UNIMODULAR_TOL) {
            return Err(Error::NotUnimodular { defect });
        }
        Ok(Self(m))
    }

    /// Rescales an invertible matrix by `1/√det` (principal branch).
    pub fn normalized(m: ComplexMat2) -> Result<Self> {
        let d = m.det();
        if !(d.norm() > 0.0) || !d.norm().is_finite() {
            return Err(Error::Singular);
        }
        Ok(Self(m.scale(d.sqrt().inv())))
    }

    /// Builds `A = a^μ σ_μ`, requiring `(a⁰)² - a·a = 1` within 1e-10.
    pub fn from_coords(a: [Complex64; 4]) -> Result<Self> {
        let defect = (complex_minkowski_square(&a) - ONE).norm();
        if !(defect <= COORDINATE_TOL) {
            return Err(Error::CoordinateNormalization { defect });
        }
        let m = (0..4).fold(ComplexMat2::zero(), |acc, mu| acc + sigma(mu).scale(a[mu]));
        Ok(Self(m))
    }

    pub fn identity() -> Self {
        Self(ComplexMat2::identity())
    }

    /// Complex coordinates `a^μ = ½ Tr(σ_μ A)`.
    pub fn coords(&self) -> [Complex64; 4] {
        std::array::from_fn(|mu| 0.5 * (sigma(mu) * self.0).trace())
    }

    pub fn matrix(&self) -> &ComplexMat2 {
        &self.0
    }

    /// The inverse, which on `SL(2,C)` is the checkmark.
    pub fn inverse(&self) -> Self {
        Self(checkmark(&self.0))
    }

    /// Factors `A = U P` with `U` unitary and `P` positive, both unimodular.
    pub fn polar_decompose(&self) -> PolarDecomposition {
        let gram = HermMat2::symmetrize(self.0.adjoint() * self.0);
        let p = gram.sqrt_positive();
        let p_inv = checkmark(p.matrix());
        let positive = Sl2c(*p.matrix());
        let unitary = Sl2c(self.0 * p_inv);
        PolarDecomposition { unitary, positive }
    }
}

impl Mul for Sl2c {
    type Output = Sl2c;
    fn mul(self, rhs: Sl2c) -> Sl2c {
        Sl2c(self.0 * rhs.0)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PolarDecomposition {
    pub unitary: Sl2c,
    pub positive: Sl2c,
}

/// `X ↦ A X A⋆`.
pub fn act_adjoint(a: &Sl2c, x: &HermMat2) -> HermMat2 {
    HermMat2::symmetrize(a.0 * x.0 * a.0.adjoint())
}

/// A real 4×4 matrix `Λ^μ_ν` (row = output index, column = input index).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzMat4(pub Matrix4<f64>);

impl LorentzMat4 {
    pub fn identity() -> Self {
        Self(Matrix4::identity())
    }

    #[inline]
    pub fn entry(&self, mu: usize, nu: usize) -> f64 {
        self.0[(mu, nu)]
    }

    pub fn apply(&self, x: [f64; 4]) -> [f64; 4] {
        std::array::from_fn(|mu| (0..4).map(|nu| self.0[(mu, nu)] * x[nu]).sum())
    }

    /// Largest entry of `|ΛᵀηΛ - η|`.
    pub fn metric_defect(&self) -> f64 {
        let eta = Matrix4::from_diagonal(&ETA.into());
        let residual = self.0.transpose() * eta * self.0 - eta;
        residual.amax()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.0 - other.0).amax()
    }
}

impl Mul for LorentzMat4 {
    type Output = LorentzMat4;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

/// Trace-formula Lorentz matrix and the largest discarded imaginary part.
pub(crate) fn lorentz_trace_formula(a: &Sl2c) -> (LorentzMat4, f64) {
    let am = a.0;
    let a_star = am.adjoint();
    let sig: [ComplexMat2; 4] = std::array::from_fn(sigma);
    let mut out = Matrix4::zeros();
    let mut max_imag: f64 = 0.0;
    for nu in 0..4 {
        let image = am * sig[nu] * a_star;
        for mu in 0..4 {
            let v = 0.5 * (sig[mu] * image).trace();
            out[(mu, nu)] = v.re;
            max_imag = max_imag.max(v.im.abs());
        }
    }
    (LorentzMat4(out), max_imag)
}

/// `Λ(A)^μ_ν = ½ Tr(σ_μ A σ_ν A⋆)`.
pub fn lorentz_from_sl2c(a: &Sl2c) -> LorentzMat4 {
    lorentz_trace_formula(a).0
}

/// Lorentz matrix from complex coordinates `A = a^μ σ_μ` in closed form:
///
/// * `Λ⁰₀ = |a⁰|² + Σ|aᵏ|²`
/// * `Λʲ₀ = 2 Re(ā⁰ aʲ) + i ε_jkl aᵏ āˡ`
/// * `Λ⁰ⱼ = 2 Re(ā⁰ aʲ) - i ε_jkl aᵏ āˡ`
/// * `Λʲₖ = (|a⁰|² - Σ|aᵐ|²) δ_jk + 2 Re(aʲ āᵏ) + 2 Im(ā⁰ aˡ) ε_jkl`
///
/// The cross-product term changes sign between the time row and the time
/// column, so the matrix is symmetric only for pure boosts.
pub fn lorentz_closed_form(a: &[Complex64; 4]) -> Result<LorentzMat4> {
    let defect = (complex_minkowski_square(a) - ONE).norm();
    if !(defect <= COORDINATE_TOL) {
        return Err(Error::CoordinateNormalization { defect });
    }
    let a0 = a[0];
    let spatial = [a[1], a[2], a[3]];
    let spatial_norm_sq: f64 = spatial.iter().map(|z| z.norm_sqr()).sum();
    // i (a × ā)_j is real because a × ā is purely imaginary.
    let cross: [f64; 3] = std::array::from_fn(|j| {
        let (k, l) = ((j + 1) % 3, (j + 2) % 3);
        (I * (spatial[k] * spatial[l].conj() - spatial[l] * spatial[k].conj())).re
    });

    let mut m = Matrix4::zeros();
    m[(0, 0)] = a0.norm_sqr() + spatial_norm_sq;
    for j in 0..3 {
        let time_space = 2.0 * (a0.conj() * spatial[j]).re;
        m[(j + 1, 0)] = time_space + cross[j];
        m[(0, j + 1)] = time_space - cross[j];
    }
    let minkowski_abs = a0.norm_sqr() - spatial_norm_sq;
    for j in 0..3 {
        for k in 0..3 {
            let mut v = minkowski_abs * delta(j, k) + 2.0 * (spatial[j] * spatial[k].conj()).re;
            for l in 0..3 {
                v += 2.0 * (a0.conj() * spatial[l]).im * levi_civita(j + 1, k + 1, l + 1);
            }
            m[(j + 1, k + 1)] = v;
        }
    }
    Ok(LorentzMat4(m))
}

/// One family of Pauli identities checked over all index combinations.
#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub combinations: usize,
    pub max_deviation: f64,
}

#[derive(Clone, Debug)]
pub struct PauliIdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl PauliIdentityReport {
    pub fn max_deviation(&self) -> f64 {
        self.checks.iter().map(|c| c.max_deviation).fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_deviation() <= tol
    }
}

/// Verifies the Pauli trace identities and the product rule
/// `σ_k σ_l = δ_kl I + i ε_klm σ_m` by brute-force matrix arithmetic.
pub fn pauli_identity_suite() -> PauliIdentityReport {
    let sig: [ComplexMat2; 4] = std::array::from_fn(sigma);
    let half_trace = |m: ComplexMat2| 0.5 * m.trace();
    let mut checks = Vec::new();

    let mut dev: f64 = 0.0;
    for s in &sig {
        dev = dev.max(s.hermitian_asymmetry());
    }
    checks.push(IdentityCheck { name: "sigma_mu hermitian", combinations: 4, max_deviation: dev });

    let mut dev: f64 = 0.0;
    let mut n = 0;
    for k in 1..4 {
        for l in 1..4 {
            let expected = (1..4).fold(ComplexMat2::identity().scale(delta(k, l).into()), |acc, m| {
                acc + sig[m].scale(I * levi_civita(k, l, m))
            });
            dev = dev.max((sig[k] * sig[l]).max_abs_diff(&expected));
            n += 1;
        }
    }
    checks.push(IdentityCheck {
        name: "sigma_k sigma_l = delta_kl I + i eps_klm sigma_m",
        combinations: n,
        max_deviation: dev,
    });

    let mut dev: f64 = 0.0;
    let mut n = 0;
    for mu in 0..4 {
        for nu in 0..4 {
            dev = dev.max((half_trace(sig[mu] * sig[nu]) - delta(mu, nu)).norm());
            n += 1;
        }
    }
    checks.push(IdentityCheck {
        name: "1/2 Tr(sigma_mu sigma_nu) = delta_mu_nu",
        combinations: n,
        max_deviation: dev,
    });

    let mut dev: f64 = 0.0;
    let mut n = 0;
    for k in 1..4 {
        for l in 1..4 {
            for m in 1..4 {
                let value = half_trace(sig[k] * sig[l] * sig[m]);
                dev = dev.max((value - I * levi_civita(k, l, m)).norm());
                n += 1;
            }
        }
    }
    checks.push(IdentityCheck {
        name: "1/2 Tr(sigma_k sigma_l sigma_m) = i eps_klm",
        combinations: n,
        max_deviation: dev,
    });

    let mut dev: f64 = 0.0;
    let mut n = 0;
    for j in 1..4 {
        for k in 1..4 {
            for l in 1..4 {
                for m in 1..4 {
                    let value = half_trace(sig[j] * sig[k] * sig[l] * sig[m]);
                    let expected =
                        delta(j, k) * delta(l, m) + delta(j, m) * delta(k, l) - delta(j, l) * delta(k, m);
                    dev = dev.max((value - expected).norm());
                    n += 1;
                }
            }
        }
    }
    checks.push(IdentityCheck {
        name: "1/2 Tr(sigma_j sigma_k sigma_l sigma_m) = dd + dd - dd",
        combinations: n,
        max_deviation: dev,
    });

    PauliIdentityReport { checks }
}
