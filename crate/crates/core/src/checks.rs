//! Self-check suite: oracle comparisons and invariants evaluated on random
//! samples, reported as max deviation against a fixed tolerance.

use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, UnitSphere};

use crate::ifs::{preset_generators, Preset};
use crate::metrics::conformality_defect;
use crate::mobius::{lambda_factor, mobius_apply, mobius_apply_matrix, ProbabilityMode, UnitVec3};
use crate::pauli::{lorentz_closed_form, lorentz_from_sl2c, pauli_identity_suite, sigma_of_vec, ComplexMat2, Sl2c};

/// Largest boost magnitude drawn by the random samplers.
pub const MAX_SAMPLED_ALPHA: f64 = 0.95;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    MobiusOracle,
    Conformality,
    ProbabilityNormalization,
    LorentzClosedForm,
    PauliIdentities,
}

impl CheckKind {
    pub const ALL: [CheckKind; 5] = [
        Self::MobiusOracle,
        Self::Conformality,
        Self::ProbabilityNormalization,
        Self::LorentzClosedForm,
        Self::PauliIdentities,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::MobiusOracle => "mobius_formula_vs_matrix",
            Self::Conformality => "conformality_defect",
            Self::ProbabilityNormalization => "probability_normalization",
            Self::LorentzClosedForm => "lorentz_closed_form_vs_trace",
            Self::PauliIdentities => "pauli_trace_identities",
        }
    }

    pub fn default_samples(self) -> u64 {
        match self {
            Self::MobiusOracle => 1_000_000,
            Self::Conformality => 1_000,
            Self::ProbabilityNormalization => 10_000,
            Self::LorentzClosedForm => 10_000,
            // exhaustive over indices; sample count is not used
            Self::PauliIdentities => 1,
        }
    }

    pub fn tolerance(self) -> f64 {
        match self {
            Self::MobiusOracle => 1e-12,
            Self::Conformality => 1e-4,
            Self::ProbabilityNormalization => 1e-12,
            Self::LorentzClosedForm => 1e-10,
            Self::PauliIdentities => 1e-14,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CheckOptions {
    /// Overrides every sampled check's count.
    pub samples: Option<u64>,
    pub seed: u64,
    /// Negative control: perturbs the matrix route so the suite must fail.
    #[doc(hidden)]
    pub inject_fault: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub kind: CheckKind,
    pub samples: u64,
    pub max_deviation: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.max_deviation < self.tolerance
    }
}

pub fn random_unit(rng: &mut impl Rng) -> UnitVec3 {
    let [x, y, z]: [f64; 3] = UnitSphere.sample(rng);
    UnitVec3::new_unchecked(Vector3::new(x, y, z))
}

/// Random `q` with direction uniform on `S²` and `‖q‖` uniform in `(0, max_alpha)`.
pub fn random_boost(rng: &mut impl Rng, max_alpha: f64) -> Vector3<f64> {
    let alpha = loop {
        let a = rng.random_range(0.0..max_alpha);
        if a > 0.0 {
            break a;
        }
    };
    random_unit(rng).as_vec() * alpha
}

/// `U·P(n,α)` with `U` Haar-random in `SU(2)` and a unimodular boost of
/// velocity below [`MAX_SAMPLED_ALPHA`]; entries stay bounded.
pub fn random_sl2c(rng: &mut impl Rng) -> Sl2c {
    let mut g = || -> f64 { StandardNormal.sample(rng) };
    let quat = nalgebra::Vector4::new(g(), g(), g(), g()).normalize();
    let (a, b) = (Complex64::new(quat[0], quat[1]), Complex64::new(quat[2], quat[3]));
    let u = ComplexMat2(Matrix2::new(a, -b.conj(), b, a.conj()));
    let q = random_boost(rng, MAX_SAMPLED_ALPHA);
    let p = (ComplexMat2::identity() + *sigma_of_vec(&q).matrix()).scale((1.0 / (1.0 - q.norm_squared()).sqrt()).into());
    Sl2c::normalized(u * p).expect("product of unimodular factors")
}

fn mobius_oracle(rng: &mut impl Rng, n: u64, fault: bool) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let q = random_boost(rng, MAX_SAMPLED_ALPHA);
        let x = random_unit(rng);
        let direct = mobius_apply(&q, &x).expect("q inside the ball");
        let (matrix, trace) = mobius_apply_matrix(&q, &x).expect("q inside the ball");
        let lambda = lambda_factor(&q, &x).expect("q inside the ball");
        let offset = if fault { 1e-9 } else { 0.0 };
        worst = worst
            .max((direct.as_vec() - matrix.as_vec()).norm() + offset)
            .max((lambda - trace).abs());
    }
    worst
}

fn conformality(rng: &mut impl Rng, n: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let q = random_boost(rng, MAX_SAMPLED_ALPHA);
        let x = random_unit(rng);
        let (u, v) = (random_unit(rng), random_unit(rng));
        if let Ok(d) = conformality_defect(&q, &x, u.as_vec(), v.as_vec()) {
            worst = worst.max(d);
        }
    }
    worst
}

fn probability_normalization(rng: &mut impl Rng, n: u64) -> f64 {
    let mut worst: f64 = 0.0;
    let (mut general, mut simplified) = (vec![0.0; 8], vec![0.0; 8]);
    for _ in 0..n {
        let alpha = rng.random_range(0.01..MAX_SAMPLED_ALPHA);
        let x = random_unit(rng);
        for preset in [Preset::Cube8, Preset::Octa6] {
            let sys = preset_generators(preset, alpha, ProbabilityMode::LambdaWeighted).expect("valid preset");
            let k = sys.len();
            sys.lambda_probabilities_into(&x, &mut general[..k]);
            sys.symmetric_probabilities_into(&x, &mut simplified[..k]);
            let sum: f64 = simplified[..k].iter().sum();
            worst = worst.max((general[..k].iter().sum::<f64>() - 1.0).abs()).max((sum - 1.0).abs());
            for (g, s) in general[..k].iter().zip(&simplified[..k]) {
                worst = worst.max((g - s).abs());
            }
        }
    }
    worst
}

fn lorentz_closed_form_check(rng: &mut impl Rng, n: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let a = random_sl2c(rng);
        let closed = lorentz_closed_form(&a.coords()).expect("unimodular coordinates");
        worst = worst.max(closed.max_abs_diff(&lorentz_from_sl2c(&a)));
    }
    worst
}

pub fn run_check(kind: CheckKind, opts: &CheckOptions) -> CheckResult {
    let samples = match kind {
        CheckKind::PauliIdentities => kind.default_samples(),
        _ => opts.samples.unwrap_or(kind.default_samples()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (kind as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let max_deviation = match kind {
        CheckKind::MobiusOracle => mobius_oracle(&mut rng, samples, opts.inject_fault),
        CheckKind::Conformality => conformality(&mut rng, samples),
        CheckKind::ProbabilityNormalization => probability_normalization(&mut rng, samples),
        CheckKind::LorentzClosedForm => lorentz_closed_form_check(&mut rng, samples),
        CheckKind::PauliIdentities => pauli_identity_suite().max_deviation(),
    };
    CheckResult { kind, samples, max_deviation, tolerance: kind.tolerance() }
}

pub fn run_all(opts: &CheckOptions) -> Vec<CheckResult> {
    CheckKind::ALL.iter().map(|&k| run_check(k, opts)).collect()
}
