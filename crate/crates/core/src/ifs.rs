//! Chaos-game driver for spherical (Möbius) and planar (affine) iterated
//! function systems, plus the built-in presets and a deterministic Hutchinson
//! iteration for small planar attractors.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::time::{Duration, Instant};

use nalgebra::{Matrix2, Matrix3, Vector2};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mobius::{BoostGenerator, GeneratorSystem, ProbabilityMode, UnitVec3};

pub type Point2 = Vector2<f64>;

/// Burn-in used when none is configured.
pub const DEFAULT_BURN_IN: u64 = 1000;

/// Identity of the random source. Streams are reproducible for a given seed
/// within builds that share this constant.
pub const RNG_ALGORITHM: &str = "chacha8 (rand_chacha 0.9, seed_from_u64); r = (next_u64 >> 11) * 2^-53";

/// Tolerance on point equality when deduplicating Hutchinson iterates.
pub const DEDUP_TOL: f64 = 1e-12;

/// Seedable source of uniform reals in `[0, 1)` with 53 random mantissa bits.
#[derive(Clone, Debug)]
pub struct UniformSource(ChaCha8Rng);

impl UniformSource {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Built-in generator layouts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Preset {
    /// Eight vertices of an inscribed cube, one at the north pole.
    #[default]
    Cube8,
    /// Six vertices of the octahedron, i.e. the coordinate axes.
    Octa6,
    /// User-supplied generators.
    Custom,
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cube8" => Ok(Self::Cube8),
            "octa6" => Ok(Self::Octa6),
            "custom" => Ok(Self::Custom),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Cube8 => "cube8",
            Self::Octa6 => "octa6",
            Self::Custom => "custom",
        })
    }
}

/// Boost directions of a built-in preset.
pub fn preset_directions(preset: Preset) -> Result<Vec<UnitVec3>> {
    let raw: Vec<[f64; 3]> = match preset {
        Preset::Cube8 => {
            // (±1,±1,±1)/√3 rotated so that one vertex sits at the north pole
            let a = 2.0 * 2f64.sqrt() / 3.0;
            let b = 2f64.sqrt() / 3.0;
            let c = (2.0f64 / 3.0).sqrt();
            let t = 1.0 / 3.0;
            vec![
                [0.0, 0.0, 1.0],
                [a, 0.0, t],
                [-b, c, t],
                [-b, -c, t],
                [b, c, -t],
                [b, -c, -t],
                [-a, 0.0, -t],
                [0.0, 0.0, -1.0],
            ]
        }
        Preset::Octa6 => vec![
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ],
        Preset::Custom => return Err(Error::CustomPreset),
    };
    raw.into_iter().map(|[x, y, z]| UnitVec3::new(x, y, z)).collect()
}

/// Preset directions with a common boost velocity `alpha`.
pub fn preset_generators(preset: Preset, alpha: f64, mode: ProbabilityMode) -> Result<GeneratorSystem> {
    let generators = preset_directions(preset)?
        .into_iter()
        .map(|n| BoostGenerator::new(n, alpha))
        .collect::<Result<Vec<_>>>()?;
    GeneratorSystem::new(generators, mode)
}

/// Planar affine map `x ↦ A x + a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap2 {
    pub linear: Matrix2<f64>,
    pub translation: Vector2<f64>,
}

impl AffineMap2 {
    pub fn new(linear: Matrix2<f64>, translation: Vector2<f64>) -> Self {
        Self { linear, translation }
    }

    pub fn identity() -> Self {
        Self::new(Matrix2::identity(), Vector2::zeros())
    }

    #[inline]
    pub fn apply(&self, p: &Point2) -> Point2 {
        self.linear * p + self.translation
    }

    /// The 3×3 matrix `[[A, a], [0, 1]]`.
    pub fn to_homogeneous(&self) -> Matrix3<f64> {
        let mut m = Matrix3::identity();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.linear);
        m.fixed_view_mut::<2, 1>(0, 2).copy_from(&self.translation);
        m
    }
}

pub fn affine_apply(m: &AffineMap2, p: &Point2) -> Point2 {
    m.apply(p)
}

/// Affine maps with fixed (place-independent) probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarIfs {
    maps: Vec<AffineMap2>,
    probabilities: Vec<f64>,
}

impl PlanarIfs {
    pub fn new(maps: Vec<AffineMap2>, probabilities: Vec<f64>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::EmptySystem);
        }
        let sum: f64 = probabilities.iter().sum();
        if probabilities.len() != maps.len()
            || probabilities.iter().any(|&p| !(p > 0.0))
            || (sum - 1.0).abs() > 1e-12
        {
            return Err(Error::InvalidProbabilities { sum });
        }
        Ok(Self { maps, probabilities })
    }

    pub fn uniform(maps: Vec<AffineMap2>) -> Result<Self> {
        let n = maps.len();
        Self::new(maps, vec![1.0 / n as f64; n])
    }

    pub fn maps(&self) -> &[AffineMap2] {
        &self.maps
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

/// The three half-scale maps whose attractor is the Sierpinski triangle with
/// vertices `(0,0)`, `(1,0)`, `(0.5,1)`; each chosen with probability 1/3.
pub fn sierpinski_system() -> PlanarIfs {
    let half = Matrix2::identity() * 0.5;
    let maps = [(0.0, 0.0), (0.5, 0.0), (0.25, 0.5)]
        .into_iter()
        .map(|(x, y)| AffineMap2::new(half, Vector2::new(x, y)))
        .collect();
    PlanarIfs::uniform(maps).expect("three maps with probability 1/3")
}

/// Removes points within [`DEDUP_TOL`] (per coordinate) of an earlier point.
pub fn dedup_points(points: impl IntoIterator<Item = Point2>) -> Vec<Point2> {
    let key = |p: &Point2| ((p.x / DEDUP_TOL).floor() as i64, (p.y / DEDUP_TOL).floor() as i64);
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut kept: Vec<Point2> = Vec::new();
    for p in points {
        let (kx, ky) = key(&p);
        let duplicate = (-1..=1).any(|dx| {
            (-1..=1).any(|dy| {
                buckets.get(&(kx + dx, ky + dy)).is_some_and(|idx| {
                    idx.iter().any(|&i| (kept[i] - p).amax() <= DEDUP_TOL)
                })
            })
        });
        if !duplicate {
            buckets.entry((kx, ky)).or_default().push(kept.len());
            kept.push(p);
        }
    }
    kept
}

/// Hutchinson operator `F(Y) = f₁(Y) ∪ … ∪ f_n(Y)` on a finite set.
pub fn hutchinson_step(maps: &[AffineMap2], y: &[Point2]) -> Vec<Point2> {
    dedup_points(maps.iter().flat_map(|m| y.iter().map(move |p| m.apply(p))))
}

/// `[Y, F(Y), F²(Y), …, F^depth(Y)]`.
pub fn hutchinson_iterates(maps: &[AffineMap2], start: &[Point2], depth: usize) -> Vec<Vec<Point2>> {
    let mut out = vec![dedup_points(start.iter().copied())];
    for _ in 0..depth {
        let next = hutchinson_step(maps, out.last().unwrap());
        out.push(next);
    }
    out
}

/// A system the chaos game can drive.
pub trait ChaosSystem {
    type Point: Copy;

    fn map_count(&self) -> usize;

    /// Writes the selection probabilities at `x` into `out`.
    fn probabilities_into(&self, x: &Self::Point, out: &mut [f64]);

    fn apply(&self, index: usize, x: &Self::Point) -> Self::Point;
}

impl ChaosSystem for GeneratorSystem {
    type Point = UnitVec3;

    fn map_count(&self) -> usize {
        self.len()
    }

    fn probabilities_into(&self, x: &UnitVec3, out: &mut [f64]) {
        GeneratorSystem::probabilities_into(self, x, out)
    }

    #[inline]
    fn apply(&self, index: usize, x: &UnitVec3) -> UnitVec3 {
        self.generators()[index].apply(x)
    }
}

impl ChaosSystem for PlanarIfs {
    type Point = Point2;

    fn map_count(&self) -> usize {
        self.maps.len()
    }

    fn probabilities_into(&self, _x: &Point2, out: &mut [f64]) {
        out.copy_from_slice(&self.probabilities);
    }

    #[inline]
    fn apply(&self, index: usize, x: &Point2) -> Point2 {
        self.maps[index].apply(x)
    }
}

/// Smallest (0-based) index whose cumulative probability exceeds `r`; the
/// last index if rounding leaves the total at or below `r`.
#[inline]
pub fn select_index(probabilities: &[f64], r: f64) -> usize {
    let mut cumulative = 0.0;
    for (i, p) in probabilities.iter().enumerate() {
        cumulative += p;
        if cumulative > r {
            return i;
        }
    }
    probabilities.len() - 1
}

/// One chaos-game step: select a map for `r ∈ [0,1)` and apply it.
pub fn chaos_step<S: ChaosSystem>(system: &S, x: &S::Point, r: f64) -> (usize, S::Point) {
    let mut probs = vec![0.0; system.map_count()];
    system.probabilities_into(x, &mut probs);
    let index = select_index(&probs, r);
    (index, system.apply(index, x))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChaosGameConfig<P> {
    pub seed: u64,
    pub n_points: u64,
    pub burn_in: u64,
    pub initial_point: P,
}

impl ChaosGameConfig<UnitVec3> {
    /// Starts at the north pole with the default burn-in.
    pub fn spherical(seed: u64, n_points: u64) -> Self {
        Self { seed, n_points, burn_in: DEFAULT_BURN_IN, initial_point: UnitVec3::north() }
    }
}

impl ChaosGameConfig<Point2> {
    /// Starts at the origin with the default burn-in.
    pub fn planar(seed: u64, n_points: u64) -> Self {
        Self { seed, n_points, burn_in: DEFAULT_BURN_IN, initial_point: Point2::zeros() }
    }
}

impl<P> ChaosGameConfig<P> {
    pub fn with_burn_in(mut self, burn_in: u64) -> Self {
        self.burn_in = burn_in;
        self
    }
}

/// Statistics of one chaos-game run.
///
/// `selection_counts` covers burn-in and emitted steps alike.
/// `probability_mass[i]` is `Σ_t p_i(x_t)` over the same steps and
/// `probability_variance[i]` is `Σ_t p_i(x_t)(1 - p_i(x_t))`; the difference
/// `selection_counts[i] - probability_mass[i]` is a martingale with that
/// quadratic variation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary<P> {
    pub points_emitted: u64,
    pub burn_in: u64,
    pub selection_counts: Vec<u64>,
    pub probability_mass: Vec<f64>,
    pub probability_variance: Vec<f64>,
    pub final_point: P,
    pub wall_time: Duration,
}

impl<P> RunSummary<P> {
    pub fn steps(&self) -> u64 {
        self.selection_counts.iter().sum()
    }

    /// Average of `p_i` along the trajectory.
    pub fn mean_probabilities(&self) -> Vec<f64> {
        let steps = self.steps().max(1) as f64;
        self.probability_mass.iter().map(|m| m / steps).collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError<P: fmt::Debug> {
    #[error("n_points must be at least 1")]
    NoPoints,
    /// The sink rejected a point; `partial` describes the run up to and
    /// including the rejected step.
    #[error("point sink failed after {} points: {source}", partial.points_emitted)]
    Sink {
        #[source]
        source: io::Error,
        partial: Box<RunSummary<P>>,
    },
}

/// Consumer of emitted chaos-game points.
pub trait PointSink<P> {
    fn accept(&mut self, point: &P) -> io::Result<()>;
}

impl<P: Clone> PointSink<P> for Vec<P> {
    fn accept(&mut self, point: &P) -> io::Result<()> {
        self.push(point.clone());
        Ok(())
    }
}

impl<P, S: PointSink<P> + ?Sized> PointSink<P> for &mut S {
    fn accept(&mut self, point: &P) -> io::Result<()> {
        (**self).accept(point)
    }
}

/// Writes one point per line, coordinates separated by single spaces, each
/// with 17 significant digits.
pub struct TextEmitter<W: Write>(pub W);

impl<W: Write> TextEmitter<W> {
    pub fn into_inner(self) -> W {
        self.0
    }
}

impl<W: Write> PointSink<UnitVec3> for TextEmitter<W> {
    fn accept(&mut self, p: &UnitVec3) -> io::Result<()> {
        writeln!(self.0, "{:.16e} {:.16e} {:.16e}", p.x(), p.y(), p.z())
    }
}

impl<W: Write> PointSink<Point2> for TextEmitter<W> {
    fn accept(&mut self, p: &Point2) -> io::Result<()> {
        writeln!(self.0, "{:.16e} {:.16e}", p.x, p.y)
    }
}

/// Runs `burn_in + n_points` steps and hands the last `n_points` to `sink`.
pub fn run_chaos_game<S, K>(
    system: &S,
    config: &ChaosGameConfig<S::Point>,
    mut sink: K,
) -> std::result::Result<RunSummary<S::Point>, RunError<S::Point>>
where
    S: ChaosSystem,
    S::Point: fmt::Debug,
    K: PointSink<S::Point>,
{
    if config.n_points == 0 {
        return Err(RunError::NoPoints);
    }
    let started = Instant::now();
    let n = system.map_count();
    let mut rng = UniformSource::new(config.seed);
    let mut probs = vec![0.0; n];
    let mut summary = RunSummary {
        points_emitted: 0,
        burn_in: config.burn_in,
        selection_counts: vec![0; n],
        probability_mass: vec![0.0; n],
        probability_variance: vec![0.0; n],
        final_point: config.initial_point,
        wall_time: Duration::ZERO,
    };
    let mut x = config.initial_point;
    for step in 0..config.burn_in + config.n_points {
        system.probabilities_into(&x, &mut probs);
        let index = select_index(&probs, rng.next_f64());
        summary.selection_counts[index] += 1;
        for ((mass, var), &p) in summary
            .probability_mass
            .iter_mut()
            .zip(summary.probability_variance.iter_mut())
            .zip(&probs)
        {
            *mass += p;
            *var += p * (1.0 - p);
        }
        x = system.apply(index, &x);
        if step >= config.burn_in {
            if let Err(source) = sink.accept(&x) {
                summary.final_point = x;
                summary.wall_time = started.elapsed();
                return Err(RunError::Sink { source, partial: Box::new(summary) });
            }
            summary.points_emitted += 1;
        }
    }
    summary.final_point = x;
    summary.wall_time = started.elapsed();
    Ok(summary)
}
