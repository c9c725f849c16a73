//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p qfractal-core --test acceptance`.

use std::io;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::Vector3;
use num_complex::Complex64;
use qfractal_core::checks::{random_boost, random_sl2c, random_unit, MAX_SAMPLED_ALPHA};
use qfractal_core::ifs::{
    hutchinson_iterates, preset_generators, run_chaos_game, sierpinski_system, ChaosGameConfig, Point2, PointSink,
    Preset, RunSummary,
};
use qfractal_core::metrics::{
    conformality_defect, contraction_factor, directed_distance, fd_area_ratio, hausdorff_distance, PointSet,
    AREA_STEP,
};
use qfractal_core::mobius::{
    area_distortion, lambda_factor, mobius_apply, mobius_apply_matrix, GeneratorSystem, ProbabilityMode, UnitVec3,
};
use qfractal_core::pauli::{
    levi_civita, lorentz_closed_form, lorentz_from_sl2c, pauli_identity_suite, LorentzMat4,
};
use qfractal_core::raster::{log_tone, tone_map, write_pgm, GrayImage, GridDomain, HistogramGrid, ToneMode};
use qfractal_core::render::{chain_seeds, merge_grid_sets, run_chains, GridSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn output_dir() -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).expect("create output dir");
    dir
}

fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let mut rng = rng(101);
    let (mut dx, mut dl): (f64, f64) = (0.0, 0.0);
    for _ in 0..1_000_000 {
        let q = random_boost(&mut rng, MAX_SAMPLED_ALPHA);
        let x = random_unit(&mut rng);
        let direct = mobius_apply(&q, &x).unwrap();
        let (via_matrix, trace) = mobius_apply_matrix(&q, &x).unwrap();
        dx = dx.max((direct.as_vec() - via_matrix.as_vec()).norm());
        dl = dl.max((lambda_factor(&q, &x).unwrap() - trace).abs());
    }
    let elapsed = started.elapsed();
    Outcome::new(
        dx < 1e-12 && dl < 1e-12 && elapsed < Duration::from_secs(30),
        format!("10^6 samples: max|Δx| = {dx:.2e}, max|Δλ| = {dl:.2e} (tol 1e-12), {elapsed:.2?} (limit 30s)"),
    )
}

fn conformality() -> Outcome {
    let started = Instant::now();
    let mut rng = rng(102);
    let mut worst: f64 = 0.0;
    let mut probes = 0;
    while probes < 1000 {
        let q = random_boost(&mut rng, MAX_SAMPLED_ALPHA);
        let x = random_unit(&mut rng);
        let (u, v) = (random_unit(&mut rng), random_unit(&mut rng));
        if let Ok(d) = conformality_defect(&q, &x, u.as_vec(), v.as_vec()) {
            worst = worst.max(d);
            probes += 1;
        }
    }
    let elapsed = started.elapsed();
    Outcome::new(
        worst < 1e-4 && elapsed < Duration::from_secs(5),
        format!("10^3 probes, FD step 1e-6: max angle defect = {worst:.2e} (tol 1e-4), {elapsed:.2?} (limit 5s)"),
    )
}

fn lambda_structure() -> Outcome {
    let mut rng = rng(103);
    let mut directions = vec![UnitVec3::north(), UnitVec3::new(1.0, 0.0, 0.0).unwrap()];
    directions.extend((0..20).map(|_| random_unit(&mut rng)));
    let mut worst: f64 = 0.0;
    for k in 1..=9 {
        let alpha = k as f64 / 10.0;
        for n in &directions {
            let q = n.as_vec() * alpha;
            let lam_max = lambda_factor(&q, n).unwrap();
            let lam_min = lambda_factor(&q, &-*n).unwrap();
            // a point with n·x = -α
            let t = {
                let seed = if n.x().abs() < 0.9 { Vector3::x() } else { Vector3::y() };
                (seed - n.as_vec() * seed.dot(n.as_vec())).normalize()
            };
            let x = UnitVec3::normalize(-n.as_vec() * alpha + t * (1.0 - alpha * alpha).sqrt()).unwrap();
            let lam_mid = lambda_factor(&q, &x).unwrap();
            worst = worst
                .max((lam_max - (1.0 + alpha).powi(2) / 4.0).abs())
                .max((lam_min - (1.0 - alpha).powi(2) / 4.0).abs())
                .max((lam_mid - (lam_max * lam_min).sqrt()).abs());
        }
    }
    Outcome::new(worst < 1e-14, format!("α ∈ {{0.1..0.9}} × {} directions: max deviation = {worst:.2e} (tol 1e-14)", directions.len()))
}

fn probability_normalization() -> Outcome {
    let mut rng = rng(104);
    let (mut sum_dev, mut agree_dev): (f64, f64) = (0.0, 0.0);
    for preset in [Preset::Cube8, Preset::Octa6] {
        let sys = preset_generators(preset, 0.71, ProbabilityMode::LambdaWeighted).unwrap();
        let k = sys.len();
        let (mut general, mut simplified) = (vec![0.0; k], vec![0.0; k]);
        for _ in 0..10_000 {
            let x = random_unit(&mut rng);
            sys.lambda_probabilities_into(&x, &mut general);
            sys.symmetric_probabilities_into(&x, &mut simplified);
            sum_dev = sum_dev
                .max((general.iter().sum::<f64>() - 1.0).abs())
                .max((simplified.iter().sum::<f64>() - 1.0).abs());
            for (g, s) in general.iter().zip(&simplified) {
                agree_dev = agree_dev.max((g - s).abs());
            }
        }
    }
    // (1 + α² + 2α)/(8(1 + α²)) at α = 71/100, in hundredths-squared
    let exact = (10_000.0 + 5_041.0 + 14_200.0) / (8.0 * (10_000.0 + 5_041.0));
    let cube = preset_generators(Preset::Cube8, 0.71, ProbabilityMode::LambdaWeighted).unwrap();
    let p1 = cube.probabilities(&UnitVec3::north())[0];
    let p1_dev = (p1 - exact).abs();
    let reference_dev = (p1 - 0.24302).abs();
    Outcome::new(
        sum_dev < 1e-12 && agree_dev < 1e-12 && p1_dev < 5e-6,
        format!(
            "cube8+octa6, 2×10^4 points: max|Σp−1| = {sum_dev:.2e}, max|general−simplified| = {agree_dev:.2e} (tol 1e-12); \
             p_1(north) = {p1:.7} vs exact 29241/120328 = {exact:.7} (|Δ| = {p1_dev:.1e}, tol 5e-6; \
             rounded reference 0.24302 is {reference_dev:.1e} away)"
        ),
    )
}

fn area_distortion_check() -> Outcome {
    let mut rng = rng(105);
    let mut mc = Vec::new();
    let mut mc_pass = true;
    for alpha in [0.3, 0.71, 0.9] {
        let q = random_unit(&mut rng).as_vec() * alpha;
        let n = 1_000_000;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n {
            let [x, y, z]: [f64; 3] = UnitSphere.sample(&mut rng);
            let r = area_distortion(&q, &UnitVec3::new_unchecked(Vector3::new(x, y, z))).unwrap();
            sum += r;
            sum_sq += r * r;
        }
        let mean = sum / n as f64;
        let var = (sum_sq / n as f64 - mean * mean) * n as f64 / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        let z = (mean - 1.0) / se;
        mc_pass &= z.abs() <= 3.0;
        mc.push(format!("α={alpha}: mean {mean:.5} ({z:+.2} SE)"));
    }
    let mut fd_worst: f64 = 0.0;
    for _ in 0..1000 {
        let q = random_boost(&mut rng, MAX_SAMPLED_ALPHA);
        let x = random_unit(&mut rng);
        let fd = fd_area_ratio(&q, &x, AREA_STEP).unwrap();
        fd_worst = fd_worst.max((fd - area_distortion(&q, &x).unwrap()).abs());
    }
    Outcome::new(
        mc_pass && fd_worst < 1e-5,
        format!("MC over 10^6 points each: {} (limit 3 SE); FD vs closed form on 10^3 probes: max|Δ| = {fd_worst:.2e} (tol 1e-5)", mc.join(", ")),
    )
}

/// The closed form exactly as first written down, with `Λ⁰ⱼ = Λʲ₀` and the
/// Minkowski reading of `a·ā`. Kept here to map where it departs from the
/// trace formula.
fn literal_closed_form(a: &[Complex64; 4]) -> LorentzMat4 {
    let i = Complex64::i();
    let s = [a[1], a[2], a[3]];
    let abs_sq: f64 = s.iter().map(|z| z.norm_sqr()).sum();
    let mut m = LorentzMat4::identity().0;
    m[(0, 0)] = a[0].norm_sqr() + abs_sq;
    for j in 0..3 {
        let mut v = Complex64::new(2.0 * (a[0].conj() * s[j]).re, 0.0);
        for k in 0..3 {
            for l in 0..3 {
                v += i * levi_civita(j + 1, k + 1, l + 1) * s[k] * s[l].conj();
            }
        }
        m[(0, j + 1)] = v.re;
        m[(j + 1, 0)] = v.re;
        for k in 0..3 {
            let mut w = (a[0].norm_sqr() - abs_sq) * if j == k { 1.0 } else { 0.0 } + 2.0 * (s[j] * s[k].conj()).re;
            for l in 0..3 {
                w += 2.0 * (a[0].conj() * s[l]).im * levi_civita(j + 1, k + 1, l + 1);
            }
            m[(j + 1, k + 1)] = w;
        }
    }
    LorentzMat4(m)
}

fn lorentz_pipeline() -> Outcome {
    let mut rng = rng(106);
    let (mut closed_dev, mut metric_dev, mut hom_dev): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut literal_dev = [[0.0f64; 4]; 4];
    for _ in 0..10_000 {
        let a = random_sl2c(&mut rng);
        let b = random_sl2c(&mut rng);
        let trace = lorentz_from_sl2c(&a);
        closed_dev = closed_dev.max(lorentz_closed_form(&a.coords()).unwrap().max_abs_diff(&trace));
        metric_dev = metric_dev.max(trace.metric_defect());
        hom_dev = hom_dev.max(lorentz_from_sl2c(&(a * b)).max_abs_diff(&(trace * lorentz_from_sl2c(&b))));
        let literal = literal_closed_form(&a.coords());
        for (mu, row) in literal_dev.iter_mut().enumerate() {
            for (nu, d) in row.iter_mut().enumerate() {
                *d = d.max((literal.entry(mu, nu) - trace.entry(mu, nu)).abs());
            }
        }
    }
    // pure boosts: the literal form has no discrepancy
    let mut boost_dev: f64 = 0.0;
    for _ in 0..1000 {
        let a = random_sl2c(&mut rng).polar_decompose().positive;
        boost_dev = boost_dev.max(literal_closed_form(&a.coords()).max_abs_diff(&lorentz_from_sl2c(&a)));
    }
    let off: Vec<String> = (0..4)
        .flat_map(|mu| (0..4).map(move |nu| (mu, nu)))
        .filter(|&(mu, nu)| literal_dev[mu][nu] > 1e-10)
        .map(|(mu, nu)| format!("({mu},{nu})"))
        .collect();
    let map_as_recorded = off == ["(0,1)", "(0,2)", "(0,3)"] && boost_dev < 1e-10;
    let identities = pauli_identity_suite();
    let id_dev = identities.max_deviation();
    Outcome::new(
        closed_dev < 1e-10 && metric_dev < 1e-10 && hom_dev < 1e-9 && id_dev <= 1e-14 && map_as_recorded,
        format!(
            "10^4 samples: closed vs trace {closed_dev:.2e} (tol 1e-10), ΛᵀηΛ−η {metric_dev:.2e} (tol 1e-10), \
             homomorphism {hom_dev:.2e} (tol 1e-9); trace identities ({} families) {id_dev:.1e} (tol 1e-14); \
             symmetric Λ⁰ⱼ=Λʲ₀ variant departs at entries [{}] (max {:.2e}), exact on boosts ({boost_dev:.1e})",
            identities.checks.len(),
            off.join(" "),
            literal_dev[0].iter().copied().fold(0.0, f64::max),
        ),
    )
}

fn sierpinski() -> Outcome {
    let started = Instant::now();
    let system = sierpinski_system();
    let exact_half = system.maps().iter().all(|m| contraction_factor(m) == 0.5);
    let iterates = hutchinson_iterates(system.maps(), &[Point2::zeros()], 9);
    let sets: Vec<PointSet> = iterates.iter().map(|y| PointSet::planar(y.clone()).unwrap()).collect();
    let h: Vec<f64> = sets.windows(2).map(|w| hausdorff_distance(&w[1], &w[0]).unwrap()).collect();
    // h[n] = h(Y_{n+1}, Y_n)
    let worst_ratio = (2..=8).map(|n| h[n] / h[n - 1]).fold(0.0, f64::max);

    let mut points = Vec::new();
    run_chaos_game(&system, &ChaosGameConfig::planar(7, 100_000).with_burn_in(50), &mut points).unwrap();
    let spread = directed_distance(&PointSet::planar(points).unwrap(), &sets[8]).unwrap();
    let elapsed = started.elapsed();
    Outcome::new(
        exact_half && worst_ratio <= 0.5 + 1e-9 && spread <= 0.01 && elapsed < Duration::from_secs(60),
        format!(
            "contraction factors all 0.5: {exact_half}; max h(Y_n+1,Y_n)/h(Y_n,Y_n-1) for n=2..8 = {worst_ratio:.12} \
             (limit 0.5+1e-9); 10^5 chaos points max distance to Y_8 = {spread:.5} (limit 0.01); {elapsed:.2?} (limit 60s)"
        ),
    )
}

fn render(system: &GeneratorSystem, seed: u64, n: u64, domain: GridDomain) -> (HistogramGrid, RunSummary<UnitVec3>) {
    let mut grid = HistogramGrid::for_tone(600, 600, domain, ToneMode::Log);
    let summary = run_chaos_game(system, &ChaosGameConfig::spherical(seed, n), &mut grid).unwrap();
    (grid, summary)
}

fn pgm_bytes(grid: &HistogramGrid) -> Vec<u8> {
    let mut out = Vec::new();
    write_pgm(&tone_map(grid, ToneMode::Log).unwrap(), &mut out).unwrap();
    out
}

fn end_to_end() -> Outcome {
    let system = preset_generators(Preset::Cube8, 0.71, ProbabilityMode::LambdaWeighted).unwrap();
    let started = Instant::now();
    let (grid, _) = render(&system, 1, 10_000_000, GridDomain::UpperHemisphereXy);
    let bytes = pgm_bytes(&grid);
    let elapsed = started.elapsed();
    let path = output_dir().join("cube8_a0.71.pgm");
    std::fs::write(&path, &bytes).unwrap();
    let repeat = pgm_bytes(&render(&system, 1, 10_000_000, GridDomain::UpperHemisphereXy).0);

    let configs: Vec<_> = chain_seeds(1, 4).into_iter().map(|s| ChaosGameConfig::spherical(s, 2_500_000)).collect();
    let fresh = || GridSet(vec![HistogramGrid::for_tone(600, 600, GridDomain::UpperHemisphereXy, ToneMode::Log)]);
    let parallel = run_chains(&system, &configs, fresh).unwrap();
    let merged = merge_grid_sets(parallel.into_iter().map(|(_, g)| g)).unwrap().unwrap();
    let mut sequential = fresh();
    for c in &configs {
        let mut single = fresh();
        run_chaos_game(&system, c, &mut single).unwrap();
        sequential.merge_from(&single).unwrap();
    }
    Outcome::new(
        elapsed < Duration::from_secs(60) && bytes == repeat && bytes.len() == 15 + 360_000 && merged == sequential,
        format!(
            "cube8 α=0.71 10^7 points 600×600 log: {elapsed:.2?} (limit 60s), {} bytes, repeat byte-identical: {}, \
             4-chain merge equals merge of single runs: {}; image at {}",
            bytes.len(),
            bytes == repeat,
            merged == sequential,
            path.display()
        ),
    )
}

fn octahedron_sweep() -> Outcome {
    let dir = output_dir();
    let mut pass = true;
    let mut worst_z: f64 = 0.0;
    let mut images = Vec::new();
    for k in 4..=9 {
        let alpha = k as f64 / 10.0;
        let system = preset_generators(Preset::Octa6, alpha, ProbabilityMode::LambdaWeighted).unwrap();
        let (grid, summary) = render(&system, 3, 1_000_000, GridDomain::UpperHemisphereXy);
        let bytes = pgm_bytes(&grid);
        pass &= bytes == pgm_bytes(&render(&system, 3, 1_000_000, GridDomain::UpperHemisphereXy).0);
        for i in 0..summary.selection_counts.len() {
            let sigma = summary.probability_variance[i].sqrt();
            let z = (summary.selection_counts[i] as f64 - summary.probability_mass[i]) / sigma;
            worst_z = worst_z.max(z.abs());
        }
        std::fs::write(dir.join(format!("octa6_a{alpha:.2}.pgm")), &bytes).unwrap();
        images.push(bytes);
    }
    images.dedup();
    pass &= worst_z <= 4.0 && images.len() == 6;
    Outcome::new(
        pass,
        format!(
            "octa6 α=0.4..0.9, 10^6 points each: {} distinct deterministic images; max |count−Σp|/σ over all maps = {worst_z:.2} (limit 4)",
            images.len()
        ),
    )
}

struct Tee<'a> {
    grid: &'a mut HistogramGrid,
    upper: u64,
}

impl PointSink<UnitVec3> for Tee<'_> {
    fn accept(&mut self, p: &UnitVec3) -> io::Result<()> {
        if p.z() >= 0.0 {
            self.upper += 1;
        }
        self.grid.accept(p)
    }
}

fn raster_contracts() -> Outcome {
    let system = preset_generators(Preset::Cube8, 0.71, ProbabilityMode::LambdaWeighted).unwrap();
    let mut grid = HistogramGrid::for_tone(600, 600, GridDomain::UpperHemisphereXy, ToneMode::Log);
    let mut tee = Tee { grid: &mut grid, upper: 0 };
    run_chaos_game(&system, &ChaosGameConfig::spherical(9, 1_000_000), &mut tee).unwrap();
    let upper = tee.upper;
    let conserved = grid.total_hits() == upper;

    let mut header = Vec::new();
    write_pgm(&GrayImage::new(1, 1, vec![0]), &mut header).unwrap();
    let header_ok = header == [0x50, 0x35, 0x0A, 0x31, 0x20, 0x31, 0x0A, 0x32, 0x35, 0x35, 0x0A, 0x00];
    let mut two = Vec::new();
    write_pgm(&GrayImage::new(2, 1, vec![0, 255]), &mut two).unwrap();
    let header_ok = header_ok && two == b"P5\n2 1\n255\n\x00\xff";

    let ones = HistogramGrid::for_tone(4, 4, GridDomain::UnitSquare, ToneMode::Log);
    let mut tones_ok = tone_map(&ones, ToneMode::Log).unwrap().pixels.iter().all(|&p| p == 0);
    let e = std::f64::consts::E;
    tones_ok &= [1.0, e, e * e].map(|c| log_tone(c, e * e)) == [0, 128, 255];
    let mut hot = HistogramGrid::for_tone(3, 3, GridDomain::UnitSquare, ToneMode::Linear);
    hot.bin_planar(&Point2::new(0.34, 0.34));
    tones_ok &= tone_map(&hot, ToneMode::Linear).unwrap().pixels == [0, 0, 0, 0, 255, 0, 0, 0, 0];

    Outcome::new(
        conserved && header_ok && tones_ok,
        format!(
            "total hits {} = upper-hemisphere points {upper}: {conserved}; PGM header bytes exact: {header_ok}; tone examples exact: {tones_ok}",
            grid.total_hits()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("oracle equivalence", oracle_equivalence),
        ("conformality", conformality),
        ("λ structure", lambda_structure),
        ("probability normalization", probability_normalization),
        ("area distortion", area_distortion_check),
        ("Lorentz pipeline", lorentz_pipeline),
        ("Sierpinski", sierpinski),
        ("end-to-end fractal run", end_to_end),
        ("octahedron sweep", octahedron_sweep),
        ("raster contracts", raster_contracts),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{tag} [{:>2}] {name}: {}", i + 1, outcome.detail);
        failed += usize::from(!outcome.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
