use std::fmt::Debug;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use qfractal_core::checks::{run_all, CheckOptions};
use qfractal_core::ifs::{
    preset_generators, run_chaos_game, sierpinski_system, ChaosGameConfig, ChaosSystem, Point2, PointSink, RunError,
    RunSummary, TextEmitter, RNG_ALGORITHM,
};
use qfractal_core::mobius::{BoostGenerator, GeneratorSystem};
use qfractal_core::raster::{tone_map, write_pgm, write_pgm_plain, GridDomain, HistogramGrid};
use qfractal_core::render::{chain_seeds, merge_grid_sets, run_chains, GridSet};

use crate::config::{Hemisphere, Mode, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad invocation or configuration; exit status 2.
    #[error("{0}")]
    Usage(String),
    /// Anything that fails after the configuration was accepted; exit status 1.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Runtime(_) => 1,
        }
    }
}

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

pub fn build_system(config: &RunConfig) -> Result<GeneratorSystem, CliError> {
    let system = match config.preset {
        qfractal_core::Preset::Custom => {
            let gens = config
                .generators
                .iter()
                .map(|g| BoostGenerator::new(g.direction, g.alpha))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            GeneratorSystem::new(gens, config.probability)
        }
        preset => preset_generators(preset, config.alpha, config.probability),
    };
    system.map_err(|e| CliError::Usage(e.to_string()))
}

/// Output path for one hemisphere; with `both`, the lower one gets a suffix.
fn image_paths(config: &RunConfig) -> Vec<(GridDomain, PathBuf)> {
    match (config.mode, config.hemisphere) {
        (Mode::Sierpinski, _) => vec![(GridDomain::UnitSquare, config.out.clone())],
        (Mode::Quantum, Hemisphere::Upper) => vec![(GridDomain::UpperHemisphereXy, config.out.clone())],
        (Mode::Quantum, Hemisphere::Lower) => vec![(GridDomain::LowerHemisphereXy, config.out.clone())],
        (Mode::Quantum, Hemisphere::Both) => vec![
            (GridDomain::UpperHemisphereXy, config.out.clone()),
            (GridDomain::LowerHemisphereXy, with_suffix(&config.out, "_lower")),
        ],
    }
}

pub fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}{suffix}"),
    };
    path.with_file_name(name)
}

/// Grid set plus an optional raw point dump.
struct RenderSink<'a> {
    grids: GridSet,
    dump: Option<&'a mut TextEmitter<BufWriter<File>>>,
}

impl<P> PointSink<P> for RenderSink<'_>
where
    GridSet: PointSink<P>,
    TextEmitter<BufWriter<File>>: PointSink<P>,
{
    fn accept(&mut self, p: &P) -> io::Result<()> {
        self.grids.accept(p)?;
        if let Some(dump) = self.dump.as_deref_mut() {
            dump.accept(p)?;
        }
        Ok(())
    }
}

struct RenderOutcome {
    grids: GridSet,
    selection_counts: Vec<u64>,
    points: u64,
    wall_time: Duration,
}

fn run_system<S>(
    system: &S,
    config: &RunConfig,
    initial: ChaosGameConfig<S::Point>,
    fresh: GridSet,
) -> Result<RenderOutcome, CliError>
where
    S: ChaosSystem + Sync,
    S::Point: Debug + Send + Sync,
    GridSet: PointSink<S::Point>,
    TextEmitter<BufWriter<File>>: PointSink<S::Point>,
{
    let started = Instant::now();
    let configs: Vec<_> = chain_seeds(config.seed, config.seeds)
        .into_iter()
        .map(|seed| ChaosGameConfig { seed, ..initial })
        .collect();
    let run_error = |e: RunError<S::Point>| CliError::Runtime(e.to_string());

    let (summaries, grids) = if let Some(path) = &config.dump_points {
        let file = File::create(path).map_err(|e| io_error(path, e))?;
        let mut dump = TextEmitter(BufWriter::new(file));
        let mut sink = RenderSink { grids: fresh, dump: Some(&mut dump) };
        let summary = run_chaos_game(system, &configs[0], &mut sink).map_err(run_error)?;
        let grids = sink.grids;
        dump.0.flush().map_err(|e| io_error(path, e))?;
        (vec![summary], grids)
    } else {
        let results = run_chains(system, &configs, || fresh.clone()).map_err(run_error)?;
        let (summaries, sets): (Vec<RunSummary<S::Point>>, Vec<GridSet>) = results.into_iter().unzip();
        let grids = merge_grid_sets(sets).map_err(|e| CliError::Runtime(e.to_string()))?.expect("at least one chain");
        (summaries, grids)
    };

    let mut selection_counts = vec![0u64; system.map_count()];
    for s in &summaries {
        for (acc, c) in selection_counts.iter_mut().zip(&s.selection_counts) {
            *acc += c;
        }
    }
    Ok(RenderOutcome {
        grids,
        selection_counts,
        points: summaries.iter().map(|s| s.points_emitted).sum(),
        wall_time: started.elapsed(),
    })
}

fn write_image(grid: &HistogramGrid, config: &RunConfig, file: File, path: &Path) -> Result<(), CliError> {
    let mut img = tone_map(grid, config.tone).map_err(|e| CliError::Runtime(e.to_string()))?;
    if config.flip {
        img.flip_vertical();
    }
    let out = BufWriter::new(file);
    let written = if config.plain { write_pgm_plain(&img, out) } else { write_pgm(&img, out) };
    written.map_err(|e| io_error(path, e))
}

/// Renders one image set and prints the run summary.
pub fn render(config: &RunConfig, out: &mut impl Write) -> Result<(), CliError> {
    let targets = image_paths(config);
    // fail on unwritable outputs before spending time on the run
    let files = targets
        .iter()
        .map(|(_, path)| File::create(path).map_err(|e| io_error(path, e)))
        .collect::<Result<Vec<_>, _>>()?;
    let (rx, ry) = config.resolution;
    let fresh = GridSet(targets.iter().map(|&(d, _)| HistogramGrid::for_tone(rx, ry, d, config.tone)).collect());

    let outcome = match config.mode {
        Mode::Quantum => {
            let system = build_system(config)?;
            let initial = ChaosGameConfig::spherical(config.seed, config.points).with_burn_in(config.burn_in);
            run_system(&system, config, initial, fresh)?
        }
        Mode::Sierpinski => {
            let initial: ChaosGameConfig<Point2> =
                ChaosGameConfig::planar(config.seed, config.points).with_burn_in(config.burn_in);
            run_system(&sierpinski_system(), config, initial, fresh)?
        }
    };
    for ((grid, (_, path)), file) in outcome.grids.0.iter().zip(&targets).zip(files) {
        write_image(grid, config, file, path)?;
    }
    print_summary(config, &outcome, &targets, out).map_err(|e| CliError::Runtime(e.to_string()))
}

fn print_summary(
    config: &RunConfig,
    outcome: &RenderOutcome,
    targets: &[(GridDomain, PathBuf)],
    out: &mut impl Write,
) -> io::Result<()> {
    writeln!(out, "mode: {}", config.mode)?;
    if config.mode == Mode::Quantum {
        writeln!(out, "preset: {}", config.preset)?;
        if config.preset != qfractal_core::Preset::Custom {
            writeln!(out, "alpha: {}", config.alpha)?;
        }
        writeln!(out, "probability: {}", config.probability)?;
        writeln!(out, "hemisphere: {}", config.hemisphere)?;
    }
    writeln!(out, "seed: {}", config.seed)?;
    writeln!(out, "chains: {}", config.seeds)?;
    writeln!(out, "rng: {RNG_ALGORITHM}")?;
    writeln!(out, "points: {}", outcome.points)?;
    writeln!(out, "burn_in: {}", config.burn_in)?;
    let counts: Vec<String> = outcome.selection_counts.iter().map(u64::to_string).collect();
    writeln!(out, "map_counts: {}", counts.join(" "))?;
    writeln!(out, "resolution: {}x{}", config.resolution.0, config.resolution.1)?;
    writeln!(out, "tone: {}", config.tone)?;
    for (grid, (_, path)) in outcome.grids.0.iter().zip(targets) {
        writeln!(out, "binned: {} -> {}", grid.total_hits(), path.display())?;
    }
    writeln!(out, "wall_time_s: {:.3}", outcome.wall_time.as_secs_f64())
}

pub fn sweep(config: &RunConfig, alphas: &[f64], out: &mut impl Write) -> Result<(), CliError> {
    if alphas.is_empty() {
        return Err(CliError::Usage("sweep needs at least one alpha".into()));
    }
    if config.mode != Mode::Quantum {
        return Err(CliError::Usage("sweep only applies to quantum mode".into()));
    }
    for &alpha in alphas {
        let mut panel = config.clone();
        panel.alpha = alpha;
        for g in &mut panel.generators {
            g.alpha = alpha;
        }
        panel.out = with_suffix(&config.out, &format!("_a{alpha:.2}"));
        if let Some(dump) = &config.dump_points {
            panel.dump_points = Some(with_suffix(dump, &format!("_a{alpha:.2}")));
        }
        render(&panel, out)?;
        writeln!(out).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    Ok(())
}

/// Runs the self-check suite; fails iff any check exceeds its tolerance.
pub fn check(opts: &CheckOptions, out: &mut impl Write) -> Result<(), CliError> {
    let results = run_all(opts);
    let write_err = |e: io::Error| CliError::Runtime(e.to_string());
    for r in &results {
        writeln!(
            out,
            "{}: samples={} max_deviation={:.3e} tolerance={:e} {}",
            r.kind.name(),
            r.samples,
            r.max_deviation,
            r.tolerance,
            if r.passed() { "PASS" } else { "FAIL" }
        )
        .map_err(write_err)?;
    }
    let failed = results.iter().filter(|r| !r.passed()).count();
    if failed > 0 {
        return Err(CliError::Runtime(format!("{failed} check(s) failed")));
    }
    Ok(())
}
