//! Multi-chain orchestration: independent seeded runs executed concurrently,
//! each into its own sink, combined afterwards.

use std::fmt;
use std::io;
use std::thread;

use crate::error::Result;
use crate::ifs::{run_chaos_game, ChaosGameConfig, ChaosSystem, Point2, PointSink, RunError, RunSummary};
use crate::mobius::UnitVec3;
use crate::raster::HistogramGrid;

/// Seeds for `chains` runs derived from `base`: `base + k`.
pub fn chain_seeds(base: u64, chains: usize) -> Vec<u64> {
    (0..chains as u64).map(|k| base.wrapping_add(k)).collect()
}

/// Runs one chain per config on its own thread. Each chain gets a fresh sink
/// from `make_sink`; results come back in config order.
pub fn run_chains<S, K, F>(
    system: &S,
    configs: &[ChaosGameConfig<S::Point>],
    make_sink: F,
) -> std::result::Result<Vec<(RunSummary<S::Point>, K)>, RunError<S::Point>>
where
    S: ChaosSystem + Sync,
    S::Point: fmt::Debug + Send + Sync,
    K: PointSink<S::Point> + Send,
    F: Fn() -> K + Sync,
{
    thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|config| {
                let make_sink = &make_sink;
                scope.spawn(move || {
                    let mut sink = make_sink();
                    run_chaos_game(system, config, &mut sink).map(|summary| (summary, sink))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("chain thread panicked")).collect()
    })
}

/// Several grids fed from the same stream, e.g. both hemispheres.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridSet(pub Vec<HistogramGrid>);

impl GridSet {
    pub fn merge_from(&mut self, other: &GridSet) -> Result<()> {
        if self.0.len() != other.0.len() {
            return Err(crate::Error::IncompatibleGrids);
        }
        self.0.iter_mut().zip(&other.0).try_for_each(|(a, b)| a.merge_from(b))
    }
}

impl PointSink<UnitVec3> for GridSet {
    fn accept(&mut self, p: &UnitVec3) -> io::Result<()> {
        for g in &mut self.0 {
            g.bin_spherical(p);
        }
        Ok(())
    }
}

impl PointSink<Point2> for GridSet {
    fn accept(&mut self, p: &Point2) -> io::Result<()> {
        for g in &mut self.0 {
            g.bin_planar(p);
        }
        Ok(())
    }
}

/// Folds per-chain grid sets into one.
pub fn merge_grid_sets(sets: impl IntoIterator<Item = GridSet>) -> Result<Option<GridSet>> {
    let mut iter = sets.into_iter();
    let Some(mut acc) = iter.next() else { return Ok(None) };
    for set in iter {
        acc.merge_from(&set)?;
    }
    Ok(Some(acc))
}
