//! Hit-count histograms, tone mapping and PGM output.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::ifs::{Point2, PointSink};
use crate::mobius::UnitVec3;

/// Region of the projection plane covered by a grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GridDomain {
    /// `[-1,1]²` in the `(x,y)` plane, fed by points with `z ≥ 0`.
    UpperHemisphereXy,
    /// `[-1,1]²` in the `(x,y)` plane, fed by points with `z < 0`.
    LowerHemisphereXy,
    /// `[0,1]²`, for planar systems.
    UnitSquare,
}

impl GridDomain {
    fn origin_and_extent(self) -> (f64, f64) {
        match self {
            Self::UpperHemisphereXy | Self::LowerHemisphereXy => (-1.0, 2.0),
            Self::UnitSquare => (0.0, 1.0),
        }
    }

    fn accepts_z(self, z: f64) -> bool {
        match self {
            Self::UpperHemisphereXy => z >= 0.0,
            Self::LowerHemisphereXy => z < 0.0,
            Self::UnitSquare => true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ToneMode {
    Log,
    Linear,
}

impl ToneMode {
    /// Counter value a grid must start from for this tone mode.
    pub fn initial_count(self) -> u64 {
        match self {
            Self::Log => 1,
            Self::Linear => 0,
        }
    }
}

impl std::str::FromStr for ToneMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "log" => Ok(Self::Log),
            "linear" => Ok(Self::Linear),
            other => Err(format!("unknown tone mode `{other}` (expected log or linear)")),
        }
    }
}

impl std::fmt::Display for ToneMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Log => "log",
            Self::Linear => "linear",
        })
    }
}

/// `r_x × r_y` array of 64-bit hit counters, row-major with `iy` as the row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HistogramGrid {
    rx: usize,
    ry: usize,
    domain: GridDomain,
    initial: u64,
    counts: Vec<u64>,
}

impl HistogramGrid {
    /// Panics if either dimension is zero.
    pub fn new(rx: usize, ry: usize, domain: GridDomain, initial: u64) -> Self {
        assert!(rx > 0 && ry > 0, "grid dimensions must be positive");
        Self { rx, ry, domain, initial, counts: vec![initial; rx * ry] }
    }

    pub fn for_tone(rx: usize, ry: usize, domain: GridDomain, tone: ToneMode) -> Self {
        Self::new(rx, ry, domain, tone.initial_count())
    }

    pub fn rx(&self) -> usize {
        self.rx
    }

    pub fn ry(&self) -> usize {
        self.ry
    }

    pub fn domain(&self) -> GridDomain {
        self.domain
    }

    pub fn initial(&self) -> u64 {
        self.initial
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, ix: usize, iy: usize) -> u64 {
        self.counts[iy * self.rx + ix]
    }

    /// Cell for a plane coordinate: `round((x - x0)/δ)` clamped to `[0, r-1]`.
    pub fn cell_of(&self, x: f64, y: f64) -> (usize, usize) {
        let (origin, extent) = self.domain.origin_and_extent();
        let index = |v: f64, r: usize| {
            let delta = extent / r as f64;
            let i = ((v - origin) / delta).round();
            // NaN and negatives saturate to 0 in the cast
            (i as usize).min(r - 1)
        };
        (index(x, self.rx), index(y, self.ry))
    }

    fn hit(&mut self, ix: usize, iy: usize) {
        self.counts[iy * self.rx + ix] += 1;
    }

    /// Bins a sphere point by its `(x,y)` projection. Points outside the grid's
    /// hemisphere are skipped and yield `None`.
    pub fn bin_spherical(&mut self, p: &UnitVec3) -> Option<(usize, usize)> {
        if !self.domain.accepts_z(p.z()) {
            return None;
        }
        let cell = self.cell_of(p.x(), p.y());
        self.hit(cell.0, cell.1);
        Some(cell)
    }

    pub fn bin_planar(&mut self, p: &Point2) -> (usize, usize) {
        let cell = self.cell_of(p.x, p.y);
        self.hit(cell.0, cell.1);
        cell
    }

    /// Number of binned points, `Σ(c - initial)`.
    pub fn total_hits(&self) -> u64 {
        self.counts.iter().map(|c| c - self.initial).sum()
    }

    pub fn max_count(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(self.initial)
    }

    fn compatible(&self, other: &Self) -> bool {
        self.rx == other.rx && self.ry == other.ry && self.domain == other.domain && self.initial == other.initial
    }

    /// Counterwise sum with the shared initial offset counted once.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.merge_from(other)?;
        Ok(out)
    }

    pub fn merge_from(&mut self, other: &Self) -> Result<()> {
        if !self.compatible(other) {
            return Err(Error::IncompatibleGrids);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b - other.initial;
        }
        Ok(())
    }
}

impl PointSink<UnitVec3> for HistogramGrid {
    fn accept(&mut self, point: &UnitVec3) -> io::Result<()> {
        self.bin_spherical(point);
        Ok(())
    }
}

impl PointSink<Point2> for HistogramGrid {
    fn accept(&mut self, point: &Point2) -> io::Result<()> {
        self.bin_planar(point);
        Ok(())
    }
}

/// 8-bit grayscale image, row-major, row 0 at the top.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Self {
        assert_eq!(pixels.len(), width * height, "pixel buffer size mismatch");
        Self { width, height, pixels }
    }

    pub fn pixel(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn flip_vertical(&mut self) {
        let w = self.width;
        for y in 0..self.height / 2 {
            let (top, bottom) = self.pixels.split_at_mut((self.height - 1 - y) * w);
            top[y * w..(y + 1) * w].swap_with_slice(&mut bottom[..w]);
        }
    }
}

/// `round(255·ln c / ln c_max)`; zero when `c_max ≤ 1`.
pub fn log_tone(c: f64, c_max: f64) -> u8 {
    if c_max <= 1.0 {
        return 0;
    }
    (255.0 * c.ln() / c_max.ln()).round().clamp(0.0, 255.0) as u8
}

/// `round(255·c / c_max)`; zero when `c_max = 0`.
pub fn linear_tone(c: f64, c_max: f64) -> u8 {
    if c_max <= 0.0 {
        return 0;
    }
    (255.0 * c / c_max).round().clamp(0.0, 255.0) as u8
}

pub fn tone_map(grid: &HistogramGrid, mode: ToneMode) -> Result<GrayImage> {
    if mode == ToneMode::Log && grid.initial != 1 {
        return Err(Error::LogToneNeedsUnitInitial);
    }
    let c_max = grid.max_count() as f64;
    let tone = match mode {
        ToneMode::Log => log_tone,
        ToneMode::Linear => linear_tone,
    };
    let pixels = grid.counts.iter().map(|&c| tone(c as f64, c_max)).collect();
    Ok(GrayImage::new(grid.rx, grid.ry, pixels))
}

/// Binary PGM: `P5\n<w> <h>\n255\n` followed by the raw pixel bytes.
pub fn write_pgm<W: Write>(img: &GrayImage, mut out: W) -> io::Result<()> {
    write!(out, "P5\n{} {}\n255\n", img.width, img.height)?;
    out.write_all(&img.pixels)?;
    out.flush()
}

/// Plain PGM (P2), one row of whitespace-separated values per line.
pub fn write_pgm_plain<W: Write>(img: &GrayImage, mut out: W) -> io::Result<()> {
    write!(out, "P2\n{} {}\n255\n", img.width, img.height)?;
    for row in img.pixels.chunks(img.width) {
        let line: Vec<String> = row.iter().map(u8::to_string).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    out.flush()
}
