//! Synthetic scenes with known ground truth.
//!
//! Actors move along piecewise-linear paths over a flat background and are
//! drawn in list order, so later actors cover earlier ones.

mod files;
mod scenario_file;
mod score;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::imaging::{ColorImage, ImageStack, ImagingError};

pub use files::{read_truth, write_render, write_truth, TRUTH_HEADER};
pub use scenario_file::parse_scenario;
pub use score::{score_tracking, ScoreReport};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("scenario line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("ground truth: {0}")]
    Truth(String),
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Disk { radius: f64 },
    Rectangle { width: u32, height: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub slice: u32,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Actor {
    pub shape: Shape,
    pub color: [u8; 3],
    /// Strictly increasing slices; the actor exists from the first to the
    /// last waypoint.
    pub path: Vec<Waypoint>,
    /// Inclusive slice ranges during which the actor is not drawn.
    pub hidden: Vec<(u32, u32)>,
}

impl Actor {
    pub fn entry(&self) -> u32 {
        self.path.first().map_or(0, |w| w.slice)
    }

    pub fn exit(&self) -> u32 {
        self.path.last().map_or(0, |w| w.slice)
    }

    /// Linearly interpolated centre, `None` outside `[entry, exit]`.
    pub fn position(&self, slice: u32) -> Option<(f64, f64)> {
        if slice < self.entry() || slice > self.exit() {
            return None;
        }
        let i = self.path.partition_point(|w| w.slice <= slice);
        let a = self.path[i - 1];
        if a.slice == slice || i == self.path.len() {
            return Some((a.x, a.y));
        }
        let b = self.path[i];
        let f = f64::from(slice - a.slice) / f64::from(b.slice - a.slice);
        Some((a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)))
    }

    pub fn is_hidden(&self, slice: u32) -> bool {
        self.hidden.iter().any(|&(a, b)| (a..=b).contains(&slice))
    }

    /// Pixels covered when centred at `(x, y)`, before clipping. The shape
    /// is placed on the pixel grid so that its pixel centroid is within half
    /// a pixel of `(x, y)` on each axis.
    fn footprint(&self, x: f64, y: f64) -> Vec<(i64, i64)> {
        match self.shape {
            Shape::Disk { radius } => {
                let (cx, cy) = (x.round() as i64, y.round() as i64);
                let r = radius.floor() as i64;
                let r2 = radius * radius;
                let mut out = Vec::new();
                for dy in -r..=r {
                    for dx in -r..=r {
                        if (dx * dx + dy * dy) as f64 <= r2 {
                            out.push((cx + dx, cy + dy));
                        }
                    }
                }
                out
            }
            Shape::Rectangle { width, height } => {
                let x0 = (x - f64::from(width - 1) / 2.0).round() as i64;
                let y0 = (y - f64::from(height - 1) / 2.0).round() as i64;
                (0..i64::from(height))
                    .flat_map(|dy| (0..i64::from(width)).map(move |dx| (x0 + dx, y0 + dy)))
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub width: usize,
    pub height: usize,
    pub background: [u8; 3],
    pub actors: Vec<Actor>,
    pub frame_count: u32,
    pub seed: u64,
    /// Uniform integer noise in `[-a, a]` added to every channel.
    pub noise_amplitude: u8,
    pub frame_interval: f64,
}

impl Scenario {
    pub fn new(width: usize, height: usize, background: [u8; 3], frame_count: u32) -> Self {
        Self {
            width,
            height,
            background,
            actors: Vec::new(),
            frame_count,
            seed: 0,
            noise_amplitude: 0,
            frame_interval: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidGeometry(m));
        if self.width == 0 || self.height == 0 {
            return bad("canvas must be non-empty".into());
        }
        if self.frame_count == 0 {
            return bad("frame count must be at least 1".into());
        }
        if !(self.frame_interval.is_finite() && self.frame_interval > 0.0) {
            return bad(format!("frame interval must be positive, got {}", self.frame_interval));
        }
        for (i, a) in self.actors.iter().enumerate() {
            let n = i + 1;
            match a.shape {
                Shape::Disk { radius } if !(radius.is_finite() && radius >= 0.0) => {
                    return bad(format!("actor {n}: radius must be non-negative"));
                }
                Shape::Rectangle { width, height } if width == 0 || height == 0 => {
                    return bad(format!("actor {n}: rectangle must be non-empty"));
                }
                _ => {}
            }
            if a.color == self.background {
                return bad(format!("actor {n}: color equals the background"));
            }
            if a.path.is_empty() {
                return bad(format!("actor {n}: empty path"));
            }
            if a.path.windows(2).any(|w| w[0].slice >= w[1].slice) {
                return bad(format!("actor {n}: waypoint slices must increase"));
            }
            if a.entry() == 0 || a.exit() > self.frame_count {
                return bad(format!("actor {n}: path outside slices 1..={}", self.frame_count));
            }
            if a.path.iter().any(|w| !(w.x.is_finite() && w.y.is_finite())) {
                return bad(format!("actor {n}: non-finite waypoint"));
            }
            if a.hidden.iter().any(|&(s, e)| s > e) {
                return bad(format!("actor {n}: hide range end before start"));
            }
        }
        Ok(())
    }

    /// The scene without actors or noise.
    pub fn background_image(&self) -> ColorImage {
        ColorImage::filled(self.width, self.height, self.background)
    }

    fn render_frame(&self, slice: u32) -> ColorImage {
        let mut img = self.background_image();
        for actor in &self.actors {
            if actor.is_hidden(slice) {
                continue;
            }
            let Some((x, y)) = actor.position(slice) else {
                continue;
            };
            for (px, py) in actor.footprint(x, y) {
                if (0..self.width as i64).contains(&px) && (0..self.height as i64).contains(&py) {
                    img.set_rgb(px as usize, py as usize, actor.color);
                }
            }
        }
        if self.noise_amplitude > 0 {
            let a = i16::from(self.noise_amplitude);
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(u64::from(slice));
            for y in 0..self.height {
                for x in 0..self.width {
                    let rgb = img.get_rgb(x, y).map(|v| {
                        (i16::from(v) + rng.random_range(-a..=a)).clamp(0, 255) as u8
                    });
                    img.set_rgb(x, y, rgb);
                }
            }
        }
        img
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthPoint {
    pub time: u32,
    pub x: f64,
    pub y: f64,
    pub visible: bool,
}

/// True centres of one actor for every slice in `[entry, exit]`, hidden
/// slices included.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorTruth {
    /// 1-based position in the scenario's actor list.
    pub actor: u32,
    pub points: Vec<TruthPoint>,
}

impl ActorTruth {
    pub fn entry(&self) -> Option<u32> {
        self.points.first().map(|p| p.time)
    }

    pub fn exit(&self) -> Option<u32> {
        self.points.last().map(|p| p.time)
    }

    pub fn at(&self, time: u32) -> Option<&TruthPoint> {
        self.points.iter().find(|p| p.time == time)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    pub actors: Vec<ActorTruth>,
}

/// Renders every frame. Noise is drawn from a stream keyed by the seed and
/// the slice number, so frames are independent of render order.
pub fn render_scenario(s: &Scenario) -> Result<(ImageStack, GroundTruth), SynthError> {
    s.validate()?;
    let frames: Vec<ColorImage> = (1..=s.frame_count)
        .into_par_iter()
        .map(|slice| s.render_frame(slice))
        .collect();
    let actors = s
        .actors
        .iter()
        .enumerate()
        .map(|(i, a)| ActorTruth {
            actor: i as u32 + 1,
            points: (a.entry()..=a.exit())
                .map(|t| {
                    let (x, y) = a.position(t).expect("inside path");
                    TruthPoint { time: t, x, y, visible: !a.is_hidden(t) }
                })
                .collect(),
        })
        .collect();
    Ok((ImageStack::new(frames, s.frame_interval)?, GroundTruth { actors }))
}
