//! Traffic-flow characteristics computed from NTXY records inside a
//! pedestrian trap.
//!
//! Times are slice numbers; per-second quantities divide by the frame
//! interval `theta_seconds`.

mod report;

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::calibration::TrapConfig;
use crate::tracking::NtxyRecord;

pub use report::{write_report, write_series};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("pedestrian {0} has fewer than two observations")]
    SingleObservation(u32),
    #[error("interval must satisfy T1 < T2, got [{0}, {1}]")]
    InvalidInterval(u32, u32),
    #[error("frame interval must be positive, got {0}")]
    InvalidFrameInterval(f64),
    #[error("pedestrian {pedestrian} has two records at T = {time}")]
    DuplicateTime { pedestrian: u32, time: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub time: u32,
    pub x: f64,
    pub y: f64,
}

/// One pedestrian's in-trap observations, uniformly spaced by `dt` slices.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub pedestrian_number: u32,
    pub observations: Vec<Observation>,
    pub dt: u32,
    pub theta_seconds: f64,
}

impl Track {
    /// First recorded slice, `T_i`.
    pub fn t_in(&self) -> u32 {
        self.observations.first().map_or(0, |o| o.time)
    }

    /// Last recorded slice, `T_o`.
    pub fn t_out(&self) -> u32 {
        self.observations.last().map_or(0, |o| o.time)
    }

    /// Observation count, `ρ`.
    pub fn rho(&self) -> usize {
        self.observations.len()
    }

    pub fn at(&self, time: u32) -> Option<&Observation> {
        self.observations
            .binary_search_by_key(&time, |o| o.time)
            .ok()
            .map(|i| &self.observations[i])
    }

    /// Total walked distance.
    pub fn path_length(&self) -> f64 {
        self.observations
            .windows(2)
            .map(|w| (w[1].x - w[0].x).hypot(w[1].y - w[0].y))
            .sum()
    }

    /// Unit vector from first to last observation, `None` when they coincide.
    pub fn direction(&self) -> Option<(f64, f64)> {
        let (a, b) = (self.observations.first()?, self.observations.last()?);
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let norm = dx.hypot(dy);
        (norm > 0.0).then(|| (dx / norm, dy / norm))
    }
}

fn check_theta(theta_seconds: f64) -> Result<(), MetricsError> {
    if theta_seconds.is_finite() && theta_seconds > 0.0 {
        Ok(())
    } else {
        Err(MetricsError::InvalidFrameInterval(theta_seconds))
    }
}

/// Groups records into per-pedestrian tracks restricted to the trap.
///
/// For each pedestrian the longest run of consecutive in-trap observations
/// (equal spacing `dt`, the smallest spacing in that pedestrian's records)
/// is kept; the earliest run wins ties. Runs shorter than two observations
/// are dropped. Tracks come out ordered by pedestrian number.
pub fn build_tracks(
    records: &[NtxyRecord],
    trap: &TrapConfig,
    theta_seconds: f64,
) -> Result<Vec<Track>, MetricsError> {
    check_theta(theta_seconds)?;
    let mut grouped: BTreeMap<u32, Vec<Observation>> = BTreeMap::new();
    for r in records {
        grouped.entry(r.pedestrian_number).or_default().push(Observation {
            time: r.time,
            x: r.x,
            y: r.y,
        });
    }
    let mut tracks = Vec::new();
    for (pedestrian, mut obs) in grouped {
        obs.sort_by_key(|o| o.time);
        if let Some(w) = obs.windows(2).find(|w| w[0].time == w[1].time) {
            return Err(MetricsError::DuplicateTime {
                pedestrian,
                time: w[0].time,
            });
        }
        let Some(dt) = obs.windows(2).map(|w| w[1].time - w[0].time).min() else {
            continue;
        };
        let mut best: (usize, usize) = (0, 0);
        let mut start: Option<usize> = None;
        for i in 0..=obs.len() {
            let continues = i < obs.len()
                && trap.contains(obs[i].x, obs[i].y)
                && start.is_none_or(|_| obs[i].time - obs[i - 1].time == dt);
            match (start, continues) {
                (Some(_), true) => {}
                (None, true) => start = Some(i),
                (Some(s), false) => {
                    if i - s > best.1 - best.0 {
                        best = (s, i);
                    }
                    // the breaking observation may open the next run
                    start = (i < obs.len() && trap.contains(obs[i].x, obs[i].y)).then_some(i);
                }
                (None, false) => {}
            }
        }
        if best.1 - best.0 >= 2 {
            tracks.push(Track {
                pedestrian_number: pedestrian,
                observations: obs[best.0..best.1].to_vec(),
                dt,
                theta_seconds,
            });
        }
    }
    Ok(tracks)
}

/// Walked distance over elapsed time, in world units per second.
pub fn individual_speed(track: &Track) -> Result<f64, MetricsError> {
    if track.rho() < 2 {
        return Err(MetricsError::SingleObservation(track.pedestrian_number));
    }
    let elapsed = f64::from(track.t_out() - track.t_in()) * track.theta_seconds;
    Ok(track.path_length() / elapsed)
}

/// Positions of every pedestrian present at each slice.
fn presence(tracks: &[Track]) -> HashMap<u32, Vec<(u32, f64, f64)>> {
    let mut by_time: HashMap<u32, Vec<(u32, f64, f64)>> = HashMap::new();
    for t in tracks {
        for o in &t.observations {
            by_time
                .entry(o.time)
                .or_default()
                .push((t.pedestrian_number, o.x, o.y));
        }
    }
    by_time
}

fn headways_with(track: &Track, present: &HashMap<u32, Vec<(u32, f64, f64)>>) -> Vec<(u32, f64)> {
    track
        .observations
        .iter()
        .filter_map(|o| {
            present
                .get(&o.time)?
                .iter()
                .filter(|(p, _, _)| *p != track.pedestrian_number)
                .map(|(_, x, y)| (x - o.x).hypot(y - o.y))
                .min_by(f64::total_cmp)
                .map(|h| (o.time, h))
        })
        .collect()
}

/// Distance to the nearest other pedestrian at each of the track's slices.
/// Slices with nobody else present are omitted.
pub fn headway_series(track: &Track, all_tracks: &[Track]) -> Vec<(u32, f64)> {
    headways_with(track, &presence(all_tracks))
}

/// Query window in slices; requires `t1 < t2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub t1: u32,
    pub t2: u32,
}

impl Interval {
    pub fn new(t1: u32, t2: u32) -> Result<Self, MetricsError> {
        if t1 < t2 {
            Ok(Self { t1, t2 })
        } else {
            Err(MetricsError::InvalidInterval(t1, t2))
        }
    }

    pub fn contains(&self, t: u32) -> bool {
        (self.t1..=self.t2).contains(&t)
    }

    pub fn overlaps(&self, track: &Track) -> bool {
        track.t_in() <= self.t2 && track.t_out() >= self.t1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PedestrianSummary {
    pub pedestrian_number: u32,
    pub t_in: u32,
    pub t_out: u32,
    pub observations: usize,
    pub speed: f64,
    pub direction: Option<(f64, f64)>,
    /// Headways at slices inside the interval.
    pub headways: Vec<(u32, f64)>,
}

/// Flow characteristics over one interval. Quantities that are undefined
/// for the data (no pedestrians, or no moving pedestrians) are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowReport {
    pub interval: Interval,
    pub theta_seconds: f64,
    /// Pedestrians present in the trap during the interval, `κ`.
    pub kappa: usize,
    /// `κ / ((T2 - T1) Θ)`, pedestrians per second.
    pub flow_rate: f64,
    pub time_mean_speed: Option<f64>,
    /// Harmonic mean over pedestrians with positive speed.
    pub space_mean_speed: Option<f64>,
    /// Pedestrians left out of the space mean speed.
    pub zero_speed_count: usize,
    /// Trap area per pedestrian, `A / κ`.
    pub area_module: Option<f64>,
    /// Pedestrians per unit area, `κ / A`.
    pub density: f64,
    /// Crossings of the trap's mid line `Y = const` inside the interval.
    pub line_crossings: usize,
    pub trap_length: f64,
    pub trap_area: f64,
    pub per_pedestrian: Vec<PedestrianSummary>,
}

fn line_crossings(track: &Track, line_y: f64, interval: &Interval) -> usize {
    track
        .observations
        .windows(2)
        .filter(|w| interval.contains(w[0].time) && interval.contains(w[1].time))
        .filter(|w| (w[0].y < line_y) != (w[1].y < line_y))
        .count()
}

pub fn flow_report(
    tracks: &[Track],
    trap: &TrapConfig,
    interval: Interval,
    theta_seconds: f64,
) -> Result<FlowReport, MetricsError> {
    check_theta(theta_seconds)?;
    let present = presence(tracks);
    let line_y = (trap.rect().min_y + trap.rect().max_y) / 2.0;

    let mut per_pedestrian = Vec::new();
    let mut crossings = 0;
    for track in tracks.iter().filter(|t| interval.overlaps(t)) {
        let speed = individual_speed(track)?;
        crossings += line_crossings(track, line_y, &interval);
        per_pedestrian.push(PedestrianSummary {
            pedestrian_number: track.pedestrian_number,
            t_in: track.t_in(),
            t_out: track.t_out(),
            observations: track.rho(),
            speed,
            direction: track.direction(),
            headways: headways_with(track, &present)
                .into_iter()
                .filter(|(t, _)| interval.contains(*t))
                .collect(),
        });
    }

    let kappa = per_pedestrian.len();
    let speeds: Vec<f64> = per_pedestrian.iter().map(|p| p.speed).collect();
    let moving: Vec<f64> = speeds.iter().copied().filter(|&v| v > 0.0).collect();
    let time_mean_speed = (kappa > 0).then(|| speeds.iter().sum::<f64>() / kappa as f64);
    let space_mean_speed = (!moving.is_empty())
        .then(|| moving.len() as f64 / moving.iter().map(|v| 1.0 / v).sum::<f64>());

    Ok(FlowReport {
        interval,
        theta_seconds,
        kappa,
        flow_rate: kappa as f64 / (f64::from(interval.t2 - interval.t1) * theta_seconds),
        time_mean_speed,
        space_mean_speed,
        zero_speed_count: speeds.len() - moving.len(),
        area_module: (kappa > 0).then(|| trap.area() / kappa as f64),
        density: kappa as f64 / trap.area(),
        line_crossings: crossings,
        trap_length: trap.length(),
        trap_area: trap.area(),
        per_pedestrian,
    })
}
