//! Flat `key = value` pipeline configuration.

use std::path::{Path, PathBuf};

use clap::Args;
use pedtrack_core::calibration::Rect;
use pedtrack_core::detection::DetectionParams;
use pedtrack_core::imaging::{DEFAULT_THETA, THETA_CAP};
use pedtrack_core::tracking::{VoteParams, DEFAULT_MAX_GAP, DEFAULT_VOTING_THRESHOLD};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum BackgroundSource {
    Median,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub theta: u16,
    pub area_threshold: usize,
    pub morph_radius: usize,
    pub voting_threshold: f64,
    pub speed_threshold: Option<f64>,
    pub max_gap: u32,
    pub frame_interval: f64,
    pub trap: Option<Rect>,
    pub calibration: Option<PathBuf>,
    pub background: BackgroundSource,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            theta: DEFAULT_THETA,
            area_threshold: 0,
            morph_radius: 1,
            voting_threshold: DEFAULT_VOTING_THRESHOLD,
            speed_threshold: None,
            max_gap: DEFAULT_MAX_GAP,
            frame_interval: 1.0,
            trap: None,
            calibration: None,
            background: BackgroundSource::Median,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("{key}: cannot parse `{value}`"))
}

fn positive(key: &str, value: &str) -> Result<f64, String> {
    let v: f64 = parse(key, value)?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{key} must be positive, got {value}"))
    }
}

fn parse_trap(value: &str) -> Result<Rect, String> {
    let v: Vec<f64> = value
        .split(',')
        .map(|s| parse("trap", s.trim()))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [min_x, min_y, max_x, max_y] if min_x < max_x && min_y < max_y => {
            Ok(Rect { min_x, min_y, max_x, max_y })
        }
        [_, _, _, _] => Err("trap needs min_x < max_x and min_y < max_y".into()),
        _ => Err("trap takes min_x,min_y,max_x,max_y".into()),
    }
}

impl PipelineConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let value = value.trim();
        match key {
            "theta" => {
                let t: u16 = parse(key, value)?;
                if t > THETA_CAP {
                    return Err(format!("theta must be within 0..={THETA_CAP}, got {t}"));
                }
                self.theta = t;
            }
            "area_threshold" => self.area_threshold = parse(key, value)?,
            "morph_radius" => self.morph_radius = parse(key, value)?,
            "voting_threshold" => {
                let v: f64 = parse(key, value)?;
                if !(0.0..=100.0).contains(&v) {
                    return Err(format!("voting_threshold must be within 0..=100, got {value}"));
                }
                self.voting_threshold = v;
            }
            "speed_threshold" => self.speed_threshold = Some(positive(key, value)?),
            "max_gap" => {
                let g: u32 = parse(key, value)?;
                if g == 0 {
                    return Err("max_gap must be at least 1".into());
                }
                self.max_gap = g;
            }
            "frame_interval" => self.frame_interval = positive(key, value)?,
            "trap" => self.trap = Some(parse_trap(value)?),
            "calibration" => self.calibration = Some(PathBuf::from(value)),
            "background" => {
                self.background = match value {
                    "median" => BackgroundSource::Median,
                    path => BackgroundSource::File(PathBuf::from(path)),
                }
            }
            _ => return Err(format!("unknown config key `{key}`")),
        }
        Ok(())
    }

    pub fn parse_text(&mut self, text: &str) -> Result<(), String> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
            self.set(k.trim(), v).map_err(|e| format!("line {}: {e}", i + 1))?;
        }
        Ok(())
    }

    /// The effective configuration on one line, keys in a fixed order.
    pub fn comment_line(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "none".into());
        let trap = self
            .trap
            .map(|r| format!("{},{},{},{}", r.min_x, r.min_y, r.max_x, r.max_y));
        let background = match &self.background {
            BackgroundSource::Median => "median".to_string(),
            BackgroundSource::File(p) => p.display().to_string(),
        };
        format!(
            "theta={} area_threshold={} morph_radius={} voting_threshold={} speed_threshold={} \
max_gap={} frame_interval={} trap={} calibration={} background={}",
            self.theta,
            self.area_threshold,
            self.morph_radius,
            self.voting_threshold,
            opt(self.speed_threshold.map(|v| v.to_string())),
            self.max_gap,
            self.frame_interval,
            opt(trap),
            opt(self.calibration.as_ref().map(|p| p.display().to_string())),
            background,
        )
    }

    pub fn detection_params(&self) -> DetectionParams {
        DetectionParams {
            theta: self.theta,
            area_threshold: self.area_threshold,
            morph_radius: self.morph_radius,
        }
    }

    pub fn vote_params(&self) -> Result<VoteParams, CliError> {
        let speed_threshold = self
            .speed_threshold
            .ok_or_else(|| CliError::Usage("speed_threshold is required for tracking".into()))?;
        Ok(VoteParams {
            voting_threshold: self.voting_threshold,
            speed_threshold,
            max_gap: self.max_gap,
        })
    }
}

/// `--config FILE` plus one flag per configuration key. Flags override the
/// file, which overrides the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Configuration file of `key = value` lines
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Background subtraction threshold, 0..=256
    #[arg(long)]
    pub theta: Option<String>,
    /// Smallest object area kept, in pixels
    #[arg(long = "area_threshold", alias = "area-threshold")]
    pub area_threshold: Option<String>,
    /// Half-width of the square structuring element
    #[arg(long = "morph_radius", alias = "morph-radius")]
    pub morph_radius: Option<String>,
    /// Minimum voting percentage, 0..=100
    #[arg(long = "voting_threshold", alias = "voting-threshold")]
    pub voting_threshold: Option<String>,
    /// Largest displacement per slice, in pixels
    #[arg(long = "speed_threshold", alias = "speed-threshold")]
    pub speed_threshold: Option<String>,
    /// Consecutive missed slices still bridged
    #[arg(long = "max_gap", alias = "max-gap")]
    pub max_gap: Option<String>,
    /// Seconds between slices
    #[arg(long = "frame_interval", alias = "frame-interval")]
    pub frame_interval: Option<String>,
    /// Trap rectangle min_x,min_y,max_x,max_y in world units
    #[arg(long, allow_hyphen_values = true)]
    pub trap: Option<String>,
    /// Control-point file used to map image to world coordinates
    #[arg(long)]
    pub calibration: Option<String>,
    /// `median` or a background image file
    #[arg(long)]
    pub background: Option<String>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<PipelineConfig, CliError> {
        let mut cfg = PipelineConfig::default();
        if let Some(path) = &self.config {
            let text = read_text(path)?;
            cfg.parse_text(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        }
        let flags = [
            ("theta", &self.theta),
            ("area_threshold", &self.area_threshold),
            ("morph_radius", &self.morph_radius),
            ("voting_threshold", &self.voting_threshold),
            ("speed_threshold", &self.speed_threshold),
            ("max_gap", &self.max_gap),
            ("frame_interval", &self.frame_interval),
            ("trap", &self.trap),
            ("calibration", &self.calibration),
            ("background", &self.background),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v).map_err(CliError::Usage)?;
            }
        }
        Ok(cfg)
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let mut cfg = PipelineConfig::default();
        cfg.parse_text("# comment\ntheta = 20\nspeed_threshold=12.5\ntrap = 0,0,10,20\n")
            .unwrap();
        assert_eq!(cfg.theta, 20);
        assert_eq!(cfg.speed_threshold, Some(12.5));
        assert_eq!(cfg.trap.unwrap().max_y, 20.0);
        cfg.set("theta", "30").unwrap();
        assert_eq!(cfg.theta, 30);
    }

    #[test]
    fn rejects_out_of_range() {
        let mut cfg = PipelineConfig::default();
        assert!(cfg.set("theta", "257").is_err());
        assert!(cfg.set("voting_threshold", "101").is_err());
        assert!(cfg.set("max_gap", "0").is_err());
        assert!(cfg.set("frame_interval", "0").is_err());
        assert!(cfg.set("speed_threshold", "-1").is_err());
        assert!(cfg.set("trap", "0,0,0,1").is_err());
        assert!(cfg.set("trap", "0,0,1").is_err());
        assert!(cfg.set("colour", "red").is_err());
        assert!(cfg.parse_text("theta 5").is_err());
    }

    #[test]
    fn comment_line_lists_every_key() {
        let line = PipelineConfig::default().comment_line();
        assert_eq!(
            line,
            "theta=15 area_threshold=0 morph_radius=1 voting_threshold=50 speed_threshold=none \
max_gap=3 frame_interval=1 trap=none calibration=none background=median"
        );
    }
}
