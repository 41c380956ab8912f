use std::io::{Read, Write};
use std::path::Path;

use serde::Deserialize;

use super::{ActorTruth, GroundTruth, SynthError, TruthPoint};
use crate::imaging::{write_ppm, ColorImage, ImageStack};

pub const TRUTH_HEADER: &str = "Actor,T,X,Y,Visible";

#[derive(Deserialize)]
struct TruthRow {
    #[serde(rename = "Actor")]
    actor: u32,
    #[serde(rename = "T")]
    time: u32,
    #[serde(rename = "X")]
    x: f64,
    #[serde(rename = "Y")]
    y: f64,
    #[serde(rename = "Visible")]
    visible: u8,
}

pub fn write_truth<W: Write>(mut out: W, truth: &GroundTruth) -> std::io::Result<()> {
    writeln!(out, "{TRUTH_HEADER}")?;
    for a in &truth.actors {
        for p in &a.points {
            writeln!(out, "{},{},{},{},{}", a.actor, p.time, p.x, p.y, u8::from(p.visible))?;
        }
    }
    out.flush()
}

/// Reads a truth file; rows of one actor must be contiguous and in time order.
pub fn read_truth<R: Read>(input: R) -> Result<GroundTruth, SynthError> {
    let mut truth = GroundTruth::default();
    let rows = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input)
        .into_deserialize::<TruthRow>();
    for (i, row) in rows.enumerate() {
        let row = row.map_err(|e| SynthError::Truth(format!("row {}: {e}", i + 1)))?;
        let point = TruthPoint {
            time: row.time,
            x: row.x,
            y: row.y,
            visible: row.visible != 0,
        };
        match truth.actors.last_mut() {
            Some(a) if a.actor == row.actor => {
                if a.exit().is_some_and(|t| t >= row.time) {
                    return Err(SynthError::Truth(format!("row {}: time out of order", i + 1)));
                }
                a.points.push(point);
            }
            _ => {
                if truth.actors.iter().any(|a| a.actor == row.actor) {
                    return Err(SynthError::Truth(format!(
                        "row {}: actor {} is not contiguous",
                        i + 1,
                        row.actor
                    )));
                }
                truth.actors.push(ActorTruth { actor: row.actor, points: vec![point] });
            }
        }
    }
    Ok(truth)
}

/// Writes `frames/frame_0001.ppm`, ..., `background.ppm` and `truth.csv`
/// under `dir`, creating directories as needed. Frame files left by an
/// earlier render into the same directory are removed first.
pub fn write_render(
    dir: &Path,
    stack: &ImageStack,
    background: &ColorImage,
    truth: &GroundTruth,
) -> Result<(), SynthError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| SynthError::Io { path, source }
    };
    let frames = dir.join("frames");
    std::fs::create_dir_all(&frames).map_err(io(&frames))?;
    for entry in std::fs::read_dir(&frames).map_err(io(&frames))? {
        let path = entry.map_err(io(&frames))?.path();
        let stale = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with("frame_") && n.ends_with(".ppm"));
        if stale {
            std::fs::remove_file(&path).map_err(io(&path))?;
        }
    }
    for (slice, frame) in stack.slices() {
        write_ppm(&frames.join(format!("frame_{slice:04}.ppm")), frame)?;
    }
    write_ppm(&dir.join("background.ppm"), background)?;
    let truth_path = dir.join("truth.csv");
    let file = std::fs::File::create(&truth_path).map_err(io(&truth_path))?;
    write_truth(std::io::BufWriter::new(file), truth).map_err(io(&truth_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::read_netpbm;
    use crate::synth::{parse_scenario, render_scenario};

    #[test]
    fn truth_round_trip() {
        let truth = GroundTruth {
            actors: vec![
                ActorTruth {
                    actor: 1,
                    points: vec![
                        TruthPoint { time: 1, x: 0.5, y: 2.25, visible: true },
                        TruthPoint { time: 2, x: 1.0 / 3.0, y: 2.0, visible: false },
                    ],
                },
                ActorTruth { actor: 2, points: vec![TruthPoint { time: 4, x: 9.0, y: 9.0, visible: true }] },
            ],
        };
        let mut buf = Vec::new();
        write_truth(&mut buf, &truth).unwrap();
        assert_eq!(read_truth(buf.as_slice()).unwrap(), truth);
        let split = "Actor,T,X,Y,Visible\n1,1,0,0,1\n2,1,0,0,1\n1,2,0,0,1\n";
        assert!(read_truth(split.as_bytes()).is_err());
    }

    #[test]
    fn writes_frames_background_and_truth() {
        let s = parse_scenario(
            "width = 12\nheight = 8\nframes = 3\nbackground = 5,5,5\nactor = disk r=1 color=90,0,0 path=1:2,2;3:8,4\n",
        )
        .unwrap();
        let (stack, truth) = render_scenario(&s).unwrap();
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("frames")).unwrap();
        std::fs::write(dir.path().join("frames/frame_0009.ppm"), b"old").unwrap();
        std::fs::write(dir.path().join("frames/notes.txt"), b"keep").unwrap();
        write_render(dir.path(), &stack, &s.background_image(), &truth).unwrap();
        for (slice, frame) in stack.slices() {
            let back = read_netpbm(&dir.path().join(format!("frames/frame_{slice:04}.ppm"))).unwrap();
            assert_eq!(&back, frame);
        }
        assert!(!dir.path().join("frames/frame_0009.ppm").exists());
        assert!(dir.path().join("frames/notes.txt").exists());
        assert_eq!(read_netpbm(&dir.path().join("background.ppm")).unwrap(), s.background_image());
        let text = std::fs::read(dir.path().join("truth.csv")).unwrap();
        assert_eq!(read_truth(text.as_slice()).unwrap(), truth);
    }
}
