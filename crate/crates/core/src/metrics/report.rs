use std::fmt::Display;
use std::io::Write;

use super::{headway_series, FlowReport, Track};

fn opt<T: Display>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

/// Writes the summary block followed by the per-pedestrian table.
/// Undefined quantities are written as `NA`.
pub fn write_report<W: Write>(
    mut out: W,
    comments: &[String],
    report: &FlowReport,
) -> std::io::Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "Quantity,Value")?;
    let rows: [(&str, String); 13] = [
        ("T1", report.interval.t1.to_string()),
        ("T2", report.interval.t2.to_string()),
        ("FrameInterval", report.theta_seconds.to_string()),
        ("Pedestrians", report.kappa.to_string()),
        ("FlowRate", report.flow_rate.to_string()),
        ("TimeMeanSpeed", opt(report.time_mean_speed)),
        ("SpaceMeanSpeed", opt(report.space_mean_speed)),
        ("ZeroSpeedPedestrians", report.zero_speed_count.to_string()),
        ("AreaModule", opt(report.area_module)),
        ("Density", report.density.to_string()),
        ("LineCrossings", report.line_crossings.to_string()),
        ("TrapLength", report.trap_length.to_string()),
        ("TrapArea", report.trap_area.to_string()),
    ];
    for (k, v) in rows {
        writeln!(out, "{k},{v}")?;
    }
    writeln!(out)?;
    writeln!(out, "PedNum,T_in,T_out,Observations,Speed,DirX,DirY,MinHeadway,MeanHeadway")?;
    for p in &report.per_pedestrian {
        let min = p.headways.iter().map(|h| h.1).min_by(f64::total_cmp);
        let mean = (!p.headways.is_empty())
            .then(|| p.headways.iter().map(|h| h.1).sum::<f64>() / p.headways.len() as f64);
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            p.pedestrian_number,
            p.t_in,
            p.t_out,
            p.observations,
            p.speed,
            opt(p.direction.map(|d| d.0)),
            opt(p.direction.map(|d| d.1)),
            opt(min),
            opt(mean),
        )?;
    }
    out.flush()
}

/// Per-observation time series: position, instantaneous speed and headway.
///
/// Speed at an observation uses the step from the previous one, and the
/// step to the next one for a track's first observation.
pub fn write_series<W: Write>(
    mut out: W,
    comments: &[String],
    tracks: &[Track],
) -> std::io::Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "PedNum,T,X,Y,Speed,Headway")?;
    for t in tracks {
        let headways = headway_series(t, tracks);
        let obs = &t.observations;
        for (i, o) in obs.iter().enumerate() {
            let (a, b) = match i {
                0 if obs.len() > 1 => (&obs[0], &obs[1]),
                0 => (o, o),
                _ => (&obs[i - 1], o),
            };
            let speed = (b.time > a.time).then(|| {
                (b.x - a.x).hypot(b.y - a.y) / (f64::from(b.time - a.time) * t.theta_seconds)
            });
            let headway = headways.iter().find(|h| h.0 == o.time).map(|h| h.1);
            writeln!(
                out,
                "{},{},{},{},{},{}",
                t.pedestrian_number,
                o.time,
                o.x,
                o.y,
                opt(speed),
                opt(headway)
            )?;
        }
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::super::{flow_report, Interval, Observation};
    use super::*;
    use crate::calibration::{Rect, TrapConfig};

    fn track(p: u32, pts: &[(u32, f64, f64)]) -> Track {
        Track {
            pedestrian_number: p,
            observations: pts.iter().map(|&(time, x, y)| Observation { time, x, y }).collect(),
            dt: 1,
            theta_seconds: 0.5,
        }
    }

    #[test]
    fn report_layout() {
        let trap = TrapConfig::new(Rect { min_x: 0.0, min_y: 0.0, max_x: 4.0, max_y: 10.0 }).unwrap();
        let tracks = [track(1, &[(1, 1.0, 1.0), (2, 1.0, 2.0)]), track(2, &[(1, 2.0, 1.0), (2, 2.0, 1.0)])];
        let r = flow_report(&tracks, &trap, Interval::new(1, 2).unwrap(), 0.5).unwrap();
        let mut buf = Vec::new();
        write_report(&mut buf, &["theta=15".into()], &r).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let expected = "# theta=15\nQuantity,Value\nT1,1\nT2,2\nFrameInterval,0.5\nPedestrians,2\n\
FlowRate,4\nTimeMeanSpeed,1\nSpaceMeanSpeed,2\nZeroSpeedPedestrians,1\nAreaModule,20\n\
Density,0.05\nLineCrossings,0\nTrapLength,10\nTrapArea,40\n\n\
PedNum,T_in,T_out,Observations,Speed,DirX,DirY,MinHeadway,MeanHeadway\n\
1,1,2,2,2,0,1,1,1.2071067811865475\n2,1,2,2,0,NA,NA,1,1.2071067811865475\n";
        assert_eq!(text, expected);
    }

    #[test]
    fn series_layout() {
        let tracks = [track(3, &[(4, 0.0, 0.0), (5, 3.0, 4.0)]), track(4, &[(5, 3.0, 5.0)])];
        let mut buf = Vec::new();
        write_series(&mut buf, &[], &tracks).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "PedNum,T,X,Y,Speed,Headway\n3,4,0,0,10,NA\n3,5,3,4,10,1\n4,5,3,5,NA,1\n"
        );
    }
}
