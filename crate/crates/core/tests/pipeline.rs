use pedtrack_core::calibration::{apply_calibration, fit_calibration, ControlPoint, Rect, TrapConfig};
use pedtrack_core::detection::{build_descriptor_database, DetectionParams};
use pedtrack_core::imaging::median_background;
use pedtrack_core::metrics::{build_tracks, flow_report, individual_speed, Interval};
use pedtrack_core::synth::{parse_scenario, render_scenario, score_tracking};
use pedtrack_core::tracking::{trace_database, trace_stack, VoteParams};

const TWO_DISKS: &str = "\
width = 160
height = 120
background = 40,40,40
frames = 20
actor = disk r=6 color=220,60,60 path=1:20,30;20:134,30
actor = disk r=5 color=60,60,220 path=1:140,90;20:26,90
";

fn params() -> VoteParams {
    VoteParams::with_speed_threshold(15.0)
}

#[test]
fn one_moving_disk_gives_one_row_per_slice() {
    let s = parse_scenario(
        "width = 64\nheight = 48\nframes = 10\nbackground = 20,20,20\n\
         actor = disk r=4 color=200,200,40 path=1:10,24;10:46,24\n",
    )
    .unwrap();
    let (stack, truth) = render_scenario(&s).unwrap();
    let db = build_descriptor_database(&stack, &s.background_image(), &DetectionParams::default()).unwrap();
    assert_eq!(db.len(), 10);
    for (row, p) in db.iter().zip(&truth.actors[0].points) {
        assert_eq!(row.slice_number, p.time);
        assert_eq!(row.slice_object_number, 1);
        assert!((row.cg_area_x - p.x).abs() <= 0.5 && (row.cg_area_y - p.y).abs() <= 0.5);
    }
}

#[test]
fn two_disks_keep_their_identities() {
    let s = parse_scenario(TWO_DISKS).unwrap();
    let (stack, truth) = render_scenario(&s).unwrap();
    let db = build_descriptor_database(&stack, &s.background_image(), &DetectionParams::default()).unwrap();
    let out = trace_database(&db, &params()).unwrap();
    let mut peds: Vec<i64> = out.rows.iter().map(|r| r.pedestrian_number).collect();
    peds.sort_unstable();
    peds.dedup();
    assert_eq!(peds, vec![1, 2]);
    let score = score_tracking(&out.records, &truth, 2.0);
    assert_eq!(score.identity_rate, Some(100.0));
    assert_eq!((score.false_positives, score.false_negatives, score.identity_switches), (0, 0, 0));
    assert!(score.rms_error.unwrap() <= 0.5 * std::f64::consts::SQRT_2);
}

#[test]
fn median_background_recovers_scene_for_moving_actors() {
    let s = parse_scenario(TWO_DISKS).unwrap();
    let (stack, _) = render_scenario(&s).unwrap();
    assert_eq!(median_background(&stack).unwrap(), s.background_image());
}

#[test]
fn noisy_scene_is_deterministic() {
    let text = format!("{TWO_DISKS}seed = 11\nnoise = 4\n");
    let s = parse_scenario(&text).unwrap();
    let run = || {
        let (stack, _) = render_scenario(&s).unwrap();
        let db = build_descriptor_database(&stack, &s.background_image(), &DetectionParams::default()).unwrap();
        trace_stack(&db, &params()).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn partial_track_through_trap() {
    // walks down the image at 2 px per slice
    let s = parse_scenario(
        "width = 40\nheight = 60\nframes = 20\nframe_interval = 0.5\n\
         actor = rect w=4 h=4 color=250,250,250 path=1:20,2;20:20,40\n",
    )
    .unwrap();
    let (stack, _) = render_scenario(&s).unwrap();
    let db = build_descriptor_database(&stack, &s.background_image(), &DetectionParams {
        morph_radius: 0,
        ..DetectionParams::default()
    })
    .unwrap();
    let records = trace_stack(&db, &params()).unwrap();
    // one world unit per 2 px, origin at the image origin
    let cps: Vec<ControlPoint> = [(0.0, 0.0), (40.0, 0.0), (0.0, 60.0), (40.0, 60.0)]
        .iter()
        .map(|&(x, y)| ControlPoint::new((x, y), (x / 2.0, y / 2.0)))
        .collect();
    let cal = fit_calibration(&cps).unwrap();
    let world = apply_calibration(&cal, &records);
    // rendered centroids sit at world y = slice + 0.25
    let trap = TrapConfig::new(Rect { min_x: 0.0, min_y: 5.0, max_x: 20.0, max_y: 9.5 }).unwrap();
    let tracks = build_tracks(&world, &trap, s.frame_interval).unwrap();
    assert_eq!(tracks.len(), 1);
    let t = &tracks[0];
    assert_eq!((t.t_in(), t.t_out(), t.rho()), (5, 9, 5));
    // 1 world unit per slice over 0.5 s slices
    assert!((individual_speed(t).unwrap() - 2.0).abs() < 1e-9);
    let report = flow_report(&tracks, &trap, Interval::new(1, 20).unwrap(), s.frame_interval).unwrap();
    assert_eq!(report.kappa, 1);
    assert_eq!(report.line_crossings, 1);
}
