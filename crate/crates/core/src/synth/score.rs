use std::collections::BTreeMap;

use super::GroundTruth;
use crate::tracking::NtxyRecord;

/// Tracker output compared against ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    /// `(actor, pedestrian_number)` correspondences.
    pub matches: Vec<(u32, u32)>,
    /// Percentage of visible truth points covered, within the match radius,
    /// by the track matched to their actor. `None` without visible truth.
    pub identity_rate: Option<f64>,
    /// Root mean square centroid error over visible truth points of matched
    /// actors at which the matched track has a record.
    pub rms_error: Option<f64>,
    /// Output tracks matched to no actor.
    pub false_positives: usize,
    /// Visible actors matched to no track.
    pub false_negatives: usize,
    /// Changes of the nearest in-radius track along each actor's visible
    /// points, summed over actors.
    pub identity_switches: usize,
}

type Tracks = BTreeMap<u32, BTreeMap<u32, (f64, f64)>>;

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Greedy one-to-one correspondence between actors and output tracks.
///
/// The cost of pairing actor `a` with track `p` sums, over `a`'s visible
/// points, the centroid distance capped at `match_radius`; a point where
/// `p` has no record costs `match_radius`. Pairs with no point inside the
/// radius are never formed. Pairs are taken in increasing cost, ties broken
/// by actor then pedestrian number.
pub fn score_tracking(records: &[NtxyRecord], truth: &GroundTruth, match_radius: f64) -> ScoreReport {
    let mut tracks: Tracks = BTreeMap::new();
    for r in records {
        tracks.entry(r.pedestrian_number).or_default().insert(r.time, (r.x, r.y));
    }
    let visible: Vec<(u32, Vec<(u32, (f64, f64))>)> = truth
        .actors
        .iter()
        .map(|a| {
            let pts = a.points.iter().filter(|p| p.visible).map(|p| (p.time, (p.x, p.y))).collect();
            (a.actor, pts)
        })
        .collect();

    let mut pairs = Vec::new();
    for (ai, (_, pts)) in visible.iter().enumerate() {
        for (&ped, track) in &tracks {
            let mut cost = 0.0;
            let mut hits = 0usize;
            for (t, p) in pts {
                let d = track.get(t).map_or(f64::INFINITY, |&q| dist(*p, q));
                if d <= match_radius {
                    hits += 1;
                }
                cost += d.min(match_radius);
            }
            if hits > 0 {
                pairs.push((cost, ai, ped, hits));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut actor_used = vec![false; visible.len()];
    let mut ped_used = std::collections::BTreeSet::new();
    let mut matches = Vec::new();
    let mut covered = 0usize;
    let (mut sq_sum, mut sq_n) = (0.0, 0usize);
    for (_, ai, ped, hits) in pairs {
        if actor_used[ai] || ped_used.contains(&ped) {
            continue;
        }
        actor_used[ai] = true;
        ped_used.insert(ped);
        matches.push((visible[ai].0, ped));
        covered += hits;
        for (t, p) in &visible[ai].1 {
            if let Some(&q) = tracks[&ped].get(t) {
                sq_sum += dist(*p, q).powi(2);
                sq_n += 1;
            }
        }
    }
    matches.sort_unstable();

    let mut identity_switches = 0;
    for (_, pts) in &visible {
        let mut last: Option<u32> = None;
        for (t, p) in pts {
            let nearest = tracks
                .iter()
                .filter_map(|(&ped, tr)| tr.get(t).map(|&q| (dist(*p, q), ped)))
                .filter(|(d, _)| *d <= match_radius)
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .map(|(_, ped)| ped);
            if let Some(n) = nearest {
                if last.is_some_and(|l| l != n) {
                    identity_switches += 1;
                }
                last = Some(n);
            }
        }
    }

    let total_visible: usize = visible.iter().map(|(_, p)| p.len()).sum();
    ScoreReport {
        identity_rate: (total_visible > 0).then(|| 100.0 * covered as f64 / total_visible as f64),
        rms_error: (sq_n > 0).then(|| (sq_sum / sq_n as f64).sqrt()),
        false_positives: tracks.len() - ped_used.len(),
        false_negatives: visible
            .iter()
            .zip(&actor_used)
            .filter(|((_, pts), used)| !pts.is_empty() && !**used)
            .count(),
        identity_switches,
        matches,
    }
}
