use std::collections::HashSet;

use super::VoteParams;
use crate::detection::{FeatureRow, DESCRIPTOR_COUNT, MISSING};

/// Votes won by one candidate against one source object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoteTally {
    /// Slice object number of the candidate.
    pub candidate: u32,
    pub votes: u32,
    /// Descriptors present on both sides of the pairing.
    pub eligible_descriptors: u32,
    /// `100 * votes / eligible_descriptors`, or 0 with nothing eligible.
    pub percentage: f64,
}

fn is_missing(v: f64) -> bool {
    v == MISSING
}

/// True when the candidate lies at or beyond `gap * speed_threshold` from
/// the source. Without coordinates on both sides the distance is unknown
/// and nothing is gated.
fn gated(source: &FeatureRow, candidate: &FeatureRow, gap: u32, params: &VoteParams) -> bool {
    let (sx, sy) = source.centroid();
    let (cx, cy) = candidate.centroid();
    if [sx, sy, cx, cy].into_iter().any(is_missing) {
        return false;
    }
    (cx - sx).hypot(cy - sy) >= f64::from(gap) * params.speed_threshold
}

/// Tallies one vote per descriptor for the candidates of slice `T + gap`.
///
/// Each descriptor votes for the candidate minimizing the absolute
/// difference to the source; equal differences go to the smaller slice
/// object number. Missing descriptors (on either side, or on every
/// descriptor of a gated candidate) neither vote nor count as eligible.
/// Tallies are returned in the order of `candidates`.
pub fn cast_votes(
    source: &FeatureRow,
    candidates: &[FeatureRow],
    gap: u32,
    params: &VoteParams,
) -> Vec<VoteTally> {
    let src = source.descriptors();
    let values: Vec<Option<[f64; DESCRIPTOR_COUNT]>> = candidates
        .iter()
        .map(|c| (!gated(source, c, gap, params)).then(|| c.descriptors()))
        .collect();

    let mut votes = vec![0u32; candidates.len()];
    let mut eligible = vec![0u32; candidates.len()];
    for (k, &s) in src.iter().enumerate() {
        if is_missing(s) {
            continue;
        }
        let mut best: Option<(f64, u32, usize)> = None;
        for (i, cand) in candidates.iter().enumerate() {
            let Some(v) = values[i].map(|d| d[k]).filter(|&v| !is_missing(v)) else {
                continue;
            };
            eligible[i] += 1;
            let diff = (s - v).abs();
            let number = cand.slice_object_number;
            let better = match best {
                None => true,
                Some((bd, bn, _)) => diff < bd || (diff == bd && number < bn),
            };
            if better {
                best = Some((diff, number, i));
            }
        }
        if let Some((_, _, i)) = best {
            votes[i] += 1;
        }
    }

    candidates
        .iter()
        .enumerate()
        .map(|(i, c)| VoteTally {
            candidate: c.slice_object_number,
            votes: votes[i],
            eligible_descriptors: eligible[i],
            percentage: if eligible[i] > 0 {
                100.0 * f64::from(votes[i]) / f64::from(eligible[i])
            } else {
                0.0
            },
        })
        .collect()
}

/// Picks the unclaimed candidate with the most votes among those whose
/// percentage reaches the voting threshold. A candidate needs at least one
/// vote. Ties go to the smaller slice object number.
pub fn select_match(
    tallies: &[VoteTally],
    already_claimed: &HashSet<u32>,
    params: &VoteParams,
) -> Option<u32> {
    tallies
        .iter()
        .filter(|t| {
            t.eligible_descriptors > 0
                && t.votes > 0
                && t.percentage >= params.voting_threshold
                && !already_claimed.contains(&t.candidate)
        })
        .min_by_key(|t| (std::cmp::Reverse(t.votes), t.candidate))
        .map(|t| t.candidate)
}
