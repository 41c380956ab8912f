use std::collections::HashSet;
use std::ops::Range;

use super::{cast_votes, select_match, NtxyRecord, TrackingError, VoteParams};
use crate::detection::FeatureRow;

/// Result of tracing a descriptor database.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceOutput {
    /// The input rows with `pedestrian_number` filled in.
    pub rows: Vec<FeatureRow>,
    /// Observations sorted by `(pedestrian_number, time)`, including the
    /// interpolated points bridging gaps.
    pub records: Vec<NtxyRecord>,
}

/// Row ranges for slices `1..=last`, empty where a slice has no objects.
fn slice_ranges(db: &[FeatureRow]) -> Result<Vec<Range<usize>>, TrackingError> {
    let mut ranges: Vec<Range<usize>> = Vec::new();
    let mut prev: Option<(u32, u32)> = None;
    for (i, row) in db.iter().enumerate() {
        let key = (row.slice_number, row.slice_object_number);
        let fail = |reason: String| TrackingError::Ordering { row: i + 1, reason };
        if row.slice_number == 0 {
            return Err(fail("slice numbers start at 1".into()));
        }
        let expected_obj = match prev {
            Some((s, o)) if s == key.0 => o + 1,
            Some((s, _)) if s > key.0 => {
                return Err(fail(format!("slice {} after slice {s}", key.0)));
            }
            _ => 1,
        };
        if key.1 != expected_obj {
            return Err(fail(format!(
                "slice {} object {} where {expected_obj} was expected",
                key.0, key.1
            )));
        }
        while ranges.len() < key.0 as usize {
            ranges.push(i..i);
        }
        ranges[key.0 as usize - 1].end = i + 1;
        prev = Some(key);
    }
    Ok(ranges)
}

/// Traces pedestrian numbers through the database.
///
/// Objects of the first slice are numbered 1..m. Moving slice by slice, any
/// object still without a number gets `max + 1`. Each object then searches
/// the following slices in order, up to `max_gap + 1` slices ahead, and the
/// first passing match inherits its number; skipped slices get linearly
/// interpolated positions. A target already carrying another pedestrian's
/// number is claimed and cannot be chosen.
pub fn trace_database(
    db: &[FeatureRow],
    params: &VoteParams,
) -> Result<TraceOutput, TrackingError> {
    params.validate()?;
    let ranges = slice_ranges(db)?;
    let last_slice = ranges.len() as u32;
    let mut ped: Vec<Option<u32>> = vec![None; db.len()];
    let mut max_ped = 0u32;
    let mut records = Vec::with_capacity(db.len());

    for slice in 1..=last_slice {
        let here = ranges[slice as usize - 1].clone();
        for i in here.clone() {
            if ped[i].is_none() {
                max_ped += 1;
                ped[i] = Some(max_ped);
            }
        }
        for src in here {
            let number = ped[src].expect("numbered above");
            for gap in params.search_offsets() {
                let target = slice + gap;
                if target > last_slice {
                    break;
                }
                let range = ranges[target as usize - 1].clone();
                if range.is_empty() {
                    continue;
                }
                let tallies = cast_votes(&db[src], &db[range.clone()], gap, params);
                let claimed: HashSet<u32> = range
                    .clone()
                    .filter(|&j| ped[j].is_some_and(|p| p != number))
                    .map(|j| db[j].slice_object_number)
                    .collect();
                if let Some(obj) = select_match(&tallies, &claimed, params) {
                    let j = range.start + obj as usize - 1;
                    ped[j] = Some(number);
                    let (x0, y0) = db[src].centroid();
                    let (x1, y1) = db[j].centroid();
                    for step in 1..gap {
                        let f = f64::from(step) / f64::from(gap);
                        records.push(NtxyRecord {
                            pedestrian_number: number,
                            time: slice + step,
                            x: x0 + f * (x1 - x0),
                            y: y0 + f * (y1 - y0),
                        });
                    }
                    break;
                }
            }
        }
    }

    let rows: Vec<FeatureRow> = db
        .iter()
        .zip(&ped)
        .map(|(row, p)| FeatureRow {
            pedestrian_number: i64::from(p.expect("every row numbered")),
            ..row.clone()
        })
        .collect();
    records.extend(rows.iter().map(|r| NtxyRecord {
        pedestrian_number: r.pedestrian_number as u32,
        time: r.slice_number,
        x: r.cg_area_x,
        y: r.cg_area_y,
    }));
    records.sort_by_key(|r| (r.pedestrian_number, r.time));
    Ok(TraceOutput { rows, records })
}

/// NTXY records for the database; see [`trace_database`].
pub fn trace_stack(
    db: &[FeatureRow],
    params: &VoteParams,
) -> Result<Vec<NtxyRecord>, TrackingError> {
    trace_database(db, params).map(|out| out.records)
}
