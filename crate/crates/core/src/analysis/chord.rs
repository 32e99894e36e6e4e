//! Chord recognition from the low strings of a cluster by cyclic interval
//! pattern matching.

use super::fretboard::position_to_midi;
use crate::model::{ChordQuality, ChordResult, ChordRoot, Cluster, PitchClass, Tuning};

/// Strings that take part in chord recognition.
pub const CHORD_STRINGS: std::ops::RangeInclusive<u8> = 3..=6;

/// Cyclic semitone steps between sorted pitch classes. The pitch class that
/// follows the interval at `root_after` is the root; `None` means the
/// pattern is symmetric and has no single root.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct IntervalPattern {
    pub quality: ChordQuality,
    pub intervals: &'static [u8],
    pub root_after: Option<usize>,
}

const fn pattern(quality: ChordQuality, intervals: &'static [u8], root_after: Option<usize>) -> IntervalPattern {
    IntervalPattern {
        quality,
        intervals,
        root_after,
    }
}

pub const CHORD_PATTERNS: [IntervalPattern; 15] = [
    pattern(ChordQuality::Maj, &[4, 3, 5], Some(2)),
    pattern(ChordQuality::Maj, &[7, 5], Some(1)),
    pattern(ChordQuality::Maj, &[4, 8], Some(1)),
    pattern(ChordQuality::Min, &[3, 4, 5], Some(2)),
    pattern(ChordQuality::Min, &[3, 9], Some(1)),
    pattern(ChordQuality::Maj7, &[4, 3, 4, 1], Some(3)),
    pattern(ChordQuality::Maj7, &[4, 7, 1], Some(2)),
    pattern(ChordQuality::Maj7, &[7, 4, 1], Some(2)),
    pattern(ChordQuality::Min7, &[3, 4, 3, 2], Some(3)),
    pattern(ChordQuality::Min7, &[7, 2, 3], Some(1)),
    pattern(ChordQuality::Min7, &[7, 3, 2], Some(2)),
    pattern(ChordQuality::Dom7, &[4, 3, 3, 2], Some(3)),
    pattern(ChordQuality::Dom7, &[2, 4, 6], Some(0)),
    pattern(ChordQuality::Aug, &[4, 4, 4], None),
    pattern(ChordQuality::Dim, &[3, 3, 6], Some(2)),
];

/// Recognize the chord sounded on strings 3-6 of a cluster.
/// `None` when fewer than two distinct pitch classes sound there or no
/// pattern matches.
pub fn recognize_chord(cluster: &Cluster, tuning: &Tuning, capo: u8) -> Option<ChordResult> {
    let pcs: Vec<PitchClass> = cluster
        .pitched()
        .filter_map(|e| e.position)
        .filter(|p| CHORD_STRINGS.contains(&p.string()))
        .filter_map(|p| position_to_midi(p.string(), p.fret(), tuning, capo).ok())
        .map(PitchClass::from_midi)
        .collect();
    recognize_pitch_classes(&pcs)
}

/// Match a set of pitch classes (duplicates allowed) against the table.
pub fn recognize_pitch_classes(pcs: &[PitchClass]) -> Option<ChordResult> {
    let mut pcs: Vec<u8> = pcs.iter().map(|pc| pc.value()).collect();
    pcs.sort_unstable();
    pcs.dedup();
    let n = pcs.len();
    if n < 2 {
        return None;
    }
    let steps: Vec<u8> = (0..n).map(|i| (pcs[(i + 1) % n] + 12 - pcs[i]) % 12).collect();

    let mut table: Vec<&IntervalPattern> = CHORD_PATTERNS.iter().collect();
    table.sort_by_key(|p| std::cmp::Reverse(p.intervals.len()));
    for p in table.into_iter().filter(|p| p.intervals.len() == n) {
        for start in 0..n {
            let matches = (0..n).all(|k| steps[(start + k) % n] == p.intervals[k]);
            if !matches {
                continue;
            }
            let root = match p.root_after {
                Some(k) => ChordRoot::Pitch(PitchClass::from_midi(i32::from(pcs[(start + k + 1) % n]))),
                None => ChordRoot::Ambiguous,
            };
            return Some(ChordResult {
                quality: p.quality,
                root,
                matched_pattern: p.intervals.to_vec(),
            });
        }
    }
    None
}
