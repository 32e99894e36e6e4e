//! Bassline and melody tagging from string/fret placement.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::EventRef;
use crate::model::{Cluster, NoteEvent, Score};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VoiceTag {
    Melody,
    Bassline,
    Inner,
}

/// Strings whose notes count as bass on the first pass.
const BASS_STRINGS: [u8; 2] = [5, 6];
const FALLBACK_BASS_STRING: u8 = 4;
const MIN_BASS_NOTES: usize = 2;
/// Frets above this shift a single note one string up; frets below it undo the shift.
const SHIFT_FRET: u8 = 5;

fn pitched_indices(c: &Cluster) -> Vec<usize> {
    (0..c.events.len()).filter(|&i| !c.events[i].is_rest()).collect()
}

/// Bassline notes, decided measure by measure.
///
/// A single note, or the lowest note of a cluster, on string 5 or 6 is bass.
/// If a measure ends up with fewer than two bass notes, every string-4 note
/// in it is added as well.
pub fn extract_bassline(score: &Score) -> BTreeSet<EventRef> {
    let mut tagged = BTreeSet::new();
    for (mi, m) in score.measures.iter().enumerate() {
        let mut found = Vec::new();
        for (ci, c) in m.clusters.iter().enumerate() {
            // Events are sorted high to low, so the last pitched one is the lowest.
            if let Some(&lowest) = pitched_indices(c).last() {
                if c.events[lowest].string().is_some_and(|s| BASS_STRINGS.contains(&s)) {
                    found.push(EventRef::new(mi, ci, lowest));
                }
            }
        }
        if found.len() < MIN_BASS_NOTES {
            for (ci, c) in m.clusters.iter().enumerate() {
                for ei in pitched_indices(c) {
                    if c.events[ei].string() == Some(FALLBACK_BASS_STRING) {
                        found.push(EventRef::new(mi, ci, ei));
                    }
                }
            }
        }
        tagged.extend(found);
    }
    tagged
}

/// Melody notes.
///
/// The highest note of every multi-note cluster is melody. A single note is
/// melody when its effective string is 1 or 2, where the effective string
/// is one lower than the real string while a fret-above-5 shift is active.
/// The shift switches on at a single note above fret 5 and off at a single
/// note below fret 5; it is tracked across the whole score.
pub fn extract_melody(score: &Score) -> BTreeSet<EventRef> {
    let mut tagged = BTreeSet::new();
    let mut shifted = false;
    for (mi, m) in score.measures.iter().enumerate() {
        for (ci, c) in m.clusters.iter().enumerate() {
            let pitched = pitched_indices(c);
            match pitched.as_slice() {
                [] => {}
                [single] => {
                    let e: &NoteEvent = &c.events[*single];
                    let (Some(string), Some(fret)) = (e.string(), e.fret()) else {
                        continue;
                    };
                    if fret > SHIFT_FRET {
                        shifted = true;
                    } else if fret < SHIFT_FRET {
                        shifted = false;
                    }
                    let effective = string - u8::from(shifted);
                    if effective <= 2 {
                        tagged.insert(EventRef::new(mi, ci, *single));
                    }
                }
                [highest, ..] => {
                    tagged.insert(EventRef::new(mi, ci, *highest));
                }
            }
        }
    }
    tagged
}

/// One tag per pitched event; melody takes precedence over bassline.
pub fn classify_voices(score: &Score) -> BTreeMap<EventRef, VoiceTag> {
    let melody = extract_melody(score);
    let bass = extract_bassline(score);
    let mut out = BTreeMap::new();
    for (mi, m) in score.measures.iter().enumerate() {
        for (ci, c) in m.clusters.iter().enumerate() {
            for ei in pitched_indices(c) {
                let r = EventRef::new(mi, ci, ei);
                let tag = if melody.contains(&r) {
                    VoiceTag::Melody
                } else if bass.contains(&r) {
                    VoiceTag::Bassline
                } else {
                    VoiceTag::Inner
                };
                out.insert(r, tag);
            }
        }
    }
    out
}
