//! Key detection by diatonic pitch-class counting, and key transfer.

use serde::{Deserialize, Serialize};

use super::fretboard::midi_to_positions;
use crate::error::{Error, Result};
use crate::model::{KeyResult, Mode, NoteContent, PitchClass, PitchSpec, Position, Score};

/// Semitones of the major scale above its tonic.
pub const MAJOR_SCALE: [u8; 7] = [0, 2, 4, 5, 7, 9, 11];
const DEGREE_FIVE: i32 = 7;
const DEGREE_SIX: i32 = 9;

/// Number of sounded notes per pitch class.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct PitchClassCount {
    pub counts: [u32; 12],
}

impl PitchClassCount {
    pub fn of_score(score: &Score) -> Self {
        let mut c = PitchClassCount::default();
        for e in score.pitched_events() {
            if let Some(m) = e.midi() {
                c.counts[usize::from(m % 12)] += 1;
            }
        }
        c
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn get(&self, pc: PitchClass) -> u32 {
        self.counts[usize::from(pc.value())]
    }

    /// Sum of counts over the major scale built on `tonic`.
    pub fn major_set_sum(&self, tonic: PitchClass) -> u32 {
        MAJOR_SCALE
            .iter()
            .map(|&d| self.get(tonic.transpose(i32::from(d))))
            .sum()
    }
}

/// Pick the major scale holding the most notes (lowest pitch class on ties),
/// then call it minor on its sixth degree when that degree outnumbers the
/// fifth.
pub fn detect_key(score: &Score) -> Result<KeyResult> {
    detect_key_from_counts(&PitchClassCount::of_score(score))
}

pub fn detect_key_from_counts(counts: &PitchClassCount) -> Result<KeyResult> {
    if counts.total() == 0 {
        return Err(Error::NoPitchedEvents);
    }
    let mut best = PitchClass::from_midi(0);
    let mut best_sum = counts.major_set_sum(best);
    for pc in 1..12 {
        let tonic = PitchClass::from_midi(pc);
        let sum = counts.major_set_sum(tonic);
        if sum > best_sum {
            best = tonic;
            best_sum = sum;
        }
    }
    let fifth = counts.get(best.transpose(DEGREE_FIVE));
    let sixth = counts.get(best.transpose(DEGREE_SIX));
    Ok(if sixth > fifth {
        KeyResult {
            tonic: best.transpose(DEGREE_SIX),
            mode: Mode::Minor,
            score: best_sum,
        }
    } else {
        KeyResult {
            tonic: best,
            mode: Mode::Major,
            score: best_sum,
        }
    })
}

/// Major keys written with flats.
const FLAT_MAJOR_TONICS: [u8; 5] = [5, 10, 3, 8, 1];

fn key_uses_flats(tonic: PitchClass, mode: Mode) -> bool {
    let major = match mode {
        Mode::Major => tonic,
        Mode::Minor => tonic.transpose(3),
    };
    FLAT_MAJOR_TONICS.contains(&major.value())
}

/// Signed shift in (-6, +6] taking `from` to `to`.
pub fn tonic_delta(from: PitchClass, to: PitchClass) -> i32 {
    let d = (i32::from(to.value()) - i32::from(from.value())).rem_euclid(12);
    if d > 6 {
        d - 12
    } else {
        d
    }
}

/// Move every note by the smallest shift from the detected tonic to the
/// target tonic and re-finger it: the original string if the new pitch fits
/// there, otherwise the lowest-fret free position.
pub fn transpose_to_key(score: &Score, target: &KeyResult, max_fret: u8) -> Result<Score> {
    let detected = detect_key(score)?;
    let delta = tonic_delta(detected.tonic, target.tonic);
    if delta == 0 {
        return Ok(score.clone());
    }
    let flats = key_uses_flats(detected.tonic.transpose(delta), detected.mode);
    let mut out = score.clone();
    let mut offenders = Vec::new();
    for m in &mut out.measures {
        for c in &mut m.clusters {
            let mut used = [false; 7];
            for e in &mut c.events {
                let NoteContent::Pitch(p) = e.content else { continue };
                let midi = i32::from(p.midi()) + delta;
                let placed = midi_to_positions(midi, &score.tuning, score.capo, max_fret)
                    .ok()
                    .and_then(|options| choose_position(&options, e.string(), &used));
                match (placed, PitchSpec::from_midi(midi, flats)) {
                    (Some(pos), Ok(pitch)) => {
                        used[usize::from(pos.string())] = true;
                        e.content = NoteContent::Pitch(pitch);
                        e.position = Some(pos);
                    }
                    _ => offenders.push(format!("bar {} {p} -> MIDI {midi}", m.index)),
                }
            }
            c.events.sort_by(crate::model::cluster_order);
        }
    }
    if offenders.is_empty() {
        Ok(out)
    } else {
        Err(Error::Range(format!(
            "notes leave the fretboard: {}",
            offenders.join(", ")
        )))
    }
}

fn choose_position(options: &[Position], original: Option<u8>, used: &[bool; 7]) -> Option<Position> {
    let free = |p: &&Position| !used[usize::from(p.string())];
    original
        .and_then(|s| options.iter().filter(free).find(|p| p.string() == s))
        .or_else(|| options.iter().filter(free).min_by_key(|p| p.fret()))
        .copied()
}
