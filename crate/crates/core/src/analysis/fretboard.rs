//! Conversions between MIDI numbers, pitch tokens and fretboard positions.

use crate::codec::{decode_pitch_token, TokenMode};
use crate::error::{Error, Result};
use crate::model::{NoteContent, Position, Tuning, MAX_CAPO, MAX_FRET};

/// Sounding MIDI of a fretted position: open string + tuning offset + capo + fret.
pub fn position_to_midi(string: u8, fret: u8, tuning: &Tuning, capo: u8) -> Result<i32> {
    if !(1..=6).contains(&string) {
        return Err(Error::Range(format!("string {string} not in 1..=6")));
    }
    if fret > MAX_FRET {
        return Err(Error::Range(format!("fret {fret} above {MAX_FRET}")));
    }
    if capo > MAX_CAPO {
        return Err(Error::Range(format!("capo {capo} above {MAX_CAPO}")));
    }
    Ok(tuning.open_midi(string, capo) + i32::from(fret))
}

/// Every position sounding `midi`, lower-pitched strings first (string 6 to 1).
///
/// Frets are relative to the capo, so the highest usable fret is
/// `max_fret - capo`.
pub fn midi_to_positions(midi: i32, tuning: &Tuning, capo: u8, max_fret: u8) -> Result<Vec<Position>> {
    if !(0..=127).contains(&midi) {
        return Err(Error::Range(format!("MIDI {midi} not in 0..=127")));
    }
    if capo > MAX_CAPO {
        return Err(Error::Range(format!("capo {capo} above {MAX_CAPO}")));
    }
    let top = i32::from(max_fret.min(MAX_FRET)) - i32::from(capo);
    let positions: Vec<Position> = (1..=6u8)
        .rev()
        .filter_map(|string| {
            let fret = midi - tuning.open_midi(string, capo);
            (0..=top)
                .contains(&fret)
                .then(|| Position::new(string, fret as u8).ok())?
        })
        .collect();
    if positions.is_empty() {
        Err(Error::NotPlayable { midi })
    } else {
        Ok(positions)
    }
}

/// MIDI number of an encoded pitch token; `None` for a rest token.
pub fn pitch_token_to_midi(token: &str, mode: TokenMode) -> Result<Option<u8>> {
    Ok(match decode_pitch_token(token, mode)? {
        NoteContent::Rest => None,
        NoteContent::Pitch(p) => Some(p.midi()),
    })
}
