//! Text-token representation of tablature clips.
//!
//! A clip becomes three parallel lists: pitch tokens (`"E5 C3"`), time
//! stamps in quarter notes as `f32`, and finger tokens (`"(1,0) (5,3)"`).
//! Rests are `"R"` and `"(R,R)"`.

mod clip;

pub use clip::{decode_clip, encode_clip, DecodedClip, EncodedClip, TimeSignatureChange};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{NoteContent, PitchSpec, Position, Step};

pub const REST_TOKEN: &str = "R";
pub const REST_FINGER_TOKEN: &str = "(R,R)";

/// Order of the fields inside a pitch token.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenMode {
    /// `C4#`
    #[default]
    PitchOctave,
    /// `4C#`
    OctavePitch,
}

impl TokenMode {
    pub fn name(self) -> &'static str {
        match self {
            TokenMode::PitchOctave => "pitch-octave",
            TokenMode::OctavePitch => "octave-pitch",
        }
    }
}

impl fmt::Display for TokenMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TokenMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pitch-octave" => Ok(TokenMode::PitchOctave),
            "octave-pitch" => Ok(TokenMode::OctavePitch),
            other => Err(Error::Decode(format!("unknown token mode '{other}'"))),
        }
    }
}

pub fn encode_pitch_token(content: &NoteContent, mode: TokenMode) -> Result<String> {
    let p = match content {
        NoteContent::Rest => return Ok(REST_TOKEN.to_string()),
        NoteContent::Pitch(p) => p,
    };
    let acc = match p.alter() {
        0 => "",
        1 => "#",
        -1 => "b",
        _ => return Err(Error::Encode(format!("double accidental in {p} has no token form"))),
    };
    let letter = p.step().letter();
    Ok(match mode {
        TokenMode::PitchOctave => format!("{letter}{}{acc}", p.octave()),
        TokenMode::OctavePitch => format!("{}{letter}{acc}", p.octave()),
    })
}

pub fn decode_pitch_token(token: &str, mode: TokenMode) -> Result<NoteContent> {
    if token == REST_TOKEN {
        return Ok(NoteContent::Rest);
    }
    let bad = || Error::Decode(format!("malformed {mode} pitch token '{token}'"));
    let chars: Vec<char> = token.chars().collect();
    if !(2..=3).contains(&chars.len()) {
        return Err(bad());
    }
    let (letter, digit) = match mode {
        TokenMode::PitchOctave => (chars[0], chars[1]),
        TokenMode::OctavePitch => (chars[1], chars[0]),
    };
    let step = Step::from_letter(letter).ok_or_else(bad)?;
    let octave = digit.to_digit(10).ok_or_else(bad)? as i8;
    let alter = match chars.get(2) {
        None => 0,
        Some('#') => 1,
        Some('b') => -1,
        Some(_) => return Err(bad()),
    };
    PitchSpec::new(step, alter, octave)
        .map(NoteContent::Pitch)
        .map_err(|e| Error::Decode(format!("'{token}': {e}")))
}

pub fn encode_finger_token(position: Option<Position>) -> String {
    match position {
        Some(p) => p.to_string(),
        None => REST_FINGER_TOKEN.to_string(),
    }
}

/// Parses `(string,fret)`; `None` for `(R,R)`.
pub fn decode_finger_token(token: &str) -> Result<Option<Position>> {
    if token == REST_FINGER_TOKEN {
        return Ok(None);
    }
    let bad = || Error::Decode(format!("malformed finger token '{token}'"));
    let inner = token
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(bad)?;
    let (s, f) = inner.split_once(',').ok_or_else(bad)?;
    let s: u8 = s.parse().map_err(|_| bad())?;
    let f: u8 = f.parse().map_err(|_| bad())?;
    Position::new(s, f)
        .map(Some)
        .map_err(|e| Error::Decode(format!("'{token}': {e}")))
}
