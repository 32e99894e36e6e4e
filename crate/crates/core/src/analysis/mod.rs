//! Musical analysis over normalized scores.

pub mod chord;
pub mod events;
pub mod fretboard;
pub mod key;
pub mod voices;

pub use chord::{recognize_chord, recognize_pitch_classes, IntervalPattern, CHORD_PATTERNS};
pub use events::{detect_events, detect_events_of, DetectedEvent};
pub use fretboard::{midi_to_positions, pitch_token_to_midi, position_to_midi};
pub use key::{detect_key, detect_key_from_counts, transpose_to_key, PitchClassCount};
pub use voices::{classify_voices, extract_bassline, extract_melody, VoiceTag};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{Beats, ChordResult, KeyResult, NoteEvent, Score};

/// Address of one event: zero-based measure, cluster and event indices.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct EventRef {
    pub measure: usize,
    pub cluster: usize,
    pub event: usize,
}

impl EventRef {
    pub fn new(measure: usize, cluster: usize, event: usize) -> Self {
        EventRef {
            measure,
            cluster,
            event,
        }
    }

    pub fn get<'a>(&self, score: &'a Score) -> Option<&'a NoteEvent> {
        score
            .measures
            .get(self.measure)?
            .clusters
            .get(self.cluster)?
            .events
            .get(self.event)
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ChordAtOnset {
    pub bar: u32,
    pub onset: Beats,
    pub name: String,
    pub chord: ChordResult,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct TaggedNote {
    pub bar: u32,
    pub onset: Beats,
    pub string: u8,
    pub fret: u8,
    pub midi: u8,
    pub tag: VoiceTag,
}

/// Everything the analyzers report about one score.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ScoreAnalysis {
    pub title: String,
    pub key: String,
    pub key_detail: KeyResult,
    pub chords: Vec<ChordAtOnset>,
    pub voices: Vec<TaggedNote>,
    pub events: Vec<DetectedEvent>,
}

pub fn analyze(score: &Score) -> Result<ScoreAnalysis> {
    let key = detect_key(score)?;
    let mut chords = Vec::new();
    for m in &score.measures {
        for c in &m.clusters {
            if let Some(chord) = recognize_chord(c, &score.tuning, score.capo) {
                chords.push(ChordAtOnset {
                    bar: m.index,
                    onset: c.onset,
                    name: chord.name(),
                    chord,
                });
            }
        }
    }
    let voices = classify_voices(score)
        .into_iter()
        .filter_map(|(r, tag)| {
            let e = r.get(score)?;
            let pos = e.position?;
            Some(TaggedNote {
                bar: score.measures[r.measure].index,
                onset: e.onset,
                string: pos.string(),
                fret: pos.fret(),
                midi: e.midi()?,
                tag,
            })
        })
        .collect();
    Ok(ScoreAnalysis {
        title: score.title.clone(),
        key: key.name(),
        key_detail: key,
        chords,
        voices,
        events: detect_events(score),
    })
}
