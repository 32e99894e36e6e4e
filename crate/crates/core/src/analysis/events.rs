//! Chronological technique events, including the derived `rest` and
//! `chordEvent` kinds.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{Beats, Score, TechniqueKind, TechniqueTag};

/// Clusters with at least this many sounding notes emit a `chordEvent`.
pub const CHORD_EVENT_MIN_NOTES: usize = 3;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct DetectedEvent {
    /// 1-based bar number.
    pub bar: u32,
    pub onset: Beats,
    pub tag: TechniqueTag,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub string: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fret: Option<u8>,
}

/// Every event of every kind, in score order.
pub fn detect_events(score: &Score) -> Vec<DetectedEvent> {
    detect_events_of(score, &TechniqueKind::ALL.into_iter().collect())
}

/// Events of the given kinds only.
pub fn detect_events_of(score: &Score, kinds: &BTreeSet<TechniqueKind>) -> Vec<DetectedEvent> {
    let mut out = Vec::new();
    for m in &score.measures {
        for c in &m.clusters {
            if kinds.contains(&TechniqueKind::ChordEvent) && c.pitched_count() >= CHORD_EVENT_MIN_NOTES {
                out.push(DetectedEvent {
                    bar: m.index,
                    onset: c.onset,
                    tag: TechniqueTag::new(TechniqueKind::ChordEvent),
                    string: None,
                    fret: None,
                });
            }
            for e in &c.events {
                let rest = e.is_rest().then(|| TechniqueTag::new(TechniqueKind::Rest));
                for tag in rest.into_iter().chain(e.techniques.iter().copied()) {
                    if kinds.contains(&tag.kind()) {
                        out.push(DetectedEvent {
                            bar: m.index,
                            onset: c.onset,
                            tag,
                            string: e.string(),
                            fret: e.fret(),
                        });
                    }
                }
            }
        }
    }
    out
}
