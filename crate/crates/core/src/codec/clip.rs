use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{
    decode_finger_token, decode_pitch_token, encode_finger_token, encode_pitch_token, TokenMode, REST_FINGER_TOKEN,
    REST_TOKEN,
};
use crate::analysis::fretboard::position_to_midi;
use crate::error::{Error, Result};
use crate::model::{
    Beats, ClipAnnotation, Cluster, Measure, NoteContent, NoteEvent, PitchSpec, Position, Score, TimeSignature, Tuning,
};

/// Time signature in force from `bar` onwards.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TimeSignatureChange {
    pub bar: u32,
    pub numerator: u32,
    pub denominator: u32,
}

/// One clip in token form. Serialized as the `.antab.json` document.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EncodedClip {
    pub mode: TokenMode,
    pub tuning: Tuning,
    pub capo: u8,
    #[serde(default)]
    pub time_signatures: Vec<TimeSignatureChange>,
    pub pitch: Vec<String>,
    pub time: Vec<f32>,
    pub finger: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<ClipAnnotation>,
}

impl EncodedClip {
    pub fn len(&self) -> usize {
        self.pitch.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pitch.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Three tab-separated lines: pitch tokens, time stamps, finger tokens.
    pub fn to_text(&self) -> String {
        let time: Vec<String> = self.time.iter().map(f32::to_string).collect();
        format!(
            "{}\n{}\n{}\n",
            self.pitch.join("\t"),
            time.join("\t"),
            self.finger.join("\t")
        )
    }
}

#[derive(Clone, Debug)]
struct Sound {
    on: Beats,
    end: Beats,
    pitch: PitchSpec,
    position: Position,
}

/// Encode a score into token lists, one token triple per time segment.
///
/// Segments are cut at every barline, onset and release, so a note that
/// outlasts its neighbours is split into continuation tokens and every
/// segment carries a single stamp. Stretches with nothing sounding become
/// rest tokens. Within a measure the stamps therefore sum to its length.
pub fn encode_clip(score: &Score, mode: TokenMode) -> Result<EncodedClip> {
    if score.measures.is_empty() {
        return Err(Error::EmptyScore);
    }
    let starts = score.measure_starts()?;
    let last = score.measures.last().expect("non-empty");
    let total = *starts.last().expect("non-empty") + last.time_signature.length()?;

    let mut bounds: BTreeSet<Beats> = starts.iter().copied().collect();
    bounds.insert(total);
    let mut sounds = Vec::new();
    for (m, start) in score.measures.iter().zip(&starts) {
        for c in &m.clusters {
            let on = *start + c.onset;
            if on < total {
                bounds.insert(on);
            }
            for e in c.pitched() {
                let (NoteContent::Pitch(pitch), Some(position)) = (e.content, e.position) else {
                    continue;
                };
                sounds.push(Sound {
                    on,
                    end: (on + e.duration).min(total),
                    pitch,
                    position,
                });
            }
        }
    }
    sounds.sort_by(|a, b| a.on.cmp(&b.on).then(a.position.cmp(&b.position)));
    // A new attack on a string silences whatever was ringing on it.
    for i in 0..sounds.len() {
        let string = sounds[i].position.string();
        if let Some(next_on) = sounds[i + 1..]
            .iter()
            .find(|s| s.position.string() == string)
            .map(|s| s.on)
        {
            if next_on < sounds[i].end {
                sounds[i].end = next_on;
            }
        }
    }
    sounds.retain(|s| s.end > s.on);
    for s in &sounds {
        bounds.insert(s.end);
    }

    let bounds: Vec<Beats> = bounds.into_iter().filter(|b| *b <= total).collect();
    let mut clip = EncodedClip {
        mode,
        tuning: score.tuning,
        capo: score.capo,
        time_signatures: time_signature_changes(score),
        pitch: Vec::with_capacity(bounds.len()),
        time: Vec::with_capacity(bounds.len()),
        finger: Vec::with_capacity(bounds.len()),
        annotation: None,
    };

    let mut next = 0;
    let mut active: Vec<&Sound> = Vec::new();
    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        active.retain(|s| s.end > a);
        while next < sounds.len() && sounds[next].on <= a {
            if sounds[next].end > a {
                active.push(&sounds[next]);
            }
            next += 1;
        }
        let mut now: Vec<&Sound> = active.clone();
        now.sort_by(|x, y| {
            y.pitch
                .midi()
                .cmp(&x.pitch.midi())
                .then(x.position.string().cmp(&y.position.string()))
        });
        if now.is_empty() {
            clip.pitch.push(REST_TOKEN.to_string());
            clip.finger.push(REST_FINGER_TOKEN.to_string());
        } else {
            let pitches = now
                .iter()
                .map(|s| encode_pitch_token(&NoteContent::Pitch(s.pitch), mode))
                .collect::<Result<Vec<_>>>()?;
            let fingers: Vec<String> = now.iter().map(|s| encode_finger_token(Some(s.position))).collect();
            clip.pitch.push(pitches.join(" "));
            clip.finger.push(fingers.join(" "));
        }
        clip.time.push((b - a).to_f32());
    }
    Ok(clip)
}

fn time_signature_changes(score: &Score) -> Vec<TimeSignatureChange> {
    let mut out: Vec<TimeSignatureChange> = Vec::new();
    for (i, m) in score.measures.iter().enumerate() {
        let ts = m.time_signature;
        let changed = out
            .last()
            .is_none_or(|c| c.numerator != ts.numerator || c.denominator != ts.denominator);
        if changed {
            out.push(TimeSignatureChange {
                bar: i as u32 + 1,
                numerator: ts.numerator,
                denominator: ts.denominator,
            });
        }
    }
    out
}

/// Result of decoding: the rebuilt score plus consistency warnings.
#[derive(Clone, Debug)]
pub struct DecodedClip {
    pub score: Score,
    pub warnings: Vec<String>,
}

/// Largest denominator tried when recovering a rational from an `f32` stamp.
const MAX_STAMP_DENOMINATOR: i64 = 3840;

/// The simplest rational whose `f32` rounding is exactly `stamp`.
pub(crate) fn stamp_to_beats(stamp: f32) -> Result<Beats> {
    if !stamp.is_finite() || stamp <= 0.0 {
        return Err(Error::Decode(format!("time stamp {stamp} must be positive")));
    }
    let x = f64::from(stamp);
    let matches = |d: i64| {
        let n = (x * d as f64).round() as i64;
        (n > 0 && Beats::new(n, d).to_f32() == stamp).then(|| Beats::new(n, d))
    };
    (1..=MAX_STAMP_DENOMINATOR)
        .find_map(matches)
        .or_else(|| (13..=40).map(|k| 1i64 << k).find_map(matches))
        .ok_or_else(|| Error::Decode(format!("time stamp {stamp} has no rational form")))
}

/// Rebuild a score from token lists. Each token becomes one cluster whose
/// members last exactly its stamp; tokens are packed into measures
/// following the declared time signatures (4/4 when none are given).
pub fn decode_clip(clip: &EncodedClip) -> Result<DecodedClip> {
    let n = clip.pitch.len();
    if clip.time.len() != n || clip.finger.len() != n {
        return Err(Error::Decode(format!(
            "list lengths differ: pitch {n}, time {}, finger {}",
            clip.time.len(),
            clip.finger.len()
        )));
    }
    if n == 0 {
        return Err(Error::EmptyScore);
    }
    let mut changes = clip.time_signatures.clone();
    changes.sort_by_key(|c| c.bar);
    if let Some(first) = changes.first() {
        if first.bar != 1 {
            return Err(Error::Decode("first time signature must start at bar 1".into()));
        }
    }
    let signature_at = |bar: u32| -> Result<TimeSignature> {
        match changes.iter().rev().find(|c| c.bar <= bar) {
            Some(c) => TimeSignature::new(c.numerator, c.denominator),
            None => Ok(TimeSignature::COMMON),
        }
    };

    let mut warnings = Vec::new();
    let mut measures = Vec::new();
    let mut clusters = Vec::new();
    let mut bar = 1u32;
    let mut ts = signature_at(bar)?;
    let mut pos = Beats::ZERO;

    for i in 0..n {
        let duration = stamp_to_beats(clip.time[i])?;
        let events = decode_cluster(clip, i, duration, bar, &mut warnings)?;
        clusters.push(Cluster::new(pos, events));
        pos += duration;
        let length = ts.length()?;
        if pos > length {
            return Err(Error::Decode(format!("token {i} crosses the end of bar {bar}")));
        }
        if pos == length {
            measures.push(build_measure(bar, ts, std::mem::take(&mut clusters)));
            bar += 1;
            ts = signature_at(bar)?;
            pos = Beats::ZERO;
        }
    }
    if !clusters.is_empty() {
        return Err(Error::Decode(format!("bar {bar} is not filled by its tokens")));
    }

    let score = Score {
        title: String::new(),
        artist: String::new(),
        tuning: clip.tuning,
        capo: clip.capo,
        measures,
    };
    Ok(DecodedClip { score, warnings })
}

fn decode_cluster(
    clip: &EncodedClip,
    i: usize,
    duration: Beats,
    bar: u32,
    warnings: &mut Vec<String>,
) -> Result<Vec<NoteEvent>> {
    let pitches: Vec<&str> = clip.pitch[i].split(' ').collect();
    let fingers: Vec<&str> = clip.finger[i].split(' ').collect();
    if pitches.len() != fingers.len() {
        return Err(Error::Decode(format!(
            "token {i}: {} pitches but {} finger positions",
            pitches.len(),
            fingers.len()
        )));
    }
    if pitches.len() > 1 && pitches.contains(&REST_TOKEN) {
        return Err(Error::Decode(format!("token {i}: rest inside a cluster")));
    }
    let mut events = Vec::with_capacity(pitches.len());
    let mut used = [false; 7];
    let mut previous: Option<(u8, u8)> = None;
    for (p, f) in pitches.iter().zip(&fingers) {
        let content = decode_pitch_token(p, clip.mode)?;
        let position = decode_finger_token(f)?;
        match (content, position) {
            (NoteContent::Rest, None) => events.push(NoteEvent::rest(Beats::ZERO, duration)),
            (NoteContent::Pitch(pitch), Some(position)) => {
                let key = (pitch.midi(), position.string());
                if let Some(prev) = previous {
                    if key.0 > prev.0 || (key.0 == prev.0 && key.1 < prev.1) {
                        return Err(Error::Decode(format!("token {i}: not ordered high to low")));
                    }
                }
                previous = Some(key);
                if std::mem::replace(&mut used[usize::from(position.string())], true) {
                    return Err(Error::Decode(format!(
                        "token {i}: string {} used twice",
                        position.string()
                    )));
                }
                let sounding = position_to_midi(position.string(), position.fret(), &clip.tuning, clip.capo)?;
                if sounding != i32::from(pitch.midi()) {
                    warnings.push(format!(
                        "bar {bar}: {p} at {f} sounds MIDI {sounding} under the clip tuning"
                    ));
                }
                events.push(NoteEvent::pitched(Beats::ZERO, duration, pitch, position));
            }
            _ => {
                return Err(Error::Decode(format!(
                    "token {i}: pitch '{p}' and finger '{f}' disagree on rest"
                )))
            }
        }
    }
    Ok(events)
}

fn build_measure(index: u32, time_signature: TimeSignature, clusters: Vec<Cluster>) -> Measure {
    let divisions = clusters
        .iter()
        .flat_map(|c| c.events.iter().flat_map(|e| [e.onset.denom(), e.duration.denom()]))
        .fold(1i64, num_integer_lcm);
    Measure {
        index,
        divisions: divisions as u32,
        time_signature,
        clusters,
    }
}

fn num_integer_lcm(a: i64, b: i64) -> i64 {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}
