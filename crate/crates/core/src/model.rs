//! Normalized in-memory representation of a tablature score.
//!
//! Everything here is plain data: no I/O, no parsing of external formats.
//! Time is measured in quarter notes and kept as exact rationals ([`Beats`]);
//! floats only appear when a clip is encoded to tokens.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Open-string MIDI numbers in standard tuning, string 1 (high E) first.
pub const STANDARD_OPEN_MIDI: [u8; 6] = [64, 59, 55, 50, 45, 40];

pub const MAX_FRET: u8 = 24;
pub const MAX_CAPO: u8 = 12;
pub const MAX_TUNING_OFFSET: i8 = 7;

/// A duration or position in quarter notes, held exactly.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Beats(Ratio<i64>);

impl Beats {
    pub const ZERO: Beats = Beats(Ratio::new_raw(0, 1));

    pub fn new(numer: i64, denom: i64) -> Self {
        Beats(Ratio::new(numer, denom))
    }

    pub fn from_integer(n: i64) -> Self {
        Beats(Ratio::from_integer(n))
    }

    /// `duration / divisions` as MusicXML stores it.
    pub fn from_divisions(duration: i64, divisions: u32) -> Self {
        Beats::new(duration, i64::from(divisions))
    }

    pub fn ratio(self) -> Ratio<i64> {
        self.0
    }

    pub fn numer(self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(self) -> i64 {
        *self.0.denom()
    }

    pub fn is_zero(self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(self) -> bool {
        self.0 > Ratio::zero()
    }

    pub fn to_f64(self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn to_f32(self) -> f32 {
        // Go through f64 so that the only rounding is the final f32 one.
        self.to_f64() as f32
    }

    pub fn min(self, other: Beats) -> Beats {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Beats) -> Beats {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Default for Beats {
    fn default() -> Self {
        Beats::ZERO
    }
}

impl Add for Beats {
    type Output = Beats;
    fn add(self, rhs: Beats) -> Beats {
        Beats(self.0 + rhs.0)
    }
}

impl AddAssign for Beats {
    fn add_assign(&mut self, rhs: Beats) {
        self.0 += rhs.0;
    }
}

impl Sub for Beats {
    type Output = Beats;
    fn sub(self, rhs: Beats) -> Beats {
        Beats(self.0 - rhs.0)
    }
}

impl Mul<i64> for Beats {
    type Output = Beats;
    fn mul(self, rhs: i64) -> Beats {
        Beats(self.0 * rhs)
    }
}

impl std::iter::Sum for Beats {
    fn sum<I: Iterator<Item = Beats>>(iter: I) -> Beats {
        iter.fold(Beats::ZERO, Add::add)
    }
}

impl fmt::Display for Beats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Beats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Beats({self})")
    }
}

impl FromStr for Beats {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Decode(format!("invalid rational '{s}'"));
        match s.split_once('/') {
            Some((n, d)) => {
                let n: i64 = n.trim().parse().map_err(|_| bad())?;
                let d: i64 = d.trim().parse().map_err(|_| bad())?;
                if d == 0 {
                    return Err(bad());
                }
                Ok(Beats::new(n, d))
            }
            None => s.trim().parse().map(Beats::from_integer).map_err(|_| bad()),
        }
    }
}

impl Serialize for Beats {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Beats {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Pitch class 0..=11 with C = 0.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct PitchClass(u8);

const SHARP_NAMES: [&str; 12] = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"];
const KEY_NAMES: [&str; 12] = ["C", "C#", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B"];

impl PitchClass {
    pub fn new(pc: u8) -> Result<Self> {
        if pc < 12 {
            Ok(PitchClass(pc))
        } else {
            Err(Error::Range(format!("pitch class {pc} not in 0..=11")))
        }
    }

    pub fn from_midi(midi: i32) -> Self {
        PitchClass(midi.rem_euclid(12) as u8)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// Shift by a signed number of semitones, wrapping.
    pub fn transpose(self, semitones: i32) -> Self {
        PitchClass::from_midi(i32::from(self.0) + semitones)
    }

    /// Conventional key-name spelling (C, C#, D, Eb, ...).
    pub fn key_name(self) -> &'static str {
        KEY_NAMES[self.0 as usize]
    }

    pub fn sharp_name(self) -> &'static str {
        SHARP_NAMES[self.0 as usize]
    }
}

impl TryFrom<u8> for PitchClass {
    type Error = Error;
    fn try_from(value: u8) -> Result<Self> {
        PitchClass::new(value)
    }
}

impl From<PitchClass> for u8 {
    fn from(pc: PitchClass) -> u8 {
        pc.0
    }
}

impl fmt::Display for PitchClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key_name())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Step {
    C,
    D,
    E,
    F,
    G,
    A,
    B,
}

impl Step {
    pub const ALL: [Step; 7] = [Step::C, Step::D, Step::E, Step::F, Step::G, Step::A, Step::B];

    pub fn semitone(self) -> i32 {
        match self {
            Step::C => 0,
            Step::D => 2,
            Step::E => 4,
            Step::F => 5,
            Step::G => 7,
            Step::A => 9,
            Step::B => 11,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Step::C => 'C',
            Step::D => 'D',
            Step::E => 'E',
            Step::F => 'F',
            Step::G => 'G',
            Step::A => 'A',
            Step::B => 'B',
        }
    }

    pub fn from_letter(c: char) -> Option<Step> {
        Some(match c {
            'C' => Step::C,
            'D' => Step::D,
            'E' => Step::E,
            'F' => Step::F,
            'G' => Step::G,
            'A' => Step::A,
            'B' => Step::B,
            _ => return None,
        })
    }
}

/// A spelled pitch: letter, accidental and octave (octave 4 holds middle C).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawPitch")]
pub struct PitchSpec {
    step: Step,
    alter: i8,
    octave: i8,
}

#[derive(Deserialize)]
struct RawPitch {
    step: Step,
    alter: i8,
    octave: i8,
}

impl TryFrom<RawPitch> for PitchSpec {
    type Error = Error;
    fn try_from(raw: RawPitch) -> Result<Self> {
        PitchSpec::new(raw.step, raw.alter, raw.octave)
    }
}

impl PitchSpec {
    pub fn new(step: Step, alter: i8, octave: i8) -> Result<Self> {
        if !(-2..=2).contains(&alter) {
            return Err(Error::Range(format!("alter {alter} not in -2..=2")));
        }
        if !(0..=9).contains(&octave) {
            return Err(Error::Range(format!("octave {octave} not in 0..=9")));
        }
        let midi = midi_of(step, alter, octave);
        if !(0..=127).contains(&midi) {
            return Err(Error::Range(format!(
                "{}{}{} maps to MIDI {midi}",
                step.letter(),
                octave,
                alter
            )));
        }
        Ok(PitchSpec { step, alter, octave })
    }

    /// Spell a MIDI number, using flats or sharps for black keys.
    pub fn from_midi(midi: i32, prefer_flats: bool) -> Result<Self> {
        if !(12..=127).contains(&midi) {
            return Err(Error::Range(format!("MIDI {midi} has no octave 0..=9 spelling")));
        }
        let octave = (midi / 12 - 1) as i8;
        let (step, alter) = match (midi % 12, prefer_flats) {
            (0, _) => (Step::C, 0),
            (1, false) => (Step::C, 1),
            (1, true) => (Step::D, -1),
            (2, _) => (Step::D, 0),
            (3, false) => (Step::D, 1),
            (3, true) => (Step::E, -1),
            (4, _) => (Step::E, 0),
            (5, _) => (Step::F, 0),
            (6, false) => (Step::F, 1),
            (6, true) => (Step::G, -1),
            (7, _) => (Step::G, 0),
            (8, false) => (Step::G, 1),
            (8, true) => (Step::A, -1),
            (9, _) => (Step::A, 0),
            (10, false) => (Step::A, 1),
            (10, true) => (Step::B, -1),
            _ => (Step::B, 0),
        };
        PitchSpec::new(step, alter, octave)
    }

    pub fn step(&self) -> Step {
        self.step
    }

    pub fn alter(&self) -> i8 {
        self.alter
    }

    pub fn octave(&self) -> i8 {
        self.octave
    }

    pub fn midi(&self) -> u8 {
        midi_of(self.step, self.alter, self.octave) as u8
    }

    pub fn pitch_class(&self) -> PitchClass {
        PitchClass::from_midi(i32::from(self.midi()))
    }

    /// Move by `semitones`, keeping the accidental direction of the source spelling.
    pub fn transposed(&self, semitones: i32) -> Result<Self> {
        if semitones == 0 {
            return Ok(*self);
        }
        PitchSpec::from_midi(i32::from(self.midi()) + semitones, self.alter < 0)
    }
}

fn midi_of(step: Step, alter: i8, octave: i8) -> i32 {
    12 * (i32::from(octave) + 1) + step.semitone() + i32::from(alter)
}

/// MIDI number of a spelled pitch.
pub fn midi_of_pitch(p: &PitchSpec) -> u8 {
    p.midi()
}

impl fmt::Display for PitchSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let acc = match self.alter {
            -2 => "bb",
            -1 => "b",
            1 => "#",
            2 => "##",
            _ => "",
        };
        write!(f, "{}{}{}", self.step.letter(), acc, self.octave)
    }
}

/// A fretted position. String 1 is the high E string.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawPosition")]
pub struct Position {
    string: u8,
    fret: u8,
}

#[derive(Deserialize)]
struct RawPosition {
    string: u8,
    fret: u8,
}

impl TryFrom<RawPosition> for Position {
    type Error = Error;
    fn try_from(raw: RawPosition) -> Result<Self> {
        Position::new(raw.string, raw.fret)
    }
}

impl Position {
    pub fn new(string: u8, fret: u8) -> Result<Self> {
        if !(1..=6).contains(&string) {
            return Err(Error::Range(format!("string {string} not in 1..=6")));
        }
        if fret > MAX_FRET {
            return Err(Error::Range(format!("fret {fret} above {MAX_FRET}")));
        }
        Ok(Position { string, fret })
    }

    pub fn string(&self) -> u8 {
        self.string
    }

    pub fn fret(&self) -> u8 {
        self.fret
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.string, self.fret)
    }
}

/// Semitone offset per string relative to standard tuning, string 1 first.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default, Serialize, Deserialize)]
#[serde(try_from = "[i8; 6]")]
pub struct Tuning([i8; 6]);

impl TryFrom<[i8; 6]> for Tuning {
    type Error = Error;
    fn try_from(offsets: [i8; 6]) -> Result<Self> {
        Tuning::new(offsets)
    }
}

impl Tuning {
    pub const STANDARD: Tuning = Tuning([0; 6]);
    pub const DROP_D: Tuning = Tuning([0, 0, 0, 0, 0, -2]);
    /// D A D F# A D
    pub const OPEN_D: Tuning = Tuning([-2, -2, -1, 0, 0, -2]);

    pub fn new(offsets: [i8; 6]) -> Result<Self> {
        if let Some(bad) = offsets.iter().find(|o| o.abs() > MAX_TUNING_OFFSET) {
            return Err(Error::Range(format!(
                "tuning offset {bad} outside ±{MAX_TUNING_OFFSET}"
            )));
        }
        Ok(Tuning(offsets))
    }

    pub fn offsets(&self) -> [i8; 6] {
        self.0
    }

    /// Offset of `string` (1..=6).
    pub fn offset(&self, string: u8) -> i8 {
        self.0[usize::from(string) - 1]
    }

    /// Sounding MIDI of the open string with the given capo.
    pub fn open_midi(&self, string: u8, capo: u8) -> i32 {
        let idx = usize::from(string) - 1;
        i32::from(STANDARD_OPEN_MIDI[idx]) + i32::from(self.0[idx]) + i32::from(capo)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TechniqueKind {
    Mute,
    NaturalHarmonic,
    ArtificialHarmonic,
    SlideIn,
    SlideOut,
    HammerOn,
    PullOff,
    LetRing,
    Triplet,
    Rest,
    ChordEvent,
}

impl TechniqueKind {
    pub const ALL: [TechniqueKind; 11] = [
        TechniqueKind::Mute,
        TechniqueKind::NaturalHarmonic,
        TechniqueKind::ArtificialHarmonic,
        TechniqueKind::SlideIn,
        TechniqueKind::SlideOut,
        TechniqueKind::HammerOn,
        TechniqueKind::PullOff,
        TechniqueKind::LetRing,
        TechniqueKind::Triplet,
        TechniqueKind::Rest,
        TechniqueKind::ChordEvent,
    ];

    pub fn is_slide(self) -> bool {
        matches!(self, TechniqueKind::SlideIn | TechniqueKind::SlideOut)
    }

    pub fn name(self) -> &'static str {
        match self {
            TechniqueKind::Mute => "mute",
            TechniqueKind::NaturalHarmonic => "naturalHarmonic",
            TechniqueKind::ArtificialHarmonic => "artificialHarmonic",
            TechniqueKind::SlideIn => "slideIn",
            TechniqueKind::SlideOut => "slideOut",
            TechniqueKind::HammerOn => "hammerOn",
            TechniqueKind::PullOff => "pullOff",
            TechniqueKind::LetRing => "letRing",
            TechniqueKind::Triplet => "triplet",
            TechniqueKind::Rest => "rest",
            TechniqueKind::ChordEvent => "chordEvent",
        }
    }
}

impl FromStr for TechniqueKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TechniqueKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Dictionary(format!("unknown technique kind '{s}'")))
    }
}

/// A playing technique attached to a note. Slides may carry the fret at the
/// other end of the slide (target for `slideOut`, origin for `slideIn`).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawTechnique")]
pub struct TechniqueTag {
    kind: TechniqueKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<u8>,
}

#[derive(Deserialize)]
struct RawTechnique {
    kind: TechniqueKind,
    #[serde(default)]
    detail: Option<u8>,
}

impl TryFrom<RawTechnique> for TechniqueTag {
    type Error = Error;
    fn try_from(raw: RawTechnique) -> Result<Self> {
        match raw.detail {
            None => Ok(TechniqueTag::new(raw.kind)),
            Some(fret) => TechniqueTag::slide(raw.kind, fret),
        }
    }
}

impl TechniqueTag {
    pub fn new(kind: TechniqueKind) -> Self {
        TechniqueTag { kind, detail: None }
    }

    pub fn slide(kind: TechniqueKind, other_fret: u8) -> Result<Self> {
        if !kind.is_slide() {
            return Err(Error::Range(format!("{} cannot carry a fret detail", kind.name())));
        }
        Ok(TechniqueTag {
            kind,
            detail: Some(other_fret),
        })
    }

    pub fn kind(&self) -> TechniqueKind {
        self.kind
    }

    pub fn detail(&self) -> Option<u8> {
        self.detail
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoteContent {
    Rest,
    Pitch(PitchSpec),
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct NoteEvent {
    /// Position within the measure, in quarter notes.
    pub onset: Beats,
    /// Duration in quarter notes (MusicXML duration / divisions).
    pub duration: Beats,
    pub content: NoteContent,
    pub position: Option<Position>,
    pub voice: u8,
    pub tie_start: bool,
    pub tie_stop: bool,
    pub techniques: BTreeSet<TechniqueTag>,
}

impl NoteEvent {
    pub fn pitched(onset: Beats, duration: Beats, pitch: PitchSpec, position: Position) -> Self {
        NoteEvent {
            onset,
            duration,
            content: NoteContent::Pitch(pitch),
            position: Some(position),
            voice: 1,
            tie_start: false,
            tie_stop: false,
            techniques: BTreeSet::new(),
        }
    }

    pub fn rest(onset: Beats, duration: Beats) -> Self {
        NoteEvent {
            onset,
            duration,
            content: NoteContent::Rest,
            position: None,
            voice: 1,
            tie_start: false,
            tie_stop: false,
            techniques: BTreeSet::new(),
        }
    }

    pub fn with_voice(mut self, voice: u8) -> Self {
        self.voice = voice;
        self
    }

    pub fn pitch(&self) -> Option<&PitchSpec> {
        match &self.content {
            NoteContent::Pitch(p) => Some(p),
            NoteContent::Rest => None,
        }
    }

    pub fn midi(&self) -> Option<u8> {
        self.pitch().map(PitchSpec::midi)
    }

    pub fn is_rest(&self) -> bool {
        matches!(self.content, NoteContent::Rest)
    }

    pub fn string(&self) -> Option<u8> {
        self.position.map(|p| p.string())
    }

    pub fn fret(&self) -> Option<u8> {
        self.position.map(|p| p.fret())
    }

    pub fn has_technique(&self, kind: TechniqueKind) -> bool {
        self.techniques.iter().any(|t| t.kind() == kind)
    }

    pub fn end(&self) -> Beats {
        self.onset + self.duration
    }
}

/// Ordering used inside a cluster: descending MIDI, then ascending string,
/// rests last.
pub fn cluster_order(a: &NoteEvent, b: &NoteEvent) -> Ordering {
    match (a.midi(), b.midi()) {
        (Some(x), Some(y)) => y
            .cmp(&x)
            .then_with(|| a.string().cmp(&b.string()))
            .then_with(|| a.voice.cmp(&b.voice)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.voice.cmp(&b.voice).then_with(|| a.duration.cmp(&b.duration)),
    }
}

/// Simultaneous events, highest pitch first.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Cluster {
    pub onset: Beats,
    pub events: Vec<NoteEvent>,
}

impl Cluster {
    /// Builds a cluster and sorts its events. Every event's onset is set to `onset`.
    pub fn new(onset: Beats, mut events: Vec<NoteEvent>) -> Self {
        for e in &mut events {
            e.onset = onset;
        }
        events.sort_by(cluster_order);
        Cluster { onset, events }
    }

    pub fn pitched(&self) -> impl Iterator<Item = &NoteEvent> {
        self.events.iter().filter(|e| !e.is_rest())
    }

    pub fn pitched_count(&self) -> usize {
        self.pitched().count()
    }

    pub fn is_rest(&self) -> bool {
        self.pitched_count() == 0
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct TimeSignature {
    pub numerator: u32,
    pub denominator: u32,
}

impl TimeSignature {
    pub const COMMON: TimeSignature = TimeSignature {
        numerator: 4,
        denominator: 4,
    };

    pub fn new(numerator: u32, denominator: u32) -> Result<Self> {
        let ts = TimeSignature { numerator, denominator };
        ts.length()?;
        Ok(ts)
    }

    /// Measure length in quarter notes: numerator * 4 / denominator.
    pub fn length(&self) -> Result<Beats> {
        if self.denominator == 0 || self.numerator == 0 {
            return Err(Error::TimeSignature {
                numerator: self.numerator,
                denominator: self.denominator,
            });
        }
        Ok(Beats::new(4 * i64::from(self.numerator), i64::from(self.denominator)))
    }
}

impl fmt::Display for TimeSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Measure {
    /// 1-based bar number.
    pub index: u32,
    pub divisions: u32,
    pub time_signature: TimeSignature,
    pub clusters: Vec<Cluster>,
}

impl Measure {
    pub fn events(&self) -> impl Iterator<Item = &NoteEvent> {
        self.clusters.iter().flat_map(|c| c.events.iter())
    }
}

/// Length of a measure in quarter notes.
pub fn measure_length(m: &Measure) -> Result<Beats> {
    m.time_signature.length()
}

#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct Score {
    pub title: String,
    pub artist: String,
    pub tuning: Tuning,
    pub capo: u8,
    pub measures: Vec<Measure>,
}

impl Score {
    pub fn events(&self) -> impl Iterator<Item = &NoteEvent> {
        self.measures.iter().flat_map(Measure::events)
    }

    pub fn pitched_events(&self) -> impl Iterator<Item = &NoteEvent> {
        self.events().filter(|e| !e.is_rest())
    }

    /// Absolute start of each measure (quarter notes from the top of the score).
    pub fn measure_starts(&self) -> Result<Vec<Beats>> {
        let mut acc = Beats::ZERO;
        let mut starts = Vec::with_capacity(self.measures.len());
        for m in &self.measures {
            starts.push(acc);
            acc += measure_length(m)?;
        }
        Ok(starts)
    }

    /// Checks the invariants that hold for any parsed score.
    pub fn validate(&self) -> Result<()> {
        Tuning::new(self.tuning.offsets())?;
        if self.capo > MAX_CAPO {
            return Err(Error::Range(format!("capo {} above {MAX_CAPO}", self.capo)));
        }
        for m in &self.measures {
            if m.divisions == 0 {
                return Err(Error::Structure(format!("bar {}: zero divisions", m.index)));
            }
            measure_length(m)?;
            for c in &m.clusters {
                if c.events.is_empty() {
                    return Err(Error::Structure(format!("bar {}: empty cluster", m.index)));
                }
                for w in c.events.windows(2) {
                    if cluster_order(&w[0], &w[1]) == Ordering::Greater {
                        return Err(Error::Structure(format!(
                            "bar {}: cluster at {} not sorted high to low",
                            m.index, c.onset
                        )));
                    }
                }
                for e in &c.events {
                    self.validate_event(m.index, c, e)?;
                }
            }
            for w in m.clusters.windows(2) {
                if w[1].onset < w[0].onset {
                    return Err(Error::Structure(format!("bar {}: clusters out of time order", m.index)));
                }
            }
        }
        Ok(())
    }

    /// Invariants of a voice-merged score: strictly increasing cluster
    /// onsets and no string used twice within a cluster.
    pub fn validate_normalized(&self) -> Result<()> {
        self.validate()?;
        for m in &self.measures {
            for w in m.clusters.windows(2) {
                if w[1].onset <= w[0].onset {
                    return Err(Error::Structure(format!(
                        "bar {}: cluster onsets not strictly increasing",
                        m.index
                    )));
                }
            }
            for c in &m.clusters {
                let mut seen = [false; 7];
                for s in c.pitched().filter_map(NoteEvent::string) {
                    if std::mem::replace(&mut seen[usize::from(s)], true) {
                        return Err(Error::Structure(format!(
                            "bar {}: string {s} used twice at {}",
                            m.index, c.onset
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn validate_event(&self, bar: u32, cluster: &Cluster, e: &NoteEvent) -> Result<()> {
        if e.onset != cluster.onset {
            return Err(Error::Structure(format!("bar {bar}: event onset differs from cluster")));
        }
        if !e.duration.is_positive() {
            return Err(Error::Structure(format!("bar {bar}: non-positive duration")));
        }
        if e.voice == 0 {
            return Err(Error::Structure(format!("bar {bar}: voice 0")));
        }
        match (&e.content, e.position) {
            (NoteContent::Rest, None) => {
                if e.tie_stop {
                    return Err(Error::Structure(format!("bar {bar}: tied rest")));
                }
            }
            (NoteContent::Pitch(p), Some(pos)) => {
                let sounding =
                    crate::analysis::fretboard::position_to_midi(pos.string(), pos.fret(), &self.tuning, self.capo)?;
                if i32::from(p.midi()) != sounding {
                    return Err(Error::Structure(format!(
                        "bar {bar}: {p} does not sound at {pos} (got MIDI {sounding})"
                    )));
                }
            }
            _ => return Err(Error::Structure(format!("bar {bar}: rest/position mismatch"))),
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    Intro,
    Verse,
    Chorus,
    Bridge,
}

impl Structure {
    pub fn name(self) -> &'static str {
        match self {
            Structure::Intro => "intro",
            Structure::Verse => "verse",
            Structure::Chorus => "chorus",
            Structure::Bridge => "bridge",
        }
    }
}

impl FromStr for Structure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "intro" => Ok(Structure::Intro),
            "verse" => Ok(Structure::Verse),
            "chorus" => Ok(Structure::Chorus),
            "bridge" => Ok(Structure::Bridge),
            other => Err(Error::Decode(format!("unknown structure label '{other}'"))),
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A labelled bar range of a source score. Field names follow the
/// annotation CSV columns.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", try_from = "RawAnnotation")]
pub struct ClipAnnotation {
    pub source_id: String,
    pub structure: Structure,
    pub start_bar: u32,
    pub end_bar: u32,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawAnnotation {
    source_id: String,
    structure: Structure,
    start_bar: u32,
    end_bar: u32,
}

impl TryFrom<RawAnnotation> for ClipAnnotation {
    type Error = Error;
    fn try_from(r: RawAnnotation) -> Result<Self> {
        ClipAnnotation::new(r.source_id, r.structure, r.start_bar, r.end_bar)
    }
}

impl ClipAnnotation {
    pub fn new(source_id: impl Into<String>, structure: Structure, start_bar: u32, end_bar: u32) -> Result<Self> {
        if start_bar == 0 || end_bar < start_bar {
            return Err(Error::Range(format!("bar range {start_bar}..={end_bar}")));
        }
        Ok(ClipAnnotation {
            source_id: source_id.into(),
            structure,
            start_bar,
            end_bar,
        })
    }

    pub fn bar_count(&self) -> u32 {
        self.end_bar - self.start_bar + 1
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Major,
    Minor,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Major => "major",
            Mode::Minor => "minor",
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct KeyResult {
    pub tonic: PitchClass,
    pub mode: Mode,
    /// Winning diatonic-set sum.
    pub score: u32,
}

impl KeyResult {
    pub fn name(&self) -> String {
        format!("{} {}", self.tonic, self.mode)
    }
}

impl fmt::Display for KeyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.tonic, self.mode)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChordQuality {
    Maj,
    Min,
    Maj7,
    Min7,
    Dom7,
    Aug,
    Dim,
}

impl ChordQuality {
    pub const ALL: [ChordQuality; 7] = [
        ChordQuality::Maj,
        ChordQuality::Min,
        ChordQuality::Maj7,
        ChordQuality::Min7,
        ChordQuality::Dom7,
        ChordQuality::Aug,
        ChordQuality::Dim,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            ChordQuality::Maj => "",
            ChordQuality::Min => "m",
            ChordQuality::Maj7 => "maj7",
            ChordQuality::Min7 => "m7",
            ChordQuality::Dom7 => "7",
            ChordQuality::Aug => "aug",
            ChordQuality::Dim => "dim",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChordRoot {
    Ambiguous,
    #[serde(untagged)]
    Pitch(PitchClass),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct ChordResult {
    pub quality: ChordQuality,
    pub root: ChordRoot,
    pub matched_pattern: Vec<u8>,
}

impl ChordResult {
    pub fn name(&self) -> String {
        match self.root {
            ChordRoot::Pitch(pc) => format!("{}{}", pc, self.quality.symbol()),
            ChordRoot::Ambiguous => self.quality.symbol().to_string(),
        }
    }
}
