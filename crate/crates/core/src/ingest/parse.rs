use std::collections::{BTreeMap, BTreeSet};

use roxmltree::{Document, Node, ParsingOptions};

use super::dictionary::{RuleTarget, TechniqueDictionary};
use super::mxl;
use super::report::ParseReport;
use crate::analysis::fretboard::{midi_to_positions, position_to_midi};
use crate::error::{Error, Result};
use crate::model::{
    Beats, Cluster, Measure, NoteContent, NoteEvent, PitchSpec, Position, Score, Step, TechniqueKind, TechniqueTag,
    TimeSignature, Tuning, MAX_CAPO, MAX_FRET, STANDARD_OPEN_MIDI,
};

#[derive(Clone, Debug, Default)]
pub struct ParseOptions {
    pub dictionary: TechniqueDictionary,
    /// Merge every guitar part into one score instead of taking the first.
    pub merge_tracks: bool,
}

/// Measure-level elements that carry nothing the model needs.
const IGNORED_MEASURE_CHILDREN: &[&str] = &[
    "direction",
    "barline",
    "print",
    "sound",
    "harmony",
    "figured-bass",
    "bookmark",
    "link",
    "grouping",
    "listening",
];

/// Parse a partwise MusicXML document (plain or `.mxl`) into a score.
/// Voices are left unmerged and ties untouched.
pub fn parse_score(document: &[u8], options: &ParseOptions) -> Result<(Score, ParseReport)> {
    let text = if mxl::is_mxl(document) {
        mxl::extract_root_document(document)?
    } else {
        String::from_utf8(document.to_vec()).map_err(|e| Error::Xml {
            line: 1,
            message: format!("document is not UTF-8: {e}"),
        })?
    };
    parse_str(&text, options)
}

pub fn parse_str(text: &str, options: &ParseOptions) -> Result<(Score, ParseReport)> {
    let doc = Document::parse_with_options(
        text,
        ParsingOptions {
            allow_dtd: true,
            ..ParsingOptions::default()
        },
    )
    .map_err(|e| Error::Xml {
        line: e.pos().row,
        message: e.to_string(),
    })?;
    let root = doc.root_element();
    match root.tag_name().name() {
        "score-partwise" => {}
        "score-timewise" => return Err(Error::Structure("score-timewise documents are not supported".into())),
        other => return Err(Error::Structure(format!("unexpected root element <{other}>"))),
    }

    let mut report = ParseReport::default();
    let parts: Vec<Node> = root.children().filter(|n| n.has_tag_name("part")).collect();
    if parts.is_empty() {
        return Err(Error::Structure("document has no <part>".into()));
    }

    let mut parsed = Vec::new();
    for part in &parts {
        let id = part.attribute("id").unwrap_or("?").to_string();
        let data = parse_part(*part, options, &mut report)?;
        parsed.push((id, data));
    }

    let guitar: Vec<usize> = (0..parsed.len()).filter(|&i| parsed[i].1.is_guitar()).collect();
    let chosen: Vec<usize> = match (guitar.first(), options.merge_tracks) {
        (None, _) => {
            let first = (0..parsed.len())
                .find(|&i| !parsed[i].1.percussion)
                .ok_or_else(|| Error::Structure("no pitched part found".into()))?;
            report.warn(0, format!("no guitar part found; using part '{}'", parsed[first].0));
            vec![first]
        }
        (Some(&first), false) => {
            if guitar.len() > 1 {
                report.warn(
                    0,
                    format!("{} guitar parts; using '{}' only", guitar.len(), parsed[first].0),
                );
            }
            vec![first]
        }
        (Some(_), true) => guitar,
    };

    let mut chosen_parts: Vec<PartData> = Vec::with_capacity(chosen.len());
    for (i, (_, data)) in parsed.into_iter().enumerate() {
        if chosen.contains(&i) {
            chosen_parts.push(data);
        }
    }
    let score = assemble(title(root), artist(root), chosen_parts, &mut report)?;
    Ok((score, report))
}

fn title(root: Node) -> String {
    root.descendants()
        .find(|n| n.has_tag_name("work-title"))
        .or_else(|| root.children().find(|n| n.has_tag_name("movement-title")))
        .and_then(|n| n.text())
        .map(|t| t.trim().to_string())
        .unwrap_or_default()
}

fn artist(root: Node) -> String {
    let creators: Vec<Node> = root
        .children()
        .filter(|n| n.has_tag_name("identification"))
        .flat_map(|n| n.children().filter(|c| c.has_tag_name("creator")))
        .collect();
    ["artist", "composer"]
        .iter()
        .find_map(|t| creators.iter().find(|c| c.attribute("type") == Some(t)))
        .or_else(|| creators.first())
        .and_then(|n| n.text())
        .map(|t| t.trim().to_string())
        .unwrap_or_default()
}

#[derive(Debug, Default)]
struct PartData {
    measures: Vec<RawMeasure>,
    tuning: Option<Tuning>,
    capo: u8,
    tab_staff: Option<u32>,
    staff_lines: Option<u32>,
    percussion: bool,
    has_frets: bool,
}

impl PartData {
    fn is_guitar(&self) -> bool {
        !self.percussion
            && (self.tab_staff.is_some() || self.has_frets || (self.tuning.is_some() && self.staff_lines == Some(6)))
    }
}

#[derive(Debug)]
struct RawMeasure {
    divisions: u32,
    time_signature: TimeSignature,
    implicit: bool,
    notes: Vec<RawNote>,
}

#[derive(Debug, Clone)]
struct RawNote {
    onset: Beats,
    duration: Beats,
    content: NoteContent,
    string: Option<u8>,
    fret: Option<u8>,
    voice: u8,
    staff: u32,
    tie_start: bool,
    tie_stop: bool,
    techniques: BTreeSet<TechniqueTag>,
}

fn child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    node.children().find(|c| c.has_tag_name(name))
}

fn child_text<'a>(node: Node<'a, '_>, name: &str) -> Option<&'a str> {
    child(node, name).and_then(|c| c.text()).map(str::trim)
}

fn line_of(doc_node: Node) -> u32 {
    doc_node.document().text_pos_at(doc_node.range().start).row
}

fn parse_num<T: std::str::FromStr>(node: Node, name: &str) -> Result<Option<T>> {
    match child_text(node, name) {
        None => Ok(None),
        Some(t) => t.parse().map(Some).map_err(|_| Error::Xml {
            line: line_of(node),
            message: format!("<{name}> is not a number: '{t}'"),
        }),
    }
}

fn parse_part(part: Node, options: &ParseOptions, report: &mut ParseReport) -> Result<PartData> {
    let mut data = PartData::default();
    let mut divisions: Option<u32> = None;
    let mut time_signature: Option<TimeSignature> = None;
    let mut warned_default_time = false;

    for (mi, measure) in part.children().filter(|n| n.has_tag_name("measure")).enumerate() {
        let bar = mi as u32 + 1;
        let mut cursor = Beats::ZERO;
        let mut last_onset = Beats::ZERO;
        let mut notes = Vec::new();

        for el in measure.children().filter(Node::is_element) {
            match el.tag_name().name() {
                "attributes" => {
                    read_attributes(el, bar, &mut data, &mut divisions, &mut time_signature, report)?;
                }
                "note" => {
                    let div =
                        divisions.ok_or_else(|| Error::Structure(format!("bar {bar}: note before any <divisions>")))?;
                    if let Some(note) = read_note(el, bar, div, &mut cursor, &mut last_onset, options, report)? {
                        data.has_frets |= note.fret.is_some();
                        notes.push(note);
                    }
                    if child(el, "unpitched").is_some() {
                        data.percussion = true;
                    }
                }
                "backup" | "forward" => {
                    let div = divisions.ok_or_else(|| {
                        Error::Structure(format!("bar {bar}: <{}> before <divisions>", el.tag_name().name()))
                    })?;
                    let d: i64 = parse_num(el, "duration")?.ok_or_else(|| {
                        Error::Structure(format!("bar {bar}: <{}> without duration", el.tag_name().name()))
                    })?;
                    let step = Beats::from_divisions(d, div);
                    if el.has_tag_name("backup") {
                        cursor = cursor - step;
                        if cursor < Beats::ZERO {
                            report.warn(bar, "backup past the start of the measure");
                            cursor = Beats::ZERO;
                        }
                    } else {
                        cursor += step;
                    }
                }
                name if IGNORED_MEASURE_CHILDREN.contains(&name) => {}
                name => {
                    report.drop_node(bar, format!("unrecognized element <{name}>"));
                }
            }
        }

        let divisions = divisions.ok_or_else(|| Error::Structure(format!("bar {bar}: missing <divisions>")))?;
        let ts = match time_signature {
            Some(ts) => ts,
            None => {
                if !warned_default_time {
                    report.warn(bar, "no time signature; assuming 4/4");
                    warned_default_time = true;
                }
                TimeSignature::COMMON
            }
        };
        data.measures.push(RawMeasure {
            divisions,
            time_signature: ts,
            implicit: measure.attribute("implicit") == Some("yes"),
            notes,
        });
    }
    Ok(data)
}

fn read_attributes(
    el: Node,
    bar: u32,
    data: &mut PartData,
    divisions: &mut Option<u32>,
    time_signature: &mut Option<TimeSignature>,
    report: &mut ParseReport,
) -> Result<()> {
    if let Some(d) = parse_num::<u32>(el, "divisions")? {
        if d == 0 {
            return Err(Error::Structure(format!("bar {bar}: zero divisions")));
        }
        *divisions = Some(d);
    }
    if let Some(time) = child(el, "time") {
        if child(time, "senza-misura").is_some() {
            report.warn(bar, "senza-misura ignored");
        } else {
            let beats = child_text(time, "beats").unwrap_or("4");
            // Composite meters such as 3+2 are summed.
            let numerator: u32 = beats
                .split('+')
                .map(|b| b.trim().parse::<u32>())
                .sum::<std::result::Result<u32, _>>()
                .map_err(|_| Error::Xml {
                    line: line_of(time),
                    message: format!("bad <beats> '{beats}'"),
                })?;
            let denominator: u32 = parse_num(time, "beat-type")?.unwrap_or(4);
            *time_signature = Some(TimeSignature::new(numerator, denominator)?);
        }
    }
    for clef in el.children().filter(|c| c.has_tag_name("clef")) {
        let staff = clef.attribute("number").and_then(|n| n.parse().ok()).unwrap_or(1);
        match child_text(clef, "sign") {
            Some("TAB") => data.tab_staff = Some(staff),
            Some("percussion") => data.percussion = true,
            _ => {}
        }
    }
    for details in el.children().filter(|c| c.has_tag_name("staff-details")) {
        let lines: u32 = parse_num(details, "staff-lines")?.unwrap_or(6);
        let tunings: Vec<Node> = details.children().filter(|c| c.has_tag_name("staff-tuning")).collect();
        if !tunings.is_empty() {
            data.staff_lines = Some(lines);
            if lines == 6 {
                let tuning = read_tuning(&tunings, bar)?;
                if data.tuning.is_some_and(|t| t != tuning) {
                    report.warn(bar, "tuning change ignored; the first tuning applies");
                } else {
                    data.tuning = Some(tuning);
                }
            }
        }
        if let Some(capo) = parse_num::<u8>(details, "capo")? {
            if capo > MAX_CAPO {
                return Err(Error::Range(format!("bar {bar}: capo {capo} above {MAX_CAPO}")));
            }
            data.capo = capo;
        }
    }
    Ok(())
}

/// `staff-tuning` lines count from the bottom, so line 1 is string 6.
fn read_tuning(tunings: &[Node], bar: u32) -> Result<Tuning> {
    let mut offsets = [0i8; 6];
    for t in tunings {
        let line: u8 = t
            .attribute("line")
            .and_then(|l| l.parse().ok())
            .filter(|l| (1..=6).contains(l))
            .ok_or_else(|| Error::Structure(format!("bar {bar}: staff-tuning without a valid line")))?;
        let string = 7 - line;
        let step = child_text(*t, "tuning-step")
            .and_then(|s| s.chars().next())
            .and_then(Step::from_letter)
            .ok_or_else(|| Error::Structure(format!("bar {bar}: bad tuning-step")))?;
        let alter: f64 = parse_num(*t, "tuning-alter")?.unwrap_or(0.0);
        let octave: i8 = parse_num(*t, "tuning-octave")?
            .ok_or_else(|| Error::Structure(format!("bar {bar}: tuning without octave")))?;
        let pitch = PitchSpec::new(step, alter.round() as i8, octave)?;
        let offset = i32::from(pitch.midi()) - i32::from(STANDARD_OPEN_MIDI[usize::from(string) - 1]);
        offsets[usize::from(string) - 1] = offset
            .try_into()
            .map_err(|_| Error::Range(format!("bar {bar}: tuning offset {offset}")))?;
    }
    Tuning::new(offsets)
}

#[allow(clippy::too_many_arguments)]
fn read_note(
    el: Node,
    bar: u32,
    divisions: u32,
    cursor: &mut Beats,
    last_onset: &mut Beats,
    options: &ParseOptions,
    report: &mut ParseReport,
) -> Result<Option<RawNote>> {
    let is_chord = child(el, "chord").is_some();
    if child(el, "grace").is_some() {
        report.drop_node(bar, "grace note dropped (zero duration)");
        return Ok(None);
    }
    let duration: i64 = match parse_num(el, "duration")? {
        Some(d) if d > 0 => d,
        _ => {
            report.drop_node(bar, format!("note without positive duration (line {})", line_of(el)));
            return Ok(None);
        }
    };
    let onset = if is_chord { *last_onset } else { *cursor };
    let duration = Beats::from_divisions(duration, divisions);
    if !is_chord {
        *last_onset = onset;
        *cursor += duration;
    }

    let content = if child(el, "rest").is_some() {
        NoteContent::Rest
    } else if let Some(pitch) = child(el, "pitch") {
        let step = child_text(pitch, "step")
            .and_then(|s| s.chars().next())
            .and_then(Step::from_letter)
            .ok_or_else(|| Error::Xml {
                line: line_of(pitch),
                message: "bad <step>".into(),
            })?;
        let alter: f64 = parse_num(pitch, "alter")?.unwrap_or(0.0);
        if alter.fract() != 0.0 {
            report.drop_node(bar, format!("microtonal alter {alter} dropped"));
            return Ok(None);
        }
        let octave: i8 = parse_num(pitch, "octave")?.ok_or_else(|| Error::Xml {
            line: line_of(pitch),
            message: "missing <octave>".into(),
        })?;
        match PitchSpec::new(step, alter as i8, octave) {
            Ok(p) => NoteContent::Pitch(p),
            Err(e) => {
                report.drop_node(bar, format!("pitch dropped: {e}"));
                return Ok(None);
            }
        }
    } else if child(el, "unpitched").is_some() {
        report.drop_node(bar, "unpitched note dropped");
        return Ok(None);
    } else {
        report.drop_node(bar, format!("note without pitch or rest (line {})", line_of(el)));
        return Ok(None);
    };

    let voice = child_text(el, "voice")
        .and_then(|v| v.parse().ok())
        .unwrap_or(1u8)
        .max(1);
    let staff = child_text(el, "staff").and_then(|v| v.parse().ok()).unwrap_or(1u32);
    let mut note = RawNote {
        onset,
        duration,
        content,
        string: None,
        fret: None,
        voice,
        staff,
        tie_start: false,
        tie_stop: false,
        techniques: BTreeSet::new(),
    };
    if matches!(note.content, NoteContent::Pitch(_)) {
        let dict = &options.dictionary;
        for (slot, found) in [
            (&mut note.string, dict.string_of(el)),
            (&mut note.fret, dict.fret_of(el)),
        ] {
            match found {
                Some(Ok(v)) => *slot = Some(v),
                Some(Err(msg)) => report.warn(bar, msg),
                None => {}
            }
        }
    }
    for target in options.dictionary.targets(el) {
        match target {
            RuleTarget::TieStart if !note.content_is_rest() => note.tie_start = true,
            RuleTarget::TieStop if !note.content_is_rest() => note.tie_stop = true,
            RuleTarget::TieStart | RuleTarget::TieStop => {}
            RuleTarget::Technique(kind) => {
                note.techniques.insert(TechniqueTag::new(kind));
            }
        }
    }
    Ok(Some(note))
}

impl RawNote {
    fn content_is_rest(&self) -> bool {
        matches!(self.content, NoteContent::Rest)
    }
}

/// Combine the chosen parts into one score: resolve fretboard positions,
/// drop notation-staff duplicates of TAB-staff notes, pair slides and build
/// per-voice clusters.
fn assemble(title: String, artist: String, parts: Vec<PartData>, report: &mut ParseReport) -> Result<Score> {
    let first = parts
        .first()
        .ok_or_else(|| Error::Structure("no part selected".into()))?;
    let tuning = first.tuning.unwrap_or(Tuning::STANDARD);
    let capo = first.capo;
    let bar_count = parts.iter().map(|p| p.measures.len()).min().unwrap_or(0);
    if parts.iter().any(|p| p.measures.len() != bar_count) {
        report.warn(0, format!("parts differ in length; keeping the first {bar_count} bars"));
    }
    if bar_count == 0 {
        return Err(Error::Structure("part has no measures".into()));
    }

    let mut measures: Vec<Vec<NoteEvent>> = vec![Vec::new(); bar_count];
    for (pi, part) in parts.iter().enumerate() {
        let part_tuning = part.tuning.unwrap_or(Tuning::STANDARD);
        let voice_offset = (pi * 16) as u8;
        for (mi, m) in part.measures.iter().take(bar_count).enumerate() {
            let bar = mi as u32 + 1;
            let notes = dedupe_staves(&m.notes, part.tab_staff);
            let mut unfingered = 0usize;
            for raw in notes {
                let position = match raw.content {
                    NoteContent::Rest => None,
                    NoteContent::Pitch(p) => {
                        let midi = i32::from(p.midi());
                        let stated = match (raw.string, raw.fret) {
                            (Some(s), Some(f)) if (1..=6).contains(&s) && f <= MAX_FRET => Some((s, f)),
                            (None, None) => None,
                            (s, f) => {
                                report.warn(bar, format!("invalid string/fret {s:?}/{f:?} for {p}"));
                                None
                            }
                        };
                        if stated.is_none() {
                            unfingered += 1;
                        }
                        // Fingering written against this part's own tuning and capo.
                        let checked = stated.and_then(|(s, f)| {
                            let sounding = position_to_midi(s, f, &part_tuning, part.capo).ok()?;
                            if sounding == midi {
                                Some(s)
                            } else {
                                report.warn(
                                    bar,
                                    format!("{p} written at ({s},{f}) sounds MIDI {sounding}; fret recomputed"),
                                );
                                Some(s)
                            }
                        });
                        match fit_position(midi, checked, &tuning, capo) {
                            Some(pos) => Some(pos),
                            None => {
                                report.drop_node(bar, format!("{p} is not playable in this tuning"));
                                continue;
                            }
                        }
                    }
                };
                measures[mi].push(NoteEvent {
                    onset: raw.onset,
                    duration: raw.duration,
                    content: raw.content,
                    position,
                    voice: raw.voice.saturating_add(voice_offset),
                    tie_start: raw.tie_start,
                    tie_stop: raw.tie_stop,
                    techniques: raw.techniques,
                });
            }
            if unfingered > 0 {
                report.warn(
                    bar,
                    format!("{unfingered} notes had no string/fret; positions assigned"),
                );
            }
        }
    }

    pair_slides(&mut measures);

    let mut out = Vec::with_capacity(bar_count);
    for (mi, events) in measures.into_iter().enumerate() {
        let raw = &first.measures[mi];
        let bar = mi as u32 + 1;
        if !raw.implicit {
            check_voice_lengths(&events, raw.time_signature.length()?, bar, report);
        }
        out.push(Measure {
            index: bar,
            divisions: raw.divisions,
            time_signature: raw.time_signature,
            clusters: voice_clusters(events),
        });
    }

    let score = Score {
        title,
        artist,
        tuning,
        capo,
        measures: out,
    };
    score.validate()?;
    Ok(score)
}

/// Keep the requested string when the pitch fits on it, otherwise take the
/// lowest-fret position anywhere.
fn fit_position(midi: i32, string: Option<u8>, tuning: &Tuning, capo: u8) -> Option<Position> {
    let options = midi_to_positions(midi, tuning, capo, MAX_FRET).ok()?;
    string
        .and_then(|s| options.iter().find(|p| p.string() == s).copied())
        .or_else(|| options.iter().min_by_key(|p| p.fret()).copied())
}

/// GuitarPro writes each note twice: once on the notation staff and once on
/// the TAB staff. Keep the TAB copy and fold the other copy's flags into it.
fn dedupe_staves(notes: &[RawNote], tab_staff: Option<u32>) -> Vec<RawNote> {
    let staves: BTreeSet<u32> = notes.iter().map(|n| n.staff).collect();
    let Some(tab) = tab_staff.filter(|_| staves.len() > 1) else {
        return notes.to_vec();
    };
    let mut kept: Vec<RawNote> = notes.iter().filter(|n| n.staff == tab).cloned().collect();
    let tab_count = kept.len();
    for n in notes.iter().filter(|n| n.staff != tab) {
        let twin = kept[..tab_count]
            .iter_mut()
            .find(|k| k.onset == n.onset && k.content == n.content && k.duration == n.duration);
        match twin {
            Some(k) => {
                k.tie_start |= n.tie_start;
                k.tie_stop |= n.tie_stop;
                k.techniques.extend(n.techniques.iter().copied());
                if k.string.is_none() {
                    k.string = n.string;
                    k.fret = n.fret;
                }
            }
            None => kept.push(n.clone()),
        }
    }
    kept
}

/// Give each slide the fret at its other end: a `slideOut` points at the
/// next note on the same string, which receives the matching `slideIn`.
fn pair_slides(measures: &mut [Vec<NoteEvent>]) {
    let mut order: Vec<(usize, usize)> = Vec::new();
    for (mi, events) in measures.iter().enumerate() {
        let mut idx: Vec<usize> = (0..events.len()).filter(|&i| !events[i].is_rest()).collect();
        idx.sort_by_key(|&i| (events[i].onset, events[i].voice));
        order.extend(idx.into_iter().map(|i| (mi, i)));
    }
    for k in 0..order.len() {
        let (mi, i) = order[k];
        let ev = &measures[mi][i];
        let slides_out = ev
            .techniques
            .iter()
            .any(|t| t.kind() == TechniqueKind::SlideOut && t.detail().is_none());
        let (Some(string), Some(from)) = (ev.string(), ev.fret()) else {
            continue;
        };
        if !slides_out {
            continue;
        }
        let Some(&(mj, j)) = order[k + 1..]
            .iter()
            .find(|&&(mj, j)| measures[mj][j].string() == Some(string))
        else {
            continue;
        };
        let Some(to) = measures[mj][j].fret() else { continue };
        let ev = &mut measures[mi][i];
        ev.techniques.retain(|t| t.kind() != TechniqueKind::SlideOut);
        ev.techniques
            .insert(TechniqueTag::slide(TechniqueKind::SlideOut, to).expect("slide"));
        let target = &mut measures[mj][j];
        target.techniques.retain(|t| t.kind() != TechniqueKind::SlideIn);
        target
            .techniques
            .insert(TechniqueTag::slide(TechniqueKind::SlideIn, from).expect("slide"));
    }
}

/// Each voice should fill the measure exactly; mismatches are reported.
fn check_voice_lengths(events: &[NoteEvent], length: Beats, bar: u32, report: &mut ParseReport) {
    let mut per_voice: BTreeMap<u8, BTreeMap<Beats, Beats>> = BTreeMap::new();
    for e in events {
        let slot = per_voice
            .entry(e.voice)
            .or_default()
            .entry(e.onset)
            .or_insert(e.duration);
        *slot = (*slot).min(e.duration);
    }
    for (voice, onsets) in per_voice {
        let total: Beats = onsets.values().copied().sum();
        if total != length {
            report.warn(
                bar,
                format!("voice {voice} lasts {total} beats, measure holds {length}"),
            );
        }
    }
}

/// Pre-merge clusters: one per (onset, voice), ordered by onset then voice.
fn voice_clusters(events: Vec<NoteEvent>) -> Vec<Cluster> {
    let mut groups: BTreeMap<(Beats, u8), Vec<NoteEvent>> = BTreeMap::new();
    for e in events {
        groups.entry((e.onset, e.voice)).or_default().push(e);
    }
    groups
        .into_iter()
        .map(|((onset, _), events)| Cluster::new(onset, events))
        .collect()
}
