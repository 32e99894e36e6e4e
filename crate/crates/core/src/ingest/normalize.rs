//! Score-to-score normalizations: voice merging, tie cleaning, capo
//! removal and clip slicing.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::report::ParseReport;
use crate::error::{Error, Result};
use crate::model::{Beats, ClipAnnotation, Cluster, NoteContent, NoteEvent, Score};

/// Join all voices of each measure into one cluster sequence.
///
/// Events sharing an onset form one cluster. When two pitched events claim
/// the same string at the same onset, the one from the higher voice number
/// stays and the other is reported as dropped. Rests are kept only where
/// nothing is attacked; of several coinciding rests the shortest survives.
pub fn merge_voices(score: &Score, report: &mut ParseReport) -> Score {
    let mut out = score.clone();
    for m in &mut out.measures {
        let mut by_onset: BTreeMap<Beats, Vec<NoteEvent>> = BTreeMap::new();
        for c in m.clusters.drain(..) {
            by_onset.entry(c.onset).or_default().extend(c.events);
        }
        for (onset, events) in by_onset {
            let (mut pitched, rests): (Vec<NoteEvent>, Vec<NoteEvent>) = events.into_iter().partition(|e| !e.is_rest());
            let kept = if pitched.is_empty() {
                rests
                    .into_iter()
                    .min_by(|a, b| a.duration.cmp(&b.duration).then(a.voice.cmp(&b.voice)))
                    .into_iter()
                    .collect()
            } else {
                // Higher voice first, then higher pitch, so the first claim on a string wins.
                pitched.sort_by(|a, b| b.voice.cmp(&a.voice).then(b.midi().cmp(&a.midi())));
                let mut used = [false; 7];
                let mut kept = Vec::with_capacity(pitched.len());
                for e in pitched {
                    let s = usize::from(e.string().unwrap_or(0));
                    if std::mem::replace(&mut used[s], true) {
                        report.drop_node(
                            m.index,
                            format!(
                                "voice {} note {} at {onset} collides on string {s}; dropped",
                                e.voice,
                                e.pitch().map(|p| p.to_string()).unwrap_or_default()
                            ),
                        );
                    } else {
                        kept.push(e);
                    }
                }
                kept
            };
            m.clusters.push(Cluster::new(onset, kept));
        }
    }
    out
}

struct OpenChain {
    head: (usize, usize, usize),
    end: Beats,
    extended: bool,
}

/// Collapse tie chains into single notes whose duration is the chain's
/// total. Chains may cross barlines; the merged note stays at the first
/// note's onset and keeps its position and techniques. A re-attack of the
/// same pitch on the same string closes any open chain.
pub fn clean_ties(score: &Score, report: &mut ParseReport) -> Result<Score> {
    let mut out = score.clone();
    let starts = score.measure_starts()?;
    let mut open: HashMap<(u8, u8), OpenChain> = HashMap::new();
    let mut removed: HashSet<(usize, usize, usize)> = HashSet::new();

    for (mi, &start) in starts.iter().enumerate() {
        for ci in 0..out.measures[mi].clusters.len() {
            for ei in 0..out.measures[mi].clusters[ci].events.len() {
                let ev = &out.measures[mi].clusters[ci].events[ei];
                let (Some(midi), Some(string)) = (ev.midi(), ev.string()) else {
                    continue;
                };
                let bar = out.measures[mi].index;
                let key = (string, midi);
                let on = start + ev.onset;
                let (duration, tie_start, tie_stop) = (ev.duration, ev.tie_start, ev.tie_stop);

                let continues = tie_stop && open.get(&key).is_some_and(|c| c.end == on);
                if continues {
                    let chain = open.get_mut(&key).expect("checked");
                    let (hm, hc, he) = chain.head;
                    out.measures[hm].clusters[hc].events[he].duration += duration;
                    chain.end += duration;
                    chain.extended = true;
                    removed.insert((mi, ci, ei));
                    if !tie_start {
                        open.remove(&key);
                    }
                    continue;
                }
                if tie_stop {
                    report.warn(bar, format!("tie stop on MIDI {midi} without an open tie; cleared"));
                }
                if let Some(chain) = open.remove(&key) {
                    if !chain.extended {
                        let head_bar = out.measures[chain.head.0].index;
                        report.warn(
                            head_bar,
                            format!("tie on MIDI {midi} never closed; kept as a plain note"),
                        );
                    }
                }
                if tie_start {
                    open.insert(
                        key,
                        OpenChain {
                            head: (mi, ci, ei),
                            end: on + duration,
                            extended: false,
                        },
                    );
                }
            }
        }
    }
    let mut dangling: Vec<_> = open.into_iter().filter(|(_, c)| !c.extended).collect();
    dangling.sort_by_key(|(_, c)| c.head);
    for ((_, midi), chain) in dangling {
        let head_bar = out.measures[chain.head.0].index;
        report.warn(
            head_bar,
            format!("tie on MIDI {midi} never closed; kept as a plain note"),
        );
    }

    for (mi, m) in out.measures.iter_mut().enumerate() {
        let clusters = std::mem::take(&mut m.clusters);
        for (ci, mut c) in clusters.into_iter().enumerate() {
            let mut ei = 0;
            c.events.retain(|_| {
                let keep = !removed.contains(&(mi, ci, ei));
                ei += 1;
                keep
            });
            if c.events.is_empty() {
                continue;
            }
            for e in &mut c.events {
                e.tie_start = false;
                e.tie_stop = false;
            }
            m.clusters.push(c);
        }
    }
    Ok(out)
}

/// Set the capo to zero, lowering every pitch by the old capo while the
/// fingering stays where it was.
pub fn normalize_capo(score: &Score) -> Result<Score> {
    let capo = score.capo;
    let mut out = score.clone();
    out.capo = 0;
    if capo == 0 {
        return Ok(out);
    }
    for m in &mut out.measures {
        for c in &mut m.clusters {
            for e in &mut c.events {
                if let NoteContent::Pitch(p) = e.content {
                    let lowered = p
                        .transposed(-i32::from(capo))
                        .map_err(|err| Error::Range(format!("bar {}: capo removal on {p}: {err}", m.index)))?;
                    e.content = NoteContent::Pitch(lowered);
                }
            }
            // Lowering every member by the same amount keeps the order.
        }
    }
    Ok(out)
}

/// Cut out bars `start_bar..=end_bar`, renumber them from 1 and remove the
/// capo. Ties and sustained notes crossing the clip edges are cut there.
pub fn slice_clip(score: &Score, annotation: &ClipAnnotation, report: &mut ParseReport) -> Result<Score> {
    let (start, end) = (annotation.start_bar as usize, annotation.end_bar as usize);
    if start == 0 || end < start || end > score.measures.len() {
        return Err(Error::Range(format!(
            "bars {start}..={end} outside a {}-bar score",
            score.measures.len()
        )));
    }
    let mut clip = Score {
        title: score.title.clone(),
        artist: score.artist.clone(),
        tuning: score.tuning,
        capo: score.capo,
        measures: score.measures[start - 1..end].to_vec(),
    };
    for (i, m) in clip.measures.iter_mut().enumerate() {
        m.index = i as u32 + 1;
    }

    // Notes attacked before the clip that still sound inside it are not part of it.
    let starts = score.measure_starts()?;
    let clip_start = starts[start - 1];
    for (mi, m) in score.measures[..start - 1].iter().enumerate() {
        for e in m.events().filter(|e| !e.is_rest()) {
            if starts[mi] + e.end() > clip_start {
                report.warn(
                    1,
                    format!("note from source bar {} sustains into the clip; cut", m.index),
                );
            }
        }
    }

    let clip_starts = clip.measure_starts()?;
    let last = clip.measures.len() - 1;
    let clip_end = clip_starts[last] + clip.measures[last].time_signature.length()?;
    for (mi, m) in clip.measures.iter_mut().enumerate() {
        let bar = m.index;
        for c in &mut m.clusters {
            for e in &mut c.events {
                if mi == 0 && e.tie_stop {
                    e.tie_stop = false;
                    report.warn(bar, "tie from before the clip cut at the clip start");
                }
                if mi == last && e.tie_start {
                    e.tie_start = false;
                    report.warn(bar, "tie past the clip cut at the clip end");
                }
                let abs_end = clip_starts[mi] + e.end();
                if abs_end > clip_end {
                    e.duration = e.duration - (abs_end - clip_end);
                    report.warn(bar, "sustained note cut at the clip end");
                }
            }
        }
    }
    normalize_capo(&clip)
}
