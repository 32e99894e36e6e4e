mod common;

use common::{b, fixture, measure, note, random_normalized_score};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use tabproc::codec::{decode_clip, encode_clip, EncodedClip, TokenMode};
use tabproc::ingest::{read_tab, ParseOptions};
use tabproc::model::{Cluster, Score, TimeSignature, Tuning};
use tabproc::Error;

fn read(name: &str) -> Score {
    read_tab(&fixture(name), &ParseOptions::default()).unwrap().0
}

/// Pitch tokens parsed back to MIDI, so ordering can be checked without the decoder.
fn token_midi(token: &str) -> i32 {
    let mut chars = token.chars();
    let (a, b) = (chars.next().unwrap(), chars.next().unwrap());
    let (letter, digit) = if a.is_ascii_digit() { (b, a) } else { (a, b) };
    let octave = digit.to_digit(10).unwrap() as i32;
    let alter = match chars.next() {
        Some('#') => 1,
        Some('b') => -1,
        _ => 0,
    };
    let base = match letter {
        'C' => 0,
        'D' => 2,
        'E' => 4,
        'F' => 5,
        'G' => 7,
        'A' => 9,
        'B' => 11,
        _ => panic!("{token}"),
    };
    (octave + 1) * 12 + base + alter
}

fn check_laws(clip: &EncodedClip) {
    assert_eq!(clip.pitch.len(), clip.time.len());
    assert_eq!(clip.pitch.len(), clip.finger.len());
    for (p, f) in clip.pitch.iter().zip(&clip.finger) {
        let ps: Vec<&str> = p.split(' ').collect();
        let fs: Vec<&str> = f.split(' ').collect();
        assert_eq!(ps.len(), fs.len(), "{p} / {f}");
        if ps == ["R"] {
            assert_eq!(fs, ["(R,R)"]);
            continue;
        }
        let midi: Vec<i32> = ps.iter().map(|t| token_midi(t)).collect();
        assert!(midi.windows(2).all(|w| w[0] >= w[1]), "{p}");
    }
}

#[test]
fn single_note_tokens() {
    let clip = encode_clip(&read("single-c4-quarter.musicxml"), TokenMode::PitchOctave).unwrap();
    assert_eq!(clip.pitch, ["C4", "R", "R"]);
    assert_eq!(clip.time, [1.0, 1.0, 2.0]);
    assert_eq!(clip.finger, ["(2,1)", "(R,R)", "(R,R)"]);
    assert_eq!(clip.to_text(), "C4\tR\tR\n1\t1\t2\n(2,1)\t(R,R)\t(R,R)\n");
}

#[test]
fn octave_first_mode() {
    let clip = encode_clip(&read("single-c4-quarter.musicxml"), TokenMode::OctavePitch).unwrap();
    assert_eq!(clip.pitch[0], "4C");
}

#[test]
fn chord_tokens_run_high_to_low() {
    let clip = encode_clip(&read("cmajor.musicxml"), TokenMode::PitchOctave).unwrap();
    let i = clip.pitch.iter().position(|p| p.contains(' ')).unwrap();
    assert_eq!(clip.pitch[i], "E4 C4 G3 E3 C3");
    assert_eq!(clip.finger[i], "(1,0) (2,1) (3,0) (4,2) (5,3)");
    check_laws(&clip);
}

#[test]
fn sustained_note_is_split_into_continuations() {
    let t = Tuning::STANDARD;
    // A half note on string 6 under two quarter notes on string 1.
    let clusters = vec![
        Cluster::new(
            b(0, 1),
            vec![note(b(0, 1), b(1, 1), 1, 0, &t, 0), note(b(0, 1), b(2, 1), 6, 0, &t, 0)],
        ),
        Cluster::new(b(1, 1), vec![note(b(1, 1), b(1, 1), 1, 3, &t, 0)]),
        Cluster::new(b(2, 1), vec![note(b(2, 1), b(2, 1), 2, 0, &t, 0)]),
    ];
    let score = Score {
        measures: vec![measure(1, TimeSignature::COMMON, clusters)],
        ..Score::default()
    };
    let clip = encode_clip(&score, TokenMode::PitchOctave).unwrap();
    assert_eq!(clip.pitch, ["E4 E2", "G4 E2", "B3"]);
    assert_eq!(clip.time, [1.0, 1.0, 2.0]);
}

#[test]
fn triplet_stamps_survive() {
    let score = read("corpus/waltz-drop-d.musicxml");
    let clip = encode_clip(&score, TokenMode::PitchOctave).unwrap();
    let json = clip.to_json().unwrap();
    let back = EncodedClip::from_json(&json).unwrap();
    let decoded = decode_clip(&back).unwrap();
    assert_eq!(
        encode_clip(&decoded.score, TokenMode::PitchOctave)
            .unwrap()
            .to_json()
            .unwrap(),
        json
    );
    assert!(decoded.score.measures[0].clusters.iter().any(|c| c.onset == b(7, 3)));
}

#[test]
fn decode_rejects_mismatched_lengths() {
    let mut clip = encode_clip(&read("single-c4-quarter.musicxml"), TokenMode::PitchOctave).unwrap();
    clip.time.pop();
    assert!(matches!(decode_clip(&clip), Err(Error::Decode(_))));
}

#[test]
fn decode_rejects_wrong_order() {
    let mut clip = encode_clip(&read("cmajor.musicxml"), TokenMode::PitchOctave).unwrap();
    let i = clip.pitch.iter().position(|p| p.contains(' ')).unwrap();
    let mut p: Vec<&str> = clip.pitch[i].split(' ').collect();
    let mut f: Vec<&str> = clip.finger[i].split(' ').collect();
    p.reverse();
    f.reverse();
    clip.pitch[i] = p.join(" ");
    clip.finger[i] = f.join(" ");
    assert!(matches!(decode_clip(&clip), Err(Error::Decode(_))));
}

#[test]
fn decode_rejects_overfull_bar() {
    let mut clip = encode_clip(&read("single-c4-quarter.musicxml"), TokenMode::PitchOctave).unwrap();
    clip.time[0] = 2.0;
    assert!(matches!(decode_clip(&clip), Err(Error::Decode(_))));
}

#[test]
fn empty_score_cannot_be_encoded() {
    assert!(matches!(
        encode_clip(&Score::default(), TokenMode::PitchOctave),
        Err(Error::EmptyScore)
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn round_trip_is_a_fixed_point(seed in any::<u64>(), octave_first in any::<bool>()) {
        let mode = if octave_first { TokenMode::OctavePitch } else { TokenMode::PitchOctave };
        let score = random_normalized_score(&mut StdRng::seed_from_u64(seed));
        let first = encode_clip(&score, mode).unwrap();
        check_laws(&first);
        let decoded = decode_clip(&EncodedClip::from_json(&first.to_json().unwrap()).unwrap()).unwrap();
        decoded.score.validate_normalized().unwrap();
        let second = encode_clip(&decoded.score, mode).unwrap();
        prop_assert_eq!(first.to_json().unwrap(), second.to_json().unwrap());
    }

    #[test]
    fn stamps_fill_every_bar(seed in any::<u64>()) {
        let score = random_normalized_score(&mut StdRng::seed_from_u64(seed));
        let clip = encode_clip(&score, TokenMode::PitchOctave).unwrap();
        let total: f64 = clip.time.iter().map(|&t| f64::from(t)).sum();
        let expected: f64 = score.measures.iter().map(|m| m.time_signature.length().unwrap().to_f64()).sum();
        prop_assert!((total - expected).abs() < 1e-4);
    }
}
