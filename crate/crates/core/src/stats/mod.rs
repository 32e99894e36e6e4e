//! Corpus-level statistics: chord positions in the bar, keys, pitches,
//! intervals, durations and fingerboard usage.

mod counts;
mod tables;

pub use counts::{
    aggregate, aggregate_sequential, degree_of, function_of, grid_slot, probability, CorpusCounts, DEGREE_LABELS,
    FUNCTION_LABELS, GRID_SLOTS, OTHER_DEGREE,
};
pub use tables::{
    chord_grid, duration_histogram, fingerboard_map, interval_histogram, key_histogram, pitch_histogram, pitch_name,
    CorpusStats, FingerboardMap, GridHistogram, HarmonicPoint, Share, SlideArc, SlideDirection,
};
