use serde::{Deserialize, Serialize};

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Warning {
    /// 1-based bar number; 0 for document-level messages.
    pub bar: u32,
    pub message: String,
}

/// Everything ingest had to correct, guess or drop.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct ParseReport {
    pub warnings: Vec<Warning>,
    pub dropped_nodes: usize,
}

impl ParseReport {
    pub fn warn(&mut self, bar: u32, message: impl Into<String>) {
        let message = message.into();
        log::debug!("bar {bar}: {message}");
        self.warnings.push(Warning { bar, message });
    }

    /// Record a discarded element together with its warning.
    pub fn drop_node(&mut self, bar: u32, message: impl Into<String>) {
        self.dropped_nodes += 1;
        self.warn(bar, message);
    }

    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty() && self.dropped_nodes == 0
    }

    pub fn extend(&mut self, other: ParseReport) {
        self.warnings.extend(other.warnings);
        self.dropped_nodes += other.dropped_nodes;
    }
}
