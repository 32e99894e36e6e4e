//! Mapping from MusicXML note sub-elements to model fields and technique tags.
//!
//! The default table lives in `data/technique-dictionary.json`; callers can
//! load a replacement with the same schema.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use roxmltree::Node;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TechniqueKind;

const DEFAULT_DICTIONARY: &str = include_str!("../../data/technique-dictionary.json");

/// What a matching rule sets on the note.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RuleTarget {
    TieStart,
    TieStop,
    Technique(TechniqueKind),
}

impl FromStr for RuleTarget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tieStart" => Ok(RuleTarget::TieStart),
            "tieStop" => Ok(RuleTarget::TieStop),
            other => other.parse().map(RuleTarget::Technique),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawRule {
    path: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    attr: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
    tag: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawDictionary {
    string: String,
    fret: String,
    rules: Vec<RawRule>,
}

#[derive(Clone, Debug)]
pub struct Rule {
    path: Vec<String>,
    attr: BTreeMap<String, String>,
    text: Option<String>,
    pub target: RuleTarget,
}

impl Rule {
    fn matches(&self, note: Node<'_, '_>) -> bool {
        find_all(note, &self.path).into_iter().any(|n| {
            self.attr
                .iter()
                .all(|(k, v)| n.attribute(k.as_str()) == Some(v.as_str()))
                && self.text.as_deref().is_none_or(|t| n.text().map(str::trim) == Some(t))
        })
    }
}

#[derive(Clone, Debug)]
pub struct TechniqueDictionary {
    string_path: Vec<String>,
    fret_path: Vec<String>,
    rules: Vec<Rule>,
}

impl Default for TechniqueDictionary {
    fn default() -> Self {
        TechniqueDictionary::from_json(DEFAULT_DICTIONARY).expect("bundled dictionary is valid")
    }
}

fn split_path(path: &str) -> Result<Vec<String>> {
    let segs: Vec<String> = path.split('/').map(str::to_string).collect();
    if segs.iter().any(String::is_empty) {
        return Err(Error::Dictionary(format!("bad element path '{path}'")));
    }
    Ok(segs)
}

/// All descendants of `node` reached by following `path` child by child.
fn find_all<'a, 'input>(node: Node<'a, 'input>, path: &[String]) -> Vec<Node<'a, 'input>> {
    let mut frontier = vec![node];
    for seg in path {
        frontier = frontier
            .into_iter()
            .flat_map(|n| n.children().filter(|c| c.has_tag_name(seg.as_str())))
            .collect();
    }
    frontier
}

impl TechniqueDictionary {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawDictionary = serde_json::from_str(text).map_err(|e| Error::Dictionary(e.to_string()))?;
        let rules = raw
            .rules
            .into_iter()
            .map(|r| {
                Ok(Rule {
                    path: split_path(&r.path)?,
                    attr: r.attr,
                    text: r.text,
                    target: r.tag.parse()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TechniqueDictionary {
            string_path: split_path(&raw.string)?,
            fret_path: split_path(&raw.fret)?,
            rules,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        TechniqueDictionary::from_json(&text)
    }

    /// The bundled default table as JSON text.
    pub fn default_json() -> &'static str {
        DEFAULT_DICTIONARY
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Technique kinds this dictionary can produce.
    pub fn technique_kinds(&self) -> Vec<TechniqueKind> {
        let mut kinds: Vec<TechniqueKind> = self
            .rules
            .iter()
            .filter_map(|r| match r.target {
                RuleTarget::Technique(k) => Some(k),
                _ => None,
            })
            .collect();
        kinds.sort();
        kinds.dedup();
        kinds
    }

    pub(crate) fn string_of(&self, note: Node<'_, '_>) -> Option<Result<u8, String>> {
        number_at(note, &self.string_path)
    }

    pub(crate) fn fret_of(&self, note: Node<'_, '_>) -> Option<Result<u8, String>> {
        number_at(note, &self.fret_path)
    }

    pub(crate) fn targets(&self, note: Node<'_, '_>) -> Vec<RuleTarget> {
        self.rules
            .iter()
            .filter(|r| r.matches(note))
            .map(|r| r.target)
            .collect()
    }
}

fn number_at(note: Node<'_, '_>, path: &[String]) -> Option<Result<u8, String>> {
    let node = find_all(note, path).into_iter().next()?;
    let text = node.text().unwrap_or("").trim();
    Some(
        text.parse()
            .map_err(|_| format!("<{}> is not a number: '{text}'", path.join("/"))),
    )
}
