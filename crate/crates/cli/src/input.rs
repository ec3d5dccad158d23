use std::io::Read;

use conflictfree::io::{matrix_from_csv, PlayersInput, PreferenceInput};
use conflictfree::multiplayer::MultiPreferences;
use conflictfree::{Error, JointSelectionMatrix, ProblemInstance};
use serde_json::Value;

use crate::Failure;

pub fn read_source(path: &str) -> Result<String, Failure> {
    let mut text = String::new();
    let res = if path == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    res.map_err(|e| Failure::io(format!("{path}: {e}")))?;
    Ok(text)
}

/// A parsed input document. Preference JSON, matrix JSON, matrix CSV and
/// the output of `construct` are all accepted; whichever parts are present
/// are filled in.
#[derive(Default)]
pub struct Document {
    pub instance: Option<ProblemInstance>,
    pub matrix: Option<JointSelectionMatrix>,
}

pub fn parse_document(text: &str) -> Result<Document, Error> {
    let trimmed = text.trim_start();
    if !trimmed.starts_with('{') {
        return Ok(Document { instance: None, matrix: Some(matrix_from_csv(text)?) });
    }
    let value: Value = serde_json::from_str(text)?;
    let mut doc = Document::default();
    if value.get("a").is_some() || value.get("b").is_some() {
        let prefs: PreferenceInput = serde_json::from_value(value.clone())?;
        doc.instance = Some(prefs.into_instance()?);
    }
    if let Some(m) = value.get("matrix") {
        doc.matrix = Some(serde_json::from_value(m.clone())?);
    } else if value.get("entries").is_some() {
        doc.matrix = Some(serde_json::from_value(value)?);
    }
    if doc.instance.is_none() && doc.matrix.is_none() {
        return Err(Error::Parse("expected preferences (\"a\", \"b\") or a matrix".into()));
    }
    if let (Some(i), Some(m)) = (&doc.instance, &doc.matrix) {
        if i.n() != m.n() {
            return Err(Error::DimensionMismatch { expected: i.n(), got: m.n() });
        }
    }
    Ok(doc)
}

pub fn require_instance(doc: &Document) -> Result<&ProblemInstance, Error> {
    doc.instance.as_ref().ok_or_else(|| Error::Parse("input has no preferences (\"a\", \"b\")".into()))
}

pub fn parse_players(text: &str) -> Result<MultiPreferences, Error> {
    MultiPreferences::new(serde_json::from_str::<PlayersInput>(text)?.players)
}
