//! Wire formats shared by the command-line tool and the browser demo.
//!
//! * preferences: `{"a": [...], "b": [...], "total": t}` (`total` optional,
//!   default 1)
//! * matrix: `{"n": N, "total": t, "entries": [row-major N*N]}`, or CSV with
//!   `N` rows of `N` comma-separated values (lines starting with `#` are
//!   skipped)
//! * players: `{"players": [[...], [...], ...]}`

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::JointSelectionMatrix;
use crate::multiplayer::MultiPreferences;
use crate::profile::{validate_instance, ProblemInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceInput {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(default = "one")]
    pub total: f64,
}

fn one() -> f64 {
    1.0
}

impl PreferenceInput {
    pub fn into_instance(self) -> Result<ProblemInstance> {
        validate_instance(&self.a, &self.b, self.total)
    }

    pub fn from_instance(inst: &ProblemInstance) -> Self {
        Self { a: inst.a().to_vec(), b: inst.b().to_vec(), total: inst.total() }
    }
}

pub fn parse_preferences(json: &str) -> Result<ProblemInstance> {
    serde_json::from_str::<PreferenceInput>(json)?.into_instance()
}

pub fn parse_matrix_json(json: &str) -> Result<JointSelectionMatrix> {
    Ok(serde_json::from_str(json)?)
}

pub fn matrix_to_json(m: &JointSelectionMatrix) -> String {
    serde_json::to_string(m).expect("matrix serializes")
}

/// One line per row; values use the shortest representation that parses
/// back to the same `f64`.
pub fn matrix_to_csv(m: &JointSelectionMatrix) -> String {
    let mut s = String::new();
    for row in m.to_rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn matrix_from_csv(text: &str) -> Result<JointSelectionMatrix> {
    let rows = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|l| {
            l.split(',')
                .map(|c| c.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{c}'"))))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    JointSelectionMatrix::from_rows(&rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayersInput {
    pub players: Vec<Vec<f64>>,
}

pub fn parse_players(json: &str) -> Result<MultiPreferences> {
    MultiPreferences::new(serde_json::from_str::<PlayersInput>(json)?.players)
}
