//! Dialogue data model, JSONL ingestion and validation, context-window
//! assembly, and human-annotation normalization.
//!
//! The canonical corpus format is JSONL, one dialogue per line:
//!
//! ```json
//! {"dialogue_id": "d1", "language": "en",
//!  "turns": [{"speaker": "A", "text": "hi"}, {"speaker": "B", "text": "hello"}],
//!  "turn_annotations": {"relevance": [null, 4]},
//!  "dialogue_annotations": {"relevance": 4}}
//! ```
//!
//! Turn indices are positional and assigned at load time. All values are
//! immutable after construction and safe to share across threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A single speaker turn within a dialogue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: String,
    pub text: String,
    /// 0-based position within the owning dialogue. Not part of the wire
    /// schema; assigned from list position on load.
    #[serde(skip)]
    pub turn_index: usize,
}

impl Turn {
    pub fn new(speaker: impl Into<String>, text: impl Into<String>, turn_index: usize) -> Self {
        Self {
            speaker: speaker.into(),
            text: text.into(),
            turn_index,
        }
    }

    /// Rendered form used for length accounting and prompts: `<speaker>: <text>`.
    pub fn rendered(&self) -> String {
        format!("{}: {}", self.speaker, self.text)
    }

    /// Length of the rendered line in characters.
    pub fn rendered_len(&self) -> usize {
        self.rendered().chars().count()
    }
}

/// Render turns one per line, newline-separated.
pub fn render_turns(turns: &[Turn]) -> String {
    turns
        .iter()
        .map(Turn::rendered)
        .collect::<Vec<_>>()
        .join("\n")
}

/// A canonical, lowercase quality-aspect name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AspectId(String);

impl AspectId {
    /// Canonicalizes by trimming and lowercasing; aspects compare
    /// case-insensitively.
    pub fn new(name: &str) -> Self {
        Self(name.trim().to_lowercase())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AspectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The set of aspects a run admits; unknown aspects in data are ingestion errors.
#[derive(Debug, Clone, Default)]
pub struct AspectRegistry {
    aspects: BTreeSet<AspectId>,
}

impl AspectRegistry {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            aspects: names.into_iter().map(|n| AspectId::new(n.as_ref())).collect(),
        }
    }

    pub fn contains(&self, aspect: &AspectId) -> bool {
        self.aspects.contains(aspect)
    }

    pub fn iter(&self) -> impl Iterator<Item = &AspectId> {
        self.aspects.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.aspects.is_empty()
    }
}

/// Bounds of the raw human-annotation scale (Likert 1..5 by default).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnotationScale {
    pub min: f64,
    pub max: f64,
}

impl Default for AnnotationScale {
    fn default() -> Self {
        Self { min: 1.0, max: 5.0 }
    }
}

impl AnnotationScale {
    pub fn new(min: f64, max: f64) -> Result<Self, CorpusError> {
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(CorpusError::InvalidScale { min, max });
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, raw: f64) -> bool {
        raw.is_finite() && raw >= self.min && raw <= self.max
    }
}

/// An annotated dialogue: ordered turns plus optional per-turn and
/// whole-dialogue human scores.
#[derive(Debug, Clone, PartialEq)]
pub struct Dialogue {
    pub dialogue_id: String,
    pub language: String,
    pub turns: Vec<Turn>,
    /// Aspect -> per-turn raw scores, aligned to `turns` (None = unannotated).
    pub turn_annotations: BTreeMap<AspectId, Vec<Option<f64>>>,
    /// Aspect -> whole-dialogue raw score.
    pub dialogue_annotations: BTreeMap<AspectId, f64>,
}

/// A (context, response) pair: the unit a scoring function maps to a scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalInstance {
    pub instance_id: String,
    pub context: Vec<Turn>,
    pub response: Turn,
    pub language: String,
}

impl EvalInstance {
    /// Rendered length in characters of context plus response, one line per
    /// turn with newline separators.
    pub fn rendered_len(&self) -> usize {
        let lines = self.context.len() + 1;
        let chars: usize = self
            .context
            .iter()
            .map(Turn::rendered_len)
            .sum::<usize>()
            + self.response.rendered_len();
        chars + lines.saturating_sub(1)
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed JSON: {source}")]
    MalformedLine {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("dialogue {dialogue_id}: annotation {value} for aspect \"{aspect}\" outside scale [{min}, {max}]")]
    OutOfScale {
        dialogue_id: String,
        aspect: AspectId,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("duplicate dialogue_id \"{dialogue_id}\"")]
    DuplicateId { dialogue_id: String },
    #[error("dialogue {dialogue_id}: aspect \"{aspect}\" is not declared in the aspect registry")]
    UnknownAspect { dialogue_id: String, aspect: AspectId },
    #[error("invalid annotation scale: min={min}, max={max}")]
    InvalidScale { min: f64, max: f64 },
    #[error("annotation {raw} outside scale [{min}, {max}]")]
    OutOfRangeAnnotation { raw: f64, min: f64, max: f64 },
    #[error("context budget {budget} cannot fit the response alone ({response_len} chars rendered)")]
    BudgetTooSmall { budget: usize, response_len: usize },
}

/// Wire representation of one corpus line.
#[derive(Debug, Serialize, Deserialize)]
struct DialogueRecord {
    dialogue_id: String,
    language: String,
    turns: Vec<Turn>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    turn_annotations: BTreeMap<String, Vec<Option<f64>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    dialogue_annotations: BTreeMap<String, f64>,
}

impl Dialogue {
    /// Serializes to the canonical one-line JSON corpus form.
    pub fn to_json_line(&self) -> String {
        let record = DialogueRecord {
            dialogue_id: self.dialogue_id.clone(),
            language: self.language.clone(),
            turns: self.turns.clone(),
            turn_annotations: self
                .turn_annotations
                .iter()
                .map(|(k, v)| (k.as_str().to_string(), v.clone()))
                .collect(),
            dialogue_annotations: self
                .dialogue_annotations
                .iter()
                .map(|(k, v)| (k.as_str().to_string(), *v))
                .collect(),
        };
        serde_json::to_string(&record).expect("dialogue serialization cannot fail")
    }
}

/// Loads and validates a JSONL corpus. Raw annotation values are retained
/// unmodified; validation covers JSON shape, scale bounds, aspect registry
/// membership, annotation alignment and dialogue-id uniqueness.
pub fn load_dataset(
    path: &Path,
    scale: &AnnotationScale,
    registry: &AspectRegistry,
) -> Result<Vec<Dialogue>, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);

    let mut dialogues = Vec::new();
    let mut seen_ids = BTreeSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DialogueRecord = serde_json::from_str(&line)
            .map_err(|source| CorpusError::MalformedLine { line: line_no, source })?;
        let dialogue = validate_record(record, line_no, scale, registry)?;
        if !seen_ids.insert(dialogue.dialogue_id.clone()) {
            return Err(CorpusError::DuplicateId {
                dialogue_id: dialogue.dialogue_id,
            });
        }
        dialogues.push(dialogue);
    }
    Ok(dialogues)
}

fn validate_record(
    record: DialogueRecord,
    line: usize,
    scale: &AnnotationScale,
    registry: &AspectRegistry,
) -> Result<Dialogue, CorpusError> {
    if record.dialogue_id.trim().is_empty() {
        return Err(CorpusError::Schema {
            line,
            message: "dialogue_id is empty".into(),
        });
    }
    if record.language.trim().is_empty() {
        return Err(CorpusError::Schema {
            line,
            message: format!("dialogue {}: language is empty", record.dialogue_id),
        });
    }
    if record.turns.is_empty() {
        return Err(CorpusError::Schema {
            line,
            message: format!("dialogue {}: no turns", record.dialogue_id),
        });
    }
    let mut turns = record.turns;
    for (i, turn) in turns.iter_mut().enumerate() {
        if turn.text.trim().is_empty() {
            return Err(CorpusError::Schema {
                line,
                message: format!(
                    "dialogue {}: turn {} has empty text",
                    record.dialogue_id, i
                ),
            });
        }
        if turn.speaker.trim().is_empty() {
            return Err(CorpusError::Schema {
                line,
                message: format!(
                    "dialogue {}: turn {} has empty speaker",
                    record.dialogue_id, i
                ),
            });
        }
        turn.turn_index = i;
    }

    let mut turn_annotations = BTreeMap::new();
    for (name, values) in record.turn_annotations {
        let aspect = AspectId::new(&name);
        if !registry.contains(&aspect) {
            return Err(CorpusError::UnknownAspect {
                dialogue_id: record.dialogue_id,
                aspect,
            });
        }
        if values.len() != turns.len() {
            return Err(CorpusError::Schema {
                line,
                message: format!(
                    "dialogue {}: aspect \"{}\" has {} turn annotations for {} turns",
                    record.dialogue_id,
                    aspect,
                    values.len(),
                    turns.len()
                ),
            });
        }
        for value in values.iter().flatten() {
            if !scale.contains(*value) {
                return Err(CorpusError::OutOfScale {
                    dialogue_id: record.dialogue_id,
                    aspect,
                    value: *value,
                    min: scale.min,
                    max: scale.max,
                });
            }
        }
        turn_annotations.insert(aspect, values);
    }

    let mut dialogue_annotations = BTreeMap::new();
    for (name, value) in record.dialogue_annotations {
        let aspect = AspectId::new(&name);
        if !registry.contains(&aspect) {
            return Err(CorpusError::UnknownAspect {
                dialogue_id: record.dialogue_id,
                aspect,
            });
        }
        if !scale.contains(value) {
            return Err(CorpusError::OutOfScale {
                dialogue_id: record.dialogue_id,
                aspect,
                value,
                min: scale.min,
                max: scale.max,
            });
        }
        dialogue_annotations.insert(aspect, value);
    }

    Ok(Dialogue {
        dialogue_id: record.dialogue_id,
        language: record.language,
        turns,
        turn_annotations,
        dialogue_annotations,
    })
}

/// Builds one turn-level instance per response turn (index >= 1): instance
/// `i` pairs turns `0..i` as context with turn `i` as response. Dialogues
/// with fewer than two turns yield an empty list.
pub fn make_turn_instances(dialogue: &Dialogue) -> Vec<EvalInstance> {
    if dialogue.turns.len() < 2 {
        return Vec::new();
    }
    (1..dialogue.turns.len())
        .map(|i| EvalInstance {
            instance_id: format!("{}#{}", dialogue.dialogue_id, i),
            context: dialogue.turns[..i].to_vec(),
            response: dialogue.turns[i].clone(),
            language: dialogue.language.clone(),
        })
        .collect()
}

/// Drops whole turns from the front of the context until the rendered
/// length (speaker tokens, texts and newline separators) fits `budget`
/// characters. The response is never truncated; if it alone exceeds the
/// budget, this is an error.
pub fn truncate_context(
    instance: &EvalInstance,
    budget: usize,
) -> Result<EvalInstance, CorpusError> {
    if instance.response.rendered_len() > budget {
        return Err(CorpusError::BudgetTooSmall {
            budget,
            response_len: instance.response.rendered_len(),
        });
    }
    let mut out = instance.clone();
    while out.rendered_len() > budget && !out.context.is_empty() {
        out.context.remove(0);
    }
    Ok(out)
}

/// Linear map of a raw score onto [0, 1]: `(raw - min) / (max - min)`.
pub fn normalize_annotation(raw: f64, scale: &AnnotationScale) -> Result<f64, CorpusError> {
    if !scale.contains(raw) {
        return Err(CorpusError::OutOfRangeAnnotation {
            raw,
            min: scale.min,
            max: scale.max,
        });
    }
    Ok((raw - scale.min) / (scale.max - scale.min))
}
