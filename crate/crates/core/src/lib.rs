//! Reference-free, multilingual dialogue quality evaluation toolkit.
//!
//! The crate is organised around the lifecycle of a dialogue evaluation run:
//!
//! - [`corpus`] — dialogue data model, JSONL ingestion, context assembly and
//!   human-annotation normalization.
//! - [`augment`] — quality-ranked selection of machine-translated and
//!   paraphrased variants.
//! - [`sampler`] — self-supervised sample generation (sentence-validity and
//!   next-sentence pairs, plus paraphrase Siamese pairs).
//! - [`scorers`] — submetric scoring orchestration over HTTP backends, with a
//!   deterministic in-process mock for offline runs.
//! - [`llmjudge`] — the LLM-as-judge submetric: prompting, score parsing with
//!   re-prompting, transcripts and replay.
//! - [`ensemble`] — correlation statistics and significance-masked,
//!   sign-preserving weight fusion.
//!
//! All generation and offline scoring is a pure function of (inputs, seed):
//! repeated runs produce byte-identical artifacts.

pub mod augment;
pub mod corpus;
pub mod ensemble;
pub mod llmjudge;
pub mod sampler;
pub mod scorers;

/// Toolkit version recorded in emitted artifacts.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
