//! Emoji-aware analysis of self-harm discourse in social media posts.
//!
//! The crate is organised around the data flow of an evaluation run:
//!
//! * [`lexicon`] loads the contextual emoji sensitivity matrix and answers
//!   glyph lookups.
//! * [`emojitext`] segments post text into word, punctuation, whitespace and
//!   emoji tokens and finds emoji compositions.
//! * [`corpus`] models annotated posts (labels, casual-mention and
//!   serious-intent spans), computes dataset statistics, splits and noise
//!   perturbations.
//! * [`prompts`] renders fine-tuning, rationale, zero-shot, few-shot and
//!   synthetic-data prompts.
//! * [`gateway`] talks to an inference endpoint (or a deterministic mock) and
//!   parses completions back into predictions.
//! * [`metrics`] and [`agreement`] score predictions, rationales and
//!   annotator agreement.
//!
//! Unicode data (grapheme break rules, emoji properties) is pinned to
//! Unicode 17.0.0; see [`emojitext::UNICODE_VERSION`].

pub mod agreement;
pub mod corpus;
pub mod emojitext;
pub mod gateway;
pub mod label;
pub mod lexicon;
pub mod metrics;
pub mod prompts;
pub mod util;

pub use label::Label;
