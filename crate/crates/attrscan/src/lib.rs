//! Corpus attribution for culture-conditioned generations.
//!
//! Given a pretraining-style corpus and a set of symbols that a language model
//! produced when prompted about different cultures, this crate traces each
//! (culture, symbol) pair back to corpus evidence and explains it with one of
//! six association labels:
//!
//! * **Memorized** — the corpus ties the symbol to this culture far more
//!   strongly than to the other cultures that also generated it.
//! * **CrossCulture** — the symbol is memorized for a *different* culture and
//!   leaked into this one's generations.
//! * **Diffuse** — the symbol is generated for at least half of all cultures
//!   and memorized for none; a generic default like "rice" or "t-shirt".
//! * **WeakFromMemorized** — not directly supported, but its tokens closely
//!   match a span of some memorized symbol's definition ("long top" from the
//!   definition of "salwar").
//! * **WeakFromDiffuse** — composed from diffuse symbols ("black t-shirt").
//! * **Unclassified** — none of the above.
//!
//! The pipeline runs in stages, each backed by a module:
//!
//! 1. [`corpus`] ingests JSONL documents and segments them into tokens and
//!    sentences with byte offsets.
//! 2. [`index`] builds a positional inverted index so n-gram lookups and
//!    co-occurrence scans stay fast on larger corpora.
//! 3. [`relevance`] decides, per document, whether a culture/symbol
//!    co-occurrence actually supports the association (token distance,
//!    sentence distance, and a signal-to-noise ratio over culture mentions).
//! 4. [`memorization`] turns contributory-document counts into contribution
//!    scores and z-scores, and picks the memorized culture(s) per symbol.
//! 5. [`associations`] applies the remaining labels (diffuse, cross-culture,
//!    weak, unclassified) and the overshadowing ratio of diffuse symbols.
//! 6. [`stats`] aggregates per-culture dashboards and rank correlations.
//! 7. [`topics`] mines keywords (LDA + TF-IDF) from documents where two
//!    cultures co-occur around a shared symbol.
//!
//! Each stage is demonstrated by a runnable example in `examples/`; start
//! with `cargo run --example full_pipeline`. The `attrscan` binary wires the
//! same stages behind subcommands (`index`, `classify`, `label`, `report`,
//! `correlate`, `topics`) for batch use.

pub mod associations;
pub mod config;
pub mod corpus;
pub mod error;
pub mod index;
pub mod memorization;
pub mod pipeline;
pub mod relevance;
pub mod stats;
pub mod topics;

pub use error::{Error, Result};
