//! Patch generation benchmark toolkit: a typed patch graph, JSON codecs,
//! a small patch scripting language, an offline renderer with spectral
//! judges, an LLM client with a replay cache, and the evaluation harness.

pub mod benchmark;
pub mod category;
pub mod codec;
pub mod fixtures;
pub mod harness;
pub mod ir;
pub mod llm;
pub mod render;
pub mod script;
