//! Criterion benchmarks for `csm-core`; see `benches/pipeline.rs`.
//!
//! ```text
//! cargo bench -p csm-bench
//! ```
