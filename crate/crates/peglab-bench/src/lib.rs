//! Benchmark-only crate; see `benches/peg_benches.rs`.
