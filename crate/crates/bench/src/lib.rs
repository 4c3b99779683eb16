//! Benchmark-only crate; the benchmarks live in `benches/macro_benches.rs`
//! and exercise `mramsim-core` directly. There is no library code here.
