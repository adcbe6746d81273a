//! Criterion benchmarks for the simulation pipeline live in `benches/`.
