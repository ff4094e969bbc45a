//! Criterion benchmarks for `pumtune`; see `benches/`.
