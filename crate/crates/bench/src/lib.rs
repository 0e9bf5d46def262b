//! Criterion benchmarks for `terracini-core`; see `benches/`.
