//! Benchmarks for ionage-core live under `benches/`.
