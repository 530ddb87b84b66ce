//! Benchmarks for iklkit live under `benches/`.
