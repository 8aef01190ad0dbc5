//! Benchmarks for the simulation engines live in `benches/`.
