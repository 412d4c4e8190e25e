//! Benchmarks for the simulation kernels live in `benches/`.
