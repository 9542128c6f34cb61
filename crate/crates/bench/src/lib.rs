//! Criterion benchmarks for the dcf-core kernels; see `benches/`.
