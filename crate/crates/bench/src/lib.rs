//! Criterion benchmarks for `bhg-core`; see `benches/`.
