//! Criterion benchmarks for the `cyclosc` numerics live in `benches/`.
