//! Criterion benchmarks for `cyclecoll`; see `benches/routes.rs`.
