//! Bench-only crate; the suites live under `benches/`.
