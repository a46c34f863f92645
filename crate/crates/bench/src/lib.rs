//! Benchmarks (`benches/`) and the acceptance suite (`tests/acceptance.rs`).
