//! Criterion benchmarks for the solvers. Run with `cargo bench -p narrow-escape-bench`.
