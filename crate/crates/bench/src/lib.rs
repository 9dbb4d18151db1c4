//! Criterion benchmarks for `codedmv`; run with `cargo bench -p codedmv-bench`.
