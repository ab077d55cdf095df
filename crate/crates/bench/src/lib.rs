//! Benchmarks live under `benches/`; run them with `cargo bench -p ellipse-contact-bench`.
