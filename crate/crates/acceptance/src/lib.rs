//! Acceptance suite for `anytime-ppm`. The criteria live in
//! `tests/acceptance.rs`; run them with `cargo test -p anytime-ppm-validation`.
