//! Long-form notes rendered into rustdoc.
//!
//! The markdown sources live in `docs/` at the workspace root so they are
//! readable without building docs; embedding them here keeps their Rust
//! examples compiling under `cargo test --doc`.

#[doc = include_str!("../../../docs/model_notes.md")]
pub mod model_notes {}

#[doc = include_str!("../../../docs/kkt_cases.md")]
pub mod kkt_cases {}

#[doc = include_str!("../../../docs/verification.md")]
pub mod verification {}
