// The book lives in `book/src`. mdbook cannot test Rust snippets against a
// workspace crate, so every chapter is pulled in here as a module doc and
// `cargo test --doc -p oddindex-guide` runs the code blocks. One module per
// chapter so a failing doctest names the chapter it came from.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/clifford.md")]
pub mod clifford {}
#[doc = include_str!("../../../book/src/equivariant-spectra.md")]
pub mod equivariant_spectra {}
#[doc = include_str!("../../../book/src/spectral-flow.md")]
pub mod spectral_flow {}
#[doc = include_str!("../../../book/src/circle-model.md")]
pub mod circle_model {}
#[doc = include_str!("../../../book/src/eta.md")]
pub mod eta {}
#[doc = include_str!("../../../book/src/characteristic-classes.md")]
pub mod characteristic_classes {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
