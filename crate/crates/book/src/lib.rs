//! Compiles the snippets in `book/src` as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/language.md")]
pub mod language {}

#[doc = include_str!("../../../book/src/running-code.md")]
pub mod running_code {}

#[doc = include_str!("../../../book/src/classifier.md")]
pub mod classifier {}

#[doc = include_str!("../../../book/src/conversations.md")]
pub mod conversations {}

#[doc = include_str!("../../../book/src/backends.md")]
pub mod backends {}

#[doc = include_str!("../../../book/src/sessions.md")]
pub mod sessions {}

#[doc = include_str!("../../../book/src/wire-format.md")]
pub mod wire_format {}

#[doc = include_str!("../../../book/src/configuration.md")]
pub mod configuration {}
