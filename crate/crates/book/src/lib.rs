//! Code listings of the guide in `book/src`, compiled and run as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/spectrum.md")]
pub mod spectrum {}

#[doc = include_str!("../../../book/src/wavefunctions.md")]
pub mod wavefunctions {}

#[doc = include_str!("../../../book/src/solver.md")]
pub mod solver {}

#[doc = include_str!("../../../book/src/lorentz.md")]
pub mod lorentz {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
