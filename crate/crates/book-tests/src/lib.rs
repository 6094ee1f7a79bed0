//! Runs the snippets of the guide in `book/` as doctests.

#[doc = include_str!("../../../book/src/overview.md")]
pub mod ch1 {}

#[doc = include_str!("../../../book/src/kernels.md")]
pub mod ch2 {}

#[doc = include_str!("../../../book/src/quadrature.md")]
pub mod ch3 {}

#[doc = include_str!("../../../book/src/sampling.md")]
pub mod ch4 {}

#[doc = include_str!("../../../book/src/aggregated.md")]
pub mod ch5 {}

#[doc = include_str!("../../../book/src/acceptance.md")]
pub mod ch6 {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod ch7 {}
