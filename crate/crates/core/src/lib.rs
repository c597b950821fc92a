//! Finite-length probabilistic constellation shaping, a dispersion-managed WDM
//! link simulator, and per-channel optimization of shaping block length and
//! symbol rate for maximum net data rate.

// `!(x > 0.0)` is the idiom that also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod fft;
pub mod fiber;
pub mod field;
pub mod optimizer;
pub mod pas;
pub mod rx;
pub mod seed;
pub mod shaping;
pub mod sim;
pub mod waveform;

pub use error::{Error, Result};
pub use field::SampledField;

// Guide chapters run as doctests so their snippets track the API.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/shaping.md")]
    mod shaping {}
    #[doc = include_str!("../../../book/src/framing.md")]
    mod framing {}
    #[doc = include_str!("../../../book/src/waveform.md")]
    mod waveform {}
    #[doc = include_str!("../../../book/src/link.md")]
    mod link {}
    #[doc = include_str!("../../../book/src/receiver.md")]
    mod receiver {}
    #[doc = include_str!("../../../book/src/optimizer.md")]
    mod optimizer {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
