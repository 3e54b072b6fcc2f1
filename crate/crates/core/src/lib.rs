//! Colored m-ary partition numbers `A_{m,k}(n)`, their `p`-adic valuations,
//! and finite-range checks of their congruence structure.
//!
//! ```
//! use padic_partitions::verifiers::verify_thm1;
//!
//! let report = verify_thm1(3, 1, 1, 500).unwrap();
//! assert!(report.passed);
//! ```

pub mod digits;
pub mod error;
pub mod explorer;
pub mod report;
pub mod ring;
pub mod series;
pub mod verifiers;

pub use digits::Valuation;
pub use error::{Error, Result};
pub use report::{CheckReport, Exportable, Format};
pub use ring::RingSpec;
pub use series::{PartitionParams, TruncatedSeries};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/series.md")]
    mod series {}
    #[doc = include_str!("../../../book/src/digits.md")]
    mod digits {}
    #[doc = include_str!("../../../book/src/verifiers.md")]
    mod verifiers {}
    #[doc = include_str!("../../../book/src/explorer.md")]
    mod explorer {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
