//! Exact evaluation of a joint phase + dephasing-strength estimation protocol
//! on one-axis-twisted spin-squeezed states.
//!
//! An `N`-qubit probe is prepared by twisting a spin-coherent state, rotated so
//! its minimal-variance direction lies along `y`, and sent through `N` parallel
//! copies of a single-qubit channel that rotates by a phase `φ` about `z` while
//! shrinking the equatorial Bloch components by a factor `η`. Measuring the two
//! commuting collective observables `J²` and `J_y` and inverting their mean
//! values yields estimates of `(η, φ)` whose covariance this crate evaluates in
//! closed form, compares against the fundamental quantum bounds, and verifies
//! against a brute-force small-`N` simulation with Monte-Carlo measurement
//! sampling.
//!
//! The crate is organized around the pipeline:
//!
//! * [`channel`] — the single-qubit channel, its Kraus and Heisenberg (dual)
//!   representations, and the single-qubit quantum Fisher information.
//! * [`moments`] — exact permutation-invariant Pauli moments of the twisted
//!   state, frame rotations, and evolution to the channel output.
//! * [`collective`] — means, variances, and covariances of `J²` and `J_y`
//!   assembled from site moments by occurrence-count combinatorics.
//! * [`estimation`] — error-propagation estimator covariance, bound
//!   comparisons, scaling sweeps, and correction-order diagnostics.
//! * [`oracle`] — dense state-vector / density-matrix ground truth, joint
//!   `(J², J_y)` measurement statistics, and seeded Monte-Carlo experiments.
//! * [`validate`] — the cross-module consistency suite used by the CLI.
//!
//! A narrative guide with runnable snippets lives in `book/`; the snippets are
//! compiled as doc-tests so the guide cannot drift from the API.

pub mod channel;
pub mod collective;
pub mod estimation;
pub mod moments;
pub mod numerics;
pub mod oracle;
pub mod rng;
pub mod tolerances;
pub mod validate;

mod error;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    //! Compile and run every code block in the mdbook guide.
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/channel.md")]
    mod channel {}
    #[doc = include_str!("../../../book/src/squeezing.md")]
    mod squeezing {}
    #[doc = include_str!("../../../book/src/protocol.md")]
    mod protocol {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
