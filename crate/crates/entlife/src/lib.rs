//! Toolkit for entanglement lifetimes of two qubits under independent local noise.
//!
//! Three capabilities, layered bottom-up:
//!
//! * decide whether a pair of unital qubit channels annihilates all two-qubit
//!   entanglement, with a signed-permutation criterion and a maximally
//!   entangled witness family ([`unital`]);
//! * decompose a nonunital qubit channel into positive scalings around a
//!   unital core, a quantum analogue of Sinkhorn matrix balancing
//!   ([`sinkhorn`]);
//! * track negativity of chosen initial states along time-parameterized noise
//!   families and locate entanglement lifetimes, including the longest-lived
//!   (robust) states ([`dynamics`]).
//!
//! [`algebra`] and [`channels`] provide the fixed-size linear algebra and the
//! Pauli transfer calculus everything else rests on. [`oracle`] offers
//! brute-force sampled cross-checks, and [`exec`] a small map helper that
//! fans work out over rayon when the `parallel` feature (default) is on.

pub mod algebra;
pub mod channels;
pub mod dynamics;
pub mod exec;
pub mod oracle;
pub mod sinkhorn;
pub mod unital;

/// Unified error type for the whole crate.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("matrix is not Hermitian, symmetry residual {0:.3e}")]
    NonHermitian(f64),
    #[error("operator is not unitary, residual {0:.3e}")]
    NonUnitary(f64),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("Kraus operators do not sum to the identity, residual {0:.3e}")]
    IncompleteKraus(f64),
    #[error("channel is not completely positive, min Choi eigenvalue {0:.3e}")]
    NotCompletelyPositive(f64),
    #[error("map is not positive on the Bloch ball, worst image norm {0:.6}")]
    NotPositive(f64),
    #[error("channel is not unital, shift norm {0:.3e}")]
    NotUnital(f64),
    #[error("no real quartic root in the admissible interval (max lambda^2, 1]")]
    NoValidRoot,
    #[error("scaling pole: root collides with lambda_{0}^2")]
    PoleHit(usize),
    #[error("degenerate scaling: {0}")]
    DegenerateScaling(String),
    #[error("channel sits on the complete-positivity boundary, margin {0:.3e}")]
    BoundaryChannel(f64),
    #[error("reduction verification failed, residual {0:.3e}")]
    VerificationFailed(f64),
    #[error("iteration did not converge within {0} steps")]
    NoConvergence(usize),
    #[error("pair is still not annihilating at the horizon t = {0}")]
    NoThreshold(f64),
    #[error("pair is already annihilating at t = 0, max value {0:.6}")]
    AlreadyAnnihilating(f64),
    #[error("state is still entangled at the horizon t = {0}")]
    StillEntangled(f64),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
