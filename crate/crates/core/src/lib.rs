//! Linearly adaptive cross entropy.
//!
//! The adaptive loss scales cross entropy by the probability mass the model
//! did not put on the true class:
//!
//! ```text
//! CE(z, c)  = -ln q_c
//! Adp(z, c) = -(1 - q_c) ln q_c,     q = softmax(z)
//! ```
//!
//! It is the one-hot simplification of the Jeffreys (symmetric KL)
//! divergence `D(P,Q) + D(Q,P)` with `D(P,Q) ≈ -ln q_c` and
//! `D(Q,P) ≈ q_c ln q_c`. Its logit gradient is the cross-entropy gradient
//! times the scalar `k(q_c) = 1 - q_c - q_c ln q_c`.
//!
//! Beyond the losses, the crate carries just enough machinery to compare the
//! two on real training runs: a ReLU multilayer perceptron with hand-written
//! backward passes, SGD with momentum and step decay, CIFAR-100 and
//! synthetic data, top-k metrics, and a seeded multi-trial runner.

pub mod data;
pub mod error;
pub mod experiment;
pub mod losses;
pub mod metrics;
pub mod network;
pub mod numeric;
pub mod optim;

pub use error::{Error, Result};
pub use losses::{ClassIndex, LossKind, LossOutput, ProbVector};
pub use numeric::{Matrix, Rng};
