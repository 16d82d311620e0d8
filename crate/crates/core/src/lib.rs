//! Numerical generalized geometry on Courant algebroids.
//!
//! Two backends are provided: the *point case*, where the algebroid is a
//! quadratic Lie algebra (a Lie algebra with an invariant non-degenerate
//! pairing), and the *exact chart case*, where the algebroid is
//! `(T ⊕ T*)U` over a coordinate box `U ⊂ ℝᵈ` twisted by a closed 3-form.
//! On top of these sit generalized metrics `V₊ ⊂ E`, pairing-preserving
//! connections with their torsion 3-tensor, the generalized Ricci tensor,
//! the induced 1-loop flow, and the Poisson-Lie T-duality transport that
//! connects the two backends.
//!
//! All computations are dense, double precision and desk scale
//! (fiber dimensions ≤ ~12). Chart-side derivatives are central finite
//! differences; see [`numeric`] for the step-size policy and
//! [`tolerances`] for the residual ladder used by the checkers.

pub mod algebroid;
pub mod catalog;
pub mod config;
pub mod connection;
pub mod duality;
pub mod error;
pub mod flow;
pub mod genmetric;
pub mod gric;
pub mod numeric;
pub mod quadspace;
pub mod tolerances;

pub use error::{Error, Result};
