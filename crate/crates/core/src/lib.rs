//! Discrete Deligne–Beilinson cohomology on simplicial meshes with good covers.
//!
//! The crate is organised bottom-up:
//!
//! * [`complex`] – simplicial complexes, chains/cochains, good covers and Čech layers.
//! * [`cohomology`] – Smith normal form, integral cohomology, gauge-equivalence solving
//!   and the two short exact sequences of differential cohomology.
//! * [`db`] – truncated Čech–de Rham cochains and their differentials `D[k,l]`.
//! * [`fields`] – U(1) connections, (−1)-gerbe connections (dual edge modes), dressing,
//!   winding numbers and groupoid morphisms.
//! * [`wilson`] – circumcentric Hodge stars and the harmonic Wilson 1-form on an annulus.
//! * [`dynamics`] – equations of motion, presymplectic potential, charges and the
//!   central charge bracket.
//! * [`scenario`] – JSON scenario configs, the pipeline runner and report emission.
//!
//! Two arithmetic modes coexist. [`Rational`] values are exact and are measured in
//! *turns* (units of 2π), so that integer layers inject into forms without rounding.
//! `f64` values are plain radians-based reals used for metric work.

pub mod cohomology;
pub mod complex;
pub mod db;
pub mod dynamics;
pub mod error;
pub mod fields;
pub mod quadrature;
pub mod scalar;
pub mod scenario;
pub mod wilson;

pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};
