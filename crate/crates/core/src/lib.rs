//! Finite-element solvers for the one-dimensional time-dependent
//! Schrödinger equation `i u_t + u_xx = V u` on a bounded interval, with
//! absorbing boundary conditions built from the Titchmarsh–Weyl m-function.
//!
//! The frequency-domain path solves Laplace-transformed boundary-value
//! problems with exact m-function Robin data and inverts numerically. The
//! time-domain path fits pole–residue approximants of the m-function and
//! advances Crank–Nicolson with a fast half-order derivative at each end.

pub mod banded;
pub mod config;
pub mod error;
pub mod freq_solver;
pub mod mesh;
pub mod mfunction;
pub mod output;
pub mod potential;
pub mod quadrature;
pub mod rational;
pub mod reference;
pub mod special;
pub mod time_solver;
