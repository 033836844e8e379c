//! Discrete quantum phase spaces and their symplectic structure.
//!
//! Operators on a finite-dimensional Hilbert space are put in bijection with
//! complex functions on a finite lattice: a 2×2 four-point space for the qubit
//! and a d×d torus for odd prime dimension d. The transform carries the
//! operator product over to a noncommutative star product, whose commutator
//! gives a discrete Moyal bracket. This crate implements both phase spaces,
//! their difference calculus and translations, Moyal and "classical" brackets
//! together with a numerical comparison of their Jacobi behaviour, Hamiltonian
//! dynamics in both exact-unitary and phase-space-ODE form, and the bridge to
//! the continuum Moyal product on exponential observables.
//!
//! Everything is dense, double-precision, and verified against independent
//! operator-side computations at machine precision.

pub mod correspondence;
pub mod dynamics;
pub mod matrix;
pub mod prime;
pub mod qubit;

/// Which of the two discrete brackets to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketKind {
    /// Star-commutator bracket. Satisfies Leibniz and Jacobi by construction.
    Moyal,
    /// Pointwise difference-operator bracket obtained by dropping the
    /// translation/star structure. Generates damped, probability-conserving
    /// flows but is not a Lie bracket in general.
    Classical,
}

/// Carries the Planck constant so bracket normalisations are never hard-coded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HbarConfig {
    hbar: f64,
}

impl HbarConfig {
    /// A strictly positive hbar.
    pub fn new(hbar: f64) -> Self {
        assert!(hbar > 0.0 && hbar.is_finite(), "hbar must be positive");
        Self { hbar }
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }
}

impl Default for HbarConfig {
    fn default() -> Self {
        Self { hbar: 1.0 }
    }
}
