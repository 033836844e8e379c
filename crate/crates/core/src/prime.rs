//! The d×d phase space for odd prime dimension d.
//!
//! The torus is coordinatised by (p, q) ∈ ℤ_d × ℤ_d with ω = e^{2πi/d}. The
//! clock and shift operators act as X|a⟩ = |a+1⟩ and Z|a⟩ = ω^a|a⟩, and the
//! grid of phase-point operators is
//!
//! D(p,q) = (1/d) Σ_{a,b} ω^{pa−qb} ω^{ab/2} X^a Z^b,
//!
//! where the half-integer exponent means multiplication by (d+1)/2 in ℤ_d.
//! That inverse of 2 is the single place the construction needs d odd, and
//! the reason `PrimeDim` rejects d = 2 outright.

use num_complex::Complex64;
use thiserror::Error;

use crate::matrix::ComplexMatrix;
use crate::{BracketKind, HbarConfig};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PrimeDimError {
    #[error("d = 2 is not supported here: the ω^(ab/2) phase needs 2 invertible in ℤ_d; use the qubit space")]
    EvenDim,
    #[error("{0} is not an odd prime")]
    NotPrime(usize),
    #[error("dimension {0} outside the supported range 3..=101")]
    OutOfRange(usize),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PrimeError {
    #[error("expected a {expected}×{expected} operator, got {got}×{got}")]
    WrongDim { expected: usize, got: usize },
    #[error("canonical map has determinant 0 mod d and is not one-to-one")]
    NotInvertible,
}

fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// An odd prime dimension together with its root of unity and the lattice
/// representative of ½.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeDim {
    d: usize,
    half: usize,
    /// ω^k for k in 0..d, so phase arithmetic is exact exponent arithmetic
    /// mod d followed by a table lookup.
    roots: Vec<Complex64>,
}

impl PrimeDim {
    pub fn new(d: usize) -> Result<Self, PrimeDimError> {
        if d == 2 {
            return Err(PrimeDimError::EvenDim);
        }
        if !(3..=101).contains(&d) {
            return Err(PrimeDimError::OutOfRange(d));
        }
        if !is_prime(d) {
            return Err(PrimeDimError::NotPrime(d));
        }
        let roots = (0..d)
            .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / d as f64))
            .collect();
        Ok(Self { d, half: (d + 1) / 2, roots })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// The integer (d+1)/2 realising division by 2 in ℤ_d.
    pub fn half(&self) -> usize {
        self.half
    }

    pub fn omega(&self) -> Complex64 {
        self.roots[1 % self.d]
    }

    /// ω^k for any signed exponent.
    pub fn root(&self, k: i64) -> Complex64 {
        self.roots[k.rem_euclid(self.d as i64) as usize]
    }

    pub fn modint(&self, v: i64) -> ModInt {
        ModInt { value: v.rem_euclid(self.d as i64) as usize, modulus: self.d }
    }
}

/// Residue class mod d. All lattice index arithmetic goes through this type;
/// raw integers never index the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModInt {
    value: usize,
    modulus: usize,
}

impl ModInt {
    pub fn value(&self) -> usize {
        self.value
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    fn lift(&self, v: i64) -> Self {
        Self { value: v.rem_euclid(self.modulus as i64) as usize, modulus: self.modulus }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = *self;
        let mut acc = self.lift(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat; None at zero.
    pub fn inv(&self) -> Option<Self> {
        if self.value == 0 {
            None
        } else {
            Some(self.pow(self.modulus as u64 - 2))
        }
    }

    /// Multiplication by the lattice representative of ½.
    pub fn halve(&self) -> Self {
        self.lift((self.value * ((self.modulus + 1) / 2)) as i64)
    }
}

impl std::ops::Add for ModInt {
    type Output = ModInt;
    fn add(self, rhs: ModInt) -> ModInt {
        assert_eq!(self.modulus, rhs.modulus);
        self.lift((self.value + rhs.value) as i64)
    }
}

impl std::ops::Sub for ModInt {
    type Output = ModInt;
    fn sub(self, rhs: ModInt) -> ModInt {
        assert_eq!(self.modulus, rhs.modulus);
        self.lift(self.value as i64 - rhs.value as i64)
    }
}

impl std::ops::Mul for ModInt {
    type Output = ModInt;
    fn mul(self, rhs: ModInt) -> ModInt {
        assert_eq!(self.modulus, rhs.modulus);
        self.lift((self.value * rhs.value) as i64)
    }
}

impl std::ops::Neg for ModInt {
    type Output = ModInt;
    fn neg(self) -> ModInt {
        self.lift(-(self.value as i64))
    }
}

/// Complex function on the d×d lattice, stored row-major as (p row, q column).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGridFunction {
    d: usize,
    values: Vec<Complex64>,
}

impl PhaseGridFunction {
    pub fn zero(dim: &PrimeDim) -> Self {
        Self { d: dim.d, values: vec![Complex64::new(0.0, 0.0); dim.d * dim.d] }
    }

    pub fn constant(dim: &PrimeDim, c: Complex64) -> Self {
        Self { d: dim.d, values: vec![c; dim.d * dim.d] }
    }

    pub fn indicator(dim: &PrimeDim, p: ModInt, q: ModInt) -> Self {
        let mut f = Self::zero(dim);
        f.values[p.value * dim.d + q.value] = Complex64::new(1.0, 0.0);
        f
    }

    pub fn from_fn(dim: &PrimeDim, mut f: impl FnMut(ModInt, ModInt) -> Complex64) -> Self {
        let mut out = Self::zero(dim);
        for p in 0..dim.d {
            for q in 0..dim.d {
                out.values[p * dim.d + q] = f(dim.modint(p as i64), dim.modint(q as i64));
            }
        }
        out
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn value(&self, p: ModInt, q: ModInt) -> Complex64 {
        self.values[p.value * self.d + q.value]
    }

    pub fn set(&mut self, p: ModInt, q: ModInt, v: Complex64) {
        self.values[p.value * self.d + q.value] = v;
    }

    #[inline]
    fn at(&self, p: i64, q: i64) -> Complex64 {
        let d = self.d as i64;
        self.values[(p.rem_euclid(d) * d + q.rem_euclid(d)) as usize]
    }

    /// Row-major values in canonical (p, q) order.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn sum(&self) -> Complex64 {
        self.values.iter().sum()
    }

    /// Σ_q f(p, q) for each p, the conserved quantities of free motion.
    pub fn line_sums(&self) -> Vec<Complex64> {
        (0..self.d)
            .map(|p| self.values[p * self.d..(p + 1) * self.d].iter().sum())
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.d, other.d);
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Self { d: self.d, values }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.d, other.d);
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Self { d: self.d, values }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { d: self.d, values: self.values.iter().map(|z| c * z).collect() }
    }

    pub fn pointwise_mul(&self, other: &Self) -> Self {
        assert_eq!(self.d, other.d);
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Self { d: self.d, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.d != other.d {
            return f64::INFINITY;
        }
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }
}

/// Linear change of lattice coordinates (q̃, p̃) = (αq + βp, γq + δp) mod d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalMap {
    pub alpha: ModInt,
    pub beta: ModInt,
    pub gamma: ModInt,
    pub delta: ModInt,
}

impl CanonicalMap {
    pub fn new(dim: &PrimeDim, alpha: i64, beta: i64, gamma: i64, delta: i64) -> Self {
        Self {
            alpha: dim.modint(alpha),
            beta: dim.modint(beta),
            gamma: dim.modint(gamma),
            delta: dim.modint(delta),
        }
    }

    pub fn determinant(&self) -> ModInt {
        self.alpha * self.delta - self.beta * self.gamma
    }

    /// Symplectic means determinant ≡ 1, the condition for preserving the
    /// Moyal bracket.
    pub fn is_symplectic(&self) -> bool {
        self.determinant().value() == 1
    }

    pub fn is_invertible(&self) -> bool {
        self.determinant().value() != 0
    }
}

/// The shift and clock pair (X, Z) with X|a⟩ = |a+1⟩ and Z|a⟩ = ω^a|a⟩.
pub fn shift_clock_ops(dim: &PrimeDim) -> (ComplexMatrix, ComplexMatrix) {
    let d = dim.d;
    let x = ComplexMatrix::from_fn(d, |i, j| {
        if i == (j + 1) % d { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
    });
    let z = ComplexMatrix::from_fn(d, |i, j| {
        if i == j { dim.root(i as i64) } else { Complex64::new(0.0, 0.0) }
    });
    (x, z)
}

/// Phase-point operator D(p,q).
///
/// Carrying out the double sum over (a, b) collapses each row to a single
/// entry: D(p,q)[i][2q−i] = ω^{2p(i−q)}. Tests check this against the literal
/// operator sum.
pub fn phase_point_op(dim: &PrimeDim, p: ModInt, q: ModInt) -> ComplexMatrix {
    let d = dim.d as i64;
    let mut m = ComplexMatrix::zeros(dim.d);
    for i in 0..d {
        let a = (2 * (i - q.value as i64)).rem_euclid(d);
        let j = (2 * q.value as i64 - i).rem_euclid(d);
        m.set(i as usize, j as usize, dim.root(p.value as i64 * a));
    }
    m
}

/// Fourier coefficients c(a,b) = tr(F X^a Z^b), the operator expanded over
/// the clock/shift basis.
fn clock_shift_coefficients(dim: &PrimeDim, f: &ComplexMatrix) -> Vec<Complex64> {
    let d = dim.d;
    let mut c = vec![Complex64::new(0.0, 0.0); d * d];
    for a in 0..d {
        for b in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..d {
                acc += f.get(i, (i + a) % d) * dim.root((b * i) as i64);
            }
            c[a * d + b] = acc;
        }
    }
    c
}

/// f(p,q) = (1/d) tr(F D(p,q)).
pub fn weyl_to_function(dim: &PrimeDim, f: &ComplexMatrix) -> Result<PhaseGridFunction, PrimeError> {
    if f.dim() != dim.d {
        return Err(PrimeError::WrongDim { expected: dim.d, got: f.dim() });
    }
    let d = dim.d as i64;
    let coeff = clock_shift_coefficients(dim, f);
    let half = dim.half as i64;
    let norm = 1.0 / (dim.d * dim.d) as f64;
    let mut out = PhaseGridFunction { d: dim.d, values: vec![Complex64::new(0.0, 0.0); dim.d * dim.d] };
    for p in 0..d {
        for q in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..d {
                for b in 0..d {
                    let phase = (p * a - q * b + half * a * b).rem_euclid(d);
                    acc += coeff[(a * d + b) as usize] * dim.root(phase);
                }
            }
            out.values[(p * d + q) as usize] = acc * norm;
        }
    }
    Ok(out)
}

/// F = Σ_{p,q} f(p,q) D(p,q), the inverse of [`weyl_to_function`].
pub fn weyl_to_operator(dim: &PrimeDim, f: &PhaseGridFunction) -> ComplexMatrix {
    assert_eq!(f.d, dim.d);
    let d = dim.d as i64;
    let half = dim.half as i64;
    // clock/shift coefficients of the reconstructed operator
    let mut coeff = vec![Complex64::new(0.0, 0.0); (d * d) as usize];
    for a in 0..d {
        for b in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in 0..d {
                for q in 0..d {
                    let phase = (p * a - q * b + half * a * b).rem_euclid(d);
                    acc += f.values[(p * d + q) as usize] * dim.root(phase);
                }
            }
            coeff[(a * d + b) as usize] = acc / d as f64;
        }
    }
    let mut m = ComplexMatrix::zeros(dim.d);
    for a in 0..d {
        for b in 0..d {
            let c = coeff[(a * d + b) as usize];
            for j in 0..d {
                let i = ((j + a) % d) as usize;
                let prev = m.get(i, j as usize);
                m.set(i, j as usize, prev + c * dim.root(b * j));
            }
        }
    }
    m
}

/// Space coordinate z(p,q) = ω^q/d, the Weyl function of Z.
pub fn space_coordinate(dim: &PrimeDim) -> PhaseGridFunction {
    let norm = 1.0 / dim.d as f64;
    PhaseGridFunction::from_fn(dim, |_, q| dim.root(q.value as i64) * norm)
}

/// Momentum coordinate x(p,q) = ω^p/d, the Weyl function of X⁻¹ = X†.
pub fn momentum_coordinate(dim: &PrimeDim) -> PhaseGridFunction {
    let norm = 1.0 / dim.d as f64;
    PhaseGridFunction::from_fn(dim, |p, _| dim.root(p.value as i64) * norm)
}

/// Star product through the operator side: (f ⋆ g)(p,q) = (1/d²) tr(FG D(p,q)).
pub fn star_operator(dim: &PrimeDim, f: &PhaseGridFunction, g: &PhaseGridFunction) -> PhaseGridFunction {
    let fg = weyl_to_operator(dim, f).multiply(&weyl_to_operator(dim, g)).unwrap();
    weyl_to_function(dim, &fg)
        .unwrap()
        .scale(Complex64::new(1.0 / dim.d as f64, 0.0))
}

/// Star product as a direct lattice convolution,
///
/// (f ⋆ g)(p,q) = (1/d²) Σ f(p+r, q+s) g(p+t, q+u) ω^{2(st−ru)},
///
/// the noncommutative-torus form. Must agree with [`star_operator`] on all
/// inputs; that cross-check is the strongest correctness test in the module.
pub fn star_direct(dim: &PrimeDim, f: &PhaseGridFunction, g: &PhaseGridFunction) -> PhaseGridFunction {
    assert_eq!(f.d, dim.d);
    assert_eq!(g.d, dim.d);
    let d = dim.d as i64;
    let norm = 1.0 / (dim.d * dim.d) as f64;
    let mut out = PhaseGridFunction::zero(dim);
    for p in 0..d {
        for q in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..d {
                for s in 0..d {
                    let fv = f.at(p + r, q + s);
                    if fv == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for t in 0..d {
                        for u in 0..d {
                            let phase = (2 * (s * t - r * u)).rem_euclid(d);
                            acc += fv * g.at(p + t, q + u) * dim.root(phase);
                        }
                    }
                }
            }
            out.values[(p * d + q) as usize] = acc * norm;
        }
    }
    out
}

/// Moyal bracket {f,g}_⋆(p,q) = −(i/ħd²) tr(D(p,q) [F, G]), computed on the
/// operator side.
pub fn moyal_bracket(
    dim: &PrimeDim,
    f: &PhaseGridFunction,
    g: &PhaseGridFunction,
    hb: &HbarConfig,
) -> PhaseGridFunction {
    let comm = weyl_to_operator(dim, f).commutator(&weyl_to_operator(dim, g)).unwrap();
    let factor = Complex64::new(0.0, -1.0 / (hb.hbar() * dim.d as f64));
    weyl_to_function(dim, &comm).unwrap().scale(factor)
}

/// Moyal bracket in its explicit lattice form,
///
/// {f,g}_⋆(p,q) = (2/ħd²) Σ f(p+r, q+s) g(p+t, q+u) sin((4π/d)(st−ru)).
pub fn moyal_bracket_sin_form(
    dim: &PrimeDim,
    f: &PhaseGridFunction,
    g: &PhaseGridFunction,
    hb: &HbarConfig,
) -> PhaseGridFunction {
    assert_eq!(f.d, dim.d);
    assert_eq!(g.d, dim.d);
    let d = dim.d as i64;
    let sines: Vec<f64> = (0..dim.d)
        .map(|k| (4.0 * std::f64::consts::PI * k as f64 / dim.d as f64).sin())
        .collect();
    let norm = 2.0 / (hb.hbar() * (dim.d * dim.d) as f64);
    let mut out = PhaseGridFunction::zero(dim);
    for p in 0..d {
        for q in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..d {
                for s in 0..d {
                    let fv = f.at(p + r, q + s);
                    if fv == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for t in 0..d {
                        for u in 0..d {
                            let k = (s * t - r * u).rem_euclid(d) as usize;
                            if sines[k] != 0.0 {
                                acc += fv * g.at(p + t, q + u) * sines[k];
                            }
                        }
                    }
                }
            }
            out.values[(p * d + q) as usize] = acc * norm;
        }
    }
    out
}

/// Monomial ω^{αq + βp}.
pub fn monomial(dim: &PrimeDim, alpha: ModInt, beta: ModInt) -> PhaseGridFunction {
    PhaseGridFunction::from_fn(dim, |p, q| {
        dim.root((alpha.value * q.value + beta.value * p.value) as i64)
    })
}

/// The bracket coefficient κ(M) with M ≡ αδ − βγ, defined by
/// {ω^{αq+βp}, ω^{γq+δp}}_⋆ = κ·ω^{αq+βp}·ω^{γq+δp}:
///
/// κ = −(2/ħ) sin((2π/d)·(M/2 mod d)),
///
/// the sine of (π/d)·M with ½ realised as (d+1)/2 on the lattice. For even
/// integer representatives this is literally −(2/ħ)sin(πM/d); for odd ones
/// the lattice half-shift flips the sign of the sine. Reducing to d = 2
/// (formally, M = 1) reproduces the qubit value {q,p}_⋆ = +2qp/ħ.
pub fn monomial_bracket_coefficient(
    dim: &PrimeDim,
    m1: (ModInt, ModInt),
    m2: (ModInt, ModInt),
    hb: &HbarConfig,
) -> f64 {
    let det = m1.0 * m2.1 - m1.1 * m2.0;
    let halved = det.halve();
    let angle = 2.0 * std::f64::consts::PI * halved.value as f64 / dim.d as f64;
    -(2.0 / hb.hbar()) * angle.sin()
}

/// Closed form of the bracket of two monomials, κ·m₁·m₂. Must match
/// [`moyal_bracket`] numerically; the exhaustive d = 3 comparison is part of
/// the acceptance suite.
pub fn monomial_bracket_closed_form(
    dim: &PrimeDim,
    m1: (ModInt, ModInt),
    m2: (ModInt, ModInt),
    hb: &HbarConfig,
) -> PhaseGridFunction {
    let kappa = monomial_bracket_coefficient(dim, m1, m2, hb);
    monomial(dim, m1.0, m1.1)
        .pointwise_mul(&monomial(dim, m2.0, m2.1))
        .scale(Complex64::new(kappa, 0.0))
}

/// Lattice translation (T_{r,s} f)(p,q) = f(p−r, q−s), realised on the
/// operator side by conjugation with X^s Z^r.
pub fn translate(dim: &PrimeDim, f: &PhaseGridFunction, r: ModInt, s: ModInt) -> PhaseGridFunction {
    assert_eq!(f.d, dim.d);
    PhaseGridFunction::from_fn(dim, |p, q| f.value(p - r, q - s))
}

/// (δ_p f)(p,q) = f(p+1, q) − f(p,q), the function-side form of Z†FZ − F.
pub fn delta_p(dim: &PrimeDim, f: &PhaseGridFunction) -> PhaseGridFunction {
    assert_eq!(f.d, dim.d);
    let one = dim.modint(1);
    PhaseGridFunction::from_fn(dim, |p, q| f.value(p + one, q) - f.value(p, q))
}

/// (δ_q f)(p,q) = f(p, q+1) − f(p,q), the function-side form of X†FX − F.
pub fn delta_q(dim: &PrimeDim, f: &PhaseGridFunction) -> PhaseGridFunction {
    assert_eq!(f.d, dim.d);
    let one = dim.modint(1);
    PhaseGridFunction::from_fn(dim, |p, q| f.value(p, q + one) - f.value(p, q))
}

/// Half-shift derivative (∂_p f)(p,q) = (1/d) tr D(p,q)[Z, F] in its lattice
/// form −ω^q (f(p+½, q) − f(p−½, q)), with ½ = (d+1)/2. The shift lands on
/// the far side of the lattice, not on a neighbouring site.
pub fn half_shift_partial_p(dim: &PrimeDim, f: &PhaseGridFunction) -> PhaseGridFunction {
    assert_eq!(f.d, dim.d);
    let h = dim.modint(dim.half as i64);
    PhaseGridFunction::from_fn(dim, |p, q| {
        -dim.root(q.value as i64) * (f.value(p + h, q) - f.value(p - h, q))
    })
}

/// Half-shift derivative along q, (∂_q f)(p,q) = (1/d) tr D(p,q)[X, F] =
/// −ω^{−p} (f(p, q+½) − f(p, q−½)).
pub fn half_shift_partial_q(dim: &PrimeDim, f: &PhaseGridFunction) -> PhaseGridFunction {
    assert_eq!(f.d, dim.d);
    let h = dim.modint(dim.half as i64);
    PhaseGridFunction::from_fn(dim, |p, q| {
        -dim.root(-(p.value as i64)) * (f.value(p, q + h) - f.value(p, q - h))
    })
}

/// Commutator-side evaluation of the half-shift derivatives, used as the
/// oracle for the lattice forms above.
pub fn half_shift_partial_commutator(
    dim: &PrimeDim,
    f: &PhaseGridFunction,
    along_p: bool,
) -> PhaseGridFunction {
    let (x, z) = shift_clock_ops(dim);
    let theta = if along_p { z } else { x };
    let comm = theta.commutator(&weyl_to_operator(dim, f)).unwrap();
    weyl_to_function(dim, &comm).unwrap()
}

/// δ_p^k δ_q^l f by repeated application.
pub fn iterated_delta(dim: &PrimeDim, f: &PhaseGridFunction, k: usize, l: usize) -> PhaseGridFunction {
    let mut out = f.clone();
    for _ in 0..k {
        out = delta_p(dim, &out);
    }
    for _ in 0..l {
        out = delta_q(dim, &out);
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as f64
}

/// The double binomial alternating sum that δ_p^k δ_q^l expands into:
/// Σ_{r≤k, s≤l} (−1)^{k−r+l−s} C(k,r) C(l,s) f(p+r, q+s).
pub fn iterated_delta_binomial_form(
    dim: &PrimeDim,
    f: &PhaseGridFunction,
    k: usize,
    l: usize,
) -> PhaseGridFunction {
    assert_eq!(f.d, dim.d);
    PhaseGridFunction::from_fn(dim, |p, q| {
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..=k {
            for s in 0..=l {
                let sign = if (k - r + l - s) % 2 == 0 { 1.0 } else { -1.0 };
                let pr = p + dim.modint(r as i64);
                let qs = q + dim.modint(s as i64);
                acc += sign * binomial(k, r) * binomial(l, s) * f.value(pr, qs);
            }
        }
        acc
    })
}

/// Verifies the inversion f(p+r, q+s) = Σ_{k≤r, l≤s} C(r,k) C(s,l)
/// (δ_p^k δ_q^l f)(p,q) to the given tolerance.
pub fn delta_inversion_check(
    dim: &PrimeDim,
    f: &PhaseGridFunction,
    r: ModInt,
    s: ModInt,
    tol: f64,
) -> bool {
    let mut recon = PhaseGridFunction::zero(dim);
    for k in 0..=r.value {
        for l in 0..=s.value {
            let coeff = binomial(r.value, k) * binomial(s.value, l);
            recon = recon.add(&iterated_delta(dim, f, k, l).scale(Complex64::new(coeff, 0.0)));
        }
    }
    let shifted = PhaseGridFunction::from_fn(dim, |p, q| f.value(p + r, q + s));
    recon.approx_eq(&shifted, tol)
}

/// The projector (1/d) Σ_q D(p,q) = (1/d) Σ_a ω^{pa} X^a onto the X
/// eigenvector of eigenvalue ω^{−p}. Idempotent, Hermitian, rank one, and it
/// commutes with X — hence with the free-motion Hamiltonian, which is what
/// conserves the fixed-p line sums.
pub fn line_projector(dim: &PrimeDim, p: ModInt) -> ComplexMatrix {
    let d = dim.d;
    let norm = 1.0 / d as f64;
    ComplexMatrix::from_fn(d, |i, j| {
        let a = (i as i64 - j as i64).rem_euclid(d as i64);
        dim.root(p.value as i64 * a) * norm
    })
}

/// The "classical" candidate bracket
///
/// {f,g}_cl(p,q) = (1/ħd²) [∂_p f ∂_q g − ∂_q f ∂_p g]
///
/// with the half-shift derivatives and pointwise products. Deliberately kept
/// exactly in this form: it fails the Jacobi identity, and reproducing that
/// failure is the point.
pub fn classical_bracket(
    dim: &PrimeDim,
    f: &PhaseGridFunction,
    g: &PhaseGridFunction,
    hb: &HbarConfig,
) -> PhaseGridFunction {
    let pf = half_shift_partial_p(dim, f);
    let qf = half_shift_partial_q(dim, f);
    let pg = half_shift_partial_p(dim, g);
    let qg = half_shift_partial_q(dim, g);
    let norm = 1.0 / (hb.hbar() * (dim.d * dim.d) as f64);
    pf.pointwise_mul(&qg).sub(&qf.pointwise_mul(&pg)).scale(Complex64::new(norm, 0.0))
}

/// Cyclic sum {f,{g,h}} + {g,{h,f}} + {h,{f,g}} under the selected bracket.
pub fn jacobi_defect(
    dim: &PrimeDim,
    kind: BracketKind,
    f: &PhaseGridFunction,
    g: &PhaseGridFunction,
    h: &PhaseGridFunction,
    hb: &HbarConfig,
) -> PhaseGridFunction {
    let br = |a: &PhaseGridFunction, b: &PhaseGridFunction| match kind {
        BracketKind::Moyal => moyal_bracket(dim, a, b, hb),
        BracketKind::Classical => classical_bracket(dim, a, b, hb),
    };
    br(f, &br(g, h)).add(&br(g, &br(h, f))).add(&br(h, &br(f, g)))
}

/// Composes f with the new coordinates (q̃, p̃) = (αq + βp, γq + δp).
/// The map must be invertible mod d.
pub fn apply_canonical(
    dim: &PrimeDim,
    map: &CanonicalMap,
    f: &PhaseGridFunction,
) -> Result<PhaseGridFunction, PrimeError> {
    if !map.is_invertible() {
        return Err(PrimeError::NotInvertible);
    }
    assert_eq!(f.d, dim.d);
    Ok(PhaseGridFunction::from_fn(dim, |p, q| {
        let q_new = map.alpha * q + map.beta * p;
        let p_new = map.gamma * q + map.delta * p;
        f.value(p_new, q_new)
    }))
}

/// True iff the monomial bracket coefficient κ(M) is unchanged when every
/// exponent determinant M is multiplied by the map determinant — which
/// happens exactly when det ≡ 1 mod d.
pub fn canonical_preserves_bracket(dim: &PrimeDim, map: &CanonicalMap) -> bool {
    let hb = HbarConfig::default();
    let det = map.determinant();
    (0..dim.d as i64).all(|m| {
        let m1 = (dim.modint(m), dim.modint(0));
        let m2 = (dim.modint(0), dim.modint(1));
        let pair_scaled = (dim.modint(m) * det, dim.modint(0));
        let before = monomial_bracket_coefficient(dim, m1, m2, &hb);
        let after = monomial_bracket_coefficient(dim, pair_scaled, m2, &hb);
        (before - after).abs() < 1e-12
    })
}
