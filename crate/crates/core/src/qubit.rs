//! The four-point qubit phase space.
//!
//! Conventions: points are labelled (ε, ε') with ε the Z-eigenvalue sign
//! (the "q" direction) and ε' the X-eigenvalue sign (the "p" direction).
//! Canonical enumeration order is (−−), (−+), (+−), (++). The phase-point
//! operators are D_{εε'} = (I + ε'X + εε'Y + εZ)/4; they form an orthogonal
//! POVM basis with tr D_α = 1/2 and tr D_α D_β = δ_{αβ}/2.

use num_complex::Complex64;
use thiserror::Error;

use crate::matrix::ComplexMatrix;
use crate::{BracketKind, HbarConfig};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QubitError {
    #[error("expected a 2×2 operator, got {0}×{0}")]
    WrongDim(usize),
    #[error("function is not real within tolerance (max imaginary part {0:.3e})")]
    NonReal(f64),
}

/// One of the two eigenvalue signs labelling a lattice direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Minus => -1.0,
            Sign::Plus => 1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }
}

/// A point of the 2×2 lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QubitPoint {
    /// Z-direction sign (position coordinate q).
    pub eps: Sign,
    /// X-direction sign (momentum coordinate p).
    pub eps_prime: Sign,
}

impl QubitPoint {
    pub const MM: QubitPoint = QubitPoint { eps: Sign::Minus, eps_prime: Sign::Minus };
    pub const MP: QubitPoint = QubitPoint { eps: Sign::Minus, eps_prime: Sign::Plus };
    pub const PM: QubitPoint = QubitPoint { eps: Sign::Plus, eps_prime: Sign::Minus };
    pub const PP: QubitPoint = QubitPoint { eps: Sign::Plus, eps_prime: Sign::Plus };

    /// All four points in canonical order (−−), (−+), (+−), (++).
    pub const ALL: [QubitPoint; 4] = [Self::MM, Self::MP, Self::PM, Self::PP];

    pub fn index(self) -> usize {
        let e = matches!(self.eps, Sign::Plus) as usize;
        let ep = matches!(self.eps_prime, Sign::Plus) as usize;
        2 * e + ep
    }

    pub fn from_index(idx: usize) -> Self {
        Self::ALL[idx]
    }

    pub fn label(self) -> &'static str {
        match (self.eps, self.eps_prime) {
            (Sign::Minus, Sign::Minus) => "--",
            (Sign::Minus, Sign::Plus) => "-+",
            (Sign::Plus, Sign::Minus) => "+-",
            (Sign::Plus, Sign::Plus) => "++",
        }
    }

    pub fn flip_eps(self) -> Self {
        Self { eps: self.eps.flip(), eps_prime: self.eps_prime }
    }

    pub fn flip_eps_prime(self) -> Self {
        Self { eps: self.eps, eps_prime: self.eps_prime.flip() }
    }

    pub fn flip_both(self) -> Self {
        Self { eps: self.eps.flip(), eps_prime: self.eps_prime.flip() }
    }
}

/// Complex-valued function on the four lattice points.
///
/// Values are complex throughout; realness is a checkable property, not a
/// type constraint (the star product of real functions generally has an
/// imaginary part).
#[derive(Debug, Clone, PartialEq)]
pub struct QubitFunction {
    values: [Complex64; 4],
}

impl QubitFunction {
    pub fn zero() -> Self {
        Self { values: [Complex64::new(0.0, 0.0); 4] }
    }

    pub fn constant(c: Complex64) -> Self {
        Self { values: [c; 4] }
    }

    /// 1 at `pt`, 0 elsewhere.
    pub fn indicator(pt: QubitPoint) -> Self {
        let mut f = Self::zero();
        f.values[pt.index()] = Complex64::new(1.0, 0.0);
        f
    }

    pub fn from_values(values: [Complex64; 4]) -> Self {
        Self { values }
    }

    pub fn from_fn(mut f: impl FnMut(QubitPoint) -> Complex64) -> Self {
        let mut out = Self::zero();
        for pt in QubitPoint::ALL {
            out.values[pt.index()] = f(pt);
        }
        out
    }

    pub fn value(&self, pt: QubitPoint) -> Complex64 {
        self.values[pt.index()]
    }

    pub fn set(&mut self, pt: QubitPoint, v: Complex64) {
        self.values[pt.index()] = v;
    }

    /// Values in canonical order.
    pub fn values(&self) -> &[Complex64; 4] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Sums along the two fixed-momentum trajectories, ordered [ε' = −, ε' = +].
    /// Conserved under H = X dynamics.
    pub fn line_sums(&self) -> [Complex64; 2] {
        [
            self.value(QubitPoint::MM) + self.value(QubitPoint::PM),
            self.value(QubitPoint::MP) + self.value(QubitPoint::PP),
        ]
    }

    pub fn sum(&self) -> Complex64 {
        self.values.iter().sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_fn(|pt| self.value(pt) + other.value(pt))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_fn(|pt| self.value(pt) - other.value(pt))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_fn(|pt| c * self.value(pt))
    }

    /// Pointwise (commutative) product, as opposed to the star product.
    pub fn pointwise_mul(&self, other: &Self) -> Self {
        Self::from_fn(|pt| self.value(pt) * other.value(pt))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

/// Density matrix in Bloch coordinates, ρ = (I + aX + bY + cZ)/2.
///
/// Invalid points with a² + b² + c² > 1 are representable on purpose (some
/// instructive trajectories start from one); `is_valid` flags them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl BlochState {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    /// Positivity of ρ: a² + b² + c² ≤ 1.
    pub fn is_valid(&self) -> bool {
        self.a * self.a + self.b * self.b + self.c * self.c <= 1.0 + 1e-12
    }

    pub fn density_matrix(&self) -> ComplexMatrix {
        let mut m = pauli(Pauli::X).scale(Complex64::new(self.a, 0.0));
        m = m.add(&pauli(Pauli::Y).scale(Complex64::new(self.b, 0.0))).unwrap();
        m = m.add(&pauli(Pauli::Z).scale(Complex64::new(self.c, 0.0))).unwrap();
        m = m.add(&ComplexMatrix::identity(2)).unwrap();
        m.scale(Complex64::new(0.5, 0.0))
    }
}

/// Pauli operator selector; also labels the three lattice translations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Direction selector for the finite-difference operators δ.
///
/// δ_q ≡ δ_X and δ_p ≡ δ_Z: the operator named after a coordinate differences
/// along that coordinate, and the *other* operator generates the translation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaDirection {
    Q,
    P,
    Y,
}

/// The Pauli matrices in the convention X = [[0,1],[1,0]], Y = [[0,−i],[i,0]],
/// Z = diag(1, −1).
pub fn pauli(which: Pauli) -> ComplexMatrix {
    let c = Complex64::new;
    let entries = match which {
        Pauli::X => vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)],
        Pauli::Y => vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)],
        Pauli::Z => vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)],
    };
    ComplexMatrix::from_entries(2, entries).unwrap()
}

/// Phase-point operator D_{εε'} = (I + ε'X + εε'Y + εZ)/4.
pub fn phase_point_op(pt: QubitPoint) -> ComplexMatrix {
    let e = pt.eps.value();
    let ep = pt.eps_prime.value();
    let mut m = ComplexMatrix::identity(2);
    m = m.add(&pauli(Pauli::X).scale(Complex64::new(ep, 0.0))).unwrap();
    m = m.add(&pauli(Pauli::Y).scale(Complex64::new(e * ep, 0.0))).unwrap();
    m = m.add(&pauli(Pauli::Z).scale(Complex64::new(e, 0.0))).unwrap();
    m.scale(Complex64::new(0.25, 0.0))
}

/// f_α = tr(F D_α).
pub fn weyl_to_function(f: &ComplexMatrix) -> Result<QubitFunction, QubitError> {
    if f.dim() != 2 {
        return Err(QubitError::WrongDim(f.dim()));
    }
    Ok(QubitFunction::from_fn(|pt| {
        f.multiply(&phase_point_op(pt)).unwrap().trace()
    }))
}

/// F = 2 Σ_α f_α D_α; inverse of [`weyl_to_function`].
pub fn weyl_to_operator(f: &QubitFunction) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2);
    for pt in QubitPoint::ALL {
        m = m.add(&phase_point_op(pt).scale(f.value(pt) * 2.0)).unwrap();
    }
    m
}

/// The coordinate functions (q, p): q is the Weyl function of 2Z with values
/// ε = ±1, p the function of 2X with values ε' = ±1.
pub fn coordinate_functions() -> (QubitFunction, QubitFunction) {
    let q = QubitFunction::from_fn(|pt| Complex64::new(pt.eps.value(), 0.0));
    let p = QubitFunction::from_fn(|pt| Complex64::new(pt.eps_prime.value(), 0.0));
    (q, p)
}

/// Quasi-probabilities ρ_α = tr(D_α ρ) = (1 + aε' + bεε' + cε)/4.
pub fn bloch_probabilities(s: &BlochState) -> QubitFunction {
    QubitFunction::from_fn(|pt| {
        let e = pt.eps.value();
        let ep = pt.eps_prime.value();
        Complex64::new(0.25 * (1.0 + s.a * ep + s.b * e * ep + s.c * e), 0.0)
    })
}

/// A function is "classical" when it is a genuine probability distribution:
/// real and nonnegative at every point (within `tol`).
pub fn is_classical(f: &QubitFunction, tol: f64) -> Result<bool, QubitError> {
    let im = f.max_imag();
    if im > tol {
        return Err(QubitError::NonReal(im));
    }
    Ok(QubitPoint::ALL.iter().all(|pt| f.value(*pt).re >= -tol))
}

/// Star product (f ⋆ g)_α = ½ tr(D_α F G). The constant function 1 is the
/// unit; the product of real functions is generally complex.
pub fn star(f: &QubitFunction, g: &QubitFunction) -> QubitFunction {
    let fg = weyl_to_operator(f).multiply(&weyl_to_operator(g)).unwrap();
    QubitFunction::from_fn(|pt| 0.5 * fg.multiply(&phase_point_op(pt)).unwrap().trace())
}

/// The full table 16·tr(D_α D_β D_γ), indexed `[α][β][γ]` in canonical order.
///
/// Always computed from the operators, never hard-coded; tests hold the
/// published α = (++) page as a golden fixture.
pub fn triple_trace_table() -> [[[Complex64; 4]; 4]; 4] {
    let ds: Vec<ComplexMatrix> = QubitPoint::ALL.iter().map(|p| phase_point_op(*p)).collect();
    let mut out = [[[Complex64::new(0.0, 0.0); 4]; 4]; 4];
    for (a, da) in ds.iter().enumerate() {
        for (b, db) in ds.iter().enumerate() {
            for (g, dg) in ds.iter().enumerate() {
                let t = da.multiply(db).unwrap().multiply(dg).unwrap().trace();
                out[a][b][g] = t * 16.0;
            }
        }
    }
    out
}

/// Moyal bracket ({f, g}_⋆)_α = −(i/2ħ)·tr(D_α [F, G]).
pub fn moyal_bracket(f: &QubitFunction, g: &QubitFunction, hb: &HbarConfig) -> QubitFunction {
    let comm = weyl_to_operator(f).commutator(&weyl_to_operator(g)).unwrap();
    let factor = Complex64::new(0.0, -0.5 / hb.hbar());
    QubitFunction::from_fn(|pt| factor * comm.multiply(&phase_point_op(pt)).unwrap().trace())
}

/// Translation (T_Θ f)_α = tr(D_α Θ F Θ).
///
/// Conjugation by Z flips ε' (a shift along p), by X flips ε (along q), and
/// by Y flips both, so T_Y = T_Z ∘ T_X. Each is an involution.
pub fn translate(f: &QubitFunction, which: Pauli) -> QubitFunction {
    QubitFunction::from_fn(|pt| {
        let src = match which {
            Pauli::Z => pt.flip_eps_prime(),
            Pauli::X => pt.flip_eps(),
            Pauli::Y => pt.flip_both(),
        };
        f.value(src)
    })
}

/// Commutator derivative (∂_Θ f)_α = −i·tr(D_α [Θ, F]) = (2ħ{θ, f}_⋆)_α.
pub fn partial(f: &QubitFunction, which: Pauli) -> QubitFunction {
    let theta = pauli(which);
    let comm = theta.commutator(&weyl_to_operator(f)).unwrap();
    QubitFunction::from_fn(|pt| {
        Complex64::new(0.0, -1.0) * comm.multiply(&phase_point_op(pt)).unwrap().trace()
    })
}

/// Finite difference δ_Θ f = T_Θ f − f, with δ_q ≡ δ_X and δ_p ≡ δ_Z.
pub fn delta(f: &QubitFunction, which: DeltaDirection) -> QubitFunction {
    let axis = match which {
        DeltaDirection::Q => Pauli::X,
        DeltaDirection::P => Pauli::Z,
        DeltaDirection::Y => Pauli::Y,
    };
    translate(f, axis).sub(f)
}

/// The "classical" bracket (1/2ħ)[δ_q f · δ_p g − δ_p f · δ_q g] with
/// pointwise products — the Moyal bracket with its T_Y translation dropped,
/// equivalently −(i/2ħ)·tr(D_α Y [F, G] Y).
pub fn classical_bracket(f: &QubitFunction, g: &QubitFunction, hb: &HbarConfig) -> QubitFunction {
    let dq_f = delta(f, DeltaDirection::Q);
    let dp_f = delta(f, DeltaDirection::P);
    let dq_g = delta(g, DeltaDirection::Q);
    let dp_g = delta(g, DeltaDirection::P);
    dq_f.pointwise_mul(&dp_g)
        .sub(&dp_f.pointwise_mul(&dq_g))
        .scale(Complex64::new(0.5 / hb.hbar(), 0.0))
}

/// Cyclic Jacobi sum {f,{g,h}} + {g,{h,f}} + {h,{f,g}} for the selected
/// bracket. Zero for the Moyal bracket by construction.
pub fn jacobi_defect(
    kind: BracketKind,
    f: &QubitFunction,
    g: &QubitFunction,
    h: &QubitFunction,
    hb: &HbarConfig,
) -> QubitFunction {
    let br = |a: &QubitFunction, b: &QubitFunction| match kind {
        BracketKind::Moyal => moyal_bracket(a, b, hb),
        BracketKind::Classical => classical_bracket(a, b, hb),
    };
    br(f, &br(g, h)).add(&br(g, &br(h, f))).add(&br(h, &br(f, g)))
}

/// Checks tr(D_α Z) = 2 tr(D_α X) tr(D_α Y) and both permutations at all
/// four points (2 tr D_{εε'}X = ε', 2 tr D Y = εε', 2 tr D Z = ε).
pub fn product_trace_identity_check() -> bool {
    let (x, y, z) = (pauli(Pauli::X), pauli(Pauli::Y), pauli(Pauli::Z));
    QubitPoint::ALL.iter().all(|pt| {
        let d = phase_point_op(*pt);
        let tx = d.multiply(&x).unwrap().trace();
        let ty = d.multiply(&y).unwrap().trace();
        let tz = d.multiply(&z).unwrap().trace();
        (tz - 2.0 * tx * ty).norm() < 1e-14
            && (tx - 2.0 * ty * tz).norm() < 1e-14
            && (ty - 2.0 * tz * tx).norm() < 1e-14
    })
}
