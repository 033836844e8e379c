//! Bridge between the discrete bracket and the continuum Moyal product.
//!
//! On exponential (holonomic) observables f = e^{iλ₁q}, g = e^{iλ₂p} every
//! derivative in the continuum Moyal series is an analytic scalar, so the
//! series can be summed term by term:
//!
//! f ⋆ g = Σ_n (1/n!) (iħ/2)^n Σ_k (−1)^k C(n,k) (∂_p^k ∂_q^{n−k} f)(∂_p^{n−k} ∂_q^k g),
//!
//! and the bracket (f⋆g − g⋆f)/(iħ) converges to −(2/ħ)·sin(ħλ₁λ₂/2)·f·g.
//! With ħλ₁λ₂/2 = π/d this is exactly the coefficient appearing in the
//! discrete bracket of the lattice coordinate pair, exhibiting 1/d as an
//! effective Planck constant. No general continuum function representation
//! is built; the claim is about this observable class only.

use num_complex::Complex64;
use thiserror::Error;

use crate::prime::{self, PrimeDim};
use crate::HbarConfig;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SeriesError {
    #[error("series not converged at order {order} (last term {last_term:.3e}); retry with max_order ≥ {suggested}")]
    NotConverged { order: usize, last_term: f64, suggested: usize },
}

/// Wavenumbers of the pair e^{iλ₁q}, e^{iλ₂p}. Only the product λ₁λ₂ enters
/// the bracket (the effective λ² of the dimensional-analysis convention).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolonomicParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub hbar: f64,
}

impl HolonomicParams {
    pub fn new(lambda1: f64, lambda2: f64, hbar: f64) -> Self {
        assert!(lambda1.is_finite() && lambda2.is_finite());
        assert!(hbar > 0.0 && hbar.is_finite());
        Self { lambda1, lambda2, hbar }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTruncation {
    pub max_order: usize,
}

impl Default for SeriesTruncation {
    fn default() -> Self {
        Self { max_order: 40 }
    }
}

fn binomial_u128(n: usize, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// One exponential factor with its analytic derivative scalars: the ratio
/// (∂_p^i ∂_q^j F)/F is zero whenever the factor lacks that coordinate and
/// (iλ)^k otherwise.
#[derive(Clone, Copy)]
enum Holonomic {
    QExp(f64),
    PExp(f64),
}

impl Holonomic {
    fn deriv(self, p_order: usize, q_order: usize) -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        match self {
            Holonomic::QExp(l) if p_order == 0 => (i * l).powu(q_order as u32),
            Holonomic::PExp(l) if q_order == 0 => (i * l).powu(p_order as u32),
            _ => Complex64::new(0.0, 0.0),
        }
    }
}

/// One truncation of the star product of two holonomic factors, divided by
/// their pointwise product. Evaluated literally as the displayed double sum
/// with exact integer binomials; the factor (iħ/2)^n/n! is built
/// incrementally so no factorial is ever materialised.
fn star_series_scalar(
    first: Holonomic,
    second: Holonomic,
    hbar: f64,
    max_order: usize,
) -> (Complex64, f64) {
    let i = Complex64::new(0.0, 1.0);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut last_term = 0.0;
    let mut prefactor = Complex64::new(1.0, 0.0);
    for n in 0..=max_order {
        if n > 0 {
            prefactor *= i * hbar / (2.0 * n as f64);
        }
        let mut inner = Complex64::new(0.0, 0.0);
        for k in 0..=n {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            inner += sign
                * binomial_u128(n, k) as f64
                * first.deriv(k, n - k)
                * second.deriv(n - k, k);
        }
        let term = prefactor * inner;
        acc += term;
        last_term = term.norm();
    }
    (acc, last_term)
}

/// The scalar C in {e^{iλ₁q}, e^{iλ₂p}}_{⋆st} = C · e^{iλ₁q} e^{iλ₂p},
/// evaluated from the truncated series. Converges to −(2/ħ)·sin(ħλ₁λ₂/2).
pub fn continuum_moyal_bracket_exponentials(
    params: &HolonomicParams,
    trunc: &SeriesTruncation,
) -> Result<Complex64, SeriesError> {
    assert!(trunc.max_order >= 1);
    let f = Holonomic::QExp(params.lambda1);
    let g = Holonomic::PExp(params.lambda2);
    let (fg, tail_fg) = star_series_scalar(f, g, params.hbar, trunc.max_order);
    let (gf, tail_gf) = star_series_scalar(g, f, params.hbar, trunc.max_order);

    let x = (params.hbar * params.lambda1 * params.lambda2 / 2.0).abs();
    let tail = tail_fg.max(tail_gf).max(next_term_bound(x, trunc.max_order));
    if tail > 1e-13 {
        return Err(SeriesError::NotConverged {
            order: trunc.max_order,
            last_term: tail,
            suggested: suggested_order(x),
        });
    }
    Ok((fg - gf) / (Complex64::new(0.0, 1.0) * params.hbar))
}

fn next_term_bound(x: f64, order: usize) -> f64 {
    // |x|^{order+1} / (order+1)! via logs, safe against overflow
    let n = order as f64 + 1.0;
    let ln = n * x.max(1e-300).ln() - ln_factorial(order + 1);
    ln.exp()
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

fn suggested_order(x: f64) -> usize {
    let mut n = 1;
    while next_term_bound(x, n) > 1e-15 && n < 1000 {
        n += 1;
    }
    n + 2
}

/// Closed form −(2/ħ)·sin(ħλ₁λ₂/2), the limit of the truncated series.
pub fn continuum_bracket_closed_form(params: &HolonomicParams) -> f64 {
    -(2.0 / params.hbar) * (params.hbar * params.lambda1 * params.lambda2 / 2.0).sin()
}

/// Side-by-side comparison of the continuum and discrete bracket
/// coefficients at the correspondence point ħλ₁λ₂/2 = π/d.
#[derive(Debug, Clone)]
pub struct MatchReport {
    pub d: usize,
    pub hbar: f64,
    /// The product λ₁λ₂ = 2π/(ħd) fixed by the correspondence, which also
    /// makes e^{iħλ} equal the lattice root of unity ω.
    pub lambda_product: f64,
    /// Series evaluation at the default truncation.
    pub continuum_series: Complex64,
    /// −(2/ħ)·sin(π/d).
    pub continuum_closed: f64,
    /// Coefficient κ in {x, z}_⋆ = κ·x·z on the lattice, from the operator
    /// commutator. The (z, x) ordering carries the opposite sign: on the
    /// lattice the positively-oriented coordinate pair realises +(2/ħ)sin(π/d),
    /// matching the qubit value {q,p}_⋆ = +2qp/ħ at the formal point d = 2.
    pub discrete: f64,
    /// |continuum_closed − discrete|.
    pub difference: f64,
    /// |e^{iħλ} − ω| with λ = λ₁λ₂ treated as the effective squared
    /// wavenumber of the convention λ² = λ₁λ₂.
    pub omega_deviation: f64,
}

/// Evaluates both sides of the discrete↔continuum correspondence at prime d.
pub fn discrete_continuum_match(dim: &PrimeDim, hbar: f64) -> Result<MatchReport, SeriesError> {
    let d = dim.d();
    let lambda_product = 2.0 * std::f64::consts::PI / (hbar * d as f64);
    let params = HolonomicParams::new(lambda_product, 1.0, hbar);
    let continuum_series = continuum_moyal_bracket_exponentials(&params, &SeriesTruncation::default())?;
    let continuum_closed = continuum_bracket_closed_form(&params);

    // discrete side: the actual star-commutator bracket of the coordinate
    // pair, normalised by the pointwise product x·z
    let hb = HbarConfig::new(hbar);
    let z = prime::space_coordinate(dim);
    let x = prime::momentum_coordinate(dim);
    let bracket = prime::moyal_bracket(dim, &x, &z, &hb);
    let xz = x.pointwise_mul(&z);
    let p0 = dim.modint(0);
    let discrete = (bracket.value(p0, p0) / xz.value(p0, p0)).re;

    let omega_dev = (Complex64::from_polar(1.0, hbar * lambda_product) - dim.omega()).norm();
    Ok(MatchReport {
        d,
        hbar,
        lambda_product,
        continuum_series,
        continuum_closed,
        discrete,
        difference: (continuum_closed - discrete).abs(),
        omega_deviation: omega_dev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_matches_closed_form() {
        for d in [3usize, 5, 7, 31] {
            let x = std::f64::consts::PI / d as f64;
            let params = HolonomicParams::new(1.0, 2.0 * x, 1.0);
            let c = continuum_moyal_bracket_exponentials(&params, &SeriesTruncation::default())
                .unwrap();
            let want = -2.0 * x.sin();
            assert!((c.re - want).abs() < 1e-13, "d={d}: {} vs {want}", c.re);
            assert!(c.im.abs() < 1e-13);
        }
    }

    #[test]
    fn zero_wavenumber_gives_zero() {
        let params = HolonomicParams::new(0.0, 1.7, 1.0);
        let c = continuum_moyal_bracket_exponentials(&params, &SeriesTruncation::default()).unwrap();
        assert!(c.norm() < 1e-15);
    }

    #[test]
    fn unit_params_value() {
        // ħ = 1, λ₁ = λ₂ = 1: C = −2 sin(1/2)
        let params = HolonomicParams::new(1.0, 1.0, 1.0);
        let c = continuum_moyal_bracket_exponentials(&params, &SeriesTruncation::default()).unwrap();
        assert!((c.re + 2.0 * 0.5f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn poisson_limit_as_hbar_vanishes() {
        // C(ħ) = −λ₁λ₂ (1 − (ħλ₁λ₂)²/24 + …): Richardson over a decade ratio
        // removes the ħ² term
        let (l1, l2) = (1.3, 0.7);
        let c_at = |hbar: f64| {
            continuum_moyal_bracket_exponentials(
                &HolonomicParams::new(l1, l2, hbar),
                &SeriesTruncation::default(),
            )
            .unwrap()
            .re
        };
        let poisson = -l1 * l2;
        let errs: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&h| (c_at(h) - poisson).abs()).collect();
        assert!(errs[0] < 1e-4 && errs[1] < 1e-6 && errs[2] < 1e-8);
        // quadratic decay in ħ
        assert!((errs[0] / errs[1] - 100.0).abs() < 1.0);
        let richardson = (100.0 * c_at(1e-3) - c_at(1e-2)) / 99.0;
        assert!((richardson - poisson).abs() < 1e-12);
    }

    #[test]
    fn partial_sums_bracket_the_limit() {
        // alternating-series behaviour for |ħλ₁λ₂/2| < π: successive odd
        // truncations straddle the closed-form value
        let x = std::f64::consts::PI / 3.0;
        let params = HolonomicParams::new(1.0, 2.0 * x, 1.0);
        let limit = continuum_bracket_closed_form(&params);
        let mut sums = Vec::new();
        for order in [1usize, 3, 5, 7, 9] {
            // small truncations are legitimately "not converged"; read the
            // raw partial sum instead of the validated value
            let f = Holonomic::QExp(params.lambda1);
            let g = Holonomic::PExp(params.lambda2);
            let (fg, _) = star_series_scalar(f, g, params.hbar, order);
            let (gf, _) = star_series_scalar(g, f, params.hbar, order);
            sums.push(((fg - gf) / (Complex64::new(0.0, 1.0) * params.hbar)).re);
        }
        for w in sums.windows(2) {
            assert!((w[0] - limit).signum() != (w[1] - limit).signum());
        }
    }

    #[test]
    fn non_convergence_reports_suggested_order() {
        let params = HolonomicParams::new(8.0, 8.0, 1.0); // x = 32, far beyond order 40
        let err = continuum_moyal_bracket_exponentials(&params, &SeriesTruncation { max_order: 40 })
            .unwrap_err();
        match err {
            SeriesError::NotConverged { suggested, .. } => assert!(suggested > 40),
        }
    }

    #[test]
    fn discrete_match_at_small_primes() {
        let dim = PrimeDim::new(3).unwrap();
        let report = discrete_continuum_match(&dim, 1.0).unwrap();
        // both coefficients equal −2 sin(π/3) = −√3
        assert!((report.continuum_closed + 3f64.sqrt()).abs() < 1e-12);
        assert!((report.discrete + 3f64.sqrt()).abs() < 1e-12);
        assert!(report.difference < 1e-12);
        assert!(report.omega_deviation < 1e-12);
        assert!((report.continuum_series.re - report.continuum_closed).abs() < 1e-12);
    }

    #[test]
    fn effective_planck_constant_scales_as_inverse_d() {
        // coefficient → −2π/(ħd)·(1 + O(d⁻²)) for large d
        for d in [31usize, 101] {
            let dim = PrimeDim::new(d).unwrap();
            let report = discrete_continuum_match(&dim, 1.0).unwrap();
            let leading = -2.0 * std::f64::consts::PI / d as f64;
            let rel = (report.discrete - leading).abs() / leading.abs();
            assert!(rel < 2.0 / (d * d) as f64, "d={d} rel={rel}");
        }
    }
}
