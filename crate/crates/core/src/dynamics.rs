//! Hamiltonian evolution on both phase spaces.
//!
//! Ground truth is von Neumann evolution dρ/dt = −(i/ħ)[H, ρ] realised with
//! the matrix exponential; the phase-space ordinary differential equation
//! dρ/dt = d·{h, ρ} (with h the Weyl function of H and d the Hilbert-space
//! dimension) is integrated with fixed-step RK4 and validated against it.
//! Swapping in the classical bracket gives the damped comparison dynamics.

use num_complex::Complex64;
use thiserror::Error;

use crate::matrix::{ComplexMatrix, Tolerance};
use crate::prime::{self, PhaseGridFunction, PrimeDim};
use crate::qubit::{self, Pauli, QubitFunction};
use crate::{BracketKind, HbarConfig};

/// Distributions below this threshold count as genuinely negative rather
/// than integrator noise.
pub const NEGATIVITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Error)]
pub enum DynamicsError {
    #[error("hamiltonian is not Hermitian (max deviation {0:.3e})")]
    NonHermitian(f64),
    #[error("dimension mismatch: hamiltonian is {ham}×{ham} but the state lives on dimension {state}")]
    DimMismatch { ham: usize, state: usize },
    #[error("t_max must be positive, got {0}")]
    InvalidTime(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("probability drift {drift:.3e} at t = {t:.4} exceeds 10× the dynamic tolerance; reduce the step")]
    ExcessiveDrift { t: f64, drift: f64 },
}

/// Hamiltonian selector.
#[derive(Debug, Clone)]
pub enum Hamiltonian {
    /// H = X, the only nontrivial qubit Hamiltonian up to unitaries and
    /// scaling. Generates motion along the q axis.
    QubitX,
    /// Free motion H = (X + X†)/2 at odd prime d, the lattice stand-in for
    /// p²: X itself is unitary but not Hermitian.
    PrimeFreeMotion(PrimeDim),
    /// Arbitrary Hermitian matrix.
    Custom(ComplexMatrix),
}

impl Hamiltonian {
    pub fn matrix(&self) -> ComplexMatrix {
        match self {
            Hamiltonian::QubitX => qubit::pauli(Pauli::X),
            Hamiltonian::PrimeFreeMotion(dim) => {
                let (x, _) = prime::shift_clock_ops(dim);
                x.add(&x.dagger()).unwrap().scale(Complex64::new(0.5, 0.0))
            }
            Hamiltonian::Custom(m) => m.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Hamiltonian::QubitX => 2,
            Hamiltonian::PrimeFreeMotion(dim) => dim.d(),
            Hamiltonian::Custom(m) => m.dim(),
        }
    }

    fn validate(&self, tol: f64) -> Result<ComplexMatrix, DynamicsError> {
        let m = self.matrix();
        let dev = m.max_abs_diff(&m.dagger());
        if dev > tol {
            return Err(DynamicsError::NonHermitian(dev));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// ρ(t) = e^{−iHt/ħ} ρ₀ e^{+iHt/ħ} computed on the operator side, then
    /// mapped to the lattice per snapshot. No accumulation error.
    ExactUnitary,
    /// Fixed-step fourth-order Runge–Kutta on the phase-space ODE.
    Rk4,
}

#[derive(Debug, Clone)]
pub struct IntegratorConfig {
    pub step: f64,
    pub method: Method,
    pub bracket: BracketKind,
    pub hbar: HbarConfig,
    /// Record every n-th step; bounds the trace size for export.
    pub snapshot_stride: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            step: 1e-3,
            method: Method::ExactUnitary,
            bracket: BracketKind::Moyal,
            hbar: HbarConfig::default(),
            snapshot_stride: 10,
        }
    }
}

/// Time series of phase-space snapshots with the conserved line-sum ledger.
#[derive(Debug, Clone)]
pub struct EvolutionTrace<F> {
    pub times: Vec<f64>,
    pub snapshots: Vec<F>,
    /// Per-time list of line sums (fixed-momentum trajectory sums).
    pub conserved: Vec<Vec<Complex64>>,
    /// First time any quasi-probability dipped below −[`NEGATIVITY_TOL`].
    pub negativity_onset: Option<f64>,
}

/// The slice view and line sums the integrator needs from a distribution.
pub trait PhaseDistribution: Clone {
    fn components(&self) -> &[Complex64];
    fn components_mut(&mut self) -> &mut [Complex64];
    fn line_sums(&self) -> Vec<Complex64>;
}

impl PhaseDistribution for QubitFunction {
    fn components(&self) -> &[Complex64] {
        &self.values()[..]
    }

    fn components_mut(&mut self) -> &mut [Complex64] {
        self.values_mut()
    }

    fn line_sums(&self) -> Vec<Complex64> {
        self.line_sums().to_vec()
    }
}

impl PhaseDistribution for PhaseGridFunction {
    fn components(&self) -> &[Complex64] {
        self.values()
    }

    fn components_mut(&mut self) -> &mut [Complex64] {
        self.values_mut()
    }

    fn line_sums(&self) -> Vec<Complex64> {
        PhaseGridFunction::line_sums(self)
    }
}

impl<F: PhaseDistribution> EvolutionTrace<F> {
    /// Largest deviation of any conserved line sum from its initial value.
    pub fn max_line_drift(&self) -> f64 {
        let first = match self.conserved.first() {
            Some(v) => v,
            None => return 0.0,
        };
        self.conserved
            .iter()
            .flat_map(|row| row.iter().zip(first).map(|(a, b)| (a - b).norm()))
            .fold(0.0, f64::max)
    }

    /// Smallest real part over all snapshots and lattice points.
    pub fn min_value(&self) -> f64 {
        self.snapshots
            .iter()
            .flat_map(|s| s.components().iter().map(|z| z.re))
            .fold(f64::INFINITY, f64::min)
    }
}

/// First time at which any snapshot value drops below −tol.
pub fn negativity_onset<F: PhaseDistribution>(trace: &EvolutionTrace<F>, tol: f64) -> Option<f64> {
    trace
        .times
        .iter()
        .zip(&trace.snapshots)
        .find(|(_, snap)| snap.components().iter().any(|z| z.re < -tol))
        .map(|(t, _)| *t)
}

/// Phase-space right-hand side for the qubit: 2·{h, ρ} under the configured
/// bracket, the lattice transport of −(i/ħ)[H, ρ].
pub fn qubit_rhs(
    ham: &Hamiltonian,
    rho: &QubitFunction,
    cfg: &IntegratorConfig,
) -> Result<QubitFunction, DynamicsError> {
    let h_mat = ham.validate(Tolerance::default().algebraic)?;
    if h_mat.dim() != 2 {
        return Err(DynamicsError::DimMismatch { ham: h_mat.dim(), state: 2 });
    }
    let h_fn = qubit::weyl_to_function(&h_mat).expect("2x2 checked");
    let two = Complex64::new(2.0, 0.0);
    Ok(match cfg.bracket {
        BracketKind::Moyal => qubit::moyal_bracket(&h_fn, rho, &cfg.hbar).scale(two),
        BracketKind::Classical => qubit::classical_bracket(&h_fn, rho, &cfg.hbar).scale(two),
    })
}

/// Phase-space right-hand side at odd prime d: d·{h, ρ} under the configured
/// bracket.
pub fn prime_rhs(
    dim: &PrimeDim,
    ham: &Hamiltonian,
    rho: &PhaseGridFunction,
    cfg: &IntegratorConfig,
) -> Result<PhaseGridFunction, DynamicsError> {
    let h_mat = ham.validate(Tolerance::default().algebraic)?;
    if h_mat.dim() != dim.d() {
        return Err(DynamicsError::DimMismatch { ham: h_mat.dim(), state: dim.d() });
    }
    let h_fn = prime::weyl_to_function(dim, &h_mat).expect("dims checked");
    let scale = Complex64::new(dim.d() as f64, 0.0);
    Ok(match cfg.bracket {
        BracketKind::Moyal => prime::moyal_bracket(dim, &h_fn, rho, &cfg.hbar).scale(scale),
        BracketKind::Classical => prime::classical_bracket(dim, &h_fn, rho, &cfg.hbar).scale(scale),
    })
}

/// Closed form of the free-motion Moyal right-hand side,
///
/// dρ(p,q)/dt = (1/ħ) sin(2πp/d) (ρ(p, q+½) − ρ(p, q−½)),
///
/// with ½ = (d+1)/2 so the shift lands on the far side of the lattice. Must
/// match [`prime_rhs`] with H = (X+X†)/2.
pub fn free_motion_rhs_closed_form(
    dim: &PrimeDim,
    rho: &PhaseGridFunction,
    hbar: &HbarConfig,
) -> PhaseGridFunction {
    let h = dim.modint(dim.half() as i64);
    let inv_hbar = 1.0 / hbar.hbar();
    PhaseGridFunction::from_fn(dim, |p, q| {
        let prefactor = (2.0 * std::f64::consts::PI * p.value() as f64 / dim.d() as f64).sin();
        inv_hbar * prefactor * (rho.value(p, q + h) - rho.value(p, q - h))
    })
}

fn lin_comb<F: PhaseDistribution>(base: &F, terms: &[(f64, &F)]) -> F {
    let mut out = base.clone();
    let slots = out.components_mut();
    for (c, f) in terms {
        for (slot, v) in slots.iter_mut().zip(f.components()) {
            *slot += Complex64::new(*c, 0.0) * v;
        }
    }
    out
}

fn run_evolution<F: PhaseDistribution>(
    rho0: &F,
    t_max: f64,
    cfg: &IntegratorConfig,
    rhs: impl Fn(&F) -> F,
    exact: Option<impl Fn(f64) -> F>,
) -> Result<EvolutionTrace<F>, DynamicsError> {
    if !(t_max > 0.0) {
        return Err(DynamicsError::InvalidTime(t_max));
    }
    if cfg.step <= 0.0 || cfg.snapshot_stride == 0 {
        return Err(DynamicsError::InvalidConfig("step and snapshot stride must be positive"));
    }
    let n_steps = (t_max / cfg.step).round().max(1.0) as usize;
    let total0: Complex64 = rho0.components().iter().sum();
    let drift_limit = 10.0 * Tolerance::default().dynamic;

    let mut times = Vec::new();
    let mut snapshots: Vec<F> = Vec::new();

    match (cfg.method, &exact) {
        (Method::ExactUnitary, Some(ex)) => {
            let mut k = 0;
            while k <= n_steps {
                let t = k as f64 * cfg.step;
                times.push(t);
                snapshots.push(ex(t));
                k += cfg.snapshot_stride;
            }
            if *times.last().unwrap() < n_steps as f64 * cfg.step {
                let t = n_steps as f64 * cfg.step;
                times.push(t);
                snapshots.push(ex(t));
            }
        }
        (Method::ExactUnitary, None) => {
            return Err(DynamicsError::InvalidConfig(
                "the classical bracket has no unitary realisation; use RK4",
            ));
        }
        (Method::Rk4, _) => {
            let mut state = rho0.clone();
            times.push(0.0);
            snapshots.push(state.clone());
            for k in 1..=n_steps {
                let dt = cfg.step;
                let k1 = rhs(&state);
                let k2 = rhs(&lin_comb(&state, &[(dt / 2.0, &k1)]));
                let k3 = rhs(&lin_comb(&state, &[(dt / 2.0, &k2)]));
                let k4 = rhs(&lin_comb(&state, &[(dt, &k3)]));
                state = lin_comb(
                    &state,
                    &[
                        (dt / 6.0, &k1),
                        (dt / 3.0, &k2),
                        (dt / 3.0, &k3),
                        (dt / 6.0, &k4),
                    ],
                );
                let total: Complex64 = state.components().iter().sum();
                let drift = (total - total0).norm();
                if drift > drift_limit {
                    return Err(DynamicsError::ExcessiveDrift { t: k as f64 * cfg.step, drift });
                }
                if k % cfg.snapshot_stride == 0 || k == n_steps {
                    times.push(k as f64 * cfg.step);
                    snapshots.push(state.clone());
                }
            }
        }
    }

    let conserved = snapshots.iter().map(|s| s.line_sums()).collect();
    let mut trace = EvolutionTrace { times, snapshots, conserved, negativity_onset: None };
    trace.negativity_onset = negativity_onset(&trace, NEGATIVITY_TOL);
    Ok(trace)
}

/// Evolves a qubit distribution under the given Hamiltonian.
///
/// Exact-unitary mode conjugates the reconstructed density operator with
/// e^{−iHt/ħ}; RK4 integrates 2·{h, ρ} in place. The two agree within the
/// dynamic tolerance for Moyal dynamics.
pub fn evolve_qubit(
    ham: &Hamiltonian,
    rho0: &QubitFunction,
    t_max: f64,
    cfg: &IntegratorConfig,
) -> Result<EvolutionTrace<QubitFunction>, DynamicsError> {
    let h_mat = ham.validate(Tolerance::default().algebraic)?;
    if h_mat.dim() != 2 {
        return Err(DynamicsError::DimMismatch { ham: h_mat.dim(), state: 2 });
    }
    let rhs_cfg = cfg.clone();
    let ham_rhs = ham.clone();
    let rhs = move |f: &QubitFunction| qubit_rhs(&ham_rhs, f, &rhs_cfg).expect("validated");

    let exact = if matches!(cfg.bracket, BracketKind::Moyal) {
        let r0 = qubit::weyl_to_operator(rho0);
        let hbar = cfg.hbar.hbar();
        let h_mat = h_mat.clone();
        Some(move |t: f64| {
            let u = h_mat.scale(Complex64::new(0.0, -t / hbar)).expm().expect("finite");
            let rho_t = u.multiply(&r0).unwrap().multiply(&u.dagger()).unwrap();
            qubit::weyl_to_function(&rho_t).expect("2x2")
        })
    } else {
        None
    };
    run_evolution(rho0, t_max, cfg, rhs, exact)
}

/// Evolves a prime-d distribution under the given Hamiltonian.
pub fn evolve_prime(
    dim: &PrimeDim,
    ham: &Hamiltonian,
    rho0: &PhaseGridFunction,
    t_max: f64,
    cfg: &IntegratorConfig,
) -> Result<EvolutionTrace<PhaseGridFunction>, DynamicsError> {
    let h_mat = ham.validate(Tolerance::default().algebraic)?;
    if h_mat.dim() != dim.d() {
        return Err(DynamicsError::DimMismatch { ham: h_mat.dim(), state: dim.d() });
    }
    let rhs_cfg = cfg.clone();
    let ham_rhs = ham.clone();
    let dim_rhs = dim.clone();
    let rhs = move |f: &PhaseGridFunction| {
        prime_rhs(&dim_rhs, &ham_rhs, f, &rhs_cfg).expect("validated")
    };

    let exact = if matches!(cfg.bracket, BracketKind::Moyal) {
        let r0 = prime::weyl_to_operator(dim, rho0);
        let hbar = cfg.hbar.hbar();
        let dim_ex = dim.clone();
        let h_mat = h_mat.clone();
        Some(move |t: f64| {
            let u = h_mat.scale(Complex64::new(0.0, -t / hbar)).expm().expect("finite");
            let rho_t = u.multiply(&r0).unwrap().multiply(&u.dagger()).unwrap();
            prime::weyl_to_function(&dim_ex, &rho_t).expect("dims checked")
        })
    } else {
        None
    };
    run_evolution(rho0, t_max, cfg, rhs, exact)
}

/// The damped qubit comparison dynamics dρ/dt = 2{h, ρ}_cl under H = X.
/// Requires a classical-bracket configuration.
pub fn classical_evolution_qubit(
    rho0: &QubitFunction,
    t_max: f64,
    cfg: &IntegratorConfig,
) -> Result<EvolutionTrace<QubitFunction>, DynamicsError> {
    if !matches!(cfg.bracket, BracketKind::Classical) {
        return Err(DynamicsError::InvalidConfig(
            "classical_evolution_qubit needs bracket = Classical",
        ));
    }
    evolve_qubit(&Hamiltonian::QubitX, rho0, t_max, cfg)
}

/// Result of fitting x(t) ≈ amplitude·cos(ω t + phase) + offset.
#[derive(Debug, Clone, Copy)]
pub struct CosineFit {
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
    pub max_residual: f64,
}

/// Least-squares cosine fit at fixed angular frequency and offset. The phase
/// is free: the closed-form solutions allow a sine component too.
pub fn fit_cosine(times: &[f64], values: &[f64], omega: f64, offset: f64) -> CosineFit {
    assert_eq!(times.len(), values.len());
    let (mut scc, mut scs, mut sss, mut scy, mut ssy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&t, &y) in times.iter().zip(values) {
        let (s, c) = (omega * t).sin_cos();
        let y0 = y - offset;
        scc += c * c;
        scs += c * s;
        sss += s * s;
        scy += c * y0;
        ssy += s * y0;
    }
    let det = scc * sss - scs * scs;
    let (a, b) = if det.abs() > 1e-30 {
        ((scy * sss - ssy * scs) / det, (ssy * scc - scy * scs) / det)
    } else {
        (0.0, 0.0)
    };
    let max_residual = times
        .iter()
        .zip(values)
        .map(|(&t, &y)| (a * (omega * t).cos() + b * (omega * t).sin() + offset - y).abs())
        .fold(0.0, f64::max);
    CosineFit { amplitude: a.hypot(b), phase: b.atan2(a) * -1.0, offset, max_residual }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::{bloch_probabilities, BlochState, QubitPoint};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn y_eigenstate() -> QubitFunction {
        bloch_probabilities(&BlochState::new(0.0, 1.0, 0.0))
    }

    #[test]
    fn rhs_stationary_on_maximally_mixed() {
        let mixed = bloch_probabilities(&BlochState::new(0.0, 0.0, 0.0));
        let cfg = IntegratorConfig::default();
        let r = qubit_rhs(&Hamiltonian::QubitX, &mixed, &cfg).unwrap();
        assert!(r.max_abs() < 1e-14);
    }

    #[test]
    fn qubit_rhs_couples_the_other_line() {
        // dρ_{++}/dt = ±(ρ_{+-} − ρ_{--}) with unit coefficient at ħ = 1;
        // the operator law fixes the sign to ρ_{--} − ρ_{+-}.
        let cfg = IntegratorConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = QubitFunction::from_fn(|_| c(rng.gen_range(0.0..1.0), 0.0));
        let r = qubit_rhs(&Hamiltonian::QubitX, &rho, &cfg).unwrap();
        let want_pp = rho.value(QubitPoint::MM) - rho.value(QubitPoint::PM);
        assert!((r.value(QubitPoint::PP) - want_pp).norm() < 1e-13);
        let want_mp = rho.value(QubitPoint::PM) - rho.value(QubitPoint::MM);
        assert!((r.value(QubitPoint::MP) - want_mp).norm() < 1e-13);
    }

    #[test]
    fn non_hermitian_hamiltonian_rejected() {
        let bad = ComplexMatrix::from_fn(2, |i, j| c((i + 2 * j) as f64, 1.0));
        let cfg = IntegratorConfig::default();
        let rho = y_eigenstate();
        assert!(matches!(
            evolve_qubit(&Hamiltonian::Custom(bad), &rho, 1.0, &cfg),
            Err(DynamicsError::NonHermitian(_))
        ));
    }

    #[test]
    fn qubit_oscillation_frequency_two() {
        // ρ_{++}(t) = K cos(2t + φ) + A/2 along the exact trajectory
        let cfg = IntegratorConfig::default();
        let trace = evolve_qubit(&Hamiltonian::QubitX, &y_eigenstate(), 7.0, &cfg).unwrap();
        let values: Vec<f64> = trace
            .snapshots
            .iter()
            .map(|s| s.value(QubitPoint::PP).re)
            .collect();
        let a0 = trace.conserved[0][1].re; // ε' = + line
        let fit = fit_cosine(&trace.times, &values, 2.0, a0 / 2.0);
        assert!(fit.max_residual < 1e-10, "residual {}", fit.max_residual);
        assert!((fit.amplitude - 2f64.sqrt() / 4.0).abs() < 1e-10);
        // a wrong frequency fits badly
        let bad = fit_cosine(&trace.times, &values, 1.0, a0 / 2.0);
        assert!(bad.max_residual > 1e-2);
    }

    #[test]
    fn qubit_line_sums_constant() {
        let cfg = IntegratorConfig::default();
        let trace = evolve_qubit(&Hamiltonian::QubitX, &y_eigenstate(), 5.0, &cfg).unwrap();
        assert!(trace.max_line_drift() < 1e-12);
        // snapshot normalisation preserved
        for s in &trace.snapshots {
            assert!((s.sum() - c(1., 0.)).norm() < 1e-12);
        }
    }

    #[test]
    fn rk4_matches_exact_unitary() {
        let exact_cfg = IntegratorConfig::default();
        let rk4_cfg = IntegratorConfig { method: Method::Rk4, ..Default::default() };
        let rho0 = y_eigenstate();
        let a = evolve_qubit(&Hamiltonian::QubitX, &rho0, 5.0, &exact_cfg).unwrap();
        let b = evolve_qubit(&Hamiltonian::QubitX, &rho0, 5.0, &rk4_cfg).unwrap();
        assert_eq!(a.times.len(), b.times.len());
        let mut worst = 0.0f64;
        for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
            worst = worst.max(sa.max_abs_diff(sb));
        }
        assert!(worst < 1e-9, "worst {worst}");
    }

    #[test]
    fn negativity_of_y_eigenstate() {
        let cfg = IntegratorConfig::default();
        let trace = evolve_qubit(&Hamiltonian::QubitX, &y_eigenstate(), 4.0, &cfg).unwrap();
        let onset = trace.negativity_onset.expect("quasi-probabilities must go negative");
        assert!(onset > 0.0 && onset < std::f64::consts::FRAC_PI_2);
        // trough value over a full period is (1 − √2)/4
        let trough = trace.min_value();
        assert!((trough - (1.0 - 2f64.sqrt()) / 4.0).abs() < 2e-5, "trough {trough}");
    }

    #[test]
    fn stationary_state_never_goes_negative() {
        let cfg = IntegratorConfig::default();
        let mixed = bloch_probabilities(&BlochState::new(0.0, 0.0, 0.0));
        let trace = evolve_qubit(&Hamiltonian::QubitX, &mixed, 3.0, &cfg).unwrap();
        assert!(trace.negativity_onset.is_none());
        assert!(negativity_onset(&trace, 1e-9).is_none());
    }

    #[test]
    fn unphysical_corner_state_goes_negative_immediately() {
        // ρ_{++} = 1 with the rest 0: ρ_{--}(t) = −sin(2t)/2 under the
        // operator law, negative from the first instant.
        let corner = bloch_probabilities(&BlochState::new(1.0, 1.0, 1.0));
        let cfg = IntegratorConfig::default();
        let trace = evolve_qubit(&Hamiltonian::QubitX, &corner, 1.0, &cfg).unwrap();
        let onset = trace.negativity_onset.unwrap();
        assert!(onset <= 3.0 * cfg.step * cfg.snapshot_stride as f64);
        let idx = trace.times.iter().position(|&t| t >= 0.5).unwrap();
        let got = trace.snapshots[idx].value(QubitPoint::MM).re;
        let want = -(2.0 * trace.times[idx]).sin() / 2.0;
        assert!((got - want).abs() < 1e-10);
    }

    #[test]
    fn classical_evolution_damps_and_decouples() {
        let cfg = IntegratorConfig {
            method: Method::Rk4,
            bracket: BracketKind::Classical,
            ..Default::default()
        };
        // balanced start on the ε' = − line so that pair sits at its fixed
        // point; the ε' = + pair relaxes exponentially
        let rho0 = QubitFunction::from_values([c(0.2, 0.), c(0.1, 0.), c(0.2, 0.), c(0.5, 0.)]);
        let trace = classical_evolution_qubit(&rho0, 3.0, &cfg).unwrap();
        let a = 0.6; // ρ_{++} + ρ_{-+}
        let last = trace.snapshots.last().unwrap();
        let want = a / 2.0 + (0.5 - a / 2.0) * (-2.0 * 3.0f64).exp();
        assert!((last.value(QubitPoint::PP).re - want).abs() < 1e-8);
        // relaxation toward A/2
        assert!((last.value(QubitPoint::PP).re - a / 2.0).abs() < 1e-2);
        // all values stayed positive for this initial data
        assert!(trace.negativity_onset.is_none());

        // decoupling: perturbing the ε' = − pair leaves the + pair alone
        let rho1 = QubitFunction::from_values([c(0.3, 0.), c(0.1, 0.), c(0.1, 0.), c(0.5, 0.)]);
        let trace1 = classical_evolution_qubit(&rho1, 3.0, &cfg).unwrap();
        for (s0, s1) in trace.snapshots.iter().zip(&trace1.snapshots) {
            assert!((s0.value(QubitPoint::PP) - s1.value(QubitPoint::PP)).norm() < 1e-12);
            assert!((s0.value(QubitPoint::MP) - s1.value(QubitPoint::MP)).norm() < 1e-12);
        }

        // requires the classical bracket
        let bad = IntegratorConfig::default();
        assert!(matches!(
            classical_evolution_qubit(&rho0, 1.0, &bad),
            Err(DynamicsError::InvalidConfig(_))
        ));
    }

    #[test]
    fn classical_exact_unitary_is_rejected() {
        let cfg = IntegratorConfig { bracket: BracketKind::Classical, ..Default::default() };
        assert!(matches!(
            evolve_qubit(&Hamiltonian::QubitX, &y_eigenstate(), 1.0, &cfg),
            Err(DynamicsError::InvalidConfig(_))
        ));
    }

    #[test]
    fn prime_free_motion_closed_form_rhs() {
        let dim = PrimeDim::new(3).unwrap();
        let cfg = IntegratorConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = PhaseGridFunction::from_fn(&dim, |_, _| c(rng.gen_range(-1.0..1.0), 0.0));
        let via_bracket = prime_rhs(&dim, &Hamiltonian::PrimeFreeMotion(dim.clone()), &rho, &cfg).unwrap();
        let closed = free_motion_rhs_closed_form(&dim, &rho, &cfg.hbar);
        assert!(via_bracket.approx_eq(&closed, 1e-11), "dev {}", via_bracket.max_abs_diff(&closed));
    }

    #[test]
    fn prime_line_sums_conserved() {
        let dim = PrimeDim::new(5).unwrap();
        let ham = Hamiltonian::PrimeFreeMotion(dim.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut rho = PhaseGridFunction::from_fn(&dim, |_, _| c(rng.gen_range(0.0..1.0), 0.0));
        let total = rho.sum();
        rho = rho.scale(c(1.0, 0.0) / total);

        let cfg = IntegratorConfig { snapshot_stride: 100, ..Default::default() };
        let trace = evolve_prime(&dim, &ham, &rho, 2.0, &cfg).unwrap();
        assert!(trace.max_line_drift() < 1e-11);

        let rk4 = IntegratorConfig { method: Method::Rk4, snapshot_stride: 100, ..Default::default() };
        let trace_rk4 = evolve_prime(&dim, &ham, &rho, 2.0, &rk4).unwrap();
        assert!(trace_rk4.max_line_drift() < 1e-8);

        // exact and RK4 agree
        let mut worst = 0.0f64;
        for (a, b) in trace.snapshots.iter().zip(&trace_rk4.snapshots) {
            worst = worst.max(a.max_abs_diff(b));
        }
        assert!(worst < 1e-8, "worst {worst}");
    }

    #[test]
    fn purity_and_energy_constant_under_exact_evolution() {
        let cfg = IntegratorConfig::default();
        let rho0 = y_eigenstate();
        let trace = evolve_qubit(&Hamiltonian::QubitX, &rho0, 3.0, &cfg).unwrap();
        let h_fn = qubit::weyl_to_function(&qubit::pauli(Pauli::X)).unwrap();
        let purity = |f: &QubitFunction| -> f64 {
            2.0 * f.values().iter().map(|z| (z * z).re).sum::<f64>()
        };
        let energy = |f: &QubitFunction| -> f64 {
            QubitPoint::ALL.iter().map(|&p| (h_fn.value(p) * f.value(p)).re).sum()
        };
        let (p0, e0) = (purity(&rho0), energy(&rho0));
        for s in &trace.snapshots {
            assert!((purity(s) - p0).abs() < 1e-11);
            assert!((energy(s) - e0).abs() < 1e-11);
        }
    }

    #[test]
    fn second_order_equation_along_trajectory() {
        // d²ρ_{++}/dt² = 2A − 4ρ_{++} with A the conserved ε' = + line sum
        let cfg = IntegratorConfig { snapshot_stride: 1, ..Default::default() };
        let trace = evolve_qubit(&Hamiltonian::QubitX, &y_eigenstate(), 1.0, &cfg).unwrap();
        let v: Vec<f64> = trace.snapshots.iter().map(|s| s.value(QubitPoint::PP).re).collect();
        let dt = cfg.step;
        for i in 1..v.len() - 1 {
            let d2 = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (dt * dt);
            let a = trace.conserved[i][1].re;
            assert!((d2 - (2.0 * a - 4.0 * v[i])).abs() < 1e-5);
        }
    }

    #[test]
    fn invalid_time_rejected() {
        let cfg = IntegratorConfig::default();
        assert!(matches!(
            evolve_qubit(&Hamiltonian::QubitX, &y_eigenstate(), -1.0, &cfg),
            Err(DynamicsError::InvalidTime(_))
        ));
    }
}
