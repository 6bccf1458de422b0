//! Matrix-level checks on eavesdropper unitaries.
//!
//! Eve's most general action on a packet is a joint unitary on the packet
//! qubit and her probe/environment. Two structural facts are checked here:
//!
//! - A joint unitary with no qubit-flipping blocks and equal diagonal blocks,
//!   `U = [[W, 0], [0, W]]`, causes no Type 2 disturbance and leaves the probe
//!   uncorrelated with the qubit.
//! - On a Type 3 round trip, if the two legs compose to the same operator as
//!   the in-enclave evolution (`U_back·U_forward = V_next·V_now`), the
//!   interferometer sees no disturbance and the environment cannot tell a
//!   transmitted packet from a silent cycle. Conversely any environment
//!   distinguishability forces disturbance of at least (1 − √(1 − t²))/2.
//!
//! Qubit-probe vectors are ordered qubit-major: index `a·d + k`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::quantum::{Basis, QubitPreparation};
use crate::rng::{stream, Subsystem};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const UNITARY_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-12;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// max |(U†U − I)_ij|
pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let prod = m.adjoint() * m;
    let id = CMatrix::identity(m.nrows(), m.ncols());
    (prod - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_unitary(what: &'static str, m: &CMatrix) -> Result<()> {
    let deviation = unitarity_deviation(m);
    if deviation <= UNITARY_TOL {
        Ok(())
    } else {
        Err(Error::NotUnitary { what, deviation })
    }
}

/// Haar-distributed d×d unitary: QR of a complex Gaussian matrix with the
/// phases of R's diagonal folded back into Q.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let diag = r[(j, j)];
        let phase = if diag.norm() > 0.0 { diag / diag.norm() } else { c(1.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// exp(iθH) for a random Hermitian H with unit-scale spectrum; θ = 0 gives
/// the identity.
pub fn random_rotation<R: Rng + ?Sized>(d: usize, theta: f64, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let h = (&g + g.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let phases = CMatrix::from_diagonal(&DVector::from_iterator(
        d,
        eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, theta * l)),
    ));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

pub fn random_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(d, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let n = v.norm();
    v.unscale(n)
}

/// Eve's probe (plus environment) and its state before the packet arrives.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSpace {
    state: CVector,
}

impl ProbeSpace {
    pub fn new(state: CVector) -> Result<Self> {
        if state.is_empty() {
            return Err(Error::DimensionMismatch("probe dimension must be positive".into()));
        }
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!("probe state has norm {norm}, expected 1")));
        }
        Ok(Self { state })
    }

    /// |0> of a d-dimensional probe.
    pub fn ground(d: usize) -> Self {
        let mut state = CVector::zeros(d);
        state[0] = c(1.0);
        Self { state }
    }

    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        Self {
            state: random_state(d, rng),
        }
    }

    pub fn dim(&self) -> usize {
        self.state.len()
    }

    pub fn state(&self) -> &CVector {
        &self.state
    }
}

/// Joint unitary on qubit ⊗ probe, viewed as a 2×2 grid of probe operators
/// `U^{ab} = <a|U|b>`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointUnitary {
    probe_dim: usize,
    matrix: CMatrix,
}

impl JointUnitary {
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || !matrix.nrows().is_multiple_of(2) || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "joint unitary must be 2d×2d, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        check_unitary("joint unitary", &matrix)?;
        Ok(Self {
            probe_dim: matrix.nrows() / 2,
            matrix,
        })
    }

    pub fn from_blocks(u00: &CMatrix, u01: &CMatrix, u10: &CMatrix, u11: &CMatrix) -> Result<Self> {
        let d = u00.nrows();
        for b in [u00, u01, u10, u11] {
            if b.shape() != (d, d) {
                return Err(Error::DimensionMismatch("blocks must share one square shape".into()));
            }
        }
        let mut m = CMatrix::zeros(2 * d, 2 * d);
        m.view_mut((0, 0), (d, d)).copy_from(u00);
        m.view_mut((0, d), (d, d)).copy_from(u01);
        m.view_mut((d, 0), (d, d)).copy_from(u10);
        m.view_mut((d, d), (d, d)).copy_from(u11);
        Self::from_matrix(m)
    }

    pub fn identity(d: usize) -> Self {
        Self {
            probe_dim: d,
            matrix: CMatrix::identity(2 * d, 2 * d),
        }
    }

    /// CNOT with the packet qubit as control and a qubit probe as target.
    pub fn controlled_flip() -> Self {
        let i2 = CMatrix::identity(2, 2);
        let x = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let z = CMatrix::zeros(2, 2);
        Self::from_blocks(&i2, &z, &z, &x).expect("CNOT is unitary")
    }

    /// Exchanges the packet qubit with a qubit probe.
    pub fn swap() -> Self {
        let mut m = CMatrix::zeros(4, 4);
        for a in 0..2 {
            for k in 0..2 {
                m[(k * 2 + a, a * 2 + k)] = c(1.0);
            }
        }
        Self::from_matrix(m).expect("SWAP is unitary")
    }

    pub fn probe_dim(&self) -> usize {
        self.probe_dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn block(&self, a: usize, b: usize) -> CMatrix {
        let d = self.probe_dim;
        self.matrix.view((a * d, b * d), (d, d)).into_owned()
    }
}

/// `U = [[W, 0], [0, W]]`.
pub fn build_constrained_unitary(w: &CMatrix) -> Result<JointUnitary> {
    check_unitary("W", w)?;
    let z = CMatrix::zeros(w.nrows(), w.ncols());
    JointUnitary::from_blocks(w, &z, &z, w)
}

fn amplitudes(basis: Basis, bit: bool) -> [Complex64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match (basis, bit) {
        (Basis::Z, false) => [c(1.0), c(0.0)],
        (Basis::Z, true) => [c(0.0), c(1.0)],
        (Basis::X, false) => [c(s), c(s)],
        (Basis::X, true) => [c(s), c(-s)],
    }
}

fn interact(u: &JointUnitary, qubit: [Complex64; 2], probe: &ProbeSpace) -> Result<CVector> {
    let d = probe.dim();
    if u.probe_dim != d {
        return Err(Error::DimensionMismatch(format!(
            "unitary acts on a {}-dim probe, probe has {d}",
            u.probe_dim
        )));
    }
    let mut joint = CVector::zeros(2 * d);
    for a in 0..2 {
        for k in 0..d {
            joint[a * d + k] = qubit[a] * probe.state[k];
        }
    }
    Ok(&u.matrix * joint)
}

/// (⟨φ| ⊗ I)|ψ⟩ for a qubit bra φ.
fn contract_qubit(psi: &CVector, phi: [Complex64; 2], d: usize) -> CVector {
    CVector::from_fn(d, |k, _| phi[0].conj() * psi[k] + phi[1].conj() * psi[d + k])
}

fn reduced_probe(psi: &CVector, d: usize) -> CMatrix {
    let mut rho = CMatrix::zeros(d, d);
    for a in 0..2 {
        let seg = psi.rows(a * d, d);
        rho += seg * seg.adjoint();
    }
    rho
}

/// ½‖ρ − σ‖₁ for Hermitian ρ, σ.
pub fn trace_distance(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let diff = rho - sigma;
    let herm = (&diff + diff.adjoint()).scale(0.5);
    0.5 * herm.symmetric_eigenvalues().iter().map(|l| l.abs()).sum::<f64>()
}

/// Trace distance between unit pure states, √(1 − |⟨a|b⟩|²), evaluated as
/// the norm of b's component orthogonal to a (no cancellation near 0).
pub fn pure_trace_distance(a: &CVector, b: &CVector) -> f64 {
    let overlap = a.dotc(b);
    (b - a * overlap).norm().min(1.0)
}

/// Average over the four BB84 inputs of the probability that a same-basis
/// measurement after `u` returns the wrong bit.
pub fn type2_disturbance_of(u: &JointUnitary, probe: &ProbeSpace) -> Result<f64> {
    let d = probe.dim();
    let mut total = 0.0;
    for prep in QubitPreparation::ALL {
        let psi = interact(u, amplitudes(prep.basis, prep.bit), probe)?;
        let wrong = contract_qubit(&psi, amplitudes(prep.basis, !prep.bit), d);
        total += wrong.norm_squared();
    }
    Ok(total / 4.0)
}

/// Largest trace distance between Eve's probe states for the two eigenstates
/// of either basis.
pub fn type2_leakage_of(u: &JointUnitary, probe: &ProbeSpace) -> Result<f64> {
    let d = probe.dim();
    let mut worst: f64 = 0.0;
    for basis in Basis::ALL {
        let rho0 = reduced_probe(&interact(u, amplitudes(basis, false), probe)?, d);
        let rho1 = reduced_probe(&interact(u, amplitudes(basis, true), probe)?, d);
        worst = worst.max(trace_distance(&rho0, &rho1));
    }
    Ok(worst)
}

/// Operators Eve (and the enclave) apply over one Type 3 round trip.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkUnitaryPair {
    /// Outbound leg sender -> partner on cycle n.
    pub forward: CMatrix,
    /// Return leg partner -> sender on cycle n + 1.
    pub back: CMatrix,
    /// Environment evolution while the packet sits in the enclave, cycle n.
    pub v_now: CMatrix,
    /// Same for cycle n + 1.
    pub v_next: CMatrix,
}

impl LinkUnitaryPair {
    pub fn new(forward: CMatrix, back: CMatrix, v_now: CMatrix, v_next: CMatrix) -> Result<Self> {
        let d = forward.nrows();
        for (what, m) in [("U_forward", &forward), ("U_back", &back), ("V_n", &v_now), ("V_n+1", &v_next)] {
            if m.shape() != (d, d) {
                return Err(Error::DimensionMismatch(format!("{what} is not {d}×{d}")));
            }
            check_unitary(what, m)?;
        }
        Ok(Self {
            forward,
            back,
            v_now,
            v_next,
        })
    }

    pub fn identity(d: usize) -> Self {
        let i = CMatrix::identity(d, d);
        Self {
            forward: i.clone(),
            back: i.clone(),
            v_now: i.clone(),
            v_next: i,
        }
    }

    /// Sets the return leg so the round trip composes to `v_next·v_now`.
    pub fn satisfying_round_trip(forward: CMatrix, v_now: CMatrix, v_next: CMatrix) -> Result<Self> {
        let back = &v_next * &v_now * forward.adjoint();
        Self::new(forward, back, v_now, v_next)
    }

    pub fn dim(&self) -> usize {
        self.forward.nrows()
    }

    /// Environment states (packet retained, packet sent and returned).
    pub fn environment_states(&self, probe: &ProbeSpace) -> Result<(CVector, CVector)> {
        if probe.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "operators are {}-dim, probe has {}",
                self.dim(),
                probe.dim()
            )));
        }
        let home = &self.v_next * (&self.v_now * probe.state());
        let away = &self.back * (&self.forward * probe.state());
        Ok((home, away))
    }
}

/// Probability that a |ψ±> preparation is read as |∓>_p, averaged over the
/// sign, obtained by projecting the two-mode state on the wrong port.
pub fn type3_disturbance_of(pair: &LinkUnitaryPair, probe: &ProbeSpace) -> Result<f64> {
    let (home, away) = pair.environment_states(probe)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let d = pair.dim();
    let mut total = 0.0;
    for sign in [1.0, -1.0] {
        // (|home mode> ⊗ A|R> + sign |away mode> ⊗ B|R>)/√2
        let mut state = CVector::zeros(2 * d);
        state.rows_mut(0, d).copy_from(&home.scale(s));
        state.rows_mut(d, d).copy_from(&away.scale(sign * s));
        let wrong_port = [c(s), c(-sign * s)];
        total += contract_qubit(&state, wrong_port, d).norm_squared();
    }
    Ok(total / 2.0)
}

/// Trace distance between the environment after a transmitted packet and
/// after a silent cycle.
pub fn traffic_indistinguishability(pair: &LinkUnitaryPair, probe: &ProbeSpace) -> Result<f64> {
    let (home, away) = pair.environment_states(probe)?;
    Ok(pure_trace_distance(&away, &home))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffSample {
    pub disturbance: f64,
    pub indistinguishability: f64,
}

/// Random round trips ranging from constraint-satisfying (rotation angle 0)
/// to fully random return legs.
pub fn tradeoff_scatter(samples: usize, d: usize, seed: u64) -> Result<Vec<TradeoffSample>> {
    if samples == 0 || d < 2 {
        return Err(Error::InvalidArgument(format!(
            "need samples >= 1 and d >= 2, got samples = {samples}, d = {d}"
        )));
    }
    let mut rng = stream(seed, Subsystem::Unitaries);
    (0..samples)
        .map(|_| {
            let forward = random_unitary(d, &mut rng);
            let v_now = random_unitary(d, &mut rng);
            let v_next = random_unitary(d, &mut rng);
            let theta = rng.random_range(0.0..std::f64::consts::PI);
            let deviation = random_rotation(d, theta, &mut rng);
            let back = deviation * &v_next * &v_now * forward.adjoint();
            let pair = LinkUnitaryPair::new(forward, back, v_now, v_next)?;
            let probe = ProbeSpace::random(d, &mut rng);
            Ok(TradeoffSample {
                disturbance: type3_disturbance_of(&pair, &probe)?,
                indistinguishability: traffic_indistinguishability(&pair, &probe)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub checks: Vec<CheckOutcome>,
    pub scatter: Vec<TradeoffSample>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub dim: usize,
    pub samples: usize,
    pub scatter_samples: usize,
    pub seed: u64,
    /// Negative-control hook: when false, the "constrained" round trips get a
    /// random return leg and the round-trip check must fail.
    pub enforce_round_trip: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            dim: 4,
            samples: 100,
            scatter_samples: 1000,
            seed: 0,
            enforce_round_trip: true,
        }
    }
}

const ZERO_TOL: f64 = 1e-10;
const SLACK: f64 = 1e-9;

/// Runs every structural check and returns the pass/fail table plus the
/// tradeoff scatter.
pub fn run_verification(opts: &VerifyOptions) -> Result<VerificationReport> {
    if opts.dim < 2 || opts.samples == 0 || opts.scatter_samples == 0 {
        return Err(Error::InvalidArgument(format!(
            "need d >= 2 and at least one sample, got d = {}, samples = {}",
            opts.dim, opts.samples
        )));
    }
    let d = opts.dim;
    let mut rng = stream(opts.seed, Subsystem::Unitaries);
    let mut checks = Vec::new();
    let mut in_range = true;
    let mut track = |x: f64| {
        in_range &= (-SLACK..=1.0 + SLACK).contains(&x);
        x
    };

    // block-diagonal W ⊕ W
    let mut worst_dist: f64 = 0.0;
    let mut worst_leak: f64 = 0.0;
    for _ in 0..opts.samples {
        let u = build_constrained_unitary(&random_unitary(d, &mut rng))?;
        let probe = ProbeSpace::random(d, &mut rng);
        worst_dist = worst_dist.max(track(type2_disturbance_of(&u, &probe)?));
        worst_leak = worst_leak.max(track(type2_leakage_of(&u, &probe)?));
    }
    checks.push(CheckOutcome::new(
        "constrained_unitary_no_type2_disturbance",
        worst_dist < ZERO_TOL,
        format!("max disturbance {worst_dist:.3e} over {} samples, d={d}", opts.samples),
    ));
    checks.push(CheckOutcome::new(
        "constrained_unitary_no_leakage",
        worst_leak < ZERO_TOL,
        format!("max leakage {worst_leak:.3e}"),
    ));

    // round trip composing to the enclave evolution
    let mut worst_d3: f64 = 0.0;
    let mut worst_ind: f64 = 0.0;
    for _ in 0..opts.samples {
        let forward = random_unitary(d, &mut rng);
        let v_now = random_unitary(d, &mut rng);
        let v_next = random_unitary(d, &mut rng);
        let pair = if opts.enforce_round_trip {
            LinkUnitaryPair::satisfying_round_trip(forward, v_now, v_next)?
        } else {
            let back = random_unitary(d, &mut rng);
            LinkUnitaryPair::new(forward, back, v_now, v_next)?
        };
        let probe = ProbeSpace::random(d, &mut rng);
        worst_d3 = worst_d3.max(track(type3_disturbance_of(&pair, &probe)?));
        worst_ind = worst_ind.max(track(traffic_indistinguishability(&pair, &probe)?));
    }
    checks.push(CheckOutcome::new(
        "round_trip_constraint_no_type3_disturbance",
        worst_d3 < ZERO_TOL,
        format!("max disturbance {worst_d3:.3e}"),
    ));
    checks.push(CheckOutcome::new(
        "round_trip_constraint_traffic_indistinguishable",
        worst_ind < ZERO_TOL,
        format!("max trace distance {worst_ind:.3e}"),
    ));

    // distinguishability forces disturbance
    let scatter = tradeoff_scatter(opts.scatter_samples, d, opts.seed.wrapping_add(1))?;
    let mut violations = 0;
    let mut min_margin = f64::INFINITY;
    for s in &scatter {
        track(s.disturbance);
        track(s.indistinguishability);
        let floor = (1.0 - (1.0 - s.indistinguishability.powi(2)).max(0.0).sqrt()) / 2.0;
        let margin = s.disturbance - floor;
        min_margin = min_margin.min(margin);
        if margin < -SLACK || (s.indistinguishability > 0.01 && s.disturbance <= 1e-6) {
            violations += 1;
        }
    }
    checks.push(CheckOutcome::new(
        "no_leak_without_disturbance",
        violations == 0,
        format!("{violations} violations over {} samples, min margin {min_margin:.3e}", scatter.len()),
    ));

    // negative controls
    let ground = ProbeSpace::ground(2);
    let cnot = JointUnitary::controlled_flip();
    let cnot_dist = track(type2_disturbance_of(&cnot, &ground)?);
    let cnot_leak = track(type2_leakage_of(&cnot, &ground)?);
    checks.push(CheckOutcome::new(
        "control_controlled_flip",
        (cnot_dist - 0.25).abs() < ZERO_TOL && (cnot_leak - 1.0).abs() < ZERO_TOL,
        format!("disturbance {cnot_dist:.9}, leakage {cnot_leak:.9}"),
    ));
    let swap_dist = track(type2_disturbance_of(&JointUnitary::swap(), &ground)?);
    checks.push(CheckOutcome::new(
        "control_swap",
        (swap_dist - 0.5).abs() < ZERO_TOL,
        format!("disturbance {swap_dist:.9}"),
    ));
    let marking = which_path_marking_pair();
    let mark_d3 = track(type3_disturbance_of(&marking, &ground)?);
    let mark_ind = track(traffic_indistinguishability(&marking, &ground)?);
    checks.push(CheckOutcome::new(
        "control_which_path_marking",
        (mark_d3 - 0.5).abs() < ZERO_TOL && (mark_ind - 1.0).abs() < ZERO_TOL,
        format!("disturbance {mark_d3:.9}, trace distance {mark_ind:.9}"),
    ));

    checks.push(CheckOutcome::new(
        "outputs_in_unit_interval",
        in_range,
        "all probabilities and distances within [0, 1] ± 1e-9".into(),
    ));

    Ok(VerificationReport { checks, scatter })
}

/// Forward leg flips a qubit probe from |0> to |1>; everything else is the
/// identity. The environment ends up orthogonal depending on the path taken.
pub fn which_path_marking_pair() -> LinkUnitaryPair {
    let x = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
    let i = CMatrix::identity(2, 2);
    LinkUnitaryPair::new(x, i.clone(), i.clone(), i).expect("Pauli X is unitary")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
        stream(seed, Subsystem::Unitaries)
    }

    #[test]
    fn random_unitaries_are_unitary() {
        let mut r = rng(1);
        for d in [2, 4, 8, 16] {
            assert!(unitarity_deviation(&random_unitary(d, &mut r)) < 1e-12);
            assert!(unitarity_deviation(&random_rotation(d, 1.3, &mut r)) < 1e-12);
        }
    }

    #[test]
    fn zero_angle_rotation_is_identity() {
        let mut r = rng(2);
        let m = random_rotation(4, 0.0, &mut r);
        let dev = (m - CMatrix::identity(4, 4)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-12);
    }

    #[test]
    fn identity_has_no_effect() {
        let probe = ProbeSpace::ground(3);
        let u = JointUnitary::identity(3);
        assert_eq!(type2_disturbance_of(&u, &probe).unwrap(), 0.0);
        assert!(type2_leakage_of(&u, &probe).unwrap() < 1e-15);
        let pair = LinkUnitaryPair::identity(3);
        assert_eq!(type3_disturbance_of(&pair, &probe).unwrap(), 0.0);
        assert_eq!(traffic_indistinguishability(&pair, &probe).unwrap(), 0.0);
    }

    #[test]
    fn controlled_flip_values() {
        let probe = ProbeSpace::ground(2);
        let u = JointUnitary::controlled_flip();
        assert!((type2_disturbance_of(&u, &probe).unwrap() - 0.25).abs() < 1e-12);
        assert!((type2_leakage_of(&u, &probe).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn swap_value() {
        let probe = ProbeSpace::ground(2);
        assert!((type2_disturbance_of(&JointUnitary::swap(), &probe).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn probe_only_rotation_leaks_nothing() {
        let mut r = rng(3);
        for d in [2, 4, 8] {
            let w = random_unitary(d, &mut r);
            let u = build_constrained_unitary(&w).unwrap();
            assert_eq!(u.block(0, 0), w);
            assert_eq!(u.block(1, 0), CMatrix::zeros(d, d));
            let probe = ProbeSpace::random(d, &mut r);
            assert!(type2_disturbance_of(&u, &probe).unwrap() < 1e-10);
            assert!(type2_leakage_of(&u, &probe).unwrap() < 1e-10);
        }
    }

    #[test]
    fn diagonal_phase_probe_unitary() {
        let d = 4;
        let w = CMatrix::from_diagonal(&CVector::from_fn(d, |k, _| Complex64::from_polar(1.0, 0.7 * k as f64)));
        let u = build_constrained_unitary(&w).unwrap();
        let probe = ProbeSpace::random(d, &mut rng(4));
        assert!(type2_disturbance_of(&u, &probe).unwrap() < 1e-10);
        assert!(type2_leakage_of(&u, &probe).unwrap() < 1e-10);
    }

    #[test]
    fn rejects_non_unitary_inputs() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 0)] = c(2.0);
        assert!(matches!(build_constrained_unitary(&m), Err(Error::NotUnitary { .. })));
        assert!(JointUnitary::from_matrix(CMatrix::identity(3, 3)).is_err());
        let i = CMatrix::identity(2, 2);
        assert!(LinkUnitaryPair::new(m, i.clone(), i.clone(), i).is_err());
        assert!(ProbeSpace::new(CVector::from_element(2, c(1.0))).is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let u = JointUnitary::identity(2);
        assert!(type2_disturbance_of(&u, &ProbeSpace::ground(3)).is_err());
        let pair = LinkUnitaryPair::identity(2);
        assert!(type3_disturbance_of(&pair, &ProbeSpace::ground(4)).is_err());
    }

    #[test]
    fn which_path_marking_values() {
        let pair = which_path_marking_pair();
        let probe = ProbeSpace::ground(2);
        assert!((type3_disturbance_of(&pair, &probe).unwrap() - 0.5).abs() < 1e-12);
        assert!((traffic_indistinguishability(&pair, &probe).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_matches_overlap_formula() {
        // (1 − Re<R|V†V'†U'U|R>)/2 computed directly from the operators
        let mut r = rng(5);
        for _ in 0..50 {
            let d = 4;
            let pair = LinkUnitaryPair::new(
                random_unitary(d, &mut r),
                random_unitary(d, &mut r),
                random_unitary(d, &mut r),
                random_unitary(d, &mut r),
            )
            .unwrap();
            let probe = ProbeSpace::random(d, &mut r);
            let r0 = probe.state();
            let op = pair.v_now.adjoint() * pair.v_next.adjoint() * &pair.back * &pair.forward;
            let overlap = r0.dotc(&(op * r0));
            let formula = (1.0 - overlap.re) / 2.0;
            assert!((type3_disturbance_of(&pair, &probe).unwrap() - formula).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_distance_matches_pure_formula() {
        let mut r = rng(6);
        let a = random_state(5, &mut r);
        let b = random_state(5, &mut r);
        let rho = &a * a.adjoint();
        let sigma = &b * b.adjoint();
        assert!((trace_distance(&rho, &sigma) - pure_trace_distance(&a, &b)).abs() < 1e-10);
    }

    #[test]
    fn scatter_bounds() {
        let s = tradeoff_scatter(200, 3, 9).unwrap();
        assert_eq!(s.len(), 200);
        for p in &s {
            let floor = (1.0 - (1.0 - p.indistinguishability.powi(2)).sqrt()) / 2.0;
            assert!(p.disturbance >= floor - 1e-9);
        }
        assert!(tradeoff_scatter(0, 3, 0).is_err());
        assert!(tradeoff_scatter(5, 1, 0).is_err());
    }

    #[test]
    fn verification_passes_and_negative_control_fails() {
        let opts = VerifyOptions {
            dim: 2,
            samples: 20,
            scatter_samples: 100,
            ..VerifyOptions::default()
        };
        let report = run_verification(&opts).unwrap();
        assert!(report.all_passed(), "{:?}", report.checks);
        let broken = run_verification(&VerifyOptions {
            enforce_round_trip: false,
            ..opts
        })
        .unwrap();
        assert!(!broken.all_passed());
        let failed: Vec<_> = broken.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        assert!(failed.contains(&"round_trip_constraint_no_type3_disturbance"));
    }
}
