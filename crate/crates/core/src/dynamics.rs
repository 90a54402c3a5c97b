//! Schrödinger evolution `i dΨ/dt = H(s(t)) Ψ` and adiabaticity diagnostics.
//!
//! The integrator is classical fourth-order Runge–Kutta with a fixed step
//! `h ≤ 1 / (steps_per_unit_time · ‖H‖)`. The state is never renormalized;
//! norm drift beyond [`NORM_DRIFT_LIMIT`] is reported as an error.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{
    build_final, build_initial, combine, combine_derivative, BlockHamiltonian,
};
use crate::problem::{MarkedState, Precision, Schedule, Splitting};
use crate::quadrature::integrate;
use crate::runtime::{eps_t_density, OptimalSchedule};
use crate::spectral::max_structured_matrix_element;

pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// Allowance below `1 - ε²` accepted by the success-probability check.
pub const GUARANTEE_SLACK: f64 = 0.01;

/// Diagnostic checkpoints, uniform in `s`.
pub const CHECKPOINTS: usize = 101;

const LEVEL_TOL: f64 = 1e-9;

/// Amplitudes of an `n`-qubit state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Uniform superposition `|Ψ₀⟩`.
    pub fn uniform(n: usize) -> Self {
        let dim = 1usize << n;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self {
            n,
            amplitudes: vec![a; dim],
        }
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { n, amplitudes }
    }

    pub fn from_amplitudes(n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1 << n {
            return Err(Error::LengthMismatch {
                expected: 1 << n,
                found: amplitudes.len(),
            });
        }
        Ok(Self { n, amplitudes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(Complex64::norm_sqr)
            .sum::<f64>()
            .sqrt()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    /// `|⟨v|Ψ⟩|²` for a real vector `v`.
    pub fn overlap_with_real(&self, v: &[f64]) -> f64 {
        self.amplitudes
            .iter()
            .zip(v)
            .map(|(a, &b)| a * b)
            .sum::<Complex64>()
            .norm_sqr()
    }
}

/// Time reparameterization driving an evolution.
#[derive(Debug, Clone)]
pub enum Drive {
    /// Saturated schedule, optionally stretched to a different total time.
    Saturated {
        schedule: OptimalSchedule,
        total_time: f64,
    },
    /// `s = t / T`.
    Uniform { base: Schedule, total_time: f64 },
}

impl Drive {
    pub fn saturated(schedule: OptimalSchedule) -> Self {
        let total_time = schedule.total_time();
        Drive::Saturated {
            schedule,
            total_time,
        }
    }

    pub fn uniform(base: Schedule, total_time: f64) -> Self {
        Drive::Uniform { base, total_time }
    }

    /// Same path in `s`, traversed in `total_time`.
    pub fn with_total_time(self, total_time: f64) -> Self {
        match self {
            Drive::Saturated { schedule, .. } => Drive::Saturated {
                schedule,
                total_time,
            },
            Drive::Uniform { base, .. } => Drive::Uniform { base, total_time },
        }
    }

    pub fn total_time(&self) -> f64 {
        match self {
            Drive::Saturated { total_time, .. } | Drive::Uniform { total_time, .. } => *total_time,
        }
    }

    pub fn base(&self) -> &Schedule {
        match self {
            Drive::Saturated { schedule, .. } => schedule.base(),
            Drive::Uniform { base, .. } => base,
        }
    }

    fn stretch(&self) -> f64 {
        match self {
            Drive::Saturated {
                schedule,
                total_time,
            } => schedule.total_time() / total_time,
            Drive::Uniform { .. } => 1.0,
        }
    }

    pub fn s_at(&self, t: f64) -> f64 {
        match self {
            Drive::Saturated { schedule, .. } => schedule.s_at(t * self.stretch()),
            Drive::Uniform { total_time, .. } => (t / total_time).clamp(0.0, 1.0),
        }
    }

    pub fn t_at(&self, s: f64) -> f64 {
        match self {
            Drive::Saturated { schedule, .. } => schedule.t_at(s) / self.stretch(),
            Drive::Uniform { total_time, .. } => s * total_time,
        }
    }

    /// `ds/dt` at parameter value `s`.
    pub fn ds_dt_at_s(&self, s: f64) -> f64 {
        match self {
            Drive::Saturated { schedule, .. } => schedule.ds_dt_at_s(s) * self.stretch(),
            Drive::Uniform { total_time, .. } => 1.0 / total_time,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Checkpoint {
    pub t: f64,
    pub s: f64,
    pub ground_overlap: f64,
    /// `|ḟg - ġf|·sqrt(Σ_i (N_i-1)/N_i² ω_i⁻⁶)·|ds/dt|`; equals ε on a
    /// saturated schedule.
    pub lhs: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionReport {
    pub n: usize,
    pub parts: Vec<usize>,
    pub marked: String,
    pub total_time: f64,
    pub steps: usize,
    pub success_probability: f64,
    pub max_lhs: f64,
    pub norm_drift: f64,
    pub checkpoints: Vec<Checkpoint>,
}

impl EvolutionReport {
    /// `p ≥ 1 - ε² - slack`.
    pub fn meets_guarantee(&self, epsilon: f64, slack: f64) -> bool {
        self.success_probability >= 1.0 - epsilon * epsilon - slack
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Per-checkpoint CSV: `t, s, overlap, lhs, norm`.
    pub fn checkpoints_csv(&self) -> String {
        let mut out = String::from("t,s,overlap,lhs,norm\n");
        for c in &self.checkpoints {
            writeln!(
                out,
                "{},{},{},{},{}",
                c.t, c.s, c.ground_overlap, c.lhs, c.norm
            )
            .unwrap();
        }
        out
    }
}

/// Instantaneous ground state of the split Hamiltonian at `(f, g)`.
///
/// Each block's ground state lies in the span of its marked basis state and
/// its uniform superposition; the full ground state is their tensor product.
pub fn product_ground_state(
    splitting: &Splitting,
    marked: &MarkedState,
    f: f64,
    g: f64,
) -> Result<Vec<f64>> {
    marked.check_len(splitting.n())?;
    let n = splitting.n();
    let blocks: Vec<Vec<f64>> = splitting
        .parts()
        .iter()
        .enumerate()
        .map(|(b, &size)| {
            let dim = 1usize << size;
            let a = 1.0 / (dim as f64).sqrt();
            let bb = (1.0 - a * a).sqrt();
            // reduced 2×2 problem in the basis {|z⟩, |r⟩}
            let (p, q, r) = (f * bb * bb, -f * a * bb, f * a * a + g);
            let lambda = 0.5 * (p + r) - (0.25 * (p - r).powi(2) + q * q).sqrt();
            let v1 = (q, lambda - p);
            let v2 = (lambda - r, q);
            let (cz, cr) = if v1.0.hypot(v1.1) >= v2.0.hypot(v2.1) {
                v1
            } else {
                v2
            };
            let norm = cz.hypot(cr);
            let (cz, cr) = (cz / norm, cr / norm);
            let z = splitting.block_value(b, marked.index());
            (0..dim)
                .map(|j| if j == z { cz } else { cr * a / bb })
                .collect()
        })
        .collect();
    let shifts: Vec<(usize, usize)> = splitting
        .block_starts()
        .iter()
        .zip(splitting.parts())
        .map(|(&start, &size)| (n - start - size, (1usize << size) - 1))
        .collect();
    let mut out: Vec<f64> = (0..1usize << n)
        .map(|j| {
            blocks
                .iter()
                .zip(&shifts)
                .map(|(v, &(shift, mask))| v[(j >> shift) & mask])
                .product()
        })
        .collect();
    let sum: f64 = out.iter().sum();
    if sum < 0.0 {
        out.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(out)
}

fn rk4_step<C: Fn(f64) -> (f64, f64)>(
    h: &BlockHamiltonian,
    coeffs: &C,
    t: f64,
    dt: f64,
    psi: &mut [Complex64],
    scratch: &mut [Vec<Complex64>; 5],
) {
    let minus_i = Complex64::new(0.0, -1.0);
    let [k1, k2, k3, k4, tmp] = scratch;

    let (f, g) = coeffs(t);
    h.apply(f, g, psi, k1);
    k1.iter_mut().for_each(|x| *x *= minus_i);

    let (f, g) = coeffs(t + 0.5 * dt);
    for ((o, &p), &k) in tmp.iter_mut().zip(psi.iter()).zip(k1.iter()) {
        *o = p + k * (0.5 * dt);
    }
    h.apply(f, g, tmp, k2);
    k2.iter_mut().for_each(|x| *x *= minus_i);

    for ((o, &p), &k) in tmp.iter_mut().zip(psi.iter()).zip(k2.iter()) {
        *o = p + k * (0.5 * dt);
    }
    h.apply(f, g, tmp, k3);
    k3.iter_mut().for_each(|x| *x *= minus_i);

    let (f, g) = coeffs(t + dt);
    for ((o, &p), &k) in tmp.iter_mut().zip(psi.iter()).zip(k3.iter()) {
        *o = p + k * dt;
    }
    h.apply(f, g, tmp, k4);
    k4.iter_mut().for_each(|x| *x *= minus_i);

    for (j, p) in psi.iter_mut().enumerate() {
        *p += (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * (dt / 6.0);
    }
}

/// Applies `steps` RK4 steps of `e^{-i(fH_i + gH_f)t}` with `f, g` held fixed.
pub fn propagate_frozen(
    h: &BlockHamiltonian,
    f: f64,
    g: f64,
    state: &StateVector,
    time: f64,
    steps: usize,
) -> Result<StateVector> {
    if state.amplitudes.len() != h.dim() {
        return Err(Error::LengthMismatch {
            expected: h.dim(),
            found: state.amplitudes.len(),
        });
    }
    if steps == 0 {
        return Err(Error::Domain("need at least one step".into()));
    }
    let mut psi = state.clone();
    let dt = time / steps as f64;
    let mut scratch: [Vec<Complex64>; 5] =
        std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); h.dim()]);
    let coeffs = |_: f64| (f, g);
    for j in 0..steps {
        rk4_step(
            h,
            &coeffs,
            j as f64 * dt,
            dt,
            &mut psi.amplitudes,
            &mut scratch,
        );
    }
    Ok(psi)
}

/// Evolves `|Ψ₀⟩` under `h` along `drive` with a fixed step. Returns the final
/// state, checkpoint diagnostics and the number of steps taken.
fn integrate_path(
    h: &BlockHamiltonian,
    splitting: &Splitting,
    marked: &MarkedState,
    drive: &Drive,
    precision: &Precision,
    with_ground: bool,
) -> Result<(StateVector, Vec<Checkpoint>, usize)> {
    let n = splitting.n();
    let mut psi = StateVector::uniform(n);
    let total = drive.total_time();
    let h_norm = drive.base().max_weight_sum() * h.initial_norm().max(h.final_norm());
    let h_max = 1.0 / (precision.ode_steps_per_unit_time * h_norm.max(1e-300));

    let dim = psi.amplitudes.len();
    let mut scratch: [Vec<Complex64>; 5] =
        std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); dim]);
    let coeffs = |time: f64| drive.base().eval(drive.s_at(time));
    let mut checkpoints = Vec::with_capacity(CHECKPOINTS);
    let mut steps = 0;
    let mut t = 0.0;
    for k in 0..CHECKPOINTS {
        let s_k = k as f64 / (CHECKPOINTS - 1) as f64;
        let t_k = if total > 0.0 {
            drive.t_at(s_k).clamp(t, total)
        } else {
            0.0
        };
        let span = t_k - t;
        if span > 0.0 {
            let count = (span / h_max).ceil().max(1.0) as usize;
            let dt = span / count as f64;
            for j in 0..count {
                rk4_step(
                    h,
                    &coeffs,
                    t + j as f64 * dt,
                    dt,
                    &mut psi.amplitudes,
                    &mut scratch,
                );
            }
            steps += count;
        }
        t = t_k;

        let s = if total > 0.0 { s_k } else { 0.0 };
        let (f, g) = drive.base().eval(s);
        let ground_overlap = if with_ground {
            psi.overlap_with_real(&product_ground_state(splitting, marked, f, g)?)
        } else {
            f64::NAN
        };
        let lhs = if total > 0.0 {
            eps_t_density(splitting, drive.base(), s)? * drive.ds_dt_at_s(s).abs()
        } else {
            0.0
        };
        checkpoints.push(Checkpoint {
            t,
            s,
            ground_overlap,
            lhs,
            norm: psi.norm(),
        });
    }
    Ok((psi, checkpoints, steps))
}

/// Integrates from the uniform superposition to `t = T` along `drive`.
pub fn evolve(
    splitting: &Splitting,
    marked: &MarkedState,
    drive: &Drive,
    precision: &Precision,
) -> Result<EvolutionReport> {
    precision.validate()?;
    if !(drive.total_time() >= 0.0) {
        return Err(Error::Domain("total time must be non-negative".into()));
    }
    let h = BlockHamiltonian::new(splitting, marked)?;
    let (psi, checkpoints, steps) = integrate_path(&h, splitting, marked, drive, precision, true)?;
    report(splitting, marked, drive, psi, checkpoints, steps)
}

/// Same integrator with an arbitrary diagonal final Hamiltonian, e.g.
/// [`crate::hamiltonian::overlapping_diagonal`]. Returns only `|⟨m|Ψ(T)⟩|²`
/// and the state.
pub fn evolve_with_final(
    splitting: &Splitting,
    marked: &MarkedState,
    final_diag: Vec<f64>,
    drive: &Drive,
    precision: &Precision,
) -> Result<StateVector> {
    precision.validate()?;
    if final_diag.len() != 1 << splitting.n() {
        return Err(Error::LengthMismatch {
            expected: 1 << splitting.n(),
            found: final_diag.len(),
        });
    }
    let h = BlockHamiltonian::with_final(splitting, final_diag);
    let (psi, _, _) = integrate_path(&h, splitting, marked, drive, precision, false)?;
    Ok(psi)
}

fn report(
    splitting: &Splitting,
    marked: &MarkedState,
    drive: &Drive,
    psi: StateVector,
    checkpoints: Vec<Checkpoint>,
    steps: usize,
) -> Result<EvolutionReport> {
    let norm_drift = checkpoints
        .iter()
        .map(|c| (c.norm - 1.0).abs())
        .fold(0.0, f64::max);
    if norm_drift > NORM_DRIFT_LIMIT {
        return Err(Error::NormDrift {
            drift: norm_drift,
            limit: NORM_DRIFT_LIMIT,
        });
    }
    Ok(EvolutionReport {
        n: splitting.n(),
        parts: splitting.parts().to_vec(),
        marked: marked.to_string(),
        total_time: drive.total_time(),
        steps,
        success_probability: psi.probability(marked.index()),
        max_lhs: checkpoints.iter().map(|c| c.lhs).fold(0.0, f64::max),
        norm_drift,
        checkpoints,
    })
}

/// Left-hand side of the adiabatic condition from dense eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticityLhs {
    /// `‖P₁ dH/ds |E₀⟩‖·|ds/dt| / ω²` with `P₁` the projector on the first
    /// excited level.
    pub value: f64,
    pub gap: f64,
    /// Multiplicity of the first excited level. Above 1 the value is the
    /// root-sum-square over the level; use [`degenerate_adiabaticity_lhs`]
    /// for the squared, degeneracy-summed form.
    pub multiplicity: usize,
}

/// `|⟨E₁;s|dH/ds|E₀;s⟩|·|ds/dt| / ω(s)²` for the split Hamiltonian at `s`.
pub fn adiabaticity_lhs(
    splitting: &Splitting,
    schedule: &Schedule,
    s: f64,
    ds_dt: f64,
) -> Result<AdiabaticityLhs> {
    let (f, g) = schedule.eval(s);
    if f == 0.0 && g == 0.0 {
        return Err(Error::SingularSchedule { s });
    }
    let marked = MarkedState::zeros(splitting.n());
    let (hi, _) = build_initial(splitting)?;
    let (hf, _) = build_final(splitting, &marked)?;
    let h = combine(&hi, &hf, schedule, s)?;
    let dh = combine_derivative(&hi, &hf, schedule, s)?;
    let spectrum = h.spectrum();
    let levels = spectrum.levels(LEVEL_TOL);
    if levels[0].1 > 1 || levels.len() < 2 {
        return Err(Error::DegenerateGround { gap: 0.0 });
    }
    let (e1, multiplicity) = levels[1];
    let gap = e1 - levels[0].0;
    if ds_dt == 0.0 {
        return Ok(AdiabaticityLhs {
            value: 0.0,
            gap,
            multiplicity,
        });
    }
    let moved = dh.matrix() * spectrum.vectors.column(0);
    let projected: f64 = (1..=multiplicity)
        .map(|k| spectrum.vectors.column(k).dot(&moved).powi(2))
        .sum();
    Ok(AdiabaticityLhs {
        value: projected.sqrt() * ds_dt.abs() / (gap * gap),
        gap,
        multiplicity,
    })
}

/// `n·|⟨E₁|dH/dt|E₀⟩|² / ω⁴` for `n` one-qubit clauses.
pub fn degenerate_adiabaticity_lhs(
    n: usize,
    schedule: &Schedule,
    s: f64,
    ds_dt: f64,
) -> Result<f64> {
    let (f, g) = schedule.eval(s);
    let (df, dg) = schedule.derivative(s);
    let element = max_structured_matrix_element(f, g, df * ds_dt, dg * ds_dt)
        .map_err(|_| Error::SingularSchedule { s })?;
    let w2 = f * f + g * g;
    Ok(n as f64 * element * element / (w2 * w2))
}

/// `εT` of the schedule that keeps [`degenerate_adiabaticity_lhs`] equal to
/// `ε²` throughout.
pub fn degenerate_saturated_eps_t(
    n: usize,
    schedule: &Schedule,
    precision: &Precision,
) -> Result<f64> {
    // the condition is quadratic in ds/dt, so the saturating rate is
    // ε / sqrt(lhs at unit rate) and εT = ∫ sqrt(lhs at unit rate) ds
    let rate_one = |s: f64| {
        degenerate_adiabaticity_lhs(n, schedule, s, 1.0)
            .map(f64::sqrt)
            .unwrap_or(f64::NAN)
    };
    let mut pts = schedule.knots();
    pts.push(0.5);
    Ok(integrate(rate_one, &pts, precision.quad_tol, 0.0, 10_000)?.value)
}

/// `|⟨E₀;s|Ψ⟩|²` from the dense ground eigenvector at `s`.
pub fn instantaneous_ground_overlap(
    state: &StateVector,
    splitting: &Splitting,
    marked: &MarkedState,
    schedule: &Schedule,
    s: f64,
) -> Result<f64> {
    if state.n() != splitting.n() {
        return Err(Error::LengthMismatch {
            expected: splitting.n(),
            found: state.n(),
        });
    }
    let (hi, _) = build_initial(splitting)?;
    let (hf, _) = build_final(splitting, marked)?;
    let spectrum = combine(&hi, &hf, schedule, s)?.spectrum();
    let gap = spectrum.values[1] - spectrum.values[0];
    if gap < 1e-12 {
        return Err(Error::DegenerateGround { gap });
    }
    let ground: Vec<f64> = spectrum.vectors.column(0).iter().copied().collect();
    Ok(state.overlap_with_real(&ground))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::optimal_schedule;
    use approx::assert_relative_eq;

    fn saturated(split: &Splitting, eps: f64) -> (Drive, Precision) {
        let p = Precision::with_epsilon(eps).unwrap();
        let sched = optimal_schedule(split, &Schedule::linear(), &p, 1001).unwrap();
        (Drive::saturated(sched), p)
    }

    #[test]
    fn quench_leaves_uniform_state() {
        for n in 1..=4 {
            let split = Splitting::unstructured(n).unwrap();
            let (drive, p) = saturated(&split, 0.5);
            let r = evolve(
                &split,
                &MarkedState::zeros(n),
                &drive.with_total_time(0.0),
                &p,
            )
            .unwrap();
            assert_relative_eq!(
                r.success_probability,
                1.0 / (1 << n) as f64,
                epsilon = 1e-15
            );
            assert_eq!(r.steps, 0);
        }
    }

    #[test]
    fn single_qubit_follows_first_order_boundary_terms() {
        // With the bound saturated at both ends, first-order adiabatic
        // perturbation theory leaves 4ε² sin²(Φ/2) in the excited state, with
        // accumulated phase Φ = ∫ω dt = π / (4ε) for one qubit.
        let split = Splitting::unstructured(1).unwrap();
        for eps in [0.1, 0.05, 0.02] {
            let (drive, p) = saturated(&split, eps);
            let r = evolve(&split, &MarkedState::zeros(1), &drive, &p).unwrap();
            let phase = std::f64::consts::PI / (4.0 * eps);
            let predicted = 4.0 * eps * eps * (phase / 2.0).sin().powi(2);
            let fail = 1.0 - r.success_probability;
            assert!(
                (fail - predicted).abs() < 0.25 * eps * eps,
                "eps {eps}: {fail} vs {predicted}"
            );
            assert!(r.norm_drift < 1e-9);
            assert_eq!(r.checkpoints.len(), CHECKPOINTS);
        }
    }

    #[test]
    fn maximal_three_qubits_at_small_eps() {
        let split = Splitting::maximal(3).unwrap();
        let (drive, p) = saturated(&split, 0.05);
        assert_relative_eq!(drive.total_time(), 3f64.sqrt() / 0.05, max_relative = 1e-8);
        let r = evolve(&split, &MarkedState::parse("101").unwrap(), &drive, &p).unwrap();
        assert!(
            r.success_probability >= 0.99,
            "p = {}",
            r.success_probability
        );
    }

    #[test]
    fn product_ground_state_matches_dense() {
        let split = Splitting::new(4, vec![1, 3]).unwrap();
        let marked = MarkedState::parse("0110").unwrap();
        let (hi, _) = build_initial(&split).unwrap();
        let (hf, _) = build_final(&split, &marked).unwrap();
        for k in 0..=10 {
            let s = k as f64 / 10.0;
            let lin = Schedule::linear();
            let (f, g) = lin.eval(s);
            let v = product_ground_state(&split, &marked, f, g).unwrap();
            let spectrum = combine(&hi, &hf, &lin, s).unwrap().spectrum();
            let dot: f64 = spectrum
                .vectors
                .column(0)
                .iter()
                .zip(&v)
                .map(|(a, b)| a * b)
                .sum();
            assert_relative_eq!(dot.abs(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn ground_overlap_boundaries() {
        let split = Splitting::new(3, vec![2, 1]).unwrap();
        let marked = MarkedState::parse("011").unwrap();
        let lin = Schedule::linear();
        let psi0 = StateVector::uniform(3);
        assert_relative_eq!(
            instantaneous_ground_overlap(&psi0, &split, &marked, &lin, 0.0).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let amps: Vec<Complex64> = (0..8)
            .map(|k| Complex64::new(0.1 * k as f64, 0.05))
            .collect();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let state =
            StateVector::from_amplitudes(3, amps.iter().map(|a| a / norm).collect()).unwrap();
        assert_relative_eq!(
            instantaneous_ground_overlap(&state, &split, &marked, &lin, 1.0).unwrap(),
            state.probability(marked.index()),
            epsilon = 1e-12
        );
    }

    #[test]
    fn adiabaticity_lhs_frozen_is_zero() {
        let r = adiabaticity_lhs(
            &Splitting::unstructured(3).unwrap(),
            &Schedule::linear(),
            0.4,
            0.0,
        )
        .unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.multiplicity, 1);
    }

    #[test]
    fn adiabaticity_lhs_matches_two_level_closed_form() {
        // ⟨E₁|dH/ds|E₀⟩ = sqrt(N-1)/N · |ḟg-ġf| / ω for one block
        for n in 1..=4 {
            let split = Splitting::unstructured(n).unwrap();
            let dim = (1 << n) as f64;
            for k in 1..10 {
                let s = k as f64 / 10.0;
                let (f, g) = (1.0 - s, s);
                let w = ((f - g).powi(2) + 4.0 * f * g / dim).sqrt();
                let expected = (dim - 1.0).sqrt() / dim / w.powi(3);
                let r = adiabaticity_lhs(&split, &Schedule::linear(), s, 1.0).unwrap();
                assert_relative_eq!(r.value, expected, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn uniform_schedule_at_order_n_time_is_adiabatic() {
        // s = t/T with T = N/ε keeps the condition below ε
        let eps = 0.2;
        for n in 1..=3 {
            let split = Splitting::unstructured(n).unwrap();
            let ds_dt = eps / (1 << n) as f64;
            let worst = (0..=200)
                .map(|k| {
                    adiabaticity_lhs(&split, &Schedule::linear(), k as f64 / 200.0, ds_dt)
                        .unwrap()
                        .value
                })
                .fold(0.0, f64::max);
            assert!(worst <= eps, "n = {n}: {worst}");
        }
    }

    #[test]
    fn degenerate_lhs_scales_with_n() {
        let lin = Schedule::linear();
        for k in 0..=10 {
            let s = k as f64 / 10.0;
            let one = degenerate_adiabaticity_lhs(1, &lin, s, 0.7).unwrap();
            let single =
                adiabaticity_lhs(&Splitting::unstructured(1).unwrap(), &lin, s, 0.7).unwrap();
            assert_relative_eq!(one, single.value.powi(2), max_relative = 1e-10);
            assert_relative_eq!(
                degenerate_adiabaticity_lhs(4, &lin, s, 0.7).unwrap(),
                4.0 * one,
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn degenerate_saturation_gives_root_n() {
        let p = Precision::default();
        for n in [1, 2, 7, 30] {
            let v = degenerate_saturated_eps_t(n, &Schedule::linear(), &p).unwrap();
            assert_relative_eq!(v, (n as f64).sqrt(), max_relative = 1e-9);
        }
    }

    #[test]
    fn saturated_schedule_holds_lhs_at_eps() {
        let split = Splitting::equal(4, 2).unwrap();
        let (drive, p) = saturated(&split, 0.2);
        let r = evolve(&split, &MarkedState::zeros(4), &drive, &p).unwrap();
        for c in &r.checkpoints {
            assert!((c.lhs - 0.2).abs() < 1e-3 * 0.2, "{c:?}");
        }
    }
}
