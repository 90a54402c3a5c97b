//! Closed-form spectral quantities of the split search Hamiltonians.
//!
//! Every block of a splitting is an independent `N_i`-dimensional search
//! problem. Blocks act on disjoint qubits and commute, so the first excitation
//! of the whole system costs the smallest block gap.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::{Schedule, Splitting};

/// Gap `sqrt((f - g)² + 4fg/N)` of one block of dimension `block_dim`.
pub fn subsystem_gap(block_dim: f64, f: f64, g: f64) -> Result<f64> {
    if !(block_dim >= 2.0) {
        return Err(Error::Domain(format!(
            "block dimension must be at least 2, got {block_dim}"
        )));
    }
    if f < 0.0 || g < 0.0 {
        return Err(Error::Domain(format!(
            "schedule values must be non-negative, got f={f}, g={g}"
        )));
    }
    Ok(((f - g).powi(2) + 4.0 * f * g / block_dim).sqrt())
}

/// Gap of the full split system: the smallest block gap.
pub fn global_gap(splitting: &Splitting, f: f64, g: f64) -> Result<f64> {
    splitting
        .block_dims()
        .into_iter()
        .map(|d| subsystem_gap(d, f, g))
        .try_fold(f64::INFINITY, |acc, w| w.map(|w| acc.min(w)))
}

/// Energy `(n/2)(f + g) - m·sqrt(f² + g²)` of the maximally structured
/// Hamiltonian at spin sum `m_spin ∈ {-n/2, …, n/2}`.
pub fn max_structured_eigenvalue(n: usize, m_spin: f64, f: f64, g: f64) -> Result<f64> {
    let twice = 2.0 * m_spin;
    let on_ladder = (twice - twice.round()).abs() < 1e-12
        && twice.abs() <= n as f64 + 1e-12
        && (twice.round() as i64 - n as i64).rem_euclid(2) == 0;
    if !on_ladder {
        return Err(Error::Domain(format!(
            "spin sum {m_spin} is not on the ladder for n = {n}"
        )));
    }
    Ok(0.5 * n as f64 * (f + g) - m_spin * (f * f + g * g).sqrt())
}

/// Multiplicity `C(n, k)` of the `k`-th excited level of the maximally
/// structured Hamiltonian.
pub fn max_structured_degeneracy(n: usize, k: usize) -> Result<u64> {
    if k > n {
        return Err(Error::Domain(format!("level {k} exceeds n = {n}")));
    }
    let k = k.min(n - k);
    Ok((0..k).fold(1u64, |acc, j| acc * (n - j) as u64 / (j + 1) as u64))
}

/// Magnitude `½|ḟg - ġf| / sqrt(f² + g²)` of the transition element between
/// the ground state and each first excited state of the maximal split.
/// With `df, dg` taken as time derivatives this is the element of `dH/dt`;
/// with `s`-derivatives it is the element of `dH/ds`.
pub fn max_structured_matrix_element(f: f64, g: f64, df: f64, dg: f64) -> Result<f64> {
    let norm = (f * f + g * g).sqrt();
    if norm == 0.0 {
        return Err(Error::SingularSchedule { s: f64::NAN });
    }
    Ok(0.5 * (df * g - dg * f).abs() / norm)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapSample {
    pub s: f64,
    pub block_gaps: Vec<f64>,
    pub global: f64,
}

/// Block and global gaps tabulated over `s ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapProfile {
    pub splitting: Splitting,
    pub samples: Vec<GapSample>,
    pub omega_min: f64,
    pub s_min: f64,
}

pub const DEFAULT_GRID: usize = 1001;

pub fn gap_profile(splitting: &Splitting, schedule: &Schedule, grid: usize) -> Result<GapProfile> {
    if grid < 2 {
        return Err(Error::Domain(
            "gap profile needs at least 2 grid points".into(),
        ));
    }
    let dims = splitting.block_dims();
    let samples = (0..grid)
        .map(|k| {
            let s = k as f64 / (grid - 1) as f64;
            let (f, g) = schedule.eval(s);
            let block_gaps = dims
                .iter()
                .map(|&d| subsystem_gap(d, f, g))
                .collect::<Result<Vec<_>>>()?;
            let global = block_gaps.iter().copied().fold(f64::INFINITY, f64::min);
            Ok(GapSample {
                s,
                block_gaps,
                global,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (k_min, _) = samples
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.global.total_cmp(&b.1.global))
        .expect("non-empty grid");
    let lo = samples[k_min.saturating_sub(1)].s;
    let hi = samples[(k_min + 1).min(grid - 1)].s;
    let gap_at = |s: f64| {
        let (f, g) = schedule.eval(s);
        global_gap(splitting, f, g)
    };
    let (s_min, omega_min) = golden_section_min(&gap_at, lo, hi, 1e-12)?;
    let (s_min, omega_min) = if omega_min <= samples[k_min].global {
        (s_min, omega_min)
    } else {
        (samples[k_min].s, samples[k_min].global)
    };
    Ok(GapProfile {
        splitting: splitting.clone(),
        samples,
        omega_min,
        s_min,
    })
}

/// Location of the global-gap minimum, refined to `1e-12`.
pub(crate) fn gap_minimum(splitting: &Splitting, schedule: &Schedule) -> Result<(f64, f64)> {
    if *schedule == Schedule::Linear {
        // symmetric about s = 1/2 for every block dimension
        return Ok((0.5, global_gap(splitting, 0.5, 0.5)?));
    }
    let p = gap_profile(splitting, schedule, DEFAULT_GRID)?;
    Ok((p.s_min, p.omega_min))
}

fn golden_section_min<F: Fn(f64) -> Result<f64>>(
    f: &F,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

impl GapProfile {
    /// CSV with columns `s, omega_1 … omega_m, omega_global`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s");
        for i in 1..=self.splitting.m() {
            write!(out, ",omega_{i}").unwrap();
        }
        out.push_str(",omega_global\n");
        for sample in &self.samples {
            write!(out, "{}", sample.s).unwrap();
            for w in &sample.block_gaps {
                write!(out, ",{w}").unwrap();
            }
            writeln!(out, ",{}", sample.global).unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn subsystem_gap_examples() {
        for &(f, g) in &[(0.3, 0.9), (1.0, 0.0), (0.5, 0.5)] {
            let expected: f64 = f * f + g * g;
            assert_relative_eq!(
                subsystem_gap(2.0, f, g).unwrap(),
                expected.sqrt(),
                epsilon = 1e-15
            );
        }
        assert_eq!(subsystem_gap(64.0, 1.0, 0.0).unwrap(), 1.0);
        assert_relative_eq!(
            subsystem_gap(64.0, 0.5, 0.5).unwrap(),
            0.125,
            epsilon = 1e-15
        );
        assert!(matches!(
            subsystem_gap(1.0, 0.5, 0.5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(max_structured_eigenvalue(5, 2.5, 1.0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            max_structured_eigenvalue(6, 2.0, 0.5, 0.5).unwrap(),
            3.0 - 2f64.sqrt(),
            epsilon = 1e-14
        );
        for n in 1..8 {
            let (f, g) = (0.37, 0.81);
            let e0 = max_structured_eigenvalue(n, n as f64 / 2.0, f, g).unwrap();
            let e1 = max_structured_eigenvalue(n, n as f64 / 2.0 - 1.0, f, g).unwrap();
            assert_relative_eq!(e1 - e0, (f * f + g * g).sqrt(), epsilon = 1e-14);
        }
        assert!(max_structured_eigenvalue(4, 1.5, 0.5, 0.5).is_err());
        assert!(max_structured_eigenvalue(4, 3.0, 0.5, 0.5).is_err());
        assert!(max_structured_eigenvalue(3, 0.25, 0.5, 0.5).is_err());
    }

    #[test]
    fn degeneracy_examples() {
        assert_eq!(max_structured_degeneracy(6, 1).unwrap(), 6);
        assert_eq!(max_structured_degeneracy(9, 0).unwrap(), 1);
        assert_eq!(max_structured_degeneracy(6, 3).unwrap(), 20);
        assert!(max_structured_degeneracy(3, 4).is_err());
    }

    #[test]
    fn matrix_element_examples() {
        assert_eq!(
            max_structured_matrix_element(1.0, 0.0, -1.0, 1.0).unwrap(),
            0.5
        );
        for k in 0..=10 {
            let s = k as f64 / 10.0;
            let (f, g) = (1.0 - s, s);
            let expected = 1.0 / (2.0 * (f * f + g * g).sqrt());
            assert_relative_eq!(
                max_structured_matrix_element(f, g, -1.0, 1.0).unwrap(),
                expected,
                epsilon = 1e-15
            );
        }
        assert!(max_structured_matrix_element(0.0, 0.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn profile_minima() {
        let lin = Schedule::linear();
        let p = gap_profile(&Splitting::unstructured(6).unwrap(), &lin, DEFAULT_GRID).unwrap();
        assert_eq!(p.samples.len(), 1001);
        // 1/sqrt(N) at s = 1/2
        assert_relative_eq!(p.omega_min, 0.125, epsilon = 1e-12);
        assert!((p.s_min - 0.5).abs() < 1e-6);

        for n in [1, 3, 7] {
            let p = gap_profile(&Splitting::maximal(n).unwrap(), &lin, 101).unwrap();
            assert_relative_eq!(p.omega_min, 0.5f64.sqrt(), epsilon = 1e-12);
        }

        let single = gap_profile(&Splitting::unstructured(1).unwrap(), &lin, 11).unwrap();
        let block = gap_profile(&Splitting::maximal(4).unwrap(), &lin, 11).unwrap();
        for (a, b) in single.samples.iter().zip(&block.samples) {
            assert_eq!(a.global, b.global);
        }
        assert!(gap_profile(&Splitting::maximal(2).unwrap(), &lin, 1).is_err());
    }

    #[test]
    fn profile_csv_header() {
        let p = gap_profile(
            &Splitting::new(3, vec![2, 1]).unwrap(),
            &Schedule::linear(),
            3,
        )
        .unwrap();
        let csv = p.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("s,omega_1,omega_2,omega_global"));
        assert_eq!(lines.next(), Some("0,1,1,1"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn tabulated_minimum_is_refined() {
        let sched = Schedule::tabulated(&[
            (0.0, 1.0, 0.0),
            (0.3, 0.75, 0.25),
            (0.7, 0.25, 0.75),
            (1.0, 0.0, 1.0),
        ])
        .unwrap();
        let (s, w) = gap_minimum(&Splitting::unstructured(4).unwrap(), &sched).unwrap();
        let (f, g) = sched.eval(s);
        // the gap is quadratic at its minimum, so the argmin is only good to ~sqrt(eps)
        assert!((s - 0.5).abs() < 1e-6);
        assert_relative_eq!(w, subsystem_gap(16.0, f, g).unwrap(), epsilon = 1e-12);
    }
}
