//! Problem definitions: how the qubits are split into clauses, which basis
//! state is marked, the interpolation schedule and the precision knobs.
//!
//! Qubit 1 is the most significant bit of a Hilbert-space index. Blocks of a
//! [`Splitting`] are contiguous runs of qubits in order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::Pchip;

/// Partition of `n` qubits into `m` contiguous blocks of sizes `n_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Splitting {
    n: usize,
    parts: Vec<usize>,
}

impl Splitting {
    pub fn new(n: usize, parts: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("n must be positive".into()));
        }
        if parts.is_empty() {
            return Err(Error::Domain("a splitting needs at least one block".into()));
        }
        if parts.contains(&0) {
            return Err(Error::Domain("block sizes must be positive".into()));
        }
        let sum: usize = parts.iter().sum();
        if sum != n {
            return Err(Error::PartsMismatch { n, sum });
        }
        Ok(Self { n, parts })
    }

    /// `m` blocks of `n / m` qubits each.
    pub fn equal(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Domain("n and m must be positive".into()));
        }
        if !n.is_multiple_of(m) {
            return Err(Error::NotDivisible { n, m });
        }
        Self::new(n, vec![n / m; m])
    }

    /// Single `n`-qubit clause.
    pub fn unstructured(n: usize) -> Result<Self> {
        Self::new(n, vec![n])
    }

    /// `n` one-qubit clauses.
    pub fn maximal(n: usize) -> Result<Self> {
        Self::equal(n, n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn m(&self) -> usize {
        self.parts.len()
    }

    /// Hilbert-space dimension `N_i = 2^{n_i}` of each block.
    pub fn block_dims(&self) -> Vec<f64> {
        self.parts.iter().map(|&p| block_dim(p)).collect()
    }

    pub fn total_dim(&self) -> f64 {
        block_dim(self.n)
    }

    /// Size of the largest block; the maximal interaction order of the oracle.
    pub fn largest_block(&self) -> usize {
        self.parts.iter().copied().max().unwrap_or(0)
    }

    pub fn is_equal(&self) -> bool {
        self.parts.iter().all(|&p| p == self.parts[0])
    }

    pub fn is_maximal(&self) -> bool {
        self.m() == self.n
    }

    /// Zero-based index of the first qubit of every block.
    pub fn block_starts(&self) -> Vec<usize> {
        self.parts
            .iter()
            .scan(0, |acc, &p| {
                let start = *acc;
                *acc += p;
                Some(start)
            })
            .collect()
    }

    /// Value of the block's bits inside the full index `index`.
    pub(crate) fn block_value(&self, block: usize, index: usize) -> usize {
        let start = self.block_starts()[block];
        let size = self.parts[block];
        let shift = self.n - start - size;
        (index >> shift) & ((1 << size) - 1)
    }
}

fn block_dim(qubits: usize) -> f64 {
    2f64.powi(qubits as i32)
}

/// All ordered compositions of `n` into positive parts.
pub fn all_splittings(n: usize) -> Vec<Splitting> {
    fn rec(rem: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rem == 0 {
            out.push(cur.clone());
            return;
        }
        for p in 1..=rem {
            cur.push(p);
            rec(rem - p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, &mut Vec::new(), &mut out);
    out.into_iter()
        .map(|parts| Splitting { n, parts })
        .collect()
}

/// Target assignment `z_1 … z_n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MarkedState {
    bits: Vec<u8>,
}

impl MarkedState {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::Domain("marked state needs at least one bit".into()));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::Domain("marked bits must be 0 or 1".into()));
        }
        Ok(Self { bits })
    }

    pub fn zeros(n: usize) -> Self {
        Self { bits: vec![0; n] }
    }

    /// Parses a bitstring such as `"010110"`.
    pub fn parse(text: &str) -> Result<Self> {
        let bits = text
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Parse(format!(
                    "invalid bit {other:?} in marked state"
                ))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(bits)
    }

    pub fn from_index(n: usize, index: usize) -> Self {
        let bits = (0..n).map(|q| ((index >> (n - 1 - q)) & 1) as u8).collect();
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Big-endian index `Σ z_i 2^{n-i}`.
    pub fn index(&self) -> usize {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: self.len(),
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for MarkedState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Interpolation coefficients `(f(s), g(s))` of `H = f·H_i + g·H_f`.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    /// `f = 1 - s`, `g = s`.
    Linear,
    /// Monotone cubic through sampled `(s, f, g)`.
    Tabulated { f: Pchip, g: Pchip },
}

const BOUNDARY_TOL: f64 = 1e-12;

impl Schedule {
    pub fn linear() -> Self {
        Schedule::Linear
    }

    /// Builds a tabulated schedule from `(s_k, f_k, g_k)` samples.
    pub fn tabulated(samples: &[(f64, f64, f64)]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidSchedule("need at least two samples".into()));
        }
        let (s0, f0, g0) = samples[0];
        let (s1, f1, g1) = samples[samples.len() - 1];
        if s0.abs() > BOUNDARY_TOL || (s1 - 1.0).abs() > BOUNDARY_TOL {
            return Err(Error::InvalidSchedule(
                "samples must span s = 0 to s = 1".into(),
            ));
        }
        if (f0 - 1.0).abs() > BOUNDARY_TOL
            || g0.abs() > BOUNDARY_TOL
            || f1.abs() > BOUNDARY_TOL
            || (g1 - 1.0).abs() > BOUNDARY_TOL
        {
            return Err(Error::InvalidSchedule(
                "boundary conditions f(0)=1, g(0)=0, f(1)=0, g(1)=1 violated".into(),
            ));
        }
        for w in samples.windows(2) {
            let ((sa, fa, ga), (sb, fb, gb)) = (w[0], w[1]);
            if sb <= sa {
                return Err(Error::InvalidSchedule(
                    "s must be strictly increasing".into(),
                ));
            }
            if fb > fa || gb < ga {
                return Err(Error::InvalidSchedule(format!(
                    "f must not increase and g must not decrease (between s = {sa} and {sb})"
                )));
            }
        }
        if let Some(&(s, _, _)) = samples.iter().find(|&&(_, f, g)| f == 0.0 && g == 0.0) {
            return Err(Error::SingularSchedule { s });
        }
        let ss: Vec<f64> = samples.iter().map(|p| p.0).collect();
        let fs: Vec<f64> = samples.iter().map(|p| p.1).collect();
        let gs: Vec<f64> = samples.iter().map(|p| p.2).collect();
        Ok(Schedule::Tabulated {
            f: Pchip::new(ss.clone(), fs),
            g: Pchip::new(ss, gs),
        })
    }

    /// `(f(s), g(s))`.
    pub fn eval(&self, s: f64) -> (f64, f64) {
        match self {
            Schedule::Linear => (1.0 - s, s),
            Schedule::Tabulated { f, g } => (f.eval(s).0.max(0.0), g.eval(s).0.max(0.0)),
        }
    }

    /// `(df/ds, dg/ds)`.
    pub fn derivative(&self, s: f64) -> (f64, f64) {
        match self {
            Schedule::Linear => (-1.0, 1.0),
            Schedule::Tabulated { f, g } => (f.eval(s).1, g.eval(s).1),
        }
    }

    pub fn f(&self, s: f64) -> f64 {
        self.eval(s).0
    }

    pub fn g(&self, s: f64) -> f64 {
        self.eval(s).1
    }

    /// Largest `f + g` over the schedule's sample points.
    pub(crate) fn max_weight_sum(&self) -> f64 {
        match self {
            Schedule::Linear => 1.0,
            Schedule::Tabulated { f, g } => f
                .ys()
                .iter()
                .zip(g.ys())
                .map(|(a, b)| a + b)
                .fold(0.0, f64::max),
        }
    }

    /// Sample points where the schedule changes shape; quadrature splits there.
    pub(crate) fn knots(&self) -> Vec<f64> {
        match self {
            Schedule::Linear => vec![0.0, 1.0],
            Schedule::Tabulated { f, .. } => f.xs().to_vec(),
        }
    }
}

/// Adiabaticity parameter and numerical resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Precision {
    pub epsilon: f64,
    pub quad_tol: f64,
    pub ode_steps_per_unit_time: f64,
}

impl Default for Precision {
    fn default() -> Self {
        Self {
            epsilon: 0.2,
            quad_tol: 1e-10,
            ode_steps_per_unit_time: 50.0,
        }
    }
}

impl Precision {
    pub fn new(epsilon: f64, quad_tol: f64, ode_steps_per_unit_time: f64) -> Result<Self> {
        let p = Self {
            epsilon,
            quad_tol,
            ode_steps_per_unit_time,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_epsilon(epsilon: f64) -> Result<Self> {
        Self::new(
            epsilon,
            Self::default().quad_tol,
            Self::default().ode_steps_per_unit_time,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Domain(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.quad_tol > 0.0) || !(self.ode_steps_per_unit_time > 0.0) {
            return Err(Error::Domain(
                "tolerances and step counts must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Schedule choice inside a [`ProblemDescriptor`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ScheduleSpec {
    Linear,
    Tabulated(Vec<(f64, f64, f64)>),
}

/// JSON problem file: `{"n":6,"parts":[3,3],"marked":"010110","schedule":"linear"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDescriptor {
    pub n: usize,
    pub parts: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marked: Option<String>,
    #[serde(default = "default_schedule")]
    pub schedule: ScheduleSpec,
}

fn default_schedule() -> ScheduleSpec {
    ScheduleSpec::Linear
}

/// Validated content of a [`ProblemDescriptor`].
#[derive(Debug, Clone)]
pub struct Problem {
    pub splitting: Splitting,
    pub marked: MarkedState,
    pub schedule: Schedule,
}

impl ProblemDescriptor {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("descriptor serializes")
    }

    pub fn resolve(&self) -> Result<Problem> {
        let splitting = Splitting::new(self.n, self.parts.clone())?;
        let marked = match &self.marked {
            Some(text) => MarkedState::parse(text)?,
            None => MarkedState::zeros(self.n),
        };
        marked.check_len(self.n)?;
        let schedule = match &self.schedule {
            ScheduleSpec::Linear => Schedule::Linear,
            ScheduleSpec::Tabulated(samples) => Schedule::tabulated(samples)?,
        };
        Ok(Problem {
            splitting,
            marked,
            schedule,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_splitting_examples() {
        let s = Splitting::new(6, vec![6]).unwrap();
        assert_eq!(s.m(), 1);
        assert_eq!(s.block_dims(), vec![64.0]);

        let s = Splitting::new(1, vec![1]).unwrap();
        assert_eq!((s.m(), s.block_dims()), (1, vec![2.0]));

        let s = Splitting::new(6, vec![3, 2, 1]).unwrap();
        assert_eq!(s.m(), 3);
        assert_eq!(s.block_dims(), vec![8.0, 4.0, 2.0]);
    }

    #[test]
    fn make_splitting_errors() {
        assert_eq!(
            Splitting::new(6, vec![3, 2]),
            Err(Error::PartsMismatch { n: 6, sum: 5 })
        );
        assert!(matches!(
            Splitting::new(2, vec![2, 0]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(Splitting::new(2, vec![]), Err(Error::Domain(_))));
    }

    #[test]
    fn equal_splitting_examples() {
        assert_eq!(Splitting::equal(30, 5).unwrap().parts(), &[6, 6, 6, 6, 6]);
        assert_eq!(Splitting::equal(6, 6).unwrap().parts(), &[1; 6]);
        assert_eq!(
            Splitting::equal(6, 4),
            Err(Error::NotDivisible { n: 6, m: 4 })
        );
        assert_eq!(
            Splitting::equal(7, 1).unwrap(),
            Splitting::new(7, vec![7]).unwrap()
        );
    }

    #[test]
    fn block_values_are_big_endian() {
        let s = Splitting::new(5, vec![2, 3]).unwrap();
        // index 0b10_011
        assert_eq!(s.block_value(0, 0b10011), 0b10);
        assert_eq!(s.block_value(1, 0b10011), 0b011);
        assert_eq!(s.block_starts(), vec![0, 2]);
    }

    #[test]
    fn marked_state_index() {
        let m = MarkedState::parse("010110").unwrap();
        assert_eq!(m.index(), 0b010110);
        assert_eq!(MarkedState::from_index(6, 22), m);
        assert_eq!(m.to_string(), "010110");
        assert!(MarkedState::parse("01a").is_err());
    }

    #[test]
    fn linear_schedule_examples() {
        let s = Schedule::linear();
        assert_eq!(s.eval(0.0), (1.0, 0.0));
        assert_eq!(s.eval(0.5), (0.5, 0.5));
        assert_eq!(s.derivative(0.3), (-1.0, 1.0));
    }

    #[test]
    fn tabulated_schedule_validation() {
        let ok = Schedule::tabulated(&[(0.0, 1.0, 0.0), (0.5, 0.7, 0.2), (1.0, 0.0, 1.0)]).unwrap();
        assert_eq!(ok.eval(0.0), (1.0, 0.0));
        let (f, g) = ok.eval(1.0);
        assert!(f.abs() < 1e-12 && (g - 1.0).abs() < 1e-12);

        let bad = Schedule::tabulated(&[(0.0, 1.0, 0.0), (0.5, 1.2, 0.2), (1.0, 0.0, 1.0)]);
        assert!(matches!(bad, Err(Error::InvalidSchedule(_))));
        let bad = Schedule::tabulated(&[(0.0, 0.9, 0.0), (1.0, 0.0, 1.0)]);
        assert!(matches!(bad, Err(Error::InvalidSchedule(_))));
        let singular = Schedule::tabulated(&[(0.0, 1.0, 0.0), (0.5, 0.0, 0.0), (1.0, 0.0, 1.0)]);
        assert_eq!(singular, Err(Error::SingularSchedule { s: 0.5 }));
    }

    #[test]
    fn precision_validation() {
        assert!(Precision::with_epsilon(0.1).is_ok());
        assert!(Precision::with_epsilon(1.0).is_err());
        assert!(Precision::new(0.1, 0.0, 10.0).is_err());
        assert_eq!(Precision::default().epsilon, 0.2);
    }

    #[test]
    fn descriptor_round_trip() {
        let text = r#"{"n":6,"parts":[3,3],"marked":"010110","schedule":"linear"}"#;
        let d = ProblemDescriptor::from_json(text).unwrap();
        assert_eq!(d.to_json(), text);
        let p = d.resolve().unwrap();
        assert_eq!(p.splitting.parts(), &[3, 3]);
        assert_eq!(p.marked.index(), 0b010110);

        assert!(ProblemDescriptor::from_json(r#"{"n":2,"parts":[2],"bogus":1}"#).is_err());
        let d = ProblemDescriptor::from_json(r#"{"n":2,"parts":[2],"marked":"011"}"#).unwrap();
        assert!(matches!(d.resolve(), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn compositions_are_counted() {
        assert_eq!(all_splittings(4).len(), 8);
        assert!(all_splittings(4)
            .iter()
            .all(|s| s.parts().iter().sum::<usize>() == 4));
    }
}
