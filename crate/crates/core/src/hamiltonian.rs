//! Explicit operators for desk-scale problems.
//!
//! Initial Hamiltonian of a splitting: `Σ_b (1 - |Ψ₀⁽ᵇ⁾⟩⟨Ψ₀⁽ᵇ⁾|)`, each term the
//! projector off the uniform superposition of block `b`, identity elsewhere.
//! Final Hamiltonian: `Σ_b (1 - |z⁽ᵇ⁾⟩⟨z⁽ᵇ⁾|)`, one oracle clause per block.
//! Both are real symmetric in the computational basis.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::problem::{MarkedState, Schedule, Splitting};

/// Largest qubit count for which dense matrices are built.
pub const DENSE_CAP: usize = 12;

/// Largest block size for a symbolic Pauli expansion of an oracle clause.
pub const PAULI_BLOCK_CAP: usize = 20;

const PRUNE_TOL: f64 = 1e-14;

fn check_cap(n: usize) -> Result<()> {
    if n > DENSE_CAP {
        return Err(Error::DenseCapExceeded { n, cap: DENSE_CAP });
    }
    Ok(())
}

/// Dense real symmetric operator on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    n: usize,
    matrix: DMatrix<f64>,
}

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectrum {
    /// Distinct eigenvalues (within `tol`) with their multiplicities.
    pub fn levels(&self, tol: f64) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &v in &self.values {
            match out.last_mut() {
                Some((e, count)) if (v - *e).abs() <= tol => *count += 1,
                _ => out.push((v, 1)),
            }
        }
        out
    }
}

impl DenseOperator {
    pub fn from_matrix(n: usize, matrix: DMatrix<f64>) -> Result<Self> {
        check_cap(n)?;
        let dim = 1usize << n;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                found: matrix.nrows(),
            });
        }
        Ok(Self { n, matrix })
    }

    pub fn diagonal(n: usize, diag: &[f64]) -> Result<Self> {
        Self::from_matrix(n, DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.matrix[(row, col)]
    }

    pub fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.matrix[(i, j)] == 0.0))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (&self.matrix - self.matrix.transpose()).amax() <= tol
    }

    pub fn spectrum(&self) -> Spectrum {
        let eig = self.matrix.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            eig.eigenvectors[(r, order[c])]
        });
        Spectrum { values, vectors }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    fn linear_combination(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self {
            n: self.n,
            matrix: &self.matrix * a + &other.matrix * b,
        })
    }
}

/// Single-qubit Pauli factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Z,
}

impl Pauli {
    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of Pauli factors, qubit 1 first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliWord(Vec<Pauli>);

impl PauliWord {
    pub fn identity(n: usize) -> Self {
        Self(vec![Pauli::I; n])
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&p| p != Pauli::I).count()
    }

    // bit masks in the big-endian index convention
    fn masks(&self) -> (usize, usize) {
        let n = self.0.len();
        let mut x = 0;
        let mut z = 0;
        for (q, p) in self.0.iter().enumerate() {
            let bit = 1 << (n - 1 - q);
            match p {
                Pauli::X => x |= bit,
                Pauli::Z => z |= bit,
                Pauli::I => {}
            }
        }
        (x, z)
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

impl FromStr for PauliWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Parse(format!("invalid Pauli letter {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliWord)
    }
}

/// Real linear combination of Pauli words over `{I, X, Z}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PauliTermSum {
    n: usize,
    terms: BTreeMap<PauliWord, f64>,
}

impl PauliTermSum {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add(&mut self, coefficient: f64, word: PauliWord) -> Result<()> {
        if word.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: word.len(),
            });
        }
        *self.terms.entry(word).or_insert(0.0) += coefficient;
        Ok(())
    }

    fn pruned(mut self) -> Self {
        self.terms.retain(|_, c| c.abs() > PRUNE_TOL);
        self
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliWord, f64)> {
        self.terms.iter().map(|(w, &c)| (w, c))
    }

    pub fn coefficient(&self, word: &str) -> f64 {
        word.parse::<PauliWord>()
            .ok()
            .and_then(|w| self.terms.get(&w).copied())
            .unwrap_or(0.0)
    }

    pub fn max_weight(&self) -> usize {
        self.terms.keys().map(PauliWord::weight).max().unwrap_or(0)
    }

    /// Dense matrix `Σ c_w P_w`.
    pub fn to_dense(&self) -> Result<DenseOperator> {
        check_cap(self.n)?;
        let dim = 1usize << self.n;
        let mut m = DMatrix::zeros(dim, dim);
        for (word, &c) in &self.terms {
            let (x, z) = word.masks();
            // ⟨j ⊕ x| X^x Z^z |j⟩ = (-1)^{popcount(z & j)}
            for j in 0..dim {
                let sign = if (z & j).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                m[(j ^ x, j)] += c * sign;
            }
        }
        DenseOperator::from_matrix(self.n, m)
    }

    /// One term per line: `coefficient<TAB>word`, coefficient to 17
    /// significant digits.
    pub fn to_tsv(&self) -> String {
        self.terms
            .iter()
            .map(|(w, c)| format!("{c:.16e}\t{w}\n"))
            .collect()
    }

    pub fn from_tsv(n: usize, text: &str) -> Result<Self> {
        let mut out = Self::new(n);
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (c, w) = line.split_once('\t').ok_or_else(|| {
                Error::Parse(format!("expected coefficient<TAB>word, got {line:?}"))
            })?;
            let c: f64 = c
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("{e}: {c:?}")))?;
            out.add(c, w.trim().parse()?)?;
        }
        Ok(out)
    }
}

/// Expansion of `1 - ⊗_{q∈block} P_q` where `P_q = ½(I + sign_q·A)` and `A`
/// is `X` or `Z`; adds it into `sum`.
fn add_block_clause(
    sum: &mut PauliTermSum,
    start: usize,
    size: usize,
    letter: Pauli,
    signs: &[f64],
) -> Result<()> {
    let n = sum.n;
    let scale = 0.5f64.powi(size as i32);
    sum.add(1.0, PauliWord::identity(n))?;
    for subset in 0usize..(1 << size) {
        let mut word = vec![Pauli::I; n];
        let mut sign = 1.0;
        for k in 0..size {
            if subset >> (size - 1 - k) & 1 == 1 {
                word[start + k] = letter;
                sign *= signs[k];
            }
        }
        sum.add(-scale * sign, PauliWord(word))?;
    }
    Ok(())
}

fn check_pauli_blocks(splitting: &Splitting) -> Result<()> {
    if splitting.largest_block() > PAULI_BLOCK_CAP {
        return Err(Error::Domain(format!(
            "Pauli form limited to blocks of at most {PAULI_BLOCK_CAP} qubits"
        )));
    }
    Ok(())
}

/// Pauli form of the initial Hamiltonian (X-type words only).
pub fn initial_pauli(splitting: &Splitting) -> Result<PauliTermSum> {
    check_pauli_blocks(splitting)?;
    let mut sum = PauliTermSum::new(splitting.n());
    for (&start, &size) in splitting.block_starts().iter().zip(splitting.parts()) {
        add_block_clause(&mut sum, start, size, Pauli::X, &vec![1.0; size])?;
    }
    Ok(sum.pruned())
}

/// Pauli form of the final Hamiltonian (Z-type words only).
pub fn final_pauli(splitting: &Splitting, marked: &MarkedState) -> Result<PauliTermSum> {
    marked.check_len(splitting.n())?;
    check_pauli_blocks(splitting)?;
    let mut sum = PauliTermSum::new(splitting.n());
    for (&start, &size) in splitting.block_starts().iter().zip(splitting.parts()) {
        // |z⟩⟨z| = ½(I + (-1)^z Z)
        let signs: Vec<f64> = marked.bits()[start..start + size]
            .iter()
            .map(|&b| if b == 0 { 1.0 } else { -1.0 })
            .collect();
        add_block_clause(&mut sum, start, size, Pauli::Z, &signs)?;
    }
    Ok(sum.pruned())
}

/// Diagonal of the final Hamiltonian: the number of violated block clauses
/// of every basis state.
pub fn final_diagonal(splitting: &Splitting, marked: &MarkedState) -> Result<Vec<f64>> {
    marked.check_len(splitting.n())?;
    let n = splitting.n();
    if n >= usize::BITS as usize - 1 {
        return Err(Error::Domain(format!("{n} qubits cannot be indexed")));
    }
    let target = marked.index();
    let masks: Vec<usize> = splitting
        .block_starts()
        .iter()
        .zip(splitting.parts())
        .map(|(&start, &size)| ((1usize << size) - 1) << (n - start - size))
        .collect();
    Ok((0..1usize << n)
        .map(|j| {
            masks
                .iter()
                .filter(|&&mask| (j ^ target) & mask != 0)
                .count() as f64
        })
        .collect())
}

/// Dense initial Hamiltonian together with its Pauli form.
pub fn build_initial(splitting: &Splitting) -> Result<(DenseOperator, PauliTermSum)> {
    let n = splitting.n();
    check_cap(n)?;
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for (&start, &size) in splitting.block_starts().iter().zip(splitting.parts()) {
        let shift = n - start - size;
        let mask = ((1usize << size) - 1) << shift;
        let weight = 1.0 / (1usize << size) as f64;
        for j in 0..dim {
            m[(j, j)] += 1.0;
            let rest = j & !mask;
            for v in 0..1usize << size {
                m[(j, rest | (v << shift))] -= weight;
            }
        }
    }
    Ok((DenseOperator::from_matrix(n, m)?, initial_pauli(splitting)?))
}

/// Dense final Hamiltonian together with its Pauli form.
pub fn build_final(
    splitting: &Splitting,
    marked: &MarkedState,
) -> Result<(DenseOperator, PauliTermSum)> {
    marked.check_len(splitting.n())?;
    check_cap(splitting.n())?;
    let diag = final_diagonal(splitting, marked)?;
    Ok((
        DenseOperator::diagonal(splitting.n(), &diag)?,
        final_pauli(splitting, marked)?,
    ))
}

/// Oracle built from overlapping neighbour pairs `Σ_{i=1}^{n-1} h_{i,i+1}`.
pub fn overlapping_diagonal(marked: &MarkedState) -> Result<Vec<f64>> {
    let n = marked.len();
    if n < 2 {
        return Err(Error::Domain(
            "overlapping pairs need at least 2 qubits".into(),
        ));
    }
    check_cap(n)?;
    let target = marked.index();
    Ok((0..1usize << n)
        .map(|j| {
            (0..n - 1)
                .filter(|&i| (j ^ target) & (0b11 << (n - 2 - i)) != 0)
                .count() as f64
        })
        .collect())
}

pub fn build_overlapping(n: usize, marked: &MarkedState) -> Result<DenseOperator> {
    marked.check_len(n)?;
    DenseOperator::diagonal(n, &overlapping_diagonal(marked)?)
}

/// `f(s)·H_i + g(s)·H_f`.
pub fn combine(
    initial: &DenseOperator,
    fin: &DenseOperator,
    schedule: &Schedule,
    s: f64,
) -> Result<DenseOperator> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("s must lie in [0, 1], got {s}")));
    }
    let (f, g) = schedule.eval(s);
    initial.linear_combination(f, fin, g)
}

/// `ḟ(s)·H_i + ġ(s)·H_f`.
pub fn combine_derivative(
    initial: &DenseOperator,
    fin: &DenseOperator,
    schedule: &Schedule,
    s: f64,
) -> Result<DenseOperator> {
    let (df, dg) = schedule.derivative(s);
    initial.linear_combination(df, fin, dg)
}

// In-place Walsh–Hadamard transform: out[z] = Σ_j (-1)^{popcount(z & j)} v[j].
fn walsh_hadamard(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// Exact expansion of a dense operator in the Pauli basis.
///
/// Fails when any word containing `Y` carries weight, since such operators
/// fall outside the `{I, X, Z}` algebra used here.
pub fn pauli_expansion(op: &DenseOperator) -> Result<PauliTermSum> {
    let n = op.n();
    let dim = op.dim();
    let mut sum = PauliTermSum::new(n);
    let mut buf = vec![0.0; dim];
    for x in 0..dim {
        for (j, slot) in buf.iter_mut().enumerate() {
            *slot = op.get(j, j ^ x);
        }
        walsh_hadamard(&mut buf);
        for (z, &tr) in buf.iter().enumerate() {
            let c = tr / dim as f64;
            if c.abs() <= PRUNE_TOL {
                continue;
            }
            if x & z != 0 {
                return Err(Error::UnsupportedOperator(format!(
                    "component outside the {{I, X, Z}} algebra (x-mask {x:b}, z-mask {z:b})"
                )));
            }
            let word = (0..n)
                .map(|q| {
                    let bit = 1 << (n - 1 - q);
                    match (x & bit != 0, z & bit != 0) {
                        (true, _) => Pauli::X,
                        (false, true) => Pauli::Z,
                        (false, false) => Pauli::I,
                    }
                })
                .collect();
            sum.add(c, PauliWord(word))?;
        }
    }
    Ok(sum.pruned())
}

/// Largest number of qubits coupled by one oracle clause.
pub fn locality_weight(splitting: &Splitting) -> usize {
    splitting.largest_block()
}

/// Matrix-free `f·H_i + g·H_f` for state-vector evolution.
#[derive(Debug, Clone)]
pub struct BlockHamiltonian {
    n: usize,
    // (shift, size) of each block
    blocks: Vec<(usize, usize)>,
    final_diag: Vec<f64>,
}

impl BlockHamiltonian {
    pub fn new(splitting: &Splitting, marked: &MarkedState) -> Result<Self> {
        check_cap(splitting.n())?;
        let final_diag = final_diagonal(splitting, marked)?;
        Ok(Self::with_final(splitting, final_diag))
    }

    /// Block-wise initial Hamiltonian with an arbitrary diagonal oracle.
    pub fn with_final(splitting: &Splitting, final_diag: Vec<f64>) -> Self {
        let n = splitting.n();
        let blocks = splitting
            .block_starts()
            .iter()
            .zip(splitting.parts())
            .map(|(&start, &size)| (n - start - size, size))
            .collect();
        Self {
            n,
            blocks,
            final_diag,
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn final_diagonal(&self) -> &[f64] {
        &self.final_diag
    }

    /// Upper bound on `‖H_i‖` (each block projector has norm 1).
    pub fn initial_norm(&self) -> f64 {
        self.blocks.len() as f64
    }

    pub fn final_norm(&self) -> f64 {
        self.final_diag.iter().copied().fold(0.0, f64::max)
    }

    /// `out = (f·H_i + g·H_f)·psi`.
    pub fn apply(&self, f: f64, g: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let m = self.blocks.len() as f64;
        for ((o, &p), &d) in out.iter_mut().zip(psi).zip(&self.final_diag) {
            *o = p * (f * m + g * d);
        }
        if f == 0.0 {
            return;
        }
        let dim = psi.len();
        for &(shift, size) in &self.blocks {
            let block_dim = 1usize << size;
            let mask = (block_dim - 1) << shift;
            let weight = f / block_dim as f64;
            for base in (0..dim).filter(|j| j & mask == 0) {
                let mean: Complex64 = (0..block_dim).map(|v| psi[base | (v << shift)]).sum();
                let mean = mean * weight;
                for v in 0..block_dim {
                    out[base | (v << shift)] -= mean;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn split(n: usize, parts: &[usize]) -> Splitting {
        Splitting::new(n, parts.to_vec()).unwrap()
    }

    #[test]
    fn initial_single_qubit() {
        let (h, pauli) = build_initial(&split(1, &[1])).unwrap();
        assert_eq!(
            h.matrix(),
            &DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5])
        );
        assert_eq!(pauli.coefficient("I"), 0.5);
        assert_eq!(pauli.coefficient("X"), -0.5);
    }

    #[test]
    fn initial_ground_state_is_uniform() {
        let (h, _) = build_initial(&split(2, &[2])).unwrap();
        let spec = h.spectrum();
        assert!(spec.values[0].abs() < 1e-12);
        let v = spec.vectors.column(0);
        for k in 0..4 {
            assert_relative_eq!(v[k].abs(), 0.5, epsilon = 1e-12);
        }
        assert!(h.is_symmetric(1e-15));
    }

    #[test]
    fn initial_maximal_spectrum_is_hamming_ladder() {
        let (h, _) = build_initial(&Splitting::maximal(3).unwrap()).unwrap();
        let ev = h.eigenvalues();
        let expected = [0.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 3.0];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn final_examples() {
        let zeros = MarkedState::zeros(2);
        let (h, _) = build_final(&split(2, &[2]), &zeros).unwrap();
        assert_eq!(h.matrix().diagonal().as_slice(), &[0.0, 1.0, 1.0, 1.0]);
        let (h, _) = build_final(&split(2, &[1, 1]), &zeros).unwrap();
        assert_eq!(h.matrix().diagonal().as_slice(), &[0.0, 1.0, 1.0, 2.0]);
        assert!(h.is_diagonal());

        // two 2-bit clauses: enumerate the 16 assignments directly
        let (h, _) = build_final(&split(4, &[2, 2]), &MarkedState::zeros(4)).unwrap();
        for j in 0..16usize {
            let violated = usize::from(j >> 2 != 0) + usize::from(j & 0b11 != 0);
            assert_eq!(h.get(j, j), violated as f64);
        }
        assert_eq!(h.get(0b0101, 0b0101), 2.0);

        assert!(matches!(
            build_final(&split(3, &[3]), &MarkedState::zeros(2)),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn dense_cap_is_enforced() {
        assert!(matches!(
            build_initial(&Splitting::unstructured(13).unwrap()),
            Err(Error::DenseCapExceeded { n: 13, cap: 12 })
        ));
    }

    #[test]
    fn combine_boundaries() {
        let s = split(2, &[1, 1]);
        let (hi, _) = build_initial(&s).unwrap();
        let (hf, _) = build_final(&s, &MarkedState::parse("10").unwrap()).unwrap();
        let lin = Schedule::linear();
        assert_eq!(combine(&hi, &hf, &lin, 0.0).unwrap(), hi);
        assert_eq!(combine(&hi, &hf, &lin, 1.0).unwrap(), hf);
        assert!(combine(&hi, &hf, &lin, 1.5).is_err());

        let s1 = split(1, &[1]);
        let (hi, _) = build_initial(&s1).unwrap();
        let (hf, _) = build_final(&s1, &MarkedState::zeros(1)).unwrap();
        let ev = combine(&hi, &hf, &lin, 0.5).unwrap().eigenvalues();
        assert_relative_eq!(ev[1] - ev[0], 0.5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn expansion_examples() {
        // 1 - |1⟩⟨1| = ½(I + Z)
        let op = DenseOperator::diagonal(1, &[1.0, 0.0]).unwrap();
        let p = pauli_expansion(&op).unwrap();
        assert_eq!(p.len(), 2);
        assert_relative_eq!(p.coefficient("I"), 0.5);
        assert_relative_eq!(p.coefficient("Z"), 0.5);

        let (h, symbolic) = build_final(&split(2, &[2]), &MarkedState::zeros(2)).unwrap();
        let p = pauli_expansion(&h).unwrap();
        assert_eq!(p.len(), 4);
        assert_relative_eq!(p.coefficient("II"), 0.75);
        for w in ["ZI", "IZ", "ZZ"] {
            assert_relative_eq!(p.coefficient(w), -0.25);
            assert_relative_eq!(symbolic.coefficient(w), -0.25);
        }

        for n in 1..=6 {
            let (h, _) =
                build_final(&Splitting::maximal(n).unwrap(), &MarkedState::zeros(n)).unwrap();
            let p = pauli_expansion(&h).unwrap();
            assert_eq!(p.max_weight(), 1);
            assert_eq!(p.terms().filter(|(w, _)| w.weight() == 1).count(), n);
        }
    }

    #[test]
    fn expansion_rejects_y_components() {
        // XX + YY has a real symmetric matrix but needs Y words
        let mut m = DMatrix::zeros(4, 4);
        m[(1, 2)] = 2.0;
        m[(2, 1)] = 2.0;
        let op = DenseOperator::from_matrix(2, m).unwrap();
        assert!(matches!(
            pauli_expansion(&op),
            Err(Error::UnsupportedOperator(_))
        ));
    }

    #[test]
    fn initial_expansion_matches_symbolic() {
        let s = split(4, &[3, 1]);
        let (h, symbolic) = build_initial(&s).unwrap();
        let numeric = pauli_expansion(&h).unwrap();
        assert_eq!(numeric.len(), symbolic.len());
        for (w, c) in symbolic.terms() {
            assert_relative_eq!(numeric.coefficient(&w.to_string()), c, epsilon = 1e-14);
        }
    }

    #[test]
    fn unstructured_oracle_has_full_weight_word() {
        let p = final_pauli(&split(6, &[6]), &MarkedState::zeros(6)).unwrap();
        assert_eq!(p.max_weight(), 6);
        assert_eq!(p.coefficient("ZZZZZZ"), -1.0 / 64.0);
        let p = final_pauli(&split(3, &[3]), &MarkedState::parse("101").unwrap()).unwrap();
        assert_eq!(p.coefficient("ZZZ"), -1.0 / 8.0);
        let p = final_pauli(&split(3, &[3]), &MarkedState::parse("100").unwrap()).unwrap();
        assert_eq!(p.coefficient("ZZZ"), 1.0 / 8.0);
    }

    #[test]
    fn locality_examples() {
        assert_eq!(locality_weight(&split(6, &[6])), 6);
        assert_eq!(locality_weight(&Splitting::maximal(5).unwrap()), 1);
        assert_eq!(locality_weight(&split(6, &[3, 2, 1])), 3);
    }

    #[test]
    fn overlapping_examples() {
        let marked = MarkedState::zeros(2);
        let (pair, _) = build_final(&split(2, &[2]), &marked).unwrap();
        assert_eq!(build_overlapping(2, &marked).unwrap(), pair);

        let h = build_overlapping(3, &MarkedState::zeros(3)).unwrap();
        assert_eq!(h.get(0b111, 0b111), 2.0);
        assert_eq!(h.get(0b010, 0b010), 2.0);
        assert_eq!(h.get(0b100, 0b100), 1.0);
        assert!(build_overlapping(1, &MarkedState::zeros(1)).is_err());
    }

    #[test]
    fn tsv_format() {
        let p = final_pauli(&split(2, &[2]), &MarkedState::zeros(2)).unwrap();
        let text = p.to_tsv();
        assert!(text.lines().any(|l| l == "-2.5000000000000000e-1\tZZ"));
        assert_eq!(PauliTermSum::from_tsv(2, &text).unwrap(), p);
    }

    #[test]
    fn matrix_free_matches_dense() {
        let s = split(5, &[2, 3]);
        let marked = MarkedState::parse("01101").unwrap();
        let (hi, _) = build_initial(&s).unwrap();
        let (hf, _) = build_final(&s, &marked).unwrap();
        let (f, g) = (0.3, 0.8);
        let dense = hi.matrix() * f + hf.matrix() * g;
        let bh = BlockHamiltonian::new(&s, &marked).unwrap();
        let psi: Vec<Complex64> = (0..32)
            .map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos()))
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); 32];
        bh.apply(f, g, &psi, &mut out);
        for r in 0..32 {
            let expected: Complex64 = (0..32).map(|c| psi[c] * dense[(r, c)]).sum();
            assert!((out[r] - expected).norm() < 1e-13);
        }
    }
}
