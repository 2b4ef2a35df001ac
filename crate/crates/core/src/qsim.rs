//! Exact state-vector linear algebra for small composite systems.
//!
//! Amplitudes use a big-endian layout: the first subsystem varies slowest.
//! A subsystem of dimension 3 carries the levels `|0⟩, |1⟩, |v⟩`, with `|v⟩`
//! the vacuum level of a photon that has been removed from the channel.

use std::fmt;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex64;

/// Tolerance used when validating user-supplied kets, operators and bases.
pub const CONSTRUCTION_TOL: f64 = 1e-9;
/// Tolerance for norm checks on states produced during simulation.
pub const NORM_TOL: f64 = 1e-10;
/// Outcomes less likely than this carry no post-measurement state.
pub const NEGLIGIBLE_PROBABILITY: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QsimError {
    #[error("subsystem dimensions must be a non-empty list of positive integers, got {0:?}")]
    InvalidDims(Vec<usize>),
    #[error("expected {expected} amplitudes, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("state is not normalized: squared norm {0}")]
    NotNormalized(f64),
    #[error("the zero vector cannot be normalized")]
    ZeroVector,
    #[error("operator is not unitary: max |U†U - I| entry is {0:.3e}")]
    NotUnitary(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("target subsystem {0} listed more than once")]
    RepeatedTarget(usize),
    #[error("target subsystem {index} out of range for {count} subsystems")]
    TargetOutOfRange { index: usize, count: usize },
    #[error("measurement basis is not orthonormal: max |<b_i|b_j> - δ_ij| is {0:.3e}")]
    NonOrthonormalBasis(f64),
    #[error("measurement basis has {actual} vectors but the measured subspace has dimension {expected}")]
    IncompleteBasis { expected: usize, actual: usize },
    #[error("tensor product of an empty list")]
    EmptyTensor,
}

pub type Result<T> = std::result::Result<T, QsimError>;

/// Dimensions of the subsystems of a composite Hilbert space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Dims(Vec<usize>);

impl Dims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(QsimError::InvalidDims(dims));
        }
        Ok(Self(dims))
    }

    pub fn qubits(count: usize) -> Self {
        Self(vec![2; count.max(1)])
    }

    pub fn single(dim: usize) -> Result<Self> {
        Self::new(vec![dim])
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false: construction rejects empty registers.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn concat(&self, other: &Dims) -> Dims {
        let mut dims = self.0.clone();
        dims.extend_from_slice(&other.0);
        Dims(dims)
    }

    /// Dimensions of the listed subsystems, in the listed order.
    pub fn select(&self, targets: &[usize]) -> Result<Dims> {
        validate_targets(targets, self.len())?;
        Dims::new(targets.iter().map(|&t| self.0[t]).collect())
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.0.len()];
        for i in (0..self.0.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.0[i + 1];
        }
        strides
    }
}

impl TryFrom<Vec<usize>> for Dims {
    type Error = QsimError;

    fn try_from(value: Vec<usize>) -> Result<Self> {
        Dims::new(value)
    }
}

impl From<Dims> for Vec<usize> {
    fn from(value: Dims) -> Self {
        value.0
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "[{}]", parts.join("x"))
    }
}

fn validate_targets(targets: &[usize], count: usize) -> Result<()> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= count {
            return Err(QsimError::TargetOutOfRange { index: t, count });
        }
        if targets[..i].contains(&t) {
            return Err(QsimError::RepeatedTarget(t));
        }
    }
    Ok(())
}

/// A normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    dims: Dims,
    amps: Array1<C64>,
}

impl Ket {
    /// Builds a ket from amplitudes that must already be normalized within
    /// [`CONSTRUCTION_TOL`]; the stored vector is renormalized exactly.
    pub fn new(dims: Dims, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != dims.total() {
            return Err(QsimError::LengthMismatch { expected: dims.total(), actual: amps.len() });
        }
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(QsimError::NotNormalized(norm_sqr));
        }
        Ok(Self::from_array_unchecked(dims, Array1::from(amps) / C64::from(norm_sqr.sqrt())))
    }

    /// Builds a ket by normalizing an arbitrary nonzero vector.
    pub fn normalized(dims: Dims, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != dims.total() {
            return Err(QsimError::LengthMismatch { expected: dims.total(), actual: amps.len() });
        }
        Self::normalize_array(dims, Array1::from(amps))
    }

    fn normalize_array(dims: Dims, amps: Array1<C64>) -> Result<Self> {
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sqr.is_finite() || norm_sqr <= 0.0 {
            return Err(QsimError::ZeroVector);
        }
        Ok(Self::from_array_unchecked(dims, amps / C64::from(norm_sqr.sqrt())))
    }

    fn from_array_unchecked(dims: Dims, amps: Array1<C64>) -> Self {
        Self { dims, amps }
    }

    /// Computational basis state `|index⟩` in the big-endian layout.
    pub fn basis(dims: Dims, index: usize) -> Result<Self> {
        let n = dims.total();
        if index >= n {
            return Err(QsimError::TargetOutOfRange { index, count: n });
        }
        let mut amps = Array1::from_elem(n, ZERO);
        amps[index] = ONE;
        Ok(Self::from_array_unchecked(dims, amps))
    }

    /// Single-qubit computational state `|bit⟩`.
    pub fn qubit(bit: u8) -> Self {
        Self::basis(Dims::qubits(1), usize::from(bit & 1)).expect("qubit index in range")
    }

    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_array_unchecked(Dims::qubits(1), Array1::from(vec![C64::from(h), C64::from(h)]))
    }

    pub fn minus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_array_unchecked(Dims::qubits(1), Array1::from(vec![C64::from(h), C64::from(-h)]))
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        if self.dims.total() != other.dims.total() {
            return Err(QsimError::DimensionMismatch(format!(
                "inner product of {} and {}",
                self.dims, other.dims
            )));
        }
        Ok(self.amps.iter().zip(other.amps.iter()).map(|(a, b)| a.conj() * b).sum())
    }

    /// Embeds a qubit state into a larger single-subsystem space, leaving the
    /// extra levels unpopulated.
    pub fn lift(&self, dim: usize) -> Result<Ket> {
        if self.dims.len() != 1 || self.dims.total() > dim {
            return Err(QsimError::DimensionMismatch(format!("cannot lift {} into [{}]", self.dims, dim)));
        }
        let mut amps = Array1::from_elem(dim, ZERO);
        amps.slice_mut(ndarray::s![..self.amps.len()]).assign(&self.amps);
        Ok(Self::from_array_unchecked(Dims::single(dim)?, amps))
    }
}

/// Kronecker product of the listed kets, in order.
pub fn tensor(parts: &[Ket]) -> Result<Ket> {
    let (first, rest) = parts.split_first().ok_or(QsimError::EmptyTensor)?;
    let mut dims = first.dims.clone();
    let mut amps = first.amps.clone();
    for part in rest {
        let mut next = Vec::with_capacity(amps.len() * part.amps.len());
        for a in amps.iter() {
            next.extend(part.amps.iter().map(|b| a * b));
        }
        dims = dims.concat(&part.dims);
        amps = Array1::from(next);
    }
    Ok(Ket::from_array_unchecked(dims, amps))
}

/// A square matrix acting on a composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dims: Dims,
    matrix: Array2<C64>,
    unitary: bool,
    hermitian: bool,
}

impl Operator {
    pub fn new(dims: Dims, matrix: Array2<C64>) -> Result<Self> {
        let n = dims.total();
        if matrix.dim() != (n, n) {
            return Err(QsimError::DimensionMismatch(format!(
                "matrix of shape {:?} for subsystem dims {}",
                matrix.dim(),
                dims
            )));
        }
        let hermitian = max_deviation(&matrix, &adjoint(&matrix)) <= CONSTRUCTION_TOL;
        Ok(Self { dims, matrix, unitary: false, hermitian })
    }

    /// Builds an operator and validates `U†U = I` within [`CONSTRUCTION_TOL`].
    pub fn unitary(dims: Dims, matrix: Array2<C64>) -> Result<Self> {
        let mut op = Self::new(dims, matrix)?;
        let deviation = unitarity_deviation(&op.matrix);
        if !(deviation <= CONSTRUCTION_TOL) {
            return Err(QsimError::NotUnitary(deviation));
        }
        op.unitary = true;
        Ok(op)
    }

    /// Row-major construction from nested rows.
    pub fn unitary_from_rows(dims: Dims, rows: &[Vec<C64>]) -> Result<Self> {
        Self::unitary(dims, rows_to_matrix(rows)?)
    }

    pub fn identity(dims: Dims) -> Self {
        let n = dims.total();
        Self { dims, matrix: Array2::eye(n), unitary: true, hermitian: true }
    }

    pub fn pauli_x() -> Self {
        Self::fixed_qubit_gate([[ZERO, ONE], [ONE, ZERO]], true)
    }

    pub fn pauli_y() -> Self {
        let i = C64::new(0.0, 1.0);
        Self::fixed_qubit_gate([[ZERO, -i], [i, ZERO]], true)
    }

    pub fn pauli_z() -> Self {
        Self::fixed_qubit_gate([[ONE, ZERO], [ZERO, -ONE]], true)
    }

    /// `iσy = σzσx`, which maps each of `|0⟩, |1⟩, |+⟩, |−⟩` to its orthogonal partner.
    pub fn i_sigma_y() -> Self {
        Self::fixed_qubit_gate([[ZERO, ONE], [-ONE, ZERO]], false)
    }

    /// Controlled-NOT with the first qubit as control.
    pub fn cnot() -> Self {
        let mut m = Array2::from_elem((4, 4), ZERO);
        m[[0, 0]] = ONE;
        m[[1, 1]] = ONE;
        m[[2, 3]] = ONE;
        m[[3, 2]] = ONE;
        Self { dims: Dims::qubits(2), matrix: m, unitary: true, hermitian: true }
    }

    fn fixed_qubit_gate(rows: [[C64; 2]; 2], hermitian: bool) -> Self {
        let matrix = Array2::from_shape_fn((2, 2), |(r, c)| rows[r][c]);
        Self { dims: Dims::qubits(1), matrix, unitary: true, hermitian }
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn adjoint(&self) -> Operator {
        Self {
            dims: self.dims.clone(),
            matrix: adjoint(&self.matrix),
            unitary: self.unitary,
            hermitian: self.hermitian,
        }
    }

    /// `self · other`.
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        if self.dims != other.dims {
            return Err(QsimError::DimensionMismatch(format!(
                "composing operators on {} and {}",
                self.dims, other.dims
            )));
        }
        let matrix = self.matrix.dot(&other.matrix);
        let hermitian = max_deviation(&matrix, &adjoint(&matrix)) <= CONSTRUCTION_TOL;
        Ok(Self { dims: self.dims.clone(), matrix, unitary: self.unitary && other.unitary, hermitian })
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Operator) -> Operator {
        Self {
            dims: self.dims.concat(&other.dims),
            matrix: ndarray::linalg::kron(&self.matrix, &other.matrix),
            unitary: self.unitary && other.unitary,
            hermitian: self.hermitian && other.hermitian,
        }
    }

    /// Extends a single-subsystem operator to a larger dimension, acting as
    /// the identity on the added levels.
    pub fn lift(&self, dim: usize) -> Result<Operator> {
        let n = self.dims.total();
        if self.dims.len() != 1 || n > dim {
            return Err(QsimError::DimensionMismatch(format!("cannot lift {} into [{}]", self.dims, dim)));
        }
        let mut matrix: Array2<C64> = Array2::eye(dim);
        matrix.slice_mut(ndarray::s![..n, ..n]).assign(&self.matrix);
        Ok(Self { dims: Dims::single(dim)?, matrix, unitary: self.unitary, hermitian: self.hermitian })
    }

    /// Applies the operator and renormalizes. Non-unitary operators that
    /// annihilate the state produce [`QsimError::ZeroVector`].
    pub fn apply(&self, ket: &Ket) -> Result<Ket> {
        let amps = self.apply_raw(ket)?;
        if self.unitary {
            let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
            if (norm_sqr - 1.0).abs() > NORM_TOL {
                return Err(QsimError::NotNormalized(norm_sqr));
            }
        }
        Ket::normalize_array(self.dims.clone(), amps)
    }

    /// Matrix-vector product without renormalization.
    pub fn apply_raw(&self, ket: &Ket) -> Result<Array1<C64>> {
        if self.dims != ket.dims {
            return Err(QsimError::DimensionMismatch(format!(
                "operator on {} applied to ket on {}",
                self.dims, ket.dims
            )));
        }
        Ok(self.matrix.dot(&ket.amps))
    }
}

fn rows_to_matrix(rows: &[Vec<C64>]) -> Result<Array2<C64>> {
    let n = rows.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(QsimError::DimensionMismatch(format!(
            "matrix with {n} rows has a row of length {}",
            bad.len()
        )));
    }
    Ok(Array2::from_shape_fn((n, n), |(r, c)| rows[r][c]))
}

fn adjoint(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

fn max_deviation(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn unitarity_deviation(m: &Array2<C64>) -> f64 {
    let product = adjoint(m).dot(m);
    max_deviation(&product, &Array2::eye(m.nrows()))
}

/// Lifts `op` to the full space described by `dims`, acting on `targets`
/// (in the order listed) and as the identity everywhere else.
pub fn embed(op: &Operator, targets: &[usize], dims: &Dims) -> Result<Operator> {
    let target_dims = dims.select(targets)?;
    if &target_dims != op.dims() {
        return Err(QsimError::DimensionMismatch(format!(
            "operator on {} cannot act on subsystems {:?} with dims {}",
            op.dims(),
            targets,
            target_dims
        )));
    }
    let n = dims.total();
    let strides = dims.strides();
    let target_strides = target_dims.strides();
    let op_n = target_dims.total();

    // Offset of each target-space basis index inside the full index.
    let offsets: Vec<usize> = (0..op_n)
        .map(|t| {
            targets
                .iter()
                .enumerate()
                .map(|(k, &sub)| ((t / target_strides[k]) % target_dims.as_slice()[k]) * strides[sub])
                .sum()
        })
        .collect();

    let mut matrix = Array2::from_elem((n, n), ZERO);
    for row in 0..n {
        let row_t = target_index(row, targets, &strides, dims, &target_strides);
        let base = row - offsets[row_t];
        for (col_t, offset) in offsets.iter().enumerate() {
            let v = op.matrix[[row_t, col_t]];
            if v != ZERO {
                matrix[[row, base + offset]] = v;
            }
        }
    }
    Ok(Operator { dims: dims.clone(), matrix, unitary: op.unitary, hermitian: op.hermitian })
}

fn target_index(index: usize, targets: &[usize], strides: &[usize], dims: &Dims, target_strides: &[usize]) -> usize {
    targets
        .iter()
        .enumerate()
        .map(|(k, &sub)| ((index / strides[sub]) % dims.as_slice()[sub]) * target_strides[k])
        .sum()
}

/// One branch of a projective measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Position of the basis vector in the basis passed to [`measure`].
    pub index: usize,
    pub probability: f64,
    /// Normalized post-measurement state; absent for negligible outcomes.
    pub post_state: Option<Ket>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    pub outcomes: Vec<Outcome>,
}

impl OutcomeDistribution {
    pub fn probability(&self, index: usize) -> f64 {
        self.outcomes.iter().filter(|o| o.index == index).map(|o| o.probability).sum()
    }

    pub fn total(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }
}

/// Checks that `basis` is orthonormal and spans a space of dimension `dim`.
pub fn validate_basis(basis: &[Ket], dim: usize) -> Result<()> {
    if basis.len() != dim {
        return Err(QsimError::IncompleteBasis { expected: dim, actual: basis.len() });
    }
    let mut worst: f64 = 0.0;
    for (i, a) in basis.iter().enumerate() {
        if a.dims.total() != dim {
            return Err(QsimError::DimensionMismatch(format!(
                "basis vector {i} has dims {}, expected total dimension {dim}",
                a.dims
            )));
        }
        for (j, b) in basis.iter().enumerate().skip(i) {
            let expected = if i == j { ONE } else { ZERO };
            worst = worst.max((a.inner(b)? - expected).norm());
        }
    }
    if !(worst <= CONSTRUCTION_TOL) {
        return Err(QsimError::NonOrthonormalBasis(worst));
    }
    Ok(())
}

/// Projective measurement of the `targets` subsystems in `basis`.
///
/// Outcomes follow the basis order; probabilities obey the Born rule.
pub fn measure(ket: &Ket, targets: &[usize], basis: &[Ket]) -> Result<OutcomeDistribution> {
    let target_dims = ket.dims.select(targets)?;
    validate_basis(basis, target_dims.total())?;
    let mut outcomes = Vec::with_capacity(basis.len());
    for (index, b) in basis.iter().enumerate() {
        let column = b.amps.view().insert_axis(ndarray::Axis(1));
        let row = b.amps.mapv(|z| z.conj()).insert_axis(ndarray::Axis(0));
        let projector = Operator::new(target_dims.clone(), column.dot(&row))?;
        let projected = embed(&projector, targets, &ket.dims)?.apply_raw(ket)?;
        let probability: f64 = projected.iter().map(|a| a.norm_sqr()).sum();
        let post_state = if probability >= NEGLIGIBLE_PROBABILITY {
            Some(Ket::normalize_array(ket.dims.clone(), projected)?)
        } else {
            None
        };
        outcomes.push(Outcome { index, probability, post_state });
    }
    Ok(OutcomeDistribution { outcomes })
}

/// Computational basis of a single subsystem of dimension `dim`.
pub fn computational_basis(dim: usize) -> Vec<Ket> {
    let dims = Dims::single(dim.max(1)).expect("positive dimension");
    (0..dim).map(|i| Ket::basis(dims.clone(), i).expect("index in range")).collect()
}

/// Bell basis in the fixed order ψ+, ψ−, φ+, φ−.
pub fn bell_basis() -> [Ket; 4] {
    let h = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    let make = |amps: [C64; 4]| Ket::from_array_unchecked(Dims::qubits(2), Array1::from(amps.to_vec()));
    [
        make([ZERO, h, h, ZERO]),
        make([ZERO, h, -h, ZERO]),
        make([h, ZERO, ZERO, h]),
        make([h, ZERO, ZERO, -h]),
    ]
}

/// Haar-random unitary on `dims`, via Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(dims: Dims, rng: &mut R) -> Operator {
    let n = dims.total();
    loop {
        let mut cols: Vec<Array1<C64>> = (0..n)
            .map(|_| Array1::from_shape_fn(n, |_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))))
            .collect();
        let mut degenerate = false;
        for k in 0..n {
            for j in 0..k {
                let proj: C64 = cols[j].iter().zip(cols[k].iter()).map(|(a, b)| a.conj() * b).sum();
                let scaled = &cols[j] * proj;
                cols[k] = &cols[k] - &scaled;
            }
            let norm = cols[k].iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                degenerate = true;
                break;
            }
            cols[k] = &cols[k] / C64::from(norm);
        }
        if degenerate {
            continue;
        }
        let matrix = Array2::from_shape_fn((n, n), |(r, c)| cols[c][r]);
        if let Ok(op) = Operator::unitary(dims.clone(), matrix) {
            return op;
        }
    }
}

/// Random normalized ket on `dims`.
pub fn random_ket<R: Rng + ?Sized>(dims: Dims, rng: &mut R) -> Ket {
    let n = dims.total();
    loop {
        let amps: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(k) = Ket::normalized(dims.clone(), amps) {
            return k;
        }
    }
}
