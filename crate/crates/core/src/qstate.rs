//! Density matrices and the effects attached to quantum operation labels.
//!
//! Qubit 0 is the most significant bit of a basis index, so for two qubits the
//! basis order is `|00⟩, |01⟩, |10⟩, |11⟩`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

pub use num_complex::Complex64;

pub const TOLERANCE: f64 = 1e-9;

/// Largest register this backend accepts.
pub const MAX_QUBITS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub enum QuantumError {
    BellIndex(usize),
    DimensionMismatch { expected: usize, found: usize },
    QubitOutOfRange { qubit: usize, qubits: usize },
    NotSquare,
    TooManyQubits(usize),
}

impl fmt::Display for QuantumError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuantumError::BellIndex(i) => write!(f, "Bell state index {i} is not in 1..=4"),
            QuantumError::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            QuantumError::QubitOutOfRange { qubit, qubits } => {
                write!(f, "qubit {qubit} out of range for a {qubits}-qubit register")
            }
            QuantumError::NotSquare => f.write_str("matrix is not square with power-of-two size"),
            QuantumError::TooManyQubits(n) => write!(f, "{n} qubits exceeds the {MAX_QUBITS}-qubit limit"),
        }
    }
}

impl core::error::Error for QuantumError {}

/// A dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            assert_eq!(r.len(), dim, "matrix rows must form a square");
            data.extend_from_slice(r);
        }
        Matrix { dim, data }
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), dim * dim);
        Matrix { dim, data: entries.iter().map(|&x| Complex64::new(x, 0.0)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn dagger(&self) -> Matrix {
        let mut out = Matrix::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out.data[c * self.dim + r] = self.get(r, c).conj();
            }
        }
        out
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * other.data[k * n + c];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix { dim: self.dim, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Matrix, tol: f64) -> bool {
        self.dim == other.dim && self.max_abs_diff(other) <= tol
    }

    /// Eigenvalues of the Hermitian part `(M + M†)/2`, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        // Real symmetric embedding [[A, -B], [B, A]] doubles every eigenvalue.
        let n = self.dim;
        let h = self.add(&self.dagger()).scale(0.5);
        let m = 2 * n;
        let mut a = vec![0.0f64; m * m];
        for r in 0..n {
            for c in 0..n {
                let z = h.get(r, c);
                a[r * m + c] = z.re;
                a[(r + n) * m + (c + n)] = z.re;
                a[r * m + (c + n)] = -z.im;
                a[(r + n) * m + c] = z.im;
            }
        }
        let mut eig = jacobi_eigenvalues(&mut a, m);
        eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eig.into_iter().step_by(2).collect()
    }
}

/// Cyclic Jacobi rotations on a real symmetric matrix.
fn jacobi_eigenvalues(a: &mut [f64], n: usize) -> Vec<f64> {
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[r * n + c] * a[r * n + c])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// A state `ϱ ∈ D(H)` of an `n`-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    qubits: usize,
    matrix: Matrix,
}

impl DensityMatrix {
    /// Wraps a matrix without validating it; see [`validate`].
    pub fn from_matrix(matrix: Matrix) -> Result<Self, QuantumError> {
        let dim = matrix.dim();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(QuantumError::NotSquare);
        }
        let qubits = dim.trailing_zeros() as usize;
        if qubits > MAX_QUBITS {
            return Err(QuantumError::TooManyQubits(qubits));
        }
        Ok(DensityMatrix { qubits, matrix })
    }

    /// `|0…0⟩⟨0…0|`
    pub fn zero_state(qubits: usize) -> Result<Self, QuantumError> {
        if qubits > MAX_QUBITS {
            return Err(QuantumError::TooManyQubits(qubits));
        }
        let mut m = Matrix::zeros(1 << qubits);
        m.set(0, 0, Complex64::new(1.0, 0.0));
        Ok(DensityMatrix { qubits, matrix: m })
    }

    /// `|ψ⟩⟨ψ|` for a (normalized) state vector.
    pub fn pure(amplitudes: &[Complex64]) -> Result<Self, QuantumError> {
        let n = amplitudes.len();
        let mut m = Matrix::zeros(n);
        for r in 0..n {
            for c in 0..n {
                m.set(r, c, amplitudes[r] * amplitudes[c].conj());
            }
        }
        DensityMatrix::from_matrix(m)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.matrix.get(r, c)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix, QuantumError> {
        let (n, m) = (self.dim(), other.dim());
        let mut out = Matrix::zeros(n * m);
        for r1 in 0..n {
            for c1 in 0..n {
                let a = self.get(r1, c1);
                for r2 in 0..m {
                    for c2 in 0..m {
                        out.set(r1 * m + r2, c1 * m + c2, a * other.get(r2, c2));
                    }
                }
            }
        }
        DensityMatrix::from_matrix(out)
    }

    pub fn approx_eq(&self, other: &DensityMatrix, tol: f64) -> bool {
        self.matrix.approx_eq(&other.matrix, tol)
    }

    /// Entries rounded to the tolerance grid, for hashing and ordering states.
    pub fn fingerprint(&self) -> Vec<i64> {
        self.matrix
            .entries()
            .iter()
            .flat_map(|z| [z.re, z.im])
            .map(|x| libm::round(x / TOLERANCE) as i64)
            .collect()
    }
}

/// `|β_i⟩⟨β_i|` for the four Bell states.
pub fn bell_state(i: usize) -> Result<DensityMatrix, QuantumError> {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let z = 0.0;
    let amps: [f64; 4] = match i {
        1 => [h, z, z, h],
        2 => [h, z, z, -h],
        3 => [z, h, h, z],
        4 => [z, h, -h, z],
        _ => return Err(QuantumError::BellIndex(i)),
    };
    // Outer products of ±1/√2 entries are exactly ±1/2.
    let mut m = Matrix::zeros(4);
    for r in 0..4 {
        for c in 0..4 {
            let sign = amps[r].signum() * amps[c].signum();
            let v = if amps[r] == 0.0 || amps[c] == 0.0 { 0.0 } else { 0.5 * sign };
            m.set(r, c, Complex64::new(v, 0.0));
        }
    }
    DensityMatrix::from_matrix(m)
}

/// A gate or projector family on a list of target qubits.
#[derive(Clone, Debug, PartialEq)]
pub enum QuantumEffect {
    Identity,
    Unitary { matrix: Matrix, targets: Vec<usize> },
    NonSelectiveMeasure { projectors: Vec<Matrix>, targets: Vec<usize> },
}

impl QuantumEffect {
    /// Inverse of a unitary effect; `None` for measurements.
    pub fn inverse(&self) -> Option<QuantumEffect> {
        match self {
            QuantumEffect::Identity => Some(QuantumEffect::Identity),
            QuantumEffect::Unitary { matrix, targets } => {
                Some(QuantumEffect::Unitary { matrix: matrix.dagger(), targets: targets.clone() })
            }
            QuantumEffect::NonSelectiveMeasure { .. } => None,
        }
    }

    /// Projective measurement in the computational basis of each target.
    pub fn measure_standard(targets: Vec<usize>) -> QuantumEffect {
        let k = targets.len();
        let dim = 1 << k;
        let projectors = (0..dim)
            .map(|i| {
                let mut p = Matrix::zeros(dim);
                p.set(i, i, Complex64::new(1.0, 0.0));
                p
            })
            .collect();
        QuantumEffect::NonSelectiveMeasure { projectors, targets }
    }

    /// Projective measurement in the Hadamard basis of a single qubit.
    pub fn measure_hadamard(target: usize) -> QuantumEffect {
        let plus = Matrix::from_real(2, &[0.5, 0.5, 0.5, 0.5]);
        let minus = Matrix::from_real(2, &[0.5, -0.5, -0.5, 0.5]);
        QuantumEffect::NonSelectiveMeasure { projectors: vec![plus, minus], targets: vec![target] }
    }
}

/// The built-in named gates.
pub fn named_gate(name: &str) -> Option<Matrix> {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    Some(match name {
        "identity" => Matrix::identity(2),
        "hadamard" => Matrix::from_real(2, &[h, h, h, -h]),
        "pauli_x" => Matrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]),
        "pauli_y" => Matrix::from_rows(&[&[c(0.0, 0.0), c(0.0, -1.0)], &[c(0.0, 1.0), c(0.0, 0.0)]]),
        "pauli_z" => Matrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]),
        "cnot" => Matrix::from_real(
            4,
            &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0],
        ),
        _ => return None,
    })
}

/// Left-multiplies `m` by `op` acting on `targets` (identity elsewhere).
fn apply_left(op: &Matrix, targets: &[usize], qubits: usize, m: &Matrix) -> Matrix {
    let n = m.dim();
    let k = targets.len();
    let shifts: Vec<usize> = targets.iter().map(|&q| qubits - 1 - q).collect();
    let target_mask: usize = shifts.iter().map(|s| 1 << s).sum();
    let sub = 1 << k;
    let mut out = Matrix::zeros(n);
    let spread = |base: usize, local: usize| -> usize {
        let mut idx = base;
        for (j, s) in shifts.iter().enumerate() {
            if local >> (k - 1 - j) & 1 == 1 {
                idx |= 1 << s;
            }
        }
        idx
    };
    for col in 0..n {
        for base in (0..n).filter(|i| i & target_mask == 0) {
            for lr in 0..sub {
                let mut acc = Complex64::new(0.0, 0.0);
                for lc in 0..sub {
                    acc += op.get(lr, lc) * m.get(spread(base, lc), col);
                }
                out.set(spread(base, lr), col, acc);
            }
        }
    }
    out
}

/// `A ϱ A†` with `A` lifted to the whole register.
fn conjugate(op: &Matrix, targets: &[usize], qubits: usize, rho: &Matrix) -> Matrix {
    let left = apply_left(op, targets, qubits, rho);
    apply_left(op, targets, qubits, &left.dagger()).dagger()
}

fn check_targets(targets: &[usize], op_dim: usize, qubits: usize) -> Result<(), QuantumError> {
    if 1usize << targets.len() != op_dim {
        return Err(QuantumError::DimensionMismatch { expected: 1 << targets.len(), found: op_dim });
    }
    for &q in targets {
        if q >= qubits {
            return Err(QuantumError::QubitOutOfRange { qubit: q, qubits });
        }
    }
    Ok(())
}

/// Evolves `ϱ` by an effect: `UϱU†` or `Σ P_i ϱ P_i`.
pub fn apply_effect(rho: &DensityMatrix, e: &QuantumEffect) -> Result<DensityMatrix, QuantumError> {
    let q = rho.qubits();
    match e {
        QuantumEffect::Identity => Ok(rho.clone()),
        QuantumEffect::Unitary { matrix, targets } => {
            check_targets(targets, matrix.dim(), q)?;
            DensityMatrix::from_matrix(conjugate(matrix, targets, q, rho.matrix()))
        }
        QuantumEffect::NonSelectiveMeasure { projectors, targets } => {
            let mut acc = Matrix::zeros(rho.dim());
            for p in projectors {
                check_targets(targets, p.dim(), q)?;
                acc = acc.add(&conjugate(p, targets, q, rho.matrix()));
            }
            DensityMatrix::from_matrix(acc)
        }
    }
}

/// One invariant check with its measured deviation.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub deviation: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidityReport {
    pub checks: Vec<Check>,
}

impl ValidityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }
}

/// Hermiticity, unit trace and positive semidefiniteness, each within [`TOLERANCE`].
pub fn validate(rho: &DensityMatrix) -> ValidityReport {
    let m = rho.matrix();
    let herm = m.max_abs_diff(&m.dagger());
    let tr = m.trace();
    let trace_dev = libm::hypot(tr.re - 1.0, tr.im);
    let min_eig = m.hermitian_eigenvalues().first().copied().unwrap_or(0.0);
    let psd_dev = if min_eig < 0.0 { -min_eig } else { 0.0 };
    ValidityReport {
        checks: vec![
            Check { name: "hermitian", deviation: herm, passed: herm <= TOLERANCE },
            Check { name: "trace", deviation: trace_dev, passed: trace_dev <= TOLERANCE },
            Check { name: "psd", deviation: psd_dev, passed: psd_dev <= TOLERANCE },
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn bell_one_matches_outer_product() {
        let b = bell_state(1).unwrap();
        let expected = Matrix::from_real(
            4,
            &[0.5, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.5],
        );
        assert!(b.matrix().approx_eq(&expected, 1e-12));
        assert_eq!(bell_state(4).unwrap().get(1, 2), c(-0.5));
        assert_eq!(bell_state(0), Err(QuantumError::BellIndex(0)));
        assert_eq!(bell_state(5), Err(QuantumError::BellIndex(5)));
        for i in 1..=4 {
            assert!((bell_state(i).unwrap().matrix().trace() - c(1.0)).norm() < 1e-12);
            assert!(validate(&bell_state(i).unwrap()).passed());
        }
    }

    #[test]
    fn measuring_bell_pair_dephases() {
        // oracle: Σ_i P_i ϱ P_i by hand keeps only the |00⟩⟨00| and |11⟩⟨11| entries
        let rho = bell_state(1).unwrap();
        let out = apply_effect(&rho, &QuantumEffect::measure_standard(vec![0])).unwrap();
        let mut expected = Matrix::zeros(4);
        expected.set(0, 0, c(0.5));
        expected.set(3, 3, c(0.5));
        assert!(out.matrix().approx_eq(&expected, 1e-12));
    }

    #[test]
    fn bit_flip_on_basis_state() {
        let zero = DensityMatrix::zero_state(1).unwrap();
        let x = QuantumEffect::Unitary { matrix: named_gate("pauli_x").unwrap(), targets: vec![0] };
        let out = apply_effect(&zero, &x).unwrap();
        assert!(out.matrix().approx_eq(&Matrix::from_real(2, &[0.0, 0.0, 0.0, 1.0]), 1e-12));
        assert_eq!(apply_effect(&zero, &QuantumEffect::Identity).unwrap(), zero);
    }

    #[test]
    fn gates_lift_to_the_right_qubit() {
        // X on qubit 1 of |00⟩ gives |01⟩ (index 1)
        let zero = DensityMatrix::zero_state(2).unwrap();
        let x = QuantumEffect::Unitary { matrix: named_gate("pauli_x").unwrap(), targets: vec![1] };
        let out = apply_effect(&zero, &x).unwrap();
        assert!((out.get(1, 1) - c(1.0)).norm() < 1e-12);
        // H on q0 then CNOT(0,1) prepares β1
        let h = QuantumEffect::Unitary { matrix: named_gate("hadamard").unwrap(), targets: vec![0] };
        let cx = QuantumEffect::Unitary { matrix: named_gate("cnot").unwrap(), targets: vec![0, 1] };
        let bell = apply_effect(&apply_effect(&zero, &h).unwrap(), &cx).unwrap();
        assert!(bell.approx_eq(&bell_state(1).unwrap(), 1e-12));
    }

    #[test]
    fn dimension_errors() {
        let zero = DensityMatrix::zero_state(1).unwrap();
        let cx = QuantumEffect::Unitary { matrix: named_gate("cnot").unwrap(), targets: vec![0, 1] };
        assert!(matches!(apply_effect(&zero, &cx), Err(QuantumError::QubitOutOfRange { .. })));
        let bad = QuantumEffect::Unitary { matrix: named_gate("cnot").unwrap(), targets: vec![0] };
        assert!(matches!(apply_effect(&zero, &bad), Err(QuantumError::DimensionMismatch { .. })));
    }

    #[test]
    fn validation_reports_failures() {
        let two = DensityMatrix::from_matrix(Matrix::identity(2)).unwrap();
        assert_eq!(validate(&two).failed(), vec!["trace"]);
        let nh = Matrix::from_real(2, &[0.5, 0.3, 0.0, 0.5]);
        assert!(validate(&DensityMatrix::from_matrix(nh).unwrap()).failed().contains(&"hermitian"));
        let neg = Matrix::from_real(2, &[1.5, 0.0, 0.0, -0.5]);
        assert_eq!(validate(&DensityMatrix::from_matrix(neg).unwrap()).failed(), vec!["psd"]);
    }
}
