//! Dense complex matrices and the handful of quantum-state primitives the rest of
//! the crate is built on. Everything here is two-qubit sized or smaller: local
//! operators are 2x2, joint operators 4x4, and the joint basis is ordered
//! |00>, |01>, |10>, |11> with the second (Bob) index fastest.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, RngExt};
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Entrywise Hermiticity tolerance for validated operators.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Allowed deviation of a density operator's trace from 1.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues of a density operator may undershoot zero by this much;
/// convex mixing and conjugation accumulate rounding at the 1e-16 scale,
/// so anything below -1e-9 is a genuine negativity, not noise.
pub const PSD_TOL: f64 = 1e-9;
/// Entrywise tolerance on U^dag U = I for validated unitaries.
pub const UNITARY_TOL: f64 = 1e-10;
/// Norm tolerance for pure-state kets.
pub const KET_NORM_TOL: f64 = 1e-10;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)])
}

fn check_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn check_square_qubit_sized(m: &CMatrix) -> Result<usize> {
    let dim = m.nrows();
    if m.ncols() != dim || (dim != 2 && dim != 4) {
        return Err(Error::Dimension {
            got: m.ncols().max(dim),
            expected: "2x2 or 4x4",
        });
    }
    Ok(dim)
}

/* largest |m_ij - conj(m_ji)| over all entries */
fn hermiticity_defect(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Smallest eigenvalue of a Hermitian matrix. The 2x2 case is solved through the
/// characteristic polynomial; 4x4 uses the deterministic symmetric eigensolver.
fn min_hermitian_eigenvalue(m: &CMatrix) -> f64 {
    if m.nrows() == 2 {
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let mid = 0.5 * (a + d);
        let disc = (0.25 * (a - d) * (a - d) + m[(0, 1)].norm_sqr()).sqrt();
        mid - disc
    } else {
        nalgebra::SymmetricEigen::new(m.clone())
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |acc, &e| acc.min(e))
    }
}

/// Kronecker product, first factor slowest. Both inputs must be square and the
/// result may not exceed the 4x4 joint space.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.nrows() != a.ncols() || b.nrows() != b.ncols() {
        return Err(Error::Dimension {
            got: 0,
            expected: "square factors",
        });
    }
    check_finite(a)?;
    check_finite(b)?;
    if a.nrows() * b.nrows() > 4 {
        return Err(Error::TensorTooLarge);
    }
    Ok(a.kronecker(b))
}

/// Frobenius distance sqrt(sum |a_ij - b_ij|^2).
pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::Dimension {
            got: b.nrows(),
            expected: "matching shapes",
        });
    }
    Ok((a - b).norm())
}

/// Phase phi of the equatorial target state |s> = (|0> + e^{i phi} |1>)/sqrt(2),
/// stored in radians and normalized to [0, 2pi).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetPhase(f64);

impl TargetPhase {
    pub fn from_radians(phi: f64) -> Self {
        let two_pi = std::f64::consts::TAU;
        let mut r = phi.rem_euclid(two_pi);
        if r >= two_pi {
            r = 0.0; // rem_euclid can return the modulus itself for tiny negatives
        }
        TargetPhase(r)
    }

    pub fn from_degrees(deg: f64) -> Self {
        Self::from_radians(deg.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    /// e^{i phi}
    pub fn factor(self) -> Complex64 {
        Complex64::from_polar(1.0, self.0)
    }
}

/// Unit-norm state vector of a qubit or a qubit pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PureKet {
    v: CVector,
}

impl PureKet {
    pub fn new(v: CVector) -> Result<Self> {
        let dim = v.len();
        if dim != 2 && dim != 4 {
            return Err(Error::Dimension {
                got: dim,
                expected: "2 or 4",
            });
        }
        if !v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = v.norm();
        if (norm - 1.0).abs() > KET_NORM_TOL {
            return Err(Error::NotNormalized((norm - 1.0).abs()));
        }
        Ok(PureKet { v })
    }

    /// Computational basis vector |idx> in the given dimension.
    pub fn basis(dim: usize, idx: usize) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::Dimension {
                got: dim,
                expected: "2 or 4",
            });
        }
        if idx >= dim {
            return Err(Error::BasisIndex(idx as u8));
        }
        let mut v = CVector::zeros(dim);
        v[idx] = cr(1.0);
        Ok(PureKet { v })
    }

    /// Equatorial Bloch state (|0> + e^{i phi} |1>)/sqrt(2).
    pub fn equatorial(phi: TargetPhase) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = CVector::from_vec(vec![cr(s), phi.factor() * s]);
        PureKet { v }
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.v
    }

    /// |v><v|
    pub fn projector(&self) -> CMatrix {
        let n = self.v.len();
        CMatrix::from_fn(n, n, |i, j| self.v[i] * self.v[j].conj())
    }
}

/// Validated density operator: Hermitian, unit trace, positive semidefinite,
/// dimension 2 or 4.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    m: CMatrix,
}

impl DensityOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square_qubit_sized(&m)?;
        check_finite(&m)?;
        let herm = hermiticity_defect(&m);
        if herm > HERMITICITY_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = m.trace();
        let tr_dev = (tr - cr(1.0)).norm();
        if tr_dev > TRACE_TOL {
            return Err(Error::TraceNotOne(tr_dev));
        }
        let min_eig = min_hermitian_eigenvalue(&m);
        if min_eig < -PSD_TOL {
            return Err(Error::NotPositive(min_eig));
        }
        Ok(DensityOperator { m })
    }

    pub fn from_pure(ket: &PureKet) -> Self {
        // projector of a unit ket is valid by construction
        DensityOperator { m: ket.projector() }
    }

    /// Maximally mixed state I/dim.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::Dimension {
                got: dim,
                expected: "2 or 4",
            });
        }
        Ok(DensityOperator {
            m: identity(dim).scale(1.0 / dim as f64),
        })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    /// tr(rho^2), 1 for pure states, 1/dim for the maximally mixed state.
    pub fn purity(&self) -> f64 {
        (&self.m * &self.m).trace().re
    }

    /// U rho U^dag. Unitary conjugation preserves every defining invariant.
    pub fn conjugated_by(&self, u: &UnitaryOp) -> Result<Self> {
        if u.dim() != self.dim() {
            return Err(Error::Dimension {
                got: u.dim(),
                expected: "operator of matching size",
            });
        }
        DensityOperator::new(u.matrix() * &self.m * u.matrix().adjoint())
    }
}

/// Off-diagonal remainder of a density operator: Hermitian with an exactly
/// vanishing diagonal. Not a state by itself.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherencePart {
    m: CMatrix,
}

impl CoherencePart {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square_qubit_sized(&m)?;
        check_finite(&m)?;
        if (0..m.nrows()).any(|i| m[(i, i)] != cr(0.0)) {
            return Err(Error::NonzeroDiagonal);
        }
        let herm = hermiticity_defect(&m);
        if herm > HERMITICITY_TOL {
            return Err(Error::NotHermitian(herm));
        }
        Ok(CoherencePart { m })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }
}

/// Validated unitary operator, dimension 2 or 4.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryOp {
    m: CMatrix,
}

impl UnitaryOp {
    pub fn new(m: CMatrix) -> Result<Self> {
        let dim = check_square_qubit_sized(&m)?;
        check_finite(&m)?;
        let defect = (m.adjoint() * &m - identity(dim))
            .iter()
            .fold(0.0f64, |acc, z| acc.max(z.norm()));
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(UnitaryOp { m })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::Dimension {
                got: dim,
                expected: "2 or 4",
            });
        }
        Ok(UnitaryOp { m: identity(dim) })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn dagger(&self) -> UnitaryOp {
        // adjoint of a unitary is unitary, no revalidation needed
        UnitaryOp {
            m: self.m.adjoint(),
        }
    }
}

/// 2x2 Hadamard as a validated operator.
pub fn hadamard() -> UnitaryOp {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    UnitaryOp {
        m: CMatrix::from_row_slice(2, 2, &[cr(s), cr(s), cr(s), cr(-s)]),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// Reduced state of the second qubit: (rho_B)_{bb'} = sum_a rho_{(ab),(ab')}.
pub fn partial_trace_a(rho: &DensityOperator) -> Result<DensityOperator> {
    if rho.dim() != 4 {
        return Err(Error::Dimension {
            got: rho.dim(),
            expected: "4",
        });
    }
    let m = rho.matrix();
    let out = CMatrix::from_fn(2, 2, |b, bp| m[(b, bp)] + m[(2 + b, 2 + bp)]);
    DensityOperator::new(out)
}

/// Overlap <s| rho |s> with the equatorial target at phase phi.
pub fn fidelity_with_target(rho: &DensityOperator, phi: TargetPhase) -> Result<f64> {
    if rho.dim() != 2 {
        return Err(Error::Dimension {
            got: rho.dim(),
            expected: "2",
        });
    }
    let s = PureKet::equatorial(phi);
    let a = s.amplitudes();
    let mut acc = cr(0.0);
    for i in 0..2 {
        for j in 0..2 {
            acc += a[i].conj() * rho.entry(i, j) * a[j];
        }
    }
    // Hermitian expectation value, imaginary part is rounding only
    Ok(acc.re)
}

/// Split rho into its diagonal part (a valid state) and the off-diagonal
/// remainder. The two pieces add back to rho without rounding: diagonal entries
/// are copied and off-diagonal entries are untouched.
pub fn decompose_diag_coh(rho: &DensityOperator) -> (DensityOperator, CoherencePart) {
    let dim = rho.dim();
    let mut d = CMatrix::zeros(dim, dim);
    let mut coh = rho.matrix().clone();
    for i in 0..dim {
        d[(i, i)] = rho.entry(i, i);
        coh[(i, i)] = cr(0.0);
    }
    let diag =
        DensityOperator::new(d).expect("diagonal of a density operator is itself a valid state");
    let coh = CoherencePart::new(coh).expect("off-diagonal remainder is Hermitian by construction");
    (diag, coh)
}

/// Pauli expectation values (tr(rho sigma_x), tr(rho sigma_y), tr(rho sigma_z)).
pub fn bloch_vector(rho: &DensityOperator) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::Dimension {
            got: rho.dim(),
            expected: "2",
        });
    }
    let r01 = rho.entry(0, 1);
    Ok(BlochVector {
        x: 2.0 * r01.re,
        y: -2.0 * r01.im,
        z: rho.entry(0, 0).re - rho.entry(1, 1).re,
    })
}

/// Ket with independent standard complex Gaussian amplitudes, normalized.
pub fn random_pure<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<PureKet> {
    if dim != 2 && dim != 4 {
        return Err(Error::Dimension {
            got: dim,
            expected: "2 or 4",
        });
    }
    loop {
        let v = CVector::from_fn(dim, |_, _| {
            c(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let norm = v.norm();
        if norm > 1e-6 {
            return Ok(PureKet {
                v: v.scale(1.0 / norm),
            });
        }
    }
}

/// Mixture of 1 to 4 random pure states with uniform random weights. This is the
/// test ensemble used throughout the verification suites: it reaches every rank
/// without concentrating on the boundary of state space.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DensityOperator> {
    if dim != 2 && dim != 4 {
        return Err(Error::Dimension {
            got: dim,
            expected: "2 or 4",
        });
    }
    let k = rng.random_range(1..=4usize);
    let mut weights = Vec::with_capacity(k);
    loop {
        weights.clear();
        for _ in 0..k {
            weights.push(rng.random::<f64>());
        }
        if weights.iter().sum::<f64>() > 1e-9 {
            break;
        }
    }
    let total: f64 = weights.iter().sum();
    let mut m = CMatrix::zeros(dim, dim);
    for w in &weights {
        let ket = random_pure(dim, rng)?;
        m += ket.projector().scale(w / total);
    }
    DensityOperator::new(m)
}
