//! Small dense Hermitian operators: construction, eigenvalues, operator norm,
//! projectors, and the 2x2 Bloch decomposition.
//!
//! Pauli ordering convention (fixed here, everything else depends on it):
//! the Bloch vector is `(x, y, z)` with
//!
//! ```text
//! X = [[0, 1], [1, 0]]   Y = [[0, -i], [i, 0]]   Z = [[1, 0], [0, -1]]
//! ```
//!
//! so a 2x2 Hermitian `H` decomposes as `H = (t/2) I + vx X + vy Y + vz Z`
//! with `t = Tr H`, `vx = Re h01`, `vy = -Im h01`, `vz = (h00 - h11)/2`,
//! and its operator norm is `|t|/2 + ||v||_2`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for accepting an input matrix as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Entrywise tolerance for the projector idempotency test.
pub const PROJECTOR_TOL: f64 = 1e-10;
/// Off-diagonal Frobenius mass (relative to scale) at which Jacobi sweeps stop.
const JACOBI_TOL: f64 = 1e-12;
/// Jacobi sweep cap; exceeding it signals an internal error.
const JACOBI_MAX_SWEEPS: usize = 100;

/// A dense complex Hermitian matrix, symmetrized on construction.
#[derive(Debug, Clone)]
pub struct HermitianOp {
    dim: usize,
    data: Vec<Complex64>,
}

impl HermitianOp {
    /// Builds an operator from row-major entries, rejecting inputs that
    /// deviate from conjugate symmetry by more than [`HERMITICITY_TOL`],
    /// then symmetrizing `(H + H^dag)/2`.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension {
                expected: 1,
                found: 0,
            });
        }
        if entries.len() != dim * dim {
            return Err(Error::Dimension {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        let mut max_dev: f64 = 0.0;
        for i in 0..dim {
            for j in i..dim {
                let dev = (entries[i * dim + j] - entries[j * dim + i].conj()).norm();
                max_dev = max_dev.max(dev);
            }
        }
        if max_dev > HERMITICITY_TOL {
            return Err(Error::NotHermitian { max_dev });
        }
        let mut data = entries;
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(data[i * dim + i].re, 0.0);
            for j in (i + 1)..dim {
                let sym = 0.5 * (data[i * dim + j] + data[j * dim + i].conj());
                data[i * dim + j] = sym;
                data[j * dim + i] = sym.conj();
            }
        }
        Ok(Self { dim, data })
    }

    /// Internal constructor for matrices that are Hermitian by construction.
    pub(crate) fn from_parts_unchecked(dim: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        Self { dim, data }
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_parts_unchecked(dim, vec![Complex64::ZERO; dim * dim])
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        let mut data = vec![Complex64::ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(scale, 0.0);
        }
        Self::from_parts_unchecked(dim, data)
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut data = vec![Complex64::ZERO; dim * dim];
        for (i, &d) in diag.iter().enumerate() {
            data[i * dim + i] = Complex64::new(d, 0.0);
        }
        Self::from_parts_unchecked(dim, data)
    }

    pub fn pauli_x() -> Self {
        Self::from_parts_unchecked(
            2,
            vec![
                Complex64::ZERO,
                Complex64::ONE,
                Complex64::ONE,
                Complex64::ZERO,
            ],
        )
    }

    pub fn pauli_y() -> Self {
        Self::from_parts_unchecked(
            2,
            vec![
                Complex64::ZERO,
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                Complex64::ZERO,
            ],
        )
    }

    pub fn pauli_z() -> Self {
        Self::from_real_diag(&[1.0, -1.0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub(crate) fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self::from_parts_unchecked(self.dim, data))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self::from_parts_unchecked(self.dim, data))
    }

    pub fn scale(&self, factor: f64) -> Self {
        let data = self.data.iter().map(|a| a * factor).collect();
        Self::from_parts_unchecked(self.dim, data)
    }

    /// Accumulates `self += factor * other` without reallocating.
    pub(crate) fn axpy(&mut self, factor: f64, other: &Self) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += factor * b;
        }
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    /// Raw matrix product (not Hermitian in general).
    pub(crate) fn matmul_raw(&self, other: &Self) -> Vec<Complex64> {
        let n = self.dim;
        let mut out = vec![Complex64::ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let aik = self.data[i * n + k];
                if aik == Complex64::ZERO {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += aik * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// `Tr(A B)` for Hermitian `A`, `B`; real by symmetry.
    pub fn trace_product(&self, other: &Self) -> Result<f64> {
        self.check_same_dim(other)?;
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for k in 0..n {
                // (AB)_ii = sum_k A_ik B_ki; B_ki = conj(B_ik).
                acc += (self.data[i * n + k] * other.data[k * n + i]).re;
            }
        }
        Ok(acc)
    }

    /// Tensor (Kronecker) product; Hermitian since both factors are.
    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let dim = n * m;
        let mut data = vec![Complex64::ZERO; dim * dim];
        for i in 0..n {
            for j in 0..n {
                let a = self.data[i * n + j];
                if a == Complex64::ZERO {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        data[(i * m + k) * dim + (j * m + l)] = a * other.data[k * m + l];
                    }
                }
            }
        }
        Self::from_parts_unchecked(dim, data)
    }

    pub fn max_entrywise_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// All eigenvalues in ascending order (cyclic Jacobi).
    pub fn eig_hermitian(&self) -> Result<Vec<f64>> {
        if self.dim == 1 {
            return Ok(vec![self.data[0].re]);
        }
        if self.dim == 2 {
            // Closed form via the Bloch identity; exact and cheap.
            let b = self.bloch_decompose()?;
            let half_t = 0.5 * b.trace;
            let r = norm3(&b.vec);
            return Ok(vec![half_t - r, half_t + r]);
        }
        let (vals, _) = self.eigendecompose()?;
        Ok(vals)
    }

    /// Full eigendecomposition: ascending eigenvalues and the matching
    /// orthonormal eigenvectors (column `k` of the result pairs with value `k`).
    pub fn eigendecompose(&self) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
        let n = self.dim;
        let mut a = self.data.clone();
        // v accumulates the rotations; columns become eigenvectors.
        let mut v = vec![Complex64::ZERO; n * n];
        for i in 0..n {
            v[i * n + i] = Complex64::ONE;
        }
        let scale = self.frobenius_norm().max(1.0);
        let mut converged = false;
        for _ in 0..JACOBI_MAX_SWEEPS {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += a[i * n + j].norm_sqr();
                }
            }
            if (2.0 * off).sqrt() <= JACOBI_TOL * scale {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    jacobi_rotate(&mut a, &mut v, n, p, q);
                }
            }
        }
        if !converged {
            return Err(Error::SolverFailure(format!(
                "Jacobi eigensolver did not converge within {JACOBI_MAX_SWEEPS} sweeps"
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        let diag: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
        order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
        let vals = order.iter().map(|&i| diag[i]).collect();
        let vecs = order
            .iter()
            .map(|&c| (0..n).map(|r| v[r * n + c]).collect())
            .collect();
        Ok((vals, vecs))
    }

    /// Largest absolute eigenvalue.
    pub fn operator_norm(&self) -> f64 {
        if self.dim == 2 {
            let t = self.data[0].re + self.data[3].re;
            let vz = 0.5 * (self.data[0].re - self.data[3].re);
            let vx = self.data[1].re;
            let vy = -self.data[1].im;
            return 0.5 * t.abs() + norm3(&[vx, vy, vz]);
        }
        self.eig_hermitian()
            .expect("Jacobi converges for Hermitian input")
            .iter()
            .fold(0.0, |m, &l| m.max(l.abs()))
    }

    /// Smallest eigenvalue (used for positive-semidefiniteness checks).
    pub fn min_eigenvalue(&self) -> f64 {
        self.eig_hermitian()
            .expect("Jacobi converges for Hermitian input")[0]
    }

    /// Trace / Pauli-vector split of a 2x2 operator.
    pub fn bloch_decompose(&self) -> Result<BlochForm> {
        if self.dim != 2 {
            return Err(Error::Dimension {
                expected: 2,
                found: self.dim,
            });
        }
        Ok(BlochForm {
            trace: self.data[0].re + self.data[3].re,
            vec: [
                self.data[1].re,
                -self.data[1].im,
                0.5 * (self.data[0].re - self.data[3].re),
            ],
        })
    }
}

/// One complex Jacobi rotation zeroing entry `(p, q)` of `a`, accumulated
/// into `v`. Phase-rotates the pivot to a real value, then applies the
/// classical symmetric rotation.
fn jacobi_rotate(a: &mut [Complex64], v: &mut [Complex64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let phase = apq / b; // e^{i phi}
    let alpha = a[p * n + p].re;
    let gamma = a[q * n + q].re;
    let tau = (gamma - alpha) / (2.0 * b);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // J differs from identity in: J[p][p] = c*phase, J[p][q] = s*phase,
    // J[q][p] = -s, J[q][q] = c.  Update A <- J^dag A J (columns then rows)
    // and V <- V J.
    let jp = phase * c;
    let jq = phase * s;
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * jp - akq * s;
        a[k * n + q] = akp * jq + akq * c;
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = vkp * jp - vkq * s;
        v[k * n + q] = vkp * jq + vkq * c;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = jp.conj() * apk - s * aqk;
        a[q * n + k] = jq.conj() * apk + c * aqk;
    }
    a[p * n + q] = Complex64::ZERO;
    a[q * n + p] = Complex64::ZERO;
    a[p * n + p] = Complex64::new(a[p * n + p].re, 0.0);
    a[q * n + q] = Complex64::new(a[q * n + q].re, 0.0);
}

pub(crate) fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Trace and Pauli coefficients of a 2x2 Hermitian operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochForm {
    pub trace: f64,
    pub vec: [f64; 3],
}

impl BlochForm {
    /// Rebuilds the 2x2 operator `(t/2) I + v . sigma`.
    pub fn reconstruct(&self) -> HermitianOp {
        let half_t = 0.5 * self.trace;
        let [x, y, z] = self.vec;
        HermitianOp::from_parts_unchecked(
            2,
            vec![
                Complex64::new(half_t + z, 0.0),
                Complex64::new(x, -y),
                Complex64::new(x, y),
                Complex64::new(half_t - z, 0.0),
            ],
        )
    }

    /// `|t|/2 + ||v||_2`, the operator norm of the reconstruction.
    pub fn operator_norm(&self) -> f64 {
        0.5 * self.trace.abs() + norm3(&self.vec)
    }
}

/// A Hermitian idempotent (`P^2 = P`).
#[derive(Debug, Clone)]
pub struct Projector {
    op: HermitianOp,
}

impl Projector {
    pub fn new(op: HermitianOp) -> Result<Self> {
        let sq = op.matmul_raw(&op);
        let mut residual: f64 = 0.0;
        for (a, b) in sq.iter().zip(op.data()) {
            residual = residual.max((a - b).norm());
        }
        if residual > PROJECTOR_TOL {
            return Err(Error::NotProjector { residual });
        }
        Ok(Self { op })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            op: HermitianOp::zero(dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            op: HermitianOp::identity(dim),
        }
    }

    pub fn op(&self) -> &HermitianOp {
        &self.op
    }

    pub fn into_op(self) -> HermitianOp {
        self.op
    }

    /// `I - P`, projection onto the orthogonal complement.
    pub fn complement(&self) -> Self {
        let id = HermitianOp::identity(self.op.dim());
        Self {
            op: id.sub(&self.op).expect("same dimension"),
        }
    }

    /// Rank-1 projector on `C^2` with Bloch vector given by spherical
    /// angles: `u = (sin a cos b, sin a sin b, cos a)`.
    pub fn rank1_from_bloch(polar: f64, azimuth: f64) -> Self {
        let u = [
            polar.sin() * azimuth.cos(),
            polar.sin() * azimuth.sin(),
            polar.cos(),
        ];
        Self {
            op: BlochForm {
                trace: 1.0,
                vec: [0.5 * u[0], 0.5 * u[1], 0.5 * u[2]],
            }
            .reconstruct(),
        }
    }
}

/// Projection onto the unit vector `cos(theta)|0> + sin(theta)|1>`.
/// `theta` and `theta + pi` give the same operator.
pub fn projector_from_angle(theta: f64) -> Projector {
    let (s, c) = theta.sin_cos();
    Projector {
        op: HermitianOp::from_parts_unchecked(
            2,
            vec![
                Complex64::new(c * c, 0.0),
                Complex64::new(c * s, 0.0),
                Complex64::new(c * s, 0.0),
                Complex64::new(s * s, 0.0),
            ],
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_hermitian;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    const SQRT2_INV: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn eig_identity_is_all_ones() {
        let vals = HermitianOp::identity(3).eig_hermitian().unwrap();
        assert_eq!(vals, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn eig_diagonal_sorted_ascending() {
        let vals = HermitianOp::from_real_diag(&[3.0, -1.0])
            .eig_hermitian()
            .unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eig_pauli_x() {
        let vals = HermitianOp::pauli_x().eig_hermitian().unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_reconstruction_residual_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in 2..=4 {
            for _ in 0..50 {
                let h = random_hermitian(&mut rng, dim);
                let (vals, vecs) = h.eigendecompose().unwrap();
                // Residual || H v - lambda v || per eigenpair.
                for (lambda, vec) in vals.iter().zip(&vecs) {
                    for i in 0..dim {
                        let mut hv = Complex64::ZERO;
                        for j in 0..dim {
                            hv += h.get(i, j) * vec[j];
                        }
                        let r = (hv - lambda * vec[i]).norm();
                        assert!(
                            r <= 1e-9 * h.operator_norm().max(1.0),
                            "residual {r} too large at dim {dim}"
                        );
                    }
                }
                // Eigenvalue sum equals trace.
                let sum: f64 = vals.iter().sum();
                assert!((sum - h.trace()).abs() < 1e-9 * h.trace().abs().max(1.0));
                // Ascending order.
                for w in vals.windows(2) {
                    assert!(w[0] <= w[1] + 1e-12);
                }
            }
        }
    }

    #[test]
    fn operator_norm_examples() {
        assert_eq!(HermitianOp::zero(3).operator_norm(), 0.0);
        assert!((HermitianOp::scaled_identity(2, 2.0).operator_norm() - 2.0).abs() < 1e-14);
        // The distance witness from the explicit four-element radius set:
        // || P_0 + P_{pi/4} - (3/2 + (cos - sin)/4*2 ...) I || at theta = pi/4
        // collapses to || P_0 + P_{pi/4} - (3/2) I || = 1/2 + 1/sqrt(2).
        let theta = std::f64::consts::FRAC_PI_4;
        let shift = 1.5 + 0.5 * (theta.cos() - theta.sin());
        let h = projector_from_angle(0.0)
            .op()
            .add(projector_from_angle(theta).op())
            .unwrap()
            .sub(&HermitianOp::scaled_identity(2, shift))
            .unwrap();
        let expected = 0.5 + 0.5 * (theta.cos() + theta.sin());
        assert!((h.operator_norm() - expected).abs() < 1e-12);
        assert!((expected - (0.5 + SQRT2_INV)).abs() < 1e-15);
    }

    #[test]
    fn bloch_examples() {
        let b = HermitianOp::identity(2).bloch_decompose().unwrap();
        assert_eq!(b.trace, 2.0);
        assert_eq!(b.vec, [0.0, 0.0, 0.0]);

        let b = HermitianOp::pauli_z().bloch_decompose().unwrap();
        assert_eq!(b.trace, 0.0);
        assert_eq!(b.vec, [0.0, 0.0, 1.0]);

        // P_theta has traceless part (sin 2t, 0, cos 2t)/2; at theta = pi/4
        // that is (1/2, 0, 0).
        let b = projector_from_angle(std::f64::consts::FRAC_PI_4)
            .op()
            .bloch_decompose()
            .unwrap();
        assert!((b.trace - 1.0).abs() < 1e-14);
        assert!((b.vec[0] - 0.5).abs() < 1e-14);
        assert!(b.vec[1].abs() < 1e-14);
        assert!(b.vec[2].abs() < 1e-14);
        assert!((norm3(&b.vec) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn bloch_rejects_wrong_dim() {
        assert!(matches!(
            HermitianOp::identity(3).bloch_decompose(),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn projector_from_angle_examples() {
        let p0 = projector_from_angle(0.0);
        assert!(p0.op().max_entrywise_diff(&HermitianOp::from_real_diag(&[1.0, 0.0])) < 1e-15);
        let p90 = projector_from_angle(std::f64::consts::FRAC_PI_2);
        assert!(p90.op().max_entrywise_diff(&HermitianOp::from_real_diag(&[0.0, 1.0])) < 1e-15);
        let p45 = projector_from_angle(std::f64::consts::FRAC_PI_4);
        for i in 0..2 {
            for j in 0..2 {
                assert!((p45.op().get(i, j) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
            }
        }
        // theta and theta + pi agree.
        let a = projector_from_angle(0.3);
        let b = projector_from_angle(0.3 + std::f64::consts::PI);
        assert!(a.op().max_entrywise_diff(b.op()) < 1e-12);
    }

    #[test]
    fn complement_examples() {
        let z = Projector::zero(2);
        assert!(z.complement().op().max_entrywise_diff(&HermitianOp::identity(2)) < 1e-15);
        let d = Projector::new(HermitianOp::from_real_diag(&[1.0, 0.0])).unwrap();
        assert!(
            d.complement()
                .op()
                .max_entrywise_diff(&HermitianOp::from_real_diag(&[0.0, 1.0]))
                < 1e-15
        );
        let p = projector_from_angle(std::f64::consts::FRAC_PI_4);
        let q = projector_from_angle(3.0 * std::f64::consts::FRAC_PI_4);
        assert!(p.complement().op().max_entrywise_diff(q.op()) < 1e-12);
        // Complement is idempotent again.
        Projector::new(p.complement().op().clone()).unwrap();
    }

    #[test]
    fn projector_rejects_non_idempotent() {
        assert!(matches!(
            Projector::new(HermitianOp::scaled_identity(2, 0.5)),
            Err(Error::NotProjector { .. })
        ));
    }

    #[test]
    fn new_rejects_non_hermitian() {
        let entries = vec![
            Complex64::ONE,
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::ONE,
        ];
        assert!(matches!(
            HermitianOp::new(2, entries),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn unitary_conjugation_preserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let h = random_hermitian(&mut rng, 3);
            // Eigenvector matrix of an independent Hermitian is unitary.
            let (_, u) = random_hermitian(&mut rng, 3).eigendecompose().unwrap();
            let n = 3;
            let mut conj = vec![Complex64::ZERO; n * n];
            // conj = U^dag H U with U columns u[k].
            for a in 0..n {
                for b in 0..n {
                    let mut acc = Complex64::ZERO;
                    for i in 0..n {
                        for j in 0..n {
                            acc += u[a][i].conj() * h.get(i, j) * u[b][j];
                        }
                    }
                    conj[a * n + b] = acc;
                }
            }
            // Symmetrize away roundoff before wrapping.
            for i in 0..n {
                conj[i * n + i] = Complex64::new(conj[i * n + i].re, 0.0);
                for j in (i + 1)..n {
                    let sym = 0.5 * (conj[i * n + j] + conj[j * n + i].conj());
                    conj[i * n + j] = sym;
                    conj[j * n + i] = sym.conj();
                }
            }
            let hc = HermitianOp::from_parts_unchecked(n, conj);
            assert!((hc.operator_norm() - h.operator_norm()).abs() < 1e-9);
        }
    }

    #[test]
    fn kron_matches_direct_product() {
        let x = HermitianOp::pauli_x();
        let z = HermitianOp::pauli_z();
        let k = x.kron(&z);
        assert_eq!(k.dim(), 4);
        // (X kron Z)[0][2] = X[0][1] * Z[0][0] = 1.
        assert!((k.get(0, 2) - Complex64::ONE).norm() < 1e-15);
        assert!((k.get(1, 3) + Complex64::ONE).norm() < 1e-15);
        assert!((k.trace()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn bloch_roundtrip_and_norm(t in -4.0f64..4.0, x in -2.0f64..2.0,
                                    y in -2.0f64..2.0, z in -2.0f64..2.0) {
            let b = BlochForm { trace: t, vec: [x, y, z] };
            let h = b.reconstruct();
            let b2 = h.bloch_decompose().unwrap();
            prop_assert!((b2.trace - t).abs() < 1e-12);
            for k in 0..3 {
                prop_assert!((b2.vec[k] - b.vec[k]).abs() < 1e-12);
            }
            // Operator norm identity |t|/2 + ||v||.
            let direct = {
                let vals = h.eig_hermitian().unwrap();
                vals.iter().fold(0.0f64, |m, &l| m.max(l.abs()))
            };
            prop_assert!((direct - b.operator_norm()).abs() < 1e-10);
        }

        #[test]
        fn projector_angles_idempotent(theta in -10.0f64..10.0) {
            let p = projector_from_angle(theta);
            let sq = p.op().matmul_raw(p.op());
            for (a, b) in sq.iter().zip(p.op().data()) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }
    }
}
