//! Fixed-dimension complex linear algebra for one- and two-qubit operators.
//!
//! Everything here is sized at compile time: 2x2 operators, 4x4 two-qubit
//! densities, 3x3 real rotation blocks. Eigenvalues come from cyclic Jacobi
//! sweeps with a deterministic sweep order so repeated runs agree bit for bit.

use crate::{Error, Result};
use num_complex::Complex64;

pub type C64 = Complex64;

/// Square complex matrix with compile-time dimension.
pub type CMat<const N: usize> = [[C64; N]; N];

/// 3x3 real matrix, used for rotation and singular-value blocks.
pub type RMat3 = [[f64; 3]; 3];

pub const fn czero() -> C64 {
    C64 { re: 0.0, im: 0.0 }
}

pub fn cmat_zero<const N: usize>() -> CMat<N> {
    [[czero(); N]; N]
}

pub fn cmat_identity<const N: usize>() -> CMat<N> {
    let mut m = cmat_zero();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = C64::new(1.0, 0.0);
    }
    m
}

pub fn cmat_mul<const N: usize>(a: &CMat<N>, b: &CMat<N>) -> CMat<N> {
    let mut out = cmat_zero();
    for i in 0..N {
        for k in 0..N {
            let aik = a[i][k];
            if aik == czero() {
                continue;
            }
            for j in 0..N {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn cmat_adjoint<const N: usize>(a: &CMat<N>) -> CMat<N> {
    let mut out = cmat_zero();
    for i in 0..N {
        for j in 0..N {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

pub fn cmat_sub<const N: usize>(a: &CMat<N>, b: &CMat<N>) -> CMat<N> {
    let mut out = *a;
    for i in 0..N {
        for j in 0..N {
            out[i][j] -= b[i][j];
        }
    }
    out
}

pub fn cmat_max_abs<const N: usize>(a: &CMat<N>) -> f64 {
    let mut m = 0.0f64;
    for row in a {
        for e in row {
            m = m.max(e.norm());
        }
    }
    m
}

/// Largest deviation from Hermitian symmetry, max |a_ij - conj(a_ji)|.
pub fn hermiticity_residual<const N: usize>(a: &CMat<N>) -> f64 {
    let mut r = 0.0f64;
    for i in 0..N {
        for j in 0..N {
            r = r.max((a[i][j] - a[j][i].conj()).norm());
        }
    }
    r
}

fn off_diag_norm<const N: usize>(a: &CMat<N>) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        for j in 0..N {
            if i != j {
                s += a[i][j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Returns eigenvalues ascending and the matching unitary whose
/// columns are eigenvectors, so `a = v diag(w) v^dagger`.
///
/// Fails with `NonHermitian` when the symmetry residual exceeds 1e-10.
pub fn hermitian_eigen<const N: usize>(a: &CMat<N>) -> Result<([f64; N], CMat<N>)> {
    let res = hermiticity_residual(a);
    if res > 1e-10 {
        return Err(Error::NonHermitian(res));
    }
    let mut m = *a;
    // symmetrize exactly so rotations keep the matrix Hermitian
    for i in 0..N {
        for j in 0..N {
            let h = 0.5 * (m[i][j] + m[j][i].conj());
            m[i][j] = h;
            m[j][i] = h.conj();
        }
        m[i][i] = C64::new(m[i][i].re, 0.0);
    }
    let mut v = cmat_identity::<N>();
    let scale = {
        let mut s = 0.0;
        for row in &m {
            for e in row {
                s += e.norm_sqr();
            }
        }
        s.sqrt().max(1e-300)
    };
    let thresh = 1e-13f64.max(1e-15 * scale);
    for _ in 0..100 {
        if off_diag_norm(&m) < thresh {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let g = m[p][q];
                let gn = g.norm();
                if gn < 1e-18 * scale {
                    continue;
                }
                let alpha = m[p][p].re;
                let beta = m[q][q].re;
                let tau = (beta - alpha) / (2.0 * gn);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let u = g / gn;
                // columns p and q of both m (two-sided) and v (right side)
                for i in 0..N {
                    let mip = m[i][p];
                    let miq = m[i][q];
                    m[i][p] = mip * c - miq * s * u.conj();
                    m[i][q] = mip * s * u + miq * c;
                }
                for i in 0..N {
                    let mpi = m[p][i];
                    let mqi = m[q][i];
                    m[p][i] = mpi * c - mqi * s * u;
                    m[q][i] = mpi * s * u.conj() + mqi * c;
                }
                for i in 0..N {
                    let vip = v[i][p];
                    let viq = v[i][q];
                    v[i][p] = vip * c - viq * s * u.conj();
                    v[i][q] = vip * s * u + viq * c;
                }
                m[p][q] = czero();
                m[q][p] = czero();
            }
        }
    }
    let mut order: [usize; N] = core::array::from_fn(|i| i);
    order.sort_by(|&i, &j| m[i][i].re.partial_cmp(&m[j][j].re).unwrap());
    let mut w = [0.0; N];
    let mut vs = cmat_zero::<N>();
    for (k, &i) in order.iter().enumerate() {
        w[k] = m[i][i].re;
        for r in 0..N {
            vs[r][k] = v[r][i];
        }
    }
    Ok((w, vs))
}

/// Eigenvalues only, ascending. See [`hermitian_eigen`].
pub fn hermitian_eigenvalues<const N: usize>(a: &CMat<N>) -> Result<[f64; N]> {
    hermitian_eigen(a).map(|(w, _)| w)
}

/// One-qubit operator, a plain 2x2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m: CMat<2>,
}

impl Mat2 {
    pub fn new(m: CMat<2>) -> Self {
        Mat2 { m }
    }

    pub fn identity() -> Self {
        Mat2 { m: cmat_identity() }
    }

    pub fn zero() -> Self {
        Mat2 { m: cmat_zero() }
    }

    /// Real combination a0 I + a.sigma, always Hermitian.
    pub fn pauli_combo(a0: f64, a: [f64; 3]) -> Self {
        let mut out = Self::zero();
        out.m[0][0] = C64::new(a0 + a[2], 0.0);
        out.m[1][1] = C64::new(a0 - a[2], 0.0);
        out.m[0][1] = C64::new(a[0], -a[1]);
        out.m[1][0] = C64::new(a[0], a[1]);
        out
    }

    pub fn sigma(j: usize) -> Self {
        let mut a = [0.0; 3];
        a[j] = 1.0;
        Self::pauli_combo(0.0, a)
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 { m: cmat_mul(&self.m, &o.m) }
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        let mut m = self.m;
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += o.m[i][j];
            }
        }
        Mat2 { m }
    }

    pub fn scale(&self, c: C64) -> Mat2 {
        let mut m = self.m;
        for row in m.iter_mut() {
            for e in row.iter_mut() {
                *e *= c;
            }
        }
        Mat2 { m }
    }

    pub fn adjoint(&self) -> Mat2 {
        Mat2 { m: cmat_adjoint(&self.m) }
    }

    pub fn trace(&self) -> C64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn inverse(&self) -> Result<Mat2> {
        let d = self.det();
        if d.norm() < 1e-14 {
            return Err(Error::InvalidState("singular 2x2 matrix".into()));
        }
        let inv = C64::new(1.0, 0.0) / d;
        Ok(Mat2 {
            m: [
                [self.m[1][1] * inv, -self.m[0][1] * inv],
                [-self.m[1][0] * inv, self.m[0][0] * inv],
            ],
        })
    }

    pub fn unitarity_residual(&self) -> f64 {
        let p = cmat_mul(&cmat_adjoint(&self.m), &self.m);
        cmat_max_abs(&cmat_sub(&p, &cmat_identity()))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }

    pub fn hermiticity_residual(&self) -> f64 {
        hermiticity_residual(&self.m)
    }

    /// Eigenvalues ascending; requires Hermitian input.
    pub fn eigenvalues(&self) -> Result<[f64; 2]> {
        hermitian_eigenvalues(&self.m)
    }

    /// Real power of a positive-definite Hermitian matrix.
    pub fn powf_posdef(&self, p: f64) -> Result<Mat2> {
        let (w, v) = hermitian_eigen(&self.m)?;
        if w[0] <= 0.0 {
            return Err(Error::InvalidState(format!(
                "matrix power needs positive eigenvalues, found {}",
                w[0]
            )));
        }
        let mut d = cmat_zero::<2>();
        d[0][0] = C64::new(w[0].powf(p), 0.0);
        d[1][1] = C64::new(w[1].powf(p), 0.0);
        let vd = cmat_mul(&v, &d);
        Ok(Mat2 { m: cmat_mul(&vd, &cmat_adjoint(&v)) })
    }
}

/// Kronecker product of one-qubit operators, in the product basis
/// |00>, |01>, |10>, |11>.
pub fn kron(a: &Mat2, b: &Mat2) -> CMat<4> {
    let mut out = cmat_zero::<4>();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a.m[i][j] * b.m[k][l];
                }
            }
        }
    }
    out
}

/// Normalized pure two-qubit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureTwoQubit {
    amp: [C64; 4],
}

impl PureTwoQubit {
    /// Accepts amplitudes already normalized to 1e-12.
    pub fn new(amp: [C64; 4]) -> Result<Self> {
        let n: f64 = amp.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("state norm {} != 1", n)));
        }
        Ok(PureTwoQubit { amp })
    }

    /// Normalizes arbitrary amplitudes; fails on the zero vector.
    pub fn normalized(raw: [C64; 4]) -> Result<Self> {
        let n: f64 = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if n < 1e-12 {
            return Err(Error::InvalidState("cannot normalize zero vector".into()));
        }
        let mut amp = raw;
        for a in amp.iter_mut() {
            *a /= n;
        }
        Ok(PureTwoQubit { amp })
    }

    pub fn amplitudes(&self) -> &[C64; 4] {
        &self.amp
    }

    pub fn projector(&self) -> TwoQubitDensity {
        let mut m = cmat_zero::<4>();
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = self.amp[i] * self.amp[j].conj();
            }
        }
        TwoQubitDensity { m }
    }

    /// Fidelity-style overlap |<self|other>|^2, used for deduplication.
    pub fn overlap_sqr(&self, other: &PureTwoQubit) -> f64 {
        let mut ip = czero();
        for i in 0..4 {
            ip += self.amp[i].conj() * other.amp[i];
        }
        ip.norm_sqr()
    }

    /// Applies a local operator pair and renormalizes.
    pub fn apply_local(&self, a: &Mat2, b: &Mat2) -> Result<PureTwoQubit> {
        let k = kron(a, b);
        let mut raw = [czero(); 4];
        for (i, r) in raw.iter_mut().enumerate() {
            for j in 0..4 {
                *r += k[i][j] * self.amp[j];
            }
        }
        PureTwoQubit::normalized(raw)
    }
}

/// The maximally entangled reference state (|00> + |11>)/sqrt(2).
pub fn bell_phi_plus() -> PureTwoQubit {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    PureTwoQubit { amp: [h, czero(), czero(), h] }
}

/// The one-excitation partner (|01> + |10>)/sqrt(2).
pub fn bell_one_excitation() -> PureTwoQubit {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    PureTwoQubit { amp: [czero(), h, h, czero()] }
}

/// Rotates the reference Bell state by local unitaries, (u x v)|psi_+>.
///
/// Any state produced this way is maximally entangled with negativity 1/2.
pub fn make_bell_like(u: &Mat2, v: &Mat2) -> Result<PureTwoQubit> {
    let ru = u.unitarity_residual();
    if ru > 1e-10 {
        return Err(Error::NonUnitary(ru));
    }
    let rv = v.unitarity_residual();
    if rv > 1e-10 {
        return Err(Error::NonUnitary(rv));
    }
    bell_phi_plus().apply_local(u, v)
}

/// Validated 4x4 density matrix of two qubits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitDensity {
    m: CMat<4>,
}

impl TwoQubitDensity {
    /// Validates Hermiticity and unit trace to 1e-12 and positivity down to
    /// an eigenvalue floor of -1e-10.
    pub fn new(m: CMat<4>) -> Result<Self> {
        Self::new_with_floor(m, -1e-10)
    }

    /// Same validation with a caller-chosen eigenvalue floor, for outputs of
    /// numerically applied channels.
    pub fn new_with_floor(m: CMat<4>, floor: f64) -> Result<Self> {
        let hr = hermiticity_residual(&m);
        if hr > 1e-12 {
            return Err(Error::InvalidState(format!(
                "density not Hermitian, residual {hr:.3e}"
            )));
        }
        let tr = (m[0][0] + m[1][1] + m[2][2] + m[3][3]).re;
        if (tr - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("density trace {tr} != 1")));
        }
        let w = hermitian_eigenvalues(&m)?;
        if w[0] < floor {
            return Err(Error::InvalidState(format!(
                "density eigenvalue {:.3e} below floor",
                w[0]
            )));
        }
        Ok(TwoQubitDensity { m })
    }

    pub fn entries(&self) -> &CMat<4> {
        &self.m
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        // validated at construction, cannot fail
        hermitian_eigenvalues(&self.m).expect("validated density")
    }
}

/// Block-wise transpose of the second-qubit index on a raw 4x4 matrix.
pub fn partial_transpose_raw(m: &CMat<4>) -> CMat<4> {
    let mut out = cmat_zero::<4>();
    for i in 0..2 {
        for j in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    out[2 * i + a][2 * j + b] = m[2 * i + b][2 * j + a];
                }
            }
        }
    }
    out
}

/// Transposes the second-qubit index block-wise. The result stays Hermitian
/// with unit trace but may have negative eigenvalues.
pub fn partial_transpose(rho: &TwoQubitDensity) -> CMat<4> {
    partial_transpose_raw(rho.entries())
}

/// Smallest eigenvalue of the partial transpose; negative iff entangled.
pub fn min_pt_eigenvalue(rho: &TwoQubitDensity) -> f64 {
    let pt = partial_transpose(rho);
    hermitian_eigenvalues(&pt).expect("PT of valid density is Hermitian")[0]
}

/// Negativity, the absolute sum of negative partial-transpose eigenvalues.
/// Zero exactly characterizes separability for two qubits.
pub fn negativity(rho: &TwoQubitDensity) -> f64 {
    let pt = partial_transpose(rho);
    let w = hermitian_eigenvalues(&pt).expect("PT of valid density is Hermitian");
    w.iter().filter(|&&x| x < 0.0).map(|x| -x).sum()
}

pub fn rmat3_mul(a: &RMat3, b: &RMat3) -> RMat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for k in 0..3 {
            for j in 0..3 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn rmat3_transpose(a: &RMat3) -> RMat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

pub fn rmat3_det(a: &RMat3) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

pub fn rmat3_apply(a: &RMat3, v: &[f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i] += a[i][j] * v[j];
        }
    }
    out
}

/// Jacobi eigen-decomposition of a real symmetric 3x3 matrix.
/// Returns eigenvalues descending and the orthogonal matrix of column
/// eigenvectors.
pub fn symmetric3_eigen(a: &RMat3) -> ([f64; 3], RMat3) {
    let mut m = *a;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let h = 0.5 * (m[i][j] + m[j][i]);
            m[i][j] = h;
            m[j][i] = h;
        }
    }
    let mut v = [[0.0; 3]; 3];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale = m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    for _ in 0..60 {
        let off: f64 = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j)
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum::<f64>()
            .sqrt();
        if off < 1e-14 * scale || off < 1e-30 {
            break;
        }
        for p in 0..3 {
            for q in (p + 1)..3 {
                let g = m[p][q];
                if g.abs() < 1e-18 * scale {
                    continue;
                }
                let tau = (m[q][q] - m[p][p]) / (2.0 * g);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..3 {
                    let mip = m[i][p];
                    let miq = m[i][q];
                    m[i][p] = c * mip - s * miq;
                    m[i][q] = s * mip + c * miq;
                }
                for i in 0..3 {
                    let mpi = m[p][i];
                    let mqi = m[q][i];
                    m[p][i] = c * mpi - s * mqi;
                    m[q][i] = s * mpi + c * mqi;
                }
                for i in 0..3 {
                    let vip = v[i][p];
                    let viq = v[i][q];
                    v[i][p] = c * vip - s * viq;
                    v[i][q] = s * vip + c * viq;
                }
                m[p][q] = 0.0;
                m[q][p] = 0.0;
            }
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| m[j][j].partial_cmp(&m[i][i]).unwrap());
    let mut w = [0.0; 3];
    let mut vs = [[0.0; 3]; 3];
    for (k, &i) in order.iter().enumerate() {
        w[k] = m[i][i];
        for r in 0..3 {
            vs[r][k] = v[r][i];
        }
    }
    (w, vs)
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Singular value decomposition of a real 3x3 matrix in the rotation-only
/// convention: m = q_out diag(s) q_in with both factors special orthogonal.
/// Magnitudes are sorted descending and any overall sign is carried by s[2],
/// which is therefore allowed to be negative.
pub fn svd_special(m: &RMat3) -> (RMat3, [f64; 3], RMat3) {
    let mt = rmat3_transpose(m);
    let mtm = rmat3_mul(&mt, m);
    let (w, v) = symmetric3_eigen(&mtm);
    let mut sv = [0.0; 3];
    for i in 0..3 {
        sv[i] = w[i].max(0.0).sqrt();
    }
    // columns of v
    let vc: Vec<[f64; 3]> = (0..3).map(|j| [v[0][j], v[1][j], v[2][j]]).collect();
    let mut uc = [[0.0f64; 3]; 3];
    let mut filled = [false; 3];
    let tol = 1e-12 * (sv[0].max(1.0));
    for j in 0..3 {
        if sv[j] > tol {
            let mv = rmat3_apply(m, &vc[j]);
            for r in 0..3 {
                uc[j][r] = mv[r] / sv[j];
            }
            filled[j] = true;
        }
    }
    // m v_j / s_j amplifies eigenvector roundoff by s_0/s_j, which ruins
    // orthogonality when the spectrum spans many orders. Re-orthonormalize
    // in descending order so the dominant directions stay put.
    for j in 0..3 {
        if !filled[j] {
            continue;
        }
        for p in 0..j {
            if !filled[p] {
                continue;
            }
            let ip: f64 = (0..3).map(|r| uc[p][r] * uc[j][r]).sum();
            for r in 0..3 {
                uc[j][r] -= ip * uc[p][r];
            }
        }
        let n = (uc[j][0].powi(2) + uc[j][1].powi(2) + uc[j][2].powi(2)).sqrt();
        if n > 0.5 {
            for r in 0..3 {
                uc[j][r] /= n;
            }
        } else {
            // column drowned in noise, hand it to the completion pass
            uc[j] = [0.0; 3];
            filled[j] = false;
        }
    }
    // complete missing columns: cross product when two are fixed, otherwise
    // Gram-Schmidt a basis vector against whatever is already in place
    for j in 0..3 {
        if filled[j] {
            continue;
        }
        let fixed: Vec<usize> = (0..3).filter(|&p| p != j && filled[p]).collect();
        let cand = if fixed.len() == 2 {
            cross(&uc[fixed[0]], &uc[fixed[1]])
        } else {
            let mut best = [0.0; 3];
            let mut best_n = -1.0;
            for k in 0..3 {
                let mut c = [0.0; 3];
                c[k] = 1.0;
                for &p in &fixed {
                    let ip: f64 = (0..3).map(|r| uc[p][r] * c[r]).sum();
                    for r in 0..3 {
                        c[r] -= ip * uc[p][r];
                    }
                }
                let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
                if n > best_n {
                    best_n = n;
                    best = c;
                }
            }
            best
        };
        let n = (cand[0] * cand[0] + cand[1] * cand[1] + cand[2] * cand[2]).sqrt();
        for r in 0..3 {
            uc[j][r] = cand[r] / n.max(1e-300);
        }
        filled[j] = true;
    }
    let mut u = [[0.0; 3]; 3];
    for j in 0..3 {
        for r in 0..3 {
            u[r][j] = uc[j][r];
        }
    }
    let su = rmat3_det(&u).signum();
    let svn = rmat3_det(&v).signum();
    // push the determinant signs into the last singular value
    let mut q_out = u;
    let mut v_fixed = v;
    for r in 0..3 {
        q_out[r][2] *= su;
        v_fixed[r][2] *= svn;
    }
    let q_in = rmat3_transpose(&v_fixed);
    sv[2] *= su * svn;
    (q_out, sv, q_in)
}

/// Lifts a proper rotation to the unitary conjugation that realizes it on the
/// Pauli vector: u sigma_j u^dagger = sum_i q_ij sigma_i. Defined up to a
/// global sign.
pub fn rotation_to_unitary(q: &RMat3) -> Result<Mat2> {
    let qt = rmat3_transpose(q);
    let prod = rmat3_mul(&qt, q);
    let mut res = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let target = if i == j { 1.0 } else { 0.0 };
            res = res.max((prod[i][j] - target).abs());
        }
    }
    if res > 1e-9 || (rmat3_det(q) - 1.0).abs() > 1e-9 {
        return Err(Error::OutOfRange(format!(
            "not a special orthogonal matrix, residual {res:.3e}"
        )));
    }
    // quaternion extraction, branch on the largest pivot for stability
    let tr = q[0][0] + q[1][1] + q[2][2];
    let (w, x, y, z);
    if tr > 0.0 {
        let r = (1.0 + tr).sqrt();
        w = 0.5 * r;
        x = (q[2][1] - q[1][2]) / (2.0 * r);
        y = (q[0][2] - q[2][0]) / (2.0 * r);
        z = (q[1][0] - q[0][1]) / (2.0 * r);
    } else if q[0][0] >= q[1][1] && q[0][0] >= q[2][2] {
        let r = (1.0 + q[0][0] - q[1][1] - q[2][2]).sqrt();
        x = 0.5 * r;
        w = (q[2][1] - q[1][2]) / (2.0 * r);
        y = (q[0][1] + q[1][0]) / (2.0 * r);
        z = (q[0][2] + q[2][0]) / (2.0 * r);
    } else if q[1][1] >= q[2][2] {
        let r = (1.0 - q[0][0] + q[1][1] - q[2][2]).sqrt();
        y = 0.5 * r;
        w = (q[0][2] - q[2][0]) / (2.0 * r);
        x = (q[0][1] + q[1][0]) / (2.0 * r);
        z = (q[1][2] + q[2][1]) / (2.0 * r);
    } else {
        let r = (1.0 - q[0][0] - q[1][1] + q[2][2]).sqrt();
        z = 0.5 * r;
        w = (q[1][0] - q[0][1]) / (2.0 * r);
        x = (q[0][2] + q[2][0]) / (2.0 * r);
        y = (q[1][2] + q[2][1]) / (2.0 * r);
    }
    // u = w I - i (x,y,z).sigma
    let mut u = Mat2::zero();
    u.m[0][0] = C64::new(w, -z);
    u.m[1][1] = C64::new(w, z);
    u.m[0][1] = C64::new(-y, -x);
    u.m[1][0] = C64::new(y, -x);
    Ok(u)
}

/// Rotation realized by conjugation with a unitary, the inverse direction of
/// [`rotation_to_unitary`].
pub fn unitary_to_rotation(u: &Mat2) -> Result<RMat3> {
    let ru = u.unitarity_residual();
    if ru > 1e-10 {
        return Err(Error::NonUnitary(ru));
    }
    let mut q = [[0.0; 3]; 3];
    for j in 0..3 {
        let conj = u.mul(&Mat2::sigma(j)).mul(&u.adjoint());
        for (i, row) in q.iter_mut().enumerate() {
            let si = Mat2::sigma(i);
            let mut tr = czero();
            for r in 0..2 {
                for c in 0..2 {
                    tr += si.m[r][c] * conj.m[c][r];
                }
            }
            row[j] = 0.5 * tr.re;
        }
    }
    Ok(q)
}
