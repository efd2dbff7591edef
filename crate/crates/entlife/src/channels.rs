//! Qubit channel representations and calculus.
//!
//! A channel lives here as its Pauli transfer matrix, the 4x4 real matrix
//! M_ij = tr[sigma_i Phi[sigma_j]] / 2 over (I, sigma_1, sigma_2, sigma_3).
//! Conversions to and from Kraus sets and Choi matrices, classification
//! (positive, completely positive, entanglement breaking, unital), duals,
//! composition, the canonical diagonal-with-shift form, and application of a
//! local channel pair to a two-qubit state.

use crate::algebra::{
    cmat_zero, hermitian_eigen, hermitian_eigenvalues, kron, partial_transpose_raw, rmat3_apply,
    rmat3_mul, rmat3_transpose, svd_special, CMat, Mat2, RMat3, TwoQubitDensity, C64,
};
use crate::{Error, Result};
use serde::Deserialize;

/// Pauli transfer matrix of a trace-preserving qubit map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    m: [[f64; 4]; 4],
}

impl TransferMatrix {
    /// Validates the trace-preservation row (1,0,0,0) to 1e-12.
    pub fn new(m: [[f64; 4]; 4]) -> Result<Self> {
        let r = (m[0][0] - 1.0)
            .abs()
            .max(m[0][1].abs())
            .max(m[0][2].abs())
            .max(m[0][3].abs());
        if r > 1e-12 {
            return Err(Error::OutOfRange(format!(
                "transfer matrix top row deviates from (1,0,0,0) by {r:.3e}"
            )));
        }
        Ok(TransferMatrix { m })
    }

    pub fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        TransferMatrix { m }
    }

    pub fn from_diagonal(ch: &DiagonalChannel) -> Self {
        let mut m = [[0.0; 4]; 4];
        m[0][0] = 1.0;
        for j in 0..3 {
            m[j + 1][j + 1] = ch.lambda[j];
            m[j + 1][0] = ch.shift[j];
        }
        TransferMatrix { m }
    }

    pub fn entries(&self) -> &[[f64; 4]; 4] {
        &self.m
    }

    /// Lower-right 3x3 block acting on Bloch vectors.
    pub fn bloch_block(&self) -> RMat3 {
        let mut b = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                b[i][j] = self.m[i + 1][j + 1];
            }
        }
        b
    }

    /// Bloch shift, the first column tail.
    pub fn shift(&self) -> [f64; 3] {
        [self.m[1][0], self.m[2][0], self.m[3][0]]
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        let t = self.shift();
        (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt() <= tol
    }

    /// Action on a single-qubit operator written as Bloch components
    /// (a0, a): a0 I + a.sigma maps to a0' I + a'.sigma.
    pub fn apply_bloch(&self, a0: f64, a: [f64; 3]) -> (f64, [f64; 3]) {
        let v = [a0, a[0], a[1], a[2]];
        let mut out = [0.0; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i] += self.m[i][j] * v[j];
            }
        }
        (out[0], [out[1], out[2], out[3]])
    }
}

/// Canonical diagonal-with-shift view of a channel: Bloch block diag(lambda)
/// plus translation t. Unital exactly when t = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalChannel {
    pub lambda: [f64; 3],
    pub shift: [f64; 3],
}

impl DiagonalChannel {
    pub fn unital(lambda: [f64; 3]) -> Self {
        DiagonalChannel { lambda, shift: [0.0; 3] }
    }

    pub fn new(lambda: [f64; 3], shift: [f64; 3]) -> Self {
        DiagonalChannel { lambda, shift }
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        let t = &self.shift;
        (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt() <= tol
    }
}

/// Trace-preserving Kraus representation.
#[derive(Debug, Clone)]
pub struct KrausSet {
    ops: Vec<Mat2>,
}

impl KrausSet {
    /// Validates completeness sum K^dagger K = I to 1e-10.
    pub fn new(ops: Vec<Mat2>) -> Result<Self> {
        let mut s = cmat_zero::<2>();
        for k in &ops {
            let kk = k.adjoint().mul(k);
            for i in 0..2 {
                for j in 0..2 {
                    s[i][j] += kk.m[i][j];
                }
            }
        }
        let mut r = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { 1.0 } else { 0.0 };
                r = r.max((s[i][j] - C64::new(target, 0.0)).norm());
            }
        }
        if r > 1e-10 {
            return Err(Error::IncompleteKraus(r));
        }
        Ok(KrausSet { ops })
    }

    pub fn operators(&self) -> &[Mat2] {
        &self.ops
    }
}

/// Positivity and entanglement flags of a channel. Construction keeps the
/// implications consistent: completely positive channels are positive, and
/// entanglement-breaking channels are completely positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelClass {
    pub positive: bool,
    pub completely_positive: bool,
    pub entanglement_breaking: bool,
    pub unital: bool,
}

impl ChannelClass {
    fn consistent(positive: bool, cp: bool, eb: bool, unital: bool) -> Self {
        ChannelClass {
            positive: positive || cp,
            completely_positive: cp,
            entanglement_breaking: eb && cp,
            unital,
        }
    }
}

/// Transfer matrix from a Kraus set, M_ij = sum_a tr[sigma_i K_a sigma_j K_a^dagger] / 2.
pub fn ptm_from_kraus(k: &KrausSet) -> TransferMatrix {
    let sigmas = [
        Mat2::identity(),
        Mat2::sigma(0),
        Mat2::sigma(1),
        Mat2::sigma(2),
    ];
    let mut m = [[0.0; 4]; 4];
    for a in k.operators() {
        let ad = a.adjoint();
        for (j, sj) in sigmas.iter().enumerate() {
            let conj = a.mul(sj).mul(&ad);
            for (i, si) in sigmas.iter().enumerate() {
                let prod = si.mul(&conj);
                m[i][j] += 0.5 * prod.trace().re;
            }
        }
    }
    // completeness is validated, so snap the trace row exactly
    m[0] = [1.0, 0.0, 0.0, 0.0];
    TransferMatrix { m }
}

/// Mixing weights of the Pauli Kraus form sqrt(q_j) sigma_j realizing the
/// unital channel diag(1, lambda). Fails when the channel is not completely
/// positive, which is exactly when a weight turns negative.
pub fn pauli_kraus_weights(lambda: [f64; 3]) -> Result<[f64; 4]> {
    let [l1, l2, l3] = lambda;
    let q = [
        (1.0 + l1 + l2 + l3) / 4.0,
        (1.0 + l1 - l2 - l3) / 4.0,
        (1.0 - l1 + l2 - l3) / 4.0,
        (1.0 - l1 - l2 + l3) / 4.0,
    ];
    if let Some(&bad) = q.iter().find(|&&x| x < -1e-12) {
        return Err(Error::NotCompletelyPositive(4.0 * bad));
    }
    Ok(q)
}

/// Choi matrix (Id x Phi)[|psi_+><psi_+|], unit trace, Hermitian. The channel
/// is completely positive exactly when this is positive semidefinite.
pub fn choi_from_ptm(m: &TransferMatrix) -> CMat<4> {
    let sigmas = [
        Mat2::identity(),
        Mat2::sigma(0),
        Mat2::sigma(1),
        Mat2::sigma(2),
    ];
    let mut choi = cmat_zero::<4>();
    for j in 0..4 {
        let sjt = {
            let s = sigmas[j];
            Mat2::new([[s.m[0][0], s.m[1][0]], [s.m[0][1], s.m[1][1]]])
        };
        for i in 0..4 {
            let w = m.entries()[i][j];
            if w == 0.0 {
                continue;
            }
            let term = kron(&sjt, &sigmas[i]);
            for r in 0..4 {
                for c in 0..4 {
                    choi[r][c] += term[r][c] * (0.25 * w);
                }
            }
        }
    }
    choi
}

/// Kraus operators recovered from the Choi eigen-decomposition. Fails with
/// `NotCompletelyPositive` when a Choi eigenvalue dips below -1e-10.
pub fn kraus_from_choi(choi: &CMat<4>) -> Result<KrausSet> {
    let (w, v) = hermitian_eigen(choi)?;
    if w[0] < -1e-10 {
        return Err(Error::NotCompletelyPositive(w[0]));
    }
    let mut ops = Vec::new();
    for k in 0..4 {
        if w[k] <= 1e-14 {
            continue;
        }
        let s = (2.0 * w[k]).sqrt();
        // Choi index (i, a) = 2 i + a; K[a][i] = sqrt(2 w) v[(i,a)][k]
        let mut op = Mat2::zero();
        for i in 0..2 {
            for a in 0..2 {
                op.m[a][i] = v[2 * i + a][k] * s;
            }
        }
        ops.push(op);
    }
    KrausSet::new(ops)
}

/// Deterministic near-uniform direction grid on the unit sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let th = golden * k as f64;
            [r * th.cos(), r * th.sin(), z]
        })
        .collect()
}

/// Shared 10k-point sweep grid; positivity scans run often enough that
/// rebuilding it each time shows up in profiles.
pub(crate) fn unit_grid() -> &'static [[f64; 3]] {
    static GRID: std::sync::OnceLock<Vec<[f64; 3]>> = std::sync::OnceLock::new();
    GRID.get_or_init(|| fibonacci_sphere(10_000))
}

/// Classifies a canonical channel.
///
/// Unital channels use the closed-form tests: positivity |lambda_j| <= 1,
/// complete positivity 1 +- lambda_3 >= |lambda_1 +- lambda_2|, entanglement
/// breaking |lambda_1| + |lambda_2| + |lambda_3| <= 1. Shifted channels fall
/// back on Choi eigenvalues for CP, the Choi partial transpose for EB (exact
/// for qubits), and for positivity the shift ellipsoid necessary test
/// combined with an image-norm sweep over a Fibonacci sphere grid.
pub fn classify(c: &DiagonalChannel) -> ChannelClass {
    let unital = c.is_unital(1e-12);
    let l = c.lambda;
    let la = [l[0].abs(), l[1].abs(), l[2].abs()];
    if unital {
        let positive = la.iter().all(|&x| x <= 1.0 + 1e-12);
        let cp = (1.0 + l[2]) - (l[0] + l[1]).abs() >= -1e-12
            && (1.0 - l[2]) - (l[0] - l[1]).abs() >= -1e-12;
        let eb = la[0] + la[1] + la[2] <= 1.0 + 1e-12;
        return ChannelClass::consistent(positive, cp, eb, true);
    }
    let t = c.shift;
    // ellipsoid necessary condition, with the 1/0 terms read as 0 when t_j = 0
    let mut ellipsoid = 0.0;
    let mut ell_ok = true;
    for j in 0..3 {
        let d = 1.0 - la[j];
        if d.abs() < 1e-12 {
            if t[j].abs() > 1e-12 {
                ell_ok = false;
            }
        } else {
            ellipsoid += t[j] * t[j] / (d * d);
        }
    }
    ell_ok &= ellipsoid <= 1.0 + 1e-9;
    let mut positive = ell_ok && la.iter().all(|&x| x <= 1.0 + 1e-12);
    if positive {
        for r in unit_grid() {
            let img = [
                l[0] * r[0] + t[0],
                l[1] * r[1] + t[1],
                l[2] * r[2] + t[2],
            ];
            let n2 = img[0] * img[0] + img[1] * img[1] + img[2] * img[2];
            if n2 > (1.0 + 1e-9) * (1.0 + 1e-9) {
                positive = false;
                break;
            }
        }
    }
    let ptm = TransferMatrix::from_diagonal(c);
    let choi = choi_from_ptm(&ptm);
    let cw = hermitian_eigenvalues(&choi).expect("Choi is Hermitian by construction");
    let cp = cw[0] >= -1e-10;
    let eb = cp && {
        let ptw = hermitian_eigenvalues(&partial_transpose_raw(&choi))
            .expect("PT keeps Hermiticity");
        ptw[0] >= -1e-10
    };
    ChannelClass::consistent(positive, cp, eb, false)
}

/// Matrix product of transfer matrices, outer after inner.
pub fn compose(outer: &TransferMatrix, inner: &TransferMatrix) -> TransferMatrix {
    let a = outer.entries();
    let b = inner.entries();
    let mut m = [[0.0; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            for j in 0..4 {
                m[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    TransferMatrix { m }
}

/// Transfer matrix of the dual (adjoint) map: the plain transpose in this
/// orthonormal Pauli basis. Not trace-preserving for shifted channels, hence
/// the raw return type.
pub fn dual(m: &TransferMatrix) -> [[f64; 4]; 4] {
    let a = m.entries();
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[j][i];
        }
    }
    out
}

/// Factors the Bloch block as Q_out diag(lambda) Q_in with proper rotations
/// on both sides; any sign is absorbed into lambda_3 and magnitudes sort
/// descending. The shift moves to the output frame, t_canonical = Q_out^T t.
pub fn canonical_form(m: &TransferMatrix) -> (DiagonalChannel, RMat3, RMat3) {
    let (q_out, s, q_in) = svd_special(&m.bloch_block());
    let t = m.shift();
    let tc = rmat3_apply(&rmat3_transpose(&q_out), &t);
    (DiagonalChannel { lambda: s, shift: tc }, q_out, q_in)
}

/// Rebuilds the transfer matrix from a canonical factorization, the inverse
/// of [`canonical_form`].
pub fn assemble(ch: &DiagonalChannel, q_out: &RMat3, q_in: &RMat3) -> TransferMatrix {
    let mut d = [[0.0; 3]; 3];
    for i in 0..3 {
        d[i][i] = ch.lambda[i];
    }
    let block = rmat3_mul(&rmat3_mul(q_out, &d), q_in);
    let t = rmat3_apply(q_out, &ch.shift);
    let mut m = [[0.0; 4]; 4];
    m[0][0] = 1.0;
    for i in 0..3 {
        m[i + 1][0] = t[i];
        for j in 0..3 {
            m[i + 1][j + 1] = block[i][j];
        }
    }
    TransferMatrix { m }
}

/// Applies a local channel pair, rho_out = (Phi_left x Phi_right)[rho], by
/// transforming the 16 Pauli expansion coefficients.
///
/// Fails with `InvalidState` when the output spectrum dips below -1e-8,
/// which signals a non-CP input map rather than roundoff.
pub fn apply_pair(
    left: &TransferMatrix,
    right: &TransferMatrix,
    rho: &TwoQubitDensity,
) -> Result<TwoQubitDensity> {
    let sigmas = [
        Mat2::identity(),
        Mat2::sigma(0),
        Mat2::sigma(1),
        Mat2::sigma(2),
    ];
    let m = rho.entries();
    // c_ij = tr[(sigma_i x sigma_j) rho], real for Hermitian rho
    let mut c = [[0.0f64; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let k = kron(&sigmas[i], &sigmas[j]);
            let mut tr = C64::new(0.0, 0.0);
            for r in 0..4 {
                for s in 0..4 {
                    tr += k[r][s] * m[s][r];
                }
            }
            c[i][j] = tr.re;
        }
    }
    let ml = left.entries();
    let mr = right.entries();
    let mut cp = [[0.0f64; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    acc += ml[i][a] * c[a][b] * mr[j][b];
                }
            }
            cp[i][j] = acc;
        }
    }
    let mut out = cmat_zero::<4>();
    for i in 0..4 {
        for j in 0..4 {
            if cp[i][j] == 0.0 {
                continue;
            }
            let k = kron(&sigmas[i], &sigmas[j]);
            let w = 0.25 * cp[i][j];
            for r in 0..4 {
                for s in 0..4 {
                    out[r][s] += k[r][s] * w;
                }
            }
        }
    }
    // enforce exact Hermiticity against accumulation noise
    for r in 0..4 {
        for s in (r + 1)..4 {
            let h = 0.5 * (out[r][s] + out[s][r].conj());
            out[r][s] = h;
            out[s][r] = h.conj();
        }
        out[r][r] = C64::new(out[r][r].re, 0.0);
    }
    TwoQubitDensity::new_with_floor(out, -1e-8)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelJson {
    lambda: Option<[f64; 3]>,
    t: Option<[f64; 3]>,
    kraus: Option<Vec<[[f64; 2]; 4]>>,
}

/// Parses the channel interchange format: either
/// `{"lambda":[l1,l2,l3]}` with optional `"t":[t1,t2,t3]`, or
/// `{"kraus":[[[re,im] x 4 row-major], ...]}`. Exactly one of the two
/// spellings must be present.
pub fn parse_channel_json(text: &str) -> Result<TransferMatrix> {
    let parsed: ChannelJson =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    match (parsed.lambda, parsed.kraus) {
        (Some(lambda), None) => {
            let shift = parsed.t.unwrap_or([0.0; 3]);
            Ok(TransferMatrix::from_diagonal(&DiagonalChannel { lambda, shift }))
        }
        (None, Some(kraus)) => {
            if parsed.t.is_some() {
                return Err(Error::Parse("\"t\" only combines with \"lambda\"".into()));
            }
            let ops = kraus
                .iter()
                .map(|flat| {
                    Mat2::new([
                        [
                            C64::new(flat[0][0], flat[0][1]),
                            C64::new(flat[1][0], flat[1][1]),
                        ],
                        [
                            C64::new(flat[2][0], flat[2][1]),
                            C64::new(flat[3][0], flat[3][1]),
                        ],
                    ])
                })
                .collect();
            Ok(ptm_from_kraus(&KrausSet::new(ops)?))
        }
        (Some(_), Some(_)) => Err(Error::Parse(
            "channel needs exactly one of \"lambda\" or \"kraus\", found both".into(),
        )),
        (None, None) => Err(Error::Parse(
            "channel needs exactly one of \"lambda\" or \"kraus\"".into(),
        )),
    }
}
