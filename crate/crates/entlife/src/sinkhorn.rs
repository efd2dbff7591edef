//! Balancing a shifted qubit channel into a unital core.
//!
//! The annihilation criterion in [`crate::unital`] only speaks about unital
//! channels. A channel with a Bloch shift gets there by scaling: find
//! positive operators A and B so that rho -> A Phi[B rho B] A is unital and
//! trace preserving, a quantum analogue of Sinkhorn matrix balancing. For a
//! qubit the balancing point is fully explicit. It comes from the largest
//! root of a quartic whose coefficients are polynomial in the channel data,
//! and every operator downstream is closed-form algebra on that root. A
//! fixed-point iteration of the same balancing map is kept as an
//! independent cross-check.

use crate::algebra::{
    rmat3_mul, rotation_to_unitary, svd_special, Mat2, RMat3, C64,
};
use crate::channels::{canonical_form, dual, unit_grid, DiagonalChannel, TransferMatrix};
use crate::{Error, Result};

/// Coefficients of the monic balancing quartic y^4 + b y^3 + c y^2 + d y + e.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticCoefficients {
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl QuarticCoefficients {
    fn eval(&self, y: f64) -> f64 {
        (((y + self.b) * y + self.c) * y + self.d) * y + self.e
    }

    fn slope(&self, y: f64) -> f64 {
        ((4.0 * y + 3.0 * self.b) * y + 2.0 * self.c) * y + self.d
    }
}

/// Quartic whose largest root balances the channel. With l = lambda^2 and
/// the shift t, the polynomial is the cleared-denominator form of
/// y - 1 = y sum_j t_j^2 / (l_j - y).
pub fn quartic_coefficients(ch: &DiagonalChannel) -> QuarticCoefficients {
    let l = [
        ch.lambda[0] * ch.lambda[0],
        ch.lambda[1] * ch.lambda[1],
        ch.lambda[2] * ch.lambda[2],
    ];
    let t = [
        ch.shift[0] * ch.shift[0],
        ch.shift[1] * ch.shift[1],
        ch.shift[2] * ch.shift[2],
    ];
    let pair = l[0] * l[1] + l[1] * l[2] + l[2] * l[0];
    QuarticCoefficients {
        b: t[0] + t[1] + t[2] - l[0] - l[1] - l[2] - 1.0,
        c: l[0] * (1.0 - t[1] - t[2]) + l[1] * (1.0 - t[0] - t[2]) + l[2] * (1.0 - t[0] - t[1])
            + pair,
        d: t[0] * l[1] * l[2] + l[0] * t[1] * l[2] + l[0] * l[1] * t[2] - l[0] * l[1] * l[2]
            - pair,
        e: l[0] * l[1] * l[2],
    }
}

// Largest real root of z^3 + a2 z^2 + a1 z + a0, trigonometric form when all
// three roots are real.
fn cubic_largest_root(a2: f64, a1: f64, a0: f64) -> f64 {
    let p = a1 - a2 * a2 / 3.0;
    let q = 2.0 * a2.powi(3) / 27.0 - a2 * a1 / 3.0 + a0;
    let shift = -a2 / 3.0;
    let half = -q / 2.0;
    let disc = half * half + (p / 3.0).powi(3);
    if disc > 0.0 {
        let s = disc.sqrt();
        shift + (half + s).cbrt() + (half - s).cbrt()
    } else {
        let rad = (-p / 3.0).max(0.0).sqrt();
        if rad == 0.0 {
            return shift;
        }
        let phi = (half / rad.powi(3)).clamp(-1.0, 1.0).acos();
        // k = 0 branch of cos((phi + 2 pi k)/3) is the largest
        shift + 2.0 * rad * (phi / 3.0).cos()
    }
}

/// All four roots in closed form via the resolvent cubic, one guarded Newton
/// polish each, then the largest one with imaginary part below 1e-9.
///
/// For a positive channel the returned root lies in (max lambda_j^2, 1]; a
/// root at or below max lambda_j^2 means the channel sits on the boundary
/// and is reported as `NoValidRoot`.
pub fn largest_real_root(q: &QuarticCoefficients, lambda: &[f64; 3]) -> Result<f64> {
    // depress with y = z - b/4
    let b = q.b;
    let p = q.c - 3.0 * b * b / 8.0;
    let qd = q.d - b * q.c / 2.0 + b.powi(3) / 8.0;
    let r = q.e - b * q.d / 4.0 + b * b * q.c / 16.0 - 3.0 * b.powi(4) / 256.0;
    let back = -b / 4.0;

    let m = cubic_largest_root(p, p * p / 4.0 - r, -qd * qd / 8.0);
    let mut cands: [C64; 4] = [C64::new(0.0, 0.0); 4];
    let s = if m > 0.0 { (2.0 * m).sqrt() } else { 0.0 };
    if s > 0.0 && (qd / (2.0 * s)).is_finite() {
        // split into two quadratics z^2 +- s z + (p/2 + m -+ qd/(2s))
        let w = qd / (2.0 * s);
        for (k, (lin, con)) in [(s, p / 2.0 + m - w), (-s, p / 2.0 + m + w)]
            .into_iter()
            .enumerate()
        {
            let disc = C64::new(lin * lin - 4.0 * con, 0.0).sqrt();
            cands[2 * k] = (disc - lin) * 0.5;
            cands[2 * k + 1] = (-disc - lin) * 0.5;
        }
    } else {
        // no square factor to split off, the odd coefficient is zero
        let disc = C64::new(p * p - 4.0 * r, 0.0).sqrt();
        for (k, sign) in [1.0, -1.0].into_iter().enumerate() {
            let z = ((disc * sign - p) * 0.5).sqrt();
            cands[2 * k] = z;
            cands[2 * k + 1] = -z;
        }
    }

    let mut best: Option<f64> = None;
    for z in cands {
        if z.im.abs() >= 1e-9 {
            continue;
        }
        let mut y = z.re + back;
        let step = q.eval(y) / q.slope(y);
        if step.is_finite() && step.abs() < 0.1 {
            y -= step;
        }
        best = Some(best.map_or(y, |bv: f64| bv.max(y)));
    }

    let lmax2 = lambda.iter().fold(0.0f64, |a, l| a.max(l * l));
    match best {
        Some(mut y) if y > lmax2 => {
            if y > 1.0 && y < 1.0 + 1e-9 {
                y = 1.0;
            }
            Ok(y)
        }
        _ => Err(Error::NoValidRoot),
    }
}

/// Balancing data at a quartic root y: the Bloch vector x of the output-side
/// fixed point S = I + x.sigma, its norm, and the weighted norm
/// xi = sqrt(sum_j lambda_j^2 x_j^2) that controls the input-side scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointData {
    pub y: f64,
    pub x: [f64; 3],
    pub x_norm: f64,
    pub xi: f64,
}

/// x_j = y t_j / (lambda_j^2 - y), with the 0/0 at a vanishing shift
/// component read as 0. A pole with a live shift component cannot be
/// balanced and raises `PoleHit` with the offending axis.
pub fn fixed_point_data(ch: &DiagonalChannel, y: f64) -> Result<FixedPointData> {
    let mut x = [0.0; 3];
    for j in 0..3 {
        let den = ch.lambda[j] * ch.lambda[j] - y;
        if den.abs() < 1e-14 {
            if ch.shift[j] != 0.0 {
                return Err(Error::PoleHit(j));
            }
        } else {
            x[j] = y * ch.shift[j] / den;
        }
    }
    let x_norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let xi = (0..3)
        .map(|j| (ch.lambda[j] * x[j]).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(FixedPointData { y, x, x_norm, xi })
}

/// Hermitian scaling pair for the balanced sandwich.
///
/// The output-side operator squares to S = I + x.sigma, the input-side one
/// to the inverse of the dual image of S. Both are returned exactly as the
/// closed forms produce them; nothing downstream depends on their overall
/// scale because the sandwich identities fix the normalization and state
/// constructions renormalize anyway.
pub fn scaling_operators(ch: &DiagonalChannel, f: &FixedPointData) -> Result<(Mat2, Mat2)> {
    let (x, y, xi) = (f.x_norm, f.y, f.xi);
    if x >= 1.0 - 1e-12 {
        return Err(Error::DegenerateScaling(format!(
            "fixed point touches the Bloch sphere, |x| = {x:.15}"
        )));
    }
    if xi >= y - 1e-12 {
        return Err(Error::DegenerateScaling(format!(
            "dual image of the fixed point is singular, xi = {xi:.15} at y = {y:.15}"
        )));
    }
    let a0 = ((1.0 + x).sqrt() + (1.0 - x).sqrt()) / 2.0;
    // (sqrt(1+x) - sqrt(1-x)) / (2x) -> 1/2 as x -> 0
    let a1 = if x < 1e-8 {
        0.5
    } else {
        ((1.0 + x).sqrt() - (1.0 - x).sqrt()) / (2.0 * x)
    };
    let a_tilde = Mat2::pauli_combo(a0, [a1 * f.x[0], a1 * f.x[1], a1 * f.x[2]]);

    let root = (y * y - xi * xi).sqrt();
    let b0 = ((y + xi).sqrt() + (y - xi).sqrt()) / (2.0 * root);
    // (sqrt(y+xi) - sqrt(y-xi)) / (2 xi sqrt(y^2-xi^2)) -> 1/(2 y sqrt(y))
    let b1 = if xi < 1e-8 {
        1.0 / (2.0 * y * y.sqrt())
    } else {
        ((y + xi).sqrt() - (y - xi).sqrt()) / (2.0 * xi * root)
    };
    let lx = [
        ch.lambda[0] * f.x[0],
        ch.lambda[1] * f.x[1],
        ch.lambda[2] * f.x[2],
    ];
    let b_tilde = Mat2::pauli_combo(b0, [-b1 * lx[0], -b1 * lx[1], -b1 * lx[2]]);
    Ok((a_tilde, b_tilde))
}

/// Bloch block of the balanced sandwich in closed form. The full transfer
/// matrix of the sandwich is this block bordered by (1, 0, 0, 0) on row and
/// column zero.
pub fn reduced_unital_matrix(ch: &DiagonalChannel, f: &FixedPointData) -> RMat3 {
    let l = ch.lambda;
    let (x, y, xi) = (f.x_norm, f.y, f.xi);
    let sx = (1.0 - x * x).sqrt();
    let sy = (y * y - xi * xi).sqrt();
    // both quotients have removable 0/0 limits
    let g1 = if x < 1e-8 { 0.5 } else { (1.0 - sx) / (x * x) };
    let g2 = if xi < 1e-8 {
        1.0 / (2.0 * y)
    } else {
        (y - sy) / (xi * xi)
    };
    let pref = (1.0 - x * x) / sy;
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        let coef = g1 / sy - g2 * l[i] * l[i] / (sx * y);
        for j in 0..3 {
            let mut v = coef * f.x[i] * l[j] * f.x[j];
            if i == j {
                v += l[i] / sx;
            }
            m[i][j] = pref * v;
        }
    }
    m
}

/// Proper-rotation singular factorization m = q_u diag(lambda) q_v with the
/// magnitudes descending and any net sign carried by lambda_3.
pub fn special_diagonalize(m: &RMat3) -> (RMat3, [f64; 3], RMat3) {
    svd_special(m)
}

/// Result of balancing a channel around a unital core with eigenvalues
/// `lambda_tilde`.
///
/// `a_op` and `b_op` are the Hermitian positive parts of the two scaling
/// operators; `q_u` and `q_v` collect every basis rotation picked up along
/// the way (the canonical frame of the input plus the diagonalization of
/// the balanced block). [`UnitalReduction::left_operator`] and
/// [`UnitalReduction::right_operator`] recombine them into the operators
/// that actually sandwich the channel.
#[derive(Debug, Clone)]
pub struct UnitalReduction {
    pub a_op: Mat2,
    pub b_op: Mat2,
    pub lambda_tilde: [f64; 3],
    pub q_u: RMat3,
    pub q_v: RMat3,
    /// Max-entry distance between the sandwiched transfer matrix and
    /// diag(1, lambda_tilde), as verified at construction.
    pub residual: f64,
}

impl UnitalReduction {
    /// Output-side sandwich operator: rotate by q_u, then apply `a_op`.
    pub fn left_operator(&self) -> Result<Mat2> {
        Ok(self.a_op.mul(&rotation_to_unitary(&self.q_u)?.adjoint()))
    }

    /// Input-side sandwich operator: apply `b_op`, then rotate by q_v.
    pub fn right_operator(&self) -> Result<Mat2> {
        Ok(rotation_to_unitary(&self.q_v)?.adjoint().mul(&self.b_op))
    }
}

// Transfer matrix of rho -> X rho X^dag; not trace preserving, so raw.
fn conjugation_ptm(xop: &Mat2) -> [[f64; 4]; 4] {
    let xd = xop.adjoint();
    let mut out = [[0.0; 4]; 4];
    for j in 0..4 {
        let sj = if j == 0 { Mat2::identity() } else { Mat2::sigma(j - 1) };
        let img = xop.mul(&sj).mul(&xd);
        for i in 0..4 {
            let si = if i == 0 { Mat2::identity() } else { Mat2::sigma(i - 1) };
            out[i][j] = 0.5 * si.mul(&img).trace().re;
        }
    }
    out
}

fn mat4_mul(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            for j in 0..4 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

// Independent check: build both sandwich operators, conjugate through the
// original channel, compare with diag(1, lambda_tilde).
fn reduction_residual(m: &TransferMatrix, red: &UnitalReduction) -> Result<f64> {
    let left = conjugation_ptm(&red.left_operator()?);
    let right = conjugation_ptm(&red.right_operator()?);
    let prod = mat4_mul(&mat4_mul(&left, m.entries()), &right);
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let want = if i != j {
                0.0
            } else if i == 0 {
                1.0
            } else {
                red.lambda_tilde[i - 1]
            };
            worst = worst.max((prod[i][j] - want).abs());
        }
    }
    Ok(worst)
}

// Strict interior test in the canonical frame: eigenvalue margin, shift
// ellipsoid margin, and a sphere sweep of image norms, each with slack
// above 1e-10. Returns the smallest slack for error payloads downstream.
fn interior_margin(dc: &DiagonalChannel) -> Result<f64> {
    let la = [dc.lambda[0].abs(), dc.lambda[1].abs(), dc.lambda[2].abs()];
    let lmax = la[0].max(la[1]).max(la[2]);
    let t = dc.shift;
    let mut worst = 0.0f64;
    for r in unit_grid() {
        let img = [
            dc.lambda[0] * r[0] + t[0],
            dc.lambda[1] * r[1] + t[1],
            dc.lambda[2] * r[2] + t[2],
        ];
        let n2 = img[0] * img[0] + img[1] * img[1] + img[2] * img[2];
        worst = worst.max(n2);
    }
    worst = worst.sqrt();
    if worst > 1.0 + 1e-9 || lmax > 1.0 + 1e-12 {
        return Err(Error::NotPositive(worst.max(lmax)));
    }
    let mut slack = 1.0 - lmax;
    if slack <= 1e-10 {
        return Err(Error::BoundaryChannel(slack));
    }
    let mut ell = 0.0;
    for j in 0..3 {
        let d = 1.0 - la[j];
        ell += t[j] * t[j] / (d * d);
    }
    slack = slack.min(1.0 - ell).min(1.0 - worst);
    if slack <= 1e-10 {
        return Err(Error::BoundaryChannel(slack));
    }
    Ok(slack)
}

/// Full balancing pipeline for an interior positive channel: canonical
/// frame, quartic root, fixed point, scaling pair, balanced block,
/// diagonalization, rotation bookkeeping, and an end-to-end verification
/// that the sandwiched transfer matrix is diag(1, lambda_tilde) to 1e-9.
///
/// Root or scaling degeneracies surface as `BoundaryChannel` carrying the
/// interior slack; a verification miss surfaces as `VerificationFailed`.
pub fn decompose(m: &TransferMatrix) -> Result<UnitalReduction> {
    let (dc, q_out, q_in) = canonical_form(m);
    let margin = interior_margin(&dc)?;
    let quartic = quartic_coefficients(&dc);
    let near = |_: Error| Error::BoundaryChannel(margin);
    let y = largest_real_root(&quartic, &dc.lambda).map_err(near)?;
    let fp = fixed_point_data(&dc, y).map_err(near)?;
    let (a_tilde, b_tilde) = scaling_operators(&dc, &fp).map_err(near)?;
    let core = reduced_unital_matrix(&dc, &fp);
    let (ru, lambda_tilde, rv) = special_diagonalize(&core);
    let uu = rotation_to_unitary(&ru)?;
    let uv = rotation_to_unitary(&rv)?;
    // keep the positive parts Hermitian by moving them through the
    // diagonalizing rotations
    let mut red = UnitalReduction {
        a_op: uu.adjoint().mul(&a_tilde).mul(&uu),
        b_op: uv.mul(&b_tilde).mul(&uv.adjoint()),
        lambda_tilde,
        q_u: rmat3_mul(&q_out, &ru),
        q_v: rmat3_mul(&rv, &q_in),
        residual: 0.0,
    };
    let res = reduction_residual(m, &red)?;
    if res > 1e-9 {
        return Err(Error::VerificationFailed(res));
    }
    red.residual = res;
    Ok(red)
}

/// Closed-form balancing for a purely axial shift (t_1 = t_2 = 0). The
/// balanced block is already diagonal, so no rotations appear and both
/// operators stay diagonal. Agrees with [`decompose`] wherever both apply.
pub fn decompose_axial(ch: &DiagonalChannel) -> Result<UnitalReduction> {
    if ch.shift[0].abs() > 1e-12 || ch.shift[1].abs() > 1e-12 {
        return Err(Error::OutOfRange(
            "axial balancing needs a shift along the third axis only".into(),
        ));
    }
    let l3 = ch.lambda[2];
    let t3 = ch.shift[2];
    let up = (1.0 + t3) * (1.0 + t3) - l3 * l3;
    let um = (1.0 - t3) * (1.0 - t3) - l3 * l3;
    if up <= 1e-12 || um <= 1e-12 {
        return Err(Error::BoundaryChannel(up.min(um)));
    }
    let vp = (1.0 + l3) * (1.0 + l3) - t3 * t3;
    let vm = (1.0 - l3) * (1.0 - l3) - t3 * t3;
    if vp <= 1e-12 || vm <= 1e-12 {
        return Err(Error::BoundaryChannel(vp.min(vm)));
    }

    let root = (up * um).sqrt();
    let x3 = -t3 * (1.0 - t3 * t3 + l3 * l3 + root) / (1.0 - t3 * t3 - l3 * l3 + root);
    if 1.0 - x3.abs() <= 1e-12 {
        return Err(Error::BoundaryChannel(1.0 - x3.abs()));
    }
    let y = 1.0 + t3 * x3;
    let xi = (l3 * x3).abs();
    if y - xi <= 1e-12 {
        return Err(Error::BoundaryChannel(y - xi));
    }
    let fp = FixedPointData { y, x: [0.0, 0.0, x3], x_norm: x3.abs(), xi };
    let (a_tilde, b_tilde) = scaling_operators(ch, &fp)?;

    let den = vp.sqrt() + vm.sqrt();
    let lambda_tilde = [
        2.0 * ch.lambda[0] / den,
        2.0 * ch.lambda[1] / den,
        4.0 * l3 / (den * den),
    ];
    let eye: RMat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut red = UnitalReduction {
        a_op: a_tilde,
        b_op: b_tilde,
        lambda_tilde,
        q_u: eye,
        q_v: eye,
        residual: 0.0,
    };
    red.residual = reduction_residual(&TransferMatrix::from_diagonal(ch), &red)?;
    Ok(red)
}

fn pauli_coeffs(m: &Mat2) -> [f64; 4] {
    let mut c = [0.0; 4];
    c[0] = 0.5 * m.trace().re;
    for j in 0..3 {
        c[j + 1] = 0.5 * Mat2::sigma(j).mul(m).trace().re;
    }
    c
}

fn apply4(a: &[[f64; 4]; 4], v: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (i, row) in a.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            out[i] += e * v[j];
        }
    }
    out
}

/// Balancing fixed point by plain iteration of
/// S -> (Phi[(Phi^dual[S])^-1])^-1 from S = I, trace renormalized to 2
/// each step. Converges for interior channels and matches the
/// quartic-derived S; kept as an oracle for the closed forms.
pub fn iterate_fixed_point(m: &TransferMatrix, tol: f64, max_iter: usize) -> Result<Mat2> {
    let forward = m.entries();
    let backward = dual(m);
    let mut current = Mat2::identity();
    for _ in 0..max_iter {
        let pulled = apply4(&backward, &pauli_coeffs(&current));
        let grown = Mat2::pauli_combo(pulled[0], [pulled[1], pulled[2], pulled[3]]).inverse()?;
        let pushed = apply4(forward, &pauli_coeffs(&grown));
        let flipped =
            Mat2::pauli_combo(pushed[0], [pushed[1], pushed[2], pushed[3]]).inverse()?;
        let next = flipped.scale(C64::new(2.0 / flipped.trace().re, 0.0));
        let mut diff = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                diff = diff.max((next.m[i][j] - current.m[i][j]).norm());
            }
        }
        current = next;
        if diff < tol {
            return Ok(current);
        }
    }
    Err(Error::NoConvergence(max_iter))
}
