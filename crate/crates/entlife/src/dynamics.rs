//! Time-parametrized noise families and entanglement lifetimes.
//!
//! Damping and depolarizing families are generated in transfer-matrix form,
//! reduced to a unital core at each instant, and run through the
//! annihilation criterion to locate the time past which no input state of a
//! two-qubit pair stays entangled.

use crate::algebra::{
    bell_one_excitation, hermitian_eigenvalues, min_pt_eigenvalue, negativity,
    partial_transpose_raw, Mat2, PureTwoQubit, C64,
};
use crate::channels::{
    apply_pair, canonical_form, choi_from_ptm, DiagonalChannel, TransferMatrix,
};
use crate::exec;
use crate::sinkhorn::{decompose, decompose_axial};
use crate::unital::{robust_preference_order, signed_permutation_max, witness_family};
use crate::{Error, Result};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// One-parameter family of local qubit noise maps.
#[derive(Debug, Clone)]
pub enum NoiseFamily {
    /// Generalized amplitude damping at rate `gamma` toward a bath with
    /// excited-state weight `w`.
    Gad { gamma: f64, w: f64 },
    /// Infinite-temperature amplitude damping, the balanced `w = 1/2` case.
    InfTempAd { gamma: f64 },
    /// Isotropic depolarizing with Bloch contraction `exp(-gamma t)`.
    Depolarizing { gamma: f64 },
    /// Piecewise-linear table of transfer matrices at increasing times.
    Tabulated { table: Vec<(f64, TransferMatrix)> },
}

fn positive_rate(gamma: f64) -> Result<f64> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(gamma)
    } else {
        Err(Error::OutOfRange(format!("rate gamma = {gamma} must be positive and finite")))
    }
}

impl NoiseFamily {
    pub fn gad(gamma: f64, w: f64) -> Result<Self> {
        positive_rate(gamma)?;
        if !(w > 0.0 && w < 1.0) {
            return Err(Error::OutOfRange(format!(
                "bath weight w = {w} must lie strictly between 0 and 1"
            )));
        }
        Ok(NoiseFamily::Gad { gamma, w })
    }

    pub fn inf_temp_ad(gamma: f64) -> Result<Self> {
        positive_rate(gamma)?;
        Ok(NoiseFamily::InfTempAd { gamma })
    }

    pub fn depolarizing(gamma: f64) -> Result<Self> {
        positive_rate(gamma)?;
        Ok(NoiseFamily::Depolarizing { gamma })
    }

    /// Times must be strictly increasing; queries interpolate entrywise.
    pub fn tabulated(table: Vec<(f64, TransferMatrix)>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::OutOfRange("table must contain at least one entry".into()));
        }
        for pair in table.windows(2) {
            if !(pair[1].0 > pair[0].0) {
                return Err(Error::OutOfRange(format!(
                    "table times must increase strictly, got {} then {}",
                    pair[0].0, pair[1].0
                )));
            }
        }
        Ok(NoiseFamily::Tabulated { table })
    }

    /// Transfer matrix of the family member at time `t >= 0`.
    pub fn transfer_at(&self, t: f64) -> Result<TransferMatrix> {
        if !(t >= 0.0) {
            return Err(Error::OutOfRange(format!("time t = {t} must be nonnegative")));
        }
        match self {
            NoiseFamily::Gad { gamma, w } => {
                let e1 = (-gamma * t).exp();
                let e2 = (-2.0 * gamma * t).exp();
                let shift = (2.0 * w - 1.0) * (1.0 - e2);
                Ok(TransferMatrix::from_diagonal(&DiagonalChannel::new(
                    [e1, e1, e2],
                    [0.0, 0.0, shift],
                )))
            }
            NoiseFamily::InfTempAd { gamma } => {
                let e1 = (-gamma * t).exp();
                let e2 = (-2.0 * gamma * t).exp();
                Ok(TransferMatrix::from_diagonal(&DiagonalChannel::new(
                    [e1, e1, e2],
                    [0.0, 0.0, 0.0],
                )))
            }
            NoiseFamily::Depolarizing { gamma } => {
                let e = (-gamma * t).exp();
                Ok(TransferMatrix::from_diagonal(&DiagonalChannel::new([e, e, e], [0.0; 3])))
            }
            NoiseFamily::Tabulated { table } => {
                let first = table[0].0;
                let last = table[table.len() - 1].0;
                if t < first - 1e-12 || t > last + 1e-12 {
                    return Err(Error::OutOfRange(format!(
                        "time t = {t} is outside the tabulated range [{first}, {last}]"
                    )));
                }
                let t = t.clamp(first, last);
                let k = table.partition_point(|row| row.0 <= t);
                if k == table.len() {
                    return Ok(table[k - 1].1.clone());
                }
                let (t0, m0) = (&table[k - 1].0, table[k - 1].1.entries());
                let (t1, m1) = (&table[k].0, table[k].1.entries());
                let s = (t - t0) / (t1 - t0);
                let mut m = [[0.0; 4]; 4];
                for i in 0..4 {
                    for j in 0..4 {
                        m[i][j] = m0[i][j] + s * (m1[i][j] - m0[i][j]);
                    }
                }
                TransferMatrix::new(m)
            }
        }
    }
}

fn gad_params(f: &NoiseFamily) -> Result<(f64, f64)> {
    match f {
        NoiseFamily::Gad { gamma, w } => Ok((*gamma, *w)),
        NoiseFamily::InfTempAd { gamma } => Ok((*gamma, 0.5)),
        _ => Err(Error::OutOfRange(
            "closed forms need an amplitude damping family".into(),
        )),
    }
}

/// Eigenvalues of the balanced core of the damping family at time `t`,
/// in closed form. The transverse pair coincide and the longitudinal value
/// is their square.
pub fn gad_reduced_lambda(f: &NoiseFamily, t: f64) -> Result<[f64; 3]> {
    let (gamma, w) = gad_params(f)?;
    if !(t >= 0.0) {
        return Err(Error::OutOfRange(format!("time t = {t} must be nonnegative")));
    }
    let u = 1.0 - (-2.0 * gamma * t).exp();
    let den = (w * (1.0 - w)).sqrt() * u + ((1.0 - w * u) * (1.0 - (1.0 - w) * u)).sqrt();
    let l1 = (-gamma * t).exp() / den;
    Ok([l1, l1, l1 * l1])
}

/// Input-side balancing factor of the damping family at time `t`, diagonal
/// positive, normalized so its largest entry is 1.
pub fn gad_scaling_b(f: &NoiseFamily, t: f64) -> Result<Mat2> {
    let (gamma, w) = gad_params(f)?;
    if !(t >= 0.0) {
        return Err(Error::OutOfRange(format!("time t = {t} must be nonnegative")));
    }
    let u = 1.0 - (-2.0 * gamma * t).exp();
    let q0 = (w * (1.0 - w * u)).powf(0.25);
    let q1 = ((1.0 - w) * (1.0 - (1.0 - w) * u)).powf(0.25);
    let top = q0.max(q1);
    let mut b = Mat2::zero();
    b.m[0][0] = C64::new(q0 / top, 0.0);
    b.m[1][1] = C64::new(q1 / top, 0.0);
    Ok(b)
}

/// Time past which the symmetric damping pair annihilates every input
/// state, in closed form.
pub fn gad_tau_tilde(f: &NoiseFamily) -> Result<f64> {
    let (gamma, w) = gad_params(f)?;
    let a = 4.0 * (SQRT2 + 1.0) * w * (1.0 - w);
    Ok((a / (1.0 + a - (1.0 + 2.0 * a).sqrt())).ln() / (2.0 * gamma))
}

/// Lifetime of a maximally entangled state under the symmetric damping
/// pair, in closed form.
pub fn gad_tau_bell(f: &NoiseFamily) -> Result<f64> {
    let (gamma, w) = gad_params(f)?;
    let s = (2.0 * w * (1.0 - w)).sqrt();
    Ok(((1.0 + s) / s).ln() / (2.0 * gamma))
}

/// Annihilation time of the symmetric damping pair, found by inverting the
/// criterion threshold on the damping parameter `u = 1 - exp(-2 gamma t)`.
/// Agrees with `gad_tau_tilde` up to roundoff; the two routes differ
/// algebraically.
pub fn gad_ea_time(f: &NoiseFamily) -> Result<f64> {
    let (gamma, w) = gad_params(f)?;
    let a = 4.0 * (SQRT2 + 1.0) * w * (1.0 - w);
    let u_star = ((1.0 + 2.0 * a).sqrt() - 1.0) / a;
    if u_star >= 1.0 {
        return Err(Error::NoThreshold(f64::INFINITY));
    }
    Ok(-(1.0 - u_star).ln() / (2.0 * gamma))
}

/// The state no other input outlives under the symmetric damping pair:
/// the balancing lift of the maximally entangled seed, evaluated at the
/// annihilation time. At `w = 1/2` the pair is unital and the selection
/// falls back to the one-excitation state.
pub fn gad_robust_state(f: &NoiseFamily) -> Result<PureTwoQubit> {
    let (gamma, w) = gad_params(f)?;
    if (2.0 * w - 1.0).abs() < 1e-12 {
        return Ok(bell_one_excitation());
    }
    let tau = gad_tau_tilde(f)?;
    let u = 1.0 - (-2.0 * gamma * tau).exp();
    let p0 = (1.0 - w) * (1.0 - (1.0 - w) * u);
    let p1 = w * (1.0 - w * u);
    let z = C64::new(0.0, 0.0);
    PureTwoQubit::normalized([C64::new(p1.sqrt(), 0.0), z, z, C64::new(p0.sqrt(), 0.0)])
}

/// How a lifetime figure was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LifetimeMethod {
    ClosedForm,
    Numeric,
}

/// A lifetime together with the state it belongs to.
#[derive(Debug, Clone)]
pub struct LifetimeReport {
    pub tau: f64,
    pub method: LifetimeMethod,
    pub state_used: PureTwoQubit,
}

const SCAN_STEPS: usize = 1000;
const ZERO_NEG: f64 = 1e-12;

/// Last time the negativity of the evolved pair state drops to zero,
/// scanned on 1000 uniform steps over [0, horizon] and bisected to 1e-10.
/// Negativity below 1e-12 counts as zero. `StillEntangled` when the state
/// has not died by the horizon.
pub fn lifetime_of_state(
    left: &NoiseFamily,
    right: &NoiseFamily,
    psi: &PureTwoQubit,
    horizon: f64,
) -> Result<LifetimeReport> {
    if !(horizon > 0.0) {
        return Err(Error::OutOfRange(format!("horizon {horizon} must be positive")));
    }
    let proj = psi.projector();
    let neg_at = |t: f64| -> Result<f64> {
        let ml = left.transfer_at(t)?;
        let mr = right.transfer_at(t)?;
        Ok(negativity(&apply_pair(&ml, &mr, &proj)?))
    };
    let grid: Vec<f64> = exec::map_range(SCAN_STEPS + 1, |k| {
        neg_at(horizon * k as f64 / SCAN_STEPS as f64)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    if grid[SCAN_STEPS] > ZERO_NEG {
        return Err(Error::StillEntangled(horizon));
    }
    let mut bracket = None;
    for k in 1..=SCAN_STEPS {
        if grid[k - 1] > ZERO_NEG && grid[k] <= ZERO_NEG {
            let h = horizon / SCAN_STEPS as f64;
            bracket = Some(((k - 1) as f64 * h, k as f64 * h));
        }
    }
    let tau = match bracket {
        None => 0.0,
        Some((mut a, mut b)) => {
            while b - a > 1e-10 {
                let mid = 0.5 * (a + b);
                if neg_at(mid)? > ZERO_NEG {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            0.5 * (a + b)
        }
    };
    Ok(LifetimeReport { tau, method: LifetimeMethod::Numeric, state_used: psi.clone() })
}

fn axial_form(m: &TransferMatrix) -> Option<DiagonalChannel> {
    let e = m.entries();
    let mut off = 0.0f64;
    for i in 1..4 {
        for j in 1..4 {
            if i != j {
                off = off.max(e[i][j].abs());
            }
        }
    }
    if off > 1e-13 || e[1][0].abs() > 1e-13 || e[2][0].abs() > 1e-13 {
        return None;
    }
    Some(DiagonalChannel::new([e[1][1], e[2][2], e[3][3]], [0.0, 0.0, e[3][0]]))
}

/// Balanced-core eigenvalues and the input-side factor of one map. Unital
/// maps pass through untouched; diagonal maps with a longitudinal shift
/// take the closed-form route, everything else the full pipeline.
pub fn reduce_to_unital(m: &TransferMatrix) -> Result<([f64; 3], Mat2)> {
    if m.is_unital(1e-12) {
        let (dc, _, _) = canonical_form(m);
        return Ok((dc.lambda, Mat2::identity()));
    }
    if let Some(dc) = axial_form(m) {
        let red = decompose_axial(&dc)?;
        return Ok((red.lambda_tilde, red.b_op));
    }
    let red = decompose(m)?;
    let b = red.right_operator()?;
    Ok((red.lambda_tilde, b))
}

/// Threshold data for a noise pair: annihilation time, the input-side
/// balancing factors at that time, and the family seed whose lift stays
/// entangled longest.
#[derive(Debug, Clone)]
pub struct RobustPlan {
    pub tau: f64,
    pub psi_seed: PureTwoQubit,
    pub left_factor: Mat2,
    pub right_factor: Mat2,
}

impl RobustPlan {
    /// Interpolating family member for a death budget `t0` in [0, tau]:
    /// the seed lifted by the balancing factors raised to the power
    /// `t0 / tau`. At 0 this is the seed itself, at `tau` the fully
    /// lifted robust state.
    pub fn state_at(&self, t0: f64) -> Result<PureTwoQubit> {
        if !(t0 >= 0.0 && t0 <= self.tau + 1e-9) {
            return Err(Error::OutOfRange(format!(
                "interpolation time t0 = {t0} must lie in [0, {:.12}]",
                self.tau
            )));
        }
        let p = (t0 / self.tau).min(1.0);
        let bl = self.left_factor.powf_posdef(p)?;
        let br = self.right_factor.powf_posdef(p)?;
        self.psi_seed.apply_local(&bl, &br)
    }
}

/// Locates the annihilation threshold of a noise pair and assembles the
/// robust-state construction there.
///
/// Each scan instant reduces both maps to their unital cores and applies
/// the signed-permutation criterion; the last crossing is bisected to
/// 1e-10. The seed is chosen among the witness family by lifting each
/// member with the balancing factors at the threshold and keeping the one
/// with the deepest partial-transpose deficit shortly before death
/// (evaluation at 0.98 tau; ties resolve toward the one-excitation state).
pub fn robust_plan(
    left: &NoiseFamily,
    right: &NoiseFamily,
    horizon: f64,
) -> Result<RobustPlan> {
    if !(horizon > 0.0) {
        return Err(Error::OutOfRange(format!("horizon {horizon} must be positive")));
    }
    let g_at = |t: f64| -> Result<f64> {
        let (ll, _) = reduce_to_unital(&left.transfer_at(t)?)?;
        let (lr, _) = reduce_to_unital(&right.transfer_at(t)?)?;
        Ok(signed_permutation_max(&ll, &lr).max_value - 1.0)
    };
    let grid: Vec<f64> = exec::map_range(SCAN_STEPS + 1, |k| {
        g_at(horizon * k as f64 / SCAN_STEPS as f64)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    if grid[0] <= 0.0 {
        return Err(Error::AlreadyAnnihilating(grid[0] + 1.0));
    }
    if grid[SCAN_STEPS] > 0.0 {
        return Err(Error::NoThreshold(horizon));
    }
    let mut bracket = None;
    for k in 1..=SCAN_STEPS {
        if grid[k - 1] > 0.0 && grid[k] <= 0.0 {
            let h = horizon / SCAN_STEPS as f64;
            bracket = Some(((k - 1) as f64 * h, k as f64 * h));
        }
    }
    let (mut a, mut b) = bracket.expect("sign change exists when g(horizon) <= 0");
    while b - a > 1e-10 {
        let mid = 0.5 * (a + b);
        if g_at(mid)? > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let tau = 0.5 * (a + b);

    let (_, bl) = reduce_to_unital(&left.transfer_at(tau)?)?;
    let (_, br) = reduce_to_unital(&right.transfer_at(tau)?)?;
    let t_star = 0.98 * tau;
    let ml = left.transfer_at(t_star)?;
    let mr = right.transfer_at(t_star)?;
    let fam = witness_family();
    let scores: Vec<f64> = exec::map_collect(fam.as_slice(), |st| -> Result<f64> {
        let lifted = st.apply_local(&bl, &br)?;
        let out = apply_pair(&ml, &mr, &lifted.projector())?;
        Ok(min_pt_eigenvalue(&out))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let mut best: Option<(f64, usize)> = None;
    for i in robust_preference_order() {
        let s = scores[i];
        if best.map_or(true, |(v, _)| s < v - 1e-12) {
            best = Some((s, i));
        }
    }
    let seed = fam[best.expect("family is nonempty").1];
    Ok(RobustPlan { tau, psi_seed: seed, left_factor: bl, right_factor: br })
}

/// Annihilation lifetime of a noise pair with the robust state that
/// realizes it.
pub fn pair_ea_lifetime(
    left: &NoiseFamily,
    right: &NoiseFamily,
    horizon: f64,
) -> Result<LifetimeReport> {
    let plan = robust_plan(left, right, horizon)?;
    let state = plan.state_at(plan.tau)?;
    Ok(LifetimeReport { tau: plan.tau, method: LifetimeMethod::Numeric, state_used: state })
}

/// Interpolating family member with death budget `t0` for a noise pair.
pub fn interpolated_state(
    left: &NoiseFamily,
    right: &NoiseFamily,
    t0: f64,
    horizon: f64,
) -> Result<PureTwoQubit> {
    robust_plan(left, right, horizon)?.state_at(t0)
}

/// First time the family member becomes entanglement breaking, if any
/// before the horizon. Checked through the partial transpose of the Choi
/// matrix, scanned and bisected to 1e-10.
pub fn eb_time(f: &NoiseFamily, horizon: f64) -> Result<Option<f64>> {
    if !(horizon > 0.0) {
        return Err(Error::OutOfRange(format!("horizon {horizon} must be positive")));
    }
    let breaking = |t: f64| -> Result<bool> {
        let choi = choi_from_ptm(&f.transfer_at(t)?);
        let w = hermitian_eigenvalues(&partial_transpose_raw(&choi))?;
        Ok(w[0] >= -1e-12)
    };
    let flags: Vec<bool> = exec::map_range(SCAN_STEPS + 1, |k| {
        breaking(horizon * k as f64 / SCAN_STEPS as f64)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let first = match flags.iter().position(|&b| b) {
        None => return Ok(None),
        Some(0) => return Ok(Some(0.0)),
        Some(k) => k,
    };
    let h = horizon / SCAN_STEPS as f64;
    let (mut a, mut b) = ((first - 1) as f64 * h, first as f64 * h);
    while b - a > 1e-10 {
        let mid = 0.5 * (a + b);
        if breaking(mid)? {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(Some(0.5 * (a + b)))
}
