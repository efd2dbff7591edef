//! Command implementations behind the `entlife` binary.
//!
//! Every command is a function from parsed inputs to the full output text,
//! so the binary shell stays thin and the tests can call commands directly.
//! Results go to stdout (or `--out`), diagnostics to stderr, and the exit
//! code separates domain failures (1) from usage mistakes (2).

use entlife::algebra::{bell_phi_plus, negativity, Mat2, PureTwoQubit, C64};
use entlife::channels::{apply_pair, parse_channel_json, DiagonalChannel, TransferMatrix};
use entlife::dynamics::{
    eb_time, lifetime_of_state, pair_ea_lifetime, reduce_to_unital, robust_plan, NoiseFamily,
};
use entlife::oracle::{ea_sampled_verdict, SampleBudget, SampledVerdict};
use entlife::sinkhorn::decompose;
use entlife::unital::is_ea_pair;
use entlife::Error;

/// What went wrong, split by who gets the blame in the exit code.
#[derive(Debug)]
pub enum RunError {
    /// Bad flags or malformed selector strings; exit code 2.
    Usage(String),
    /// The computation itself refused; exit code 1.
    Domain(Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Domain(e)
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Usage(m) => write!(f, "{m}"),
            RunError::Domain(e) => write!(f, "{e}"),
        }
    }
}

pub type RunResult<T> = std::result::Result<T, RunError>;

/// Fallback horizon when neither the user nor the channels bound the search.
const HORIZON_CAP: f64 = 50.0;

/// Formats with 12 significant digits, fixed point for moderate magnitudes
/// and scientific otherwise, trailing zeros trimmed. Deterministic, so
/// repeated runs produce byte-identical files.
pub fn fmt_sig12(x: f64) -> String {
    if x == 0.0 || x.abs() < 1e-300 {
        return "0".to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..12).contains(&exp) {
        let s = format!("{:.11e}", x);
        let (mant, e) = s.split_once('e').expect("exponent format");
        let mant = mant.trim_end_matches('0').trim_end_matches('.');
        return format!("{mant}e{e}");
    }
    let decimals = (11 - exp).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn complex_json(c: C64) -> String {
    format!("[{},{}]", fmt_sig12(c.re), fmt_sig12(c.im))
}

/// Row-major 2x2 complex matrix as [[re,im],[re,im],[re,im],[re,im]].
fn mat2_json(m: &Mat2) -> String {
    let e = &m.m;
    format!(
        "[{},{},{},{}]",
        complex_json(e[0][0]),
        complex_json(e[0][1]),
        complex_json(e[1][0]),
        complex_json(e[1][1])
    )
}

fn amplitudes_json(psi: &PureTwoQubit) -> String {
    let a = psi.amplitudes();
    format!(
        "[{},{},{},{}]",
        complex_json(a[0]),
        complex_json(a[1]),
        complex_json(a[2]),
        complex_json(a[3])
    )
}

fn vec3_json(v: &[f64; 3]) -> String {
    format!(
        "[{},{},{}]",
        fmt_sig12(v[0]),
        fmt_sig12(v[1]),
        fmt_sig12(v[2])
    )
}

/// Builds one noise family from flag values. Unknown names and a missing
/// excitation weight are usage errors; out-of-range numbers are left to
/// the library so they surface as domain errors.
pub fn build_family(kind: &str, gamma: f64, w: Option<f64>) -> RunResult<NoiseFamily> {
    match kind {
        "gad" => {
            let w = w.ok_or_else(|| {
                RunError::Usage("--family gad needs --w (excited-state weight)".to_string())
            })?;
            Ok(NoiseFamily::gad(gamma, w)?)
        }
        "inftemp-ad" => Ok(NoiseFamily::inf_temp_ad(gamma)?),
        "depolarizing" => Ok(NoiseFamily::depolarizing(gamma)?),
        other => Err(RunError::Usage(format!(
            "unknown family '{other}', expected gad, inftemp-ad or depolarizing"
        ))),
    }
}

/// Flag bundle for the two local noise families. The second side defaults
/// to a copy of the first, field by field.
pub struct PairSpec<'a> {
    pub family: &'a str,
    pub gamma: f64,
    pub w: Option<f64>,
    pub family2: Option<&'a str>,
    pub gamma2: Option<f64>,
    pub w2: Option<f64>,
}

pub fn build_pair(spec: &PairSpec) -> RunResult<(NoiseFamily, NoiseFamily)> {
    let left = build_family(spec.family, spec.gamma, spec.w)?;
    let right = build_family(
        spec.family2.unwrap_or(spec.family),
        spec.gamma2.unwrap_or(spec.gamma),
        spec.w2.or(spec.w),
    )?;
    Ok((left, right))
}

/// Search horizon for threshold scans: the user's --tmax if given, capped
/// by the time both channels are entanglement breaking (plus a 1% margin
/// so the scan sees a clean zero). Past that point nothing survives, so
/// longer scans only waste grid points.
fn default_horizon(
    left: &NoiseFamily,
    right: &NoiseFamily,
    user: Option<f64>,
) -> RunResult<f64> {
    let cap = user.unwrap_or(HORIZON_CAP).min(HORIZON_CAP);
    if cap <= 0.0 {
        return Err(RunError::Usage("--tmax must be positive".to_string()));
    }
    let el = eb_time(left, HORIZON_CAP)?;
    let er = eb_time(right, HORIZON_CAP)?;
    let both = match (el, er) {
        (Some(a), Some(b)) => 1.01 * a.max(b),
        _ => HORIZON_CAP,
    };
    Ok(cap.min(both).max(1e-6))
}

/// `decompose`: one channel in, its scaled unital form out as JSON with
/// the two sandwich operators, the balanced eigenvalues and the verified
/// residual.
pub fn decompose_report(channel_text: &str) -> RunResult<String> {
    let m = parse_channel_json(channel_text)?;
    let red = decompose(&m)?;
    let a = red.left_operator()?;
    let b = red.right_operator()?;
    Ok(format!(
        "{{\"A\":{},\"B\":{},\"lambda_tilde\":{},\"residual\":{}}}\n",
        mat2_json(&a),
        mat2_json(&b),
        vec3_json(&red.lambda_tilde),
        fmt_sig12(red.residual)
    ))
}

/// `ea-check`: reduces both channels to their balanced unital cores, runs
/// the signed-permutation criterion there, then cross-checks the verdict
/// on the original pair with a deterministic sample of pure states.
pub fn ea_check_report(
    left_text: &str,
    right_text: &str,
    samples: usize,
    seed: u64,
) -> RunResult<String> {
    let ml = parse_channel_json(left_text)?;
    let mr = parse_channel_json(right_text)?;
    let (ll, _) = reduce_to_unital(&ml)?;
    let (lr, _) = reduce_to_unital(&mr)?;
    let verdict = is_ea_pair(&DiagonalChannel::unital(ll), &DiagonalChannel::unital(lr))?;
    let sampled = ea_sampled_verdict(&ml, &mr, SampleBudget { n: samples, seed })?;
    let sampled_json = match &sampled {
        SampledVerdict::EaConsistent => {
            "{\"verdict\":\"ea-consistent\"}".to_string()
        }
        SampledVerdict::NotEa {
            index,
            min_pt,
            witness,
        } => format!(
            "{{\"verdict\":\"not-ea\",\"index\":{},\"min_pt\":{},\"witness\":{}}}",
            index,
            fmt_sig12(*min_pt),
            amplitudes_json(witness)
        ),
    };
    if let (true, SampledVerdict::NotEa { min_pt, .. }) = (verdict.annihilating, &sampled) {
        return Err(RunError::Domain(Error::VerificationFailed(*min_pt)));
    }
    let perm = verdict.argmax.perm;
    let signs = verdict.argmax.signs;
    Ok(format!(
        "{{\"annihilating\":{},\"max_value\":{},\"argmax_perm\":[{},{},{}],\"argmax_signs\":[{},{},{}],\"lambda_left\":{},\"lambda_right\":{},\"sampled\":{}}}\n",
        verdict.annihilating,
        fmt_sig12(verdict.max_value),
        perm[0],
        perm[1],
        perm[2],
        signs[0],
        signs[1],
        signs[2],
        vec3_json(&ll),
        vec3_json(&lr),
        sampled_json
    ))
}

/// Which initial state a lifetime query refers to.
pub enum StateChoice {
    Bell,
    Robust,
    Interp(f64),
    Explicit(PureTwoQubit),
}

/// Parses the --state selector. `file:` selectors need the already-read
/// file contents; `interp` needs --t0.
pub fn parse_state_choice(
    selector: &str,
    t0: Option<f64>,
    file_text: Option<&str>,
) -> RunResult<StateChoice> {
    match selector {
        "bell" => Ok(StateChoice::Bell),
        "robust" => Ok(StateChoice::Robust),
        "interp" => {
            let t0 = t0.ok_or_else(|| {
                RunError::Usage("--state interp needs --t0".to_string())
            })?;
            Ok(StateChoice::Interp(t0))
        }
        s if s.starts_with("file:") => {
            let text = file_text.ok_or_else(|| {
                RunError::Usage("state file was not read".to_string())
            })?;
            Ok(StateChoice::Explicit(parse_state_json(text)?))
        }
        other => Err(RunError::Usage(format!(
            "unknown state selector '{other}', expected bell, robust, interp or file:PATH"
        ))),
    }
}

/// State files carry four complex amplitudes: {"amplitudes":[[re,im],..]}.
/// The vector is normalized on load.
pub fn parse_state_json(text: &str) -> RunResult<PureTwoQubit> {
    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Raw {
        amplitudes: [[f64; 2]; 4],
    }
    let raw: Raw = serde_json::from_str(text)
        .map_err(|e| RunError::Domain(Error::Parse(format!("state json: {e}"))))?;
    let amp = [
        C64::new(raw.amplitudes[0][0], raw.amplitudes[0][1]),
        C64::new(raw.amplitudes[1][0], raw.amplitudes[1][1]),
        C64::new(raw.amplitudes[2][0], raw.amplitudes[2][1]),
        C64::new(raw.amplitudes[3][0], raw.amplitudes[3][1]),
    ];
    Ok(PureTwoQubit::normalized(amp)?)
}

/// `lifetime`: when the state outlives its entanglement under the pair of
/// families. Robust and interpolated states are built from the pair's own
/// annihilation threshold first.
pub fn lifetime_report(
    left: &NoiseFamily,
    right: &NoiseFamily,
    choice: &StateChoice,
    tmax: Option<f64>,
) -> RunResult<String> {
    let horizon = default_horizon(left, right, tmax)?;
    let psi = match choice {
        StateChoice::Bell => bell_phi_plus(),
        StateChoice::Robust => {
            let plan = robust_plan(left, right, horizon)?;
            plan.state_at(plan.tau)?
        }
        StateChoice::Interp(t0) => {
            let plan = robust_plan(left, right, horizon)?;
            plan.state_at(*t0)?
        }
        StateChoice::Explicit(s) => *s,
    };
    let report = lifetime_of_state(left, right, &psi, horizon)?;
    Ok(format!(
        "{{\"tau\":{},\"method\":\"numeric\",\"state\":{}}}\n",
        fmt_sig12(report.tau),
        amplitudes_json(&report.state_used)
    ))
}

/// `robust-state`: the pair's annihilation threshold, the state that
/// survives longest, and its starting negativity.
pub fn robust_state_report(
    left: &NoiseFamily,
    right: &NoiseFamily,
    tmax: Option<f64>,
) -> RunResult<String> {
    let horizon = default_horizon(left, right, tmax)?;
    let plan = robust_plan(left, right, horizon)?;
    let psi = plan.state_at(plan.tau)?;
    let neg = negativity(&psi.projector());
    Ok(format!(
        "{{\"tau\":{},\"amplitudes\":{},\"negativity\":{}}}\n",
        fmt_sig12(plan.tau),
        amplitudes_json(&psi),
        fmt_sig12(neg)
    ))
}

/// Negativity cleaned for tabulation: values inside the zero detection
/// band print as an exact 0.
fn table_negativity(
    ml: &TransferMatrix,
    mr: &TransferMatrix,
    psi: &PureTwoQubit,
) -> RunResult<f64> {
    let rho = apply_pair(ml, mr, &psi.projector())?;
    let v = negativity(&rho);
    Ok(if v < 1e-12 { 0.0 } else { v })
}

/// `trace`: CSV of negativity against time for the requested columns.
/// Selectors are joined with '+', e.g. bell+robust+interp-envelope.
/// The envelope column re-interpolates at every row, clamping t0 to the
/// pair threshold so rows past it fall back to the robust state.
pub fn trace_csv(
    left: &NoiseFamily,
    right: &NoiseFamily,
    selectors: &str,
    tmax: f64,
    steps: usize,
) -> RunResult<String> {
    if steps < 2 {
        return Err(RunError::Usage("--steps must be at least 2".to_string()));
    }
    if !(tmax > 0.0) {
        return Err(RunError::Usage("--tmax must be positive".to_string()));
    }
    let names: Vec<&str> = selectors.split('+').collect();
    if names.is_empty() || names.iter().any(|n| n.is_empty()) {
        return Err(RunError::Usage(
            "--state wants a '+'-joined list of columns".to_string(),
        ));
    }
    let needs_plan = names
        .iter()
        .any(|n| matches!(*n, "robust" | "interp-envelope"));
    let plan = if needs_plan {
        let horizon = default_horizon(left, right, None)?;
        Some(robust_plan(left, right, horizon)?)
    } else {
        None
    };
    enum Column {
        Fixed(PureTwoQubit),
        Envelope,
    }
    let mut cols = Vec::with_capacity(names.len());
    for name in &names {
        match *name {
            "bell" => cols.push(Column::Fixed(bell_phi_plus())),
            "robust" => {
                let p = plan.as_ref().expect("plan built above");
                cols.push(Column::Fixed(p.state_at(p.tau)?));
            }
            "interp-envelope" => cols.push(Column::Envelope),
            other => {
                return Err(RunError::Usage(format!(
                    "unknown trace column '{other}', expected bell, robust or interp-envelope"
                )))
            }
        }
    }
    let mut out = String::with_capacity(steps * 16 * (names.len() + 1));
    out.push('t');
    for name in &names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for k in 0..steps {
        let t = tmax * k as f64 / (steps - 1) as f64;
        let ml = left.transfer_at(t)?;
        let mr = right.transfer_at(t)?;
        out.push_str(&fmt_sig12(t));
        for col in &cols {
            let v = match col {
                Column::Fixed(psi) => table_negativity(&ml, &mr, psi)?,
                Column::Envelope => {
                    let p = plan.as_ref().expect("plan built above");
                    let psi = p.state_at(t.min(p.tau))?;
                    table_negativity(&ml, &mr, &psi)?
                }
            };
            out.push(',');
            out.push_str(&fmt_sig12(v));
        }
        out.push('\n');
    }
    Ok(out)
}

/// `examples`: four worked pairs, closed forms against the numeric
/// pipeline, one block each. Lines carry 12 significant digits so
/// agreement is visible directly.
pub fn examples_report() -> RunResult<String> {
    let mut out = String::new();
    let s2: f64 = 2.0f64.sqrt();

    // Balanced damping on both sides, three rate splits.
    out.push_str("balanced amplitude damping pair: tau = ln(1+sqrt(2))/(g+g')\n");
    for (g, gp) in [(1.0, 1.0), (0.3, 1.7), (2.0, 0.5)] {
        let closed = (1.0 + s2).ln() / (g + gp);
        let left = NoiseFamily::inf_temp_ad(g)?;
        let right = NoiseFamily::inf_temp_ad(gp)?;
        let report = pair_ea_lifetime(&left, &right, 3.0 * closed)?;
        out.push_str(&format!(
            "  g={g} g'={gp}: closed {} numeric {} gap {}\n",
            fmt_sig12(closed),
            fmt_sig12(report.tau),
            fmt_sig12((report.tau - closed).abs())
        ));
    }

    // Damping against depolarizing noise; the root of (1+e^-t)^2 = 1+e^t
    // and the small-log estimate 3 ln 3 / 7 both sit next to the scan.
    {
        let left = NoiseFamily::inf_temp_ad(1.0)?;
        let right = NoiseFamily::depolarizing(1.0)?;
        let report = pair_ea_lifetime(&left, &right, 2.0)?;
        let golden = -(((5.0f64).sqrt() - 1.0) / 2.0).ln();
        let estimate = 3.0 * (3.0f64).ln() / 7.0;
        out.push_str(&format!(
            "damping + depolarizing: root {} numeric {} estimate 3ln3/7 = {}\n",
            fmt_sig12(golden),
            fmt_sig12(report.tau),
            fmt_sig12(estimate)
        ));
    }

    // Biased damping at w = 0.01: both closed thresholds against scans.
    {
        let fam = NoiseFamily::gad(1.0, 0.01)?;
        let tilde = entlife::dynamics::gad_tau_tilde(&fam)?;
        let bell = entlife::dynamics::gad_tau_bell(&fam)?;
        let pair = pair_ea_lifetime(&fam, &fam, 3.0)?;
        let bell_num = lifetime_of_state(&fam, &fam, &bell_phi_plus(), 3.0)?;
        out.push_str(&format!(
            "biased damping w=0.01: robust closed {} numeric {} bell closed {} numeric {}\n",
            fmt_sig12(tilde),
            fmt_sig12(pair.tau),
            fmt_sig12(bell),
            fmt_sig12(bell_num.tau)
        ));
    }

    // Biased damping with depolarizing on the other side; the closed side
    // solves the annihilation condition on the reduced eigenvalues.
    {
        let fam = NoiseFamily::gad(1.0, 0.25)?;
        let dep = NoiseFamily::depolarizing(1.0)?;
        let pair = pair_ea_lifetime(&fam, &dep, 2.0)?;
        let crossing = |t: f64| -> RunResult<f64> {
            let l = entlife::dynamics::gad_reduced_lambda(&fam, t)?;
            let e = (-t).exp();
            Ok((2.0 * l[0] + l[2]) * e - 1.0)
        };
        let (mut lo, mut hi) = (0.3, 1.5);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if crossing(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        out.push_str(&format!(
            "biased damping w=0.25 + depolarizing: root {} numeric {} gap {}\n",
            fmt_sig12(root),
            fmt_sig12(pair.tau),
            fmt_sig12((pair.tau - root).abs())
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digit_formatting() {
        assert_eq!(fmt_sig12(0.0), "0");
        assert_eq!(fmt_sig12(-0.0), "0");
        assert_eq!(fmt_sig12(0.5), "0.5");
        assert_eq!(fmt_sig12(1.0), "1");
        assert_eq!(fmt_sig12(-2.25), "-2.25");
        assert_eq!(fmt_sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig12(1046.344856983), "1046.34485698");
        assert_eq!(fmt_sig12(1.23456789012e-17), "1.23456789012e-17");
        assert_eq!(fmt_sig12(0.000123456789012345), "0.000123456789012");
        assert_eq!(fmt_sig12(1e12), "1e12");
        assert_eq!(fmt_sig12(0.99999999999951), "1");
    }

    #[test]
    fn family_construction_and_defaults() {
        assert!(build_family("gad", 1.0, Some(0.3)).is_ok());
        assert!(matches!(
            build_family("gad", 1.0, None),
            Err(RunError::Usage(_))
        ));
        assert!(matches!(
            build_family("squeezed", 1.0, None),
            Err(RunError::Usage(_))
        ));
        assert!(matches!(
            build_family("gad", -1.0, Some(0.3)),
            Err(RunError::Domain(_))
        ));
        let (l, r) = build_pair(&PairSpec {
            family: "gad",
            gamma: 1.0,
            w: Some(0.2),
            family2: None,
            gamma2: None,
            w2: None,
        })
        .unwrap();
        assert_eq!(l.transfer_at(0.7).unwrap(), r.transfer_at(0.7).unwrap());
        let (_, r) = build_pair(&PairSpec {
            family: "gad",
            gamma: 1.0,
            w: Some(0.2),
            family2: Some("depolarizing"),
            gamma2: Some(0.5),
            w2: None,
        })
        .unwrap();
        assert!(r.transfer_at(0.7).unwrap().is_unital(1e-12));
    }

    #[test]
    fn state_selector_parsing() {
        assert!(matches!(
            parse_state_choice("bell", None, None),
            Ok(StateChoice::Bell)
        ));
        assert!(matches!(
            parse_state_choice("interp", Some(0.4), None),
            Ok(StateChoice::Interp(_))
        ));
        assert!(matches!(
            parse_state_choice("interp", None, None),
            Err(RunError::Usage(_))
        ));
        let text = "{\"amplitudes\":[[1,0],[0,0],[0,0],[1,0]]}";
        match parse_state_choice("file:whatever.json", None, Some(text)) {
            Ok(StateChoice::Explicit(s)) => {
                assert!((s.amplitudes()[0].re - 1.0 / 2.0f64.sqrt()).abs() < 1e-14);
            }
            other => panic!("wanted explicit state, got {:?}", other.is_ok()),
        }
        assert!(matches!(
            parse_state_choice("w-state", None, None),
            Err(RunError::Usage(_))
        ));
    }

    #[test]
    fn state_file_rejects_garbage() {
        assert!(parse_state_json("{\"amplitudes\":[[0,0],[0,0],[0,0],[0,0]]}").is_err());
        assert!(parse_state_json("{\"amps\":[[1,0],[0,0],[0,0],[0,0]]}").is_err());
        assert!(parse_state_json("not json").is_err());
    }

    #[test]
    fn decompose_round_trip_on_shifted_channel() {
        // finite-temperature damping, interior to the CP cone
        let fam = NoiseFamily::gad(1.0, 0.3).unwrap();
        let m = fam.transfer_at(0.5).unwrap();
        let e = m.entries();
        let text = format!(
            "{{\"lambda\":[{},{},{}],\"t\":[{},{},{}]}}",
            e[1][1], e[2][2], e[3][3], e[1][0], e[2][0], e[3][0]
        );
        let report = decompose_report(&text).unwrap();
        let v: serde_json::Value = serde_json::from_str(report.trim()).unwrap();
        assert!(v["residual"].as_f64().unwrap() < 1e-9);
        let lt = v["lambda_tilde"].as_array().unwrap();
        assert_eq!(lt.len(), 3);
        for x in lt {
            let x = x.as_f64().unwrap();
            assert!(x.abs() <= 1.0 + 1e-12);
        }
        assert_eq!(v["A"].as_array().unwrap().len(), 4);
        assert_eq!(v["B"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn ea_check_full_depolarizing_pair() {
        let text = "{\"lambda\":[0,0,0]}";
        let report = ea_check_report(text, text, 200, 1).unwrap();
        let v: serde_json::Value = serde_json::from_str(report.trim()).unwrap();
        assert_eq!(v["annihilating"], serde_json::Value::Bool(true));
        assert_eq!(v["max_value"].as_f64().unwrap(), 0.0);
        assert_eq!(v["sampled"]["verdict"], "ea-consistent");
    }

    #[test]
    fn ea_check_identity_pair_is_refuted() {
        let text = "{\"lambda\":[1,1,1]}";
        let report = ea_check_report(text, text, 50, 1).unwrap();
        let v: serde_json::Value = serde_json::from_str(report.trim()).unwrap();
        assert_eq!(v["annihilating"], serde_json::Value::Bool(false));
        assert!(v["max_value"].as_f64().unwrap() > 1.0);
        assert_eq!(v["sampled"]["verdict"], "not-ea");
        assert_eq!(v["sampled"]["index"].as_i64().unwrap(), 0);
    }

    #[test]
    fn lifetime_of_bell_state_under_biased_damping() {
        let fam = NoiseFamily::gad(1.0, 0.01).unwrap();
        let report =
            lifetime_report(&fam, &fam, &StateChoice::Bell, None).unwrap();
        let v: serde_json::Value = serde_json::from_str(report.trim()).unwrap();
        assert!((v["tau"].as_f64().unwrap() - 1.046344856983).abs() < 1e-6);
        assert_eq!(v["method"], "numeric");
    }

    #[test]
    fn robust_state_under_biased_damping() {
        let fam = NoiseFamily::gad(1.0, 0.01).unwrap();
        let report = robust_state_report(&fam, &fam, None).unwrap();
        let v: serde_json::Value = serde_json::from_str(report.trim()).unwrap();
        assert!((v["tau"].as_f64().unwrap() - 1.565047731459).abs() < 1e-6);
        assert!((v["negativity"].as_f64().unwrap() - 0.364830370297).abs() < 1e-6);
        let amp = v["amplitudes"].as_array().unwrap();
        assert!((amp[0][0].as_f64().unwrap().abs() - 0.397612039048).abs() < 1e-6);
        assert!((amp[3][0].as_f64().unwrap().abs() - 0.917553631350).abs() < 1e-6);
    }

    #[test]
    fn trace_columns_and_endpoints() {
        let fam = NoiseFamily::gad(1.0, 0.01).unwrap();
        let csv = trace_csv(&fam, &fam, "bell+robust+interp-envelope", 2.0, 41).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,bell,robust,interp-envelope");
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[0], "0");
        assert_eq!(first[1], "0.5");
        assert!((first[2].parse::<f64>().unwrap() - 0.364830370297).abs() < 1e-6);
        assert_eq!(first[3], "0.5");
        let rows: Vec<&str> = csv.lines().skip(1).collect();
        assert_eq!(rows.len(), 41);
        let last: Vec<&str> = rows.last().unwrap().split(',').collect();
        assert_eq!(last[0], "2");
        assert_eq!(last[1], "0");
        assert_eq!(last[2], "0");
        // bell dies near 1.046, robust near 1.565
        for row in &rows {
            let c: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
            if c[0] > 1.10 {
                assert_eq!(c[1], 0.0);
            }
            if c[0] < 1.0 {
                assert!(c[1] > 0.0);
            }
            if c[0] > 1.60 {
                assert_eq!(c[2], 0.0);
            }
            if c[0] < 1.5 {
                assert!(c[2] > 0.0);
            }
            // envelope tracks the better of the plain columns; the small
            // slack covers the dip where neither endpoint is optimal
            assert!(c[3] >= c[1] - 0.02);
            assert!(c[3] >= c[2] - 0.02);
        }
    }

    #[test]
    fn trace_rejects_bad_grid() {
        let fam = NoiseFamily::gad(1.0, 0.01).unwrap();
        assert!(matches!(
            trace_csv(&fam, &fam, "bell", 2.0, 1),
            Err(RunError::Usage(_))
        ));
        assert!(matches!(
            trace_csv(&fam, &fam, "bell", -1.0, 10),
            Err(RunError::Usage(_))
        ));
        assert!(matches!(
            trace_csv(&fam, &fam, "bell+ghz", 2.0, 10),
            Err(RunError::Usage(_))
        ));
    }

    #[test]
    fn examples_lines_agree() {
        let text = examples_report().unwrap();
        assert!(text.contains("balanced amplitude damping pair"));
        // first numeric line: closed and numeric within 1e-8
        let line = text
            .lines()
            .find(|l| l.trim_start().starts_with("g=1 g'=1"))
            .unwrap();
        let nums: Vec<f64> = line
            .split_whitespace()
            .filter_map(|w| w.parse::<f64>().ok())
            .collect();
        let closed = nums[0];
        let numeric = nums[1];
        assert!((closed - numeric).abs() < 1e-8);
        assert!((closed - 0.440686793510).abs() < 1e-10);
    }
}
