//! Randomized invariants. Where the acceptance suite pins concrete numbers,
//! these properties guard the structural rules on arbitrary inputs and let
//! the framework shrink any counterexample it finds.

use entlife::algebra::{
    negativity, partial_transpose_raw, rmat3_mul, Mat2, PureTwoQubit, RMat3, C64,
};
use entlife::channels::{
    apply_pair, assemble, canonical_form, classify, DiagonalChannel, TransferMatrix,
};
use entlife::dynamics::{gad_reduced_lambda, reduce_to_unital, NoiseFamily};
use entlife::sinkhorn::decompose;
use entlife::unital::{signed_permutation_max, witness_family};
use proptest::prelude::*;

fn axis_rotation(axis: [f64; 3], angle: f64) -> RMat3 {
    let n = (axis[0].powi(2) + axis[1].powi(2) + axis[2].powi(2)).sqrt().max(1e-12);
    let a = [axis[0] / n, axis[1] / n, axis[2] / n];
    let (s, c) = angle.sin_cos();
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = (1.0 - c) * a[i] * a[j];
        }
        r[i][i] += c;
    }
    r[0][1] -= s * a[2];
    r[0][2] += s * a[1];
    r[1][0] += s * a[2];
    r[1][2] -= s * a[0];
    r[2][0] -= s * a[1];
    r[2][1] += s * a[0];
    r
}

/// Interior channel from free parameters: shifts scaled inside the
/// positivity bound, then the whole map pulled toward the depolarizing
/// center. Rejects the leftovers the scaling cannot save.
fn interior_from(lambda: [f64; 3], shift_frac: [f64; 3]) -> Option<DiagonalChannel> {
    let shift = [
        shift_frac[0] * 0.5 * (1.0 - lambda[0].abs()),
        shift_frac[1] * 0.5 * (1.0 - lambda[1].abs()),
        shift_frac[2] * 0.5 * (1.0 - lambda[2].abs()),
    ];
    let dc = DiagonalChannel::new(lambda, shift);
    if !classify(&dc).completely_positive {
        return None;
    }
    let s = 0.93;
    Some(DiagonalChannel::new(
        lambda.map(|x| s * x),
        shift.map(|x| s * x),
    ))
}

fn tetra(weights: [f64; 4]) -> [f64; 3] {
    let z: f64 = weights.iter().sum();
    let p = weights.map(|x| x / z);
    [
        p[0] + p[1] - p[2] - p[3],
        p[0] - p[1] + p[2] - p[3],
        p[0] - p[1] - p[2] + p[3],
    ]
}

fn spin_rotation(axis: [f64; 3], angle: f64) -> Mat2 {
    let n = (axis[0].powi(2) + axis[1].powi(2) + axis[2].powi(2)).sqrt().max(1e-12);
    let (s, c) = (0.5 * angle).sin_cos();
    let mut m = Mat2::pauli_combo(0.0, [axis[0] / n, axis[1] / n, axis[2] / n]);
    m = m.scale(C64::new(0.0, -s));
    m.add(&Mat2::identity().scale(C64::new(c, 0.0)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn balancing_always_lands_on_a_unital_core(
        lambda in proptest::array::uniform3(-0.95f64..0.95),
        shift_frac in proptest::array::uniform3(-1.0f64..1.0),
        axis_o in proptest::array::uniform3(-1.0f64..1.0),
        angle_o in 0.0f64..6.28,
        axis_i in proptest::array::uniform3(-1.0f64..1.0),
        angle_i in 0.0f64..6.28,
    ) {
        prop_assume!(axis_o.iter().map(|x| x * x).sum::<f64>() > 0.01);
        prop_assume!(axis_i.iter().map(|x| x * x).sum::<f64>() > 0.01);
        let dc = interior_from(lambda, shift_frac);
        prop_assume!(dc.is_some());
        let m = assemble(
            &dc.unwrap(),
            &axis_rotation(axis_o, angle_o),
            &axis_rotation(axis_i, angle_i),
        );
        let red = decompose(&m).expect("interior channel must balance");
        prop_assert!(red.residual < 1e-9);
        for op in [&red.a_op, &red.b_op] {
            prop_assert!(op.hermiticity_residual() < 1e-10);
            let e = op.eigenvalues().unwrap();
            prop_assert!(e[0] > 0.0 && e[1] > 0.0);
        }
        let lt = red.lambda_tilde;
        prop_assert!(lt.iter().all(|x| x.abs() <= 1.0 + 1e-12));
        prop_assert!(lt[0].abs() >= lt[1].abs() - 1e-12);
        prop_assert!(lt[1].abs() >= lt[2].abs() - 1e-12);
    }

    #[test]
    fn canonical_split_reassembles(
        lambda in proptest::array::uniform3(-0.95f64..0.95),
        shift_frac in proptest::array::uniform3(-1.0f64..1.0),
        axis_o in proptest::array::uniform3(-1.0f64..1.0),
        angle_o in 0.0f64..6.28,
        axis_i in proptest::array::uniform3(-1.0f64..1.0),
        angle_i in 0.0f64..6.28,
    ) {
        prop_assume!(axis_o.iter().map(|x| x * x).sum::<f64>() > 0.01);
        prop_assume!(axis_i.iter().map(|x| x * x).sum::<f64>() > 0.01);
        let dc = interior_from(lambda, shift_frac);
        prop_assume!(dc.is_some());
        let m = assemble(
            &dc.unwrap(),
            &axis_rotation(axis_o, angle_o),
            &axis_rotation(axis_i, angle_i),
        );
        let (cd, q_out, q_in) = canonical_form(&m);
        let back = assemble(&cd, &q_out, &q_in);
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((back.entries()[i][j] - m.entries()[i][j]).abs() < 1e-10);
            }
        }
        prop_assert!(cd.lambda[0] >= cd.lambda[1] - 1e-12);
        prop_assert!(cd.lambda[1] >= cd.lambda[2].abs() - 1e-12);
    }

    #[test]
    fn annihilation_measure_is_symmetric_and_scales(
        wa in proptest::array::uniform4(0.001f64..1.0),
        wb in proptest::array::uniform4(0.001f64..1.0),
        s in 0.0f64..=1.0,
    ) {
        let la = tetra(wa);
        let lb = tetra(wb);
        let forward = signed_permutation_max(&la, &lb);
        let backward = signed_permutation_max(&lb, &la);
        prop_assert!((forward.max_value - backward.max_value).abs() < 1e-12);
        let shrunk = signed_permutation_max(&la.map(|x| s * x), &lb);
        prop_assert!((shrunk.max_value - s * forward.max_value).abs() < 1e-12);
        // shrinking one side never turns a harmless pair harmful
        if forward.max_value <= 1.0 {
            prop_assert!(shrunk.max_value <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn pair_outputs_stay_physical_on_the_witness_family(
        wa in proptest::array::uniform4(0.001f64..1.0),
        wb in proptest::array::uniform4(0.001f64..1.0),
        index in 0usize..24,
    ) {
        let ma = TransferMatrix::from_diagonal(&DiagonalChannel::unital(tetra(wa)));
        let mb = TransferMatrix::from_diagonal(&DiagonalChannel::unital(tetra(wb)));
        let psi = &witness_family()[index];
        let rho = apply_pair(&ma, &mb, &psi.projector()).expect("CP pair output is a state");
        let n = negativity(&rho);
        prop_assert!((0.0..=0.5 + 1e-12).contains(&n));
    }

    #[test]
    fn partial_transpose_is_an_involution(
        re in proptest::array::uniform4(-1.0f64..1.0),
        im in proptest::array::uniform4(-1.0f64..1.0),
    ) {
        let raw = [
            C64::new(re[0], im[0]),
            C64::new(re[1], im[1]),
            C64::new(re[2], im[2]),
            C64::new(re[3], im[3]),
        ];
        prop_assume!(raw.iter().map(|c| c.norm_sqr()).sum::<f64>() > 1e-6);
        let psi = PureTwoQubit::normalized(raw).unwrap();
        let rho = psi.projector();
        let twice = partial_transpose_raw(&partial_transpose_raw(rho.entries()));
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((twice[i][j] - rho.entries()[i][j]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn negativity_ignores_local_frames(
        re in proptest::array::uniform4(-1.0f64..1.0),
        im in proptest::array::uniform4(-1.0f64..1.0),
        axis_a in proptest::array::uniform3(-1.0f64..1.0),
        angle_a in 0.0f64..6.28,
        axis_b in proptest::array::uniform3(-1.0f64..1.0),
        angle_b in 0.0f64..6.28,
    ) {
        prop_assume!(axis_a.iter().map(|x| x * x).sum::<f64>() > 0.01);
        prop_assume!(axis_b.iter().map(|x| x * x).sum::<f64>() > 0.01);
        let raw = [
            C64::new(re[0], im[0]),
            C64::new(re[1], im[1]),
            C64::new(re[2], im[2]),
            C64::new(re[3], im[3]),
        ];
        prop_assume!(raw.iter().map(|c| c.norm_sqr()).sum::<f64>() > 1e-6);
        let psi = PureTwoQubit::normalized(raw).unwrap();
        let ua = spin_rotation(axis_a, angle_a);
        let ub = spin_rotation(axis_b, angle_b);
        let moved = psi.apply_local(&ua, &ub).unwrap();
        let before = negativity(&psi.projector());
        let after = negativity(&moved.projector());
        prop_assert!((before - after).abs() < 1e-10);
    }

    #[test]
    fn damping_reduction_matches_the_general_route(
        gamma in 0.2f64..2.5,
        w in 0.05f64..0.95,
        t in 0.05f64..2.5,
    ) {
        let fam = NoiseFamily::gad(gamma, w).unwrap();
        let closed = gad_reduced_lambda(&fam, t).unwrap();
        let (general, _) = reduce_to_unital(&fam.transfer_at(t).unwrap()).unwrap();
        for i in 0..3 {
            prop_assert!((closed[i] - general[i]).abs() < 1e-10);
        }
        prop_assert!(closed[0] > 0.0 && closed[0] <= 1.0);
        prop_assert!((closed[2] - closed[0] * closed[0]).abs() < 1e-12);
    }
}

// The rotation composition used by the strategies should itself be special
// orthogonal; a plain test keeps the helper honest.
#[test]
fn helper_rotations_are_special_orthogonal() {
    let r = rmat3_mul(
        &axis_rotation([0.3, -0.8, 0.52], 1.234),
        &axis_rotation([1.0, 2.0, -0.5], 4.56),
    );
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let dot: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    assert!(worst < 1e-14);
    let u = spin_rotation([0.3, -0.8, 0.52], 1.234);
    assert!(u.is_unitary(1e-12));
}
