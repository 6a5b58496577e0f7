mod common;

use nalgebra::{DMatrix, Matrix4};
use proptest::prelude::*;

use common::{eigenvalues, spectrum_distance, to_dyn};
use symdec::dirac::{
    self, from_coefficients, is_cosymplex, is_symplex, rdm_coefficients, symplex_cosymplex_split,
};
use symdec::emeq::{lax_invariants, lax_invariants_n};
use symdec::jacobi::off_hamiltonian_residual;
use symdec::optics::tune_cosines_4;
use symdec::transform::{apply_similarity, basic_transform, matrix_exponential};
use symdec::{
    analyze_one_turn, decouple, decouple_block_diagonal, jacobi_decouple, random_test_symplex,
    DecoupleConfig, EmeqState, Form, GeneratorKind, JacobiConfig, RdmCoefficients, Symplex4,
    TransferMatrix,
};

fn matrix4() -> impl Strategy<Value = Matrix4<f64>> {
    prop::array::uniform16(-1.0f64..1.0).prop_map(|a| Matrix4::from_row_slice(&a))
}

fn state() -> impl Strategy<Value = EmeqState> {
    prop::array::uniform10(-1.0f64..1.0)
        .prop_map(|c| EmeqState::from_coefficients(&RdmCoefficients::from_symplex_coefficients(c)))
}

/// `γ₀·A` with a diagonally dominant symmetric `A`.
fn stable_symplex() -> impl Strategy<Value = Symplex4> {
    (prop::array::uniform4(2.0f64..3.0), prop::array::uniform6(-0.5f64..0.5)).prop_map(|(d, o)| {
        let mut a = Matrix4::from_diagonal(&d.into());
        let mut k = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                a[(i, j)] = o[k];
                a[(j, i)] = o[k];
                k += 1;
            }
        }
        Symplex4::new(dirac::gamma0() * a).unwrap()
    })
}

fn symplex() -> impl Strategy<Value = Matrix4<f64>> {
    matrix4().prop_map(|a| dirac::gamma0() * (a + a.transpose()))
}

fn cosymplex() -> impl Strategy<Value = Matrix4<f64>> {
    matrix4().prop_map(|a| dirac::gamma0() * (a - a.transpose()))
}

fn generator() -> impl Strategy<Value = GeneratorKind> {
    (0u8..10).prop_map(|b| GeneratorKind::new(b).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn closure_relations(s1 in symplex(), s2 in symplex(), c in cosymplex()) {
        prop_assert!(is_symplex(&(s1 * s2 - s2 * s1), 1e-12));
        prop_assert!(is_cosymplex(&(s1 * s2 + s2 * s1), 1e-12));
        prop_assert!(is_symplex(&(s1 * c + c * s1), 1e-12));
        prop_assert!(is_cosymplex(&(c * s1 - s1 * c), 1e-12));
    }

    #[test]
    fn coefficient_roundtrips(m in matrix4(), c in prop::array::uniform16(-1.0f64..1.0)) {
        prop_assert!((rdm_coefficients(&m).to_matrix() - m).amax() < 1e-13);
        let back = rdm_coefficients(&from_coefficients(&RdmCoefficients(c)));
        for k in 0..16 {
            prop_assert!((back[k] - c[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn symplex_has_no_cosymplex_coefficients(m in matrix4()) {
        let (s, c) = symplex_cosymplex_split(&m);
        prop_assert!(is_symplex(&s, 1e-12));
        prop_assert!(is_cosymplex(&c, 1e-12));
        prop_assert!(rdm_coefficients(&s).max_cosymplex() < 1e-14);
    }

    #[test]
    fn invariants_survive_similarity(s in state(), b in generator(), eps in -1.5f64..1.5) {
        let t = basic_transform(b, eps);
        let f = s.to_matrix();
        let moved = t.apply4(&f);
        let s2 = EmeqState::from_coefficients(&rdm_coefficients(&moved));
        prop_assert!(rel(s.k1(), s2.k1()) < 1e-9);
        prop_assert!(rel(s.k2(), s2.k2()) < 1e-9);
        prop_assert!(rel(f.determinant(), moved.determinant()) < 1e-9);
        let (i, j) = (lax_invariants(&f), lax_invariants(&moved));
        for k in 0..4 {
            prop_assert!(rel(i[k], j[k]) < 1e-9);
        }
        let dyn_moved = apply_similarity(&t, &to_dyn(&f)).unwrap();
        let j = lax_invariants_n(&dyn_moved);
        for k in 0..4 {
            prop_assert!(rel(i[k], j[k]) < 1e-9);
        }
    }

    #[test]
    fn k2_forms_agree(s in state()) {
        prop_assert!((s.k2() - s.k2_expanded()).abs() < 1e-12);
    }

    #[test]
    fn square_identity(s in state()) {
        let f = s.to_matrix();
        let (m, b) = (s.mass_components(), s.aux_vectors().b);
        let c = rdm_coefficients(&(f * f));
        let want = [(15, -s.k1()), (14, 2.0 * m.m_r), (10, 2.0 * m.m_g), (11, 2.0 * b.x), (12, 2.0 * b.y), (13, 2.0 * b.z)];
        for (k, v) in want {
            prop_assert!((c[k] - v).abs() < 1e-10, "k = {}", k);
        }
        for k in 0..10 {
            prop_assert!(c[k].abs() < 1e-10);
        }
    }

    #[test]
    fn transforms_are_symplectic(b in generator(), eps in -2.0f64..2.0) {
        let t = basic_transform(b, eps);
        prop_assert!(t.symplectic_residual() <= 1e-10);
        prop_assert!(t.inverse_residual() <= 1e-12);
        let back = basic_transform(b, -eps);
        prop_assert!((t.matrix() * back.matrix() - DMatrix::identity(4, 4)).amax() < 1e-14);
    }

    #[test]
    fn exponential_group_property(f in stable_symplex(), s in -1.0f64..1.0, t in -1.0f64..1.0) {
        let f = to_dyn(f.matrix());
        let (a, _) = matrix_exponential(&f, s).unwrap();
        let (b, _) = matrix_exponential(&f, t).unwrap();
        let (c, _) = matrix_exponential(&f, s + t).unwrap();
        prop_assert!((a * b - c).amax() < 1e-9);
    }

    #[test]
    fn block_diagonal_postconditions(f in stable_symplex()) {
        let cfg = DecoupleConfig::default();
        let r = decouple_block_diagonal(&f, &cfg).unwrap();
        let rebuilt = r.transform.apply4(f.matrix());
        prop_assert!((rebuilt - r.decoupled.matrix()).amax() < 1e-9);
        prop_assert!(r.transform.symplectic_residual() < 1e-10);
        let (i, j) = (f.spectral_invariants(), r.decoupled.spectral_invariants());
        prop_assert!(rel(i.k1, j.k1) < 1e-9);
        prop_assert!(rel(i.k2, j.k2) < 1e-9);
        let s = r.decoupled.state();
        for v in [s.magnetic.x, s.magnetic.z, s.electric.y, s.momentum.y] {
            prop_assert!(v.abs() < 1e-10);
        }
        let (m, b) = (s.mass_components(), s.aux_vectors().b);
        prop_assert!(m.m_r.abs() < 1e-10 && m.m_g.abs() < 1e-10);
        prop_assert!(b.x.abs() < 1e-10 && b.z.abs() < 1e-10);
        if let Some(x) = &r.cross_check {
            prop_assert!(x.passed, "closed form deviates by {:e}", x.max_deviation);
        }
    }

    #[test]
    fn normal_form_frequencies(f in stable_symplex()) {
        let r = decouple(&f, Form::NormalForm, &DecoupleConfig::default()).unwrap();
        let d = r.decoupled.matrix();
        let mut got = [d[(0, 1)].abs(), d[(2, 3)].abs()];
        let inv = f.spectral_invariants();
        let mut want = [inv.omega[0].value, inv.omega[1].value];
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for k in 0..2 {
            prop_assert!((got[k] - want[k]).abs() < 1e-9);
            prop_assert!((d[(2 * k, 2 * k + 1)] + d[(2 * k + 1, 2 * k)]).abs() < 1e-10);
        }
    }

    #[test]
    fn one_turn_recovers_tunes(w1 in 0.1f64..3.0, w2 in 0.1f64..3.0, tau in 0.1f64..1.0) {
        let mut f = DMatrix::zeros(4, 4);
        f[(0, 1)] = w1;
        f[(1, 0)] = -w1;
        f[(2, 3)] = w2;
        f[(3, 2)] = -w2;
        let m = TransferMatrix::from_force(&f, tau).unwrap();
        let r = analyze_one_turn(&m).unwrap();
        let c = tune_cosines_4(&common::to_fixed(&r.decoupled_transfer));
        let mut got = vec![r.tunes[0].cos, r.tunes[1].cos];
        let mut want = vec![(w1 * tau).cos(), (w2 * tau).cos()];
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for k in 0..2 {
            prop_assert!((got[k] - want[k]).abs() < 1e-9);
            prop_assert!((c[k] - r.tunes[k].cos).abs() < 1e-12);
        }
        prop_assert!(r.cosymplex_off_block < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn jacobi_invariants(n in 3usize..7, seed in any::<u64>()) {
        let f = random_test_symplex(n, seed);
        let cfg = JacobiConfig { hamiltonian: true, ..JacobiConfig::default() };
        let r = jacobi_decouple(&f, &cfg).unwrap();
        let out = r.decoupled.matrix();
        prop_assert!(r.transform.symplectic_residual() < 1e-9);
        prop_assert!((r.transform.apply(f.matrix()).unwrap() - out).amax() < 1e-9);
        prop_assert!(off_hamiltonian_residual(out) <= cfg.tol * f.matrix().norm());
        let d = spectrum_distance(&eigenvalues(f.matrix()), &eigenvalues(out));
        prop_assert!(d < 1e-8 * f.matrix().norm());
        let again = jacobi_decouple(&r.decoupled, &JacobiConfig::default()).unwrap();
        prop_assert_eq!(again.stats.block_steps, 0);
    }
}
