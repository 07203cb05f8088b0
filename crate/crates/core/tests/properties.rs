use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use ramansim_core::catgate::{CatBasis, CatQubit};
use ramansim_core::dynamics::{evolve_closed_form, RamanParams};
use ramansim_core::fock::overlap_analytic;
use ramansim_core::{AtomLevel, AtomQubit, FieldState};

fn complex(max: f64) -> impl Strategy<Value = Complex64> {
    (-max..max, -max..max).prop_map(|(re, im)| Complex64::new(re, im))
}

fn field(n_max: usize) -> impl Strategy<Value = FieldState> {
    proptest::collection::vec(complex(1.0), n_max + 1).prop_map(|a| FieldState::from_amplitudes(a).unwrap())
}

proptest! {
    #[test]
    fn inner_is_conjugate_symmetric(f in field(12), g in field(12)) {
        let fg = f.inner(&g).unwrap();
        let gf = g.inner(&f).unwrap();
        prop_assert!((fg - gf.conj()).norm() < 1e-12);
    }

    #[test]
    fn numeric_overlap_matches_closed_form(a in complex(3.0), b in complex(3.0)) {
        let n_max = 80;
        let fa = FieldState::coherent(a, Some(n_max)).unwrap();
        let fb = FieldState::coherent(b, Some(n_max)).unwrap();
        let numeric = fa.inner(&fb).unwrap();
        prop_assert!((numeric - overlap_analytic(a, b).value).norm() < 1e-9);
    }

    #[test]
    fn number_phase_composes(f in field(20), t1 in -4.0..4.0f64, t2 in -4.0..4.0f64) {
        let stepwise = f.apply_number_phase(t1).apply_number_phase(t2);
        let once = f.apply_number_phase(t1 + t2);
        prop_assert!(stepwise.add_scaled(Complex64::new(-1.0, 0.0), &once).unwrap().norm() < 1e-12);
        prop_assert!((stepwise.norm_sqr() - f.norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn fidelity_ignores_scale(f in field(10), g in field(10), k in complex(5.0)) {
        prop_assume!(k.norm() > 1e-3 && f.norm() > 1e-3 && g.norm() > 1e-3);
        let base = f.fidelity(&g).unwrap();
        prop_assert!((f.scaled(k).fidelity(&g).unwrap() - base).abs() < 1e-12);
        prop_assert!((f.fidelity(&g.scaled(k)).unwrap() - base).abs() < 1e-12);
        prop_assert!((g.fidelity(&f).unwrap() - base).abs() < 1e-12);
    }

    // Each photon-number block of the effective Hamiltonian is nβ[[1,1],[1,1]]
    // with spectral projectors P₀ = ½[[1,−1],[−1,1]] (eigenvalue 0) and
    // P₁ = ½[[1,1],[1,1]] (eigenvalue 2nβ).
    #[test]
    fn closed_form_matches_block_diagonalization(
        theta in 0.0..PI, phi in 0.0..(2.0 * PI), alpha in 0.2..3.0f64, t in 0.0..40.0f64,
    ) {
        let q = AtomQubit::from_bloch(theta, phi);
        let p = RamanParams::new(10.0, 1e3, Complex64::new(alpha, 0.3)).unwrap();
        let psi = evolve_closed_form(&q, &p, t, None).unwrap();
        let initial = FieldState::coherent(p.alpha(), Some(psi.n_max())).unwrap();
        let (g, e) = (psi.row(AtomLevel::Ground).unwrap(), psi.row(AtomLevel::Excited).unwrap());
        for (n, amp) in initial.amplitudes().iter().enumerate() {
            let (xg, xe) = (q.c_g() * amp, q.c_e() * amp);
            let phase = Complex64::from_polar(1.0, -2.0 * n as f64 * p.beta() * t);
            let dark = 0.5 * (xg - xe);
            let bright = 0.5 * (xg + xe) * phase;
            prop_assert!((g.amplitudes()[n] - (dark + bright)).norm() < 1e-12);
            prop_assert!((e.amplitudes()[n] - (bright - dark)).norm() < 1e-12);
        }
        prop_assert!((psi.norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn decompose_inverts_embed(alpha in 1.0..4.0f64, a in complex(1.0), b in complex(1.0)) {
        let basis = CatBasis::new(Complex64::new(alpha, 0.0), None).unwrap();
        let q = CatQubit::new(basis.alpha(), a, b);
        let (r, residual) = basis.decompose(&basis.embed(&q).unwrap()).unwrap();
        prop_assert!((r.a - a).norm() < 1e-9 && (r.b - b).norm() < 1e-9);
        prop_assert!(residual < 1e-9);
    }
}
