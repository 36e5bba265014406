#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use num_complex::Complex64;

use super::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn space(dim: usize) -> FockSpace {
    FockSpace::new(dim).unwrap()
}

#[test]
fn rejects_tiny_space() {
    assert!(FockSpace::new(1).is_err());
    assert!(FockSpace::new(2).is_ok());
}

#[test]
fn ladder_dim_two() {
    let a = annihilation(space(2));
    assert_eq!(a.get(0, 0), c(0.0, 0.0));
    assert_eq!(a.get(0, 1), c(1.0, 0.0));
    assert_eq!(a.get(1, 0), c(0.0, 0.0));
    assert_eq!(a.get(1, 1), c(0.0, 0.0));
    let ad = creation(space(2));
    assert_eq!(ad.get(1, 0), c(1.0, 0.0));
}

#[test]
fn commutator_is_identity_below_the_cutoff() {
    let s = space(12);
    let comm = annihilation(s).commutator(&creation(s)).unwrap();
    for i in 0..11 {
        for j in 0..12 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(comm.get(i, j).re, want, epsilon = 1e-14);
        }
    }
    assert_abs_diff_eq!(comm.get(11, 11).re, -11.0, epsilon = 1e-13);
}

#[test]
fn number_operator_diagonal() {
    let s = space(7);
    let n = creation(s).mul(&annihilation(s)).unwrap();
    for i in 0..7 {
        assert_abs_diff_eq!(n.get(i, i).re, i as f64, epsilon = 1e-14);
    }
    assert!(n.max_abs_diff(&FockOperator::number(s)).unwrap() < 1e-14);
}

#[test]
fn zero_displacement_and_squeeze_are_identity() {
    let s = space(10);
    let id = FockOperator::identity(s);
    assert_eq!(displacement(s, c(0.0, 0.0)).unwrap(), id);
    assert_eq!(squeeze(s, c(0.0, 0.0)).unwrap(), id);
}

#[test]
fn coherent_mean_number() {
    for beta in [c(0.5, 0.0), c(1.2, -0.7), c(-2.0, 1.5), c(0.0, 3.0)] {
        let m: f64 = beta.norm_sqr();
        let dim = (m + 10.0 * (m + 1.0).sqrt() + 20.0).ceil() as usize;
        let s = space(dim);
        let state = displacement(s, beta).unwrap().apply(&FockState::vacuum(s)).unwrap();
        // independent series Σ n |⟨n|β⟩|² with the Poisson recursion
        let mut p = (-m).exp();
        let mut series = 0.0;
        for n in 1..400 {
            p *= m / n as f64;
            series += n as f64 * p;
        }
        assert_abs_diff_eq!(state.mean_number(), series, epsilon = 1e-8);
        assert_abs_diff_eq!(series, m, epsilon = 1e-12);
    }
}

#[test]
fn displacement_inverse_and_composition() {
    let s = space(90);
    let a = c(0.8, -0.3);
    let b = c(-0.4, 1.1);
    let da = displacement(s, a).unwrap();
    let db = displacement(s, b).unwrap();
    let prod = da.mul(&displacement(s, -a).unwrap()).unwrap();
    assert!(prod.max_abs_diff_block(&FockOperator::identity(s), 40).unwrap() < 1e-9);
    // D(α)D(β) = e^{i Im(αβ*)} D(α+β)
    let lhs = da.mul(&db).unwrap();
    let rhs = displacement(s, a + b)
        .unwrap()
        .scale(Complex64::from_polar(1.0, (a * b.conj()).im));
    assert!(lhs.max_abs_diff_block(&rhs, 40).unwrap() < 1e-8);
}

#[test]
fn constructors_are_unitary() {
    let s = space(80);
    for op in [
        displacement(s, c(1.5, 0.5)).unwrap(),
        squeeze(s, c(0.4, 0.0)).unwrap(),
        squeeze(s, Complex64::from_polar(0.3, 1.1)).unwrap(),
    ] {
        assert!(op.unitarity_residual() < 1e-10);
        assert!(op.leakage() < TRUNCATION_TOL);
    }
}

#[test]
fn truncation_is_reported() {
    let err = displacement(space(12), c(3.0, 0.0)).unwrap_err();
    assert!(matches!(err, Error::Truncation { dim: 12, .. }), "{err}");
    assert!(FockState::coherent(space(10), c(4.0, 0.0)).is_err());
    assert!(squeezed_coherent(space(20), c(0.0, 0.0), c(1.5, 0.0)).is_err());
}

#[test]
fn squeezed_vacuum_variance() {
    // 2⟨Δq²⟩ = e^{−2r} for S(r)|0⟩, q = (c + c†)/√2; evaluated with explicit
    // matrix products.
    let s = space(220);
    let a = annihilation(s);
    let q = a
        .add(&creation(s))
        .unwrap()
        .scale(c(std::f64::consts::FRAC_1_SQRT_2, 0.0));
    let q2 = q.mul(&q).unwrap();
    for r in [0.1, 0.3, 0.6] {
        let psi = squeeze(s, c(r, 0.0)).unwrap().apply(&FockState::vacuum(s)).unwrap();
        let mean = q.expectation(&psi).unwrap().re;
        let var = q2.expectation(&psi).unwrap().re - mean * mean;
        assert_abs_diff_eq!(2.0 * var, (-2.0 * r).exp(), epsilon = 1e-7);
    }
}

#[test]
fn squeeze_transforms_annihilation() {
    let s = space(120);
    let a = annihilation(s);
    let ad = creation(s);
    let interior = 40;
    // real ξ: S c S† = μc + νc†
    let xi = 0.35_f64;
    let sq = squeeze(s, c(xi, 0.0)).unwrap();
    let lhs = sq.mul(&a).unwrap().mul(&sq.adjoint()).unwrap();
    let rhs = a.scale(c(xi.cosh(), 0.0)).add(&ad.scale(c(xi.sinh(), 0.0))).unwrap();
    assert!(lhs.max_abs_diff_block(&rhs, interior).unwrap() < 1e-9);
    // complex ξ = re^{iθ}: S† c S = μc − νe^{iθ}c†
    let (r, theta) = (0.27_f64, 0.9_f64);
    let sq = squeeze(s, Complex64::from_polar(r, theta)).unwrap();
    let lhs = sq.adjoint().mul(&a).unwrap().mul(&sq).unwrap();
    let rhs = a
        .scale(c(r.cosh(), 0.0))
        .sub(&ad.scale(Complex64::from_polar(r.sinh(), theta)))
        .unwrap();
    assert!(lhs.max_abs_diff_block(&rhs, interior).unwrap() < 1e-9);
}

#[test]
fn squeezed_coherent_special_cases() {
    let s = space(60);
    let vac = squeezed_coherent(s, c(0.0, 0.0), c(0.0, 0.0)).unwrap();
    assert_eq!(vac, FockState::vacuum(s));

    let beta = c(1.1, -0.6);
    let coh = squeezed_coherent(s, beta, c(0.0, 0.0)).unwrap();
    let mut expected = c((-0.5 * beta.norm_sqr()).exp(), 0.0);
    for n in 0..20 {
        assert_abs_diff_eq!((coh.amplitudes()[n] - expected).norm(), 0.0, epsilon = 1e-14);
        expected = expected * beta / ((n + 1) as f64).sqrt();
    }
    // D(β)|0⟩ from the operator agrees with the analytic amplitudes
    let from_op = displacement(s, beta).unwrap().apply(&FockState::vacuum(s)).unwrap();
    assert!(fidelity(&from_op, &coh).unwrap() > 1.0 - 1e-12);
    assert_abs_diff_eq!(overlap(&from_op, &coh).unwrap().re, 1.0, epsilon = 1e-10);
}

#[test]
fn squeezed_coherent_matches_operator_product() {
    let s = space(150);
    for (beta, xi) in [
        (c(1.3, 0.4), c(0.3, 0.0)),
        (c(-0.7, 2.0), Complex64::from_polar(0.5, 1.9)),
        (c(0.0, 0.0), c(-0.4, 0.2)),
    ] {
        let direct = squeezed_coherent(s, beta, xi).unwrap();
        let product = squeeze(s, xi)
            .unwrap()
            .mul(&displacement(s, beta).unwrap())
            .unwrap()
            .apply(&FockState::vacuum(s))
            .unwrap();
        let worst = direct
            .amplitudes()
            .iter()
            .zip(product.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst}");
    }
}

#[test]
fn large_displacement_does_not_underflow() {
    let beta = c(60.0, -25.0);
    let s = space(squeezed_cutoff(beta, c(0.2, 0.0)));
    let psi = squeezed_coherent(s, beta, c(0.2, 0.0)).unwrap();
    assert_abs_diff_eq!(psi.norm(), 1.0, epsilon = 1e-12);
    let a = annihilation(s);
    let ad = creation(s);
    let op = a
        .scale(c(0.2f64.cosh(), 0.0))
        .add(&ad.scale(c(0.2f64.sinh(), 0.0)))
        .unwrap();
    let lhs = op.apply(&psi).unwrap();
    let worst = lhs
        .amplitudes()
        .iter()
        .zip(psi.amplitudes())
        .map(|(l, p)| (l - beta * p).norm())
        .take(s.dim() - 2)
        .fold(0.0, f64::max);
    assert!(worst < 1e-9, "{worst}");
}

#[test]
fn displacer_and_squeezer_match_operators() {
    let s = space(120);
    let psi = squeezed_coherent(s, c(0.5, -0.3), c(0.1, 0.2)).unwrap();
    let d = Displacer::new(s).unwrap();
    let q = Squeezer::new(s).unwrap();
    for (beta, xi) in [(c(1.0, 0.5), c(0.3, -0.1)), (c(-2.0, 0.0), c(-0.25, 0.0))] {
        let a = q.apply(xi, &d.apply(beta, &psi).unwrap()).unwrap();
        let b = q.operator(xi).mul(&d.operator(beta)).unwrap().apply(&psi).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
        // against the complex generator route
        let g = matrix_exp_hermitian(&displacement_generator(s, beta), 1.0).unwrap();
        assert!(g.max_abs_diff(&d.operator(beta)).unwrap() < 1e-10);
        let g = matrix_exp_hermitian(&squeeze_generator(s, xi), 1.0).unwrap();
        assert!(g.max_abs_diff(&q.operator(xi)).unwrap() < 1e-10);
    }
}

#[test]
fn squeezed_coherent_is_eigenstate() {
    let s = space(160);
    let a = annihilation(s);
    let ad = creation(s);
    for (beta, r, theta) in [(c(1.3, 0.4), 0.3, 0.0), (c(-0.7, 2.0), 0.5, 1.9)] {
        let xi = Complex64::from_polar(r, theta);
        let psi = squeezed_coherent(s, beta, xi).unwrap();
        let op = a
            .scale(c(f64::cosh(r), 0.0))
            .add(&ad.scale(Complex64::from_polar(f64::sinh(r), theta)))
            .unwrap();
        let lhs = op.apply(&psi).unwrap();
        let worst = lhs
            .amplitudes()
            .iter()
            .zip(psi.amplitudes())
            .map(|(l, p)| (l - beta * p).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
    }
}

#[test]
fn free_evolution_identities() {
    let s = space(70);
    let psi = squeezed_coherent(s, c(1.0, 0.5), c(0.2, 0.1)).unwrap();
    assert_eq!(evolve_free(&psi, 0.0), psi);
    let full_turn = evolve_free(&psi, 2.0 * PI);
    for (x, y) in full_turn.amplitudes().iter().zip(psi.amplitudes()) {
        assert_abs_diff_eq!((x - y).norm(), 0.0, epsilon = 1e-12);
    }
}

#[test]
fn free_evolution_of_squeezed_coherent_state() {
    let s = space(120);
    let beta = c(1.7, -0.8);
    let xi = Complex64::from_polar(0.4, 0.6);
    let psi = squeezed_coherent(s, beta, xi).unwrap();
    for wt in [0.3, PI / 7.0, PI / 2.0, 2.5] {
        let evolved = evolve_free(&psi, wt);
        let rotated = squeezed_coherent(
            s,
            beta * Complex64::from_polar(1.0, -wt),
            xi * Complex64::from_polar(1.0, -2.0 * wt),
        )
        .unwrap();
        assert!(fidelity(&evolved, &rotated).unwrap() >= 1.0 - 1e-8);
    }
}

#[test]
fn overlap_basics() {
    let s = space(50);
    let psi = squeezed_coherent(s, c(0.9, 0.2), c(0.3, 0.0)).unwrap();
    assert_abs_diff_eq!(overlap(&psi, &psi).unwrap().re, 1.0, epsilon = 1e-12);
    let beta = c(1.4, -0.9);
    let coh = FockState::coherent(s, beta).unwrap();
    let v = overlap(&FockState::vacuum(s), &coh).unwrap();
    assert_abs_diff_eq!(v.re, (-0.5 * beta.norm_sqr()).exp(), epsilon = 1e-12);
    assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
    // conjugate linearity in the first slot
    let z = c(0.3, 0.7);
    let lhs = overlap(&psi.clone().scaled(z), &coh).unwrap();
    let rhs = z.conj() * overlap(&psi, &coh).unwrap();
    assert_abs_diff_eq!((lhs - rhs).norm(), 0.0, epsilon = 1e-14);
    assert!(overlap(&psi, &FockState::vacuum(space(49))).is_err());
}

#[test]
fn overlap_converges_under_cutoff_doubling() {
    let beta = c(2.0, 1.0);
    let xi = c(0.25, -0.1);
    let gamma = c(1.5, 0.5);
    let s = space(squeezed_cutoff(beta, xi));
    let at = |sp: FockSpace| {
        overlap(
            &FockState::coherent(sp, gamma).unwrap(),
            &squeezed_coherent(sp, beta, xi).unwrap(),
        )
        .unwrap()
    };
    assert!((at(s) - at(s.doubled())).norm() < 1e-8);
}

#[test]
fn matrix_exponential() {
    let s = space(50);
    let zero = FockOperator::zeros(s);
    assert!(
        matrix_exp_hermitian(&zero, 1.3)
            .unwrap()
            .max_abs_diff(&FockOperator::identity(s))
            .unwrap()
            < 1e-14
    );

    let n = FockOperator::number(s);
    let psi = squeezed_coherent(s, c(0.7, 0.1), c(0.2, 0.0)).unwrap();
    let t = 0.83;
    let via_exp = matrix_exp_hermitian(&n, t).unwrap().apply(&psi).unwrap();
    let direct = evolve_free(&psi, t);
    for (x, y) in via_exp.amplitudes().iter().zip(direct.amplitudes()) {
        assert!((x - y).norm() < 1e-10);
    }

    let h = displacement_generator(s, c(0.4, 0.2))
        .add(&squeeze_generator(s, c(0.1, 0.3)))
        .unwrap()
        .add(&n)
        .unwrap();
    let u = matrix_exp_hermitian(&h, 0.7).unwrap();
    let back = matrix_exp_hermitian(&h, -0.7).unwrap();
    assert!(u.mul(&back).unwrap().max_abs_diff(&FockOperator::identity(s)).unwrap() < 1e-10);
    assert!(u.unitarity_residual() < 1e-10);
}

#[test]
fn matrix_exponential_rejects_non_hermitian() {
    let s = space(6);
    assert!(matches!(
        matrix_exp_hermitian(&annihilation(s), 1.0),
        Err(Error::NotHermitian { .. })
    ));
}

#[test]
fn spectrum_evolve_matches_unitary() {
    let s = space(40);
    let h = squeeze_generator(s, c(0.2, 0.1)).add(&FockOperator::number(s)).unwrap();
    let spec = HermitianSpectrum::new(&h).unwrap();
    let psi = FockState::coherent(s, c(1.0, 0.3)).unwrap();
    let a = spec.evolve(&psi, 1.7).unwrap();
    let b = spec.unitary(1.7).apply(&psi).unwrap();
    for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
        assert!((x - y).norm() < 1e-12);
    }
}

#[test]
fn partial_trace_examples() {
    let (da, db) = (3, 4);
    let sb = space(db);
    let sigma_state = FockState::new(sb, vec![c(0.5, 0.0), c(0.5, 0.5), c(0.0, -0.5), c(0.0, 0.0)])
        .unwrap()
        .normalized();
    let sigma = DensityMatrix::pure(&sigma_state);

    let product = |a: &FockState, b: &FockState| {
        let amps = a
            .amplitudes()
            .iter()
            .flat_map(|x| b.amplitudes().iter().map(move |y| x * y))
            .collect();
        FockState::new(space(a.space().dim() * b.space().dim()), amps).unwrap()
    };

    // |0⟩⟨0| ⊗ σ → σ
    let vac_a = FockState::vacuum(space(da));
    let rho = DensityMatrix::pure(&product(&vac_a, &sigma_state));
    let reduced = partial_trace_first(&rho, da, db).unwrap();
    assert!((reduced.trace_distance(&sigma).unwrap()) < 1e-12);

    // |ψ⟩⊗|φ⟩ → |φ⟩⟨φ|
    let psi = FockState::new(space(da), vec![c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.0)]).unwrap();
    let rho = DensityMatrix::pure(&product(&psi, &sigma_state));
    let reduced = partial_trace_first(&rho, da, db).unwrap();
    assert!(reduced.trace_distance(&sigma).unwrap() < 1e-12);
    assert_abs_diff_eq!(reduced.trace(), rho.trace(), epsilon = 1e-12);

    // Σ p_n |n⟩⟨n| ⊗ |χ_n⟩⟨χ_n| → Σ p_n |χ_n⟩⟨χ_n|
    let weights = [0.5, 0.3, 0.2];
    let chis: Vec<FockState> = (0..da).map(|n| FockState::number(sb, n + 1).unwrap()).collect();
    let mut rho = DensityMatrix::zeros(space(da * db));
    for n in 0..da {
        let joint = product(&FockState::number(space(da), n).unwrap(), &chis[n]);
        rho.add_projector(weights[n], &joint);
    }
    let reduced = partial_trace_first(&rho, da, db).unwrap();
    let expected = DensityMatrix::mixture(sb, weights.iter().copied().zip(chis.iter())).unwrap();
    assert!(reduced.trace_distance(&expected).unwrap() < 1e-12);
    assert!(reduced.hermiticity_residual() < 1e-15);

    assert!(partial_trace_first(&rho, 2, db).is_err());
}

#[test]
fn density_matrix_invariants() {
    let s = space(70);
    let states: Vec<FockState> = [c(0.3, 0.0), c(-0.5, 0.9), c(1.0, 1.0)]
        .iter()
        .map(|&b| squeezed_coherent(s, b, c(0.2, 0.1)).unwrap())
        .collect();
    let rho = DensityMatrix::mixture(s, [0.2, 0.5, 0.3].into_iter().zip(states.iter())).unwrap();
    assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-10);
    assert!(rho.hermiticity_residual() < 1e-12);
    assert!(rho.eigenvalues().unwrap().iter().all(|&l| l >= -1e-10));
    assert!(rho.purity() <= 1.0 + 1e-8);
    let n = FockOperator::number(s);
    let mixed = rho.expectation(&n).unwrap().re;
    let direct: f64 = [0.2, 0.5, 0.3]
        .iter()
        .zip(&states)
        .map(|(w, st)| w * st.mean_number())
        .sum();
    assert_abs_diff_eq!(mixed, direct, epsilon = 1e-12);
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn overlap_is_bounded(br in -2.0f64..2.0, bi in -2.0f64..2.0, r in 0.0f64..0.5, th in 0.0f64..std::f64::consts::TAU,
                              gr in -2.0f64..2.0, gi in -2.0f64..2.0) {
            let s = space(200);
            let a = squeezed_coherent(s, c(br, bi), Complex64::from_polar(r, th)).unwrap();
            let b = FockState::coherent(s, c(gr, gi)).unwrap();
            prop_assert!(overlap(&a, &b).unwrap().norm() <= 1.0 + 1e-10);
            prop_assert!((a.norm() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn displacement_composes(ar in -1.5f64..1.5, ai in -1.5f64..1.5, br in -1.5f64..1.5, bi in -1.5f64..1.5) {
            let s = space(100);
            let (a, b) = (c(ar, ai), c(br, bi));
            let lhs = displacement(s, a).unwrap().mul(&displacement(s, b).unwrap()).unwrap();
            let rhs = displacement(s, a + b).unwrap().scale(Complex64::from_polar(1.0, (a * b.conj()).im));
            prop_assert!(lhs.max_abs_diff_block(&rhs, 30).unwrap() < 1e-8);
        }
    }
}
