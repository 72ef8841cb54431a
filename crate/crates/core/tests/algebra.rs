mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use spinlab::basis::{assemble, assemble_with, build_sector_basis, Sector};
use spinlab::chain::{build_hamiltonian, Boundary, ChainParams};
use spinlab::eigen::{eigenpairs, eigh_dense, spectrum, stack_spectra, SolveMethod, SolverConfig};
use spinlab::pauli::{PauliString, PauliSum, Phase};
use spinlab::{Complex64, Execution};

fn arb_string(max_sites: usize) -> impl Strategy<Value = PauliString> {
    (1..=max_sites).prop_flat_map(|n| {
        let full = (1u64 << n) - 1;
        (Just(n), 0..=full, 0..=full, 0i64..4, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(n, x, z, e, re, im)| {
            PauliString::from_masks(n, x, z, Phase::from_exponent(e)).unwrap().with_coeff(Complex64::new(re, im))
        })
    })
}

fn arb_pair() -> impl Strategy<Value = (PauliString, PauliString)> {
    (1usize..=3).prop_flat_map(|n| {
        let full = (1u64 << n) - 1;
        let one = move || {
            (0..=full, 0..=full, 0i64..4)
                .prop_map(move |(x, z, e)| PauliString::from_masks(n, x, z, Phase::from_exponent(e)).unwrap())
        };
        (one(), one())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn product_matches_dense((p, q) in arb_pair()) {
        let pq = p.multiply(&q).unwrap();
        let diff = max_diff(&dense_string(&pq), &(dense_string(&p) * dense_string(&q)));
        prop_assert!(diff <= 1e-14, "{p} * {q} = {pq}: {diff}");
        // phase is exact: a bare product of unit strings is a unit string
        prop_assert_eq!(pq.coeff(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn commutation_matches_dense((p, q) in arb_pair()) {
        let (a, b) = (dense_string(&p), dense_string(&q));
        let comm = max_diff(&(&a * &b), &(&b * &a));
        let anti = max_diff(&(&a * &b), &(-(&b * &a)));
        if p.commutes(&q).unwrap() {
            prop_assert!(comm <= 1e-14 && anti > 1.0);
        } else {
            prop_assert!(anti <= 1e-14 && comm > 1.0);
        }
    }

    #[test]
    fn adjoint_is_conjugate_transpose(p in arb_string(3)) {
        prop_assert!(max_diff(&dense_string(&p.adjoint()), &dense_string(&p).adjoint()) <= 1e-14);
    }

    #[test]
    fn multiplication_associates((p, q) in arb_pair(), e in 0i64..4) {
        let r = PauliString::from_masks(p.n_sites(), q.z_mask(), p.x_mask(), Phase::from_exponent(e)).unwrap();
        let left = p.multiply(&q).unwrap().multiply(&r).unwrap();
        let right = p.multiply(&q.multiply(&r).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }
}

#[test]
fn pauli_commutators_are_cyclic() {
    let s = |t: &str| PauliSum::from_terms(1, [PauliString::parse(t, 1).unwrap()]).unwrap();
    let two_i = |t: &str| s(t).scale(Complex64::new(0.0, 2.0));
    for (a, b, c) in [("X0", "Y0", "Z0"), ("Y0", "Z0", "X0"), ("Z0", "X0", "Y0")] {
        let lhs = s(&format!("+ * {a}")).commutator(&s(&format!("+ * {b}"))).unwrap();
        assert!(lhs.approx_eq(&two_i(&format!("+ * {c}")), 0.0), "[{a},{b}] = {lhs}");
    }
}

#[test]
fn assembly_matches_kronecker_oracle() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for n in 1..=4 {
        for _ in 0..10 {
            let h = random_hermitian(n, 6, &mut rng);
            assert!(h.is_hermitian(1e-14));
            let basis = build_sector_basis(n, Sector::All).unwrap();
            for exec in [Execution::Parallel, Execution::Sequential] {
                let m = assemble_with(&h, &basis, exec).unwrap();
                assert!(max_diff(&m.to_dense(), &dense_sum(&h)) <= 1e-14);
            }
        }
    }
}

#[test]
fn random_spectra_match_dense_oracle() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    for n in [3, 5, 8] {
        let h = random_hermitian(n, 12, &mut rng);
        let m = assemble(&h, &build_sector_basis(n, Sector::All).unwrap()).unwrap();
        let got = spectrum(&m, None, &SolverConfig::default()).unwrap().eigenvalues;
        let want = dense_eigenvalues(&dense_sum(&h));
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn sector_spectra_assemble_the_full_spectrum() {
    for (n, j, b, boundary) in
        [(6, 1.0, 0.3, Boundary::Periodic), (8, 0.7, -0.2, Boundary::Open), (8, 1.3, 0.0, Boundary::Periodic)]
    {
        let p = ChainParams::new(n, j, b, boundary).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let full = assemble(&h, &build_sector_basis(n, Sector::All).unwrap()).unwrap();
        let want = eigh_dense(&full.to_dense()).0;
        let mut got = Vec::new();
        for m in 0..=n {
            let sector = assemble(&h, &build_sector_basis(n, Sector::Magnons(m)).unwrap()).unwrap();
            got.extend(eigh_dense(&sector.to_dense()).0);
        }
        got.sort_by(f64::total_cmp);
        assert_eq!(got.len(), want.len());
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn krylov_agrees_with_dense() {
    let p = ChainParams::periodic(10, 1.0, 0.1).unwrap();
    let h = build_hamiltonian(&p).unwrap();
    let m = assemble(&h, &build_sector_basis(10, Sector::Magnons(5)).unwrap()).unwrap();
    let dense = eigh_dense(&m.to_dense()).0;
    for exec in [Execution::Parallel, Execution::Sequential] {
        let cfg = SolverConfig { dense_threshold: 16, execution: exec, ..SolverConfig::default() };
        let pairs = eigenpairs(&m, Some(6), &cfg).unwrap();
        assert_eq!(pairs.method, SolveMethod::Krylov);
        assert!(pairs.residual_bound <= 1e-10, "{}", pairs.residual_bound);
        for (a, b) in pairs.values.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}

#[test]
fn stacking_matches_kronecker_sum() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let a = random_hermitian(2, 5, &mut rng);
        let b = random_hermitian(2, 5, &mut rng);
        let spec = |h: &PauliSum| dense_eigenvalues(&dense_sum(h));
        // A on sites 0-1, B moved to sites 2-3
        let mut sum = PauliSum::zero(4).unwrap();
        for t in a.terms() {
            sum.push(PauliString::from_masks(4, t.x_mask(), t.z_mask(), t.phase()).unwrap().with_coeff(t.coeff()))
                .unwrap();
        }
        for t in b.terms() {
            sum.push(
                PauliString::from_masks(4, t.x_mask() << 2, t.z_mask() << 2, t.phase()).unwrap().with_coeff(t.coeff()),
            )
            .unwrap();
        }
        let stacked = stack_spectra(&spec(&a), &spec(&b));
        let direct = spec(&sum);
        for (x, y) in stacked.iter().zip(&direct) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}
