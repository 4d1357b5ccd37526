use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use tempogauge::cli::prepare;
use tempogauge::config::LatticeConfig;
use tempogauge::constraint::{physical_projector, vacuum_state, VacuumState};
use tempogauge::gauge::{summation_by_parts_residual, ChiFunction, GaugeOperators};
use tempogauge::linalg::OperatorMatrix;
use tempogauge::model::{Lattice, ModelOperators};
use tempogauge::spectra::{omega_states, premise_commutator};

struct Fixture {
    lat: Lattice,
    model: ModelOperators,
    vac: VacuumState,
}

fn fixture() -> &'static Fixture {
    static CELL: OnceLock<Fixture> = OnceLock::new();
    CELL.get_or_init(|| {
        let (lat, model) = prepare(&LatticeConfig::electric(2, 1)).unwrap();
        let sector = physical_projector(&lat, &model).unwrap();
        let vac = vacuum_state(&model, &sector).unwrap();
        Fixture { lat, model, vac }
    })
}

fn gauge(chi: &ChiFunction) -> GaugeOperators {
    let f = fixture();
    GaugeOperators::build(chi, &f.lat, &f.model).unwrap()
}

fn chi_values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.5f64..0.5, 2)
}

fn dense(n: usize) -> impl Strategy<Value = DMatrix<C64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.0f64..1.0), n * n).prop_map(move |v| {
        // keep roughly half the entries so the sparse path sees real sparsity
        DMatrix::from_iterator(n, n, v.into_iter().map(|(re, im, keep)| if keep < 0.5 { C64::new(re, im) } else { C64::new(0.0, 0.0) }))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sparse_ops_match_dense(a in dense(6), b in dense(6), x in prop::collection::vec(-1.0f64..1.0, 6)) {
        let (sa, sb) = (OperatorMatrix::from_dense(&a), OperatorMatrix::from_dense(&b));
        let x: Vec<C64> = x.into_iter().map(|v| C64::new(v, -0.5 * v)).collect();
        let prod = (sa.matmul(&sb).to_dense() - &a * &b).norm();
        let comm = (sa.commutator(&sb).to_dense() - (&a * &b - &b * &a)).norm();
        let adj = (sa.adjoint().to_dense() - a.adjoint()).norm();
        let mv = DMatrix::from_column_slice(6, 1, &sa.matvec(&x)) - &a * DMatrix::from_column_slice(6, 1, &x);
        prop_assert!(prod < 1e-12 && comm < 1e-12 && adj == 0.0 && mv.norm() < 1e-12);
    }

    #[test]
    fn summation_by_parts_holds(values in chi_values()) {
        let chi = ChiFunction::new(values, 1.0);
        prop_assert!(summation_by_parts_residual(&chi, &fixture().lat).unwrap() < 1e-12);
    }

    #[test]
    fn mirror_energies_stay_under_the_premise(values in chi_values()) {
        let f = fixture();
        let g = gauge(&ChiFunction::new(values, 1.0));
        let pair = omega_states(&g, &f.model, &f.vac);
        prop_assert!(pair.mirror_residual <= pair.premise_bound + 1e-8);
    }

    #[test]
    fn global_shift_leaves_the_premise_unchanged(values in chi_values(), shift in -1.0f64..1.0) {
        let f = fixture();
        let chi = ChiFunction::new(values, 1.0);
        let (d, _) = premise_commutator(&gauge(&chi), &f.model);
        let (d_shifted, _) = premise_commutator(&gauge(&chi.shifted(shift)), &f.model);
        prop_assert!((&d - &d_shifted).frobenius_norm() < 1e-10);
    }

    #[test]
    fn omega1_is_omega2_at_opposite_chi(values in chi_values()) {
        let f = fixture();
        let chi = ChiFunction::new(values, 1.0);
        let forward = omega_states(&gauge(&chi), &f.model, &f.vac);
        let backward = omega_states(&gauge(&chi.scaled(-1.0)), &f.model, &f.vac);
        let diff: f64 = forward.omega1.iter().zip(&backward.omega2).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(diff < 1e-10);
        prop_assert!((forward.e1 - backward.e2).abs() < 1e-10);
    }
}
