use approx::assert_abs_diff_eq;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bbdg_core::bernstein::{
    apply_lift_factorized, apply_lift_optimal, barycentric_derivatives, bernstein_mass, build_el,
    dense_derivative_oracle, dense_lift, dense_lift_oracle,
};
use bbdg_core::checks::quadrature_mass;
use bbdg_core::nodal::{build_nodal_operators, build_nodes, NodeKind};
use bbdg_core::tensor_index::{
    canonical_ordering, face_trace_indices, index_of, num_tet, num_tri, MultiIndex, SimplexLattice,
};

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn index_round_trip(degree in 1usize..=15, seed in any::<u64>()) {
        let lattice = SimplexLattice::<4>::new(degree);
        prop_assert_eq!(lattice.len(), num_tet(degree));
        let pos = (seed as usize) % lattice.len();
        let alpha = lattice.get(pos);
        prop_assert_eq!(alpha.degree(), degree);
        prop_assert_eq!(index_of(&alpha), pos);
    }

    #[test]
    fn shifted_indices_stay_in_the_lattice(degree in 1usize..=10, pos in any::<usize>(), i in 0usize..4, j in 0usize..4) {
        let ordering = canonical_ordering(degree).unwrap();
        let alpha = ordering[pos % ordering.len()];
        if let Some(beta) = alpha.shifted(i, j) {
            prop_assert_eq!(beta.degree(), degree);
            prop_assert_eq!(ordering[index_of(&beta)], beta);
        } else {
            prop_assert!(i != j && alpha.0[j] == 0);
        }
    }
}

#[test]
fn ordering_is_graded_reverse_lex() {
    let ord = canonical_ordering(2).unwrap();
    assert_eq!(ord[0], MultiIndex([2, 0, 0, 0]));
    assert_eq!(ord[1], MultiIndex([1, 1, 0, 0]));
    assert_eq!(*ord.last().unwrap(), MultiIndex([0, 0, 0, 2]));
}

#[test]
fn face_traces_have_zero_face_component() {
    for degree in 1..=9 {
        let ord = canonical_ordering(degree).unwrap();
        for f in 0..4 {
            let idx = face_trace_indices(degree, f).unwrap();
            assert_eq!(idx.len(), num_tri(degree));
            assert!(idx.iter().all(|&i| ord[i].0[f] == 0));
        }
    }
    assert!(face_trace_indices(3, 4).is_err());
}

#[test]
fn derivative_of_one_is_degree() {
    for degree in 1..=9 {
        let set = barycentric_derivatives(degree).unwrap();
        let np = num_tet(degree);
        for i in 0..4 {
            let mut y = vec![0.0; np];
            set.operator(i).apply(&vec![1.0; np], &mut y).unwrap();
            assert!(y.iter().all(|v| (v - degree as f64).abs() < 1e-13));
            assert!(set.operator(i).max_row_nnz() <= 4);
        }
    }
}

#[test]
fn sparse_derivatives_match_quadrature() {
    for degree in 1..=6 {
        let set = barycentric_derivatives(degree).unwrap();
        for i in 0..4 {
            let oracle = dense_derivative_oracle(degree, i).unwrap();
            let d = set.operator(i).to_dense();
            assert!(
                (d - &oracle).amax() < 1e-10 * oracle.amax().max(1.0),
                "N={degree} i={i}"
            );
        }
    }
}

#[test]
fn closed_form_mass_matches_quadrature() {
    for dim in 1..=3 {
        for degree in 1..=6 {
            let m = bernstein_mass(degree, dim).unwrap();
            let q = quadrature_mass(degree, dim).unwrap();
            assert!((m - &q).amax() < 1e-12, "N={degree} d={dim}");
        }
    }
}

#[test]
fn reference_mass_integrates_to_volume() {
    let m = bernstein_mass(4, 3).unwrap();
    assert_abs_diff_eq!(m.sum(), 4.0 / 3.0, epsilon = 1e-13);
}

#[test]
fn lift_paths_agree_with_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for degree in 1..=9 {
        let lf = build_el(degree).unwrap();
        let dense = dense_lift(degree).unwrap();
        let flux: Vec<f64> = (0..4 * num_tri(degree))
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let reference = (&dense * DVector::from_column_slice(&flux)).as_slice().to_vec();
        let scale = reference.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let fact = apply_lift_factorized(&lf, &flux).unwrap();
        let opt = apply_lift_optimal(&lf, &flux).unwrap();
        assert!(
            max_abs_diff(&fact, &reference) < 1e-9 * scale,
            "factorized N={degree}"
        );
        assert!(
            max_abs_diff(&opt, &reference) < 1e-9 * scale,
            "optimal N={degree}"
        );
    }
}

#[test]
fn dense_lift_matches_quadrature_blocks() {
    for degree in 1..=5 {
        let lf = build_el(degree).unwrap();
        for f in 0..4 {
            let oracle = dense_lift_oracle(degree, f).unwrap();
            let block = lf.lift_face(f).unwrap();
            assert!(
                (block - &oracle).amax() < 1e-9 * oracle.amax(),
                "N={degree} f={f}"
            );
        }
    }
}

#[test]
fn nodal_derivatives_annihilate_constants() {
    for degree in 1..=9 {
        let nodes = build_nodes(degree, NodeKind::WarpBlend).unwrap();
        let ops = build_nodal_operators(&nodes, 1e8).unwrap();
        for d in [&ops.dr, &ops.ds, &ops.dt] {
            let row_sums = d * DVector::from_element(d.ncols(), 1.0);
            assert!(row_sums.amax() < 1e-10 * d.amax(), "N={degree}");
        }
    }
}

#[test]
fn nodal_derivative_is_exact_on_linears() {
    let nodes = build_nodes(5, NodeKind::WarpBlend).unwrap();
    let ops = build_nodal_operators(&nodes, 1e8).unwrap();
    let r = DVector::from_iterator(nodes.len(), nodes.points.iter().map(|p| p[0]));
    let dr = &ops.dr * &r;
    assert!(dr.iter().all(|v| (v - 1.0).abs() < 1e-11));
    let ds = &ops.ds * &r;
    assert!(ds.amax() < 1e-11);
}
