//! Invariant suites run by the `check` command and the test targets. Each
//! suite compares an implementation against an independent oracle and
//! reports one outcome per comparison.

use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bernstein::{
    apply_lift_factorized, apply_lift_optimal, barycentric_derivatives, bernstein_mass, build_el,
    dense_derivative_oracle, dense_lift, dense_lift_oracle, BernsteinEvaluator,
};
use crate::error::Result;
use crate::lab::eigen_identities;
use crate::mesh::{build_cube_mesh, build_trace_maps, FaceLink, Mesh};
use crate::nodal::{build_nodes, nodal_to_bernstein, BasisConversion, NodeKind};
use crate::quadrature::SimplexRule;
use crate::solver::{Basis, Discretization, Execution, LiftMode, Materials, ReferenceOperators};
use crate::tensor_index::{
    canonical_ordering, face_layer_ordering, face_trace_indices, index_of, num_tet, num_tri, ReferenceTet,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Index,
    Derivative,
    Mass,
    Lift,
    Eigen,
    Basis,
    Mesh,
    Solver,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Index,
        Suite::Derivative,
        Suite::Mass,
        Suite::Lift,
        Suite::Eigen,
        Suite::Basis,
        Suite::Mesh,
        Suite::Solver,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Index => "index",
            Suite::Derivative => "derivative",
            Suite::Mass => "mass",
            Suite::Lift => "lift",
            Suite::Eigen => "eigen",
            Suite::Basis => "basis",
            Suite::Mesh => "mesh",
            Suite::Solver => "solver",
        }
    }

    /// Degrees the suite accepts; requested degrees outside are skipped.
    pub fn max_degree(self) -> usize {
        match self {
            Suite::Derivative | Suite::Basis => 6,
            Suite::Solver => 4,
            _ => 9,
        }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite '{s}'"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckConfig {
    pub degrees: Vec<usize>,
    pub seed: u64,
    /// Test hook: added to one stored entry of `D^0` before the derivative
    /// oracle comparison.
    pub perturb_d0: Option<f64>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            degrees: (1..=9).collect(),
            seed: 2016,
            perturb_d0: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub degree: Option<usize>,
    pub error: f64,
    pub tol: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, degree: Option<usize>, error: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            degree,
            error,
            tol,
            passed: error <= tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub outcomes: Vec<CheckOutcome>,
    pub skipped: Vec<usize>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

pub fn run_suite(suite: Suite, cfg: &CheckConfig) -> Result<SuiteReport> {
    let (degrees, skipped): (Vec<usize>, Vec<usize>) = cfg
        .degrees
        .iter()
        .partition(|&&n| n >= 1 && n <= suite.max_degree());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut outcomes = Vec::new();
    for &n in &degrees {
        match suite {
            Suite::Index => index_suite(n, &mut outcomes)?,
            Suite::Derivative => derivative_suite(n, cfg.perturb_d0, &mut outcomes)?,
            Suite::Mass => mass_suite(n, &mut outcomes)?,
            Suite::Lift => lift_suite(n, &mut rng, &mut outcomes)?,
            Suite::Eigen => {
                for dim in 1..=3 {
                    for c in eigen_identities(n, dim)?.checks {
                        let name = format!("{}_d{dim}", c.name);
                        outcomes.push(CheckOutcome::new(name, Some(n), c.max_error, c.tol));
                    }
                }
            }
            Suite::Basis => {
                let err = basis_equivalence_error(n, 2, rng.random())?;
                outcomes.push(CheckOutcome::new("rhs_bernstein_vs_nodal", Some(n), err, 1e-9));
                let err = conversion_round_trip_error(n, NodeKind::WarpBlend, rng.random())?;
                outcomes.push(CheckOutcome::new("conversion_round_trip", Some(n), err, 1e-10));
            }
            Suite::Mesh => mesh_suite(n, &mut rng, &mut outcomes)?,
            Suite::Solver => solver_suite(n, &mut rng, &mut outcomes)?,
        }
    }
    Ok(SuiteReport {
        suite,
        outcomes,
        skipped,
    })
}

pub fn run_all(cfg: &CheckConfig) -> Result<Vec<SuiteReport>> {
    Suite::ALL.into_iter().map(|s| run_suite(s, cfg)).collect()
}

fn rel_max(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax().max(f64::MIN_POSITIVE)
}

fn rel_vec(a: &[f64], b: &[f64]) -> f64 {
    let scale = b
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

fn index_suite(n: usize, out: &mut Vec<CheckOutcome>) -> Result<()> {
    let order = canonical_ordering(n)?;
    let bad_size = (order.len() != num_tet(n)) as u8 as f64;
    out.push(CheckOutcome::new("lattice_size", Some(n), bad_size, 0.0));
    let misplaced = order
        .iter()
        .enumerate()
        .filter(|(i, a)| index_of(a) != *i)
        .count();
    out.push(CheckOutcome::new(
        "index_round_trip",
        Some(n),
        misplaced as f64,
        0.0,
    ));
    let mut bad = 0usize;
    for f in 0..4 {
        let trace = face_trace_indices(n, f)?;
        bad += (trace.len() != num_tri(n)) as usize;
        bad += trace.iter().filter(|&&i| order[i][f] != 0).count();
        let layers = face_layer_ordering(n, f)?;
        let mut seen = vec![0u8; num_tet(n)];
        for (j, layer) in layers.layers.iter().enumerate() {
            bad += (layer.len() != num_tri(n - j)) as usize;
            for &i in layer {
                bad += (order[i][f] != j) as usize;
                seen[i] += 1;
            }
        }
        bad += seen.iter().filter(|&&s| s != 1).count();
    }
    out.push(CheckOutcome::new(
        "face_traces_and_layers",
        Some(n),
        bad as f64,
        0.0,
    ));
    Ok(())
}

fn derivative_suite(n: usize, perturb: Option<f64>, out: &mut Vec<CheckOutcome>) -> Result<()> {
    let d = barycentric_derivatives(n)?;
    for i in 0..4 {
        let mut got = d.operator(i).to_dense();
        if let (0, Some(delta)) = (i, perturb) {
            if let Some(v) = got.iter_mut().find(|v| **v != 0.0) {
                *v += delta;
            }
        }
        let err = rel_max(&got, &dense_derivative_oracle(n, i)?);
        out.push(CheckOutcome::new(
            format!("sparse_d{i}_vs_quadrature"),
            Some(n),
            err,
            1e-10,
        ));
    }
    Ok(())
}

/// Mass matrix by quadrature, independent of the closed form.
pub fn quadrature_mass(degree: usize, dim: usize) -> Result<DMatrix<f64>> {
    let rule = SimplexRule::new(dim, 2 * degree)?;
    let mut v = BernsteinEvaluator::new(degree, dim)?.matrix(&rule.barycentric());
    let vt = v.transpose();
    for (q, w) in rule.weights.iter().enumerate() {
        v.row_mut(q).scale_mut(*w);
    }
    Ok(vt * v)
}

fn mass_suite(n: usize, out: &mut Vec<CheckOutcome>) -> Result<()> {
    for dim in 1..=3 {
        let err = rel_max(&bernstein_mass(n, dim)?, &quadrature_mass(n, dim)?);
        out.push(CheckOutcome::new(
            format!("closed_form_mass_d{dim}"),
            Some(n),
            err,
            1e-12,
        ));
    }
    Ok(())
}

fn lift_suite(n: usize, rng: &mut ChaCha8Rng, out: &mut Vec<CheckOutcome>) -> Result<()> {
    let lf = build_el(n)?;
    let dense = dense_lift(n)?;
    let nfp = num_tri(n);
    let mut oracle = DMatrix::zeros(num_tet(n), 4 * nfp);
    for f in 0..4 {
        oracle
            .columns_mut(f * nfp, nfp)
            .copy_from(&dense_lift_oracle(n, f)?);
    }
    out.push(CheckOutcome::new(
        "dense_lift_vs_quadrature",
        Some(n),
        rel_max(&dense, &oracle),
        1e-8,
    ));
    let flux: Vec<f64> = (0..4 * nfp).map(|_| rng.random_range(-1.0..1.0)).collect();
    let want = (&oracle * DVector::from_column_slice(&flux)).as_slice().to_vec();
    let fact = apply_lift_factorized(&lf, &flux)?;
    let opt = apply_lift_optimal(&lf, &flux)?;
    out.push(CheckOutcome::new(
        "factorized_lift_vs_oracle",
        Some(n),
        rel_vec(&fact, &want),
        1e-8,
    ));
    out.push(CheckOutcome::new(
        "optimal_lift_vs_oracle",
        Some(n),
        rel_vec(&opt, &want),
        1e-8,
    ));
    Ok(())
}

/// Random state in Bernstein coefficients on the `n`-cells cube mesh.
fn random_bernstein_state(
    disc: &Discretization<f64>,
    rng: &mut ChaCha8Rng,
) -> crate::solver::FieldState<f64> {
    let mut s = disc.zero_state();
    s.data.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
    s
}

fn cube(cells: usize) -> Result<Arc<Mesh>> {
    Ok(Arc::new(build_cube_mesh(cells, [-0.5; 3], [0.5; 3])?))
}

/// Relative gap between the Bernstein right-hand side mapped to nodal
/// values and the nodal right-hand side of the mapped state.
pub fn basis_equivalence_error(degree: usize, cells: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mesh = cube(cells)?;
    let mat = Materials::uniform(mesh.len(), 1.0, 1.0);
    let bops = Arc::new(ReferenceOperators::new(degree, Basis::Bernstein)?);
    let nops = Arc::new(ReferenceOperators::new(degree, Basis::Nodal)?);
    let conv = BasisConversion::new(&nops.interp_nodes)?;
    let bern = Discretization::<f64>::new(
        bops,
        mesh.clone(),
        mat.clone(),
        LiftMode::Optimal,
        Execution::Sequential,
    )?;
    let nodal = Discretization::<f64>::new(nops, mesh, mat, LiftMode::Dense, Execution::Sequential)?;

    let sb = random_bernstein_state(&bern, &mut rng);
    let to_nodal = |data: &[f64]| -> Vec<f64> {
        data.chunks(conv.to_nodal.ncols())
            .flat_map(|c| {
                (&conv.to_nodal * DVector::from_column_slice(c))
                    .as_slice()
                    .to_vec()
            })
            .collect()
    };
    let mut sn = nodal.zero_state();
    sn.data = to_nodal(&sb.data);
    let mut rb = vec![0.0; sb.data.len()];
    let mut rn = vec![0.0; sn.data.len()];
    bern.rhs(&sb, &mut rb)?;
    nodal.rhs(&sn, &mut rn)?;
    Ok(rel_vec(&to_nodal(&rb), &rn))
}

/// Largest relative gap between the dense lift path and the factorized and
/// optimal paths on one random state.
pub fn lift_mode_equivalence_error(degree: usize, cells: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mesh = cube(cells)?;
    let mat = Materials::uniform(mesh.len(), 1.0, 1.0);
    let ops = Arc::new(ReferenceOperators::new(degree, Basis::Bernstein)?);
    let mut disc = Discretization::<f64>::new(ops, mesh, mat, LiftMode::Dense, Execution::Sequential)?;
    let s = random_bernstein_state(&disc, &mut rng);
    let mut base = vec![0.0; s.data.len()];
    disc.surface_rhs(&s, &mut base)?;
    let mut worst = 0.0f64;
    for mode in [LiftMode::Factorized, LiftMode::Optimal] {
        disc.set_lift_mode(mode)?;
        let mut r = vec![0.0; s.data.len()];
        disc.surface_rhs(&s, &mut r)?;
        worst = worst.max(rel_vec(&r, &base));
    }
    Ok(worst)
}

/// Largest right-hand side entry on elements without boundary faces for a
/// constant state `(p, u) = (1, 0.3, -0.2, 0.5)`.
pub fn gcl_residual(degree: usize, basis: Basis, cells: usize) -> Result<f64> {
    let mesh = cube(cells)?;
    let mat = Materials::uniform(mesh.len(), 1.0, 1.0);
    let ops = Arc::new(ReferenceOperators::new(degree, basis)?);
    let disc = Discretization::<f64>::new(ops, mesh.clone(), mat, LiftMode::Dense, Execution::Sequential)?;
    let s = disc.project(|_| [1.0, 0.3, -0.2, 0.5], 0.0);
    let mut r = vec![0.0; s.data.len()];
    disc.rhs(&s, &mut r)?;
    let stride = s.stride();
    Ok((0..mesh.len())
        .filter(|&k| {
            mesh.links[k]
                .iter()
                .all(|l| matches!(l, FaceLink::Interior { .. }))
        })
        .flat_map(|k| r[k * stride..(k + 1) * stride].iter().map(|v| v.abs()))
        .fold(0.0, f64::max))
}

/// Dense matrix of the semi-discrete operator, one column per unit state.
pub fn assemble_rhs(disc: &Discretization<f64>) -> Result<DMatrix<f64>> {
    let mut s = disc.zero_state();
    let n = s.data.len();
    let mut a = DMatrix::zeros(n, n);
    let mut r = vec![0.0; n];
    for j in 0..n {
        s.data[j] = 1.0;
        disc.rhs(&s, &mut r)?;
        a.column_mut(j).copy_from_slice(&r);
        s.data[j] = 0.0;
    }
    Ok(a)
}

/// Largest real part over the spectrum of the assembled operator.
pub fn rhs_spectral_abscissa(degree: usize, basis: Basis, cells: usize) -> Result<f64> {
    let mesh = cube(cells)?;
    let mat = Materials::uniform(mesh.len(), 1.0, 1.0);
    let ops = Arc::new(ReferenceOperators::new(degree, basis)?);
    let mode = if basis == Basis::Bernstein {
        LiftMode::Optimal
    } else {
        LiftMode::Dense
    };
    let disc = Discretization::<f64>::new(ops, mesh, mat, mode, Execution::Sequential)?;
    let a = assemble_rhs(&disc)?;
    Ok(a.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

fn mesh_suite(n: usize, rng: &mut ChaCha8Rng, out: &mut Vec<CheckOutcome>) -> Result<()> {
    let mesh = cube(2)?;
    if n == 1 {
        let vol: f64 = mesh.geometry.iter().map(|g| g.j * ReferenceTet::VOLUME).sum();
        out.push(CheckOutcome::new("volume_sum", None, (vol - 1.0).abs(), 1e-10));
        let mut normal_gap = 0.0f64;
        for k in 0..mesh.len() {
            for f in 0..4 {
                if let FaceLink::Interior { element, face } = mesh.links[k][f] {
                    let a = mesh.geometry[k].normals[f];
                    let b = mesh.geometry[element].normals[face];
                    normal_gap = normal_gap.max((0..3).map(|d| (a[d] + b[d]).abs()).fold(0.0, f64::max));
                }
            }
        }
        out.push(CheckOutcome::new("opposite_normals", None, normal_gap, 1e-12));
    }
    let err = trace_consistency_error(&mesh, n, rng)?;
    out.push(CheckOutcome::new("trace_permutation", Some(n), err, 1e-9));
    Ok(())
}

/// Evaluates a globally continuous degree-`N` Bernstein field from both
/// sides of every interior face at random face points, reading the
/// neighbour's trace through the trace map.
pub fn trace_consistency_error(mesh: &Mesh, degree: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let ops = ReferenceOperators::new(degree, Basis::Bernstein)?;
    let maps = build_trace_maps(mesh, &ops.points, &ops.face_indices)?;
    let coeff: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    // (a·x + 1)^N is a global polynomial of degree N
    let field = |x: [f64; 3]| (coeff[0] * x[0] + coeff[1] * x[1] + coeff[2] * x[2] + 1.0).powi(degree as i32);
    let nodes = &ops.interp_nodes.points;
    let local = |k: usize| -> DVector<f64> {
        let v = DVector::from_iterator(nodes.len(), nodes.iter().map(|p| field(mesh.map_point(k, *p))));
        &ops.from_nodal * v
    };
    let tri = BernsteinEvaluator::new(degree, 2)?;
    let mut worst = 0.0f64;
    for k in 0..mesh.len() {
        let mine = local(k);
        for f in 0..4 {
            let (Some(perm), FaceLink::Interior { element, face }) = (&maps.maps[k][f], mesh.links[k][f])
            else {
                continue;
            };
            let theirs = local(element);
            let a: Vec<f64> = ops.face_indices[f].iter().map(|&i| mine[i]).collect();
            let b: Vec<f64> = perm
                .iter()
                .map(|&j| theirs[ops.face_indices[face][j as usize]])
                .collect();
            for _ in 0..10 {
                let raw: [f64; 3] = std::array::from_fn(|_| -rng.random::<f64>().max(1e-300).ln());
                let s: f64 = raw.iter().sum();
                let mu = raw.map(|v| v / s);
                let w = tri.eval(&mu);
                let va: f64 = w.iter().zip(&a).map(|(x, y)| x * y).sum();
                let vb: f64 = w.iter().zip(&b).map(|(x, y)| x * y).sum();
                worst = worst.max((va - vb).abs() / va.abs().max(1.0));
            }
        }
    }
    Ok(worst)
}

fn solver_suite(n: usize, rng: &mut ChaCha8Rng, out: &mut Vec<CheckOutcome>) -> Result<()> {
    out.push(CheckOutcome::new(
        "lift_modes_agree",
        Some(n),
        lift_mode_equivalence_error(n, 2, rng.random())?,
        1e-8,
    ));
    for basis in [Basis::Bernstein, Basis::Nodal] {
        let name = format!("gcl_{}", basis.name());
        out.push(CheckOutcome::new(name, Some(n), gcl_residual(n, basis, 3)?, 1e-9));
    }
    if n == 1 {
        let re = rhs_spectral_abscissa(1, Basis::Bernstein, 1)?;
        out.push(CheckOutcome::new(
            "rhs_spectrum_left_half_plane",
            Some(1),
            re.max(0.0),
            1e-8,
        ));
    }
    Ok(())
}

/// Round trip nodal values through Bernstein coefficients on one node set.
pub fn conversion_round_trip_error(degree: usize, kind: NodeKind, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let conv = BasisConversion::new(&build_nodes(degree, kind)?)?;
    let vals: Vec<f64> = (0..conv.to_nodal.nrows())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let coeffs = nodal_to_bernstein(&conv, &vals)?;
    let back = crate::nodal::bernstein_to_nodal(&conv, &coeffs)?;
    Ok(rel_vec(&back, &vals))
}
