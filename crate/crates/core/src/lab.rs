//! Operator diagnostics: condition numbers, entry extrema, sparsity,
//! the mass and lift eigenvalue identities, and counted multiply-add
//! complexity.

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::bernstein::{
    barycentric_derivatives, bernstein_mass, build_el, build_l0, degree_elevation, dense_lift,
    elevation_dense, mass_eigenvalue, modal_transform, mode_multiplicity, LiftScratch,
};
use crate::error::{Error, Result};
use crate::modal::modal_indices;
use crate::nodal::{build_nodal_operators, build_nodes, NodeKind, DEFAULT_VANDERMONDE_CAP};
use crate::sparse::{DenseOperator, MaddCount};
use crate::tensor_index::{check_degree, lattice_tuples, num_tri, rank_of};

/// Singular values below this fraction of `σ₁` count as zero.
pub const RANK_CUT: f64 = 1e-10;

/// `σ₁ / σ_r` with `σ_r` the smallest singular value above the rank cut.
pub fn condition_number(a: &DMatrix<f64>) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::ZeroOperator);
    }
    let sv = a.clone().singular_values();
    let max = sv.max();
    if !(max > 0.0) {
        return Err(Error::ZeroOperator);
    }
    let min = sv
        .iter()
        .copied()
        .filter(|&s| s > RANK_CUT * max)
        .fold(max, f64::min);
    Ok(max / min)
}

/// Entry extrema over all entries and over the structural nonzeros.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extrema {
    pub min: f64,
    pub max: f64,
    pub min_nonzero: f64,
    pub max_nonzero: f64,
}

pub fn entry_extrema(a: &DMatrix<f64>) -> Extrema {
    let fold = |it: &mut dyn Iterator<Item = f64>| {
        it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
    };
    let (min, max) = fold(&mut a.iter().copied());
    let (min_nonzero, max_nonzero) = fold(&mut a.iter().copied().filter(|&v| v != 0.0));
    Extrema {
        min,
        max,
        min_nonzero,
        max_nonzero,
    }
}

/// Nonzeros per row (max, mean), ignoring entries below `1e-12 · max|a|`.
pub fn row_nnz(a: &DMatrix<f64>) -> (usize, f64) {
    let tol = 1e-12 * a.amax();
    let counts: Vec<usize> = a
        .row_iter()
        .map(|r| r.iter().filter(|v| v.abs() > tol).count())
        .collect();
    let max = counts.iter().copied().max().unwrap_or(0);
    let mean = counts.iter().sum::<usize>() as f64 / counts.len().max(1) as f64;
    (max, mean)
}

/// Operator families with condition, extrema and sparsity reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorFamily {
    /// Barycentric derivative `D^0`.
    BernsteinDerivative,
    /// Face lift `L^f = M⁻¹ M^f` for face 0.
    BernsteinLift,
    /// Face reduction matrix `E_L^f` for face 0.
    BernsteinLiftReduction,
    /// All four faces `E_L = (E_L^0 | … | E_L^3)`.
    BernsteinLiftReductionFull,
    BernsteinL0,
    /// Nodal `D^r`.
    NodalDerivative,
    /// Nodal face lift for face 0.
    NodalLift,
}

impl OperatorFamily {
    pub const ALL: [OperatorFamily; 7] = [
        Self::BernsteinDerivative,
        Self::BernsteinLift,
        Self::BernsteinLiftReduction,
        Self::BernsteinLiftReductionFull,
        Self::BernsteinL0,
        Self::NodalDerivative,
        Self::NodalLift,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::BernsteinDerivative => "bernstein_d0",
            Self::BernsteinLift => "bernstein_lift",
            Self::BernsteinLiftReduction => "bernstein_el_face",
            Self::BernsteinLiftReductionFull => "bernstein_el",
            Self::BernsteinL0 => "bernstein_l0",
            Self::NodalDerivative => "nodal_dr",
            Self::NodalLift => "nodal_lift",
        }
    }

    pub fn is_nodal(self) -> bool {
        matches!(self, Self::NodalDerivative | Self::NodalLift)
    }
}

impl FromStr for OperatorFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown operator '{s}'"))
    }
}

/// Dense matrix of one operator family. Nodal families use `nodes`.
pub fn operator_matrix(family: OperatorFamily, degree: usize, nodes: NodeKind) -> Result<DMatrix<f64>> {
    check_degree(degree)?;
    Ok(match family {
        OperatorFamily::BernsteinDerivative => barycentric_derivatives(degree)?.operator(0).to_dense(),
        OperatorFamily::BernsteinLift => build_el(degree)?.lift_face(0)?,
        OperatorFamily::BernsteinLiftReduction => build_el(degree)?.el_face(0)?,
        OperatorFamily::BernsteinLiftReductionFull => build_el(degree)?.el().to_dense(),
        OperatorFamily::BernsteinL0 => build_l0(degree)?.to_dense(),
        OperatorFamily::NodalDerivative => nodal(degree, nodes)?.dr,
        OperatorFamily::NodalLift => nodal(degree, nodes)?.lift_face(0),
    })
}

fn nodal(degree: usize, nodes: NodeKind) -> Result<crate::nodal::NodalOperators> {
    build_nodal_operators(&build_nodes(degree, nodes)?, DEFAULT_VANDERMONDE_CAP)
}

/// Diagnostics of one operator at one degree.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorReport {
    pub operator: OperatorFamily,
    pub degree: usize,
    pub rows: usize,
    pub cols: usize,
    pub nnz_max: usize,
    pub nnz_mean: f64,
    pub cond: f64,
    pub extrema: Extrema,
    /// Node family for nodal operators.
    pub nodes: Option<NodeKind>,
    /// Sorted eigenvalues of symmetric operators (`L_0`).
    pub eigenvalues: Option<Vec<f64>>,
}

/// Builds the report; nodal families fall back to equispaced nodes above
/// the Warp & Blend table.
pub fn operator_report(family: OperatorFamily, degree: usize) -> Result<OperatorReport> {
    let nodes = match build_nodes(degree, NodeKind::WarpBlend) {
        Ok(_) => NodeKind::WarpBlend,
        Err(Error::UnsupportedNodeDegree(_)) => NodeKind::Equispaced,
        Err(e) => return Err(e),
    };
    let a = operator_matrix(family, degree, nodes)?;
    let (nnz_max, nnz_mean) = row_nnz(&a);
    let eigenvalues = (family == OperatorFamily::BernsteinL0).then(|| sorted_eigenvalues(&a));
    Ok(OperatorReport {
        operator: family,
        degree,
        rows: a.nrows(),
        cols: a.ncols(),
        nnz_max,
        nnz_mean,
        cond: condition_number(&a)?,
        extrema: entry_extrema(&a),
        nodes: family.is_nodal().then_some(nodes),
        eigenvalues,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub const REPORT_CSV_HEADER: &str = "operator,N,cond,min,max,nnz_max,slope";

/// Report rows as CSV; `slope` is the log-log growth rate of the
/// condition number over the rows of the same operator.
pub fn reports_csv(reports: &[OperatorReport]) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for r in reports {
        let same: Vec<&OperatorReport> = reports.iter().filter(|o| o.operator == r.operator).collect();
        let slope = if same.len() >= 2 {
            let x: Vec<f64> = same.iter().map(|o| o.degree as f64).collect();
            let y: Vec<f64> = same.iter().map(|o| o.cond).collect();
            format!("{:.16e}", loglog_slope(&x, &y))
        } else {
            String::new()
        };
        writeln!(
            out,
            "{},{},{:.16e},{:.16e},{:.16e},{},{}",
            r.operator.name(),
            r.degree,
            r.cond,
            r.extrema.min,
            r.extrema.max,
            r.nnz_max,
            slope
        )
        .unwrap();
    }
    out
}

fn sorted_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(a.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Outcome of one identity check.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    /// Largest relative (diagonal) or absolute (off-diagonal) deviation.
    pub max_error: f64,
    pub tol: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenReport {
    pub degree: usize,
    pub dim: usize,
    pub checks: Vec<IdentityCheck>,
}

impl EigenReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub const EIGEN_TOL: f64 = 1e-8;

fn check(name: &'static str, max_error: f64, tol: f64) -> IdentityCheck {
    IdentityCheck {
        name,
        max_error,
        tol,
        passed: max_error <= tol,
    }
}

/// Largest relative gap between two sorted lists (infinite on a length
/// mismatch).
fn list_error(got: &[f64], want: &[f64]) -> f64 {
    if got.len() != want.len() {
        return f64::INFINITY;
    }
    got.iter()
        .zip(want)
        .map(|(g, w)| (g - w).abs() / w.abs())
        .fold(0.0, f64::max)
}

/// Expected spectrum of `L_0` in dimension `d`: `(N+i+d)(N+1-i)/2` with the
/// multiplicity of degree-`i` modes on the `(d-1)`-simplex.
pub fn l0_eigenvalues_expected(degree: usize, dim: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..=degree {
        let v = ((degree + i + dim) * (degree + 1 - i)) as f64 / 2.0;
        let mult = if dim == 1 {
            usize::from(i == 0)
        } else {
            mode_multiplicity(i, dim - 1)
        };
        out.extend(std::iter::repeat_n(v, mult));
    }
    out.sort_by(f64::total_cmp);
    out
}

/// `(N+1)²/2 · (E^{N+1}_N)ᵀ E^{N+1}_N` on the `(d-1)`-simplex.
fn l0_dense(degree: usize, dim: usize) -> Result<DMatrix<f64>> {
    let scale = ((degree + 1) * (degree + 1)) as f64 / 2.0;
    if dim == 1 {
        return Ok(DMatrix::from_element(1, 1, scale));
    }
    let e = degree_elevation(degree + 1, dim - 1)?.to_dense();
    Ok(e.transpose() * e * scale)
}

/// Face mass of face 0 embedded in the volume rows of the trace.
fn embedded_face_mass(degree: usize, dim: usize) -> Result<DMatrix<f64>> {
    let vol = lattice_tuples(degree, dim + 1);
    let mf = if dim == 1 {
        DMatrix::from_element(1, 1, 1.0)
    } else {
        bernstein_mass(degree, dim - 1)?
    };
    let trace: Vec<(usize, usize)> = vol
        .iter()
        .enumerate()
        .filter(|(_, a)| a[0] == 0)
        .map(|(pos, a)| (pos, rank_of(&a[1..])))
        .collect();
    let mut out = DMatrix::zeros(vol.len(), vol.len());
    for &(p, a) in &trace {
        for &(q, b) in &trace {
            out[(p, q)] = mf[(a, b)];
        }
    }
    Ok(out)
}

/// Checks the mass, `L_0`, generalized lift and modal reduction identities
/// for degree `N` in dimension `d`.
pub fn eigen_identities(degree: usize, dim: usize) -> Result<EigenReport> {
    check_degree(degree)?;
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidDimension(dim));
    }
    let mut checks = Vec::new();

    let m = bernstein_mass(degree, dim)?;
    let mut want = Vec::new();
    for i in 0..=degree {
        let v = mass_eigenvalue(degree, i, dim)?;
        want.extend(std::iter::repeat_n(v, mode_multiplicity(i, dim)));
    }
    want.sort_by(f64::total_cmp);
    checks.push(check(
        "mass_eigenvalues",
        list_error(&sorted_eigenvalues(&m), &want),
        EIGEN_TOL,
    ));

    let l0_eigs = sorted_eigenvalues(&l0_dense(degree, dim)?);
    let l0_want = l0_eigenvalues_expected(degree, dim);
    checks.push(check("l0_eigenvalues", list_error(&l0_eigs, &l0_want), EIGEN_TOL));

    // M^f u = λ M u through the symmetric form L⁻¹ M^f L⁻ᵀ with M = L Lᵀ
    let chol = m.clone().cholesky().ok_or(Error::Singular("bernstein mass"))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or(Error::Singular("cholesky factor"))?;
    let s = &linv * embedded_face_mass(degree, dim)? * linv.transpose();
    let s = (&s + s.transpose()) * 0.5;
    let gen = sorted_eigenvalues(&s);
    let top = gen.iter().copied().fold(0.0, f64::max);
    let nonzero: Vec<f64> = gen.into_iter().filter(|v| v.abs() > RANK_CUT * top).collect();
    checks.push(check(
        "generalized_lift_eigenvalues",
        list_error(&nonzero, &l0_eigs),
        EIGEN_TOL,
    ));

    let (diag, off) = modal_reduction_error(degree, dim)?;
    checks.push(check("modal_reduction_diagonal", diag, EIGEN_TOL));
    checks.push(check("modal_reduction_off_diagonal", off, EIGEN_TOL));
    Ok(EigenReport { degree, dim, checks })
}

/// For `i = 1..=N`, `T_{N-i}⁻¹ (E^N_{N-i})ᵀ T_N` against the rectangular
/// diagonal `λ^{N-i}_k / λ^N_k`. Returns the largest relative diagonal and
/// absolute off-diagonal deviations.
fn modal_reduction_error(degree: usize, dim: usize) -> Result<(f64, f64)> {
    let t_hi = modal_transform(degree, dim)?;
    let modes = modal_indices(degree, dim)?;
    let (mut diag, mut off) = (0.0f64, 0.0f64);
    for i in 1..=degree {
        let lo = degree - i;
        let t_lo_inv = modal_transform(lo, dim)?
            .try_inverse()
            .ok_or(Error::Singular("modal transform"))?;
        let d = t_lo_inv * elevation_dense(degree, i, dim)?.transpose() * &t_hi;
        for r in 0..d.nrows() {
            for c in 0..d.ncols() {
                if r == c {
                    let k: usize = modes[r].iter().sum();
                    let want = mass_eigenvalue(lo, k, dim)? / mass_eigenvalue(degree, k, dim)?;
                    diag = diag.max((d[(r, c)] - want).abs() / want);
                } else {
                    off = off.max(d[(r, c)].abs());
                }
            }
        }
    }
    Ok((diag, off))
}

/// Per-element kernels whose multiply-adds are counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// `N_p × 4 N^f_p` dense lift.
    DenseLift,
    /// `E_L (I_4 ⊗ L_0)` as two sparse products.
    FactorizedLift,
    /// `L_0` then cascaded one-degree reductions.
    OptimalLift,
    /// The four barycentric derivatives through the 4-wide sparse rows.
    SparseDerivative,
    /// Three dense `N_p × N_p` reference derivatives.
    DenseDerivative,
}

impl KernelKind {
    pub const ALL: [KernelKind; 5] = [
        Self::DenseLift,
        Self::FactorizedLift,
        Self::OptimalLift,
        Self::SparseDerivative,
        Self::DenseDerivative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::DenseLift => "dense_lift",
            Self::FactorizedLift => "factorized_lift",
            Self::OptimalLift => "optimal_lift",
            Self::SparseDerivative => "sparse_derivative",
            Self::DenseDerivative => "dense_derivative",
        }
    }
}

impl FromStr for KernelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown kernel '{s}'"))
    }
}

/// Multiply-adds of one application to a single scalar field on one
/// element, counted along the real apply path.
pub fn count_madds(kind: KernelKind, degree: usize) -> Result<u64> {
    check_degree(degree)?;
    let nfp = num_tri(degree);
    let mut count = MaddCount::default();
    match kind {
        KernelKind::DenseLift => {
            let op = DenseOperator::<f64>::from_matrix(&dense_lift(degree)?);
            let mut out = vec![0.0; op.n_rows()];
            op.apply_add(&vec![1.0; 4 * nfp], &mut out, &mut count);
        }
        KernelKind::FactorizedLift | KernelKind::OptimalLift => {
            let lf = build_el(degree)?;
            let mut out = vec![0.0; lf.np()];
            let mut scratch = LiftScratch::new(degree);
            let flux = vec![1.0; 4 * nfp];
            if kind == KernelKind::FactorizedLift {
                lf.factorized_add(&flux, &mut out, &mut scratch, &mut count);
            } else {
                lf.optimal_add(&flux, &mut out, &mut scratch, &mut count);
            }
        }
        KernelKind::SparseDerivative => {
            let d = barycentric_derivatives(degree)?;
            let np = d.len();
            let x = vec![1.0; np];
            let mut bufs: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; np]);
            let [a, b, c, e] = &mut bufs;
            d.apply_all(&x, [a, b, c, e], &mut count);
        }
        KernelKind::DenseDerivative => {
            let d = barycentric_derivatives(degree)?;
            let d0 = d.operator(0).to_dense();
            for i in 1..4 {
                let op = DenseOperator::<f64>::from_matrix(&((d.operator(i).to_dense() - &d0) * 0.5));
                let mut out = vec![0.0; op.n_rows()];
                op.apply_add(&vec![1.0; op.n_cols()], &mut out, &mut count);
            }
        }
    }
    Ok(count.0)
}

/// Counted multiply-adds over a degree range and their log-log slope.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexitySweep {
    pub kernel: KernelKind,
    pub degrees: Vec<usize>,
    pub madds: Vec<u64>,
    pub slope: f64,
}

pub fn complexity_sweep(kind: KernelKind, degrees: &[usize]) -> Result<ComplexitySweep> {
    let madds = degrees
        .iter()
        .map(|&n| count_madds(kind, n))
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = degrees.iter().map(|&n| n as f64).collect();
    let y: Vec<f64> = madds.iter().map(|&m| m as f64).collect();
    let slope = if degrees.len() >= 2 {
        loglog_slope(&x, &y)
    } else {
        f64::NAN
    };
    Ok(ComplexitySweep {
        kernel: kind,
        degrees: degrees.to_vec(),
        madds,
        slope,
    })
}

pub const COMPLEXITY_CSV_HEADER: &str = "kernel,N,madds,slope";

pub fn complexity_csv(sweeps: &[ComplexitySweep]) -> String {
    let mut out = String::from(COMPLEXITY_CSV_HEADER);
    out.push('\n');
    for s in sweeps {
        for (n, m) in s.degrees.iter().zip(&s.madds) {
            writeln!(out, "{},{},{},{:.16e}", s.kernel.name(), n, m, s.slope).unwrap();
        }
    }
    out
}
