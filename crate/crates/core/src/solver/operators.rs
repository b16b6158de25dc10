use nalgebra::DMatrix;

use super::Basis;
use crate::bernstein::{
    barycentric_derivatives, bernstein_mass, build_el, dense_lift, BernsteinDerivativeSet,
    BernsteinEvaluator, LiftFactorization,
};
use crate::error::Result;
use crate::nodal::{
    build_nodal_operators, build_nodes, BasisConversion, NodalOperators, NodeKind, NodeSet,
    DEFAULT_VANDERMONDE_CAP, MAX_WARP_BLEND_DEGREE,
};
use crate::quadrature::SimplexRule;
use crate::tensor_index::{check_degree, face_trace_indices, ReferenceTet, TetLattice};

#[derive(Clone, Debug)]
pub enum OperatorKind {
    Bernstein {
        derivs: BernsteinDerivativeSet,
        lift: LiftFactorization,
        dense_lift: DMatrix<f64>,
    },
    Nodal(NodalOperators),
}

/// Every degree-`N` reference operator of one basis, plus what the solver
/// needs to set up and measure fields: the mass matrix, the nodes used for
/// interpolating initial data, and basis values at a quadrature rule exact
/// to degree `2N + 2`.
#[derive(Clone, Debug)]
pub struct ReferenceOperators {
    pub degree: usize,
    pub basis: Basis,
    /// Reference point tied to each coefficient (lattice point or node),
    /// used to match traces across faces.
    pub points: Vec<[f64; 3]>,
    pub face_indices: [Vec<usize>; 4],
    pub mass: DMatrix<f64>,
    pub interp_nodes: NodeSet,
    /// Maps values at `interp_nodes` to coefficients.
    pub from_nodal: DMatrix<f64>,
    pub quad: SimplexRule,
    /// `quad_eval[q, i]`: basis function `i` at quadrature point `q`.
    pub quad_eval: DMatrix<f64>,
    pub kind: OperatorKind,
}

fn default_nodes(degree: usize) -> Result<NodeSet> {
    let kind = if degree <= MAX_WARP_BLEND_DEGREE {
        NodeKind::WarpBlend
    } else {
        NodeKind::Equispaced
    };
    build_nodes(degree, kind)
}

impl ReferenceOperators {
    pub fn bernstein(degree: usize) -> Result<Self> {
        check_degree(degree)?;
        let points = TetLattice::new(degree)
            .iter()
            .map(ReferenceTet::lattice_point)
            .collect();
        let face_indices = [0, 1, 2, 3].map(|f| face_trace_indices(degree, f).expect("valid face"));
        let interp_nodes = default_nodes(degree)?;
        let from_nodal = BasisConversion::new(&interp_nodes)?.to_bernstein;
        let quad = SimplexRule::new(3, 2 * degree + 2)?;
        let quad_eval = BernsteinEvaluator::new(degree, 3)?.matrix(&quad.barycentric());
        Ok(Self {
            degree,
            basis: Basis::Bernstein,
            points,
            face_indices,
            mass: bernstein_mass(degree, 3)?,
            interp_nodes,
            from_nodal,
            quad,
            quad_eval,
            kind: OperatorKind::Bernstein {
                derivs: barycentric_derivatives(degree)?,
                lift: build_el(degree)?,
                dense_lift: dense_lift(degree)?,
            },
        })
    }

    pub fn nodal(degree: usize, kind: NodeKind) -> Result<Self> {
        let nodes = build_nodes(degree, kind)?;
        let ops = build_nodal_operators(&nodes, DEFAULT_VANDERMONDE_CAP)?;
        let quad = SimplexRule::new(3, 2 * degree + 2)?;
        let quad_eval = ops.interpolation_matrix(&quad.points)?;
        let n = nodes.len();
        Ok(Self {
            degree,
            basis: Basis::Nodal,
            points: nodes.points.clone(),
            face_indices: ops.face_indices.clone(),
            mass: ops.mass.clone(),
            interp_nodes: nodes,
            from_nodal: DMatrix::identity(n, n),
            quad,
            quad_eval,
            kind: OperatorKind::Nodal(ops),
        })
    }

    /// Bernstein operators, or nodal operators on the default node family
    /// (Warp & Blend up to its tabulated degree, equispaced beyond).
    pub fn new(degree: usize, basis: Basis) -> Result<Self> {
        match basis {
            Basis::Bernstein => Self::bernstein(degree),
            Basis::Nodal => {
                check_degree(degree)?;
                Self::nodal(degree, default_nodes(degree)?.kind)
            }
        }
    }

    pub fn np(&self) -> usize {
        self.points.len()
    }

    pub fn nfp(&self) -> usize {
        self.face_indices[0].len()
    }
}
