//! Barycentric multi-indices, the reference tetrahedron, and the face and
//! layer orderings shared by every operator.
//!
//! Multi-indices of total degree `N` are enumerated in graded
//! reverse-lexicographic order: the first component runs from `N` down to
//! `0` and varies slowest, the remaining components follow the same rule
//! recursively. For a tetrahedron of degree 2 the order starts
//! `(2,0,0,0), (1,1,0,0), (1,0,1,0), (1,0,0,1), (0,2,0,0), ...`.
//! Sparse operators store raw positions into this order, so it is frozen.
//!
//! Face `f` of the tetrahedron is the face on which `λ_f = 0`, i.e. the face
//! opposite vertex `f`. Restricting a tetrahedral multi-index to a face drops
//! component `f` and keeps the remaining three in increasing vertex order.

use std::ops::Index;

use crate::error::{Error, Result};
use crate::{MAX_DEGREE, MIN_DEGREE};

/// A barycentric exponent tuple with `P` components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex<const P: usize>(pub [usize; P]);

/// Exponents `(a0, a1, a2, a3)` of a tetrahedral Bernstein polynomial.
pub type MultiIndex4 = MultiIndex<4>;
/// Exponents of a triangular (face) Bernstein polynomial.
pub type MultiIndex3 = MultiIndex<3>;

impl<const P: usize> MultiIndex<P> {
    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    /// `self + e_plus - e_minus`, or `None` if a component would go negative.
    pub fn shifted(&self, plus: usize, minus: usize) -> Option<Self> {
        let mut out = self.0;
        out[plus] += 1;
        if out[minus] == 0 {
            return None;
        }
        out[minus] -= 1;
        Some(Self(out))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl<const P: usize> Index<usize> for MultiIndex<P> {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

impl MultiIndex4 {
    /// Drops component `face`, giving the face-local multi-index.
    pub fn on_face(&self, face: usize) -> MultiIndex3 {
        let mut out = [0; 3];
        let mut k = 0;
        for (m, &a) in self.0.iter().enumerate() {
            if m != face {
                out[k] = a;
                k += 1;
            }
        }
        MultiIndex(out)
    }

    /// Inverse of [`MultiIndex4::on_face`]: inserts `value` at position `face`.
    pub fn from_face(local: MultiIndex3, face: usize, value: usize) -> Self {
        let mut out = [0; 4];
        let mut k = 0;
        for (m, slot) in out.iter_mut().enumerate() {
            if m == face {
                *slot = value;
            } else {
                *slot = local.0[k];
                k += 1;
            }
        }
        MultiIndex(out)
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Multinomial coefficient `|α|! / Π α_m!`.
pub(crate) fn multinomial(alpha: &[usize]) -> u128 {
    let mut total = 0;
    let mut acc: u128 = 1;
    for &a in alpha {
        total += a;
        acc *= binomial(total, a);
    }
    acc
}

/// Number of multi-indices with `parts` components summing to `degree`.
pub fn lattice_size(degree: usize, parts: usize) -> usize {
    if parts == 0 {
        return 0;
    }
    binomial(degree + parts - 1, parts - 1) as usize
}

/// `N_p = (N+1)(N+2)(N+3)/6`.
pub fn num_tet(degree: usize) -> usize {
    lattice_size(degree, 4)
}

/// `N^f_p = (N+1)(N+2)/2`.
pub fn num_tri(degree: usize) -> usize {
    lattice_size(degree, 3)
}

pub fn check_degree(degree: usize) -> Result<()> {
    if (MIN_DEGREE..=MAX_DEGREE).contains(&degree) {
        Ok(())
    } else {
        Err(Error::DegreeOutOfRange(degree))
    }
}

pub fn check_face(face: usize) -> Result<()> {
    if face < 4 {
        Ok(())
    } else {
        Err(Error::InvalidFace(face))
    }
}

/// All multi-indices of one degree in canonical order, with `O(P)` lookup.
#[derive(Clone, Debug)]
pub struct SimplexLattice<const P: usize> {
    degree: usize,
    tuples: Vec<MultiIndex<P>>,
}

pub type TetLattice = SimplexLattice<4>;
pub type TriLattice = SimplexLattice<3>;

impl<const P: usize> SimplexLattice<P> {
    /// Degree 0 is allowed here: degree reductions cascade down to it.
    pub fn new(degree: usize) -> Self {
        let mut tuples = Vec::with_capacity(lattice_size(degree, P));
        let mut current = [0usize; P];
        fill::<P>(degree, 0, &mut current, &mut tuples);
        Self { degree, tuples }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuples(&self) -> &[MultiIndex<P>] {
        &self.tuples
    }

    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex<P>> {
        self.tuples.iter()
    }

    pub fn get(&self, pos: usize) -> MultiIndex<P> {
        self.tuples[pos]
    }

    /// Position of `alpha`, or `None` if its degree does not match.
    pub fn position(&self, alpha: &MultiIndex<P>) -> Option<usize> {
        if alpha.degree() != self.degree {
            return None;
        }
        Some(rank(&alpha.0, self.degree))
    }
}

fn fill<const P: usize>(
    remaining: usize,
    slot: usize,
    current: &mut [usize; P],
    out: &mut Vec<MultiIndex<P>>,
) {
    if slot + 1 == P {
        current[slot] = remaining;
        out.push(MultiIndex(*current));
        return;
    }
    for a in (0..=remaining).rev() {
        current[slot] = a;
        fill::<P>(remaining - a, slot + 1, current, out);
    }
}

/// Closed-form position in graded reverse-lex order. The tuples whose
/// leading component exceeds `a0` number `C(n - a0 + P - 2, P - 1)`.
fn rank(alpha: &[usize], degree: usize) -> usize {
    let mut pos = 0;
    let mut n = degree;
    let parts = alpha.len();
    for (m, &a) in alpha.iter().enumerate().take(parts - 1) {
        let rest = parts - m;
        pos += binomial(n - a + rest - 2, rest - 1) as usize;
        n -= a;
    }
    pos
}

/// Canonical position of a multi-index with any number of components.
pub(crate) fn rank_of(alpha: &[usize]) -> usize {
    rank(alpha, alpha.iter().sum())
}

/// Degree-`N` multi-indices with `parts` components, in canonical order.
pub(crate) fn lattice_tuples(degree: usize, parts: usize) -> Vec<Vec<usize>> {
    match parts {
        2 => SimplexLattice::<2>::new(degree)
            .iter()
            .map(|a| a.0.to_vec())
            .collect(),
        3 => TriLattice::new(degree).iter().map(|a| a.0.to_vec()).collect(),
        4 => TetLattice::new(degree).iter().map(|a| a.0.to_vec()).collect(),
        _ => panic!("unsupported lattice width {parts}"),
    }
}

/// Every degree-`N` tetrahedral multi-index in canonical order.
pub fn canonical_ordering(degree: usize) -> Result<Vec<MultiIndex4>> {
    check_degree(degree)?;
    Ok(TetLattice::new(degree).tuples)
}

/// Canonical position of `alpha`; the exact inverse of [`canonical_ordering`].
pub fn index_of(alpha: &MultiIndex4) -> usize {
    rank(&alpha.0, alpha.degree())
}

/// Positions of the multi-indices with `α_f = 0`, in the 2-D canonical order
/// of the remaining three exponents.
pub fn face_trace_indices(degree: usize, face: usize) -> Result<Vec<usize>> {
    check_degree(degree)?;
    check_face(face)?;
    Ok(layer_positions(degree, face, 0))
}

fn layer_positions(degree: usize, face: usize, layer: usize) -> Vec<usize> {
    TriLattice::new(degree - layer)
        .iter()
        .map(|&local| index_of(&MultiIndex4::from_face(local, face, layer)))
        .collect()
}

/// Volume positions of a tetrahedron sliced parallel to one face.
///
/// `layers[j]` holds the positions with `α_f = j`, ordered like the
/// degree `N - j` face lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceLayerOrdering {
    pub face: usize,
    pub degree: usize,
    pub layers: Vec<Vec<usize>>,
}

impl FaceLayerOrdering {
    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }
}

pub fn face_layer_ordering(degree: usize, face: usize) -> Result<FaceLayerOrdering> {
    check_degree(degree)?;
    check_face(face)?;
    let layers = (0..=degree).map(|j| layer_positions(degree, face, j)).collect();
    Ok(FaceLayerOrdering { face, degree, layers })
}

/// The bi-unit reference tetrahedron `r, s, t ≥ -1, r + s + t ≤ -1`.
pub struct ReferenceTet;

impl ReferenceTet {
    pub const VERTICES: [[f64; 3]; 4] = [
        [-1.0, -1.0, -1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ];
    pub const VOLUME: f64 = 4.0 / 3.0;
    /// Area of the reference triangle every face mass matrix is measured on.
    pub const FACE_AREA: f64 = 2.0;

    pub fn barycentric(p: [f64; 3]) -> [f64; 4] {
        let [r, s, t] = p;
        [
            -(1.0 + r + s + t) / 2.0,
            (1.0 + r) / 2.0,
            (1.0 + s) / 2.0,
            (1.0 + t) / 2.0,
        ]
    }

    pub fn from_barycentric(l: [f64; 4]) -> [f64; 3] {
        [2.0 * l[1] - 1.0, 2.0 * l[2] - 1.0, 2.0 * l[3] - 1.0]
    }

    /// Vertex ids of face `f`, in increasing order.
    pub fn face_vertices(face: usize) -> [usize; 3] {
        let mut out = [0; 3];
        let mut k = 0;
        for v in 0..4 {
            if v != face {
                out[k] = v;
                k += 1;
            }
        }
        out
    }

    /// Volume barycentric coordinates of a point given in face barycentrics.
    pub fn face_to_volume(face: usize, mu: [f64; 3]) -> [f64; 4] {
        let mut l = [0.0; 4];
        for (k, v) in Self::face_vertices(face).into_iter().enumerate() {
            l[v] = mu[k];
        }
        l
    }

    /// Equispaced lattice point associated with a multi-index.
    pub fn lattice_point(alpha: &MultiIndex4) -> [f64; 3] {
        let n = alpha.degree() as f64;
        let l = [
            alpha[0] as f64 / n,
            alpha[1] as f64 / n,
            alpha[2] as f64 / n,
            alpha[3] as f64 / n,
        ];
        Self::from_barycentric(l)
    }
}
