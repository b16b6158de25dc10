//! Tetrahedral meshes of boxes, affine geometric factors, face connectivity
//! and trace matching by physical coordinates.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::tensor_index::ReferenceTet;

/// Per-element affine geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementGeometry {
    /// `g[i][j] = ∂r_j / ∂x_i`, so `∇p = G ∇̂p`.
    pub g: [[f64; 3]; 3],
    /// Volume ratio to the reference tetrahedron.
    pub j: f64,
    pub volume: f64,
    /// Outward unit normal of each face.
    pub normals: [[f64; 3]; 4],
    /// Face area ratio to the reference triangle (area 2).
    pub face_j: [f64; 4],
    /// Smallest altitude.
    pub h: f64,
}

/// Neighbour across a face, or the domain boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceLink {
    Interior { element: usize, face: usize },
    Boundary,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub tets: Vec<[usize; 4]>,
    pub geometry: Vec<ElementGeometry>,
    pub links: Vec<[FaceLink; 4]>,
}

/// Summary record for reports.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshStats {
    pub elements: usize,
    pub vertices: usize,
    pub h_min: f64,
    pub h_max: f64,
    pub volume: f64,
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// Affine geometry of one tetrahedron with vertices `v`.
pub fn element_geometry(v: [[f64; 3]; 4]) -> Option<ElementGeometry> {
    // columns of the Jacobian ∂x/∂(r,s,t)
    let cols = [
        sub(v[1], v[0]).map(|x| 0.5 * x),
        sub(v[2], v[0]).map(|x| 0.5 * x),
        sub(v[3], v[0]).map(|x| 0.5 * x),
    ];
    let a = nalgebra::Matrix3::from_columns(&cols.map(nalgebra::Vector3::from));
    let j = a.determinant();
    let scale = cols.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    if j.abs() <= 1e-14 * scale.powi(3) {
        return None;
    }
    let inv = a.try_inverse()?;
    let g: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|jj| inv[(jj, i)]));
    // ∇λ_m in physical space
    let mut grad = [[0.0; 3]; 4];
    for m in 1..4 {
        for i in 0..3 {
            grad[m][i] = 0.5 * g[i][m - 1];
            grad[0][i] -= 0.5 * g[i][m - 1];
        }
    }
    let volume = j.abs() * ReferenceTet::VOLUME;
    let mut normals = [[0.0; 3]; 4];
    let mut face_j = [0.0; 4];
    let mut h = f64::INFINITY;
    for f in 0..4 {
        let norm = grad[f].iter().map(|x| x * x).sum::<f64>().sqrt();
        normals[f] = grad[f].map(|x| -x / norm);
        face_j[f] = 3.0 * volume * norm / ReferenceTet::FACE_AREA;
        h = h.min(1.0 / norm);
    }
    Some(ElementGeometry {
        g,
        j,
        volume,
        normals,
        face_j,
        h,
    })
}

impl Mesh {
    /// Builds geometry and connectivity; negatively oriented tets are
    /// flipped by swapping their last two vertices.
    pub fn new(vertices: Vec<[f64; 3]>, mut tets: Vec<[usize; 4]>) -> Result<Self> {
        if tets.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let mut geometry = Vec::with_capacity(tets.len());
        for (k, t) in tets.iter_mut().enumerate() {
            if t.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::Parse(format!("element {k} references a missing vertex")));
            }
            let v = |t: &[usize; 4]| t.map(|i| vertices[i]);
            if det3(
                sub(vertices[t[1]], vertices[t[0]]),
                sub(vertices[t[2]], vertices[t[0]]),
                sub(vertices[t[3]], vertices[t[0]]),
            ) < 0.0
            {
                t.swap(2, 3);
            }
            geometry.push(element_geometry(v(t)).ok_or(Error::DegenerateElement(k))?);
        }

        let mut faces: HashMap<[usize; 3], (usize, usize)> = HashMap::new();
        let mut links = vec![[FaceLink::Boundary; 4]; tets.len()];
        for (k, t) in tets.iter().enumerate() {
            for f in 0..4 {
                let mut key = ReferenceTet::face_vertices(f).map(|m| t[m]);
                key.sort_unstable();
                if let Some((k2, f2)) = faces.remove(&key) {
                    links[k][f] = FaceLink::Interior {
                        element: k2,
                        face: f2,
                    };
                    links[k2][f2] = FaceLink::Interior { element: k, face: f };
                } else {
                    faces.insert(key, (k, f));
                }
            }
        }
        Ok(Self {
            vertices,
            tets,
            geometry,
            links,
        })
    }

    pub fn len(&self) -> usize {
        self.tets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tets.is_empty()
    }

    /// Physical image of a reference point in element `k`.
    pub fn map_point(&self, k: usize, p: [f64; 3]) -> [f64; 3] {
        let l = ReferenceTet::barycentric(p);
        let t = self.tets[k];
        let mut x = [0.0; 3];
        for (m, &lm) in l.iter().enumerate() {
            for d in 0..3 {
                x[d] += lm * self.vertices[t[m]][d];
            }
        }
        x
    }

    pub fn h_min(&self) -> f64 {
        self.geometry.iter().map(|g| g.h).fold(f64::INFINITY, f64::min)
    }

    /// Time-step length scale `min_k min_f J^k / J^f`, which is half the
    /// smallest altitude.
    pub fn dt_length(&self) -> f64 {
        self.geometry
            .iter()
            .flat_map(|g| g.face_j.iter().map(move |fj| g.j / fj))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn stats(&self) -> MeshStats {
        MeshStats {
            elements: self.len(),
            vertices: self.vertices.len(),
            h_min: self.h_min(),
            h_max: self.geometry.iter().map(|g| g.h).fold(0.0, f64::max),
            volume: self.geometry.iter().map(|g| g.volume).sum(),
        }
    }

    /// ASCII form: `nv nt`, then one vertex per line, then one tet per line
    /// with 0-based vertex ids.
    pub fn to_ascii(&self) -> String {
        let mut out = format!("{} {}\n", self.vertices.len(), self.tets.len());
        for v in &self.vertices {
            writeln!(out, "{:.16e} {:.16e} {:.16e}", v[0], v[1], v[2]).unwrap();
        }
        for t in &self.tets {
            writeln!(out, "{} {} {} {}", t[0], t[1], t[2], t[3]).unwrap();
        }
        out
    }

    pub fn from_ascii(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let mut next = |what: &str| {
            tokens
                .next()
                .ok_or_else(|| Error::Parse(format!("unexpected end of input reading {what}")))
        };
        let count = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| Error::Parse(format!("'{s}': {e}")))
        };
        let nv = count(next("vertex count")?)?;
        let nt = count(next("tet count")?)?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let mut v = [0.0; 3];
            for x in &mut v {
                let s = next("vertex")?;
                *x = s.parse().map_err(|e| Error::Parse(format!("'{s}': {e}")))?;
            }
            vertices.push(v);
        }
        let mut tets = Vec::with_capacity(nt);
        for _ in 0..nt {
            let mut t = [0usize; 4];
            for x in &mut t {
                *x = count(next("tet")?)?;
            }
            tets.push(t);
        }
        Self::new(vertices, tets)
    }
}

/// `n³` cubes on the box `[lo, hi]`, each split into the six tetrahedra
/// around its main diagonal. `K = 6 n³`.
pub fn build_cube_mesh(n: usize, lo: [f64; 3], hi: [f64; 3]) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::EmptyMesh);
    }
    let np = n + 1;
    let id = |i: usize, j: usize, k: usize| i + np * (j + np * k);
    let mut vertices = Vec::with_capacity(np * np * np);
    for k in 0..np {
        for j in 0..np {
            for i in 0..np {
                let c = [i, j, k];
                vertices.push(std::array::from_fn(|d| {
                    lo[d] + (hi[d] - lo[d]) * c[d] as f64 / n as f64
                }));
            }
        }
    }
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut tets = Vec::with_capacity(6 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for perm in PERMS {
                    let mut c = [i, j, k];
                    let mut t = [id(c[0], c[1], c[2]); 4];
                    for (m, &axis) in perm.iter().enumerate() {
                        c[axis] += 1;
                        t[m + 1] = id(c[0], c[1], c[2]);
                    }
                    tets.push(t);
                }
            }
        }
    }
    Mesh::new(vertices, tets)
}

/// For each element face, either the neighbour's trace positions aligned
/// with the local ordering, or `None` on the boundary.
#[derive(Clone, Debug)]
pub struct TraceMaps {
    pub nfp: usize,
    /// `maps[k][f][i]` is the neighbour trace slot matching local slot `i`.
    pub maps: Vec<[Option<Vec<u32>>; 4]>,
}

/// Matches face points of neighbouring elements by physical coordinates.
///
/// `points` are the reference points tied to each coefficient (lattice
/// points for Bernstein, nodes for the nodal basis) and `face_indices[f]`
/// lists the coefficient positions on face `f`.
pub fn build_trace_maps(
    mesh: &Mesh,
    points: &[[f64; 3]],
    face_indices: &[Vec<usize>; 4],
) -> Result<TraceMaps> {
    let nfp = face_indices[0].len();
    let phys = |k: usize, f: usize| -> Vec<[f64; 3]> {
        face_indices[f]
            .iter()
            .map(|&i| mesh.map_point(k, points[i]))
            .collect()
    };
    let mut maps = Vec::with_capacity(mesh.len());
    for k in 0..mesh.len() {
        let mut local: [Option<Vec<u32>>; 4] = Default::default();
        for f in 0..4 {
            if let FaceLink::Interior { element, face } = mesh.links[k][f] {
                let tol = 1e-10 * mesh.geometry[k].h;
                let mine = phys(k, f);
                let theirs = phys(element, face);
                let mut perm = Vec::with_capacity(nfp);
                for x in &mine {
                    let hit = theirs
                        .iter()
                        .position(|y| (0..3).all(|d| (x[d] - y[d]).abs() <= tol));
                    perm.push(hit.ok_or(Error::NonConforming { element: k, face: f })? as u32);
                }
                local[f] = Some(perm);
            }
        }
        maps.push(local);
    }
    Ok(TraceMaps { nfp, maps })
}
