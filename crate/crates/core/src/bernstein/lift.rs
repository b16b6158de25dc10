use nalgebra::DMatrix;

use super::{bernstein_mass, degree_elevation, degree_reduction, face_mass, BernsteinEvaluator};
use crate::error::{Error, Result};
use crate::quadrature::SimplexRule;
use crate::scalar::Real;
use crate::sparse::{OpCounter, SparseRowOperator};
use crate::tensor_index::{
    binomial, check_degree, check_face, face_layer_ordering, face_trace_indices, num_tet, num_tri,
    FaceLayerOrdering, ReferenceTet,
};

/// Layer scalings `ℓ_i = (-1)^i C(N, i) / (1 + i)`, `i = 0..=N`.
pub fn lift_scalings(degree: usize) -> Vec<f64> {
    (0..=degree)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(degree, i) as f64 / (1 + i) as f64
        })
        .collect()
}

/// `L_0 = (N+1)²/2 · (E^{N+1}_N)ᵀ E^{N+1}_N` on the face lattice.
pub fn build_l0(degree: usize) -> Result<SparseRowOperator> {
    check_degree(degree)?;
    let e = degree_elevation(degree + 1, 2)?.to_dense();
    let scale = ((degree + 1) * (degree + 1)) as f64 / 2.0;
    let l0 = e.transpose() * e * scale;
    Ok(SparseRowOperator::from_dense(&l0, 0.0))
}

/// The Bernstein lift in factored form `L^f = E_L^f L_0`.
///
/// `el` is the full `N_p × 4 N^f_p` reduction matrix with face `f` in block
/// column `f`. `reductions[k]` maps degree `N-k` face coefficients to degree
/// `N-k-1`; the optimal path cascades them instead of touching `el`.
#[derive(Clone, Debug)]
pub struct LiftFactorization<T = f64> {
    degree: usize,
    l0: SparseRowOperator<T>,
    el: SparseRowOperator<T>,
    scalings: Vec<T>,
    reductions: Vec<SparseRowOperator<T>>,
    layers: Vec<FaceLayerOrdering>,
}

/// Builds `L_0`, `E_L`, the scalings and the one-degree reductions.
pub fn build_el(degree: usize) -> Result<LiftFactorization> {
    check_degree(degree)?;
    let nfp = num_tri(degree);
    let np = num_tet(degree);
    let scalings = lift_scalings(degree);
    let reductions: Vec<SparseRowOperator> = (0..degree)
        .map(|k| degree_reduction(degree - k, 2))
        .collect::<Result<_>>()?;

    // blocks[j] = ℓ_j (E^N_{N-j})ᵀ
    let mut blocks = Vec::with_capacity(degree + 1);
    let mut cur = DMatrix::<f64>::identity(nfp, nfp);
    blocks.push(cur.clone());
    for (k, red) in reductions.iter().enumerate() {
        cur = red.to_dense() * cur;
        blocks.push(&cur * scalings[k + 1]);
    }

    let layers: Vec<FaceLayerOrdering> = (0..4)
        .map(|f| face_layer_ordering(degree, f))
        .collect::<Result<_>>()?;
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); np];
    for (f, ordering) in layers.iter().enumerate() {
        for (j, layer) in ordering.layers.iter().enumerate() {
            for (k, &pos) in layer.iter().enumerate() {
                for c in 0..nfp {
                    let v = blocks[j][(k, c)];
                    if v != 0.0 {
                        rows[pos].push((f * nfp + c, v));
                    }
                }
            }
        }
    }
    Ok(LiftFactorization {
        degree,
        l0: build_l0(degree)?,
        el: SparseRowOperator::from_rows(4 * nfp, &rows),
        scalings,
        reductions,
        layers,
    })
}

impl LiftFactorization<f64> {
    /// Dense `E_L^f` (`N_p × N^f_p`).
    pub fn el_face(&self, face: usize) -> Result<DMatrix<f64>> {
        check_face(face)?;
        let nfp = self.nfp();
        Ok(self.el.to_dense().columns(face * nfp, nfp).into_owned())
    }

    /// Dense `L^f = E_L^f L_0`.
    pub fn lift_face(&self, face: usize) -> Result<DMatrix<f64>> {
        Ok(self.el_face(face)? * self.l0.to_dense())
    }
}

impl<T: Real> LiftFactorization<T> {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn np(&self) -> usize {
        self.el.n_rows()
    }

    pub fn nfp(&self) -> usize {
        self.l0.n_rows()
    }

    pub fn l0(&self) -> &SparseRowOperator<T> {
        &self.l0
    }

    pub fn el(&self) -> &SparseRowOperator<T> {
        &self.el
    }

    pub fn scalings(&self) -> &[T] {
        &self.scalings
    }

    pub fn reductions(&self) -> &[SparseRowOperator<T>] {
        &self.reductions
    }

    pub fn layers(&self, face: usize) -> &FaceLayerOrdering {
        &self.layers[face]
    }

    pub fn cast<U: Real>(&self) -> LiftFactorization<U> {
        LiftFactorization {
            degree: self.degree,
            l0: self.l0.cast(),
            el: self.el.cast(),
            scalings: self.scalings.iter().map(|v| U::from_f64(v.to_f64())).collect(),
            reductions: self.reductions.iter().map(|r| r.cast()).collect(),
            layers: self.layers.clone(),
        }
    }

    /// `out += Σ_f E_L^f L_0 flux_f`; `flux` holds the four face vectors
    /// back to back.
    pub fn factorized_add(
        &self,
        flux: &[T],
        out: &mut [T],
        scratch: &mut LiftScratch<T>,
        counter: &mut impl OpCounter,
    ) {
        let nfp = self.nfp();
        let faces = &mut scratch.faces;
        faces.iter_mut().for_each(|v| *v = T::ZERO);
        for f in 0..4 {
            self.l0.apply_add(
                &flux[f * nfp..(f + 1) * nfp],
                &mut faces[f * nfp..(f + 1) * nfp],
                counter,
            );
        }
        self.el.apply_add(faces, out, counter);
    }

    /// Same result as [`Self::factorized_add`], computed per face as one
    /// `L_0` product followed by `N` cascaded one-degree reductions, layer
    /// `j` written with scaling `ℓ_j`.
    pub fn optimal_add(
        &self,
        flux: &[T],
        out: &mut [T],
        scratch: &mut LiftScratch<T>,
        counter: &mut impl OpCounter,
    ) {
        let nfp = self.nfp();
        let LiftScratch { a, b, .. } = scratch;
        for f in 0..4 {
            let layers = &self.layers[f].layers;
            a[..nfp].iter_mut().for_each(|v| *v = T::ZERO);
            self.l0
                .apply_add(&flux[f * nfp..(f + 1) * nfp], &mut a[..nfp], counter);
            for (k, &pos) in layers[0].iter().enumerate() {
                out[pos] += a[k];
            }
            let mut len = nfp;
            for (j, red) in self.reductions.iter().enumerate() {
                let next = red.n_rows();
                b[..next].iter_mut().for_each(|v| *v = T::ZERO);
                red.apply_add(&a[..len], &mut b[..next], counter);
                let s = self.scalings[j + 1];
                for (k, &pos) in layers[j + 1].iter().enumerate() {
                    out[pos] += s * b[k];
                }
                counter.add(next as u64);
                std::mem::swap(a, b);
                len = next;
            }
        }
    }
}

/// Work buffers for the lift paths, sized for one degree.
#[derive(Clone, Debug)]
pub struct LiftScratch<T> {
    faces: Vec<T>,
    a: Vec<T>,
    b: Vec<T>,
}

impl<T: Real> LiftScratch<T> {
    pub fn new(degree: usize) -> Self {
        let nfp = num_tri(degree);
        Self {
            faces: vec![T::ZERO; 4 * nfp],
            a: vec![T::ZERO; nfp],
            b: vec![T::ZERO; nfp],
        }
    }
}

fn check_flux<T>(lf: &LiftFactorization<T>, flux: &[T]) -> Result<()>
where
    T: Real,
{
    if flux.len() != 4 * lf.nfp() {
        return Err(Error::SizeMismatch {
            expected: 4 * lf.nfp(),
            got: flux.len(),
        });
    }
    Ok(())
}

/// `Σ_f L^f flux_f` through `E_L (I_4 ⊗ L_0)`.
pub fn apply_lift_factorized<T: Real>(lf: &LiftFactorization<T>, flux: &[T]) -> Result<Vec<T>> {
    check_flux(lf, flux)?;
    let mut out = vec![T::ZERO; lf.np()];
    lf.factorized_add(flux, &mut out, &mut LiftScratch::new(lf.degree()), &mut ());
    Ok(out)
}

/// `Σ_f L^f flux_f` through the cascaded reductions.
pub fn apply_lift_optimal<T: Real>(lf: &LiftFactorization<T>, flux: &[T]) -> Result<Vec<T>> {
    check_flux(lf, flux)?;
    let mut out = vec![T::ZERO; lf.np()];
    lf.optimal_add(flux, &mut out, &mut LiftScratch::new(lf.degree()), &mut ());
    Ok(out)
}

/// Dense `L = M^{-1} [M^f_0 | M^f_1 | M^f_2 | M^f_3]` from the closed-form
/// mass matrices, each `M^f` embedded at the trace rows of face `f`.
pub fn dense_lift(degree: usize) -> Result<DMatrix<f64>> {
    check_degree(degree)?;
    let m = bernstein_mass(degree, 3)?;
    let mf = face_mass(degree)?;
    let nfp = mf.nrows();
    let mut rhs = DMatrix::zeros(m.nrows(), 4 * nfp);
    for f in 0..4 {
        for (k, pos) in face_trace_indices(degree, f)?.into_iter().enumerate() {
            for c in 0..nfp {
                rhs[(pos, f * nfp + c)] = mf[(k, c)];
            }
        }
    }
    let chol = m.cholesky().ok_or(Error::Singular("bernstein mass"))?;
    Ok(chol.solve(&rhs))
}

/// Quadrature-built `L^f = M^{-1} M^f` for one face, independent of the
/// closed-form mass matrices.
pub fn dense_lift_oracle(degree: usize, face: usize) -> Result<DMatrix<f64>> {
    check_degree(degree)?;
    check_face(face)?;
    let vol = BernsteinEvaluator::new(degree, 3)?;
    let tri = BernsteinEvaluator::new(degree, 2)?;

    let rule3 = SimplexRule::new(3, 2 * degree)?;
    let v = vol.matrix(&rule3.barycentric());
    let mut m = DMatrix::zeros(vol.len(), vol.len());
    for (q, w) in rule3.weights.iter().enumerate() {
        let row = v.row(q);
        m += row.transpose() * row * *w;
    }

    let rule2 = SimplexRule::new(2, 2 * degree)?;
    let mut c = DMatrix::zeros(vol.len(), tri.len());
    for (mu, w) in rule2.barycentric().iter().zip(&rule2.weights) {
        let lam = ReferenceTet::face_to_volume(face, [mu[0], mu[1], mu[2]]);
        let bv = vol.eval(&lam);
        let bt = tri.eval(mu);
        for a in 0..vol.len() {
            for b in 0..tri.len() {
                c[(a, b)] += w * bv[a] * bt[b];
            }
        }
    }
    let lu = m.lu();
    lu.solve(&c).ok_or(Error::Singular("quadrature mass"))
}
