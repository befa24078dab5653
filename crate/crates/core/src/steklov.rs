//! Discrete Dirichlet-to-Neumann operators and Steklov eigenproblems.
//!
//! The stiffness matrix is partitioned into boundary and interior blocks,
//! the interior block is factored by sparse Cholesky, and the boundary
//! Schur complement `L = K_bb - K_bi K_ii^{-1} K_ib` acts as the discrete
//! Dirichlet-to-Neumann map. Steklov eigenpairs solve `L y = sigma M_b y`
//! with the boundary edge mass `M_b`; the generalized problem is reduced to
//! a symmetric standard one through the dense Cholesky factor of `M_b`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use nalgebra_sparse::coo::CooMatrix;
use nalgebra_sparse::csc::CscMatrix;
use nalgebra_sparse::factorization::CscCholesky;

use crate::error::{Error, Result};
use crate::fem::{assemble_boundary_mass, assemble_stiffness, SparseSymMatrix};
use crate::mesh::TriangleMesh;

/// Boundary/interior splitting of a stiffness matrix with the interior
/// block factored, ready to build Schur complements and harmonic
/// extensions.
pub struct DtnFactor {
    pub boundary: Vec<usize>,
    pub interior: Vec<usize>,
    chol: Option<CscCholesky<f64>>,
    k_ib: CscMatrix<f64>,
    k_bb: DMatrix<f64>,
    dim: usize,
}

impl DtnFactor {
    pub fn new(stiffness: &SparseSymMatrix, boundary: &[usize]) -> Result<Self> {
        let n = stiffness.dimension();
        if boundary.is_empty() {
            return Err(Error::Solver("boundary index set is empty".into()));
        }
        if boundary.windows(2).any(|w| w[0] >= w[1]) || *boundary.last().unwrap() >= n {
            return Err(Error::Solver(
                "boundary indices must be strictly increasing and in range".into(),
            ));
        }
        let nb = boundary.len();
        let mut is_boundary = vec![false; n];
        for &b in boundary {
            is_boundary[b] = true;
        }
        let interior: Vec<usize> = (0..n).filter(|&v| !is_boundary[v]).collect();
        let ni = interior.len();
        // Position of each vertex inside its block.
        let mut pos = vec![0usize; n];
        for (p, &b) in boundary.iter().enumerate() {
            pos[b] = p;
        }
        for (p, &i) in interior.iter().enumerate() {
            pos[i] = p;
        }

        let mut k_bb = DMatrix::zeros(nb, nb);
        let mut coo_ii = CooMatrix::new(ni, ni);
        let mut coo_ib = CooMatrix::new(ni, nb);
        for (r, c, v) in stiffness.triplet_iter() {
            match (is_boundary[r], is_boundary[c]) {
                (true, true) => k_bb[(pos[r], pos[c])] += v,
                (false, false) => coo_ii.push(pos[r], pos[c], v),
                (false, true) => coo_ib.push(pos[r], pos[c], v),
                // The (boundary, interior) block is the transpose of
                // (interior, boundary) by symmetry; skip it.
                (true, false) => {}
            }
        }
        let chol = if ni > 0 {
            let csc = CscMatrix::from(&coo_ii);
            Some(CscCholesky::factor(&csc).map_err(|e| {
                Error::Solver(format!(
                    "interior stiffness block is not positive definite: {e:?}"
                ))
            })?)
        } else {
            None
        };
        Ok(DtnFactor {
            boundary: boundary.to_vec(),
            interior,
            chol,
            k_ib: CscMatrix::from(&coo_ib),
            k_bb,
            dim: n,
        })
    }

    /// The boundary Schur complement `K_bb - K_bi K_ii^{-1} K_ib`
    /// (symmetric up to factorization roundoff).
    pub fn schur_complement(&self) -> DMatrix<f64> {
        let nb = self.boundary.len();
        let mut l = self.k_bb.clone();
        let Some(chol) = &self.chol else {
            return l;
        };
        let ni = self.interior.len();
        for j in 0..nb {
            let col = self.k_ib.col(j);
            if col.nnz() == 0 {
                continue;
            }
            let mut rhs = DMatrix::zeros(ni, 1);
            for (r, v) in col.row_indices().iter().zip(col.values()) {
                rhs[(*r, 0)] = *v;
            }
            let x = chol.solve(&rhs);
            for i in 0..nb {
                let ci = self.k_ib.col(i);
                let mut acc = 0.0;
                for (r, v) in ci.row_indices().iter().zip(ci.values()) {
                    acc += *v * x[(*r, 0)];
                }
                l[(i, j)] -= acc;
            }
        }
        l
    }

    /// Harmonic extension of boundary values: solves
    /// `K_ii v_i = -K_ib v_b` and scatters both blocks into a full-length
    /// vertex function.
    pub fn extend(&self, boundary_values: &[f64]) -> Result<Vec<f64>> {
        let nb = self.boundary.len();
        if boundary_values.len() != nb {
            return Err(Error::Solver(format!(
                "got {} boundary values for {} boundary vertices",
                boundary_values.len(),
                nb
            )));
        }
        let mut out = vec![0.0; self.dim];
        for (p, &b) in self.boundary.iter().enumerate() {
            out[b] = boundary_values[p];
        }
        if let Some(chol) = &self.chol {
            let ni = self.interior.len();
            let mut rhs = DMatrix::zeros(ni, 1);
            for j in 0..nb {
                let col = self.k_ib.col(j);
                for (r, v) in col.row_indices().iter().zip(col.values()) {
                    rhs[(*r, 0)] -= *v * boundary_values[j];
                }
            }
            let x = chol.solve(&rhs);
            for (p, &i) in self.interior.iter().enumerate() {
                out[i] = x[(p, 0)];
            }
        }
        Ok(out)
    }
}

/// Discrete Dirichlet-to-Neumann operator on the given boundary vertices.
pub fn dtn_operator(stiffness: &SparseSymMatrix, boundary: &[usize]) -> Result<DMatrix<f64>> {
    Ok(DtnFactor::new(stiffness, boundary)?.schur_complement())
}

/// Harmonic extension of boundary data through a stiffness matrix.
pub fn harmonic_extension(
    stiffness: &SparseSymMatrix,
    boundary: &[usize],
    values: &[f64],
) -> Result<Vec<f64>> {
    DtnFactor::new(stiffness, boundary)?.extend(values)
}

/// A group of nearby eigenvalues reported as one multiple eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    /// Index of the first member in the sorted spectrum.
    pub start: usize,
    pub multiplicity: usize,
    /// Mean of the member eigenvalues.
    pub value: f64,
}

/// The lower Steklov spectrum of a mesh: eigenvalues ascending, boundary
/// traces `M_b`-orthonormal, and the harmonic extension of every mode.
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Sorted boundary vertex ids; row `p` of `boundary_modes` belongs to
    /// vertex `boundary[p]`.
    pub boundary: Vec<usize>,
    /// One column per mode.
    pub boundary_modes: DMatrix<f64>,
    /// One full-length vertex function per mode.
    pub extensions: Vec<Vec<f64>>,
    pub mesh_name: String,
}

impl Spectrum {
    pub fn num_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Group the sorted eigenvalues: a new cluster starts whenever the gap
    /// to the previous eigenvalue exceeds `tol * (1 + |sigma|)`.
    pub fn clusters(&self, tol: f64) -> Vec<Cluster> {
        let mut out = Vec::new();
        let ev = &self.eigenvalues;
        let mut start = 0;
        for i in 1..=ev.len() {
            let split = i == ev.len() || ev[i] - ev[i - 1] > tol * (1.0 + ev[i].abs());
            if split {
                let members = &ev[start..i];
                out.push(Cluster {
                    start,
                    multiplicity: members.len(),
                    value: members.iter().sum::<f64>() / members.len() as f64,
                });
                start = i;
            }
        }
        out
    }

    /// The first cluster strictly above the zero mode, if the requested
    /// mode count reached it.
    pub fn sigma1_cluster(&self, tol: f64) -> Option<Cluster> {
        self.clusters(tol).into_iter().nth(1)
    }
}

/// Fix a representative sign: the entry of largest magnitude (first such
/// index on exact ties) is made positive.
pub(crate) fn canonical_sign(values: &[f64]) -> f64 {
    let mut best = 0usize;
    let mut best_abs = f64::NEG_INFINITY;
    for (k, v) in values.iter().enumerate() {
        if v.abs() > best_abs {
            best_abs = v.abs();
            best = k;
        }
    }
    if values[best] < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Restrict a (boundary-supported) sparse matrix to dense form on the
/// boundary index set.
pub(crate) fn boundary_block(m: &SparseSymMatrix, boundary: &[usize]) -> DMatrix<f64> {
    let nb = boundary.len();
    let mut pos = vec![usize::MAX; m.dimension()];
    for (p, &b) in boundary.iter().enumerate() {
        pos[b] = p;
    }
    let mut out = DMatrix::zeros(nb, nb);
    for (r, c, v) in m.triplet_iter() {
        if pos[r] != usize::MAX && pos[c] != usize::MAX {
            out[(pos[r], pos[c])] += v;
        }
    }
    out
}

/// Relative gap below which adjacent discrete eigenvalues are treated as
/// one exactly degenerate multiplet that must never be cut by the mode
/// count. Exact multiplets on a symmetric mesh agree to ~1e-12; physically
/// distinct eigenvalues split by discretization at the 1e-3 scale.
const DEGENERACY_GAP: f64 = 1e-9;

/// Solve the Steklov eigenproblem on a mesh and return the lowest
/// `num_modes` eigenpairs. The count is rounded up past the request while
/// the next eigenvalue is exactly degenerate with the last one kept, so a
/// multiplet is never returned in part: its members are arbitrary rotations
/// of one another, and a truncated multiplet could not be analyzed further.
pub fn steklov_spectrum(mesh: &TriangleMesh, num_modes: usize) -> Result<Spectrum> {
    let boundary = mesh.boundary_vertices();
    if boundary.is_empty() {
        return Err(Error::Mesh(format!("mesh {} has no boundary", mesh.name)));
    }
    if num_modes == 0 || num_modes > boundary.len() {
        return Err(Error::Config(format!(
            "requested {num_modes} modes; the boundary has {} vertices",
            boundary.len()
        )));
    }
    let stiffness = assemble_stiffness(mesh)?;
    let mass = assemble_boundary_mass(mesh)?;
    let factor = DtnFactor::new(&stiffness, &boundary)?;
    let l_raw = factor.schur_complement();
    let l_sym = 0.5 * (&l_raw + &l_raw.transpose());
    let mb = boundary_block(&mass, &boundary);

    let chol_m = Cholesky::new(mb).ok_or_else(|| {
        Error::Solver("boundary mass matrix is not positive definite".into())
    })?;
    let c = chol_m.l();
    // A = C^{-1} L C^{-T}, the symmetric standard form of L y = sigma M y.
    let t = c
        .solve_lower_triangular(&l_sym)
        .ok_or_else(|| Error::Solver("singular boundary mass factor".into()))?;
    let a = c
        .solve_lower_triangular(&t.transpose())
        .ok_or_else(|| Error::Solver("singular boundary mass factor".into()))?;
    let a = 0.5 * (&a + &a.transpose());
    let eig = SymmetricEigen::new(a);

    let nb = boundary.len();
    let mut order: Vec<usize> = (0..nb).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let mut keep = num_modes;
    while keep < nb {
        let (prev, next) = (eig.eigenvalues[order[keep - 1]], eig.eigenvalues[order[keep]]);
        if next - prev > DEGENERACY_GAP * (1.0 + next.abs()) {
            break;
        }
        keep += 1;
    }
    order.truncate(keep);

    let mut eigenvalues = Vec::with_capacity(keep);
    let mut boundary_modes = DMatrix::zeros(nb, keep);
    let mut extensions = Vec::with_capacity(keep);
    for (m, &k) in order.iter().enumerate() {
        eigenvalues.push(eig.eigenvalues[k]);
        let q = eig.eigenvectors.column(k).into_owned();
        // Back-substitute to a boundary trace: y = C^{-T} q.
        let y: DVector<f64> = c
            .tr_solve_lower_triangular(&q)
            .ok_or_else(|| Error::Solver("singular boundary mass factor".into()))?;
        let sign = canonical_sign(y.as_slice());
        let y = y * sign;
        let ext = factor.extend(y.as_slice())?;
        boundary_modes.set_column(m, &y);
        extensions.push(ext);
    }
    Ok(Spectrum {
        eigenvalues,
        boundary,
        boundary_modes,
        extensions,
        mesh_name: mesh.name.clone(),
    })
}

/// Rayleigh quotient `u^T K u / u^T M_b u` of a vertex function.
pub fn rayleigh_quotient(mesh: &TriangleMesh, u: &[f64]) -> Result<f64> {
    let k = assemble_stiffness(mesh)?;
    let m = assemble_boundary_mass(mesh)?;
    let num = k.quadratic_form(u, u)?;
    let den = m.quadratic_form(u, u)?;
    if !den.is_finite() || den <= 0.0 {
        return Err(Error::Solver(format!(
            "boundary norm {den} is not positive; Rayleigh quotient undefined"
        )));
    }
    Ok(num / den)
}

/// How far the coordinate functions are from satisfying `L x = M_b x`,
/// the discrete form of the free boundary condition on the unit sphere.
/// Returns one relative residual per coordinate; a coordinate whose trace
/// vanishes identically (e.g. the normal coordinate of a planar surface)
/// yields `None`. Errors if the boundary does not lie on the unit sphere.
pub fn coordinate_residual(mesh: &TriangleMesh) -> Result<[Option<f64>; 3]> {
    let boundary = mesh.boundary_vertices();
    if boundary.is_empty() {
        return Err(Error::Mesh(format!("mesh {} has no boundary", mesh.name)));
    }
    for &v in &boundary {
        let p = mesh.vertices[v];
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        if (r - 1.0).abs() > 1e-8 {
            return Err(Error::Mesh(format!(
                "boundary vertex {v} lies at radius {r}, not on the unit sphere"
            )));
        }
    }
    let stiffness = assemble_stiffness(mesh)?;
    let mass = assemble_boundary_mass(mesh)?;
    let l = dtn_operator(&stiffness, &boundary)?;
    let mb = boundary_block(&mass, &boundary);
    let mut out = [None, None, None];
    for (c, slot) in out.iter_mut().enumerate() {
        let xb = DVector::from_iterator(
            boundary.len(),
            boundary.iter().map(|&v| mesh.vertices[v][c]),
        );
        if xb.amax() <= 1e-13 {
            continue;
        }
        let mx = &mb * &xb;
        let r = &l * &xb - &mx;
        *slot = Some(r.norm() / mx.norm());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_symmetric_mesh;
    use crate::surfaces::catalog;

    fn build(name: &str, res: (usize, usize)) -> TriangleMesh {
        build_symmetric_mesh(&catalog(name).unwrap(), res).unwrap().0
    }

    #[test]
    fn dtn_kills_constants_and_is_symmetric() {
        let mesh = build("unit-disk", (6, 24));
        let k = assemble_stiffness(&mesh).unwrap();
        let b = mesh.boundary_vertices();
        let l = dtn_operator(&k, &b).unwrap();
        let ones = DVector::from_element(b.len(), 1.0);
        assert!((&l * &ones).amax() < 1e-10, "L*1 = {}", (&l * &ones).amax());
        let asym = (&l - &l.transpose()).amax();
        assert!(asym < 1e-12, "asymmetry {asym}");
    }

    #[test]
    fn dtn_reproduces_the_first_disk_mode() {
        // u = cos(theta) on the unit circle extends to r cos(theta), whose
        // normal derivative equals u: L u should match M_b u up to
        // discretization error.
        let mesh = build("unit-disk", (24, 96));
        let k = assemble_stiffness(&mesh).unwrap();
        let m = assemble_boundary_mass(&mesh).unwrap();
        let b = mesh.boundary_vertices();
        let l = dtn_operator(&k, &b).unwrap();
        let mb = boundary_block(&m, &b);
        // Trace of x = cos(theta) along the unit circle.
        let u = DVector::from_iterator(b.len(), b.iter().map(|&v| mesh.vertices[v][0]));
        let mu = &mb * &u;
        let rel = (&l * &u - &mu).norm() / mu.norm();
        assert!(rel < 2e-2, "relative residual {rel}");
    }

    #[test]
    fn harmonic_extension_minimizes_energy_and_matches_boundary() {
        let mesh = build("unit-disk", (8, 32));
        let k = assemble_stiffness(&mesh).unwrap();
        let b = mesh.boundary_vertices();
        let vals: Vec<f64> = b.iter().map(|&v| mesh.vertices[v][0]).collect();
        let ext = harmonic_extension(&k, &b, &vals).unwrap();
        for (p, &v) in b.iter().enumerate() {
            assert_eq!(ext[v], vals[p], "boundary values must be reproduced exactly");
        }
        // Compare with the linear interpolant x, which the extension should
        // approximate at second order, and undercut in energy.
        let x: Vec<f64> = mesh.vertices.iter().map(|p| p[0]).collect();
        let err = ext
            .iter()
            .zip(&x)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 0.02, "extension deviates from r cos theta by {err}");
        let e_ext = k.quadratic_form(&ext, &ext).unwrap();
        let e_x = k.quadratic_form(&x, &x).unwrap();
        assert!(e_ext <= e_x + 1e-12);
        // Any interior perturbation only raises the energy.
        let boundary_set: std::collections::BTreeSet<usize> = b.iter().copied().collect();
        let mut perturbed = ext.clone();
        for (v, val) in perturbed.iter_mut().enumerate() {
            if !boundary_set.contains(&v) {
                *val += 1e-3 * ((v * 2654435761) % 97) as f64 / 97.0;
            }
        }
        assert!(k.quadratic_form(&perturbed, &perturbed).unwrap() > e_ext);
    }

    #[test]
    fn constant_extension_is_constant() {
        let mesh = build("critical-catenoid", (6, 16));
        let k = assemble_stiffness(&mesh).unwrap();
        let b = mesh.boundary_vertices();
        let ext = harmonic_extension(&k, &b, &vec![2.5; b.len()]).unwrap();
        for v in ext {
            assert!((v - 2.5).abs() < 1e-10);
        }
    }

    #[test]
    fn disk_spectrum_matches_separation_of_variables() {
        let spec = steklov_spectrum(&build("unit-disk", (16, 64)), 7).unwrap();
        let expect = [0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0];
        for (got, want) in spec.eigenvalues.iter().zip(expect) {
            assert!((got - want).abs() < 5e-2, "{got} vs {want}");
        }
    }

    #[test]
    fn modes_are_mass_orthonormal_and_sign_fixed() {
        let mesh = build("critical-catenoid", (6, 16));
        let spec = steklov_spectrum(&mesh, 6).unwrap();
        let m = assemble_boundary_mass(&mesh).unwrap();
        let mb = boundary_block(&m, &spec.boundary);
        let gram = spec.boundary_modes.transpose() * &mb * &spec.boundary_modes;
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (gram[(i, j)] - want).abs() < 1e-10,
                    "gram[{i},{j}] = {}",
                    gram[(i, j)]
                );
            }
        }
        for m in 0..6 {
            let col = spec.boundary_modes.column(m);
            let sign = canonical_sign(col.as_slice());
            assert_eq!(sign, 1.0, "mode {m} violates the sign convention");
        }
    }

    #[test]
    fn eigenpairs_satisfy_the_rayleigh_identity() {
        let mesh = build("critical-catenoid", (6, 16));
        let spec = steklov_spectrum(&mesh, 5).unwrap();
        for (m, ext) in spec.extensions.iter().enumerate() {
            if spec.eigenvalues[m].abs() < 1e-9 {
                continue; // quotient of the constant mode is 0/den trivially
            }
            let q = rayleigh_quotient(&mesh, ext).unwrap();
            assert!(
                (q - spec.eigenvalues[m]).abs() <= 1e-9 * (1.0 + q.abs()),
                "mode {m}: {q} vs {}",
                spec.eigenvalues[m]
            );
        }
    }

    #[test]
    fn zero_mode_extension_is_constant() {
        let mesh = build("unit-disk", (8, 32));
        let spec = steklov_spectrum(&mesh, 3).unwrap();
        assert!(spec.eigenvalues[0].abs() < 1e-10);
        let ext = &spec.extensions[0];
        let (lo, hi) = ext
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
                (l.min(v), h.max(v))
            });
        assert!(hi - lo < 1e-8 * hi.abs().max(1.0));
    }

    #[test]
    fn dtn_commutes_with_the_group_action() {
        let (mesh, action) =
            build_symmetric_mesh(&catalog("critical-catenoid").unwrap(), (4, 16)).unwrap();
        let k = assemble_stiffness(&mesh).unwrap();
        let b = mesh.boundary_vertices();
        let l = dtn_operator(&k, &b).unwrap();
        let mut pos = std::collections::BTreeMap::new();
        for (p, &v) in b.iter().enumerate() {
            pos.insert(v, p);
        }
        for gen in &action.generators {
            let pb: Vec<usize> = b.iter().map(|&v| pos[&gen.permutation[v]]).collect();
            let mut worst = 0.0_f64;
            for i in 0..b.len() {
                for j in 0..b.len() {
                    worst = worst.max((l[(pb[i], pb[j])] - l[(i, j)]).abs());
                }
            }
            assert!(worst < 1e-12, "{:?}: drift {worst}", gen.axis);
        }
    }

    #[test]
    fn coordinate_residual_recognizes_the_disk() {
        let res = coordinate_residual(&build("unit-disk", (16, 64))).unwrap();
        assert!(res[0].unwrap() < 5e-2);
        assert!(res[1].unwrap() < 5e-2);
        assert!(res[2].is_none(), "z vanishes on the whole disk");
    }

    #[test]
    fn coordinate_residual_rejects_off_sphere_boundaries() {
        let mesh = build("flat-annulus:0.5", (4, 16));
        let err = coordinate_residual(&mesh).unwrap_err();
        assert!(err.to_string().contains("unit sphere"), "{err}");
    }

    #[test]
    fn mode_count_bounds_are_enforced() {
        let mesh = build("unit-disk", (2, 8));
        assert!(steklov_spectrum(&mesh, 0).is_err());
        assert!(steklov_spectrum(&mesh, 9).is_err());
        assert!(steklov_spectrum(&mesh, 8).is_ok());
    }
}
