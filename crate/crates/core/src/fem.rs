//! Piecewise-linear finite elements on triangle meshes: the cotangent
//! Laplace–Beltrami stiffness matrix and the boundary lumped/consistent
//! edge mass matrix, plus the quadratic forms built from them.

use nalgebra_sparse::coo::CooMatrix;
use nalgebra_sparse::csr::CsrMatrix;

use crate::error::{Error, Result};
use crate::mesh::{TriangleMesh, DEGENERATE_AREA_FRACTION};

/// Sparse symmetric matrix in compressed row storage. Both triangles are
/// stored; symmetry holds by construction because assembly always inserts
/// `(i, j)` and `(j, i)` together with equal values.
#[derive(Debug, Clone)]
pub struct SparseSymMatrix {
    csr: CsrMatrix<f64>,
}

impl SparseSymMatrix {
    /// Build from triplets, summing duplicates.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut coo = CooMatrix::new(dim, dim);
        for &(i, j, v) in triplets {
            if i >= dim || j >= dim {
                return Err(Error::Assembly(format!(
                    "triplet ({i}, {j}) outside a {dim}x{dim} matrix"
                )));
            }
            coo.push(i, j, v);
        }
        Ok(SparseSymMatrix {
            csr: CsrMatrix::from(&coo),
        })
    }

    pub fn dimension(&self) -> usize {
        self.csr.nrows()
    }

    pub fn nnz(&self) -> usize {
        self.csr.nnz()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        use nalgebra_sparse::SparseEntry;
        match self.csr.get_entry(i, j) {
            Some(SparseEntry::NonZero(v)) => *v,
            _ => 0.0,
        }
    }

    pub fn triplet_iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.csr.triplet_iter().map(|(i, j, v)| (i, j, *v))
    }

    pub fn matvec(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.dimension() {
            return Err(Error::Assembly(format!(
                "vector length {} does not match dimension {}",
                u.len(),
                self.dimension()
            )));
        }
        let mut out = vec![0.0; u.len()];
        for (i, j, v) in self.triplet_iter() {
            out[i] += v * u[j];
        }
        Ok(out)
    }

    /// The bilinear form `u^T A v`.
    pub fn quadratic_form(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        if u.len() != self.dimension() || v.len() != self.dimension() {
            return Err(Error::Assembly(format!(
                "vector lengths {} and {} do not match dimension {}",
                u.len(),
                v.len(),
                self.dimension()
            )));
        }
        let mut acc = 0.0;
        for (i, j, w) in self.triplet_iter() {
            acc += u[i] * w * v[j];
        }
        Ok(acc)
    }

    /// Largest deviation from symmetry, `max |A_ij - A_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, j, v) in self.triplet_iter() {
            if i < j {
                worst = worst.max((v - self.entry(j, i)).abs());
            }
        }
        worst
    }

    /// Serialize in Matrix Market coordinate format (symmetric: lower
    /// triangle only, 1-based indices, full float precision).
    pub fn to_matrix_market(&self) -> String {
        let mut entries = Vec::new();
        for (i, j, v) in self.triplet_iter() {
            if i >= j {
                entries.push((i, j, v));
            }
        }
        let mut out = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
        out.push_str(&format!(
            "{} {} {}\n",
            self.dimension(),
            self.dimension(),
            entries.len()
        ));
        for (i, j, v) in entries {
            out.push_str(&format!("{} {} {}\n", i + 1, j + 1, crate::io::f17(v)));
        }
        out
    }

}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Assemble the cotangent stiffness matrix of the intrinsic Laplacian: for
/// each triangle corner, the half-cotangent of its angle is subtracted from
/// the off-diagonal entry of the opposite edge and added to both diagonal
/// entries. Constants lie in the kernel; the matrix is positive
/// semidefinite whenever all triangles are non-degenerate.
pub fn assemble_stiffness(mesh: &TriangleMesh) -> Result<SparseSymMatrix> {
    let n = mesh.vertex_count();
    if mesh.triangle_count() == 0 {
        return Err(Error::Assembly("mesh has no triangles".into()));
    }
    let areas: Vec<f64> = (0..mesh.triangle_count())
        .map(|t| mesh.triangle_area(t))
        .collect();
    let mean_area = areas.iter().sum::<f64>() / areas.len() as f64;
    let mut coo = CooMatrix::new(n, n);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if areas[t] <= DEGENERATE_AREA_FRACTION * mean_area {
            return Err(Error::Assembly(format!(
                "triangle {t} is degenerate (area {}, mean {mean_area})",
                areas[t]
            )));
        }
        let double_area = 2.0 * areas[t];
        for k in 0..3 {
            let vk = tri[k];
            let vi = tri[(k + 1) % 3];
            let vj = tri[(k + 2) % 3];
            let a = sub3(mesh.vertices[vi], mesh.vertices[vk]);
            let b = sub3(mesh.vertices[vj], mesh.vertices[vk]);
            let w = 0.5 * dot3(a, b) / double_area;
            coo.push(vi, vj, -w);
            coo.push(vj, vi, -w);
            coo.push(vi, vi, w);
            coo.push(vj, vj, w);
        }
    }
    Ok(SparseSymMatrix {
        csr: CsrMatrix::from(&coo),
    })
}

/// Assemble the boundary mass matrix of piecewise-linear traces: each
/// boundary edge of length `L` contributes the consistent 1D element mass
/// `L/6 * [[2, 1], [1, 2]]`. Rows and columns of interior vertices are
/// zero, so the quadratic form is the line integral of the product of two
/// piecewise-linear functions over the boundary.
pub fn assemble_boundary_mass(mesh: &TriangleMesh) -> Result<SparseSymMatrix> {
    let n = mesh.vertex_count();
    let mut coo = CooMatrix::new(n, n);
    for lp in &mesh.boundary_loops {
        for k in 0..lp.len() {
            let a = lp[k];
            let b = lp[(k + 1) % lp.len()];
            let len = {
                let d = sub3(mesh.vertices[a], mesh.vertices[b]);
                dot3(d, d).sqrt()
            };
            if len <= 0.0 {
                return Err(Error::Assembly(format!(
                    "boundary edge ({a}, {b}) has zero length"
                )));
            }
            coo.push(a, a, len / 3.0);
            coo.push(b, b, len / 3.0);
            coo.push(a, b, len / 6.0);
            coo.push(b, a, len / 6.0);
        }
    }
    Ok(SparseSymMatrix {
        csr: CsrMatrix::from(&coo),
    })
}

/// Dirichlet energy `u^T K u` of a vertex function.
pub fn dirichlet_energy(mesh: &TriangleMesh, u: &[f64]) -> Result<f64> {
    if u.len() != mesh.vertex_count() {
        return Err(Error::Assembly(format!(
            "function has {} values for {} vertices",
            u.len(),
            mesh.vertex_count()
        )));
    }
    let k = assemble_stiffness(mesh)?;
    k.quadratic_form(u, u)
}
