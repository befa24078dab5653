//! Reflection parities of eigenfunctions. Eigenvalue clusters are rotated
//! into a basis of definite parity by diagonalizing each reflection on the
//! cluster subspace, one generator at a time.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fem::{assemble_boundary_mass, assemble_stiffness};
use crate::mesh::{GroupAction, TriangleMesh};
use crate::steklov::{boundary_block, canonical_sign, Spectrum};

/// Behaviour of a function under one reflection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

impl Parity {
    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::Mixed => "mixed",
        }
    }
}

/// Largest allowed deviation of a reflection from an involution on a
/// cluster subspace before classification refuses to proceed.
const INVOLUTION_DEFECT_GUARD: f64 = 1e-8;

/// Eigenvalues this close to 1 belong to the coordinate cluster, where
/// orthogonality to the coordinate functions is not meaningful.
const COORDINATE_EIGENVALUE_GUARD: f64 = 1e-6;

/// Pull a vertex function back along a mesh automorphism: out[k] = u[p[k]].
pub fn apply_permutation(perm: &[usize], u: &[f64]) -> Result<Vec<f64>> {
    if perm.len() != u.len() {
        return Err(Error::Solver(format!(
            "permutation of length {} applied to function of length {}",
            perm.len(),
            u.len()
        )));
    }
    Ok(perm.iter().map(|&w| u[w]).collect())
}

/// Odd part (u - u o R) / 2 of a function under the reflection with vertex
/// permutation `perm`. Functions that are already odd are fixed exactly.
pub fn antisymmetrize(u: &[f64], perm: &[usize]) -> Result<Vec<f64>> {
    let pu = apply_permutation(perm, u)?;
    Ok(u.iter().zip(&pu).map(|(&a, &b)| 0.5 * (a - b)).collect())
}

/// Even part (u + u o R) / 2.
pub fn symmetrize(u: &[f64], perm: &[usize]) -> Result<Vec<f64>> {
    let pu = apply_permutation(perm, u)?;
    Ok(u.iter().zip(&pu).map(|(&a, &b)| 0.5 * (a + b)).collect())
}

/// One eigenmode after parity splitting: its position in the spectrum, a
/// Rayleigh-quotient eigenvalue, the parity under each generator, and the
/// rotated mode itself.
#[derive(Debug, Clone)]
pub struct ModeParity {
    pub mode: usize,
    pub eigenvalue: f64,
    pub parities: Vec<Parity>,
    pub boundary_trace: Vec<f64>,
    pub extension: Vec<f64>,
}

/// Rotate every eigenvalue cluster into a parity-pure basis and report the
/// parity pattern of each mode. Within a cluster, modes are ordered by
/// repeated splitting with the odd part first, so the result is
/// deterministic even for degenerate eigenvalues.
pub fn classify(
    spectrum: &Spectrum,
    mesh: &TriangleMesh,
    action: &GroupAction,
    cluster_tol: f64,
    parity_tol: f64,
) -> Result<Vec<ModeParity>> {
    let n = mesh.vertex_count();
    if spectrum.extensions.iter().any(|e| e.len() != n)
        || spectrum.boundary.iter().any(|&v| v >= n)
    {
        return Err(Error::Solver(
            "spectrum does not belong to this mesh".into(),
        ));
    }
    if !(parity_tol > 0.0 && parity_tol < 1.0) {
        return Err(Error::Config(format!(
            "parity tolerance {parity_tol} must lie in (0, 1)"
        )));
    }
    let stiffness = assemble_stiffness(mesh)?;
    let mass = assemble_boundary_mass(mesh)?;
    let mb = boundary_block(&mass, &spectrum.boundary);
    let nb = spectrum.boundary.len();
    let nmodes = spectrum.num_modes();

    // Restrict each vertex permutation to the boundary.
    let mut pos = vec![usize::MAX; n];
    for (p, &v) in spectrum.boundary.iter().enumerate() {
        pos[v] = p;
    }
    let mut boundary_perms = Vec::with_capacity(action.generators.len());
    for gen in &action.generators {
        let mut pb = vec![0usize; nb];
        for (p, &v) in spectrum.boundary.iter().enumerate() {
            let w = gen.permutation[v];
            if pos[w] == usize::MAX {
                return Err(Error::Mesh(format!(
                    "reflection through the {:?} plane does not preserve the boundary",
                    gen.axis
                )));
            }
            pb[p] = pos[w];
        }
        boundary_perms.push(pb);
    }

    let mut traces = spectrum.boundary_modes.clone();
    let mut extensions = DMatrix::from_fn(n, nmodes, |k, c| spectrum.extensions[c][k]);

    let mut out = Vec::with_capacity(nmodes);
    for cluster in spectrum.clusters(cluster_tol) {
        let mut blocks = vec![(cluster.start, cluster.multiplicity)];
        for pb in &boundary_perms {
            let mut next = Vec::new();
            for &(s, len) in &blocks {
                let ys = traces.columns(s, len).into_owned();
                let mut pys = DMatrix::zeros(nb, len);
                for c in 0..len {
                    for p in 0..nb {
                        pys[(p, c)] = ys[(pb[p], c)];
                    }
                }
                let b = ys.transpose() * &mb * pys;
                let b = 0.5 * (&b + &b.transpose());
                let defect = (&b * &b - DMatrix::identity(len, len)).amax();
                if defect > INVOLUTION_DEFECT_GUARD {
                    return Err(Error::Solver(format!(
                        "reflection is not an involution on the cluster near {:.6} \
                         (defect {defect:.3e}); the cluster tolerance {cluster_tol} may split \
                         a degenerate eigenvalue",
                        cluster.value
                    )));
                }
                let eig = SymmetricEigen::new(b);
                let mut order: Vec<usize> = (0..len).collect();
                order.sort_by(|&a, &c| {
                    eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[c]).unwrap()
                });
                let q = DMatrix::from_fn(len, len, |r, c| eig.eigenvectors[(r, order[c])]);
                let rotated_y = &ys * &q;
                traces.view_mut((0, s), (nb, len)).copy_from(&rotated_y);
                let es = extensions.columns(s, len).into_owned();
                extensions.view_mut((0, s), (n, len)).copy_from(&(es * &q));
                let neg = order
                    .iter()
                    .filter(|&&i| eig.eigenvalues[i] < 0.0)
                    .count();
                if neg > 0 {
                    next.push((s, neg));
                }
                if neg < len {
                    next.push((s + neg, len - neg));
                }
            }
            blocks = next;
        }

        for c in cluster.start..cluster.start + cluster.multiplicity {
            let trace: Vec<f64> = traces.column(c).iter().copied().collect();
            let flip = canonical_sign(&trace) < 0.0;
            let trace: Vec<f64> = if flip {
                trace.iter().map(|v| -v).collect()
            } else {
                trace
            };
            let ext: Vec<f64> = extensions
                .column(c)
                .iter()
                .map(|&v| if flip { -v } else { v })
                .collect();

            let norm = ext.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut parities = Vec::with_capacity(action.generators.len());
            for gen in &action.generators {
                let odd = antisymmetrize(&ext, &gen.permutation)?;
                let even = symmetrize(&ext, &gen.permutation)?;
                let odd_norm = odd.iter().map(|v| v * v).sum::<f64>().sqrt();
                let even_norm = even.iter().map(|v| v * v).sum::<f64>().sqrt();
                parities.push(if odd_norm <= parity_tol * norm {
                    Parity::Even
                } else if even_norm <= parity_tol * norm {
                    Parity::Odd
                } else {
                    Parity::Mixed
                });
            }
            // Rotated modes no longer match the original eigenvalues one by
            // one, so report the Rayleigh quotient of the rotated mode.
            let num = stiffness.quadratic_form(&ext, &ext)?;
            let den = mass.quadratic_form(&ext, &ext)?;
            if den <= 0.0 {
                return Err(Error::Solver(
                    "rotated mode has nonpositive boundary norm".into(),
                ));
            }
            out.push(ModeParity {
                mode: c,
                eigenvalue: num / den,
                parities,
                boundary_trace: trace,
                extension: ext,
            });
        }
    }
    Ok(out)
}

/// Mass-weighted correlations of an eigenfunction with the three coordinate
/// functions, normalized by the boundary norms. For eigenvalues away from 1
/// these vanish on a surface whose coordinates are themselves eigenmodes.
/// A coordinate with zero boundary norm reports 0.
pub fn eigenfunction_orthogonal_to_coordinates(
    mesh: &TriangleMesh,
    u: &[f64],
    sigma: f64,
) -> Result<[f64; 3]> {
    if (sigma - 1.0).abs() <= COORDINATE_EIGENVALUE_GUARD {
        return Err(Error::Solver(format!(
            "eigenvalue {sigma} lies in the coordinate cluster; orthogonality to the \
             coordinates is not expected there"
        )));
    }
    let mass = assemble_boundary_mass(mesh)?;
    let u_norm = mass.quadratic_form(u, u)?.max(0.0).sqrt();
    if u_norm == 0.0 {
        return Err(Error::Solver(
            "function has zero boundary norm".into(),
        ));
    }
    let mut out = [0.0; 3];
    for (c, slot) in out.iter_mut().enumerate() {
        let x: Vec<f64> = mesh.vertices.iter().map(|p| p[c]).collect();
        let x_norm = mass.quadratic_form(&x, &x)?.max(0.0).sqrt();
        if x_norm == 0.0 {
            continue;
        }
        *slot = (mass.quadratic_form(u, &x)? / (u_norm * x_norm)).abs();
    }
    Ok(out)
}

/// Parity table as CSV: mode index, eigenvalue (17 significant digits),
/// and one parity column per reflection generator, named after the
/// coordinate the plane is normal to.
pub fn parity_table_csv(modes: &[ModeParity], action: &GroupAction) -> String {
    let mut out = String::from("mode,eigenvalue");
    for g in &action.generators {
        out.push_str(&format!(",parity_x{}", g.axis.index() + 1));
    }
    out.push('\n');
    for m in modes {
        out.push_str(&format!("{},{}", m.mode, crate::io::f17(m.eigenvalue)));
        for p in &m.parities {
            out.push_str(&format!(",{}", p.as_str()));
        }
        out.push('\n');
    }
    out
}
