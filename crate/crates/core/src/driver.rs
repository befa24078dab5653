//! End-to-end pipelines: configuration, the spectrum run, the verification
//! battery, and the catenoid family sweep.

use crate::error::{Error, Result};
use crate::fem::{assemble_boundary_mass, assemble_stiffness};
use crate::mesh::{
    build_symmetric_mesh, fundamental_domain, resolution_compatible, GroupAction, TriangleMesh,
};
use crate::nodal::{courant_check, DEFAULT_NODAL_TAU};
use crate::report::{
    Check, CheckStatus, ClusterSummary, SpectrumReport, SweepRow, SweepTable, VerifyReport,
};
use crate::steklov::{boundary_block, coordinate_residual, steklov_spectrum, Spectrum};
use crate::surfaces::{catalog, ParametricSurface};
use crate::symmetry::{classify, eigenfunction_orthogonal_to_coordinates, Parity};

/// Default relative gap below which adjacent eigenvalues count as one
/// cluster. Discretization splits exact multiplicities by O(h^2), so this
/// is deliberately much coarser than solver precision.
pub const DEFAULT_TOL_EIGEN: f64 = 1e-2;

/// Default relative norm below which a parity component counts as absent.
pub const DEFAULT_TOL_PARITY: f64 = 1e-6;

/// Largest coordinate residual accepted as "numerically free boundary".
const FREE_BOUNDARY_RESIDUAL_LIMIT: f64 = 2e-2;

/// Relative limit for inner products that self-adjointness forces to zero.
const ORTHOGONALITY_LIMIT: f64 = 1e-8;

/// Eigenvalue gap above which two eigenpairs count as distinct (and so
/// must be orthogonal); below it they may span one degenerate eigenspace.
const DISTINCT_EIGENVALUE_GAP: f64 = 1e-6;


#[derive(Debug, Clone)]
pub struct RunConfig {
    pub surface: String,
    pub resolution: (usize, usize),
    pub num_modes: usize,
    pub tol_eigen: f64,
    pub tol_parity: f64,
    pub nodal_tau: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            surface: "critical-catenoid".to_string(),
            resolution: (20, 80),
            num_modes: 8,
            tol_eigen: DEFAULT_TOL_EIGEN,
            tol_parity: DEFAULT_TOL_PARITY,
            nodal_tau: DEFAULT_NODAL_TAU,
        }
    }
}

impl RunConfig {
    /// Resolve the surface and reject inconsistent parameters.
    pub fn validate(&self) -> Result<ParametricSurface> {
        let surface = catalog(&self.surface)?;
        resolution_compatible(&surface, self.resolution)?;
        if self.num_modes == 0 {
            return Err(Error::Config("at least one mode must be requested".into()));
        }
        for (name, tol) in [
            ("eigenvalue cluster tolerance", self.tol_eigen),
            ("parity tolerance", self.tol_parity),
        ] {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(Error::Config(format!("{name} {tol} must lie in (0, 1)")));
            }
        }
        if !(0.0..1.0).contains(&self.nodal_tau) {
            return Err(Error::Config(format!(
                "nodal zero threshold {} must lie in [0, 1)",
                self.nodal_tau
            )));
        }
        Ok(surface)
    }
}

/// Everything a spectrum run produces, kept around so callers can export
/// meshes, modes, and nodal data without recomputing.
pub struct SpectrumRun {
    pub surface: ParametricSurface,
    pub mesh: TriangleMesh,
    pub action: GroupAction,
    pub spectrum: Spectrum,
    pub report: SpectrumReport,
}

pub fn run_spectrum(config: &RunConfig) -> Result<SpectrumRun> {
    let surface = config.validate()?;
    let (mesh, action) = build_symmetric_mesh(&surface, config.resolution)?;
    let spectrum = steklov_spectrum(&mesh, config.num_modes)?;

    let stiffness = assemble_stiffness(&mesh)?;
    let mass = assemble_boundary_mass(&mesh)?;
    let mut rayleigh_residuals = Vec::with_capacity(spectrum.num_modes());
    for (k, ext) in spectrum.extensions.iter().enumerate() {
        let num = stiffness.quadratic_form(ext, ext)?;
        let den = mass.quadratic_form(ext, ext)?;
        if den <= 0.0 {
            return Err(Error::Solver(format!(
                "mode {k} has nonpositive boundary norm {den}"
            )));
        }
        let sigma = spectrum.eigenvalues[k];
        rayleigh_residuals.push((num / den - sigma).abs() / (1.0 + sigma.abs()));
    }

    let clusters = spectrum
        .clusters(config.tol_eigen)
        .iter()
        .map(|c| ClusterSummary {
            value: c.value,
            multiplicity: c.multiplicity,
        })
        .collect();
    let report = SpectrumReport {
        surface: config.surface.clone(),
        resolution: config.resolution,
        eigenvalues: spectrum.eigenvalues.clone(),
        clusters,
        coordinate_residuals: coordinate_residual(&mesh).ok(),
        rayleigh_residuals,
    };
    Ok(SpectrumRun {
        surface,
        mesh,
        action,
        spectrum,
        report,
    })
}

/// Run the verification battery: mesh sanity, exact symmetry, labeled
/// fundamental domain, free-boundary residuals, parity structure of the
/// first cluster, orthogonality to the coordinates, and the two-domain
/// property across the first cluster.
pub fn run_verify(config: &RunConfig) -> Result<VerifyReport> {
    let run = run_spectrum(config)?;
    let mut checks = Vec::new();

    let quality = run.mesh.quality();
    checks.push(match run.mesh.validate() {
        Ok(()) if quality.max_aspect_ratio < 50.0 => Check {
            name: "mesh-quality".to_string(),
            status: CheckStatus::Pass,
            detail: format!(
                "{} vertices, min area {:.3e}, max aspect {:.2}",
                run.mesh.vertex_count(),
                quality.min_area,
                quality.max_aspect_ratio
            ),
        },
        Ok(()) => Check {
            name: "mesh-quality".to_string(),
            status: CheckStatus::Fail,
            detail: format!("max aspect ratio {:.2} exceeds 50", quality.max_aspect_ratio),
        },
        Err(e) => Check {
            name: "mesh-quality".to_string(),
            status: CheckStatus::Fail,
            detail: e.to_string(),
        },
    });

    checks.push(
        match crate::mesh::verify_group_invariance(&run.mesh, &run.action) {
            Ok(()) => Check {
                name: "group-invariance".to_string(),
                status: CheckStatus::Pass,
                detail: format!(
                    "{} reflections act exactly, group order {}",
                    run.action.generators.len(),
                    run.action.orbit_count
                ),
            },
            Err(e) => Check {
                name: "group-invariance".to_string(),
                status: CheckStatus::Fail,
                detail: e.to_string(),
            },
        },
    );

    checks.push(match fundamental_domain(&run.mesh, &run.action) {
        Ok(fd) => {
            let arcs: Vec<String> = fd
                .arcs
                .iter()
                .map(|a| format!("{}({})", a.label.as_str(), a.vertices.len()))
                .collect();
            Check {
                name: "fundamental-domain".to_string(),
                status: CheckStatus::Pass,
                detail: format!(
                    "{} triangles, arcs {}",
                    fd.submesh.triangle_count(),
                    arcs.join(" ")
                ),
            }
        }
        Err(e) => Check {
            name: "fundamental-domain".to_string(),
            status: CheckStatus::Fail,
            detail: e.to_string(),
        },
    });

    let free_boundary = match &run.report.coordinate_residuals {
        None => Check {
            name: "free-boundary".to_string(),
            status: CheckStatus::Skipped,
            detail: "boundary is not on the unit sphere".to_string(),
        },
        Some(rs) => {
            let worst = rs.iter().flatten().fold(0.0_f64, |m, &v| m.max(v));
            Check {
                name: "free-boundary".to_string(),
                status: if worst <= FREE_BOUNDARY_RESIDUAL_LIMIT {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail
                },
                detail: format!("max coordinate residual {worst:.3e}"),
            }
        }
    };
    let free_boundary_verified = free_boundary.status == CheckStatus::Pass;
    checks.push(free_boundary);

    // Parity structure: nothing mixed anywhere, and each first-cluster mode
    // odd under exactly one reflection, all patterns distinct.
    let parity_check = (|| -> Result<Check> {
        let modes = classify(
            &run.spectrum,
            &run.mesh,
            &run.action,
            config.tol_eigen,
            config.tol_parity,
        )?;
        if let Some(m) = modes
            .iter()
            .find(|m| m.parities.iter().any(|p| *p == Parity::Mixed))
        {
            return Ok(Check {
                name: "parity".to_string(),
                status: CheckStatus::Fail,
                detail: format!("mode {} has mixed parity", m.mode),
            });
        }
        let cluster = run
            .spectrum
            .sigma1_cluster(config.tol_eigen)
            .ok_or_else(|| Error::Solver("first nonzero cluster not computed".into()))?;
        let range = cluster.start..cluster.start + cluster.multiplicity;
        let mut patterns = Vec::new();
        for m in modes.iter().filter(|m| range.contains(&m.mode)) {
            let odd = m.parities.iter().filter(|p| **p == Parity::Odd).count();
            if odd != 1 {
                return Ok(Check {
                    name: "parity".to_string(),
                    status: CheckStatus::Fail,
                    detail: format!(
                        "first-cluster mode {} is odd under {odd} reflections, expected 1",
                        m.mode
                    ),
                });
            }
            let label: Vec<&str> = m.parities.iter().map(|p| p.as_str()).collect();
            patterns.push(label.join(","));
        }
        let distinct = patterns.iter().collect::<std::collections::BTreeSet<_>>();
        if distinct.len() != patterns.len() {
            return Ok(Check {
                name: "parity".to_string(),
                status: CheckStatus::Fail,
                detail: format!("first-cluster patterns repeat: {}", patterns.join(" | ")),
            });
        }
        Ok(Check {
            name: "parity".to_string(),
            status: CheckStatus::Pass,
            detail: patterns.join(" | "),
        })
    })();
    checks.push(parity_check.unwrap_or_else(|e| Check {
        name: "parity".to_string(),
        status: CheckStatus::Fail,
        detail: e.to_string(),
    }));

    // Self-adjointness of the discrete pencil: eigenpairs at distinct
    // eigenvalues must be orthogonal under the boundary mass. Holds on any
    // surface, free boundary or not.
    let orthogonality = (|| -> Result<Check> {
        let mass = assemble_boundary_mass(&run.mesh)?;
        let mb = boundary_block(&mass, &run.spectrum.boundary);
        let y = &run.spectrum.boundary_modes;
        let gram = y.transpose() * (&mb * y);
        let ev = &run.spectrum.eigenvalues;
        let mut worst = 0.0_f64;
        let mut pairs = 0usize;
        for i in 0..ev.len() {
            for j in i + 1..ev.len() {
                if (ev[i] - ev[j]).abs() <= DISTINCT_EIGENVALUE_GAP {
                    continue;
                }
                worst = worst.max(gram[(i, j)].abs() / (gram[(i, i)] * gram[(j, j)]).sqrt());
                pairs += 1;
            }
        }
        Ok(Check {
            name: "orthogonality".to_string(),
            status: if worst < ORTHOGONALITY_LIMIT {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            detail: format!(
                "max cross inner product {worst:.3e} over {pairs} distinct-eigenvalue pairs"
            ),
        })
    })();
    checks.push(orthogonality.unwrap_or_else(|e| Check {
        name: "orthogonality".to_string(),
        status: CheckStatus::Fail,
        detail: e.to_string(),
    }));

    // Coordinates are reference eigenmodes only once the free-boundary
    // residual has certified them, so this test is inapplicable elsewhere.
    checks.push(if !free_boundary_verified {
        Check {
            name: "coordinate-orthogonality".to_string(),
            status: CheckStatus::Skipped,
            detail: "surface is not free-boundary-verified; coordinates are not eigenmodes"
                .to_string(),
        }
    } else {
        // The discrete coordinate modes sit near 1 only up to O(h^2), so
        // exclusion must go by cluster, not by a tight ball around 1.
        let mut worst = 0.0_f64;
        let mut tested = 0usize;
        let mut failure = None;
        for cluster in run.spectrum.clusters(config.tol_eigen) {
            if (cluster.value - 1.0).abs() <= FREE_BOUNDARY_RESIDUAL_LIMIT {
                continue;
            }
            for k in cluster.start..cluster.start + cluster.multiplicity {
                match eigenfunction_orthogonal_to_coordinates(
                    &run.mesh,
                    &run.spectrum.extensions[k],
                    run.spectrum.eigenvalues[k],
                ) {
                    Ok(r) => {
                        worst = worst.max(r[0]).max(r[1]).max(r[2]);
                        tested += 1;
                    }
                    Err(e) => {
                        failure = Some(e.to_string());
                        break;
                    }
                }
            }
        }
        match failure {
            Some(detail) => Check {
                name: "coordinate-orthogonality".to_string(),
                status: CheckStatus::Fail,
                detail,
            },
            None => Check {
                name: "coordinate-orthogonality".to_string(),
                status: if worst <= ORTHOGONALITY_LIMIT {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail
                },
                detail: format!("max correlation {worst:.3e} over {tested} modes"),
            },
        }
    });

    checks.push(
        match courant_check(&run.spectrum, &run.mesh, config.nodal_tau, config.tol_eigen) {
            Ok(report) if report.violations.is_empty() => Check {
                name: "courant".to_string(),
                status: CheckStatus::Pass,
                detail: format!(
                    "{} samples over multiplicity {}, all with 2 nodal domains",
                    report.samples, report.multiplicity
                ),
            },
            Ok(report) => Check {
                name: "courant".to_string(),
                status: CheckStatus::Fail,
                detail: format!(
                    "{} of {} samples broke the two-domain rule (first: {:?})",
                    report.violations.len(),
                    report.samples,
                    report.violations[0].coefficients
                ),
            },
            Err(e) => Check {
                name: "courant".to_string(),
                status: CheckStatus::Fail,
                detail: e.to_string(),
            },
        },
    );

    Ok(VerifyReport {
        surface: config.surface.clone(),
        resolution: config.resolution,
        checks,
    })
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub rho_min: f64,
    pub rho_max: f64,
    pub steps: usize,
    pub resolution: (usize, usize),
    pub num_modes: usize,
    pub tol_eigen: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            rho_min: 0.6,
            rho_max: 1.8,
            steps: 13,
            resolution: (12, 48),
            num_modes: 5,
            tol_eigen: DEFAULT_TOL_EIGEN,
        }
    }
}

/// Sweep the unit-sphere catenoid family in the half-height, recording the
/// scale-invariant product sigma_1 * |boundary| and the free-boundary
/// defect of each member.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepTable> {
    if !(config.rho_min.is_finite() && config.rho_max.is_finite())
        || config.rho_min <= 0.2
        || config.rho_max >= 2.5
        || config.rho_min >= config.rho_max
    {
        return Err(Error::Config(format!(
            "sweep range [{}, {}] must satisfy 0.2 < min < max < 2.5",
            config.rho_min, config.rho_max
        )));
    }
    if config.steps < 2 {
        return Err(Error::Config(format!(
            "sweep needs at least 2 steps, got {}",
            config.steps
        )));
    }

    let mut rows = Vec::with_capacity(config.steps);
    for k in 0..config.steps {
        let rho = config.rho_min
            + (config.rho_max - config.rho_min) * k as f64 / (config.steps - 1) as f64;
        let surface = catalog(&format!("catenoid:{rho}"))?;
        let (mesh, _) = build_symmetric_mesh(&surface, config.resolution)?;
        let spectrum = steklov_spectrum(&mesh, config.num_modes)?;
        let cluster = spectrum.sigma1_cluster(config.tol_eigen).ok_or_else(|| {
            Error::Solver(format!(
                "sweep at rho = {rho} did not reach the first nonzero cluster"
            ))
        })?;
        let boundary_length = mesh.boundary_length();

        // Free-boundary defect: the gap between the outward conormal and
        // the position vector, sampled along both boundary circles.
        let mut gap = 0.0_f64;
        for &u in &[surface.u_range.0, surface.u_range.1] {
            for j in 0..8 {
                let v = 2.0 * std::f64::consts::PI * j as f64 / 8.0;
                let conormal = surface.boundary_conormal(u, v)?;
                let p = surface.chart(u, v);
                let d = ((conormal[0] - p[0]).powi(2)
                    + (conormal[1] - p[1]).powi(2)
                    + (conormal[2] - p[2]).powi(2))
                .sqrt();
                gap = gap.max(d);
            }
        }

        rows.push(SweepRow {
            rho,
            sigma1: cluster.value,
            multiplicity: cluster.multiplicity,
            boundary_length,
            product: cluster.value * boundary_length,
            conormal_gap: gap,
        });
    }
    Ok(SweepTable {
        resolution: config.resolution,
        rows,
    })
}
