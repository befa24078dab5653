//! Result tables with deterministic JSON and CSV renderings. All floats go
//! through the 17-significant-digit formatter so identical runs produce
//! byte-identical files.

use crate::io::{f17, json_escape, json_opt_f64};

#[derive(Debug, Clone)]
pub struct ClusterSummary {
    pub value: f64,
    pub multiplicity: usize,
}

/// Eigenvalue listing of one spectrum run.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub surface: String,
    pub resolution: (usize, usize),
    pub eigenvalues: Vec<f64>,
    pub clusters: Vec<ClusterSummary>,
    /// Relative defect of each coordinate function as a Steklov eigenmode
    /// with eigenvalue 1; `None` per coordinate that vanishes on the
    /// boundary, `None` overall when the boundary is not on the unit
    /// sphere.
    pub coordinate_residuals: Option<[Option<f64>; 3]>,
    /// Per-mode |rayleigh(u) - sigma| / (1 + |sigma|).
    pub rayleigh_residuals: Vec<f64>,
}

impl SpectrumReport {
    pub fn to_json(&self) -> String {
        let eigenvalues: Vec<String> = self.eigenvalues.iter().map(|&v| f17(v)).collect();
        let clusters: Vec<String> = self
            .clusters
            .iter()
            .map(|c| {
                format!(
                    "{{\"value\":{},\"multiplicity\":{}}}",
                    f17(c.value),
                    c.multiplicity
                )
            })
            .collect();
        let residuals = match &self.coordinate_residuals {
            None => "null".to_string(),
            Some([x1, x2, x3]) => format!(
                "{{\"x1\":{},\"x2\":{},\"x3\":{}}}",
                json_opt_f64(*x1),
                json_opt_f64(*x2),
                json_opt_f64(*x3)
            ),
        };
        let rayleigh: Vec<String> = self.rayleigh_residuals.iter().map(|&v| f17(v)).collect();
        format!(
            "{{\"schema\":1,\"surface\":\"{}\",\"resolution\":[{},{}],\"modes\":{},\"eigenvalues\":[{}],\"clusters\":[{}],\"residuals\":{},\"rayleigh_residuals\":[{}]}}",
            json_escape(&self.surface),
            self.resolution.0,
            self.resolution.1,
            self.eigenvalues.len(),
            eigenvalues.join(","),
            clusters.join(","),
            residuals,
            rayleigh.join(",")
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("mode,eigenvalue,rayleigh_residual\n");
        for (k, &ev) in self.eigenvalues.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                k,
                f17(ev),
                f17(self.rayleigh_residuals[k])
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl CheckStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

/// Outcome of the verification battery on one surface.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub surface: String,
    pub resolution: (usize, usize),
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn to_json(&self) -> String {
        let checks: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                format!(
                    "{{\"name\":\"{}\",\"status\":\"{}\",\"detail\":\"{}\"}}",
                    json_escape(&c.name),
                    c.status.as_str(),
                    json_escape(&c.detail)
                )
            })
            .collect();
        format!(
            "{{\"schema\":1,\"surface\":\"{}\",\"resolution\":[{},{}],\"checks\":[{}]}}",
            json_escape(&self.surface),
            self.resolution.0,
            self.resolution.1,
            checks.join(",")
        )
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = match c.status {
                CheckStatus::Pass => "PASS",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Skipped => "SKIP",
            };
            out.push_str(&format!("[{tag}] {}: {}\n", c.name, c.detail));
        }
        out
    }
}

/// One row of a catenoid family sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub rho: f64,
    pub sigma1: f64,
    pub multiplicity: usize,
    pub boundary_length: f64,
    /// The scale-invariant product sigma_1 * |boundary|.
    pub product: f64,
    /// Largest gap between the outward conormal and the position vector on
    /// the boundary; zero exactly at the free-boundary half-height.
    pub conormal_gap: f64,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub resolution: (usize, usize),
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("rho,sigma1,multiplicity,boundary_length,sigma1_times_length,conormal_gap\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                f17(r.rho),
                f17(r.sigma1),
                r.multiplicity,
                f17(r.boundary_length),
                f17(r.product),
                f17(r.conormal_gap)
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                format!(
                    "{{\"rho\":{},\"sigma1\":{},\"multiplicity\":{},\"boundary_length\":{},\"sigma1_times_length\":{},\"conormal_gap\":{}}}",
                    f17(r.rho),
                    f17(r.sigma1),
                    r.multiplicity,
                    f17(r.boundary_length),
                    f17(r.product),
                    f17(r.conormal_gap)
                )
            })
            .collect();
        format!(
            "{{\"schema\":1,\"resolution\":[{},{}],\"rows\":[{}]}}",
            self.resolution.0,
            self.resolution.1,
            rows.join(",")
        )
    }
}
