//! Analytic catalog of parametric surfaces with boundary in the closed unit
//! ball.
//!
//! Every entry is a chart over a rectangle `[u_min, u_max] x [0, 2pi)` with
//! exact closed-form derivatives, together with the list of coordinate
//! reflection planes that map the surface to itself and the parameter
//! transformations realizing those reflections. The catenoid family is
//! rescaled so that both boundary circles lie on the unit sphere; the
//! critical member meets the sphere orthogonally.

use crate::error::{Error, Result};

/// Coordinate axis, doubling as the unit normal of the coordinate plane it
/// is perpendicular to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

pub const AXES: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    /// Reflect a point through the coordinate plane normal to this axis.
    /// The flipped coordinate is normalized so that -0.0 becomes +0.0,
    /// keeping reflected copies of snapped vertices bitwise identical.
    pub fn reflect(self, p: [f64; 3]) -> [f64; 3] {
        let mut q = p;
        let k = self.index();
        q[k] = if p[k] == 0.0 { 0.0 } else { -p[k] };
        q
    }
}

/// Root of `rho * tanh(rho) = 1`, the half-height at which a rescaled
/// catenoid meets the unit sphere orthogonally.
///
/// Safeguarded bisection on [1, 2] down to a 1e-14 bracket, then two Newton
/// steps to polish to full double precision. `tolerance` is the residual
/// guarantee requested by the caller; the fixed schedule lands at machine
/// precision, far below any achievable request, and the result is checked
/// against it.
pub fn solve_rho0(tolerance: f64) -> f64 {
    assert!(
        tolerance > 0.0 && tolerance.is_finite(),
        "tolerance must be a positive finite number"
    );
    let f = |r: f64| r * r.tanh() - 1.0;
    let (mut lo, mut hi) = (1.0_f64, 2.0_f64);
    debug_assert!(f(lo) < 0.0 && f(hi) > 0.0);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..2 {
        let sech = 1.0 / r.cosh();
        let slope = r.tanh() + r * sech * sech;
        r -= f(r) / slope;
    }
    debug_assert!(f(r).abs() < tolerance.max(1e-15));
    r
}

/// Half-height and isotropic scale factor of a rescaled catenoid
/// `(r, theta) -> scale * (cosh r cos theta, cosh r sin theta, r)`
/// over `r in [-rho, rho]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatenoidParams {
    pub rho: f64,
    pub scale: f64,
}

impl CatenoidParams {
    /// The member meeting the unit sphere orthogonally: `rho` solves
    /// `rho * tanh(rho) = 1` and the scale is `1 / (rho cosh rho)`.
    pub fn critical() -> Self {
        let rho = solve_rho0(1e-13);
        CatenoidParams {
            rho,
            scale: 1.0 / (rho * rho.cosh()),
        }
    }

    /// Catenoid of half-height `rho` rescaled so both boundary circles lie
    /// on the unit sphere: `scale^2 (cosh^2 rho + rho^2) = 1`. For the
    /// critical half-height this agrees with [`CatenoidParams::critical`].
    pub fn unit_sphere(rho: f64) -> Result<Self> {
        if !rho.is_finite() || rho <= 0.0 {
            return Err(Error::Config(format!(
                "catenoid half-height must be positive and finite, got {rho}"
            )));
        }
        let scale = 1.0 / (rho.cosh().powi(2) + rho * rho).sqrt();
        Ok(CatenoidParams { rho, scale })
    }
}

/// Evaluate the catenoid chart at axial parameter `r` and angle `theta`.
pub fn catenoid_point(r: f64, theta: f64, params: &CatenoidParams) -> Result<[f64; 3]> {
    if !r.is_finite() || r.abs() > params.rho * (1.0 + 1e-12) + 1e-300 {
        return Err(Error::Surface(format!(
            "axial parameter {r} outside [-{0}, {0}]",
            params.rho
        )));
    }
    let ch = r.cosh();
    Ok([
        params.scale * ch * theta.cos(),
        params.scale * ch * theta.sin(),
        params.scale * r,
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceKind {
    Catenoid(CatenoidParams),
    /// The flat unit disk in the plane `x3 = 0`.
    Disk,
    /// The flat annulus `inner <= |x| <= 1` in the plane `x3 = 0`. Its outer
    /// boundary lies on the unit sphere; the inner one does not.
    FlatAnnulus { inner_radius: f64 },
}

/// A catalog surface: chart, parameter rectangle, and reflection symmetries.
#[derive(Debug, Clone)]
pub struct ParametricSurface {
    pub name: String,
    pub kind: SurfaceKind,
    /// Range of the first (axial or radial) parameter. The second parameter
    /// is an angle in `[0, 2pi)`.
    pub u_range: (f64, f64),
    /// Whether the second parameter wraps around (true for every catalog
    /// entry).
    pub periodic: bool,
    /// Coordinate planes (by unit normal) whose reflections preserve the
    /// surface, in the order used to index symmetry generators everywhere
    /// downstream.
    pub symmetry_planes: Vec<Axis>,
}

impl ParametricSurface {
    pub fn chart(&self, u: f64, v: f64) -> [f64; 3] {
        match &self.kind {
            SurfaceKind::Catenoid(p) => {
                let ch = u.cosh();
                [
                    p.scale * ch * v.cos(),
                    p.scale * ch * v.sin(),
                    p.scale * u,
                ]
            }
            SurfaceKind::Disk | SurfaceKind::FlatAnnulus { .. } => {
                [u * v.cos(), u * v.sin(), 0.0]
            }
        }
    }

    /// Exact first derivatives `(dF/du, dF/dv)` of the chart.
    pub fn chart_derivatives(&self, u: f64, v: f64) -> ([f64; 3], [f64; 3]) {
        match &self.kind {
            SurfaceKind::Catenoid(p) => {
                let (ch, sh) = (u.cosh(), u.sinh());
                let (cv, sv) = (v.cos(), v.sin());
                (
                    [p.scale * sh * cv, p.scale * sh * sv, p.scale],
                    [-p.scale * ch * sv, p.scale * ch * cv, 0.0],
                )
            }
            SurfaceKind::Disk | SurfaceKind::FlatAnnulus { .. } => {
                let (cv, sv) = (v.cos(), v.sin());
                ([cv, sv, 0.0], [-u * sv, u * cv, 0.0])
            }
        }
    }

    /// Parameter transformation realizing the reflection through the plane
    /// normal to `axis`: `chart(reflect_param(axis, u, v))` equals the
    /// coordinate reflection of `chart(u, v)`. Panics if `axis` is not one
    /// of this surface's symmetry planes.
    pub fn reflect_param(&self, axis: Axis, u: f64, v: f64) -> (f64, f64) {
        assert!(
            self.symmetry_planes.contains(&axis),
            "{axis:?} is not a symmetry plane of {}",
            self.name
        );
        let tau = std::f64::consts::TAU;
        let wrap = |a: f64| {
            let mut a = a % tau;
            if a < 0.0 {
                a += tau;
            }
            a
        };
        match axis {
            Axis::X => (u, wrap(std::f64::consts::PI - v)),
            Axis::Y => (u, wrap(-v)),
            Axis::Z => (-u, v),
        }
    }

    /// Outward unit conormal of the surface along its boundary, computed
    /// from the chart derivatives: the tangential `v`-direction is projected
    /// out of the `u`-derivative and the result is normalized, with sign
    /// chosen to point out of the parameter rectangle. Errors if `(u, v)` is
    /// not on a boundary curve.
    pub fn boundary_conormal(&self, u: f64, v: f64) -> Result<[f64; 3]> {
        let (lo, hi) = self.u_range;
        // The disk's u = 0 edge is its center, not a boundary curve.
        let has_inner = !matches!(self.kind, SurfaceKind::Disk);
        let on_hi = (u - hi).abs() <= 1e-12 * hi.abs().max(1.0);
        let on_lo = has_inner && (u - lo).abs() <= 1e-12 * lo.abs().max(1.0);
        if !on_hi && !on_lo {
            return Err(Error::Surface(format!(
                "parameter u = {u} is not on the boundary of {}",
                self.name
            )));
        }
        let (fu, fv) = self.chart_derivatives(u, v);
        let t2 = dot3(fv, fv);
        if t2 <= 0.0 {
            return Err(Error::Surface(format!(
                "degenerate boundary tangent on {} at u = {u}",
                self.name
            )));
        }
        let proj = dot3(fu, fv) / t2;
        let mut w = [fu[0] - proj * fv[0], fu[1] - proj * fv[1], fu[2] - proj * fv[2]];
        let n = dot3(w, w).sqrt();
        if n <= 0.0 {
            return Err(Error::Surface(format!(
                "degenerate conormal on {} at u = {u}",
                self.name
            )));
        }
        let sign = if on_hi { 1.0 } else { -1.0 };
        for c in &mut w {
            *c *= sign / n;
        }
        Ok(w)
    }
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Look up a surface by its catalog name.
///
/// Recognized names: `critical-catenoid`, `catenoid:RHO` (half-height,
/// rescaled to the unit sphere), `unit-disk`, `flat-annulus:INNER` (inner
/// radius in (0, 1)).
pub fn catalog(name: &str) -> Result<ParametricSurface> {
    if name == "critical-catenoid" {
        let p = CatenoidParams::critical();
        return Ok(ParametricSurface {
            name: name.to_string(),
            kind: SurfaceKind::Catenoid(p),
            u_range: (-p.rho, p.rho),
            periodic: true,
            symmetry_planes: vec![Axis::X, Axis::Y, Axis::Z],
        });
    }
    if name == "unit-disk" {
        return Ok(ParametricSurface {
            name: name.to_string(),
            kind: SurfaceKind::Disk,
            u_range: (0.0, 1.0),
            periodic: true,
            symmetry_planes: vec![Axis::X, Axis::Y],
        });
    }
    if let Some(arg) = name.strip_prefix("catenoid:") {
        let rho: f64 = arg
            .parse()
            .map_err(|_| Error::Config(format!("bad catenoid half-height {arg:?}")))?;
        let p = CatenoidParams::unit_sphere(rho)?;
        return Ok(ParametricSurface {
            name: name.to_string(),
            kind: SurfaceKind::Catenoid(p),
            u_range: (-p.rho, p.rho),
            periodic: true,
            symmetry_planes: vec![Axis::X, Axis::Y, Axis::Z],
        });
    }
    if let Some(arg) = name.strip_prefix("flat-annulus:") {
        let inner: f64 = arg
            .parse()
            .map_err(|_| Error::Config(format!("bad annulus inner radius {arg:?}")))?;
        if !inner.is_finite() || inner <= 0.0 || inner >= 1.0 {
            return Err(Error::Config(format!(
                "annulus inner radius must lie in (0, 1), got {inner}"
            )));
        }
        return Ok(ParametricSurface {
            name: name.to_string(),
            kind: SurfaceKind::FlatAnnulus {
                inner_radius: inner,
            },
            u_range: (inner, 1.0),
            periodic: true,
            symmetry_planes: vec![Axis::X, Axis::Y],
        });
    }
    Err(Error::Config(format!(
        "unknown surface {name:?}; expected critical-catenoid, catenoid:RHO, unit-disk, or flat-annulus:INNER"
    )))
}
