//! Exact metric geometry of the constant-curvature model spaces with
//! `kappa >= 0`: Euclidean space and spheres, plus the comparison-triangle
//! machinery used by the chord estimates.
//!
//! Spheres are represented extrinsically as `{x : |x| = 1/sqrt(kappa)}` in
//! one higher ambient dimension, so distance, exponential and logarithm maps
//! all have closed forms. The `kappa = 0` and `kappa > 0` code paths are
//! selected by exact comparison; inputs with near-zero curvature are the
//! caller's responsibility.

use crate::error::{Error, Result};
use crate::linalg;
use serde::{Deserialize, Serialize};

/// Relative tolerance accepted when validating that input points sit on the
/// sphere; points produced by operations are renormalized and satisfy the
/// constraint to 1e-12.
const ON_MANIFOLD_INPUT_TOL: f64 = 1e-9;
/// Tolerance for rejecting non-unit tangent vectors.
const UNIT_TOL: f64 = 1e-9;

/// A constant-curvature model space: Euclidean `R^n` for `kappa = 0`, the
/// n-sphere of radius `1/sqrt(kappa)` for `kappa > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpace {
    dim: usize,
    kappa: f64,
}

/// A point of a model space, stored in ambient coordinates: length `n` for
/// flat space, length `n + 1` with norm `1/sqrt(kappa)` on the sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    coords: Vec<f64>,
}

/// A tangent vector at `base`, stored in ambient coordinates. On the sphere
/// the components are orthogonal to the base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: Point,
    components: Vec<f64>,
}

impl ModelSpace {
    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::new(dim, 0.0)
    }

    pub fn sphere(dim: usize, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sphere requires finite kappa > 0, got {kappa}"
            )));
        }
        Self::new(dim, kappa)
    }

    pub fn new(dim: usize, kappa: f64) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "curvature must be finite and >= 0, got {kappa}"
            )));
        }
        Ok(ModelSpace { dim, kappa })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn is_flat(&self) -> bool {
        self.kappa == 0.0
    }

    /// Length of ambient coordinate vectors.
    pub fn ambient_dim(&self) -> usize {
        if self.is_flat() {
            self.dim
        } else {
            self.dim + 1
        }
    }

    /// Sphere radius `1/sqrt(kappa)`; infinite for flat space.
    pub fn radius(&self) -> f64 {
        if self.is_flat() {
            f64::INFINITY
        } else {
            1.0 / self.kappa.sqrt()
        }
    }

    /// Diameter of the space: `pi/sqrt(kappa)` for `kappa > 0`, infinite
    /// otherwise.
    pub fn diameter_bound(&self) -> f64 {
        if self.is_flat() {
            f64::INFINITY
        } else {
            std::f64::consts::PI / self.kappa.sqrt()
        }
    }

    /// Canonical base point: the origin, or the "last axis" pole.
    pub fn canonical_point(&self) -> Point {
        let mut coords = vec![0.0; self.ambient_dim()];
        if !self.is_flat() {
            *coords.last_mut().unwrap() = self.radius();
        }
        Point { coords }
    }

    /// Validates dimensions and (on the sphere) the norm constraint.
    pub fn check_point(&self, p: &Point) -> Result<()> {
        if p.coords.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                got: p.coords.len(),
            });
        }
        if !p.coords.iter().all(|c| c.is_finite()) {
            return Err(Error::OffManifold("non-finite coordinate".into()));
        }
        if !self.is_flat() {
            let r = self.radius();
            let n = linalg::norm(&p.coords);
            if ((n - r) / r).abs() > ON_MANIFOLD_INPUT_TOL {
                return Err(Error::OffManifold(format!(
                    "|coords| = {n}, expected {r}"
                )));
            }
        }
        Ok(())
    }

    /// Builds a point from ambient coordinates, validating and (on the
    /// sphere) renormalizing to the exact radius.
    pub fn point(&self, coords: Vec<f64>) -> Result<Point> {
        let mut p = Point { coords };
        self.check_point(&p)?;
        if !self.is_flat() {
            let r = self.radius();
            let n = linalg::norm(&p.coords);
            p.coords = linalg::scale(&p.coords, r / n);
        }
        Ok(p)
    }

    /// Builds a tangent vector at `base`, projecting out any radial
    /// component on the sphere.
    pub fn tangent(&self, base: &Point, components: Vec<f64>) -> Result<TangentVector> {
        self.check_point(base)?;
        if components.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                got: components.len(),
            });
        }
        let components = if self.is_flat() {
            components
        } else {
            let unit_base = linalg::normalized(&base.coords).unwrap();
            linalg::project_out(&components, &unit_base)
        };
        Ok(TangentVector {
            base: base.clone(),
            components,
        })
    }

    /// Like [`tangent`](Self::tangent) but rescales to unit length; errors on
    /// (near-)zero input.
    pub fn unit_tangent(&self, base: &Point, components: Vec<f64>) -> Result<TangentVector> {
        let v = self.tangent(base, components)?;
        let n = v.norm();
        if n < 1e-14 {
            return Err(Error::NotUnit(n));
        }
        Ok(TangentVector {
            base: v.base,
            components: linalg::scale(&v.components, 1.0 / n),
        })
    }

    /// Orthonormal basis of the tangent space at `p` (ambient coordinates).
    pub fn tangent_space_basis(&self, p: &Point) -> Result<Vec<Vec<f64>>> {
        self.check_point(p)?;
        if self.is_flat() {
            Ok((0..self.dim)
                .map(|i| {
                    let mut e = vec![0.0; self.dim];
                    e[i] = 1.0;
                    e
                })
                .collect())
        } else {
            let unit = linalg::normalized(&p.coords).unwrap();
            Ok(linalg::tangent_basis(&unit))
        }
    }

    /// Geodesic distance between two points.
    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.check_point(p)?;
        self.check_point(q)?;
        Ok(self.distance_unchecked(p, q))
    }

    pub(crate) fn distance_unchecked(&self, p: &Point, q: &Point) -> f64 {
        if self.is_flat() {
            linalg::dist(&p.coords, &q.coords)
        } else {
            let r = self.radius();
            let u = linalg::scale(&p.coords, 1.0 / r);
            let v = linalg::scale(&q.coords, 1.0 / r);
            r * linalg::angle_between_units(&u, &v)
        }
    }

    /// Arc-length geodesic `t -> exp_p(t v)` for a unit tangent vector `v`.
    ///
    /// Rejects non-unit directions (beyond 1e-9). On the sphere the geodesic
    /// wraps around the great circle for `t` beyond the diameter.
    pub fn exp_map(&self, p: &Point, v: &TangentVector, t: f64) -> Result<Point> {
        self.check_point(p)?;
        if v.base != *p {
            return Err(Error::SpaceMismatch(
                "tangent vector is based at a different point".into(),
            ));
        }
        if !t.is_finite() || t < 0.0 {
            return Err(Error::OutOfRange(format!("exp_map parameter t = {t}")));
        }
        let n = v.norm();
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit(n));
        }
        Ok(self.exp_unit_unchecked(p, &v.components, t))
    }

    /// `exp` for a unit direction given as a bare component vector.
    pub(crate) fn exp_unit_unchecked(&self, p: &Point, dir: &[f64], t: f64) -> Point {
        if self.is_flat() {
            Point {
                coords: linalg::add_scaled(&p.coords, dir, t),
            }
        } else {
            let r = self.radius();
            let ang = t / r;
            let coords = linalg::add_scaled(
                &linalg::scale(&p.coords, ang.cos()),
                dir,
                r * ang.sin(),
            );
            // renormalize so produced points satisfy the manifold constraint
            let n = linalg::norm(&coords);
            Point {
                coords: linalg::scale(&coords, r / n),
            }
        }
    }

    /// Inverse of `exp_map`: the tangent vector at `p` pointing to `q` with
    /// norm `distance(p, q)`.
    ///
    /// On the sphere, antipodal inputs are rejected: the minimizing geodesic
    /// is not unique there.
    pub fn log_map(&self, p: &Point, q: &Point) -> Result<TangentVector> {
        self.check_point(p)?;
        self.check_point(q)?;
        let d = self.distance_unchecked(p, q);
        if self.is_flat() {
            return Ok(TangentVector {
                base: p.clone(),
                components: linalg::sub(&q.coords, &p.coords),
            });
        }
        let r = self.radius();
        let ang = d / r;
        if ang >= std::f64::consts::PI - 1e-8 {
            return Err(Error::AntipodalPoints);
        }
        if ang == 0.0 {
            return Ok(TangentVector {
                base: p.clone(),
                components: vec![0.0; self.ambient_dim()],
            });
        }
        // q = cos(ang) p + r sin(ang) u  with u the unit direction at p
        let u = linalg::scale(
            &linalg::add_scaled(&q.coords, &p.coords, -ang.cos()),
            1.0 / (r * ang.sin()),
        );
        let unit_base = linalg::normalized(&p.coords).unwrap();
        let u = linalg::project_out(&u, &unit_base);
        let u = linalg::normalized(&u).unwrap_or(vec![0.0; self.ambient_dim()]);
        Ok(TangentVector {
            base: p.clone(),
            components: linalg::scale(&u, d),
        })
    }
}

impl Point {
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub(crate) fn from_coords(coords: Vec<f64>) -> Point {
        Point { coords }
    }
}

impl TangentVector {
    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.components)
    }

    /// Unit-length copy; errors on zero vectors.
    pub fn normalized(&self) -> Result<TangentVector> {
        let n = self.norm();
        if n < 1e-14 {
            return Err(Error::NotUnit(n));
        }
        Ok(TangentVector {
            base: self.base.clone(),
            components: linalg::scale(&self.components, 1.0 / n),
        })
    }

    pub fn negated(&self) -> TangentVector {
        TangentVector {
            base: self.base.clone(),
            components: linalg::scale(&self.components, -1.0),
        }
    }

    pub(crate) fn from_parts(base: Point, components: Vec<f64>) -> TangentVector {
        TangentVector { base, components }
    }
}

/// Side `a` of a geodesic triangle given the two adjacent sides `b`, `c` and
/// the angle `gamma` between them, in the model space of curvature `kappa`.
///
/// For `kappa > 0` this is the spherical law of cosines
/// `cos(a k) = cos(b k) cos(c k) + sin(b k) sin(c k) cos(gamma)` with
/// `k = sqrt(kappa)`; the flat case is the Euclidean law of cosines.
pub fn law_of_cosines(kappa: f64, b: f64, c: f64, gamma: f64) -> Result<f64> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidParameter(format!("kappa = {kappa}")));
    }
    if !(b >= 0.0) || !(c >= 0.0) || !b.is_finite() || !c.is_finite() {
        return Err(Error::OutOfRange(format!("side lengths b = {b}, c = {c}")));
    }
    if !(0.0..=std::f64::consts::PI).contains(&gamma) {
        return Err(Error::OutOfRange(format!("angle gamma = {gamma}")));
    }
    if kappa == 0.0 {
        let a2 = b * b + c * c - 2.0 * b * c * gamma.cos();
        return Ok(a2.max(0.0).sqrt());
    }
    let k = kappa.sqrt();
    let d_kappa = std::f64::consts::PI / k;
    if b > d_kappa || c > d_kappa {
        return Err(Error::OutOfRange(format!(
            "side exceeds the diameter {d_kappa}"
        )));
    }
    let cos_a = (b * k).cos() * (c * k).cos() + (b * k).sin() * (c * k).sin() * gamma.cos();
    Ok(cos_a.clamp(-1.0, 1.0).acos() / k)
}

/// Geodesic triangle realized in the two-dimensional model space `M_kappa`,
/// with given side lengths.
///
/// Vertices are placed canonically: the first at the canonical base point,
/// the first side along the first tangent axis, the third vertex on the
/// positive side of the second axis.
#[derive(Debug, Clone)]
pub struct ComparisonTriangle {
    kappa: f64,
    sides: [f64; 3],
    vertices: [Point; 3],
    model: ModelSpace,
}

/// Builds the comparison triangle in `M_kappa` with sides
/// `(d_pq, d_qr, d_rp)`.
///
/// Requires the triangle inequality and, for `kappa > 0`, perimeter
/// `< 2 pi / sqrt(kappa)`.
pub fn comparison_triangle(kappa: f64, d_pq: f64, d_qr: f64, d_rp: f64) -> Result<ComparisonTriangle> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidParameter(format!("kappa = {kappa}")));
    }
    let sides = [d_pq, d_qr, d_rp];
    if sides.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(Error::OutOfRange(format!("sides {sides:?}")));
    }
    let tol = 1e-12 * (1.0 + sides.iter().cloned().fold(0.0, f64::max));
    for i in 0..3 {
        if sides[i] > sides[(i + 1) % 3] + sides[(i + 2) % 3] + tol {
            return Err(Error::TriangleInequality(sides[0], sides[1], sides[2]));
        }
    }
    let model = ModelSpace::new(2, kappa)?;
    let perimeter: f64 = sides.iter().sum();
    if kappa > 0.0 {
        let limit = 2.0 * model.diameter_bound();
        if perimeter >= limit {
            return Err(Error::PerimeterTooLarge { perimeter, limit });
        }
    }

    let p0 = model.canonical_point();
    let basis = model.tangent_space_basis(&p0)?;
    let (e1, e2) = (&basis[0], &basis[1]);

    // angle at the first vertex, between sides [p->q] and [p->r]
    let alpha = vertex_angle(kappa, d_pq, d_rp, d_qr);
    let q0 = model.exp_unit_unchecked(&p0, e1, d_pq);
    let dir_r: Vec<f64> = e1
        .iter()
        .zip(e2)
        .map(|(a, b)| alpha.cos() * a + alpha.sin() * b)
        .collect();
    let r0 = model.exp_unit_unchecked(&p0, &dir_r, d_rp);

    Ok(ComparisonTriangle {
        kappa,
        sides,
        vertices: [p0, q0, r0],
        model,
    })
}

/// Angle at the vertex between sides of lengths `b`, `c`, opposite side `a`.
fn vertex_angle(kappa: f64, b: f64, c: f64, a: f64) -> f64 {
    if b == 0.0 || c == 0.0 {
        return 0.0;
    }
    let cos_alpha = if kappa == 0.0 {
        (b * b + c * c - a * a) / (2.0 * b * c)
    } else {
        let k = kappa.sqrt();
        let denom = (b * k).sin() * (c * k).sin();
        if denom.abs() < 1e-300 {
            return 0.0;
        }
        ((a * k).cos() - (b * k).cos() * (c * k).cos()) / denom
    };
    cos_alpha.clamp(-1.0, 1.0).acos()
}

impl ComparisonTriangle {
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn sides(&self) -> [f64; 3] {
        self.sides
    }

    pub fn vertices(&self) -> &[Point; 3] {
        &self.vertices
    }

    pub fn model_space(&self) -> &ModelSpace {
        &self.model
    }

    pub fn perimeter(&self) -> f64 {
        self.sides.iter().sum()
    }

    /// Point on side `side_index` (0: v0->v1, 1: v1->v2, 2: v2->v0) at arc
    /// length `s` from the side's first endpoint.
    pub fn comparison_point(&self, side_index: usize, s: f64) -> Result<Point> {
        if side_index > 2 {
            return Err(Error::OutOfRange(format!("side index {side_index}")));
        }
        let len = self.sides[side_index];
        let tol = 1e-12 * (1.0 + len);
        if !(s >= -tol && s <= len + tol) {
            return Err(Error::OutOfRange(format!(
                "arc offset {s} outside [0, {len}]"
            )));
        }
        let s = s.clamp(0.0, len);
        let a = &self.vertices[side_index];
        let b = &self.vertices[(side_index + 1) % 3];
        if len == 0.0 || s == 0.0 {
            return Ok(a.clone());
        }
        let dir = self.model.log_map(a, b)?.normalized()?;
        Ok(self.model.exp_unit_unchecked(a, dir.components(), s))
    }
}

/// Position of a point on a geodesic triangle: which side it lies on and the
/// arc-length offset from that side's first vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidePosition {
    pub side: usize,
    pub offset: f64,
}

/// One instance of the comparison inequality on a geodesic triangle in a
/// model space.
///
/// `x` and `y` are given by side/offset positions on the triangle
/// `(p, q, r)`. Returns `d_kappa(x0, y0) - d(x, y)` where `x0`, `y0` are the
/// matching comparison points on the comparison triangle in `M_kappa` (same
/// curvature as `space`); a nonnegative value means the comparison
/// inequality holds for this instance. In a constant-curvature space the
/// comparison triangle is isometric and the value vanishes up to rounding.
pub fn cat_inequality_check(
    space: &ModelSpace,
    p: &Point,
    q: &Point,
    r: &Point,
    x: SidePosition,
    y: SidePosition,
) -> Result<f64> {
    for pt in [p, q, r] {
        space.check_point(pt)?;
    }
    let d_pq = space.distance_unchecked(p, q);
    let d_qr = space.distance_unchecked(q, r);
    let d_rp = space.distance_unchecked(r, p);
    if d_pq == 0.0 || d_qr == 0.0 || d_rp == 0.0 {
        return Err(Error::DegenerateTriangle);
    }
    if !space.is_flat() {
        let d_kappa = space.diameter_bound();
        let perimeter = d_pq + d_qr + d_rp;
        if d_pq >= d_kappa || d_qr >= d_kappa || d_rp >= d_kappa {
            return Err(Error::OutOfRange(
                "triangle side reaches the diameter; geodesic not unique".into(),
            ));
        }
        if perimeter >= 2.0 * d_kappa {
            return Err(Error::PerimeterTooLarge {
                perimeter,
                limit: 2.0 * d_kappa,
            });
        }
    }

    let verts = [p, q, r];
    let side_point = |pos: SidePosition| -> Result<Point> {
        if pos.side > 2 {
            return Err(Error::OutOfRange(format!("side index {}", pos.side)));
        }
        let a = verts[pos.side];
        let b = verts[(pos.side + 1) % 3];
        let len = space.distance_unchecked(a, b);
        let tol = 1e-12 * (1.0 + len);
        if !(pos.offset >= -tol && pos.offset <= len + tol) {
            return Err(Error::OutOfRange(format!(
                "arc offset {} outside [0, {len}]",
                pos.offset
            )));
        }
        let s = pos.offset.clamp(0.0, len);
        if s == 0.0 {
            return Ok(a.clone());
        }
        let dir = space.log_map(a, b)?.normalized()?;
        Ok(space.exp_unit_unchecked(a, dir.components(), s))
    };

    let ambient_x = side_point(x)?;
    let ambient_y = side_point(y)?;
    let d_xy = space.distance_unchecked(&ambient_x, &ambient_y);

    let tri = comparison_triangle(space.kappa(), d_pq, d_qr, d_rp)?;
    let x0 = tri.comparison_point(x.side, x.offset.clamp(0.0, tri.sides()[x.side]))?;
    let y0 = tri.comparison_point(y.side, y.offset.clamp(0.0, tri.sides()[y.side]))?;
    let d_model = tri.model_space().distance_unchecked(&x0, &y0);

    Ok(d_model - d_xy)
}
