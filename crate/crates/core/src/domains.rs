//! Geodesically convex bounded domains with membership, geodesic exit-time
//! and bounding-ball oracles.
//!
//! Three primitives: half-space polytopes (flat space only), geodesic balls
//! (on the sphere restricted to radius `< pi/(2 sqrt(kappa))`, which keeps
//! every curved domain strongly convex), and intersections. Spherical
//! "polytopes" are deliberately not a primitive: curved domains are balls
//! and intersections of balls.
//!
//! Domains are immutable after construction; construction validates
//! boundedness and finds an interior witness point, so downstream code can
//! rely on both.

use crate::error::{Error, Result};
use crate::geometry::{ModelSpace, Point, TangentVector};
use crate::linalg;
use crate::lp::{solve_max, LpOutcome};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Membership is boundary-inclusive with this tolerance.
pub const CONTAINS_TOL: f64 = 1e-9;
/// Fixed stream for the deterministic interior-witness search.
const WITNESS_SEED: u64 = 0x5eed_ba11;

/// Closed half-space `normal . x <= offset` with a unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// Shape payload of a [`ConvexDomain`].
#[derive(Debug, Clone)]
pub enum Shape {
    /// Bounded intersection of half-spaces; flat space only.
    Polytope(Vec<Halfspace>),
    /// Geodesic ball; on the sphere the radius stays below
    /// `pi/(2 sqrt(kappa))` so the ball is strongly convex.
    Ball { center: Point, radius: f64 },
    /// Intersection of domains living in the same space.
    Intersection(Vec<ConvexDomain>),
}

/// Which hypotheses of the curved-space bound pipeline the domain satisfies.
///
/// The library only records the class; the geometric facts behind the flags
/// (uniqueness of geodesics, injectivity radius, loop length, the
/// even-dimensional positive-curvature case) hold by construction for the
/// implemented domain classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisClass {
    pub strongly_convex: bool,
    pub injectivity_ok: bool,
    pub loop_length_ok: bool,
    pub synge_ok: bool,
}

impl HypothesisClass {
    pub fn any(&self) -> bool {
        self.strongly_convex || self.injectivity_ok || self.loop_length_ok || self.synge_ok
    }
}

/// A geodesically convex bounded domain in a model space.
#[derive(Debug, Clone)]
pub struct ConvexDomain {
    space: ModelSpace,
    shape: Shape,
    witness: Point,
    bounding_center: Point,
    bounding_radius: f64,
    /// Tight axis-aligned bounding box (flat space only), used as the
    /// rejection-sampling envelope.
    bbox: Option<(Vec<f64>, Vec<f64>)>,
}

impl ConvexDomain {
    /// Bounded half-space polytope `{x : normals[i] . x <= offsets[i]}`.
    ///
    /// Normals are normalized to unit length (offsets rescaled accordingly).
    /// Boundedness is verified by maximizing `+-x_i` with linear programs;
    /// the interior witness is the Chebyshev center.
    pub fn polytope(space: ModelSpace, normals: Vec<Vec<f64>>, offsets: Vec<f64>) -> Result<Self> {
        if !space.is_flat() {
            return Err(Error::SpaceMismatch(
                "half-space polytopes are only defined in flat space".into(),
            ));
        }
        let dim = space.dim();
        if normals.len() != offsets.len() {
            return Err(Error::InvalidParameter(format!(
                "{} normals vs {} offsets",
                normals.len(),
                offsets.len()
            )));
        }
        if normals.is_empty() {
            return Err(Error::InvalidParameter("empty constraint list".into()));
        }
        let mut halfspaces = Vec::with_capacity(normals.len());
        for (a, &b) in normals.iter().zip(&offsets) {
            if a.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: a.len(),
                });
            }
            let n = linalg::norm(a);
            if n < 1e-12 || !n.is_finite() || !b.is_finite() {
                return Err(Error::InvalidParameter("degenerate half-space".into()));
            }
            halfspaces.push(Halfspace {
                normal: linalg::scale(a, 1.0 / n),
                offset: b / n,
            });
        }

        let rows: Vec<(Vec<f64>, f64)> = halfspaces
            .iter()
            .map(|h| (h.normal.clone(), h.offset))
            .collect();

        // per-axis extremes: boundedness check and tight bounding box
        let mut lo = vec![0.0; dim];
        let mut hi = vec![0.0; dim];
        for i in 0..dim {
            for sign in [1.0, -1.0] {
                let mut c = vec![0.0; dim];
                c[i] = sign;
                match solve_max(&c, &rows) {
                    LpOutcome::Optimal { value, .. } => {
                        if sign > 0.0 {
                            hi[i] = value;
                        } else {
                            lo[i] = -value;
                        }
                    }
                    LpOutcome::Unbounded => {
                        return Err(Error::Unbounded(format!(
                            "{}x_{i}",
                            if sign > 0.0 { "+" } else { "-" }
                        )));
                    }
                    LpOutcome::Infeasible => {
                        return Err(Error::EmptyInterior("infeasible constraint system".into()));
                    }
                }
            }
        }

        // Chebyshev center: max r s.t. a_i . x + r <= b_i
        let cheb_rows: Vec<(Vec<f64>, f64)> = halfspaces
            .iter()
            .map(|h| {
                let mut a = h.normal.clone();
                a.push(1.0);
                (a, h.offset)
            })
            .collect();
        let mut c = vec![0.0; dim + 1];
        c[dim] = 1.0;
        let witness = match solve_max(&c, &cheb_rows) {
            LpOutcome::Optimal { x, value } => {
                if value <= 1e-12 {
                    return Err(Error::EmptyInterior(format!(
                        "inradius {value:.3e} is not positive"
                    )));
                }
                Point::from_coords(x[..dim].to_vec())
            }
            _ => return Err(Error::EmptyInterior("Chebyshev program failed".into())),
        };

        let center: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect();
        let radius = 0.5 * linalg::dist(&lo, &hi);
        Ok(ConvexDomain {
            space,
            shape: Shape::Polytope(halfspaces),
            witness,
            bounding_center: Point::from_coords(center),
            bounding_radius: radius,
            bbox: Some((lo, hi)),
        })
    }

    /// Axis-aligned box `[lo_i, hi_i]` as a polytope.
    pub fn axis_box(space: ModelSpace, lo: &[f64], hi: &[f64]) -> Result<Self> {
        let dim = space.dim();
        if lo.len() != dim || hi.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: lo.len().max(hi.len()),
            });
        }
        let mut normals = Vec::with_capacity(2 * dim);
        let mut offsets = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            normals.push(e.clone());
            offsets.push(hi[i]);
            e[i] = -1.0;
            normals.push(e);
            offsets.push(-lo[i]);
        }
        Self::polytope(space, normals, offsets)
    }

    /// Geodesic ball `B(center, radius)`.
    pub fn ball(space: ModelSpace, center: Point, radius: f64) -> Result<Self> {
        space.check_point(&center)?;
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!("ball radius {radius}")));
        }
        if !space.is_flat() {
            let limit = 0.5 * space.diameter_bound();
            if radius >= limit {
                return Err(Error::RadiusTooLarge {
                    radius,
                    limit,
                    kappa: space.kappa(),
                });
            }
        }
        let center = space.point(center.coords().to_vec())?;
        let bbox = if space.is_flat() {
            let lo = center.coords().iter().map(|c| c - radius).collect();
            let hi = center.coords().iter().map(|c| c + radius).collect();
            Some((lo, hi))
        } else {
            None
        };
        Ok(ConvexDomain {
            space,
            witness: center.clone(),
            bounding_center: center.clone(),
            bounding_radius: radius,
            shape: Shape::Ball { center, radius },
            bbox,
        })
    }

    /// Intersection of domains in the same space.
    ///
    /// The bounding ball is inherited from the part with the smallest one.
    /// An interior witness is searched deterministically (part witnesses,
    /// geodesic blends between them, then seeded rejection samples from the
    /// smallest bounding region); failure to find one reports an empty
    /// interior.
    pub fn intersection(parts: Vec<ConvexDomain>) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::InvalidParameter("empty intersection".into()));
        };
        let space = first.space;
        if parts.iter().any(|p| p.space != space) {
            return Err(Error::SpaceMismatch(
                "intersection parts live in different spaces".into(),
            ));
        }
        let best = parts
            .iter()
            .min_by(|a, b| a.bounding_radius.partial_cmp(&b.bounding_radius).unwrap())
            .unwrap();
        let bounding_center = best.bounding_center.clone();
        let bounding_radius = best.bounding_radius;

        let bbox = if space.is_flat() {
            let mut lo = vec![f64::NEG_INFINITY; space.dim()];
            let mut hi = vec![f64::INFINITY; space.dim()];
            for p in &parts {
                let (plo, phi) = p.bbox.as_ref().expect("flat domains carry a bbox");
                for i in 0..space.dim() {
                    lo[i] = lo[i].max(plo[i]);
                    hi[i] = hi[i].min(phi[i]);
                }
            }
            if lo.iter().zip(&hi).any(|(l, h)| l >= h) {
                return Err(Error::EmptyInterior("bounding boxes do not overlap".into()));
            }
            Some((lo, hi))
        } else {
            None
        };

        let witness =
            find_intersection_witness(&space, &parts, &bounding_center, bounding_radius, &bbox)?;
        Ok(ConvexDomain {
            space,
            shape: Shape::Intersection(parts),
            witness,
            bounding_center,
            bounding_radius,
            bbox,
        })
    }

    /// `K intersect B(x0, R)`, the localized domain used by the curved-space
    /// bound pipeline.
    pub fn intersect_ball(&self, x0: &Point, radius: f64) -> Result<Self> {
        let ball = ConvexDomain::ball(self.space, x0.clone(), radius)?;
        ConvexDomain::intersection(vec![self.clone(), ball])
    }

    /// Convex hull of a 2-D point set as a polytope.
    pub fn polygon_hull(space: ModelSpace, points: &[[f64; 2]]) -> Result<Self> {
        if !space.is_flat() || space.dim() != 2 {
            return Err(Error::SpaceMismatch(
                "polygon hull needs flat 2-D space".into(),
            ));
        }
        let hull = convex_hull_2d(points);
        if hull.len() < 3 {
            return Err(Error::EmptyInterior("hull is degenerate".into()));
        }
        let mut normals = Vec::with_capacity(hull.len());
        let mut offsets = Vec::with_capacity(hull.len());
        for i in 0..hull.len() {
            let a = hull[i];
            let b = hull[(i + 1) % hull.len()];
            let d = [b[0] - a[0], b[1] - a[1]];
            // hull is counter-clockwise: outward normal is the edge direction
            // rotated -90 degrees
            let n = [d[1], -d[0]];
            normals.push(n.to_vec());
            offsets.push(n[0] * a[0] + n[1] * a[1]);
        }
        Self::polytope(space, normals, offsets)
    }

    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// A point strictly inside the domain, fixed at construction.
    pub fn interior_witness(&self) -> &Point {
        &self.witness
    }

    /// A ball `B(center, radius)` containing the domain.
    pub fn bounding_ball(&self) -> (&Point, f64) {
        (&self.bounding_center, self.bounding_radius)
    }

    /// Tight axis-aligned bounding box; flat space only.
    pub fn bounding_box(&self) -> Option<(&[f64], &[f64])> {
        self.bbox
            .as_ref()
            .map(|(lo, hi)| (lo.as_slice(), hi.as_slice()))
    }

    /// Signed slack: the smallest constraint margin at `p`. Positive inside,
    /// negative outside; for balls this is the geodesic distance to the
    /// boundary sphere, for polytopes the smallest half-space slack.
    pub fn interior_margin(&self, p: &Point) -> Result<f64> {
        self.space.check_point(p)?;
        Ok(self.margin_unchecked(p))
    }

    pub(crate) fn margin_unchecked(&self, p: &Point) -> f64 {
        match &self.shape {
            Shape::Polytope(hs) => hs
                .iter()
                .map(|h| h.offset - linalg::dot(&h.normal, p.coords()))
                .fold(f64::INFINITY, f64::min),
            Shape::Ball { center, radius } => radius - self.space.distance_unchecked(center, p),
            Shape::Intersection(parts) => parts
                .iter()
                .map(|part| part.margin_unchecked(p))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Boundary-inclusive membership test (tolerance 1e-9).
    pub fn contains(&self, p: &Point) -> Result<bool> {
        Ok(self.interior_margin(p)? >= -CONTAINS_TOL)
    }

    /// First exit time of the unit-speed geodesic `t -> exp_p(t v)`:
    /// `sup { t : exp_p(s v) in K for all s in [0, t] }`.
    ///
    /// Closed form per primitive (linear for half-spaces, trigonometric for
    /// balls and caps); intersections take the minimum over parts. Capped at
    /// the space diameter when `kappa > 0`.
    pub fn exit_time(&self, p: &Point, v: &TangentVector) -> Result<f64> {
        self.space.check_point(p)?;
        if v.base() != p {
            return Err(Error::SpaceMismatch(
                "tangent vector is based at a different point".into(),
            ));
        }
        let n = v.norm();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::NotUnit(n));
        }
        if self.margin_unchecked(p) < -CONTAINS_TOL {
            return Err(Error::OutsideDomain);
        }
        let t = self.exit_time_unchecked(p, v.components());
        Ok(if self.space.is_flat() {
            t
        } else {
            t.min(self.space.diameter_bound())
        })
    }

    pub(crate) fn exit_time_unchecked(&self, p: &Point, dir: &[f64]) -> f64 {
        match &self.shape {
            Shape::Polytope(hs) => {
                let mut t = f64::INFINITY;
                for h in hs {
                    let rate = linalg::dot(&h.normal, dir);
                    if rate > 1e-14 {
                        let slack = (h.offset - linalg::dot(&h.normal, p.coords())).max(0.0);
                        t = t.min(slack / rate);
                    }
                }
                t
            }
            Shape::Ball { center, radius } => {
                if self.space.is_flat() {
                    // |p + t dir - c|^2 = R^2, take the nonnegative root
                    let w = linalg::sub(p.coords(), center.coords());
                    let b = linalg::dot(&w, dir);
                    let c = linalg::dot(&w, &w) - radius * radius;
                    let disc = (b * b - c).max(0.0);
                    (-b + disc.sqrt()).max(0.0)
                } else {
                    // cos(d(gamma(t), c) k) = A cos(t k) + B sin(t k)
                    let k = self.space.kappa().sqrt();
                    let a = self.space.kappa() * linalg::dot(p.coords(), center.coords());
                    let b = k * linalg::dot(dir, center.coords());
                    let cr = (radius * k).cos();
                    let m = (a * a + b * b).sqrt();
                    if m < 1e-300 {
                        return self.space.diameter_bound();
                    }
                    let phi = b.atan2(a);
                    let psi0 = (cr / m).clamp(-1.0, 1.0).acos();
                    ((phi + psi0) / k).max(0.0)
                }
            }
            Shape::Intersection(parts) => parts
                .iter()
                .map(|part| part.exit_time_unchecked(p, dir))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Which hypotheses of the curved-space pipeline hold for this domain.
    ///
    /// Flat convex domains: unique straight segments, infinite injectivity
    /// radius, no geodesic loops. Spherical domains are kept inside an open
    /// ball of radius `< pi/(2 sqrt(kappa))`, hence strongly convex; sphere
    /// injectivity radius and loop length meet their thresholds exactly, and
    /// the even-dimensional case additionally satisfies the compactness
    /// criterion.
    pub fn hypothesis_class(&self) -> HypothesisClass {
        if self.space.is_flat() {
            HypothesisClass {
                strongly_convex: true,
                injectivity_ok: true,
                loop_length_ok: true,
                synge_ok: false,
            }
        } else {
            HypothesisClass {
                strongly_convex: true,
                injectivity_ok: true,
                loop_length_ok: true,
                synge_ok: self.space.dim() % 2 == 0,
            }
        }
    }

    /// All half-space and ball primitives, flattening intersections.
    pub fn primitives(&self) -> (Vec<&Halfspace>, Vec<(&Point, f64)>) {
        let mut hs = Vec::new();
        let mut balls = Vec::new();
        self.collect_primitives(&mut hs, &mut balls);
        (hs, balls)
    }

    fn collect_primitives<'a>(
        &'a self,
        hs: &mut Vec<&'a Halfspace>,
        balls: &mut Vec<(&'a Point, f64)>,
    ) {
        match &self.shape {
            Shape::Polytope(h) => hs.extend(h.iter()),
            Shape::Ball { center, radius } => balls.push((center, *radius)),
            Shape::Intersection(parts) => {
                for part in parts {
                    part.collect_primitives(hs, balls);
                }
            }
        }
    }

    /// Vertices of a flat 2-D polytope in counter-clockwise order.
    pub fn polygon_vertices(&self) -> Result<Vec<[f64; 2]>> {
        if !self.space.is_flat() || self.space.dim() != 2 {
            return Err(Error::SpaceMismatch(
                "polygon vertices need flat 2-D space".into(),
            ));
        }
        let Shape::Polytope(hs) = &self.shape else {
            return Err(Error::InvalidParameter(
                "polygon vertices are only defined for polytopes".into(),
            ));
        };
        let scale = 1.0 + self.bounding_radius;
        let mut verts: Vec<[f64; 2]> = Vec::new();
        for i in 0..hs.len() {
            for j in (i + 1)..hs.len() {
                let (a, b) = (&hs[i], &hs[j]);
                let det = a.normal[0] * b.normal[1] - a.normal[1] * b.normal[0];
                if det.abs() < 1e-12 {
                    continue;
                }
                let x = (a.offset * b.normal[1] - b.offset * a.normal[1]) / det;
                let y = (a.normal[0] * b.offset - b.normal[0] * a.offset) / det;
                let p = [x, y];
                let feasible = hs
                    .iter()
                    .all(|h| h.normal[0] * x + h.normal[1] * y <= h.offset + 1e-8 * scale);
                if feasible && !verts.iter().any(|q| linalg::dist(q, &p) < 1e-10 * scale) {
                    verts.push(p);
                }
            }
        }
        if verts.len() < 3 {
            return Err(Error::EmptyInterior(format!(
                "only {} polytope vertices found",
                verts.len()
            )));
        }
        let cx = verts.iter().map(|v| v[0]).sum::<f64>() / verts.len() as f64;
        let cy = verts.iter().map(|v| v[1]).sum::<f64>() / verts.len() as f64;
        verts.sort_by(|p, q| {
            let ap = (p[1] - cy).atan2(p[0] - cx);
            let aq = (q[1] - cy).atan2(q[0] - cx);
            ap.partial_cmp(&aq).unwrap()
        });
        Ok(verts)
    }
}

fn find_intersection_witness(
    space: &ModelSpace,
    parts: &[ConvexDomain],
    bounding_center: &Point,
    bounding_radius: f64,
    bbox: &Option<(Vec<f64>, Vec<f64>)>,
) -> Result<Point> {
    let margin = |p: &Point| -> f64 {
        parts
            .iter()
            .map(|part| part.margin_unchecked(p))
            .fold(f64::INFINITY, f64::min)
    };
    let mut best: Option<(f64, Point)> = None;
    let mut consider = |p: Point| -> bool {
        if space.check_point(&p).is_err() {
            return false;
        }
        let m = margin(&p);
        if best.as_ref().is_none_or(|(bm, _)| m > *bm) {
            best = Some((m, p));
        }
        m > 1e-9
    };

    // direct candidates: part witnesses, then geodesic blends between pairs
    for part in parts {
        if consider(part.witness.clone()) {
            return Ok(best.unwrap().1);
        }
    }
    for i in 0..parts.len() {
        for j in 0..parts.len() {
            if i == j {
                continue;
            }
            let a = &parts[i].witness;
            let b = &parts[j].witness;
            let Ok(v) = space.log_map(a, b) else { continue };
            let d = v.norm();
            if d < 1e-15 {
                continue;
            }
            let Ok(dir) = v.normalized() else { continue };
            for frac in [0.5, 0.25, 0.75, 0.125, 0.375, 0.625, 0.875] {
                let p = space.exp_unit_unchecked(a, dir.components(), frac * d);
                if consider(p) {
                    return Ok(best.unwrap().1);
                }
            }
        }
    }

    // seeded rejection from the smallest bounding region
    let mut rng = ChaCha8Rng::seed_from_u64(WITNESS_SEED);
    for _ in 0..200_000 {
        let p = if let Some((lo, hi)) = bbox {
            let coords = lo
                .iter()
                .zip(hi)
                .map(|(l, h)| rng.random_range(*l..*h))
                .collect();
            Point::from_coords(coords)
        } else {
            random_point_in_cap(space, bounding_center, bounding_radius, &mut rng)
        };
        if consider(p) {
            return Ok(best.unwrap().1);
        }
    }
    match best {
        Some((m, p)) if m > 1e-12 => Ok(p),
        _ => Err(Error::EmptyInterior(
            "no interior witness found for the intersection".into(),
        )),
    }
}

/// Uniform point in the geodesic cap `B(center, radius)` on the sphere;
/// radial rejection against the exact area element.
pub(crate) fn random_point_in_cap(
    space: &ModelSpace,
    center: &Point,
    radius: f64,
    rng: &mut ChaCha8Rng,
) -> Point {
    let r_sphere = space.radius();
    let max_ang = (radius / r_sphere).min(std::f64::consts::PI);
    let sin_max = if max_ang >= std::f64::consts::FRAC_PI_2 {
        1.0
    } else {
        max_ang.sin()
    };
    let nm1 = (space.dim() - 1) as i32;
    let t = loop {
        let t: f64 = rng.random_range(0.0..max_ang);
        if nm1 == 0 {
            break t;
        }
        let u: f64 = rng.random();
        if u < (t.sin() / sin_max).powi(nm1) {
            break t;
        }
    };
    let dir = random_tangent_direction(space, center, rng);
    space.exp_unit_unchecked(center, &dir, t * r_sphere)
}

/// Uniform unit tangent direction at `p` (ambient components).
pub(crate) fn random_tangent_direction(
    space: &ModelSpace,
    p: &Point,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let ambient = space.ambient_dim();
    loop {
        let g: Vec<f64> = (0..ambient)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let v = if space.is_flat() {
            g
        } else {
            let unit = linalg::normalized(p.coords()).unwrap();
            linalg::project_out(&g, &unit)
        };
        if let Some(u) = linalg::normalized(&v) {
            return u;
        }
    }
}

/// Counter-clockwise convex hull (Andrew monotone chain); collinear points
/// are dropped.
pub fn convex_hull_2d(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| a == b);
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0
        {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0
        {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

// ---------------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct SpaceDto {
    kind: String,
    dim: usize,
    kappa: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum ShapeDto {
    Polytope {
        normals: Vec<Vec<f64>>,
        offsets: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Intersection {
        parts: Vec<ShapeDto>,
    },
}

/// Serialized form of a domain:
/// `{"space": {"kind": "euclidean"|"sphere", "dim": n, "kappa": k},
///   "shape": {"kind": "polytope"|"ball"|"intersection", ...}}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct DomainDescription {
    space: SpaceDto,
    shape: ShapeDto,
}

impl ConvexDomain {
    /// Parses the JSON domain schema; errors carry the JSON path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let dto: DomainDescription = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::Schema(format!("{} (at {})", e.inner(), e.path())))?;
        Self::from_description(dto)
    }

    pub fn from_description(dto: DomainDescription) -> Result<Self> {
        let space = match dto.space.kind.as_str() {
            "euclidean" => {
                if dto.space.kappa != 0.0 {
                    return Err(Error::Schema(
                        "euclidean space requires kappa = 0 (at space.kappa)".into(),
                    ));
                }
                ModelSpace::euclidean(dto.space.dim)?
            }
            "sphere" => ModelSpace::sphere(dto.space.dim, dto.space.kappa)?,
            other => {
                return Err(Error::Schema(format!(
                    "unknown space kind {other:?} (at space.kind)"
                )))
            }
        };
        build_shape(space, dto.shape)
    }

    /// Serializes back to the JSON domain schema.
    pub fn to_description(&self) -> DomainDescription {
        DomainDescription {
            space: SpaceDto {
                kind: if self.space.is_flat() {
                    "euclidean"
                } else {
                    "sphere"
                }
                .into(),
                dim: self.space.dim(),
                kappa: self.space.kappa(),
            },
            shape: shape_dto(&self.shape),
        }
    }
}

fn build_shape(space: ModelSpace, dto: ShapeDto) -> Result<ConvexDomain> {
    match dto {
        ShapeDto::Polytope { normals, offsets } => ConvexDomain::polytope(space, normals, offsets),
        ShapeDto::Ball { center, radius } => {
            let center = space.point(center)?;
            ConvexDomain::ball(space, center, radius)
        }
        ShapeDto::Intersection { parts } => {
            let parts = parts
                .into_iter()
                .map(|p| build_shape(space, p))
                .collect::<Result<Vec<_>>>()?;
            ConvexDomain::intersection(parts)
        }
    }
}

fn shape_dto(shape: &Shape) -> ShapeDto {
    match shape {
        Shape::Polytope(hs) => ShapeDto::Polytope {
            normals: hs.iter().map(|h| h.normal.clone()).collect(),
            offsets: hs.iter().map(|h| h.offset).collect(),
        },
        Shape::Ball { center, radius } => ShapeDto::Ball {
            center: center.coords().to_vec(),
            radius: *radius,
        },
        Shape::Intersection(parts) => ShapeDto::Intersection {
            parts: parts.iter().map(|p| shape_dto(&p.shape)).collect(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> ConvexDomain {
        let sp = ModelSpace::euclidean(2).unwrap();
        ConvexDomain::axis_box(sp, &[0.0, 0.0], &[1.0, 1.0]).unwrap()
    }

    fn unit_disc() -> ConvexDomain {
        let sp = ModelSpace::euclidean(2).unwrap();
        let c = sp.point(vec![0.0, 0.0]).unwrap();
        ConvexDomain::ball(sp, c, 1.0).unwrap()
    }

    fn cap(radius: f64) -> ConvexDomain {
        let sp = ModelSpace::sphere(2, 1.0).unwrap();
        let pole = sp.point(vec![0.0, 0.0, 1.0]).unwrap();
        ConvexDomain::ball(sp, pole, radius).unwrap()
    }

    #[test]
    fn square_membership() {
        let k = unit_square();
        let sp = *k.space();
        assert!(k.contains(&sp.point(vec![0.5, 0.5]).unwrap()).unwrap());
        assert!(!k.contains(&sp.point(vec![1.5, 0.5]).unwrap()).unwrap());
        assert!(k.contains(&sp.point(vec![0.0, 1.0]).unwrap()).unwrap()); // boundary
    }

    #[test]
    fn cap_membership() {
        let k = cap(0.5);
        let sp = *k.space();
        let p = sp.point(vec![0.4f64.sin(), 0.0, 0.4f64.cos()]).unwrap();
        assert!(k.contains(&p).unwrap());
        let q = sp.point(vec![0.6f64.sin(), 0.0, 0.6f64.cos()]).unwrap();
        assert!(!k.contains(&q).unwrap());
    }

    #[test]
    fn square_exit_time() {
        let k = unit_square();
        let sp = *k.space();
        let p = sp.point(vec![0.5, 0.5]).unwrap();
        let v = sp.unit_tangent(&p, vec![1.0, 0.0]).unwrap();
        assert!((k.exit_time(&p, &v).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ball_exit_time_from_center() {
        let k = unit_disc();
        let sp = *k.space();
        let p = sp.point(vec![0.0, 0.0]).unwrap();
        for ang in [0.0f64, 0.7, 2.0, 4.0] {
            let v = sp.unit_tangent(&p, vec![ang.cos(), ang.sin()]).unwrap();
            assert!((k.exit_time(&p, &v).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cap_exit_time_from_center() {
        let k = cap(0.8);
        let sp = *k.space();
        let p = sp.point(vec![0.0, 0.0, 1.0]).unwrap();
        let v = sp.unit_tangent(&p, vec![1.0, 0.0, 0.0]).unwrap();
        assert!((k.exit_time(&p, &v).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn exit_time_rejects_outside_point() {
        let k = unit_square();
        let sp = *k.space();
        let p = sp.point(vec![2.0, 0.5]).unwrap();
        let v = sp.unit_tangent(&p, vec![1.0, 0.0]).unwrap();
        assert!(matches!(k.exit_time(&p, &v), Err(Error::OutsideDomain)));
    }

    #[test]
    fn bounding_ball_square() {
        let k = unit_square();
        let (c, r) = k.bounding_ball();
        assert!((c.coords()[0] - 0.5).abs() < 1e-12);
        assert!((c.coords()[1] - 0.5).abs() < 1e-12);
        assert!((r - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bounding_ball_of_intersection_takes_smaller_part() {
        let sp = ModelSpace::euclidean(2).unwrap();
        let big = ConvexDomain::ball(sp, sp.point(vec![0.0, 0.0]).unwrap(), 2.0).unwrap();
        let small = ConvexDomain::ball(sp, sp.point(vec![0.5, 0.0]).unwrap(), 1.0).unwrap();
        let k = ConvexDomain::intersection(vec![big, small]).unwrap();
        let (c, r) = k.bounding_ball();
        assert_eq!(r, 1.0);
        assert!((c.coords()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unbounded_polytope_rejected() {
        let sp = ModelSpace::euclidean(2).unwrap();
        let res = ConvexDomain::polytope(sp, vec![vec![1.0, 0.0]], vec![1.0]);
        assert!(matches!(res, Err(Error::Unbounded(_))));
    }

    #[test]
    fn oversized_spherical_ball_rejected() {
        let sp = ModelSpace::sphere(2, 1.0).unwrap();
        let pole = sp.point(vec![0.0, 0.0, 1.0]).unwrap();
        let res = ConvexDomain::ball(sp, pole, 1.6);
        assert!(matches!(res, Err(Error::RadiusTooLarge { .. })));
    }

    #[test]
    fn intersect_ball_with_superset_keeps_membership() {
        let k = unit_disc();
        let sp = *k.space();
        let x0 = sp.point(vec![0.0, 0.0]).unwrap();
        let ki = k.intersect_ball(&x0, 2.0).unwrap();
        for pt in [[0.3, 0.3], [0.9, 0.0], [-0.5, -0.5]] {
            let p = sp.point(pt.to_vec()).unwrap();
            assert_eq!(ki.contains(&p).unwrap(), k.contains(&p).unwrap());
        }
    }

    #[test]
    fn intersect_ball_square_quarter_disc() {
        let k = unit_square();
        let sp = *k.space();
        let x0 = sp.point(vec![0.0, 0.0]).unwrap();
        let ki = k.intersect_ball(&x0, 0.5).unwrap();
        assert!(ki.contains(&sp.point(vec![0.3, 0.3]).unwrap()).unwrap());
        // distance 0.636 > 0.5
        assert!(!ki.contains(&sp.point(vec![0.45, 0.45]).unwrap()).unwrap());
    }

    #[test]
    fn intersect_ball_on_sphere_shrinks_cap() {
        let k = cap(1.0);
        let sp = *k.space();
        let pole = sp.point(vec![0.0, 0.0, 1.0]).unwrap();
        let ki = k.intersect_ball(&pole, 0.5).unwrap();
        let inside = sp.point(vec![0.4f64.sin(), 0.0, 0.4f64.cos()]).unwrap();
        let outside = sp.point(vec![0.7f64.sin(), 0.0, 0.7f64.cos()]).unwrap();
        assert!(ki.contains(&inside).unwrap());
        assert!(!ki.contains(&outside).unwrap());
        // R too large on the sphere is rejected
        assert!(matches!(
            k.intersect_ball(&pole, 1.6),
            Err(Error::RadiusTooLarge { .. })
        ));
    }

    #[test]
    fn empty_intersection_is_rejected() {
        let sp = ModelSpace::euclidean(2).unwrap();
        let a = ConvexDomain::ball(sp, sp.point(vec![0.0, 0.0]).unwrap(), 1.0).unwrap();
        let b = ConvexDomain::ball(sp, sp.point(vec![5.0, 0.0]).unwrap(), 1.0).unwrap();
        assert!(matches!(
            ConvexDomain::intersection(vec![a, b]),
            Err(Error::EmptyInterior(_))
        ));
    }

    #[test]
    fn witness_found_for_thin_lens() {
        let sp = ModelSpace::euclidean(2).unwrap();
        let a = ConvexDomain::ball(sp, sp.point(vec![0.0, 0.0]).unwrap(), 1.0).unwrap();
        let b = ConvexDomain::ball(sp, sp.point(vec![1.9, 0.0]).unwrap(), 1.0).unwrap();
        let k = ConvexDomain::intersection(vec![a, b]).unwrap();
        let w = k.interior_witness().clone();
        assert!(k.interior_margin(&w).unwrap() > 0.0);
    }

    #[test]
    fn polygon_vertices_of_square() {
        let k = unit_square();
        let v = k.polygon_vertices().unwrap();
        assert_eq!(v.len(), 4);
        let mut corners: Vec<[f64; 2]> = v.clone();
        corners.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(linalg::dist(&corners[0], &[0.0, 0.0]) < 1e-10);
        assert!(linalg::dist(&corners[3], &[1.0, 1.0]) < 1e-10);
    }

    #[test]
    fn hull_of_square_corners() {
        let sp = ModelSpace::euclidean(2).unwrap();
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.5], [1.0, 1.0], [0.0, 1.0]];
        let k = ConvexDomain::polygon_hull(sp, &pts).unwrap();
        assert!(k.contains(&sp.point(vec![0.99, 0.5]).unwrap()).unwrap());
        assert!(!k.contains(&sp.point(vec![1.01, 0.5]).unwrap()).unwrap());
        let v = k.polygon_vertices().unwrap();
        assert_eq!(v.len(), 4);
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{
            "space": {"kind": "euclidean", "dim": 2, "kappa": 0.0},
            "shape": {"kind": "intersection", "parts": [
                {"kind": "ball", "center": [0.0, 0.0], "radius": 1.0},
                {"kind": "polytope", "normals": [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
                 "offsets": [0.8, 0.8, 0.8, 0.8]}
            ]}
        }"#;
        let k = ConvexDomain::from_json(text).unwrap();
        let sp = *k.space();
        assert!(k.contains(&sp.point(vec![0.7, 0.1]).unwrap()).unwrap());
        assert!(!k.contains(&sp.point(vec![0.9, 0.0]).unwrap()).unwrap());
        let json = serde_json::to_string(&k.to_description()).unwrap();
        let k2 = ConvexDomain::from_json(&json).unwrap();
        assert!(k2.contains(&sp.point(vec![0.7, 0.1]).unwrap()).unwrap());
    }

    #[test]
    fn schema_errors_carry_path() {
        let text = r#"{"space": {"kind": "euclidean", "dim": 2, "kappa": 0.0},
                       "shape": {"kind": "ball", "center": [0.0, "x"], "radius": 1.0}}"#;
        let err = ConvexDomain::from_json(text).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("shape"), "missing path in {msg}");
    }

    #[test]
    fn hypothesis_class_flags() {
        let flat = unit_square().hypothesis_class();
        assert!(flat.strongly_convex && flat.injectivity_ok && flat.loop_length_ok);
        assert!(!flat.synge_ok);
        let s2 = cap(0.5).hypothesis_class();
        assert!(s2.synge_ok); // even-dimensional sphere
        let sp3 = ModelSpace::sphere(3, 1.0).unwrap();
        let pole = sp3.point(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let c3 = ConvexDomain::ball(sp3, pole, 0.5)
            .unwrap()
            .hypothesis_class();
        assert!(!c3.synge_ok && c3.strongly_convex);
    }
}
