//! Convex compact sets in the plane and their support functions.
//!
//! Every set is stored as the ordered list of its extreme points
//! (counterclockwise), so the support function `H_K(z) = sup{Re(zu) : u ∈ K}`
//! is exact: the sup of a linear functional over a polytope is attained at a
//! vertex. Degenerate sets (singletons, segments) are first-class citizens;
//! they are exactly the sets the translation-dynamics constructions use.

use crate::{C, Error, Result};
use serde::{Deserialize, Serialize};

/// Collinearity / containment tolerance for the vertex polytopes.
pub const GEOM_EPS: f64 = 1e-12;

/// Convex compact in the plane, stored by its extreme points in
/// counterclockwise order. One vertex is a singleton, two form a segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexCompact {
    #[serde(with = "crate::cjson::vec")]
    pub vertices: Vec<C>,
}

/// One sample of an indicator function: growth rate `value` along the ray of
/// angle `theta`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IndicatorSample {
    pub theta: f64,
    pub value: f64,
}

fn cross(o: C, a: C, b: C) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Extreme points of the convex hull of `points`, counterclockwise.
///
/// Monotone chain; collinear interior points are dropped (tolerance scaled by
/// the point spread). Collinear input collapses to a segment, coincident
/// input to a singleton.
pub fn hull(points: &[C]) -> Result<ConvexCompact> {
    if points.is_empty() {
        return Err(Error::EmptyInput("hull of no points"));
    }
    let mut pts: Vec<C> = points.to_vec();
    pts.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    pts.dedup_by(|a, b| (*a - *b).norm() <= GEOM_EPS);
    if pts.len() == 1 {
        return Ok(ConvexCompact {
            vertices: vec![pts[0]],
        });
    }
    let scale: f64 = pts
        .iter()
        .map(|p| (*p - pts[0]).norm())
        .fold(0.0, f64::max)
        .max(1.0);
    let tol = GEOM_EPS * scale * scale;

    let build = |iter: &mut dyn Iterator<Item = &C>| {
        let mut chain: Vec<C> = Vec::new();
        for &p in iter {
            while chain.len() >= 2 && cross(chain[chain.len() - 2], chain[chain.len() - 1], p) <= tol
            {
                chain.pop();
            }
            chain.push(p);
        }
        chain
    };
    let lower = build(&mut pts.iter());
    let upper = build(&mut pts.iter().rev());

    let mut vertices = lower;
    vertices.pop();
    vertices.extend_from_slice(&upper[..upper.len() - 1]);
    if vertices.is_empty() {
        // all points collinear and the chains collapsed: keep the two extremes
        vertices = vec![pts[0], *pts.last().unwrap()];
    }
    if vertices.len() == 2 && (vertices[0] - vertices[1]).norm() <= GEOM_EPS {
        vertices.pop();
    }
    Ok(ConvexCompact { vertices })
}

impl ConvexCompact {
    pub fn singleton(p: C) -> Self {
        ConvexCompact { vertices: vec![p] }
    }

    /// The closed segment `[v, w]` (collapses to a singleton if `v == w`).
    pub fn segment(v: C, w: C) -> Self {
        if (v - w).norm() <= GEOM_EPS {
            ConvexCompact { vertices: vec![v] }
        } else {
            ConvexCompact {
                vertices: vec![v, w],
            }
        }
    }

    /// `H_K(z) = max{Re(zu) : u vertex of K}`.
    pub fn support(&self, z: C) -> f64 {
        self.vertices
            .iter()
            .map(|u| (z * u).re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Indicator of the set along angle `theta`: `H_K(e^{iθ})`.
    pub fn indicator(&self, theta: f64) -> f64 {
        self.support(C::from_polar(1.0, theta))
    }

    /// All vertices shifted by `alpha`; `H_{K+α}(z) = H_K(z) + Re(αz)`.
    pub fn translate(&self, alpha: C) -> ConvexCompact {
        ConvexCompact {
            vertices: self.vertices.iter().map(|v| v + alpha).collect(),
        }
    }

    /// Full spread of the imaginary coordinates over the vertices.
    pub fn vertical_extent(&self) -> f64 {
        let lo = self
            .vertices
            .iter()
            .map(|v| v.im)
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .vertices
            .iter()
            .map(|v| v.im)
            .fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }

    fn scale(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(1.0, f64::max)
    }

    /// Support-function test directions: outward edge normals and edge
    /// directions (exact for polytopes), plus a fixed 360-direction sweep.
    fn test_directions(&self) -> Vec<C> {
        let mut dirs = Vec::new();
        let n = self.vertices.len();
        if n == 1 {
            dirs.extend_from_slice(&[C::new(1.0, 0.0), C::new(-1.0, 0.0), C::new(0.0, 1.0), C::new(0.0, -1.0)]);
        } else {
            for i in 0..n {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                let e = (b - a) / (b - a).norm();
                // outward normal of a ccw edge, both ways for degenerate cycles
                dirs.push(e * C::new(0.0, -1.0));
                dirs.push(e * C::new(0.0, 1.0));
                dirs.push(e);
                dirs.push(-e);
            }
        }
        for k in 0..360 {
            dirs.push(C::from_polar(1.0, k as f64 * std::f64::consts::PI / 180.0));
        }
        dirs
    }

    /// Polytope containment `self ⊆ other` via support-function inequalities.
    /// Returns the violating direction angle when containment fails.
    pub fn contained_in(&self, other: &ConvexCompact) -> std::result::Result<(), f64> {
        let tol = GEOM_EPS * self.scale().max(other.scale());
        for d in other.test_directions() {
            if self.support(d) > other.support(d) + tol {
                return Err(d.arg());
            }
        }
        Ok(())
    }
}
