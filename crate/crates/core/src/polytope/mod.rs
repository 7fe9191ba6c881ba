//! Exact convex-geometry kernel: affine dimension, conversion between
//! vertex and facet representations via double description, facet
//! verification, and membership certificates.

mod dd;
mod linalg;
mod simplex;

pub use simplex::{convex_certificate, CertificateOutcome, MembershipCertificate};

use serde::Serialize;

use crate::model::{
    canonical_scale_vector, FacetList, HRepresentation, LinearInequality, Picture, PointList,
};
use crate::rational::{dot, Rat};

use dd::{extreme_rays, leading_positive, prepare_rows, ray_to_rat};
use linalg::Rref;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolytopeError {
    #[error("empty input")]
    EmptyInput,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("inequality system describes an unbounded region")]
    Unbounded,
    #[error("inequality system is inconsistent (empty polytope)")]
    Inconsistent,
    #[error("cone is not pointed")]
    NotPointed,
}

fn check_uniform_dims(points: &[Vec<Rat>]) -> Result<usize, PolytopeError> {
    let first = points.first().ok_or(PolytopeError::EmptyInput)?;
    let d = first.len();
    for p in points {
        if p.len() != d {
            return Err(PolytopeError::DimensionMismatch {
                expected: d,
                got: p.len(),
            });
        }
    }
    Ok(d)
}

/// Exact rank of a list of vectors.
pub fn linear_rank(rows: &[Vec<Rat>], ncols: usize) -> usize {
    linalg::rank(rows, ncols)
}

/// Dimension of the affine hull of a nonempty point set, by exact rank of
/// difference vectors.
pub fn affine_dimension(points: &[Vec<Rat>]) -> Result<usize, PolytopeError> {
    let d = check_uniform_dims(points)?;
    let base = &points[0];
    let diffs: Vec<Vec<Rat>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(x, y)| x - y).collect())
        .collect();
    Ok(linalg::rank(&diffs, d))
}

fn sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Canonical equation form: primitive integers with positive leading
/// coefficient.
fn canonical_equation(mut coeffs: Vec<Rat>, mut bound: Rat) -> LinearInequality {
    let mut all = coeffs.clone();
    all.push(bound.clone());
    canonical_scale_vector(&mut all);
    bound = all.pop().unwrap();
    coeffs = all;
    if !leading_positive(&coeffs) {
        for c in coeffs.iter_mut() {
            *c = -&*c;
        }
        bound = -bound;
    }
    LinearInequality {
        picture: Picture::Probability,
        coeffs,
        bound,
    }
}

/// Converts a vertex representation to the facet representation.
///
/// Affine-hull equations are extracted first; double description then
/// runs inside hull coordinates, where the polytope is full-dimensional.
pub fn vertices_to_facets(points: &PointList) -> Result<HRepresentation, PolytopeError> {
    let mut points = points.clone();
    points.canonicalize();
    let d = check_uniform_dims(&points.points)?;
    let base = points.points[0].clone();
    let diffs: Vec<Vec<Rat>> = points.points[1..].iter().map(|p| sub(p, &base)).collect();
    let hull = Rref::new(&diffs, d);

    let mut equations: Vec<LinearInequality> = hull
        .nullspace_basis()
        .into_iter()
        .map(|normal| {
            let bound = dot(&normal, &base);
            let mut eq = canonical_equation(normal, bound);
            eq.picture = points.picture;
            eq
        })
        .collect();
    equations.sort_by_key(|x| x.sort_key());

    let mut facets = Vec::new();
    if hull.rank() > 0 {
        let pivots = hull.pivots.clone();
        // Hull coordinates: components of x - base at the pivot columns.
        let coords: Vec<Vec<Rat>> = points
            .points
            .iter()
            .map(|p| {
                let diff = sub(p, &base);
                pivots.iter().map(|&c| diff[c].clone()).collect()
            })
            .collect();
        // Dual cone of the lifted points (1, t): its extreme rays are the
        // facets of the hull-coordinate polytope.
        let rows: Vec<Vec<Rat>> = coords
            .iter()
            .map(|t| {
                let mut row = Vec::with_capacity(t.len() + 1);
                row.push(Rat::one());
                row.extend(t.iter().cloned());
                row
            })
            .collect();
        let int_rows = prepare_rows(&rows);
        let rays = extreme_rays(&int_rows, hull.rank() + 1)?;
        for ray in rays {
            let ray = ray_to_rat(&ray);
            // ray (y0, y): y0 + y . t >= 0, i.e. (-y) . t <= y0
            let mut coeffs = vec![Rat::zero(); d];
            for (y, &col) in ray[1..].iter().zip(&pivots) {
                coeffs[col] = -y;
            }
            let bound = &ray[0] + dot(&coeffs, &base);
            facets.push(LinearInequality::new(points.picture, coeffs, bound).canonicalized());
        }
    }
    facets.sort_by_key(|x| x.sort_key());

    Ok(HRepresentation {
        picture: points.picture,
        scenario: points.scenario,
        facets,
        equations,
    })
}

/// Converts a facet representation back to the vertex representation.
///
/// The region must be bounded (checked: an extreme ray of the homogenized
/// cone at height zero, or a lineality direction, means unbounded) and
/// consistent.
pub fn facets_to_vertices(h: &HRepresentation) -> Result<PointList, PolytopeError> {
    let d = h
        .facets
        .first()
        .map(|f| f.dim())
        .or_else(|| h.equations.first().map(|e| e.dim()))
        .ok_or(PolytopeError::EmptyInput)?;
    for ineq in h.facets.iter().chain(&h.equations) {
        if ineq.dim() != d {
            return Err(PolytopeError::DimensionMismatch {
                expected: d,
                got: ineq.dim(),
            });
        }
    }

    // Substitute out the equations: x = x_part + N t with t free.
    let aug: Vec<Vec<Rat>> = h
        .equations
        .iter()
        .map(|eq| {
            let mut row = eq.coeffs.clone();
            row.push(eq.bound.clone());
            row
        })
        .collect();
    let eq_rref = Rref::new(&aug, d + 1);
    if eq_rref.pivots.contains(&d) {
        return Err(PolytopeError::Inconsistent);
    }
    let pivots = eq_rref.pivots.clone();
    let free: Vec<usize> = (0..d).filter(|c| !pivots.contains(c)).collect();

    let mut x_part = vec![Rat::zero(); d];
    for (row, &p) in eq_rref.rows.iter().zip(&pivots) {
        x_part[p] = row[d].clone();
    }
    // Column c of N: 1 at free[c], minus the rref entries at the pivots.
    let n_cols: Vec<Vec<Rat>> = free
        .iter()
        .map(|&fc| {
            let mut col = vec![Rat::zero(); d];
            col[fc] = Rat::one();
            for (row, &p) in eq_rref.rows.iter().zip(&pivots) {
                col[p] = -row[fc].clone();
            }
            col
        })
        .collect();

    // Facets in the reduced coordinates, then homogenize.
    let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(h.facets.len() + 1);
    for facet in &h.facets {
        let reduced: Vec<Rat> = n_cols.iter().map(|col| dot(&facet.coeffs, col)).collect();
        let offset = &facet.bound - dot(&facet.coeffs, &x_part);
        if reduced.iter().all(|c| c.is_zero()) {
            if offset.is_negative() {
                return Err(PolytopeError::Inconsistent);
            }
            continue;
        }
        let mut row = Vec::with_capacity(free.len() + 1);
        row.push(offset);
        row.extend(reduced.iter().map(|c| -c));
        rows.push(row);
    }
    // height coordinate stays nonnegative
    let mut e0 = vec![Rat::zero(); free.len() + 1];
    e0[0] = Rat::one();
    rows.push(e0);

    let int_rows = prepare_rows(&rows);
    let rays = match extreme_rays(&int_rows, free.len() + 1) {
        Ok(rays) => rays,
        Err(PolytopeError::NotPointed) => return Err(PolytopeError::Unbounded),
        Err(e) => return Err(e),
    };
    if rays.is_empty() {
        return Err(PolytopeError::Inconsistent);
    }

    let mut points = Vec::with_capacity(rays.len());
    for ray in rays {
        let ray = ray_to_rat(&ray);
        if ray[0].is_zero() {
            return Err(PolytopeError::Unbounded);
        }
        let scale = ray[0].recip();
        let mut x = x_part.clone();
        for (r, col) in ray[1..].iter().zip(&n_cols) {
            if r.is_zero() {
                continue;
            }
            let t = r * &scale;
            for (xi, ci) in x.iter_mut().zip(col) {
                *xi += &t * ci;
            }
        }
        points.push(x);
    }

    Ok(PointList::new(h.picture, h.scenario, points))
}

/// Either representation of a polytope; [`dd_convert`] flips between them.
#[derive(Debug, Clone)]
pub enum Representation {
    Vertices(PointList),
    Facets(HRepresentation),
}

/// Double-description conversion in whichever direction the input calls
/// for.
pub fn dd_convert(input: &Representation) -> Result<Representation, PolytopeError> {
    match input {
        Representation::Vertices(v) => Ok(Representation::Facets(vertices_to_facets(v)?)),
        Representation::Facets(h) => Ok(Representation::Vertices(facets_to_vertices(h)?)),
    }
}

/// Outcome of checking one inequality against a point set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FacetReport {
    /// Every point satisfies the inequality.
    pub valid: bool,
    pub violating_points: usize,
    pub tight_points: usize,
    /// Affine dimension of the tight subset; -1 when no point is tight.
    #[serde(rename = "tightRank")]
    pub tight_rank: i64,
    /// Affine dimension of the whole point set.
    pub points_rank: i64,
    /// Valid and tight on a subset of dimension exactly one less than the
    /// point set's.
    pub is_facet: bool,
}

/// Independent facet oracle: validity plus the affine rank of the tight
/// subset, with no reference to how the inequality was produced.
pub fn verify_facet(
    ineq: &LinearInequality,
    points: &PointList,
) -> Result<FacetReport, PolytopeError> {
    let d = check_uniform_dims(&points.points)?;
    if ineq.dim() != d {
        return Err(PolytopeError::DimensionMismatch {
            expected: d,
            got: ineq.dim(),
        });
    }
    let mut tight = Vec::new();
    let mut violating = 0usize;
    for p in &points.points {
        let margin = ineq.margin(p);
        if margin.is_positive() {
            violating += 1;
        } else if margin.is_zero() {
            tight.push(p.clone());
        }
    }
    let points_rank = affine_dimension(&points.points)? as i64;
    let tight_rank = if tight.is_empty() {
        -1
    } else {
        affine_dimension(&tight)? as i64
    };
    Ok(FacetReport {
        valid: violating == 0,
        violating_points: violating,
        tight_points: tight.len(),
        tight_rank,
        points_rank,
        is_facet: violating == 0 && tight_rank == points_rank - 1,
    })
}

/// Result of exact membership screening against an H-representation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MembershipReport {
    pub member: bool,
    /// Indices into the facet list with `coeffs . x > bound`.
    pub violated_facets: Vec<usize>,
    /// Indices into the equation list with `coeffs . x != bound`.
    pub violated_equations: Vec<usize>,
}

/// Checks every facet and affine-hull equation exactly.
pub fn membership(point: &[Rat], h: &HRepresentation) -> Result<MembershipReport, PolytopeError> {
    for ineq in h.facets.iter().chain(&h.equations) {
        if ineq.dim() != point.len() {
            return Err(PolytopeError::DimensionMismatch {
                expected: ineq.dim(),
                got: point.len(),
            });
        }
    }
    let violated_facets = h
        .facets
        .iter()
        .enumerate()
        .filter(|(_, f)| f.margin(point).is_positive())
        .map(|(i, _)| i)
        .collect::<Vec<_>>();
    let violated_equations = h
        .equations
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.margin(point).is_zero())
        .map(|(i, _)| i)
        .collect::<Vec<_>>();
    Ok(MembershipReport {
        member: violated_facets.is_empty() && violated_equations.is_empty(),
        violated_facets,
        violated_equations,
    })
}

/// Canonical representative of an inequality modulo affine-hull
/// equations: the equations' pivot columns are eliminated from the
/// coefficients, then the result is scaled to primitive integers.
///
/// Facets of a lower-dimensional polytope are only defined up to adding
/// multiples of hull equations; reducing both sides of a comparison with
/// this gauge makes equality decidable.
pub fn reduce_mod_equations(
    ineq: &LinearInequality,
    equations: &[LinearInequality],
) -> LinearInequality {
    if equations.is_empty() {
        return ineq.canonicalized();
    }
    let d = ineq.dim();
    let aug: Vec<Vec<Rat>> = equations
        .iter()
        .map(|eq| {
            let mut row = eq.coeffs.clone();
            row.push(eq.bound.clone());
            row
        })
        .collect();
    let rref = Rref::new(&aug, d + 1);
    let mut row = ineq.coeffs.clone();
    row.push(ineq.bound.clone());
    let mut reduced = rref.residual(row);
    let bound = reduced.pop().unwrap();
    LinearInequality::new(ineq.picture, reduced, bound).canonicalized()
}

/// A `FacetList` with every member reduced modulo the given equations.
pub fn reduce_facet_list(list: &FacetList, equations: &[LinearInequality]) -> FacetList {
    FacetList::new(
        list.picture,
        list.facets
            .iter()
            .map(|f| reduce_mod_equations(f, equations))
            .collect(),
    )
}
