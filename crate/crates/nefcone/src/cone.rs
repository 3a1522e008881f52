//! Polyhedral cones in two representations, converted by the double
//! description method.
//!
//! A `PolyCone` holds ray generators, facet inequalities, or both. Rays
//! generate the cone as nonnegative combinations; facets describe it as
//! `{x : f.x >= 0 for all f}`. Cones need not be pointed or full-dimensional:
//! a line is represented by a pair of opposite generators, a proper span by a
//! pair of opposite facet normals. All arithmetic is exact.

use crate::error::Error;
use crate::linalg::{parse_rational, rational_string, Matrix, Rational, Vector};
use crate::lp;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

/// Which representations are currently stored.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RepState {
    RaysOnly,
    FacetsOnly,
    Both,
}

#[derive(Clone, PartialEq, Eq)]
pub struct PolyCone {
    dim: usize,
    rays: Option<Vec<Vector>>,
    facets: Option<Vec<Vector>>,
}

/// Result of a membership test with its certificate.
pub enum Membership {
    /// Coefficients aligned with the cone's ray list.
    Inside { combination: Vec<Rational> },
    /// A facet normal nonnegative on the cone and negative on the query.
    Outside { separator: Vector },
}

impl Membership {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside { .. })
    }
}

impl PolyCone {
    pub fn from_rays(dim: usize, rays: Vec<Vector>) -> Result<PolyCone, Error> {
        check_dim(dim, &rays)?;
        Ok(PolyCone { dim, rays: Some(canonical_list(rays)), facets: None })
    }

    pub fn from_facets(dim: usize, facets: Vec<Vector>) -> Result<PolyCone, Error> {
        check_dim(dim, &facets)?;
        Ok(PolyCone { dim, rays: None, facets: Some(canonical_list(facets)) })
    }

    /// Builds from optional representations, validating consistency when both
    /// are present (used by the JSON loader).
    pub fn from_parts(
        dim: usize,
        rays: Option<Vec<Vector>>,
        facets: Option<Vec<Vector>>,
    ) -> Result<PolyCone, Error> {
        match (rays, facets) {
            (None, None) => Err(Error::EmptyRepresentation),
            (Some(r), None) => Self::from_rays(dim, r),
            (None, Some(f)) => Self::from_facets(dim, f),
            (Some(r), Some(f)) => {
                check_dim(dim, &r)?;
                check_dim(dim, &f)?;
                let cone = PolyCone {
                    dim,
                    rays: Some(canonical_list(r)),
                    facets: Some(canonical_list(f)),
                };
                cone.validate_dual_pair()?;
                Ok(cone)
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rep_state(&self) -> RepState {
        match (&self.rays, &self.facets) {
            (Some(_), Some(_)) => RepState::Both,
            (Some(_), None) => RepState::RaysOnly,
            (None, Some(_)) => RepState::FacetsOnly,
            (None, None) => unreachable!("cone with no representation"),
        }
    }

    /// Ray generators; converts from facets first if needed.
    pub fn rays(&self) -> Result<Vec<Vector>, Error> {
        match &self.rays {
            Some(r) => Ok(r.clone()),
            None => {
                let (rays, lineality) = extreme_gens(self.facets.as_ref().unwrap(), self.dim);
                Ok(assemble_generators(rays, &lineality))
            }
        }
    }

    /// Facet inequality normals; converts from rays first if needed.
    pub fn facets(&self) -> Result<Vec<Vector>, Error> {
        match &self.facets {
            Some(f) => Ok(f.clone()),
            None => {
                let (dual_rays, dual_lin) = extreme_gens(self.rays.as_ref().unwrap(), self.dim);
                Ok(assemble_generators(dual_rays, &dual_lin))
            }
        }
    }

    /// Completes both representations, canonically and irredundantly.
    /// When both representations were supplied they are cross-checked first.
    pub fn dd_convert(&self) -> Result<PolyCone, Error> {
        if self.rep_state() == RepState::Both {
            self.validate_dual_pair()?;
        }
        let facets = self.facets()?;
        let (rays, lineality) = extreme_gens(&facets, self.dim);
        let gens = assemble_generators(rays, &lineality);
        // Re-deriving facets from the canonical generators prunes redundant
        // input inequalities.
        let (dual_rays, dual_lin) = extreme_gens(&gens, self.dim);
        let facets = assemble_generators(dual_rays, &dual_lin);
        Ok(PolyCone { dim: self.dim, rays: Some(gens), facets: Some(facets) })
    }

    fn validate_dual_pair(&self) -> Result<(), Error> {
        let rays = self.rays.as_ref().unwrap();
        let facets = self.facets.as_ref().unwrap();
        for r in rays {
            if facets.iter().any(|f| f.dot(r).is_negative()) {
                return Err(Error::InconsistentDualPair { witness: r.clone() });
            }
        }
        // The facet system may not cut anything outside the ray span.
        let (hrays, hlin) = extreme_gens(facets, self.dim);
        for g in assemble_generators(hrays, &hlin) {
            if let lp::CombinationOutcome::Separator(_) = lp::nonneg_combination(rays, &g) {
                return Err(Error::InconsistentDualPair { witness: g });
            }
        }
        Ok(())
    }

    /// A nonzero direction v with both v and -v in the cone, if any.
    pub fn lineality_witness(&self) -> Result<Option<Vector>, Error> {
        if let Some(facets) = &self.facets {
            if facets.is_empty() {
                return Ok(Some(Vector::unit(self.dim, 0)));
            }
            let m = Matrix::from_rows(facets);
            return Ok(m.kernel_basis().into_iter().next());
        }
        let rays = self.rays.as_ref().unwrap();
        if rays.is_empty() {
            return Ok(None);
        }
        // Strict iff some functional is strictly positive on every generator.
        if lp::strict_system_feasible(rays, self.dim).is_some() {
            return Ok(None);
        }
        // Farkas: a vanishing nonnegative combination exists; any generator
        // with positive coefficient spans a line inside the cone.
        let a = Matrix::from_rows(rays);
        let ones = Vector(vec![Rational::from_integer(1.into()); rays.len()]);
        match lp::inequalities_feasible(&a, &ones) {
            lp::IneqOutcome::Infeasible(y) => {
                let i = y.0.iter().position(|c| c.is_positive()).expect("nonzero Farkas");
                Ok(Some(rays[i].clone()))
            }
            lp::IneqOutcome::Feasible(_) => unreachable!("strict system both feasible and not"),
        }
    }

    pub fn is_strict(&self) -> Result<bool, Error> {
        Ok(self.lineality_witness()?.is_none())
    }

    /// Minimal generating set; errors on cones containing a line.
    pub fn extremal_rays(&self) -> Result<Vec<Vector>, Error> {
        if let Some(direction) = self.lineality_witness()? {
            return Err(Error::ConeContainsLine { direction });
        }
        match &self.facets {
            Some(facets) => {
                let (rays, lineality) = extreme_gens(facets, self.dim);
                debug_assert!(lineality.is_empty());
                Ok(rays)
            }
            None => {
                // Prune generators that are combinations of the others.
                let mut gens = self.rays.as_ref().unwrap().clone();
                let mut i = 0;
                while i < gens.len() {
                    let mut others = gens.clone();
                    let g = others.remove(i);
                    match lp::nonneg_combination(&others, &g) {
                        lp::CombinationOutcome::Combination(_) => {
                            gens.remove(i);
                        }
                        lp::CombinationOutcome::Separator(_) => i += 1,
                    }
                }
                Ok(gens)
            }
        }
    }

    /// Membership with certificate.
    pub fn member(&self, v: &Vector) -> Result<Membership, Error> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.dim() });
        }
        let facets = self.facets()?;
        if let Some(f) = facets.iter().find(|f| f.dot(v).is_negative()) {
            return Ok(Membership::Outside { separator: f.clone() });
        }
        let rays = self.rays()?;
        match lp::nonneg_combination(&rays, v) {
            lp::CombinationOutcome::Combination(c) => Ok(Membership::Inside { combination: c }),
            lp::CombinationOutcome::Separator(_) => {
                unreachable!("facet check passed but no combination exists")
            }
        }
    }

    pub fn contains(&self, v: &Vector) -> Result<bool, Error> {
        Ok(self.member(v)?.is_inside())
    }

    /// Whether v satisfies every facet strictly (topological interior for
    /// full-dimensional cones; empty otherwise).
    pub fn interior_contains(&self, v: &Vector) -> Result<bool, Error> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.dim() });
        }
        let facets = self.facets()?;
        Ok(facets.iter().all(|f| f.dot(v).is_positive()))
    }

    /// Minkowski sum: generated by the union of generators, re-extremalized.
    pub fn minkowski_sum(&self, other: &PolyCone) -> Result<PolyCone, Error> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let mut gens = self.rays()?;
        gens.extend(other.rays()?);
        let cone = PolyCone { dim: self.dim, rays: Some(canonical_list(gens)), facets: None };
        if cone.is_strict()? {
            let extremal = cone.extremal_rays()?;
            PolyCone::from_rays(self.dim, extremal)
        } else {
            Ok(cone)
        }
    }

    /// Image under an injective linear map (rays map forward).
    pub fn map_cone(&self, m: &Matrix) -> Result<PolyCone, Error> {
        if m.cols != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: m.cols });
        }
        if m.rank() < m.cols {
            return Err(Error::RankDeficientMap);
        }
        let rays = self.rays()?.iter().map(|r| m.mul_vec(r)).collect();
        PolyCone::from_rays(m.rows, rays)
    }

    /// JSON document `{ "dim": n, "rays": [...], "facets": [...] }` with
    /// rational entries encoded as integers or "p/q" strings.
    pub fn to_json(&self) -> Value {
        let mut obj = serde_json::Map::new();
        obj.insert("dim".into(), json!(self.dim));
        if let Some(rays) = &self.rays {
            obj.insert("rays".into(), vectors_to_json(rays));
        }
        if let Some(facets) = &self.facets {
            obj.insert("facets".into(), vectors_to_json(facets));
        }
        Value::Object(obj)
    }

    pub fn from_json(v: &Value) -> Result<PolyCone, Error> {
        let obj = v.as_object().ok_or_else(|| Error::Schema("cone must be an object".into()))?;
        let dim = obj
            .get("dim")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Schema("cone needs an integer \"dim\"".into()))?
            as usize;
        let rays = obj.get("rays").map(|r| vectors_from_json(r, dim)).transpose()?;
        let facets = obj.get("facets").map(|f| vectors_from_json(f, dim)).transpose()?;
        PolyCone::from_parts(dim, rays, facets)
    }
}

fn check_dim(dim: usize, vs: &[Vector]) -> Result<(), Error> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    for v in vs {
        if v.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: v.dim() });
        }
    }
    Ok(())
}

/// Primitive scaling, lexicographic sort, dedup; zero vectors dropped.
fn canonical_list(vs: Vec<Vector>) -> Vec<Vector> {
    let mut out: Vec<Vector> =
        vs.into_iter().filter(|v| !v.is_zero()).map(|v| v.primitive()).collect();
    out.sort();
    out.dedup();
    out
}

/// Extreme rays plus +/- pairs for a canonical lineality basis.
fn assemble_generators(rays: Vec<Vector>, lineality: &[Vector]) -> Vec<Vector> {
    let mut out = rays;
    for l in lineality {
        out.push(l.clone());
        out.push(-l);
    }
    canonical_list(out)
}

/// Bitset over constraint indices.
#[derive(Clone)]
struct ZeroSet {
    words: Vec<u64>,
}

impl ZeroSet {
    fn new(capacity: usize) -> Self {
        ZeroSet { words: vec![0; capacity.div_ceil(64)] }
    }

    fn full_up_to(capacity: usize, n: usize) -> Self {
        let mut z = Self::new(capacity);
        for i in 0..n {
            z.set(i);
        }
        z
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1u64 << (i % 64);
    }

    fn intersect(&self, other: &ZeroSet) -> ZeroSet {
        ZeroSet {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    fn is_subset_of(&self, other: &ZeroSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

struct Ray {
    v: Vector,
    zero: ZeroSet,
}

/// Double description: the V-representation of `{x : c.x >= 0 for all c}`.
/// Returns (extreme rays modulo lineality, canonical lineality basis).
pub fn extreme_gens(constraints: &[Vector], dim: usize) -> (Vec<Vector>, Vec<Vector>) {
    let ncons = constraints.len();
    let mut lineality: Vec<Vector> = (0..dim).map(|i| Vector::unit(dim, i)).collect();
    let mut rays: Vec<Ray> = Vec::new();

    for (idx, a) in constraints.iter().enumerate() {
        let pivot = lineality.iter().position(|b| !a.dot(b).is_zero());
        if let Some(k) = pivot {
            // The constraint kills one lineality direction, which becomes a ray.
            let mut b = lineality.remove(k);
            if a.dot(&b).is_negative() {
                b = -&b;
            }
            let ab = a.dot(&b);
            for l in lineality.iter_mut() {
                let c = a.dot(l) / &ab;
                if !c.is_zero() {
                    *l = &*l - &b.scale(&c);
                }
            }
            for r in rays.iter_mut() {
                // Tightness at earlier constraints is preserved (b was in the
                // lineality space when they were processed), and the adjusted
                // ray lands in the kernel of the new constraint.
                let c = a.dot(&r.v) / &ab;
                if !c.is_zero() {
                    r.v = &r.v - &b.scale(&c);
                }
                r.v = r.v.primitive();
                r.zero.set(idx);
            }
            rays.push(Ray { v: b.primitive(), zero: ZeroSet::full_up_to(ncons, idx) });
            continue;
        }

        // Constraint vanishes on the lineality space; split rays by sign.
        let vals: Vec<Rational> = rays.iter().map(|r| a.dot(&r.v)).collect();
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (i, val) in vals.iter().enumerate() {
            if val.is_positive() {
                pos.push(i);
            } else if val.is_negative() {
                neg.push(i);
            } else {
                rays[i].zero.set(idx);
            }
        }
        if neg.is_empty() {
            continue;
        }
        let pointed_dim = dim - lineality.len();
        let mut created: Vec<Ray> = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let common = rays[p].zero.intersect(&rays[n].zero);
                // Necessary cardinality bound, then the exact combinatorial
                // adjacency test of the double description method.
                if pointed_dim >= 2 && common.count() + 2 < pointed_dim {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(i, r)| i == p || i == n || !common.is_subset_of(&r.zero));
                if !adjacent {
                    continue;
                }
                let vp = &vals[p];
                let vn = &vals[n];
                let v = (&rays[n].v.scale(vp) - &rays[p].v.scale(vn)).primitive();
                debug_assert!(a.dot(&v).is_zero());
                let mut zero = common;
                zero.set(idx);
                created.push(Ray { v, zero });
            }
        }
        let mut kept: Vec<Ray> = Vec::new();
        for (i, r) in rays.into_iter().enumerate() {
            if !neg.contains(&i) {
                kept.push(r);
            }
        }
        kept.extend(created);
        rays = kept;
    }

    let mut out: Vec<Vector> = rays.into_iter().map(|r| r.v).collect();
    out.sort();
    out.dedup();
    (out, canonical_subspace_basis(&lineality, dim))
}

/// Canonical (RREF-derived) basis of the span of the given vectors.
fn canonical_subspace_basis(vs: &[Vector], _dim: usize) -> Vec<Vector> {
    if vs.is_empty() {
        return Vec::new();
    }
    let mut m = Matrix::from_rows(vs);
    let pivots = rref_rows(&mut m);
    let mut basis: Vec<Vector> =
        (0..pivots).map(|r| m.row(r).primitive_oriented()).collect();
    basis.sort();
    basis
}

fn rref_rows(m: &mut Matrix) -> usize {
    let mut r = 0;
    for c in 0..m.cols {
        if r == m.rows {
            break;
        }
        let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
            continue;
        };
        for j in 0..m.cols {
            let tmp = m[(p, j)].clone();
            m[(p, j)] = m[(r, j)].clone();
            m[(r, j)] = tmp;
        }
        let inv = m[(r, c)].recip();
        for j in c..m.cols {
            let x = &m[(r, j)] * &inv;
            m[(r, j)] = x;
        }
        for i in 0..m.rows {
            if i != r && !m[(i, c)].is_zero() {
                let f = m[(i, c)].clone();
                for j in c..m.cols {
                    let x = &m[(i, j)] - &(&f * &m[(r, j)]);
                    m[(i, j)] = x;
                }
            }
        }
        r += 1;
    }
    r
}

fn vectors_to_json(vs: &[Vector]) -> Value {
    Value::Array(
        vs.iter()
            .map(|v| {
                Value::Array(v.0.iter().map(rational_to_json).collect())
            })
            .collect(),
    )
}

pub fn rational_to_json(x: &Rational) -> Value {
    if x.is_integer() {
        if let Ok(n) = i64::try_from(x.numer()) {
            return json!(n);
        }
    }
    json!(rational_string(x))
}

pub fn rational_from_json(v: &Value) -> Result<Rational, Error> {
    match v {
        Value::Number(n) => {
            let i = n
                .as_i64()
                .ok_or_else(|| Error::Schema(format!("non-integer numeric entry {n}")))?;
            Ok(crate::linalg::rat(i))
        }
        Value::String(s) => {
            parse_rational(s).ok_or_else(|| Error::Schema(format!("bad rational \"{s}\"")))
        }
        other => Err(Error::Schema(format!("expected rational, got {other}"))),
    }
}

fn vectors_from_json(v: &Value, dim: usize) -> Result<Vec<Vector>, Error> {
    let arr = v.as_array().ok_or_else(|| Error::Schema("expected array of vectors".into()))?;
    arr.iter()
        .map(|row| {
            let entries = row
                .as_array()
                .ok_or_else(|| Error::Schema("expected vector as array".into()))?;
            if entries.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: entries.len() });
            }
            Ok(Vector(entries.iter().map(rational_from_json).collect::<Result<_, _>>()?))
        })
        .collect()
}

pub fn vector_to_json(v: &Vector) -> Value {
    Value::Array(v.0.iter().map(rational_to_json).collect())
}
