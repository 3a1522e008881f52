//! Fiber products of surfaces fibered over a curve: deciding nefness of a
//! class on the product and decomposing it into nef pullbacks from the two
//! factors, with exact certificates either way.
//!
//! Each factor carries a distinguished fiber class `f` and a nef oracle.
//! A class on the product is glued from a pair `(d1, d2)` of factor classes;
//! the pair is only determined up to moving fiber multiples across, so the
//! product class is nef exactly when some shift `t` makes `d1 - t f` and
//! `d2 + t f` nef simultaneously. Pairings with fiber-degree-zero curves are
//! shift-invariant, so they obstruct every shift at once; against the
//! remaining curves each side imposes a half-line of shifts, and the class
//! is nef iff the least workable right shift does not exceed the largest
//! workable left one. When the interval is empty, one violating curve from
//! each side combines into a single ambient functional nonnegative on every
//! pulled nef class yet negative on the input.

use num_traits::{Signed, Zero};

use crate::cone::{Membership, PolyCone};
use crate::error::Error;
use crate::linalg::{rat, ratio, Matrix, Rational, Vector};
use crate::surface::{self, EllipticLattice, NefCheck};

/// Default enumeration cap handed to elliptic-oracle searches.
pub const DEFAULT_CAP: usize = 1 << 20;

/// Nef oracle of a fibered surface.
#[derive(Clone)]
pub enum Oracle {
    /// Polyhedral nef cone kept in both representations; its facet normals
    /// are the functionals of the generators of the dual curve cone.
    Cone(PolyCone),
    /// Elliptic fibration with section: nef tests minimize exactly over the
    /// infinitely many sections.
    Elliptic(EllipticLattice),
}

/// A curve on a factor, recorded as the functional it induces on classes
/// (pairing by dot product) together with its fiber degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveFunctional {
    pub functional: Vector,
    pub degree: Rational,
}

/// A surface fibered over a base curve: a fiber class and a nef oracle.
#[derive(Clone)]
pub struct FiberedFactor {
    pub name: String,
    pub rank: usize,
    /// Class of a fiber of the map to the base curve.
    pub f: Vector,
    /// Functional of a horizontal curve of fiber degree one.
    pub section: Vector,
    pub oracle: Oracle,
    /// Enumeration cap for elliptic-oracle searches.
    pub cap: usize,
}

impl FiberedFactor {
    /// Factor with a polyhedral nef cone. The cone is completed to both
    /// representations; `f` must be a nonzero nef class and `section` a
    /// functional nonnegative on the cone with `section . f = 1`.
    pub fn polyhedral(
        name: &str,
        f: Vector,
        nef: PolyCone,
        section: Vector,
    ) -> Result<FiberedFactor, Error> {
        let rank = nef.dim();
        if f.dim() != rank {
            return Err(Error::DimensionMismatch { expected: rank, got: f.dim() });
        }
        if section.dim() != rank {
            return Err(Error::DimensionMismatch { expected: rank, got: section.dim() });
        }
        let nef = nef.dd_convert()?;
        if !nef.is_strict()? {
            return Err(Error::InvalidLattice("nef cone of a factor must be strict".into()));
        }
        if f.is_zero() || !nef.contains(&f)? {
            return Err(Error::InvalidLattice("fiber class must be a nonzero nef class".into()));
        }
        if section.dot(&f) != rat(1) {
            return Err(Error::InvalidLattice(
                "section functional must have fiber degree one".into(),
            ));
        }
        if nef.rays()?.iter().any(|r| section.dot(r).is_negative()) {
            return Err(Error::InvalidLattice(
                "section functional must be nonnegative on the nef cone".into(),
            ));
        }
        Ok(FiberedFactor {
            name: name.into(),
            rank,
            f,
            section,
            oracle: Oracle::Cone(nef),
            cap: DEFAULT_CAP,
        })
    }

    /// Factor backed by an elliptic fibration with section; the section
    /// functional is the pairing with the zero section.
    pub fn elliptic(name: &str, lattice: EllipticLattice) -> FiberedFactor {
        let f = lattice.f.clone();
        let section = lattice.gram.mul_vec(&lattice.o);
        let rank = lattice.rank;
        FiberedFactor {
            name: name.into(),
            rank,
            f,
            section,
            oracle: Oracle::Elliptic(lattice),
            cap: DEFAULT_CAP,
        }
    }

    /// Ruled surface over the line with a section of self-intersection
    /// `-n`, in the basis `(f, s)`: `f^2 = 0`, `f.s = 1`, `s^2 = -n`.
    pub fn hirzebruch(n: u32) -> FiberedFactor {
        let gram = Matrix::from_int_rows(&[vec![0, 1], vec![1, -(n as i64)]]);
        let f = Vector::from_ints(&[1, 0]);
        let nef =
            PolyCone::from_rays(2, vec![f.clone(), Vector::from_ints(&[n as i64, 1])]).unwrap();
        let section = gram.mul_vec(&Vector::from_ints(&[0, 1]));
        let name = if n == 0 { "f0".to_string() } else { format!("hirzebruch-{n}") };
        FiberedFactor::polyhedral(&name, f, nef, section).expect("valid ruled surface data")
    }

    /// Plane blown up in `1 <= k <= 8` general points, fibered by the pencil
    /// of lines through the first point: fiber `H - E1`, section `E1`.
    pub fn blowup_fibered(k: usize) -> Result<FiberedFactor, Error> {
        if k == 0 {
            return Err(Error::Unsupported(
                "the plane itself carries no fibration over a curve".into(),
            ));
        }
        let lat = surface::blowup_lattice(k);
        let nef = surface::del_pezzo_nef(k)?;
        let mut fc = vec![0i64; k + 1];
        fc[0] = 1;
        fc[1] = -1;
        let mut e1 = vec![0i64; k + 1];
        e1[1] = 1;
        let section = lat.gram.mul_vec(&Vector::from_ints(&e1));
        FiberedFactor::polyhedral(&format!("blowup-{k}"), Vector::from_ints(&fc), nef, section)
    }

    /// Rational elliptic surface with its exact section-minimizing oracle.
    pub fn res() -> FiberedFactor {
        FiberedFactor::elliptic("res", EllipticLattice::rational_elliptic())
    }

    /// Rank-one factor spanned by the fiber class alone: a degenerate second
    /// factor whose pullback contributes only fiber multiples.
    pub fn fiber_only() -> FiberedFactor {
        let f = Vector::from_ints(&[1]);
        let nef = PolyCone::from_rays(1, vec![f.clone()]).unwrap();
        // No curve class on the factor itself pairs one with f, but the
        // degree functional on the span still plays the section role.
        FiberedFactor::polyhedral("fiber-only", f, nef, Vector::from_ints(&[1]))
            .expect("valid degenerate factor")
    }

    /// Functionals of the curve classes generating the dual cone of the nef
    /// cone; polyhedral oracles only.
    pub fn curve_functionals(&self) -> Result<Vec<Vector>, Error> {
        match &self.oracle {
            Oracle::Cone(nef) => nef.facets(),
            Oracle::Elliptic(_) => Err(Error::Unsupported(
                "infinitely many extremal curves; query the elliptic oracle instead".into(),
            )),
        }
    }

    /// Functionals of fiber-degree-zero curves among the dual generators.
    /// For the elliptic oracle the only vertical generator is the fiber.
    pub fn verticals(&self) -> Result<Vec<Vector>, Error> {
        Ok(match &self.oracle {
            Oracle::Cone(nef) => {
                nef.facets()?.into_iter().filter(|m| m.dot(&self.f).is_zero()).collect()
            }
            Oracle::Elliptic(e) => vec![e.gram.mul_vec(&e.f)],
        })
    }

    /// The most negative curve functional against `d` with its value, or
    /// `None` when `d` is nef on this factor.
    pub fn violating_curve(
        &self,
        d: &Vector,
    ) -> Result<Option<(CurveFunctional, Rational)>, Error> {
        if d.dim() != self.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, got: d.dim() });
        }
        match &self.oracle {
            Oracle::Cone(nef) => {
                let mut worst: Option<(Vector, Rational)> = None;
                for m in nef.facets()? {
                    let v = m.dot(d);
                    if v.is_negative() && worst.as_ref().map_or(true, |(_, w)| &v < w) {
                        worst = Some((m, v));
                    }
                }
                Ok(worst.map(|(m, v)| {
                    let degree = m.dot(&self.f);
                    (CurveFunctional { functional: m, degree }, v)
                }))
            }
            Oracle::Elliptic(e) => Ok(match e.nef_check(d, self.cap)? {
                NefCheck::Nef { .. } => None,
                NefCheck::NotNef { violator } => {
                    let functional = e.gram.mul_vec(&violator.curve);
                    let degree = e.pairing(&violator.curve, &e.f);
                    Some((CurveFunctional { functional, degree }, violator.value))
                }
            }),
        }
    }

    pub fn is_nef(&self, d: &Vector) -> Result<bool, Error> {
        Ok(self.violating_curve(d)?.is_none())
    }

    /// Least `t` making `d + t f` nef, as an exact (possibly negative)
    /// rational: the value is not clamped at zero, so classes already nef
    /// report how far they can be pushed back down. Errors when no shift
    /// works: a fiber-degree-zero curve pairs negatively (shifting cannot
    /// change that pairing), or section values are unbounded below.
    pub fn nef_threshold(&self, d: &Vector) -> Result<Rational, Error> {
        match self.shift_bound(d)? {
            ShiftBound::Finite(t) => Ok(t),
            ShiftBound::Vertical(c, v) => {
                Err(Error::VerticalObstruction { curve: c.functional, value: v })
            }
            ShiftBound::Unbounded => Err(Error::NoFiniteShift { factor: self.name.clone() }),
        }
    }

    /// Shift analysis behind `nef_threshold`: nefness of `d + t f` is upward
    /// closed in `t`, so the answer is a half-line, an all-shift vertical
    /// obstruction, or unboundedness of section values.
    fn shift_bound(&self, d: &Vector) -> Result<ShiftBound, Error> {
        if d.dim() != self.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, got: d.dim() });
        }
        match &self.oracle {
            Oracle::Cone(nef) => {
                let mut best: Option<Rational> = None;
                for m in nef.facets()? {
                    let c = m.dot(&self.f);
                    let v = m.dot(d);
                    if c.is_zero() {
                        if v.is_negative() {
                            return Ok(ShiftBound::Vertical(
                                CurveFunctional { functional: m, degree: c },
                                v,
                            ));
                        }
                    } else {
                        // (d + t f) . m = v + t c >= 0 iff t >= -v / c.
                        let t = -&v / &c;
                        if best.as_ref().map_or(true, |b| &t > b) {
                            best = Some(t);
                        }
                    }
                }
                // A strict factor cone with a nonzero nef fiber always has a
                // facet of positive fiber degree, so the bound is attained.
                Ok(ShiftBound::Finite(best.expect("horizontal facet present")))
            }
            Oracle::Elliptic(e) => {
                let a = e.pairing(d, &e.f);
                if a.is_negative() {
                    return Ok(ShiftBound::Vertical(
                        CurveFunctional { functional: e.gram.mul_vec(&e.f), degree: rat(0) },
                        a,
                    ));
                }
                Ok(match e.nef_threshold(d, self.cap)? {
                    Some(t) => ShiftBound::Finite(t),
                    None => ShiftBound::Unbounded,
                })
            }
        }
    }
}

enum ShiftBound {
    /// `d + t f` is nef exactly for `t` at least this value.
    Finite(Rational),
    /// A fiber-degree-zero curve pairs negatively; no shift helps.
    Vertical(CurveFunctional, Rational),
    /// Fiber degree zero with nonconstant section values: a violating
    /// section exists for every shift (elliptic oracle only).
    Unbounded,
}

/// Fiber product of two fibered factors over a common base curve. The
/// ambient lattice has rank `r1 + r2 - 1`; both fiber classes pull back to
/// the same ambient vector, and a canonical splitting carries the shared
/// fiber weight on the left factor.
#[derive(Clone)]
pub struct FiberProduct {
    pub left: FiberedFactor,
    pub right: FiberedFactor,
    pub rank: usize,
    pub pull_left: Matrix,
    pub pull_right: Matrix,
    pub split_left: Matrix,
    pub split_right: Matrix,
}

impl FiberProduct {
    pub fn new(left: FiberedFactor, right: FiberedFactor) -> Result<FiberProduct, Error> {
        let r1 = left.rank;
        let r2 = right.rank;
        let rank = r1 + r2 - 1;
        let primitive_err =
            || Error::InvalidLattice("fiber class must be a primitive integral vector".into());
        let u1 = Matrix::unimodular_with_first_column(&left.f).ok_or_else(primitive_err)?;
        let u2 = Matrix::unimodular_with_first_column(&right.f).ok_or_else(primitive_err)?;
        let t1 = u1.inverse().expect("unimodular");
        let t2 = u2.inverse().expect("unimodular");
        // Ambient coordinates: (shared fiber weight, left block, right block).
        let mut pull_left = Matrix::zero(rank, r1);
        for j in 0..r1 {
            for i in 0..r1 {
                pull_left[(i, j)] = t1[(i, j)].clone();
            }
        }
        let mut pull_right = Matrix::zero(rank, r2);
        for j in 0..r2 {
            pull_right[(0, j)] = t2[(0, j)].clone();
            for i in 1..r2 {
                pull_right[(r1 - 1 + i, j)] = t2[(i, j)].clone();
            }
        }
        // split_left keeps the fiber weight with the left block; split_right
        // drops it and restores the right block.
        let mut rl = Matrix::zero(r1, rank);
        for j in 0..r1 {
            rl[(j, j)] = rat(1);
        }
        let mut rr = Matrix::zero(r2, rank);
        for i in 1..r2 {
            rr[(i, r1 - 1 + i)] = rat(1);
        }
        let split_left = &u1 * &rl;
        let split_right = &u2 * &rr;
        let fp = FiberProduct { left, right, rank, pull_left, pull_right, split_left, split_right };
        debug_assert_eq!(fp.pull_left.mul_vec(&fp.left.f), fp.pull_right.mul_vec(&fp.right.f));
        debug_assert!((0..rank).all(|i| {
            let e = Vector::unit(rank, i);
            let (a, b) = fp.split(&e);
            fp.glue(&a, &b) == e
        }));
        Ok(fp)
    }

    /// Ambient class of the pair `(d1, d2)` of factor classes.
    ///
    /// Panics when a class has the wrong dimension.
    pub fn glue(&self, d1: &Vector, d2: &Vector) -> Vector {
        &self.pull_left.mul_vec(d1) + &self.pull_right.mul_vec(d2)
    }

    /// Canonical factor pair of an ambient class (fiber weight on the left):
    /// gluing the parts returns the input.
    pub fn split(&self, w: &Vector) -> (Vector, Vector) {
        (self.split_left.mul_vec(w), self.split_right.mul_vec(w))
    }

    /// Decides whether some fiber shift `t` makes `d1 - t f` and `d2 + t f`
    /// both nef and returns the decomposition at the least such shift, or
    /// assembles an exact certificate functional otherwise. Mathematical
    /// failure is a value, not an error.
    pub fn decompose(&self, d1: &Vector, d2: &Vector) -> Result<Decomposition, Error> {
        let left_bound = self.left.shift_bound(d1)?;
        let right_bound = self.right.shift_bound(d2)?;
        // Vertical pairings are shift-invariant, so they obstruct outright.
        if let ShiftBound::Vertical(curve, value) = left_bound {
            let phi = self.split_left.transpose().mul_vec(&curve.functional);
            return Ok(self.certify(d1, d2, phi, Some(curve), None, None, value));
        }
        if let ShiftBound::Vertical(curve, value) = right_bound {
            let phi = self.split_right.transpose().mul_vec(&curve.functional);
            return Ok(self.certify(d1, d2, phi, None, Some(curve), None, value));
        }
        // d1 - t f is nef iff t <= t_left; d2 + t f is nef iff t >= t_right.
        let t_left = match &left_bound {
            ShiftBound::Finite(u) => Some(-u),
            _ => None,
        };
        let t_right = match &right_bound {
            ShiftBound::Finite(t) => Some(t.clone()),
            _ => None,
        };
        if let (Some(lo), Some(hi)) = (&t_right, &t_left) {
            if lo <= hi {
                let left_part = d1 - &self.left.f.scale(lo);
                let right_part = d2 + &self.right.f.scale(lo);
                debug_assert!(self.left.is_nef(&left_part)?);
                debug_assert!(self.right.is_nef(&right_part)?);
                return Ok(Decomposition::Nef {
                    t: lo.clone(),
                    interval: (lo.clone(), hi.clone()),
                    left_part,
                    right_part,
                });
            }
        }
        // Empty interval: pick a shift violating both sides at once. With
        // both bounds finite the midpoint works; an unbounded side is
        // violated at every shift, so any point past the other bound works.
        let t_star = match (&t_left, &t_right) {
            (Some(hi), Some(lo)) => (lo + hi) * ratio(1, 2),
            (Some(hi), None) => hi + rat(1),
            (None, Some(lo)) => lo - rat(1),
            (None, None) => rat(0),
        };
        let shifted_left = d1 - &self.left.f.scale(&t_star);
        let shifted_right = d2 + &self.right.f.scale(&t_star);
        let (lc, lv) = self
            .left
            .violating_curve(&shifted_left)?
            .expect("left side is violated beyond its shift bound");
        let (rc, rv) = self
            .right
            .violating_curve(&shifted_right)?
            .expect("right side is violated below its shift bound");
        // Both violators are horizontal here (verticals were ruled out), so
        // the mixed functional c2 * split_left^T m1 + c1 * split_right^T m2
        // pairs with the glued class as c2 lv + c1 rv < 0, while staying
        // nonnegative on every pulled nef class from either side.
        let phi = &self.split_left.transpose().mul_vec(&lc.functional).scale(&rc.degree)
            + &self.split_right.transpose().mul_vec(&rc.functional).scale(&lc.degree);
        let expected = &(&rc.degree * &lv) + &(&lc.degree * &rv);
        Ok(self.certify(d1, d2, phi, Some(lc), Some(rc), Some(t_star), expected))
    }

    fn certify(
        &self,
        d1: &Vector,
        d2: &Vector,
        functional: Vector,
        left_curve: Option<CurveFunctional>,
        right_curve: Option<CurveFunctional>,
        shift: Option<Rational>,
        expected_value: Rational,
    ) -> Decomposition {
        let value = functional.dot(&self.glue(d1, d2));
        debug_assert_eq!(value, expected_value);
        debug_assert!(value.is_negative());
        Decomposition::NotNef(NotNefCertificate {
            functional,
            value,
            left_curve,
            right_curve,
            shift,
        })
    }

    /// Nef test for a canonical ambient splitting.
    pub fn decompose_ambient(&self, w: &Vector) -> Result<Decomposition, Error> {
        if w.dim() != self.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, got: w.dim() });
        }
        let (d1, d2) = self.split(w);
        self.decompose(&d1, &d2)
    }

    /// Convenience wrapper: the boolean verdict together with the full
    /// decomposition or certificate.
    pub fn product_nef_test(
        &self,
        d1: &Vector,
        d2: &Vector,
    ) -> Result<(bool, Decomposition), Error> {
        let d = self.decompose(d1, d2)?;
        Ok((d.is_nef(), d))
    }

    /// Sum of the two pulled nef cones inside the ambient lattice
    /// (polyhedral factors only).
    pub fn pulled_nef_sum(&self) -> Result<PolyCone, Error> {
        let (n1, n2) = self.polyhedral_pair()?;
        n1.map_cone(&self.pull_left)?.minkowski_sum(&n2.map_cone(&self.pull_right)?)
    }

    /// Nef cone of the product as a facet system, produced without ray
    /// enumeration by eliminating the shift parameter: pulled vertical
    /// functionals plus one mixed functional per pair of horizontal dual
    /// generators. Polyhedral factors only; agrees with `pulled_nef_sum`.
    pub fn product_nef_cone(&self) -> Result<PolyCone, Error> {
        self.polyhedral_pair()?;
        let lt = self.split_left.transpose();
        let rt = self.split_right.transpose();
        let mut facets = Vec::new();
        let mut left_horizontal = Vec::new();
        let mut right_horizontal = Vec::new();
        for m in self.left.curve_functionals()? {
            let c = m.dot(&self.left.f);
            if c.is_zero() {
                facets.push(lt.mul_vec(&m));
            } else {
                left_horizontal.push((m, c));
            }
        }
        for m in self.right.curve_functionals()? {
            let c = m.dot(&self.right.f);
            if c.is_zero() {
                facets.push(rt.mul_vec(&m));
            } else {
                right_horizontal.push((m, c));
            }
        }
        for (m1, c1) in &left_horizontal {
            for (m2, c2) in &right_horizontal {
                facets.push(&lt.mul_vec(m1).scale(c2) + &rt.mul_vec(m2).scale(c1));
            }
        }
        PolyCone::from_facets(self.rank, facets)
    }

    /// Compares the extremal rays of the sum of the pulled nef cones with
    /// the pullbacks of the factors' extremal rays (the fiber ray is shared).
    /// Both inclusions are checked; `matched` records set equality.
    pub fn extremal_correspondence_check(&self) -> Result<CorrespondenceReport, Error> {
        let (n1, n2) = self.polyhedral_pair()?;
        let sum = self.pulled_nef_sum()?.dd_convert()?;
        let mut sum_rays = sum.extremal_rays()?;
        sum_rays.sort();
        let mut pulled: Vec<Vector> = n1
            .extremal_rays()?
            .iter()
            .map(|r| self.pull_left.mul_vec(r).primitive())
            .collect();
        pulled.extend(n2.extremal_rays()?.iter().map(|r| self.pull_right.mul_vec(r).primitive()));
        pulled.sort();
        pulled.dedup();
        let matched = sum_rays == pulled;
        Ok(CorrespondenceReport { sum_rays, pulled_rays: pulled, matched })
    }

    fn polyhedral_pair(&self) -> Result<(&PolyCone, &PolyCone), Error> {
        match (&self.left.oracle, &self.right.oracle) {
            (Oracle::Cone(a), Oracle::Cone(b)) => Ok((a, b)),
            _ => Err(Error::Unsupported(
                "both factors must have polyhedral nef cones for this computation".into(),
            )),
        }
    }
}

/// Outcome of the nef decomposition on a fiber product.
pub enum Decomposition {
    /// `glue(left_part, right_part)` equals the glued input, both parts are
    /// nef, `t` is the least workable shift, and `interval` is the full
    /// closed range of workable shifts.
    Nef { t: Rational, interval: (Rational, Rational), left_part: Vector, right_part: Vector },
    NotNef(NotNefCertificate),
}

impl Decomposition {
    pub fn is_nef(&self) -> bool {
        matches!(self, Decomposition::Nef { .. })
    }
}

/// Exact evidence that the glued class is not a sum of nef pullbacks: an
/// ambient functional nonnegative on the pullback of every nef class from
/// either factor, pairing negatively (`value`) with the input. It is built
/// from the recorded violating curves; a single curve of fiber degree zero
/// suffices on its own, otherwise one horizontal curve per side is combined
/// at the recorded `shift`.
pub struct NotNefCertificate {
    pub functional: Vector,
    pub value: Rational,
    pub left_curve: Option<CurveFunctional>,
    pub right_curve: Option<CurveFunctional>,
    pub shift: Option<Rational>,
}

/// Extremal-ray comparison between the sum of the pulled nef cones and the
/// pulled factor extremal rays.
#[derive(Debug)]
pub struct CorrespondenceReport {
    pub sum_rays: Vec<Vector>,
    pub pulled_rays: Vec<Vector>,
    pub matched: bool,
}

/// Whether `d` lies in `emb1(nef1) + emb2(nef2)` inside a common ambient
/// lattice, with an exact membership certificate either way: the
/// decomposability question over a base that is itself a surface, where no
/// fiber-shift reduction is available. Returns the sum cone and the
/// membership outcome.
pub fn decomposability_over_surface_base(
    emb1: &Matrix,
    emb2: &Matrix,
    nef1: &PolyCone,
    nef2: &PolyCone,
    d: &Vector,
) -> Result<(PolyCone, Membership), Error> {
    let sum = nef1.map_cone(emb1)?.minkowski_sum(&nef2.map_cone(emb2)?)?.dd_convert()?;
    let membership = sum.member(d)?;
    Ok((sum, membership))
}

/// Demonstration data for `decomposability_over_surface_base`: two
/// two-point blowups of the plane embedded along disjoint point pairs into
/// the four-point blowup, together with the symmetric degree-two class
/// `2H - E1 - E2 - E3 - E4`. The class restricts nef to both patterns and
/// is nef on the ambient surface, yet is not a sum of nef pullbacks.
pub struct BlowupDemo {
    pub emb1: Matrix,
    pub emb2: Matrix,
    pub nef1: PolyCone,
    pub nef2: PolyCone,
    pub class: Vector,
}

pub fn disjoint_blowup_demo() -> Result<BlowupDemo, Error> {
    let nef = surface::del_pezzo_nef(2)?.dd_convert()?;
    let mut emb1 = Matrix::zero(5, 3);
    let mut emb2 = Matrix::zero(5, 3);
    for (j, i) in [0usize, 1, 2].into_iter().enumerate() {
        emb1[(i, j)] = rat(1);
    }
    for (j, i) in [0usize, 3, 4].into_iter().enumerate() {
        emb2[(i, j)] = rat(1);
    }
    Ok(BlowupDemo {
        emb1,
        emb2,
        nef1: nef.clone(),
        nef2: nef,
        class: Vector::from_ints(&[2, -1, -1, -1, -1]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ratio;
    use num_traits::Zero;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f0_square() -> FiberProduct {
        FiberProduct::new(FiberedFactor::hirzebruch(0), FiberedFactor::hirzebruch(0)).unwrap()
    }

    #[test]
    fn factor_presets_validate() {
        for factor in [
            FiberedFactor::hirzebruch(0),
            FiberedFactor::hirzebruch(1),
            FiberedFactor::hirzebruch(3),
            FiberedFactor::blowup_fibered(1).unwrap(),
            FiberedFactor::blowup_fibered(2).unwrap(),
            FiberedFactor::res(),
            FiberedFactor::fiber_only(),
        ] {
            assert!(factor.is_nef(&factor.f).unwrap(), "{}: fiber must be nef", factor.name);
            assert_eq!(factor.section.dot(&factor.f), rat(1), "{}", factor.name);
            // Vertical functionals really have fiber degree zero.
            for m in factor.verticals().unwrap() {
                assert!(m.dot(&factor.f).is_zero(), "{}", factor.name);
            }
        }
        assert!(FiberedFactor::blowup_fibered(0).is_err());
    }

    #[test]
    fn ruled_square_structure() {
        let fp = f0_square();
        assert_eq!(fp.rank, 3);
        // Both fiber classes pull to the shared ambient fiber vector.
        let e0 = Vector::from_ints(&[1, 0, 0]);
        assert_eq!(fp.pull_left.mul_vec(&fp.left.f), e0);
        assert_eq!(fp.pull_right.mul_vec(&fp.right.f), e0);
        // Glue and split are mutually inverse in the glued direction.
        let w = Vector::from_ints(&[5, -3, 7]);
        let (a, b) = fp.split(&w);
        assert_eq!(fp.glue(&a, &b), w);
        // Gluing is shift-invariant: moving a fiber across changes nothing.
        let d1 = Vector::from_ints(&[2, 1]);
        let d2 = Vector::from_ints(&[-1, 4]);
        let shifted1 = &d1 - &fp.left.f.scale(&rat(3));
        let shifted2 = &d2 + &fp.right.f.scale(&rat(3));
        assert_eq!(fp.glue(&d1, &d2), fp.glue(&shifted1, &shifted2));
    }

    #[test]
    fn elliptic_product_rank() {
        let fp = FiberProduct::new(FiberedFactor::res(), FiberedFactor::hirzebruch(0)).unwrap();
        assert_eq!(fp.rank, 11);
        let fp = FiberProduct::new(FiberedFactor::res(), FiberedFactor::res()).unwrap();
        assert_eq!(fp.rank, 19);
    }

    #[test]
    fn ruled_thresholds() {
        let f0 = FiberedFactor::hirzebruch(0);
        // s - 2f needs two fibers back; s is on the boundary; f alone can
        // give one fiber away, so its threshold is negative.
        assert_eq!(f0.nef_threshold(&Vector::from_ints(&[-2, 1])).unwrap(), rat(2));
        assert_eq!(f0.nef_threshold(&Vector::from_ints(&[0, 1])).unwrap(), rat(0));
        assert_eq!(f0.nef_threshold(&Vector::from_ints(&[1, 0])).unwrap(), rat(-1));
        // -s pairs negatively with the fiber functional for every shift.
        match f0.nef_threshold(&Vector::from_ints(&[0, -1])) {
            Err(Error::VerticalObstruction { curve, value }) => {
                assert_eq!(curve, Vector::from_ints(&[0, 1]));
                assert_eq!(value, rat(-1));
            }
            other => panic!("expected vertical obstruction, got {other:?}"),
        }
    }

    #[test]
    fn elliptic_thresholds() {
        let res = FiberedFactor::res();
        let e = EllipticLattice::rational_elliptic();
        // The zero section needs one fiber to become nef.
        assert_eq!(res.nef_threshold(&e.o).unwrap(), rat(1));
        // The fiber itself may give one fiber back.
        assert_eq!(res.nef_threshold(&e.f).unwrap(), rat(-1));
        // A frame root has fiber degree zero but nonconstant section values.
        let alpha = e.frame[0].clone();
        match res.nef_threshold(&alpha) {
            Err(Error::NoFiniteShift { factor }) => assert_eq!(factor, "res"),
            other => panic!("expected no finite shift, got {other:?}"),
        }
        // The negated fiber is isotropic, so one fiber shift still fixes it.
        assert_eq!(res.nef_threshold(&-&e.f).unwrap(), rat(1));
        // The negated zero section has fiber degree -1: the fiber itself is
        // a shift-invariant obstruction.
        match res.nef_threshold(&-&e.o) {
            Err(Error::VerticalObstruction { curve, value }) => {
                assert_eq!(curve, e.gram.mul_vec(&e.f));
                assert_eq!(value, rat(-1));
            }
            other => panic!("expected vertical obstruction, got {other:?}"),
        }
    }

    #[test]
    fn decompose_balances_fibers_across_the_square() {
        let fp = f0_square();
        // (s + 2f, s - 2f): shifting two fibers right yields (s, s).
        let d1 = Vector::from_ints(&[2, 1]);
        let d2 = Vector::from_ints(&[-2, 1]);
        match fp.decompose(&d1, &d2).unwrap() {
            Decomposition::Nef { t, interval, left_part, right_part } => {
                assert_eq!(t, rat(2));
                assert_eq!(interval, (rat(2), rat(2)));
                assert_eq!(left_part, Vector::from_ints(&[0, 1]));
                assert_eq!(right_part, Vector::from_ints(&[0, 1]));
                assert_eq!(fp.glue(&left_part, &right_part), fp.glue(&d1, &d2));
            }
            Decomposition::NotNef(_) => panic!("decomposable class reported not nef"),
        }
    }

    #[test]
    fn negative_threshold_rescues_a_decomposition() {
        // d1 = s - f is not nef, but d2 = s + 2f has threshold -2: shifting
        // a negative amount (t in [-2, -1]) moves surplus fibers left. A
        // threshold clamped at zero would wrongly reject this pair.
        let fp = f0_square();
        let d1 = Vector::from_ints(&[-1, 1]);
        let d2 = Vector::from_ints(&[2, 1]);
        match fp.decompose(&d1, &d2).unwrap() {
            Decomposition::Nef { t, interval, left_part, right_part } => {
                assert_eq!(t, rat(-2));
                assert_eq!(interval, (rat(-2), rat(-1)));
                assert_eq!(left_part, Vector::from_ints(&[1, 1]));
                assert_eq!(right_part, Vector::from_ints(&[0, 1]));
                assert!(fp.left.is_nef(&left_part).unwrap());
                assert!(fp.right.is_nef(&right_part).unwrap());
            }
            Decomposition::NotNef(_) => panic!("decomposable class reported not nef"),
        }
    }

    #[test]
    fn vertical_obstruction_certificate() {
        let fp = f0_square();
        // (-s, s): the left section coefficient is negative, which no fiber
        // shift can repair; the certificate functional is the pulled
        // vertical functional, pairing -1 with the glued class.
        let d1 = Vector::from_ints(&[0, -1]);
        let d2 = Vector::from_ints(&[0, 1]);
        match fp.decompose(&d1, &d2).unwrap() {
            Decomposition::NotNef(cert) => {
                assert_eq!(cert.functional, Vector::from_ints(&[0, 1, 0]));
                assert_eq!(cert.value, rat(-1));
                assert!(cert.left_curve.is_some());
                assert!(cert.right_curve.is_none());
                assert!(cert.shift.is_none());
                // Valid against the whole product nef cone.
                let sum = fp.pulled_nef_sum().unwrap();
                for r in sum.rays().unwrap() {
                    assert!(!cert.functional.dot(&r).is_negative());
                }
            }
            Decomposition::Nef { .. } => panic!("obstructed class reported nef"),
        }
    }

    #[test]
    fn empty_interval_certificate() {
        let fp = f0_square();
        // (s, s - 5f): the right side needs five fibers, the left has none
        // to give. Certificate pairs -5 with the glued class.
        let d1 = Vector::from_ints(&[0, 1]);
        let d2 = Vector::from_ints(&[-5, 1]);
        match fp.decompose(&d1, &d2).unwrap() {
            Decomposition::NotNef(cert) => {
                assert_eq!(cert.value, rat(-5));
                assert_eq!(cert.shift, Some(ratio(5, 2)));
                assert_eq!(cert.functional.dot(&fp.glue(&d1, &d2)), cert.value);
                let sum = fp.pulled_nef_sum().unwrap();
                for r in sum.rays().unwrap() {
                    assert!(!cert.functional.dot(&r).is_negative());
                }
            }
            Decomposition::Nef { .. } => panic!("obstructed class reported nef"),
        }
    }

    #[test]
    fn elliptic_times_ruled_decomposition() {
        let fp = FiberProduct::new(FiberedFactor::res(), FiberedFactor::hirzebruch(0)).unwrap();
        let e = EllipticLattice::rational_elliptic();
        // Ample left part, boundary right part: works at shift zero.
        let d1 = &e.o + &e.f.scale(&rat(2));
        let d2 = Vector::from_ints(&[0, 1]);
        match fp.decompose(&d1, &d2).unwrap() {
            Decomposition::Nef { t, interval, .. } => {
                assert_eq!(t, rat(0));
                assert_eq!(interval, (rat(0), rat(1)));
            }
            Decomposition::NotNef(_) => panic!("decomposable class reported not nef"),
        }
        // The bare zero section cannot spare the fiber the right side needs.
        let d1 = e.o.clone();
        let d2 = Vector::from_ints(&[-1, 1]);
        match fp.decompose(&d1, &d2).unwrap() {
            Decomposition::NotNef(cert) => {
                assert!(cert.value.is_negative());
                assert_eq!(cert.functional.dot(&fp.glue(&d1, &d2)), cert.value);
                // The functional is nonnegative on pulled nef classes from
                // both sides, sampled on the right cone and on translated
                // ample classes from the left.
                for r in [Vector::from_ints(&[1, 0]), Vector::from_ints(&[0, 1])] {
                    assert!(!cert.functional.dot(&fp.pull_right.mul_vec(&r)).is_negative());
                }
                let ample = &e.o + &e.f.scale(&rat(2));
                for w in [
                    Vector::zero(8),
                    Vector::from_ints(&[1, 0, 0, 0, 0, 0, 0, 0]),
                    Vector::from_ints(&[0, 1, -1, 0, 2, 0, 0, 1]),
                ] {
                    let moved = e.translation_matrix(&w).mul_vec(&ample);
                    assert!(!cert.functional.dot(&fp.pull_left.mul_vec(&moved)).is_negative());
                }
            }
            Decomposition::Nef { .. } => panic!("obstructed class reported nef"),
        }
    }

    #[test]
    fn unbounded_section_values_yield_certificates() {
        let fp = FiberProduct::new(FiberedFactor::res(), FiberedFactor::hirzebruch(0)).unwrap();
        let e = EllipticLattice::rational_elliptic();
        // A frame root has fiber degree zero and nonconstant section values:
        // every shift leaves some section negative.
        let d1 = e.frame[0].clone();
        let d2 = Vector::from_ints(&[0, 1]);
        match fp.decompose(&d1, &d2).unwrap() {
            Decomposition::NotNef(cert) => {
                assert!(cert.value.is_negative());
                assert_eq!(cert.functional.dot(&fp.glue(&d1, &d2)), cert.value);
                let lc = cert.left_curve.expect("left violating section recorded");
                assert_eq!(lc.degree, rat(1));
            }
            Decomposition::Nef { .. } => panic!("obstructed class reported nef"),
        }
    }

    #[test]
    fn product_nef_cone_matches_pulled_sum() {
        for (a, b) in [
            (FiberedFactor::hirzebruch(0), FiberedFactor::hirzebruch(0)),
            (FiberedFactor::hirzebruch(1), FiberedFactor::hirzebruch(0)),
            (FiberedFactor::blowup_fibered(2).unwrap(), FiberedFactor::hirzebruch(0)),
        ] {
            let fp = FiberProduct::new(a, b).unwrap();
            let direct = fp.product_nef_cone().unwrap().dd_convert().unwrap();
            let sum = fp.pulled_nef_sum().unwrap().dd_convert().unwrap();
            assert_eq!(direct.rays().unwrap(), sum.rays().unwrap());
            assert_eq!(direct.facets().unwrap(), sum.facets().unwrap());
        }
    }

    #[test]
    fn correspondence_counts() {
        // Two rulings of the quadric: three extremal rays, not four.
        let fp = f0_square();
        let report = fp.extremal_correspondence_check().unwrap();
        assert!(report.matched);
        assert_eq!(report.sum_rays.len(), 3);

        // Two fibered two-point blowups: 3 + 3 - 1 shared fiber ray.
        let fp = FiberProduct::new(
            FiberedFactor::blowup_fibered(2).unwrap(),
            FiberedFactor::blowup_fibered(2).unwrap(),
        )
        .unwrap();
        let report = fp.extremal_correspondence_check().unwrap();
        assert!(report.matched);
        assert_eq!(report.sum_rays.len(), 5);

        // A degenerate right factor only contributes the shared fiber ray.
        let fp = FiberProduct::new(
            FiberedFactor::blowup_fibered(2).unwrap(),
            FiberedFactor::fiber_only(),
        )
        .unwrap();
        let report = fp.extremal_correspondence_check().unwrap();
        assert!(report.matched);
        assert_eq!(report.sum_rays.len(), 3);

        // Elliptic factors have no polyhedral ray list to compare.
        let fp = FiberProduct::new(FiberedFactor::res(), FiberedFactor::hirzebruch(0)).unwrap();
        assert!(fp.extremal_correspondence_check().is_err());
    }

    #[test]
    fn decompose_agrees_with_cone_membership() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (a, b) in [
            (FiberedFactor::hirzebruch(0), FiberedFactor::hirzebruch(0)),
            (FiberedFactor::blowup_fibered(2).unwrap(), FiberedFactor::hirzebruch(0)),
        ] {
            let fp = FiberProduct::new(a, b).unwrap();
            let sum = fp.pulled_nef_sum().unwrap().dd_convert().unwrap();
            let mut nef_seen = 0;
            let mut obstructed_seen = 0;
            for _ in 0..60 {
                let d1 =
                    Vector::from_ints(&(0..fp.left.rank).map(|_| rng.gen_range(-4..=4)).collect::<Vec<_>>());
                let d2 = Vector::from_ints(
                    &(0..fp.right.rank).map(|_| rng.gen_range(-4..=4)).collect::<Vec<_>>(),
                );
                let glued = fp.glue(&d1, &d2);
                let verdict = fp.decompose(&d1, &d2).unwrap();
                assert_eq!(verdict.is_nef(), sum.contains(&glued).unwrap());
                match verdict {
                    Decomposition::Nef { t, interval, left_part, right_part } => {
                        nef_seen += 1;
                        assert_eq!(fp.glue(&left_part, &right_part), glued);
                        assert!(fp.left.is_nef(&left_part).unwrap());
                        assert!(fp.right.is_nef(&right_part).unwrap());
                        assert!(interval.0 <= interval.1);
                        assert_eq!(t, interval.0);
                        // The top of the interval also works.
                        let lp = &d1 - &fp.left.f.scale(&interval.1);
                        let rp = &d2 + &fp.right.f.scale(&interval.1);
                        assert!(fp.left.is_nef(&lp).unwrap());
                        assert!(fp.right.is_nef(&rp).unwrap());
                    }
                    Decomposition::NotNef(cert) => {
                        obstructed_seen += 1;
                        assert!(cert.value.is_negative());
                        assert_eq!(cert.functional.dot(&glued), cert.value);
                        for r in sum.rays().unwrap() {
                            assert!(!cert.functional.dot(&r).is_negative());
                        }
                    }
                }
            }
            assert!(nef_seen > 0 && obstructed_seen > 0, "sampling covered both verdicts");
        }
    }

    #[test]
    fn disjoint_blowup_class_is_not_a_sum_of_nef_pullbacks() {
        let demo = disjoint_blowup_demo().unwrap();
        let lat = surface::blowup_lattice(4);
        // The class pairs 1 with each exceptional curve and 0 with each of
        // the six conic-type negative curves, so it is nef on the ambient
        // surface and restricts nef to both blowup patterns.
        for i in 1..=4 {
            let mut e = vec![0i64; 5];
            e[i] = 1;
            assert_eq!(lat.pairing(&demo.class, &Vector::from_ints(&e)), rat(1));
        }
        for i in 1..=4 {
            for j in (i + 1)..=4 {
                let mut c = vec![0i64; 5];
                c[0] = 1;
                c[i] = -1;
                c[j] = -1;
                assert_eq!(lat.pairing(&demo.class, &Vector::from_ints(&c)), rat(0));
            }
        }
        assert!(surface::del_pezzo_nef(4).unwrap().contains(&demo.class).unwrap());

        let (sum, membership) = decomposability_over_surface_base(
            &demo.emb1,
            &demo.emb2,
            &demo.nef1,
            &demo.nef2,
            &demo.class,
        )
        .unwrap();
        // The sum cone is spanned by the hyperplane class and the four
        // one-point blowdown classes; the input lies outside it.
        assert_eq!(
            sum.extremal_rays().unwrap(),
            vec![
                Vector::from_ints(&[1, -1, 0, 0, 0]),
                Vector::from_ints(&[1, 0, -1, 0, 0]),
                Vector::from_ints(&[1, 0, 0, -1, 0]),
                Vector::from_ints(&[1, 0, 0, 0, -1]),
                Vector::from_ints(&[1, 0, 0, 0, 0]),
            ]
        );
        match membership {
            Membership::Outside { separator } => {
                assert!(separator.dot(&demo.class).is_negative());
                for r in sum.rays().unwrap() {
                    assert!(!separator.dot(&r).is_negative());
                }
            }
            Membership::Inside { .. } => panic!("class wrongly reported decomposable"),
        }
    }
}
