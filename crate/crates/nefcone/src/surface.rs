//! Picard lattices of surfaces: blowups of the plane with their negative
//! curves and nef cones, and relatively minimal elliptic fibrations with
//! section, where the nef cone is cut out by the fiber class and the
//! (infinitely many) sections and must be handled by convex minimization
//! rather than facet lists.

use crate::cone::PolyCone;
use crate::error::Error;
use crate::linalg::{rat, Matrix, Rational, Vector};
use crate::quadform;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// An integral lattice with a chosen basis and intersection form.
#[derive(Clone)]
pub struct SurfaceLattice {
    pub rank: usize,
    pub gram: Matrix,
    pub labels: Vec<String>,
    /// Canonical class in basis coordinates.
    pub canonical: Vector,
}

impl SurfaceLattice {
    pub fn pairing(&self, a: &Vector, b: &Vector) -> Rational {
        self.gram.mul_vec(b).dot(a)
    }
}

/// Picard lattice of the plane blown up at `k` points: basis
/// `H, E_1, ..., E_k`, form `diag(1, -1, ..., -1)`, canonical class
/// `-3H + sum E_i`.
pub fn blowup_lattice(k: usize) -> SurfaceLattice {
    let rank = k + 1;
    let mut entries = vec![rat(1)];
    entries.extend(std::iter::repeat_with(|| rat(-1)).take(k));
    let mut labels = vec!["H".to_string()];
    labels.extend((1..=k).map(|i| format!("E{i}")));
    let mut canonical = vec![-3i64];
    canonical.extend(std::iter::repeat(1).take(k));
    SurfaceLattice {
        rank,
        gram: Matrix::diagonal(&entries),
        labels,
        canonical: Vector::from_ints(&canonical),
    }
}

/// Classes of (-1)-curves on the blowup of the plane at `k <= 8` points in
/// general position: solutions of `C^2 = C.K = -1` that occur on such a
/// surface, i.e. `dH - sum m_i E_i` with `sum m_i = 3d - 1` and
/// `sum m_i^2 = d^2 + 1` (degrees up to 6 occur; we search a margin wider).
/// From nine points on the family becomes infinite.
pub fn negative_curves(k: usize) -> Result<Vec<Vector>, Error> {
    if k > 8 {
        return Err(Error::Unsupported(
            "negative curves form an infinite family from 9 points on; use the elliptic oracle"
                .into(),
        ));
    }
    let mut out = Vec::new();
    for d in 0..=7i64 {
        let mut m = vec![0i64; k];
        search_multiplicities(d, k, 0, 3 * d - 1, d * d + 1, &mut m, &mut out);
    }
    out.sort();
    Ok(out)
}

fn search_multiplicities(
    d: i64,
    k: usize,
    i: usize,
    sum_left: i64,
    sq_left: i64,
    m: &mut Vec<i64>,
    out: &mut Vec<Vector>,
) {
    if i == k {
        if sum_left == 0 && sq_left == 0 {
            let mut coords = vec![d];
            coords.extend(m.iter().map(|&mi| -mi));
            out.push(Vector::from_ints(&coords));
        }
        return;
    }
    let rest = (k - i - 1) as i64;
    // Exceptional multiplicities sit in [-1, d]; prune on both invariants.
    for mi in -1..=d.max(1) {
        let s = sum_left - mi;
        let q = sq_left - mi * mi;
        if q < 0 {
            continue;
        }
        // Remaining sum s over `rest` variables each in [-1, d] with squares
        // summing to q: require |s| <= rest*max and s^2 <= rest*q.
        if s.abs() > rest * d.max(1) + rest {
            continue;
        }
        if rest > 0 && s * s > rest * q {
            continue;
        }
        if rest == 0 && (s != 0 || q != 0) {
            continue;
        }
        m[i] = mi;
        search_multiplicities(d, k, i + 1, s, q, m, out);
    }
    m[i] = 0;
}

/// Nef cone of a degree `9-k` del Pezzo surface (general points, `k <= 8`).
/// For `k >= 2` it is returned by its facets `D.C >= 0` over the negative
/// curves, which generate the dual curve cone; for `k <= 1` there are not
/// enough negative curves and the cone is given by explicit rays.
pub fn del_pezzo_nef(k: usize) -> Result<PolyCone, Error> {
    if k > 8 {
        return Err(Error::Unsupported(
            "the nef cone stops being polyhedral from 9 points on; use the elliptic oracle".into(),
        ));
    }
    let lat = blowup_lattice(k);
    match k {
        0 => PolyCone::from_rays(1, vec![Vector::from_ints(&[1])]),
        1 => PolyCone::from_rays(2, vec![Vector::from_ints(&[1, 0]), Vector::from_ints(&[1, -1])]),
        _ => {
            let facets: Vec<Vector> =
                negative_curves(k)?.iter().map(|c| lat.gram.mul_vec(c)).collect();
            PolyCone::from_facets(lat.rank, facets)
        }
    }
}

/// Result of a nef test against a fibration's curve classes: the minimizing
/// curve is reported either way.
pub struct CurveValue {
    pub curve: Vector,
    pub value: Rational,
}

pub enum NefCheck {
    Nef { critical: CurveValue },
    NotNef { violator: CurveValue },
}

impl NefCheck {
    pub fn is_nef(&self) -> bool {
        matches!(self, NefCheck::Nef { .. })
    }
}

/// Picard lattice of a relatively minimal elliptic surface with zero section
/// and irreducible fibers. The sublattice orthogonal to the fiber `f` and
/// section `o` (the frame) indexes the sections: every section is
/// `s(v) = o + v + h(v) f` with height `h(v) = -v^2/2`, and nef divisors are
/// exactly those meeting `f` and every `s(v)` nonnegatively.
#[derive(Clone)]
pub struct EllipticLattice {
    pub rank: usize,
    /// Intersection form in the natural coordinates used for classes.
    pub gram: Matrix,
    /// Fiber class, natural coordinates.
    pub f: Vector,
    /// Zero-section class, natural coordinates.
    pub o: Vector,
    /// Frame basis vectors, natural coordinates.
    pub frame: Vec<Vector>,
    /// Change of basis: columns are `f, o, frame...` in natural coordinates.
    basis: Matrix,
    basis_inv: Matrix,
    /// Positive definite frame form: `height(v) = v^T pos_frame v / 2`.
    pos_frame: Matrix,
}

impl EllipticLattice {
    /// The rank 10 lattice of a rational elliptic surface: blowup basis
    /// `H, E_1..E_9`, fiber `3H - sum E_i`, zero section `E_9`, frame an
    /// even unimodular rank 8 sublattice.
    pub fn rational_elliptic() -> EllipticLattice {
        let lat = blowup_lattice(9);
        let f = Vector::from_ints(&[3, -1, -1, -1, -1, -1, -1, -1, -1, -1]);
        let o = Vector::from_ints(&[0, 0, 0, 0, 0, 0, 0, 0, 0, 1]);
        let mut frame = Vec::new();
        for i in 1..=7 {
            let mut v = vec![0i64; 10];
            v[i] = 1;
            v[i + 1] = -1;
            frame.push(Vector::from_ints(&v));
        }
        frame.push(Vector::from_ints(&[1, -1, -1, -1, 0, 0, 0, 0, 0, 0]));
        Self::new(lat.gram, f, o, frame).expect("reference lattice is valid")
    }

    /// Assembles and validates an elliptic lattice from its natural-basis
    /// gram matrix and the classes of fiber, section, and frame basis.
    pub fn new(
        gram: Matrix,
        f: Vector,
        o: Vector,
        frame: Vec<Vector>,
    ) -> Result<EllipticLattice, Error> {
        let rank = gram.rows;
        if gram.cols != rank {
            return Err(Error::InvalidLattice("gram matrix must be square".into()));
        }
        if frame.len() + 2 != rank {
            return Err(Error::InvalidLattice("frame must have corank 2".into()));
        }
        if !gram.is_integral() || gram != gram.transpose() {
            return Err(Error::InvalidLattice("gram must be integral symmetric".into()));
        }
        let pair = |a: &Vector, b: &Vector| gram.mul_vec(b).dot(a);
        if !pair(&f, &f).is_zero() {
            return Err(Error::InvalidLattice("fiber class must be isotropic".into()));
        }
        if pair(&o, &o) != rat(-1) || pair(&f, &o) != rat(1) {
            return Err(Error::InvalidLattice("section must be a (-1)-class meeting f once".into()));
        }
        for a in &frame {
            if !pair(a, &f).is_zero() || !pair(a, &o).is_zero() {
                return Err(Error::InvalidLattice("frame must be orthogonal to f and o".into()));
            }
        }
        let mut columns = vec![f.clone(), o.clone()];
        columns.extend(frame.iter().cloned());
        let basis = Matrix::from_rows(&columns).transpose();
        let basis_inv = basis
            .inverse()
            .ok_or_else(|| Error::InvalidLattice("f, o, frame must be a basis".into()))?;
        if !basis.is_integral() || !basis_inv.is_integral() {
            return Err(Error::InvalidLattice("f, o, frame must be a lattice basis".into()));
        }
        // Frame form, negated to be positive definite; evenness makes all
        // heights integers.
        let n = frame.len();
        let mut pos_frame = Matrix::zero(n, n);
        for i in 0..n {
            for j in 0..n {
                pos_frame[(i, j)] = -pair(&frame[i], &frame[j]);
            }
        }
        for i in 0..n {
            if pos_frame[(i, i)].numer().is_odd() {
                return Err(Error::InvalidLattice("frame form must be even".into()));
            }
        }
        if quadform::ldlt(&pos_frame).is_err() {
            return Err(Error::InvalidLattice("frame form must be negative definite".into()));
        }
        Ok(EllipticLattice { rank, gram, f, o, frame, basis, basis_inv, pos_frame })
    }

    pub fn frame_rank(&self) -> usize {
        self.frame.len()
    }

    pub fn pairing(&self, a: &Vector, b: &Vector) -> Rational {
        self.gram.mul_vec(b).dot(a)
    }

    /// Frame vector in natural coordinates from frame-basis coordinates.
    pub fn frame_vector(&self, v: &Vector) -> Vector {
        let mut out = Vector::zero(self.rank);
        for (i, a) in self.frame.iter().enumerate() {
            out = &out + &a.scale(&v[i]);
        }
        out
    }

    /// `height(v) = -v^2/2 >= 0` for a frame vector in frame coordinates.
    pub fn height(&self, v: &Vector) -> Rational {
        self.pos_frame.mul_vec(v).dot(v) / rat(2)
    }

    /// Class of the section `s(v) = o + v + h(v) f`, frame coordinates in.
    pub fn section_class(&self, v: &Vector) -> Vector {
        let w = self.frame_vector(v);
        &(&self.o + &w) + &self.f.scale(&self.height(v))
    }

    /// Coordinates of a class in the `f, o, frame` basis.
    pub fn to_basis(&self, x: &Vector) -> Vector {
        self.basis_inv.mul_vec(x)
    }

    /// Decomposes `d` as `c_f f + c_o o + u` and returns `(c_f, c_o, u)`
    /// with `u` in frame coordinates.
    pub fn split(&self, d: &Vector) -> (Rational, Rational, Vector) {
        let b = self.to_basis(d);
        (b[0].clone(), b[1].clone(), Vector(b.0[2..].to_vec()))
    }

    /// `d . s(v)` as a function of frame coordinates `v` is the convex
    /// quadratic `d.o + l.v + (d.f) h(v)`; this returns `(c0, l, hessian)`.
    fn section_form(&self, d: &Vector) -> (Rational, Vector, Matrix) {
        let c0 = self.pairing(d, &self.o);
        let ell = Vector(self.frame.iter().map(|a| self.pairing(d, a)).collect());
        let a = self.pairing(d, &self.f);
        let mut h = self.pos_frame.clone();
        for i in 0..h.rows {
            for j in 0..h.cols {
                let x = &h[(i, j)] * &a;
                h[(i, j)] = x;
            }
        }
        (c0, ell, h)
    }

    /// Exact minimum of `d . s(v)` over all sections, with minimizing
    /// sections; requires `d . f > 0` (else the infimum may not exist).
    pub fn min_section_value(&self, d: &Vector, cap: usize) -> Result<quadform::ConvexMin, Error> {
        let (c0, ell, h) = self.section_form(d);
        quadform::minimize_convex(&h, &ell, &c0, cap)
    }

    /// A section class `s(v)` with `d . s(v) < bound`, or `None` when every
    /// section pairs at least `bound` with `d`. Works for every sign of
    /// `d . f`: positive fiber degree reduces to the exact minimum, zero
    /// degree makes the values affine in `v`, and negative degree makes them
    /// fall off quadratically, so stepping outward always lands below.
    pub fn section_below(
        &self,
        d: &Vector,
        bound: &Rational,
        cap: usize,
    ) -> Result<Option<Vector>, Error> {
        if d.dim() != self.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, got: d.dim() });
        }
        let a = self.pairing(d, &self.f);
        let (c0, ell, h) = self.section_form(d);
        if self.frame_rank() == 0 {
            // The zero section is the only section.
            return Ok(if &c0 < bound { Some(self.o.clone()) } else { None });
        }
        if a.is_positive() {
            let min = quadform::minimize_convex(&h, &ell, &c0, cap)?;
            return Ok(if &min.value < bound {
                Some(self.section_class(&min.argmins[0]))
            } else {
                None
            });
        }
        if a.is_zero() {
            return Ok(match ell.0.iter().position(|x| !x.is_zero()) {
                None => {
                    if &c0 < bound {
                        Some(self.o.clone())
                    } else {
                        None
                    }
                }
                Some(i) => {
                    // c0 + k l_i < bound one integer past the crossing point.
                    let q = (bound - &c0) / &ell[i];
                    let k = if ell[i].is_positive() { q.floor() - rat(1) } else { q.floor() + rat(1) };
                    let mut v = Vector::zero(self.frame_rank());
                    v[i] = k;
                    debug_assert!(&(&c0 + &ell.dot(&v)) < bound);
                    Some(self.section_class(&v))
                }
            });
        }
        let mut k = rat(1);
        loop {
            let mut v = Vector::zero(self.frame_rank());
            v[0] = k.clone();
            let value = &(&c0 + &ell.dot(&v)) + &(&a * &self.height(&v));
            if &value < bound {
                return Ok(Some(self.section_class(&v)));
            }
            k = &k * &rat(2);
        }
    }

    /// Whether `d` is nef, with the critical curve as certificate. The curve
    /// classes to check are `f` and all sections `s(v)`.
    pub fn nef_check(&self, d: &Vector, cap: usize) -> Result<NefCheck, Error> {
        if d.dim() != self.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, got: d.dim() });
        }
        let a = self.pairing(d, &self.f);
        if a.is_negative() {
            return Ok(NefCheck::NotNef {
                violator: CurveValue { curve: self.f.clone(), value: a },
            });
        }
        if a.is_zero() {
            let (c0, ell, _) = self.section_form(d);
            if let Some(i) = ell.0.iter().position(|x| !x.is_zero()) {
                // d . s(k e_i) = c0 + k l_i is unbounded below; exhibit a
                // violating section explicitly.
                let li = &ell[i];
                let mut k = (&c0 / li).abs().floor() + rat(1);
                if li.is_positive() {
                    k = -k;
                }
                let v = Vector::zero(self.frame_rank());
                let v = {
                    let mut v = v;
                    v[i] = k;
                    v
                };
                let value = &c0 + &ell.dot(&v);
                debug_assert!(value.is_negative());
                return Ok(NefCheck::NotNef {
                    violator: CurveValue { curve: self.section_class(&v), value },
                });
            }
            // d is proportional to f; every section meets it in c0.
            let witness = CurveValue { curve: self.o.clone(), value: c0.clone() };
            return Ok(if c0.is_negative() {
                NefCheck::NotNef { violator: witness }
            } else {
                NefCheck::Nef { critical: witness }
            });
        }
        let min = self.min_section_value(d, cap)?;
        let vstar = min.argmins[0].clone();
        let witness = CurveValue { curve: self.section_class(&vstar), value: min.value.clone() };
        Ok(if min.value.is_negative() {
            NefCheck::NotNef { violator: witness }
        } else if a < min.value {
            // f itself is the curve of minimal intersection.
            NefCheck::Nef { critical: CurveValue { curve: self.f.clone(), value: a } }
        } else {
            NefCheck::Nef { critical: witness }
        })
    }

    /// Least `t` making `d + t f` nef, when it exists: `(d + tf).s(v) =
    /// d.s(v) + t` while `(d + tf).f = d.f` stays fixed.
    pub fn nef_threshold(&self, d: &Vector, cap: usize) -> Result<Option<Rational>, Error> {
        let a = self.pairing(d, &self.f);
        if a.is_negative() {
            return Ok(None);
        }
        if a.is_zero() {
            let (c0, ell, _) = self.section_form(d);
            if ell.0.iter().any(|x| !x.is_zero()) {
                return Ok(None);
            }
            return Ok(Some(-c0));
        }
        let min = self.min_section_value(d, cap)?;
        Ok(Some(-min.value))
    }

    /// All frame coordinates of height at most `hmax`, lexicographic order.
    pub fn sections_up_to(&self, hmax: &Rational, cap: usize) -> Result<Vec<Vector>, Error> {
        let bound = hmax * rat(2);
        quadform::ellipsoid_points(&self.pos_frame, &Vector::zero(self.frame_rank()), &bound, cap)
    }

    /// Matrix (natural coordinates) of the translation by the frame vector
    /// `w`: fixes `f`, sends each section `s(v)` to `s(v + w)`.
    pub fn translation_matrix(&self, w: &Vector) -> Matrix {
        let n = self.frame_rank();
        debug_assert_eq!(w.dim(), n);
        // Images of the f, o, frame basis vectors, in that same basis.
        let mut t = Matrix::zero(self.rank, self.rank);
        t[(0, 0)] = rat(1);
        // o maps to s(w) = o + w + h(w) f.
        t[(0, 1)] = self.height(w);
        t[(1, 1)] = rat(1);
        for i in 0..n {
            t[(2 + i, 1)] = w[i].clone();
        }
        // Frame vectors map to a - (a.w) f.
        for j in 0..n {
            let aw = -self.pos_frame.row(j).dot(w);
            t[(0, 2 + j)] = -aw;
            t[(2 + j, 2 + j)] = rat(1);
        }
        let m = &(&self.basis * &t) * &self.basis_inv;
        debug_assert!(m.is_integral());
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ratio;

    #[test]
    fn negative_curve_counts() {
        // Known counts on general blowups of the plane, degrees 9 down to 1.
        let expected = [0, 1, 3, 6, 10, 16, 27, 56, 240];
        for (k, want) in expected.iter().enumerate() {
            let curves = negative_curves(k).unwrap();
            assert_eq!(curves.len(), *want, "k = {k}");
            let lat = blowup_lattice(k);
            for c in &curves {
                assert_eq!(lat.pairing(c, c), rat(-1));
                assert_eq!(lat.pairing(c, &lat.canonical), rat(-1));
            }
        }
    }

    #[test]
    fn two_point_blowup_nef_rays() {
        let cone = del_pezzo_nef(2).unwrap().dd_convert().unwrap();
        let rays = cone.extremal_rays().unwrap();
        assert_eq!(
            rays,
            vec![
                Vector::from_ints(&[1, -1, 0]),
                Vector::from_ints(&[1, 0, -1]),
                Vector::from_ints(&[1, 0, 0]),
            ]
        );
        // Anticanonical class is interior (the surface is Fano).
        let lat = blowup_lattice(2);
        let anti = -&lat.canonical;
        assert!(cone.interior_contains(&anti).unwrap());
    }

    #[test]
    fn del_pezzo_facet_counts_match_curves() {
        for k in 2..=8 {
            let cone = del_pezzo_nef(k).unwrap();
            assert_eq!(cone.facets().unwrap().len(), negative_curves(k).unwrap().len());
        }
        assert!(negative_curves(9).is_err());
        assert!(del_pezzo_nef(9).is_err());
    }

    #[test]
    fn small_del_pezzo_nef_cones_are_strict() {
        for k in 0..=5 {
            let cone = del_pezzo_nef(k).unwrap().dd_convert().unwrap();
            assert!(cone.is_strict().unwrap());
            let lat = blowup_lattice(k);
            let anti = -&lat.canonical;
            assert!(cone.contains(&anti).unwrap());
        }
    }

    #[test]
    fn reference_elliptic_lattice_is_valid() {
        let e = EllipticLattice::rational_elliptic();
        assert_eq!(e.rank, 10);
        assert_eq!(e.frame_rank(), 8);
        // The frame is even unimodular positive definite after negation.
        assert_eq!(e.pos_frame.det(), rat(1));
        // Sections are (-1)-classes meeting the fiber once.
        let v = Vector::from_ints(&[1, 0, -2, 0, 0, 3, 0, 1]);
        let s = e.section_class(&v);
        assert!(s.is_integral());
        assert_eq!(e.pairing(&s, &s), rat(-1));
        assert_eq!(e.pairing(&s, &e.f), rat(1));
        assert_eq!(e.pairing(&s, &e.o), &e.height(&v) - &rat(1));
    }

    #[test]
    fn section_counts_by_height() {
        let e = EllipticLattice::rational_elliptic();
        // Theta series of the even unimodular rank 8 lattice: 240 minimal
        // vectors at height 1, then 2160 at height 2.
        assert_eq!(e.sections_up_to(&rat(0), 10).unwrap().len(), 1);
        assert_eq!(e.sections_up_to(&rat(1), 1000).unwrap().len(), 241);
        assert_eq!(e.sections_up_to(&rat(2), 10000).unwrap().len(), 2401);
    }

    #[test]
    fn nef_checks_on_reference_surface() {
        let e = EllipticLattice::rational_elliptic();
        let cap = 1_000_000;
        // o + 2f is nef: minimal section value is 1 (attained at v = 0 among
        // others); f-value is 1.
        let d = &e.o + &e.f.scale(&rat(2));
        match e.nef_check(&d, cap).unwrap() {
            NefCheck::Nef { critical } => assert_eq!(critical.value, rat(1)),
            _ => panic!("expected nef"),
        }
        // o + f is on the boundary: s(0) = o meets it in 0.
        let d = &e.o + &e.f;
        match e.nef_check(&d, cap).unwrap() {
            NefCheck::Nef { critical } => {
                assert_eq!(critical.value, rat(0));
                assert_eq!(critical.curve, e.o);
            }
            _ => panic!("expected nef"),
        }
        // o alone is not nef: o . o = -1.
        match e.nef_check(&e.o, cap).unwrap() {
            NefCheck::NotNef { violator } => {
                assert_eq!(violator.value, rat(-1));
                assert_eq!(violator.curve, e.o);
            }
            _ => panic!("expected not nef"),
        }
        // -f is not nef, certified by the fiber itself... via section values:
        // (-f).f = 0 and (-f).s(v) = -1 for every v.
        let mf = -&e.f;
        match e.nef_check(&mf, cap).unwrap() {
            NefCheck::NotNef { violator } => assert_eq!(violator.value, rat(-1)),
            _ => panic!("expected not nef"),
        }
        // f - o pairs to -1 with f.
        let d = &e.f - &e.o;
        match e.nef_check(&d, cap).unwrap() {
            NefCheck::NotNef { violator } => {
                assert_eq!(violator.curve, e.f);
                assert_eq!(violator.value, rat(-1));
            }
            _ => panic!("expected not nef"),
        }
        // Divisor orthogonal to f with nonzero frame part: unbounded below.
        let alpha = e.frame[0].clone();
        match e.nef_check(&alpha, cap).unwrap() {
            NefCheck::NotNef { violator } => {
                assert!(violator.value.is_negative());
                // The violator is a genuine section class.
                assert_eq!(e.pairing(&violator.curve, &violator.curve), rat(-1));
                assert_eq!(e.pairing(&violator.curve, &e.f), rat(1));
                assert_eq!(e.pairing(&alpha, &violator.curve), violator.value);
            }
            _ => panic!("expected not nef"),
        }
    }

    #[test]
    fn nef_threshold_on_reference_surface() {
        let e = EllipticLattice::rational_elliptic();
        let cap = 1_000_000;
        // o needs one fiber: threshold exactly 1, and o + f is nef while
        // o + (1 - eps) f is not.
        assert_eq!(e.nef_threshold(&e.o, cap).unwrap(), Some(rat(1)));
        let boundary = &e.o + &e.f;
        assert!(e.nef_check(&boundary, cap).unwrap().is_nef());
        let below = &e.o + &e.f.scale(&ratio(99, 100));
        assert!(!e.nef_check(&below, cap).unwrap().is_nef());
        // Already-nef divisors can have negative thresholds.
        let ample = &e.o + &e.f.scale(&rat(2));
        assert_eq!(e.nef_threshold(&ample, cap).unwrap(), Some(rat(-1)));
        // -f is fixed by adding fibers up to sign: (t - 1) f is nef from 1.
        assert_eq!(e.nef_threshold(&-&e.f, cap).unwrap(), Some(rat(1)));
        // No threshold at all when d.f < 0 or d has frame part but d.f = 0.
        assert_eq!(e.nef_threshold(&-&e.o, cap).unwrap(), None);
        assert_eq!(e.nef_threshold(&e.frame[0], cap).unwrap(), None);
    }

    #[test]
    fn translations_act_on_sections() {
        let e = EllipticLattice::rational_elliptic();
        let w = Vector::from_ints(&[1, 0, 0, -1, 0, 2, 0, 0]);
        let t = e.translation_matrix(&w);
        assert!(t.is_integral());
        // Gram-preserving.
        let g = &e.gram;
        assert_eq!(&(&t.transpose() * g) * &t, *g);
        // Fixes f, translates sections.
        assert_eq!(t.mul_vec(&e.f), e.f);
        for v in [
            Vector::from_ints(&[0, 0, 0, 0, 0, 0, 0, 0]),
            Vector::from_ints(&[1, 2, 0, 0, -1, 0, 0, 3]),
        ] {
            let vw = &v + &w;
            assert_eq!(t.mul_vec(&e.section_class(&v)), e.section_class(&vw));
        }
        // Group law.
        let w2 = Vector::from_ints(&[0, 1, 1, 0, 0, 0, -1, 0]);
        let t2 = e.translation_matrix(&w2);
        assert_eq!(&t * &t2, e.translation_matrix(&(&w + &w2)));
        let tinv = e.translation_matrix(&-&w);
        assert_eq!(&t * &tinv, Matrix::identity(10));
    }

    #[test]
    fn toy_rank_three_fibration() {
        // Frame of rank 1 generated by a (-2)-vector; basis (f, o, a).
        let gram = Matrix::from_int_rows(&[vec![0, 1, 0], vec![1, -1, 0], vec![0, 0, -2]]);
        let e = EllipticLattice::new(
            gram,
            Vector::from_ints(&[1, 0, 0]),
            Vector::from_ints(&[0, 1, 0]),
            vec![Vector::from_ints(&[0, 0, 1])],
        )
        .unwrap();
        assert_eq!(e.height(&Vector::from_ints(&[3])), rat(9));
        let t = e.translation_matrix(&Vector::from_ints(&[1]));
        // Images frozen from the defining relations.
        assert_eq!(t.col(0), Vector::from_ints(&[1, 0, 0]));
        assert_eq!(t.col(1), Vector::from_ints(&[1, 1, 1]));
        assert_eq!(t.col(2), Vector::from_ints(&[2, 0, 1]));
        assert!(e.nef_check(&Vector::from_ints(&[2, 1, 0]), 1000).unwrap().is_nef());
    }

    #[test]
    fn invalid_lattices_are_rejected() {
        // Odd frame vector.
        let gram = Matrix::from_int_rows(&[vec![0, 1, 0], vec![1, -1, 0], vec![0, 0, -1]]);
        assert!(EllipticLattice::new(
            gram,
            Vector::from_ints(&[1, 0, 0]),
            Vector::from_ints(&[0, 1, 0]),
            vec![Vector::from_ints(&[0, 0, 1])],
        )
        .is_err());
        // Fiber not isotropic.
        let gram = Matrix::from_int_rows(&[vec![1, 1, 0], vec![1, -1, 0], vec![0, 0, -2]]);
        assert!(EllipticLattice::new(
            gram,
            Vector::from_ints(&[1, 0, 0]),
            Vector::from_ints(&[0, 1, 0]),
            vec![Vector::from_ints(&[0, 0, 1])],
        )
        .is_err());
        // Frame not orthogonal to the section.
        let gram = Matrix::from_int_rows(&[vec![0, 1, 0], vec![1, -1, 1], vec![0, 1, -2]]);
        assert!(EllipticLattice::new(
            gram,
            Vector::from_ints(&[1, 0, 0]),
            Vector::from_ints(&[0, 1, 0]),
            vec![Vector::from_ints(&[0, 0, 1])],
        )
        .is_err());
    }
}
