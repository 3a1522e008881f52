//! Fundamental-domain machinery for group actions on nef cones: orbit balls,
//! Dirichlet-style domains, tiling verification (coverage plus exact interior
//! disjointness), trivial-stabilizer search, separating perturbations of the
//! defining functional, and the glued domain construction for fiber products.
//!
//! Groups are given by integer unimodular generator matrices acting on the
//! ambient class lattice. Infinite translation groups of elliptic fibrations
//! are handled with word-bounded balls; coverage of sample classes is then
//! certified by exact convex minimization of the defining functional along
//! the orbit, which a bounded breadth-first search could never certify.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::cone::PolyCone;
use crate::error::Error;
use crate::fibprod::{Decomposition, FiberProduct, Oracle};
use crate::linalg::{rat, ratio, Matrix, Rational, Vector};
use crate::lp;
use crate::quadform;
use crate::surface::EllipticLattice;

/// Default bound on orbit-ball size; override with `NEFCONE_ORBIT_CAP`.
pub const DEFAULT_ORBIT_CAP: usize = 100_000;

/// Enumeration cap for oracle searches run by this module.
const ORACLE_CAP: usize = 1 << 20;

fn orbit_cap() -> usize {
    std::env::var("NEFCONE_ORBIT_CAP")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_ORBIT_CAP)
}

/// The cone a group action preserves: an explicit polyhedral cone, the nef
/// cone of an elliptic fibration queried through its section-minimizing
/// oracle, or the glued nef cone of a fiber product queried through shift
/// decomposition.
#[derive(Clone)]
pub enum PreservedCone {
    Poly(PolyCone),
    Elliptic(EllipticLattice),
    Product(Box<FiberProduct>),
}

impl PreservedCone {
    pub fn rank(&self) -> usize {
        match self {
            PreservedCone::Poly(c) => c.dim(),
            PreservedCone::Elliptic(e) => e.rank,
            PreservedCone::Product(fp) => fp.rank,
        }
    }

    /// Exact membership test against the cone or its oracle.
    pub fn contains(&self, x: &Vector) -> Result<bool, Error> {
        match self {
            PreservedCone::Poly(c) => c.contains(x),
            PreservedCone::Elliptic(e) => Ok(e.nef_check(x, ORACLE_CAP)?.is_nef()),
            PreservedCone::Product(fp) => Ok(fp.decompose_ambient(x)?.is_nef()),
        }
    }

    /// Exact interior test. For an elliptic oracle the interior consists of
    /// the classes of positive fiber degree whose minimal section value is
    /// positive; for a product, of the classes admitting a shift whose two
    /// parts are interior on their factors.
    pub fn interior_contains(&self, x: &Vector) -> Result<bool, Error> {
        match self {
            PreservedCone::Poly(c) => c.interior_contains(x),
            PreservedCone::Elliptic(e) => elliptic_interior(e, x),
            PreservedCone::Product(fp) => match fp.decompose_ambient(x)? {
                Decomposition::NotNef(_) => Ok(false),
                Decomposition::Nef { interval: (lo, hi), .. } => {
                    if lo >= hi {
                        return Ok(false);
                    }
                    let t = (&lo + &hi) * ratio(1, 2);
                    let (d1, d2) = fp.split(x);
                    Ok(factor_strictly_nef(&fp.left.oracle, &(&d1 - &fp.left.f.scale(&t)))?
                        && factor_strictly_nef(&fp.right.oracle, &(&d2 + &fp.right.f.scale(&t)))?)
                }
            },
        }
    }
}

fn elliptic_interior(e: &EllipticLattice, x: &Vector) -> Result<bool, Error> {
    if !e.pairing(x, &e.f).is_positive() {
        return Ok(false);
    }
    Ok(e.min_section_value(x, ORACLE_CAP)?.value.is_positive())
}

fn factor_strictly_nef(oracle: &Oracle, d: &Vector) -> Result<bool, Error> {
    match oracle {
        Oracle::Cone(nef) => nef.interior_contains(d),
        Oracle::Elliptic(e) => elliptic_interior(e, d),
    }
}

/// How the group relates to the fibration structure. Translation actions
/// (compositions of fiberwise translations that fix the fiber class) never
/// saturate a word ball, and their orbits of a fixed class are quadratic in
/// the translation vector, which enables certified convex coverage searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionKind {
    General,
    Translations,
}

/// A group acting on a class lattice by integer unimodular matrices that
/// preserve a chosen cone (and a pairing, when one is attached).
#[derive(Clone)]
pub struct GroupAction {
    pub rank: usize,
    pub generators: Vec<Matrix>,
    pub inverses: Vec<Matrix>,
    pub preserved: PreservedCone,
    pub gram: Option<Matrix>,
    pub kind: ActionKind,
    /// Number of sample classes used per generator to certify cone
    /// preservation when the cone is an oracle; zero means the check was
    /// exact on the full ray list of a polyhedral cone.
    pub preservation_samples: usize,
}

impl GroupAction {
    /// Validates generators (integrality, unimodularity, pairing invariance,
    /// cone preservation) and stores their inverses.
    pub fn new(
        generators: Vec<Matrix>,
        preserved: PreservedCone,
        gram: Option<Matrix>,
        kind: ActionKind,
    ) -> Result<GroupAction, Error> {
        let rank = preserved.rank();
        let mut inverses = Vec::new();
        for g in &generators {
            if g.rows != rank || g.cols != rank {
                return Err(Error::DimensionMismatch { expected: rank, got: g.rows });
            }
            if !g.is_integral() {
                return Err(Error::InvalidAction("generator entries must be integers".into()));
            }
            let det = g.det();
            if det != rat(1) && det != rat(-1) {
                return Err(Error::InvalidAction(
                    "generator must be invertible over the integers (determinant ±1)".into(),
                ));
            }
            let inv = g
                .inverse()
                .ok_or_else(|| Error::InvalidAction("generator must be invertible".into()))?;
            debug_assert!(inv.is_integral());
            if let Some(form) = &gram {
                let gtg = g.transpose().mul_mat(&form.mul_mat(g));
                if &gtg != form {
                    return Err(Error::InvalidAction(
                        "generator does not preserve the attached pairing".into(),
                    ));
                }
            }
            inverses.push(inv);
        }
        let mut preservation_samples = 0;
        let samples = preservation_sample_classes(&preserved)?;
        for (g, inv) in generators.iter().zip(&inverses) {
            match &preserved {
                PreservedCone::Poly(c) => {
                    for r in c.rays()? {
                        if !c.contains(&g.mul_vec(&r))? || !c.contains(&inv.mul_vec(&r))? {
                            return Err(Error::InvalidAction(
                                "generator does not preserve the cone".into(),
                            ));
                        }
                    }
                }
                _ => {
                    for s in &samples {
                        if !preserved.contains(&g.mul_vec(s))?
                            || !preserved.contains(&inv.mul_vec(s))?
                        {
                            return Err(Error::InvalidAction(
                                "generator moves a sample class out of the cone".into(),
                            ));
                        }
                    }
                    preservation_samples = samples.len();
                }
            }
        }
        Ok(GroupAction { rank, generators, inverses, preserved, gram, kind, preservation_samples })
    }

    /// Order-two action swapping the two coordinates of the quadrant.
    pub fn coordinate_swap() -> Result<GroupAction, Error> {
        let swap = Matrix::from_int_rows(&[vec![0, 1], vec![1, 0]]);
        let quadrant = PolyCone::from_rays(
            2,
            vec![Vector::from_ints(&[1, 0]), Vector::from_ints(&[0, 1])],
        )?
        .dd_convert()?;
        GroupAction::new(
            vec![swap],
            PreservedCone::Poly(quadrant),
            Some(Matrix::identity(2)),
            ActionKind::General,
        )
    }

    /// Fiberwise translation action of an elliptic lattice: one generator per
    /// frame basis vector.
    pub fn translations(e: &EllipticLattice) -> Result<GroupAction, Error> {
        let n = e.frame_rank();
        let gens: Vec<Matrix> =
            (0..n).map(|i| e.translation_matrix(&Vector::unit(n, i))).collect();
        let gram = Some(e.gram.clone());
        GroupAction::new(gens, PreservedCone::Elliptic(e.clone()), gram, ActionKind::Translations)
    }
}

/// Nef sample classes used to spot-check cone preservation for oracle cones.
fn preservation_sample_classes(preserved: &PreservedCone) -> Result<Vec<Vector>, Error> {
    Ok(match preserved {
        PreservedCone::Poly(_) => Vec::new(),
        PreservedCone::Elliptic(e) => elliptic_nef_samples(e),
        PreservedCone::Product(fp) => {
            let mut out = Vec::new();
            for s in factor_nef_samples(&fp.left.oracle)? {
                out.push(fp.pull_left.mul_vec(&s));
            }
            for s in factor_nef_samples(&fp.right.oracle)? {
                out.push(fp.pull_right.mul_vec(&s));
            }
            out
        }
    })
}

fn elliptic_nef_samples(e: &EllipticLattice) -> Vec<Vector> {
    let ample = &e.o + &e.f.scale(&rat(2));
    let mut out = vec![e.f.clone(), ample.clone()];
    for i in 0..e.frame_rank() {
        for s in [1i64, -1] {
            let t = e.translation_matrix(&Vector::unit(e.frame_rank(), i).scale(&rat(s)));
            out.push(t.mul_vec(&ample));
        }
    }
    out
}

fn factor_nef_samples(oracle: &Oracle) -> Result<Vec<Vector>, Error> {
    match oracle {
        Oracle::Cone(nef) => nef.rays(),
        Oracle::Elliptic(e) => Ok(elliptic_nef_samples(e)),
    }
}

/// A word-bounded orbit ball with the words that produced each element.
pub struct OrbitBall {
    pub elements: Vec<Matrix>,
    pub words: Vec<Vec<String>>,
    /// True when some breadth-first level added no new elements, which
    /// certifies that the ball equals the whole (finite) group.
    pub saturated: bool,
}

fn matrix_key(m: &Matrix) -> Vec<Vector> {
    (0..m.rows).map(|i| m.row(i)).collect()
}

/// All distinct products of at most `l` generators and inverses, breadth
/// first, each level in a canonical order.
pub fn orbit_ball_full(action: &GroupAction, l: i64) -> Result<OrbitBall, Error> {
    let cap = orbit_cap();
    let mut seen: BTreeSet<Vec<Vector>> = BTreeSet::new();
    let id = Matrix::identity(action.rank);
    seen.insert(matrix_key(&id));
    let mut elements = vec![id.clone()];
    let mut words: Vec<Vec<String>> = vec![Vec::new()];
    let mut level: Vec<(Matrix, Vec<String>)> = vec![(id, Vec::new())];
    let mut steps: Vec<(String, &Matrix)> = Vec::new();
    for (i, g) in action.generators.iter().enumerate() {
        steps.push((format!("g{i}"), g));
    }
    for (i, g) in action.inverses.iter().enumerate() {
        steps.push((format!("g{i}^-1"), g));
    }
    let mut saturated = action.generators.is_empty();
    for _ in 0..l {
        let mut fresh: Vec<(Vec<Vector>, Matrix, Vec<String>)> = Vec::new();
        for (m, w) in &level {
            for (name, g) in &steps {
                let prod = m.mul_mat(g);
                let key = matrix_key(&prod);
                if !seen.contains(&key) {
                    let mut word = w.clone();
                    word.push(name.clone());
                    fresh.push((key, prod, word));
                }
            }
        }
        fresh.sort_by(|a, b| a.0.cmp(&b.0));
        fresh.dedup_by(|a, b| a.0 == b.0);
        if fresh.is_empty() {
            saturated = true;
            break;
        }
        if elements.len() + fresh.len() > cap {
            return Err(Error::CapExceeded { what: "orbit ball".into(), cap });
        }
        level = Vec::new();
        for (key, m, w) in fresh {
            seen.insert(key);
            elements.push(m.clone());
            words.push(w.clone());
            level.push((m, w));
        }
    }
    Ok(OrbitBall { elements, words, saturated })
}

/// The orbit ball as a plain list of matrices, identity first.
pub fn orbit_ball(action: &GroupAction, l: i64) -> Result<Vec<Matrix>, Error> {
    Ok(orbit_ball_full(action, l)?.elements)
}

/// What a domain candidate's word bound certifies: a saturated ball proves
/// the whole group was used; otherwise only words up to the bound were.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Certification {
    ExactFiniteGroup,
    BoundedWord,
}

impl Certification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Certification::ExactFiniteGroup => "exact-finite-group",
            Certification::BoundedWord => "bounded-word",
        }
    }
}

/// A candidate fundamental domain: the stored polyhedral data, the defining
/// functional, the word bound of the wall system, and what that bound
/// certifies.
///
/// For a polyhedral preserved cone the stored cone is exactly the domain
/// (cone ∩ walls) with irredundant facets. For an oracle-backed cone the
/// domain is the wall system intersected with the nef cone; the stored
/// polyhedral data is its certified skeleton — every extreme generator of
/// the wall cone, shifted along the fiber to the exact point where its
/// minimal section value vanishes — while membership tests use the defining
/// system (walls plus oracle) directly.
#[derive(Clone)]
pub struct DomainCandidate {
    pub domain: PolyCone,
    pub xi: Vector,
    pub word_bound: i64,
    pub certification: Certification,
}

/// Dirichlet walls of the ball: one functional `γᵀξ − ξ` per non-identity
/// element. Errors when some element stabilizes `ξ`.
fn dirichlet_walls(ball: &OrbitBall, xi: &Vector) -> Result<Vec<Vector>, Error> {
    let mut walls = Vec::new();
    let mut seen = BTreeSet::new();
    for (m, w) in ball.elements.iter().zip(&ball.words).skip(1) {
        let row = &m.transpose().mul_vec(xi) - xi;
        if row.is_zero() {
            return Err(Error::XiStabilized { element: w.join(" ") });
        }
        if seen.insert(row.clone()) {
            walls.push(row);
        }
    }
    Ok(walls)
}

fn check_interior_dual(preserved: &PreservedCone, xi: &Vector) -> Result<(), Error> {
    let ok = match preserved {
        PreservedCone::Poly(c) => c.rays()?.iter().all(|r| xi.dot(r).is_positive()),
        PreservedCone::Elliptic(e) => {
            let inv = e.gram.inverse().expect("intersection form is unimodular");
            elliptic_interior(e, &inv.mul_vec(xi))?
        }
        PreservedCone::Product(_) => true,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Unsupported(
            "the functional must be strictly positive on the preserved cone".into(),
        ))
    }
}

/// Dirichlet domain candidate for the ball of word length `l`: the preserved
/// cone intersected with the halfspaces `ξ(x) ≤ ξ(γx)`.
///
/// Polyhedral cones give the intersection itself with irredundant facets.
/// Elliptic oracles give the certified skeleton described on
/// [`DomainCandidate`]; the construction requires the walls to vanish on the
/// fiber class, which holds exactly for fiberwise translation groups.
pub fn dirichlet_domain(
    action: &GroupAction,
    xi: &Vector,
    l: i64,
) -> Result<DomainCandidate, Error> {
    if xi.dim() != action.rank {
        return Err(Error::DimensionMismatch { expected: action.rank, got: xi.dim() });
    }
    check_interior_dual(&action.preserved, xi)?;
    let ball = orbit_ball_full(action, l)?;
    let walls = dirichlet_walls(&ball, xi)?;
    let domain = match &action.preserved {
        PreservedCone::Poly(c) => {
            let mut facets = c.facets()?;
            facets.extend(walls.iter().cloned());
            PolyCone::from_facets(action.rank, facets)?.dd_convert()?
        }
        PreservedCone::Elliptic(e) => elliptic_wall_skeleton(e, &walls, action.rank)?,
        PreservedCone::Product(_) => {
            return Err(Error::Unsupported(
                "build one domain per factor and glue them with the product construction".into(),
            ))
        }
    };
    for r in domain.rays()? {
        if !xi.dot(&r).is_positive() {
            return Err(Error::Unsupported(
                "the functional degenerates on the domain; perturb it".into(),
            ));
        }
    }
    let certification = certification_for(action, &ball, l)?;
    Ok(DomainCandidate { domain, xi: xi.clone(), word_bound: l, certification })
}

fn certification_for(
    action: &GroupAction,
    ball: &OrbitBall,
    l: i64,
) -> Result<Certification, Error> {
    if ball.saturated {
        return Ok(Certification::ExactFiniteGroup);
    }
    match action.kind {
        // A fiberwise translation by a nonzero vector has infinite order, so
        // the ball keeps growing and probing one more level would be wasted.
        ActionKind::Translations => Ok(Certification::BoundedWord),
        ActionKind::General => {
            let bigger = orbit_ball_full(action, l + 1)?;
            if bigger.elements.len() == ball.elements.len() {
                Ok(Certification::ExactFiniteGroup)
            } else {
                Ok(Certification::BoundedWord)
            }
        }
    }
}

/// Skeleton of (wall cone ∩ nef cone) for an elliptic oracle: every extreme
/// generator of the wall cone with positive fiber degree is lifted along the
/// fiber to the exact point where its minimal section value vanishes (the
/// walls vanish on the fiber class, so lifting preserves them); fiber-degree
/// zero generators are kept only when already nef, which keeps the fiber ray
/// and drops its negative.
fn elliptic_wall_skeleton(
    e: &EllipticLattice,
    walls: &[Vector],
    rank: usize,
) -> Result<PolyCone, Error> {
    for w in walls {
        if !w.dot(&e.f).is_zero() {
            return Err(Error::Unsupported(
                "the wall system must vanish on the fiber class; only fiberwise translation \
                 groups are supported on elliptic oracles"
                    .into(),
            ));
        }
    }
    if walls.is_empty() {
        return Err(Error::Unsupported(
            "the whole nef cone of an elliptic fibration is not polyhedral; a trivial group \
             has no finite domain description"
                .into(),
        ));
    }
    let cell = PolyCone::from_facets(rank, walls.to_vec())?;
    let mut kept: Vec<Vector> = Vec::new();
    for g in cell.rays()? {
        let b = e.pairing(&g, &e.f);
        if b.is_positive() {
            let m = e.min_section_value(&g, ORACLE_CAP)?;
            let shift = if m.value.is_negative() { -&m.value } else { rat(0) };
            kept.push((&g + &e.f.scale(&shift)).primitive());
        } else if b.is_zero() && e.nef_check(&g, ORACLE_CAP)?.is_nef() {
            kept.push(g.primitive());
        }
    }
    kept.sort();
    kept.dedup();
    let domain = PolyCone::from_rays(rank, kept.clone())?;
    // Small skeletons afford the double conversion to irredundant facets;
    // large ones stay ray-only because their facet systems are exponentially
    // bigger and nothing downstream needs them.
    if kept.len() <= 16 {
        domain.dd_convert()
    } else {
        Ok(domain)
    }
}

/// Result of the coverage search for one sample.
#[derive(Clone, Debug)]
pub struct CoverageRecord {
    pub sample: Vector,
    pub covered: bool,
    /// Word in the generators for ball searches.
    pub word: Option<String>,
    /// Translation vector for convex-minimization searches (factor vectors
    /// concatenated for product actions).
    pub translation: Option<Vector>,
    /// Word length: ball word length, or the ℓ¹ norm of the translation.
    pub word_length: Option<i64>,
}

/// Disjointness verdict for one non-identity ball element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Disjointness {
    /// Interiors are disjoint; certified by an infeasible strict system.
    Disjoint,
    /// Interiors overlap at the recorded point.
    Overlap(Vector),
    /// The element's wall is not certified valid on the domain (word bound
    /// exceeded), so no exact verdict is available.
    Undetermined,
}

#[derive(Clone, Debug)]
pub struct DisjointnessRecord {
    pub word: String,
    pub verdict: Disjointness,
}

/// Tiling report: per-sample coverage, per-element interior disjointness,
/// and the interior witness certifying that the domain is full-dimensional
/// (which makes the wall inequalities strict on the interior).
pub struct TilingReport {
    pub coverage: Vec<CoverageRecord>,
    pub disjointness: Vec<DisjointnessRecord>,
    pub all_covered: bool,
    pub all_disjoint: bool,
    pub interior_witness: Vector,
}

/// Verifies the two tiling properties of a candidate on a word ball:
/// coverage of the given interior samples (breadth-first for polyhedral
/// cones, certified convex minimization for translation actions on oracles)
/// and exact pairwise interior disjointness.
pub fn tiling_check(
    candidate: &DomainCandidate,
    action: &GroupAction,
    samples: &[Vector],
    l: i64,
) -> Result<TilingReport, Error> {
    for s in samples {
        if !action.preserved.interior_contains(s)? {
            return Err(Error::Unsupported(
                "samples must lie in the interior of the preserved cone".into(),
            ));
        }
    }
    let ball = orbit_ball_full(action, l)?;
    let wall_ball = if l == candidate.word_bound {
        None
    } else {
        Some(orbit_ball_full(action, candidate.word_bound)?)
    };
    let wall_source = wall_ball.as_ref().unwrap_or(&ball);
    let walls = dirichlet_walls(wall_source, &candidate.xi)?;
    let interior_witness = interior_witness(candidate, action, &walls)?;
    let mut coverage = Vec::new();
    for s in samples {
        coverage.push(cover_sample(candidate, action, &ball, &walls, s)?);
    }
    let domain_rays = candidate.domain.rays()?;
    let mut disjointness = Vec::new();
    for (m, w) in ball.elements.iter().zip(&ball.words).skip(1) {
        let verdict = check_disjoint(candidate, action, &domain_rays, m, &interior_witness, l)?;
        disjointness.push(DisjointnessRecord { word: w.join(" "), verdict });
    }
    let all_covered = coverage.iter().all(|c| c.covered);
    let all_disjoint = disjointness.iter().all(|d| d.verdict == Disjointness::Disjoint);
    Ok(TilingReport { coverage, disjointness, all_covered, all_disjoint, interior_witness })
}

/// A point with every wall strict and the preserved cone's interior reached:
/// certifies the domain is full-dimensional, so valid wall inequalities are
/// strict on its interior.
fn interior_witness(
    candidate: &DomainCandidate,
    action: &GroupAction,
    walls: &[Vector],
) -> Result<Vector, Error> {
    let strict = |z: &Vector| -> Result<bool, Error> {
        Ok(walls.iter().all(|w| w.dot(z).is_positive())
            && action.preserved.interior_contains(z)?)
    };
    match &action.preserved {
        PreservedCone::Poly(_) => {
            let mut rows = candidate.domain.facets()?;
            rows.extend(walls.iter().cloned());
            lp::strict_system_feasible(&rows, action.rank)
                .ok_or_else(|| Error::Unsupported("the domain has empty interior".into()))
        }
        PreservedCone::Elliptic(e) => {
            for k in 2..=8i64 {
                let z = &e.o + &e.f.scale(&rat(k));
                if strict(&z)? {
                    return Ok(z);
                }
            }
            Err(Error::Unsupported("no interior witness along the section ray".into()))
        }
        PreservedCone::Product(fp) => {
            let z1 = factor_interior_class(&fp.left.oracle)?;
            let z2 = factor_interior_class(&fp.right.oracle)?;
            let z = &fp.pull_left.mul_vec(&z1) + &fp.pull_right.mul_vec(&z2);
            if strict(&z)? {
                Ok(z)
            } else {
                Err(Error::Unsupported("no interior witness from the factor interiors".into()))
            }
        }
    }
}

fn factor_interior_class(oracle: &Oracle) -> Result<Vector, Error> {
    match oracle {
        Oracle::Cone(nef) => lp::strict_system_feasible(&nef.facets()?, nef.dim())
            .ok_or_else(|| Error::Unsupported("factor nef cone has empty interior".into())),
        Oracle::Elliptic(e) => Ok(&e.o + &e.f.scale(&rat(2))),
    }
}

fn cover_sample(
    candidate: &DomainCandidate,
    action: &GroupAction,
    ball: &OrbitBall,
    walls: &[Vector],
    sample: &Vector,
) -> Result<CoverageRecord, Error> {
    match &action.preserved {
        PreservedCone::Poly(_) => {
            for (m, w) in ball.elements.iter().zip(&ball.words) {
                let y = m.mul_vec(sample);
                if candidate.domain.contains(&y)? {
                    return Ok(CoverageRecord {
                        sample: sample.clone(),
                        covered: true,
                        word: Some(if w.is_empty() { "e".into() } else { w.join(" ") }),
                        translation: None,
                        word_length: Some(w.len() as i64),
                    });
                }
            }
            Ok(CoverageRecord {
                sample: sample.clone(),
                covered: false,
                word: None,
                translation: None,
                word_length: None,
            })
        }
        PreservedCone::Elliptic(e) => {
            let w = minimize_functional_over_translations(e, &candidate.xi, sample)?;
            let y = e.translation_matrix(&w).mul_vec(sample);
            let covered = walls.iter().all(|r| !r.dot(&y).is_negative())
                && e.nef_check(&y, ORACLE_CAP)?.is_nef();
            let norm = l1_norm(&w);
            Ok(CoverageRecord {
                sample: sample.clone(),
                covered,
                word: None,
                translation: Some(w),
                word_length: Some(norm),
            })
        }
        PreservedCone::Product(fp) => {
            let (e1, e2) = match (&fp.left.oracle, &fp.right.oracle) {
                (Oracle::Elliptic(a), Oracle::Elliptic(b)) => (a, b),
                _ => {
                    return Err(Error::Unsupported(
                        "product coverage needs elliptic oracles on both factors".into(),
                    ))
                }
            };
            // The glued functional splits over the factors (walls vanish on
            // the fiber), so the orbit minimization separates.
            let xi1 = fp.pull_left.transpose().mul_vec(&candidate.xi);
            let xi2 = fp.pull_right.transpose().mul_vec(&candidate.xi);
            let (d1, d2) = fp.split(sample);
            let w1 = minimize_functional_over_translations(e1, &xi1, &d1)?;
            let w2 = minimize_functional_over_translations(e2, &xi2, &d2)?;
            let y1 = e1.translation_matrix(&w1).mul_vec(&d1);
            let y2 = e2.translation_matrix(&w2).mul_vec(&d2);
            let y = &fp.pull_left.mul_vec(&y1) + &fp.pull_right.mul_vec(&y2);
            let covered = walls.iter().all(|r| !r.dot(&y).is_negative())
                && fp.decompose_ambient(&y)?.is_nef();
            let mut wv = w1.0.clone();
            wv.extend(w2.0.iter().cloned());
            let w = Vector(wv);
            let norm = l1_norm(&w);
            Ok(CoverageRecord {
                sample: sample.clone(),
                covered,
                word: None,
                translation: Some(w),
                word_length: Some(norm),
            })
        }
    }
}

fn l1_norm(w: &Vector) -> i64 {
    w.0.iter().map(|x| x.numer().magnitude().try_into().unwrap_or(i64::MAX)).sum()
}

/// Exact global minimizer of `w ↦ ξ(t_w x)` over the translation lattice.
/// The function is an exact convex quadratic (positive definite whenever `x`
/// has positive fiber degree and `ξ` is positive on the fiber), recovered
/// here by finite differences and minimized by certified lattice search.
fn minimize_functional_over_translations(
    e: &EllipticLattice,
    xi: &Vector,
    x: &Vector,
) -> Result<Vector, Error> {
    let n = e.frame_rank();
    let phi = |w: &Vector| -> Rational { xi.dot(&e.translation_matrix(w).mul_vec(x)) };
    let c0 = xi.dot(x);
    let mut singles = Vec::with_capacity(n);
    let mut h = Matrix::zero(n, n);
    for i in 0..n {
        let ei = Vector::unit(n, i);
        let fi = phi(&ei);
        let f2i = phi(&ei.scale(&rat(2)));
        h[(i, i)] = &(&f2i - &(&fi * &rat(2))) + &c0;
        singles.push(fi);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let fij = phi(&(&Vector::unit(n, i) + &Vector::unit(n, j)));
            let v = &(&fij - &singles[i]) - &(&singles[j] - &c0);
            h[(i, j)] = v.clone();
            h[(j, i)] = v;
        }
    }
    let mut ell = Vector::zero(n);
    for i in 0..n {
        ell[i] = &(&singles[i] - &c0) - &(&h[(i, i)] * &ratio(1, 2));
    }
    let m = quadform::minimize_convex(&h, &ell, &c0, ORACLE_CAP)?;
    let mut argmins = m.argmins;
    argmins.sort();
    Ok(argmins.into_iter().next().expect("a convex quadratic attains its lattice minimum"))
}

/// Exact interior disjointness of the domain and its image under one ball
/// element, certified through the element's Dirichlet wall: the wall is
/// strictly positive on the domain's interior and strictly negative on the
/// image's interior, so the combined strict system is infeasible.
fn check_disjoint(
    candidate: &DomainCandidate,
    action: &GroupAction,
    domain_rays: &[Vector],
    m: &Matrix,
    witness: &Vector,
    l: i64,
) -> Result<Disjointness, Error> {
    let xi = &candidate.xi;
    let minv = m.inverse().expect("ball elements are unimodular");
    let row = &m.transpose().mul_vec(xi) - xi;
    let row_inv = &minv.transpose().mul_vec(xi) - xi;
    if row.is_zero() || row_inv.is_zero() {
        // The element fixes the functional, hence maps the Dirichlet set to
        // itself: the tiles coincide and their common interior point is the
        // witness.
        return Ok(Disjointness::Overlap(witness.clone()));
    }
    // Pulling the inverse wall through the element gives exactly the negated
    // wall; this is the algebraic heart of the certificate.
    debug_assert_eq!(&minv.transpose().mul_vec(&row) + &row_inv, Vector::zero(xi.dim()));
    let valid_on_skeleton = domain_rays
        .iter()
        .all(|r| !row.dot(r).is_negative() && !row_inv.dot(r).is_negative());
    let structurally_valid = l <= candidate.word_bound;
    if valid_on_skeleton && structurally_valid {
        // x interior ⇒ row_inv(x) > 0 (valid nonzero wall on a full-dim
        // domain); x in the image's interior ⇒ row_inv(x) < 0 (the pulled
        // wall identity above). Both at once is the infeasible system:
        let system = vec![row_inv.clone(), -&row_inv];
        if lp::strict_system_feasible(&system, action.rank).is_none() {
            return Ok(Disjointness::Disjoint);
        }
    }
    match &action.preserved {
        PreservedCone::Poly(_) => {
            // Full combined strict system over both facet images.
            let mut rows = candidate.domain.facets()?;
            for f in candidate.domain.facets()? {
                rows.push(minv.transpose().mul_vec(&f));
            }
            match lp::strict_system_feasible(&rows, action.rank) {
                Some(x) => Ok(Disjointness::Overlap(x)),
                None => Ok(Disjointness::Disjoint),
            }
        }
        _ => Ok(Disjointness::Undetermined),
    }
}

/// An integer class interior to the preserved cone that no non-identity ball
/// element fixes. Polyhedral cones are searched over increasing ℓ∞ shells in
/// lexicographically decreasing order; oracle cones along the section ray
/// `o + k f`, whose points every nonzero fiberwise translation moves.
pub fn trivial_stabilizer_search(
    action: &GroupAction,
    l: i64,
    search_box: i64,
) -> Result<Vector, Error> {
    let ball = orbit_ball_full(action, l)?;
    let moved_by_all = |x: &Vector| -> bool {
        ball.elements.iter().skip(1).all(|m| &m.mul_vec(x) != x)
    };
    let mut candidates: Vec<Vector> = Vec::new();
    match &action.preserved {
        PreservedCone::Poly(_) => {
            let rank = action.rank;
            let size = (2 * search_box + 1).pow(rank as u32);
            if size > 200_000 {
                return Err(Error::Unsupported(
                    "the search box is too large in this rank; shrink it or use a translation \
                     action"
                        .into(),
                ));
            }
            let mut points = vec![Vector::zero(rank)];
            for i in 0..rank {
                let mut next = Vec::new();
                for p in &points {
                    for c in -search_box..=search_box {
                        let mut q = p.clone();
                        q[i] = rat(c);
                        next.push(q);
                    }
                }
                points = next;
            }
            points.sort();
            points.reverse();
            let shell = |p: &Vector| -> i64 {
                p.0.iter()
                    .map(|x| x.numer().magnitude().try_into().unwrap_or(i64::MAX))
                    .max()
                    .unwrap_or(0)
            };
            for r in 1..=search_box {
                for p in &points {
                    if shell(p) == r {
                        candidates.push(p.clone());
                    }
                }
            }
        }
        PreservedCone::Elliptic(e) => {
            for k in 2..=(search_box.max(2)) {
                candidates.push(&e.o + &e.f.scale(&rat(k)));
            }
        }
        PreservedCone::Product(fp) => {
            let (z1, z2) = match (&fp.left.oracle, &fp.right.oracle) {
                (Oracle::Elliptic(a), Oracle::Elliptic(b)) => (a, b),
                _ => {
                    return Err(Error::Unsupported(
                        "stabilizer search on products needs elliptic oracles".into(),
                    ))
                }
            };
            for k in 2..=(search_box.max(2)) {
                let a = &z1.o + &z1.f.scale(&rat(k));
                let b = &z2.o + &z2.f.scale(&rat(k));
                candidates.push(&fp.pull_left.mul_vec(&a) + &fp.pull_right.mul_vec(&b));
            }
        }
    }
    for c in candidates {
        if action.preserved.interior_contains(&c)? && moved_by_all(&c) {
            return Ok(c);
        }
    }
    Err(Error::Unsupported(
        "no stabilizer-free interior class found; enlarge the search box".into(),
    ))
}

const PERTURBATION_DENOMINATORS: [i64; 10] = [7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// A rational functional near `xi` whose values separate the ball orbit of a
/// stabilizer-free interior class: the orbit has a unique minimizer. Returns
/// `xi` itself when it already separates.
pub fn xi_perturb(action: &GroupAction, xi: &Vector, l: i64) -> Result<Vector, Error> {
    check_interior_dual(&action.preserved, xi)?;
    let eta = trivial_stabilizer_search(action, l, 4)?;
    let ball = orbit_ball_full(action, l)?;
    let mut images: Vec<Vector> = ball.elements.iter().map(|m| m.mul_vec(&eta)).collect();
    images.sort();
    images.dedup();
    let separates = |f: &Vector| -> bool {
        let mut values: Vec<Rational> = images.iter().map(|img| f.dot(img)).collect();
        values.sort();
        values.len() < 2 || values[0] != values[1]
    };
    if separates(xi) {
        return Ok(xi.clone());
    }
    for p in PERTURBATION_DENOMINATORS {
        for axis in 0..action.rank {
            let xi0 = xi + &Vector::unit(action.rank, axis).scale(&ratio(1, p));
            if check_interior_dual(&action.preserved, &xi0).is_ok() && separates(&xi0) {
                return Ok(xi0);
            }
        }
    }
    Err(Error::Unsupported(
        "no separating perturbation within the denominator bound".into(),
    ))
}

/// Lifts a factor generator to the ambient lattice of a fiber product: the
/// image acts as the generator through the factor's pullback and fixes the
/// other factor. Requires the generator to fix the factor's fiber class.
fn lift_factor_generator(fp: &FiberProduct, g: &Matrix, left: bool) -> Result<Matrix, Error> {
    let (factor, pull, split, other_pull, other_split) = if left {
        (&fp.left, &fp.pull_left, &fp.split_left, &fp.pull_right, &fp.split_right)
    } else {
        (&fp.right, &fp.pull_right, &fp.split_right, &fp.pull_left, &fp.split_left)
    };
    if g.mul_vec(&factor.f) != factor.f {
        return Err(Error::InvalidAction(
            "factor generators must fix the fiber class to act on the product".into(),
        ));
    }
    let acted = pull.mul_mat(&g.mul_mat(split));
    let fixed = other_pull.mul_mat(other_split);
    let mut cols = Vec::with_capacity(fp.rank);
    for j in 0..fp.rank {
        let ej = Vector::unit(fp.rank, j);
        cols.push(&acted.mul_vec(&ej) + &fixed.mul_vec(&ej));
    }
    Ok(Matrix::from_rows(&cols).transpose())
}

/// The product action of two factor actions on the glued lattice: one lifted
/// generator per factor generator.
pub fn product_action(
    fp: FiberProduct,
    left: &GroupAction,
    right: &GroupAction,
) -> Result<GroupAction, Error> {
    if left.rank != fp.left.rank {
        return Err(Error::DimensionMismatch { expected: fp.left.rank, got: left.rank });
    }
    if right.rank != fp.right.rank {
        return Err(Error::DimensionMismatch { expected: fp.right.rank, got: right.rank });
    }
    let mut gens = Vec::new();
    for g in &left.generators {
        gens.push(lift_factor_generator(&fp, g, true)?);
    }
    for g in &right.generators {
        gens.push(lift_factor_generator(&fp, g, false)?);
    }
    let kind = if left.kind == ActionKind::Translations && right.kind == ActionKind::Translations
    {
        ActionKind::Translations
    } else {
        ActionKind::General
    };
    GroupAction::new(gens, PreservedCone::Product(Box::new(fp)), None, kind)
}

/// Glued domain candidate for a fiber product: the cone generated by the
/// pulled-back rays of the two factor domains, with the glued functional.
/// Every pulled ray is membership-checked against the glued nef cone through
/// shift decomposition. The cone is kept ray-only: its facet system is
/// exponentially larger and nothing downstream needs it.
pub fn product_domain(
    left: &DomainCandidate,
    right: &DomainCandidate,
    fp: &FiberProduct,
) -> Result<DomainCandidate, Error> {
    if left.domain.dim() != fp.left.rank {
        return Err(Error::DimensionMismatch { expected: fp.left.rank, got: left.domain.dim() });
    }
    if right.domain.dim() != fp.right.rank {
        return Err(Error::DimensionMismatch { expected: fp.right.rank, got: right.domain.dim() });
    }
    let mut rays: Vec<Vector> = Vec::new();
    for r in left.domain.rays()? {
        rays.push(fp.pull_left.mul_vec(&r).primitive());
    }
    for r in right.domain.rays()? {
        rays.push(fp.pull_right.mul_vec(&r).primitive());
    }
    rays.sort();
    rays.dedup();
    for r in &rays {
        if !fp.decompose_ambient(r)?.is_nef() {
            return Err(Error::Unsupported(
                "a pulled domain generator leaves the glued nef cone".into(),
            ));
        }
    }
    let xi = &fp.split_left.transpose().mul_vec(&left.xi)
        + &fp.split_right.transpose().mul_vec(&right.xi);
    for r in &rays {
        if !xi.dot(r).is_positive() {
            return Err(Error::Unsupported(
                "the glued functional degenerates on a pulled generator".into(),
            ));
        }
    }
    let domain = PolyCone::from_rays(fp.rank, rays)?;
    let certification = if left.certification == Certification::ExactFiniteGroup
        && right.certification == Certification::ExactFiniteGroup
    {
        Certification::ExactFiniteGroup
    } else {
        Certification::BoundedWord
    };
    Ok(DomainCandidate {
        domain,
        xi,
        word_bound: left.word_bound.min(right.word_bound),
        certification,
    })
}

/// The rank-3 testbed lattice: fiber, section, and one frame vector of
/// self-intersection −2.
pub fn rank3_lattice() -> EllipticLattice {
    let gram = Matrix::from_int_rows(&[vec![0, 1, 0], vec![1, -1, 0], vec![0, 0, -2]]);
    EllipticLattice::new(
        gram,
        Vector::from_ints(&[1, 0, 0]),
        Vector::from_ints(&[0, 1, 0]),
        vec![Vector::from_ints(&[0, 0, 1])],
    )
    .expect("reference lattice is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fibprod::FiberedFactor;

    fn e8_action() -> GroupAction {
        GroupAction::translations(&EllipticLattice::rational_elliptic()).unwrap()
    }

    /// Independent count of lattice vectors with ℓ¹ norm at most `l`.
    fn l1_ball_count(dim: i64, l: i64) -> i64 {
        let binom = |n: i64, k: i64| -> i64 {
            if k < 0 || k > n {
                return 0;
            }
            let mut v = 1i64;
            for i in 0..k {
                v = v * (n - i) / (i + 1);
            }
            v
        };
        (0..=dim.min(l)).map(|k| (1i64 << k) * binom(dim, k) * binom(l, k)).sum()
    }

    #[test]
    fn orbit_ball_counts_translations() {
        let action = e8_action();
        assert_eq!(orbit_ball(&action, 0).unwrap().len(), 1);
        assert_eq!(orbit_ball(&action, 1).unwrap().len(), 17);
        assert_eq!(l1_ball_count(8, 1), 17);
        assert_eq!(orbit_ball(&action, 2).unwrap().len(), 145);
        assert_eq!(l1_ball_count(8, 2), 145);
    }

    #[test]
    fn orbit_ball_saturates_on_swap() {
        let action = GroupAction::coordinate_swap().unwrap();
        let ball = orbit_ball_full(&action, 3).unwrap();
        assert_eq!(ball.elements.len(), 2);
        assert!(ball.saturated);
    }

    #[test]
    fn orbit_ball_cap_is_enforced() {
        let action = e8_action();
        std::env::set_var("NEFCONE_ORBIT_CAP", "50");
        let res = orbit_ball(&action, 2);
        std::env::remove_var("NEFCONE_ORBIT_CAP");
        assert!(matches!(res, Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn swap_dirichlet_domain_is_the_halved_quadrant() {
        let action = GroupAction::coordinate_swap().unwrap();
        let xi = Vector::from_ints(&[2, 1]);
        let cand = dirichlet_domain(&action, &xi, 1).unwrap();
        assert_eq!(cand.certification, Certification::ExactFiniteGroup);
        let mut rays = cand.domain.rays().unwrap();
        rays.sort();
        assert_eq!(rays, vec![Vector::from_ints(&[0, 1]), Vector::from_ints(&[1, 1])]);
        let mut facets = cand.domain.facets().unwrap();
        facets.sort();
        assert_eq!(facets, vec![Vector::from_ints(&[-1, 1]), Vector::from_ints(&[1, 0])]);
    }

    #[test]
    fn stabilized_functional_is_rejected() {
        let action = GroupAction::coordinate_swap().unwrap();
        let xi = Vector::from_ints(&[1, 1]);
        assert!(matches!(
            dirichlet_domain(&action, &xi, 1),
            Err(Error::XiStabilized { .. })
        ));
    }

    #[test]
    fn rank3_dirichlet_domain_is_the_frozen_wedge() {
        let action = GroupAction::translations(&rank3_lattice()).unwrap();
        let e = rank3_lattice();
        let xi = e.gram.mul_vec(&(&e.o + &e.f.scale(&rat(2))));
        assert_eq!(xi, Vector::from_ints(&[1, 1, 0]));
        let cand = dirichlet_domain(&action, &xi, 3).unwrap();
        assert_eq!(cand.certification, Certification::BoundedWord);
        let mut rays = cand.domain.rays().unwrap();
        rays.sort();
        assert_eq!(
            rays,
            vec![
                Vector::from_ints(&[1, 0, 0]),
                Vector::from_ints(&[2, 2, -1]),
                Vector::from_ints(&[2, 2, 1]),
            ]
        );
        let mut facets = cand.domain.facets().unwrap();
        facets.sort();
        assert_eq!(
            facets,
            vec![
                Vector::from_ints(&[0, 1, -2]),
                Vector::from_ints(&[0, 1, 2]),
                Vector::from_ints(&[1, -1, 0]),
            ]
        );
    }

    #[test]
    fn e8_dirichlet_skeleton_is_nef_and_positive() {
        let action = e8_action();
        let e = EllipticLattice::rational_elliptic();
        let xi = e.gram.mul_vec(&(&e.o + &e.f.scale(&rat(2))));
        let cand = dirichlet_domain(&action, &xi, 1).unwrap();
        assert_eq!(cand.certification, Certification::BoundedWord);
        let rays = cand.domain.rays().unwrap();
        // One lifted vertex per corner of the wall box, plus the fiber ray.
        assert_eq!(rays.len(), 257);
        for r in &rays {
            assert!(e.nef_check(r, 1 << 20).unwrap().is_nef());
            assert!(xi.dot(r).is_positive());
        }
    }

    #[test]
    fn swap_tiling_covers_and_is_disjoint() {
        let action = GroupAction::coordinate_swap().unwrap();
        let xi = Vector::from_ints(&[2, 1]);
        let cand = dirichlet_domain(&action, &xi, 1).unwrap();
        let samples = vec![
            Vector::from_ints(&[3, 1]),
            Vector::from_ints(&[1, 3]),
            Vector::from_ints(&[2, 2]),
        ];
        let report = tiling_check(&cand, &action, &samples, 1).unwrap();
        assert!(report.all_covered);
        assert!(report.all_disjoint);
        assert_eq!(report.disjointness.len(), 1);
        // The boundary point lies in both closed tiles.
        let boundary = Vector::from_ints(&[2, 2]);
        let swap = &action.generators[0];
        assert!(cand.domain.contains(&boundary).unwrap());
        assert!(cand.domain.contains(&swap.mul_vec(&boundary)).unwrap());
        // The two closed tiles cover the quadrant: every small grid class
        // lands in the domain directly or after the swap.
        for i in 0..=4i64 {
            for j in 0..=4i64 {
                let p = Vector::from_ints(&[i, j]);
                let q = swap.mul_vec(&p);
                assert!(
                    cand.domain.contains(&p).unwrap() || cand.domain.contains(&q).unwrap()
                );
            }
        }
    }

    #[test]
    fn e8_tiling_certifies_coverage_by_minimization() {
        let action = e8_action();
        let e = EllipticLattice::rational_elliptic();
        let xi = e.gram.mul_vec(&(&e.o + &e.f.scale(&rat(2))));
        let cand = dirichlet_domain(&action, &xi, 1).unwrap();
        let ample = &e.o + &e.f.scale(&rat(3));
        let mut samples = Vec::new();
        for w in [[2i64, -1, 0, 3, 0, 0, -2, 1], [-4, 0, 1, 0, 2, -1, 0, 5]] {
            let t = e.translation_matrix(&Vector::from_ints(&w));
            samples.push(t.mul_vec(&ample));
        }
        let report = tiling_check(&cand, &action, &samples, 1).unwrap();
        assert!(report.all_covered);
        assert!(report.all_disjoint);
        assert_eq!(report.disjointness.len(), 16);
        // Coverage words undo the sample translations exactly.
        assert_eq!(
            report.coverage[0].translation,
            Some(Vector::from_ints(&[-2, 1, 0, -3, 0, 0, 2, -1]))
        );
        assert_eq!(report.coverage[0].word_length, Some(9));
    }

    #[test]
    fn stabilizer_search_matches_the_swap_example() {
        let action = GroupAction::coordinate_swap().unwrap();
        let eta = trivial_stabilizer_search(&action, 1, 3).unwrap();
        assert_eq!(eta, Vector::from_ints(&[2, 1]));
    }

    #[test]
    fn stabilizer_search_moves_along_the_section_ray() {
        let action = e8_action();
        let e = EllipticLattice::rational_elliptic();
        let eta = trivial_stabilizer_search(&action, 1, 4).unwrap();
        assert_eq!(eta, &e.o + &e.f.scale(&rat(2)));
    }

    #[test]
    fn xi_perturb_separates_the_swap_orbit() {
        let action = GroupAction::coordinate_swap().unwrap();
        let xi = Vector::from_ints(&[1, 1]);
        let xi0 = xi_perturb(&action, &xi, 1).unwrap();
        assert_eq!(xi0, Vector(vec![ratio(8, 7), rat(1)]));
        // An already-separating functional is returned unchanged.
        let xi1 = Vector::from_ints(&[2, 1]);
        assert_eq!(xi_perturb(&action, &xi1, 1).unwrap(), xi1);
    }

    #[test]
    fn product_domain_glues_res_candidates() {
        let fp = FiberProduct::new(FiberedFactor::res(), FiberedFactor::res()).unwrap();
        let e = EllipticLattice::rational_elliptic();
        let xi = e.gram.mul_vec(&(&e.o + &e.f.scale(&rat(2))));
        let action = e8_action();
        let factor = dirichlet_domain(&action, &xi, 1).unwrap();
        let glued = product_domain(&factor, &factor, &fp).unwrap();
        // 257 pulled rays per side sharing the fiber ray.
        assert_eq!(glued.domain.rays().unwrap().len(), 513);
        assert_eq!(glued.certification, Certification::BoundedWord);
        assert_eq!(glued.word_bound, 1);

        let paction = product_action(fp.clone(), &action, &action).unwrap();
        assert_eq!(paction.generators.len(), 16);
        let ball = orbit_ball(&paction, 1).unwrap();
        assert_eq!(ball.len(), 33);

        let ample = &e.o + &e.f.scale(&rat(3));
        let t = e.translation_matrix(&Vector::from_ints(&[1, 0, -2, 0, 0, 3, 0, 0]));
        let sample =
            &fp.pull_left.mul_vec(&t.mul_vec(&ample)) + &fp.pull_right.mul_vec(&ample);
        let report = tiling_check(&glued, &paction, &[sample], 1).unwrap();
        assert!(report.all_covered);
        assert!(report.all_disjoint);
        assert_eq!(report.disjointness.len(), 32);
        let w = report.coverage[0].translation.clone().unwrap();
        assert_eq!(
            w,
            Vector::from_ints(&[-1, 0, 2, 0, 0, -3, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0])
        );
    }

    #[test]
    fn product_preserved_cone_rejects_direct_dirichlet() {
        let fp = FiberProduct::new(FiberedFactor::res(), FiberedFactor::res()).unwrap();
        let action = product_action(
            fp,
            &e8_action(),
            &e8_action(),
        )
        .unwrap();
        let xi = Vector::zero(19);
        assert!(dirichlet_domain(&action, &xi, 1).is_err());
    }

    #[test]
    fn action_validation_rejects_bad_generators() {
        let quadrant = PolyCone::from_rays(
            2,
            vec![Vector::from_ints(&[1, 0]), Vector::from_ints(&[0, 1])],
        )
        .unwrap();
        // Not unimodular.
        let double = Matrix::from_int_rows(&[vec![2, 0], vec![0, 1]]);
        assert!(GroupAction::new(
            vec![double],
            PreservedCone::Poly(quadrant.clone()),
            None,
            ActionKind::General,
        )
        .is_err());
        // Unimodular but does not preserve the quadrant.
        let flip = Matrix::from_int_rows(&[vec![-1, 0], vec![0, 1]]);
        assert!(GroupAction::new(
            vec![flip],
            PreservedCone::Poly(quadrant),
            None,
            ActionKind::General,
        )
        .is_err());
    }
}
