//! Exact minimization of convex quadratics over lattice points.
//!
//! Positive definite forms are factored as `H = L D L^T` over the rationals
//! (no square roots), and integer points inside ellipsoids are enumerated
//! coordinate by coordinate with exact interval bounds. On top of that sits
//! a closest-point style minimizer for `phi(n) = c0 + l.n + n^T H n / 2`:
//! the real minimizer is computed, a rounded incumbent bounds the search
//! radius, and the (always small) gap ellipsoid is enumerated exactly.

use crate::error::Error;
use crate::linalg::{rat, Matrix, Rational, Vector};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Unit lower-triangular `l` and positive diagonal `d` with `H = l d l^T`.
pub struct Ldlt {
    pub l: Matrix,
    pub d: Vec<Rational>,
}

/// Rational LDL^T factorization; errors unless `h` is symmetric positive
/// definite.
pub fn ldlt(h: &Matrix) -> Result<Ldlt, Error> {
    let n = h.rows;
    if h.cols != n {
        return Err(Error::DimensionMismatch { expected: n, got: h.cols });
    }
    for i in 0..n {
        for j in 0..i {
            if h[(i, j)] != h[(j, i)] {
                return Err(Error::NotPositiveDefinite);
            }
        }
    }
    let mut l = Matrix::identity(n);
    let mut d = vec![Rational::zero(); n];
    for i in 0..n {
        let mut di = h[(i, i)].clone();
        for k in 0..i {
            di -= &(&l[(i, k)] * &l[(i, k)]) * &d[k];
        }
        if !di.is_positive() {
            return Err(Error::NotPositiveDefinite);
        }
        for j in (i + 1)..n {
            let mut x = h[(j, i)].clone();
            for k in 0..i {
                x -= &(&l[(j, k)] * &l[(i, k)]) * &d[k];
            }
            l[(j, i)] = x / &di;
        }
        d[i] = di;
    }
    Ok(Ldlt { l, d })
}

fn floor_big(x: &Rational) -> BigInt {
    x.floor().to_integer()
}

/// Largest integer `n` with `n <= c + sqrt(r)`, exactly (`r >= 0`).
fn floor_plus_sqrt(c: &Rational, r: &Rational) -> BigInt {
    debug_assert!(!r.is_negative());
    let lo = floor_big(c);
    // (s + 1)^2 > ceil(r) >= r, so lo + s + 2 overshoots c + sqrt(r).
    let s = (-r).floor().to_integer().magnitude().sqrt();
    let mut lo = lo;
    let mut hi = &lo + BigInt::from(s) + 2;
    // Predicate "n <= c + sqrt(r)" is monotone; binary search its boundary.
    let pred = |n: &BigInt| -> bool {
        let nn = Rational::from_integer(n.clone());
        if nn <= *c {
            return true;
        }
        let diff = &nn - c;
        &diff * &diff <= *r
    };
    debug_assert!(pred(&lo));
    debug_assert!(!pred(&hi));
    while &hi - &lo > BigInt::one() {
        let mid = (&hi + &lo) / 2;
        if pred(&mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Smallest integer `n` with `n >= c - sqrt(r)`, exactly (`r >= 0`).
fn ceil_minus_sqrt(c: &Rational, r: &Rational) -> BigInt {
    -floor_plus_sqrt(&-c, r)
}

/// All integer vectors `n` with `(n - center)^T h (n - center) <= radius`.
/// Deterministic lexicographic order. Errors when more than `cap` points
/// would be produced.
pub fn ellipsoid_points(
    h: &Matrix,
    center: &Vector,
    radius: &Rational,
    cap: usize,
) -> Result<Vec<Vector>, Error> {
    let f = ldlt(h)?;
    let n = h.rows;
    if center.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: center.dim() });
    }
    if radius.is_negative() {
        return Ok(Vec::new());
    }
    // With x = n - center and y = L^T x the form is sum_i d_i y_i^2 where
    // y_i = x_i + sum_{j>i} L[j][i] x_j, so levels are fixed from the top
    // coordinate downward.
    let mut out = Vec::new();
    let mut x = vec![Rational::zero(); n];
    enumerate_level(&f, center, radius, n, &mut x, &mut out, cap)?;
    out.sort();
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn enumerate_level(
    f: &Ldlt,
    center: &Vector,
    rem: &Rational,
    level: usize,
    x: &mut Vec<Rational>,
    out: &mut Vec<Vector>,
    cap: usize,
) -> Result<(), Error> {
    if level == 0 {
        if out.len() >= cap {
            return Err(Error::CapExceeded { what: "ellipsoid enumeration".into(), cap });
        }
        out.push(Vector((0..x.len()).map(|i| &x[i] + &center[i]).collect()));
        return Ok(());
    }
    let i = level - 1;
    let mut t = Rational::zero();
    for j in level..x.len() {
        if !f.l[(j, i)].is_zero() && !x[j].is_zero() {
            t += &f.l[(j, i)] * &x[j];
        }
    }
    // d_i (x_i + t)^2 <= rem with n_i = x_i + center_i integral, so
    // n_i ranges over [center_i - t - sqrt(rem/d_i), center_i - t + ...].
    let bound = rem / &f.d[i];
    let mid = &center[i] - &t;
    let lo = ceil_minus_sqrt(&mid, &bound);
    let hi = floor_plus_sqrt(&mid, &bound);
    let mut k = lo;
    while k <= hi {
        let xi = Rational::from_integer(k.clone()) - &center[i];
        let y = &xi + &t;
        let used = &f.d[i] * &(&y * &y);
        x[i] = xi;
        enumerate_level(f, center, &(rem - &used), i, x, out, cap)?;
        k += 1;
    }
    x[i] = Rational::zero();
    Ok(())
}

/// Exact global minimum of `phi(n) = c0 + l.n + n^T h n / 2` over integer
/// vectors, for positive definite `h`.
pub struct ConvexMin {
    pub value: Rational,
    /// All integer minimizers, lexicographically sorted.
    pub argmins: Vec<Vector>,
}

pub fn minimize_convex(
    h: &Matrix,
    ell: &Vector,
    c0: &Rational,
    cap: usize,
) -> Result<ConvexMin, Error> {
    let n = h.rows;
    if ell.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: ell.dim() });
    }
    let phi = |v: &Vector| -> Rational {
        c0 + &ell.dot(v) + h.mul_vec(v).dot(v) / rat(2)
    };
    // Real minimizer z solves Hz = -l; phi(n) - phi(z) = (n-z)^T H (n-z)/2.
    let z = h
        .solve(&-ell)
        .ok_or(Error::NotPositiveDefinite)?;
    let rounded = Vector(
        z.0.iter()
            .map(|c| Rational::from_integer((c + crate::linalg::ratio(1, 2)).floor().to_integer()))
            .collect(),
    );
    let gap = &phi(&rounded) - &phi(&z);
    debug_assert!(!gap.is_negative());
    let radius = rat(2) * gap;
    let candidates = ellipsoid_points(h, &z, &radius, cap)?;
    let mut best: Option<ConvexMin> = None;
    for c in candidates {
        let v = phi(&c);
        match &mut best {
            None => best = Some(ConvexMin { value: v, argmins: vec![c] }),
            Some(b) => {
                if v < b.value {
                    b.value = v;
                    b.argmins = vec![c];
                } else if v == b.value {
                    b.argmins.push(c);
                }
            }
        }
    }
    // The rounded incumbent lies inside the search ellipsoid by construction.
    Ok(best.expect("gap ellipsoid always contains the incumbent"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ratio;

    fn phi(h: &Matrix, ell: &Vector, c0: &Rational, v: &Vector) -> Rational {
        c0 + &ell.dot(v) + h.mul_vec(v).dot(v) / rat(2)
    }

    #[test]
    fn sqrt_bounds_are_exact() {
        // floor(1/2 + sqrt(2)) = 1 and ceil(1/2 - sqrt(2)) = 0.
        assert_eq!(floor_plus_sqrt(&ratio(1, 2), &rat(2)), BigInt::from(1));
        assert_eq!(ceil_minus_sqrt(&ratio(1, 2), &rat(2)), BigInt::from(0));
        // Perfect squares land exactly on the boundary.
        assert_eq!(floor_plus_sqrt(&rat(0), &rat(9)), BigInt::from(3));
        assert_eq!(ceil_minus_sqrt(&rat(0), &rat(9)), BigInt::from(-3));
        assert_eq!(floor_plus_sqrt(&rat(0), &ratio(1, 4)), BigInt::from(0));
        // Tiny radius around a non-integer may exclude every integer.
        assert_eq!(floor_plus_sqrt(&ratio(1, 2), &ratio(1, 100)), BigInt::from(0));
        assert_eq!(ceil_minus_sqrt(&ratio(1, 2), &ratio(1, 100)), BigInt::from(1));
    }

    #[test]
    fn ldlt_reconstructs_and_rejects() {
        let h = Matrix::from_int_rows(&[vec![2, 1], vec![1, 2]]);
        let f = ldlt(&h).unwrap();
        let d = Matrix::diagonal(&f.d);
        assert_eq!(&(&f.l * &d) * &f.l.transpose(), h);
        let bad = Matrix::from_int_rows(&[vec![1, 2], vec![2, 1]]);
        assert!(matches!(ldlt(&bad), Err(Error::NotPositiveDefinite)));
        let asym = Matrix::from_int_rows(&[vec![2, 1], vec![0, 2]]);
        assert!(matches!(ldlt(&asym), Err(Error::NotPositiveDefinite)));
    }

    /// Box-scan oracle for small ellipsoids.
    fn brute_ellipsoid(h: &Matrix, center: &Vector, radius: &Rational, span: i64) -> Vec<Vector> {
        let n = h.rows;
        let mut out = Vec::new();
        let mut idx = vec![-span; n];
        loop {
            let v = Vector::from_ints(&idx);
            let x = &v - center;
            if h.mul_vec(&x).dot(&x) <= *radius {
                out.push(v);
            }
            let mut carry = 0;
            loop {
                idx[carry] += 1;
                if idx[carry] <= span {
                    break;
                }
                idx[carry] = -span;
                carry += 1;
                if carry == n {
                    out.sort();
                    return out;
                }
            }
        }
    }

    #[test]
    fn ellipsoid_matches_box_scan() {
        let h = Matrix::from_int_rows(&[vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 2]]);
        let center = Vector(vec![ratio(1, 3), rat(-1), ratio(1, 2)]);
        let radius = rat(7);
        let fast = ellipsoid_points(&h, &center, &radius, 100000).unwrap();
        let slow = brute_ellipsoid(&h, &center, &radius, 6);
        assert_eq!(fast, slow);
        assert!(!fast.is_empty());
    }

    #[test]
    fn ellipsoid_cap_is_enforced() {
        let h = Matrix::identity(2);
        let err = ellipsoid_points(&h, &Vector::zero(2), &rat(10000), 10);
        assert!(matches!(err, Err(Error::CapExceeded { cap: 10, .. })));
    }

    #[test]
    fn convex_minimum_matches_box_scan() {
        let h = Matrix::from_int_rows(&[vec![2, 1], vec![1, 2]]);
        let ell = Vector::from_ints(&[-3, -4]);
        let c0 = rat(1);
        let got = minimize_convex(&h, &ell, &c0, 100000).unwrap();
        // Oracle first: scan a wide box.
        let mut best = None;
        for a in -20..=20 {
            for b in -20..=20 {
                let v = Vector::from_ints(&[a, b]);
                let val = phi(&h, &ell, &c0, &v);
                if best.as_ref().map(|(bv, _)| val < *bv).unwrap_or(true) {
                    best = Some((val, vec![v]));
                } else if let Some((bv, vs)) = &mut best {
                    if val == *bv {
                        vs.push(v);
                    }
                }
            }
        }
        let (bv, bvs) = best.unwrap();
        assert_eq!(got.value, bv);
        assert_eq!(got.argmins, bvs);
        // Frozen: real minimizer (2/3, 5/3), lattice minimum -3 on a 3-way tie.
        assert_eq!(got.value, rat(-3));
        assert_eq!(
            got.argmins,
            vec![
                Vector::from_ints(&[0, 2]),
                Vector::from_ints(&[1, 1]),
                Vector::from_ints(&[1, 2]),
            ]
        );
    }

    #[test]
    fn convex_minimum_with_ties() {
        // phi(n) = (n - 1/2)^2 has two integer minimizers.
        let h = Matrix::from_int_rows(&[vec![2]]);
        let ell = Vector::from_ints(&[-1]);
        let got = minimize_convex(&h, &ell, &rat(0), 1000).unwrap();
        assert_eq!(got.argmins, vec![Vector::from_ints(&[0]), Vector::from_ints(&[1])]);
        assert_eq!(got.value, rat(0));
    }

    #[test]
    fn even_unimodular_rank8_theta_counts() {
        // Chain a1..a7 with a8 attached at a3; diagonal 2, adjacency -1.
        let mut g = Matrix::zero(8, 8);
        for i in 0..8 {
            g[(i, i)] = rat(2);
        }
        for i in 0..6 {
            g[(i, i + 1)] = rat(-1);
            g[(i + 1, i)] = rat(-1);
        }
        g[(2, 7)] = rat(-1);
        g[(7, 2)] = rat(-1);
        assert_eq!(g.det(), rat(1));
        let count = |r: i64| {
            ellipsoid_points(&g, &Vector::zero(8), &rat(r), 10000).unwrap().len()
        };
        assert_eq!(count(0), 1);
        assert_eq!(count(2), 241);
        assert_eq!(count(4), 2401);
    }
}
