//! Exact rational linear feasibility via phase-I simplex with Bland's rule.
//!
//! Two entry points: standard-form systems `{z >= 0 : Mz = q}` and free-variable
//! systems `{x : Ax >= b}`. Infeasibility always comes with a Farkas certificate
//! that callers can re-verify by direct arithmetic.

use crate::linalg::{Matrix, Rational, Vector};
use num_traits::{One, Signed, Zero};

/// Outcome of a standard-form feasibility run.
pub enum StandardOutcome {
    /// A point z >= 0 with Mz = q.
    Feasible(Vector),
    /// Multipliers pi with pi^T M <= 0 componentwise and pi . q > 0.
    Infeasible(Vector),
}

/// Decides `{z >= 0 : Mz = q}` by minimizing the sum of artificial variables.
pub fn standard_feasible(m: &Matrix, q: &Vector) -> StandardOutcome {
    let rows = m.rows;
    let cols = m.cols;
    assert_eq!(rows, q.dim());

    // Tableau: rows constraints, then objective row. Columns: z, artificials, rhs.
    // Row signs are flipped so every rhs is nonnegative.
    let width = cols + rows + 1;
    let mut t = vec![vec![Rational::zero(); width]; rows + 1];
    let mut flip = vec![false; rows];
    for i in 0..rows {
        flip[i] = q[i].is_negative();
        let s = if flip[i] { -Rational::one() } else { Rational::one() };
        for j in 0..cols {
            t[i][j] = &m[(i, j)] * &s;
        }
        t[i][cols + i] = Rational::one();
        t[i][width - 1] = &q[i] * &s;
    }
    // Objective: minimize sum of artificials; expressed in reduced form.
    for j in 0..width {
        let mut acc = Rational::zero();
        for i in 0..rows {
            acc += &t[i][j];
        }
        let base = if (cols..cols + rows).contains(&j) { Rational::one() } else { Rational::zero() };
        t[rows][j] = base - acc;
    }

    let mut basis: Vec<usize> = (cols..cols + rows).collect();
    loop {
        // Bland: entering = lowest-index column with negative reduced cost.
        let Some(enter) = (0..width - 1).find(|&j| t[rows][j].is_negative()) else {
            break;
        };
        // Ratio test, ties broken by lowest basis index (Bland).
        let mut leave: Option<usize> = None;
        let mut best: Option<Rational> = None;
        for i in 0..rows {
            if t[i][enter].is_positive() {
                let ratio = &t[i][width - 1] / &t[i][enter];
                let better = match &best {
                    None => true,
                    Some(b) => &ratio < b || (&ratio == b && basis[i] < basis[leave.unwrap()]),
                };
                if better {
                    best = Some(ratio);
                    leave = Some(i);
                }
            }
        }
        let Some(li) = leave else {
            // Unbounded phase-I objective cannot happen (bounded below by 0).
            unreachable!("phase-I simplex unbounded");
        };
        pivot(&mut t, li, enter);
        basis[li] = enter;
    }

    let objective = -t[rows][width - 1].clone();
    if objective.is_zero() {
        // Drive any artificial still in the basis out or read the solution.
        let mut z = Vector::zero(cols);
        for (i, &b) in basis.iter().enumerate() {
            if b < cols {
                z[b] = t[i][width - 1].clone();
            }
            // A basic artificial at level 0 contributes nothing.
        }
        debug_assert_eq!(&m.mul_vec(&z), q, "simplex returned a non-solution");
        StandardOutcome::Feasible(z)
    } else {
        // pi_i = 1 - reduced cost of artificial i, unflipped.
        let mut pi = Vector::zero(rows);
        for i in 0..rows {
            let rc = &t[rows][cols + i];
            let v = Rational::one() - rc;
            pi[i] = if flip[i] { -v } else { v };
        }
        debug_assert!(
            {
                let mt_pi = m.transpose().mul_vec(&pi);
                mt_pi.0.iter().all(|x| !x.is_positive()) && pi.dot(q).is_positive()
            },
            "invalid Farkas certificate"
        );
        StandardOutcome::Infeasible(pi)
    }
}

fn pivot(t: &mut [Vec<Rational>], pr: usize, pc: usize) {
    let inv = t[pr][pc].recip();
    for x in t[pr].iter_mut() {
        *x = &*x * &inv;
    }
    let nrows = t.len();
    for i in 0..nrows {
        if i == pr || t[i][pc].is_zero() {
            continue;
        }
        let f = t[i][pc].clone();
        for j in 0..t[i].len() {
            let sub = &f * &t[pr][j];
            t[i][j] = &t[i][j] - &sub;
        }
    }
}

/// Outcome of a free-variable inequality system `{x : Ax >= b}`.
pub enum IneqOutcome {
    /// A satisfying point.
    Feasible(Vector),
    /// y >= 0 with y^T A = 0 and y . b > 0.
    Infeasible(Vector),
}

/// Decides `{x free : Ax >= b}`.
pub fn inequalities_feasible(a: &Matrix, b: &Vector) -> IneqOutcome {
    let rows = a.rows;
    let cols = a.cols;
    // z = (u, v, s) >= 0 with x = u - v and Au - Av - s = b.
    let mut m = Matrix::zero(rows, 2 * cols + rows);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = a[(i, j)].clone();
            m[(i, cols + j)] = -a[(i, j)].clone();
        }
        m[(i, 2 * cols + i)] = -Rational::one();
    }
    match standard_feasible(&m, b) {
        StandardOutcome::Feasible(z) => {
            let mut x = Vector::zero(cols);
            for j in 0..cols {
                x[j] = &z[j] - &z[cols + j];
            }
            debug_assert!((0..rows).all(|i| a.row(i).dot(&x) >= b[i]));
            IneqOutcome::Feasible(x)
        }
        StandardOutcome::Infeasible(pi) => {
            debug_assert!(pi.0.iter().all(|y| !y.is_negative()));
            IneqOutcome::Infeasible(pi)
        }
    }
}

/// Expresses `target` as a nonnegative combination of `gens`, or produces a
/// separating functional: `sep . g >= 0` for every generator, `sep . target < 0`.
pub enum CombinationOutcome {
    Combination(Vec<Rational>),
    Separator(Vector),
}

pub fn nonneg_combination(gens: &[Vector], target: &Vector) -> CombinationOutcome {
    let dim = target.dim();
    if gens.is_empty() {
        if target.is_zero() {
            return CombinationOutcome::Combination(Vec::new());
        }
        return CombinationOutcome::Separator(-target);
    }
    let mut m = Matrix::zero(dim, gens.len());
    for (j, g) in gens.iter().enumerate() {
        assert_eq!(g.dim(), dim, "generator dimension mismatch");
        for i in 0..dim {
            m[(i, j)] = g[i].clone();
        }
    }
    match standard_feasible(&m, target) {
        StandardOutcome::Feasible(z) => CombinationOutcome::Combination(z.0),
        StandardOutcome::Infeasible(pi) => {
            let sep = -&pi;
            debug_assert!(gens.iter().all(|g| !sep.dot(g).is_negative()));
            debug_assert!(sep.dot(target).is_negative());
            CombinationOutcome::Separator(sep)
        }
    }
}

/// Whether `{x : Ax > 0}` (componentwise strict) is nonempty; equivalent to the
/// feasibility of `{x : Ax >= 1}` by homogeneity. Returns a witness point.
pub fn strict_system_feasible(rows: &[Vector], dim: usize) -> Option<Vector> {
    if rows.is_empty() {
        return Some(Vector::zero(dim));
    }
    let a = Matrix::from_rows(rows);
    assert_eq!(a.cols, dim);
    let ones = Vector(vec![Rational::one(); rows.len()]);
    match inequalities_feasible(&a, &ones) {
        IneqOutcome::Feasible(x) => Some(x),
        IneqOutcome::Infeasible(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;

    #[test]
    fn combination_in_quadrant() {
        let gens = vec![Vector::from_ints(&[1, 0]), Vector::from_ints(&[1, 1])];
        match nonneg_combination(&gens, &Vector::from_ints(&[3, 1])) {
            CombinationOutcome::Combination(c) => {
                assert_eq!(c, vec![rat(2), rat(1)]);
            }
            _ => panic!("expected a combination"),
        }
    }

    #[test]
    fn separator_outside_cone() {
        let gens = vec![Vector::from_ints(&[1, 0]), Vector::from_ints(&[1, 1])];
        match nonneg_combination(&gens, &Vector::from_ints(&[0, -1])) {
            CombinationOutcome::Separator(s) => {
                for g in &gens {
                    assert!(!s.dot(g).is_negative());
                }
                assert!(s.dot(&Vector::from_ints(&[0, -1])).is_negative());
            }
            _ => panic!("expected a separator"),
        }
    }

    #[test]
    fn strict_quadrant_is_feasible() {
        let rows = vec![Vector::from_ints(&[1, 0]), Vector::from_ints(&[0, 1])];
        let x = strict_system_feasible(&rows, 2).unwrap();
        assert!(x[0].is_positive() && x[1].is_positive());
    }

    #[test]
    fn strict_opposite_halfplanes_infeasible() {
        let rows = vec![Vector::from_ints(&[1, 0]), Vector::from_ints(&[-1, 0])];
        assert!(strict_system_feasible(&rows, 2).is_none());
    }

    #[test]
    fn degenerate_equalities() {
        // x >= 0 and -x >= 0 forces x = 0 on the first coordinate.
        let a = Matrix::from_int_rows(&[vec![1, 0], vec![-1, 0], vec![0, 1]]);
        let b = Vector::from_ints(&[0, 0, 5]);
        match inequalities_feasible(&a, &b) {
            IneqOutcome::Feasible(x) => {
                assert!(x[0].is_zero());
                assert!(x[1] >= rat(5));
            }
            _ => panic!("expected feasible"),
        }
    }

    #[test]
    fn infeasible_has_valid_farkas() {
        // x >= 1 and -x >= 0 cannot hold together.
        let a = Matrix::from_int_rows(&[vec![1], vec![-1]]);
        let b = Vector(vec![rat(1), rat(0)]);
        match inequalities_feasible(&a, &b) {
            IneqOutcome::Infeasible(y) => {
                assert!(y.0.iter().all(|v| !v.is_negative()));
                assert!(a.transpose().mul_vec(&y).is_zero());
                assert!(y.dot(&b).is_positive());
            }
            _ => panic!("expected infeasible"),
        }
    }
}
