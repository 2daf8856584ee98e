//! Dense two-phase simplex for the tiny linear programs used by the domain
//! constructors: boundedness probes, bounding boxes and Chebyshev centers.
//!
//! Solves `maximize c.x  subject to  A x <= b` with free variables, by
//! splitting `x = x+ - x-` and running a tableau simplex with Bland's rule.
//! Problem sizes here are a few dozen variables at most.

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Unbounded,
    Infeasible,
}

const EPS: f64 = 1e-9;

/// `maximize c.x  s.t.  rows[i].0 . x <= rows[i].1`, `x` free.
pub(crate) fn solve_max(c: &[f64], rows: &[(Vec<f64>, f64)]) -> LpOutcome {
    let n = c.len();
    let m = rows.len();
    // nonneg variables: x+ (n), x- (n), slacks (m), artificials appended later
    let nv = 2 * n + m;

    // tableau rows: coefficients over nonneg vars, rhs >= 0 after sign fix
    let mut tab: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs: Vec<f64> = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    let mut artificials: Vec<usize> = Vec::new();

    for (i, (a, b)) in rows.iter().enumerate() {
        debug_assert_eq!(a.len(), n);
        let sgn = if *b < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; nv];
        for j in 0..n {
            row[j] = sgn * a[j];
            row[n + j] = -sgn * a[j];
        }
        row[2 * n + i] = sgn; // slack
        tab.push(row);
        rhs.push(sgn * *b);
        if sgn < 0.0 {
            artificials.push(i);
            basis.push(usize::MAX); // artificial, assigned below
        } else {
            basis.push(2 * n + i);
        }
    }

    let total = nv + artificials.len();
    for row in tab.iter_mut() {
        row.resize(total, 0.0);
    }
    for (k, &i) in artificials.iter().enumerate() {
        tab[i][nv + k] = 1.0;
        basis[i] = nv + k;
    }

    // phase 1: minimize sum of artificials (maximize negative sum)
    if !artificials.is_empty() {
        let mut obj = vec![0.0; total];
        for k in 0..artificials.len() {
            obj[nv + k] = -1.0;
        }
        match run_simplex(&mut tab, &mut rhs, &mut basis, &obj) {
            SimplexEnd::Optimal(v) => {
                if v < -1e-7 {
                    return LpOutcome::Infeasible;
                }
            }
            SimplexEnd::Unbounded => unreachable!("phase 1 objective is bounded"),
        }
        // drive any remaining artificial out of the basis if possible
        for i in 0..m {
            if basis[i] >= nv {
                if let Some(j) = (0..nv).find(|&j| tab[i][j].abs() > EPS) {
                    pivot(&mut tab, &mut rhs, &mut basis, i, j);
                }
            }
        }
        // freeze artificial columns at zero
        for row in tab.iter_mut() {
            for k in 0..artificials.len() {
                row[nv + k] = 0.0;
            }
        }
    }

    let mut obj = vec![0.0; total];
    for j in 0..n {
        obj[j] = c[j];
        obj[n + j] = -c[j];
    }
    match run_simplex(&mut tab, &mut rhs, &mut basis, &obj) {
        SimplexEnd::Unbounded => LpOutcome::Unbounded,
        SimplexEnd::Optimal(value) => {
            let mut xs = vec![0.0; total];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < total {
                    xs[bv] = rhs[i];
                }
            }
            let x = (0..n).map(|j| xs[j] - xs[n + j]).collect();
            LpOutcome::Optimal { x, value }
        }
    }
}

enum SimplexEnd {
    Optimal(f64),
    Unbounded,
}

/// Maximizes `obj` over the current tableau; Bland's rule, so it terminates.
fn run_simplex(
    tab: &mut [Vec<f64>],
    rhs: &mut [f64],
    basis: &mut [usize],
    obj: &[f64],
) -> SimplexEnd {
    let m = tab.len();
    let total = obj.len();
    loop {
        // reduced costs: obj[j] - sum_i y_i tab[i][j] with y from basic costs
        let mut reduced = obj.to_vec();
        for i in 0..m {
            let cb = obj[basis[i]];
            if cb != 0.0 {
                for j in 0..total {
                    reduced[j] -= cb * tab[i][j];
                }
            }
        }
        for (i, _) in tab.iter().enumerate() {
            reduced[basis[i]] = 0.0;
        }

        let Some(enter) = (0..total).find(|&j| reduced[j] > EPS) else {
            let value: f64 = (0..m).map(|i| obj[basis[i]] * rhs[i]).sum();
            return SimplexEnd::Optimal(value);
        };

        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            if tab[i][enter] > EPS {
                let ratio = rhs[i] / tab[i][enter];
                if ratio < best_ratio - 1e-12
                    || (ratio < best_ratio + 1e-12
                        && leave.is_some_and(|l| basis[i] < basis[l]))
                {
                    best_ratio = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            return SimplexEnd::Unbounded;
        };
        pivot(tab, rhs, basis, leave, enter);
    }
}

fn pivot(tab: &mut [Vec<f64>], rhs: &mut [f64], basis: &mut [usize], row: usize, col: usize) {
    let piv = tab[row][col];
    let inv = 1.0 / piv;
    for v in tab[row].iter_mut() {
        *v *= inv;
    }
    rhs[row] *= inv;
    rhs[row] = rhs[row].max(0.0);
    for i in 0..tab.len() {
        if i != row {
            let f = tab[i][col];
            if f != 0.0 {
                let pivot_row = tab[row].clone();
                for (v, pv) in tab[i].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                rhs[i] -= f * rhs[row];
                rhs[i] = rhs[i].max(0.0);
            }
        }
    }
    basis[row] = col;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(data: &[(&[f64], f64)]) -> Vec<(Vec<f64>, f64)> {
        data.iter().map(|(a, b)| (a.to_vec(), *b)).collect()
    }

    #[test]
    fn maximizes_over_unit_square() {
        // 0 <= x, y <= 1
        let cons = rows(&[
            (&[1.0, 0.0], 1.0),
            (&[-1.0, 0.0], 0.0),
            (&[0.0, 1.0], 1.0),
            (&[0.0, -1.0], 0.0),
        ]);
        match solve_max(&[1.0, 1.0], &cons) {
            LpOutcome::Optimal { x, value } => {
                assert!((value - 2.0).abs() < 1e-9);
                assert!((x[0] - 1.0).abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn detects_unbounded_halfplane() {
        let cons = rows(&[(&[1.0, 0.0], 1.0)]);
        assert_eq!(solve_max(&[0.0, 1.0], &cons), LpOutcome::Unbounded);
    }

    #[test]
    fn detects_infeasible() {
        let cons = rows(&[(&[1.0], 0.0), (&[-1.0], -1.0)]); // x <= 0 and x >= 1
        assert_eq!(solve_max(&[1.0], &cons), LpOutcome::Infeasible);
    }

    #[test]
    fn handles_negative_rhs() {
        // x >= 2 (as -x <= -2), x <= 5
        let cons = rows(&[(&[-1.0], -2.0), (&[1.0], 5.0)]);
        match solve_max(&[-1.0], &cons) {
            // minimize x -> x = 2
            LpOutcome::Optimal { x, value } => {
                assert!((x[0] - 2.0).abs() < 1e-9);
                assert!((value + 2.0).abs() < 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn chebyshev_center_of_square() {
        // max r s.t. a_i . x + r <= b_i for the unit square
        let cons = rows(&[
            (&[1.0, 0.0, 1.0], 1.0),
            (&[-1.0, 0.0, 1.0], 0.0),
            (&[0.0, 1.0, 1.0], 1.0),
            (&[0.0, -1.0, 1.0], 0.0),
        ]);
        match solve_max(&[0.0, 0.0, 1.0], &cons) {
            LpOutcome::Optimal { x, value } => {
                assert!((value - 0.5).abs() < 1e-9);
                assert!((x[0] - 0.5).abs() < 1e-9 && (x[1] - 0.5).abs() < 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn degenerate_overdetermined_rows() {
        // redundant constraints around a triangle
        let cons = rows(&[
            (&[1.0, 0.0], 1.0),
            (&[1.0, 0.0], 1.0),
            (&[0.0, 1.0], 1.0),
            (&[-1.0, -1.0], 0.0),
            (&[-1.0, -1.0], 0.5),
        ]);
        match solve_max(&[1.0, 1.0], &cons) {
            LpOutcome::Optimal { value, .. } => assert!((value - 2.0).abs() < 1e-9),
            other => panic!("unexpected {other:?}"),
        }
    }
}
