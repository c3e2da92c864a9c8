//! Linear sum assignment (Hungarian method, shortest augmenting paths with
//! potentials). O(n^3).

use crate::matrix::Matrix;

/// Minimum-cost perfect assignment of a square cost matrix. Returns
/// `(assignment, cost)` with `assignment[row] = col`.
pub fn min_cost_assignment(cost: &Matrix) -> (Vec<usize>, f64) {
    let n = cost.rows();
    assert_eq!(n, cost.cols(), "assignment needs a square matrix");
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    // 1-based arrays; index 0 is the virtual root column.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[p[j] - 1] = j - 1;
    }
    let total = assignment
        .iter()
        .enumerate()
        .map(|(r, &c)| cost[(r, c)])
        .sum();
    (assignment, total)
}

/// Maximum-weight assignment; among all optimal assignments returns the
/// lexicographically smallest one (compared as `assignment[0], assignment[1], ...`).
pub fn max_weight_assignment_lex(weights: &Matrix) -> Vec<usize> {
    let n = weights.rows();
    assert_eq!(n, weights.cols(), "assignment needs a square matrix");
    let neg = weights.map(|w| -w);
    let (_, best) = min_cost_assignment(&neg);
    let scale = weights.data().iter().fold(1.0f64, |m, w| m.max(w.abs()));
    let tol = 1e-9 * scale * n.max(1) as f64;

    let mut fixed: Vec<usize> = Vec::with_capacity(n);
    let mut free_cols: Vec<usize> = (0..n).collect();
    let mut committed = 0.0;
    for row in 0..n {
        let mut chosen = None;
        for (slot, &col) in free_cols.iter().enumerate() {
            let rest_rows: Vec<usize> = (row + 1..n).collect();
            let rest_cols: Vec<usize> = free_cols
                .iter()
                .enumerate()
                .filter(|&(s, _)| s != slot)
                .map(|(_, &c)| c)
                .collect();
            let sub = Matrix::from_fn(rest_rows.len(), rest_cols.len(), |i, j| {
                neg[(rest_rows[i], rest_cols[j])]
            });
            let (_, rest) = min_cost_assignment(&sub);
            if committed + neg[(row, col)] + rest <= best + tol {
                chosen = Some(slot);
                break;
            }
        }
        // Some column always completes an optimum; fall back to the first
        // free column only if rounding error hides it.
        let slot = chosen.unwrap_or(0);
        let col = free_cols.remove(slot);
        committed += neg[(row, col)];
        fixed.push(col);
    }
    fixed
}
