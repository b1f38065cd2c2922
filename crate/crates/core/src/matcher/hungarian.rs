//! Exact minimum-cost assignment (Jonker-Volgenant style shortest
//! augmenting paths with dual potentials), O(n^3).

/// Solves the square assignment problem for `cost`, minimizing the total.
/// Returns the column assigned to each row. Deterministic: ties are broken
/// by scan order.
pub fn solve(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    for row in cost {
        assert_eq!(row.len(), n, "cost matrix must be square");
    }

    let mut u = vec![0.0f64; n]; // row potentials
    let mut v = vec![0.0f64; n + 1]; // column potentials (n = virtual start column)
    let mut matched_row = vec![usize::MAX; n + 1]; // row currently matched to each column

    for i in 0..n {
        matched_row[n] = i;
        let mut j0 = n;
        let mut minv = vec![f64::INFINITY; n];
        let mut way = vec![n; n];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = n;
            for j in 0..n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0][j] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            debug_assert!(delta.is_finite(), "no augmenting column found");
            for j in 0..=n {
                if used[j] {
                    if matched_row[j] != usize::MAX {
                        u[matched_row[j]] += delta;
                    }
                    v[j] -= delta;
                } else if j < n {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == usize::MAX {
                break;
            }
        }
        while j0 != n {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
        }
    }

    let mut assignment = vec![usize::MAX; n];
    for j in 0..n {
        if matched_row[j] != usize::MAX {
            assignment[matched_row[j]] = j;
        }
    }
    assignment
}

/// Total cost of an assignment, summed in ascending row order.
pub fn assignment_cost(cost: &[Vec<f64>], assignment: &[usize]) -> f64 {
    let mut total = 0.0;
    for (i, &j) in assignment.iter().enumerate() {
        total += cost[i][j];
    }
    total
}
