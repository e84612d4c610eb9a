use num_complex::Complex64;

use crate::error::LinalgError;

/// Largest band count solved by exhaustive assignment.
pub const EXACT_ASSIGNMENT_MAX: usize = 8;

/// Assigns each band of `prev` to an eigenvalue of `next`.
///
/// Returns `perm` with `perm[i]` the index in `next` that continues band `i`.
/// Up to [`EXACT_ASSIGNMENT_MAX`] bands the total squared distance is
/// minimised exactly; among equal-cost assignments the lexicographically
/// smallest permutation wins, so ties keep the index order. Larger inputs
/// use a global greedy match on ascending distance.
pub fn pair_continuation(
    prev: &[Complex64],
    next: &[Complex64],
) -> Result<Vec<usize>, LinalgError> {
    if prev.len() != next.len() {
        return Err(LinalgError::LengthMismatch(prev.len(), next.len()));
    }
    let n = prev.len();
    let cost: Vec<Vec<f64>> = prev
        .iter()
        .map(|p| next.iter().map(|q| (p - q).norm_sqr()).collect())
        .collect();
    if n <= EXACT_ASSIGNMENT_MAX {
        Ok(exact_assignment(&cost))
    } else {
        Ok(greedy_assignment(&cost))
    }
}

fn exact_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let mut best = (0..n).collect::<Vec<_>>();
    let mut best_cost: f64 = (0..n).map(|i| cost[i][i]).sum();
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n];
    search(cost, &mut current, &mut used, 0.0, &mut best, &mut best_cost);
    best
}

fn search(
    cost: &[Vec<f64>],
    current: &mut Vec<usize>,
    used: &mut [bool],
    acc: f64,
    best: &mut Vec<usize>,
    best_cost: &mut f64,
) {
    let n = cost.len();
    let margin = 1e-12 * best_cost.abs() + f64::MIN_POSITIVE;
    if acc >= *best_cost - margin {
        return;
    }
    if current.len() == n {
        if acc < *best_cost - margin {
            *best_cost = acc;
            best.clone_from(current);
        }
        return;
    }
    let i = current.len();
    for j in 0..n {
        if used[j] {
            continue;
        }
        used[j] = true;
        current.push(j);
        search(cost, current, used, acc + cost[i][j], best, best_cost);
        current.pop();
        used[j] = false;
    }
}

fn greedy_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let mut pairs: Vec<(f64, usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (cost[i][j], i, j))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut perm = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    for (_, i, j) in pairs {
        if perm[i] == usize::MAX && !taken[j] {
            perm[i] = j;
            taken[j] = true;
        }
    }
    perm
}
