use alloc::vec::Vec;

/// Solves the dense system `a x = b` (row-major `a`) by Gaussian elimination
/// with partial pivoting. Returns `None` when a pivot falls below `1e-12`
/// times the largest diagonal magnitude.
pub(crate) fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }
    let tol = 1e-12 * scale;
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= tol {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            let (upper, lower) = a.split_at_mut(row);
            for (dst, src) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *dst -= factor * src;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = alloc::vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Least-squares fit of `features * theta ~ targets` via the normal equations.
pub(crate) fn least_squares(features: &[Vec<f64>], targets: &[f64]) -> Option<Vec<f64>> {
    let p = features.first()?.len();
    let mut ata = alloc::vec![alloc::vec![0.0; p]; p];
    let mut atb = alloc::vec![0.0; p];
    for (row, &y) in features.iter().zip(targets) {
        for i in 0..p {
            atb[i] += row[i] * y;
            for j in 0..p {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    solve(ata, atb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn solves_small_system() {
        let x = solve(vec![vec![2.0, 1.0], vec![1.0, 3.0]], vec![3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 1.4).abs() < 1e-12);
    }

    #[test]
    fn singular_is_none() {
        assert!(solve(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 2.0]).is_none());
    }
}
