//! Bounded enumeration of non-negative integer solutions to small linear
//! systems.

/// All tuples `x` in `[0, bound]^dims` with `rows[i] · x == targets[i]` for
/// every row, in lexicographic order.
///
/// Panics if a row does not have `dims` coefficients or the number of rows
/// and targets differ.
pub fn enumerate_solutions(
    rows: &[Vec<i64>],
    targets: &[i64],
    dims: usize,
    bound: u32,
) -> Vec<Vec<u32>> {
    assert!(dims >= 1, "at least one variable");
    assert_eq!(rows.len(), targets.len(), "one target per row");
    assert!(
        rows.iter().all(|r| r.len() == dims),
        "each row needs {dims} coefficients"
    );

    let bound = bound as i64;
    // reach[i][j] = (min, max) of Σ_{j' >= j} rows[i][j'] * x_j' over the box.
    let reach: Vec<Vec<(i64, i64)>> = rows
        .iter()
        .map(|row| {
            let mut acc = vec![(0, 0); dims + 1];
            for j in (0..dims).rev() {
                let c = row[j] * bound;
                acc[j] = (acc[j + 1].0 + c.min(0), acc[j + 1].1 + c.max(0));
            }
            acc
        })
        .collect();

    let mut out = Vec::new();
    let mut current = vec![0u32; dims];
    let mut residual: Vec<i64> = targets.to_vec();
    search(
        rows,
        &reach,
        bound,
        0,
        &mut current,
        &mut residual,
        &mut out,
    );
    out
}

fn search(
    rows: &[Vec<i64>],
    reach: &[Vec<(i64, i64)>],
    bound: i64,
    depth: usize,
    current: &mut Vec<u32>,
    residual: &mut Vec<i64>,
    out: &mut Vec<Vec<u32>>,
) {
    let dims = current.len();
    if depth == dims {
        if residual.iter().all(|&r| r == 0) {
            out.push(current.clone());
        }
        return;
    }
    for x in 0..=bound {
        let feasible = rows.iter().enumerate().all(|(i, row)| {
            let rest = residual[i] - row[depth] * x;
            let (lo, hi) = reach[i][depth + 1];
            lo <= rest && rest <= hi
        });
        if feasible {
            for (i, row) in rows.iter().enumerate() {
                residual[i] -= row[depth] * x;
            }
            current[depth] = x as u32;
            search(rows, reach, bound, depth + 1, current, residual, out);
            for (i, row) in rows.iter().enumerate() {
                residual[i] += row[depth] * x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(rows: &[Vec<i64>], targets: &[i64], dims: usize, bound: u32) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let total = (bound as usize + 1).pow(dims as u32);
        for code in 0..total {
            let mut x = vec![0u32; dims];
            let mut c = code;
            for j in (0..dims).rev() {
                x[j] = (c % (bound as usize + 1)) as u32;
                c /= bound as usize + 1;
            }
            let ok = rows
                .iter()
                .zip(targets)
                .all(|(row, &t)| row.iter().zip(&x).map(|(&a, &b)| a * b as i64).sum::<i64>() == t);
            if ok {
                out.push(x);
            }
        }
        out
    }

    #[test]
    fn examples() {
        assert_eq!(
            enumerate_solutions(&[vec![2, 1]], &[2], 2, 2),
            vec![vec![0, 2], vec![1, 0]]
        );
        assert_eq!(
            enumerate_solutions(&[vec![1, -1], vec![1, 1]], &[0, 2], 2, 2),
            vec![vec![1, 1]]
        );
        let four = enumerate_solutions(&[vec![1, 1, 1, 1]], &[2], 4, 2);
        assert_eq!(four.len(), 10);
        assert_eq!(four, brute_force(&[vec![1, 1, 1, 1]], &[2], 4, 2));
    }

    #[test]
    fn unsolvable_is_empty() {
        assert!(enumerate_solutions(&[vec![2, 2]], &[3], 2, 5).is_empty());
        assert!(enumerate_solutions(&[vec![1]], &[7], 1, 3).is_empty());
    }

    #[test]
    fn matches_brute_force_on_walk_systems() {
        let rows = vec![vec![1, -1, 0, 0], vec![0, 0, 2, -1], vec![1, 1, 1, 2]];
        for h in -3..=3 {
            for v in -3..=3 {
                for m in 0..=4 {
                    let t = [h, v, m];
                    assert_eq!(
                        enumerate_solutions(&rows, &t, 4, 4),
                        brute_force(&rows, &t, 4, 4)
                    );
                }
            }
        }
    }
}
