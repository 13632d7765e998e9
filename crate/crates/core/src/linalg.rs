//! Small dense Gaussian elimination over a [`Scalar`].

use crate::scalar::Scalar;

/// Pivot threshold for inexact scalars, relative to the largest entry.
pub const RELATIVE_PIVOT_TOL: f64 = 1e-10;

fn pivot_ok<S: Scalar>(v: &S, scale: f64) -> bool {
    if S::EXACT {
        !v.is_zero()
    } else {
        v.magnitude() > RELATIVE_PIVOT_TOL * scale
    }
}

fn max_magnitude<S: Scalar>(rows: &[Vec<S>]) -> f64 {
    rows.iter()
        .flat_map(|r| r.iter().map(|v| v.magnitude()))
        .fold(0.0, f64::max)
}

/// Row rank of a matrix given as rows.
pub fn rank<S: Scalar>(mut rows: Vec<Vec<S>>) -> usize {
    let Some(ncols) = rows.first().map(|r| r.len()) else {
        return 0;
    };
    let scale = max_magnitude(&rows).max(f64::MIN_POSITIVE);
    let mut r = 0;
    for c in 0..ncols {
        let pivot = (r..rows.len())
            .filter(|&i| pivot_ok(&rows[i][c], scale))
            .max_by(|&a, &b| rows[a][c].magnitude().total_cmp(&rows[b][c].magnitude()));
        let Some(p) = pivot else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].recip().expect("pivot is nonzero");
        for i in r + 1..rows.len() {
            if rows[i][c].is_zero() {
                continue;
            }
            let factor = rows[i][c].clone() * inv.clone();
            for j in c..ncols {
                let v = rows[i][j].clone() - factor.clone() * rows[r][j].clone();
                rows[i][j] = v;
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// Solve the square system `a x = b`; `None` when `a` is singular.
pub fn solve<S: Scalar>(a: &[Vec<S>], b: &[S]) -> Option<Vec<S>> {
    let n = a.len();
    assert_eq!(b.len(), n);
    let scale = max_magnitude(a).max(f64::MIN_POSITIVE);
    let mut m: Vec<Vec<S>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            assert_eq!(row.len(), n, "matrix is not square");
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .filter(|&i| pivot_ok(&m[i][c], scale))
            .max_by(|&x, &y| m[x][c].magnitude().total_cmp(&m[y][c].magnitude()))?;
        m.swap(c, p);
        let inv = m[c][c].recip()?;
        for i in 0..n {
            if i == c || m[i][c].is_zero() {
                continue;
            }
            let factor = m[i][c].clone() * inv.clone();
            for j in c..=n {
                let v = m[i][j].clone() - factor.clone() * m[c][j].clone();
                m[i][j] = v;
            }
        }
    }
    Some((0..n).map(|i| m[i][n].clone() * m[i][i].recip().unwrap()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, Rational};

    #[test]
    fn rank_of_dependent_rows() {
        let rows = vec![
            vec![int(1), int(2), int(3)],
            vec![int(2), int(4), int(6)],
            vec![int(0), int(1), int(1)],
        ];
        assert_eq!(rank(rows), 2);
        assert_eq!(rank::<f64>(vec![vec![1.0, 1.0], vec![1.0, 1.0 + 1e-14]]), 1);
    }

    #[test]
    fn solve_exact_system() {
        let a: Vec<Vec<Rational>> = vec![vec![int(2), int(1)], vec![int(1), int(3)]];
        let x = solve(&a, &[int(3), int(5)]).unwrap();
        assert_eq!(x, vec![crate::scalar::rat(4, 5), crate::scalar::rat(7, 5)]);
        assert!(solve(&[vec![int(1), int(2)], vec![int(2), int(4)]], &[int(1), int(1)]).is_none());
    }
}
