//! Dense helpers for the tiny symmetric systems the weight construction
//! needs. Matrices here are at most `beta_bar x beta_bar` with
//! `beta_bar <= 8`, so simple cyclic Jacobi and unpivoted Cholesky are exact
//! enough and dependency-free.

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub(crate) fn sym_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i][j] * m[i][j];
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + frobenius(&m)) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

fn frobenius(m: &[Vec<f64>]) -> f64 {
    m.iter()
        .flat_map(|r| r.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
}

/// Diagonal of `R` from a Householder QR of the matrix given as columns.
/// `|r_kk|` is the distance of column `k` from the span of the earlier
/// columns, so a prefix of columns has full rank exactly when every
/// corresponding diagonal entry is nonneglible.
pub(crate) fn qr_diagonal(columns: &[Vec<f64>]) -> Vec<f64> {
    let ncols = columns.len();
    if ncols == 0 {
        return Vec::new();
    }
    let nrows = columns[0].len();
    let mut a: Vec<Vec<f64>> = columns.to_vec();
    let mut diag = Vec::with_capacity(ncols);
    for k in 0..ncols {
        if k >= nrows {
            diag.push(0.0);
            continue;
        }
        // Householder vector for column k below row k
        let norm = a[k][k..].iter().map(|x| x * x).sum::<f64>().sqrt();
        diag.push(norm);
        if norm == 0.0 {
            continue;
        }
        let sign = if a[k][k] >= 0.0 { 1.0 } else { -1.0 };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] += sign * norm;
        let vnorm_sq: f64 = v.iter().map(|x| x * x).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        for col in a.iter_mut().skip(k) {
            let dot: f64 = v.iter().zip(&col[k..]).map(|(x, y)| x * y).sum();
            let scale = 2.0 * dot / vnorm_sq;
            for (vi, ci) in v.iter().zip(col[k..].iter_mut()) {
                *ci -= scale * vi;
            }
        }
    }
    diag
}

/// Solve `G w = b` for symmetric positive-definite `G` via Cholesky.
/// Returns `None` when a pivot degenerates.
pub(crate) fn cholesky_solve(g: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = g.len();
    let mut l = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = g[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    // forward then backward substitution
    let mut y = vec![0.0f64; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut w = vec![0.0f64; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k][i] * w[k];
        }
        w[i] = s / l[i][i];
    }
    Some(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // diag(1, 4) rotated by 30 degrees
        let (c, s) = (0.75f64.sqrt(), 0.5f64);
        let a = vec![
            vec![c * c + 4.0 * s * s, c * s * (4.0 - 1.0)],
            vec![c * s * (4.0 - 1.0), s * s + 4.0 * c * c],
        ];
        let eig = sym_eigenvalues(&a);
        assert!((eig[0] - 1.0).abs() < 1e-12);
        assert!((eig[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn qr_diagonal_detects_rank() {
        // two independent columns and one exact combination of them
        let c0 = vec![1.0, 1.0, 1.0, 1.0];
        let c1 = vec![1.0, 2.0, 3.0, 4.0];
        let c2: Vec<f64> = c0.iter().zip(&c1).map(|(a, b)| 2.0 * a - b).collect();
        let d = qr_diagonal(&[c0.clone(), c1.clone(), c2]);
        assert!(d[0] > 1.0 && d[1] > 1.0);
        assert!(d[2].abs() < 1e-12);
        // more columns than rows pads with zeros
        let d = qr_diagonal(&[vec![1.0], vec![2.0]]);
        assert_eq!(d[1], 0.0);
        // |r_00| is the first column norm
        let d = qr_diagonal(&[c1]);
        assert!((d[0] - 30.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn cholesky_solves_small_system() {
        let g = vec![vec![4.0, 2.0], vec![2.0, 3.0]];
        let w = cholesky_solve(&g, &[8.0, 7.0]).unwrap();
        assert!((w[0] - 1.25).abs() < 1e-12);
        assert!((w[1] - 1.5).abs() < 1e-12);
        // singular matrix degenerates
        let bad = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(cholesky_solve(&bad, &[1.0, 1.0]).is_none());
    }
}
