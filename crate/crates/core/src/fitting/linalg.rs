//! Small dense helpers for the normal equations.

pub(crate) fn normal_matrix(jac: &[Vec<f64>], weights: &[f64]) -> Vec<Vec<f64>> {
    let k = jac.first().map_or(0, |r| r.len());
    let mut a = vec![vec![0.0; k]; k];
    for (row, &w) in jac.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        for i in 0..k {
            for j in 0..=i {
                a[i][j] += w * row[i] * row[j];
            }
        }
    }
    for i in 0..k {
        for j in 0..i {
            a[j][i] = a[i][j];
        }
    }
    a
}

/// Cholesky factor `L` with `A = L L^T` of an already equilibrated
/// matrix, or `None` when it is not numerically positive definite.
fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if !(s > 1e-14) || !s.is_finite() {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Symmetric Jacobi scaling `S A S` with unit diagonal, returning `S`.
fn equilibrate(a: &[Vec<f64>]) -> Option<(Vec<Vec<f64>>, Vec<f64>)> {
    let n = a.len();
    let mut scale = Vec::with_capacity(n);
    for (i, row) in a.iter().enumerate() {
        if !(row[i] > 0.0) || !row[i].is_finite() {
            return None;
        }
        scale.push(1.0 / row[i].sqrt());
    }
    let scaled = (0..n)
        .map(|i| (0..n).map(|j| a[i][j] * scale[i] * scale[j]).collect())
        .collect();
    Some((scaled, scale))
}

fn cholesky_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = l.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (b[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = (y[i] - (i + 1..n).map(|k| l[k][i] * x[k]).sum::<f64>()) / l[i][i];
    }
    x
}

pub(crate) fn solve_spd(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let (scaled, s) = equilibrate(a)?;
    let l = cholesky(&scaled)?;
    let rhs: Vec<f64> = b.iter().zip(&s).map(|(v, si)| v * si).collect();
    Some(
        cholesky_solve(&l, &rhs)
            .iter()
            .zip(&s)
            .map(|(v, si)| v * si)
            .collect(),
    )
}

pub(crate) fn invert_spd(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let (scaled, s) = equilibrate(a)?;
    let l = cholesky(&scaled)?;
    let n = a.len();
    let mut inv = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = cholesky_solve(&l, &e);
        for i in 0..n {
            inv[i][j] = col[i] * s[i] * s[j];
        }
    }
    Some(inv)
}
