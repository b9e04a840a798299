use super::Matrix;
use crate::error::{CsaError, Result};

/// Eigenpairs of a symmetric matrix; `values[i]` belongs to column `i` of `vectors`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Descending.
    pub values: Vec<f64>,
    /// Orthonormal columns.
    pub vectors: Matrix,
}

const MAX_QL_STEPS: usize = 60;

/// Symmetric eigendecomposition (Householder tridiagonalization + implicit QL).
///
/// The input is symmetrized as `(M + Mᵀ)/2` first. Each eigenvector's sign is
/// fixed so that its largest-magnitude component is positive.
pub fn sym_eig(m: &Matrix) -> Result<SymEigen> {
    if !m.is_square() {
        return Err(CsaError::shape("sym_eig", "square matrix", format!("{}x{}", m.rows(), m.cols())));
    }
    if !m.is_finite() {
        return Err(CsaError::NonFinite("sym_eig input"));
    }
    let n = m.rows();
    let mut v = m.symmetrized();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    tridiagonal_ql(&mut v, &mut d, &mut e)?;

    // tridiagonal_ql leaves ascending order.
    let order: Vec<usize> = (0..n).rev().collect();
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = v.select_columns(&order);
    for j in 0..n {
        let mut pivot = 0;
        for i in 1..n {
            if vectors[(i, j)].abs() > vectors[(pivot, j)].abs() {
                pivot = i;
            }
        }
        if vectors[(pivot, j)] < 0.0 {
            for i in 0..n {
                vectors[(i, j)] = -vectors[(i, j)];
            }
        }
    }
    Ok(SymEigen { values, vectors })
}

/// Householder reduction to tridiagonal form. On return `d` holds the diagonal,
/// `e[1..]` the sub-diagonal and `v` the accumulated orthogonal transform.
fn tridiagonalize(v: &mut Matrix, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in j + 1..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on the tridiagonal; eigenvalues end up ascending in `d`.
fn tridiagonal_ql(v: &mut Matrix, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut steps = 0;
            loop {
                steps += 1;
                if steps > MAX_QL_STEPS {
                    return Err(CsaError::DecompositionFailed { rows: n, cols: n });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[(k, i + 1)];
                        v[(k, i + 1)] = s * v[(k, i)] + c * h;
                        v[(k, i)] = c * v[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // Selection sort, ascending.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            v.swap_columns(i, k);
        }
    }
    Ok(())
}

/// `R` with `R·(m + eps·I)·R = I`, computed from the eigendecomposition of the
/// symmetrized, ridge-shifted input.
///
/// Eigenvalues at or below `n·ε·λ_max` are treated as non-positive: they are
/// indistinguishable from zero at double precision.
pub fn inv_sqrt_spd(m: &Matrix, eps: f64) -> Result<Matrix> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(CsaError::InvalidParameter(format!("ridge eps must be finite and >= 0, got {eps}")));
    }
    if !m.is_square() {
        return Err(CsaError::shape("inv_sqrt_spd", "square matrix", format!("{}x{}", m.rows(), m.cols())));
    }
    let n = m.rows();
    let mut shifted = m.symmetrized();
    for i in 0..n {
        shifted[(i, i)] += eps;
    }
    let eig = sym_eig(&shifted)?;
    let max = eig.values[0].abs().max(eig.values[n - 1].abs());
    let min = eig.values[n - 1];
    if min <= max * n as f64 * f64::EPSILON || min <= 0.0 {
        return Err(CsaError::NotPositiveDefinite { min_eigenvalue: min });
    }
    let inv_root: Vec<f64> = eig.values.iter().map(|l| 1.0 / l.sqrt()).collect();
    let mut scaled = eig.vectors.clone();
    for j in 0..n {
        for i in 0..n {
            scaled[(i, j)] *= inv_root[j];
        }
    }
    // V·diag·Vᵀ, then symmetrize to remove rounding asymmetry.
    Ok(scaled.mul_transpose(&eig.vectors).symmetrized())
}
