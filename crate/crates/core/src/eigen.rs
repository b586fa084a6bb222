//! Dense complex eigensolver for general (non-normal) matrices.
//!
//! Householder reduction to upper Hessenberg form followed by single-shift
//! complex QR iterations with Wilkinson shifts yields the Schur form
//! `A = Z T Z†`. Right and left eigenvectors come from back- and
//! forward-substitution on the triangular factor `T`, so both sets belong to
//! the same eigenvalue ordering without any matching step.

use crate::{CMatrix, CVector, Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
fn abs1(z: C64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Complex Schur decomposition `A = Z T Z†`.
#[derive(Debug, Clone)]
pub struct Schur {
    /// Upper-triangular factor.
    pub t: CMatrix,
    /// Unitary factor; `None` when only eigenvalues were requested.
    pub z: Option<CMatrix>,
    /// Total QR sweeps performed.
    pub iterations: usize,
}

impl Schur {
    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }
}

/// Eigenvalues with matching right (`A v = λ v`) and left (`w† A = λ w†`)
/// eigenvectors stored as unit-norm columns, sorted by `(Re λ, Im λ)`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<C64>,
    pub right: CMatrix,
    pub left: CMatrix,
    pub iterations: usize,
}

fn check_square(a: &CMatrix) -> Result<usize> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::domain(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::domain("matrix has non-finite entries"));
    }
    Ok(n)
}

/// In-place Householder reduction to upper Hessenberg form; accumulates the
/// reflectors into `z` when given.
fn hessenberg(h: &mut CMatrix, mut z: Option<&mut CMatrix>) {
    let n = h.nrows();
    if n < 3 {
        return;
    }
    let mut v = vec![ZERO; n];
    for k in 0..n - 2 {
        let len = n - k - 1;
        let mut xnorm2 = 0.0;
        for i in 0..len {
            v[i] = h[(k + 1 + i, k)];
            xnorm2 += v[i].norm_sqr();
        }
        let xnorm = xnorm2.sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = v[0];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vnorm = v[..len].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for c in v[..len].iter_mut() {
            *c /= vnorm;
        }

        // H <- (I - 2 v v†) H on rows k+1.., columns k..
        for j in k..n {
            let mut dot = ZERO;
            for i in 0..len {
                dot += v[i].conj() * h[(k + 1 + i, j)];
            }
            let dot = dot * 2.0;
            for i in 0..len {
                h[(k + 1 + i, j)] -= v[i] * dot;
            }
        }
        // H <- H (I - 2 v v†) on columns k+1..
        apply_reflector_right(h, &v[..len], k + 1);
        if let Some(z) = z.as_deref_mut() {
            apply_reflector_right(z, &v[..len], k + 1);
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
}

fn apply_reflector_right(m: &mut CMatrix, v: &[C64], offset: usize) {
    let rows = m.nrows();
    for i in 0..rows {
        let mut dot = ZERO;
        for (jj, vj) in v.iter().enumerate() {
            dot += m[(i, offset + jj)] * vj;
        }
        let dot = dot * 2.0;
        for (jj, vj) in v.iter().enumerate() {
            m[(i, offset + jj)] -= dot * vj.conj();
        }
    }
}

/// Givens rotation `G = [[c, s], [-conj(s), c]]` with `G [x; y] = [r; 0]`.
fn givens(x: C64, y: C64) -> (f64, C64) {
    if y == ZERO {
        return (1.0, ZERO);
    }
    if x == ZERO {
        return (0.0, y.conj() / y.norm());
    }
    let ax = x.norm();
    let nrm = ax.hypot(y.norm());
    (ax / nrm, (x / ax) * y.conj() / nrm)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half_tr = (a + d) * 0.5;
    let half_diff = (a - d) * 0.5;
    let disc = (half_diff * half_diff + b * c).sqrt();
    let mu1 = half_tr + disc;
    let mu2 = half_tr - disc;
    if (mu1 - d).norm() <= (mu2 - d).norm() {
        mu1
    } else {
        mu2
    }
}

/// Complex Schur decomposition of a general square matrix.
pub fn schur(a: &CMatrix, want_z: bool) -> Result<Schur> {
    let n = check_square(a)?;
    let mut h = a.clone();
    let mut z = if want_z {
        Some(CMatrix::identity(n, n))
    } else {
        None
    };
    hessenberg(&mut h, z.as_mut());
    if n < 2 {
        return Ok(Schur {
            t: h,
            z,
            iterations: 0,
        });
    }

    let eps = f64::EPSILON;
    let smlnum = f64::MIN_POSITIVE * (n as f64 / eps);
    let max_iter = 30 * n.max(10);
    let mut total = 0usize;
    let mut its = 0usize;
    let mut hi = n - 1;
    let mut rot: Vec<(f64, C64)> = Vec::with_capacity(n);

    while hi > 0 {
        // Look for a negligible subdiagonal entry in the active block.
        let mut l = hi;
        while l > 0 {
            let sub = abs1(h[(l, l - 1)]);
            if sub <= smlnum {
                h[(l, l - 1)] = ZERO;
                break;
            }
            let mut s = abs1(h[(l - 1, l - 1)]) + abs1(h[(l, l)]);
            if s == 0.0 {
                if l >= 2 {
                    s += abs1(h[(l - 1, l - 2)]);
                }
                if l + 1 <= hi {
                    s += abs1(h[(l + 1, l)]);
                }
            }
            if sub <= eps * s {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            its = 0;
            continue;
        }

        total += 1;
        its += 1;
        if total > max_iter {
            return Err(Error::NoConvergence {
                iterations: total - 1,
                unconverged: hi + 1,
                dim: n,
            });
        }

        let mu = if its % 10 == 0 {
            // exceptional shift to break cycles
            h[(hi, hi)] + 0.75 * h[(hi, hi - 1)].re.abs()
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        // Explicit shifted QR step on the window l..=hi, applied as a
        // similarity to the full matrix so that T stays a Schur factor.
        for i in l..=hi {
            h[(i, i)] -= mu;
        }
        rot.clear();
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rot.push((c, s));
            for j in k..n {
                let u = h[(k, j)];
                let v = h[(k + 1, j)];
                h[(k, j)] = u * c + s * v;
                h[(k + 1, j)] = -s.conj() * u + v * c;
            }
            h[(k + 1, k)] = ZERO;
        }
        for (idx, &(c, s)) in rot.iter().enumerate() {
            let k = l + idx;
            for i in 0..=(k + 1) {
                let u = h[(i, k)];
                let v = h[(i, k + 1)];
                h[(i, k)] = u * c + v * s.conj();
                h[(i, k + 1)] = -s * u + v * c;
            }
            if let Some(z) = z.as_mut() {
                for i in 0..n {
                    let u = z[(i, k)];
                    let v = z[(i, k + 1)];
                    z[(i, k)] = u * c + v * s.conj();
                    z[(i, k + 1)] = -s * u + v * c;
                }
            }
        }
        for i in l..=hi {
            h[(i, i)] += mu;
        }
    }

    // Clean below the diagonal.
    for j in 0..n {
        for i in j + 1..n {
            h[(i, j)] = ZERO;
        }
    }
    Ok(Schur {
        t: h,
        z,
        iterations: total,
    })
}

/// Eigenvalues only (no Schur vectors are accumulated).
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<C64>> {
    let mut vals = schur(a, false)?.eigenvalues();
    sort_complex(&mut vals);
    Ok(vals)
}

pub fn sort_complex(vals: &mut [C64]) {
    vals.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Full eigendecomposition with right and left eigenvectors.
pub fn eigen(a: &CMatrix) -> Result<Eigen> {
    let n = check_square(a)?;
    let s = schur(a, true)?;
    let t = &s.t;
    let z = s.z.as_ref().expect("schur vectors requested");
    let values = s.eigenvalues();

    let tnorm = t.iter().map(|c| abs1(*c)).fold(0.0, f64::max);
    let smin = (f64::EPSILON * tnorm).max(f64::MIN_POSITIVE * n as f64 / f64::EPSILON);

    let mut right = CMatrix::zeros(n, n);
    let mut left = CMatrix::zeros(n, n);
    let mut x = vec![ZERO; n];

    for k in 0..n {
        let lambda = values[k];

        // (T - λ I) x = 0 with x_k = 1, x_j = 0 for j > k.
        x[..n].fill(ZERO);
        x[k] = ONE;
        for j in (0..k).rev() {
            let mut sum = ZERO;
            for m in j + 1..=k {
                sum += t[(j, m)] * x[m];
            }
            let mut d = t[(j, j)] - lambda;
            if abs1(d) < smin {
                d = C64::new(smin, 0.0);
            }
            x[j] = -sum / d;
        }
        let mut col = CVector::zeros(n);
        for m in 0..=k {
            let xm = x[m];
            if xm != ZERO {
                for i in 0..n {
                    col[i] += z[(i, m)] * xm;
                }
            }
        }
        let nrm = col.norm();
        right.set_column(k, &(col / C64::new(nrm, 0.0)));

        // u (T - λ I) = 0 as a row vector with u_k = 1, u_j = 0 for j < k.
        x[..n].fill(ZERO);
        x[k] = ONE;
        for j in k + 1..n {
            let mut sum = ZERO;
            for m in k..j {
                sum += x[m] * t[(m, j)];
            }
            let mut d = t[(j, j)] - lambda;
            if abs1(d) < smin {
                d = C64::new(smin, 0.0);
            }
            x[j] = -sum / d;
        }
        let mut col = CVector::zeros(n);
        for m in k..n {
            let um = x[m].conj();
            if um != ZERO {
                for i in 0..n {
                    col[i] += z[(i, m)] * um;
                }
            }
        }
        let nrm = col.norm();
        left.set_column(k, &(col / C64::new(nrm, 0.0)));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .re
            .total_cmp(&values[b].re)
            .then(values[a].im.total_cmp(&values[b].im))
    });
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let right = CMatrix::from_fn(n, n, |i, j| right[(i, order[j])]);
    let left = CMatrix::from_fn(n, n, |i, j| left[(i, order[j])]);
    Ok(Eigen {
        values: sorted_values,
        right,
        left,
        iterations: s.iterations,
    })
}

/// Power-iteration estimate of the spectral norm `‖A‖₂` (largest singular
/// value), from a deterministic start vector. Converges from below; the
/// result is inflated by 1% so it can serve as a step-size bound.
pub fn spectral_norm_estimate(a: &CMatrix) -> f64 {
    let n = a.ncols();
    if n == 0 {
        return 0.0;
    }
    let mut v = CVector::from_fn(n, |i, _| C64::new(1.0 + 0.01 * i as f64, 0.0));
    v /= C64::new(v.norm(), 0.0);
    let mut sigma = 0.0;
    for _ in 0..200 {
        let w = a * &v;
        let u = a.adjoint() * &w;
        let nu = u.norm();
        if nu == 0.0 {
            return 0.0;
        }
        let next = nu.sqrt();
        v = u / C64::new(nu, 0.0);
        if (next - sigma).abs() <= 1e-12 * next {
            sigma = next;
            break;
        }
        sigma = next;
    }
    1.01 * sigma
}
