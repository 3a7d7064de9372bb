//! Sparse symmetric matrices, banded Cholesky factorization and a
//! shift-invert block Krylov solver for `K x = lambda M x` with diagonal `M`.

use crate::error::{GlError, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Symmetric matrix in compressed-row form with both triangles stored.
#[derive(Clone, Debug)]
pub struct CsrSym {
    pub n: usize,
    rowptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrSym {
    /// Builds from `(i, j, v)` triplets giving the upper or lower entries once;
    /// off-diagonal triplets are mirrored, duplicates summed.
    pub fn from_triplets(n: usize, trips: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in trips {
            rows[i].push((j, v));
            if i != j {
                rows[j].push((i, v));
            }
        }
        let mut rowptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        rowptr.push(0);
        for row in rows.iter_mut() {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for &(j, v) in row.iter() {
                if last == Some(j) {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(j);
                    vals.push(v);
                    last = Some(j);
                }
            }
            rowptr.push(cols.len());
        }
        Self { n, rowptr, cols, vals }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for p in self.rowptr[i]..self.rowptr[i + 1] {
                s += self.vals[p] * x[self.cols[p]];
            }
            y[i] = s;
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.rowptr[i]..self.rowptr[i + 1]).map(move |p| (self.cols[p], self.vals[p]))
    }

    /// `x^T A x`.
    pub fn quad(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        dot(x, &y)
    }

    /// `A + s * diag(m)`.
    pub fn add_diagonal(&self, s: f64, m: &[f64]) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            let mut found = false;
            for p in out.rowptr[i]..out.rowptr[i + 1] {
                if out.cols[p] == i {
                    out.vals[p] += s * m[i];
                    found = true;
                }
            }
            assert!(found, "missing diagonal entry in row {i}");
        }
        out
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cholesky factor `P A P^T = L L^T` stored as a lower band.
#[derive(Clone, Debug)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    data: Vec<f64>,
    /// `perm[p]` is the original index placed at position `p`.
    perm: Vec<usize>,
}

impl BandCholesky {
    /// Factorizes `a` after reordering by `perm`; fails if `a` is not positive definite.
    pub fn factor(a: &CsrSym, perm: &[usize]) -> Result<Self> {
        let n = a.n;
        assert_eq!(perm.len(), n);
        let mut inv = vec![0; n];
        for (p, &i) in perm.iter().enumerate() {
            inv[i] = p;
        }
        let mut bw = 0;
        for i in 0..n {
            for (j, _) in a.row(i) {
                bw = bw.max(inv[i].abs_diff(inv[j]));
            }
        }
        let w = bw + 1;
        let mut data = vec![0.0; n * w];
        for i in 0..n {
            let pi = inv[i];
            for (j, v) in a.row(i) {
                let pj = inv[j];
                if pj <= pi {
                    data[pi * w + (pj + bw - pi)] += v;
                }
            }
        }
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(bw));
                let mut s = data[i * w + (j + bw - i)];
                let ri = i * w + bw - i;
                let rj = j * w + bw - j;
                for k in k0..j {
                    s -= data[ri + k] * data[rj + k];
                }
                if j == i {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(GlError::NotPositiveDefinite(i));
                    }
                    data[i * w + bw] = s.sqrt();
                } else {
                    data[i * w + (j + bw - i)] = s / data[j * w + bw];
                }
            }
        }
        Ok(Self { n, bw, data, perm: perm.to_vec() })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        let mut y: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            let r = i * w + bw - i;
            let mut s = y[i];
            for k in j0..i {
                s -= self.data[r + k] * y[k];
            }
            y[i] = s / self.data[i * w + bw];
        }
        for i in (0..n).rev() {
            y[i] /= self.data[i * w + bw];
            let xi = y[i];
            let j0 = i.saturating_sub(bw);
            let r = i * w + bw - i;
            for k in j0..i {
                y[k] -= self.data[r + k] * xi;
            }
        }
        for (p, &i) in self.perm.iter().enumerate() {
            b[i] = y[p];
        }
    }
}

/// Lowest eigenpairs of a generalized symmetric problem.
#[derive(Clone, Debug)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    /// Eigenvectors normalized so that `x^T M x = 1`.
    pub vectors: Vec<Vec<f64>>,
    /// `sqrt(sum_i r_i^2 / q_i)` with `r = K x - lambda M x` and `q` the norm weights.
    pub residuals: Vec<f64>,
}

/// Projection onto an invariant subspace, applied in place.
pub type Projector<'a> = &'a dyn Fn(&mut [f64]);

/// Settings for [`lowest_eigenpairs`].
#[derive(Clone, Debug)]
pub struct EigenOptions {
    pub shift: f64,
    pub block: usize,
    pub krylov_blocks: usize,
    pub max_restarts: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { shift: -1.0, block: 4, krylov_blocks: 12, max_restarts: 30, tol: 1e-9, seed: 0x5eed }
    }
}

/// Computes the `count` smallest eigenvalues of `K x = lambda M x`.
///
/// `M` is a nonnegative diagonal; `K - shift M` must be positive definite.
/// `norm_weights` defines the residual norm. `project`, if given, restricts the
/// search to an invariant subspace (it must commute with the operator).
pub fn lowest_eigenpairs(
    k: &CsrSym,
    m: &[f64],
    norm_weights: &[f64],
    order: &[usize],
    count: usize,
    opts: &EigenOptions,
    project: Option<Projector<'_>>,
) -> Result<Eigenpairs> {
    let n = k.n;
    if count == 0 || count > n {
        return Err(GlError::InvalidArgument(format!(
            "cannot compute {count} eigenpairs of an {n}-dimensional problem"
        )));
    }
    let shifted = k.add_diagonal(-opts.shift, m);
    let chol = BandCholesky::factor(&shifted, order)?;
    let apply = |x: &[f64]| -> Vec<f64> {
        let mut y: Vec<f64> = x.iter().zip(m).map(|(a, b)| a * b).collect();
        chol.solve(&mut y);
        if let Some(p) = project {
            p(&mut y);
        }
        y
    };
    let mdot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).zip(m).map(|((x, y), w)| x * y * w).sum() };
    // Guard vectors keep clusters cut by `count` from stalling convergence.
    let block = opts.block.max(count + 2).min(n).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<Vec<f64>> = (0..block)
        .map(|_| {
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
            if let Some(p) = project {
                p(&mut v);
            }
            apply(&v)
        })
        .collect();
    let max_dim = (block * opts.krylov_blocks).min(n);
    let mut best: Option<Eigenpairs> = None;
    for _restart in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut images: Vec<Vec<f64>> = Vec::new();
        let mut current = std::mem::take(&mut start);
        while basis.len() < max_dim && !current.is_empty() {
            let mut accepted = Vec::new();
            for mut v in current.drain(..) {
                let norm0 = mdot(&v, &v).sqrt();
                if !(norm0 > 0.0) {
                    continue;
                }
                for _pass in 0..2 {
                    for b in basis.iter().chain(accepted.iter()) {
                        let c = mdot(&v, b);
                        for (x, y) in v.iter_mut().zip(b.iter()) {
                            *x -= c * y;
                        }
                    }
                }
                let nv = mdot(&v, &v).sqrt();
                if nv > 1e-13 * norm0 {
                    for x in v.iter_mut() {
                        *x /= nv;
                    }
                    accepted.push(v);
                }
                if basis.len() + accepted.len() >= max_dim {
                    break;
                }
            }
            if accepted.is_empty() {
                break;
            }
            for v in accepted {
                let w = apply(&v);
                basis.push(v);
                current.push(w.clone());
                images.push(w);
            }
        }
        let dim = basis.len();
        if dim < count {
            return Err(GlError::Eigen(format!("Krylov space collapsed to dimension {dim}")));
        }
        let mut t = DMatrix::<f64>::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let v = 0.5 * (mdot(&basis[i], &images[j]) + mdot(&basis[j], &images[i]));
                t[(i, j)] = v;
                t[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut idx: Vec<usize> = (0..dim).filter(|&i| eig.eigenvalues[i] > 0.0).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
        let take = idx.len().min(block.max(count));
        let mut values = Vec::new();
        let mut vectors = Vec::new();
        for &c in idx.iter().take(take) {
            let theta = eig.eigenvalues[c];
            let mut x = vec![0.0; n];
            for (r, b) in basis.iter().enumerate() {
                let coef = eig.eigenvectors[(r, c)];
                for (xi, bi) in x.iter_mut().zip(b) {
                    *xi += coef * bi;
                }
            }
            let nx = mdot(&x, &x).sqrt();
            for xi in x.iter_mut() {
                *xi /= nx;
            }
            values.push(opts.shift + 1.0 / theta);
            vectors.push(x);
        }
        let residuals: Vec<f64> =
            values.iter().zip(&vectors).map(|(&lam, x)| residual_norm(k, m, norm_weights, lam, x)).collect();
        let converged = (0..count.min(values.len())).all(|i| residuals[i] <= opts.tol * (1.0 + values[i].abs()));
        let result = Eigenpairs {
            values: values[..count.min(values.len())].to_vec(),
            vectors: vectors[..count.min(vectors.len())].to_vec(),
            residuals: residuals[..count.min(residuals.len())].to_vec(),
        };
        if converged && result.values.len() == count {
            return Ok(result);
        }
        start = vectors;
        best = Some(result);
    }
    let b = best.unwrap();
    let worst = b.residuals.iter().cloned().fold(0.0, f64::max);
    Err(GlError::Eigen(format!("not converged after {} restarts, residual {worst:e}", opts.max_restarts)))
}

/// `||K x - lambda M x||` in the norm weighted by `1/q`.
pub fn residual_norm(k: &CsrSym, m: &[f64], q: &[f64], lambda: f64, x: &[f64]) -> f64 {
    let mut y = vec![0.0; k.n];
    k.matvec(x, &mut y);
    y.iter()
        .zip(x)
        .zip(m)
        .zip(q)
        .map(|(((yi, xi), mi), qi)| {
            let r = yi - lambda * mi * xi;
            if *qi > 0.0 {
                r * r / qi
            } else {
                0.0
            }
        })
        .sum::<f64>()
        .sqrt()
}
