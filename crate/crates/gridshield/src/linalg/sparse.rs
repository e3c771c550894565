use super::FactorError;
use crate::scalar::Scalar;

/// Upper-triangular CSC storage of a symmetric matrix (row <= col).
pub struct SymCsc<T: Scalar> {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Scalar> SymCsc<T> {
    /// Build from triplets. Entries below the diagonal are ignored, so the
    /// input may carry either the full symmetric matrix or just the upper
    /// triangle. Duplicate coordinates are summed.
    pub fn from_triplets_upper(n: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut entries: Vec<(usize, usize, T)> = triplets
            .iter()
            .filter(|&&(r, c, _)| r <= c)
            .copied()
            .collect();
        entries.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
        let mut col_ptr = vec![0usize; n + 1];
        let mut row_idx: Vec<usize> = Vec::with_capacity(entries.len());
        let mut values: Vec<T> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                let t = values.len() - 1;
                values[t] = values[t] + v;
            } else {
                row_idx.push(r);
                values.push(v);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for c in 0..n {
            col_ptr[c + 1] += col_ptr[c];
        }
        Self {
            n,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn from_dense_upper(n: usize, a: &[T]) -> Self {
        let mut triplets = Vec::new();
        for r in 0..n {
            for c in r..n {
                let v = a[r * n + c];
                if v != T::zero() {
                    triplets.push((r, c, v));
                }
            }
        }
        Self::from_triplets_upper(n, &triplets)
    }

    /// Symmetric adjacency lists (off-diagonal pattern, both directions).
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for c in 0..self.n {
            for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                let r = self.row_idx[p];
                if r != c {
                    adj[r].push(c);
                    adj[c].push(r);
                }
            }
        }
        adj
    }
}

/// Reverse Cuthill-McKee ordering; returns perm with perm[new] = old.
fn rcm_order<T: Scalar>(a: &SymCsc<T>) -> Vec<usize> {
    let n = a.n;
    let adj = a.adjacency();
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    loop {
        // lowest-degree unvisited node starts the next component
        let start = match (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| adj[i].len())
        {
            Some(s) => s,
            None => break,
        };
        visited[start] = true;
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut nbrs: Vec<usize> = adj[u].iter().copied().filter(|&v| !visited[v]).collect();
            nbrs.sort_by_key(|&v| (adj[v].len(), v));
            nbrs.dedup();
            for v in nbrs {
                if !visited[v] {
                    visited[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    order.reverse();
    order
}

/// Sparse LDL^T factorization with RCM fill-reducing ordering.
///
/// Symbolic and numeric phases follow the classic up-looking algorithm:
/// the pattern of each row of L is found by walking the elimination tree.
pub struct SparseLdl<T: Scalar> {
    n: usize,
    perm: Vec<usize>, // perm[new] = old
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<T>,
    d: Vec<T>,
}

impl<T: Scalar> SparseLdl<T> {
    pub fn factor(a: &SymCsc<T>) -> Result<Self, FactorError> {
        let n = a.n;
        let perm = rcm_order(a);
        let mut perm_inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            perm_inv[old] = new;
        }

        // permuted upper-triangular CSC
        let mut triplets = Vec::with_capacity(a.values.len());
        for c in 0..n {
            for p in a.col_ptr[c]..a.col_ptr[c + 1] {
                let r = a.row_idx[p];
                let (mut nr, mut nc) = (perm_inv[r], perm_inv[c]);
                if nr > nc {
                    std::mem::swap(&mut nr, &mut nc);
                }
                triplets.push((nr, nc, a.values[p]));
            }
        }
        let ap = SymCsc::from_triplets_upper(n, &triplets);

        // symbolic: elimination tree and column counts
        let mut parent = vec![usize::MAX; n];
        let mut flag = vec![usize::MAX; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            for p in ap.col_ptr[k]..ap.col_ptr[k + 1] {
                let mut i = ap.row_idx[p];
                while i < k && flag[i] != k {
                    if parent[i] == usize::MAX {
                        parent[i] = k;
                    }
                    lnz[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for k in 0..n {
            lp[k + 1] = lp[k] + lnz[k];
        }
        let nnz = lp[n];

        // singularity threshold relative to the largest diagonal entry
        let mut max_diag = T::zero();
        for c in 0..n {
            for p in ap.col_ptr[c]..ap.col_ptr[c + 1] {
                if ap.row_idx[p] == c && ap.values[p].abs() > max_diag {
                    max_diag = ap.values[p].abs();
                }
            }
        }
        let tiny = max_diag * T::c(1e-12);

        // numeric
        let mut li = vec![0usize; nnz];
        let mut lx = vec![T::zero(); nnz];
        let mut d = vec![T::zero(); n];
        let mut y = vec![T::zero(); n];
        let mut pattern = vec![0usize; n];
        let mut lfill = vec![0usize; n]; // entries written so far per column
        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            y[k] = T::zero();
            for p in ap.col_ptr[k]..ap.col_ptr[k + 1] {
                let mut i = ap.row_idx[p];
                y[i] = y[i] + ap.values[p];
                let mut len = 0usize;
                while i < k && flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = parent[i];
                }
                while len > 0 {
                    len -= 1;
                    top -= 1;
                    pattern[top] = pattern[len];
                }
            }
            d[k] = y[k];
            y[k] = T::zero();
            for t in top..n {
                let i = pattern[t];
                let yi = y[i];
                y[i] = T::zero();
                for p in lp[i]..(lp[i] + lfill[i]) {
                    y[li[p]] = y[li[p]] - lx[p] * yi;
                }
                let lki = yi / d[i];
                d[k] = d[k] - lki * yi;
                let dest = lp[i] + lfill[i];
                li[dest] = k;
                lx[dest] = lki;
                lfill[i] += 1;
            }
            if d[k].abs() <= tiny || !d[k].is_finite() {
                return Err(FactorError::NotPositiveDefinite(k));
            }
        }

        Ok(Self {
            n,
            perm,
            lp,
            li,
            lx,
            d,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        assert_eq!(rhs.len(), self.n, "rhs dimension mismatch");
        let n = self.n;
        let mut x = vec![T::zero(); n];
        for new in 0..n {
            x[new] = rhs[self.perm[new]];
        }
        // L y = b
        for j in 0..n {
            let xj = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                x[self.li[p]] = x[self.li[p]] - self.lx[p] * xj;
            }
        }
        // D z = y
        for j in 0..n {
            x[j] = x[j] / self.d[j];
        }
        // L^T x = z
        for j in (0..n).rev() {
            let mut s = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                s = s - self.lx[p] * x[self.li[p]];
            }
            x[j] = s;
        }
        let mut out = vec![T::zero(); n];
        for new in 0..n {
            out[self.perm[new]] = x[new];
        }
        out
    }
}
