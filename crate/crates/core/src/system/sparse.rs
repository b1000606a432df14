use std::fmt::Write as _;

/// Compressed sparse row matrix with sorted, duplicate-free rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries. Duplicates are added in the order they appear
    /// in `triplets`, so the result does not depend on thread scheduling.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, _, _) in triplets {
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            cols[next[r]] = c;
            vals[next[r]] = v;
            next[r] += 1;
        }

        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(triplets.len() / 2);
        let mut data = Vec::with_capacity(triplets.len() / 2);
        indptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for r in 0..nrows {
            let (lo, hi) = (counts[r], counts[r + 1]);
            order.clear();
            order.extend(lo..hi);
            order.sort_by_key(|&i| cols[i]);
            let mut last = usize::MAX;
            for &i in &order {
                if cols[i] == last {
                    *data.last_mut().unwrap() += vals[i];
                } else {
                    indices.push(cols[i]);
                    data.push(vals[i]);
                    last = cols[i];
                }
            }
            indptr.push(indices.len());
        }
        Self { nrows, ncols, indptr, indices, data }
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.indptr[r], self.indptr[r + 1]);
        self.indices[lo..hi].iter().copied().zip(self.data[lo..hi].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (lo, hi) = (self.indptr[r], self.indptr[r + 1]);
        match self.indices[lo..hi].binary_search(&c) {
            Ok(i) => self.data[lo + i],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |a_ij - a_ji| / max |a_ij|`.
    pub fn relative_asymmetry(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst / scale
    }

    /// MatrixMarket coordinate text, lower triangle, `symmetric` qualifier.
    pub fn to_matrix_market(&self) -> String {
        let lower: Vec<(usize, usize, f64)> = (0..self.nrows)
            .flat_map(|r| self.row(r).filter(move |&(c, _)| c <= r).map(move |(c, v)| (r, c, v)))
            .collect();
        let mut out = String::with_capacity(lower.len() * 40);
        out.push_str("%%MatrixMarket matrix coordinate real symmetric\n");
        let _ = writeln!(out, "{} {} {}", self.nrows, self.ncols, lower.len());
        for (r, c, v) in lower {
            let _ = writeln!(out, "{} {} {:e}", r + 1, c + 1, v);
        }
        out
    }
}
