//! Probability measures on dyadic lattices of R^d.
//!
//! A measure lives at a fixed resolution level L: its atoms are the half-open
//! cubes [k/2^L, (k+1)/2^L)^d, keyed by the integer vector k. Entropy is
//! queryable at any level; levels at or beyond L see the atomization itself,
//! coarser levels pool cells by floor division. All reductions run in sorted
//! key order so results are independent of threading and platform.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{FelError, Result};

/// Hard cap on ambient dimension for the fixed-size cell key.
pub const MAX_DIM: usize = 4;

/// Integer cell index; only the first `d` entries are meaningful.
pub type Cell = [i64; MAX_DIM];

pub const WEIGHT_SUM_TOL: f64 = 1e-9;

fn zero_cell() -> Cell {
    [0; MAX_DIM]
}

/// A finitely supported probability measure on the level-L dyadic lattice.
#[derive(Debug, Clone)]
pub struct LatticeMeasure {
    d: usize,
    level: i64,
    /// Sorted by cell key; strictly positive weights summing to 1.
    cells: Vec<(Cell, f64)>,
}

/// Mean, covariance, and eigenstructure of a measure (computed from the
/// cell-center atomization, so moment errors are O(2^-L)).
#[derive(Debug, Clone)]
pub struct CovSummary {
    pub mean: DVector<f64>,
    pub sigma: DMatrix<f64>,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Columns are the unit eigenvectors, in the same order.
    pub eigenvectors: DMatrix<f64>,
}

impl CovSummary {
    /// Eigenvalue with the indexing convention lambda_0 = d and
    /// lambda_k = 0 for k > d.
    pub fn lambda(&self, k: usize) -> f64 {
        if k == 0 {
            self.mean.len() as f64
        } else if k <= self.eigenvalues.len() {
            self.eigenvalues[k - 1].max(0.0)
        } else {
            0.0
        }
    }
}

impl LatticeMeasure {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn level(&self) -> i64 {
        self.level
    }

    pub fn cells(&self) -> &[(Cell, f64)] {
        &self.cells
    }

    pub fn support_len(&self) -> usize {
        self.cells.len()
    }

    /// Build from raw (cell, weight) pairs: merges duplicates, drops
    /// nonpositive weights, normalizes to total mass 1.
    pub fn from_cells(d: usize, level: i64, mut cells: Vec<(Cell, f64)>) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(FelError::InvalidParameter(format!("dimension {d} out of range")));
        }
        if cells.is_empty() {
            return Err(FelError::EmptyInput("measure with no cells"));
        }
        if cells.iter().any(|(_, w)| !w.is_finite()) {
            return Err(FelError::NonFinite("cell weight"));
        }
        cells.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Cell, f64)> = Vec::with_capacity(cells.len());
        for (c, w) in cells {
            if w <= 0.0 {
                continue;
            }
            match merged.last_mut() {
                Some((lc, lw)) if *lc == c => *lw += w,
                _ => merged.push((c, w)),
            }
        }
        if merged.is_empty() {
            return Err(FelError::EmptyInput("measure with no positive mass"));
        }
        let total: f64 = merged.iter().map(|(_, w)| w).sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(FelError::NonFinite("total mass"));
        }
        for (_, w) in merged.iter_mut() {
            *w /= total;
        }
        Ok(LatticeMeasure { d, level, cells: merged })
    }

    /// Snap weighted points to the lattice: cell = floor(2^L x).
    pub fn from_atoms(atoms: &[(DVector<f64>, f64)], level: i64) -> Result<Self> {
        if atoms.is_empty() {
            return Err(FelError::EmptyInput("atom list"));
        }
        let d = atoms[0].0.len();
        let scale = (level as f64).exp2();
        let mut cells = Vec::with_capacity(atoms.len());
        for (x, w) in atoms {
            if x.len() != d {
                return Err(FelError::DimensionMismatch(x.len(), d));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(FelError::NonFinite("atom coordinate"));
            }
            let mut c = zero_cell();
            for i in 0..d {
                c[i] = (x[i] * scale).floor() as i64;
            }
            cells.push((c, *w));
        }
        Self::from_cells(d, level, cells)
    }

    /// Point mass at x.
    pub fn dirac(x: &DVector<f64>, level: i64) -> Result<Self> {
        Self::from_atoms(&[(x.clone(), 1.0)], level)
    }

    /// Center of a cell at this measure's resolution.
    pub fn center_of(&self, cell: &Cell) -> DVector<f64> {
        let s = (-(self.level as f64)).exp2();
        DVector::from_fn(self.d, |i, _| (cell[i] as f64 + 0.5) * s)
    }

    fn pool_shift(&self, n: i64) -> u32 {
        (self.level - n).clamp(0, 63) as u32
    }

    fn pooled_key(cell: &Cell, d: usize, shift: u32) -> Cell {
        let mut out = zero_cell();
        for i in 0..d {
            out[i] = cell[i] >> shift;
        }
        out
    }

    /// The measure pooled to a coarser level (identity for n >= level).
    pub fn pooled(&self, n: i64) -> LatticeMeasure {
        let shift = self.pool_shift(n);
        if shift == 0 {
            return self.clone();
        }
        let mut cells: Vec<(Cell, f64)> = self
            .cells
            .iter()
            .map(|(c, w)| (Self::pooled_key(c, self.d, shift), *w))
            .collect();
        cells.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Cell, f64)> = Vec::with_capacity(cells.len());
        for (c, w) in cells {
            match merged.last_mut() {
                Some((lc, lw)) if *lc == c => *lw += w,
                _ => merged.push((c, w)),
            }
        }
        LatticeMeasure { d: self.d, level: n, cells: merged }
    }

    /// Shannon entropy (bits) with respect to the level-n dyadic partition.
    /// For n >= level the partition separates the atoms, so the value is the
    /// converged atomic entropy.
    pub fn entropy_bits(&self, n: i64) -> f64 {
        let shift = self.pool_shift(n);
        if shift == 0 {
            return entropy_of_weights(self.cells.iter().map(|(_, w)| *w));
        }
        // pooling is monotone per coordinate but not lexicographically, so
        // group via a sort of pooled keys
        let mut keys: Vec<(Cell, f64)> = self
            .cells
            .iter()
            .map(|(c, w)| (Self::pooled_key(c, self.d, shift), *w))
            .collect();
        keys.sort_by(|a, b| a.0.cmp(&b.0));
        let mut h = 0.0;
        let mut i = 0;
        while i < keys.len() {
            let mut j = i;
            let mut mass = 0.0;
            while j < keys.len() && keys[j].0 == keys[i].0 {
                mass += keys[j].1;
                j += 1;
            }
            if mass > 0.0 {
                h -= mass * mass.log2();
            }
            i = j;
        }
        h
    }

    /// Normalized scale-n entropy H_n = H(mu, D_n)/n.
    pub fn entropy_rate(&self, n: i64) -> f64 {
        assert!(n >= 1, "entropy rate needs n >= 1");
        self.entropy_bits(n) / n as f64
    }

    /// (H, H_n, H(D_n | D_m)): total bits at level n, bits per level, and the
    /// conditional entropy given the coarser level m (chain rule form).
    pub fn entropy_suite(&self, n: i64, m: Option<i64>) -> Result<(f64, f64, f64)> {
        if n < 1 {
            return Err(FelError::InvalidParameter("entropy level must be >= 1".into()));
        }
        if let Some(m) = m {
            if m > n {
                return Err(FelError::InvalidParameter(format!("coarse level {m} exceeds fine level {n}")));
            }
        }
        let h = self.entropy_bits(n);
        let h_cond = match m {
            Some(m) => h - self.entropy_bits(m),
            None => h,
        };
        Ok((h, h / n as f64, h_cond))
    }

    /// Conditional entropy computed by the partition formula
    /// sum_F mu(F) H(mu_F, D_n); equals entropy_bits(n) - entropy_bits(m)
    /// by the chain rule, and serves as its independent check.
    pub fn conditional_entropy_direct(&self, n: i64, m: i64) -> f64 {
        assert!(m <= n);
        let shift_m = self.pool_shift(m);
        let shift_n = self.pool_shift(n);
        let mut keyed: Vec<(Cell, Cell, f64)> = self
            .cells
            .iter()
            .map(|(c, w)| {
                (
                    Self::pooled_key(c, self.d, shift_m),
                    Self::pooled_key(c, self.d, shift_n),
                    *w,
                )
            })
            .collect();
        keyed.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut h = 0.0;
        let mut i = 0;
        while i < keyed.len() {
            let mut j = i;
            let mut coarse_mass = 0.0;
            while j < keyed.len() && keyed[j].0 == keyed[i].0 {
                coarse_mass += keyed[j].2;
                j += 1;
            }
            // entropy of the fine cells inside this coarse cell
            let mut k = i;
            while k < j {
                let mut l = k;
                let mut fine = 0.0;
                while l < j && keyed[l].1 == keyed[k].1 {
                    fine += keyed[l].2;
                    l += 1;
                }
                let p = fine / coarse_mass;
                if p > 0.0 {
                    h -= coarse_mass * p * p.log2();
                }
                k = l;
            }
            i = j;
        }
        h
    }

    /// Raw or rescaled component on the level-i cell containing the given
    /// key. The raw component is the normalized restriction at the same
    /// resolution; the rescaled one is pushed onto [0,1)^d at level L-i.
    pub fn component(&self, cell_at_i: &Cell, i: i64, rescaled: bool) -> Result<LatticeMeasure> {
        if i > self.level {
            return Err(FelError::InsufficientResolution { requested: i, resolution: self.level });
        }
        let shift = self.pool_shift(i);
        let mut cells: Vec<(Cell, f64)> = Vec::new();
        for (c, w) in &self.cells {
            if Self::pooled_key(c, self.d, shift) == *cell_at_i {
                cells.push((*c, *w));
            }
        }
        if cells.is_empty() {
            return Err(FelError::EmptyInput("component of a zero-mass cell"));
        }
        let mass: f64 = cells.iter().map(|(_, w)| w).sum();
        for (_, w) in cells.iter_mut() {
            *w /= mass;
        }
        if rescaled {
            for (c, _) in cells.iter_mut() {
                for k in 0..self.d {
                    c[k] -= cell_at_i[k] << shift;
                }
            }
            Ok(LatticeMeasure { d: self.d, level: self.level - i, cells })
        } else {
            Ok(LatticeMeasure { d: self.d, level: self.level, cells })
        }
    }

    /// All level-i components with their masses: (cell, mass, component).
    pub fn components_at_level(&self, i: i64, rescaled: bool) -> Vec<(Cell, f64, LatticeMeasure)> {
        let shift = self.pool_shift(i);
        let mut keyed: Vec<(Cell, usize)> = self
            .cells
            .iter()
            .enumerate()
            .map(|(idx, (c, _))| (Self::pooled_key(c, self.d, shift), idx))
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut out = Vec::new();
        let mut s = 0;
        while s < keyed.len() {
            let mut e = s;
            let mut mass = 0.0;
            while e < keyed.len() && keyed[e].0 == keyed[s].0 {
                mass += self.cells[keyed[e].1].1;
                e += 1;
            }
            let q = keyed[s].0;
            let mut cells: Vec<(Cell, f64)> = (s..e)
                .map(|k| {
                    let (mut c, w) = self.cells[keyed[k].1];
                    if rescaled {
                        for t in 0..self.d {
                            c[t] -= q[t] << shift;
                        }
                    }
                    (c, w / mass)
                })
                .collect();
            cells.sort_by(|a, b| a.0.cmp(&b.0));
            let level = if rescaled { self.level - i } else { self.level };
            out.push((q, mass, LatticeMeasure { d: self.d, level, cells }));
            s = e;
        }
        out
    }

    /// Exact component expectation: (1/|I|) sum_{i in I} sum_D mu(D) f(mu^D)
    /// over rescaled components. No sampling.
    pub fn component_expectation<F>(&self, levels: &[i64], f: F) -> f64
    where
        F: Fn(&LatticeMeasure, i64) -> f64,
    {
        if levels.is_empty() {
            return 0.0;
        }
        let mut total = 0.0;
        for &i in levels {
            for (_, mass, comp) in self.components_at_level(i, true) {
                total += mass * f(&comp, i);
            }
        }
        total / levels.len() as f64
    }

    /// Component probability of a predicate over rescaled components.
    pub fn component_probability<F>(&self, levels: &[i64], pred: F) -> f64
    where
        F: Fn(&LatticeMeasure, i64) -> bool,
    {
        self.component_expectation(levels, |c, i| if pred(c, i) { 1.0 } else { 0.0 })
    }

    /// Convolution on the integer lattice: (mu*nu)(c) = sum_{a+b=c} mu(a)nu(b).
    pub fn convolve(&self, other: &LatticeMeasure) -> Result<LatticeMeasure> {
        if self.d != other.d {
            return Err(FelError::DimensionMismatch(self.d, other.d));
        }
        if self.level != other.level {
            return Err(FelError::InvalidParameter(format!(
                "convolution needs equal resolutions ({} vs {}); pool the finer one first",
                self.level, other.level
            )));
        }
        let products = self.cells.len() as u64 * other.cells.len() as u64;
        if products > (1 << 34) {
            return Err(FelError::BudgetExceeded { needed: products, budget: 1 << 34 });
        }
        // chunked accumulate: sorted partial blocks merged in fixed order
        let chunk = (1usize << 22) / other.cells.len().max(1);
        let chunk = chunk.max(1);
        let mut acc: Vec<(Cell, f64)> = Vec::new();
        for block in self.cells.chunks(chunk) {
            let mut part: Vec<(Cell, f64)> = Vec::with_capacity(block.len() * other.cells.len());
            for (ca, wa) in block {
                for (cb, wb) in &other.cells {
                    let mut c = zero_cell();
                    for i in 0..self.d {
                        c[i] = ca[i] + cb[i];
                    }
                    part.push((c, wa * wb));
                }
            }
            part.sort_by(|a, b| a.0.cmp(&b.0));
            acc = merge_sum(&acc, &part);
        }
        LatticeMeasure::from_cells(self.d, self.level, acc)
    }

    /// k-fold self-convolution; k = 0 gives the point mass at the origin.
    /// Measures that are uniform on a contiguous axis-parallel range take a
    /// dense sliding-window path (exact, linear per fold), everything else
    /// goes through repeated squaring of the sparse convolution.
    pub fn self_convolve(&self, k: u32) -> Result<LatticeMeasure> {
        if k == 0 {
            return LatticeMeasure::from_cells(self.d, self.level, vec![(zero_cell(), 1.0)]);
        }
        if k == 1 {
            return Ok(self.clone());
        }
        if let Some((axis, lo, n)) = self.uniform_axis_range() {
            return Ok(self.window_self_convolve(k, axis, lo, n));
        }
        // binary exponentiation
        let mut base = self.clone();
        let mut acc: Option<LatticeMeasure> = None;
        let mut kk = k;
        loop {
            if kk & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.convolve(&base)?,
                });
            }
            kk >>= 1;
            if kk == 0 {
                break;
            }
            base = base.convolve(&base)?;
        }
        Ok(acc.unwrap())
    }

    /// Detect support of the form {c : c[axis] in [lo, lo+n), other coords
    /// fixed} with equal weights.
    fn uniform_axis_range(&self) -> Option<(usize, i64, usize)> {
        let n = self.cells.len();
        if n < 2 {
            return None;
        }
        let first = self.cells[0].0;
        let last = self.cells[n - 1].0;
        let mut axis = None;
        for i in 0..self.d {
            if first[i] != last[i] {
                if axis.is_some() {
                    return None;
                }
                axis = Some(i);
            }
        }
        let axis = axis?;
        if last[axis] - first[axis] != (n as i64 - 1) {
            return None;
        }
        let w0 = self.cells[0].1;
        for (idx, (c, w)) in self.cells.iter().enumerate() {
            if (w - w0).abs() > 1e-12 * w0 {
                return None;
            }
            for i in 0..self.d {
                let want = if i == axis { first[i] + idx as i64 } else { first[i] };
                if c[i] != want {
                    return None;
                }
            }
        }
        Some((axis, first[axis], n))
    }

    fn window_self_convolve(&self, k: u32, axis: usize, lo: i64, n: usize) -> LatticeMeasure {
        let k = k as usize;
        let total = k * (n - 1) + 1;
        let mut cur = vec![0.0f64; total];
        let w0 = 1.0 / n as f64;
        for v in cur.iter_mut().take(n) {
            *v = w0;
        }
        let mut prefix = vec![0.0f64; total + 1];
        for _ in 0..k - 1 {
            prefix[0] = 0.0;
            for i in 0..total {
                prefix[i + 1] = prefix[i] + cur[i];
            }
            for (i, v) in cur.iter_mut().enumerate() {
                let hi = prefix[(i + 1).min(total)];
                let lo_p = prefix[(i + 1).saturating_sub(n)];
                *v = (hi - lo_p) * w0;
            }
        }
        let base = self.cells[0].0;
        let mut cells = Vec::with_capacity(total);
        for (i, w) in cur.into_iter().enumerate() {
            if w > 0.0 {
                let mut c = zero_cell();
                for t in 0..self.d {
                    c[t] = base[t] * k as i64;
                }
                c[axis] = lo * k as i64 + i as i64;
                cells.push((c, w));
            }
        }
        // base coordinates were multiplied before overwriting the axis entry
        LatticeMeasure { d: self.d, level: self.level, cells }
    }

    /// Push forward through a similitude: each cell center is mapped and
    /// re-snapped at level `l_out`.
    pub fn pushforward(&self, g: &crate::similitude::Similitude, l_out: i64) -> Result<LatticeMeasure> {
        if g.dim() != self.d {
            return Err(FelError::DimensionMismatch(g.dim(), self.d));
        }
        let scale_out = (l_out as f64).exp2();
        let mut cells = Vec::with_capacity(self.cells.len());
        for (c, w) in &self.cells {
            let y = g.apply(&self.center_of(c));
            let mut nc = zero_cell();
            for i in 0..self.d {
                nc[i] = (y[i] * scale_out).floor() as i64;
            }
            cells.push((nc, *w));
        }
        LatticeMeasure::from_cells(self.d, l_out, cells)
    }

    /// Translate by whole cells (exact index shift).
    pub fn shifted(&self, delta: &[i64]) -> LatticeMeasure {
        let mut cells = self.cells.clone();
        for (c, _) in cells.iter_mut() {
            for i in 0..self.d {
                c[i] += delta[i];
            }
        }
        LatticeMeasure { d: self.d, level: self.level, cells }
    }

    /// Mean, covariance and eigenstructure of the cell-center atomization.
    pub fn mean_cov(&self) -> CovSummary {
        let d = self.d;
        let mut mean = DVector::zeros(d);
        for (c, w) in &self.cells {
            mean += self.center_of(c) * *w;
        }
        let mut sigma = DMatrix::zeros(d, d);
        for (c, w) in &self.cells {
            let x = self.center_of(c) - &mean;
            sigma += (&x * x.transpose()) * *w;
        }
        // symmetrize against roundoff
        sigma = (&sigma + sigma.transpose()) * 0.5;
        let eig = nalgebra::SymmetricEigen::new(sigma.clone());
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut eigenvectors = DMatrix::zeros(d, d);
        for (col, &i) in order.iter().enumerate() {
            let mut v = eig.eigenvectors.column(i).into_owned();
            // deterministic sign: largest-magnitude entry positive
            let mut pivot = 0;
            for r in 1..d {
                if v[r].abs() > v[pivot].abs() {
                    pivot = r;
                }
            }
            if v[pivot] < 0.0 {
                v = -v;
            }
            eigenvectors.set_column(col, &v);
        }
        CovSummary { mean, sigma, eigenvalues, eigenvectors }
    }

    /// Bounding box of cell indices (per used coordinate).
    pub fn index_bounds(&self) -> (Vec<i64>, Vec<i64>) {
        let mut lo = vec![i64::MAX; self.d];
        let mut hi = vec![i64::MIN; self.d];
        for (c, _) in &self.cells {
            for i in 0..self.d {
                lo[i] = lo[i].min(c[i]);
                hi[i] = hi[i].max(c[i]);
            }
        }
        (lo, hi)
    }

    /// Heaviest cell (ties broken by key order).
    pub fn heaviest_cell(&self) -> (Cell, f64) {
        let mut best = self.cells[0];
        for &(c, w) in &self.cells[1..] {
            if w > best.1 {
                best = (c, w);
            }
        }
        best
    }
}

fn entropy_of_weights<I: Iterator<Item = f64>>(weights: I) -> f64 {
    let mut h = 0.0;
    for w in weights {
        if w > 0.0 {
            h -= w * w.log2();
        }
    }
    h
}

/// Entropy (bits) of a probability vector.
pub fn entropy_of_vec(p: &[f64]) -> f64 {
    entropy_of_weights(p.iter().copied())
}

/// Merge two key-sorted runs, summing weights for equal keys.
fn merge_sum(a: &[(Cell, f64)], b: &[(Cell, f64)]) -> Vec<(Cell, f64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => x.0 <= y.0,
            (Some(_), None) => true,
            _ => false,
        };
        let (c, w) = if take_a {
            let v = a[i];
            i += 1;
            v
        } else {
            let v = b[j];
            j += 1;
            v
        };
        match out.last_mut() {
            Some((lc, lw)) if *lc == c => *lw += w,
            _ => out.push((c, w)),
        }
    }
    out
}

/// Serialized form: {d, L, cells: [[i1..id, w], ...]}.
#[derive(Debug, Serialize, Deserialize)]
pub struct LatticeMeasureRepr {
    pub d: usize,
    #[serde(rename = "L")]
    pub level: i64,
    pub cells: Vec<Vec<f64>>,
}

impl From<&LatticeMeasure> for LatticeMeasureRepr {
    fn from(m: &LatticeMeasure) -> Self {
        LatticeMeasureRepr {
            d: m.d,
            level: m.level,
            cells: m
                .cells
                .iter()
                .map(|(c, w)| {
                    let mut row: Vec<f64> = c[..m.d].iter().map(|&i| i as f64).collect();
                    row.push(*w);
                    row
                })
                .collect(),
        }
    }
}

impl TryFrom<LatticeMeasureRepr> for LatticeMeasure {
    type Error = FelError;
    fn try_from(r: LatticeMeasureRepr) -> Result<LatticeMeasure> {
        let mut cells = Vec::with_capacity(r.cells.len());
        for row in &r.cells {
            if row.len() != r.d + 1 {
                return Err(FelError::DimensionMismatch(row.len(), r.d + 1));
            }
            let mut c = zero_cell();
            for i in 0..r.d {
                c[i] = row[i] as i64;
            }
            cells.push((c, row[r.d]));
        }
        LatticeMeasure::from_cells(r.d, r.level, cells)
    }
}
