//! Finitely supported probability measures on the similarity group, their
//! dyadic-partition entropies, and the action on lattice measures.

use nalgebra::DVector;

use crate::error::{FelError, Result};
use crate::measure::LatticeMeasure;
use crate::similitude::{dyadic_cells_g, GCellId, Similitude};

/// Weighted atoms on G. Exactly-equal atoms are merged at construction
/// (float equality; rational paths merge upstream).
#[derive(Debug, Clone)]
pub struct SimMeasure {
    atoms: Vec<(Similitude, f64)>,
}

impl SimMeasure {
    pub fn new(mut atoms: Vec<(Similitude, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(FelError::EmptyInput("similitude measure"));
        }
        let d = atoms[0].0.dim();
        if atoms.iter().any(|(g, _)| g.dim() != d) {
            return Err(FelError::DimensionMismatch(d, 0));
        }
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(FelError::NonFinite("atom weights"));
        }
        for (_, w) in atoms.iter_mut() {
            *w /= total;
        }
        // merge exact duplicates, preserving first-seen order
        let mut merged: Vec<(Similitude, f64)> = Vec::with_capacity(atoms.len());
        'outer: for (g, w) in atoms {
            for (h, v) in merged.iter_mut() {
                if *h == g {
                    *v += w;
                    continue 'outer;
                }
            }
            merged.push((g, w));
        }
        Ok(SimMeasure { atoms: merged })
    }

    pub fn dirac(g: Similitude) -> Self {
        SimMeasure { atoms: vec![(g, 1.0)] }
    }

    pub fn atoms(&self) -> &[(Similitude, f64)] {
        &self.atoms
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].0.dim()
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn heaviest(&self) -> &Similitude {
        let mut best = 0;
        for i in 1..self.atoms.len() {
            if self.atoms[i].1 > self.atoms[best].1 {
                best = i;
            }
        }
        &self.atoms[best].0
    }

    pub fn all_isometries(&self, tol: f64) -> bool {
        self.atoms.iter().all(|(g, _)| g.is_isometry(tol))
    }

    /// Entropy over the full dyadic partition of G at level n.
    pub fn entropy_full(&self, n: i64) -> f64 {
        self.partition_entropy(n, true)
    }

    /// Entropy over the translation-part partition at level n.
    pub fn entropy_translation(&self, n: i64) -> f64 {
        self.partition_entropy(n, false)
    }

    /// H(nu, D_n^G | E_m^G): conditional entropy of the full level-n cells
    /// given translation-only cells at level m. When n >= m the full
    /// partition refines the translation one and this is a difference of
    /// joint and marginal entropies.
    pub fn entropy_conditional(&self, n: i64, m: i64) -> f64 {
        let mut keyed: Vec<(GCellId, GCellId, f64)> = self
            .atoms
            .iter()
            .map(|(g, w)| {
                let (full, _) = dyadic_cells_g(g, n);
                let (_, trans) = dyadic_cells_g(g, m);
                (trans, full, *w)
            })
            .collect();
        keyed.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
        let mut h = 0.0;
        let mut i = 0;
        while i < keyed.len() {
            let mut j = i;
            let mut coarse = 0.0;
            while j < keyed.len() && keyed[j].0 == keyed[i].0 {
                coarse += keyed[j].2;
                j += 1;
            }
            let mut k = i;
            while k < j {
                let mut l = k;
                let mut fine = 0.0;
                while l < j && keyed[l].1 == keyed[k].1 {
                    fine += keyed[l].2;
                    l += 1;
                }
                let p = fine / coarse;
                if p > 0.0 {
                    h -= coarse * p * p.log2();
                }
                k = l;
            }
            i = j;
        }
        h
    }

    fn partition_entropy(&self, n: i64, full: bool) -> f64 {
        let mut keys: Vec<(GCellId, f64)> = self
            .atoms
            .iter()
            .map(|(g, w)| {
                let (f, t) = dyadic_cells_g(g, n);
                (if full { f } else { t }, *w)
            })
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

    /// Raw components with respect to the full level-k partition of G:
    /// (cell, mass, conditional measure).
    pub fn components_at_level(&self, k: i64) -> Vec<(GCellId, f64, SimMeasure)> {
        let mut keyed: Vec<(GCellId, usize)> = self
            .atoms
            .iter()
            .enumerate()
            .map(|(i, (g, _))| (dyadic_cells_g(g, k).0, i))
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut out = Vec::new();
        let mut s = 0;
        while s < keyed.len() {
            let mut e = s;
            let mut mass = 0.0;
            while e < keyed.len() && keyed[e].0 == keyed[s].0 {
                mass += self.atoms[keyed[e].1].1;
                e += 1;
            }
            let atoms: Vec<(Similitude, f64)> = (s..e)
                .map(|i| {
                    let (g, w) = &self.atoms[keyed[i].1];
                    (g.clone(), w / mass)
                })
                .collect();
            out.push((keyed[s].0.clone(), mass, SimMeasure { atoms }));
            s = e;
        }
        out
    }

    /// nu.mu: the push-forward of nu x mu under (g, x) -> g(x).
    pub fn act_on(&self, mu: &LatticeMeasure, l_out: i64) -> Result<LatticeMeasure> {
        if self.dim() != mu.dim() {
            return Err(FelError::DimensionMismatch(self.dim(), mu.dim()));
        }
        let mut cells = Vec::new();
        for (g, w) in &self.atoms {
            let pushed = mu.pushforward(g, l_out)?;
            for (c, v) in pushed.cells() {
                cells.push((*c, v * w));
            }
        }
        LatticeMeasure::from_cells(mu.dim(), l_out, cells)
    }

    /// nu.x: orbit measure of a point.
    pub fn orbit(&self, x: &DVector<f64>, l_out: i64) -> Result<LatticeMeasure> {
        if x.len() != self.dim() {
            return Err(FelError::DimensionMismatch(x.len(), self.dim()));
        }
        let atoms: Vec<(DVector<f64>, f64)> =
            self.atoms.iter().map(|(g, w)| (g.apply(x), *w)).collect();
        LatticeMeasure::from_atoms(&atoms, l_out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rotation2;
    use crate::measure::Cell;
    use nalgebra::DMatrix;
    use std::f64::consts::PI;

    fn c1(i: i64) -> Cell {
        let mut c = [0i64; crate::measure::MAX_DIM];
        c[0] = i;
        c
    }

    #[test]
    fn single_atom_entropy_zero() {
        let nu = SimMeasure::dirac(Similitude::identity(2));
        assert_eq!(nu.entropy_full(8), 0.0);
        assert_eq!(nu.entropy_translation(8), 0.0);
    }

    #[test]
    fn two_cell_entropy_one_bit() {
        let a = Similitude::translation(DVector::from_vec(vec![0.0]));
        let b = Similitude::translation(DVector::from_vec(vec![0.9]));
        let nu = SimMeasure::new(vec![(a, 1.0), (b, 1.0)]).unwrap();
        assert!((nu.entropy_full(3) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_on_translation() {
        // same translation cell, distinct rotation cells: conditioning on
        // the translation part removes nothing
        let a = Similitude::new(0.0, rotation2(0.0), DVector::zeros(2)).unwrap();
        let b = Similitude::new(0.0, rotation2(1.3), DVector::zeros(2)).unwrap();
        let nu = SimMeasure::new(vec![(a, 1.0), (b, 1.0)]).unwrap();
        assert!((nu.entropy_conditional(4, 4) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn action_examples() {
        let mu = LatticeMeasure::from_cells(1, 4, vec![(c1(2), 0.5), (c1(9), 0.5)]).unwrap();
        // delta_identity acts trivially
        let nu = SimMeasure::dirac(Similitude::identity(1));
        let out = nu.act_on(&mu, 4).unwrap();
        assert_eq!(out.cells(), mu.cells());

        // half/half rotations by 0 and pi move (1,0) to +-(1,0)
        let r0 = Similitude::new(0.0, rotation2(0.0), DVector::zeros(2)).unwrap();
        let rpi = Similitude::new(0.0, rotation2(PI), DVector::zeros(2)).unwrap();
        let nu = SimMeasure::new(vec![(r0, 1.0), (rpi, 1.0)]).unwrap();
        let orbit = nu.orbit(&DVector::from_vec(vec![1.0, 0.0]), 6).unwrap();
        assert_eq!(orbit.support_len(), 2);
        assert!((orbit.cells()[0].1 - 0.5).abs() < 1e-15);

        // delta_g acts as pushforward by g
        let g = Similitude::homothety(0.5, DVector::from_vec(vec![0.25]));
        let nu = SimMeasure::dirac(g.clone());
        let a = nu.act_on(&mu, 6).unwrap();
        let b = mu.pushforward(&g, 6).unwrap();
        assert_eq!(a.cells(), b.cells());
    }

    #[test]
    fn merges_exact_duplicates() {
        let g = Similitude::homothety(0.5, DVector::from_vec(vec![0.0]));
        let nu = SimMeasure::new(vec![(g.clone(), 0.5), (g, 0.5)]).unwrap();
        assert_eq!(nu.atom_count(), 1);
    }

    #[test]
    fn rotation_measure_has_full_entropy() {
        let atoms: Vec<(Similitude, f64)> = (0..64)
            .map(|j| {
                let theta = 2.0 * PI * j as f64 / 64.0;
                (Similitude::new(0.0, rotation2(theta), DVector::zeros(2)).unwrap(), 1.0)
            })
            .collect();
        let nu = SimMeasure::new(atoms).unwrap();
        // at a fine enough level all 64 rotations separate
        assert!((nu.entropy_full(10) - 6.0).abs() < 1e-12);
        // translation parts coincide
        assert_eq!(nu.entropy_translation(10), 0.0);
    }
}
