//! Iterated function systems of contracting similarities: composition
//! enumeration, the n-th generation measures on the group and on space,
//! similarity dimension, and entropy diagnostics over the group partitions.

use nalgebra::DVector;

use crate::error::{FelError, Result};
use crate::measure::LatticeMeasure;
use crate::rational::RatSimilitude;
use crate::similitude::Similitude;
use crate::simmeasure::SimMeasure;
use crate::subspace::Subspace;

/// A composition word over the alphabet (0-based indices).
pub type Word = Vec<u8>;

#[derive(Debug, Clone)]
pub struct IFSSystem {
    maps: Vec<Similitude>,
    probs: Vec<f64>,
    /// Present when every coefficient is rational; enables exact overlap
    /// detection and exact atom merging.
    rational: Option<Vec<RatSimilitude>>,
}

impl IFSSystem {
    pub fn new(maps: Vec<Similitude>, probs: Vec<f64>) -> Result<Self> {
        if maps.is_empty() {
            return Err(FelError::EmptyInput("IFS with no maps"));
        }
        if probs.len() != maps.len() {
            return Err(FelError::DimensionMismatch(probs.len(), maps.len()));
        }
        let d = maps[0].dim();
        if maps.iter().any(|g| g.dim() != d) {
            return Err(FelError::DimensionMismatch(d, 0));
        }
        for g in &maps {
            if !(g.t > 0.0) {
                return Err(FelError::InvalidParameter(format!(
                    "map with ratio {} is not a contraction",
                    g.ratio()
                )));
            }
        }
        if probs.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(FelError::InvalidParameter("probabilities must be positive".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(FelError::InvalidParameter(format!("probabilities sum to {total}")));
        }
        Ok(IFSSystem { maps, probs, rational: None })
    }

    /// Equip the system with exact rational coefficients (must match the
    /// float maps in order).
    pub fn with_rational(mut self, rational: Vec<RatSimilitude>) -> Result<Self> {
        if rational.len() != self.maps.len() {
            return Err(FelError::DimensionMismatch(rational.len(), self.maps.len()));
        }
        self.rational = Some(rational);
        Ok(self)
    }

    pub fn uniform_probs(maps: Vec<Similitude>) -> Result<Self> {
        let n = maps.len();
        Self::new(maps, vec![1.0 / n as f64; n])
    }

    pub fn maps(&self) -> &[Similitude] {
        &self.maps
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn rational(&self) -> Option<&[RatSimilitude]> {
        self.rational.as_deref()
    }

    pub fn alphabet_len(&self) -> usize {
        self.maps.len()
    }

    pub fn dim(&self) -> usize {
        self.maps[0].dim()
    }

    pub fn word_count(&self, n: u32) -> u64 {
        (self.alphabet_len() as u64).saturating_pow(n)
    }

    pub fn check_budget(&self, n: u32, budget: u64) -> Result<()> {
        let needed = self.word_count(n);
        if needed > budget {
            return Err(FelError::BudgetExceeded { needed, budget });
        }
        Ok(())
    }

    /// Similarity dimension of the attractor: the unique s >= 0 with
    /// sum r_i^s = 1, found by bisection on the strictly decreasing map.
    pub fn sdim_set(&self) -> f64 {
        let f = |s: f64| -> f64 { self.maps.iter().map(|g| g.ratio().powf(s)).sum::<f64>() };
        if self.alphabet_len() == 1 {
            return 0.0;
        }
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        while f(hi) > 1.0 {
            hi *= 2.0;
            if hi > 1e6 {
                break;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Similarity dimension of the measure: (sum p log p)/(sum p log r).
    pub fn sdim_measure(&self) -> f64 {
        let num: f64 = self.probs.iter().map(|&p| p * p.log2()).sum();
        let den: f64 =
            self.maps.iter().zip(&self.probs).map(|(g, &p)| p * g.ratio().log2()).sum();
        num / den
    }

    /// Geometric mean contraction r = prod r_i^{p_i}.
    pub fn mean_contraction(&self) -> f64 {
        let log_r: f64 = self.maps.iter().zip(&self.probs).map(|(g, &p)| -p * g.t).sum();
        log_r.exp2()
    }

    /// n' = [n log2(1/r)], the dyadic level at which 2^{-n'} ~ r^n.
    pub fn n_prime(&self, n: u32) -> i64 {
        let per_level: f64 = self.maps.iter().zip(&self.probs).map(|(g, &p)| p * g.t).sum();
        (n as f64 * per_level).floor() as i64
    }

    /// Depth-first streaming enumeration of all length-n compositions with
    /// their weights. The callback receives (word, composition, weight).
    pub fn compositions<F>(&self, n: u32, budget: u64, mut f: F) -> Result<()>
    where
        F: FnMut(&[u8], &Similitude, f64),
    {
        self.check_budget(n, budget)?;
        let mut word: Vec<u8> = Vec::with_capacity(n as usize);
        let mut stack: Vec<(Similitude, f64)> =
            vec![(Similitude::identity(self.dim()), 1.0)];
        self.dfs(n, &mut word, &mut stack, &mut f)?;
        Ok(())
    }

    fn dfs<F>(
        &self,
        n: u32,
        word: &mut Vec<u8>,
        stack: &mut Vec<(Similitude, f64)>,
        f: &mut F,
    ) -> Result<()>
    where
        F: FnMut(&[u8], &Similitude, f64),
    {
        if word.len() == n as usize {
            let (g, w) = stack.last().unwrap();
            f(word, g, *w);
            return Ok(());
        }
        for i in 0..self.alphabet_len() {
            let (g, w) = stack.last().unwrap();
            let next = g.compose(&self.maps[i])?;
            let nw = w * self.probs[i];
            word.push(i as u8);
            stack.push((next, nw));
            self.dfs(n, word, stack, f)?;
            stack.pop();
            word.pop();
        }
        Ok(())
    }

    /// Rational compositions (only when rational coefficients are present).
    pub fn rational_compositions(
        &self,
        n: u32,
        budget: u64,
    ) -> Result<Option<Vec<(Word, RatSimilitude, f64)>>> {
        let rats = match &self.rational {
            Some(r) => r,
            None => return Ok(None),
        };
        self.check_budget(n, budget)?;
        let mut out = Vec::with_capacity(self.word_count(n) as usize);
        let mut word: Vec<u8> = Vec::new();
        fn rec(
            rats: &[RatSimilitude],
            probs: &[f64],
            n: u32,
            cur: &RatSimilitude,
            w: f64,
            word: &mut Vec<u8>,
            out: &mut Vec<(Word, RatSimilitude, f64)>,
        ) {
            if word.len() == n as usize {
                out.push((word.clone(), cur.clone(), w));
                return;
            }
            for i in 0..rats.len() {
                let next = cur.compose(&rats[i]);
                word.push(i as u8);
                rec(rats, probs, n, &next, w * probs[i], word, out);
                word.pop();
            }
        }
        let d = self.dim();
        let id = {
            use crate::rational::rat;
            let mut u = vec![rat(0, 1); d * d];
            for i in 0..d {
                u[i * d + i] = rat(1, 1);
            }
            RatSimilitude { r: rat(1, 1), u, a: vec![rat(0, 1); d] }
        };
        rec(rats, &self.probs, n, &id, 1.0, &mut word, &mut out);
        Ok(Some(out))
    }

    /// nu^(n): the weighted compositions as a measure on G. In exact mode
    /// equal maps are merged rationally; otherwise float-equal atoms merge.
    pub fn nu_n(&self, n: u32, budget: u64) -> Result<SimMeasure> {
        if let Some(rats) = self.rational_compositions(n, budget)? {
            use std::collections::HashMap;
            let mut merged: HashMap<RatSimilitude, f64> = HashMap::new();
            let mut order: Vec<RatSimilitude> = Vec::new();
            for (_, g, w) in rats {
                if let Some(v) = merged.get_mut(&g) {
                    *v += w;
                } else {
                    merged.insert(g.clone(), w);
                    order.push(g);
                }
            }
            let atoms: Vec<(Similitude, f64)> =
                order.into_iter().map(|g| (g.to_float(), merged[&g])).collect();
            return SimMeasure::new(atoms);
        }
        let mut atoms = Vec::with_capacity(self.word_count(n) as usize);
        self.compositions(n, budget, |_, g, w| atoms.push((g.clone(), w)))?;
        SimMeasure::new(atoms)
    }

    /// Default base point: the fixed point of the first map.
    pub fn base_point(&self) -> DVector<f64> {
        self.maps[0].fixed_point().unwrap_or_else(|_| DVector::zeros(self.dim()))
    }

    /// nu~^(n): the n-th generation approximation sum p_w delta_{phi_w(x)}
    /// snapped at level l_out.
    pub fn nu_tilde(
        &self,
        n: u32,
        base: Option<&DVector<f64>>,
        l_out: i64,
        budget: u64,
    ) -> Result<LatticeMeasure> {
        let x = match base {
            Some(x) => x.clone(),
            None => self.base_point(),
        };
        let mut atoms: Vec<(DVector<f64>, f64)> =
            Vec::with_capacity(self.word_count(n) as usize);
        self.compositions(n, budget, |_, g, w| atoms.push((g.apply(&x), w)))?;
        LatticeMeasure::from_atoms(&atoms, l_out)
    }

    /// Entropy-dimension estimate (1/n') H(nu~^(n), D_{n'}).
    pub fn dim_estimate(&self, n: u32, budget: u64) -> Result<f64> {
        let np = self.n_prime(n).max(1);
        let mu = self.nu_tilde(n, None, np + 4, budget)?;
        Ok(mu.entropy_bits(np) / np as f64)
    }

    /// The three group-partition diagnostics at depth n:
    /// a = (1/n') H(nu^(n), E_{n'}),
    /// b = (1/n') H(nu^(n), D_{qn'} | E_{n'}),
    /// c = (1/n') H(nu~^(n), D_{n'}).
    pub fn entropy_diagnostics(&self, n: u32, q: f64, budget: u64) -> Result<Diagnostics> {
        if !(q > 1.0) {
            return Err(FelError::InvalidParameter("diagnostics need q > 1".into()));
        }
        let np = self.n_prime(n).max(1);
        let qn = (q * np as f64).floor() as i64;
        let nu = self.nu_n(n, budget)?;
        let h_e = nu.entropy_translation(np);
        let h_cond = nu.entropy_conditional(qn, np);
        let mu = self.nu_tilde(n, None, np + 4, budget)?;
        let h_space = mu.entropy_bits(np);
        Ok(Diagnostics {
            n,
            n_prime: np,
            a: h_e / np as f64,
            b: h_cond / np as f64,
            c: h_space / np as f64,
        })
    }

    /// Finite-scale projection / fiber entropy averages for the foliation by
    /// translates of V. The measure is realized as nu~ at the deepest depth
    /// whose natural scale resolves level n + p (subject to the budget).
    pub fn slice_entropy(
        &self,
        v: &Subspace,
        n: i64,
        p: i64,
        budget: u64,
    ) -> Result<SliceEntropy> {
        if v.ambient_dim() != self.dim() {
            return Err(FelError::DimensionMismatch(v.ambient_dim(), self.dim()));
        }
        let mut depth = 1u32;
        while self.n_prime(depth + 1) <= n + p + 2
            && self.word_count(depth + 1) <= budget
        {
            depth += 1;
        }
        let l = self.n_prime(depth).max(n + p);
        let mu = self.nu_tilde(depth, None, l, budget)?;
        let pi = v.complement();
        let mut proj_sum = 0.0;
        let mut cond_sum = 0.0;
        for i in 0..=n {
            for (_cell, mass, comp) in mu.components_at_level(i, false) {
                let (hp, hj) = projection_and_joint_entropy(&comp, &pi, i + p);
                proj_sum += mass * hp / p as f64;
                cond_sum += mass * (hj - hp) / p as f64;
            }
        }
        let count = (n + 1) as f64;
        Ok(SliceEntropy {
            depth,
            proj_avg: proj_sum / count,
            cond_avg: cond_sum / count,
        })
    }
}

/// H(mu, pi^{-1} D_k) and H(mu, D_k v pi^{-1} D_k) for the projection onto
/// the given frame, at dyadic level k.
fn projection_and_joint_entropy(mu: &LatticeMeasure, pi: &Subspace, k: i64) -> (f64, f64) {
    let scale = (k as f64).exp2();
    let shift = (mu.level() - k).clamp(0, 63) as u32;
    let mut keys: Vec<(Vec<i64>, Vec<i64>, f64)> = mu
        .cells()
        .iter()
        .map(|(c, w)| {
            let y = pi.coords(&mu.center_of(c));
            let pk: Vec<i64> = y.iter().map(|&x| (x * scale).floor() as i64).collect();
            let fk: Vec<i64> = c[..mu.dim()].iter().map(|&x| x >> shift).collect();
            (pk, fk, *w)
        })
        .collect();
    keys.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
    let mut h_proj = 0.0;
    let mut h_joint = 0.0;
    let mut i = 0;
    while i < keys.len() {
        let mut j = i;
        let mut mass = 0.0;
        while j < keys.len() && keys[j].0 == keys[i].0 {
            mass += keys[j].2;
            j += 1;
        }
        if mass > 0.0 {
            h_proj -= mass * mass.log2();
        }
        let mut a = i;
        while a < j {
            let mut b = a;
            let mut fine = 0.0;
            while b < j && keys[b].1 == keys[a].1 {
                fine += keys[b].2;
                b += 1;
            }
            if fine > 0.0 {
                h_joint -= fine * fine.log2();
            }
            a = b;
        }
        i = j;
    }
    (h_proj, h_joint)
}

#[derive(Debug, Clone, Copy)]
pub struct Diagnostics {
    pub n: u32,
    pub n_prime: i64,
    /// Translation-partition entropy rate; converges to the dimension.
    pub a: f64,
    /// Conditional rate over the full refinement; small iff the excess
    /// entropy emerges super-linearly (the overlap diagnostic).
    pub b: f64,
    /// Spatial entropy rate of the generation measure.
    pub c: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SliceEntropy {
    pub depth: u32,
    pub proj_avg: f64,
    pub cond_avg: f64,
}

impl SliceEntropy {
    pub fn total(&self) -> f64 {
        self.proj_avg + self.cond_avg
    }
}
