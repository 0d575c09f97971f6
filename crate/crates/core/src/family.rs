//! Parametrized IFS families: the pairwise translation-difference map, its
//! finite-difference rank, exceptional-parameter covers, and grid scans.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{FelError, Result};
use crate::ifs::{IFSSystem, Word};
use crate::named;
use crate::similitude::Similitude;

/// Registered families only; parameters are points of an axis-aligned box.
#[derive(Debug, Clone)]
pub enum ParamFamily {
    /// {beta x, gamma x + 1}; parameters (beta, gamma).
    Bernoulli { domain: Vec<(f64, f64)> },
    /// Rotated fat gasket; one parameter lambda.
    FatSierpinski { domain: Vec<(f64, f64)> },
    /// Fixed orthogonal parts and ratios; parameters are all translation
    /// coordinates, in map-major order.
    Translation { us: Vec<DMatrix<f64>>, rs: Vec<f64>, domain: Vec<(f64, f64)> },
    /// Coefficient-wise interpolation of ratios and translations between two
    /// systems sharing orthogonal parts; one parameter in [0,1].
    Lerp { a: Box<IFSSystem>, b: Box<IFSSystem>, domain: Vec<(f64, f64)> },
}

impl ParamFamily {
    pub fn bernoulli(beta: (f64, f64), gamma: (f64, f64)) -> Self {
        ParamFamily::Bernoulli { domain: vec![beta, gamma] }
    }

    pub fn fat_sierpinski(lo: f64, hi: f64) -> Self {
        ParamFamily::FatSierpinski { domain: vec![(lo, hi)] }
    }

    pub fn translation(us: Vec<DMatrix<f64>>, rs: Vec<f64>, lo: f64, hi: f64) -> Self {
        let d = us[0].nrows();
        let m = d * us.len();
        ParamFamily::Translation { us, rs, domain: vec![(lo, hi); m] }
    }

    pub fn lerp(a: IFSSystem, b: IFSSystem) -> Result<Self> {
        if a.alphabet_len() != b.alphabet_len() || a.dim() != b.dim() {
            return Err(FelError::DimensionMismatch(a.alphabet_len(), b.alphabet_len()));
        }
        Ok(ParamFamily::Lerp { a: Box::new(a), b: Box::new(b), domain: vec![(0.0, 1.0)] })
    }

    /// Parameter dimension m.
    pub fn param_dim(&self) -> usize {
        self.domain().len()
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        match self {
            ParamFamily::Bernoulli { domain } => domain,
            ParamFamily::FatSierpinski { domain } => domain,
            ParamFamily::Translation { domain, .. } => domain,
            ParamFamily::Lerp { domain, .. } => domain,
        }
    }

    pub fn contains(&self, t: &[f64]) -> bool {
        t.len() == self.param_dim()
            && t.iter().zip(self.domain()).all(|(&x, &(lo, hi))| x >= lo && x <= hi)
    }

    pub fn eval(&self, t: &[f64]) -> Result<IFSSystem> {
        if t.len() != self.param_dim() {
            return Err(FelError::DimensionMismatch(t.len(), self.param_dim()));
        }
        match self {
            ParamFamily::Bernoulli { .. } => named::bernoulli(t[0], t[1]),
            ParamFamily::FatSierpinski { .. } => named::fat_sierpinski(t[0]),
            ParamFamily::Translation { us, rs, .. } => {
                let d = us[0].nrows();
                let translations: Vec<DVector<f64>> = (0..us.len())
                    .map(|i| DVector::from_fn(d, |r, _| t[i * d + r]))
                    .collect();
                named::translation_system(us, rs, &translations)
            }
            ParamFamily::Lerp { a, b, .. } => {
                let s = t[0];
                let maps: Vec<Similitude> = a
                    .maps()
                    .iter()
                    .zip(b.maps())
                    .map(|(ga, gb)| {
                        let r = (1.0 - s) * ga.ratio() + s * gb.ratio();
                        let av = ga.a.clone() * (1.0 - s) + gb.a.clone() * s;
                        Similitude::from_ratio(r, ga.u.clone(), av)
                    })
                    .collect::<Result<Vec<_>>>()?;
                IFSSystem::new(maps, a.probs().to_vec())
            }
        }
    }
}

/// Delta_{i,j}(t) = phi_{i,t}(0) - phi_{j,t}(0) by exact composition.
pub fn delta_ij_t(family: &ParamFamily, i: &Word, j: &Word, t: &[f64]) -> Result<DVector<f64>> {
    if i.len() != j.len() {
        return Err(FelError::InvalidParameter("delta_ij needs equal-length words".into()));
    }
    if !family.contains(t) {
        return Err(FelError::InvalidParameter("parameter outside the family domain".into()));
    }
    let sys = family.eval(t)?;
    let zero = DVector::zeros(sys.dim());
    Ok(apply_word(&sys, i, &zero)? - apply_word(&sys, j, &zero)?)
}

fn apply_word(sys: &IFSSystem, w: &Word, x: &DVector<f64>) -> Result<DVector<f64>> {
    let mut g = Similitude::identity(sys.dim());
    for &c in w {
        let idx = c as usize;
        if idx >= sys.alphabet_len() {
            return Err(FelError::InvalidParameter("word symbol out of range".into()));
        }
        g = g.compose(&sys.maps()[idx])?;
    }
    Ok(g.apply(x))
}

/// Central finite-difference Jacobian of Delta_{i,j} at t, with the rank
/// decided by the singular-value threshold tol * sigma_max.
pub fn jacobian_rank(
    family: &ParamFamily,
    i: &Word,
    j: &Word,
    t: &[f64],
    h: f64,
    tol: f64,
) -> Result<(usize, Vec<f64>)> {
    let m = family.param_dim();
    for (axis, &(lo, hi)) in family.domain().iter().enumerate() {
        if t[axis] - h < lo || t[axis] + h > hi {
            return Err(FelError::InvalidParameter(format!(
                "parameter axis {axis} within {h} of the boundary"
            )));
        }
    }
    let d = family.eval(t)?.dim();
    let mut jac = DMatrix::zeros(d, m);
    for axis in 0..m {
        let mut tp = t.to_vec();
        let mut tm = t.to_vec();
        tp[axis] += h;
        tm[axis] -= h;
        let dp = delta_ij_t(family, i, j, &tp)?;
        let dm = delta_ij_t(family, i, j, &tm)?;
        jac.set_column(axis, &((dp - dm) / (2.0 * h)));
    }
    let svals = crate::linalg::singular_values(&jac);
    let smax = svals.first().copied().unwrap_or(0.0);
    let rank = if smax <= 1e-300 {
        0
    } else {
        svals.iter().filter(|&&s| s > tol * smax).count()
    };
    Ok((rank, svals))
}

/// One grid cell of the exceptional-parameter scan.
#[derive(Debug, Clone)]
pub struct CoverCell {
    pub t: Vec<f64>,
    pub min_delta_inf: f64,
    pub hit: bool,
}

#[derive(Debug, Clone)]
pub struct CoverReport {
    pub n: u32,
    pub threshold: f64,
    pub cells: Vec<CoverCell>,
    pub hit_count: usize,
    /// |alphabet|^{2n} times the reference covering count (1/eps^n)^{m-r}.
    pub bound: f64,
}

/// Scan a parameter grid for cells where two length-n words come within
/// eps^n of each other in the translation part.
pub fn exceptional_cover(
    family: &ParamFamily,
    n: u32,
    eps: f64,
    grid_step: f64,
    budget: u64,
) -> Result<CoverReport> {
    let m = family.param_dim();
    let domain = family.domain().to_vec();
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(m);
    for &(lo, hi) in &domain {
        let mut pts = Vec::new();
        let mut x = lo + grid_step / 2.0;
        while x < hi {
            pts.push(x);
            x += grid_step;
        }
        if pts.is_empty() {
            pts.push(0.5 * (lo + hi));
        }
        axes.push(pts);
    }
    let mut grid: Vec<Vec<f64>> = vec![vec![]];
    for axis in &axes {
        let mut next = Vec::with_capacity(grid.len() * axis.len());
        for g in &grid {
            for &x in axis {
                let mut gg = g.clone();
                gg.push(x);
                next.push(gg);
            }
        }
        grid = next;
    }
    let probe = family.eval(&grid[0])?;
    probe.check_budget(n, budget)?;
    let word_count = probe.word_count(n);
    if word_count * word_count > budget.max(1 << 24) {
        return Err(FelError::BudgetExceeded { needed: word_count * word_count, budget });
    }
    let threshold = eps.powi(n as i32);

    let cells: Vec<CoverCell> = grid
        .par_iter()
        .map(|t| -> Result<CoverCell> {
            let sys = family.eval(t)?;
            let mut points: Vec<Vec<f64>> = Vec::with_capacity(word_count as usize);
            sys.compositions(n, budget, |_, g, _| {
                points.push(g.a.iter().copied().collect());
            })?;
            let mut min_inf = f64::INFINITY;
            for i in 0..points.len() {
                for j in i + 1..points.len() {
                    let m = points[i]
                        .iter()
                        .zip(&points[j])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0f64, f64::max);
                    if m < min_inf {
                        min_inf = m;
                    }
                }
            }
            Ok(CoverCell { t: t.clone(), min_delta_inf: min_inf, hit: min_inf < threshold })
        })
        .collect::<Result<Vec<_>>>()?;

    let hit_count = cells.iter().filter(|c| c.hit).count();
    let d = probe.dim();
    let r_ref = d.min(m);
    let bound = (probe.alphabet_len() as f64).powi(2 * n as i32)
        * (1.0 / threshold).powi((m - r_ref) as i32);
    Ok(CoverReport { n, threshold, cells, hit_count, bound })
}

/// Diagnostics a scan can request per grid point.
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    Sdim,
    SdimMeasure,
    DimEstimate { n: u32 },
    DeltaN { n: u32 },
    EntropyDiag { n: u32, q: f64 },
}

impl Diagnostic {
    pub fn columns(&self) -> Vec<String> {
        match self {
            Diagnostic::Sdim => vec!["sdim".into()],
            Diagnostic::SdimMeasure => vec!["sdim_measure".into()],
            Diagnostic::DimEstimate { n } => vec![format!("dim_estimate_n{n}")],
            Diagnostic::DeltaN { n } => vec![format!("delta_{n}"), format!("log2_delta_{n}_over_n")],
            Diagnostic::EntropyDiag { n, .. } => {
                vec![format!("diag_a_n{n}"), format!("diag_b_n{n}"), format!("diag_c_n{n}")]
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanRow {
    pub t: Vec<f64>,
    pub values: Vec<Option<f64>>,
    pub error: Option<String>,
}

/// Evaluate the requested diagnostics at every grid point; per-point
/// failures are recorded in the error column and the scan continues. Rows
/// come back in grid order regardless of thread count.
pub fn scan(
    family: &ParamFamily,
    grid: &[Vec<f64>],
    diagnostics: &[Diagnostic],
    budget: u64,
) -> Vec<ScanRow> {
    grid.par_iter()
        .map(|t| {
            let mut values = Vec::new();
            let mut error: Option<String> = None;
            match family.eval(t) {
                Ok(sys) => {
                    for diag in diagnostics {
                        let res: Result<Vec<f64>> = (|| match diag {
                            Diagnostic::Sdim => Ok(vec![sys.sdim_set()]),
                            Diagnostic::SdimMeasure => Ok(vec![sys.sdim_measure()]),
                            Diagnostic::DimEstimate { n } => {
                                Ok(vec![sys.dim_estimate(*n, budget)?])
                            }
                            Diagnostic::DeltaN { n } => {
                                let rep = crate::delta::delta_n(&sys, *n, budget)?;
                                let rate = if rep.delta > 0.0 {
                                    rep.delta.log2() / *n as f64
                                } else {
                                    f64::NEG_INFINITY
                                };
                                Ok(vec![rep.delta, rate])
                            }
                            Diagnostic::EntropyDiag { n, q } => {
                                let d = sys.entropy_diagnostics(*n, *q, budget)?;
                                Ok(vec![d.a, d.b, d.c])
                            }
                        })();
                        match res {
                            Ok(vs) => values.extend(vs.into_iter().map(Some)),
                            Err(e) => {
                                values.extend(diag.columns().iter().map(|_| None));
                                error.get_or_insert_with(|| e.to_string());
                            }
                        }
                    }
                }
                Err(e) => {
                    for diag in diagnostics {
                        values.extend(diag.columns().iter().map(|_| None));
                    }
                    error = Some(e.to_string());
                }
            }
            ScanRow { t: t.clone(), values, error }
        })
        .collect()
}

/// Cartesian grid over the family's domain at the given step.
pub fn domain_grid(family: &ParamFamily, step: f64) -> Vec<Vec<f64>> {
    let mut grid: Vec<Vec<f64>> = vec![vec![]];
    for &(lo, hi) in family.domain() {
        let mut pts = Vec::new();
        let mut x = lo;
        while x <= hi + 1e-12 {
            pts.push(x);
            x += step;
        }
        let mut next = Vec::new();
        for g in &grid {
            for &x in &pts {
                let mut gg = g.clone();
                gg.push(x);
                next.push(gg);
            }
        }
        grid = next;
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_ij_examples() {
        let fam = ParamFamily::bernoulli((0.3, 0.7), (0.3, 0.7));
        let t = vec![0.5, 0.5];
        // i = j gives zero
        let z = delta_ij_t(&fam, &vec![0, 1], &vec![0, 1], &t).unwrap();
        assert_eq!(z[0], 0.0);
        // first-symbol pair: phi_1(0) - phi_2(0) = 0 - 1 = -1
        let d = delta_ij_t(&fam, &vec![0], &vec![1], &t).unwrap();
        assert_eq!(d[0], -1.0);
        // words (2,1) vs (1,2) at (1/2, 1/2): 1 - 1/2 = 1/2
        let d = delta_ij_t(&fam, &vec![1, 0], &vec![0, 1], &t).unwrap();
        assert!((d[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn jacobian_rank_examples() {
        let fam = ParamFamily::bernoulli((0.3, 0.7), (0.3, 0.7));
        // constant difference: rank 0
        let (rank, _) = jacobian_rank(&fam, &vec![0], &vec![1], &[0.5, 0.5], 1e-5, 1e-6).unwrap();
        assert_eq!(rank, 0);
        // a genuinely parameter-dependent pair has rank >= 1 on the line
        let (rank, _) =
            jacobian_rank(&fam, &vec![1, 0], &vec![0, 1], &[0.5, 0.5], 1e-5, 1e-6).unwrap();
        assert_eq!(rank, 1);
    }

    #[test]
    fn jacobian_antisymmetric_in_words() {
        let fam = ParamFamily::bernoulli((0.3, 0.7), (0.3, 0.7));
        let t = vec![0.45, 0.6];
        let a = delta_ij_t(&fam, &vec![1, 0, 0], &vec![0, 1, 1], &t).unwrap();
        let b = delta_ij_t(&fam, &vec![0, 1, 1], &vec![1, 0, 0], &t).unwrap();
        assert!((a + b).norm() < 1e-15);
    }

    #[test]
    fn boundary_guard() {
        let fam = ParamFamily::bernoulli((0.3, 0.7), (0.3, 0.7));
        assert!(jacobian_rank(&fam, &vec![0], &vec![1], &[0.3, 0.5], 1e-3, 1e-6).is_err());
    }

    #[test]
    fn separated_family_cover_is_empty() {
        // cantor-like translation family far from overlap: no hits
        let fam = ParamFamily::Lerp {
            a: Box::new(crate::named::cantor3()),
            b: Box::new(crate::named::cantor3()),
            domain: vec![(0.0, 1.0)],
        };
        // min translation gap at depth 4 is (2/3) 3^{-3} = 0.0247 > 0.3^4
        let rep = exceptional_cover(&fam, 4, 0.3, 0.25, 1 << 20).unwrap();
        assert_eq!(rep.hit_count, 0);
    }

    #[test]
    fn overlap_cell_is_always_hit() {
        // interpolate between two copies of the overlapping system: every
        // parameter has an exact overlap, so every cell is hit
        let fam = ParamFamily::Lerp {
            a: Box::new(crate::named::dyadic_overlap()),
            b: Box::new(crate::named::dyadic_overlap()),
            domain: vec![(0.0, 1.0)],
        };
        for eps in [0.5f64, 0.25] {
            let rep = exceptional_cover(&fam, 3, eps, 0.5, 1 << 20).unwrap();
            assert_eq!(rep.hit_count, rep.cells.len());
        }
    }

    #[test]
    fn scan_rows_are_stable() {
        let fam = ParamFamily::fat_sierpinski(0.4, 0.5);
        let grid = vec![vec![0.4], vec![0.5]];
        let rows = scan(&fam, &grid, &[Diagnostic::Sdim], 1 << 20);
        assert_eq!(rows.len(), 2);
        let want0 = 3.0f64.log2() / (1.0f64 / 0.4).log2();
        assert!((rows[0].values[0].unwrap() - want0).abs() < 1e-12);
        assert!((rows[1].values[0].unwrap() - 3.0f64.log2()).abs() < 1e-12);
    }
}
