//! Structural predicates on lattice measures: concentration near subspace
//! translates, uniformity, saturation, the entropy Pluennecke-Ruzsa check,
//! covariance-driven concentration, and affine non-degeneracy.
//!
//! Concentration predicates use closed comparisons (distance <= eps, mass
//! >= 1 - eps) so the degenerate cases eps = 0 and V = R^d behave as the
//! definitions intend. All searches are deterministic.

use nalgebra::DVector;

use crate::error::{FelError, Result};
use crate::measure::LatticeMeasure;
use crate::subspace::{top_eigenspace, Subspace};

const DIST_TOL: f64 = 1e-12;

/// Projected support of a measure in the coordinates of a frame.
fn projected_points(mu: &LatticeMeasure, frame: &Subspace) -> Vec<(Vec<f64>, f64)> {
    mu.cells()
        .iter()
        .map(|(c, w)| {
            let y = frame.coords(&mu.center_of(c));
            (y.iter().copied().collect(), *w)
        })
        .collect()
}

fn ball_mass(pts: &[(Vec<f64>, f64)], c: &[f64], eps: f64) -> f64 {
    pts.iter()
        .filter(|(y, _)| {
            let d2: f64 = y.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
            d2.sqrt() <= eps + DIST_TOL
        })
        .map(|(_, w)| w)
        .sum()
}

/// Largest mass captured by a band |y - c| <= eps around some center c in the
/// complement coordinates, together with that center. Exact scan for
/// one-dimensional complements, point-candidate search with mean-shift
/// refinement otherwise (validated against grid oracles at desk scale).
pub fn best_translate(mu: &LatticeMeasure, v: &Subspace, eps: f64) -> (f64, DVector<f64>) {
    let d = mu.dim();
    let comp = v.complement();
    let q = comp.dim();
    if q == 0 {
        return (1.0, DVector::zeros(d));
    }
    let pts = projected_points(mu, &comp);
    let (mass, center) = if q == 1 {
        let mut ys: Vec<(f64, f64)> = pts.iter().map(|(y, w)| (y[0], *w)).collect();
        ys.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut best = (0.0f64, ys[0].0);
        let mut acc = 0.0;
        let mut lo = 0;
        for hi in 0..ys.len() {
            acc += ys[hi].1;
            while ys[hi].0 - ys[lo].0 > 2.0 * eps + DIST_TOL {
                acc -= ys[lo].1;
                lo += 1;
            }
            if acc > best.0 {
                best = (acc, 0.5 * (ys[lo].0 + ys[hi].0));
            }
        }
        (best.0, vec![best.1])
    } else {
        // candidate centers: projected supports (deterministically thinned),
        // plus the projected mean
        let mut cands: Vec<Vec<f64>> = Vec::new();
        let stride = (pts.len() / 512).max(1);
        for (i, (y, _)) in pts.iter().enumerate() {
            if i % stride == 0 {
                cands.push(y.clone());
            }
        }
        let mean = comp.coords(&mu.mean_cov().mean);
        cands.push(mean.iter().copied().collect());
        let mut best = (f64::MIN, cands[0].clone());
        for c in cands {
            let mut c = c;
            let mut m = ball_mass(&pts, &c, eps);
            // mean-shift refinement (golden-ratio style damping)
            for _ in 0..3 {
                let mut num = vec![0.0; q];
                let mut den = 0.0;
                for (y, w) in &pts {
                    let d2: f64 = y.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d2.sqrt() <= eps + DIST_TOL {
                        for (t, yt) in y.iter().enumerate() {
                            num[t] += w * yt;
                        }
                        den += w;
                    }
                }
                if den <= 0.0 {
                    break;
                }
                let shifted: Vec<f64> = num.iter().map(|x| x / den).collect();
                let m2 = ball_mass(&pts, &shifted, eps);
                if m2 > m {
                    m = m2;
                    c = shifted;
                } else {
                    break;
                }
            }
            if m > best.0 {
                best = (m, c);
            }
        }
        (best.0, best.1)
    };
    // lift the complement coordinates back to a translate vector in R^d
    let mut w = DVector::zeros(d);
    for (j, &cj) in center.iter().enumerate() {
        w += comp.frame().column(j) * cj;
    }
    (mass, w)
}

/// (V, eps)-concentration: some translate of V carries mass >= 1 - eps
/// within distance eps. Returns the witness translate.
pub fn is_concentrated(mu: &LatticeMeasure, v: &Subspace, eps: f64) -> (bool, DVector<f64>) {
    let (mass, w) = best_translate(mu, v, eps);
    (mass >= 1.0 - eps - DIST_TOL, w)
}

/// Smallest eps (within bisection tolerance) at which the measure is
/// (V, eps)-concentrated.
pub fn concentration_level(mu: &LatticeMeasure, v: &Subspace) -> f64 {
    if v.dim() == mu.dim() {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if is_concentrated(mu, v, mid).0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Normalized entropy of the orthogonal projection onto `target` at scale m
/// (dyadic cells in the target's own coordinates).
pub fn projection_entropy_rate(mu: &LatticeMeasure, target: &Subspace, m: i64) -> f64 {
    if target.dim() == 0 || m < 1 {
        return 0.0;
    }
    let pts = projected_points(mu, target);
    let scale = (m as f64).exp2();
    let mut keys: Vec<(Vec<i64>, f64)> = pts
        .iter()
        .map(|(y, w)| (y.iter().map(|&x| (x * scale).floor() as i64).collect(), *w))
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
    h / m as f64
}

/// Saturation slack: dim V + H_m(proj to V-perp) - H_m(mu). The measure is
/// (V, eps, m)-saturated iff the slack is <= eps.
pub fn saturation_slack(mu: &LatticeMeasure, v: &Subspace, m: i64) -> f64 {
    let h_m = mu.entropy_bits(m) / m as f64;
    let h_proj = projection_entropy_rate(mu, &v.complement(), m);
    v.dim() as f64 + h_proj - h_m
}

/// (V, eps, m)-saturation: H_m(mu) >= dim V + H_m(pi_{V-perp} mu) - eps.
pub fn is_saturated(mu: &LatticeMeasure, v: &Subspace, eps: f64, m: i64) -> bool {
    saturation_slack(mu, v, m) <= eps + DIST_TOL
}

/// (V, eps, m)-uniformity: (V, 2^-m)-concentrated with H_m > dim V - eps.
pub fn is_uniform(mu: &LatticeMeasure, v: &Subspace, eps: f64, m: i64) -> bool {
    let conc = is_concentrated(mu, v, (-(m as f64)).exp2()).0;
    conc && mu.entropy_bits(m) / m as f64 > v.dim() as f64 - eps - DIST_TOL
}

/// Concentration cascade thresholds 4^k eps^(1/2^k).
pub fn cascade4(eps: f64, k: usize) -> f64 {
    (2.0 * (k as f64)).exp2() * eps.powf(1.0 / (k as f64).exp2())
}

fn candidate_pool(mu: &LatticeMeasure, extra: &[Subspace]) -> Vec<Subspace> {
    let d = mu.dim();
    let cov = mu.mean_cov();
    let mut cands = crate::subspace::axis_subspaces(d);
    for r in 0..=d {
        cands.push(top_eigenspace(&cov, r));
    }
    cands.extend(extra.iter().cloned());
    // deterministic order: by dimension, then frame entries
    cands.sort_by(|a, b| {
        a.dim().cmp(&b.dim()).then_with(|| {
            let fa = a.frame().as_slice();
            let fb = b.frame().as_slice();
            fa.iter()
                .zip(fb)
                .map(|(x, y)| x.partial_cmp(y).unwrap())
                .find(|o| *o != std::cmp::Ordering::Equal)
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    cands
}

/// Minimal subspace (over eigen / axis / user candidates) on which the
/// measure concentrates at the cascade level for its dimension. Thresholds
/// are capped at `cap` (pass 1.0 for the uncapped contract, which requires
/// the cascade to be nondegenerate).
pub fn concentration_subspace_capped(
    mu: &LatticeMeasure,
    eps: f64,
    cap: f64,
    extra: &[Subspace],
) -> (Subspace, f64) {
    let d = mu.dim();
    for cand in candidate_pool(mu, extra) {
        let thr = cascade4(eps, d - cand.dim()).min(cap);
        if is_concentrated(mu, &cand, thr).0 {
            let achieved = concentration_level(mu, &cand);
            return (cand, achieved);
        }
    }
    (Subspace::full(d), 0.0)
}

/// Public contract: requires the cascade to stay below 1/2.
pub fn concentration_subspace(
    mu: &LatticeMeasure,
    eps: f64,
    extra: &[Subspace],
) -> Result<(Subspace, f64)> {
    let eps_d = cascade4(eps, mu.dim());
    if !(eps_d < 0.5) {
        return Err(FelError::CascadeDegenerate { eps_d });
    }
    Ok(concentration_subspace_capped(mu, eps, 1.0, extra))
}

/// Maximal subspace (over the candidate pool) on which the measure is
/// saturated at the log(m)/m cascade thresholds; returns the achieved slack.
pub fn saturation_subspace(
    mu: &LatticeMeasure,
    m: i64,
    c: f64,
    extra: &[Subspace],
) -> Result<(Subspace, f64)> {
    if m > mu.level() {
        return Err(FelError::InsufficientResolution { requested: m, resolution: mu.level() });
    }
    if m < 2 {
        return Err(FelError::InvalidParameter("saturation scale must be >= 2".into()));
    }
    let mut cands = candidate_pool(mu, extra);
    cands.reverse(); // descending dimension, deterministic within a dimension
    let logm = (m as f64).log2();
    for cand in cands {
        let k = cand.dim();
        let thr = if k == 0 { f64::INFINITY } else { c * (k as f64).exp2() * k as f64 * logm / m as f64 };
        if k == 0 || is_saturated(mu, &cand, thr, m) {
            let achieved = saturation_slack(mu, &cand, m).max(0.0);
            return Ok((cand, achieved));
        }
    }
    unreachable!("candidate pool always contains the zero subspace");
}

/// Report for the Kaimanovich-Vershik bound.
#[derive(Debug, Clone)]
pub struct KvReport {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    /// delta_j = H(mu * nu^{*(j+1)}) - H(mu * nu^{*j}) at full resolution.
    pub discrete_deltas: Vec<f64>,
    pub discrete_monotone: bool,
}

/// H_n(mu * nu^{*k}) <= H_n(mu) + k (H_n(mu * nu) - H_n(mu)) + C k/n, plus
/// the exact non-increasing delta sequence over the integer lattice.
pub fn kv_check(
    mu: &LatticeMeasure,
    nu: &LatticeMeasure,
    k: u32,
    n: i64,
    c_kv: f64,
) -> Result<KvReport> {
    if k < 1 {
        return Err(FelError::InvalidParameter("kv check needs k >= 1".into()));
    }
    let h_mu = mu.entropy_bits(n) / n as f64;
    let mut cur = mu.clone();
    let mut full_entropies = vec![mu.entropy_bits(mu.level())];
    for _ in 0..k {
        cur = cur.convolve(nu)?;
        full_entropies.push(cur.entropy_bits(cur.level()));
    }
    let lhs = cur.entropy_bits(n) / n as f64;
    let h_mu_nu = {
        let one = mu.convolve(nu)?;
        one.entropy_bits(n) / n as f64
    };
    let rhs = h_mu + k as f64 * (h_mu_nu - h_mu) + c_kv * k as f64 / n as f64;
    let discrete_deltas: Vec<f64> =
        full_entropies.windows(2).map(|w| w[1] - w[0]).collect();
    let discrete_monotone = discrete_deltas.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    Ok(KvReport { lhs, rhs, slack: rhs - lhs, discrete_deltas, discrete_monotone })
}

/// Covariance concentration: the top-r eigenspace concentrates the measure.
#[derive(Debug, Clone)]
pub struct CovConcReport {
    pub v: Subspace,
    /// eps = lambda_{r+1}^(1/3) as literally stated.
    pub eps_literal: f64,
    pub holds_literal: bool,
    /// eps = (sum_{i>r} lambda_i)^(1/3), the Chebyshev-exact form.
    pub eps_sum: f64,
    pub holds_sum: bool,
}

pub fn covariance_concentration_check(mu: &LatticeMeasure, r: usize) -> CovConcReport {
    let cov = mu.mean_cov();
    let d = mu.dim();
    let v = top_eigenspace(&cov, r);
    let eps_literal = cov.lambda(r + 1).max(0.0).powf(1.0 / 3.0);
    let tail: f64 = (r + 1..=d).map(|i| cov.lambda(i).max(0.0)).sum();
    let eps_sum = tail.powf(1.0 / 3.0);
    let holds_literal = is_concentrated(mu, &v, eps_literal).0;
    let holds_sum = is_concentrated(mu, &v, eps_sum).0;
    CovConcReport { v, eps_literal, holds_literal, eps_sum, holds_sum }
}

/// An affine candidate: base point plus direction subspace.
#[derive(Debug, Clone)]
pub struct AffineCandidate {
    pub base: DVector<f64>,
    pub directions: Subspace,
    pub mass: f64,
}

/// Report of the non-affinity scan.
#[derive(Debug, Clone)]
pub struct NonAffineReport {
    pub holds_over_candidates: bool,
    pub worst: AffineCandidate,
}

fn affine_tube_mass(mu: &LatticeMeasure, base: &DVector<f64>, dirs: &Subspace, sigma: f64) -> f64 {
    mu.cells()
        .iter()
        .map(|(c, w)| {
            let x = mu.center_of(c) - base;
            let res = &x - dirs.project(&x);
            if res.norm() <= sigma + DIST_TOL {
                *w
            } else {
                0.0
            }
        })
        .sum()
}

/// One-sided (eps, sigma)-non-affinity check over a candidate family built
/// from affine spans of support tuples and eigen translates. Failure is
/// certified exactly; success is certified only over the family.
pub fn non_affine_check(mu: &LatticeMeasure, eps: f64, sigma: f64) -> NonAffineReport {
    let d = mu.dim();
    // deterministic thinning of the support for tuple candidates
    let mut picks: Vec<DVector<f64>> = Vec::new();
    let stride = (mu.support_len() / 48).max(1);
    for (i, (c, _)) in mu.cells().iter().enumerate() {
        if i % stride == 0 {
            picks.push(mu.center_of(c));
        }
    }
    let last = mu.cells().len() - 1;
    picks.push(mu.center_of(&mu.cells()[last].0));

    let mut worst = AffineCandidate {
        base: picks[0].clone(),
        directions: Subspace::zero(d),
        mass: affine_tube_mass(mu, &picks[0], &Subspace::zero(d), sigma),
    };
    let consider = |base: &DVector<f64>, dirs: &Subspace, worst: &mut AffineCandidate| {
        if dirs.dim() >= d {
            return;
        }
        let mass = affine_tube_mass(mu, base, dirs, sigma);
        if mass > worst.mass {
            *worst = AffineCandidate { base: base.clone(), directions: dirs.clone(), mass };
        }
    };

    // points
    for p in &picks {
        consider(p, &Subspace::zero(d), &mut worst);
    }
    // lines through pairs
    if d >= 2 {
        for i in 0..picks.len() {
            for j in i + 1..picks.len() {
                let dir = &picks[j] - &picks[i];
                if dir.norm() > 1e-12 {
                    consider(&picks[i], &Subspace::line(&dir), &mut worst);
                }
            }
        }
    }
    // planes through triples
    if d >= 3 {
        for i in 0..picks.len() {
            for j in i + 1..picks.len() {
                for k in j + 1..picks.len() {
                    let u = &picks[j] - &picks[i];
                    let v = &picks[k] - &picks[i];
                    let m = nalgebra::DMatrix::from_columns(&[u.clone(), v.clone()]);
                    let s = Subspace::span(&m);
                    if s.dim() == 2 {
                        consider(&picks[i], &s, &mut worst);
                    }
                }
            }
        }
    }
    // eigen translates through the mean
    let cov = mu.mean_cov();
    for r in 0..d {
        consider(&cov.mean, &top_eigenspace(&cov, r), &mut worst);
    }

    NonAffineReport { holds_over_candidates: worst.mass < eps, worst }
}

/// sigma-independence: every point is at distance >= sigma from the affine
/// span of the others.
pub fn sigma_independent(points: &[DVector<f64>], sigma: f64) -> bool {
    let n = points.len();
    for i in 0..n {
        let others: Vec<&DVector<f64>> = (0..n).filter(|&j| j != i).map(|j| &points[j]).collect();
        if others.is_empty() {
            continue;
        }
        let base = others[0];
        let m = nalgebra::DMatrix::from_fn(base.len(), others.len() - 1, |r, c| others[c + 1][r] - base[r]);
        let dirs = Subspace::span(&m);
        let x = &points[i] - base;
        let res = &x - dirs.project(&x);
        if res.norm() < sigma {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Cell, MAX_DIM};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn vx(xs: &[f64]) -> DVector<f64> {
        DVector::from_vec(xs.to_vec())
    }

    fn uniform_square(l: i64) -> LatticeMeasure {
        let n = 1i64 << l;
        let mut cells: Vec<(Cell, f64)> = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let mut c = [0i64; MAX_DIM];
                c[0] = i;
                c[1] = j;
                cells.push((c, 1.0));
            }
        }
        LatticeMeasure::from_cells(2, l, cells).unwrap()
    }

    #[test]
    fn concentration_examples() {
        let mu = uniform_square(5);
        // V = R^d: always concentrated
        assert!(is_concentrated(&mu, &Subspace::full(2), 1e-9).0);
        // a point mass concentrates on {0} with witness near the point
        let delta = LatticeMeasure::dirac(&vx(&[0.3, 0.8]), 12).unwrap();
        let (ok, w) = is_concentrated(&delta, &Subspace::zero(2), 1e-3);
        assert!(ok);
        assert!((w - vx(&[0.3, 0.8])).norm() < 1e-3);
        // uniform on the square is NOT (e1, 0.1)-concentrated: the best slab
        // of width 0.2 carries about 0.2 of the mass (exact lattice sum)
        let mu8 = uniform_square(8);
        let (ok, _) = is_concentrated(&mu8, &Subspace::axes(2, &[0]), 0.1);
        assert!(!ok);
        let (mass, _) = best_translate(&mu8, &Subspace::axes(2, &[0]), 0.1);
        assert!((mass - 0.2).abs() < 0.01, "slab mass {mass}");
    }

    #[test]
    fn uniformity_examples() {
        let m = 5;
        let mu = uniform_square(m);
        assert!(is_uniform(&mu, &Subspace::full(2), 1e-6, m));
        let delta = LatticeMeasure::dirac(&vx(&[0.0, 0.0]), 12).unwrap();
        assert!(is_uniform(&delta, &Subspace::zero(2), 0.1, 8));
        assert!(!is_uniform(&delta, &Subspace::axes(2, &[0]), 0.5, 8));
    }

    #[test]
    fn saturation_examples() {
        let m = 5;
        let mu = uniform_square(m);
        // V = {0}: everything is saturated
        let delta = LatticeMeasure::dirac(&vx(&[0.2, 0.2]), 12).unwrap();
        assert!(is_saturated(&delta, &Subspace::zero(2), 1e-9, 8));
        assert!(is_saturated(&mu, &Subspace::zero(2), 1e-9, m));
        // uniform on the square is (R^2, eps, m)-saturated
        assert!(is_saturated(&mu, &Subspace::full(2), 1e-9, m));
        // a point is not (line, 0.5, m)-saturated
        assert!(!is_saturated(&delta, &Subspace::axes(2, &[0]), 0.5, 8));
    }

    #[test]
    fn saturation_monotone_in_eps() {
        let mu = uniform_square(4);
        let v = Subspace::axes(2, &[0]);
        let s = saturation_slack(&mu, &v, 4);
        assert!(is_saturated(&mu, &v, s + 0.01, 4));
        assert!(!is_saturated(&mu, &v, s - 0.01, 4));
    }

    #[test]
    fn kv_examples() {
        // nu = delta_0: lhs = H_n(mu), slack = c k / n >= 0
        let mu = LatticeMeasure::from_atoms(
            &[(vx(&[0.1]), 0.3), (vx(&[0.5]), 0.3), (vx(&[0.9]), 0.4)],
            8,
        )
        .unwrap();
        let delta = LatticeMeasure::from_cells(1, 8, vec![([0, 0, 0, 0], 1.0)]).unwrap();
        let rep = kv_check(&mu, &delta, 2, 8, 4.0).unwrap();
        assert!((rep.lhs - mu.entropy_bits(8) / 8.0).abs() < 1e-12);
        assert!((rep.slack - 4.0 * 2.0 / 8.0).abs() < 1e-9);
        assert!(rep.discrete_monotone);

        // uniform{0,1} self-convolutions: exact group case on Z
        let u = LatticeMeasure::from_cells(1, 8, vec![([0, 0, 0, 0], 0.5), ([1, 0, 0, 0], 0.5)]).unwrap();
        let rep = kv_check(&u, &u, 2, 8, 4.0).unwrap();
        assert!(rep.discrete_monotone);
        assert!(rep.slack >= 0.0);
    }

    #[test]
    fn covariance_concentration_on_line() {
        // measure exactly on a horizontal line
        let atoms: Vec<(DVector<f64>, f64)> =
            (0..64).map(|i| (vx(&[(i as f64 + 0.5) / 64.0, 0.25]), 1.0)).collect();
        let mu = LatticeMeasure::from_atoms(&atoms, 10).unwrap();
        let rep = covariance_concentration_check(&mu, 1);
        assert!(rep.holds_literal && rep.holds_sum);
        assert!(rep.eps_literal < 1e-3);
        // r = d: trivial
        let rep = covariance_concentration_check(&mu, 2);
        assert!(rep.holds_literal);
    }

    #[test]
    fn chebyshev_form_always_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let d = rng.gen_range(1..=3);
            let natoms = rng.gen_range(2..60);
            let atoms: Vec<(DVector<f64>, f64)> = (0..natoms)
                .map(|_| (DVector::from_fn(d, |_, _| rng.gen_range(0.0..1.0)), rng.gen_range(0.01..1.0)))
                .collect();
            let mu = LatticeMeasure::from_atoms(&atoms, 9).unwrap();
            for r in 0..=d {
                let rep = covariance_concentration_check(&mu, r);
                assert!(rep.holds_sum, "Chebyshev form failed at d={d} r={r}");
            }
        }
    }

    #[test]
    fn concentration_subspace_examples() {
        // point mass -> {0}
        let delta = LatticeMeasure::dirac(&vx(&[0.4, 0.6]), 12).unwrap();
        let (v, ach) = concentration_subspace(&delta, 1e-8, &[]).unwrap();
        assert_eq!(v.dim(), 0);
        assert!(ach < 1e-3);

        // segment on the x-axis -> span e1
        let atoms: Vec<(DVector<f64>, f64)> =
            (0..256).map(|i| (vx(&[(i as f64 + 0.5) / 256.0, 0.5]), 1.0)).collect();
        let mu = LatticeMeasure::from_atoms(&atoms, 10).unwrap();
        let (v, _) = concentration_subspace(&mu, 1e-8, &[]).unwrap();
        assert_eq!(v.dim(), 1);
        assert!(v.frame().column(0)[0].abs() > 0.999);

        // uniform square: nothing proper concentrates it
        let mu = uniform_square(8);
        let (v, _) = concentration_subspace(&mu, 1e-8, &[]).unwrap();
        assert_eq!(v.dim(), 2);
    }

    #[test]
    fn cascade_degenerate_rejected() {
        let mu = uniform_square(4);
        assert!(matches!(
            concentration_subspace(&mu, 0.2, &[]),
            Err(FelError::CascadeDegenerate { .. })
        ));
    }

    #[test]
    fn saturation_subspace_examples() {
        // uniform on the square at full resolution: R^2
        let m = 5;
        let mu = uniform_square(m);
        let (v, _) = saturation_subspace(&mu, m, 0.25, &[]).unwrap();
        assert_eq!(v.dim(), 2);

        // point mass: {0}
        let delta = LatticeMeasure::dirac(&vx(&[0.1, 0.1]), 12).unwrap();
        let (v, _) = saturation_subspace(&delta, 6, 0.25, &[]).unwrap();
        assert_eq!(v.dim(), 0);

        // product of uniform-[0,1) with a point: span e1
        let atoms: Vec<(DVector<f64>, f64)> =
            (0..4096).map(|i| (vx(&[(i as f64 + 0.5) / 4096.0, 0.5]), 1.0)).collect();
        let mu = LatticeMeasure::from_atoms(&atoms, 12).unwrap();
        let (v, _) = saturation_subspace(&mu, 8, 0.25, &[]).unwrap();
        assert_eq!(v.dim(), 1);
        assert!(v.frame().column(0)[0].abs() > 0.999);
    }

    #[test]
    fn non_affine_examples() {
        // supported on a line: fails for that line
        let atoms: Vec<(DVector<f64>, f64)> =
            (0..128).map(|i| (vx(&[(i as f64 + 0.5) / 128.0, 0.3]), 1.0)).collect();
        let mu = LatticeMeasure::from_atoms(&atoms, 9).unwrap();
        let rep = non_affine_check(&mu, 0.5, 0.01);
        assert!(!rep.holds_over_candidates);
        assert!(rep.worst.mass > 0.99);

        // uniform square: any 0.05-tube of a line carries little mass
        let mu = uniform_square(8);
        let rep = non_affine_check(&mu, 0.3, 0.05);
        assert!(rep.holds_over_candidates, "worst mass {}", rep.worst.mass);
        assert!(rep.worst.mass < 0.2);
    }

    #[test]
    fn sigma_independent_triangle() {
        let pts = vec![vx(&[0.0, 0.0]), vx(&[1.0, 0.0]), vx(&[0.0, 1.0])];
        // smallest height is 1/sqrt(2) = 0.707
        assert!(sigma_independent(&pts, 0.4));
        assert!(sigma_independent(&pts, 0.70));
        assert!(!sigma_independent(&pts, 0.72));
    }

    #[test]
    fn concentration_monotone_in_eps() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..50 {
            let d = rng.gen_range(1..=2);
            let atoms: Vec<(DVector<f64>, f64)> = (0..rng.gen_range(2..40))
                .map(|_| (DVector::from_fn(d, |_, _| rng.gen_range(0.0..1.0)), rng.gen_range(0.05..1.0)))
                .collect();
            let mu = LatticeMeasure::from_atoms(&atoms, 8).unwrap();
            let v = if d == 1 { Subspace::zero(1) } else { Subspace::axes(2, &[0]) };
            let e1 = rng.gen_range(0.01..0.5);
            let e2 = e1 + rng.gen_range(0.01..0.5);
            if is_concentrated(&mu, &v, e1).0 {
                assert!(is_concentrated(&mu, &v, e2).0);
            }
        }
    }
}
