//! Linear subspaces of R^d: the Hausdorff-type metric on unit-ball
//! intersections, the chord angle, epsilon-neighborhood containment, and the
//! constructive engulfing / common-subspace selectors.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{FelError, Result};
use crate::linalg::orthonormalize;
use crate::measure::CovSummary;

/// Numerical slack for containment checks.
pub const SUB_TOL: f64 = 1e-9;

/// A linear subspace given by an orthonormal frame (d x k, k = 0 allowed).
#[derive(Debug, Clone)]
pub struct Subspace {
    d: usize,
    frame: DMatrix<f64>,
}

impl Subspace {
    pub fn zero(d: usize) -> Self {
        Subspace { d, frame: DMatrix::zeros(d, 0) }
    }

    pub fn full(d: usize) -> Self {
        Subspace { d, frame: DMatrix::identity(d, d) }
    }

    /// Span of the columns of `m` (orthonormalized, near-dependent columns
    /// dropped).
    pub fn span(m: &DMatrix<f64>) -> Self {
        let frame = orthonormalize(m, 1e-10);
        Subspace { d: m.nrows(), frame }
    }

    pub fn line(v: &DVector<f64>) -> Self {
        Subspace::span(&DMatrix::from_column_slice(v.len(), 1, v.as_slice()))
    }

    /// Span of the standard basis vectors with the given indices.
    pub fn axes(d: usize, idx: &[usize]) -> Self {
        let mut m = DMatrix::zeros(d, idx.len());
        for (j, &i) in idx.iter().enumerate() {
            m[(i, j)] = 1.0;
        }
        Subspace { d, frame: m }
    }

    pub fn from_frame(frame: DMatrix<f64>) -> Result<Self> {
        let d = frame.nrows();
        let k = frame.ncols();
        let gram = frame.transpose() * &frame;
        let dev = (&gram - DMatrix::<f64>::identity(k, k)).abs().max();
        if k > 0 && dev > 1e-8 {
            return Err(FelError::InvalidParameter(format!("frame not orthonormal (dev {dev:.2e})")));
        }
        Ok(Subspace { d, frame })
    }

    pub fn ambient_dim(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    /// Orthogonal complement.
    pub fn complement(&self) -> Subspace {
        Subspace { d: self.d, frame: crate::linalg::complement_frame(self.d, &self.frame) }
    }

    /// Orthogonal projection of a vector onto the subspace.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        if self.dim() == 0 {
            return DVector::zeros(self.d);
        }
        &self.frame * (self.frame.transpose() * x)
    }

    /// Distance from a point to the subspace.
    pub fn point_distance(&self, x: &DVector<f64>) -> f64 {
        (x - self.project(x)).norm()
    }

    /// Coordinates of x in the frame basis.
    pub fn coords(&self, x: &DVector<f64>) -> DVector<f64> {
        self.frame.transpose() * x
    }

    /// Span of the union with another subspace.
    pub fn join(&self, other: &Subspace) -> Subspace {
        let mut m = DMatrix::zeros(self.d, self.dim() + other.dim());
        for j in 0..self.dim() {
            m.set_column(j, &self.frame.column(j));
        }
        for j in 0..other.dim() {
            m.set_column(self.dim() + j, &other.frame.column(j));
        }
        Subspace::span(&m)
    }

    /// Extend by one unit vector (assumed not already inside).
    pub fn extended(&self, v: &DVector<f64>) -> Subspace {
        let mut m = DMatrix::zeros(self.d, self.dim() + 1);
        for j in 0..self.dim() {
            m.set_column(j, &self.frame.column(j));
        }
        m.set_column(self.dim(), v);
        Subspace::span(&m)
    }
}

/// Largest deviation of a unit vector of `v` from the subspace `w`:
/// sup over unit x in v of d(x, w). Equals sqrt(1 - s_min^2) where s_min is
/// the smallest of dim-v singular values of F_w^T F_v (zero-padded when
/// dim v exceeds dim w). This is the directed half of the metric, and
/// `v (= subset) w^(eps)` on the unit ball means exactly `dev <= eps`.
pub fn directed_deviation(v: &Subspace, w: &Subspace) -> f64 {
    let kv = v.dim();
    if kv == 0 {
        return 0.0;
    }
    if w.dim() == 0 {
        return 1.0;
    }
    let m = w.frame().transpose() * v.frame();
    let mut s = crate::linalg::singular_values(&m);
    s.resize(kv, 0.0);
    let smin = s[kv - 1].clamp(0.0, 1.0);
    (1.0 - smin * smin).max(0.0).sqrt()
}

/// The metric d(V,W): Hausdorff distance of the unit-ball intersections,
/// i.e. the larger of the two directed deviations. Always <= 1, with
/// equality exactly when one space meets the other's orthocomplement.
pub fn sub_distance(v: &Subspace, w: &Subspace) -> Result<f64> {
    if v.ambient_dim() != w.ambient_dim() {
        return Err(FelError::DimensionMismatch(v.ambient_dim(), w.ambient_dim()));
    }
    Ok(directed_deviation(v, w).max(directed_deviation(w, v)))
}

/// Chord angle: 0 if nested, otherwise the minimal distance between unit
/// vectors of V and W after removing the common part, which is
/// 2 sin(theta/2) for the smallest nonzero principal angle theta.
pub fn angle(v: &Subspace, w: &Subspace) -> Result<f64> {
    if v.ambient_dim() != w.ambient_dim() {
        return Err(FelError::DimensionMismatch(v.ambient_dim(), w.ambient_dim()));
    }
    if directed_deviation(v, w) <= SUB_TOL || directed_deviation(w, v) <= SUB_TOL {
        return Ok(0.0);
    }
    let m = v.frame().transpose() * w.frame();
    let s = crate::linalg::singular_values(&m);
    let best = s.iter().copied().find(|&x| x < 1.0 - SUB_TOL).unwrap_or(0.0);
    let best = best.clamp(0.0, 1.0);
    Ok((2.0 - 2.0 * best).max(0.0).sqrt())
}

/// V (= subset) W^(eps) on the unit ball.
pub fn in_neighborhood(v: &Subspace, w: &Subspace, eps: f64) -> bool {
    directed_deviation(v, w) <= eps + SUB_TOL
}

/// Span of the eigenvectors of the covariance with eigenvalue >= lambda_r;
/// ties extend the span beyond r.
pub fn top_eigenspace(cov: &CovSummary, r: usize) -> Subspace {
    let d = cov.mean.len();
    if r == 0 {
        return Subspace::zero(d);
    }
    let r = r.min(d);
    let lam_r = cov.eigenvalues[r - 1];
    let tie = 1e-9 * cov.eigenvalues[0].abs().max(1e-12);
    let k = cov.eigenvalues.iter().take_while(|&&l| l >= lam_r - tie).count().max(r);
    let mut m = DMatrix::zeros(d, k);
    for j in 0..k {
        m.set_column(j, &cov.eigenvectors.column(j));
    }
    Subspace::span(&m)
}

/// The cascade thresholds eps_k = 2^k eps^(1/2^k).
pub fn cascade_eps(eps: f64, k: usize) -> f64 {
    (k as f64).exp2() * eps.powf(1.0 / (k as f64).exp2())
}

/// Result of the engulfing search.
#[derive(Debug, Clone)]
pub struct Engulfing {
    pub v: Subspace,
    /// The guarantee level eps_d actually promised.
    pub eps_d: f64,
    /// True when eps_d >= 1, in which case any subspace engulfs trivially.
    pub degenerate: bool,
}

/// Smallest-dimension subspace V (greedy, built from directions of the
/// inputs) with every W contained in V^(eps_{d - dim V}) on the unit ball.
/// Mirrors the descent in the existence proof: while some W escapes the
/// current candidate's cascade neighborhood, adjoin the escaping direction.
pub fn minimal_engulfing(ws: &[Subspace], eps: f64) -> Result<Engulfing> {
    if ws.is_empty() {
        return Err(FelError::EmptyInput("engulfing of an empty family"));
    }
    let d = ws[0].ambient_dim();
    if ws.iter().any(|w| w.ambient_dim() != d) {
        return Err(FelError::DimensionMismatch(d, 0));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(FelError::InvalidParameter("engulfing needs eps in (0,1)".into()));
    }
    let eps_d = cascade_eps(eps, d);
    if eps_d >= 1.0 {
        return Ok(Engulfing { v: Subspace::full(d), eps_d, degenerate: true });
    }
    let mut e = Subspace::zero(d);
    loop {
        let threshold = cascade_eps(eps, d - e.dim());
        let violator = ws.iter().find(|w| !in_neighborhood(w, &e, threshold));
        match violator {
            None => return Ok(Engulfing { v: e, eps_d, degenerate: false }),
            Some(w) => {
                if e.dim() == d {
                    return Ok(Engulfing { v: e, eps_d, degenerate: false });
                }
                let dir = farthest_direction(w, &e);
                e = e.extended(&dir);
            }
        }
    }
}

/// Unit vector of `w` farthest from `e` (deterministic, SVD-based).
fn farthest_direction(w: &Subspace, e: &Subspace) -> DVector<f64> {
    if e.dim() == 0 {
        return w.frame().column(0).into_owned();
    }
    let m = e.frame().transpose() * w.frame();
    let svd = m.svd(false, true);
    let vt = svd.v_t.unwrap();
    // right singular vector for the smallest singular value
    let mut idx = 0;
    for i in 1..svd.singular_values.len() {
        if svd.singular_values[i] < svd.singular_values[idx] {
            idx = i;
        }
    }
    // if w has more directions than singular values (dim w > dim e pad),
    // pick a direction orthogonal to the range instead
    let kv = w.dim();
    let dir = if svd.singular_values.len() < kv {
        // complete: any unit vector of w orthogonal to preimages; use the
        // component of a frame column orthogonal to e
        let mut best = w.frame().column(0).into_owned();
        let mut best_dev = -1.0;
        for j in 0..kv {
            let col = w.frame().column(j).into_owned();
            let res = &col - e.project(&col);
            if res.norm() > best_dev {
                best_dev = res.norm();
                best = col;
            }
        }
        best
    } else {
        w.frame() * vt.row(idx).transpose()
    };
    let mut dir = dir;
    // deterministic sign
    let mut pivot = 0;
    for r in 1..dir.len() {
        if dir[r].abs() > dir[pivot].abs() {
            pivot = r;
        }
    }
    if dir[pivot] < 0.0 {
        dir = -dir;
    }
    let n = dir.norm();
    if n > 0.0 {
        dir / n
    } else {
        dir
    }
}

/// Result of the common-subspace search.
#[derive(Debug, Clone)]
pub struct CommonSubspace {
    pub v: Subspace,
    /// Indices into the input list; at most d - dim(v) of them, and their
    /// eps-neighborhoods intersect inside v's delta-neighborhood.
    pub witnesses: Vec<usize>,
    pub delta: f64,
}

/// Iterative refinement: start from the whole space and intersect with a
/// violating member until the candidate sits inside every W's neighborhood.
pub fn maximal_common(ws: &[Subspace], eps: f64) -> Result<CommonSubspace> {
    if ws.is_empty() {
        return Err(FelError::EmptyInput("common subspace of an empty family"));
    }
    let d = ws[0].ambient_dim();
    if ws.iter().any(|w| w.ambient_dim() != d) {
        return Err(FelError::DimensionMismatch(d, 0));
    }
    if !(eps > 0.0) {
        return Err(FelError::InvalidParameter("eps must be positive".into()));
    }
    let mut v = Subspace::full(d);
    let mut delta_cur = eps;
    let mut witnesses = Vec::new();
    for _ in 0..=d {
        // The literal cascade value exceeds 1 after one refinement at any
        // floating-point eps, which would blind the violator test (every
        // subspace sits in every 1-neighborhood). Capping just below 1
        // keeps full-distance violations visible while staying inside the
        // stated guarantee.
        let delta_star = (((d + 1) as f64).exp2() * delta_cur.powf(1.0 / (d as f64).exp2())).min(0.99);
        let viol = ws
            .iter()
            .enumerate()
            .find(|(_, w)| !in_neighborhood(&v, w, delta_star));
        match viol {
            None => {
                return Ok(CommonSubspace { v, witnesses, delta: delta_star.max(delta_cur) });
            }
            Some((i, w)) => {
                witnesses.push(i);
                let (e, delta_next) = intersection_subspace(&v, w, delta_cur);
                if e.dim() >= v.dim() {
                    // no strict descent available; stop with the trivial space
                    let delta = delta_next.max(delta_star);
                    return Ok(CommonSubspace { v: Subspace::zero(d), witnesses, delta });
                }
                v = e;
                delta_cur = delta_next;
            }
        }
    }
    Ok(CommonSubspace { v, witnesses, delta: delta_cur })
}

/// Constructive core of the intersection step: a subspace E inside both
/// cascade neighborhoods such that the thickened intersection sits inside
/// E's next-level neighborhood. Built from midpoints of principal vector
/// pairs, which are mutually orthogonal.
pub fn intersection_subspace(v: &Subspace, w: &Subspace, eps: f64) -> (Subspace, f64) {
    let d = v.ambient_dim();
    let svd = (v.frame().transpose() * w.frame()).svd(true, true);
    let u = svd.u.as_ref();
    let vt = svd.v_t.as_ref();
    let mut pairs: Vec<(f64, DVector<f64>)> = Vec::new();
    if let (Some(u), Some(vt)) = (u, vt) {
        for i in 0..svd.singular_values.len() {
            let sigma = svd.singular_values[i];
            let vi = v.frame() * u.column(i).into_owned();
            let wi = w.frame() * vt.row(i).transpose();
            let mid = &vi + &wi;
            let n = mid.norm();
            if n > 1e-12 {
                pairs.push((sigma, mid / n));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut e = Subspace::zero(d);
    for (_, mid) in pairs {
        let k = e.dim();
        let thr = cascade_eps(eps, k).min(1.0);
        let line = Subspace::line(&mid);
        let dv = directed_deviation(&line, v);
        let dw = directed_deviation(&line, w);
        if dv <= thr + SUB_TOL && dw <= thr + SUB_TOL {
            e = e.extended(&mid);
        }
    }
    let delta_out = cascade_eps(eps, e.dim() + 1);
    (e, delta_out)
}

/// Serialized form: {d, k, frame column-major}.
#[derive(Debug, Serialize, Deserialize)]
pub struct SubspaceRepr {
    pub d: usize,
    pub k: usize,
    pub frame: Vec<f64>,
}

impl From<&Subspace> for SubspaceRepr {
    fn from(s: &Subspace) -> Self {
        SubspaceRepr { d: s.d, k: s.dim(), frame: s.frame.as_slice().to_vec() }
    }
}

impl TryFrom<SubspaceRepr> for Subspace {
    type Error = FelError;
    fn try_from(r: SubspaceRepr) -> Result<Subspace> {
        if r.frame.len() != r.d * r.k {
            return Err(FelError::DimensionMismatch(r.frame.len(), r.d * r.k));
        }
        Subspace::from_frame(DMatrix::from_column_slice(r.d, r.k, &r.frame))
    }
}

/// All axis-aligned subspaces of R^d (including {0} and R^d), in a fixed
/// order by dimension then index pattern.
pub fn axis_subspaces(d: usize) -> Vec<Subspace> {
    let mut out = Vec::new();
    for k in 0..=d {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            out.push(Subspace::axes(d, &idx));
            // next combination
            let mut i = k;
            loop {
                if i == 0 {
                    idx.clear();
                    break;
                }
                i -= 1;
                if idx[i] < d - (k - i) {
                    idx[i] += 1;
                    for j in i + 1..k {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
            if idx.is_empty() && k > 0 {
                break;
            }
            if k == 0 {
                break;
            }
        }
    }
    out
}

/// Grassmannian grids for oracle validation: all lines (d = 2) or all lines
/// and planes (d = 3) at the given angular step, plus {0} and R^d.
pub fn grid_subspaces(d: usize, step_deg: f64) -> Vec<Subspace> {
    let mut out = vec![Subspace::zero(d)];
    let step = step_deg.to_radians();
    match d {
        2 => {
            let n = (std::f64::consts::PI / step).round() as usize;
            for i in 0..n {
                let t = i as f64 * step;
                out.push(Subspace::line(&DVector::from_vec(vec![t.cos(), t.sin()])));
            }
        }
        3 => {
            let n_theta = (std::f64::consts::PI / step).round() as usize;
            let mut dirs = Vec::new();
            for i in 0..=n_theta {
                let theta = i as f64 * step; // polar in [0, pi]
                let n_phi = if theta.sin() < 1e-9 {
                    1
                } else {
                    ((std::f64::consts::PI / step).round() as usize).max(1)
                };
                for j in 0..n_phi {
                    let phi = j as f64 * std::f64::consts::PI / n_phi as f64 * 2.0;
                    dirs.push(DVector::from_vec(vec![
                        theta.sin() * phi.cos(),
                        theta.sin() * phi.sin(),
                        theta.cos(),
                    ]));
                }
            }
            // keep one representative per line (antipodal dedup by z >= 0 side)
            let mut lines: Vec<DVector<f64>> = Vec::new();
            for v in dirs {
                let v = if v[2] < 0.0 || (v[2].abs() < 1e-12 && v[1] < 0.0) { -v } else { v };
                if lines.iter().all(|u| (u - &v).norm() > 1e-9) {
                    lines.push(v);
                }
            }
            for v in &lines {
                out.push(Subspace::line(v));
            }
            for v in &lines {
                out.push(Subspace::line(v).complement());
            }
        }
        _ => {}
    }
    out.push(Subspace::full(d));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line2(theta: f64) -> Subspace {
        Subspace::line(&DVector::from_vec(vec![theta.cos(), theta.sin()]))
    }

    #[test]
    fn distance_basics() {
        let e1 = Subspace::axes(2, &[0]);
        let e2 = Subspace::axes(2, &[1]);
        assert_eq!(sub_distance(&e1, &e1).unwrap(), 0.0);
        assert!((sub_distance(&e1, &e2).unwrap() - 1.0).abs() < 1e-12);
        // different dimensions: always 1
        let full = Subspace::full(2);
        assert!((sub_distance(&e1, &full).unwrap() - 1.0).abs() < 1e-12);
        assert!((sub_distance(&Subspace::zero(2), &e1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lines_at_angle_closed_forms_match_grid_search() {
        // oracle: grid search over unit vectors of the two lines
        for &theta in &[0.1f64, 0.4, 0.9, 1.3] {
            let v = line2(0.0);
            let w = line2(theta);

            // directed deviation oracle: max over unit x in V of distance to W
            let mut dev_oracle: f64 = 0.0;
            for i in 0..=2000 {
                let s = -1.0 + 2.0 * i as f64 / 2000.0; // x = s*v, |s|<=1
                let x = DVector::from_vec(vec![s, 0.0]);
                dev_oracle = dev_oracle.max(w.point_distance(&x));
            }
            let d = sub_distance(&v, &w).unwrap();
            assert!((d - theta.sin()).abs() < 1e-9, "metric is sin(theta)");
            assert!((d - dev_oracle).abs() < 2e-3, "grid oracle agrees");

            // angle oracle: min chord between unit vectors
            let mut chord_oracle: f64 = f64::INFINITY;
            for i in 0..4000 {
                let a = if i % 2 == 0 { 1.0 } else { -1.0 };
                let t = (i / 2) as f64 / 2000.0 * std::f64::consts::TAU;
                let _ = t;
                let x = DVector::from_vec(vec![a, 0.0]);
                for sign in [1.0, -1.0] {
                    let y = DVector::from_vec(vec![sign * theta.cos(), sign * theta.sin()]);
                    chord_oracle = chord_oracle.min((&x - &y).norm());
                }
            }
            let ang = angle(&v, &w).unwrap();
            let want = 2.0 * (theta / 2.0).sin();
            assert!((ang - want).abs() < 1e-9, "angle is 2 sin(theta/2)");
            assert!((ang - chord_oracle).abs() < 1e-9);
        }
    }

    #[test]
    fn angle_bounded_by_metric_up_to_chord_factor() {
        // chord vs perpendicular differ by at most sqrt(2) on [0, pi/2]
        let mut k = 0u64;
        for i in 0..60 {
            for j in 0..60 {
                let v = line2(i as f64 * 0.05);
                let w = line2(j as f64 * 0.05);
                let a = angle(&v, &w).unwrap();
                let m = sub_distance(&v, &w).unwrap();
                assert!(a <= 2.0f64.sqrt() * m + 1e-9);
                k += 1;
            }
        }
        assert!(k > 0);
    }

    #[test]
    fn metric_triangle_inequality() {
        let angles = [0.0, 0.3, 0.7, 1.1, 1.5];
        for &a in &angles {
            for &b in &angles {
                for &c in &angles {
                    let x = line2(a);
                    let y = line2(b);
                    let z = line2(c);
                    let xy = sub_distance(&x, &y).unwrap();
                    let yz = sub_distance(&y, &z).unwrap();
                    let xz = sub_distance(&x, &z).unwrap();
                    assert!(xz <= xy + yz + 1e-12);
                    assert!((xy - sub_distance(&y, &x).unwrap()).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn neighborhood_checks() {
        let e1 = Subspace::axes(3, &[0]);
        let plane = Subspace::axes(3, &[0, 1]);
        assert!(in_neighborhood(&e1, &plane, 0.0));
        assert!(!in_neighborhood(&plane, &e1, 0.5));
        let e2 = Subspace::axes(2, &[1]);
        let f1 = Subspace::axes(2, &[0]);
        assert!(!in_neighborhood(&f1, &e2, 0.9));
        // symmetric for equal dims below 1
        let l1 = line2(0.2);
        let l2 = line2(0.35);
        let eps = sub_distance(&l1, &l2).unwrap() + 1e-12;
        assert!(in_neighborhood(&l1, &l2, eps) && in_neighborhood(&l2, &l1, eps));
    }

    #[test]
    fn top_eigenspace_cases() {
        use crate::measure::LatticeMeasure;
        // a segment on the x-axis: top eigenspace of rank 1 is e1
        let atoms: Vec<(DVector<f64>, f64)> = (0..256)
            .map(|i| (DVector::from_vec(vec![(i as f64 + 0.5) / 256.0, 0.0]), 1.0))
            .collect();
        let m = LatticeMeasure::from_atoms(&atoms, 8).unwrap();
        let cov = m.mean_cov();
        assert_eq!(top_eigenspace(&cov, 0).dim(), 0);
        let v1 = top_eigenspace(&cov, 1);
        assert_eq!(v1.dim(), 1);
        assert!(v1.frame().column(0)[0].abs() > 0.999);

        // isotropic square: a tie forces the full plane already at r = 1
        let atoms: Vec<(DVector<f64>, f64)> = (0..32)
            .flat_map(|i| (0..32).map(move |j| (i, j)))
            .map(|(i, j)| {
                (DVector::from_vec(vec![(i as f64 + 0.5) / 32.0, (j as f64 + 0.5) / 32.0]), 1.0)
            })
            .collect();
        let m = LatticeMeasure::from_atoms(&atoms, 5).unwrap();
        let cov = m.mean_cov();
        assert_eq!(top_eigenspace(&cov, 1).dim(), 2);
    }

    #[test]
    fn engulfing_examples() {
        // single subspace: returned exactly
        let w = line2(0.7);
        let e = minimal_engulfing(std::slice::from_ref(&w), 1e-6).unwrap();
        assert_eq!(e.v.dim(), 1);
        assert!(sub_distance(&e.v, &w).unwrap() < 1e-9);

        // two orthogonal lines: no line engulfs both at small eps
        let ws = vec![Subspace::axes(2, &[0]), Subspace::axes(2, &[1])];
        let e = minimal_engulfing(&ws, 1e-6).unwrap();
        assert_eq!(e.v.dim(), 2);

        // two nearly parallel lines: one line suffices
        let ws = vec![line2(0.0), line2(1e-8)];
        let e = minimal_engulfing(&ws, 1e-6).unwrap();
        assert_eq!(e.v.dim(), 1);
        for w in &ws {
            assert!(in_neighborhood(w, &e.v, e.eps_d));
        }
    }

    #[test]
    fn common_subspace_examples() {
        // single subspace comes back unchanged
        let w = line2(0.3);
        let c = maximal_common(std::slice::from_ref(&w), 1e-6).unwrap();
        assert_eq!(c.v.dim(), 1);
        assert!(sub_distance(&c.v, &w).unwrap() < c.delta);

        // orthogonal lines: only the origin survives, both lines witness it
        let ws = vec![Subspace::axes(2, &[0]), Subspace::axes(2, &[1])];
        let c = maximal_common(&ws, 1e-8).unwrap();
        assert_eq!(c.v.dim(), 0);
        assert_eq!(c.witnesses.len(), 2);

        // the full family containing R^d only
        let ws = vec![Subspace::full(3)];
        let c = maximal_common(&ws, 1e-6).unwrap();
        assert_eq!(c.v.dim(), 3);
    }

    #[test]
    fn axis_subspace_enumeration() {
        let subs = axis_subspaces(2);
        let dims: Vec<usize> = subs.iter().map(|s| s.dim()).collect();
        assert_eq!(dims, vec![0, 1, 1, 2]);
        let subs = axis_subspaces(3);
        assert_eq!(subs.len(), 8);
    }

    #[test]
    fn span_stability_against_grid_oracle() {
        // vectors near V that are pairwise well-separated span a space near V
        let v = Subspace::axes(3, &[0, 1]);
        let eps = 1e-3;
        let v1 = DVector::from_vec(vec![1.0, 0.0, eps]);
        let v2 = DVector::from_vec(vec![0.0, 1.0, -eps]);
        let span = Subspace::span(&DMatrix::from_columns(&[v1.normalize(), v2.normalize()]));
        let dev = directed_deviation(&span, &v);
        // delta = 1 here (orthogonal-ish), C <= 4 sqrt(d)
        assert!(dev <= 4.0 * 3.0f64.sqrt() * eps);
    }
}
