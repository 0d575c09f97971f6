//! Arithmetic, metric, and dyadic partitioning for the similarity group of
//! R^d and its isometry subgroup.
//!
//! A similarity x -> r U x + a is stored as (t, U, a) with r = 2^{-t}, so the
//! log-scale coordinate t participates directly in the dyadic cell geometry
//! of the group. Contractions have t > 0; isometries have t = 0.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{FelError, Result};
use crate::linalg::operator_norm;

pub const ORTHO_TOL: f64 = 1e-10;

/// An element 2^{-t} U + a of the similarity group G(d).
#[derive(Debug, Clone, PartialEq)]
pub struct Similitude {
    /// Log-scale contraction: the map scales by 2^{-t}.
    pub t: f64,
    /// Orthogonal part, d x d.
    pub u: DMatrix<f64>,
    /// Translation part.
    pub a: DVector<f64>,
}

impl Similitude {
    pub fn new(t: f64, u: DMatrix<f64>, a: DVector<f64>) -> Result<Self> {
        let d = a.len();
        if u.nrows() != d || u.ncols() != d {
            return Err(FelError::DimensionMismatch(u.nrows(), d));
        }
        if !t.is_finite() || u.iter().any(|x| !x.is_finite()) || a.iter().any(|x| !x.is_finite()) {
            return Err(FelError::NonFinite("similitude"));
        }
        let gram = u.transpose() * &u;
        let dev = (&gram - DMatrix::<f64>::identity(d, d)).abs().max();
        if dev > ORTHO_TOL {
            return Err(FelError::InvalidParameter(format!(
                "linear part not orthogonal (deviation {dev:.3e})"
            )));
        }
        Ok(Similitude { t, u, a })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// Contraction ratio r = 2^{-t}.
    pub fn ratio(&self) -> f64 {
        (-self.t).exp2()
    }

    pub fn is_contraction(&self) -> bool {
        self.t > 0.0
    }

    /// Membership in the isometry group G_0 (within tolerance).
    pub fn is_isometry(&self, tol: f64) -> bool {
        self.t.abs() <= tol
    }

    pub fn identity(d: usize) -> Self {
        Similitude { t: 0.0, u: DMatrix::identity(d, d), a: DVector::zeros(d) }
    }

    /// The scaling map S_t x = 2^t x.
    pub fn scale_map(t: f64, d: usize) -> Self {
        Similitude { t: -t, u: DMatrix::identity(d, d), a: DVector::zeros(d) }
    }

    pub fn translation(a: DVector<f64>) -> Self {
        let d = a.len();
        Similitude { t: 0.0, u: DMatrix::identity(d, d), a }
    }

    /// Homothety r x + a with r > 0, given directly by ratio.
    pub fn homothety(r: f64, a: DVector<f64>) -> Self {
        let d = a.len();
        Similitude { t: -r.log2(), u: DMatrix::identity(d, d), a }
    }

    /// General constructor from ratio instead of log-scale.
    pub fn from_ratio(r: f64, u: DMatrix<f64>, a: DVector<f64>) -> Result<Self> {
        Self::new(-r.log2(), u, a)
    }

    /// g(h(x)): t adds, orthogonal parts multiply, and h's translation is
    /// carried through g.
    pub fn compose(&self, h: &Similitude) -> Result<Similitude> {
        if self.dim() != h.dim() {
            return Err(FelError::DimensionMismatch(self.dim(), h.dim()));
        }
        let r = self.ratio();
        Ok(Similitude {
            t: self.t + h.t,
            u: &self.u * &h.u,
            a: &self.a + (&self.u * &h.a) * r,
        })
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        (&self.u * x) * self.ratio() + &self.a
    }

    /// Fixed point of a contraction: solves a = 2^{-t} U a + a_g.
    pub fn fixed_point(&self) -> Result<DVector<f64>> {
        let d = self.dim();
        let m = DMatrix::<f64>::identity(d, d) - &self.u * self.ratio();
        m.lu()
            .solve(&self.a)
            .ok_or_else(|| FelError::InvalidParameter("no unique fixed point".into()))
    }

    /// Distance |log2 r - log2 r'| + ||U - U'||_op + ||a - a'||_2.
    pub fn distance(&self, other: &Similitude) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(FelError::DimensionMismatch(self.dim(), other.dim()));
        }
        let dt = (self.t - other.t).abs();
        let du = operator_norm(&(&self.u - &other.u));
        let da = (&self.a - &other.a).norm();
        Ok(dt + du + da)
    }

    /// Embedding into R^{1+d^2+d} as (t, U row-major, a); the dyadic cells
    /// of the group are the dyadic cells of this embedding.
    pub fn embedding(&self) -> Vec<f64> {
        let d = self.dim();
        let mut v = Vec::with_capacity(1 + d * d + d);
        v.push(self.t);
        for i in 0..d {
            for j in 0..d {
                v.push(self.u[(i, j)]);
            }
        }
        for i in 0..d {
            v.push(self.a[i]);
        }
        v
    }
}

/// A dyadic cell of the similarity group at some level, identified by the
/// integer coordinates floor(2^n * embedding).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GCellId {
    pub level: i64,
    pub coords: Vec<i64>,
}

fn floor_index(x: f64, level: i64) -> i64 {
    (x * (level as f64).exp2()).floor() as i64
}

/// The level-n cell of g in the full partition of G, and in the coarser
/// partition by translation part only. The first refines the second.
pub fn dyadic_cells_g(g: &Similitude, n: i64) -> (GCellId, GCellId) {
    let emb = g.embedding();
    let full = GCellId { level: n, coords: emb.iter().map(|&x| floor_index(x, n)).collect() };
    let d = g.dim();
    let translation_only = GCellId {
        level: n,
        coords: emb[1 + d * d..].iter().map(|&x| floor_index(x, n)).collect(),
    };
    (full, translation_only)
}

/// Serialized form: {t, U (row-major), a}.
#[derive(Debug, Serialize, Deserialize)]
pub struct SimilitudeRepr {
    pub t: f64,
    pub u: Vec<f64>,
    pub a: Vec<f64>,
}

impl From<&Similitude> for SimilitudeRepr {
    fn from(g: &Similitude) -> Self {
        let d = g.dim();
        SimilitudeRepr {
            t: g.t,
            u: (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| g.u[(i, j)]).collect(),
            a: g.a.iter().copied().collect(),
        }
    }
}

impl TryFrom<SimilitudeRepr> for Similitude {
    type Error = FelError;
    fn try_from(r: SimilitudeRepr) -> Result<Similitude> {
        let d = r.a.len();
        if r.u.len() != d * d {
            return Err(FelError::DimensionMismatch(r.u.len(), d * d));
        }
        Similitude::new(r.t, DMatrix::from_row_slice(d, d, &r.u), DVector::from_vec(r.a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rotation2;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_similitude(rng: &mut ChaCha8Rng, d: usize) -> Similitude {
        let theta: f64 = rng.gen_range(-3.0..3.0);
        let u = match d {
            1 => DMatrix::from_row_slice(1, 1, &[if rng.gen_bool(0.5) { 1.0 } else { -1.0 }]),
            2 => rotation2(theta),
            _ => {
                // random rotation in the (0,1) plane times a sign flip in z
                let mut m = DMatrix::identity(d, d);
                m[(0, 0)] = theta.cos();
                m[(0, 1)] = -theta.sin();
                m[(1, 0)] = theta.sin();
                m[(1, 1)] = theta.cos();
                if rng.gen_bool(0.5) {
                    m[(2, 2)] = -1.0;
                }
                m
            }
        };
        let a = DVector::from_fn(d, |_, _| rng.gen_range(-2.0..2.0));
        Similitude::new(rng.gen_range(0.1..3.0), u, a).unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 1..=3 {
            let id = Similitude::identity(d);
            for _ in 0..20 {
                let g = random_similitude(&mut rng, d);
                let left = id.compose(&g).unwrap();
                let right = g.compose(&id).unwrap();
                assert!(left.distance(&g).unwrap() < 1e-12);
                assert!(right.distance(&g).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn compose_halving_example() {
        // (x/2) o (x/2 + 1) = x/4 + 1/2
        let g = Similitude::homothety(0.5, DVector::from_vec(vec![0.0]));
        let h = Similitude::homothety(0.5, DVector::from_vec(vec![1.0]));
        let gh = g.compose(&h).unwrap();
        assert!((gh.ratio() - 0.25).abs() < 1e-15);
        assert!((gh.a[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn compose_garsia_pair() {
        // Root of t^3 - t^2 - 2 = 0 found by bisection (independent of the
        // library's own root finding), then phi_+ o phi_-.
        let (mut lo, mut hi) = (1.0f64, 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid * mid - mid * mid - 2.0 > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let lambda = 0.5 * (lo + hi);
        let plus = Similitude::homothety(1.0 / lambda, DVector::from_vec(vec![1.0]));
        let minus = Similitude::homothety(1.0 / lambda, DVector::from_vec(vec![-1.0]));
        let pm = plus.compose(&minus).unwrap();
        assert!((pm.ratio() - lambda.powi(-2)).abs() < 1e-14);
        assert!((pm.a[0] - (1.0 - 1.0 / lambda)).abs() < 1e-14);
    }

    #[test]
    fn apply_and_scale_map() {
        let id = Similitude::identity(2);
        let x = DVector::from_vec(vec![0.3, -0.7]);
        assert_eq!(id.apply(&x), x);

        let g = Similitude::homothety(0.5, DVector::from_vec(vec![1.0, 1.0]));
        let y = g.apply(&DVector::from_vec(vec![0.0, 0.0]));
        assert_eq!(y, DVector::from_vec(vec![1.0, 1.0]));

        let s3 = Similitude::scale_map(3.0, 2);
        let z = s3.apply(&DVector::from_vec(vec![1.0, 0.0]));
        assert!((z[0] - 8.0).abs() < 1e-12 && z[1].abs() < 1e-12);
    }

    #[test]
    fn distance_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = random_similitude(&mut rng, 2);
        assert_eq!(g.distance(&g).unwrap(), 0.0);

        let t0 = Similitude::translation(DVector::from_vec(vec![0.0]));
        let t1 = Similitude::translation(DVector::from_vec(vec![2.0 / 3.0]));
        assert!((t0.distance(&t1).unwrap() - 2.0 / 3.0).abs() < 1e-15);

        // rotation by theta vs identity: operator norm |e^{i theta} - 1| = 2 sin(theta/2)
        for theta in [0.3f64, 1.0, 2.0] {
            let r = Similitude::new(0.0, rotation2(theta), DVector::zeros(2)).unwrap();
            let id = Similitude::identity(2);
            let want = 2.0 * (theta / 2.0).sin();
            assert!((r.distance(&id).unwrap() - want).abs() < 1e-10);
        }
    }

    #[test]
    fn distance_metric_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let d = rng.gen_range(1..=3);
            let g = random_similitude(&mut rng, d);
            let h = random_similitude(&mut rng, d);
            let k = random_similitude(&mut rng, d);
            let gh = g.distance(&h).unwrap();
            let hg = h.distance(&g).unwrap();
            assert!((gh - hg).abs() < 1e-12);
            let gk = g.distance(&k).unwrap();
            let hk = h.distance(&k).unwrap();
            assert!(gk <= gh + hk + 1e-12);
        }
    }

    #[test]
    fn compose_associative_and_acts() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let d = rng.gen_range(1..=3);
            let g = random_similitude(&mut rng, d);
            let h = random_similitude(&mut rng, d);
            let k = random_similitude(&mut rng, d);
            let l = g.compose(&h).unwrap().compose(&k).unwrap();
            let r = g.compose(&h.compose(&k).unwrap()).unwrap();
            assert!(l.distance(&r).unwrap() < 1e-12);

            let x = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
            let via_compose = g.compose(&h).unwrap().apply(&x);
            let via_apply = g.apply(&h.apply(&x));
            assert!((via_compose - via_apply).norm() < 1e-12);
        }
    }

    #[test]
    fn gcells_example_and_refinement() {
        let g = Similitude::new(1.0, DMatrix::identity(2, 2), DVector::zeros(2)).unwrap();
        let (full, trans) = dyadic_cells_g(&g, 0);
        assert_eq!(full.coords, vec![1, 1, 0, 0, 1, 0, 0]);
        assert_eq!(trans.coords, vec![0, 0]);

        let a = Similitude::translation(DVector::from_vec(vec![0.3]));
        let b = Similitude::translation(DVector::from_vec(vec![0.4]));
        let (_, ta) = dyadic_cells_g(&a, 3);
        let (_, tb) = dyadic_cells_g(&b, 3);
        assert_eq!(ta.coords, vec![2]);
        assert_eq!(tb.coords, vec![3]);

        // finer level determines coarser by floor halving
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let g = random_similitude(&mut rng, 2);
            let (f1, _) = dyadic_cells_g(&g, 6);
            let (f0, _) = dyadic_cells_g(&g, 5);
            let halved: Vec<i64> = f1.coords.iter().map(|&c| c.div_euclid(2)).collect();
            assert_eq!(halved, f0.coords);
        }
    }

    #[test]
    fn fixed_point_solves() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let d = rng.gen_range(1..=3);
            let g = random_similitude(&mut rng, d);
            let p = g.fixed_point().unwrap();
            assert!((g.apply(&p) - &p).norm() < 1e-9);
        }
    }
}
