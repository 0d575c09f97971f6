//! Built-in systems and synthetic measures used across tests and the CLI.

use nalgebra::{DMatrix, DVector};

use crate::error::{FelError, Result};
use crate::ifs::IFSSystem;
use crate::measure::{Cell, LatticeMeasure, MAX_DIM};
use crate::rational::{rat, RatSimilitude};
use crate::similitude::Similitude;

/// Root of t^3 - t^2 - 2 = 0 in (1, 2), to full f64 precision.
pub fn garsia_lambda() -> f64 {
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * mid * mid - mid * mid - 2.0 > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Real root of x^3 - x^2 + x = 1/2 (the fat-gasket interior threshold).
pub fn fat_sierpinski_lambda_star() -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * mid * mid - mid * mid + mid - 0.5 > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Middle-thirds system {x/3, x/3 + 2/3} with equal weights.
pub fn cantor3() -> IFSSystem {
    let maps = vec![
        Similitude::homothety(1.0 / 3.0, DVector::from_vec(vec![0.0])),
        Similitude::homothety(1.0 / 3.0, DVector::from_vec(vec![2.0 / 3.0])),
    ];
    let rats = vec![
        RatSimilitude::homothety(rat(1, 3), vec![rat(0, 1)]),
        RatSimilitude::homothety(rat(1, 3), vec![rat(2, 3)]),
    ];
    IFSSystem::new(maps, vec![0.5, 0.5]).unwrap().with_rational(rats).unwrap()
}

/// {x/2, x/2}: the trivial exact-overlap system.
pub fn duplicate_halving() -> IFSSystem {
    let maps = vec![
        Similitude::homothety(0.5, DVector::from_vec(vec![0.0])),
        Similitude::homothety(0.5, DVector::from_vec(vec![0.0])),
    ];
    let rats = vec![
        RatSimilitude::homothety(rat(1, 2), vec![rat(0, 1)]),
        RatSimilitude::homothety(rat(1, 2), vec![rat(0, 1)]),
    ];
    IFSSystem::new(maps, vec![0.5, 0.5]).unwrap().with_rational(rats).unwrap()
}

/// {x/2, x/2 + 1/2, x/2 + 1}: overlaps exactly at depth two.
pub fn dyadic_overlap() -> IFSSystem {
    let maps = vec![
        Similitude::homothety(0.5, DVector::from_vec(vec![0.0])),
        Similitude::homothety(0.5, DVector::from_vec(vec![0.5])),
        Similitude::homothety(0.5, DVector::from_vec(vec![1.0])),
    ];
    let rats = vec![
        RatSimilitude::homothety(rat(1, 2), vec![rat(0, 1)]),
        RatSimilitude::homothety(rat(1, 2), vec![rat(1, 2)]),
        RatSimilitude::homothety(rat(1, 2), vec![rat(1, 1)]),
    ];
    let p = 1.0 / 3.0;
    IFSSystem::new(maps, vec![p, p, 1.0 - 2.0 * p]).unwrap().with_rational(rats).unwrap()
}

/// The exponentially separated pair {x/L - 1, x/L + 1} with L the root of
/// t^3 - t^2 - 2.
pub fn garsia() -> IFSSystem {
    let lam = garsia_lambda();
    let maps = vec![
        Similitude::homothety(1.0 / lam, DVector::from_vec(vec![1.0])),
        Similitude::homothety(1.0 / lam, DVector::from_vec(vec![-1.0])),
    ];
    IFSSystem::new(maps, vec![0.5, 0.5]).unwrap()
}

/// The 16-map planar product: all threefold compositions of the pair above
/// on the first axis, times the separated two-map subfamily (the two pure
/// cubes) on the second.
pub fn garsia_product() -> IFSSystem {
    let lam = garsia_lambda();
    let r1 = 1.0 / lam;
    // threefold compositions of (+1, -1) maps on the line
    let mut xs = Vec::new();
    for s1 in [1.0f64, -1.0] {
        for s2 in [1.0f64, -1.0] {
            for s3 in [1.0f64, -1.0] {
                // phi_{s1} o phi_{s2} o phi_{s3}(x) = x/l^3 + s3/l^2 + s2/l + s1
                xs.push(s1 + s2 * r1 + s3 * r1 * r1);
            }
        }
    }
    // the separated pair: phi_+^3 and phi_-^3
    let ys = [
        1.0 + r1 + r1 * r1,
        -(1.0 + r1 + r1 * r1),
    ];
    let r3 = r1 * r1 * r1;
    let mut maps = Vec::with_capacity(16);
    for &ax in &xs {
        for &ay in &ys {
            maps.push(Similitude::homothety(r3, DVector::from_vec(vec![ax, ay])));
        }
    }
    IFSSystem::uniform_probs(maps).unwrap()
}

/// Fat gasket in the linearly irreducible presentation: three maps
/// lambda R_{2pi/3} x + a_i with a_i the vertices of an equilateral
/// triangle.
pub fn fat_sierpinski(lambda: f64) -> Result<IFSSystem> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(FelError::InvalidParameter(format!("fat-sierpinski needs lambda in (0,1), got {lambda}")));
    }
    let u = crate::linalg::rotation2(2.0 * std::f64::consts::PI / 3.0);
    let vertices = [
        DVector::from_vec(vec![0.0, 0.0]),
        DVector::from_vec(vec![1.0, 0.0]),
        DVector::from_vec(vec![0.5, 3.0f64.sqrt() / 2.0]),
    ];
    let maps: Vec<Similitude> = vertices
        .iter()
        .map(|a| Similitude::from_ratio(lambda, u.clone(), a.clone()))
        .collect::<Result<Vec<_>>>()?;
    IFSSystem::uniform_probs(maps)
}

/// {beta x, gamma x + 1} with the natural-weight measure p_i = r_i^s for
/// s the similarity dimension of the attractor.
pub fn bernoulli(beta: f64, gamma: f64) -> Result<IFSSystem> {
    if !(beta > 0.0 && beta < 1.0 && gamma > 0.0 && gamma < 1.0) {
        return Err(FelError::InvalidParameter("bernoulli needs beta, gamma in (0,1)".into()));
    }
    let maps = vec![
        Similitude::homothety(beta, DVector::from_vec(vec![0.0])),
        Similitude::homothety(gamma, DVector::from_vec(vec![1.0])),
    ];
    // maximal-dimension weights: p_i = r_i^s with sum r_i^s = 1
    let tmp = IFSSystem::new(maps.clone(), vec![0.5, 0.5])?;
    let s = tmp.sdim_set();
    let p1 = beta.powf(s);
    let p2 = gamma.powf(s);
    let total = p1 + p2;
    IFSSystem::new(maps, vec![p1 / total, p2 / total])
}

/// General translation family member: fixed rotations and ratios, given
/// translations.
pub fn translation_system(
    us: &[DMatrix<f64>],
    rs: &[f64],
    translations: &[DVector<f64>],
) -> Result<IFSSystem> {
    if us.len() != rs.len() || us.len() != translations.len() {
        return Err(FelError::DimensionMismatch(us.len(), translations.len()));
    }
    let maps: Vec<Similitude> = us
        .iter()
        .zip(rs)
        .zip(translations)
        .map(|((u, &r), a)| Similitude::from_ratio(r, u.clone(), a.clone()))
        .collect::<Result<Vec<_>>>()?;
    IFSSystem::uniform_probs(maps)
}

fn cell_of(idx: &[i64]) -> Cell {
    let mut c = [0i64; MAX_DIM];
    c[..idx.len()].copy_from_slice(idx);
    c
}

/// Uniform measure on [0,1)^d at resolution l (use small l * d).
pub fn uniform_cube(d: usize, l: i64) -> Result<LatticeMeasure> {
    let n = 1i64 << l;
    let mut cells = Vec::new();
    match d {
        1 => {
            for i in 0..n {
                cells.push((cell_of(&[i]), 1.0));
            }
        }
        2 => {
            for i in 0..n {
                for j in 0..n {
                    cells.push((cell_of(&[i, j]), 1.0));
                }
            }
        }
        3 => {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        cells.push((cell_of(&[i, j, k]), 1.0));
                    }
                }
            }
        }
        _ => return Err(FelError::InvalidParameter("uniform cube supports d <= 3".into())),
    }
    LatticeMeasure::from_cells(d, l, cells)
}

/// Uniform measure on the x-axis segment [0, 2^{-gap}) embedded in R^2 at
/// resolution l, with one atom per level-l cell.
pub fn segment_x(l: i64, gap: i64) -> Result<LatticeMeasure> {
    let n = 1i64 << (l - gap);
    let cells: Vec<(Cell, f64)> = (0..n).map(|i| (cell_of(&[i, 0]), 1.0)).collect();
    LatticeMeasure::from_cells(2, l, cells)
}

/// Uniform measure on `count` equally spaced points of the unit circle.
pub fn circle_measure(count: usize, l: i64) -> Result<LatticeMeasure> {
    let atoms: Vec<(DVector<f64>, f64)> = (0..count)
        .map(|j| {
            let theta = std::f64::consts::TAU * j as f64 / count as f64;
            (DVector::from_vec(vec![theta.cos(), theta.sin()]), 1.0)
        })
        .collect();
    LatticeMeasure::from_atoms(&atoms, l)
}

/// Arithmetic-progression cascade on the line: stage i splits every atom
/// into an AP of length `len[i]` whose gap is 2^{-G_i}, G_i the running sum
/// of `gap_bits`. Atoms are dyadically aligned so digit blocks of distinct
/// stages never interact, in the measure or in its self-convolution.
pub fn ap_cascade(stages: &[(u64, i64)]) -> Result<LatticeMeasure> {
    if stages.is_empty() {
        return Err(FelError::EmptyInput("cascade stages"));
    }
    let mut total_bits = 0i64;
    for &(len, gap_bits) in stages {
        if len < 1 || gap_bits < 1 {
            return Err(FelError::InvalidParameter("cascade stage needs len >= 1, gap bits >= 1".into()));
        }
        if len as i64 > (1i64 << gap_bits.min(62)) {
            return Err(FelError::InvalidParameter("cascade stage overflows its gap".into()));
        }
        total_bits += gap_bits;
    }
    let level = total_bits;
    let mut indices: Vec<i64> = vec![0];
    let mut used = 0i64;
    for &(len, gap_bits) in stages {
        used += gap_bits;
        let unit = 1i64 << (level - used);
        let mut next = Vec::with_capacity(indices.len() * len as usize);
        for &base in &indices {
            for c in 0..len as i64 {
                next.push(base + c * unit);
            }
        }
        indices = next;
    }
    let w = 1.0 / indices.len() as f64;
    let cells: Vec<(Cell, f64)> = indices.into_iter().map(|i| (cell_of(&[i]), w)).collect();
    LatticeMeasure::from_cells(1, level, cells)
}

/// Parse a named system identifier such as "cantor3", "garsia",
/// "garsia-product", "fat-sierpinski(0.5)", "bernoulli(0.5,0.6)".
pub fn by_name(name: &str) -> Result<IFSSystem> {
    let name = name.trim();
    if let Some(rest) = name.strip_prefix("fat-sierpinski(") {
        let inner = rest.strip_suffix(')').ok_or_else(|| bad_name(name))?;
        let lam: f64 = inner.trim().parse().map_err(|_| bad_name(name))?;
        return fat_sierpinski(lam);
    }
    if let Some(rest) = name.strip_prefix("bernoulli(") {
        let inner = rest.strip_suffix(')').ok_or_else(|| bad_name(name))?;
        let parts: Vec<&str> = inner.split(',').collect();
        if parts.len() != 2 {
            return Err(bad_name(name));
        }
        let beta: f64 = parts[0].trim().parse().map_err(|_| bad_name(name))?;
        let gamma: f64 = parts[1].trim().parse().map_err(|_| bad_name(name))?;
        return bernoulli(beta, gamma);
    }
    match name {
        "cantor3" => Ok(cantor3()),
        "garsia" => Ok(garsia()),
        "garsia-product" => Ok(garsia_product()),
        "dyadic-overlap" => Ok(dyadic_overlap()),
        _ => Err(bad_name(name)),
    }
}

fn bad_name(name: &str) -> FelError {
    FelError::InvalidParameter(format!("unknown system '{name}'"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_are_accurate() {
        let lam = garsia_lambda();
        assert!((lam * lam * lam - lam * lam - 2.0).abs() < 1e-14);
        assert!(lam > 1.0 && lam < 2.0);

        let ls = fat_sierpinski_lambda_star();
        assert!((ls * ls * ls - ls * ls + ls - 0.5).abs() < 1e-14);
        assert!((ls - 0.6478).abs() < 5e-4);
    }

    #[test]
    fn garsia_product_sdim() {
        let sys = garsia_product();
        let lam = garsia_lambda();
        let want = (4.0 / 3.0) * 2.0f64.ln() / lam.ln();
        assert!((sys.sdim_set() - want).abs() < 1e-9, "{} vs {want}", sys.sdim_set());
        assert!(sys.sdim_set() < 2.0);
    }

    #[test]
    fn cascade_structure() {
        // two stages of length 4 with 6-bit gaps: 16 atoms at level 12
        let mu = ap_cascade(&[(4, 6), (4, 6)]).unwrap();
        assert_eq!(mu.level(), 12);
        assert_eq!(mu.support_len(), 16);
        assert!((mu.entropy_bits(12) - 4.0).abs() < 1e-12);
        // block additivity under self-convolution: H = 2 H(tri(7))
        let conv = mu.convolve(&mu).unwrap();
        let tri: Vec<f64> = [1.0, 2.0, 3.0, 4.0, 3.0, 2.0, 1.0].iter().map(|x| x / 16.0).collect();
        let h_tri: f64 = -tri.iter().map(|p: &f64| p * p.log2()).sum::<f64>();
        assert!((conv.entropy_bits(12) - 2.0 * h_tri).abs() < 1e-9);
    }

    #[test]
    fn name_parsing() {
        assert!(by_name("cantor3").is_ok());
        assert!(by_name("fat-sierpinski(0.5)").is_ok());
        assert!(by_name("bernoulli(0.5, 0.6)").is_ok());
        assert!(by_name("nonsense").is_err());
    }

    #[test]
    fn bernoulli_maximal_weights() {
        let sys = bernoulli(0.5, 0.5).unwrap();
        assert!((sys.probs()[0] - 0.5).abs() < 1e-12);
        // asymmetric case still sums to one and favors the larger ratio
        let sys = bernoulli(0.7, 0.4).unwrap();
        assert!(sys.probs()[0] > sys.probs()[1]);
    }

    #[test]
    fn circle_and_segment() {
        let c = circle_measure(128, 10).unwrap();
        assert!(c.support_len() > 100);
        let s = segment_x(24, 15).unwrap();
        assert_eq!(s.support_len(), 512);
        assert_eq!(s.dim(), 2);
    }
}
