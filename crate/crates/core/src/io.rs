//! File formats: IFS input JSON (with optional exact rational coefficients),
//! verdict serialization, and deterministic CSV emission.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{FelError, Result};
use crate::ifs::IFSSystem;
use crate::rational::{rat, Rat, RatSimilitude};
use crate::similitude::Similitude;
use crate::subspace::SubspaceRepr;
use crate::verdict::{IsometryVerdict, PairVerdict, Verdict};

/// A numeric entry that may be exact: plain float or [num, den].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumRepr {
    Float(f64),
    Ratio([i64; 2]),
}

impl NumRepr {
    fn as_f64(&self) -> f64 {
        match self {
            NumRepr::Float(x) => *x,
            NumRepr::Ratio([n, d]) => *n as f64 / *d as f64,
        }
    }
    fn as_rat(&self) -> Option<Rat> {
        match self {
            NumRepr::Float(_) => None,
            NumRepr::Ratio([n, d]) => Some(rat(*n, *d)),
        }
    }
}

/// One map of an IFS file: either t (log scale) or r (ratio), an optional
/// orthogonal part (row-major; identity when omitted), and the translation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapRepr {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<NumRepr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<NumRepr>>,
    pub a: Vec<NumRepr>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IfsRepr {
    pub d: usize,
    pub maps: Vec<MapRepr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<f64>>,
}

pub fn ifs_from_json(text: &str) -> Result<IFSSystem> {
    let repr: IfsRepr = serde_json::from_str(text)
        .map_err(|e| FelError::InvalidParameter(format!("bad IFS JSON: {e}")))?;
    let d = repr.d;
    let mut maps = Vec::with_capacity(repr.maps.len());
    let mut rats: Option<Vec<RatSimilitude>> = Some(Vec::new());
    for m in &repr.maps {
        let r = match (&m.r, m.t) {
            (Some(r), None) => r.as_f64(),
            (None, Some(t)) => (-t).exp2(),
            _ => {
                return Err(FelError::InvalidParameter(
                    "each map needs exactly one of r or t".into(),
                ))
            }
        };
        if m.a.len() != d {
            return Err(FelError::DimensionMismatch(m.a.len(), d));
        }
        let u = match &m.u {
            Some(entries) => {
                if entries.len() != d * d {
                    return Err(FelError::DimensionMismatch(entries.len(), d * d));
                }
                DMatrix::from_row_slice(d, d, &entries.iter().map(|x| x.as_f64()).collect::<Vec<_>>())
            }
            None => DMatrix::identity(d, d),
        };
        let a = DVector::from_vec(m.a.iter().map(|x| x.as_f64()).collect());
        maps.push(Similitude::from_ratio(r, u, a)?);

        // exact path only when every coefficient is a ratio pair
        if let Some(acc) = rats.as_mut() {
            let rr = m.r.as_ref().and_then(|x| x.as_rat());
            let ra: Option<Vec<Rat>> = m.a.iter().map(|x| x.as_rat()).collect();
            let ru: Option<Vec<Rat>> = match &m.u {
                Some(entries) => entries.iter().map(|x| x.as_rat()).collect(),
                None => {
                    let mut id = vec![rat(0, 1); d * d];
                    for i in 0..d {
                        id[i * d + i] = rat(1, 1);
                    }
                    Some(id)
                }
            };
            match (rr, ra, ru) {
                (Some(r), Some(a), Some(u)) => match RatSimilitude::new(r, u, a) {
                    Ok(rs) => acc.push(rs),
                    Err(_) => rats = None,
                },
                _ => rats = None,
            }
        }
    }
    let probs = match repr.probs {
        Some(p) => p,
        None => vec![1.0 / maps.len() as f64; maps.len()],
    };
    let sys = IFSSystem::new(maps, probs)?;
    match rats {
        Some(r) if r.len() == sys.alphabet_len() => sys.with_rational(r),
        _ => Ok(sys),
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VerdictRepr {
    pub entropy_before: f64,
    pub entropy_after: f64,
    pub growth: f64,
    pub subspaces: Vec<SubspaceRepr>,
    pub sat_fraction: f64,
    pub conc_fraction: f64,
    pub mean_dim: f64,
    pub passed: bool,
}

impl From<&Verdict> for VerdictRepr {
    fn from(v: &Verdict) -> Self {
        VerdictRepr {
            entropy_before: v.entropy_before,
            entropy_after: v.entropy_after,
            growth: v.growth,
            subspaces: v.subspaces.iter().map(SubspaceRepr::from).collect(),
            sat_fraction: v.sat_fraction,
            conc_fraction: v.conc_fraction,
            mean_dim: v.mean_dim,
            passed: v.passed,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PairVerdictRepr {
    pub nu_cell_level: i64,
    pub nu_cell: Vec<i64>,
    pub mu_cell: Vec<i64>,
    pub mass: f64,
    pub verdict: VerdictRepr,
}

impl From<&PairVerdict> for PairVerdictRepr {
    fn from(p: &PairVerdict) -> Self {
        PairVerdictRepr {
            nu_cell_level: p.nu_cell.level,
            nu_cell: p.nu_cell.coords.clone(),
            mu_cell: p.mu_cell.clone(),
            mass: p.mass,
            verdict: VerdictRepr::from(&p.verdict),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct IsometryVerdictRepr {
    pub growth: f64,
    pub nu_entropy_rate: f64,
    pub pass_rate: f64,
    pub mean_dim: f64,
    pub mean_dim_reference: f64,
    pub pairs: Vec<PairVerdictRepr>,
}

impl From<&IsometryVerdict> for IsometryVerdictRepr {
    fn from(v: &IsometryVerdict) -> Self {
        IsometryVerdictRepr {
            growth: v.growth,
            nu_entropy_rate: v.nu_entropy_rate,
            pass_rate: v.pass_rate,
            mean_dim: v.mean_dim,
            mean_dim_reference: v.mean_dim_reference,
            pairs: v.pairs.iter().map(PairVerdictRepr::from).collect(),
        }
    }
}

/// Shortest-roundtrip float formatting (Rust's default Display), which is
/// platform- and thread-count-independent.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x}")
    }
}

/// A CSV table with a fixed header; rows are written in insertion order.
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_header(header: Vec<String>) -> Self {
        CsvTable { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}
