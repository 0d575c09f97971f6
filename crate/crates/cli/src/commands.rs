//! Command dispatch: parse inputs, run the analysis, emit CSV/JSON plus a
//! manifest sidecar carrying the full run configuration.

use std::path::Path;

use nalgebra::DVector;

use fel_core::config::Config;
use fel_core::delta::{delta_n, exact_overlaps};
use fel_core::family::{self, Diagnostic, ParamFamily};
use fel_core::io::{fmt_f64, CsvTable, IsometryVerdictRepr, VerdictRepr};
use fel_core::measure::{LatticeMeasure, LatticeMeasureRepr};
use fel_core::named;
use fel_core::satcon::kv_check;
use fel_core::similitude::Similitude;
use fel_core::simmeasure::SimMeasure;
use fel_core::subspace::Subspace;
use fel_core::verdict::{inverse_verdict, isometry_verdict};
use fel_core::{FelError, IFSSystem, Result};

use crate::spec::RunConfig;

pub fn run(cfg: &RunConfig) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.max(1))
        .build()
        .map_err(|e| FelError::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(cfg))
}

fn dispatch(cfg: &RunConfig) -> Result<()> {
    let body = match cfg.command.as_str() {
        "analyze-ifs" => analyze_ifs(cfg)?,
        "delta" => delta_table(cfg)?,
        "overlaps" => overlaps(cfg)?,
        "dim-estimate" => dim_estimate(cfg)?,
        "diagnostics" => diagnostics(cfg)?,
        "conv-entropy" => conv_entropy(cfg)?,
        "kv-check" => kv(cfg)?,
        "inverse-verdict" => inverse(cfg)?,
        "isometry-verdict" => isometry(cfg)?,
        "slice" => slice(cfg)?,
        "scan" => scan(cfg)?,
        "cover" => cover(cfg)?,
        other => return Err(FelError::InvalidParameter(format!("unknown command {other}"))),
    };
    emit(cfg, &body)
}

fn emit(cfg: &RunConfig, body: &str) -> Result<()> {
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, body)
                .map_err(|e| FelError::InvalidParameter(format!("write {}: {e}", path.display())))?;
            let manifest = serde_json::json!({
                "tool": "fel",
                "version": env!("CARGO_PKG_VERSION"),
                "config": cfg,
            });
            let mpath = manifest_path(path);
            std::fs::write(&mpath, serde_json::to_string_pretty(&manifest).unwrap())
                .map_err(|e| FelError::InvalidParameter(format!("write {}: {e}", mpath.display())))?;
        }
        None => {
            print!("{body}");
        }
    }
    Ok(())
}

fn manifest_path(path: &Path) -> std::path::PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    path.with_file_name(name)
}

fn load_system(cfg: &RunConfig) -> Result<IFSSystem> {
    let spec = cfg.system.as_ref().expect("validated");
    if Path::new(spec).exists() {
        let text = std::fs::read_to_string(spec)
            .map_err(|e| FelError::InvalidParameter(format!("read {spec}: {e}")))?;
        fel_core::io::ifs_from_json(&text)
    } else {
        named::by_name(spec)
    }
}

/// Parse "name(args)" synth specs such as uniform(2,6) or cascade(4:6,4:6).
fn parse_call(spec: &str) -> Option<(&str, Vec<&str>)> {
    let open = spec.find('(')?;
    let close = spec.rfind(')')?;
    let name = &spec[..open];
    let args: Vec<&str> = spec[open + 1..close].split(',').map(|s| s.trim()).collect();
    Some((name, args))
}

pub fn load_measure(spec: &str) -> Result<LatticeMeasure> {
    if Path::new(spec).exists() {
        let text = std::fs::read_to_string(spec)
            .map_err(|e| FelError::InvalidParameter(format!("read {spec}: {e}")))?;
        let repr: LatticeMeasureRepr = serde_json::from_str(&text)
            .map_err(|e| FelError::InvalidParameter(format!("bad measure JSON: {e}")))?;
        return LatticeMeasure::try_from(repr);
    }
    let (name, args) = parse_call(spec)
        .ok_or_else(|| FelError::InvalidParameter(format!("unknown measure spec '{spec}'")))?;
    let geti = |i: usize| -> Result<i64> {
        args.get(i)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| FelError::InvalidParameter(format!("bad argument {i} in '{spec}'")))
    };
    match name {
        "uniform" => named::uniform_cube(geti(0)? as usize, geti(1)?),
        "segment" => named::segment_x(geti(0)?, geti(1)?),
        "circle" => named::circle_measure(geti(0)? as usize, geti(1)?),
        "dirac" => {
            let d = geti(0)? as usize;
            LatticeMeasure::dirac(&DVector::zeros(d), geti(1)?)
        }
        "cascade" => {
            let stages: Vec<(u64, i64)> = args
                .iter()
                .map(|a| {
                    let parts: Vec<&str> = a.split(':').collect();
                    let len = parts.first().and_then(|s| s.parse().ok());
                    let gap = parts.get(1).and_then(|s| s.parse().ok());
                    match (len, gap, parts.len()) {
                        (Some(l), Some(g), 2) => Ok((l, g)),
                        _ => Err(FelError::InvalidParameter(format!("bad cascade stage '{a}'"))),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            named::ap_cascade(&stages)
        }
        _ => Err(FelError::InvalidParameter(format!("unknown measure '{name}'"))),
    }
}

fn load_isometry(spec: &str) -> Result<SimMeasure> {
    let (name, args) = parse_call(spec)
        .ok_or_else(|| FelError::InvalidParameter(format!("unknown isometry spec '{spec}'")))?;
    match name {
        "rotations" => {
            let count: usize = args
                .first()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| FelError::InvalidParameter("rotations(count)".into()))?;
            let atoms: Vec<(Similitude, f64)> = (0..count)
                .map(|j| {
                    let theta = std::f64::consts::TAU * j as f64 / count as f64;
                    (
                        Similitude::new(0.0, fel_core::linalg::rotation2(theta), DVector::zeros(2))
                            .unwrap(),
                        1.0,
                    )
                })
                .collect();
            SimMeasure::new(atoms)
        }
        _ => Err(FelError::InvalidParameter(format!("unknown isometry '{name}'"))),
    }
}

fn load_family(spec: &str) -> Result<ParamFamily> {
    match parse_call(spec) {
        Some(("bernoulli", args)) if args.len() == 4 => {
            let v: Vec<f64> = args
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| FelError::InvalidParameter(format!("bad family '{spec}'")))?;
            Ok(ParamFamily::bernoulli((v[0], v[1]), (v[2], v[3])))
        }
        Some(("fat-sierpinski", args)) if args.len() == 2 => {
            let lo: f64 = args[0].parse().map_err(|_| FelError::InvalidParameter(format!("bad family '{spec}'")))?;
            let hi: f64 = args[1].parse().map_err(|_| FelError::InvalidParameter(format!("bad family '{spec}'")))?;
            Ok(ParamFamily::fat_sierpinski(lo, hi))
        }
        _ => Err(FelError::InvalidParameter(format!(
            "unknown family '{spec}' (use bernoulli(b0,b1,g0,g1) or fat-sierpinski(lo,hi))"
        ))),
    }
}

fn n_range(cfg: &RunConfig) -> (i64, i64) {
    match (cfg.n, cfg.n_min, cfg.n_max) {
        (_, Some(a), Some(b)) => (a, b),
        (Some(n), _, _) => (n, n),
        _ => (1, 1),
    }
}

fn analyze_ifs(cfg: &RunConfig) -> Result<String> {
    let sys = load_system(cfg)?;
    let n = cfg.n.unwrap_or(6).max(1) as u32;
    let mut deltas = Vec::new();
    for k in 1..=n.min(10) {
        if sys.word_count(k) > cfg.budget {
            break;
        }
        let rep = delta_n(&sys, k, cfg.budget)?;
        deltas.push(serde_json::json!({"n": k, "delta": rep.delta}));
    }
    let overlap = exact_overlaps(&sys, n.min(8), cfg.budget)?;
    let out = serde_json::json!({
        "alphabet": sys.alphabet_len(),
        "d": sys.dim(),
        "sdim_set": sys.sdim_set(),
        "sdim_measure": sys.sdim_measure(),
        "mean_contraction": sys.mean_contraction(),
        "n_prime": sys.n_prime(n),
        "exact_arithmetic": sys.rational().is_some(),
        "delta_table": deltas,
        "overlap": overlap.map(|o| serde_json::json!({
            "n": o.n,
            "words": [words1(&o.words.0), words1(&o.words.1)],
            "exact": o.exact,
        })),
    });
    Ok(format!("{}\n", serde_json::to_string_pretty(&out).unwrap()))
}

fn words1(w: &[u8]) -> Vec<u32> {
    w.iter().map(|&c| c as u32 + 1).collect()
}

fn delta_table(cfg: &RunConfig) -> Result<String> {
    let sys = load_system(cfg)?;
    let (lo, hi) = n_range(cfg);
    let mut table = CsvTable::new(&["n", "delta", "log2_delta_over_n", "word_a", "word_b"]);
    for n in lo..=hi {
        let rep = delta_n(&sys, n as u32, cfg.budget)?;
        let rate = if rep.delta > 0.0 { rep.delta.log2() / n as f64 } else { f64::NEG_INFINITY };
        table.push(vec![
            n.to_string(),
            fmt_f64(rep.delta),
            fmt_f64(rate),
            fmt_word(&rep.argmin.0),
            fmt_word(&rep.argmin.1),
        ]);
    }
    Ok(table.to_string())
}

fn fmt_word(w: &[u8]) -> String {
    let parts: Vec<String> = w.iter().map(|&c| (c as u32 + 1).to_string()).collect();
    parts.join("|")
}

fn overlaps(cfg: &RunConfig) -> Result<String> {
    let sys = load_system(cfg)?;
    let n_max = cfg.n_max.or(cfg.n).unwrap_or(4) as u32;
    let rep = exact_overlaps(&sys, n_max, cfg.budget)?;
    let out = match rep {
        Some(o) => serde_json::json!({
            "found": true,
            "n": o.n,
            "words": [words1(&o.words.0), words1(&o.words.1)],
            "exact": o.exact,
        }),
        None => serde_json::json!({"found": false, "n_max": n_max}),
    };
    Ok(format!("{}\n", serde_json::to_string_pretty(&out).unwrap()))
}

fn dim_estimate(cfg: &RunConfig) -> Result<String> {
    let sys = load_system(cfg)?;
    let n = cfg.n.unwrap() as u32;
    let est = sys.dim_estimate(n, cfg.budget)?;
    let mut table = CsvTable::new(&["n", "n_prime", "dim_estimate", "sdim"]);
    table.push(vec![
        n.to_string(),
        sys.n_prime(n).to_string(),
        fmt_f64(est),
        fmt_f64(sys.sdim_set()),
    ]);
    Ok(table.to_string())
}

fn diagnostics(cfg: &RunConfig) -> Result<String> {
    let sys = load_system(cfg)?;
    let q = cfg.q.unwrap();
    let (lo, hi) = n_range(cfg);
    let mut table = CsvTable::new(&["n", "n_prime", "a", "b", "c"]);
    for n in lo..=hi {
        let d = sys.entropy_diagnostics(n as u32, q, cfg.budget)?;
        table.push(vec![
            n.to_string(),
            d.n_prime.to_string(),
            fmt_f64(d.a),
            fmt_f64(d.b),
            fmt_f64(d.c),
        ]);
    }
    Ok(table.to_string())
}

fn conv_entropy(cfg: &RunConfig) -> Result<String> {
    let mu = load_measure(cfg.measure.as_ref().unwrap())?;
    let nu = load_measure(cfg.measure2.as_ref().unwrap())?;
    let conv = mu.convolve(&nu)?;
    let (lo, hi) = n_range(cfg);
    let mut table = CsvTable::new(&["n", "h_mu", "h_nu", "h_conv", "growth"]);
    for n in lo.max(1)..=hi {
        let hm = mu.entropy_bits(n) / n as f64;
        let hn = nu.entropy_bits(n) / n as f64;
        let hc = conv.entropy_bits(n) / n as f64;
        table.push(vec![
            n.to_string(),
            fmt_f64(hm),
            fmt_f64(hn),
            fmt_f64(hc),
            fmt_f64(hc - hm),
        ]);
    }
    Ok(table.to_string())
}

fn kv(cfg: &RunConfig) -> Result<String> {
    let mu = load_measure(cfg.measure.as_ref().unwrap())?;
    let nu = load_measure(cfg.measure2.as_ref().unwrap())?;
    let n = cfg.n.unwrap();
    let k = cfg.k.unwrap() as u32;
    let c_kv = 4.0 * mu.dim() as f64;
    let rep = kv_check(&mu, &nu, k, n, c_kv)?;
    let out = serde_json::json!({
        "n": n,
        "k": k,
        "c_kv": c_kv,
        "lhs": rep.lhs,
        "rhs": rep.rhs,
        "slack": rep.slack,
        "discrete_deltas": rep.discrete_deltas,
        "discrete_monotone": rep.discrete_monotone,
    });
    Ok(format!("{}\n", serde_json::to_string_pretty(&out).unwrap()))
}

fn inverse(cfg: &RunConfig) -> Result<String> {
    let mu = load_measure(cfg.measure.as_ref().unwrap())?;
    let nu = load_measure(cfg.measure2.as_ref().unwrap())?;
    let core_cfg = Config::default();
    let v = inverse_verdict(&mu, &nu, cfg.n.unwrap(), cfg.eps.unwrap(), cfg.m.unwrap(), &core_cfg)?;
    if cfg.format == "json" {
        let repr = VerdictRepr::from(&v);
        Ok(format!("{}\n", serde_json::to_string_pretty(&repr).unwrap()))
    } else {
        let mut table = CsvTable::new(&[
            "n",
            "growth",
            "sat_fraction",
            "conc_fraction",
            "mean_dim",
            "passed",
        ]);
        table.push(vec![
            cfg.n.unwrap().to_string(),
            fmt_f64(v.growth),
            fmt_f64(v.sat_fraction),
            fmt_f64(v.conc_fraction),
            fmt_f64(v.mean_dim),
            v.passed.to_string(),
        ]);
        Ok(table.to_string())
    }
}

fn isometry(cfg: &RunConfig) -> Result<String> {
    let nu = load_isometry(cfg.isometry.as_ref().unwrap())?;
    let mu = load_measure(cfg.measure.as_ref().unwrap())?;
    let core_cfg = Config::default();
    let v = isometry_verdict(
        &nu,
        &mu,
        cfg.k.unwrap(),
        cfg.n.unwrap(),
        cfg.eps.unwrap(),
        cfg.m.unwrap(),
        &core_cfg,
    )?;
    if cfg.format == "json" {
        let repr = IsometryVerdictRepr::from(&v);
        Ok(format!("{}\n", serde_json::to_string_pretty(&repr).unwrap()))
    } else {
        let mut table =
            CsvTable::new(&["growth", "nu_entropy_rate", "pass_rate", "mean_dim", "pairs"]);
        table.push(vec![
            fmt_f64(v.growth),
            fmt_f64(v.nu_entropy_rate),
            fmt_f64(v.pass_rate),
            fmt_f64(v.mean_dim),
            v.pairs.len().to_string(),
        ]);
        Ok(table.to_string())
    }
}

fn slice(cfg: &RunConfig) -> Result<String> {
    let sys = load_system(cfg)?;
    let axis = cfg.axis.unwrap();
    if axis >= sys.dim() {
        return Err(FelError::InvalidParameter(format!("axis {axis} out of range")));
    }
    let v = Subspace::axes(sys.dim(), &[axis]);
    let s = sys.slice_entropy(&v, cfg.n.unwrap(), cfg.p.unwrap(), cfg.budget)?;
    let mut table = CsvTable::new(&["axis", "depth", "proj_avg", "cond_avg", "total"]);
    table.push(vec![
        axis.to_string(),
        s.depth.to_string(),
        fmt_f64(s.proj_avg),
        fmt_f64(s.cond_avg),
        fmt_f64(s.total()),
    ]);
    Ok(table.to_string())
}

fn parse_diagnostics(cfg: &RunConfig) -> Result<Vec<Diagnostic>> {
    let n = cfg.n.unwrap_or(8) as u32;
    let q = cfg.q.unwrap_or(1.5);
    cfg.diagnostics
        .as_ref()
        .unwrap()
        .split(',')
        .map(|s| match s.trim() {
            "sdim" => Ok(Diagnostic::Sdim),
            "sdim-measure" => Ok(Diagnostic::SdimMeasure),
            "dim-estimate" => Ok(Diagnostic::DimEstimate { n }),
            "delta" => Ok(Diagnostic::DeltaN { n }),
            "diag" => Ok(Diagnostic::EntropyDiag { n, q }),
            other => Err(FelError::InvalidParameter(format!("unknown diagnostic '{other}'"))),
        })
        .collect()
}

fn scan(cfg: &RunConfig) -> Result<String> {
    let fam = load_family(cfg.family.as_ref().unwrap())?;
    let diags = parse_diagnostics(cfg)?;
    let grid = family::domain_grid(&fam, cfg.grid_step.unwrap());
    let rows = family::scan(&fam, &grid, &diags, cfg.budget);
    let mut header: Vec<String> = (0..fam.param_dim()).map(|i| format!("t{i}")).collect();
    for d in &diags {
        header.extend(d.columns());
    }
    header.push("error".to_string());
    let mut table = CsvTable::with_header(header);
    for row in rows {
        let mut cells: Vec<String> = row.t.iter().map(|&x| fmt_f64(x)).collect();
        for v in &row.values {
            cells.push(v.map(fmt_f64).unwrap_or_default());
        }
        cells.push(row.error.unwrap_or_default());
        table.push(cells);
    }
    Ok(table.to_string())
}

fn cover(cfg: &RunConfig) -> Result<String> {
    let fam = load_family(cfg.family.as_ref().unwrap())?;
    let rep = family::exceptional_cover(
        &fam,
        cfg.n.unwrap() as u32,
        cfg.eps.unwrap(),
        cfg.grid_step.unwrap(),
        cfg.budget,
    )?;
    let mut header: Vec<String> = (0..fam.param_dim()).map(|i| format!("t{i}")).collect();
    header.extend(["min_delta_inf".to_string(), "hit".to_string()]);
    let mut table = CsvTable::with_header(header);
    for cell in &rep.cells {
        let mut row: Vec<String> = cell.t.iter().map(|&x| fmt_f64(x)).collect();
        row.push(fmt_f64(cell.min_delta_inf));
        row.push(cell.hit.to_string());
        table.push(row);
    }
    let mut out = table.to_string();
    out.push_str(&format!(
        "# hit_count,{},threshold,{},bound,{}\n",
        rep.hit_count,
        fmt_f64(rep.threshold),
        fmt_f64(rep.bound)
    ));
    Ok(out)
}
