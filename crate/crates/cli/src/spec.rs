//! Run configuration: file + flag merge, validation, and input parsing.

use serde::{Deserialize, Serialize};

use fel_core::config::default_budget;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<std::path::PathBuf>,
    pub format: String,
    pub threads: usize,
    pub budget: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure2: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isometry: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_min: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<usize>,
}

pub const COMMANDS: &[&str] = &[
    "analyze-ifs",
    "delta",
    "overlaps",
    "dim-estimate",
    "diagnostics",
    "conv-entropy",
    "kv-check",
    "inverse-verdict",
    "isometry-verdict",
    "slice",
    "scan",
    "cover",
];

impl RunConfig {
    /// Merge the config file (if any) with flags (flags win), then validate.
    pub fn assemble(args: crate::Args) -> Result<RunConfig, Vec<String>> {
        let mut cfg = RunConfig {
            format: "csv".to_string(),
            threads: 1,
            budget: default_budget(),
            ..RunConfig::default()
        };
        if let Some(path) = &args.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| vec![format!("cannot read config {}: {e}", path.display())])?;
            cfg = serde_json::from_str(&text)
                .map_err(|e| vec![format!("bad config JSON: {e}")])?;
            if cfg.format.is_empty() {
                cfg.format = "csv".into();
            }
            if cfg.threads == 0 {
                cfg.threads = 1;
            }
            if cfg.budget == 0 {
                cfg.budget = default_budget();
            }
        }
        if let Some(v) = args.command {
            cfg.command = v;
        }
        if let Some(v) = args.out {
            cfg.out = Some(v);
        }
        if let Some(v) = args.format {
            cfg.format = v;
        }
        if let Some(v) = args.threads {
            cfg.threads = v;
        }
        if let Some(v) = args.budget {
            cfg.budget = v;
        }
        macro_rules! take {
            ($($f:ident),*) => { $( if args.$f.is_some() { cfg.$f = args.$f; } )* };
        }
        take!(system, measure, measure2, isometry, family, diagnostics);
        take!(n, n_min, n_max, m, k, q, eps, sigma, level, p, grid_step, axis);

        let errors = cfg.validate();
        if errors.is_empty() {
            Ok(cfg)
        } else {
            Err(errors)
        }
    }

    /// Schema and cross-field checks; returns the full list of problems.
    pub fn validate(&self) -> Vec<String> {
        let mut errors = Vec::new();
        if self.command.is_empty() {
            errors.push("missing command".to_string());
            return errors;
        }
        if !COMMANDS.contains(&self.command.as_str()) {
            errors.push(format!("unknown command '{}'", self.command));
            return errors;
        }
        if self.format != "csv" && self.format != "json" {
            errors.push(format!("format must be csv or json, got '{}'", self.format));
        }
        if self.budget == 0 {
            errors.push("budget must be positive".to_string());
        }
        let need = |errors: &mut Vec<String>, cond: bool, msg: &str| {
            if !cond {
                errors.push(msg.to_string());
            }
        };
        match self.command.as_str() {
            "analyze-ifs" => {
                need(&mut errors, self.system.is_some(), "analyze-ifs needs --system");
            }
            "delta" => {
                need(&mut errors, self.system.is_some(), "delta needs --system");
                need(
                    &mut errors,
                    self.n.is_some() || (self.n_min.is_some() && self.n_max.is_some()),
                    "delta needs --n or --n-min/--n-max",
                );
            }
            "overlaps" => {
                need(&mut errors, self.system.is_some(), "overlaps needs --system");
                need(&mut errors, self.n_max.is_some() || self.n.is_some(), "overlaps needs --n-max");
            }
            "dim-estimate" => {
                need(&mut errors, self.system.is_some(), "dim-estimate needs --system");
                need(&mut errors, self.n.is_some(), "dim-estimate needs --n");
            }
            "diagnostics" => {
                need(&mut errors, self.system.is_some(), "diagnostics needs --system");
                need(
                    &mut errors,
                    self.n.is_some() || (self.n_min.is_some() && self.n_max.is_some()),
                    "diagnostics needs --n or --n-min/--n-max",
                );
                match self.q {
                    Some(q) if q > 1.0 => {}
                    Some(_) => errors.push("q must exceed 1".to_string()),
                    None => errors.push("diagnostics needs --q".to_string()),
                }
            }
            "conv-entropy" => {
                need(&mut errors, self.measure.is_some(), "conv-entropy needs --measure");
                need(&mut errors, self.measure2.is_some(), "conv-entropy needs --measure2");
                need(
                    &mut errors,
                    self.n.is_some() || (self.n_min.is_some() && self.n_max.is_some()),
                    "conv-entropy needs --n or --n-min/--n-max",
                );
            }
            "kv-check" => {
                need(&mut errors, self.measure.is_some(), "kv-check needs --measure");
                need(&mut errors, self.measure2.is_some(), "kv-check needs --measure2");
                need(&mut errors, self.n.is_some(), "kv-check needs --n");
                need(&mut errors, self.k.is_some(), "kv-check needs --k");
            }
            "inverse-verdict" => {
                need(&mut errors, self.measure.is_some(), "inverse-verdict needs --measure");
                need(&mut errors, self.measure2.is_some(), "inverse-verdict needs --measure2");
                need(&mut errors, self.n.is_some(), "inverse-verdict needs --n");
                need(&mut errors, self.m.is_some(), "inverse-verdict needs --m");
                need(&mut errors, self.eps.is_some(), "inverse-verdict needs --eps");
            }
            "isometry-verdict" => {
                need(&mut errors, self.isometry.is_some(), "isometry-verdict needs --isometry");
                need(&mut errors, self.measure.is_some(), "isometry-verdict needs --measure");
                need(&mut errors, self.n.is_some(), "isometry-verdict needs --n");
                need(&mut errors, self.m.is_some(), "isometry-verdict needs --m");
                need(&mut errors, self.k.is_some(), "isometry-verdict needs --k");
                need(&mut errors, self.eps.is_some(), "isometry-verdict needs --eps");
            }
            "slice" => {
                need(&mut errors, self.system.is_some(), "slice needs --system");
                need(&mut errors, self.n.is_some(), "slice needs --n");
                need(&mut errors, self.p.is_some(), "slice needs --p");
                need(&mut errors, self.axis.is_some(), "slice needs --axis");
            }
            "scan" => {
                need(&mut errors, self.family.is_some(), "scan needs --family");
                need(&mut errors, self.grid_step.is_some(), "scan needs --grid-step");
                need(&mut errors, self.diagnostics.is_some(), "scan needs --diagnostics");
            }
            "cover" => {
                need(&mut errors, self.family.is_some(), "cover needs --family");
                need(&mut errors, self.n.is_some(), "cover needs --n");
                need(&mut errors, self.eps.is_some(), "cover needs --eps");
                need(&mut errors, self.grid_step.is_some(), "cover needs --grid-step");
            }
            _ => unreachable!(),
        }
        if let (Some(m), Some(n)) = (self.m, self.n) {
            if self.command == "inverse-verdict" && m > n {
                errors.push(format!("m = {m} must not exceed n = {n}"));
            }
        }
        errors
    }
}
