//! Run configuration: defaults, config-file parsing (JSON or `key=value`
//! lines) and flag overrides, echoed verbatim into every report.

use clap::ValueEnum;
use luejump::{CoreError, JumpWeight, Precision};
use serde_json::json;

use crate::CommonArgs;

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl OutputFormat {
    fn as_str(&self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum SuiteSelection {
    Algebraic,
    Differential,
    Oracle,
    All,
}

impl SuiteSelection {
    fn as_str(&self) -> &'static str {
        match self {
            SuiteSelection::Algebraic => "algebraic",
            SuiteSelection::Differential => "differential",
            SuiteSelection::Oracle => "oracle",
            SuiteSelection::All => "all",
        }
    }
}

/// Fully resolved run parameters. Weight spec is either `(alpha, A, B)`
/// or `(alpha, lambda, beta)`; grid is a list of decimal strings so that
/// user-specified points survive re-serialization exactly.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub lambda_beta: Option<(f64, f64)>,
    pub n_max: usize,
    pub t_grid: Vec<String>,
    pub digits: u32,
    pub target_digits: u32,
    pub tolerance: f64,
    pub format: OutputFormat,
    pub output: Option<String>,
    pub suite: SuiteSelection,
    pub parallel: bool,
    pub include_quadrature: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            a: 1.0,
            b: 1.0,
            lambda_beta: None,
            n_max: 6,
            t_grid: vec!["1".into()],
            digits: 60,
            target_digits: 30,
            tolerance: 1e-20,
            format: OutputFormat::Json,
            output: None,
            suite: SuiteSelection::All,
            parallel: true,
            include_quadrature: false,
        }
    }
}

impl RunConfig {
    /// Defaults, overlaid by the config file, overlaid by flags. The gap
    /// preset pins `A = 0, B = 1` after all overrides.
    pub fn resolve(args: &CommonArgs, gap_preset: bool) -> Result<Self, String> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &args.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {path}: {e}"))?;
            cfg.apply_file(&text)?;
        }
        cfg.apply_flags(args)?;
        if gap_preset {
            cfg.a = 0.0;
            cfg.b = 1.0;
            cfg.lambda_beta = None;
        }
        if cfg.t_grid.is_empty() {
            return Err("empty t grid".into());
        }
        Ok(cfg)
    }

    fn apply_file(&mut self, text: &str) -> Result<(), String> {
        if text.trim_start().starts_with('{') {
            let doc: serde_json::Value =
                serde_json::from_str(text).map_err(|e| format!("config JSON: {e}"))?;
            let obj = doc
                .as_object()
                .ok_or_else(|| "config JSON must be an object".to_string())?;
            for (k, v) in obj {
                let s = match v {
                    serde_json::Value::String(s) => s.clone(),
                    serde_json::Value::Array(items) => items
                        .iter()
                        .map(|x| match x {
                            serde_json::Value::String(s) => s.clone(),
                            other => other.to_string(),
                        })
                        .collect::<Vec<_>>()
                        .join(","),
                    other => other.to_string(),
                };
                self.apply_kv(k, &s)?;
            }
            Ok(())
        } else {
            for line in text.lines() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| format!("config line without '=': {line}"))?;
                self.apply_kv(k.trim(), v.trim())?;
            }
            Ok(())
        }
    }

    fn apply_kv(&mut self, key: &str, value: &str) -> Result<(), String> {
        let bad = |e: String| format!("config key {key}: {e}");
        match key {
            "alpha" => self.alpha = value.parse().map_err(|e| bad(format!("{e}")))?,
            "a" | "A" => self.a = value.parse().map_err(|e| bad(format!("{e}")))?,
            "b" | "B" => self.b = value.parse().map_err(|e| bad(format!("{e}")))?,
            "lambda" => {
                let l: f64 = value.parse().map_err(|e| bad(format!("{e}")))?;
                let beta = self.lambda_beta.map(|(_, b)| b).unwrap_or(0.0);
                self.lambda_beta = Some((l, beta));
            }
            "beta" => {
                let b: f64 = value.parse().map_err(|e| bad(format!("{e}")))?;
                let lambda = self.lambda_beta.map(|(l, _)| l).unwrap_or(1.0);
                self.lambda_beta = Some((lambda, b));
            }
            "n_max" => self.n_max = value.parse().map_err(|e| bad(format!("{e}")))?,
            "t_grid" | "t" => {
                self.t_grid = value
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
            }
            "digits" => self.digits = value.parse().map_err(|e| bad(format!("{e}")))?,
            "target_digits" => {
                self.target_digits = value.parse().map_err(|e| bad(format!("{e}")))?
            }
            "tolerance" => self.tolerance = value.parse().map_err(|e| bad(format!("{e}")))?,
            "format" => {
                self.format = OutputFormat::from_str(value, true).map_err(bad)?;
            }
            "output" => self.output = Some(value.to_string()),
            "suite" => {
                self.suite = SuiteSelection::from_str(value, true).map_err(bad)?;
            }
            "sequential" => {
                let v: bool = value.parse().map_err(|e| bad(format!("{e}")))?;
                self.parallel = !v;
            }
            "quadrature" => {
                self.include_quadrature = value.parse().map_err(|e| bad(format!("{e}")))?
            }
            other => return Err(format!("unknown config key: {other}")),
        }
        Ok(())
    }

    fn apply_flags(&mut self, args: &CommonArgs) -> Result<(), String> {
        if let Some(v) = args.alpha {
            self.alpha = v;
        }
        if let Some(v) = args.a {
            self.a = v;
        }
        if let Some(v) = args.b {
            self.b = v;
        }
        if let (Some(l), Some(b)) = (args.lambda, args.beta) {
            self.lambda_beta = Some((l, b));
        }
        if let Some(v) = args.n_max {
            self.n_max = v;
        }
        if let Some(list) = &args.t {
            self.t_grid = list
                .iter()
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
        }
        if args.t_min.is_some() || args.t_max.is_some() || args.t_count.is_some() {
            let lo = args.t_min.ok_or("range grid needs --t-min")?;
            let hi = args.t_max.ok_or("range grid needs --t-max")?;
            let count = args.t_count.ok_or("range grid needs --t-count")?;
            let spacing = args.t_spacing.unwrap_or(Spacing::Linear);
            self.t_grid = generate_grid(lo, hi, count, spacing)?;
        }
        if let Some(v) = args.digits {
            self.digits = v;
        }
        if let Some(v) = args.target_digits {
            self.target_digits = v;
        }
        if let Some(v) = args.tolerance {
            self.tolerance = v;
        }
        if let Some(v) = args.format {
            self.format = v;
        }
        if let Some(v) = &args.output {
            self.output = Some(v.clone());
        }
        if let Some(v) = args.suite {
            self.suite = v;
        }
        if args.sequential {
            self.parallel = false;
        }
        if args.quadrature {
            self.include_quadrature = true;
        }
        Ok(())
    }

    /// Builds the weight at the first grid point; commands re-seat the
    /// jump with `with_t` as they walk the grid.
    pub fn weight(&self, prec: &Precision) -> Result<JumpWeight, CoreError> {
        let t0: f64 = self
            .t_grid
            .first()
            .and_then(|s| s.parse().ok())
            .unwrap_or(1.0);
        match self.lambda_beta {
            Some((lambda, beta)) => {
                JumpWeight::from_lambda_beta(self.alpha, lambda, beta, t0, prec)
            }
            None => JumpWeight::new(self.alpha, self.a, self.b, t0, prec),
        }
    }

    /// Config echo embedded in every report.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "alpha": self.alpha,
            "a": self.a,
            "b": self.b,
            "lambda_beta": self.lambda_beta.map(|(l, b)| json!([l, b])),
            "n_max": self.n_max,
            "t_grid": self.t_grid,
            "digits": self.digits,
            "target_digits": self.target_digits,
            "tolerance": self.tolerance,
            "format": self.format.as_str(),
            "output": self.output,
            "suite": self.suite.as_str(),
            "parallel": self.parallel,
            "quadrature": self.include_quadrature,
        })
    }
}

/// Evenly spaced grid, linear or logarithmic, rendered as decimal strings.
fn generate_grid(lo: f64, hi: f64, count: usize, spacing: Spacing) -> Result<Vec<String>, String> {
    if count < 1 {
        return Err("t grid count must be >= 1".into());
    }
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(format!("bad t range [{lo}, {hi}]"));
    }
    if spacing == Spacing::Log && lo <= 0.0 {
        return Err("log spacing needs t_min > 0".into());
    }
    let points: Vec<f64> = if count == 1 {
        vec![lo]
    } else {
        (0..count)
            .map(|i| {
                let frac = i as f64 / (count - 1) as f64;
                match spacing {
                    Spacing::Linear => lo + (hi - lo) * frac,
                    Spacing::Log => (lo.ln() + (hi.ln() - lo.ln()) * frac).exp(),
                }
            })
            .collect()
    };
    Ok(points.iter().map(|v| format!("{v}")).collect())
}
