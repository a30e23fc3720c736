//! Run configuration: a TOML file with `[problem]`, `[trial]`, `[train]`,
//! `[sweep]` and `[output]` sections, overridden by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use pinncert::certify::{SweepConfig, DEFAULT_FD_MESH};
use pinncert::net::{DEFAULT_DEPTH, DEFAULT_WIDTH};
use pinncert::problem::ProblemSpec;
use pinncert::train::{LossSpec, TrainConfig};
use pinncert::trial::TrialKind;

/// Environment variable holding the default output directory.
pub const OUT_ENV: &str = "PINNCERT_OUT";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub trial: TrialSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    /// Registry entry; excludes the custom keys below.
    pub example: Option<String>,
    pub interval: Option<[f64; 2]>,
    pub eps: Option<f64>,
    pub b: Option<String>,
    pub c: Option<String>,
    pub f: Option<String>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub exact: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialSection {
    pub kind: Option<String>,
    pub depth: Option<usize>,
    pub width: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: Option<usize>,
    pub steps_per_epoch: Option<usize>,
    pub n: Option<usize>,
    pub resample: Option<bool>,
    pub seed: Option<u64>,
    pub lr: Option<f64>,
    pub boundary_weight: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: Option<String>,
    pub values: Option<Values>,
    pub jobs: Option<usize>,
}

/// Sweep values: an explicit list or a range string (see [`parse_values`]).
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Values {
    List(Vec<f64>),
    Range(String),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: Option<PathBuf>,
    pub emit_svg: Option<bool>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("malformed config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let pr = &self.problem;
        let custom_keys = [
            ("interval", pr.interval.is_some()),
            ("b", pr.b.is_some()),
            ("c", pr.c.is_some()),
            ("f", pr.f.is_some()),
            ("p", pr.p.is_some()),
            ("q", pr.q.is_some()),
            ("exact", pr.exact.is_some()),
        ];
        if let Some(name) = &pr.example {
            if let Some((key, _)) = custom_keys.iter().find(|(_, set)| *set) {
                bail!("problem.{key} cannot be combined with problem.example");
            }
            let mut params = pr.params.clone();
            if let Some(eps) = pr.eps {
                params.insert("eps".into(), eps);
            }
            return Ok(ProblemSpec::registry(name, params));
        }
        if custom_keys.iter().all(|(_, set)| !set) {
            bail!("no problem given: set problem.example or the custom keys problem.b, problem.c, problem.f, ...");
        }
        let need = |v: Option<f64>, key: &str| v.ok_or_else(|| anyhow!("missing key problem.{key}"));
        let need_s = |v: &Option<String>, key: &str| v.clone().ok_or_else(|| anyhow!("missing key problem.{key}"));
        let [x1, x2] = pr.interval.ok_or_else(|| anyhow!("missing key problem.interval"))?;
        Ok(ProblemSpec::Custom {
            x1,
            x2,
            eps: need(pr.eps, "eps")?,
            b: need_s(&pr.b, "b")?,
            c: need_s(&pr.c, "c")?,
            f: need_s(&pr.f, "f")?,
            p: need(pr.p, "p")?,
            q: need(pr.q, "q")?,
            params: pr.params.clone(),
            exact: pr.exact.clone(),
        })
    }

    pub fn kind(&self) -> Result<TrialKind> {
        match &self.trial.kind {
            None => Ok(TrialKind::Pinn2),
            Some(s) => TrialKind::parse(s).ok_or_else(|| anyhow!("trial.kind: unknown trial kind {s:?} (pinn1 or pinn2)")),
        }
    }

    pub fn loss_spec(&self) -> Result<LossSpec> {
        let mut spec = LossSpec::new(self.kind()?, self.train.n.unwrap_or(256));
        if spec.n == 0 {
            bail!("train.n must be positive");
        }
        if let Some(r) = self.train.resample {
            spec.resample = r;
        }
        if let Some(w) = self.train.boundary_weight {
            if !(w.is_finite() && w >= 0.0) {
                bail!("train.boundary_weight must be a non-negative number");
            }
            spec.boundary_weight = w;
        }
        Ok(spec)
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let mut cfg = TrainConfig::default();
        let t = &self.train;
        if let Some(e) = t.epochs {
            cfg.epochs = e;
        }
        if let Some(s) = t.steps_per_epoch {
            if s == 0 {
                bail!("train.steps_per_epoch must be positive");
            }
            cfg.steps_per_epoch = s;
        }
        if let Some(lr) = t.lr {
            if !(lr.is_finite() && lr > 0.0) {
                bail!("train.lr must be a positive number");
            }
            cfg.lr = lr;
        }
        cfg.seed = self.seed();
        Ok(cfg)
    }

    pub fn seed(&self) -> u64 {
        self.train.seed.unwrap_or(0)
    }

    pub fn depth(&self) -> usize {
        self.trial.depth.unwrap_or(DEFAULT_DEPTH)
    }

    pub fn width(&self) -> usize {
        self.trial.width.unwrap_or(DEFAULT_WIDTH)
    }

    pub fn sweep_config(&self) -> Result<SweepConfig> {
        Ok(SweepConfig {
            depth: self.depth(),
            width: self.width(),
            loss: self.loss_spec()?,
            train: self.train_config()?,
            jobs: self.sweep.jobs.unwrap_or(0),
            fd_mesh: DEFAULT_FD_MESH,
        })
    }

    pub fn sweep_values(&self) -> Result<Vec<f64>> {
        match &self.sweep.values {
            None => bail!("missing key sweep.values"),
            Some(Values::List(v)) if v.is_empty() => bail!("sweep.values is empty"),
            Some(Values::List(v)) => Ok(v.clone()),
            Some(Values::Range(s)) => parse_values(s).context("sweep.values"),
        }
    }

    /// Output directory: config, then the environment, then `out`.
    pub fn out_dir(&self) -> PathBuf {
        self.output
            .directory
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn emit_svg(&self) -> bool {
        self.output.emit_svg.unwrap_or(true)
    }

    pub fn set_param(&mut self, name: &str, value: f64) {
        if name == "eps" {
            self.problem.eps = Some(value);
        } else {
            self.problem.params.insert(name.to_string(), value);
        }
    }
}

/// Parse `a:b:Nlog` (log-spaced), `a:b:N` (evenly spaced) or a comma list.
pub fn parse_values(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    let num = |t: &str| -> Result<f64> {
        let v: f64 = t.trim().parse().map_err(|_| anyhow!("not a number: {t:?}"))?;
        if !v.is_finite() {
            bail!("not a finite number: {t:?}");
        }
        Ok(v)
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, count] = parts[..] else {
            bail!("range must look like a:b:N or a:b:Nlog, got {s:?}");
        };
        let (a, b) = (num(a)?, num(b)?);
        let (count, log) = match count.trim().strip_suffix("log") {
            Some(c) => (c, true),
            None => (count.trim(), false),
        };
        let n: usize = count.parse().map_err(|_| anyhow!("bad point count {count:?} in {s:?}"))?;
        if n == 0 {
            bail!("range {s:?} has no points");
        }
        if n == 1 {
            return Ok(vec![a]);
        }
        if log && (a <= 0.0 || b <= 0.0) {
            bail!("log range needs positive endpoints, got {s:?}");
        }
        let mut out: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                let v = if log { (a.ln() + t * (b.ln() - a.ln())).exp() } else { a + t * (b - a) };
                // 12 significant digits keeps 10 from printing as 10.000000000000002
                format!("{v:.11e}").parse::<f64>().unwrap_or(v)
            })
            .collect();
        out[0] = a;
        out[n - 1] = b;
        return Ok(out);
    }
    let out = s.split(',').map(num).collect::<Result<Vec<_>>>()?;
    if out.is_empty() {
        bail!("no values given");
    }
    Ok(out)
}

/// Parse `name=value`.
pub fn parse_assignment(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got {s:?}"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("not a number in {s:?}"))?;
    Ok((k.trim().to_string(), v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_range_hits_endpoints() {
        let v = parse_values("1:100:12log").unwrap();
        assert_eq!(v.len(), 12);
        assert_eq!(v[0], 1.0);
        assert_eq!(v[11], 100.0);
        assert_eq!(parse_values("1:100:3log").unwrap(), vec![1.0, 10.0, 100.0]);
        for w in v.windows(2) {
            assert!((w[1] / w[0] - 100f64.powf(1.0 / 11.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn linear_range_and_list() {
        assert_eq!(parse_values("0:1:5").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_values("1, 0.5,0.1").unwrap(), vec![1.0, 0.5, 0.1]);
        assert!(parse_values("0:1:3log").is_err());
        assert!(parse_values("1:2").is_err());
        assert!(parse_values("a,b").is_err());
    }

    #[test]
    fn registry_config() {
        let cfg = Config::parse(
            r#"
            [problem]
            example = "example51"
            eps = 0.5
            [problem.params]
            k = 10
            lambda = 15
            [train]
            epochs = 20
            seed = 4
            "#,
        )
        .unwrap();
        let spec = cfg.problem_spec().unwrap();
        let prob = spec.build().unwrap();
        assert_eq!(prob.eps(), 0.5);
        assert_eq!(prob.params()["k"], 10.0);
        assert_eq!(cfg.train_config().unwrap().epochs, 20);
        assert_eq!(cfg.train_config().unwrap().seed, 4);
    }

    #[test]
    fn custom_config() {
        let cfg = Config::parse(
            r#"
            [problem]
            interval = [0.0, 2.0]
            eps = 1.0
            b = "a*x"
            c = "1"
            f = "1"
            p = 0.0
            q = 0.0
            [problem.params]
            a = 1.5
            "#,
        )
        .unwrap();
        let prob = cfg.problem_spec().unwrap().build().unwrap();
        assert_eq!(prob.interval(), (0.0, 2.0));
        assert_eq!(prob.b(1.0).unwrap(), 1.5);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(Config::parse("[problem]\nexampel = \"example51\"").is_err());
        assert!(Config::parse("[nonsense]\n").is_err());
        let missing = Config::parse("[problem]\nb = \"1\"\n").unwrap();
        let msg = missing.problem_spec().unwrap_err().to_string();
        assert!(msg.contains("problem.interval"), "{msg}");
        let mixed = Config::parse("[problem]\nexample = \"example51\"\nb = \"1\"\n").unwrap();
        assert!(mixed.problem_spec().is_err());
        let kind = Config::parse("[trial]\nkind = \"pinn3\"\n").unwrap();
        assert!(kind.kind().is_err());
    }

    #[test]
    fn sweep_values_from_list_or_range() {
        let cfg = Config::parse("[sweep]\nparameter = \"lambda\"\nvalues = [1.0, 2.0]\n").unwrap();
        assert_eq!(cfg.sweep_values().unwrap(), vec![1.0, 2.0]);
        let cfg = Config::parse("[sweep]\nvalues = \"1:10:2log\"\n").unwrap();
        assert_eq!(cfg.sweep_values().unwrap(), vec![1.0, 10.0]);
    }
}
