//! Flat key=value pipeline configuration and stage scheduling.

use std::fmt;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Result};
use inclab_core::rational::{parse_rat, rat_int, Rat};
use inclab_core::transforms::ShearFunction;

/// Pipeline stages. `Build` is the root and always runs; everything else is
/// a toggle listed in the config (or implied by the CLI verb).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Build,
    Energy,
    Family,
    Histogram,
    Select,
    K2t,
    Dualize,
    Invert,
    Shear,
    Sparsify,
    Fit,
}

pub const CANONICAL: [Stage; 11] = [
    Stage::Build,
    Stage::Energy,
    Stage::Family,
    Stage::Histogram,
    Stage::Select,
    Stage::K2t,
    Stage::Dualize,
    Stage::Invert,
    Stage::Shear,
    Stage::Sparsify,
    Stage::Fit,
];

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Build => "build",
            Stage::Energy => "energy",
            Stage::Family => "family",
            Stage::Histogram => "histogram",
            Stage::Select => "select",
            Stage::K2t => "k2t",
            Stage::Dualize => "dualize",
            Stage::Invert => "invert",
            Stage::Shear => "shear",
            Stage::Sparsify => "sparsify",
            Stage::Fit => "fit",
        }
    }

    pub fn parse(s: &str) -> Option<Stage> {
        CANONICAL.iter().copied().find(|st| st.name() == s)
    }

    /// Index in the canonical order; also the label for the per-stage seed
    /// derivation seed_i = SplitMix64(seed).nth(i).
    pub fn index(self) -> usize {
        CANONICAL.iter().position(|&s| s == self).unwrap()
    }

    /// Direct prerequisites among the toggles (build is implicit).
    pub fn deps(self) -> &'static [Stage] {
        match self {
            Stage::Build | Stage::Energy | Stage::Family | Stage::Fit => &[],
            Stage::Histogram | Stage::Select => &[Stage::Family],
            Stage::K2t | Stage::Dualize | Stage::Shear | Stage::Sparsify => &[Stage::Select],
            Stage::Invert => &[Stage::Dualize],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Stage list closed under dependencies, in canonical order.
pub fn closure(wanted: &[Stage]) -> Vec<Stage> {
    let mut have = [false; CANONICAL.len()];
    let mut work: Vec<Stage> = wanted.to_vec();
    while let Some(s) = work.pop() {
        if !have[s.index()] {
            have[s.index()] = true;
            work.extend_from_slice(s.deps());
        }
    }
    CANONICAL
        .iter()
        .copied()
        .filter(|s| *s != Stage::Build && have[s.index()])
        .collect()
}

/// Reject duplicate stages and stages whose prerequisites do not appear
/// earlier in the list.
pub fn validate_order(stages: &[Stage]) -> Result<()> {
    let mut seen: Vec<Stage> = Vec::new();
    for &s in stages {
        if s == Stage::Build {
            bail!("stage build is implicit and cannot be toggled");
        }
        if seen.contains(&s) {
            bail!("stage {s} listed twice");
        }
        for &dep in s.deps() {
            if !seen.contains(&dep) {
                bail!("stage {s} requires stage {dep} to run first");
            }
        }
        seen.push(s);
    }
    Ok(())
}

/// Sparsifier thinning parameter: explicit, or the measured max pair cover
/// plus one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TChoice {
    Auto,
    Fixed(u64),
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub d: usize,
    /// Exactly one of b, n is set; the other side is derived at build time.
    pub b: Option<i64>,
    pub n: Option<u64>,
    pub epsilon: Rat,
    pub beta: Rat,
    pub seed: u64,
    pub out: PathBuf,
    pub threads: usize,
    pub stages: Vec<Stage>,
    pub t: TChoice,
    pub max_retries: u32,
    pub shear: ShearFunction,
    pub fit_bs: Vec<i64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            d: 4,
            b: Some(2),
            n: None,
            epsilon: parse_rat("3/10").unwrap(),
            beta: rat_int(3),
            seed: 0,
            out: PathBuf::from("inclab-out"),
            threads: 0,
            stages: closure(&CANONICAL[1..]),
            t: TChoice::Auto,
            max_retries: 50,
            shear: ShearFunction::SquaredNorm,
            fit_bs: vec![1, 2, 3],
        }
    }
}

fn shear_from_name(s: &str) -> Result<ShearFunction> {
    match s {
        "zero" => Ok(ShearFunction::Zero),
        "squared-norm" => Ok(ShearFunction::SquaredNorm),
        other => bail!("unknown shear function {other:?} (expected zero or squared-norm)"),
    }
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::default();
        let mut b_set = false;
        let mut n_set = false;
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {lineno}: expected key=value, got {line:?}"))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.iter().any(|k| k == key) {
                bail!("line {lineno}: duplicate key {key}");
            }
            seen.push(key.to_string());
            fn bad(lineno: usize, key: &str, e: impl fmt::Display) -> anyhow::Error {
                anyhow!("line {lineno}: bad {key}: {e}")
            }
            let ctx = |e: std::num::ParseIntError| bad(lineno, key, e);
            match key {
                "d" => cfg.d = value.parse().map_err(ctx)?,
                "b" => {
                    cfg.b = Some(value.parse().map_err(ctx)?);
                    b_set = true;
                }
                "n" => {
                    cfg.n = Some(value.parse().map_err(ctx)?);
                    n_set = true;
                }
                "epsilon" => cfg.epsilon = parse_rat(value).map_err(|e| bad(lineno, key, e))?,
                "beta" => cfg.beta = parse_rat(value).map_err(|e| bad(lineno, key, e))?,
                "seed" => cfg.seed = value.parse().map_err(ctx)?,
                "out" => cfg.out = PathBuf::from(value),
                "threads" => cfg.threads = value.parse().map_err(ctx)?,
                "stages" => {
                    let mut stages = Vec::new();
                    for tok in value.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                        let s = Stage::parse(tok)
                            .ok_or_else(|| anyhow!("line {lineno}: unknown stage {tok:?}"))?;
                        stages.push(s);
                    }
                    cfg.stages = stages;
                }
                "t" => {
                    cfg.t = if value == "auto" {
                        TChoice::Auto
                    } else {
                        TChoice::Fixed(value.parse().map_err(ctx)?)
                    };
                }
                "max_retries" => cfg.max_retries = value.parse().map_err(ctx)?,
                "shear" => cfg.shear = shear_from_name(value)?,
                "fit_bs" => {
                    let mut bs = Vec::new();
                    for tok in value.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                        bs.push(tok.parse().map_err(ctx)?);
                    }
                    cfg.fit_bs = bs;
                }
                other => bail!("line {lineno}: unknown key {other}"),
            }
        }
        if b_set && n_set {
            bail!("config sets both b and n; pick one");
        }
        if n_set {
            cfg.b = None;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            bail!("d must be at least 2");
        }
        if let Some(b) = self.b {
            if b < 0 {
                bail!("b must be nonnegative");
            }
        }
        if self.n == Some(0) {
            bail!("n must be positive");
        }
        if self.epsilon < rat_int(0) {
            bail!("epsilon must be nonnegative");
        }
        if self.max_retries == 0 {
            bail!("max_retries must be at least 1");
        }
        if let TChoice::Fixed(0) = self.t {
            bail!("t must be at least 1");
        }
        if self.stages.contains(&Stage::Fit) && self.fit_bs.len() < 2 {
            bail!("fit needs at least 2 entries in fit_bs");
        }
        validate_order(&self.stages)
    }

    /// Canonical echo of the run-affecting keys; hashed into the report so
    /// a certificate names the exact configuration it came from.
    pub fn canonical_text(&self) -> String {
        use inclab_core::rational::format_rat;
        let mut s = String::new();
        s.push_str(&format!("d={}\n", self.d));
        match (self.b, self.n) {
            (Some(b), _) => s.push_str(&format!("b={b}\n")),
            (None, Some(n)) => s.push_str(&format!("n={n}\n")),
            (None, None) => {}
        }
        s.push_str(&format!("epsilon={}\n", format_rat(&self.epsilon)));
        s.push_str(&format!("beta={}\n", format_rat(&self.beta)));
        s.push_str(&format!("seed={}\n", self.seed));
        let names: Vec<&str> = self.stages.iter().map(|s| s.name()).collect();
        s.push_str(&format!("stages={}\n", names.join(",")));
        match self.t {
            TChoice::Auto => s.push_str("t=auto\n"),
            TChoice::Fixed(t) => s.push_str(&format!("t={t}\n")),
        }
        s.push_str(&format!("max_retries={}\n", self.max_retries));
        s.push_str(&format!("shear={}\n", self.shear.family_tag()));
        let bs: Vec<String> = self.fit_bs.iter().map(|b| b.to_string()).collect();
        s.push_str(&format!("fit_bs={}\n", bs.join(",")));
        s
    }
}
