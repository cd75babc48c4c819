//! Flat `key = value` run configuration with command-line overrides.

use std::fmt;

use cauchy_chain::parametrix::ChainExponents;
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {msg}")]
    Value { key: String, msg: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

type Result<T> = std::result::Result<T, ConfigError>;

/// A linear or logarithmic grid of `count` points on [lo, hi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub log: bool,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        match self.count {
            0 => vec![],
            1 => vec![self.lo],
            n => (0..n)
                .map(|i| {
                    let t = i as f64 / (n - 1) as f64;
                    if i == n - 1 {
                        self.hi
                    } else if i == 0 {
                        self.lo
                    } else if self.log {
                        (self.lo.ln() + t * (self.hi.ln() - self.lo.ln())).exp()
                    } else {
                        self.lo + t * (self.hi - self.lo)
                    }
                })
                .collect(),
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}:{:?}:{}", self.lo, self.hi, self.count)?;
        if self.log {
            write!(f, ":log")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        if !(3..=4).contains(&parts.len()) {
            return Err("expected lo:hi:count or lo:hi:count:log".into());
        }
        let lo = parse_f64(parts[0])?;
        let hi = parse_f64(parts[1])?;
        let count = parts[2].parse::<usize>().map_err(|e| e.to_string())?;
        let log = match parts.get(3) {
            None | Some(&"lin") => false,
            Some(&"log") => true,
            Some(x) => return Err(format!("unknown spacing `{x}`")),
        };
        Ok(GridSpec { lo, hi, count, log })
    }
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v = s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> std::result::Result<T, String>) -> std::result::Result<Vec<T>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(vec![]);
    }
    s.split(',').map(|x| f(x.trim())).collect()
}

fn parse_usize(s: &str) -> std::result::Result<usize, String> {
    s.parse::<usize>().map_err(|e| format!("`{s}`: {e}"))
}

fn parse_opt<T>(s: &str, f: impl Fn(&str) -> std::result::Result<T, String>) -> std::result::Result<Option<T>, String> {
    match s.trim() {
        "" | "auto" => Ok(None),
        x => f(x).map(Some),
    }
}

fn join<T>(v: &[T], f: impl Fn(&T) -> String) -> String {
    v.iter().map(f).collect::<Vec<_>>().join(",")
}

/// Everything a command needs. Unused keys are carried along so a config file can be shared.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub p: usize,
    pub a: Vec<f64>,
    /// Chain sizes for the universality table.
    pub n: Vec<usize>,
    pub c0: Option<f64>,
    pub precision_bits: u32,
    pub grid: GridSpec,
    /// (ξ, η) pairs for universality and separation.
    pub points: Vec<(f64, f64)>,
    pub j: Option<usize>,
    pub ell: Option<usize>,
    pub beta: f64,
    pub q: usize,
    pub lambda: Vec<f64>,
    /// Criterion ids or module names for `verify`.
    pub only: Vec<String>,
    /// Output path; `-` is stdout.
    pub output: String,
    /// Test hook: relative corruption of c₂ in the concomitant check.
    pub perturb_c2: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p: 3,
            a: vec![0.5, 0.0, 0.5],
            n: vec![6, 12, 24],
            c0: None,
            precision_bits: 128,
            grid: GridSpec { lo: 0.5, hi: 2.5, count: 5, log: false },
            points: vec![(1.0, 1.0), (1.0, 2.0), (2.0, 3.0)],
            j: None,
            ell: None,
            beta: 0.0,
            q: 3,
            lambda: vec![10.0, 100.0],
            only: vec![],
            output: "-".into(),
            perturb_c2: 0.0,
        }
    }
}

impl RunConfig {
    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let err = |msg: String| ConfigError::Value { key: key.to_string(), msg };
        let v = value.trim();
        match key {
            "p" => self.p = parse_usize(v).map_err(err)?,
            "a" => self.a = parse_list(v, parse_f64).map_err(err)?,
            "n" => self.n = parse_list(v, parse_usize).map_err(err)?,
            "c0" => self.c0 = parse_opt(v, parse_f64).map_err(err)?,
            "precision_bits" => self.precision_bits = v.parse().map_err(|e: std::num::ParseIntError| err(e.to_string()))?,
            "grid" => self.grid = v.parse().map_err(err)?,
            "points" => {
                self.points = if v.is_empty() {
                    vec![]
                } else {
                    v.split(';')
                        .map(|pt| {
                            let (x, y) = pt.split_once(':').ok_or_else(|| format!("point `{pt}` is not xi:eta"))?;
                            Ok((parse_f64(x)?, parse_f64(y)?))
                        })
                        .collect::<std::result::Result<_, String>>()
                        .map_err(err)?
                }
            }
            "j" => self.j = parse_opt(v, parse_usize).map_err(err)?,
            "ell" => self.ell = parse_opt(v, parse_usize).map_err(err)?,
            "beta" => self.beta = parse_f64(v).map_err(err)?,
            "q" => self.q = parse_usize(v).map_err(err)?,
            "lambda" => self.lambda = parse_list(v, parse_f64).map_err(err)?,
            "only" => self.only = parse_list(v, |s| Ok(s.to_string())).map_err(err)?,
            "output" => self.output = v.to_string(),
            "perturb_c2" => self.perturb_c2 = parse_f64(v).map_err(err)?,
            "version" => {}
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies `key = value` lines over the current values. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: i + 1, msg: format!("expected key = value, got `{line}`") })?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<RunConfig> {
        let mut c = RunConfig::default();
        c.apply_text(text)?;
        Ok(c)
    }

    /// Canonical text form; `from_text(to_text())` reproduces the config exactly.
    pub fn to_text(&self) -> String {
        let opt = |x: Option<usize>| x.map_or("auto".to_string(), |v| v.to_string());
        let mut s = String::new();
        s += &format!("version = {}\n", env!("CARGO_PKG_VERSION"));
        s += &format!("p = {}\n", self.p);
        s += &format!("a = {}\n", join(&self.a, |x| format!("{x:?}")));
        s += &format!("n = {}\n", join(&self.n, |x| x.to_string()));
        s += &format!("c0 = {}\n", self.c0.map_or("auto".to_string(), |x| format!("{x:?}")));
        s += &format!("precision_bits = {}\n", self.precision_bits);
        s += &format!("grid = {}\n", self.grid);
        s += &format!("points = {}\n", self.points.iter().map(|(x, y)| format!("{x:?}:{y:?}")).collect::<Vec<_>>().join(";"));
        s += &format!("j = {}\n", opt(self.j));
        s += &format!("ell = {}\n", opt(self.ell));
        s += &format!("beta = {:?}\n", self.beta);
        s += &format!("q = {}\n", self.q);
        s += &format!("lambda = {}\n", join(&self.lambda, |x| format!("{x:?}")));
        s += &format!("only = {}\n", self.only.join(","));
        s += &format!("output = {}\n", self.output);
        s += &format!("perturb_c2 = {:?}\n", self.perturb_c2);
        s
    }

    /// First 16 hex digits of SHA-256 over the canonical text without the output path.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = "-".into();
        let d = Sha256::digest(c.to_text().as_bytes());
        hex::encode(&d[..8])
    }

    /// Checks the chain constraints and the ranges every command relies on.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.a.len() != self.p {
            return bad(format!("p = {} but a has {} entries", self.p, self.a.len()));
        }
        ChainExponents::new(self.a.clone()).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if !(64..=4096).contains(&self.precision_bits) {
            return bad(format!("precision_bits = {} outside 64..=4096", self.precision_bits));
        }
        let g = &self.grid;
        if g.count > 0 && !(g.lo > 0.0 && g.hi >= g.lo) {
            return bad(format!("grid needs 0 < lo ≤ hi, got {g}"));
        }
        if let Some(c) = self.c0 {
            if !(c > 0.0) {
                return bad(format!("c0 = {c} must be positive"));
            }
        }
        for (name, v) in [("j", self.j), ("ell", self.ell)] {
            if let Some(v) = v {
                if v == 0 || v > self.p {
                    return bad(format!("{name} = {v} outside 1..={}", self.p));
                }
            }
        }
        if self.points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
            return bad("points must have positive coordinates".into());
        }
        if self.n.contains(&0) {
            return bad("chain sizes n must be positive".into());
        }
        if !(self.beta >= 0.0) {
            return bad(format!("beta = {} must be nonnegative", self.beta));
        }
        if self.lambda.iter().any(|&l| !(1.0..=1e3).contains(&l)) {
            return bad("lambda values must lie in [1, 1000]".into());
        }
        if self.output.is_empty() || self.output.contains(['#', '\n']) || self.output.trim() != self.output {
            return bad(format!("output path `{}` cannot be stored in a config file", self.output));
        }
        if !(self.perturb_c2.abs() < 1.0) {
            return bad("perturb_c2 must be a small relative change".into());
        }
        Ok(())
    }
}
