//! Flat key=value configuration; command-line flags override file values.

use cascade::cantor::{Gap, Slot, WhitneyId};
use cascade::rational::{self, frac, Rational};
use cascade::Params;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Raw settings before validation, one optional value per key.
#[derive(Clone, Debug, Default)]
pub struct Raw(pub BTreeMap<String, String>);

pub const KEYS: &[&str] = &[
    "n",
    "q",
    "eps",
    "alpha",
    "lambda",
    "depth",
    "size_floor",
    "seed",
    "paths",
    "max_steps",
    "out",
    "format",
    "samples",
    "min_mass",
    "start",
    "trajectories",
    "stop_at_infinity",
];

impl Raw {
    pub fn parse(text: &str) -> Result<Raw, ConfigError> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| bad(format!("line {}: expected key=value", i + 1)))?;
            let k = k.trim().replace('-', "_");
            if !KEYS.contains(&k.as_str()) {
                return Err(bad(format!("line {}: unknown key `{k}`", i + 1)));
            }
            map.insert(k, v.trim().to_string());
        }
        Ok(Raw(map))
    }

    pub fn load(path: &Path) -> Result<Raw, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Raw::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: Option<String>) {
        if let Some(v) = value {
            self.0.insert(key.to_string(), v);
        }
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        self.0.get(key).map(|v| v.parse::<T>().map_err(|_| bad(format!("{key}: cannot parse `{v}`")))).transpose()
    }

    fn rational(&self, key: &str) -> Result<Option<Rational>, ConfigError> {
        self.0
            .get(key)
            .map(|v| rational::parse(v).map_err(|_| bad(format!("{key}: `{v}` is not a rational"))))
            .transpose()
    }

    pub fn resolve(&self) -> Result<Config, ConfigError> {
        let d = Params::defaults();
        let n = self.get("n")?.unwrap_or(d.n);
        let q = self.get("q")?.unwrap_or(d.q);
        let eps = self.rational("eps")?.unwrap_or(d.eps);
        let params = Params::new(n, q, eps).map_err(|e| bad(format!("params: {e}")))?;
        let alpha = self.rational("alpha")?.unwrap_or_else(|| frac(1, 8));
        if alpha <= frac(0, 1) || alpha >= frac(1, 2) {
            return Err(bad("alpha must lie in (0, 1/2)"));
        }
        let lambda = self.rational("lambda")?.unwrap_or_else(|| frac(1, 2));
        if lambda < frac(0, 1) || lambda > frac(1, 1) {
            return Err(bad("lambda must lie in [0, 1]"));
        }
        let size_floor = self.rational("size_floor")?;
        if size_floor.as_ref().is_some_and(|f| *f <= frac(0, 1)) {
            return Err(bad("size_floor must be positive"));
        }
        let min_mass = self.rational("min_mass")?.unwrap_or_else(|| frac(1, 10_000));
        if min_mass <= frac(0, 1) {
            return Err(bad("min_mass must be positive"));
        }
        let format = match self.0.get("format").map(String::as_str) {
            None | Some("json") => Format::Json,
            Some("csv") => Format::Csv,
            Some(o) => return Err(bad(format!("format: `{o}` is not json or csv"))),
        };
        let paths: u64 = self.get("paths")?.unwrap_or(100_000);
        if paths == 0 {
            return Err(bad("paths must be positive"));
        }
        let start = match self.0.get("start") {
            Some(s) => parse_start(s)?,
            None => WhitneyId::InGap(Gap { lo: frac(1, 3), level: 1 }, Slot::Standard(params.n as i64 + 1)),
        };
        start.validate(&params.whitney).map_err(|e| bad(format!("start: {e}")))?;
        Ok(Config {
            alpha,
            lambda,
            depth: self.get("depth")?,
            size_floor,
            seed: self.get("seed")?,
            paths,
            max_steps: self.get("max_steps")?.unwrap_or(300),
            out: self.0.get("out").map(PathBuf::from),
            format,
            samples: self.get("samples")?.unwrap_or(10_000),
            min_mass,
            start,
            trajectories: self.get("trajectories")?.unwrap_or(0),
            stop_at_infinity: self.get("stop_at_infinity")?.unwrap_or(true),
            params,
        })
    }
}

/// Validated settings.
#[derive(Clone, Debug)]
pub struct Config {
    pub params: Params,
    pub alpha: Rational,
    pub lambda: Rational,
    pub depth: Option<u32>,
    pub size_floor: Option<Rational>,
    pub seed: Option<u64>,
    pub paths: u64,
    pub max_steps: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub samples: usize,
    pub min_mass: Rational,
    pub start: WhitneyId,
    pub trajectories: u64,
    pub stop_at_infinity: bool,
}

impl Config {
    pub fn seed(&self) -> Result<u64, ConfigError> {
        self.seed.ok_or_else(|| bad("seed is required for stochastic commands"))
    }

    pub fn depth_or(&self, default: u32) -> Result<u32, ConfigError> {
        match self.depth {
            Some(0) => Err(bad("depth must be at least 1")),
            Some(d) => Ok(d),
            None => Ok(default),
        }
    }
}

/// `inf`, `outer:N`, `c:LO:LEVEL` or `gap:LO:LEVEL:N`.
pub fn parse_start(s: &str) -> Result<WhitneyId, ConfigError> {
    let parts: Vec<&str> = s.split(':').collect();
    let r = |v: &str| rational::parse(v).map_err(|_| bad(format!("start: `{v}` is not a rational")));
    let int = |v: &str| v.parse::<i64>().map_err(|_| bad(format!("start: `{v}` is not an integer")));
    let level = |v: &str| v.parse::<u32>().map_err(|_| bad(format!("start: `{v}` is not a level")));
    match parts.as_slice() {
        ["inf"] => Ok(WhitneyId::Infinity),
        ["outer", n] => Ok(WhitneyId::Outer(int(n)?)),
        ["c", lo, l] => Ok(WhitneyId::InGap(Gap { lo: r(lo)?, level: level(l)? }, Slot::Central)),
        ["gap", lo, l, n] => Ok(WhitneyId::InGap(Gap { lo: r(lo)?, level: level(l)? }, Slot::Standard(int(n)?))),
        _ => Err(bad(format!("start: `{s}` is not inf, outer:N, c:LO:LEVEL or gap:LO:LEVEL:N"))),
    }
}
