//! Experiment configuration in a flat `key = value` format with `[section]`
//! headers. `#` starts a comment. Relative file paths resolve against the
//! directory of the config file.
//!
//! ```text
//! [run]
//! mode = color          # color | coupon | sweep
//! trials = 100
//! seed = 42
//! out = results.csv
//! workers = 1
//! max_rounds = 1000     # default 100·|B|
//! mc_trials = 10000     # coupon mode only
//!
//! [graph]
//! source = regular      # regular | file
//! n = 50
//! delta = 8
//!
//! [lists]
//! source = generated    # generated | file | disjoint
//! k = 6                 # default from the list-size rule
//! pool = 12             # default 2k
//! mode = planted        # uniform | planted
//! theta = 0.6667
//!
//! [profile]
//! profile = piecewise   # uniform | linear | piecewise
//! gamma = 0.05
//!
//! [sweep]
//! k_values = 4, 6, 8
//! profiles = uniform, piecewise
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::bias::{BiasProfile, ProfileKind};
use crate::error::{parse_err, Error, Result};
use crate::lists::ListMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Color,
    Coupon,
    Sweep,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "color" => Ok(Mode::Color),
            "coupon" => Ok(Mode::Coupon),
            "sweep" => Ok(Mode::Sweep),
            other => Err(Error::ConfigInvalid(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    File(PathBuf),
    Regular { n: usize, delta: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ListSource {
    File(PathBuf),
    /// Vertex `v` gets colors `v·k + 1 ..= v·k + k`; always colorable.
    Disjoint {
        k: usize,
    },
    Generated {
        k: Option<usize>,
        pool: Option<usize>,
        mode: ListMode,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub max_rounds: Option<usize>,
    pub mc_trials: u64,
    pub graph: GraphSource,
    pub lists: ListSource,
    pub profile: BiasProfile,
    pub sweep_k: Vec<usize>,
    pub sweep_profiles: Vec<ProfileKind>,
}

impl ExperimentConfig {
    /// A color-mode config on a generated regular graph with uniform lists.
    pub fn new(n: usize, delta: usize, k: usize) -> Self {
        ExperimentConfig {
            mode: Mode::Color,
            trials: 1,
            seed: 0,
            out: None,
            workers: None,
            max_rounds: None,
            mc_trials: 10_000,
            graph: GraphSource::Regular { n, delta },
            lists: ListSource::Generated {
                k: Some(k),
                pool: None,
                mode: ListMode::IndependentUniform,
            },
            profile: BiasProfile::uniform(),
            sweep_k: Vec::new(),
            sweep_profiles: Vec::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let entries = Entries::parse(text)?;
        let cfg = entries.build(base_dir)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::ConfigInvalid("trials must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::ConfigInvalid("workers must be at least 1".into()));
        }
        if self.max_rounds == Some(0) {
            return Err(Error::ConfigInvalid("max_rounds must be at least 1".into()));
        }
        if self.mc_trials == 0 {
            return Err(Error::ConfigInvalid("mc_trials must be at least 1".into()));
        }
        self.profile.validate()?;
        for path in [&self.graph_file(), &self.list_file()]
            .into_iter()
            .flatten()
        {
            if !path.is_file() {
                return Err(Error::ConfigInvalid(format!(
                    "file {} does not exist",
                    path.display()
                )));
            }
        }
        if self.mode == Mode::Sweep
            && !self.sweep_k.is_empty()
            && !matches!(self.lists, ListSource::Generated { .. })
        {
            return Err(Error::ConfigInvalid(
                "k_values needs generated lists".into(),
            ));
        }
        Ok(())
    }

    fn graph_file(&self) -> Option<PathBuf> {
        match &self.graph {
            GraphSource::File(p) => Some(p.clone()),
            GraphSource::Regular { .. } => None,
        }
    }

    fn list_file(&self) -> Option<PathBuf> {
        match &self.lists {
            ListSource::File(p) => Some(p.clone()),
            _ => None,
        }
    }
}

struct Entry {
    value: String,
    line: usize,
}

#[derive(Default)]
struct Entries {
    map: BTreeMap<(String, String), Entry>,
}

const KNOWN: &[(&str, &[&str])] = &[
    (
        "run",
        &[
            "mode",
            "trials",
            "seed",
            "out",
            "workers",
            "max_rounds",
            "mc_trials",
        ],
    ),
    ("graph", &["source", "file", "n", "delta"]),
    ("lists", &["source", "file", "k", "pool", "mode", "theta"]),
    ("profile", &["profile", "a", "gamma", "p"]),
    ("sweep", &["k_values", "profiles"]),
];

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = Entries::default();
        let mut section = String::from("run");
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !KNOWN.iter().any(|(s, _)| *s == name) {
                    return Err(parse_err(line_no, format!("unknown section [{name}]")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                parse_err(line_no, format!("expected `key = value`, got `{line}`"))
            })?;
            let key = key.trim();
            let keys = KNOWN
                .iter()
                .find(|(s, _)| *s == section)
                .map(|(_, k)| *k)
                .unwrap_or(&[]);
            if !keys.contains(&key) {
                return Err(parse_err(
                    line_no,
                    format!("unknown key `{key}` in [{section}]"),
                ));
            }
            let prev = entries.map.insert(
                (section.clone(), key.to_string()),
                Entry {
                    value: value.trim().to_string(),
                    line: line_no,
                },
            );
            if prev.is_some() {
                return Err(parse_err(
                    line_no,
                    format!("duplicate key `{key}` in [{section}]"),
                ));
            }
        }
        Ok(entries)
    }

    fn raw(&self, section: &str, key: &str) -> Option<&Entry> {
        self.map.get(&(section.to_string(), key.to_string()))
    }

    fn get<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>> {
        self.raw(section, key)
            .map(|e| {
                e.value
                    .parse()
                    .map_err(|_| parse_err(e.line, format!("bad value `{}` for `{key}`", e.value)))
            })
            .transpose()
    }

    fn require<T: FromStr>(&self, section: &str, key: &str) -> Result<T> {
        self.get(section, key)?
            .ok_or_else(|| Error::ConfigInvalid(format!("missing `{key}` in [{section}]")))
    }

    fn list<T: FromStr>(&self, section: &str, key: &str) -> Result<Vec<T>> {
        let Some(e) = self.raw(section, key) else {
            return Ok(Vec::new());
        };
        e.value
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .map_err(|_| parse_err(e.line, format!("bad list item `{s}` for `{key}`")))
            })
            .collect()
    }

    fn build(&self, base: &Path) -> Result<ExperimentConfig> {
        let path = |p: String| base.join(p);
        let mode = self
            .get::<String>("run", "mode")?
            .as_deref()
            .unwrap_or("color")
            .parse()?;

        let graph = match self
            .get::<String>("graph", "source")?
            .as_deref()
            .unwrap_or("regular")
        {
            "regular" => GraphSource::Regular {
                n: self.require("graph", "n")?,
                delta: self.require("graph", "delta")?,
            },
            "file" => GraphSource::File(path(self.require("graph", "file")?)),
            other => {
                return Err(Error::ConfigInvalid(format!(
                    "unknown graph source `{other}`"
                )))
            }
        };

        let lists = match self
            .get::<String>("lists", "source")?
            .as_deref()
            .unwrap_or("generated")
        {
            "file" => ListSource::File(path(self.require("lists", "file")?)),
            "disjoint" => ListSource::Disjoint {
                k: self.require("lists", "k")?,
            },
            "generated" => {
                let mode = match self
                    .get::<String>("lists", "mode")?
                    .as_deref()
                    .unwrap_or("uniform")
                {
                    "uniform" => ListMode::IndependentUniform,
                    "planted" => ListMode::PlantedOverlap(self.require("lists", "theta")?),
                    other => {
                        return Err(Error::ConfigInvalid(format!("unknown list mode `{other}`")))
                    }
                };
                ListSource::Generated {
                    k: self.get("lists", "k")?,
                    pool: self.get("lists", "pool")?,
                    mode,
                }
            }
            other => {
                return Err(Error::ConfigInvalid(format!(
                    "unknown list source `{other}`"
                )))
            }
        };

        let kind: ProfileKind = self
            .get::<String>("profile", "profile")?
            .as_deref()
            .unwrap_or("uniform")
            .parse()?;
        let mut profile = match (kind, self.get::<f64>("profile", "gamma")?) {
            (ProfileKind::LinearDecay, Some(gamma)) => BiasProfile::linear(gamma),
            _ => BiasProfile::of_kind(kind),
        };
        if let Some(a) = self.get("profile", "a")? {
            profile.a = a;
        }
        if let Some(p) = self.get("profile", "p")? {
            profile = profile.with_p(p);
        }

        Ok(ExperimentConfig {
            mode,
            trials: self.get("run", "trials")?.unwrap_or(1),
            seed: self.get("run", "seed")?.unwrap_or(0),
            out: self.get::<String>("run", "out")?.map(path),
            workers: self.get("run", "workers")?,
            max_rounds: self.get("run", "max_rounds")?,
            mc_trials: self.get("run", "mc_trials")?.unwrap_or(10_000),
            graph,
            lists,
            profile,
            sweep_k: self.list("sweep", "k_values")?,
            sweep_profiles: self.list("sweep", "profiles")?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_example() {
        let text = "\
# comment
[run]
mode = sweep
trials = 5
seed = 7
workers = 2

[graph]
n = 20
delta = 4

[lists]
k = 6
pool = 9
mode = planted
theta = 0.5

[profile]
profile = linear
gamma = 0.1

[sweep]
k_values = 4, 6
profiles = uniform, piecewise
";
        let cfg = ExperimentConfig::parse(text, Path::new(".")).unwrap();
        assert_eq!(cfg.mode, Mode::Sweep);
        assert_eq!(cfg.trials, 5);
        assert_eq!(cfg.workers, Some(2));
        assert_eq!(cfg.graph, GraphSource::Regular { n: 20, delta: 4 });
        assert_eq!(
            cfg.lists,
            ListSource::Generated {
                k: Some(6),
                pool: Some(9),
                mode: ListMode::PlantedOverlap(0.5)
            }
        );
        assert_eq!(cfg.profile, BiasProfile::linear(0.1));
        assert_eq!(cfg.sweep_k, vec![4, 6]);
        assert_eq!(
            cfg.sweep_profiles,
            vec![ProfileKind::Uniform, ProfileKind::PiecewiseF]
        );
    }

    #[test]
    fn rejects_bad_input_with_line_numbers() {
        let err =
            ExperimentConfig::parse("[graph]\nn = 4\nbogus = 1\n", Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = ExperimentConfig::parse("[graph]\nn = x\n", Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = ExperimentConfig::parse("[nope]\n", Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = ExperimentConfig::parse(
            "trials = 1\ntrials = 2\n[graph]\nn=4\ndelta=2\n",
            Path::new("."),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn semantic_checks() {
        let base = "[graph]\nn = 4\ndelta = 2\n";
        let err =
            ExperimentConfig::parse(&format!("trials = 0\n{base}"), Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::ConfigInvalid(_)));
        let err = ExperimentConfig::parse(
            "[graph]\nsource = file\nfile = /nonexistent/g.txt\n",
            Path::new("."),
        )
        .unwrap_err();
        assert!(matches!(err, Error::ConfigInvalid(_)));
        let err = ExperimentConfig::parse("[graph]\nn = 4\n", Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::ConfigInvalid(_)));
    }
}
