//! Where a battery's instances come from: a seeded random family, one instance file, or
//! every `.json` file of a directory (in name order).

use crate::error::{HarnessError, Result};
use simulbid_core::{derive_seed, Family, FamilySpec, Instance};
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Clone, Debug, PartialEq)]
pub enum InstanceSource {
    Random { spec: FamilySpec, count: usize },
    File(PathBuf),
    Dir(PathBuf),
}

/// One loaded instance with its identifier and the seed its run will use.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadedInstance {
    pub id: String,
    pub seed: u64,
    pub instance: Instance,
}

fn range(key: &str, value: &str) -> Result<(usize, usize)> {
    let bad = || HarnessError::Config(format!("bad value `{value}` for `{key}`"));
    match value.split_once('-') {
        Some((lo, hi)) => Ok((
            lo.parse().map_err(|_| bad())?,
            hi.parse().map_err(|_| bad())?,
        )),
        None => {
            let v = value.parse().map_err(|_| bad())?;
            Ok((v, v))
        }
    }
}

/// Parses `random:<bxos|xos>[:key=value,...]` with keys `m`, `t` (single values or
/// `lo-hi` ranges), `n`, `vmax` and `count`.
fn parse_random(rest: &str) -> Result<InstanceSource> {
    let (family, opts) = rest.split_once(':').unwrap_or((rest, ""));
    let family = match family {
        "bxos" => Family::Bxos,
        "xos" => Family::Xos,
        other => return Err(HarnessError::Config(format!("unknown family `{other}`"))),
    };
    let mut spec = FamilySpec::new(family);
    let mut count = 100;
    for kv in opts.split(',').filter(|s| !s.is_empty()) {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("expected key=value, got `{kv}`")))?;
        let single = || {
            value
                .parse::<usize>()
                .map_err(|_| HarnessError::Config(format!("bad value `{value}` for `{key}`")))
        };
        match key {
            "m" => spec.m = range(key, value)?,
            "t" => spec.t = range(key, value)?,
            "n" => spec.n = single()?,
            "vmax" => spec.vmax = single()? as u32,
            "count" => count = single()?,
            _ => {
                return Err(HarnessError::Config(format!(
                    "unknown instance key `{key}`"
                )))
            }
        }
    }
    spec.validate()?;
    Ok(InstanceSource::Random { spec, count })
}

impl FromStr for InstanceSource {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("random:") {
            return parse_random(rest);
        }
        let path = PathBuf::from(s);
        if path.is_dir() {
            Ok(InstanceSource::Dir(path))
        } else if path.is_file() {
            Ok(InstanceSource::File(path))
        } else {
            Err(HarnessError::Config(format!(
                "no such instance file or directory `{s}`"
            )))
        }
    }
}

impl InstanceSource {
    /// Instance `i` of a random family is sample `i` under `seed` and runs with
    /// `derive_seed(seed, i)`; files run with `derive_seed(seed, position)`.
    pub fn load(&self, seed: u64) -> Result<Vec<LoadedInstance>> {
        match self {
            InstanceSource::Random { spec, count } => (0..*count)
                .map(|i| {
                    Ok(LoadedInstance {
                        id: format!("random-{i}"),
                        seed: derive_seed(seed, i as u64),
                        instance: Instance::new(spec.sample(seed, i as u64)?)?,
                    })
                })
                .collect(),
            InstanceSource::File(path) => Ok(vec![LoadedInstance {
                id: path.display().to_string(),
                seed: derive_seed(seed, 0),
                instance: Instance::load(path)?,
            }]),
            InstanceSource::Dir(dir) => {
                let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|x| x == "json"))
                    .collect();
                paths.sort();
                paths
                    .into_iter()
                    .enumerate()
                    .map(|(i, p)| {
                        Ok(LoadedInstance {
                            id: p
                                .file_name()
                                .unwrap_or_default()
                                .to_string_lossy()
                                .into_owned(),
                            seed: derive_seed(seed, i as u64),
                            instance: Instance::load(&p)?,
                        })
                    })
                    .collect()
            }
        }
    }
}
