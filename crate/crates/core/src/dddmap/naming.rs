use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ingest::{Access, Mode};

/// How service operations are named from the accesses of a saga step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum NamingHeuristic {
    /// `<functionality>_<step>`; one operation per step.
    Generic,
    /// Entities in first-access order, each prefixed by `r`, `w` or `rw`.
    #[default]
    FullTrace,
    /// Same order as `FullTrace`, every prefix replaced by `ac`.
    IgnoreTypes,
    /// Distinct entities sorted by name, prefixed by `ac`.
    IgnoreOrder,
}

impl NamingHeuristic {
    pub const ALL: [NamingHeuristic; 4] =
        [Self::Generic, Self::FullTrace, Self::IgnoreTypes, Self::IgnoreOrder];
}

impl FromStr for NamingHeuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generic" => Ok(Self::Generic),
            "full-trace" => Ok(Self::FullTrace),
            "ignore-types" => Ok(Self::IgnoreTypes),
            "ignore-order" => Ok(Self::IgnoreOrder),
            other => Err(Error::InvalidArgument(format!(
                "unknown naming heuristic `{other}` (expected generic|full-trace|ignore-types|ignore-order)"
            ))),
        }
    }
}

impl fmt::Display for NamingHeuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Generic => "generic",
            Self::FullTrace => "full-trace",
            Self::IgnoreTypes => "ignore-types",
            Self::IgnoreOrder => "ignore-order",
        })
    }
}

/// Names the operation behind step `step` of `functionality`.
///
/// `functionality` must already be a valid identifier; only the generic
/// heuristic uses it.
pub fn name_operation(functionality: &str, step: usize, accesses: &[Access], heuristic: NamingHeuristic) -> String {
    // (entity, read, written) in first-access order
    let mut entities: Vec<(&str, bool, bool)> = Vec::new();
    for a in accesses {
        let slot = match entities.iter().position(|(e, _, _)| *e == a.entity) {
            Some(i) => i,
            None => {
                entities.push((&a.entity, false, false));
                entities.len() - 1
            }
        };
        match a.mode {
            Mode::R => entities[slot].1 = true,
            Mode::W => entities[slot].2 = true,
        }
    }
    let join = |parts: Vec<String>| parts.join("_");
    match heuristic {
        NamingHeuristic::Generic => format!("{functionality}_{step}"),
        NamingHeuristic::FullTrace => join(
            entities
                .iter()
                .map(|&(e, r, w)| {
                    let prefix = match (r, w) {
                        (true, true) => "rw",
                        (false, true) => "w",
                        _ => "r",
                    };
                    format!("{prefix}{e}")
                })
                .collect(),
        ),
        NamingHeuristic::IgnoreTypes => join(entities.iter().map(|(e, _, _)| format!("ac{e}")).collect()),
        NamingHeuristic::IgnoreOrder => {
            let mut names: Vec<&str> = entities.iter().map(|(e, _, _)| *e).collect();
            names.sort_unstable();
            join(names.into_iter().map(|e| format!("ac{e}")).collect())
        }
    }
}
