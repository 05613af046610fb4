use std::ops::ControlFlow;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{self, PointSet2D};
use crate::range_space::{IntervalSpace, RangeSpace, SetCount};
use crate::sampling::Sample;
use crate::set_system::{self, Reindex, SetSystem, VcDimension, DEFAULT_MAX_VC};
use crate::subset::Subset;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Intervals,
    PowerSet,
    Random,
    Halfplanes,
    Rectangles,
}

impl Family {
    pub const NAMES: [&'static str; 5] = ["intervals", "power_set", "random", "halfplanes", "rectangles"];

    /// VC dimension of the family when it is known independently of the instance.
    pub fn claimed_dimension(self, n: usize) -> Option<u32> {
        match self {
            Family::Intervals => Some(2),
            Family::Halfplanes => Some(3),
            Family::Rectangles => Some(4),
            Family::PowerSet => Some(n as u32),
            Family::Random => None,
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intervals" => Ok(Family::Intervals),
            "power_set" | "powerset" => Ok(Family::PowerSet),
            "random" => Ok(Family::Random),
            "halfplanes" => Ok(Family::Halfplanes),
            "rectangles" => Ok(Family::Rectangles),
            other => Err(Error::InvalidArgument(format!(
                "unknown family {other}; expected one of {}",
                Family::NAMES.join(", ")
            ))),
        }
    }
}

/// A generated system. For the geometric families `n` is the number of random
/// points; `m` and `p` apply to random systems.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Keep intervals implicit instead of listing all `n(n+1)/2 + 1` sets.
    #[serde(default)]
    pub implicit: bool,
}

impl GeneratorSpec {
    pub fn new(family: Family, n: usize) -> Self {
        Self {
            family,
            n,
            m: None,
            p: None,
            seed: 0,
            implicit: false,
        }
    }

    pub fn generate(&self) -> Result<SetSystem> {
        match self.family {
            Family::Intervals => generators::intervals(self.n),
            Family::PowerSet => generators::power_set(self.n),
            Family::Random => {
                let m = self
                    .m
                    .ok_or_else(|| Error::InvalidArgument("random systems need m".into()))?;
                generators::random_system(self.n, m, self.p.unwrap_or(0.5), self.seed)
            }
            Family::Halfplanes => generators::halfplanes(&PointSet2D::random(self.n, self.seed)),
            Family::Rectangles => generators::axis_rectangles(&PointSet2D::random(self.n, self.seed)),
        }
    }

    pub fn build(&self) -> Result<Space> {
        if self.implicit {
            if self.family != Family::Intervals {
                return Err(Error::InvalidArgument("only intervals have an implicit form".into()));
            }
            return Ok(Space::Intervals(IntervalSpace::new(self.n)?));
        }
        Ok(Space::Explicit(self.generate()?))
    }
}

/// Where an experiment's set system comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SystemSource {
    Path { path: PathBuf },
    Generator(GeneratorSpec),
}

impl SystemSource {
    /// Loads the system; relative paths resolve against `base`.
    pub fn load(&self, base: &Path) -> Result<Space> {
        match self {
            SystemSource::Path { path } => {
                let full = if path.is_absolute() { path.clone() } else { base.join(path) };
                Ok(Space::Explicit(set_system::load(full)?.system))
            }
            SystemSource::Generator(g) => g.build(),
        }
    }

    pub fn claimed_dimension(&self) -> Option<u32> {
        match self {
            SystemSource::Generator(g) => g.family.claimed_dimension(g.n),
            SystemSource::Path { .. } => None,
        }
    }
}

/// An explicit set system or the implicit interval space.
#[derive(Clone, Debug)]
pub enum Space {
    Explicit(SetSystem),
    Intervals(IntervalSpace),
}

impl Space {
    pub fn explicit(&self) -> Option<&SetSystem> {
        match self {
            Space::Explicit(f) => Some(f),
            Space::Intervals(_) => None,
        }
    }

    /// VC dimension: 2 for intervals, otherwise searched up to the default cap.
    pub fn dimension(&self) -> Result<u32> {
        match self {
            Space::Intervals(_) => Ok(2),
            Space::Explicit(f) => match f.vc_dimension(DEFAULT_MAX_VC) {
                VcDimension::Exact(d) => Ok(d as u32),
                VcDimension::EmptyFamily => Ok(0),
                VcDimension::AtLeast(d) => Err(Error::InvalidArgument(format!(
                    "VC dimension is at least {d}; pass d explicitly"
                ))),
            },
        }
    }
}

impl RangeSpace for Space {
    fn ground_size(&self) -> usize {
        match self {
            Space::Explicit(f) => f.ground_size(),
            Space::Intervals(f) => f.ground_size(),
        }
    }

    fn family_size(&self) -> u64 {
        match self {
            Space::Explicit(f) => f.family_size(),
            Space::Intervals(f) => f.family_size(),
        }
    }

    fn trace_count(&self, y: &Subset) -> u64 {
        match self {
            Space::Explicit(f) => RangeSpace::trace_count(f, y),
            Space::Intervals(f) => f.trace_count(y),
        }
    }

    fn restrict(&self, y: &Subset) -> Result<(Self, Reindex)> {
        match self {
            Space::Explicit(f) => RangeSpace::restrict(f, y).map(|(g, m)| (Space::Explicit(g), m)),
            Space::Intervals(f) => f.restrict(y).map(|(g, m)| (Space::Intervals(g), m)),
        }
    }

    fn visit_extremal(&self, sample: &Sample, visit: &mut dyn FnMut(SetCount) -> ControlFlow<()>) {
        match self {
            Space::Explicit(f) => f.visit_extremal(sample, visit),
            Space::Intervals(f) => f.visit_extremal(sample, visit),
        }
    }
}
