//! JSON instance schema shared by the CLI and certificates.
//!
//! ```json
//! { "space": {"type": "chain", "N": 2, "mu": ["1/2", "1/2"]},
//!   "functions": [["0", "1"], ["0", "1"]],
//!   "series": [["0", "1"]] }
//! ```
//!
//! Lattice spaces use `"type": "lattice"` and `"ground_size"`; masses and
//! function values are listed in bitmask order `0..2^|X|`. `series` is
//! optional and lists the coefficient functions `p_1, p_2, …`.

use serde::{Deserialize, Serialize};

use crate::algebra::Rational;
use crate::error::{domain, Error, Result};
use crate::functional::FunctionalInstance;
use crate::series::FunctionSeries;
use crate::spaces::{ChainSpace, MonotoneFn, Space, SubsetLattice};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SpaceJson {
    Chain {
        #[serde(rename = "N")]
        len: usize,
        mu: Vec<Rational>,
    },
    Lattice {
        ground_size: usize,
        mu: Vec<Rational>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceJson {
    pub space: SpaceJson,
    #[serde(default)]
    pub functions: Vec<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<Vec<Vec<Rational>>>,
}

impl SpaceJson {
    pub fn to_space(&self) -> Result<Space> {
        match self {
            SpaceJson::Chain { len, mu } => {
                if *len != mu.len() {
                    return domain(format!("N = {len} but {} masses given", mu.len()));
                }
                Ok(Space::Chain(ChainSpace::new(mu.clone())?))
            }
            SpaceJson::Lattice { ground_size, mu } => {
                Ok(Space::Lattice(SubsetLattice::new(*ground_size, mu.clone())?))
            }
        }
    }

    pub fn from_space(space: &Space) -> Self {
        match space {
            Space::Chain(c) => SpaceJson::Chain {
                len: c.len(),
                mu: c.mu().to_vec(),
            },
            Space::Lattice(l) => SpaceJson::Lattice {
                ground_size: l.ground_size(),
                mu: l.mu().to_vec(),
            },
        }
    }
}

impl InstanceJson {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    pub fn space(&self) -> Result<Space> {
        self.space.to_space()
    }

    pub fn functions(&self, space: &Space) -> Result<Vec<MonotoneFn>> {
        self.functions
            .iter()
            .map(|v| MonotoneFn::new(space, v.clone()))
            .collect()
    }

    pub fn functional(&self) -> Result<FunctionalInstance> {
        let space = self.space()?;
        let functions = self.functions(&space)?;
        FunctionalInstance::new(space, functions)
    }

    /// The series `p` truncated at `truncation`.
    pub fn function_series(&self, truncation: usize) -> Result<(Space, FunctionSeries)> {
        let space = self.space()?;
        let coeffs = self
            .series
            .as_ref()
            .ok_or_else(|| Error::Domain("instance has no \"series\" field".into()))?
            .iter()
            .map(|v| MonotoneFn::new(&space, v.clone()))
            .collect::<Result<Vec<_>>>()?;
        let p = FunctionSeries::new(&space, truncation, coeffs)?;
        Ok((space, p))
    }

    pub fn from_functional(inst: &FunctionalInstance) -> Self {
        InstanceJson {
            space: SpaceJson::from_space(inst.space()),
            functions: inst.functions().iter().map(|f| f.values().to_vec()).collect(),
            series: None,
        }
    }

    pub fn from_series(space: &Space, p: &FunctionSeries) -> Self {
        InstanceJson {
            space: SpaceJson::from_space(space),
            functions: Vec::new(),
            series: Some(p.coeffs().iter().map(|f| f.values().to_vec()).collect()),
        }
    }
}
