//! Self-describing job files (`"schema": "kstab/1"`).
//!
//! ```json
//! {
//!   "schema": "kstab/1",
//!   "root_system": {"series": "A", "rank": 1},
//!   "polytope": {"vertices": [["1"], ["2"]]},
//!   "f": {"pieces": [{"a": ["1"], "b": "0"}]},
//!   "R": "3"
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mabuchi::PotentialSpec;
use crate::pl::{PiecewiseAffine, PiecewiseAffineSpec};
use crate::poly::{Polynomial, PolynomialSpec};
use crate::polytope::{PolytopeSpec, RationalPolytope};
use crate::quadrature::GradedQuadratureSpec;
use crate::rational::Rational;
use crate::rootsystem::{RootSystem, RootSystemSpec};

pub const SCHEMA: &str = "kstab/1";

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct JobOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kset: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kmax: Option<u64>,
    #[serde(default, rename = "A", skip_serializing_if = "Option::is_none")]
    pub a_preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<GradedQuadratureSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub schema: String,
    pub root_system: RootSystemSpec,
    pub polytope: PolytopeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<PiecewiseAffineSpec>,
    #[serde(
        default,
        rename = "R",
        with = "crate::rational::serde_rational::option",
        skip_serializing_if = "Option::is_none"
    )]
    pub r: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<PolynomialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub options: JobOptions,
}

fn is_default(o: &JobOptions) -> bool {
    o == &JobOptions::default()
}

/// A job with every part built and dimension-checked.
#[derive(Clone, Debug)]
pub struct Job {
    pub spec: JobSpec,
    pub root_system: RootSystem,
    pub polytope: RationalPolytope,
    pub f: Option<PiecewiseAffine>,
    pub h: Option<Polynomial>,
}

impl JobSpec {
    /// Parses JSON, reporting the failing field path with line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let spec: JobSpec = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Parse(format!("field `{path}`: {}", e.into_inner()))
        })?;
        if spec.schema != SCHEMA {
            return Err(Error::Parse(format!(
                "field `schema`: expected \"{SCHEMA}\", found \"{}\"",
                spec.schema
            )));
        }
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("job specs serialize")
    }

    pub fn build(&self) -> Result<Job> {
        let root_system = self.root_system.build()?;
        let polytope = self.polytope.build()?;
        let n = root_system.rank();
        let check = |found: usize| {
            if found == n {
                Ok(())
            } else {
                Err(Error::DimensionMismatch { expected: n, found })
            }
        };
        check(polytope.dim())?;
        let f = match &self.f {
            Some(spec) => {
                let f = spec.build()?;
                check(f.dim())?;
                Some(f)
            }
            None => None,
        };
        let h = match &self.h {
            Some(spec) => {
                let h = Polynomial::try_from(spec)?;
                check(h.nvars())?;
                Some(h)
            }
            None => None,
        };
        Ok(Job {
            spec: self.clone(),
            root_system,
            polytope,
            f,
            h,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SU2: &str = r#"{
        "schema": "kstab/1",
        "root_system": {"series": "A", "rank": 1},
        "polytope": {"vertices": [["1"], ["2"]]},
        "f": {"pieces": [{"a": ["1"], "b": "0"}]},
        "R": "3",
        "options": {"kmax": 8}
    }"#;

    #[test]
    fn round_trip_is_lossless() {
        let spec = JobSpec::from_json(SU2).unwrap();
        let again = JobSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(spec, again);
        let job = spec.build().unwrap();
        assert_eq!(job.polytope.dim(), 1);
        assert_eq!(job.spec.r, Some(crate::rational::int(3)));
    }

    #[test]
    fn diagnostics_name_the_field() {
        let bad = SU2.replace("\"R\": \"3\"", "\"R\": 0.5");
        let err = JobSpec::from_json(&bad).unwrap_err().to_string();
        assert!(err.contains("`R`"), "{err}");
        assert!(err.contains("line 6"), "{err}");
        let typo = SU2.replace("\"kmax\"", "\"kmaxx\"");
        assert!(JobSpec::from_json(&typo).unwrap_err().to_string().contains("options"));
        let schema = SU2.replace("kstab/1", "kstab/0");
        assert!(JobSpec::from_json(&schema).is_err());
    }

    #[test]
    fn dimensions_must_match_rank() {
        let bad = SU2.replace(r#"{"series": "A", "rank": 1}"#, r#"{"series": "A", "rank": 2}"#);
        assert!(matches!(
            JobSpec::from_json(&bad).unwrap().build(),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
