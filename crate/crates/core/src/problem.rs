//! JSON problem descriptions.
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "omega": [1.0, 1.618033988749895],
//!   "theorem": 1,
//!   "g": {"c_ref": 0.0, "coeffs": [[1, 1.0], [3, 1.0]]},
//!   "f": {"d": 2, "modes": [{"nu": [1, 0], "re": 0.5, "im": 0.0}, ...]},
//!   "epsilon": 0.05,
//!   "truncation": {"K": 20, "N": 20},
//!   "xi": 0.5,
//!   "rho": 0.5
//! }
//! ```
//!
//! General (`"theorem": 2`) problems replace `g`/`f` with
//! `"h": {"c_ref": 0.0, "grid": [[[0, 1], 0, [0.0, -0.15]], [[0, 0], 1, 1.0], ...]}`
//! where each entry is `[nu, p, a]` and `a` is a number or `[re, im]`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{FourierSeries, MultiIndex};
use crate::system::{CentredSystem, GeneralSystem, RootInfo, SeparableSystem, TaylorPoly};

/// Half-width of the interval around `c_ref` searched for `c0`.
pub const DEFAULT_C0_SEARCH: f64 = 10.0;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TaylorSpec {
    pub c_ref: f64,
    /// `[p, a_p]` pairs of the Taylor expansion about `c_ref`.
    pub coeffs: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Coefficient {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Coefficient> for Complex64 {
    fn from(c: Coefficient) -> Self {
        match c {
            Coefficient::Real(x) => Complex64::new(x, 0.0),
            Coefficient::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub c_ref: f64,
    pub grid: Vec<(Vec<i32>, usize, Coefficient)>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    #[serde(rename = "K")]
    pub orders: usize,
    #[serde(rename = "N")]
    pub cutoff: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub dimension: usize,
    pub omega: Vec<f64>,
    /// `1`: separable form (`g` and `f`); `2`: general form (`h` grid, or `g`/`f` rewritten as a grid).
    pub theorem: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<TaylorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<serde_json::Value>,
    pub epsilon: f64,
    pub truncation: Truncation,
    #[serde(default = "default_xi")]
    pub xi: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0_search: Option<f64>,
}

fn default_xi() -> f64 {
    0.5
}

fn default_rho() -> f64 {
    1.0
}

/// A validated problem, recentred at its chosen zero.
#[derive(Debug, Clone)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub system: CentredSystem,
    pub root: RootInfo,
}

impl ProblemSpec {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_value(v: serde_json::Value) -> Result<Self> {
        Ok(serde_json::from_value(v)?)
    }

    /// Checks shapes and ranges without touching the nonlinearity.
    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        if self.omega.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: self.omega.len(),
            });
        }
        if self.omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument("omega must be finite".into()));
        }
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be finite and >= 0, got {}",
                self.epsilon
            )));
        }
        if !(self.xi > 0.0 && self.rho > 0.0) {
            return Err(Error::InvalidArgument("xi and rho must be positive".into()));
        }
        if self.truncation.orders == 0 || self.truncation.cutoff == 0 {
            return Err(Error::InvalidArgument("truncation K and N must be >= 1".into()));
        }
        match (self.theorem, &self.g, &self.h) {
            (1, Some(_), None) => {}
            (2, Some(_), None) | (2, None, Some(_)) => {}
            (1, _, _) => {
                return Err(Error::InvalidArgument(
                    "theorem = 1 (separable) problems need \"g\" (and optionally \"f\"), not \"h\"".into(),
                ))
            }
            (2, _, _) => {
                return Err(Error::InvalidArgument(
                    "theorem = 2 (general) problems need exactly one of \"g\" or \"h\"".into(),
                ))
            }
            (t, _, _) => {
                return Err(Error::InvalidArgument(format!("theorem must be 1 or 2, got {t}")))
            }
        }
        if self.h.is_some() && self.f.is_some() {
            return Err(Error::InvalidArgument(
                "\"f\" is not used with \"h\"; fold the forcing into the grid at p = 0".into(),
            ));
        }
        Ok(())
    }

    fn forcing(&self) -> Result<FourierSeries> {
        match &self.f {
            None => Ok(FourierSeries::new(self.dimension)),
            Some(v) => {
                let f = FourierSeries::from_json(v)?;
                if f.dim() != self.dimension {
                    return Err(Error::DimensionMismatch {
                        expected: self.dimension,
                        found: f.dim(),
                    });
                }
                Ok(f)
            }
        }
    }

    fn choose_root(&self, roots: Vec<RootInfo>, c_ref: f64) -> Result<RootInfo> {
        let simple = roots
            .iter()
            .filter(|r| r.simple)
            .min_by(|x, y| {
                (x.c0 - c_ref)
                    .abs()
                    .total_cmp(&(y.c0 - c_ref).abs())
                    .then(x.c0.total_cmp(&y.c0))
            })
            .copied();
        simple.ok_or_else(|| {
            let w = self.c0_search.unwrap_or(DEFAULT_C0_SEARCH);
            if roots.is_empty() {
                Error::Hypothesis(format!(
                    "no simple zero of the averaged force in [{}, {}]",
                    c_ref - w,
                    c_ref + w
                ))
            } else {
                Error::Hypothesis(format!(
                    "zeros near c_ref are not simple: {:?}",
                    roots.iter().map(|r| (r.c0, r.a)).collect::<Vec<_>>()
                ))
            }
        })
    }

    /// Builds the system, picks the simple zero nearest `c_ref` and recentres.
    pub fn build(&self) -> Result<Problem> {
        self.validate()?;
        let w = self.c0_search.unwrap_or(DEFAULT_C0_SEARCH);
        let (system, root) = if let Some(h) = &self.h {
            let entries = h
                .grid
                .iter()
                .map(|(nu, p, a)| (MultiIndex::new(nu.clone()), *p, Complex64::from(*a)))
                .collect::<Vec<_>>();
            let sys = GeneralSystem::new(self.dimension, h.c_ref, entries)?;
            let root = self.choose_root(sys.find_c0((h.c_ref - w, h.c_ref + w)), h.c_ref)?;
            (sys.recentre(root.c0)?, root)
        } else {
            let g = self.g.as_ref().expect("validated");
            let taylor = TaylorPoly::from_pairs(g.c_ref, &g.coeffs);
            let sys = SeparableSystem::new(taylor, self.forcing()?)?;
            let root = self.choose_root(sys.find_c0((g.c_ref - w, g.c_ref + w)), g.c_ref)?;
            let centred = sys.recentre(root.c0)?;
            let centred = if self.theorem == 2 {
                centred.to_general()?
            } else {
                centred
            };
            (centred, root)
        };
        Ok(Problem {
            spec: self.clone(),
            system,
            root,
        })
    }
}
