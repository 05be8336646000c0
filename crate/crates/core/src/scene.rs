//! Scene files: a TOML description of one computation.
//!
//! ```toml
//! weights = [1, 2]
//! fields = ["q", "f5"]
//! window = 2
//! primes = [3, 5, 7]
//! out = "out"
//!
//! [hamiltonian]
//! kind = "rotation"          # rotation | matrices | flow | perturbed | identity
//! angles = [0.3333, 0.2]     # turns per unit time, one per weight
//! ```
//!
//! `matrices` takes `factors`, a list of real `2(d+1) x 2(d+1)` matrices in
//! interleaved `(x_0, y_0, x_1, ...)` coordinates, applied first to last.
//! `flow` takes invariant monomials `terms`, a slice count and optional
//! `kick` monomials applied as one extra factor; a `[reference]` table with
//! rotation `angles` and a Hofer `radius` enables stability pruning.
//! `perturbed` is the built-in twist map on CP(1,2) with its own reference.

use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::catalog::{self, PerturbedParams};
use crate::engine::{EngineOptions, SeedOptions, StabilityReference, DEFAULT_WINDOW};
use crate::equivariant::{EquivariantLinearMap, Factor, GFTuple};
use crate::error::{GfhError, Result};
use crate::flow::{flow_slices, InvariantHamiltonian, InvariantMonomial};
use crate::weights::{validate_field, CoefficientField, Weights};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub weights: Vec<u32>,
    #[serde(default = "default_fields")]
    pub fields: Vec<CoefficientField>,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default)]
    pub primes: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    pub hamiltonian: HamiltonianSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<SeedSpec>,
}

fn default_fields() -> Vec<CoefficientField> {
    vec![CoefficientField::Rationals]
}

fn default_window() -> usize {
    DEFAULT_WINDOW
}

fn default_factors() -> usize {
    3
}

fn default_slices() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum HamiltonianSpec {
    Rotation {
        angles: Vec<f64>,
    },
    Matrices {
        factors: Vec<Vec<Vec<f64>>>,
    },
    Flow {
        terms: Vec<InvariantMonomial>,
        #[serde(default = "default_slices")]
        slices: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        kick: Vec<InvariantMonomial>,
    },
    Perturbed {
        a: f64,
        c: f64,
        eta: f64,
        #[serde(default = "default_slices")]
        slices: usize,
        #[serde(default)]
        kick: bool,
    },
    Identity {
        #[serde(default = "default_factors")]
        factors: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSpec {
    pub angles: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSpec {
    pub moduli: usize,
    pub phases: usize,
}

impl Scene {
    /// Parses and validates a scene: weights, field gates, primes.
    pub fn parse(text: &str) -> Result<Self> {
        let scene: Scene = toml::from_str(text).map_err(|e| GfhError::Scene(e.message().to_string()))?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| GfhError::Scene(e.to_string()))
    }

    pub fn weights(&self) -> Result<Weights> {
        Weights::new(self.weights.clone())
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.weights()?;
        if self.fields.is_empty() {
            return Err(GfhError::Scene("at least one coefficient field is required".into()));
        }
        for &f in &self.fields {
            f.checked(&w)?;
        }
        for &p in &self.primes {
            let f = CoefficientField::prime(p)?;
            if p == 2 {
                return Err(GfhError::Scene("the Smith checks need odd primes".into()));
            }
            if !validate_field(&w, f) {
                return Err(GfhError::FieldGate { field: f.to_string(), weights: w.as_slice().to_vec() });
            }
        }
        if self.window < 2 {
            return Err(GfhError::OutOfRange { what: "window", value: self.window as f64, bound: 2.0 });
        }
        let n = w.len();
        match &self.hamiltonian {
            HamiltonianSpec::Rotation { angles } if angles.len() != n => {
                return Err(GfhError::Scene(format!("{} rotation angles for {n} weights", angles.len())));
            }
            HamiltonianSpec::Matrices { factors } if factors.is_empty() => {
                return Err(GfhError::Scene("no factor matrices".into()));
            }
            HamiltonianSpec::Flow { slices: 0, .. } | HamiltonianSpec::Perturbed { slices: 0, .. } => {
                return Err(GfhError::Scene("slices must be positive".into()));
            }
            HamiltonianSpec::Identity { factors: 0 } => {
                return Err(GfhError::Scene("identity needs at least one factor".into()));
            }
            HamiltonianSpec::Perturbed { .. } if self.weights != [1, 2] => {
                return Err(GfhError::Scene("the perturbed scene lives on CP(1,2)".into()));
            }
            _ => {}
        }
        let count = match &self.hamiltonian {
            HamiltonianSpec::Rotation { .. } => 1,
            HamiltonianSpec::Matrices { factors } => factors.len(),
            HamiltonianSpec::Flow { slices, kick, .. } => slices + usize::from(!kick.is_empty()),
            HamiltonianSpec::Perturbed { slices, kick, .. } => {
                if *kick {
                    (*slices).max(2)
                } else {
                    *slices
                }
            }
            HamiltonianSpec::Identity { factors } => *factors,
        };
        if count % 2 == 0 {
            return Err(GfhError::Scene(format!("the tuple needs an odd number of factors, got {count}")));
        }
        if let Some(r) = &self.reference {
            if r.angles.len() != n {
                return Err(GfhError::Scene(format!("{} reference angles for {n} weights", r.angles.len())));
            }
        }
        Ok(())
    }

    fn perturbed_params(&self) -> Option<PerturbedParams> {
        match self.hamiltonian {
            HamiltonianSpec::Perturbed { a, c, eta, slices, kick } => Some(PerturbedParams { a, c, eta, slices, kick }),
            _ => None,
        }
    }

    /// The tuple of small factors described by the scene.
    pub fn tuple(&self) -> Result<GFTuple> {
        let w = self.weights()?;
        match &self.hamiltonian {
            HamiltonianSpec::Rotation { angles } => catalog::rotation(&w, angles),
            HamiltonianSpec::Matrices { factors } => {
                let dim = w.real_dim();
                let maps = factors
                    .iter()
                    .map(|rows| {
                        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                            return Err(GfhError::Scene(format!("factor matrices must be {dim} x {dim}")));
                        }
                        let m = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
                        EquivariantLinearMap::new(m, w.clone())
                    })
                    .collect::<Result<Vec<_>>>()?;
                GFTuple::from_linear(w, maps)
            }
            HamiltonianSpec::Flow { terms, slices, kick } => {
                let ham = Arc::new(InvariantHamiltonian::new(w.clone(), terms.clone())?);
                let mut fs = flow_slices(&ham, *slices)?;
                if !kick.is_empty() {
                    let k = Arc::new(InvariantHamiltonian::new(w.clone(), kick.clone())?);
                    fs.extend(flow_slices(&k, 1)?);
                }
                GFTuple::new(w, fs.into_iter().map(Factor::Flow).collect())
            }
            HamiltonianSpec::Perturbed { .. } => catalog::perturbed_cp12(self.perturbed_params().unwrap()),
            HamiltonianSpec::Identity { factors } => Ok(GFTuple::identity(&w, *factors)),
        }
    }

    pub fn stability_reference(&self) -> Result<Option<StabilityReference>> {
        if let Some(r) = &self.reference {
            return StabilityReference::new(catalog::rotation(&self.weights()?, &r.angles)?, r.radius).map(Some);
        }
        match self.perturbed_params() {
            Some(p) => catalog::perturbed_reference(p).map(Some),
            None => Ok(None),
        }
    }

    pub fn engine_options(&self, field: CoefficientField) -> Result<EngineOptions> {
        let seeds = self.seeds.map_or(SeedOptions::default(), |s| SeedOptions { moduli: s.moduli, phases: s.phases });
        Ok(EngineOptions { window: self.window, field, seeds, reference: self.stability_reference()? })
    }

    /// Seeds tried before the generic grid.
    pub fn extra_seeds(&self) -> Vec<DVector<f64>> {
        self.perturbed_params().map_or(Vec::new(), |p| catalog::resonance_seeds(p, 8))
    }

    /// The scene of the built-in Smith example.
    pub fn smith_example() -> Self {
        let p = catalog::smith_scene();
        Scene {
            weights: vec![1, 2],
            fields: vec![CoefficientField::Rationals],
            window: DEFAULT_WINDOW,
            primes: vec![3, 5, 7],
            out: None,
            hamiltonian: HamiltonianSpec::Perturbed { a: p.a, c: p.c, eta: p.eta, slices: p.slices, kick: p.kick },
            reference: None,
            seeds: None,
        }
    }
}
