use std::path::{Path, PathBuf};

use clap::ValueEnum;
use ecyl_core::energy::{Geometry, LengthScale, QuadratureSpec, DEFAULT_LADDER};
use ecyl_core::scattering::{BoundaryCondition, EllipticSurface};
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    D,
    N,
    Em,
}

impl Channel {
    pub fn conditions(self) -> &'static [BoundaryCondition] {
        match self {
            Channel::D => &[BoundaryCondition::Dirichlet],
            Channel::N => &[BoundaryCondition::Neumann],
            Channel::Em => &BoundaryCondition::BOTH,
        }
    }
}

/// Length used to make energies dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    /// `E·d²/(ħcL)`.
    D,
    /// `E·H²/(ħcL)`.
    H,
}

impl Unit {
    pub fn scale(self) -> LengthScale {
        match self {
            Unit::D => LengthScale::FocalHalfWidth,
            Unit::H => LengthScale::Separation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Everything a run depends on. Angles are in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub d: f64,
    pub mu0: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub phi_deg: f64,
    pub channel: Channel,
    pub ladder: Vec<u32>,
    pub unit: Unit,
    pub quadrature: QuadratureSpec,
    pub format: Format,
    /// Worker threads; does not affect results.
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            d: 1.0,
            mu0: 0.0,
            h: 2.0,
            phi_deg: 90.0,
            channel: Channel::Em,
            ladder: DEFAULT_LADDER.to_vec(),
            unit: Unit::D,
            quadrature: QuadratureSpec::default(),
            format: Format::Csv,
            threads: None,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn phi(&self) -> f64 {
        self.phi_deg.to_radians()
    }

    pub fn is_strip(&self) -> bool {
        self.mu0 == 0.0
    }

    pub fn geometry(&self) -> CliResult<Geometry> {
        let surface = EllipticSurface::new(self.d, self.mu0)?;
        Ok(Geometry::new(surface, self.h, self.phi())?)
    }

    /// Keeps rungs below `m_max` and appends `m_max` itself.
    pub fn cap_ladder(&mut self, m_max: u32) {
        self.ladder.retain(|&m| m < m_max);
        self.ladder.push(m_max);
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.ladder.is_empty() || self.ladder.contains(&0) {
            return Err(CliError::Input("m_max ladder must be non-empty with entries >= 1".into()));
        }
        if !self.phi_deg.is_finite() {
            return Err(CliError::Input("phi must be finite".into()));
        }
        self.quadrature.validate()?;
        self.geometry().map(|_| ())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
