//! JSON scenario documents for the two-state channel family.

use crate::error::{Error, Result};
use crate::model::scenario::{OffsetVariant, Scenario, TwoStateFamily};
use crate::model::topology::Link;
use crate::real::Real;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub topology: TopologySection,
    pub links: Vec<LinkSection>,
    pub harvest: Vec<HarvestSection>,
    pub utilities: Vec<UtilitySection>,
    #[serde(default)]
    pub transmission: TransmissionSection,
    #[serde(default)]
    pub admissions: AdmissionsSection,
    pub parameters: ParametersSection,
    #[serde(default)]
    pub regime_changes: Vec<RegimeChangeSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopologySection {
    pub node_count: usize,
    /// Destination node of each commodity.
    pub commodities: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkSection {
    pub from: usize,
    pub to: usize,
    pub p_good: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarvestSection {
    pub node: usize,
    pub size: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UtilitySection {
    pub node: usize,
    /// Destination of the commodity this source feeds; may be omitted when
    /// the scenario has a single commodity.
    #[serde(default)]
    pub commodity: Option<usize>,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransmissionSection {
    pub good_rate: f64,
    pub bad_rate: f64,
}

impl Default for TransmissionSection {
    fn default() -> Self {
        Self {
            good_rate: 2.0,
            bad_rate: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmissionsSection {
    pub r_max: f64,
    pub integer: bool,
}

impl Default for AdmissionsSection {
    fn default() -> Self {
        Self {
            r_max: 2.0,
            integer: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParametersSection {
    pub v: f64,
    pub c: f64,
    #[serde(default)]
    pub theta_override: Option<f64>,
    #[serde(default)]
    pub t_l_override: Option<u64>,
    pub horizon: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegimeChangeSection {
    pub slot: u64,
    pub p_good: Vec<f64>,
    pub p_harvest: Vec<f64>,
}

impl ScenarioFile {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: ScenarioFile = serde_json::from_str(&text)?;
        Ok(file)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Validates and builds the scenario.
    pub fn build<S: Real>(&self, name: impl Into<String>) -> Result<Scenario<S>> {
        let f = S::of_f64;
        if self.harvest.len() > self.topology.node_count {
            return Err(Error::Schema("more harvest entries than nodes".into()));
        }
        let mut harvest = vec![(S::zero(), S::zero()); self.topology.node_count];
        for h in &self.harvest {
            if h.node >= self.topology.node_count {
                return Err(Error::Schema(format!("harvest names unknown node {}", h.node)));
            }
            harvest[h.node] = (f(h.size), f(h.p));
        }
        let mut utility_weights = Vec::new();
        for u in &self.utilities {
            let commodity = match u.commodity {
                Some(c) => c,
                None if self.topology.commodities.len() == 1 => self.topology.commodities[0],
                None => {
                    return Err(Error::Schema(format!(
                        "utility at node {} must name a commodity",
                        u.node
                    )))
                }
            };
            utility_weights.push((u.node, commodity, f(u.weight)));
        }
        let family = TwoStateFamily {
            node_count: self.topology.node_count,
            links: self
                .links
                .iter()
                .map(|l| Link {
                    from: l.from,
                    to: l.to,
                })
                .collect(),
            commodities: self.topology.commodities.clone(),
            p_good: self.links.iter().map(|l| f(l.p_good)).collect(),
            harvest,
            utility_weights,
            good_rate: f(self.transmission.good_rate),
            bad_rate: f(self.transmission.bad_rate),
            r_max: f(self.admissions.r_max),
            integer_admissions: self.admissions.integer,
        };
        let regimes = self
            .regime_changes
            .iter()
            .map(|rc| {
                if rc.p_harvest.len() != self.topology.node_count
                    && rc.p_harvest.len() != self.harvest.len()
                {
                    return Err(Error::Schema(format!(
                        "regime change at slot {} has {} harvest probabilities",
                        rc.slot,
                        rc.p_harvest.len()
                    )));
                }
                let mut h = family.harvest.clone();
                for (i, &p) in rc.p_harvest.iter().enumerate() {
                    // Reuse the arrival sizes; only probabilities change.
                    let node = if rc.p_harvest.len() == self.harvest.len() {
                        self.harvest[i].node
                    } else {
                        i
                    };
                    h[node].1 = f(p);
                }
                Ok((rc.slot, rc.p_good.iter().map(|&p| f(p)).collect(), h))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut scenario = family.build(
            name,
            f(self.parameters.v),
            f(self.parameters.c),
            self.parameters.horizon,
            self.parameters.seed,
            regimes,
        )?;
        if let Some(theta) = self.parameters.theta_override {
            scenario.params.theta = vec![f(theta); scenario.layout.energy_count()];
        }
        if let Some(t_l) = self.parameters.t_l_override {
            scenario.params.t_l = t_l;
        }
        Ok(scenario)
    }
}

/// The bundled "fig2" document, so `--scenario fig2` and a file round-trip
/// produce identical scenarios.
pub fn fig2_file(v: f64, c: f64, horizon: u64, seed: u64) -> ScenarioFile {
    ScenarioFile {
        topology: TopologySection {
            node_count: 4,
            commodities: vec![3],
        },
        links: vec![
            LinkSection { from: 0, to: 1, p_good: 0.5 },
            LinkSection { from: 0, to: 2, p_good: 0.2 },
            LinkSection { from: 1, to: 2, p_good: 0.3 },
            LinkSection { from: 1, to: 3, p_good: 0.5 },
            LinkSection { from: 2, to: 3, p_good: 0.7 },
        ],
        harvest: vec![
            HarvestSection { node: 0, size: 2.0, p: 0.6 },
            HarvestSection { node: 1, size: 2.0, p: 0.3 },
            HarvestSection { node: 2, size: 2.0, p: 0.5 },
        ],
        utilities: vec![
            UtilitySection { node: 0, commodity: Some(3), weight: 3.0 },
            UtilitySection { node: 1, commodity: Some(3), weight: 2.0 },
            UtilitySection { node: 2, commodity: Some(3), weight: 1.0 },
        ],
        transmission: TransmissionSection::default(),
        admissions: AdmissionsSection::default(),
        parameters: ParametersSection {
            v,
            c,
            theta_override: None,
            t_l_override: None,
            horizon,
            seed,
        },
        regime_changes: Vec::new(),
    }
}

/// Applies an `OffsetVariant` name from a document or flag.
pub fn parse_offset(name: &str) -> Result<OffsetVariant> {
    match name {
        "adjusted" => Ok(OffsetVariant::Adjusted),
        "theoretical" => Ok(OffsetVariant::Theoretical),
        other => Err(Error::Schema(format!(
            "unknown offset variant '{other}' (expected 'adjusted' or 'theoretical')"
        ))),
    }
}
