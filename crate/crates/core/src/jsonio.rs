//! Versioned JSON file formats for scenarios, measurement games and quantum
//! protocols. Every file carries a `version` field; unknown versions are
//! rejected rather than guessed at.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::{MeasurementGame, Povm};
use crate::harness::{Party, ProtocolInputs, ProtocolRound, QuantumProtocolSpec};
use crate::matcore::{c64, schmidt_decompose, ComplexMatrix, SchmidtState};
use crate::oracle::Scenario;

/// The only schema version this build reads.
pub const SCHEMA_VERSION: u32 = 1;

fn check_version(version: u32) -> Result<()> {
    if version != SCHEMA_VERSION {
        return Err(Error::InvalidFormat(format!(
            "unsupported schema version {version}, expected {SCHEMA_VERSION}"
        )));
    }
    Ok(())
}

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidFormat(e.to_string()))
}

/// A pure state as a raw amplitude vector over `dim_a x dim_b`.
#[derive(Serialize, Deserialize)]
pub struct StateJson {
    pub dim_a: usize,
    pub dim_b: usize,
    pub vector: Vec<[f64; 2]>,
}

impl StateJson {
    pub fn to_schmidt(&self) -> Result<SchmidtState> {
        let column = ComplexMatrix::new(
            self.vector.len(),
            1,
            self.vector.iter().map(|&[re, im]| c64(re, im)).collect(),
        )?;
        schmidt_decompose(&column, self.dim_a, self.dim_b)
    }
}

/// Scenario file: operator, shared state, optional local isometries
/// (identity when omitted).
#[derive(Serialize, Deserialize)]
pub struct ScenarioFile {
    pub version: u32,
    #[serde(default)]
    pub id: Option<String>,
    pub operator: crate::bipartite::BipartiteOperator,
    pub state: StateJson,
    #[serde(default)]
    pub isometry_a: Option<ComplexMatrix>,
    #[serde(default)]
    pub isometry_b: Option<ComplexMatrix>,
}

/// A scenario plus its file-level identity.
pub struct LoadedScenario {
    pub id: String,
    pub scenario: Scenario,
}

pub fn parse_scenario(text: &str, fallback_id: &str) -> Result<LoadedScenario> {
    let file: ScenarioFile = parse(text)?;
    check_version(file.version)?;
    let e = file.state.to_schmidt()?;
    let u = file
        .isometry_a
        .unwrap_or_else(|| ComplexMatrix::identity(file.operator.dim_a()));
    let v = file
        .isometry_b
        .unwrap_or_else(|| ComplexMatrix::identity(file.operator.dim_b()));
    Ok(LoadedScenario {
        id: file.id.unwrap_or_else(|| fallback_id.to_string()),
        scenario: Scenario::new(file.operator, e, u, v)?,
    })
}

#[derive(Serialize, Deserialize)]
pub struct PovmJson {
    #[serde(default)]
    pub isometry: Option<ComplexMatrix>,
    pub outcomes: Vec<OutcomeJson>,
}

#[derive(Serialize, Deserialize)]
pub struct OutcomeJson {
    pub label: String,
    pub projector: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
pub struct GameFile {
    pub version: u32,
    #[serde(default)]
    pub id: Option<String>,
    pub state: StateJson,
    pub family_a: Vec<PovmJson>,
    pub family_b: Vec<PovmJson>,
}

pub struct LoadedGame {
    pub id: String,
    pub game: MeasurementGame,
}

fn povm_from_json(json: PovmJson, state_dim: usize) -> Result<Povm> {
    let projector_dim = json
        .outcomes
        .first()
        .map(|o| o.projector.rows())
        .unwrap_or(state_dim);
    let isometry = json
        .isometry
        .unwrap_or_else(|| ComplexMatrix::identity(projector_dim));
    Povm::new(
        isometry,
        json.outcomes
            .into_iter()
            .map(|o| (o.label, o.projector))
            .collect(),
    )
}

pub fn parse_game(text: &str, fallback_id: &str) -> Result<LoadedGame> {
    let file: GameFile = parse(text)?;
    check_version(file.version)?;
    let state = file.state.to_schmidt()?;
    let (da, db) = (state.dim_a(), state.dim_b());
    let family_a = file
        .family_a
        .into_iter()
        .map(|p| povm_from_json(p, da))
        .collect::<Result<Vec<_>>>()?;
    let family_b = file
        .family_b
        .into_iter()
        .map(|p| povm_from_json(p, db))
        .collect::<Result<Vec<_>>>()?;
    Ok(LoadedGame {
        id: file.id.unwrap_or_else(|| fallback_id.to_string()),
        game: MeasurementGame::new(state, family_a, family_b)?,
    })
}

#[derive(Serialize, Deserialize)]
pub struct RoundJson {
    /// "A" for Alice, "B" for Bob.
    pub party: String,
    pub unitary: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
pub struct ProtocolInputJson {
    pub input_a: Vec<[f64; 2]>,
    pub input_b: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
pub struct ProtocolFile {
    pub version: u32,
    #[serde(default)]
    pub id: Option<String>,
    pub dim_a: usize,
    pub dim_b: usize,
    pub rounds: Vec<RoundJson>,
    pub inputs: Vec<ProtocolInputJson>,
    pub shared: StateJson,
}

pub struct LoadedProtocol {
    pub id: String,
    pub spec: QuantumProtocolSpec,
    pub inputs: Vec<ProtocolInputs>,
}

pub fn parse_protocol(text: &str, fallback_id: &str) -> Result<LoadedProtocol> {
    let file: ProtocolFile = parse(text)?;
    check_version(file.version)?;
    let rounds = file
        .rounds
        .into_iter()
        .enumerate()
        .map(|(k, r)| {
            let party = match r.party.as_str() {
                "A" | "a" | "alice" | "Alice" => Party::Alice,
                "B" | "b" | "bob" | "Bob" => Party::Bob,
                other => {
                    return Err(Error::InvalidFormat(format!(
                        "round {k}: unknown party {other:?}"
                    )))
                }
            };
            Ok(ProtocolRound { party, unitary: r.unitary })
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = QuantumProtocolSpec::new(file.dim_a, file.dim_b, rounds)?;
    let shared = file.shared.to_schmidt()?;
    let inputs = file
        .inputs
        .into_iter()
        .map(|i| {
            let column = |v: Vec<[f64; 2]>| {
                ComplexMatrix::new(v.len(), 1, v.iter().map(|&[re, im]| c64(re, im)).collect())
            };
            Ok(ProtocolInputs {
                input_a: column(i.input_a)?,
                input_b: column(i.input_b)?,
                shared: shared.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LoadedProtocol {
        id: file.id.unwrap_or_else(|| fallback_id.to_string()),
        spec,
        inputs,
    })
}
