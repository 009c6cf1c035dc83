//! On-disk JSON documents.
//!
//! Every document carries `schema` and `version`. Numbers are canonical
//! `"p/q"` strings, and documents are written with sorted keys, so
//! load → save → load is byte-identical.

use std::path::Path;

use parley::belief::{Atom, Belief, JointPosterior};
use parley::conversation::{ConversationProtocol, Round};
use parley::feasibility::SplitWitness;
use parley::game::{Game, Table};
use parley::mediator::MediatorProtocol;
use parley::protocol::Protocol;
use parley::Rational;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const VERSION: u32 = 1;
pub const GAME_SCHEMA: &str = "parley/game";
pub const PROTOCOL_SCHEMA: &str = "parley/protocol";
pub const DISTRIBUTION_SCHEMA: &str = "parley/distribution";
pub const WITNESS_SCHEMA: &str = "parley/witness";
pub const OBJECTIVE_SCHEMA: &str = "parley/objective";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameDocument {
    pub schema: String,
    pub version: u32,
    pub types_a: Vec<String>,
    pub types_b: Vec<String>,
    pub prior_a: Belief,
    pub prior_b: Belief,
    pub actions: Vec<String>,
    /// Most preferred action first.
    pub tie_break: Vec<String>,
    /// `util_a[θ_A][θ_B][r]`.
    pub util_a: Table,
    pub util_b: Table,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelEntry {
    pub history: Vec<String>,
    pub rows: Vec<Vec<Rational>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProtocolBody {
    Mediator {
        signals: Vec<String>,
        /// `kernel[θ_A][θ_B][s]`.
        kernel: Vec<Vec<Vec<Rational>>>,
    },
    Conversation {
        types_a: usize,
        types_b: usize,
        rounds: Vec<Round>,
        kernels: Vec<KernelEntry>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolDocument {
    pub schema: String,
    pub version: u32,
    #[serde(flatten)]
    pub body: ProtocolBody,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDocument {
    pub a: usize,
    pub b: usize,
    pub q_b: Belief,
    pub q_a: Belief,
    pub prob: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionDocument {
    pub schema: String,
    pub version: u32,
    pub prior_a: Belief,
    pub prior_b: Belief,
    pub atoms: Vec<AtomDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessDocument {
    pub schema: String,
    pub version: u32,
    pub witness: SplitWitness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveDocument {
    pub schema: String,
    pub version: u32,
    /// `u(θ_A, θ_B, r)`.
    pub table: Table,
}

fn check_header(schema: &str, version: u32, expected: &str) -> Result<(), CliError> {
    if schema != expected {
        return Err(CliError::Input(format!(
            "expected schema {expected:?}, found {schema:?}"
        )));
    }
    if version != VERSION {
        return Err(CliError::Input(format!("unsupported {schema} version {version}")));
    }
    Ok(())
}

impl GameDocument {
    pub fn from_game(g: &Game) -> Self {
        GameDocument {
            schema: GAME_SCHEMA.into(),
            version: VERSION,
            types_a: g.types_a().to_vec(),
            types_b: g.types_b().to_vec(),
            prior_a: g.prior_a().clone(),
            prior_b: g.prior_b().clone(),
            actions: g.actions().to_vec(),
            tie_break: g.tie_break(),
            util_a: g.util_a().clone(),
            util_b: g.util_b().clone(),
        }
    }

    pub fn into_game(self) -> Result<Game, CliError> {
        check_header(&self.schema, self.version, GAME_SCHEMA)?;
        Ok(Game::new(
            self.types_a,
            self.types_b,
            self.prior_a,
            self.prior_b,
            self.actions,
            self.util_a,
            self.util_b,
            self.tie_break,
        )?)
    }
}

impl ProtocolDocument {
    pub fn from_protocol(p: &Protocol) -> Self {
        let body = match p {
            Protocol::Mediator(m) => ProtocolBody::Mediator {
                signals: m.signals().to_vec(),
                kernel: m.kernel().to_vec(),
            },
            Protocol::Conversation(c) => {
                let mut kernels: Vec<KernelEntry> = c
                    .alice_kernels()
                    .iter()
                    .chain(c.bob_kernels())
                    .map(|(h, rows)| KernelEntry {
                        history: h.clone(),
                        rows: rows.clone(),
                    })
                    .collect();
                kernels.sort_by(|x, y| (x.history.len(), &x.history).cmp(&(y.history.len(), &y.history)));
                ProtocolBody::Conversation {
                    types_a: c.types_a(),
                    types_b: c.types_b(),
                    rounds: c.rounds().to_vec(),
                    kernels,
                }
            }
        };
        ProtocolDocument {
            schema: PROTOCOL_SCHEMA.into(),
            version: VERSION,
            body,
        }
    }

    pub fn into_protocol(self) -> Result<Protocol, CliError> {
        check_header(&self.schema, self.version, PROTOCOL_SCHEMA)?;
        Ok(match self.body {
            ProtocolBody::Mediator { signals, kernel } => MediatorProtocol::new(signals, kernel)?.into(),
            ProtocolBody::Conversation {
                types_a,
                types_b,
                rounds,
                kernels,
            } => {
                let mut c = ConversationProtocol::new(types_a, types_b, rounds)?;
                for k in kernels {
                    c.set_kernel(k.history, k.rows)?;
                }
                c.into()
            }
        })
    }
}

impl DistributionDocument {
    pub fn from_joint(j: &JointPosterior, prior_a: &Belief, prior_b: &Belief) -> Self {
        DistributionDocument {
            schema: DISTRIBUTION_SCHEMA.into(),
            version: VERSION,
            prior_a: prior_a.clone(),
            prior_b: prior_b.clone(),
            atoms: j
                .atoms()
                .iter()
                .map(|a| AtomDocument {
                    a: a.a,
                    b: a.b,
                    q_b: a.q_b.clone(),
                    q_a: a.q_a.clone(),
                    prob: a.prob.clone(),
                })
                .collect(),
        }
    }

    /// The distribution and the priors it is judged against.
    pub fn into_parts(self) -> Result<(JointPosterior, Belief, Belief), CliError> {
        check_header(&self.schema, self.version, DISTRIBUTION_SCHEMA)?;
        let atoms = self
            .atoms
            .into_iter()
            .map(|a| Atom {
                a: a.a,
                b: a.b,
                q_b: a.q_b,
                q_a: a.q_a,
                prob: a.prob,
            })
            .collect();
        let j = JointPosterior::new(self.prior_a.len(), self.prior_b.len(), atoms)?;
        Ok((j, self.prior_a, self.prior_b))
    }
}

impl WitnessDocument {
    pub fn new(witness: SplitWitness) -> Self {
        WitnessDocument {
            schema: WITNESS_SCHEMA.into(),
            version: VERSION,
            witness,
        }
    }

    pub fn into_witness(self) -> Result<SplitWitness, CliError> {
        check_header(&self.schema, self.version, WITNESS_SCHEMA)?;
        Ok(self.witness)
    }
}

impl ObjectiveDocument {
    pub fn into_table(self) -> Result<Table, CliError> {
        check_header(&self.schema, self.version, OBJECTIVE_SCHEMA)?;
        Ok(self.table)
    }
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn to_canonical_json<T: Serialize>(doc: &T) -> String {
    let value = serde_json::to_value(doc).expect("documents serialize");
    let mut s = serde_json::to_string_pretty(&value).expect("values serialize");
    s.push('\n');
    s
}

pub fn parse<T: DeserializeOwned>(text: &str, what: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Input(format!("{what}: {e}")))
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse(&text, &path.display().to_string())
}

pub fn save<T: Serialize>(path: &Path, doc: &T) -> Result<(), CliError> {
    std::fs::write(path, to_canonical_json(doc)).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use parley::fixtures;
    use parley::game::employer_candidate;

    fn round_trip<T: Serialize + DeserializeOwned>(doc: &T) {
        let text = to_canonical_json(doc);
        let back: T = parse(&text, "doc").unwrap();
        assert_eq!(to_canonical_json(&back), text);
    }

    #[test]
    fn game_round_trip() {
        let doc = GameDocument::from_game(&employer_candidate());
        round_trip(&doc);
        assert_eq!(doc.clone().into_game().unwrap(), employer_candidate());
    }

    #[test]
    fn protocol_round_trips() {
        let (c, _, _) = fixtures::two_way_conversation();
        for p in [Protocol::from(fixtures::signal_mediator()), Protocol::from(c)] {
            let doc = ProtocolDocument::from_protocol(&p);
            round_trip(&doc);
            assert_eq!(doc.into_protocol().unwrap(), p);
        }
    }

    #[test]
    fn distribution_round_trip() {
        let half = Belief::uniform(2);
        let doc = DistributionDocument::from_joint(&fixtures::si_distribution(), &half, &half);
        round_trip(&doc);
        assert_eq!(doc.into_parts().unwrap().0, fixtures::si_distribution());
    }

    #[test]
    fn wrong_schema_is_rejected() {
        let mut doc = GameDocument::from_game(&employer_candidate());
        doc.schema = PROTOCOL_SCHEMA.into();
        assert!(matches!(doc.into_game(), Err(CliError::Input(_))));
    }

    #[test]
    fn numbers_are_strings() {
        let text = to_canonical_json(&GameDocument::from_game(&employer_candidate()));
        assert!(text.contains("\"3/5\""));
        assert!(text.contains("\"-10/1\""));
    }
}
