use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{AgentDialogueAct, UserDialogueAct, UserProfile};

pub const PARAMS_VERSION: u32 = 1;

/// Shipped defaults for all three profiles.
pub const DEFAULT_PARAMS_TOML: &str = include_str!("../../data/profiles.v1.toml");

#[derive(Debug, Error)]
pub enum ParamsError {
    #[error("reading simulator params {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parsing simulator params: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unsupported simulator params version {0} (expected {PARAMS_VERSION})")]
    Version(u32),
    #[error("profile {profile}: {message}")]
    Invalid { profile: String, message: String },
    #[error("missing parameters for profile {0}")]
    MissingProfile(UserProfile),
}

/// Coarse grouping of agent acts used to index the response table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActCategory {
    Engaging,
    Focusing,
    Evoking,
    Planning,
    Social,
}

impl ActCategory {
    pub const ALL: [ActCategory; 5] =
        [ActCategory::Engaging, ActCategory::Focusing, ActCategory::Evoking, ActCategory::Planning, ActCategory::Social];

    pub fn of(act: AgentDialogueAct) -> Self {
        use AgentDialogueAct::*;
        match act {
            AskCurrentEmotions | EmpathicReaction | NormalizeReassure => ActCategory::Engaging,
            AskInformation | AskConsentValidation => ActCategory::Focusing,
            Reflection | InviteShiftOutlook | AcknowledgeEncourage => ActCategory::Evoking,
            PlanWithPatient | GiveSolution | MedicalEducationGuidance => ActCategory::Planning,
            Backchannel | GreetingClosing => ActCategory::Social,
        }
    }
}

/// Three-way discretization of a latent level in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    Low,
    Mid,
    High,
}

impl Band {
    pub const ALL: [Band; 3] = [Band::Low, Band::Mid, Band::High];

    pub fn of(level: f64) -> Self {
        if level < 1.0 / 3.0 {
            Band::Low
        } else if level > 2.0 / 3.0 {
            Band::High
        } else {
            Band::Mid
        }
    }
}

pub type Weights = [f64; UserDialogueAct::COUNT];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseRow {
    pub category: ActCategory,
    pub motivation: Band,
    pub engagement: Band,
    pub weights: BTreeMap<UserDialogueAct, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfileParams {
    initial_motivation: f64,
    initial_engagement: f64,
    #[serde(default)]
    motivation_drift: f64,
    engagement_gate: f64,
    #[serde(default)]
    engagement_gated: Vec<AgentDialogueAct>,
    premature_solution_threshold: f64,
    premature_solution_sustain_boost: f64,
    #[serde(default)]
    motivation_gain: BTreeMap<AgentDialogueAct, f64>,
    #[serde(default)]
    engagement_gain: BTreeMap<AgentDialogueAct, f64>,
    responses: Vec<ResponseRow>,
}

/// Validated dynamics of one patient profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfileParams", into = "RawProfileParams")]
pub struct ProfileParams {
    pub initial_motivation: f64,
    pub initial_engagement: f64,
    /// Added to motivation every turn.
    pub motivation_drift: f64,
    pub engagement_gate: f64,
    /// Acts whose motivation gain applies only above `engagement_gate`;
    /// below it they cost half the gain instead.
    pub engagement_gated: [bool; AgentDialogueAct::COUNT],
    pub premature_solution_threshold: f64,
    pub premature_solution_sustain_boost: f64,
    pub motivation_gain: [f64; AgentDialogueAct::COUNT],
    pub engagement_gain: [f64; AgentDialogueAct::COUNT],
    /// `[category][motivation band][engagement band]`.
    pub responses: [[[Weights; 3]; 3]; 5],
}

impl ProfileParams {
    pub fn weights(&self, category: ActCategory, motivation: Band, engagement: Band) -> &Weights {
        &self.responses[category as usize][motivation as usize][engagement as usize]
    }

    /// Every agent act yields `user` with certainty.
    pub fn degenerate(user: UserDialogueAct) -> Self {
        let mut w = [0.0; UserDialogueAct::COUNT];
        w[user.index()] = 1.0;
        ProfileParams {
            initial_motivation: 0.5,
            initial_engagement: 0.5,
            motivation_drift: 0.0,
            engagement_gate: 0.5,
            engagement_gated: [false; AgentDialogueAct::COUNT],
            premature_solution_threshold: 0.0,
            premature_solution_sustain_boost: 0.0,
            motivation_gain: [0.0; AgentDialogueAct::COUNT],
            engagement_gain: [0.0; AgentDialogueAct::COUNT],
            responses: [[[w; 3]; 3]; 5],
        }
    }
}

fn dense(map: &BTreeMap<AgentDialogueAct, f64>) -> [f64; AgentDialogueAct::COUNT] {
    let mut out = [0.0; AgentDialogueAct::COUNT];
    for (a, v) in map {
        out[a.index()] = *v;
    }
    out
}

fn sparse(values: &[f64; AgentDialogueAct::COUNT]) -> BTreeMap<AgentDialogueAct, f64> {
    AgentDialogueAct::ALL
        .iter()
        .filter(|a| values[a.index()] != 0.0)
        .map(|a| (*a, values[a.index()]))
        .collect()
}

impl TryFrom<RawProfileParams> for ProfileParams {
    type Error = String;

    fn try_from(raw: RawProfileParams) -> Result<Self, Self::Error> {
        for (name, v) in [
            ("initial_motivation", raw.initial_motivation),
            ("initial_engagement", raw.initial_engagement),
            ("engagement_gate", raw.engagement_gate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} = {v} is outside [0, 1]"));
            }
        }
        let finite = raw.motivation_gain.values().chain(raw.engagement_gain.values()).all(|v| v.is_finite())
            && raw.motivation_drift.is_finite()
            && raw.premature_solution_threshold.is_finite();
        if !finite {
            return Err("gains and thresholds must be finite".into());
        }
        if !(raw.premature_solution_sustain_boost >= 0.0 && raw.premature_solution_sustain_boost.is_finite()) {
            return Err("premature_solution_sustain_boost must be a non-negative number".into());
        }
        let mut table: [[[Option<Weights>; 3]; 3]; 5] = [[[None; 3]; 3]; 5];
        for row in &raw.responses {
            let slot = &mut table[row.category as usize][row.motivation as usize][row.engagement as usize];
            if slot.is_some() {
                return Err(format!(
                    "duplicate response row ({:?}, {:?}, {:?})",
                    row.category, row.motivation, row.engagement
                ));
            }
            let mut w = [0.0; UserDialogueAct::COUNT];
            for (u, v) in &row.weights {
                if u.is_none() && *v != 0.0 {
                    return Err("the None sentinel cannot carry response weight".into());
                }
                if !(v.is_finite() && *v >= 0.0) {
                    return Err(format!("weight for {u} must be finite and non-negative, got {v}"));
                }
                w[u.index()] = *v;
            }
            if !w.iter().any(|&x| x > 0.0) {
                return Err(format!(
                    "response row ({:?}, {:?}, {:?}) has no positive weight",
                    row.category, row.motivation, row.engagement
                ));
            }
            *slot = Some(w);
        }
        let mut responses = [[[[0.0; UserDialogueAct::COUNT]; 3]; 3]; 5];
        for c in ActCategory::ALL {
            for m in Band::ALL {
                for e in Band::ALL {
                    responses[c as usize][m as usize][e as usize] = table[c as usize][m as usize][e as usize]
                        .ok_or_else(|| format!("missing response row ({c:?}, {m:?}, {e:?})"))?;
                }
            }
        }
        let mut engagement_gated = [false; AgentDialogueAct::COUNT];
        for a in &raw.engagement_gated {
            engagement_gated[a.index()] = true;
        }
        Ok(ProfileParams {
            initial_motivation: raw.initial_motivation,
            initial_engagement: raw.initial_engagement,
            motivation_drift: raw.motivation_drift,
            engagement_gate: raw.engagement_gate,
            engagement_gated,
            premature_solution_threshold: raw.premature_solution_threshold,
            premature_solution_sustain_boost: raw.premature_solution_sustain_boost,
            motivation_gain: dense(&raw.motivation_gain),
            engagement_gain: dense(&raw.engagement_gain),
            responses,
        })
    }
}

impl From<ProfileParams> for RawProfileParams {
    fn from(p: ProfileParams) -> Self {
        let mut responses = Vec::with_capacity(45);
        for c in ActCategory::ALL {
            for m in Band::ALL {
                for e in Band::ALL {
                    let w = p.weights(c, m, e);
                    let weights = UserDialogueAct::SPOKEN
                        .iter()
                        .filter(|u| w[u.index()] != 0.0)
                        .map(|u| (*u, w[u.index()]))
                        .collect();
                    responses.push(ResponseRow { category: c, motivation: m, engagement: e, weights });
                }
            }
        }
        RawProfileParams {
            initial_motivation: p.initial_motivation,
            initial_engagement: p.initial_engagement,
            motivation_drift: p.motivation_drift,
            engagement_gate: p.engagement_gate,
            engagement_gated: AgentDialogueAct::ALL.iter().copied().filter(|a| p.engagement_gated[a.index()]).collect(),
            premature_solution_threshold: p.premature_solution_threshold,
            premature_solution_sustain_boost: p.premature_solution_sustain_boost,
            motivation_gain: sparse(&p.motivation_gain),
            engagement_gain: sparse(&p.engagement_gain),
            responses,
        }
    }
}

/// Parameters for every profile, as stored in the simulator config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimParams {
    pub version: u32,
    pub profiles: BTreeMap<UserProfile, ProfileParams>,
}

impl SimParams {
    pub fn from_toml_str(text: &str) -> Result<Self, ParamsError> {
        let params: SimParams = toml::from_str(text)?;
        if params.version != PARAMS_VERSION {
            return Err(ParamsError::Version(params.version));
        }
        for p in UserProfile::ALL {
            if !params.profiles.contains_key(p) {
                return Err(ParamsError::MissingProfile(*p));
            }
        }
        Ok(params)
    }

    pub fn load(path: &Path) -> Result<Self, ParamsError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ParamsError::Io { path: path.display().to_string(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("simulator params always serialize")
    }

    pub fn profile(&self, profile: UserProfile) -> &ProfileParams {
        &self.profiles[&profile]
    }
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams::from_toml_str(DEFAULT_PARAMS_TOML).expect("shipped simulator params are valid")
    }
}
