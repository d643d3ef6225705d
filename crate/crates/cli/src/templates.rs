use std::collections::BTreeMap;

use hrlmi::domain::{AgentDialogueAct, UserDialogueAct};
use serde::Deserialize;

pub const DEFAULT_TEMPLATES: &str = include_str!("../data/act_templates.toml");

/// Act -> example utterance. Keys are act names; unknown keys are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Templates {
    #[serde(default)]
    agent: BTreeMap<String, String>,
    #[serde(default)]
    user: BTreeMap<String, String>,
}

impl Templates {
    pub fn parse(text: &str) -> Result<Self, String> {
        let t: Templates = toml::from_str(text).map_err(|e| e.to_string())?;
        for key in t.agent.keys() {
            key.parse::<AgentDialogueAct>().map_err(|e| format!("[agent] {e}"))?;
        }
        for key in t.user.keys() {
            key.parse::<UserDialogueAct>().map_err(|e| format!("[user] {e}"))?;
        }
        Ok(t)
    }

    pub fn agent(&self, act: AgentDialogueAct) -> Option<&str> {
        self.agent.get(act.name()).map(String::as_str)
    }

    pub fn user(&self, act: UserDialogueAct) -> Option<&str> {
        self.user.get(act.name()).map(String::as_str)
    }
}
