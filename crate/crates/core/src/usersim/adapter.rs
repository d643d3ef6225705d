//! Request/response contract between the dialogue manager and a patient.
//!
//! The wire format is JSON: a [`SimulatorRequest`] body in, a
//! [`SimulatorResponse`] body out. An external simulator served over local
//! HTTP implements the same exchange; [`LoopbackAdapter`] runs it in-process
//! against the scripted simulator.

use serde::{Deserialize, Serialize};

use super::sim::{SimError, SimState};
use crate::domain::{AgentDialogueAct, Topic, UserDialogueAct, UserProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub agent: AgentDialogueAct,
    pub user: UserDialogueAct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatorRequest {
    pub profile: UserProfile,
    pub topic: Topic,
    pub turn: u32,
    pub agent_act: AgentDialogueAct,
    /// Earlier exchanges, oldest first.
    pub history: Vec<Exchange>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SimulatorResponse {
    Act { user_act: UserDialogueAct },
    Error { error: String },
}

/// Anything that answers agent acts: the scripted simulator, an external
/// adapter, or a human at a terminal.
pub trait Patient {
    fn profile(&self) -> UserProfile;
    fn respond(&mut self, request: &SimulatorRequest) -> Result<UserDialogueAct, SimError>;
}

impl Patient for SimState {
    fn profile(&self) -> UserProfile {
        self.profile
    }

    fn respond(&mut self, request: &SimulatorRequest) -> Result<UserDialogueAct, SimError> {
        self.step(request.agent_act)
    }
}

/// Server half of the loopback: decodes a request body, answers it with the
/// scripted simulator and encodes the response body.
#[derive(Debug, Clone)]
pub struct LoopbackServer {
    sim: SimState,
}

impl LoopbackServer {
    pub fn new(sim: SimState) -> Self {
        LoopbackServer { sim }
    }

    pub fn handle(&mut self, body: &str) -> String {
        let response = match serde_json::from_str::<SimulatorRequest>(body) {
            Ok(req) => match self.sim.respond(&req) {
                Ok(user_act) => SimulatorResponse::Act { user_act },
                Err(e) => SimulatorResponse::Error { error: e.to_string() },
            },
            Err(e) => SimulatorResponse::Error { error: format!("bad request: {e}") },
        };
        serde_json::to_string(&response).expect("responses always serialize")
    }
}

/// Client half: every turn goes through the JSON wire format.
#[derive(Debug, Clone)]
pub struct LoopbackAdapter {
    profile: UserProfile,
    server: LoopbackServer,
}

impl LoopbackAdapter {
    pub fn new(sim: SimState) -> Self {
        LoopbackAdapter { profile: sim.profile, server: LoopbackServer::new(sim) }
    }
}

impl Patient for LoopbackAdapter {
    fn profile(&self) -> UserProfile {
        self.profile
    }

    fn respond(&mut self, request: &SimulatorRequest) -> Result<UserDialogueAct, SimError> {
        let body = serde_json::to_string(request).map_err(|e| SimError::Adapter(e.to_string()))?;
        let reply = self.server.handle(&body);
        match serde_json::from_str(&reply).map_err(|e| SimError::Adapter(e.to_string()))? {
            SimulatorResponse::Act { user_act } if !user_act.is_none() => Ok(user_act),
            SimulatorResponse::Act { .. } => Err(SimError::Adapter("simulator answered with the None sentinel".into())),
            SimulatorResponse::Error { error } => Err(SimError::Adapter(error)),
        }
    }
}
