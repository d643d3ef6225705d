//! Reward rules restated as a table of (condition, amount) rows, kept apart
//! from the library implementation so the two can be compared exhaustively.

use hrlmi::domain::{AgentDialogueAct, MasterState, UserDialogueAct};

struct Row {
    amount: f64,
    applies: fn(UserDialogueAct, AgentDialogueAct, (u32, u32, u32)) -> bool,
}

// Counter triple order: (info, emotion, realization), all taken before the user act.
const ROWS: &[Row] = &[
    Row { amount: 5.0, applies: |u, _, _| u.name() == "ChangeUnhealthyBehavior" },
    Row { amount: -5.0, applies: |u, _, _| u.name() == "SustainUnhealthyBehavior" },
    Row { amount: 50.0, applies: |u, _, _| u.name() == "ShareFeelings" },
    Row { amount: 100.0, applies: |u, _, (_, e, _)| u.name() == "SharePersonalInfo" && e >= 2 },
    Row { amount: 150.0, applies: |u, _, (i, _, _)| u.name() == "RealizationUnderstanding" && i >= 2 },
    Row { amount: 200.0, applies: |_, a, (i, _, r)| a.name() == "PlanWithPatient" && i >= 2 && r >= 1 },
];

pub fn oracle_reward(before: &MasterState, user: UserDialogueAct, agent: AgentDialogueAct) -> f64 {
    let c = (before.info_count, before.emotion_count, before.realization_count);
    ROWS.iter().filter(|row| (row.applies)(user, agent, c)).map(|row| row.amount).sum()
}

/// Every counter triple in {0,1,2,3}^3; enough to open or close every gate.
pub fn counter_grid() -> Vec<MasterState> {
    let mut out = Vec::new();
    for i in 0..4 {
        for e in 0..4 {
            for r in 0..4 {
                out.push(MasterState::new(i, e, r));
            }
        }
    }
    out
}

/// Distinct per-turn rewards the oracle can produce, sorted.
pub fn achievable_turn_rewards() -> Vec<f64> {
    let mut values: Vec<f64> = Vec::new();
    for c in counter_grid() {
        for &u in UserDialogueAct::ALL {
            for &a in AgentDialogueAct::ALL {
                let v = oracle_reward(&c, u, a) + 0.0; // folds -0.0 into 0.0
                if !values.contains(&v) {
                    values.push(v);
                }
            }
        }
    }
    values.sort_by(f64::total_cmp);
    values
}
