use std::cell::RefCell;
use std::io::{BufRead, Write};

use hrlmi::domain::{EpisodeTrace, MasterState, TurnRecord, UserDialogueAct, UserProfile};
use hrlmi::hierarchy::{run_episode_with, DialoguePolicy, EpisodeSpec, HierarchyError};
use hrlmi::rng::{derive_seed, rng_from_seed};
use hrlmi::sacrl::ActMode;
use hrlmi::usersim::{Patient, SimError, SimulatorRequest};

use crate::templates::Templates;

/// A person at the terminal answering each agent act from a numbered menu.
pub struct HumanPatient<'a, R, W> {
    profile: UserProfile,
    input: R,
    output: &'a RefCell<W>,
    templates: &'a Templates,
}

impl<R: BufRead, W: Write> HumanPatient<'_, R, W> {
    fn say(&self, text: std::fmt::Arguments<'_>) -> Result<(), SimError> {
        self.output.borrow_mut().write_fmt(text).map_err(|e| SimError::Adapter(e.to_string()))
    }

    fn menu(&self) -> Result<(), SimError> {
        for (i, act) in UserDialogueAct::ALL.iter().enumerate() {
            match self.templates.user(*act) {
                Some(text) => self.say(format_args!("  {}. {act}  \"{text}\"\n", i + 1))?,
                None => self.say(format_args!("  {}. {act}\n", i + 1))?,
            }
        }
        Ok(())
    }
}

/// Menu entry (1-based number or act name) to user act.
pub fn parse_choice(line: &str) -> Option<UserDialogueAct> {
    let line = line.trim();
    if let Ok(n) = line.parse::<usize>() {
        return n.checked_sub(1).and_then(UserDialogueAct::from_index);
    }
    line.parse().ok()
}

impl<R: BufRead, W: Write> Patient for HumanPatient<'_, R, W> {
    fn profile(&self) -> UserProfile {
        self.profile
    }

    fn respond(&mut self, request: &SimulatorRequest) -> Result<UserDialogueAct, SimError> {
        let act = request.agent_act;
        self.say(format_args!("\n[turn {}] agent: {act}", request.turn))?;
        match self.templates.agent(act) {
            Some(text) => self.say(format_args!("  \"{text}\"\n"))?,
            None => self.say(format_args!("\n"))?,
        }
        self.menu()?;
        loop {
            self.say(format_args!("your response [1-{}]: ", UserDialogueAct::COUNT))?;
            self.output.borrow_mut().flush().map_err(|e| SimError::Adapter(e.to_string()))?;
            let mut line = String::new();
            let read = self.input.read_line(&mut line).map_err(|e| SimError::Adapter(e.to_string()))?;
            if read == 0 {
                return Err(SimError::Adapter("input closed before the session ended".into()));
            }
            match parse_choice(&line) {
                Some(user) => return Ok(user),
                None => self.say(format_args!("not a menu entry: {:?}\n", line.trim()))?,
            }
        }
    }
}

/// Runs one conversation with a human patient. Bookkeeping is the same as for
/// simulated episodes; only the source of user acts differs.
pub fn run_session<R: BufRead, W: Write>(
    policy: &dyn DialoguePolicy,
    profile: UserProfile,
    seed: u64,
    templates: &Templates,
    input: R,
    output: W,
) -> Result<EpisodeTrace, HierarchyError> {
    let output = RefCell::new(output);
    let topic = EpisodeSpec::from_seed(profile, seed).topic;
    writeln!(output.borrow_mut(), "session: profile {profile}, topic {topic}, seed {seed}").ok();
    let mut patient = HumanPatient { profile, input, output: &output, templates };
    let mut rng = rng_from_seed(derive_seed(seed, &[1]));
    let mut running = 0.0;
    let trace = run_episode_with(policy, &mut patient, topic, seed, ActMode::Greedy, &mut rng, |t: &TurnRecord| {
        running += t.reward;
        let after = t.counters.registered(t.user_act);
        let MasterState { info_count, emotion_count, realization_count } = after;
        writeln!(
            output.borrow_mut(),
            "reward {:+} (total {running}); counters info {info_count}, emotion {emotion_count}, realization {realization_count}",
            t.reward
        )
        .ok();
    })?;
    writeln!(output.borrow_mut(), "\nsession over after {} turns, total reward {}", trace.len(), trace.total_reward).ok();
    Ok(trace)
}
