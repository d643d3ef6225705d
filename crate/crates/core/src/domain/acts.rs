use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown {kind} `{name}`")]
pub struct UnknownName {
    pub kind: &'static str,
    pub name: String,
}

fn normalize(name: &str) -> String {
    name.chars()
        .filter(|c| !matches!(c, '-' | '_' | ' '))
        .flat_map(char::to_lowercase)
        .collect()
}

/// Declares a closed enumeration with frozen indices (declaration order),
/// name lookup and a lenient `FromStr`.
macro_rules! indexed_enum {
    (
        $(#[$meta:meta])*
        $vis:vis enum $name:ident ($kind:literal) { $($variant:ident),+ $(,)? }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        $vis enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];
            pub const COUNT: usize = Self::ALL.len();

            #[inline]
            pub fn index(self) -> usize {
                self as usize
            }

            pub fn from_index(index: usize) -> Option<Self> {
                Self::ALL.get(index).copied()
            }

            pub fn name(self) -> &'static str {
                match self { $($name::$variant => stringify!($variant)),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = UnknownName;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                let wanted = normalize(s);
                Self::ALL
                    .iter()
                    .copied()
                    .find(|v| normalize(v.name()) == wanted)
                    .or_else(|| Self::alias(&wanted))
                    .ok_or_else(|| UnknownName { kind: $kind, name: s.to_string() })
            }
        }
    };
}

indexed_enum! {
    /// The therapist's action alphabet. The first eight acts are task oriented,
    /// the last five are social.
    pub enum AgentDialogueAct ("agent dialogue act") {
        AskConsentValidation,
        MedicalEducationGuidance,
        PlanWithPatient,
        GiveSolution,
        AskCurrentEmotions,
        InviteShiftOutlook,
        AskInformation,
        Reflection,
        EmpathicReaction,
        AcknowledgeEncourage,
        Backchannel,
        GreetingClosing,
        NormalizeReassure,
    }
}

indexed_enum! {
    /// The patient's act alphabet. `None` marks "nothing said yet" and is
    /// never produced by a simulator.
    pub enum UserDialogueAct ("user dialogue act") {
        ChangeUnhealthyBehavior,
        SustainUnhealthyBehavior,
        ShareFeelings,
        SharePersonalInfo,
        RealizationUnderstanding,
        GreetingClosing,
        Backchannel,
        AskMedicalInfo,
        None,
    }
}

indexed_enum! {
    pub enum UserProfile ("user profile") {
        OpenToChange,
        ResistantToChange,
        Receptive,
    }
}

indexed_enum! {
    pub enum Topic ("topic") {
        Smoking,
        Alcohol,
        SedentaryLifestyle,
    }
}

impl AgentDialogueAct {
    fn alias(_: &str) -> Option<Self> {
        None
    }

    pub fn is_task_oriented(self) -> bool {
        self.index() < 8
    }
}

impl UserDialogueAct {
    /// Acts a patient can actually produce (everything but `None`).
    pub const SPOKEN: &'static [UserDialogueAct] = &[
        UserDialogueAct::ChangeUnhealthyBehavior,
        UserDialogueAct::SustainUnhealthyBehavior,
        UserDialogueAct::ShareFeelings,
        UserDialogueAct::SharePersonalInfo,
        UserDialogueAct::RealizationUnderstanding,
        UserDialogueAct::GreetingClosing,
        UserDialogueAct::Backchannel,
        UserDialogueAct::AskMedicalInfo,
    ];

    fn alias(_: &str) -> Option<Self> {
        None
    }

    pub fn is_none(self) -> bool {
        self == UserDialogueAct::None
    }
}

impl UserProfile {
    fn alias(name: &str) -> Option<Self> {
        match name {
            "open" => Some(UserProfile::OpenToChange),
            "resistant" => Some(UserProfile::ResistantToChange),
            _ => None,
        }
    }
}

impl Topic {
    fn alias(name: &str) -> Option<Self> {
        match name {
            "sedentary" => Some(Topic::SedentaryLifestyle),
            _ => None,
        }
    }
}

pub const TAXONOMY_VERSION: u32 = 1;

/// The versioned constants file pinning act names to indices.
pub const TAXONOMY_TOML: &str = include_str!("../../data/taxonomy.v1.toml");
