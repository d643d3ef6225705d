#![allow(dead_code)]

pub mod gradients;
pub mod reward_oracle;
pub mod sac_oracle;
