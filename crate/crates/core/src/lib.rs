//! Hierarchical soft actor-critic dialogue manager for motivational
//! interviewing, trained against a scripted stochastic patient.
//!
//! A master policy picks one of several phase sub-policies every few turns;
//! each sub-policy picks a therapist dialogue act. Sub-policies and master are
//! trained with discrete SAC, and the master is additionally meta-updated
//! across patient profiles with a first-order interpolation step.

pub mod domain;
pub mod harness;
pub mod hierarchy;
pub mod neural;
pub mod rng;
pub mod sacrl;
pub mod training;
pub mod usersim;
