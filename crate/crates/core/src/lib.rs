//! Cellular vehicle-to-infrastructure collision avoidance, simulated end to
//! end: entities broadcast CAMs, a server predicts collisions from them and
//! alerts the pair, and an analysis step decides which collisions were
//! caught in time and which alerts were false alarms.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod detector;
pub mod entity;
pub mod kinematics;
pub mod mobility;
pub mod netmodel;
pub mod time;
