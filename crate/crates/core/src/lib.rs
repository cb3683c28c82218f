//! Sub-THz (252.72 - 321.84 GHz) point-to-point link toolkit: channel plan,
//! PHY link budgets, frame codec and a MAC session simulator.

pub mod channel_plan;
pub mod frame;
pub mod mac;
pub mod phy;
pub mod scenario;
