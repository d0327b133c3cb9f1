//! Deterministic kinematic robot models, penalty contact with the peg
//! insertion board, and the simulated force/torque sensor.

mod contact;
mod robot;
mod sensor;
mod world;

pub use contact::{ContactParams, ContactWorld, Penetration};
pub use robot::{FreeFlyer, Kinematics, Planar3R, RobotModel};
pub use sensor::FtSensor;
pub use world::{World, WorldState};
