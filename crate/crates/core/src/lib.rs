pub mod complex;
pub mod metric;
pub mod smap;
pub mod targets;
pub mod solver;
pub mod fixtures;
pub mod verify;
pub mod random;
pub mod obj;
