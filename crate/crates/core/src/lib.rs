pub mod dynamics;
pub mod experiments;
pub mod gates;
pub mod geometric;
pub mod hilbert;
pub mod model;
