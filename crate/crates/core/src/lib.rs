pub mod carnot;
pub mod cli;
pub mod cochain;
pub mod exactla;
pub mod frames;
pub mod fixtures;
pub mod normalize;
