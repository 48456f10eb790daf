pub mod delay;
pub mod growth;
pub mod reach;
pub mod scene;
pub mod strength;
pub mod vision;
