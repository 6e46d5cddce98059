pub mod checks;
pub mod cli;
pub mod constants;
pub mod error;
pub mod influence;
pub mod low_weight;
pub mod measure;
pub mod poly;
mod serde_util;
pub mod tree;
