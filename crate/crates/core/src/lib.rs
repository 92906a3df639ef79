pub mod certificates;
pub mod cli;
pub mod generate;
pub mod linalg;
pub mod oracles;
pub mod solver;
pub mod support;
