pub mod algorithms;
pub mod bind;
pub mod graph;
pub mod harness;
pub mod matching_reduction;
pub mod matrix;
pub mod reduction;
pub mod rng;
pub mod stream;
pub mod vc_reduction;
