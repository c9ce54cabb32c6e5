pub mod charclass;
pub mod circle;
pub mod clifford;
pub mod equispec;
pub mod error;
pub mod eta;
pub mod linalg;
pub mod specflow;
