pub mod certify;
pub mod expr;
pub mod jet;
pub mod net;
pub mod oracle;
pub mod problem;
pub mod quad;
pub mod sample;
pub mod train;
pub mod trial;
