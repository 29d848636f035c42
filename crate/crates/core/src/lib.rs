pub mod bounds;
pub mod cases;
pub mod certify;
pub mod chebyshev;
pub mod config;
pub mod job;
pub mod model;
pub mod poly;
pub mod sample;
pub mod sdp;
pub mod simulate;
pub mod sos;
