pub mod edcp;
pub mod elpgm;
pub mod flow;
pub mod graph;
pub mod lti;
pub mod mcfp;
