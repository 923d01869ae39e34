pub mod algebra;
pub mod exec;
pub mod plocal;
pub mod render;
pub mod rules;
pub mod sseq;
pub mod verify;
