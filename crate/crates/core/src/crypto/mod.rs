pub mod chameleon;
pub mod field;
pub mod group;
pub mod hash;
pub mod pke;
pub mod symmetric;
