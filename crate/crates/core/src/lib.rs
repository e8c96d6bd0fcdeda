pub mod gf2;
pub mod codes;
pub mod circuit;
pub mod motion;
pub mod sim;
pub mod decode;
pub mod surgery;
pub mod bench;
