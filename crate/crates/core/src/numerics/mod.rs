pub mod poly;
pub mod quad;
