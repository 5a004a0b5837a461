pub mod cyclotomic;
pub mod howell;
pub mod poly;
pub mod residue;
pub mod zmatrix;
