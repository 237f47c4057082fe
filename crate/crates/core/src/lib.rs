pub mod complex;
pub mod conformality;
pub mod error;
pub mod fuzz;
pub mod io;
pub mod isoperimetry;
pub mod laplacian;
pub mod linalg;
pub mod report;
