pub mod trimat;
pub mod finfield;
pub mod realize;
pub mod complex;
pub mod excise;
pub mod grope;
pub mod certcheck;
pub mod skew;
