pub mod abp;
pub mod blackbox;
pub mod circuit;
pub mod cli;
pub mod field;
pub mod gen;
pub mod linform;
pub mod matrix;
pub mod oracle;
pub mod pistar;
pub mod regular;
pub mod slp;
