pub mod cluster;
pub mod report;
pub mod simulate;
