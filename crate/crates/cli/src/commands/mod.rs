pub mod compare;
pub mod diagnose;
pub mod fit;
pub mod ingest;
pub mod simulate;
