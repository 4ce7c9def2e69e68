pub mod correlations;
pub mod link_budget;
pub mod qfc_curve;
pub mod simulate;
pub mod snr_curve;
pub mod storage_decay;
pub mod table1;
