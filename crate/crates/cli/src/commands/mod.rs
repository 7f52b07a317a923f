pub mod coin;
pub mod noise_ceiling;
pub mod reproduce;
pub mod sweep;
