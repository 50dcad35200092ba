#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rsma_bounds::SinrPair;

pub const NOMINAL_GAMMA_S_DB: f64 = 6.0;
pub const NOMINAL_GAMMA_W_DB: f64 = 2.0;

pub fn nominal() -> SinrPair {
    SinrPair::from_db(NOMINAL_GAMMA_S_DB, NOMINAL_GAMMA_W_DB).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Weak-user SINR uniform in [0, 10] dB, ratio gamma_s / gamma_w log-uniform in [1.5, 20].
pub fn random_pair_db(rng: &mut impl Rng) -> (f64, f64) {
    let gw_db = rng.gen_range(0.0..=10.0);
    let ratio_db = rng.gen_range(10.0 * 1.5f64.log10()..=10.0 * 20f64.log10());
    (gw_db + ratio_db, gw_db)
}

pub fn random_pair(rng: &mut impl Rng) -> SinrPair {
    let (s, w) = random_pair_db(rng);
    SinrPair::from_db(s, w).unwrap()
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_rsma-bounds")
}

pub fn run_bin(args: &[&str]) -> std::process::Output {
    std::process::Command::new(bin())
        .args(args)
        .output()
        .unwrap()
}

pub fn kv(doc: &str, key: &str) -> Option<f64> {
    doc.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .and_then(|v| v.parse().ok())
}
