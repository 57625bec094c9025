use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

pub const DEFAULT_RING_BOUND: u64 = 1 << 16;
pub const DEFAULT_ENUMERATION_BOUND: u64 = 100_000_000;

static RING_BOUND: AtomicU64 = AtomicU64::new(DEFAULT_RING_BOUND);
static ENUMERATION_BOUND: AtomicU64 = AtomicU64::new(DEFAULT_ENUMERATION_BOUND);

pub fn ring_bound() -> u64 {
    RING_BOUND.load(Ordering::Relaxed)
}

pub fn set_ring_bound(n: u64) {
    RING_BOUND.store(n, Ordering::Relaxed);
}

pub fn enumeration_bound() -> u64 {
    ENUMERATION_BOUND.load(Ordering::Relaxed)
}

pub fn set_enumeration_bound(n: u64) {
    ENUMERATION_BOUND.store(n, Ordering::Relaxed);
}

/// Fails when `count` candidates would exceed the enumeration cap.
pub fn check_enumeration(what: &str, count: u128) -> Result<()> {
    let bound = enumeration_bound();
    if count > bound as u128 {
        return Err(Error::EnumerationBoundExceeded {
            what: what.to_string(),
            bound,
        });
    }
    Ok(())
}

/// `base^exp` saturating into u128.
pub fn power(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}
