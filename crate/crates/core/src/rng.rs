use rand_core::RngCore;

/// Uniform draw from `[0, 1)` with 53 bits of precision.
#[inline]
pub(crate) fn unit_draw(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
