use super::Point;

/// The fixed bijection ℤ → ℕ: `n ↦ 2n` for `n ≥ 0`, `n ↦ -2n-1` for `n < 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZEmbedding;

impl ZEmbedding {
    pub fn encode(z: i64) -> Point {
        if z >= 0 {
            (2 * z) as Point
        } else {
            (-2 * z - 1) as Point
        }
    }

    pub fn decode(p: Point) -> i64 {
        let p = p as i64;
        if p % 2 == 0 {
            p / 2
        } else {
            -(p + 1) / 2
        }
    }
}
