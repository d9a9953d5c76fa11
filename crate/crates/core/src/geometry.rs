//! Exact rational geometry for crop rectangles.
//!
//! Crop rectangles live in source-ROI pixel coordinates and are only rounded
//! to integer pixel bounds at render time, so chains of reductions compose
//! exactly regardless of the order in which they were applied.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

/// Exact rational number used for crop coordinates.
pub type Rational = Ratio<i64>;

/// Linear shrink factor applied by every spatial reduction step (4/5).
pub const STEP_NUMER: i64 = 4;
pub const STEP_DENOM: i64 = 5;

pub fn step() -> Rational {
    Rational::new(STEP_NUMER, STEP_DENOM)
}

/// `floor(value + 1/2)` for non-negative values.
pub fn round_half_up(value: Rational) -> i64 {
    round_half_up_i128(*value.numer() as i128, *value.denom() as i128) as i64
}

/// `floor(n/d + 1/2)` with `d > 0`, in wide arithmetic.
pub(crate) fn round_half_up_i128(numer: i128, denom: i128) -> i128 {
    (2 * numer + denom).div_euclid(2 * denom)
}

/// Rendered side length of a square of exact side `side` after `scale_exp`
/// resolution steps: `round_half_up(side * (4/5)^scale_exp)`.
pub fn scaled_side(side: Rational, scale_exp: u32) -> i64 {
    let mut numer = *side.numer() as i128;
    let mut denom = *side.denom() as i128;
    for _ in 0..scale_exp {
        numer *= STEP_NUMER as i128;
        denom *= STEP_DENOM as i128;
        // keep the pair small; side denominators are powers of five
        let g = gcd(numer, denom);
        numer /= g;
        denom /= g;
    }
    round_half_up_i128(numer, denom) as i64
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// One of the four anchoring corners of a crop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Corner {
    #[serde(rename = "TL")]
    TopLeft,
    #[serde(rename = "TR")]
    TopRight,
    #[serde(rename = "BL")]
    BottomLeft,
    #[serde(rename = "BR")]
    BottomRight,
}

impl Corner {
    pub const ALL: [Corner; 4] = [
        Corner::TopLeft,
        Corner::TopRight,
        Corner::BottomLeft,
        Corner::BottomRight,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            Corner::TopLeft => "TL",
            Corner::TopRight => "TR",
            Corner::BottomLeft => "BL",
            Corner::BottomRight => "BR",
        }
    }
}

/// Axis-aligned square in source-ROI coordinates. `y` grows downward.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CropRect {
    pub x: Rational,
    pub y: Rational,
    pub side: Rational,
}

impl CropRect {
    pub fn full(side: u32) -> Self {
        CropRect {
            x: Rational::from_integer(0),
            y: Rational::from_integer(0),
            side: Rational::from_integer(side as i64),
        }
    }

    pub fn new(x: Rational, y: Rational, side: Rational) -> Self {
        CropRect { x, y, side }
    }

    /// The 4/5-side square anchored at `corner` of this rectangle.
    pub fn shrink_to(&self, corner: Corner) -> CropRect {
        let side = self.side * step();
        let slack = self.side - side;
        let (dx, dy) = match corner {
            Corner::TopLeft => (Rational::from_integer(0), Rational::from_integer(0)),
            Corner::TopRight => (slack, Rational::from_integer(0)),
            Corner::BottomLeft => (Rational::from_integer(0), slack),
            Corner::BottomRight => (slack, slack),
        };
        CropRect {
            x: self.x + dx,
            y: self.y + dy,
            side,
        }
    }

    pub fn contains(&self, other: &CropRect) -> bool {
        other.x >= self.x
            && other.y >= self.y
            && other.x + other.side <= self.x + self.side
            && other.y + other.side <= self.y + self.side
    }

    /// Whether the rectangle lies inside `[0, bound] x [0, bound]`.
    pub fn within(&self, bound: u32) -> bool {
        let zero = Rational::from_integer(0);
        let bound = Rational::from_integer(bound as i64);
        self.x >= zero && self.y >= zero && self.side > zero && self.x + self.side <= bound
            && self.y + self.side <= bound
    }

    /// Integer pixel bounds `(x0, y0, x1, y1)`, each rounded half-up.
    pub fn pixel_bounds(&self) -> (i64, i64, i64, i64) {
        (
            round_half_up(self.x),
            round_half_up(self.y),
            round_half_up(self.x + self.side),
            round_half_up(self.y + self.side),
        )
    }
}
