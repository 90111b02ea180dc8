/// Pixel adjacency used when expanding a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Neighborhood {
    /// N, S, W, E.
    Four,
    /// NW, NE, SW, SE.
    DiagonalFour,
    /// All eight surrounding pixels.
    #[default]
    Eight,
}

// (dx, dy) with y growing downwards.
const NORTH: (isize, isize) = (0, -1);
const SOUTH: (isize, isize) = (0, 1);
const WEST: (isize, isize) = (-1, 0);
const EAST: (isize, isize) = (1, 0);
const NORTH_WEST: (isize, isize) = (-1, -1);
const NORTH_EAST: (isize, isize) = (1, -1);
const SOUTH_WEST: (isize, isize) = (-1, 1);
const SOUTH_EAST: (isize, isize) = (1, 1);

const FOUR: [(isize, isize); 4] = [NORTH, SOUTH, WEST, EAST];
const DIAGONAL: [(isize, isize); 4] = [NORTH_WEST, NORTH_EAST, SOUTH_WEST, SOUTH_EAST];
const EIGHT: [(isize, isize); 8] = [
    NORTH, SOUTH, WEST, EAST, NORTH_WEST, NORTH_EAST, SOUTH_WEST, SOUTH_EAST,
];

impl Neighborhood {
    /// Neighbor offsets in the order they are visited during growth.
    pub fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Neighborhood::Four => &FOUR,
            Neighborhood::DiagonalFour => &DIAGONAL,
            Neighborhood::Eight => &EIGHT,
        }
    }

    /// Short name used on the command line: `4`, `diag4` or `8`.
    pub fn name(self) -> &'static str {
        match self {
            Neighborhood::Four => "4",
            Neighborhood::DiagonalFour => "diag4",
            Neighborhood::Eight => "8",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "4" | "four" => Some(Neighborhood::Four),
            "diag4" | "diagonal-four" => Some(Neighborhood::DiagonalFour),
            "8" | "eight" => Some(Neighborhood::Eight),
            _ => None,
        }
    }
}
