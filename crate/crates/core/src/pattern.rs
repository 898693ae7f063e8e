//! Binary 16x16 metasurface patterns and their procedural generators.
//!
//! Three pattern classes are produced: connected polygon-like regions (PLG),
//! non-overlapping combinations of basic shapes (PTN) and unconstrained
//! random grids (RDN). All generators are pure functions of their seed and
//! parameters, using a portable counter-based RNG stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Grid side length; every pattern is `GRID x GRID`.
pub const GRID: usize = 16;
/// Total number of cells per pattern.
pub const CELLS: usize = GRID * GRID;

/// Which generator family a pattern belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassTag {
    Plg,
    Ptn,
    Rdn,
    Other,
}

impl ClassTag {
    pub fn as_u8(self) -> u8 {
        match self {
            ClassTag::Plg => 0,
            ClassTag::Ptn => 1,
            ClassTag::Rdn => 2,
            ClassTag::Other => 3,
        }
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(ClassTag::Plg),
            1 => Some(ClassTag::Ptn),
            2 => Some(ClassTag::Rdn),
            3 => Some(ClassTag::Other),
            _ => None,
        }
    }
}

impl std::fmt::Display for ClassTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ClassTag::Plg => "PLG",
            ClassTag::Ptn => "PTN",
            ClassTag::Rdn => "RDN",
            ClassTag::Other => "OTHER",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ClassTag {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "PLG" => Ok(ClassTag::Plg),
            "PTN" => Ok(ClassTag::Ptn),
            "RDN" => Ok(ClassTag::Rdn),
            "OTHER" => Ok(ClassTag::Other),
            other => Err(format!("unknown pattern class `{other}`")),
        }
    }
}

/// The eight basic shapes a PTN pattern is assembled from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasicShape {
    Square,
    Cross,
    TriangleN,
    TriangleE,
    TriangleS,
    TriangleW,
    UShape,
    HShape,
}

pub const ALL_SHAPES: [BasicShape; 8] = [
    BasicShape::Square,
    BasicShape::Cross,
    BasicShape::TriangleN,
    BasicShape::TriangleE,
    BasicShape::TriangleS,
    BasicShape::TriangleW,
    BasicShape::UShape,
    BasicShape::HShape,
];

impl BasicShape {
    /// (row, col) offsets from the anchor (top-left of the bounding box).
    pub fn cells(self) -> &'static [(usize, usize)] {
        match self {
            BasicShape::Square => &[
                (0, 0),
                (0, 1),
                (0, 2),
                (1, 0),
                (1, 1),
                (1, 2),
                (2, 0),
                (2, 1),
                (2, 2),
            ],
            BasicShape::Cross => &[(0, 1), (1, 0), (1, 1), (1, 2), (2, 1)],
            // 4-pixel arrowheads: a single apex cell on top of a 3-cell base,
            // rotated into the four cardinal directions.
            BasicShape::TriangleN => &[(0, 1), (1, 0), (1, 1), (1, 2)],
            BasicShape::TriangleE => &[(0, 0), (1, 0), (2, 0), (1, 1)],
            BasicShape::TriangleS => &[(0, 0), (0, 1), (0, 2), (1, 1)],
            BasicShape::TriangleW => &[(0, 1), (1, 0), (1, 1), (2, 1)],
            BasicShape::UShape => &[(0, 0), (1, 0), (2, 0), (2, 1), (2, 2)],
            BasicShape::HShape => &[(0, 0), (1, 0), (2, 0), (1, 1), (0, 2), (1, 2), (2, 2)],
        }
    }

    /// Bounding box as (rows, cols).
    pub fn extent(self) -> (usize, usize) {
        let cells = self.cells();
        let h = cells.iter().map(|&(r, _)| r).max().unwrap() + 1;
        let w = cells.iter().map(|&(_, c)| c).max().unwrap() + 1;
        (h, w)
    }

    pub fn pixel_count(self) -> usize {
        self.cells().len()
    }
}

/// One placed shape instance inside a PTN pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub shape: BasicShape,
    pub row: usize,
    pub col: usize,
}

/// A 16x16 binary occupancy grid. `1` marks a copper patch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    cells: [u8; CELLS],
    class_tag: ClassTag,
    seed: u64,
    /// Shape instances recorded at generation time (PTN only).
    placements: Vec<Placement>,
}

#[derive(Debug, Error)]
pub enum PatternError {
    #[error("pattern generation retries exhausted after {attempts} attempts (target_fill={target_fill}, max_vertices={max_vertices})")]
    RetryExhausted {
        attempts: u32,
        target_fill: f64,
        max_vertices: usize,
    },
    #[error("no non-overlapping position for {shape:?} after {rejections} rejections ({placed} shapes already placed)")]
    PlacementExhausted {
        shape: BasicShape,
        rejections: u32,
        placed: usize,
    },
    #[error("pattern text is malformed: {0}")]
    BadText(String),
}

impl Pattern {
    /// Builds a pattern from raw cells; values must be 0 or 1.
    pub fn from_cells(cells: [u8; CELLS], class_tag: ClassTag, seed: u64) -> Self {
        assert!(
            cells.iter().all(|&c| c <= 1),
            "pattern cells must be 0 or 1"
        );
        Pattern {
            cells,
            class_tag,
            seed,
            placements: Vec::new(),
        }
    }

    pub fn zeros(class_tag: ClassTag) -> Self {
        Pattern {
            cells: [0; CELLS],
            class_tag,
            seed: 0,
            placements: Vec::new(),
        }
    }

    pub fn ones(class_tag: ClassTag) -> Self {
        Pattern {
            cells: [1; CELLS],
            class_tag,
            seed: 0,
            placements: Vec::new(),
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * GRID + col] == 1
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.cells[row * GRID + col] = value as u8;
    }

    pub fn cells(&self) -> &[u8; CELLS] {
        &self.cells
    }

    pub fn class_tag(&self) -> ClassTag {
        self.class_tag
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn placements(&self) -> &[Placement] {
        &self.placements
    }

    pub fn ones_count(&self) -> usize {
        self.cells.iter().map(|&c| c as usize).sum()
    }

    /// Checks the class-specific structural invariant.
    pub fn validate(&self) -> bool {
        match self.class_tag {
            ClassTag::Plg => is_connected(self),
            ClassTag::Ptn => {
                let mut rebuilt = [0u8; CELLS];
                for p in &self.placements {
                    for &(dr, dc) in p.shape.cells() {
                        let idx = (p.row + dr) * GRID + (p.col + dc);
                        if rebuilt[idx] == 1 {
                            return false; // overlapping placements
                        }
                        rebuilt[idx] = 1;
                    }
                }
                rebuilt == self.cells
            }
            ClassTag::Rdn | ClassTag::Other => true,
        }
    }

    /// Debug text form: 16 lines of 16 `'0'`/`'1'` characters.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(CELLS + GRID);
        for r in 0..GRID {
            for c in 0..GRID {
                s.push(if self.get(r, c) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, PatternError> {
        let lines: Vec<&str> = text.lines().collect();
        if lines.len() != GRID {
            return Err(PatternError::BadText(format!(
                "expected {GRID} lines, found {}",
                lines.len()
            )));
        }
        let mut cells = [0u8; CELLS];
        for (r, line) in lines.iter().enumerate() {
            if line.len() != GRID {
                return Err(PatternError::BadText(format!(
                    "line {r} has {} characters, expected {GRID}",
                    line.len()
                )));
            }
            for (c, ch) in line.chars().enumerate() {
                cells[r * GRID + c] = match ch {
                    '0' => 0,
                    '1' => 1,
                    other => {
                        return Err(PatternError::BadText(format!(
                            "invalid character `{other}` at line {r}"
                        )))
                    }
                };
            }
        }
        Ok(Pattern::from_cells(cells, ClassTag::Other, 0))
    }

    /// Packs the grid into 32 bytes, row-major, MSB-first within each byte.
    pub fn pack_bits(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        for (i, &cell) in self.cells.iter().enumerate() {
            if cell == 1 {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    pub fn unpack_bits(bytes: &[u8; 32], class_tag: ClassTag, seed: u64) -> Self {
        let mut cells = [0u8; CELLS];
        for (i, cell) in cells.iter_mut().enumerate() {
            *cell = (bytes[i / 8] >> (7 - i % 8)) & 1;
        }
        Pattern {
            cells,
            class_tag,
            seed,
            placements: Vec::new(),
        }
    }
}

/// Fully random pattern: each cell is 1 with probability `fill_prob`.
pub fn gen_rdn(seed: u64, fill_prob: f64) -> Pattern {
    assert!(
        (0.0..=1.0).contains(&fill_prob),
        "fill_prob must be in [0,1], got {fill_prob}"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells = [0u8; CELLS];
    for cell in cells.iter_mut() {
        *cell = (rng.gen::<f64>() < fill_prob) as u8;
    }
    Pattern {
        cells,
        class_tag: ClassTag::Rdn,
        seed,
        placements: Vec::new(),
    }
}

const PLG_MAX_ATTEMPTS: u32 = 100;

/// Connected polygon-like pattern: a random star-shaped polygon is
/// rasterized (interior plus boundary) and repaired to a single
/// 4-connected component.
pub fn gen_plg(seed: u64, target_fill: f64, max_vertices: usize) -> Result<Pattern, PatternError> {
    assert!(
        target_fill > 0.0 && target_fill <= 1.0,
        "target_fill must be in (0,1], got {target_fill}"
    );
    assert!(max_vertices >= 3, "max_vertices must be >= 3");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for _ in 0..PLG_MAX_ATTEMPTS {
        let n_vertices = rng.gen_range(3..=max_vertices);
        // Radius chosen so the expected polygon area tracks target_fill.
        let radius = (CELLS as f64 * target_fill / std::f64::consts::PI).sqrt();
        let cx = rng.gen_range(2.0..(GRID as f64 - 2.0));
        let cy = rng.gen_range(2.0..(GRID as f64 - 2.0));

        let mut angles: Vec<f64> = (0..n_vertices)
            .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
            .collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // Sorted angles around a common center give a simple star polygon.
        let verts: Vec<(f64, f64)> = angles
            .iter()
            .map(|&a| {
                let r = rng.gen_range(0.35 * radius..=1.15 * radius);
                (cx + r * a.cos(), cy + r * a.sin())
            })
            .collect();

        let mut cells = [0u8; CELLS];
        rasterize_polygon(&verts, &mut cells);
        if cells.iter().all(|&c| c == 0) {
            continue;
        }
        connect_components(&mut cells);

        let p = Pattern {
            cells,
            class_tag: ClassTag::Plg,
            seed,
            placements: Vec::new(),
        };
        debug_assert!(is_connected(&p));
        return Ok(p);
    }
    Err(PatternError::RetryExhausted {
        attempts: PLG_MAX_ATTEMPTS,
        target_fill,
        max_vertices,
    })
}

/// Marks every cell whose center is inside the polygon, plus every cell the
/// polygon boundary passes through.
fn rasterize_polygon(verts: &[(f64, f64)], cells: &mut [u8; CELLS]) {
    let n = verts.len();
    // Interior: even-odd crossing test against cell centers (x=col, y=row).
    for r in 0..GRID {
        for c in 0..GRID {
            let (px, py) = (c as f64 + 0.5, r as f64 + 0.5);
            let mut inside = false;
            for i in 0..n {
                let (x1, y1) = verts[i];
                let (x2, y2) = verts[(i + 1) % n];
                if (y1 > py) != (y2 > py) {
                    let x_cross = x1 + (py - y1) / (y2 - y1) * (x2 - x1);
                    if px < x_cross {
                        inside = !inside;
                    }
                }
            }
            if inside {
                cells[r * GRID + c] = 1;
            }
        }
    }
    // Boundary: dense sampling along each edge.
    for i in 0..n {
        let (x1, y1) = verts[i];
        let (x2, y2) = verts[(i + 1) % n];
        let len = ((x2 - x1).powi(2) + (y2 - y1).powi(2)).sqrt();
        let steps = (len * 4.0).ceil().max(1.0) as usize;
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            let x = x1 + t * (x2 - x1);
            let y = y1 + t * (y2 - y1);
            let (c, r) = (x.floor() as i64, y.floor() as i64);
            if (0..GRID as i64).contains(&r) && (0..GRID as i64).contains(&c) {
                cells[r as usize * GRID + c as usize] = 1;
            }
        }
    }
}

/// Labels 4-connected components; returns one cell-index list per component.
fn components(cells: &[u8; CELLS]) -> Vec<Vec<usize>> {
    let mut seen = [false; CELLS];
    let mut comps = Vec::new();
    for start in 0..CELLS {
        if cells[start] == 0 || seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(idx) = stack.pop() {
            comp.push(idx);
            let (r, c) = (idx / GRID, idx % GRID);
            let mut push = |nr: usize, nc: usize, seen: &mut [bool; CELLS]| {
                let nidx = nr * GRID + nc;
                if cells[nidx] == 1 && !seen[nidx] {
                    seen[nidx] = true;
                    stack.push(nidx);
                }
            };
            if r > 0 {
                push(r - 1, c, &mut seen);
            }
            if r + 1 < GRID {
                push(r + 1, c, &mut seen);
            }
            if c > 0 {
                push(r, c - 1, &mut seen);
            }
            if c + 1 < GRID {
                push(r, c + 1, &mut seen);
            }
        }
        comps.push(comp);
    }
    comps
}

/// Bridges all components into one by drawing L-shaped paths of 1-cells
/// from each secondary component to the largest one.
fn connect_components(cells: &mut [u8; CELLS]) {
    loop {
        let mut comps = components(cells);
        if comps.len() <= 1 {
            return;
        }
        comps.sort_by_key(|c| std::cmp::Reverse(c.len()));
        let base = comps[0].clone();
        // Closest pair (Manhattan) between the largest component and any other.
        let mut best = (usize::MAX, 0usize, 0usize);
        for comp in &comps[1..] {
            for &a in &base {
                for &b in comp.iter() {
                    let (ar, ac) = (a / GRID, a % GRID);
                    let (br, bc) = (b / GRID, b % GRID);
                    let d = ar.abs_diff(br) + ac.abs_diff(bc);
                    if d < best.0 {
                        best = (d, a, b);
                    }
                }
            }
        }
        let (_, a, b) = best;
        let (mut r, mut c) = (a / GRID, a % GRID);
        let (tr, tc) = (b / GRID, b % GRID);
        while r != tr {
            r = if r < tr { r + 1 } else { r - 1 };
            cells[r * GRID + c] = 1;
        }
        while c != tc {
            c = if c < tc { c + 1 } else { c - 1 };
            cells[r * GRID + c] = 1;
        }
    }
}

const PTN_MAX_REJECTIONS: u32 = 1000;

/// Combination of basic shapes placed without overlap.
pub fn gen_ptn(seed: u64, min_shapes: usize, max_shapes: usize) -> Result<Pattern, PatternError> {
    assert!(
        min_shapes >= 1 && min_shapes <= max_shapes,
        "need 1 <= min_shapes <= max_shapes"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(min_shapes..=max_shapes);

    let mut cells = [0u8; CELLS];
    let mut placements = Vec::with_capacity(count);
    for _ in 0..count {
        let shape = ALL_SHAPES[rng.gen_range(0..ALL_SHAPES.len())];
        let (h, w) = shape.extent();
        let mut placed = false;
        for _ in 0..PTN_MAX_REJECTIONS {
            let row = rng.gen_range(0..=(GRID - h));
            let col = rng.gen_range(0..=(GRID - w));
            let overlap = shape
                .cells()
                .iter()
                .any(|&(dr, dc)| cells[(row + dr) * GRID + (col + dc)] == 1);
            if !overlap {
                for &(dr, dc) in shape.cells() {
                    cells[(row + dr) * GRID + (col + dc)] = 1;
                }
                placements.push(Placement { shape, row, col });
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(PatternError::PlacementExhausted {
                shape,
                rejections: PTN_MAX_REJECTIONS,
                placed: placements.len(),
            });
        }
    }
    Ok(Pattern {
        cells,
        class_tag: ClassTag::Ptn,
        seed,
        placements,
    })
}

/// True iff the 1-cells form exactly one 4-connected component.
pub fn is_connected(p: &Pattern) -> bool {
    let comps = components(&p.cells);
    comps.len() == 1
}

fn transform_cells(p: &Pattern, f: impl Fn(usize, usize) -> (usize, usize)) -> [u8; CELLS] {
    let mut cells = [0u8; CELLS];
    for r in 0..GRID {
        for c in 0..GRID {
            let (nr, nc) = f(r, c);
            cells[nr * GRID + nc] = p.cells[r * GRID + c];
        }
    }
    cells
}

/// Remaps recorded placements under a cell transform. Returns None when some
/// transformed shape is not one of the eight canonical variants.
fn transform_placements(
    placements: &[Placement],
    f: impl Fn(usize, usize) -> (usize, usize),
) -> Option<Vec<Placement>> {
    let mut out = Vec::with_capacity(placements.len());
    for p in placements {
        let mut mapped: Vec<(usize, usize)> = p
            .shape
            .cells()
            .iter()
            .map(|&(dr, dc)| f(p.row + dr, p.col + dc))
            .collect();
        let min_r = mapped.iter().map(|&(r, _)| r).min().unwrap();
        let min_c = mapped.iter().map(|&(_, c)| c).min().unwrap();
        for m in mapped.iter_mut() {
            *m = (m.0 - min_r, m.1 - min_c);
        }
        mapped.sort_unstable();
        let shape = ALL_SHAPES.into_iter().find(|s| {
            let mut canon: Vec<(usize, usize)> = s.cells().to_vec();
            canon.sort_unstable();
            canon == mapped
        })?;
        out.push(Placement {
            shape,
            row: min_r,
            col: min_c,
        });
    }
    Some(out)
}

fn transformed(p: &Pattern, f: impl Fn(usize, usize) -> (usize, usize) + Copy) -> Pattern {
    let cells = transform_cells(p, f);
    let (class_tag, placements) = match p.class_tag {
        ClassTag::Rdn => (ClassTag::Rdn, Vec::new()),
        // Reflections and 180-degree rotation preserve 4-adjacency, so a
        // connected PLG stays a valid PLG.
        ClassTag::Plg => (ClassTag::Plg, Vec::new()),
        ClassTag::Ptn => match transform_placements(&p.placements, f) {
            Some(pl) => (ClassTag::Ptn, pl),
            None => (ClassTag::Other, Vec::new()),
        },
        ClassTag::Other => (ClassTag::Other, Vec::new()),
    };
    Pattern {
        cells,
        class_tag,
        seed: p.seed,
        placements,
    }
}

/// Reflection across the vertical axis (columns reversed).
pub fn mirror_x(p: &Pattern) -> Pattern {
    transformed(p, |r, c| (r, GRID - 1 - c))
}

/// Reflection across the horizontal axis (rows reversed).
pub fn mirror_y(p: &Pattern) -> Pattern {
    transformed(p, |r, c| (GRID - 1 - r, c))
}

/// 180-degree rotation.
pub fn rot180(p: &Pattern) -> Pattern {
    transformed(p, |r, c| (GRID - 1 - r, GRID - 1 - c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn shape_pixel_counts() {
        assert_eq!(BasicShape::Square.pixel_count(), 9);
        assert_eq!(BasicShape::Cross.pixel_count(), 5);
        for t in [
            BasicShape::TriangleN,
            BasicShape::TriangleE,
            BasicShape::TriangleS,
            BasicShape::TriangleW,
        ] {
            assert_eq!(t.pixel_count(), 4);
        }
        assert_eq!(BasicShape::UShape.pixel_count(), 5);
        assert_eq!(BasicShape::HShape.pixel_count(), 7);
    }

    #[test]
    fn rdn_extreme_fill() {
        assert_eq!(gen_rdn(7, 1.0).ones_count(), CELLS);
        assert_eq!(gen_rdn(7, 0.0).ones_count(), 0);
    }

    #[test]
    fn rdn_fill_statistics() {
        // Mean fill over 10000 draws converges to fill_prob.
        let n = 10_000;
        let total: usize = (0..n).map(|i| gen_rdn(i as u64, 0.5).ones_count()).sum();
        let mean = total as f64 / (n * CELLS) as f64;
        assert!((0.48..=0.52).contains(&mean), "mean fill {mean}");
        // Tighter: within 3 standard errors of a Bernoulli(0.5) sample mean.
        let se = (0.25 / (n * CELLS) as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn rdn_deterministic() {
        assert_eq!(gen_rdn(42, 0.3), gen_rdn(42, 0.3));
        assert_ne!(gen_rdn(42, 0.3).cells(), gen_rdn(43, 0.3).cells());
    }

    #[test]
    fn plg_always_connected() {
        for seed in 0..10_000u64 {
            let p = gen_plg(seed, 0.4, 10).unwrap();
            assert!(is_connected(&p), "seed {seed} produced disconnected PLG");
            assert_eq!(p.class_tag(), ClassTag::Plg);
        }
    }

    #[test]
    fn plg_deterministic() {
        let a = gen_plg(123, 0.4, 10).unwrap();
        let b = gen_plg(123, 0.4, 10).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn plg_all_ones_is_legal() {
        // A completely filled grid satisfies every PLG invariant.
        let p = Pattern::ones(ClassTag::Plg);
        assert!(p.validate());
    }

    #[test]
    fn ptn_single_square() {
        // Scan seeds until the drawn shape is a square; then the pattern must
        // be exactly a 3x3 block of nine ones.
        let mut checked = false;
        for seed in 0..200u64 {
            let p = gen_ptn(seed, 1, 1).unwrap();
            if p.placements()[0].shape == BasicShape::Square {
                assert_eq!(p.ones_count(), 9);
                let pl = p.placements()[0];
                for dr in 0..3 {
                    for dc in 0..3 {
                        assert!(p.get(pl.row + dr, pl.col + dc));
                    }
                }
                checked = true;
                break;
            }
        }
        assert!(checked, "no square drawn in 200 seeds");
    }

    #[test]
    fn ptn_pixel_accounting() {
        for seed in 0..500u64 {
            let p = gen_ptn(seed, 2, 2).unwrap();
            let expected: usize = p.placements().iter().map(|pl| pl.shape.pixel_count()).sum();
            assert_eq!(p.ones_count(), expected, "seed {seed}");
            assert!(p.validate());
        }
    }

    #[test]
    fn ptn_deterministic() {
        assert_eq!(gen_ptn(9, 2, 6).unwrap(), gen_ptn(9, 2, 6).unwrap());
    }

    #[test]
    fn connectivity_cases() {
        assert!(is_connected(&Pattern::ones(ClassTag::Other)));
        assert!(!is_connected(&Pattern::zeros(ClassTag::Other)));

        let mut diag = Pattern::zeros(ClassTag::Other);
        diag.set(0, 0, true);
        diag.set(1, 1, true);
        assert!(!is_connected(&diag));

        let mut single = Pattern::zeros(ClassTag::Other);
        single.set(7, 7, true);
        assert!(is_connected(&single));
    }

    #[test]
    fn mirror_preserves_plg_tag() {
        let p = gen_plg(5, 0.4, 10).unwrap();
        let m = mirror_x(&p);
        assert_eq!(m.class_tag(), ClassTag::Plg);
        assert!(is_connected(&m));
    }

    #[test]
    fn mirror_of_centered_cross_is_identity() {
        // A cross thickened to 2 cells is symmetric about the grid center
        // (which falls between cells on an even grid).
        let mut p = Pattern::zeros(ClassTag::Other);
        for (r, c) in [(7, 7), (7, 8), (8, 7), (8, 8)] {
            p.set(r, c, true);
        }
        for (a, b) in [(6, 7), (6, 8), (9, 7), (9, 8)] {
            p.set(a, b, true); // vertical arms
            p.set(b, a, true); // horizontal arms
        }
        assert_eq!(mirror_x(&p).cells(), p.cells());
        assert_eq!(mirror_y(&p).cells(), p.cells());
        assert_eq!(rot180(&p).cells(), p.cells());
    }

    #[test]
    fn ptn_placement_remap_under_mirror() {
        // A square/cross-only pattern stays a valid PTN after mirroring.
        for seed in 0..300u64 {
            let p = gen_ptn(seed, 2, 3).unwrap();
            if p.placements()
                .iter()
                .all(|pl| matches!(pl.shape, BasicShape::Square | BasicShape::Cross))
            {
                let m = mirror_x(&p);
                assert_eq!(m.class_tag(), ClassTag::Ptn);
                assert!(m.validate());
                return;
            }
        }
        panic!("no square/cross-only PTN found");
    }

    #[test]
    fn ushape_mirror_leaves_variant_set() {
        let mut p = Pattern::zeros(ClassTag::Ptn);
        let mut placements = vec![Placement {
            shape: BasicShape::UShape,
            row: 3,
            col: 3,
        }];
        for &(dr, dc) in BasicShape::UShape.cells() {
            p.set(3 + dr, 3 + dc, true);
        }
        p.placements = std::mem::take(&mut placements);
        let m = mirror_x(&p);
        assert_eq!(m.class_tag(), ClassTag::Other);
    }

    #[test]
    fn text_round_trip() {
        let p = gen_plg(77, 0.5, 8).unwrap();
        let text = p.to_text();
        assert_eq!(text.len(), CELLS + GRID);
        let q = Pattern::from_text(&text).unwrap();
        assert_eq!(q.cells(), p.cells());
    }

    #[test]
    fn bit_packing_layout() {
        // Cell (0,0) lands in the MSB of byte 0, cell (0,8) in MSB of byte 1.
        let mut p = Pattern::zeros(ClassTag::Other);
        p.set(0, 0, true);
        p.set(0, 8, true);
        p.set(15, 15, true);
        let bytes = p.pack_bits();
        assert_eq!(bytes[0], 0x80);
        assert_eq!(bytes[1], 0x80);
        assert_eq!(bytes[31], 0x01);
    }

    proptest! {
        #[test]
        fn mirror_involutions(seed in 0u64..1_000_000) {
            let p = gen_rdn(seed, 0.5);
            let (mx, my) = (mirror_x(&p), mirror_y(&p));
            prop_assert_eq!(*mirror_x(&mx).cells(), *p.cells());
            prop_assert_eq!(*mirror_y(&my).cells(), *p.cells());
            prop_assert_eq!(*rot180(&rot180(&p)).cells(), *p.cells());
            prop_assert_eq!(*rot180(&p).cells(), *mirror_x(&my).cells());
        }

        #[test]
        fn pack_unpack_round_trip(seed in 0u64..1_000_000) {
            let p = gen_rdn(seed, 0.5);
            let bytes = p.pack_bits();
            let q = Pattern::unpack_bits(&bytes, p.class_tag(), p.seed());
            prop_assert_eq!(q.cells(), p.cells());
        }
    }
}
