use alloc::vec::Vec;

use super::NetError;
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        math::sqrt((self.x - other.x) * (self.x - other.x) + (self.y - other.y) * (self.y - other.y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn contains(&self, p: &Point) -> bool {
        (self.min.x..=self.max.x).contains(&p.x) && (self.min.y..=self.max.y).contains(&p.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub id: usize,
    pub center: Point,
    pub ring: u32,
}

/// Base stations on a hexagonal lattice; cell 0 is the center site.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGrid {
    pub cells: Vec<Cell>,
    pub isd_m: f64,
    pub rings: u32,
}

pub fn build_grid(rings: u32, isd_m: f64) -> Result<CellGrid, NetError> {
    if !matches!(rings, 1 | 2) {
        return Err(NetError::BadRings(rings));
    }
    let r = rings as i32;
    let mut sites = Vec::new();
    for q in -r..=r {
        for s in -r..=r {
            let ring = q.abs().max(s.abs()).max((q + s).abs());
            if ring > r {
                continue;
            }
            let x = isd_m * (q as f64 + s as f64 / 2.0);
            let y = isd_m * (math::sqrt(3.0) / 2.0) * s as f64;
            let mut angle = math::atan2(y, x);
            if angle < -1e-9 {
                angle += 2.0 * core::f64::consts::PI;
            }
            sites.push((ring as u32, angle, Point::new(x, y)));
        }
    }
    sites.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let cells = sites.into_iter().enumerate().map(|(id, (ring, _, center))| Cell { id, center, ring }).collect();
    Ok(CellGrid { cells, isd_m, rings })
}

impl CellGrid {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Circumradius of one hexagonal cell.
    pub fn cell_radius(&self) -> f64 {
        self.isd_m / math::sqrt(3.0)
    }

    /// Axis-aligned box covering every cell.
    pub fn bounds(&self) -> Rect {
        let r = self.cell_radius();
        let (mut min, mut max) = (Point::new(f64::MAX, f64::MAX), Point::new(f64::MIN, f64::MIN));
        for c in &self.cells {
            min.x = min.x.min(c.center.x - r);
            min.y = min.y.min(c.center.y - r);
            max.x = max.x.max(c.center.x + r);
            max.y = max.y.max(c.center.y + r);
        }
        Rect { min, max }
    }

    /// Whether `p` falls inside the hexagon (Voronoi region) of `cell`.
    pub fn in_cell(&self, cell: usize, p: &Point) -> bool {
        let c = self.cells[cell].center;
        let (dx, dy) = (p.x - c.x, p.y - c.y);
        (0..6).all(|k| {
            let a = k as f64 * core::f64::consts::PI / 3.0;
            dx * math::cos(a) + dy * math::sin(a) <= self.isd_m / 2.0
        })
    }

    pub fn nearest(&self, p: &Point) -> usize {
        self.cells
            .iter()
            .map(|c| (c.id, c.center.distance(p)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(id, _)| id)
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_counts() {
        assert_eq!(build_grid(1, 500.0).unwrap().len(), 7);
        assert_eq!(build_grid(2, 500.0).unwrap().len(), 19);
        assert_eq!(build_grid(0, 500.0), Err(NetError::BadRings(0)));
        assert_eq!(build_grid(3, 500.0), Err(NetError::BadRings(3)));
    }

    #[test]
    fn adjacent_sites_are_one_isd_apart() {
        for rings in [1, 2] {
            let g = build_grid(rings, 500.0).unwrap();
            assert_eq!(g.cells[0].center, Point::new(0.0, 0.0));
            let mut adjacent = 0;
            for a in &g.cells {
                let nearest = g
                    .cells
                    .iter()
                    .filter(|b| b.id != a.id)
                    .map(|b| a.center.distance(&b.center))
                    .fold(f64::MAX, f64::min);
                assert!((nearest - 500.0).abs() < 1e-9);
                for b in &g.cells {
                    let d = a.center.distance(&b.center);
                    if b.id != a.id && d < 500.0 + 1e-6 {
                        assert!((d - 500.0).abs() < 1e-9);
                        adjacent += 1;
                    }
                }
            }
            // 7 cells: 12 undirected edges; 19 cells: 42.
            assert_eq!(adjacent / 2, if rings == 1 { 12 } else { 42 });
        }
    }

    #[test]
    fn hexagon_membership_matches_nearest_site() {
        let g = build_grid(1, 500.0).unwrap();
        for i in 0..200 {
            let p = Point::new((i as f64 * 37.3) % 400.0 - 200.0, (i as f64 * 91.7) % 400.0 - 200.0);
            let n = g.nearest(&p);
            assert!(g.in_cell(n, &p));
        }
        assert!(g.in_cell(0, &Point::new(249.0, 0.0)));
        assert!(!g.in_cell(0, &Point::new(251.0, 0.0)));
    }
}
