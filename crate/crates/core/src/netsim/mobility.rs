use rand::Rng;

use super::grid::{Point, Rect};
use crate::math;

/// Random-waypoint motion state. Speed is fixed for the episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserMotion {
    pub speed_kmh: f64,
    /// Radians, counter-clockwise from +x.
    pub heading: f64,
    pub waypoint: Point,
}

impl UserMotion {
    pub fn new<R: Rng + ?Sized>(from: &Point, speed_kmh: f64, bounds: &Rect, rng: &mut R) -> Self {
        let mut m = Self { speed_kmh, heading: 0.0, waypoint: *from };
        m.redraw(from, bounds, rng);
        m
    }

    pub fn speed_mps(&self) -> f64 {
        self.speed_kmh / 3.6
    }

    fn redraw<R: Rng + ?Sized>(&mut self, from: &Point, bounds: &Rect, rng: &mut R) {
        self.waypoint = Point::new(
            rng.gen_range(bounds.min.x..=bounds.max.x),
            rng.gen_range(bounds.min.y..=bounds.max.y),
        );
        self.heading = math::atan2(self.waypoint.y - from.y, self.waypoint.x - from.x);
    }
}

/// Advances `pos` by `dt` seconds toward the waypoint. A user that reaches its
/// waypoint stops there for the rest of the tick and draws a new one.
pub fn step_mobility<R: Rng + ?Sized>(pos: &mut Point, motion: &mut UserMotion, dt: f64, bounds: &Rect, rng: &mut R) {
    let step = motion.speed_mps() * dt;
    let remaining = pos.distance(&motion.waypoint);
    if remaining <= step {
        *pos = motion.waypoint;
        motion.redraw(pos, bounds, rng);
    } else {
        pos.x += step * math::cos(motion.heading);
        pos.y += step * math::sin(motion.heading);
    }
    pos.x = pos.x.clamp(bounds.min.x, bounds.max.x);
    pos.y = pos.y.clamp(bounds.min.y, bounds.max.y);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use proptest::prelude::*;

    fn bounds() -> Rect {
        Rect { min: Point::new(-1000.0, -1000.0), max: Point::new(1000.0, 1000.0) }
    }

    fn far_motion(speed: f64) -> UserMotion {
        UserMotion { speed_kmh: speed, heading: 0.0, waypoint: Point::new(900.0, 0.0) }
    }

    #[test]
    fn displacement_per_second() {
        let mut rng = stream(1, Stream::Mobility);
        for (speed, expect) in [(3.0, 0.833_333), (120.0, 33.333_333)] {
            let mut p = Point::new(0.0, 0.0);
            let mut m = far_motion(speed);
            step_mobility(&mut p, &mut m, 1.0, &bounds(), &mut rng);
            assert!((p.x - expect).abs() < 1e-5, "{speed}: {}", p.x);
            assert_eq!(p.y, 0.0);
        }
    }

    #[test]
    fn reaching_waypoint_redraws() {
        let mut rng = stream(2, Stream::Mobility);
        let mut p = Point::new(899.0, 0.0);
        let mut m = far_motion(36.0);
        step_mobility(&mut p, &mut m, 1.0, &bounds(), &mut rng);
        assert_eq!(p, Point::new(900.0, 0.0));
        assert_ne!(m.waypoint, Point::new(900.0, 0.0));
        let expect = math::atan2(m.waypoint.y - p.y, m.waypoint.x - p.x);
        assert!((m.heading - expect).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn stays_in_bounds(seed in any::<u64>(), speed in 3.0f64..120.0, x in -1000.0f64..1000.0, y in -1000.0f64..1000.0) {
            let mut rng = stream(seed, Stream::Mobility);
            let b = bounds();
            let mut p = Point::new(x, y);
            let mut m = UserMotion::new(&p, speed, &b, &mut rng);
            for _ in 0..500 {
                step_mobility(&mut p, &mut m, 0.1, &b, &mut rng);
                prop_assert!(b.contains(&p));
            }
        }
    }
}
