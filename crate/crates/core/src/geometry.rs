//! Target trajectories and the position to reflection-angle mapping.
//!
//! The surface lies in the x-y plane with its normal along +z and y pointing
//! up (the surface hangs on a wall). Angles are in degrees at every public
//! boundary; trigonometry runs in radians internally.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gravitational acceleration used by the projectile case, m/s².
pub const GRAVITY: f64 = 9.81;

/// Upper bound of the polar angle drawn at each Case C leap, degrees.
pub const LEAP_THETA_MAX: f64 = 85.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3D {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::validation("point", "coordinates must be finite"));
        }
        Ok(Point3D { x, y, z })
    }
}

/// A direction in the surface frame: `theta` is the polar angle from the
/// surface normal, `phi` the azimuth in the surface plane measured from +x.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Angles {
    pub theta: f64,
    pub phi: f64,
}

impl Angles {
    /// Broadside, i.e. along the surface normal.
    pub const NORMAL: Angles = Angles { theta: 0.0, phi: 0.0 };

    /// Builds a direction in front of the surface. `phi` is wrapped into
    /// [0, 360).
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::validation("angles", "theta and phi must be finite"));
        }
        if !(0.0..90.0).contains(&theta) {
            return Err(Error::validation(
                "theta",
                format!("{theta} deg is outside [0, 90)"),
            ));
        }
        Ok(Angles {
            theta,
            phi: wrap_degrees(phi),
        })
    }

    /// Point at distance `range` from the origin along this direction.
    pub fn to_position(self, range: f64) -> Point3D {
        let (theta, phi) = (self.theta.to_radians(), self.phi.to_radians());
        Point3D {
            x: range * theta.sin() * phi.cos(),
            y: range * theta.sin() * phi.sin(),
            z: range * theta.cos(),
        }
    }
}

/// Wraps an angle in degrees into [0, 360).
pub fn wrap_degrees(deg: f64) -> f64 {
    let w = deg.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// Signed shortest rotation from `from` to `to`, in (-180, 180].
pub fn circular_delta(from: f64, to: f64) -> f64 {
    let d = (to - from).rem_euclid(360.0);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

/// Spherical angles of `p` as seen from the surface origin. An on-axis
/// point has `phi = 0` by convention.
pub fn angles_from_position(p: Point3D) -> Result<Angles> {
    if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
        return Err(Error::validation("point", "coordinates must be finite"));
    }
    if p.z <= 0.0 {
        return Err(Error::BehindSurface {
            x: p.x,
            y: p.y,
            z: p.z,
        });
    }
    let lateral = p.x.hypot(p.y);
    let theta = lateral.atan2(p.z).to_degrees();
    let phi = if lateral == 0.0 {
        0.0
    } else {
        wrap_degrees(p.y.atan2(p.x).to_degrees())
    };
    Ok(Angles { theta, phi })
}

/// The three mobility cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseId {
    /// Straight walk parallel to the surface, at surface height, ending
    /// directly in front of it.
    A,
    /// Projectile motion in a plane parallel to the surface.
    B,
    /// Random leaps of the polar angle at a fixed interval.
    C,
}

impl std::str::FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(CaseId::A),
            "B" | "b" => Ok(CaseId::B),
            "C" | "c" => Ok(CaseId::C),
            other => Err(Error::validation(
                "scenario.case",
                format!("unknown case {other:?}, expected A, B or C"),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseParams {
    /// Distance of the target line or plane from the surface, m.
    pub standoff_distance: f64,
    /// m/s.
    pub speed: f64,
    /// Initial polar angle for Cases A and C, degrees.
    pub start_theta: f64,
    /// Launch elevation for Case B, degrees.
    pub launch_angle: f64,
    /// Seconds between Case C leaps.
    pub leap_interval: f64,
    pub rng_seed: u64,
}

impl CaseParams {
    /// Default parameters for `case`. Walking speed for A and C, 30 m/s
    /// launch speed for B.
    pub fn defaults(case: CaseId) -> Self {
        CaseParams {
            standoff_distance: 10.0,
            speed: Self::default_speed(case),
            start_theta: 85.0,
            launch_angle: 45.0,
            leap_interval: 2.0,
            rng_seed: 0,
        }
    }

    pub fn default_speed(case: CaseId) -> f64 {
        match case {
            CaseId::A | CaseId::C => 1.4,
            CaseId::B => 30.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("scenario.standoff_distance", self.standoff_distance),
            ("scenario.speed", self.speed),
            ("scenario.leap_interval", self.leap_interval),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(key, format!("{v} must be > 0")));
            }
        }
        let open_quadrant = [
            ("scenario.start_theta", self.start_theta),
            ("scenario.launch_angle", self.launch_angle),
        ];
        for (key, v) in open_quadrant {
            if !(v.is_finite() && v > 0.0 && v < 90.0) {
                return Err(Error::validation(key, format!("{v} deg must lie in (0, 90)")));
            }
        }
        Ok(())
    }
}

/// Serialized shape of a [`Trajectory`]; the Case C leap schedule is
/// regenerated from the seed on load.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
struct TrajectoryDescriptor {
    case: CaseId,
    #[serde(flatten)]
    params: CaseParams,
    duration: f64,
}

/// A fully resolved target motion over `[0, duration]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrajectoryDescriptor", into = "TrajectoryDescriptor")]
pub struct Trajectory {
    case: CaseId,
    params: CaseParams,
    duration: f64,
    /// Polar angle held from `k * leap_interval` onward (Case C only).
    leaps: Vec<f64>,
}

impl TryFrom<TrajectoryDescriptor> for Trajectory {
    type Error = Error;

    fn try_from(d: TrajectoryDescriptor) -> Result<Self> {
        Trajectory::new(d.case, d.params, Some(d.duration))
    }
}

impl From<Trajectory> for TrajectoryDescriptor {
    fn from(t: Trajectory) -> Self {
        TrajectoryDescriptor {
            case: t.case,
            params: t.params,
            duration: t.duration,
        }
    }
}

impl Trajectory {
    /// Builds a trajectory. With `duration = None` the case's natural span
    /// is used (see [`Trajectory::natural_duration`]).
    pub fn new(case: CaseId, params: CaseParams, duration: Option<f64>) -> Result<Self> {
        params.validate()?;
        let natural = Self::natural_duration(case, &params);
        let duration = duration.unwrap_or(natural);
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::validation(
                "scenario.duration",
                format!("{duration} must be > 0"),
            ));
        }
        if case == CaseId::A && duration > natural * (1.0 + 1e-12) {
            return Err(Error::validation(
                "scenario.duration",
                format!("{duration} s exceeds the Case A travel time of {natural} s"),
            ));
        }
        let leaps = match case {
            CaseId::C => leap_schedule(&params, duration),
            CaseId::A | CaseId::B => Vec::new(),
        };
        Ok(Trajectory {
            case,
            params,
            duration,
            leaps,
        })
    }

    /// Case A: time to walk from the start point to broadside. Case B: time
    /// of flight back to launch height. Case C: same span as Case A.
    pub fn natural_duration(case: CaseId, params: &CaseParams) -> f64 {
        match case {
            CaseId::A | CaseId::C => case_a_start_x(params) / params.speed,
            CaseId::B => 2.0 * params.speed * params.launch_angle.to_radians().sin() / GRAVITY,
        }
    }

    pub fn case(&self) -> CaseId {
        self.case
    }

    pub fn params(&self) -> &CaseParams {
        &self.params
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Case C leap angles; entry `k` holds from `k * leap_interval`.
    pub fn leap_thetas(&self) -> &[f64] {
        &self.leaps
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t.is_finite() && (0.0..=self.duration).contains(&t) {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                t,
                duration: self.duration,
            })
        }
    }

    fn leap_theta_at(&self, t: f64) -> f64 {
        let k = (t / self.params.leap_interval).floor() as usize;
        self.leaps[k.min(self.leaps.len() - 1)]
    }

    pub fn position_at(&self, t: f64) -> Result<Point3D> {
        self.check_time(t)?;
        let p = &self.params;
        let d = p.standoff_distance;
        let pos = match self.case {
            CaseId::A => {
                let x0 = case_a_start_x(p);
                let x = if t >= x0 / p.speed {
                    0.0
                } else {
                    (x0 - p.speed * t).max(0.0)
                };
                Point3D { x, y: 0.0, z: d }
            }
            CaseId::B => {
                let alpha = p.launch_angle.to_radians();
                Point3D {
                    x: p.speed * alpha.cos() * t,
                    y: p.speed * alpha.sin() * t - 0.5 * GRAVITY * t * t,
                    z: d,
                }
            }
            CaseId::C => Point3D {
                x: d * self.leap_theta_at(t).to_radians().tan(),
                y: 0.0,
                z: d,
            },
        };
        Ok(pos)
    }

    /// Reflection direction toward the target at time `t`. Case C returns
    /// the leap angle directly instead of round-tripping through a position.
    pub fn angles_at(&self, t: f64) -> Result<Angles> {
        match self.case {
            CaseId::C => {
                self.check_time(t)?;
                Ok(Angles {
                    theta: self.leap_theta_at(t),
                    phi: 0.0,
                })
            }
            CaseId::A | CaseId::B => angles_from_position(self.position_at(t)?),
        }
    }

    /// Samples at `0, dt, 2dt, ...` plus a final sample at `duration`.
    pub fn angle_stream(&self, dt: f64) -> Result<Vec<(f64, Angles)>> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::validation(
                "gateway.sample_dt",
                format!("{dt} must be > 0"),
            ));
        }
        let times = sample_times(self.duration, dt);
        times.into_iter().map(|t| Ok((t, self.angles_at(t)?))).collect()
    }
}

fn case_a_start_x(p: &CaseParams) -> f64 {
    p.standoff_distance * p.start_theta.to_radians().tan()
}

fn leap_schedule(p: &CaseParams, duration: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.rng_seed);
    let n_leaps = (duration / p.leap_interval).floor() as usize;
    std::iter::once(p.start_theta)
        .chain((0..n_leaps).map(|_| rng.random_range(0.0..=LEAP_THETA_MAX)))
        .collect()
}

/// Strictly increasing sample instants covering `[0, duration]` with both
/// endpoints included.
pub fn sample_times(duration: f64, dt: f64) -> Vec<f64> {
    let slack = dt * 1e-6;
    let mut times: Vec<f64> = (0u64..)
        .map(|k| k as f64 * dt)
        .take_while(|&t| t < duration - slack)
        .collect();
    times.push(duration);
    times
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case_a() -> Trajectory {
        Trajectory::new(CaseId::A, CaseParams::defaults(CaseId::A), None).unwrap()
    }

    #[test]
    fn case_a_start_and_end_points() {
        let params = CaseParams {
            start_theta: 45.0,
            ..CaseParams::defaults(CaseId::A)
        };
        let traj = Trajectory::new(CaseId::A, params, None).unwrap();
        let p0 = traj.position_at(0.0).unwrap();
        assert!((p0.x - 10.0).abs() < 1e-12);
        assert_eq!((p0.y, p0.z), (0.0, 10.0));
        let end = traj.position_at(traj.duration()).unwrap();
        assert_eq!(end.x, 0.0);
    }

    #[test]
    fn case_b_apex_height() {
        let traj = Trajectory::new(CaseId::B, CaseParams::defaults(CaseId::B), None).unwrap();
        let t_apex = 30.0 * 45f64.to_radians().sin() / GRAVITY;
        assert!((t_apex - 2.1625).abs() < 1e-4);
        let y = traj.position_at(t_apex).unwrap().y;

        // semi-implicit Euler with a small step
        let (mut vy, mut yn, h) = (30.0 * 45f64.to_radians().sin(), 0.0f64, 1e-6);
        let steps = (t_apex / h).round() as usize;
        for _ in 0..steps {
            yn += vy * h - 0.5 * GRAVITY * h * h;
            vy -= GRAVITY * h;
        }
        assert!((y - 22.94).abs() < 5e-3, "apex {y}");
        assert!((y - yn).abs() < 1e-3, "closed form {y} vs integrated {yn}");
    }

    #[test]
    fn out_of_range_time() {
        let traj = case_a();
        assert!(matches!(traj.position_at(-0.1), Err(Error::OutOfRange { .. })));
        assert!(matches!(
            traj.position_at(traj.duration() + 1.0),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn axis_and_symmetric_points() {
        let a = angles_from_position(Point3D::new(0.0, 0.0, 10.0).unwrap()).unwrap();
        assert_eq!((a.theta, a.phi), (0.0, 0.0));
        let a = angles_from_position(Point3D::new(10.0, 0.0, 10.0).unwrap()).unwrap();
        assert!((a.theta - 45.0).abs() < 1e-12 && a.phi == 0.0);
        let a = angles_from_position(Point3D::new(0.0, 10.0, 10.0).unwrap()).unwrap();
        assert!((a.theta - 45.0).abs() < 1e-12 && (a.phi - 90.0).abs() < 1e-12);
        let a = angles_from_position(Point3D::new(0.0, -1e-3, 10.0).unwrap()).unwrap();
        assert!((a.phi - 270.0).abs() < 1e-9);
    }

    #[test]
    fn behind_surface_rejected() {
        for z in [0.0, -1.0] {
            let p = Point3D::new(1.0, 0.0, z).unwrap();
            assert!(matches!(
                angles_from_position(p),
                Err(Error::BehindSurface { .. })
            ));
        }
    }

    #[test]
    fn stream_with_single_step_has_endpoints_only() {
        let traj = case_a();
        let s = traj.angle_stream(traj.duration()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].0, 0.0);
        assert_eq!(s[1].0, traj.duration());
    }

    #[test]
    fn case_a_theta_near_ten_metres() {
        let traj = case_a();
        let dt = 1e-3;
        let s = traj.angle_stream(dt).unwrap();
        let (_, nearest) = s
            .iter()
            .map(|&(t, a)| ((traj.position_at(t).unwrap().x - 10.0).abs(), a))
            .min_by(|l, r| l.0.total_cmp(&r.0))
            .unwrap();
        assert!((nearest.theta - 45.0).abs() < 0.01, "{}", nearest.theta);
    }

    #[test]
    fn case_c_is_seeded() {
        let mk = |seed| {
            let params = CaseParams {
                rng_seed: seed,
                ..CaseParams::defaults(CaseId::C)
            };
            Trajectory::new(CaseId::C, params, Some(60.0)).unwrap()
        };
        assert_eq!(
            mk(3).angle_stream(0.01).unwrap(),
            mk(3).angle_stream(0.01).unwrap()
        );
        assert_ne!(mk(3).leap_thetas(), mk(4).leap_thetas());
        let t = mk(3);
        assert_eq!(t.leap_thetas().len(), 31);
        assert_eq!(t.leap_thetas()[0], 85.0);
        assert!(t
            .leap_thetas()
            .iter()
            .all(|&th| (0.0..=LEAP_THETA_MAX).contains(&th)));
    }

    #[test]
    fn case_a_rejects_overlong_duration() {
        let err = Trajectory::new(CaseId::A, CaseParams::defaults(CaseId::A), Some(1e4)).unwrap_err();
        assert!(err.to_string().contains("scenario.duration"));
    }

    #[test]
    fn invalid_params_name_their_key() {
        let params = CaseParams {
            speed: 0.0,
            ..CaseParams::defaults(CaseId::A)
        };
        let err = Trajectory::new(CaseId::A, params, None).unwrap_err();
        assert!(err.to_string().contains("scenario.speed"));
    }

    #[test]
    fn circular_delta_wraps() {
        assert_eq!(circular_delta(359.0, 1.0), 2.0);
        assert_eq!(circular_delta(1.0, 359.0), -2.0);
        assert_eq!(wrap_degrees(-1e-20), 0.0);
    }
}
