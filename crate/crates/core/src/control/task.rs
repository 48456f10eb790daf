use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::dynamics::{KinematicChain, SitePose};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Translational distance to a point.
    Position,
    /// Rotation to a reference orientation.
    Orientation,
    /// Misalignment between a site axis and the direction to a point.
    Alignment,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Target {
    Point([f64; 3]),
    /// Row-major rotation matrix.
    Rotation([[f64; 3]; 3]),
}

impl Target {
    pub fn point(&self) -> Option<Vector3<f64>> {
        match self {
            Target::Point(p) => Some(Vector3::from(*p)),
            Target::Rotation(_) => None,
        }
    }

    pub fn rotation(&self) -> Option<Matrix3<f64>> {
        match self {
            Target::Rotation(r) => Some(Matrix3::from_fn(|i, j| r[i][j])),
            Target::Point(_) => None,
        }
    }
}

/// One prioritized objective. Priority 1 is the highest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub priority: u32,
    pub site: String,
    pub metric: Metric,
    pub target: Target,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site_axis: Option<[f64; 3]>,
    pub kp: f64,
    pub kd: f64,
}

impl TaskSpec {
    pub fn position(priority: u32, site: impl Into<String>, target: Vector3<f64>, kp: f64, kd: f64) -> Self {
        TaskSpec {
            priority,
            site: site.into(),
            metric: Metric::Position,
            target: Target::Point(target.into()),
            site_axis: None,
            kp,
            kd,
        }
    }

    pub fn orientation(priority: u32, site: impl Into<String>, target: Matrix3<f64>, kp: f64, kd: f64) -> Self {
        TaskSpec {
            priority,
            site: site.into(),
            metric: Metric::Orientation,
            target: Target::Rotation(std::array::from_fn(|i| std::array::from_fn(|j| target[(i, j)]))),
            site_axis: None,
            kp,
            kd,
        }
    }

    pub fn alignment(
        priority: u32,
        site: impl Into<String>,
        target: Vector3<f64>,
        site_axis: Vector3<f64>,
        kp: f64,
        kd: f64,
    ) -> Self {
        TaskSpec {
            priority,
            site: site.into(),
            metric: Metric::Alignment,
            target: Target::Point(target.into()),
            site_axis: Some(site_axis.into()),
            kp,
            kd,
        }
    }

    pub fn validate(&self, chain: &KinematicChain) -> Result<()> {
        chain.site(&self.site)?;
        if !(self.kp >= 0.0 && self.kp.is_finite() && self.kd >= 0.0 && self.kd.is_finite()) {
            return Err(Error::invalid(format!(
                "task on `{}` needs finite nonnegative gains",
                self.site
            )));
        }
        match (self.metric, &self.target) {
            (Metric::Position | Metric::Alignment, Target::Point(_)) => {}
            (Metric::Orientation, Target::Rotation(_)) => {
                let r = self.target.rotation().expect("rotation target");
                if (r * r.transpose() - Matrix3::identity()).abs().max() > 1e-6 || r.determinant() < 0.0 {
                    return Err(Error::invalid("orientation target is not a rotation matrix"));
                }
            }
            _ => {
                return Err(Error::invalid(format!(
                    "task on `{}`: target type does not match metric {:?}",
                    self.site, self.metric
                )))
            }
        }
        if self.metric == Metric::Alignment {
            let axis = self
                .site_axis
                .ok_or_else(|| Error::invalid("alignment task requires site_axis"))?;
            if Vector3::from(axis).norm() < 1e-12 {
                return Err(Error::invalid("alignment site_axis must be nonzero"));
            }
        }
        Ok(())
    }

    /// Whether the task acts on the angular rows of the site Jacobian.
    pub fn is_angular(&self) -> bool {
        !matches!(self.metric, Metric::Position)
    }
}

/// Rotation logarithm as an axis-angle vector.
///
/// At an angle of exactly π the axis sign is ambiguous; the lexicographically
/// larger of the two candidates is returned.
pub fn rotation_log(r: &Matrix3<f64>) -> Vector3<f64> {
    let cos = ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let angle = cos.acos();
    let s = Vector3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]) * 0.5;
    if angle < 1e-12 {
        return s;
    }
    if angle < PI - 1e-6 {
        return s * (angle / angle.sin());
    }
    let b = (r + Matrix3::identity()) * 0.5;
    let k = (0..3)
        .max_by(|&i, &j| b[(i, i)].total_cmp(&b[(j, j)]))
        .expect("three diagonal entries");
    let mut u = b.column(k) / b[(k, k)].max(0.0).sqrt();
    u.normalize_mut();
    let d = s.dot(&u);
    if d.abs() > 1e-12 {
        if d < 0.0 {
            u = -u;
        }
    } else {
        let first = u.iter().copied().find(|v| v.abs() > 1e-12).unwrap_or(0.0);
        if first < 0.0 {
            u = -u;
        }
    }
    u * angle
}

/// Task-space error for a site pose.
pub fn task_error(task: &TaskSpec, pose: &SitePose) -> Result<Vector3<f64>> {
    match task.metric {
        Metric::Position => {
            let target = task
                .target
                .point()
                .ok_or_else(|| Error::invalid("position task needs a point target"))?;
            Ok(target - pose.position)
        }
        Metric::Orientation => {
            let target = task
                .target
                .rotation()
                .ok_or_else(|| Error::invalid("orientation task needs a rotation target"))?;
            Ok(rotation_log(&(target * pose.rotation.transpose())))
        }
        Metric::Alignment => {
            let target = task
                .target
                .point()
                .ok_or_else(|| Error::invalid("alignment task needs a point target"))?;
            let axis = task
                .site_axis
                .ok_or_else(|| Error::invalid("alignment task requires site_axis"))?;
            let d = target - pose.position;
            let dist = d.norm();
            if dist < 1e-9 {
                return Err(Error::DegenerateTarget(format!(
                    "alignment target coincides with site `{}`",
                    task.site
                )));
            }
            let u = pose.rotation * Vector3::from(axis).normalize();
            Ok(u.cross(&(d / dist)))
        }
    }
}

/// Angle in radians between the site axis and the direction to the target.
pub fn misalignment_angle(pose: &SitePose, site_axis: &Vector3<f64>, target: &Vector3<f64>) -> f64 {
    let u = pose.rotation * site_axis.normalize();
    let d = target - pose.position;
    u.angle(&d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Rotation3;

    fn pose(position: Vector3<f64>, rotation: Matrix3<f64>) -> SitePose {
        SitePose { position, rotation }
    }

    #[test]
    fn position_error_vanishes_at_target() {
        let p = Vector3::new(0.1, -0.2, 0.3);
        let task = TaskSpec::position(1, "s", p, 1.0, 0.0);
        assert_eq!(
            task_error(&task, &pose(p, Matrix3::identity())).unwrap(),
            Vector3::zeros()
        );
    }

    #[test]
    fn alignment_cross_product_identities() {
        let task = TaskSpec::alignment(1, "s", Vector3::new(2.0, 0.0, 0.0), Vector3::x(), 1.0, 0.0);
        let e = task_error(&task, &pose(Vector3::zeros(), Matrix3::identity())).unwrap();
        assert_eq!(e, Vector3::zeros());
        let task = TaskSpec::alignment(1, "s", Vector3::new(0.0, 3.0, 0.0), Vector3::x(), 1.0, 0.0);
        let e = task_error(&task, &pose(Vector3::zeros(), Matrix3::identity())).unwrap();
        assert!((e.norm() - 1.0).abs() < 1e-15);

        let task = TaskSpec::alignment(1, "s", Vector3::zeros(), Vector3::x(), 1.0, 0.0);
        assert!(matches!(
            task_error(&task, &pose(Vector3::zeros(), Matrix3::identity())),
            Err(Error::DegenerateTarget(_))
        ));
    }

    #[test]
    fn orientation_quarter_turn_about_z() {
        let site = Rotation3::from_euler_angles(0.3, -0.2, 0.7).into_inner();
        let target = Rotation3::from_axis_angle(&Vector3::z_axis(), PI / 2.0).into_inner() * site;
        let task = TaskSpec::orientation(1, "s", target, 1.0, 0.0);
        let e = task_error(&task, &pose(Vector3::zeros(), site)).unwrap();
        assert!((e - Vector3::new(0.0, 0.0, PI / 2.0)).norm() < 1e-12, "{e}");
    }

    #[test]
    fn rotation_log_half_turn_tie_break() {
        let r = Rotation3::from_axis_angle(&Vector3::y_axis(), PI).into_inner();
        let e = rotation_log(&r);
        assert!((e - Vector3::new(0.0, PI, 0.0)).norm() < 1e-9, "{e}");
        let axis = nalgebra::Unit::new_normalize(Vector3::new(-1.0, 2.0, 0.5));
        let r = Rotation3::from_axis_angle(&axis, PI).into_inner();
        let e = rotation_log(&r);
        assert!((e + axis.into_inner() * PI).norm() < 1e-6, "{e}");
    }

    #[test]
    fn rotation_log_matches_axis_angle() {
        let axis = nalgebra::Unit::new_normalize(Vector3::new(0.3, -0.4, 0.8));
        for angle in [1e-8, 0.1, 1.0, 2.5, PI - 1e-7] {
            let r = Rotation3::from_axis_angle(&axis, angle).into_inner();
            let e = rotation_log(&r);
            assert!((e - axis.into_inner() * angle).norm() < 1e-7, "angle {angle}: {e}");
        }
    }

    #[test]
    fn task_json_shape() {
        let json = r#"[
            {"priority": 1, "site": "right_hand", "metric": "position", "target": [0.2, -0.1, 0.3], "kp": 50, "kd": 10},
            {"priority": 2, "site": "left_eye", "metric": "alignment", "target": [0.2, -0.1, 0.3], "site_axis": [1, 0, 0], "kp": 50, "kd": 10},
            {"priority": 3, "site": "head", "metric": "orientation", "target": [[1,0,0],[0,1,0],[0,0,1]], "kp": 5, "kd": 1}
        ]"#;
        let tasks: Vec<TaskSpec> = serde_json::from_str(json).unwrap();
        assert_eq!(tasks[1].metric, Metric::Alignment);
        assert_eq!(tasks[2].target.rotation(), Some(Matrix3::identity()));
        assert!(serde_json::from_str::<TaskSpec>(
            r#"{"priority": 1, "site": "s", "metric": "position", "target": [0,0,0], "kp": 1, "kd": 1, "gain": 2}"#
        )
        .is_err());
    }
}
