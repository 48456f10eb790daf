use nalgebra::{DMatrix, DVector, Isometry3, Matrix3, Unit, UnitQuaternion, Vector3};

use super::chain::KinematicChain;
use crate::error::Result;

/// World position and orientation of a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SitePose {
    pub position: Vector3<f64>,
    pub rotation: Matrix3<f64>,
}

impl From<&Isometry3<f64>> for SitePose {
    fn from(iso: &Isometry3<f64>) -> Self {
        SitePose {
            position: iso.translation.vector,
            rotation: iso.rotation.to_rotation_matrix().into_inner(),
        }
    }
}

/// World frames of every link and site for one configuration.
#[derive(Debug, Clone)]
pub struct Kinematics {
    pub links: Vec<Isometry3<f64>>,
    pub sites: Vec<Isometry3<f64>>,
}

impl Kinematics {
    pub fn compute(chain: &KinematicChain, q: &DVector<f64>) -> Result<Self> {
        chain.check_dim(q, "joint position vector")?;
        Ok(Self::compute_unchecked(chain, q))
    }

    pub(crate) fn compute_unchecked(chain: &KinematicChain, q: &DVector<f64>) -> Self {
        let mut links: Vec<Isometry3<f64>> = Vec::with_capacity(chain.dof());
        for (i, link) in chain.links().iter().enumerate() {
            let parent = link.parent.map_or(*chain.base(), |p| links[p]);
            let hinge = UnitQuaternion::from_axis_angle(&Unit::new_unchecked(link.axis), q[i]);
            links.push(parent * link.offset * Isometry3::from_parts(Default::default(), hinge));
        }
        let sites = chain
            .sites()
            .iter()
            .map(|s| s.link.map_or(*chain.base(), |l| links[l]) * s.local)
            .collect();
        Kinematics { links, sites }
    }

    pub fn site_pose(&self, site: usize) -> SitePose {
        SitePose::from(&self.sites[site])
    }

    /// World joint axis and joint origin of link `i`.
    pub fn joint_axis(&self, chain: &KinematicChain, i: usize) -> (Vector3<f64>, Vector3<f64>) {
        let frame = &self.links[i];
        (frame.rotation * chain.links()[i].axis, frame.translation.vector)
    }

    /// Geometric Jacobian of a site: linear rows then angular rows.
    pub fn site_jacobian(&self, chain: &KinematicChain, site: usize) -> DMatrix<f64> {
        let n = chain.dof();
        let mut jac = DMatrix::zeros(6, n);
        let p = self.sites[site].translation.vector;
        let mut cur = chain.sites()[site].link;
        while let Some(i) = cur {
            let (z, o) = self.joint_axis(chain, i);
            let lin = z.cross(&(p - o));
            jac.fixed_view_mut::<3, 1>(0, i).copy_from(&lin);
            jac.fixed_view_mut::<3, 1>(3, i).copy_from(&z);
            cur = chain.links()[i].parent;
        }
        jac
    }
}

/// World poses of every site, in chain site order.
pub fn forward_kinematics(chain: &KinematicChain, q: &DVector<f64>) -> Result<Vec<SitePose>> {
    let kin = Kinematics::compute(chain, q)?;
    Ok(kin.sites.iter().map(SitePose::from).collect())
}

pub fn site_pose(chain: &KinematicChain, q: &DVector<f64>, site: &str) -> Result<SitePose> {
    let idx = chain.site(site)?;
    Ok(Kinematics::compute(chain, q)?.site_pose(idx))
}

/// 6×n geometric Jacobian of the named site.
pub fn jacobian(chain: &KinematicChain, q: &DVector<f64>, site: &str) -> Result<DMatrix<f64>> {
    let idx = chain.site(site)?;
    Ok(Kinematics::compute(chain, q)?.site_jacobian(chain, idx))
}
