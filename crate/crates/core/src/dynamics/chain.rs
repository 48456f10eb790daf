use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DVector, Isometry3, Matrix3, Translation3, UnitQuaternion, Vector3};

use crate::error::{Error, Result};
use crate::growth::{BodyPart, BodySpec, GeomPrimitive};

/// Standard gravity along world −z.
pub const GRAVITY: Vector3<f64> = Vector3::new(0.0, 0.0, -9.81);

/// One hinge joint together with the rigid body it moves.
///
/// The link frame sits on the joint axis. At `q = 0` it is `offset` relative
/// to the parent link frame (or the chain base). Intermediate hinges of a
/// multi-axis joint carry no mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub name: String,
    pub parent: Option<usize>,
    pub axis: Vector3<f64>,
    pub offset: Isometry3<f64>,
    pub mass: f64,
    /// Center of mass in the link frame.
    pub com: Vector3<f64>,
    /// Rotational inertia about the center of mass, link frame.
    pub inertia: Matrix3<f64>,
    pub range: [f64; 2],
    pub gear: f64,
    /// Passive viscous joint damping, N·m·s/rad.
    pub damping: f64,
}

/// A named frame rigidly attached to a link, or to the base when `link` is `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub name: String,
    pub link: Option<usize>,
    pub local: Isometry3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KinematicChain {
    links: Vec<Link>,
    sites: Vec<Site>,
    base: Isometry3<f64>,
    gravity: Vector3<f64>,
}

/// Joint positions and velocities.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub q: DVector<f64>,
    pub qdot: DVector<f64>,
}

impl ChainState {
    pub fn zeros(n: usize) -> Self {
        ChainState {
            q: DVector::zeros(n),
            qdot: DVector::zeros(n),
        }
    }

    pub fn at_rest(q: DVector<f64>) -> Self {
        let n = q.len();
        ChainState {
            q,
            qdot: DVector::zeros(n),
        }
    }
}

impl KinematicChain {
    pub fn new(links: Vec<Link>, sites: Vec<Site>, base: Isometry3<f64>, gravity: Vector3<f64>) -> Result<Self> {
        let mut names = BTreeSet::new();
        for (i, l) in links.iter().enumerate() {
            if !names.insert(l.name.as_str()) {
                return Err(Error::invalid(format!("duplicate joint `{}`", l.name)));
            }
            if l.parent.is_some_and(|p| p >= i) {
                return Err(Error::invalid(format!("link `{}` must come after its parent", l.name)));
            }
            if (l.axis.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!("joint `{}` axis is not unit", l.name)));
            }
            if !(l.mass >= 0.0 && l.mass.is_finite()) {
                return Err(Error::invalid(format!("link `{}` has invalid mass", l.name)));
            }
            if (l.inertia - l.inertia.transpose()).abs().max() > 1e-12 * (1.0 + l.inertia.abs().max()) {
                return Err(Error::invalid(format!("link `{}` inertia is not symmetric", l.name)));
            }
            if l.inertia.symmetric_eigenvalues().min() < -1e-15 {
                return Err(Error::invalid(format!(
                    "link `{}` inertia is not positive semidefinite",
                    l.name
                )));
            }
            if !(l.damping >= 0.0 && l.damping.is_finite()) {
                return Err(Error::invalid(format!("joint `{}` has invalid damping", l.name)));
            }
            if !(l.range[0] < l.range[1]) {
                return Err(Error::invalid(format!("joint `{}` has an empty range", l.name)));
            }
        }
        let mut site_names = BTreeSet::new();
        for s in &sites {
            if !site_names.insert(s.name.as_str()) {
                return Err(Error::invalid(format!("duplicate site `{}`", s.name)));
            }
            if s.link.is_some_and(|l| l >= links.len()) {
                return Err(Error::invalid(format!("site `{}` references a missing link", s.name)));
            }
        }
        Ok(KinematicChain {
            links,
            sites,
            base,
            gravity,
        })
    }

    pub fn dof(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn base(&self) -> &Isometry3<f64> {
        &self.base
    }

    pub fn gravity(&self) -> Vector3<f64> {
        self.gravity
    }

    /// Replaces the passive damping of every joint.
    pub fn with_damping(mut self, damping: &[f64]) -> Result<Self> {
        if damping.len() != self.links.len() {
            return Err(Error::invalid(format!(
                "{} damping values for {} joints",
                damping.len(),
                self.links.len()
            )));
        }
        if let Some(bad) = damping.iter().find(|b| !(**b >= 0.0 && b.is_finite())) {
            return Err(Error::invalid(format!(
                "joint damping {bad} must be finite and nonnegative"
            )));
        }
        for (l, b) in self.links.iter_mut().zip(damping) {
            l.damping = *b;
        }
        Ok(self)
    }

    pub fn with_gravity(mut self, gravity: Vector3<f64>) -> Self {
        self.gravity = gravity;
        self
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.links.iter().position(|l| l.name == name)
    }

    pub fn site_index(&self, name: &str) -> Option<usize> {
        self.sites.iter().position(|s| s.name == name)
    }

    pub fn site(&self, name: &str) -> Result<usize> {
        self.site_index(name)
            .ok_or_else(|| Error::invalid(format!("unknown site `{name}`")))
    }

    pub fn add_site(&mut self, name: impl Into<String>, link: Option<usize>, local: Isometry3<f64>) -> Result<()> {
        let name = name.into();
        if self.site_index(&name).is_some() {
            return Err(Error::invalid(format!("duplicate site `{name}`")));
        }
        if link.is_some_and(|l| l >= self.links.len()) {
            return Err(Error::invalid(format!("site `{name}` references a missing link")));
        }
        self.sites.push(Site { name, link, local });
        Ok(())
    }

    /// Whether link `ancestor` lies on the path from `link` to the base
    /// (a link is its own ancestor).
    pub fn is_ancestor(&self, ancestor: usize, link: usize) -> bool {
        let mut cur = Some(link);
        while let Some(i) = cur {
            if i == ancestor {
                return true;
            }
            cur = self.links[i].parent;
        }
        false
    }

    pub fn clamp_to_range(&self, q: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            q.len(),
            q.iter().zip(&self.links).map(|(v, l)| v.clamp(l.range[0], l.range[1])),
        )
    }

    pub(crate) fn check_dim(&self, v: &DVector<f64>, what: &str) -> Result<()> {
        if v.len() == self.dof() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "{what} has {} entries, chain has {} joints",
                v.len(),
                self.dof()
            )))
        }
    }
}

/// Rotational inertia of a primitive about its center, geometry frame.
pub fn primitive_inertia(geom: &GeomPrimitive, mass: f64) -> Matrix3<f64> {
    match *geom {
        GeomPrimitive::Sphere { radius } => Matrix3::identity() * (0.4 * mass * radius * radius),
        GeomPrimitive::Box {
            half_extents: [x, y, z],
        } => Matrix3::from_diagonal(&Vector3::new(
            mass / 3.0 * (y * y + z * z),
            mass / 3.0 * (x * x + z * z),
            mass / 3.0 * (x * x + y * y),
        )),
        GeomPrimitive::Capsule { radius: r, half_length } => {
            let len = 2.0 * half_length;
            let v_cyl = std::f64::consts::PI * r * r * len;
            let v_caps = 4.0 / 3.0 * std::f64::consts::PI * r.powi(3);
            let m_cyl = mass * v_cyl / (v_cyl + v_caps);
            let m_caps = mass - m_cyl;
            let transverse = m_cyl * (len * len / 12.0 + r * r / 4.0)
                + m_caps * (0.4 * r * r + len * len / 4.0 + 3.0 * len * r / 8.0);
            let axial = m_cyl * r * r / 2.0 + m_caps * 0.4 * r * r;
            Matrix3::from_diagonal(&Vector3::new(transverse, transverse, axial))
        }
    }
}

#[derive(Default)]
struct MassAccumulator {
    bodies: Vec<(f64, Vector3<f64>, Matrix3<f64>)>,
}

impl MassAccumulator {
    fn add(&mut self, mass: f64, com: Vector3<f64>, inertia: Matrix3<f64>) {
        self.bodies.push((mass, com, inertia));
    }

    fn combine(&self) -> (f64, Vector3<f64>, Matrix3<f64>) {
        let mass: f64 = self.bodies.iter().map(|b| b.0).sum();
        if mass == 0.0 {
            return (0.0, Vector3::zeros(), Matrix3::zeros());
        }
        let com = self.bodies.iter().map(|b| b.1 * b.0).sum::<Vector3<f64>>() / mass;
        let mut inertia = Matrix3::zeros();
        for (m, c, i) in &self.bodies {
            let d = c - com;
            inertia += i + (Matrix3::identity() * d.norm_squared() - d * d.transpose()) * *m;
        }
        (mass, com, 0.5 * (inertia + inertia.transpose()))
    }
}

/// Options for [`chain_from_body_spec_with`].
#[derive(Debug, Clone, Default)]
pub struct ChainOptions {
    /// Joints held rigidly; their parts merge into the parent link.
    pub locked_joints: BTreeSet<String>,
    /// Angle at which a locked joint is held. Unlisted locked joints sit at zero.
    pub locked_angles: BTreeMap<String, f64>,
    pub gravity: Option<Vector3<f64>>,
}

pub fn chain_from_body_spec(spec: &BodySpec, root_part: &str, fixed_base: bool) -> Result<KinematicChain> {
    if !fixed_base {
        return Err(Error::invalid("only fixed-base chains are supported"));
    }
    chain_from_body_spec_with(spec, root_part, &ChainOptions::default())
}

/// Builds a fixed-base chain from the subtree below `root_part`.
///
/// Every unlocked joint of a descendant becomes one hinge link; parts with
/// several joints get a stack of coincident hinges with the mass on the last
/// one. Parts without unlocked joints are welded to their nearest moving
/// ancestor (or to the base). Each part contributes a site at its geometry
/// center with the part's orientation.
pub fn chain_from_body_spec_with(spec: &BodySpec, root_part: &str, options: &ChainOptions) -> Result<KinematicChain> {
    let path =
        path_to(&spec.root, root_part).ok_or_else(|| Error::invalid(format!("unknown root part `{root_part}`")))?;
    for (name, angle) in &options.locked_angles {
        if !options.locked_joints.contains(name) {
            return Err(Error::invalid(format!(
                "angle given for joint `{name}`, which is not locked"
            )));
        }
        if !angle.is_finite() {
            return Err(Error::invalid(format!("locked angle for `{name}` is not finite")));
        }
    }
    let root = *path.last().expect("path contains the root part");
    let base_pos = path.iter().map(|p| Vector3::from(p.offset)).sum::<Vector3<f64>>();

    let mut builder = ChainBuilder {
        links: Vec::new(),
        masses: Vec::new(),
        sites: Vec::new(),
        options,
    };
    builder.sites.push(Site {
        name: root.name.clone(),
        link: None,
        local: Isometry3::translation(root.geom_pos[0], root.geom_pos[1], root.geom_pos[2]),
    });
    for child in &root.children {
        builder.visit(child, None, Isometry3::identity());
    }
    let ChainBuilder {
        mut links,
        masses,
        sites,
        ..
    } = builder;
    for (link, acc) in links.iter_mut().zip(&masses) {
        let (m, c, i) = acc.combine();
        link.mass = m;
        link.com = c;
        link.inertia = i;
    }
    KinematicChain::new(
        links,
        sites,
        Isometry3::from_parts(Translation3::from(base_pos), UnitQuaternion::identity()),
        options.gravity.unwrap_or(GRAVITY),
    )
}

fn path_to<'a>(part: &'a BodyPart, name: &str) -> Option<Vec<&'a BodyPart>> {
    if part.name == name {
        return Some(vec![part]);
    }
    part.children.iter().find_map(|c| {
        path_to(c, name).map(|mut p| {
            p.insert(0, part);
            p
        })
    })
}

struct ChainBuilder<'a> {
    links: Vec<Link>,
    masses: Vec<MassAccumulator>,
    sites: Vec<Site>,
    options: &'a ChainOptions,
}

impl ChainBuilder<'_> {
    /// `frame` is the parent part frame expressed in the `attach` link frame.
    fn visit(&mut self, part: &BodyPart, attach: Option<usize>, frame: Isometry3<f64>) {
        let here = frame * Isometry3::translation(part.offset[0], part.offset[1], part.offset[2]);
        let mut attach = attach;
        let mut frame = here;
        for joint in &part.joints {
            if self.options.locked_joints.contains(&joint.name) {
                let angle = self.options.locked_angles.get(&joint.name).copied().unwrap_or(0.0);
                if angle != 0.0 {
                    let axis = Vector3::from(joint.axis).normalize();
                    frame *= UnitQuaternion::from_scaled_axis(axis * angle);
                }
                continue;
            }
            self.links.push(Link {
                name: joint.name.clone(),
                parent: attach,
                axis: Vector3::from(joint.axis).normalize(),
                offset: frame,
                mass: 0.0,
                com: Vector3::zeros(),
                inertia: Matrix3::zeros(),
                range: joint.range,
                gear: joint.gear,
                damping: 0.0,
            });
            self.masses.push(MassAccumulator::default());
            attach = Some(self.links.len() - 1);
            frame = Isometry3::identity();
        }
        let geom_center = frame * Isometry3::translation(part.geom_pos[0], part.geom_pos[1], part.geom_pos[2]);
        if let Some(link) = attach {
            let rot = geom_center.rotation.to_rotation_matrix().into_inner();
            let inertia = rot * primitive_inertia(&part.geom, part.mass) * rot.transpose();
            self.masses[link].add(part.mass, geom_center.translation.vector, inertia);
        }
        self.sites.push(Site {
            name: part.name.clone(),
            link: attach,
            local: geom_center,
        });
        for child in &part.children {
            self.visit(child, attach, frame);
        }
    }
}
