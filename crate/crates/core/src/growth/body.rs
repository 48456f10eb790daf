//! Body specifications built from primitive geometry and their age scaling.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::curve::{AgeMonths, GrowthCurve};
use crate::error::{Error, Result};

/// Primitive collision/visual geometry. Capsules are aligned with the local
/// z axis; boxes are axis aligned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeomPrimitive {
    Sphere { radius: f64 },
    Capsule { radius: f64, half_length: f64 },
    Box { half_extents: [f64; 3] },
}

impl GeomPrimitive {
    pub fn from_kind(kind: &str, dims: &[f64]) -> Result<Self> {
        let geom = match (kind, dims) {
            ("sphere", &[radius]) => GeomPrimitive::Sphere { radius },
            ("capsule", &[radius, half_length]) => GeomPrimitive::Capsule { radius, half_length },
            ("box", &[hx, hy, hz]) => GeomPrimitive::Box {
                half_extents: [hx, hy, hz],
            },
            ("sphere" | "capsule" | "box", _) => {
                return Err(Error::invalid(format!(
                    "{kind} geometry cannot take {} dimensions",
                    dims.len()
                )))
            }
            _ => return Err(Error::invalid(format!("unknown geometry kind `{kind}`"))),
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GeomPrimitive::Sphere { .. } => "sphere",
            GeomPrimitive::Capsule { .. } => "capsule",
            GeomPrimitive::Box { .. } => "box",
        }
    }

    pub fn dims(&self) -> Vec<f64> {
        match *self {
            GeomPrimitive::Sphere { radius } => vec![radius],
            GeomPrimitive::Capsule { radius, half_length } => vec![radius, half_length],
            GeomPrimitive::Box { half_extents } => half_extents.to_vec(),
        }
    }

    /// A capsule may have a zero half length (it degenerates to a sphere);
    /// every other dimension must be strictly positive.
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            GeomPrimitive::Sphere { radius } => radius > 0.0,
            GeomPrimitive::Capsule { radius, half_length } => radius > 0.0 && half_length >= 0.0,
            GeomPrimitive::Box { half_extents } => half_extents.iter().all(|&h| h > 0.0),
        };
        if ok && self.dims().iter().all(|d| d.is_finite()) {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "{} dimensions {:?} must be positive and finite",
                self.kind(),
                self.dims()
            )))
        }
    }

    /// Index into [`dims`](Self::dims) of the dimension spanning each local axis.
    pub fn axis_dims(&self) -> [usize; 3] {
        match self {
            GeomPrimitive::Sphere { .. } => [0, 0, 0],
            GeomPrimitive::Capsule { .. } => [0, 0, 1],
            GeomPrimitive::Box { .. } => [0, 1, 2],
        }
    }

    pub fn volume(&self) -> f64 {
        geom_volume(self)
    }
}

pub fn geom_volume(geom: &GeomPrimitive) -> f64 {
    match *geom {
        GeomPrimitive::Sphere { radius } => 4.0 / 3.0 * PI * radius.powi(3),
        GeomPrimitive::Capsule { radius, half_length } => {
            PI * radius * radius * (2.0 * half_length) + 4.0 / 3.0 * PI * radius.powi(3)
        }
        GeomPrimitive::Box {
            half_extents: [x, y, z],
        } => 8.0 * x * y * z,
    }
}

/// A hinge joint attached at the origin of its body part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Joint {
    pub name: String,
    pub axis: [f64; 3],
    pub range: [f64; 2],
    pub gear: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BodyPart {
    pub name: String,
    pub geom: GeomPrimitive,
    /// Geometry center in the part frame.
    pub geom_pos: [f64; 3],
    /// Part frame origin (the joint location) in the parent frame.
    pub offset: [f64; 3],
    pub mass: f64,
    pub joints: Vec<Joint>,
    pub children: Vec<BodyPart>,
}

impl BodyPart {
    fn validate(&self) -> Result<()> {
        self.geom.validate()?;
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::invalid(format!(
                "part `{}` has non-positive mass {}",
                self.name, self.mass
            )));
        }
        for j in &self.joints {
            let norm = j.axis.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!("joint `{}` axis is not unit length", j.name)));
            }
            if !(j.range[0] < j.range[1]) {
                return Err(Error::invalid(format!(
                    "joint `{}` range {:?} must satisfy lo < hi",
                    j.name, j.range
                )));
            }
            if !(j.gear >= 0.0 && j.gear.is_finite()) {
                return Err(Error::invalid(format!(
                    "joint `{}` has negative gear {}",
                    j.name, j.gear
                )));
            }
        }
        Ok(())
    }

    /// Pre-order traversal of this part and its descendants.
    pub fn iter(&self) -> impl Iterator<Item = &BodyPart> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let part = stack.pop()?;
            stack.extend(part.children.iter().rev());
            Some(part)
        })
    }

    pub fn find(&self, name: &str) -> Option<&BodyPart> {
        self.iter().find(|p| p.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BodySpec {
    pub age: AgeMonths,
    pub template_age: AgeMonths,
    pub root: BodyPart,
}

impl BodySpec {
    pub fn parts(&self) -> impl Iterator<Item = &BodyPart> {
        self.root.iter()
    }

    pub fn part(&self, name: &str) -> Option<&BodyPart> {
        self.root.find(name)
    }

    pub fn total_mass(&self) -> f64 {
        self.parts().map(|p| p.mass).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let mut names = BTreeSet::new();
        let mut joint_names = BTreeSet::new();
        for p in self.parts() {
            p.validate()?;
            if !names.insert(p.name.as_str()) {
                return Err(Error::invalid(format!("duplicate part name `{}`", p.name)));
            }
            for j in &p.joints {
                if !joint_names.insert(j.name.as_str()) {
                    return Err(Error::invalid(format!("duplicate joint name `{}`", j.name)));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        to_document(self, None)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(from_document(text)?.0)
    }
}

/// A body specification calibrated at `template_age` together with the
/// measurement governing each geometry dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyTemplate {
    pub spec: BodySpec,
    /// Part name to one measurement per entry of its geometry dims.
    pub bindings: BTreeMap<String, Vec<String>>,
}

impl BodyTemplate {
    pub fn from_json(text: &str) -> Result<Self> {
        let (spec, bindings) = from_document(text)?;
        for part in spec.parts() {
            match bindings.get(&part.name) {
                Some(b) if b.len() == part.geom.dims().len() => {}
                Some(_) => {
                    return Err(Error::invalid(format!(
                        "part `{}`: governing_measurement must have one entry per dimension",
                        part.name
                    )))
                }
                None => {
                    return Err(Error::invalid(format!(
                        "template part `{}` lacks governing_measurement",
                        part.name
                    )))
                }
            }
        }
        Ok(BodyTemplate { spec, bindings })
    }

    pub fn to_json(&self) -> String {
        to_document(&self.spec, Some(&self.bindings))
    }

    /// Every measurement referenced by the binding map.
    pub fn measurements(&self) -> BTreeSet<&str> {
        self.bindings.values().flatten().map(String::as_str).collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartRecord {
    name: String,
    kind: String,
    dims: Vec<f64>,
    geom_pos: [f64; 3],
    offset: [f64; 3],
    mass: f64,
    joints: Vec<Joint>,
    children: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    governing_measurement: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    age: AgeMonths,
    template_age: AgeMonths,
    parts: Vec<PartRecord>,
}

fn to_document(spec: &BodySpec, bindings: Option<&BTreeMap<String, Vec<String>>>) -> String {
    let parts = spec
        .parts()
        .map(|p| PartRecord {
            name: p.name.clone(),
            kind: p.geom.kind().to_string(),
            dims: p.geom.dims(),
            geom_pos: p.geom_pos,
            offset: p.offset,
            mass: p.mass,
            joints: p.joints.clone(),
            children: p.children.iter().map(|c| c.name.clone()).collect(),
            governing_measurement: bindings.and_then(|b| b.get(&p.name).cloned()),
        })
        .collect();
    let doc = Document {
        age: spec.age,
        template_age: spec.template_age,
        parts,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("body documents always serialize");
    text.push('\n');
    text
}

fn from_document(text: &str) -> Result<(BodySpec, BTreeMap<String, Vec<String>>)> {
    let doc: Document =
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("body specification JSON: {e}")))?;
    if doc.parts.is_empty() {
        return Err(Error::invalid("body specification has no parts"));
    }
    let mut records: BTreeMap<String, PartRecord> = BTreeMap::new();
    let root_name = doc.parts[0].name.clone();
    for rec in doc.parts {
        if records.contains_key(&rec.name) {
            return Err(Error::invalid(format!("duplicate part name `{}`", rec.name)));
        }
        records.insert(rec.name.clone(), rec);
    }
    let mut bindings = BTreeMap::new();
    let mut visited = BTreeSet::new();
    let root = assemble(&root_name, &mut records, &mut bindings, &mut visited)?;
    if let Some(orphan) = records.keys().next() {
        return Err(Error::invalid(format!(
            "part `{orphan}` is not reachable from root `{root_name}`"
        )));
    }
    let spec = BodySpec {
        age: doc.age,
        template_age: doc.template_age,
        root,
    };
    spec.validate()?;
    Ok((spec, bindings))
}

fn assemble(
    name: &str,
    records: &mut BTreeMap<String, PartRecord>,
    bindings: &mut BTreeMap<String, Vec<String>>,
    visited: &mut BTreeSet<String>,
) -> Result<BodyPart> {
    if !visited.insert(name.to_string()) {
        return Err(Error::invalid(format!("part `{name}` is listed as a child twice")));
    }
    let rec = records
        .remove(name)
        .ok_or_else(|| Error::invalid(format!("unknown child part `{name}`")))?;
    if let Some(b) = rec.governing_measurement {
        bindings.insert(rec.name.clone(), b);
    }
    let children = rec
        .children
        .iter()
        .map(|c| assemble(c, records, bindings, visited))
        .collect::<Result<Vec<_>>>()?;
    Ok(BodyPart {
        geom: GeomPrimitive::from_kind(&rec.kind, &rec.dims)?,
        name: rec.name,
        geom_pos: rec.geom_pos,
        offset: rec.offset,
        mass: rec.mass,
        joints: rec.joints,
        children,
    })
}

/// Instantiates the template at `age`.
///
/// Each geometry dimension is multiplied by `curve(age) / curve(template_age)`
/// of its governing measurement. The geometry center scales with the part's
/// own per-axis factors and the part offset with its parent's, so children
/// stay attached at fixed fractions of the parent. Mass and joint gear follow
/// the part's volume ratio. Overrides replace a part's dims after scaling;
/// its mass and gear are then recomputed from the overridden volume while
/// positions keep their curve-scaled values.
pub fn build_body_spec(
    template: &BodyTemplate,
    age: AgeMonths,
    curves: &BTreeMap<String, GrowthCurve>,
    overrides: &BTreeMap<String, Vec<f64>>,
) -> Result<BodySpec> {
    for name in overrides.keys() {
        if template.spec.part(name).is_none() {
            return Err(Error::invalid(format!("override names unknown part `{name}`")));
        }
    }
    let reference = template.spec.template_age;
    let mut ratio_cache: BTreeMap<&str, f64> = BTreeMap::new();
    for m in template.measurements() {
        let curve = curves
            .get(m)
            .ok_or_else(|| Error::invalid(format!("no growth curve for measurement `{m}`")))?;
        let ratio = curve.eval(age) / curve.eval(reference);
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(Error::invalid(format!(
                "growth curve `{m}` gives a non-positive ratio {ratio} at age {}",
                age.value()
            )));
        }
        ratio_cache.insert(m, ratio);
    }
    let ctx = ScaleContext {
        template,
        ratios: &ratio_cache,
        overrides,
    };
    let root = ctx.scale_part(&template.spec.root, None)?;
    let spec = BodySpec {
        age,
        template_age: reference,
        root,
    };
    spec.validate()?;
    Ok(spec)
}

struct ScaleContext<'a> {
    template: &'a BodyTemplate,
    ratios: &'a BTreeMap<&'a str, f64>,
    overrides: &'a BTreeMap<String, Vec<f64>>,
}

impl ScaleContext<'_> {
    fn dim_ratios(&self, part: &BodyPart) -> Vec<f64> {
        self.template.bindings[&part.name]
            .iter()
            .map(|m| self.ratios[m.as_str()])
            .collect()
    }

    fn scale_part(&self, part: &BodyPart, parent_axes: Option<[f64; 3]>) -> Result<BodyPart> {
        let ratios = self.dim_ratios(part);
        let axis_dims = part.geom.axis_dims();
        let own_axes = axis_dims.map(|i| ratios[i]);
        let offset_axes = parent_axes.unwrap_or(own_axes);

        let scaled: Vec<f64> = part.geom.dims().iter().zip(&ratios).map(|(d, r)| d * r).collect();
        let dims = match self.overrides.get(&part.name) {
            Some(dims) => dims.clone(),
            None => scaled,
        };
        let geom = GeomPrimitive::from_kind(part.geom.kind(), &dims)
            .map_err(|e| Error::invalid(format!("part `{}`: {e}", part.name)))?;

        let volume_ratio = geom_volume(&geom) / geom_volume(&part.geom);
        let joints = part
            .joints
            .iter()
            .map(|j| Joint {
                gear: j.gear * volume_ratio,
                ..j.clone()
            })
            .collect();
        let children = part
            .children
            .iter()
            .map(|c| self.scale_part(c, Some(own_axes)))
            .collect::<Result<Vec<_>>>()?;
        Ok(BodyPart {
            name: part.name.clone(),
            geom,
            geom_pos: mul3(part.geom_pos, own_axes),
            offset: mul3(part.offset, offset_axes),
            mass: part.mass * volume_ratio,
            joints,
            children,
        })
    }
}

fn mul3(v: [f64; 3], s: [f64; 3]) -> [f64; 3] {
    [v[0] * s[0], v[1] * s[1], v[2] * s[2]]
}
