use num_complex::Complex64;
use serde::Deserialize;
use std::collections::BTreeMap;

use super::GreenError;
use crate::materials::MaterialModel;

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub name: String,
    /// `f64::INFINITY` for the two outer half-spaces.
    pub thickness: f64,
    pub material: MaterialModel,
}

impl Layer {
    pub fn is_halfspace(&self) -> bool {
        self.thickness.is_infinite()
    }
}

/// Piecewise-homogeneous medium along `z`: a left half-space, any number of
/// finite layers, a right half-space. The first interface sits at `z = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    layers: Vec<Layer>,
    interfaces: Vec<f64>,
}

impl LayerStack {
    pub fn new(layers: Vec<Layer>) -> Result<Self, GreenError> {
        if layers.len() < 2 {
            return Err(GreenError::InvalidStack("need two half-spaces".into()));
        }
        let last = layers.len() - 1;
        for (i, l) in layers.iter().enumerate() {
            let outer = i == 0 || i == last;
            if outer != l.is_halfspace() {
                return Err(GreenError::InvalidStack(format!(
                    "layer {i} ({}): half-spaces must be exactly the two outer layers",
                    l.name
                )));
            }
            if !outer && !(l.thickness > 0.0) {
                return Err(GreenError::InvalidStack(format!("layer {i} ({}) has thickness {}", l.name, l.thickness)));
            }
            l.material.validate()?;
        }
        let mut interfaces = vec![0.0];
        for l in &layers[1..last] {
            interfaces.push(interfaces.last().unwrap() + l.thickness);
        }
        Ok(Self { layers, interfaces })
    }

    /// One material everywhere.
    pub fn homogeneous(material: MaterialModel) -> Self {
        let half = |name: &str| Layer {
            name: name.into(),
            thickness: f64::INFINITY,
            material: material.clone(),
        };
        Self::new(vec![half("left"), half("right")]).expect("homogeneous stack is valid")
    }

    /// Left half-space, one slab of thickness `d` starting at `z = 0`, right half-space.
    pub fn slab(outside: MaterialModel, slab: MaterialModel, d: f64) -> Result<Self, GreenError> {
        Self::new(vec![
            Layer {
                name: "left".into(),
                thickness: f64::INFINITY,
                material: outside.clone(),
            },
            Layer {
                name: "slab".into(),
                thickness: d,
                material: slab,
            },
            Layer {
                name: "right".into(),
                thickness: f64::INFINITY,
                material: outside,
            },
        ])
    }

    /// Two half-spaces meeting at `z = 0`.
    pub fn interface(left: MaterialModel, right: MaterialModel) -> Self {
        Self::new(vec![
            Layer {
                name: "left".into(),
                thickness: f64::INFINITY,
                material: left,
            },
            Layer {
                name: "right".into(),
                thickness: f64::INFINITY,
                material: right,
            },
        ])
        .expect("two half-spaces are valid")
    }

    /// Parses `{"materials": {name: descriptor}, "layers": [{"halfspace": name} | {"d": .., "material": name}]}`.
    /// The name `vacuum` is predefined.
    pub fn from_json(text: &str) -> Result<Self, GreenError> {
        let raw: RawStack = serde_json::from_str(text).map_err(|e| GreenError::InvalidStack(e.to_string()))?;
        Self::from_raw(raw)
    }

    pub fn from_value(value: &serde_json::Value) -> Result<Self, GreenError> {
        let raw: RawStack = serde_json::from_value(value.clone()).map_err(|e| GreenError::InvalidStack(e.to_string()))?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawStack) -> Result<Self, GreenError> {
        let lookup = |name: &str| -> Result<MaterialModel, GreenError> {
            match raw.materials.get(name) {
                Some(m) => Ok(m.clone()),
                None if name == "vacuum" => Ok(MaterialModel::vacuum()),
                None => Err(GreenError::InvalidStack(format!("unknown material '{name}'"))),
            }
        };
        let layers = raw
            .layers
            .into_iter()
            .map(|l| match l {
                RawLayer::Halfspace { halfspace } => Ok(Layer {
                    material: lookup(&halfspace)?,
                    name: halfspace,
                    thickness: f64::INFINITY,
                }),
                RawLayer::Finite { d, material } => Ok(Layer {
                    material: lookup(&material)?,
                    name: material,
                    thickness: d,
                }),
            })
            .collect::<Result<Vec<Layer>, GreenError>>()?;
        Self::new(layers)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Interface coordinates, strictly increasing, first at zero.
    pub fn interfaces(&self) -> &[f64] {
        &self.interfaces
    }

    pub fn left(&self) -> &MaterialModel {
        &self.layers[0].material
    }

    pub fn right(&self) -> &MaterialModel {
        &self.layers.last().unwrap().material
    }

    /// `[first interface, last interface]`.
    pub fn extent(&self) -> (f64, f64) {
        (self.interfaces[0], *self.interfaces.last().unwrap())
    }

    /// Layer index at `z`; a point exactly on an interface belongs to the right layer.
    pub fn layer_at(&self, z: f64) -> usize {
        self.interfaces.partition_point(|&x| x <= z)
    }

    pub fn material_at(&self, z: f64) -> &MaterialModel {
        &self.layers[self.layer_at(z)].material
    }

    /// `(layer, overlap length)` for every layer meeting `[a, b]`. Slivers
    /// left by rounding when an interface sits on `a` or `b` are folded into
    /// the neighbouring layer.
    pub fn overlaps(&self, a: f64, b: f64) -> Vec<(usize, f64)> {
        let sliver = 1e-9 * (b - a);
        let mut out: Vec<(usize, f64)> = Vec::new();
        let mut carry = 0.0;
        let mut lo = a;
        let mut idx = self.layer_at(a);
        while lo < b {
            let hi = self.interfaces.get(idx).copied().unwrap_or(f64::INFINITY).min(b);
            if hi - lo > sliver {
                out.push((idx, hi - lo + carry));
                carry = 0.0;
            } else if hi > lo {
                match out.last_mut() {
                    Some(last) => last.1 += hi - lo,
                    None => carry += hi - lo,
                }
            }
            lo = hi;
            idx += 1;
        }
        out
    }

    /// Length-weighted mean of `ε` over `[a, b]`.
    pub fn mean_epsilon(&self, a: f64, b: f64, omega: f64) -> Complex64 {
        let w = b - a;
        self.overlaps(a, b)
            .into_iter()
            .map(|(i, len)| self.layers[i].material.epsilon(omega) * (len / w))
            .sum()
    }

    /// Harmonic mean of `κ` over `[a, b]`, i.e. the reciprocal of the mean `μ`.
    pub fn harmonic_kappa(&self, a: f64, b: f64, omega: f64) -> Result<Complex64, GreenError> {
        let w = b - a;
        let mu: Complex64 = self
            .overlaps(a, b)
            .into_iter()
            .map(|(i, len)| self.layers[i].material.mu(omega) * (len / w))
            .sum();
        if mu.norm() < 1e-300 {
            return Err(GreenError::Material(crate::materials::MaterialError::PoleAtFrequency {
                omega,
                modulus: mu.norm(),
            }));
        }
        Ok(mu.inv())
    }

    pub fn is_absorbing(&self) -> bool {
        self.layers.iter().any(|l| l.material.is_lossy())
    }
}

#[derive(Deserialize)]
struct RawStack {
    #[serde(default)]
    materials: BTreeMap<String, MaterialModel>,
    layers: Vec<RawLayer>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawLayer {
    Halfspace { halfspace: String },
    Finite { d: f64, material: String },
}
