use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distances below this are treated as coalescences.
pub const DEFAULT_SINGULAR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };
    pub const EZ: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 1.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Some unit vector orthogonal to `self` (which must be nonzero).
    pub fn any_orthogonal(self) -> Vec3 {
        let trial = if self.x.abs() < 0.9 * self.norm() {
            Vec3::new(1.0, 0.0, 0.0)
        } else {
            Vec3::new(0.0, 1.0, 0.0)
        };
        let v = self.cross(trial);
        v * (1.0 / v.norm())
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// A point in R^{3N}: the ordered electron positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    positions: Vec<Vec3>,
}

impl Configuration {
    pub fn new(positions: Vec<Vec3>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidInput("configuration needs at least one electron".into()));
        }
        if !positions.iter().all(|p| p.is_finite()) {
            return Err(Error::NonFinite("configuration".into()));
        }
        Ok(Self { positions })
    }

    /// Build from a flat `[x1, y1, z1, x2, ...]` slice.
    pub fn from_flat(coords: &[f64]) -> Result<Self> {
        if coords.is_empty() || coords.len() % 3 != 0 {
            return Err(Error::InvalidInput(format!(
                "flat coordinate length {} is not a positive multiple of 3",
                coords.len()
            )));
        }
        Self::new(coords.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.positions.iter().flat_map(|p| p.to_array()).collect()
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    /// Same rotation applied to every electron.
    pub fn rotated(&self, rot: &[[f64; 3]; 3]) -> Configuration {
        let apply = |p: Vec3| {
            Vec3::new(
                rot[0][0] * p.x + rot[0][1] * p.y + rot[0][2] * p.z,
                rot[1][0] * p.x + rot[1][1] * p.y + rot[1][2] * p.z,
                rot[2][0] * p.x + rot[2][1] * p.y + rot[2][2] * p.z,
            )
        };
        Configuration { positions: self.positions.iter().map(|&p| apply(p)).collect() }
    }

    pub fn swapped(&self, i: usize, j: usize) -> Configuration {
        let mut positions = self.positions.clone();
        positions.swap(i, j);
        Configuration { positions }
    }
}

impl Index<usize> for Configuration {
    type Output = Vec3;
    fn index(&self, i: usize) -> &Vec3 {
        &self.positions[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nucleus {
    pub charge: f64,
    pub position: Vec3,
}

/// Electron count plus fixed nuclei. An atom is one nucleus at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    electron_count: usize,
    nuclei: Vec<Nucleus>,
    singular_floor: f64,
}

impl SystemSpec {
    pub fn new(electron_count: usize, nuclei: Vec<Nucleus>) -> Result<Self> {
        if electron_count == 0 {
            return Err(Error::InvalidInput("electron count N must be >= 1".into()));
        }
        if nuclei.is_empty() {
            return Err(Error::InvalidInput("at least one nucleus is required".into()));
        }
        for (l, n) in nuclei.iter().enumerate() {
            if !(n.charge > 0.0 && n.charge.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "nuclear charge Z must be positive, nucleus {l} has {}",
                    n.charge
                )));
            }
            if !n.position.is_finite() {
                return Err(Error::NonFinite(format!("position of nucleus {l}")));
            }
        }
        for a in 0..nuclei.len() {
            for b in a + 1..nuclei.len() {
                if (nuclei[a].position - nuclei[b].position).norm() < DEFAULT_SINGULAR_FLOOR {
                    return Err(Error::InvalidInput(format!("nuclei {a} and {b} coincide")));
                }
            }
        }
        Ok(Self { electron_count, nuclei, singular_floor: DEFAULT_SINGULAR_FLOOR })
    }

    pub fn atom(z: f64, electron_count: usize) -> Result<Self> {
        Self::new(electron_count, vec![Nucleus { charge: z, position: Vec3::ZERO }])
    }

    pub fn with_singular_floor(mut self, floor: f64) -> Self {
        self.singular_floor = floor;
        self
    }

    pub fn electron_count(&self) -> usize {
        self.electron_count
    }

    pub fn nuclei(&self) -> &[Nucleus] {
        &self.nuclei
    }

    pub fn singular_floor(&self) -> f64 {
        self.singular_floor
    }

    /// Charge of the single nucleus, if this is an atom centred at the origin.
    pub fn atomic_charge(&self) -> Option<f64> {
        match self.nuclei.as_slice() {
            [n] if n.position == Vec3::ZERO => Some(n.charge),
            _ => None,
        }
    }

    pub(crate) fn check_arity(&self, c: &Configuration) -> Result<()> {
        if c.len() != self.electron_count {
            return Err(Error::ArityMismatch { expected: self.electron_count, found: c.len() });
        }
        Ok(())
    }

    /// Smallest electron-nucleus or electron-electron distance.
    pub fn min_singular_distance(&self, c: &Configuration) -> f64 {
        let mut d = f64::INFINITY;
        let p = c.positions();
        for (j, xj) in p.iter().enumerate() {
            for n in &self.nuclei {
                d = d.min((*xj - n.position).norm());
            }
            for xk in &p[j + 1..] {
                d = d.min((*xj - *xk).norm());
            }
        }
        d
    }
}

/// Coulomb potential: electron-nucleus attraction plus electron-electron repulsion.
pub fn potential_v(spec: &SystemSpec, c: &Configuration) -> Result<f64> {
    spec.check_arity(c)?;
    let floor = spec.singular_floor;
    let p = c.positions();
    let mut v = 0.0;
    for (j, xj) in p.iter().enumerate() {
        for (l, n) in spec.nuclei.iter().enumerate() {
            let d = (*xj - n.position).norm();
            if d < floor {
                return Err(Error::Singular {
                    what: format!("electron {j} - nucleus {l}"),
                    distance: d,
                    floor,
                });
            }
            v -= n.charge / d;
        }
        for (k, xk) in p.iter().enumerate().skip(j + 1) {
            let d = (*xj - *xk).norm();
            if d < floor {
                return Err(Error::Singular {
                    what: format!("electrons {j} - {k}"),
                    distance: d,
                    floor,
                });
            }
            v += 1.0 / d;
        }
    }
    Ok(v)
}
