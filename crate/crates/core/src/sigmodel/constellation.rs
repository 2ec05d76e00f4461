use alloc::string::{String, ToString};
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;
use crate::prelude::*;

use crate::error::{bail, Error, Result};

/// The built-in modulation formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modulation {
    Qpsk,
    Psk8,
    Qam16,
    Psk16,
}

impl Modulation {
    pub const ALL: [Modulation; 4] = [Modulation::Qpsk, Modulation::Psk8, Modulation::Qam16, Modulation::Psk16];

    pub fn name(self) -> &'static str {
        match self {
            Modulation::Qpsk => "QPSK",
            Modulation::Psk8 => "8PSK",
            Modulation::Qam16 => "16QAM",
            Modulation::Psk16 => "16PSK",
        }
    }

    pub fn constellation(self) -> Constellation {
        let points = match self {
            // (±1±j)/√2
            Modulation::Qpsk => psk(4, PI / 4.0),
            Modulation::Psk8 => psk(8, 0.0),
            Modulation::Psk16 => psk(16, 0.0),
            Modulation::Qam16 => qam16(),
        };
        Constellation {
            name: self.name().to_string(),
            points,
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .flat_map(char::to_uppercase)
            .collect();
        Ok(match key.as_str() {
            "QPSK" | "4PSK" => Modulation::Qpsk,
            "8PSK" | "PSK8" => Modulation::Psk8,
            "16QAM" | "QAM16" => Modulation::Qam16,
            "16PSK" | "PSK16" => Modulation::Psk16,
            _ => bail!(Config, "unknown modulation '{s}' (expected QPSK, 8PSK, 16QAM or 16PSK)"),
        })
    }
}

fn psk(order: usize, offset: f64) -> Vec<Complex64> {
    (0..order)
        .map(|i| Complex64::from_polar(1.0, offset + 2.0 * PI * i as f64 / order as f64))
        .collect()
}

/// 16-QAM on the Gray-mapped {±1, ±3}² grid scaled by 1/√10.
fn qam16() -> Vec<Complex64> {
    const LEVELS: [f64; 4] = [-3.0, -1.0, 3.0, 1.0]; // Gray order 00, 01, 10, 11
    let scale = 1.0 / 10.0f64.sqrt();
    let mut pts = Vec::with_capacity(16);
    for &re in &LEVELS {
        for &im in &LEVELS {
            pts.push(Complex64::new(re * scale, im * scale));
        }
    }
    pts
}

/// A named finite alphabet of unit-average-power complex symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    name: String,
    points: Vec<Complex64>,
}

impl Constellation {
    /// Validates unit average power (within 1e-12) and distinct points.
    pub fn new(name: impl Into<String>, points: Vec<Complex64>) -> Result<Self> {
        let name = name.into();
        if points.is_empty() {
            bail!(Config, "constellation '{name}' has no points");
        }
        let power = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / points.len() as f64;
        if (power - 1.0).abs() > 1e-12 {
            bail!(Config, "constellation '{name}' has average power {power}, expected 1");
        }
        for (i, a) in points.iter().enumerate() {
            if points[i + 1..].iter().any(|b| (a - b).norm() < 1e-9) {
                bail!(Config, "constellation '{name}' repeats point {a}");
            }
        }
        Ok(Self { name, points })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn average_power(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }

    pub fn contains(&self, x: Complex64, tol: f64) -> bool {
        self.points.iter().any(|p| (p - x).norm() <= tol)
    }
}

/// Builds one of the supported constellations by name.
pub fn build_constellation(name: &str) -> Result<Constellation> {
    Ok(name.parse::<Modulation>()?.constellation())
}

/// Ordered set of candidate constellations.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationPool {
    constellations: Vec<Constellation>,
}

impl ModulationPool {
    pub fn new(constellations: Vec<Constellation>) -> Result<Self> {
        if constellations.is_empty() {
            bail!(Config, "modulation pool is empty");
        }
        for (i, c) in constellations.iter().enumerate() {
            if constellations[..i].iter().any(|o| o.name == c.name) {
                bail!(Config, "modulation pool lists '{}' twice", c.name);
            }
        }
        Ok(Self { constellations })
    }

    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        Self::new(names.iter().map(|n| build_constellation(n.as_ref())).collect::<Result<_>>()?)
    }

    pub fn len(&self) -> usize {
        self.constellations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constellations.is_empty()
    }

    pub fn get(&self, index: usize) -> &Constellation {
        &self.constellations[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Constellation> {
        self.constellations.iter()
    }

    pub fn names(&self) -> Vec<&str> {
        self.constellations.iter().map(|c| c.name()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.constellations.iter().position(|c| c.name == name).or_else(|| {
            let m = name.parse::<Modulation>().ok()?;
            self.constellations.iter().position(|c| c.name == m.name())
        })
    }

    /// M_𝒜: total number of (point, constellation) pairs.
    pub fn total_points(&self) -> usize {
        self.constellations.iter().map(Constellation::len).sum()
    }
}
