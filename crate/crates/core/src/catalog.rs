//! Tube section catalogue (outer diameter × wall thickness).

use std::path::Path;

use crate::error::CatalogError;
use crate::model::CrossSection;

/// Environment variable that points at an alternative catalogue file.
pub const CATALOG_ENV: &str = "TRUSSFORGE_CATALOG";

const DEFAULT_CATALOG: &str = include_str!("../data/gb50018_tubes.txt");

/// Relative tolerance used when matching a section against catalogue entries.
const MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogEntry {
    /// Outer diameter, m.
    pub outer_diameter: f64,
    /// Wall thickness, m.
    pub thickness: f64,
}

impl CatalogEntry {
    pub fn section(&self) -> CrossSection {
        CrossSection::tube(self.outer_diameter, self.thickness)
    }

    pub fn area(&self) -> f64 {
        self.section().area()
    }

    pub fn moment_of_inertia(&self) -> f64 {
        self.section().moment_of_inertia()
    }
}

/// Ordered list of admissible tube sections, strictly increasing in (diameter, thickness).
#[derive(Debug, Clone, PartialEq)]
pub struct SectionCatalog {
    entries: Vec<CatalogEntry>,
}

impl SectionCatalog {
    /// Parses the plain-text format: one `d t` pair per line in millimetres, `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, CatalogError> {
        let mut entries = Vec::new();
        let mut last: Option<(f64, f64)> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(CatalogError::Parse {
                    line: line_no,
                    message: format!("expected 'd t', got '{line}'"),
                });
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| CatalogError::Parse {
                    line: line_no,
                    message: format!("'{s}': {e}"),
                })
            };
            let (d, t) = (parse(fields[0])?, parse(fields[1])?);
            if !(d > 0.0 && t > 0.0 && 2.0 * t <= d) {
                return Err(CatalogError::Parse {
                    line: line_no,
                    message: format!("invalid tube d={d} t={t}"),
                });
            }
            if let Some(prev) = last {
                if (d, t) <= prev {
                    return Err(CatalogError::Unordered(line_no));
                }
            }
            last = Some((d, t));
            entries.push(CatalogEntry {
                outer_diameter: d * 1e-3,
                thickness: t * 1e-3,
            });
        }
        if entries.is_empty() {
            return Err(CatalogError::Empty);
        }
        Ok(Self { entries })
    }

    pub fn from_file(path: &Path) -> Result<Self, CatalogError> {
        let text = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// The bundled 61-entry catalogue.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_CATALOG).expect("bundled catalogue is well-formed")
    }

    /// The catalogue named by `TRUSSFORGE_CATALOG`, or the bundled one.
    pub fn from_env() -> Result<Self, CatalogError> {
        match std::env::var_os(CATALOG_ENV) {
            Some(path) => Self::from_file(Path::new(&path)),
            None => Ok(Self::builtin()),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> &CatalogEntry {
        &self.entries[index]
    }

    pub fn section(&self, index: usize) -> CrossSection {
        self.entries[index].section()
    }

    /// Index of the entry matching `section`, if it is a catalogue member.
    pub fn index_of(&self, section: &CrossSection) -> Option<usize> {
        let CrossSection::Tube3D {
            outer_diameter,
            thickness,
        } = *section
        else {
            return None;
        };
        self.entries.iter().position(|e| {
            close(e.outer_diameter, outer_diameter) && close(e.thickness, thickness)
        })
    }

    pub fn contains(&self, section: &CrossSection) -> bool {
        self.index_of(section).is_some()
    }

    /// Smallest-area entry with diameter ≥ `d` and thickness ≥ `t`.
    pub fn round_up(&self, d: f64, t: f64) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, e) in self.entries.iter().enumerate() {
            let fits = e.outer_diameter >= d * (1.0 - MATCH_TOL) && e.thickness >= t * (1.0 - MATCH_TOL);
            if !fits {
                continue;
            }
            let area = e.area();
            if best.is_none_or(|(_, a)| area < a) {
                best = Some((i, area));
            }
        }
        best.map(|(i, _)| i)
    }

    pub fn min_area(&self) -> f64 {
        self.entries.iter().map(CatalogEntry::area).fold(f64::INFINITY, f64::min)
    }

    pub fn max_area(&self) -> f64 {
        self.entries.iter().map(CatalogEntry::area).fold(0.0, f64::max)
    }

    pub fn diameter_range(&self) -> (f64, f64) {
        range(self.entries.iter().map(|e| e.outer_diameter))
    }

    pub fn thickness_range(&self) -> (f64, f64) {
        range(self.entries.iter().map(|e| e.thickness))
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= MATCH_TOL * a.abs().max(b.abs())
}
