//! On-disk family envelope shared by `family` (writer) and `verify` (reader).

use serde::{Deserialize, Serialize};

use pants_atlas::curve_model::{CurveCode, CyclicInterval};
use pants_atlas::genus::ConcatCode;
use pants_atlas::polygon::ChordGraph;
use pants_atlas::unlabelled_sphere::IndexFamily;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilyFile {
    /// Curves on the sphere with labelled punctures.
    LabelledSphere { n: u32, family: Vec<CurveCode> },
    /// Index set inducing the cyclic curves `γ_{i,j}`; verified against
    /// pants types.
    IndexSet { n: u32, family: IndexFamily },
    /// Explicit cyclic curves; verified against unlabelled decomposition types.
    Cyclic { n: u32, family: Vec<CyclicInterval> },
    /// Edge set on the polygon; verified against triangle types.
    TriangleCover { n: u32, family: ChordGraph },
    /// Edge set on the polygon; verified against triangulation types.
    Triangulation { n: u32, family: ChordGraph },
    Genus1 { m: u32, family: Vec<ConcatCode> },
    Genus2 { m: u32, family: Vec<ConcatCode> },
    /// Cut curves plus sphere codes on the `2g` cut punctures.
    Closed { g: u32, cut_curves: u32, family: Vec<CurveCode> },
}

impl FamilyFile {
    pub fn size(&self) -> usize {
        match self {
            FamilyFile::LabelledSphere { family, .. } => family.len(),
            FamilyFile::IndexSet { family, .. } => family.family_size(),
            FamilyFile::Cyclic { family, .. } => family.len(),
            FamilyFile::TriangleCover { family, .. } | FamilyFile::Triangulation { family, .. } => {
                family.edges().len()
            }
            FamilyFile::Genus1 { family, .. } | FamilyFile::Genus2 { family, .. } => family.len(),
            FamilyFile::Closed { cut_curves, family, .. } => *cut_curves as usize + family.len(),
        }
    }
}
