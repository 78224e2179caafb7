//! Reduced-order models: POD bases, rank selection, DEIM and the
//! projected systems.

pub mod deim;
pub mod pod;
pub mod rank;
pub mod svd;
pub mod system;

pub use deim::{deim_indices, DeimOperator};
pub use pod::{compute_pod_basis, projection_residual, PodBasis};
pub use rank::{cumulative_ratios, select_rank, RankRule, RankSelection};
pub use svd::{compute_svd_spectrum, SvdSpectrum};
pub use system::{assemble_rom, integrate_rom, integrate_rom_partial, DeimLift, ReducedStepper, RomMode, RomSystem, RomTrajectory};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::GksParams;
use crate::linear::build_linear_operator;
use crate::snapshots::SnapshotMatrix;

/// A POD basis with an optional DEIM operator, ready to be assembled for
/// any `gamma` on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedModel {
    pub basis: PodBasis,
    pub deim: Option<DeimOperator>,
}

/// How the DEIM dimension is chosen when building a [`ReducedModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeimSize {
    /// No DEIM operator.
    None,
    /// Same dimension as the POD rank.
    #[default]
    MatchRank,
    /// The POD rank rule applied to the `f`-snapshot spectrum.
    Threshold,
    Fixed(usize),
}

impl ReducedModel {
    /// POD basis from `u`-snapshots and, unless disabled, a DEIM operator
    /// from the leading left singular vectors of the `f`-snapshots.
    pub fn build(
        states: &SnapshotMatrix,
        forcing: Option<&SnapshotMatrix>,
        rule: RankRule,
        deim_size: DeimSize,
        execution: Execution,
    ) -> Result<Self> {
        let basis = compute_pod_basis(&states.data, rule, execution)?;
        let deim = match (deim_size, forcing) {
            (DeimSize::None, _) => None,
            (_, None) => return Err(Error::invalid("DEIM requested without f-snapshots")),
            (size, Some(f)) => {
                if f.num_rows() != states.num_rows() {
                    return Err(Error::DimensionMismatch("u- and f-snapshots have different M".into()));
                }
                let spectrum = compute_svd_spectrum(&f.data, execution)?;
                let n = match size {
                    DeimSize::Fixed(n) => n,
                    DeimSize::Threshold => select_rank(&spectrum.singular_values, rule)?.rank,
                    _ => basis.rank(),
                };
                let y = PodBasis::truncate(&spectrum, n)?;
                Some(DeimOperator::new(y.vectors)?)
            }
        };
        Ok(ReducedModel { basis, deim })
    }

    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    pub fn assemble(&self, params: &GksParams, mode: RomMode) -> Result<RomSystem> {
        let op = build_linear_operator(params)?;
        let deim = match mode {
            RomMode::Galerkin => None,
            RomMode::Deim => Some(
                self.deim
                    .as_ref()
                    .ok_or_else(|| Error::invalid("model has no DEIM operator"))?,
            ),
        };
        assemble_rom(&op, &self.basis, deim)
    }
}
