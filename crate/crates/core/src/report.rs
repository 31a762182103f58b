//! Single-state metrics report.

use serde::Serialize;

use crate::error::Result;
use crate::measures::{
    chsh_max, concurrence, conditional_renyi, conditional_tsallis, entropic_violation, renyi,
    von_neumann,
};
use crate::plane::{classify_entropic, PlanePoint, RegionLabel};
use crate::qstate::{linear_entropy, purity, DensityMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateReport {
    pub purity: f64,
    pub linear_entropy: f64,
    pub von_neumann: f64,
    pub renyi_2: f64,
    pub conditional_renyi_2: f64,
    pub conditional_tsallis_2: f64,
    pub concurrence: f64,
    pub gap_a: f64,
    pub gap_b: f64,
    pub violates_a: bool,
    pub violates_b: bool,
    pub violates_any: bool,
    pub chsh_max: f64,
    pub chsh_violation: bool,
    pub region: RegionLabel,
}

impl StateReport {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        let c = concurrence(rho).concurrence;
        let s = linear_entropy(rho);
        let v = entropic_violation(rho);
        let chsh = chsh_max(rho);
        Ok(Self {
            purity: purity(rho),
            linear_entropy: s,
            von_neumann: von_neumann(rho),
            renyi_2: renyi(rho, 2.0)?.value,
            conditional_renyi_2: conditional_renyi(rho, 2.0)?,
            conditional_tsallis_2: conditional_tsallis(rho, 2.0)?,
            concurrence: c,
            gap_a: v.gap_a,
            gap_b: v.gap_b,
            violates_a: v.violates_a,
            violates_b: v.violates_b,
            violates_any: v.violates_any,
            chsh_max: chsh,
            chsh_violation: chsh > 2.0,
            region: classify_entropic(PlanePoint::new(c, s)),
        })
    }
}
