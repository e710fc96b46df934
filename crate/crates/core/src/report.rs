//! Resource accounting for a compiled sequence.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dilation::ANGLE_TOL;
use crate::error::Result;
use crate::linalg::spectral_norm;
use crate::sweep::{CompilationResult, SweepOutcome};
use crate::verify::encoded_block;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteResources {
    pub vertex: usize,
    pub m: usize,
    pub n: usize,
    pub trivial: bool,
    /// Distinct rotation angles of the emitted core (none for a trivial core).
    pub angles: Vec<f64>,
    pub condition_number: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub status: String,
    pub gamma: f64,
    pub order: Vec<usize>,
    /// Peak number of qudits held by live internal bonds during the sweep.
    pub peak_coupling_qudits: usize,
    /// One flag per nontrivial core.
    pub flag_count_dedicated: usize,
    /// A single flag measured and reset after every core.
    pub flag_count_sequential: usize,
    pub distinct_angles_total: usize,
    pub sites: Vec<SiteResources>,
    /// `‖B‖₂² = ‖H‖₂²/Γ²`, when the dense block was computed.
    pub success_prob_bound: Option<f64>,
    /// `Σ max(m, n)·m·n` over the site SVDs.
    pub classical_time_estimate: u64,
}

impl ResourceReport {
    pub fn from_result(r: &CompilationResult) -> Self {
        let sites: Vec<SiteResources> = r
            .sites
            .iter()
            .map(|s| SiteResources {
                vertex: s.vertex,
                m: s.m,
                n: s.n,
                trivial: s.trivial,
                angles: if s.trivial { Vec::new() } else { s.angles.iter().map(|a| a.0).collect() },
                condition_number: s.condition_number,
            })
            .collect();
        let mut all: Vec<f64> = Vec::new();
        for theta in sites.iter().flat_map(|s| &s.angles) {
            if !all.iter().any(|a| (a - theta).abs() <= ANGLE_TOL) {
                all.push(*theta);
            }
        }
        let dedicated = sites.iter().filter(|s| !s.trivial).count();
        Self {
            status: "encoded".into(),
            gamma: r.gamma,
            order: r.order.clone(),
            peak_coupling_qudits: r.peak_coupling_qudits(),
            flag_count_dedicated: dedicated,
            flag_count_sequential: dedicated.min(1),
            distinct_angles_total: all.len(),
            classical_time_estimate: r.sites.iter().map(|s| (s.m.max(s.n) * s.m * s.n) as u64).sum(),
            sites,
            success_prob_bound: None,
        }
    }

    /// Like [`ResourceReport::from_result`], also computing the success
    /// bound from the dense encoded block.
    pub fn with_success_bound(r: &CompilationResult, limit: usize) -> Result<Self> {
        let mut report = Self::from_result(r);
        let b = encoded_block(r, limit)?;
        report.success_prob_bound = Some(spectral_norm(&b.matrix).powi(2));
        Ok(report)
    }

    pub fn from_outcome(outcome: &SweepOutcome) -> Self {
        match outcome {
            SweepOutcome::Encoded(r) => Self::from_result(r),
            SweepOutcome::ZeroOperator { order, .. } => Self {
                status: "zero_operator".into(),
                gamma: 0.0,
                order: order.clone(),
                peak_coupling_qudits: 0,
                flag_count_dedicated: 0,
                flag_count_sequential: 0,
                distinct_angles_total: 0,
                sites: Vec::new(),
                success_prob_bound: None,
                classical_time_estimate: 0,
            },
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "status                  {}", self.status);
        let _ = writeln!(s, "gamma                   {}", self.gamma);
        let _ = writeln!(s, "order                   {:?}", self.order);
        let _ = writeln!(s, "peak coupling qudits    {}", self.peak_coupling_qudits);
        let _ = writeln!(s, "flags (dedicated)       {}", self.flag_count_dedicated);
        let _ = writeln!(s, "flags (sequential)      {}", self.flag_count_sequential);
        let _ = writeln!(s, "distinct angles         {}", self.distinct_angles_total);
        if let Some(b) = self.success_prob_bound {
            let _ = writeln!(s, "success bound           {b}");
        }
        let _ = writeln!(s, "classical SVD cost      {}", self.classical_time_estimate);
        for site in &self.sites {
            let cond = site.condition_number.map_or("inf".to_string(), |c| format!("{c:.6e}"));
            let _ = writeln!(
                s,
                "  vertex {:>3}  {}x{}  {}  angles {}  cond {}",
                site.vertex,
                site.m,
                site.n,
                if site.trivial { "trivial" } else { "dilated" },
                site.angles.len(),
                cond
            );
        }
        s
    }
}
