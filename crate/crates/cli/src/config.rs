//! Run configuration: one TOML document per run.

use serde::{Deserialize, Serialize};
use znd_core::atlas::{LocateControl, RefineControl, TraceControl, VerdictControl};
use znd_core::evans1d::EvansControls;
use znd_core::profile::{classical_to_paper, ChemParams, GridControl, ScalingClassical};

use crate::CliError;

/// Classical overdrive parametrisation together with the rate constant.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalBlock {
    pub overdrive: f64,
    pub activation_classical: f64,
    pub heat_classical: f64,
    pub gamma: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvansSection {
    pub z_min: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Rescale `k` so that the half-reaction length is 1.
    pub unit_half_length: bool,
}

impl Default for EvansSection {
    fn default() -> Self {
        let d = EvansControls::default();
        Self {
            z_min: d.z_min,
            rtol: d.rtol,
            atol: d.atol,
            max_steps: d.max_steps,
            unit_half_length: false,
        }
    }
}

impl EvansSection {
    pub fn controls(&self) -> EvansControls {
        EvansControls {
            z_min: self.z_min,
            rtol: self.rtol,
            atol: self.atol,
            max_steps: self.max_steps,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileSection {
    pub z_min: f64,
    pub intervals: usize,
}

impl Default for ProfileSection {
    fn default() -> Self {
        Self {
            z_min: 1e-12,
            intervals: GridControl::default().intervals,
        }
    }
}

/// Rectangular lambda grid, inclusive of both ends.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaGrid {
    pub re: [f64; 2],
    pub im: [f64; 2],
    pub n_re: usize,
    pub n_im: usize,
}

impl LambdaGrid {
    pub fn points(&self) -> Vec<[f64; 2]> {
        let lin = |r: [f64; 2], n: usize, k: usize| {
            if n <= 1 {
                r[0]
            } else {
                r[0] + (r[1] - r[0]) * k as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(self.n_re * self.n_im);
        for i in 0..self.n_im {
            for r in 0..self.n_re {
                out.push([lin(self.re, self.n_re, r), lin(self.im, self.n_im, i)]);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Evans1dSection {
    pub lambda: Vec<[f64; 2]>,
    pub grid: Option<LambdaGrid>,
}

impl Evans1dSection {
    pub fn points(&self) -> Vec<[f64; 2]> {
        let mut p = self.lambda.clone();
        if let Some(g) = &self.grid {
            p.extend(g.points());
        }
        p
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RootsSection {
    /// Half-disk radius; ignored when `lo`/`hi` are given.
    pub radius: f64,
    pub exclusion: f64,
    pub lo: Option<[f64; 2]>,
    pub hi: Option<[f64; 2]>,
    pub target_box: f64,
    pub max_boxes: usize,
    pub newton_tol: f64,
}

impl Default for RootsSection {
    fn default() -> Self {
        let d = LocateControl::default();
        Self {
            radius: 10.0,
            exclusion: 1e-2,
            lo: None,
            hi: None,
            target_box: d.target_box,
            max_boxes: d.max_boxes,
            newton_tol: d.newton_tol,
        }
    }
}

impl RootsSection {
    pub fn control(&self) -> LocateControl {
        LocateControl {
            target_box: self.target_box,
            max_boxes: self.max_boxes,
            newton_tol: self.newton_tol,
            ..LocateControl::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerdictSection {
    pub radius: f64,
    pub exclusion: f64,
    pub max_phase_step: f64,
}

impl Default for VerdictSection {
    fn default() -> Self {
        let d = VerdictControl::default();
        Self {
            radius: d.radius,
            exclusion: d.exclusion,
            max_phase_step: d.refine.max_step,
        }
    }
}

impl VerdictSection {
    pub fn control(&self) -> VerdictControl {
        VerdictControl {
            radius: self.radius,
            exclusion: self.exclusion,
            refine: RefineControl {
                max_step: self.max_phase_step,
                ..RefineControl::default()
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundarySection {
    pub q: Vec<f64>,
    pub e_lo: f64,
    pub e_hi: f64,
    pub growth: f64,
    pub tol: f64,
    pub radius: f64,
    pub exclusion: f64,
}

impl Default for BoundarySection {
    fn default() -> Self {
        let d = TraceControl::default();
        Self {
            q: Vec::new(),
            e_lo: d.e_lo,
            e_hi: d.e_hi,
            growth: d.growth,
            tol: d.tol,
            radius: d.radius,
            exclusion: d.exclusion,
        }
    }
}

impl BoundarySection {
    pub fn control(&self) -> TraceControl {
        TraceControl {
            e_lo: self.e_lo,
            e_hi: self.e_hi,
            growth: self.growth,
            tol: self.tol,
            radius: self.radius,
            exclusion: self.exclusion,
            ..TraceControl::default()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Evans2dSection {
    pub lambda: Vec<[f64; 2]>,
    pub grid: Option<LambdaGrid>,
    pub xi: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HifreqSection {
    pub zeta: [f64; 2],
    pub h: Vec<f64>,
    /// Number of equispaced profile points in the symbol table.
    pub symbol_points: usize,
    pub n_scan: usize,
}

impl Default for HifreqSection {
    fn default() -> Self {
        Self {
            zeta: [1.0, 0.5],
            h: vec![0.1, 0.05, 0.025, 0.0125],
            symbol_points: 11,
            n_scan: 2000,
        }
    }
}

fn geometric(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| a * (b / a).powf(k as f64 / (n - 1) as f64))
        .collect()
}

fn dyadic(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 2f64.powi(-k)).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OscintSection {
    /// Ascending polynomial coefficients of the analytic symbol.
    pub symbol: Vec<f64>,
    pub x: Vec<f64>,
    pub h: Vec<f64>,
    pub gaussian_h: Vec<f64>,
    pub gevrey_s: Vec<f64>,
    pub gevrey_x: f64,
    pub gevrey_h: Vec<f64>,
    pub verdict_l: Vec<f64>,
    pub verdict_h: Vec<f64>,
    pub verdict_nx: usize,
}

impl Default for OscintSection {
    fn default() -> Self {
        Self {
            symbol: vec![1.0],
            x: vec![0.5, 2.0],
            h: (0..200).map(|k| 1.0 / (10.0 + k as f64)).collect(),
            gaussian_h: vec![0.05, 0.1, 0.2],
            gevrey_s: vec![1.5, 2.0, 3.0],
            gevrey_x: 2.0,
            gevrey_h: geometric(1e-2, 1e-10, 25),
            verdict_l: vec![0.5, 2.0],
            verdict_h: dyadic(4, 10),
            verdict_nx: 64,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RiccatiSection {
    pub h: Vec<f64>,
    pub iterations: usize,
    pub degree: usize,
    /// Ascending polynomial coefficients of the scalar forcing.
    pub theta: Vec<f64>,
    pub scalar_h: f64,
    pub scalar_l: f64,
    pub scalar_points: usize,
    /// `None` selects the value making `alpha(L) = 0`.
    pub alpha0: Option<[f64; 2]>,
}

impl Default for RiccatiSection {
    fn default() -> Self {
        Self {
            h: dyadic(3, 10),
            iterations: 3,
            degree: 32,
            theta: vec![1.0],
            scalar_h: 0.05,
            scalar_l: 0.5,
            scalar_points: 64,
            alpha0: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: Option<ChemParams>,
    pub classical: Option<ClassicalBlock>,
    #[serde(default)]
    pub evans: EvansSection,
    #[serde(default)]
    pub profile: ProfileSection,
    #[serde(default)]
    pub evans1d: Evans1dSection,
    #[serde(default)]
    pub roots: RootsSection,
    #[serde(default)]
    pub verdict: VerdictSection,
    #[serde(default)]
    pub boundary: BoundarySection,
    #[serde(default)]
    pub evans2d: Evans2dSection,
    #[serde(default)]
    pub hifreq: HifreqSection,
    #[serde(default)]
    pub oscint: OscintSection,
    #[serde(default)]
    pub riccati: RiccatiSection,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Validation(e.to_string()))?;
        cfg.check_tolerances()?;
        Ok(cfg)
    }

    fn check_tolerances(&self) -> Result<(), CliError> {
        let positive = [
            ("evans.z_min", self.evans.z_min),
            ("evans.rtol", self.evans.rtol),
            ("evans.atol", self.evans.atol),
            ("profile.z_min", self.profile.z_min),
            ("roots.target_box", self.roots.target_box),
            ("roots.newton_tol", self.roots.newton_tol),
            ("verdict.radius", self.verdict.radius),
            ("verdict.exclusion", self.verdict.exclusion),
            ("boundary.tol", self.boundary.tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(CliError::Validation(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Paper-scaling parameters; exactly one scaling block must be present.
    pub fn chem_params(&self) -> Result<ChemParams, CliError> {
        let p = match (&self.params, &self.classical) {
            (Some(p), None) => *p,
            (None, Some(c)) => classical_to_paper(
                &ScalingClassical {
                    overdrive: c.overdrive,
                    activation_classical: c.activation_classical,
                    heat_classical: c.heat_classical,
                    gamma: c.gamma,
                },
                c.rate,
            )
            .map_err(|e| CliError::Validation(e.to_string()))?,
            (Some(_), Some(_)) => {
                return Err(CliError::Validation(
                    "exactly one of [params] and [classical] may be given".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Validation(
                    "a [params] or [classical] block is required".into(),
                ))
            }
        };
        p.validate().map_err(|e| CliError::Validation(e.to_string()))?;
        Ok(p)
    }

    /// Parameters passed to the Evans evaluators.
    pub fn evans_params(&self) -> Result<ChemParams, CliError> {
        let p = self.chem_params()?;
        if self.evans.unit_half_length {
            p.with_unit_half_length().map_err(CliError::from)
        } else {
            Ok(p)
        }
    }
}
