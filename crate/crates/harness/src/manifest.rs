use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tickgate_core::clockcore::{Overrides, Regime};
use tickgate_core::gatesim::{named_gate, GateProgram, Method};
use tickgate_core::oscillator::{CycleMode, GridSpec};
use tickgate_core::C;

use crate::error::{HResult, HarnessError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ModelInfo,
    GateRun,
    ScalingSweep,
    BusLane,
    OscillatorCycles,
    BoundsAudit,
    T0Invariance,
}

impl ExperimentKind {
    pub fn slug(self) -> &'static str {
        match self {
            ExperimentKind::ModelInfo => "model_info",
            ExperimentKind::GateRun => "gate_run",
            ExperimentKind::ScalingSweep => "scaling_sweep",
            ExperimentKind::BusLane => "bus_lane",
            ExperimentKind::OscillatorCycles => "oscillator_cycles",
            ExperimentKind::BoundsAudit => "bounds_audit",
            ExperimentKind::T0Invariance => "t0_invariance",
        }
    }
}

fn pi() -> f64 {
    std::f64::consts::PI
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "ModelSection::d_default")]
    pub d: usize,
    #[serde(default = "ModelSection::eps_default")]
    pub eps_bar: f64,
    #[serde(default = "ModelSection::regime_default")]
    pub regime: Regime,
    #[serde(rename = "T0_seconds", default = "ModelSection::t0_default")]
    pub t0_seconds: f64,
    #[serde(default)]
    pub overrides: Overrides,
}

impl ModelSection {
    fn d_default() -> usize {
        256
    }
    fn eps_default() -> f64 {
        0.05
    }
    fn regime_default() -> Regime {
        Regime::Quantum
    }
    fn t0_default() -> f64 {
        1.0
    }
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            d: 256,
            eps_bar: 0.05,
            regime: Regime::Quantum,
            t0_seconds: 1.0,
            overrides: Overrides::default(),
        }
    }
}

/// A user-supplied gate; `im` may be omitted for real matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomGate {
    pub symbol: String,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProgramSection {
    /// Gate symbols cycled to fill the program; presets, custom symbols or `A*B` products.
    #[serde(default = "ProgramSection::gates_default")]
    pub gates: Vec<String>,
    /// Fixed program length; by default every window is filled.
    #[serde(default)]
    pub length: Option<usize>,
    #[serde(default)]
    pub custom: Vec<CustomGate>,
}

impl ProgramSection {
    fn gates_default() -> Vec<String> {
        vec!["X".into()]
    }
}

impl Default for ProgramSection {
    fn default() -> Self {
        ProgramSection { gates: Self::gates_default(), length: None, custom: vec![] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipatorSection {
    #[serde(default = "DissipatorSection::gamma_default")]
    pub gamma_bar0: f64,
    #[serde(default)]
    pub eps_b: Option<f64>,
}

impl DissipatorSection {
    fn gamma_default() -> f64 {
        5.0
    }
}

impl Default for DissipatorSection {
    fn default() -> Self {
        DissipatorSection { gamma_bar0: 5.0, eps_b: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "points_per_T0", default = "GridSection::ppt_default")]
    pub points_per_t0: usize,
    #[serde(rename = "t_cut_T0", default = "GridSection::cut_default")]
    pub t_cut_t0: f64,
    #[serde(rename = "max_t_cut_T0", default = "GridSection::max_cut_default")]
    pub max_t_cut_t0: f64,
    #[serde(default = "GridSection::tail_default")]
    pub tail_tol: f64,
    #[serde(default)]
    pub dt_seconds: Option<f64>,
}

impl GridSection {
    fn ppt_default() -> usize {
        512
    }
    fn cut_default() -> f64 {
        3.0
    }
    fn max_cut_default() -> f64 {
        10.0
    }
    fn tail_default() -> f64 {
        1e-3
    }

    pub fn spec(&self) -> GridSpec<f64> {
        GridSpec {
            points_per_t0: self.points_per_t0,
            t_cut_t0: self.t_cut_t0,
            max_t_cut_t0: self.max_t_cut_t0,
            tail_tol: self.tail_tol,
            dt: self.dt_seconds,
            keep_states: false,
        }
    }
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            points_per_t0: 512,
            t_cut_t0: 3.0,
            max_t_cut_t0: 10.0,
            tail_tol: 1e-3,
            dt_seconds: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "RunSection::method_default")]
    pub method: Method,
    #[serde(default)]
    pub dt_seconds: Option<f64>,
    #[serde(default = "RunSection::refine_default")]
    pub refine_tol: f64,
}

impl RunSection {
    fn method_default() -> Method {
        Method::Splitstep
    }
    fn refine_default() -> f64 {
        tickgate_core::gatesim::DEFAULT_REFINE_TOL
    }
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { method: Method::Splitstep, dt_seconds: None, refine_tol: Self::refine_default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default = "SweepSection::ds_default")]
    pub ds: Vec<usize>,
}

impl SweepSection {
    fn ds_default() -> Vec<usize> {
        vec![64, 128, 256]
    }
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection { ds: Self::ds_default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusSection {
    #[serde(default = "BusSection::lanes_default")]
    pub lanes: Vec<usize>,
    /// Symbols of the stored column, cell 0 first; cell 0 must hold 0.
    #[serde(default = "BusSection::column_default")]
    pub column: Vec<usize>,
    #[serde(default = "BusSection::alphabet_default")]
    pub alphabet: usize,
    #[serde(default = "BusSection::cycles_default")]
    pub cycles: usize,
    #[serde(default = "pi")]
    pub offset_radians: f64,
}

impl BusSection {
    fn lanes_default() -> Vec<usize> {
        vec![1]
    }
    fn column_default() -> Vec<usize> {
        vec![0, 1, 2]
    }
    fn alphabet_default() -> usize {
        2
    }
    fn cycles_default() -> usize {
        2
    }
}

impl Default for BusSection {
    fn default() -> Self {
        BusSection {
            lanes: Self::lanes_default(),
            column: Self::column_default(),
            alphabet: 2,
            cycles: 2,
            offset_radians: pi(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CyclesSection {
    /// L, the number of renewal cycles per trajectory.
    #[serde(default = "CyclesSection::count_default")]
    pub count: usize,
    #[serde(default = "CyclesSection::mode_default")]
    pub mode: CycleMode,
    #[serde(default = "CyclesSection::traj_default")]
    pub trajectories: usize,
    /// ε^gate fed to the t_max solver; defaults to the first cycle's max error.
    #[serde(default)]
    pub eps_gate: Option<f64>,
    #[serde(default = "CyclesSection::c0_default")]
    pub c0: f64,
}

impl CyclesSection {
    fn count_default() -> usize {
        10
    }
    fn mode_default() -> CycleMode {
        CycleMode::Montecarlo
    }
    fn traj_default() -> usize {
        1
    }
    fn c0_default() -> f64 {
        0.09
    }
}

impl Default for CyclesSection {
    fn default() -> Self {
        CyclesSection { count: 10, mode: CycleMode::Montecarlo, trajectories: 1, eps_gate: None, c0: 0.09 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    /// Report files or directories (scanned for *.json).
    #[serde(default)]
    pub reports: Vec<PathBuf>,
    #[serde(default = "CyclesSection::c0_default")]
    pub c0: f64,
}

impl Default for BoundsSection {
    fn default() -> Self {
        BoundsSection { reports: vec![], c0: 0.09 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvarianceSection {
    #[serde(default = "InvarianceSection::scale_default")]
    pub scale: f64,
    #[serde(default = "InvarianceSection::tol_default")]
    pub tol: f64,
}

impl InvarianceSection {
    fn scale_default() -> f64 {
        2.0
    }
    fn tol_default() -> f64 {
        1e-10
    }
}

impl Default for InvarianceSection {
    fn default() -> Self {
        InvarianceSection { scale: 2.0, tol: 1e-10 }
    }
}

fn out_default() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "out_default")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub program: ProgramSection,
    #[serde(default)]
    pub dissipator: DissipatorSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub bus: BusSection,
    #[serde(default)]
    pub cycles: CyclesSection,
    #[serde(default)]
    pub bounds: BoundsSection,
    #[serde(default)]
    pub invariance: InvarianceSection,
}

impl ExperimentManifest {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentManifest {
            kind,
            seed: 0,
            output_dir: out_default(),
            model: ModelSection::default(),
            program: ProgramSection::default(),
            dissipator: DissipatorSection::default(),
            grid: GridSection::default(),
            run: RunSection::default(),
            sweep: SweepSection::default(),
            bus: BusSection::default(),
            cycles: CyclesSection::default(),
            bounds: BoundsSection::default(),
            invariance: InvarianceSection::default(),
        }
    }

    pub fn from_toml_str(text: &str, origin: &str) -> HResult<Self> {
        let m: ExperimentManifest =
            toml::from_str(text).map_err(|e| HarnessError::config(origin, e.message().to_string() + &span_hint(text, e.span())))?;
        m.validate()?;
        Ok(m)
    }

    pub fn from_path(path: &Path) -> HResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Io { path: path.display().to_string(), source: e })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    /// SHA-256 of the canonical JSON form, with the output directory blanked
    /// so that relocating artifacts does not change provenance.
    pub fn hash(&self) -> String {
        let mut m = self.clone();
        m.output_dir = PathBuf::new();
        let bytes = serde_json::to_vec(&m).expect("manifest serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> HResult<()> {
        if self.seed > i64::MAX as u64 {
            return Err(HarnessError::config("seed", "must fit in a signed 64-bit integer"));
        }
        let m = &self.model;
        if m.d < 8 {
            return Err(HarnessError::config("model.d", format!("need d >= 8, got {}", m.d)));
        }
        if !(m.eps_bar > 0.0 && m.eps_bar < 1.0 / 6.0) {
            return Err(HarnessError::config("model.eps_bar", "must lie in (0, 1/6)"));
        }
        if !(m.t0_seconds > 0.0 && m.t0_seconds.is_finite()) {
            return Err(HarnessError::config("model.T0_seconds", "must be positive"));
        }
        if self.program.gates.is_empty() {
            return Err(HarnessError::config("program.gates", "must name at least one gate"));
        }
        for (i, g) in self.program.custom.iter().enumerate() {
            let n = g.re.len();
            if n == 0 || g.re.iter().any(|r| r.len() != n) {
                return Err(HarnessError::config(format!("program.custom[{i}].re"), "must be a non-empty square matrix"));
            }
            if !g.im.is_empty() && (g.im.len() != n || g.im.iter().any(|r| r.len() != n)) {
                return Err(HarnessError::config(format!("program.custom[{i}].im"), "must match the shape of re"));
            }
        }
        for g in &self.program.gates {
            self.resolve_gate(g)?;
        }
        if !(self.dissipator.gamma_bar0 >= 0.0) {
            return Err(HarnessError::config("dissipator.gamma_bar0", "must be non-negative"));
        }
        if matches!(self.dissipator.eps_b, Some(e) if !(e >= 0.0)) {
            return Err(HarnessError::config("dissipator.eps_b", "must be non-negative"));
        }
        let g = &self.grid;
        if g.points_per_t0 == 0 {
            return Err(HarnessError::config("grid.points_per_T0", "must be positive"));
        }
        if !(g.t_cut_t0 > 0.0) || g.max_t_cut_t0 < g.t_cut_t0 {
            return Err(HarnessError::config("grid.t_cut_T0", "need 0 < t_cut_T0 <= max_t_cut_T0"));
        }
        if !(g.tail_tol > 0.0 && g.tail_tol < 1.0) {
            return Err(HarnessError::config("grid.tail_tol", "must lie in (0, 1)"));
        }
        if matches!(g.dt_seconds, Some(x) if !(x > 0.0)) {
            return Err(HarnessError::config("grid.dt_seconds", "must be positive"));
        }
        if matches!(self.run.dt_seconds, Some(x) if !(x > 0.0)) {
            return Err(HarnessError::config("run.dt_seconds", "must be positive"));
        }
        if !(self.run.refine_tol > 0.0) {
            return Err(HarnessError::config("run.refine_tol", "must be positive"));
        }
        if self.kind == ExperimentKind::ScalingSweep {
            if self.sweep.ds.is_empty() || self.sweep.ds.windows(2).any(|w| w[1] <= w[0]) {
                return Err(HarnessError::config("sweep.ds", "must be non-empty and strictly ascending"));
            }
            if let Some(&d) = self.sweep.ds.iter().find(|&&d| d < 8) {
                return Err(HarnessError::config("sweep.ds", format!("need d >= 8, got {d}")));
            }
        }
        if self.kind == ExperimentKind::BusLane {
            if m.regime != Regime::Classical {
                return Err(HarnessError::config("model.regime", "bus lanes run on the classical schedule"));
            }
            if self.bus.lanes.is_empty() {
                return Err(HarnessError::config("bus.lanes", "must list at least one lane"));
            }
        }
        if self.kind == ExperimentKind::OscillatorCycles {
            if self.cycles.count == 0 {
                return Err(HarnessError::config("cycles.count", "need at least one cycle"));
            }
            if self.cycles.trajectories == 0 {
                return Err(HarnessError::config("cycles.trajectories", "need at least one trajectory"));
            }
        }
        if self.kind == ExperimentKind::T0Invariance && !(self.invariance.scale > 0.0) {
            return Err(HarnessError::config("invariance.scale", "must be positive"));
        }
        if !(self.cycles.c0 > 0.0) || !(self.bounds.c0 > 0.0) {
            return Err(HarnessError::config("cycles.c0", "c0 must be positive"));
        }
        Ok(())
    }

    pub fn resolve_gate(&self, name: &str) -> HResult<DMatrix<C<f64>>> {
        if let Some(g) = self.program.custom.iter().find(|g| g.symbol == name) {
            let n = g.re.len();
            return Ok(DMatrix::from_fn(n, n, |i, j| {
                let im = g.im.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0.0);
                C::new(g.re[i][j], im)
            }));
        }
        named_gate::<f64>(name).map_err(|e| HarnessError::config("program.gates", e.to_string()))
    }

    /// Program of `len` gates (or `program.length` when set) cycling through the symbols.
    pub fn build_program(&self, len: usize) -> HResult<GateProgram<f64>> {
        let len = self.program.length.unwrap_or(len);
        let names = &self.program.gates;
        let seq: HResult<Vec<(String, DMatrix<C<f64>>)>> = (0..len)
            .map(|i| {
                let s = &names[i % names.len()];
                Ok((s.clone(), self.resolve_gate(s)?))
            })
            .collect();
        let seq = seq?;
        let d_l = match seq.first() {
            Some((_, u)) => u.nrows(),
            None => self.resolve_gate(&names[0])?.nrows(),
        };
        if seq.is_empty() {
            return Ok(GateProgram::empty(d_l));
        }
        Ok(GateProgram::from_unitaries(&seq, d_l)?)
    }
}

fn span_hint(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    match span {
        Some(r) => {
            let line = text[..r.start.min(text.len())].matches('\n').count() + 1;
            format!(" (line {line})")
        }
        None => String::new(),
    }
}
