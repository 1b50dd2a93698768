use super::{solve_floquet_state, FloquetError, FloquetState, SolverOptions, SystemParams};

/// Minimum overlap between consecutive points of a branch.
pub const CONTINUITY_OVERLAP: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BranchLabel {
    NormalUpper,
    NormalLower,
    BifurcatedPlus,
    BifurcatedMinus,
}

impl BranchLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            BranchLabel::NormalUpper => "normal_upper",
            BranchLabel::NormalLower => "normal_lower",
            BranchLabel::BifurcatedPlus => "bifurcated_plus",
            BranchLabel::BifurcatedMinus => "bifurcated_minus",
        }
    }

    pub fn is_bifurcated(&self) -> bool {
        matches!(self, BranchLabel::BifurcatedPlus | BranchLabel::BifurcatedMinus)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    pub a_over_omega: f64,
    pub state: FloquetState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumBranch {
    pub points: Vec<BranchPoint>,
    pub label: BranchLabel,
    /// `A/ω` where a bifurcated branch was first found.
    pub birth: Option<f64>,
}

impl SpectrumBranch {
    /// Grid value past which the branch could not be continued.
    pub fn end(&self) -> Option<f64> {
        self.points.last().map(|p| p.a_over_omega)
    }
}

/// Follow a state along `grid`, each solve seeded with the previous
/// solution. The branch stops at the first point where the solver fails or
/// the new state no longer overlaps the previous one.
pub fn continue_branch(
    template: &SystemParams,
    grid: &[f64],
    seed: &FloquetState,
    label: BranchLabel,
    opts: &SolverOptions,
) -> Result<SpectrumBranch, FloquetError> {
    if grid.is_empty() {
        return Err(FloquetError::Precondition("empty continuation grid".into()));
    }
    let increasing = grid.windows(2).all(|w| w[1] > w[0]);
    let decreasing = grid.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) || grid.iter().any(|g| !g.is_finite()) {
        return Err(FloquetError::Precondition("continuation grid must be strictly monotone".into()));
    }
    let first = template.with_a_over_omega(grid[0]);
    let start = solve_floquet_state(&first, seed, opts)
        .map_err(|e| FloquetError::Precondition(format!("seed does not converge at the first grid point: {e}")))?;
    if start.overlap(seed) < CONTINUITY_OVERLAP {
        return Err(FloquetError::Precondition("seed is not close to a solution at the first grid point".into()));
    }
    let mut points = vec![BranchPoint { a_over_omega: grid[0], state: start }];
    for &x in &grid[1..] {
        let prev = &points.last().unwrap().state;
        let p = template.with_a_over_omega(x);
        match solve_floquet_state(&p, prev, opts) {
            Ok(s) if s.overlap(prev) >= CONTINUITY_OVERLAP => points.push(BranchPoint { a_over_omega: x, state: s }),
            _ => break,
        }
    }
    let birth = label.is_bifurcated().then_some(grid[0]);
    Ok(SpectrumBranch { points, label, birth })
}
