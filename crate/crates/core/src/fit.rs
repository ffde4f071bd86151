//! Dynamic-time-warping distance and grid-search fitting of the diffusion
//! parameters (α, γ) to observed growth curves.
//!
//! Each ensemble grid cell is represented by the awakening-to-peak segment
//! of its mean curve, normalized by its own peak volume; an observed event
//! curve gets the same treatment, and the cells with the smallest DTW
//! distance to the event segment are the fitted parameter candidates.

use thiserror::Error;

use crate::burst::{normalized_growth_segment, BurstError, CumulativeCurve};
use crate::emotion::Emotion;
use crate::sim::EnsembleStats;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("sequence is empty")]
    EmptySequence,
    #[error("sequence contains a non-finite value")]
    NonFinite,
    #[error("top-k must be at least 1")]
    ZeroK,
    #[error("no grid cell produced a curve with burst markers")]
    AllCellsDegenerate,
    #[error("no candidates to summarize")]
    NoCandidates,
    #[error(transparent)]
    Markers(#[from] BurstError),
}

/// Alignment cost between two sequences: the cheapest monotone,
/// boundary-aligned warping path under local cost |a_i − b_j|, with no
/// window constraint. Zero iff the sequences are equal up to repeats.
pub fn dtw_distance(a: &[f64], b: &[f64]) -> Result<f64, FitError> {
    if a.is_empty() || b.is_empty() {
        return Err(FitError::EmptySequence);
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(FitError::NonFinite);
    }
    // dp[j] = best cost ending at (current i, j); rolled row by row.
    let mut prev = vec![f64::INFINITY; b.len() + 1];
    let mut curr = vec![f64::INFINITY; b.len() + 1];
    prev[0] = 0.0;
    for &av in a {
        curr[0] = f64::INFINITY;
        for (j, &bv) in b.iter().enumerate() {
            let step = prev[j].min(prev[j + 1]).min(curr[j]);
            curr[j + 1] = (av - bv).abs() + step;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[b.len()])
}

/// One fitted parameter pair and its distance to the event segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitCandidate {
    pub alpha: f64,
    pub gamma: f64,
    pub dtw_distance: f64,
    /// Runs behind the compared ensemble mean curve.
    pub runs_used: usize,
}

struct GridCell {
    alpha: f64,
    gamma: f64,
    n_runs: usize,
    /// Normalized awakening-to-peak segment of the cell's mean curve.
    segment: Vec<f64>,
}

/// Precomputed comparison segments for every usable ensemble cell.
pub struct FitGrid {
    cells: Vec<GridCell>,
    excluded_cells: usize,
    total_cells: usize,
}

impl FitGrid {
    pub fn usable_cells(&self) -> usize {
        self.cells.len()
    }

    /// Cells whose mean curve had no detectable burst (flat γ=0 columns,
    /// instant saturation, too-short runs).
    pub fn excluded_cells(&self) -> usize {
        self.excluded_cells
    }

    pub fn total_cells(&self) -> usize {
        self.total_cells
    }
}

/// Extracts the normalized growth segment of every ensemble cell's mean
/// curve. Cells without detectable markers are dropped and counted; errors
/// only when nothing usable remains.
pub fn build_fit_grid(stats: &EnsembleStats) -> Result<FitGrid, FitError> {
    let mut cells = Vec::new();
    let mut excluded = 0usize;
    for cell in &stats.cells {
        let segment = CumulativeCurve::from_ys(&cell.mean_curve)
            .and_then(|c| normalized_growth_segment(&c));
        match segment {
            Ok(segment) => cells.push(GridCell {
                alpha: cell.alpha,
                gamma: cell.gamma,
                n_runs: cell.n_runs,
                segment,
            }),
            Err(_) => excluded += 1,
        }
    }
    if cells.is_empty() {
        return Err(FitError::AllCellsDegenerate);
    }
    Ok(FitGrid {
        cells,
        excluded_cells: excluded,
        total_cells: stats.cells.len(),
    })
}

/// Result of fitting one event against a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FitEntry {
    /// Ascending by (distance, α, γ); at most k, at most the usable grid.
    pub candidates: Vec<FitCandidate>,
    pub excluded_cells: usize,
}

/// Fits a pre-normalized growth segment (last element 1) against every
/// usable cell and keeps the k smallest distances.
pub fn fit_segment(grid: &FitGrid, segment: &[f64], k: usize) -> Result<FitEntry, FitError> {
    if k == 0 {
        return Err(FitError::ZeroK);
    }
    if segment.is_empty() {
        return Err(FitError::EmptySequence);
    }
    let mut candidates: Vec<FitCandidate> = grid
        .cells
        .iter()
        .map(|cell| {
            Ok(FitCandidate {
                alpha: cell.alpha,
                gamma: cell.gamma,
                dtw_distance: dtw_distance(segment, &cell.segment)?,
                runs_used: cell.n_runs,
            })
        })
        .collect::<Result<_, FitError>>()?;
    candidates.sort_by(|a, b| {
        (a.dtw_distance, a.alpha, a.gamma)
            .partial_cmp(&(b.dtw_distance, b.alpha, b.gamma))
            .expect("distances and grid values are finite")
    });
    candidates.truncate(k);
    Ok(FitEntry {
        candidates,
        excluded_cells: grid.excluded_cells,
    })
}

/// Detects the event curve's markers, normalizes its awakening-to-peak
/// segment by the peak volume, and fits it against the grid.
pub fn fit_event(grid: &FitGrid, event: &CumulativeCurve, k: usize) -> Result<FitEntry, FitError> {
    let segment = normalized_growth_segment(event)?;
    fit_segment(grid, &segment, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameter {
    Alpha,
    Gamma,
}

/// Empirical CDF over the chosen parameter of the candidate multiset:
/// one (value, cumulative fraction) point per distinct value, ending at 1.
pub fn parameter_cdf(
    candidates: &[FitCandidate],
    parameter: Parameter,
) -> Result<Vec<(f64, f64)>, FitError> {
    if candidates.is_empty() {
        return Err(FitError::NoCandidates);
    }
    let mut values: Vec<f64> = candidates
        .iter()
        .map(|c| match parameter {
            Parameter::Alpha => c.alpha,
            Parameter::Gamma => c.gamma,
        })
        .collect();
    values.sort_by(|a, b| a.partial_cmp(b).expect("grid values are finite"));
    let n = values.len() as f64;
    let mut table = Vec::new();
    let mut seen = 0usize;
    for (idx, &v) in values.iter().enumerate() {
        seen = idx + 1;
        let next_differs = values.get(idx + 1).map_or(true, |&w| w != v);
        if next_differs {
            table.push((v, seen as f64 / n));
        }
    }
    debug_assert_eq!(seen, values.len());
    Ok(table)
}

/// One event's fit alongside its dominant-emotion tag.
#[derive(Debug, Clone, PartialEq)]
pub struct EventFit {
    pub event_id: String,
    pub dominant: Option<Emotion>,
    pub entry: FitEntry,
}

/// Corpus-level fit results with per-emotion CDF pooling.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub events: Vec<EventFit>,
}

impl FitReport {
    /// Pools the selected candidates of all events (or only those dominated
    /// by one emotion) into a parameter CDF.
    pub fn cdf(
        &self,
        parameter: Parameter,
        emotion: Option<Emotion>,
    ) -> Result<Vec<(f64, f64)>, FitError> {
        let pooled: Vec<FitCandidate> = self
            .events
            .iter()
            .filter(|ev| emotion.is_none() || ev.dominant == emotion)
            .flat_map(|ev| ev.entry.candidates.iter().copied())
            .collect();
        parameter_cdf(&pooled, parameter)
    }
}

/// The default α search grid: −1.0 to 1.0 in steps of 0.1.
pub fn default_alpha_grid() -> Vec<f64> {
    (0..=20).map(|i| (i as f64 - 10.0) / 10.0).collect()
}

/// The default γ search grid: 0.1 to 1.0 in steps of 0.1.
pub fn default_gamma_grid() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SocialGraph;
    use crate::sim::{run_ensemble, EnsembleOptions, StopCondition};

    #[test]
    fn dtw_identical_sequences_cost_zero() {
        let a = [0.2, 0.5, 0.9, 1.0];
        assert_eq!(dtw_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn dtw_constant_offset_follows_diagonal() {
        assert_eq!(
            dtw_distance(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0]).unwrap(),
            3.0
        );
    }

    #[test]
    fn dtw_absorbs_repeats_at_zero_cost() {
        assert_eq!(
            dtw_distance(&[1.0, 2.0, 3.0], &[1.0, 1.0, 2.0, 2.0, 3.0]).unwrap(),
            0.0
        );
    }

    #[test]
    fn dtw_single_points() {
        assert_eq!(dtw_distance(&[2.0], &[5.5]).unwrap(), 3.5);
        assert_eq!(dtw_distance(&[2.0], &[1.0, 3.0]).unwrap(), 2.0);
    }

    #[test]
    fn dtw_rejects_bad_input() {
        assert!(matches!(
            dtw_distance(&[], &[1.0]),
            Err(FitError::EmptySequence)
        ));
        assert!(matches!(
            dtw_distance(&[1.0], &[f64::NAN]),
            Err(FitError::NonFinite)
        ));
    }

    /// Ring of 60 nodes with chords and varied retweet counts, so tie
    /// weights differ enough for α to matter.
    fn chord_ring() -> SocialGraph {
        let n = 60u32;
        let mut rows = Vec::new();
        for i in 0..n {
            rows.push((format!("r{i}"), format!("r{}", (i + 1) % n), (i % 5) as u64));
            rows.push((format!("r{i}"), format!("r{}", (i + 7) % n), (i % 3) as u64));
        }
        SocialGraph::from_records(rows).graph
    }

    fn small_ensemble(base_seed: u64, alphas: &[f64], gammas: &[f64]) -> EnsembleStats {
        let g = chord_ring();
        let view = g.undirected();
        let opts = EnsembleOptions {
            n_runs: 20,
            max_steps: 400,
            stop: StopCondition::AllInfected,
            snapshot_k: 50,
            base_seed,
        };
        run_ensemble(&view, alphas, gammas, &opts).unwrap()
    }

    #[test]
    fn grid_excludes_flat_cells() {
        let stats = small_ensemble(5, &[0.0], &[0.0, 0.8]);
        let grid = build_fit_grid(&stats).unwrap();
        assert_eq!(grid.total_cells(), 2);
        assert_eq!(grid.excluded_cells(), 1); // the γ=0 cell never grows
        assert_eq!(grid.usable_cells(), 1);
    }

    #[test]
    fn grid_with_only_flat_cells_errors() {
        let stats = small_ensemble(6, &[0.0, 0.5], &[0.0]);
        assert!(matches!(
            build_fit_grid(&stats),
            Err(FitError::AllCellsDegenerate)
        ));
    }

    #[test]
    fn fit_returns_all_cells_when_k_is_grid_size() {
        let alphas = [-0.8, 0.0, 0.8];
        let gammas = [0.3, 0.6, 0.9];
        let stats = small_ensemble(7, &alphas, &gammas);
        let grid = build_fit_grid(&stats).unwrap();
        let segment = [0.1, 0.3, 0.7, 1.0];
        let entry = fit_segment(&grid, &segment, grid.usable_cells()).unwrap();
        assert_eq!(entry.candidates.len(), grid.usable_cells());
        assert!(entry
            .candidates
            .windows(2)
            .all(|w| w[0].dtw_distance <= w[1].dtw_distance));
        // Oversized k just returns everything.
        let more = fit_segment(&grid, &segment, 1000).unwrap();
        assert_eq!(more.candidates.len(), grid.usable_cells());
    }

    #[test]
    fn fit_is_deterministic() {
        let stats = small_ensemble(8, &[-0.5, 0.5], &[0.4, 0.8]);
        let grid = build_fit_grid(&stats).unwrap();
        let segment = [0.2, 0.5, 1.0];
        let a = fit_segment(&grid, &segment, 3).unwrap();
        let b = fit_segment(&grid, &segment, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fit_recovers_generating_cell() {
        // An "event" produced by the model itself at (−0.5, 0.8), from an
        // ensemble with a different base seed than the search grid.
        let alphas = [-0.5, 0.0, 0.5];
        let gammas = [0.2, 0.5, 0.8];
        let observed = small_ensemble(1234, &[-0.5], &[0.8]);
        let event_curve = CumulativeCurve::from_ys(&observed.cells[0].mean_curve).unwrap();

        let stats = small_ensemble(99, &alphas, &gammas);
        let grid = build_fit_grid(&stats).unwrap();
        let entry = fit_event(&grid, &event_curve, 3).unwrap();
        assert!(
            entry
                .candidates
                .iter()
                .any(|c| c.alpha == -0.5 && c.gamma == 0.8),
            "true cell missing from top 3: {:?}",
            entry.candidates
        );
    }

    #[test]
    fn fit_rejects_bad_requests() {
        let stats = small_ensemble(9, &[0.0], &[0.8]);
        let grid = build_fit_grid(&stats).unwrap();
        assert!(matches!(
            fit_segment(&grid, &[0.5, 1.0], 0),
            Err(FitError::ZeroK)
        ));
        assert!(matches!(
            fit_segment(&grid, &[], 5),
            Err(FitError::EmptySequence)
        ));
    }

    #[test]
    fn cdf_single_value_jumps_to_one() {
        let candidates = [FitCandidate {
            alpha: -0.5,
            gamma: 0.8,
            dtw_distance: 0.1,
            runs_used: 50,
        }];
        assert_eq!(
            parameter_cdf(&candidates, Parameter::Alpha).unwrap(),
            vec![(-0.5, 1.0)]
        );
    }

    #[test]
    fn cdf_empirical_thirds() {
        let candidates: Vec<FitCandidate> = [-1.0, 0.0, 1.0]
            .iter()
            .map(|&alpha| FitCandidate {
                alpha,
                gamma: 0.5,
                dtw_distance: 0.0,
                runs_used: 1,
            })
            .collect();
        let cdf = parameter_cdf(&candidates, Parameter::Alpha).unwrap();
        assert_eq!(cdf.len(), 3);
        assert_eq!(cdf[0], (-1.0, 1.0 / 3.0));
        assert_eq!(cdf[1], (0.0, 2.0 / 3.0));
        assert_eq!(cdf[2], (1.0, 1.0));
    }

    #[test]
    fn cdf_merges_duplicate_values() {
        let candidates: Vec<FitCandidate> = [0.3, 0.3, 0.9, 0.9]
            .iter()
            .map(|&gamma| FitCandidate {
                alpha: 0.0,
                gamma,
                dtw_distance: 0.0,
                runs_used: 1,
            })
            .collect();
        let cdf = parameter_cdf(&candidates, Parameter::Gamma).unwrap();
        assert_eq!(cdf, vec![(0.3, 0.5), (0.9, 1.0)]);
    }

    #[test]
    fn cdf_requires_candidates() {
        assert!(matches!(
            parameter_cdf(&[], Parameter::Alpha),
            Err(FitError::NoCandidates)
        ));
    }

    #[test]
    fn report_pools_by_dominant_emotion() {
        let mk = |alpha: f64| FitCandidate {
            alpha,
            gamma: 0.5,
            dtw_distance: 0.0,
            runs_used: 1,
        };
        let report = FitReport {
            events: vec![
                EventFit {
                    event_id: "a".to_string(),
                    dominant: Some(Emotion::Anger),
                    entry: FitEntry {
                        candidates: vec![mk(-1.0), mk(-0.5)],
                        excluded_cells: 0,
                    },
                },
                EventFit {
                    event_id: "b".to_string(),
                    dominant: Some(Emotion::Joy),
                    entry: FitEntry {
                        candidates: vec![mk(0.5)],
                        excluded_cells: 0,
                    },
                },
            ],
        };
        let anger = report.cdf(Parameter::Alpha, Some(Emotion::Anger)).unwrap();
        assert_eq!(anger, vec![(-1.0, 0.5), (-0.5, 1.0)]);
        let all = report.cdf(Parameter::Alpha, None).unwrap();
        assert_eq!(all.last().unwrap().1, 1.0);
        assert_eq!(all.len(), 3);
        assert!(matches!(
            report.cdf(Parameter::Alpha, Some(Emotion::Sadness)),
            Err(FitError::NoCandidates)
        ));
    }

    #[test]
    fn default_grids_have_spec_shape() {
        let alphas = default_alpha_grid();
        let gammas = default_gamma_grid();
        assert_eq!(alphas.len(), 21);
        assert_eq!(alphas[0], -1.0);
        assert_eq!(alphas[10], 0.0);
        assert_eq!(alphas[20], 1.0);
        assert_eq!(gammas.len(), 10);
        assert_eq!(gammas[0], 0.1);
        assert_eq!(gammas[9], 1.0);
    }
}
