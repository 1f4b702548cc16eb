//! Grid searches for the attacker position maximizing the missed-detection
//! probability: the lobe-restricted truncated search and the exhaustive oracle.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use super::lobes::{lobe_sets, LobeSets};
use super::objective::AttackGeometry;
use crate::authenticator::AuthenticatorState;
use crate::channel::{channel_statistics, channel_statistics_at, distance};
use crate::error::{Error, Result};
use crate::power_attack::mdp_optimal_pma;
use crate::scenario::{Point, Scenario, SearchConfig};

const TIE: f64 = 1e-12;
const BAND_ROWS: usize = 128;

/// Regular grid `x_i = min + i * res` covering the scenario region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub min: Point,
    pub resolution: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn new(min: Point, max: Point, resolution: f64) -> Result<Self> {
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(Error::Domain(format!("grid resolution must be > 0, got {resolution}")));
        }
        if !(max[0] >= min[0] && max[1] >= min[1]) {
            return Err(Error::EmptyRegion);
        }
        let count = |lo: f64, hi: f64| ((hi - lo) / resolution + 1e-9).floor() as usize + 1;
        Ok(Self {
            min,
            resolution,
            nx: count(min[0], max[0]),
            ny: count(min[1], max[1]),
        })
    }

    pub fn for_scenario(scenario: &Scenario, resolution: f64) -> Result<Self> {
        Self::new(scenario.region.min, scenario.region.max, resolution)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, ix: usize, iy: usize) -> Point {
        [
            self.min[0] + ix as f64 * self.resolution,
            self.min[1] + iy as f64 * self.resolution,
        ]
    }
}

/// True if `p` lies outside every exclusion disc.
pub fn is_allowed(scenario: &Scenario, p: Point) -> bool {
    distance(p, scenario.alice.position) >= scenario.exclusion.alice_radius_m
        && scenario
            .rrhs
            .iter()
            .all(|r| distance(p, r.position) >= scenario.exclusion.rrh_radius_m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidatePosition {
    pub position_m: Point,
    pub f_obj: f64,
    pub f_small_scale: f64,
    pub pmd: f64,
    pub lobe_tag: String,
    pub rank: usize,
}

/// Outcome of the truncated search.
#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    pub grid: Grid,
    pub grid_points: usize,
    pub allowed_points: usize,
    /// Allowed grid points inside the lobe set.
    pub lobe_points: usize,
    /// Small-scale local optima inside the lobe set.
    pub search_positions: usize,
    /// Small-scale local optima over the whole allowed grid.
    pub small_scale_optima: usize,
    pub lobes: LobeSets,
    /// Ranked by pmd, at most `max_candidates` entries.
    pub candidates: Vec<CandidatePosition>,
}

impl SearchReport {
    /// Search positions relative to all small-scale local optima.
    pub fn search_fraction(&self) -> f64 {
        self.search_positions as f64 / self.small_scale_optima.max(1) as f64
    }

    /// Lobe-set points relative to the allowed grid.
    pub fn lobe_fraction(&self) -> f64 {
        self.lobe_points as f64 / self.allowed_points.max(1) as f64
    }

    /// Worst-case pmd over the candidates.
    pub fn optimal_position_pmd(&self) -> f64 {
        self.candidates.first().map_or(0.0, |c| c.pmd)
    }
}

/// Authenticator calibrated at the scenario's false-alarm target.
pub fn scenario_authenticator(scenario: &Scenario) -> Result<AuthenticatorState> {
    AuthenticatorState::for_false_alarm(channel_statistics(scenario, &scenario.alice)?, scenario.false_alarm_target)
}

fn eve_power(scenario: &Scenario) -> f64 {
    scenario.eve.as_ref().map_or(scenario.alice.tx_power, |e| e.tx_power)
}

/// Optimal-PMA pmd with Eve at `p`.
pub fn pmd_at(scenario: &Scenario, auth: &AuthenticatorState, p: Point) -> Result<f64> {
    mdp_optimal_pma(auth, &channel_statistics_at(scenario, p, eve_power(scenario))?)
}

fn ball_offsets(radius_cells: f64) -> Vec<(isize, isize)> {
    let r = radius_cells.floor() as isize;
    let r2 = radius_cells * radius_cells * (1.0 + 1e-9);
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if (dx, dy) != (0, 0) && ((dx * dx + dy * dy) as f64) <= r2 {
                out.push((dx, dy));
            }
        }
    }
    out
}

#[derive(Clone, Copy)]
struct Cell {
    /// NaN outside the allowed region.
    f_ss: f64,
    in_lobes: bool,
}

fn rank_order(a: &(f64, Point), b: &(f64, Point)) -> Ordering {
    b.0.partial_cmp(&a.0)
        .unwrap_or(Ordering::Equal)
        .then(a.1[0].total_cmp(&b.1[0]))
        .then(a.1[1].total_cmp(&b.1[1]))
}

/// Lobe-restricted search over small-scale local optima, ranked by pmd.
pub fn truncated_search(scenario: &Scenario, config: &SearchConfig) -> Result<SearchReport> {
    scenario.validate()?;
    if config.small_scale_radius_m < config.grid_resolution_m {
        return Err(Error::Domain("small-scale radius must be at least the grid resolution".into()));
    }
    let geometry = AttackGeometry::new(scenario)?;
    let lobes = lobe_sets(&geometry, config)?;
    let grid = Grid::for_scenario(scenario, config.grid_resolution_m)?;
    let offsets = ball_offsets(config.small_scale_radius_m / config.grid_resolution_m);
    let halo = offsets.iter().map(|o| o.1.unsigned_abs()).max().unwrap_or(0);
    let sidelobes = config.include_first_sidelobes;

    let cell = |ix: usize, iy: usize| -> Result<Cell> {
        let p = grid.point(ix, iy);
        if !is_allowed(scenario, p) {
            return Ok(Cell {
                f_ss: f64::NAN,
                in_lobes: false,
            });
        }
        let (_, f_ss, terms) = geometry.scores(p)?;
        let omegas: Vec<f64> = terms.iter().map(|t| t.omega).collect();
        Ok(Cell {
            f_ss,
            in_lobes: lobes.classify(&omegas, sidelobes).is_some(),
        })
    };

    let mut allowed = 0usize;
    let mut lobe_points = 0usize;
    let mut search_positions = 0usize;
    let mut optima = 0usize;
    let mut top: Vec<(f64, Point)> = Vec::new();

    let mut r0 = 0;
    while r0 < grid.ny {
        let r1 = (r0 + BAND_ROWS).min(grid.ny);
        let lo = r0.saturating_sub(halo);
        let hi = (r1 + halo).min(grid.ny);
        let rows: Vec<Vec<Cell>> = (lo..hi)
            .into_par_iter()
            .map(|iy| (0..grid.nx).map(|ix| cell(ix, iy)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let at = |ix: isize, iy: isize| -> Option<&Cell> {
            if ix < 0 || iy < lo as isize || ix >= grid.nx as isize || iy >= hi as isize {
                return None;
            }
            Some(&rows[iy as usize - lo][ix as usize])
        };

        let per_row: Vec<(usize, usize, usize, Vec<(f64, Point)>)> = (r0..r1)
            .into_par_iter()
            .map(|iy| -> Result<_> {
                let (mut a, mut l, mut opt) = (0, 0, 0);
                let mut found = Vec::new();
                for ix in 0..grid.nx {
                    let c = &rows[iy - lo][ix];
                    if c.f_ss.is_nan() {
                        continue;
                    }
                    a += 1;
                    l += c.in_lobes as usize;
                    let mut lobe_max = true;
                    let mut global_max = true;
                    for &(dx, dy) in &offsets {
                        let Some(n) = at(ix as isize + dx, iy as isize + dy) else { continue };
                        if n.f_ss.is_nan() || c.f_ss >= n.f_ss - TIE {
                            continue;
                        }
                        global_max = false;
                        if n.in_lobes {
                            lobe_max = false;
                            break;
                        }
                    }
                    opt += global_max as usize;
                    if c.in_lobes && lobe_max {
                        let p = grid.point(ix, iy);
                        found.push((geometry.expanded_f_obj(p)?, p));
                    }
                }
                Ok((a, l, opt, found))
            })
            .collect::<Result<_>>()?;

        for (a, l, opt, found) in per_row {
            allowed += a;
            lobe_points += l;
            optima += opt;
            search_positions += found.len();
            top.extend(found);
        }
        if top.len() > config.max_candidates {
            top.sort_by(rank_order);
            top.truncate(config.max_candidates);
        }
        r0 = r1;
    }

    if allowed == 0 {
        return Err(Error::EmptyRegion);
    }
    if top.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    top.sort_by(rank_order);
    top.truncate(config.max_candidates);

    let auth = scenario_authenticator(scenario)?;
    let mut candidates: Vec<CandidatePosition> = top
        .par_iter()
        .map(|&(f_obj, p)| -> Result<_> {
            let (_, f_ss, terms) = geometry.scores(p)?;
            let omegas: Vec<f64> = terms.iter().map(|t| t.omega).collect();
            Ok(CandidatePosition {
                position_m: p,
                f_obj,
                f_small_scale: f_ss,
                pmd: pmd_at(scenario, &auth, p)?,
                lobe_tag: lobes.classify(&omegas, sidelobes).unwrap_or_default(),
                rank: 0,
            })
        })
        .collect::<Result<_>>()?;
    candidates.sort_by(|a, b| {
        b.pmd
            .partial_cmp(&a.pmd)
            .unwrap_or(Ordering::Equal)
            .then_with(|| rank_order(&(a.f_obj, a.position_m), &(b.f_obj, b.position_m)))
    });
    for (k, c) in candidates.iter_mut().enumerate() {
        c.rank = k + 1;
    }

    Ok(SearchReport {
        grid,
        grid_points: grid.len(),
        allowed_points: allowed,
        lobe_points,
        search_positions,
        small_scale_optima: optima,
        lobes,
        candidates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExhaustiveObjective {
    /// `f_obj(mu_E)`
    StrongLos,
    /// Optimal-PMA pmd.
    Saddlepoint,
}

/// Maximizer of `objective` over every allowed grid point.
pub fn exhaustive_search(
    scenario: &Scenario,
    config: &SearchConfig,
    objective: ExhaustiveObjective,
) -> Result<CandidatePosition> {
    scenario.validate()?;
    let grid = Grid::for_scenario(scenario, config.grid_resolution_m)?;
    if grid.len() > config.exhaustive_budget {
        return Err(Error::BudgetExceeded {
            points: grid.len(),
            budget: config.exhaustive_budget,
        });
    }
    let geometry = AttackGeometry::new(scenario)?;
    let auth = match objective {
        ExhaustiveObjective::Saddlepoint => Some(scenario_authenticator(scenario)?),
        ExhaustiveObjective::StrongLos => None,
    };
    let best_in_row = |iy: usize| -> Result<Option<(f64, Point)>> {
        let mut best: Option<(f64, Point)> = None;
        for ix in 0..grid.nx {
            let p = grid.point(ix, iy);
            if !is_allowed(scenario, p) {
                continue;
            }
            let v = match &auth {
                None => geometry.expanded_f_obj(p)?,
                Some(a) => pmd_at(scenario, a, p)?,
            };
            if best.is_none_or(|b| rank_order(&(v, p), &b) == Ordering::Less) {
                best = Some((v, p));
            }
        }
        Ok(best)
    };
    let rows: Vec<Option<(f64, Point)>> = (0..grid.ny).into_par_iter().map(best_in_row).collect::<Result<_>>()?;
    let (_, p) = rows
        .into_iter()
        .flatten()
        .min_by(rank_order)
        .ok_or(Error::EmptyRegion)?;

    let (f_obj, f_ss, _) = geometry.scores(p)?;
    let pmd = match &auth {
        Some(a) => pmd_at(scenario, a, p)?,
        None => pmd_at(scenario, &scenario_authenticator(scenario)?, p)?,
    };
    Ok(CandidatePosition {
        position_m: p,
        f_obj,
        f_small_scale: f_ss,
        pmd,
        lobe_tag: "exhaustive".into(),
        rank: 1,
    })
}

/// Optimal-PMA pmd at every grid point; `None` inside exclusions.
#[derive(Debug, Clone, Serialize)]
pub struct PmdMap {
    pub grid: Grid,
    /// Row-major, `values[iy * nx + ix]`.
    pub values: Vec<Option<f64>>,
}

impl PmdMap {
    /// Fraction of allowed points with pmd below `level`.
    pub fn coverage(&self, level: f64) -> f64 {
        let allowed: Vec<f64> = self.values.iter().flatten().copied().collect();
        allowed.iter().filter(|&&v| v < level).count() as f64 / allowed.len().max(1) as f64
    }
}

pub fn pmd_map(scenario: &Scenario, resolution: f64) -> Result<PmdMap> {
    scenario.validate()?;
    let grid = Grid::for_scenario(scenario, resolution)?;
    let auth = scenario_authenticator(scenario)?;
    let rows: Vec<Vec<Option<f64>>> = (0..grid.ny)
        .into_par_iter()
        .map(|iy| {
            (0..grid.nx)
                .map(|ix| {
                    let p = grid.point(ix, iy);
                    if is_allowed(scenario, p) {
                        pmd_at(scenario, &auth, p).map(Some)
                    } else {
                        Ok(None)
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(PmdMap {
        grid,
        values: rows.into_iter().flatten().collect(),
    })
}
