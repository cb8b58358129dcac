use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{generate_trajectory, ChannelError, ScenarioConfig, ScenarioKind};
use crate::numerics::{CVec, SeededRng};

/// Snapshots and metadata of one trajectory, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub scenario: ScenarioKind,
    pub speed_mps: f64,
    pub seed_index: u64,
    pub snapshots: Vec<CVec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Partition {
    Train,
    Test,
}

/// Index of one window: trajectory, offset of its oldest past snapshot and
/// horizon in SRS periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WindowRef {
    pub traj: usize,
    pub start: usize,
    pub horizon: usize,
}

/// Borrowed view of `K` past snapshots (oldest first) and the target
/// `horizon` steps after the last of them.
#[derive(Debug, Clone, Copy)]
pub struct Window<'a> {
    pub past: &'a [CVec],
    pub target: &'a CVec,
    pub traj: usize,
    pub start: usize,
    pub horizon: usize,
}

impl Window<'_> {
    pub fn last(&self) -> &CVec {
        self.past.last().expect("window has K >= 2 snapshots")
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub k: usize,
    pub horizons: Vec<usize>,
    pub trajectories: Vec<TrajectoryRecord>,
    /// Trajectory indices of each partition, ascending.
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// Scatterers redrawn because a track passed within the collision radius.
    pub regenerated: usize,
}

impl Dataset {
    /// Splits `trajectories` at trajectory granularity. The train share is
    /// `round(split_ratio·n)` clamped so that both partitions are non-empty.
    pub fn from_records(
        trajectories: Vec<TrajectoryRecord>,
        k: usize,
        horizons: &[usize],
        split_ratio: f64,
        rng: &SeededRng,
    ) -> Result<Self, ChannelError> {
        let n = trajectories.len();
        if n < 2 {
            return Err(ChannelError::InvalidConfig("need at least two trajectories to split".into()));
        }
        if k < 2 || horizons.is_empty() || horizons.contains(&0) {
            return Err(ChannelError::InvalidConfig("need K >= 2 and horizons >= 1".into()));
        }
        if !(0.0..=1.0).contains(&split_ratio) {
            return Err(ChannelError::InvalidConfig(format!("split ratio {split_ratio} outside [0, 1]")));
        }
        let h_max = *horizons.iter().max().unwrap();
        for tr in &trajectories {
            let t = tr.snapshots.len();
            if t < k + h_max {
                return Err(ChannelError::TooShort { t, k, horizon: h_max });
            }
        }
        let n_train = ((split_ratio * n as f64).round() as usize).clamp(1, n - 1);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng.spawn(u64::MAX));
        let mut train = order[..n_train].to_vec();
        let mut test = order[n_train..].to_vec();
        train.sort_unstable();
        test.sort_unstable();
        Ok(Self {
            k,
            horizons: horizons.to_vec(),
            trajectories,
            train,
            test,
            regenerated: 0,
        })
    }

    pub fn n_b(&self) -> usize {
        self.trajectories[0].snapshots[0].len()
    }

    /// Window count of a `t`-snapshot trajectory.
    pub fn windows_per_trajectory(t: usize, k: usize, horizon: usize) -> usize {
        (t + 1).saturating_sub(k + horizon)
    }

    pub fn partition(&self, part: Partition) -> &[usize] {
        match part {
            Partition::Train => &self.train,
            Partition::Test => &self.test,
        }
    }

    /// Every window of `part` at `horizon`, trajectory-major then by start.
    pub fn windows(&self, part: Partition, horizon: usize) -> Vec<WindowRef> {
        self.partition(part)
            .iter()
            .flat_map(|&traj| {
                let t = self.trajectories[traj].snapshots.len();
                (0..Self::windows_per_trajectory(t, self.k, horizon)).map(move |start| WindowRef { traj, start, horizon })
            })
            .collect()
    }

    pub fn window(&self, r: WindowRef) -> Window<'_> {
        let snaps = &self.trajectories[r.traj].snapshots;
        Window {
            past: &snaps[r.start..r.start + self.k],
            target: &snaps[r.start + self.k - 1 + r.horizon],
            traj: r.traj,
            start: r.start,
            horizon: r.horizon,
        }
    }
}

/// Simulates `n_traj` trajectories and splits them into train and test.
///
/// Trajectory `i` draws from `rng.spawn(i)`, so the result does not depend on
/// the thread count. With a speed range the speeds are swept at equal
/// intervals over the trajectory index.
pub fn build_dataset(
    cfg: &ScenarioConfig,
    n_traj: usize,
    k: usize,
    horizons: &[usize],
    split_ratio: f64,
    rng: &SeededRng,
) -> Result<Dataset, ChannelError> {
    cfg.validate()?;
    let h_max = horizons.iter().copied().max().unwrap_or(0);
    if cfg.snapshots < k + h_max {
        return Err(ChannelError::TooShort {
            t: cfg.snapshots,
            k,
            horizon: h_max,
        });
    }
    let generated = (0..n_traj)
        .into_par_iter()
        .map(|i| {
            let speed = cfg.speed.speed_mps(i, n_traj);
            generate_trajectory(cfg, speed, i as u64, &mut rng.spawn(i as u64))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let regenerated = generated.iter().map(|t| t.paths.regenerated).sum();
    let records = generated
        .into_iter()
        .map(|t| TrajectoryRecord {
            scenario: t.kind,
            speed_mps: t.speed_mps,
            seed_index: t.seed_index,
            snapshots: t.snapshots,
        })
        .collect();
    let mut ds = Dataset::from_records(records, k, horizons, split_ratio, rng)?;
    ds.regenerated = regenerated;
    Ok(ds)
}
