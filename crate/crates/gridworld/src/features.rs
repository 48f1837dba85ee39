//! Symbolic observation grids consumed by agents.
//!
//! A view is a `height x width x channels` one-hot grid stored sparsely.
//! Channels `0..K` are the catalog objects, `K` marks the agent and `K + 1`
//! marks cells outside the map. The instruction never enters this grid.

use serde::{Deserialize, Serialize};

use crate::catalog::ObjectCatalog;
use crate::map::{Dir, GridMap, Pos};

/// MiniGrid forward view side; the agent sits at the bottom-centre.
pub const MG_VIEW: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureView {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    /// Sorted indices `(row * width + col) * channels + channel` of the ones.
    pub active: Vec<u32>,
}

impl FeatureView {
    pub fn len(&self) -> usize {
        self.height * self.width * self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.len()];
        for &i in &self.active {
            v[i as usize] = 1.0;
        }
        v
    }
}

pub fn channels(catalog: &ObjectCatalog) -> usize {
    catalog.len() + 2
}

/// Width of the feature vector for a Minecraft window of `radius` or a
/// MiniGrid forward view.
pub fn feature_len(catalog: &ObjectCatalog, radius: Option<usize>) -> usize {
    let side = radius.map_or(MG_VIEW, |r| 2 * r + 1);
    side * side * channels(catalog)
}

fn build(
    catalog: &ObjectCatalog,
    map: &GridMap,
    side_h: usize,
    side_w: usize,
    agent_cell: Pos,
    to_map: impl Fn(usize, usize) -> Option<Pos>,
) -> FeatureView {
    let k = catalog.len();
    let ch = k + 2;
    let mut active = Vec::new();
    for i in 0..side_h {
        for j in 0..side_w {
            let base = ((i * side_w + j) * ch) as u32;
            match to_map(i, j) {
                None => active.push(base + (k + 1) as u32),
                Some(p) => {
                    if let Some(id) = map.cell(p) {
                        active.push(base + id.0 as u32);
                    }
                    if (i, j) == agent_cell {
                        active.push(base + k as u32);
                    }
                }
            }
        }
    }
    active.sort_unstable();
    FeatureView { height: side_h, width: side_w, channels: ch, active }
}

fn shifted(map: &GridMap, p: Pos, dr: isize, dc: isize) -> Option<Pos> {
    let r = p.0.checked_add_signed(dr)?;
    let c = p.1.checked_add_signed(dc)?;
    (r < map.n && c < map.n).then_some((r, c))
}

/// Agent-centred square window of side `2 * radius + 1`.
pub fn window_view(catalog: &ObjectCatalog, map: &GridMap, pos: Pos, radius: usize) -> FeatureView {
    let side = 2 * radius + 1;
    let r = radius as isize;
    build(catalog, map, side, side, (radius, radius), |i, j| {
        shifted(map, pos, i as isize - r, j as isize - r)
    })
}

/// Forward-facing 7x7 view, rotated so the agent always faces up.
pub fn forward_view(catalog: &ObjectCatalog, map: &GridMap, pos: Pos, dir: Dir) -> FeatureView {
    let back = MG_VIEW as isize - 1;
    let mid = (MG_VIEW / 2) as isize;
    build(catalog, map, MG_VIEW, MG_VIEW, (MG_VIEW - 1, MG_VIEW / 2), |i, j| {
        let ahead = back - i as isize;
        let side = j as isize - mid;
        let (dr, dc) = match dir {
            Dir::N => (-ahead, side),
            Dir::E => (side, ahead),
            Dir::S => (ahead, -side),
            Dir::W => (-side, -ahead),
        };
        shifted(map, pos, dr, dc)
    })
}
