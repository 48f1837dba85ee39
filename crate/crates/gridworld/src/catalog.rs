//! Object catalogs and their train/test partitions.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use sattl::Atom;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Minecraft,
    MiniGrid,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Minecraft => "minecraft",
            Mode::MiniGrid => "minigrid",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "minecraft" | "mc" => Ok(Mode::Minecraft),
            "minigrid" | "mg" => Ok(Mode::MiniGrid),
            _ => Err(format!("unknown mode {s:?}")),
        }
    }
}

/// Index of an object in its catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub u16);

impl ObjectId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

pub const MC_OBJECTS: usize = 55;
pub const MC_X1: usize = 35;
pub const MC_X2: usize = 20;
pub const MC_X3: usize = 20;
pub const GLYPH: usize = 9;

pub const COLORS: [&str; 11] = [
    "red", "green", "blue", "purple", "yellow", "gray", "orange", "darkgreen", "pink", "cyan", "white",
];
pub const SHAPES: [&str; 8] = ["key", "ball", "box", "lava", "door", "star", "triangle", "diamond"];

/// Sizes of the reachability-train/test and other-train/test index sets;
/// the first and third are complements of the second and fourth.
pub const C_SIZES: [usize; 4] = [8, 3, 8, 3];
pub const F_SIZES: [usize; 4] = [6, 2, 6, 2];

#[derive(Debug, Clone, PartialEq, Error)]
#[error("catalog invariant broken: {0}")]
pub struct CatalogError(pub String);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinecraftSets {
    pub x1: Vec<ObjectId>,
    pub x2: Vec<ObjectId>,
    pub x3: Vec<ObjectId>,
    /// Row-major 9x9 gray levels in `[0, 1]`, one per object.
    #[serde(skip)]
    pub glyphs: Vec<[f32; GLYPH * GLYPH]>,
}

/// Color and shape index sets `C1..C4`, `F1..F4` (indices into
/// [`COLORS`] and [`SHAPES`]).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiniGridSets {
    pub c: [Vec<usize>; 4],
    pub f: [Vec<usize>; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Partition {
    Minecraft(MinecraftSets),
    MiniGrid(MiniGridSets),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectCatalog {
    pub mode: Mode,
    pub seed: u64,
    names: Vec<Atom>,
    #[serde(skip)]
    index: HashMap<Atom, ObjectId>,
    pub partition: Partition,
}

fn mix(seed: u64, i: u64) -> u64 {
    // splitmix64 finalizer over the pair.
    let mut z = seed ^ i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The glyph of object `i`: a function of `(seed, i)` only.
pub fn glyph_for(seed: u64, i: usize) -> [f32; GLYPH * GLYPH] {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, i as u64));
    let mut g = [0f32; GLYPH * GLYPH];
    for v in g.iter_mut() {
        // Quantized to 1/255 so pixel exports are lossless.
        *v = rng.gen_range(0u8..=255) as f32 / 255.0;
    }
    g
}

pub fn build_catalog(seed: u64, mode: Mode) -> ObjectCatalog {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (names, partition) = match mode {
        Mode::Minecraft => {
            let names: Vec<Atom> =
                (0..MC_OBJECTS).map(|i| Atom::new(format!("obj{i}")).expect("valid atom")).collect();
            let mut ids: Vec<ObjectId> = (0..MC_OBJECTS as u16).map(ObjectId).collect();
            ids.shuffle(&mut rng);
            let x3 = ids[..MC_X3].to_vec();
            let x1 = ids[MC_X3..].to_vec();
            let x2 = x1[..MC_X2].to_vec();
            let glyphs = (0..MC_OBJECTS).map(|i| glyph_for(seed, i)).collect();
            (names, Partition::Minecraft(MinecraftSets { x1, x2, x3, glyphs }))
        }
        Mode::MiniGrid => {
            let mut names = Vec::with_capacity(COLORS.len() * SHAPES.len());
            for c in COLORS {
                for s in SHAPES {
                    names.push(Atom::new(format!("{c}_{s}")).expect("valid atom"));
                }
            }
            let split = |n: usize, k: usize, rng: &mut ChaCha8Rng| {
                let mut idx: Vec<usize> = (0..n).collect();
                idx.shuffle(rng);
                let s2: Vec<usize> = sorted(idx[..k].to_vec());
                let s4: Vec<usize> = sorted(idx[k..2 * k].to_vec());
                let s1 = (0..n).filter(|i| !s2.contains(i)).collect();
                let s3 = (0..n).filter(|i| !s4.contains(i)).collect();
                [s1, s2, s3, s4]
            };
            let c = split(COLORS.len(), C_SIZES[1], &mut rng);
            let f = split(SHAPES.len(), F_SIZES[1], &mut rng);
            (names, Partition::MiniGrid(MiniGridSets { c, f }))
        }
    };
    let mut cat = ObjectCatalog { mode, seed, names, index: HashMap::new(), partition };
    cat.rebuild_index();
    cat.validate().expect("construction satisfies the partition rules");
    cat
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

fn is_subset<T: PartialEq>(a: &[T], b: &[T]) -> bool {
    a.iter().all(|x| b.contains(x))
}

fn disjoint<T: PartialEq>(a: &[T], b: &[T]) -> bool {
    a.iter().all(|x| !b.contains(x))
}

fn distinct<T: Ord + Clone>(a: &[T]) -> bool {
    let mut v = a.to_vec();
    v.sort();
    v.windows(2).all(|w| w[0] != w[1])
}

impl ObjectCatalog {
    fn rebuild_index(&mut self) {
        self.index = self.names.iter().enumerate().map(|(i, a)| (a.clone(), ObjectId(i as u16))).collect();
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn atom(&self, id: ObjectId) -> &Atom {
        &self.names[id.index()]
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.names
    }

    pub fn id_of(&self, a: &Atom) -> Option<ObjectId> {
        self.index.get(a).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = ObjectId> {
        (0..self.names.len() as u16).map(ObjectId)
    }

    pub fn minecraft(&self) -> Option<&MinecraftSets> {
        match &self.partition {
            Partition::Minecraft(s) => Some(s),
            Partition::MiniGrid(_) => None,
        }
    }

    pub fn minigrid(&self) -> Option<&MiniGridSets> {
        match &self.partition {
            Partition::MiniGrid(s) => Some(s),
            Partition::Minecraft(_) => None,
        }
    }

    /// MiniGrid object for a color and shape index.
    pub fn compose(&self, color: usize, shape: usize) -> ObjectId {
        ObjectId((color * SHAPES.len() + shape) as u16)
    }

    /// `(color, shape)` indices of a MiniGrid object.
    pub fn decompose(&self, id: ObjectId) -> (usize, usize) {
        (id.index() / SHAPES.len(), id.index() % SHAPES.len())
    }

    pub fn glyph(&self, id: ObjectId) -> Option<&[f32; GLYPH * GLYPH]> {
        self.minecraft().map(|s| &s.glyphs[id.index()])
    }

    /// Check every cardinality and subset/disjointness rule of the partition.
    pub fn validate(&self) -> Result<(), CatalogError> {
        let err = |m: &str| Err(CatalogError(m.to_string()));
        match &self.partition {
            Partition::Minecraft(s) => {
                if self.names.len() != MC_OBJECTS {
                    return err("|X| != 55");
                }
                if s.x1.len() != MC_X1 || s.x2.len() != MC_X2 || s.x3.len() != MC_X3 {
                    return err("set cardinalities");
                }
                if !distinct(&s.x1) || !distinct(&s.x3) || !distinct(&s.x2) {
                    return err("repeated object in a set");
                }
                if !is_subset(&s.x2, &s.x1) {
                    return err("X2 not a subset of X1");
                }
                if !disjoint(&s.x1, &s.x3) {
                    return err("X1 and X3 overlap");
                }
                if s.x1.len() + s.x3.len() != self.names.len() {
                    return err("X1 and X3 do not cover X");
                }
                if s.glyphs.len() != MC_OBJECTS || s.glyphs.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
                    return err("glyph table");
                }
            }
            Partition::MiniGrid(s) => {
                if self.names.len() != COLORS.len() * SHAPES.len() {
                    return err("object count != 11 x 8");
                }
                for (sets, sizes, n, what) in
                    [(&s.c, C_SIZES, COLORS.len(), "C"), (&s.f, F_SIZES, SHAPES.len(), "F")]
                {
                    for (k, (set, size)) in sets.iter().zip(sizes).enumerate() {
                        if set.len() != size || !distinct(set) || set.iter().any(|&i| i >= n) {
                            return Err(CatalogError(format!("|{what}{}|", k + 1)));
                        }
                    }
                    // Both pairs partition the whole set.
                    for (a, b) in [(0, 1), (2, 3)] {
                        if !disjoint(&sets[a], &sets[b]) || sets[a].len() + sets[b].len() != n {
                            return Err(CatalogError(format!("{what}{} and {what}{} do not partition", a + 1, b + 1)));
                        }
                    }
                    if !is_subset(&sets[1], &sets[2]) {
                        return Err(CatalogError(format!("{what}2 not a subset of {what}3")));
                    }
                    if !is_subset(&sets[3], &sets[0]) {
                        return Err(CatalogError(format!("{what}4 not a subset of {what}1")));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minecraft_sets() {
        let c = build_catalog(7, Mode::Minecraft);
        let s = c.minecraft().unwrap();
        assert_eq!((c.len(), s.x1.len(), s.x2.len(), s.x3.len()), (55, 35, 20, 20));
        assert!(s.x2.iter().all(|x| s.x1.contains(x)));
        assert!(s.x1.iter().all(|x| !s.x3.contains(x)));
        assert_eq!(c.atom(ObjectId(12)).as_str(), "obj12");
        assert_eq!(c.id_of(&Atom::new("obj12").unwrap()), Some(ObjectId(12)));
    }

    #[test]
    fn minigrid_sets() {
        let c = build_catalog(7, Mode::MiniGrid);
        let s = c.minigrid().unwrap();
        assert_eq!(c.len(), 88);
        assert_eq!(s.c.iter().map(Vec::len).collect::<Vec<_>>(), vec![8, 3, 8, 3]);
        assert_eq!(s.f.iter().map(Vec::len).collect::<Vec<_>>(), vec![6, 2, 6, 2]);
        let id = c.compose(6, 3);
        assert_eq!(c.atom(id).as_str(), "orange_lava");
        assert_eq!(c.decompose(id), (6, 3));
    }

    #[test]
    fn deterministic_in_seed() {
        assert_eq!(build_catalog(7, Mode::Minecraft), build_catalog(7, Mode::Minecraft));
        assert_eq!(build_catalog(3, Mode::MiniGrid), build_catalog(3, Mode::MiniGrid));
        assert_ne!(
            build_catalog(7, Mode::Minecraft).minecraft().unwrap().x3,
            build_catalog(8, Mode::Minecraft).minecraft().unwrap().x3
        );
        assert_eq!(glyph_for(7, 4), build_catalog(7, Mode::Minecraft).glyph(ObjectId(4)).copied().unwrap());
    }

    #[test]
    fn validate_catches_overlap() {
        let mut c = build_catalog(7, Mode::Minecraft);
        if let Partition::Minecraft(s) = &mut c.partition {
            s.x3[0] = s.x1[0];
        }
        assert!(c.validate().is_err());
        let mut c = build_catalog(7, Mode::MiniGrid);
        if let Partition::MiniGrid(s) = &mut c.partition {
            s.c[1] = s.c[3].clone();
        }
        assert!(c.validate().is_err());
    }
}
