//! ASCII and pixel renderings, and PGM/PPM export.

use std::io::Write;

use sattl::{AtomicTask, Literal, Sign};

use crate::catalog::{Mode, ObjectCatalog, ObjectId, COLORS, GLYPH, SHAPES};
use crate::env::GridEnv;
use crate::features::MG_VIEW;
use crate::map::{Dir, GridMap, Pos};

/// One symbol per object index; excludes `@` and `.`.
pub const SYMBOLS: &str =
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789!\"#$%&'()*+,-/:;<=>?[\\]^_`{|}~";

pub fn symbol(id: ObjectId) -> char {
    SYMBOLS.chars().nth(id.index() % SYMBOLS.len()).expect("in range")
}

/// One line per row: `@` for the agent, `.` for empty cells, otherwise the
/// object's symbol.
pub fn ascii(map: &GridMap, agent: Pos) -> String {
    let mut s = String::with_capacity(map.n * (map.n + 1));
    for r in 0..map.n {
        for c in 0..map.n {
            s.push(if (r, c) == agent {
                '@'
            } else {
                map.cell((r, c)).map_or('.', symbol)
            });
        }
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize) -> Self {
        GrayImage { width, height, data: vec![0; width * height] }
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    fn blit(&mut self, tile: &[u8; GLYPH * GLYPH], x0: usize, y0: usize) {
        for y in 0..GLYPH {
            let row = (y0 + y) * self.width + x0;
            self.data[row..row + GLYPH].copy_from_slice(&tile[y * GLYPH..(y + 1) * GLYPH]);
        }
    }

    pub fn write_pgm<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "P5\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(&self.data)
    }
}

impl RgbImage {
    pub fn new(width: usize, height: usize) -> Self {
        RgbImage { width, height, data: vec![0; 3 * width * height] }
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    fn blit(&mut self, tile: &[u8; TILE_RGB], x0: usize, y0: usize) {
        for y in 0..MG_TILE {
            let row = 3 * ((y0 + y) * self.width + x0);
            self.data[row..row + 3 * MG_TILE].copy_from_slice(&tile[3 * y * MG_TILE..3 * (y + 1) * MG_TILE]);
        }
    }

    pub fn write_ppm<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "P6\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(&self.data)
    }
}

fn bitmap(rows: [&str; GLYPH]) -> [u8; GLYPH * GLYPH] {
    let mut g = [0u8; GLYPH * GLYPH];
    for (y, row) in rows.iter().enumerate() {
        for (x, ch) in row.bytes().enumerate() {
            g[y * GLYPH + x] = if ch == b'#' { 255 } else { 0 };
        }
    }
    g
}

/// Instruction strip symbols other than objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Token {
    Object(ObjectId),
    Plus,
    Minus,
    Or,
    Until,
    True,
    End,
}

pub fn token_glyph(catalog: &ObjectCatalog, t: Token) -> [u8; GLYPH * GLYPH] {
    match t {
        Token::Object(id) => object_tile(catalog, id),
        Token::Plus => bitmap([
            ".........", "....#....", "....#....", "....#....", ".#######.", "....#....", "....#....",
            "....#....", ".........",
        ]),
        Token::Minus => bitmap([
            ".........", ".........", ".........", ".........", ".#######.", ".........", ".........",
            ".........", ".........",
        ]),
        Token::Or => bitmap([
            ".........", ".#.....#.", ".#.....#.", "..#...#..", "..#...#..", "...#.#...", "...#.#...",
            "....#....", ".........",
        ]),
        Token::Until => bitmap([
            ".........", ".#.....#.", ".#.....#.", ".#.....#.", ".#.....#.", ".#.....#.", ".#.....#.",
            "..#####..", ".........",
        ]),
        Token::True => bitmap([
            ".........", ".#######.", "....#....", "....#....", "....#....", "....#....", "....#....",
            "....#....", ".........",
        ]),
        Token::End => bitmap([
            ".........", ".######..", ".#.......", ".#.......", ".#####...", ".#.......", ".#.......",
            ".######..", ".........",
        ]),
    }
}

const AGENT_GLYPH: [&str; GLYPH] = [
    "#########", "#.......#", "#.#####.#", "#.#...#.#", "#.#.#.#.#", "#.#...#.#", "#.#####.#", "#.......#",
    "#########",
];

fn object_tile(catalog: &ObjectCatalog, id: ObjectId) -> [u8; GLYPH * GLYPH] {
    let g = catalog.glyph(id).expect("minecraft catalog");
    let mut out = [0u8; GLYPH * GLYPH];
    for (o, v) in out.iter_mut().zip(g.iter()) {
        *o = (v * 255.0).round() as u8;
    }
    out
}

fn literal_tokens(catalog: &ObjectCatalog, l: &Literal, out: &mut Vec<Token>) {
    match l {
        Literal::True => out.push(Token::True),
        Literal::Any(entries) => {
            for (i, e) in entries.iter().enumerate() {
                if i > 0 {
                    out.push(Token::Or);
                }
                out.push(if e.sign == Sign::Positive { Token::Plus } else { Token::Minus });
                out.push(if e.atom.is_end() {
                    Token::End
                } else {
                    Token::Object(catalog.id_of(&e.atom).expect("task atoms come from the catalog"))
                });
            }
        }
    }
}

/// Left-to-right symbols depicting a task: condition, `U`, goal.
pub fn instruction_tokens(catalog: &ObjectCatalog, task: &AtomicTask) -> Vec<Token> {
    let mut out = Vec::new();
    literal_tokens(catalog, &task.cond, &mut out);
    out.push(Token::Until);
    literal_tokens(catalog, &task.goal, &mut out);
    out
}

/// Rows of 9x9 token tiles, `n` tiles per row.
pub fn instruction_strip_rows(tokens: usize, n: usize) -> usize {
    tokens.div_ceil(n).max(1)
}

/// Full-map gray render with the instruction strip stacked above it.
pub fn minecraft_pixels(catalog: &ObjectCatalog, map: &GridMap, agent: Pos, task: &AtomicTask) -> GrayImage {
    let n = map.n;
    let tokens = instruction_tokens(catalog, task);
    let strip = instruction_strip_rows(tokens.len(), n);
    let mut img = GrayImage::new(GLYPH * n, GLYPH * (strip + n));
    for (k, t) in tokens.iter().enumerate() {
        img.blit(&token_glyph(catalog, *t), GLYPH * (k % n), GLYPH * (k / n));
    }
    let agent_tile = bitmap(AGENT_GLYPH);
    for p in map.positions() {
        let (x, y) = (GLYPH * p.1, GLYPH * (strip + p.0));
        if p == agent {
            img.blit(&agent_tile, x, y);
        } else if let Some(id) = map.cell(p) {
            img.blit(&object_tile(catalog, id), x, y);
        }
    }
    img
}

pub const MG_TILE: usize = 8;
const TILE_RGB: usize = MG_TILE * MG_TILE * 3;

pub const COLOR_RGB: [[u8; 3]; 11] = [
    [255, 0, 0],
    [0, 255, 0],
    [0, 0, 255],
    [112, 39, 195],
    [255, 255, 0],
    [128, 128, 128],
    [255, 140, 0],
    [0, 100, 0],
    [255, 105, 180],
    [0, 255, 255],
    [255, 255, 255],
];

fn shape_mask(shape: usize, y: usize, x: usize) -> bool {
    let (fy, fx) = (y as f32 - 3.5, x as f32 - 3.5);
    match SHAPES[shape] {
        "key" => (y <= 3 && fx.abs() <= 2.0 && fy >= -3.5) && !(y == 2 && (2..=5).contains(&x)) || (x == 4 && y >= 3) || (y == 6 && x == 5),
        "ball" => fx * fx + fy * fy <= 10.0,
        "box" => (1..=6).contains(&y) && (1..=6).contains(&x) && !((2..=5).contains(&y) && (2..=5).contains(&x)),
        "lava" => (y + x) % 3 != 0,
        "door" => (1..=6).contains(&x) && !(y == 4 && x == 5),
        "star" => x == 3 || x == 4 || y == 3 || y == 4 || x == y || x + y == 7,
        "triangle" => y >= 1 && fx.abs() <= (y as f32) / 2.0,
        "diamond" => fx.abs() + fy.abs() <= 3.5,
        _ => false,
    }
}

/// An 8x8 RGB MiniGrid object tile.
pub fn minigrid_tile(catalog: &ObjectCatalog, id: ObjectId) -> [u8; TILE_RGB] {
    let (c, s) = catalog.decompose(id);
    let mut t = [0u8; TILE_RGB];
    for y in 0..MG_TILE {
        for x in 0..MG_TILE {
            if shape_mask(s, y, x) {
                t[3 * (y * MG_TILE + x)..3 * (y * MG_TILE + x) + 3].copy_from_slice(&COLOR_RGB[c]);
            }
        }
    }
    t
}

fn agent_tile(dir: Dir) -> [u8; TILE_RGB] {
    let mut t = [0u8; TILE_RGB];
    for y in 0..MG_TILE {
        for x in 0..MG_TILE {
            // Triangle pointing north, rotated to the heading.
            let (u, v) = match dir {
                Dir::N => (y, x),
                Dir::S => (MG_TILE - 1 - y, x),
                Dir::E => (MG_TILE - 1 - x, y),
                Dir::W => (x, y),
            };
            if u >= 1 && (v as f32 - 3.5).abs() <= u as f32 / 2.0 {
                t[3 * (y * MG_TILE + x)..3 * (y * MG_TILE + x) + 3].copy_from_slice(&[255, 64, 64]);
            }
        }
    }
    t
}

const OUTSIDE_RGB: [u8; 3] = [40, 40, 40];

/// Full-map RGB render, 8x8x3 pixels per tile.
pub fn minigrid_pixels(catalog: &ObjectCatalog, map: &GridMap, agent: Pos, dir: Dir) -> RgbImage {
    let mut img = RgbImage::new(MG_TILE * map.n, MG_TILE * map.n);
    for p in map.positions() {
        if p == agent {
            img.blit(&agent_tile(dir), MG_TILE * p.1, MG_TILE * p.0);
        } else if let Some(id) = map.cell(p) {
            img.blit(&minigrid_tile(catalog, id), MG_TILE * p.1, MG_TILE * p.0);
        }
    }
    img
}

/// The agent's 7x7 forward view rendered as 56x56x3 pixels.
pub fn minigrid_view_pixels(catalog: &ObjectCatalog, map: &GridMap, agent: Pos, dir: Dir) -> RgbImage {
    let v = crate::features::forward_view(catalog, map, agent, dir);
    let k = catalog.len();
    let mut img = RgbImage::new(MG_TILE * MG_VIEW, MG_TILE * MG_VIEW);
    let mut outside = [0u8; TILE_RGB];
    for px in outside.chunks_mut(3) {
        px.copy_from_slice(&OUTSIDE_RGB);
    }
    for &i in &v.active {
        let i = i as usize;
        let (cell, ch) = (i / v.channels, i % v.channels);
        let (y, x) = (MG_TILE * (cell / MG_VIEW), MG_TILE * (cell % MG_VIEW));
        if ch < k {
            img.blit(&minigrid_tile(catalog, ObjectId(ch as u16)), x, y);
        } else if ch == k {
            img.blit(&agent_tile(Dir::N), x, y);
        } else {
            img.blit(&outside, x, y);
        }
    }
    img
}

pub enum Pixels {
    Gray(GrayImage),
    Rgb(RgbImage),
}

impl Pixels {
    pub fn write<W: Write>(&self, w: W) -> std::io::Result<()> {
        match self {
            Pixels::Gray(g) => g.write_pgm(w),
            Pixels::Rgb(c) => c.write_ppm(w),
        }
    }
}

/// The extended observation of an environment: the Minecraft map with its
/// instruction strip, or the MiniGrid forward view.
pub fn env_pixels(env: &GridEnv) -> Pixels {
    let cat = env.catalog();
    match env.mode() {
        Mode::Minecraft => Pixels::Gray(minecraft_pixels(cat, env.map(), env.pos(), &env.instruction())),
        Mode::MiniGrid => {
            Pixels::Rgb(minigrid_view_pixels(cat, env.map(), env.pos(), env.dir().expect("minigrid heading")))
        }
    }
}

/// MiniGrid instruction text channel.
pub fn instruction_text(task: &AtomicTask) -> String {
    task.to_string()
}

/// Human-readable name of a MiniGrid object.
pub fn minigrid_name(catalog: &ObjectCatalog, id: ObjectId) -> String {
    let (c, s) = catalog.decompose(id);
    format!("{} {}", COLORS[c], SHAPES[s])
}
