//! Heightfield terrain with bilinear interpolation.
//!
//! Heights are stored at grid nodes. Node `(i, j)` sits at
//! `(origin_x + i * resolution, origin_y + j * resolution)`, with `i` running
//! along the travel axis (x, `length` nodes) and `j` across it (y, `width`
//! nodes).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TerrainError {
    #[error("point ({x}, {y}) lies outside the terrain")]
    OutOfTerrain { x: f64, y: f64 },
    #[error("terrain needs at least 2x2 nodes and a positive resolution")]
    BadShape,
    #[error("terrain height at line {line}, column {column} is not a finite number")]
    BadHeight { line: usize, column: usize },
    #[error("line {line} has {got} heights, expected {expected}")]
    RaggedRow { line: usize, expected: usize, got: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Heightfield {
    origin_x: f64,
    origin_y: f64,
    resolution: f64,
    length: usize,
    width: usize,
    /// Row-major by y: `heights[j * length + i]`.
    heights: Vec<f64>,
}

impl Heightfield {
    pub fn flat(
        origin_x: f64,
        origin_y: f64,
        resolution: f64,
        length: usize,
        width: usize,
    ) -> Result<Self, TerrainError> {
        Heightfield::from_fn(origin_x, origin_y, resolution, length, width, |_, _| 0.0)
    }

    /// Terrain sampled from `f(x, y)` at every node.
    pub fn from_fn(
        origin_x: f64,
        origin_y: f64,
        resolution: f64,
        length: usize,
        width: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, TerrainError> {
        if length < 2 || width < 2 || !(resolution > 0.0) {
            return Err(TerrainError::BadShape);
        }
        let mut heights = Vec::with_capacity(length * width);
        for j in 0..width {
            let y = origin_y + j as f64 * resolution;
            for i in 0..length {
                heights.push(f(origin_x + i as f64 * resolution, y));
            }
        }
        Ok(Heightfield {
            origin_x,
            origin_y,
            resolution,
            length,
            width,
            heights,
        })
    }

    /// Terrain covering `[x_min, x_min + extent_x] x [y_min, y_min + extent_y]`.
    pub fn flat_arena(
        x_min: f64,
        y_min: f64,
        extent_x: f64,
        extent_y: f64,
        resolution: f64,
    ) -> Result<Self, TerrainError> {
        let length = (extent_x / resolution).round() as usize + 1;
        let width = (extent_y / resolution).round() as usize + 1;
        Heightfield::flat(x_min, y_min, resolution, length, width)
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn origin(&self) -> (f64, f64) {
        (self.origin_x, self.origin_y)
    }

    pub fn x_range(&self) -> (f64, f64) {
        (
            self.origin_x,
            self.origin_x + (self.length - 1) as f64 * self.resolution,
        )
    }

    pub fn y_range(&self) -> (f64, f64) {
        (self.origin_y, self.origin_y + (self.width - 1) as f64 * self.resolution)
    }

    pub fn node(&self, i: usize, j: usize) -> f64 {
        self.heights[j * self.length + i]
    }

    pub fn set_node(&mut self, i: usize, j: usize, h: f64) {
        self.heights[j * self.length + i] = h;
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (x0, x1) = self.x_range();
        let (y0, y1) = self.y_range();
        x >= x0 && x <= x1 && y >= y0 && y <= y1
    }

    /// Bilinear interpolation of the four nodes around `(x, y)`.
    pub fn height_at(&self, x: f64, y: f64) -> Result<f64, TerrainError> {
        if !self.contains(x, y) {
            return Err(TerrainError::OutOfTerrain { x, y });
        }
        let fx = (x - self.origin_x) / self.resolution;
        let fy = (y - self.origin_y) / self.resolution;
        let i = (fx.floor() as usize).min(self.length - 2);
        let j = (fy.floor() as usize).min(self.width - 2);
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        let h00 = self.node(i, j);
        let h10 = self.node(i + 1, j);
        let h01 = self.node(i, j + 1);
        let h11 = self.node(i + 1, j + 1);
        let low = h00 + (h10 - h00) * tx;
        let high = h01 + (h11 - h01) * tx;
        Ok(low + (high - low) * ty)
    }

    /// Height at the nearest in-bounds point.
    pub fn height_clamped(&self, x: f64, y: f64) -> f64 {
        let (x0, x1) = self.x_range();
        let (y0, y1) = self.y_range();
        self.height_at(x.clamp(x0, x1), y.clamp(y0, y1))
            .expect("clamped point is in bounds")
    }

    /// Raise every node inside the axis-aligned box to at least `h`.
    pub fn stamp_box(&mut self, x0: f64, x1: f64, y0: f64, y1: f64, h: f64) {
        for j in 0..self.width {
            let y = self.origin_y + j as f64 * self.resolution;
            if y < y0 || y > y1 {
                continue;
            }
            for i in 0..self.length {
                let x = self.origin_x + i as f64 * self.resolution;
                if x >= x0 && x <= x1 {
                    let cell = &mut self.heights[j * self.length + i];
                    *cell = cell.max(h);
                }
            }
        }
    }

    /// One row (constant y) per line, space-separated heights in meters.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.heights.len() * 8);
        for row in self.heights.chunks(self.length) {
            let line: Vec<String> = row.iter().map(|h| h.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parse the [`Heightfield::to_text`] grid. Grid placement is not part of
    /// the text and must be supplied.
    pub fn from_text(text: &str, origin_x: f64, origin_y: f64, resolution: f64) -> Result<Self, TerrainError> {
        let mut heights = Vec::new();
        let mut length = None;
        let mut width = 0;
        for (line_no, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut count = 0;
            for (column, tok) in line.split_whitespace().enumerate() {
                let h: f64 = tok
                    .parse()
                    .ok()
                    .filter(|h: &f64| h.is_finite())
                    .ok_or(TerrainError::BadHeight {
                        line: line_no + 1,
                        column: column + 1,
                    })?;
                heights.push(h);
                count += 1;
            }
            match length {
                None => length = Some(count),
                Some(expected) if expected != count => {
                    return Err(TerrainError::RaggedRow {
                        line: line_no + 1,
                        expected,
                        got: count,
                    })
                }
                Some(_) => {}
            }
            width += 1;
        }
        let length = length.unwrap_or(0);
        if length < 2 || width < 2 || !(resolution > 0.0) {
            return Err(TerrainError::BadShape);
        }
        Ok(Heightfield {
            origin_x,
            origin_y,
            resolution,
            length,
            width,
            heights,
        })
    }
}
