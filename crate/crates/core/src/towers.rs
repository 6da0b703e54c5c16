//! Kakutani-Rohlin towers of the Beatty suspension, read off the symbolic
//! gap sequence of `ω(α)`.
//!
//! A level-0 floor is a gap letter; a level-(l+1) floor is a return word to
//! the level-l base floor. Measures are empirical frequencies per unit
//! length over a fixed window.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::environments::{beatty_points, AlphaValue};
use crate::{Error, Result};

/// Fewest base occurrences accepted by [`induce_tower`].
pub const MIN_BASE_COUNT: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Floor {
    pub label: String,
    pub height: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tower {
    pub level: usize,
    /// Floors sorted by label.
    pub floors: Vec<Floor>,
    /// Index of the base floor, the smallest label.
    pub base: usize,
    pub empirical_nu: Vec<f64>,
    /// The gap sequence has a single letter at this level.
    pub periodic: bool,
    pub window_length: f64,
    /// Floor indices of the complete level words in window order.
    #[serde(skip)]
    pub symbols: Vec<usize>,
}

impl Tower {
    pub fn base_label(&self) -> &str {
        &self.floors[self.base].label
    }

    pub fn heights(&self) -> Vec<f64> {
        self.floors.iter().map(|f| f.height).collect()
    }

    /// `Σ_α ν_α H_α`, the fraction of the window covered by complete words.
    pub fn total_mass(&self) -> f64 {
        self.floors.iter().zip(&self.empirical_nu).map(|(f, n)| f.height * n).sum()
    }
}

/// `M[α][β]`: occurrences of level-l floor `α` in level-(l+1) floor `β`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyMatrix {
    pub entries: Vec<Vec<u64>>,
}

impl HomologyMatrix {
    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    /// `Σ_α M[α][β] H_α` for every column `β`.
    pub fn column_heights(&self, lower: &[f64]) -> Vec<f64> {
        (0..self.cols()).map(|b| self.entries.iter().zip(lower).map(|(row, h)| row[b] as f64 * h).sum()).collect()
    }
}

fn letter(gap: i64, short: i64) -> char {
    if gap == short {
        'a'
    } else {
        'b'
    }
}

/// The gap-letter tower of `ω(α)` over `[0, window_length]`.
pub fn level0_tower(alpha: &AlphaValue, window_length: f64) -> Result<Tower> {
    let long = alpha.long_gap();
    if !(window_length >= 1e3 * long as f64) {
        return Err(Error::domain(format!("window {window_length} shorter than 1000 times the largest gap {long}")));
    }
    let pts = beatty_points(alpha, 0.0, window_length)?;
    let short = alpha.short_gap();
    let gaps = alpha.gaps();
    let floors: Vec<Floor> =
        gaps.iter().map(|&g| Floor { label: letter(g, short).to_string(), height: g as f64 }).collect();
    let symbols: Vec<usize> =
        pts.windows(2).map(|w| gaps.iter().position(|&g| g == w[1] - w[0]).expect("gap law")).collect();
    Ok(finish(0, floors, symbols, window_length))
}

fn finish(level: usize, floors: Vec<Floor>, symbols: Vec<usize>, window_length: f64) -> Tower {
    let mut counts = vec![0usize; floors.len()];
    for &s in &symbols {
        counts[s] += 1;
    }
    let base = (0..floors.len()).min_by(|&a, &b| floors[a].label.cmp(&floors[b].label)).expect("nonempty tower");
    Tower {
        level,
        periodic: floors.len() == 1,
        empirical_nu: counts.iter().map(|&c| c as f64 / window_length).collect(),
        base,
        floors,
        window_length,
        symbols,
    }
}

/// Induces on the base floor: level-(l+1) floors are the return words to
/// the base read from the level-l symbol sequence.
///
/// Only complete words, from one base occurrence to the next, are kept.
pub fn induce_tower(t: &Tower) -> Result<(Tower, HomologyMatrix)> {
    let starts: Vec<usize> = t.symbols.iter().enumerate().filter(|(_, &s)| s == t.base).map(|(i, _)| i).collect();
    if starts.len() < MIN_BASE_COUNT {
        return Err(Error::insufficient(format!(
            "base floor seen {} times, need at least {MIN_BASE_COUNT}",
            starts.len()
        )));
    }
    let mut words: BTreeMap<String, (Vec<usize>, usize)> = BTreeMap::new();
    let mut sequence = Vec::with_capacity(starts.len());
    for w in starts.windows(2) {
        let word = &t.symbols[w[0]..w[1]];
        let label: String = word.iter().map(|&s| t.floors[s].label.as_str()).collect();
        words.entry(label.clone()).or_insert_with(|| (word.to_vec(), 0)).1 += 1;
        sequence.push(label);
    }
    if let Some((label, _)) = words.iter().find(|(_, (_, c))| *c < 2) {
        return Err(Error::insufficient(format!("return word {label} seen fewer than twice")));
    }
    let index: BTreeMap<&String, usize> = words.keys().enumerate().map(|(i, k)| (k, i)).collect();
    let mut entries = vec![vec![0u64; words.len()]; t.floors.len()];
    let mut floors = Vec::with_capacity(words.len());
    for (b, (label, (word, _))) in words.iter().enumerate() {
        for &s in word {
            entries[s][b] += 1;
        }
        floors.push(Floor { label: label.clone(), height: word.iter().map(|&s| t.floors[s].height).sum() });
    }
    let symbols = sequence.iter().map(|l| index[l]).collect();
    Ok((finish(t.level + 1, floors, symbols, t.window_length), HomologyMatrix { entries }))
}

/// `max_α |ν^l_α − Σ_β M[α][β] ν^{l+1}_β|`.
pub fn tower_measure_residual(lower: &Tower, upper: &Tower, m: &HomologyMatrix) -> Result<f64> {
    if upper.level != lower.level + 1 {
        return Err(Error::domain(format!("levels {} and {} are not consecutive", lower.level, upper.level)));
    }
    if m.rows() != lower.floors.len() || m.cols() != upper.floors.len() || m.entries.iter().any(|r| r.len() != m.cols()) {
        return Err(Error::domain(format!(
            "homology matrix is {}x{}, towers have {} and {} floors",
            m.rows(),
            m.cols(),
            lower.floors.len(),
            upper.floors.len()
        )));
    }
    Ok(m.entries
        .iter()
        .zip(&lower.empirical_nu)
        .map(|(row, nu)| (nu - row.iter().zip(&upper.empirical_nu).map(|(&k, n)| k as f64 * n).sum::<f64>()).abs())
        .fold(0.0, f64::max))
}
