//! One-way similarity and two-way rotational stability.
//!
//! For a word `w` with vectors `v_i`, `v_j` in spaces `i`, `j` and maps
//! `R_ij`, `R_ji` fitted independently:
//!
//! * one-way: `cos(v_i·R_ij, v_j)`
//! * round trip from `i`: `cos(v_i·R_ij·R_ji, v_i)`, likewise from `j`
//! * stability: the mean of the two round trips
//!
//! A word missing from either space gets the sentinel `-1` together with
//! `missing = true`, so a genuine score of `-1` stays distinguishable.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::alignment::{fit_pair, RotationMap, RotationPair};
use crate::embedding::{cosine_similarity, EmbeddingSpace};
use crate::error::{Error, Result};

pub const MISSING_SENTINEL: f64 = -1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub word: String,
    /// `"i:j"` for a single comparison, `"avg(i:j,...)"` for averages.
    pub pair: String,
    /// Round-trip similarity from space `i`.
    pub sim_ij: Option<f64>,
    /// Round-trip similarity from space `j`.
    pub sim_ji: Option<f64>,
    pub stab: f64,
    pub missing: bool,
    pub one_way_ij: Option<f64>,
    pub one_way_ji: Option<f64>,
}

impl StabilityRecord {
    fn sentinel(word: &str, pair: String) -> Self {
        StabilityRecord {
            word: word.to_string(),
            pair,
            sim_ij: None,
            sim_ji: None,
            stab: MISSING_SENTINEL,
            missing: true,
            one_way_ij: None,
            one_way_ji: None,
        }
    }
}

fn check_map(map: &RotationMap, from: &EmbeddingSpace, to: &EmbeddingSpace) -> Result<()> {
    if map.from_label != from.frame() || map.to_label != to.frame() || map.dim() != from.dim() {
        return Err(Error::MapMismatch {
            map_from: map.from_label.clone(),
            map_to: map.to_label.clone(),
            from: from.frame().to_string(),
            to: to.frame().to_string(),
        });
    }
    Ok(())
}

fn lookup<'a>(w: &str, space: &'a EmbeddingSpace) -> Result<&'a [f64]> {
    space
        .vector(w)
        .ok_or_else(|| Error::MissingWord(w.to_string(), space.label().to_string()))
}

/// `cos(v_i·R_ij, v_j)`.
pub fn one_way_similarity(
    w: &str,
    space_i: &EmbeddingSpace,
    space_j: &EmbeddingSpace,
    r_ij: &RotationMap,
) -> Result<f64> {
    check_map(r_ij, space_i, space_j)?;
    let mapped = r_ij.map_vector(lookup(w, space_i)?);
    cosine_similarity(&mapped, lookup(w, space_j)?)
}

fn round_trip(v: &[f64], there: &RotationMap, back: &RotationMap) -> Result<f64> {
    let returned = back.map_vector(&there.map_vector(v));
    cosine_similarity(&returned, v)
}

/// Mean of the two round-trip similarities, or `-1` when `w` is missing
/// from either space.
pub fn two_way_stability(
    w: &str,
    space_i: &EmbeddingSpace,
    space_j: &EmbeddingSpace,
    r_ij: &RotationMap,
    r_ji: &RotationMap,
) -> Result<f64> {
    check_map(r_ij, space_i, space_j)?;
    check_map(r_ji, space_j, space_i)?;
    let (Some(vi), Some(vj)) = (space_i.vector(w), space_j.vector(w)) else {
        return Ok(MISSING_SENTINEL);
    };
    let from_i = round_trip(vi, r_ij, r_ji)?;
    let from_j = round_trip(vj, r_ji, r_ij)?;
    Ok((from_i + from_j) / 2.0)
}

/// Two spaces with both fitted directions between them.
#[derive(Debug, Clone)]
pub struct ComparedPair<'a> {
    pub space_i: &'a EmbeddingSpace,
    pub space_j: &'a EmbeddingSpace,
    pub maps: RotationPair,
}

impl<'a> ComparedPair<'a> {
    pub fn new(space_i: &'a EmbeddingSpace, space_j: &'a EmbeddingSpace, maps: RotationPair) -> Result<Self> {
        check_map(&maps.forward, space_i, space_j)?;
        check_map(&maps.backward, space_j, space_i)?;
        Ok(ComparedPair { space_i, space_j, maps })
    }

    /// Fit both directions on `k` anchors each (see [`fit_pair`]).
    pub fn fit(space_i: &'a EmbeddingSpace, space_j: &'a EmbeddingSpace, k: usize) -> Result<Self> {
        let maps = fit_pair(space_i, space_j, k)?;
        Ok(ComparedPair { space_i, space_j, maps })
    }

    pub fn name(&self) -> String {
        format!("{}:{}", self.space_i.label(), self.space_j.label())
    }

    pub fn stability(&self, w: &str) -> Result<f64> {
        two_way_stability(w, self.space_i, self.space_j, &self.maps.forward, &self.maps.backward)
    }

    pub fn record(&self, w: &str) -> Result<StabilityRecord> {
        let (Some(vi), Some(vj)) = (self.space_i.vector(w), self.space_j.vector(w)) else {
            return Ok(StabilityRecord::sentinel(w, self.name()));
        };
        let (fwd, bwd) = (&self.maps.forward, &self.maps.backward);
        let sim_ij = round_trip(vi, fwd, bwd)?;
        let sim_ji = round_trip(vj, bwd, fwd)?;
        Ok(StabilityRecord {
            word: w.to_string(),
            pair: self.name(),
            sim_ij: Some(sim_ij),
            sim_ji: Some(sim_ji),
            stab: (sim_ij + sim_ji) / 2.0,
            missing: false,
            one_way_ij: Some(cosine_similarity(&fwd.map_vector(vi), vj)?),
            one_way_ji: Some(cosine_similarity(&bwd.map_vector(vj), vi)?),
        })
    }
}

/// Mean stability over the comparisons where `w` exists in both spaces;
/// `-1` if it is missing from every one of them.
pub fn averaged_stability(w: &str, comparisons: &[ComparedPair<'_>]) -> Result<f64> {
    if comparisons.is_empty() {
        return Err(Error::InvalidArgument("no comparisons given".into()));
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for pair in comparisons {
        let stab = pair.record(w)?;
        if !stab.missing {
            sum += stab.stab;
            n += 1;
        }
    }
    Ok(if n == 0 { MISSING_SENTINEL } else { sum / n as f64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    /// Words present in every compared space.
    Intersection,
    /// Words present in any compared space; gaps get the sentinel.
    Union,
}

impl std::str::FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intersection" => Ok(Scope::Intersection),
            "union" => Ok(Scope::Union),
            other => Err(Error::InvalidArgument(format!("unknown scope {other:?}"))),
        }
    }
}

fn scoped_words<'s>(spaces: &[&'s EmbeddingSpace], scope: Scope) -> Vec<&'s str> {
    let mut seen = HashSet::new();
    let mut words = Vec::new();
    for space in spaces {
        for w in space.words() {
            if seen.insert(w.as_str()) {
                words.push(w.as_str());
            }
        }
    }
    match scope {
        Scope::Union => words,
        Scope::Intersection => words
            .into_iter()
            .filter(|w| spaces.iter().all(|s| s.contains(w)))
            .collect(),
    }
}

/// One record per in-scope word for a single comparison.
pub fn stability_table(pair: &ComparedPair<'_>, scope: Scope) -> Result<Vec<StabilityRecord>> {
    scoped_words(&[pair.space_i, pair.space_j], scope)
        .into_iter()
        .map(|w| pair.record(w))
        .collect()
}

/// Per-word stability averaged over several comparisons.
pub fn averaged_stability_table(comparisons: &[ComparedPair<'_>], scope: Scope) -> Result<Vec<StabilityRecord>> {
    if comparisons.is_empty() {
        return Err(Error::InvalidArgument("no comparisons given".into()));
    }
    if let [single] = comparisons {
        return stability_table(single, scope);
    }
    let spaces: Vec<&EmbeddingSpace> = comparisons.iter().flat_map(|p| [p.space_i, p.space_j]).collect();
    let name = format!(
        "avg({})",
        comparisons.iter().map(|p| p.name()).collect::<Vec<_>>().join(",")
    );
    scoped_words(&spaces, scope)
        .into_iter()
        .map(|w| {
            let stab = averaged_stability(w, comparisons)?;
            let mut rec = StabilityRecord::sentinel(w, name.clone());
            if comparisons
                .iter()
                .any(|p| p.space_i.contains(w) && p.space_j.contains(w))
            {
                rec.stab = stab;
                rec.missing = false;
            }
            Ok(rec)
        })
        .collect()
}

/// CSV columns: `word,pair,sim_ij,sim_ji,stab,missing,one_way_ij,one_way_ji`.
/// Absent values are empty cells.
pub fn write_stability_csv<W: Write>(records: &[StabilityRecord], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for rec in records {
        writer.serialize(rec)?;
    }
    writer.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn read_stability_csv<R: Read>(input: R) -> Result<Vec<StabilityRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    reader.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn save_stability_csv(records: &[StabilityRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_stability_csv(records, std::io::BufWriter::new(file))
}

pub fn load_stability_csv(path: impl AsRef<Path>) -> Result<Vec<StabilityRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_stability_csv(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::{fit_rotation, select_anchors};
    use ndarray::{array, Array2};

    fn space(label: &str, words: &[&str], vectors: Array2<f64>) -> EmbeddingSpace {
        let n = words.len() as u64;
        EmbeddingSpace::new(
            label,
            words.iter().map(|w| w.to_string()).collect(),
            vectors,
            Some((0..n).map(|i| n - i).collect()),
        )
        .unwrap()
    }

    fn pair_of_identical() -> (EmbeddingSpace, EmbeddingSpace) {
        let v = array![[1.0, 0.2, -0.3], [0.1, 0.9, 0.4], [-0.5, 0.3, 1.1], [0.7, -0.6, 0.2]];
        (
            space("i", &["a", "b", "c", "d"], v.clone()),
            space("j", &["a", "b", "c", "d"], v),
        )
    }

    #[test]
    fn identity_map_gives_unit_similarities() {
        let (si, sj) = pair_of_identical();
        let id = RotationMap::identity("i", "j", 3);
        let back = RotationMap::identity("j", "i", 3);
        for w in ["a", "b", "c", "d"] {
            assert!((one_way_similarity(w, &si, &sj, &id).unwrap() - 1.0).abs() < 1e-12);
            assert!((two_way_stability(w, &si, &sj, &id, &back).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_word_is_sentinel() {
        let (si, _) = pair_of_identical();
        let sj = space(
            "j",
            &["a", "b", "c"],
            array![[1.0, 0.2, -0.3], [0.1, 0.9, 0.4], [-0.5, 0.3, 1.1]],
        );
        let pair = ComparedPair::fit(&si, &sj, 3).unwrap();
        assert_eq!(pair.stability("d").unwrap(), -1.0);
        let rec = pair.record("d").unwrap();
        assert!(rec.missing);
        assert_eq!(rec.stab, -1.0);
        assert!(matches!(
            one_way_similarity("d", &si, &sj, &pair.maps.forward),
            Err(Error::MissingWord(..))
        ));
    }

    #[test]
    fn maps_must_match_spaces() {
        let (si, sj) = pair_of_identical();
        let wrong = RotationMap::identity("j", "i", 3);
        assert!(matches!(
            one_way_similarity("a", &si, &sj, &wrong),
            Err(Error::MapMismatch { .. })
        ));
    }

    #[test]
    fn transposed_backward_map_gives_one() {
        let (si, sj) = pair_of_identical();
        let anchors = select_anchors(&si, &sj, 2).unwrap();
        let fwd = fit_rotation(&si, &sj, &anchors).unwrap();
        let bwd = fwd.inverse();
        for w in si.words() {
            let s = two_way_stability(w, &si, &sj, &fwd, &bwd).unwrap();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn averages() {
        let (si, sj) = pair_of_identical();
        let pair = ComparedPair::fit(&si, &sj, 4).unwrap();
        assert_eq!(
            averaged_stability("a", std::slice::from_ref(&pair)).unwrap(),
            pair.stability("a").unwrap()
        );
        assert!(averaged_stability("a", &[]).is_err());
        assert_eq!(averaged_stability("zz", &[pair]).unwrap(), -1.0);
    }

    #[test]
    fn union_scope_adds_sentinels() {
        let si = space(
            "i",
            &["a", "b", "c", "x"],
            array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.3, 0.1]],
        );
        let sj = space("j", &["a", "b", "c"], array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]);
        let pair = ComparedPair::fit(&si, &sj, 3).unwrap();
        let union = stability_table(&pair, Scope::Union).unwrap();
        assert_eq!(union.len(), 4);
        let x = union.iter().find(|r| r.word == "x").unwrap();
        assert!(x.missing && x.stab == -1.0);
        let inter = stability_table(&pair, Scope::Intersection).unwrap();
        assert_eq!(inter.len(), 3);
        assert!(inter.iter().all(|r| !r.missing && (r.stab - 1.0).abs() < 1e-12));
    }

    #[test]
    fn csv_round_trip() {
        let (si, sj) = pair_of_identical();
        let pair = ComparedPair::fit(&si, &sj, 4).unwrap();
        let mut records = stability_table(&pair, Scope::Union).unwrap();
        records.push(StabilityRecord::sentinel("gone", pair.name()));
        let mut buf = Vec::new();
        write_stability_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("word,pair,sim_ij,sim_ji,stab,missing,one_way_ij,one_way_ji\n"));
        assert!(text.contains("gone,i:j,,,-1.0,true,,"));
        assert_eq!(read_stability_csv(buf.as_slice()).unwrap(), records);
    }
}
