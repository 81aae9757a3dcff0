//! Seeded generator of two versions of a relational-style RDF export with
//! a known alignment between them.
//!
//! Every table row becomes a URI with a `type` edge to its table's class,
//! a multi-word name, some multi-word categorical attributes, an optional reference
//! to a row of the next table and an optional blank address record. The
//! second version deletes rows, inserts fresh rows and near-duplicates of
//! existing ones and introduces character-level typos. It can move the row
//! URIs, and optionally the classes and predicates, to a new prefix.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::GroundTruth;
use crate::keys::{key_index, node_keys};
use crate::model::{disjoint_union, GraphBuilder, Label, NodeId, Origin, TripleGraph};
use crate::ntriples::{parse_str, to_string};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorSpec {
    pub tables: usize,
    /// Rows per table in the first version.
    pub rows: usize,
    /// Attributes per row, including the name.
    pub attributes: usize,
    /// Probability that a row references a row of the next table.
    pub fk_density: f64,
    /// Probability that a literal of a surviving row gets a typo.
    pub edit_rate: f64,
    /// Rows inserted per table, as a fraction of `rows`.
    pub insert_rate: f64,
    /// Probability that a row is deleted.
    pub delete_rate: f64,
    /// Share of inserted rows that copy a first-version row, preferably a
    /// deleted one, with a changed name.
    pub near_duplicate_rate: f64,
    /// Give the row URIs of the second version a different prefix.
    pub rename: bool,
    /// With `rename`, move classes and predicates to the new prefix as well.
    pub rename_schema: bool,
    /// Probability that a row has a blank address record.
    pub blank_rate: f64,
    /// Words per name.
    pub name_words: usize,
    /// Distinct values per categorical attribute.
    pub categories: usize,
    pub seed: u64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            tables: 3,
            rows: 40,
            attributes: 3,
            fk_density: 0.5,
            edit_rate: 0.05,
            insert_rate: 0.1,
            delete_rate: 0.1,
            near_duplicate_rate: 0.5,
            rename: false,
            rename_schema: false,
            blank_rate: 0.2,
            name_words: 5,
            categories: 4,
            seed: 1,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GeneratorError {
    #[error("{0} must lie in [0, 1], got {1}")]
    Rate(&'static str, f64),
    #[error("{0} must be at least 1")]
    Zero(&'static str),
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        for (name, v) in [
            ("fk_density", self.fk_density),
            ("edit_rate", self.edit_rate),
            ("insert_rate", self.insert_rate),
            ("delete_rate", self.delete_rate),
            ("near_duplicate_rate", self.near_duplicate_rate),
            ("blank_rate", self.blank_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(GeneratorError::Rate(name, v));
            }
        }
        for (name, v) in [("tables", self.tables), ("attributes", self.attributes), ("name_words", self.name_words), ("categories", self.categories)] {
            if v == 0 {
                return Err(GeneratorError::Zero(name));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedVersions {
    pub v1: TripleGraph,
    pub v2: TripleGraph,
    pub v1_text: String,
    pub v2_text: String,
    pub truth: GroundTruth,
}

#[derive(Debug, Clone)]
struct Row {
    serial: usize,
    table: usize,
    name: String,
    attrs: Vec<String>,
    reference: Option<usize>,
    address: Option<(String, String)>,
}

struct Vocab {
    words: Vec<String>,
}

impl Vocab {
    fn new(rng: &mut ChaCha8Rng, size: usize) -> Self {
        const ON: [&str; 14] = ["b", "c", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v"];
        const NU: [&str; 5] = ["a", "e", "i", "o", "u"];
        let mut words = Vec::with_capacity(size);
        let mut seen = rustc_hash::FxHashSet::default();
        while words.len() < size {
            let syllables = rng.gen_range(2..=3);
            let w: String = (0..syllables)
                .map(|_| format!("{}{}", ON[rng.gen_range(0..ON.len())], NU[rng.gen_range(0..NU.len())]))
                .collect();
            if seen.insert(w.clone()) {
                words.push(w);
            }
        }
        Vocab { words }
    }

    fn pick(&self, rng: &mut ChaCha8Rng) -> &str {
        &self.words[rng.gen_range(0..self.words.len())]
    }
}

fn typo(rng: &mut ChaCha8Rng, s: &str) -> String {
    let mut chars: Vec<char> = s.chars().collect();
    let letter = (b'a' + rng.gen_range(0..26u8)) as char;
    if chars.is_empty() {
        return letter.to_string();
    }
    let at = rng.gen_range(0..chars.len());
    match rng.gen_range(0..3) {
        0 => {
            let old = chars[at];
            chars[at] = if letter == old { 'z' } else { letter };
        }
        1 => chars.insert(at, letter),
        _ => {
            chars.remove(at);
        }
    }
    chars.into_iter().collect()
}

struct Names {
    base: String,
    schema: String,
}

impl Names {
    fn row(&self, r: &Row) -> String {
        format!("{}T{}/{}", self.base, r.table, r.serial)
    }
    fn class(&self, t: usize) -> String {
        format!("{}T{}", self.schema, t)
    }
    fn attr(&self, t: usize, k: usize) -> String {
        if k == 0 {
            format!("{}T{}#name", self.schema, t)
        } else {
            format!("{}T{}#a{}", self.schema, t, k)
        }
    }
    fn reference(&self, t: usize) -> String {
        format!("{}T{}#ref", self.schema, t)
    }
    fn address(&self, t: usize) -> String {
        format!("{}T{}#address", self.schema, t)
    }
    fn street(&self) -> String {
        format!("{}street", self.schema)
    }
    fn city(&self) -> String {
        format!("{}city", self.schema)
    }
    fn kind(&self) -> String {
        format!("{}type", self.schema)
    }
}

fn build(rows: &[Row], names: &Names) -> TripleGraph {
    let mut b = GraphBuilder::new(Origin::Source);
    let by_serial: rustc_hash::FxHashMap<usize, &Row> = rows.iter().map(|r| (r.serial, r)).collect();
    let kind = b.uri(&names.kind());
    for r in rows {
        let s = b.uri(&names.row(r));
        let class = b.uri(&names.class(r.table));
        b.triple(s, kind, class);
        let name_p = b.uri(&names.attr(r.table, 0));
        let name = b.literal(&r.name);
        b.triple(s, name_p, name);
        for (k, v) in r.attrs.iter().enumerate() {
            let p = b.uri(&names.attr(r.table, k + 1));
            let o = b.literal(v);
            b.triple(s, p, o);
        }
        if let Some(target) = r.reference.and_then(|x| by_serial.get(&x)) {
            let p = b.uri(&names.reference(r.table));
            let o = b.uri(&names.row(target));
            b.triple(s, p, o);
        }
        if let Some((street, city)) = &r.address {
            let p = b.uri(&names.address(r.table));
            let blank = b.add_blank();
            b.triple(s, p, blank);
            let sp = b.uri(&names.street());
            let so = b.literal(street);
            b.triple(blank, sp, so);
            let cp = b.uri(&names.city());
            let co = b.literal(city);
            b.triple(blank, cp, co);
        }
    }
    b.build()
}

/// Generates both versions and the ground truth relating their URI and
/// blank nodes.
pub fn generate_versions(spec: &GeneratorSpec) -> Result<GeneratedVersions, GeneratorError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let vocab = Vocab::new(&mut rng, 1500);
    let categories: Vec<Vec<String>> = (1..spec.attributes)
        .map(|_| (0..spec.categories).map(|_| (0..3).map(|_| vocab.pick(&mut rng)).collect::<Vec<_>>().join(" ")).collect())
        .collect();
    let cities: Vec<String> = (0..8).map(|_| vocab.pick(&mut rng).to_string()).collect();

    let mut serial = 0usize;
    let fresh_row = |rng: &mut ChaCha8Rng, table: usize, serial: &mut usize| -> Row {
        *serial += 1;
        let mut words: Vec<String> = (0..spec.name_words).map(|_| vocab.pick(rng).to_string()).collect();
        words.push(serial.to_string());
        let address = (rng.gen::<f64>() < spec.blank_rate).then(|| {
            (format!("{} {} street", rng.gen_range(1..200), vocab.pick(rng)), cities[rng.gen_range(0..cities.len())].clone())
        });
        Row {
            serial: *serial,
            table,
            name: words.join(" "),
            attrs: categories.iter().map(|c| c[rng.gen_range(0..c.len())].clone()).collect(),
            reference: None,
            address,
        }
    };

    let mut v1: Vec<Row> = Vec::new();
    for t in 0..spec.tables {
        for _ in 0..spec.rows {
            v1.push(fresh_row(&mut rng, t, &mut serial));
        }
    }
    let by_table = |rows: &[Row], t: usize| -> Vec<usize> { rows.iter().filter(|r| r.table == t).map(|r| r.serial).collect() };
    if spec.tables > 1 {
        let targets: Vec<Vec<usize>> = (0..spec.tables).map(|t| by_table(&v1, (t + 1) % spec.tables)).collect();
        for r in v1.iter_mut() {
            if rng.gen::<f64>() < spec.fk_density && !targets[r.table].is_empty() {
                r.reference = Some(*targets[r.table].choose(&mut rng).expect("non-empty"));
            }
        }
    }

    let mut v2: Vec<Row> = Vec::new();
    let mut survivors: Vec<usize> = Vec::new();
    for r in &v1 {
        if rng.gen::<f64>() < spec.delete_rate {
            continue;
        }
        let mut r2 = r.clone();
        if rng.gen::<f64>() < spec.edit_rate {
            r2.name = typo(&mut rng, &r2.name);
        }
        for a in r2.attrs.iter_mut() {
            if rng.gen::<f64>() < spec.edit_rate {
                *a = typo(&mut rng, a);
            }
        }
        if let Some((street, _)) = r2.address.as_mut() {
            if rng.gen::<f64>() < spec.edit_rate {
                *street = typo(&mut rng, street);
            }
        }
        survivors.push(r.serial);
        v2.push(r2);
    }
    let alive: rustc_hash::FxHashSet<usize> = survivors.iter().copied().collect();
    for r in v2.iter_mut() {
        if r.reference.is_some_and(|x| !alive.contains(&x)) {
            r.reference = None;
        }
    }
    let inserts = (spec.insert_rate * spec.rows as f64).round() as usize;
    for t in 0..spec.tables {
        // Near-duplicates replace deleted rows where there are any.
        let deleted: Vec<&Row> = v1.iter().filter(|r| r.table == t && !alive.contains(&r.serial)).collect();
        let originals = if deleted.is_empty() { v1.iter().filter(|r| r.table == t).collect() } else { deleted };
        for _ in 0..inserts {
            let mut row = fresh_row(&mut rng, t, &mut serial);
            if !originals.is_empty() && rng.gen::<f64>() < spec.near_duplicate_rate {
                let src = originals[rng.gen_range(0..originals.len())];
                let mut words: Vec<String> = src.name.split(' ').map(str::to_string).collect();
                let last = words.len() - 1;
                let renamed = rng.gen_range(1..=2).min(last);
                for k in rand::seq::index::sample(&mut rng, last, renamed) {
                    words[k] = vocab.pick(&mut rng).to_string();
                }
                row.name = words.join(" ");
                row.attrs = src.attrs.clone();
                row.address = src.address.clone();
                row.reference = src.reference.filter(|x| alive.contains(x));
            } else if spec.tables > 1 && rng.gen::<f64>() < spec.fk_density {
                let next = (t + 1) % spec.tables;
                let pool: Vec<usize> = v2.iter().filter(|r| r.table == next).map(|r| r.serial).collect();
                row.reference = pool.choose(&mut rng).copied();
            }
            v2.push(row);
        }
    }

    let schema = |v: &str| if spec.rename_schema { format!("http://example.org/{v}/schema/") } else { "http://example.org/schema/".to_string() };
    let n1 = Names { base: "http://example.org/v1/".into(), schema: schema("v1") };
    let n2 = Names {
        base: if spec.rename { "http://example.org/v2/".into() } else { "http://example.org/v1/".into() },
        schema: if spec.rename { schema("v2") } else { schema("v1") },
    };
    // Serialize and parse back so that the graphs match what readers of the files see.
    let v1_text = to_string(&build(&v1, &n1));
    let v2_text = to_string(&build(&v2, &n2));
    let g1 = parse_str(&v1_text, Origin::Source).expect("generated text parses");
    let g2 = parse_str(&v2_text, Origin::Source).expect("generated text parses");

    let g = disjoint_union(&g1, &g2);
    let keys = node_keys(&g);
    let i1 = key_index(&g, &keys, Origin::Source);
    let i2 = key_index(&g, &keys, Origin::Target);
    let mut pairs: Vec<(String, String)> = Vec::new();
    let push_uri = |a: String, b: String, pairs: &mut Vec<(String, String)>| {
        let (a, b) = (format!("U:{a}"), format!("U:{b}"));
        if i1.contains_key(&a) && i2.contains_key(&b) {
            pairs.push((a, b));
        }
    };
    push_uri(n1.kind(), n2.kind(), &mut pairs);
    push_uri(n1.street(), n2.street(), &mut pairs);
    push_uri(n1.city(), n2.city(), &mut pairs);
    for t in 0..spec.tables {
        push_uri(n1.class(t), n2.class(t), &mut pairs);
        for k in 0..spec.attributes {
            push_uri(n1.attr(t, k), n2.attr(t, k), &mut pairs);
        }
        push_uri(n1.reference(t), n2.reference(t), &mut pairs);
        push_uri(n1.address(t), n2.address(t), &mut pairs);
    }
    let v2_by_serial: rustc_hash::FxHashMap<usize, &Row> = v2.iter().map(|r| (r.serial, r)).collect();
    for r in &v1 {
        let Some(r2) = v2_by_serial.get(&r.serial) else { continue };
        push_uri(n1.row(r), n2.row(r2), &mut pairs);
        if r.address.is_some() {
            let b1 = address_blank(&g, &i1, &n1.row(r), &n1.address(r.table));
            let b2 = address_blank(&g, &i2, &n2.row(r2), &n2.address(r2.table));
            if let (Some(b1), Some(b2)) = (b1, b2) {
                pairs.push((keys[b1.index()].0.clone(), keys[b2.index()].0.clone()));
            }
        }
    }
    pairs.sort();
    let truth = GroundTruth::new(pairs).expect("rows map one to one");
    Ok(GeneratedVersions { v1: g1, v2: g2, v1_text, v2_text, truth })
}

fn address_blank(
    g: &TripleGraph,
    index: &rustc_hash::FxHashMap<String, NodeId>,
    row: &str,
    pred: &str,
) -> Option<NodeId> {
    let s = *index.get(&format!("U:{row}"))?;
    let p = *index.get(&format!("U:{pred}"))?;
    g.out_slice(s).iter().find(|&&(q, o)| q == p && *g.label(o) == Label::Blank).map(|&(_, o)| o)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate;
    use crate::partition::{align, trivial_partition, ColorInterner};

    #[test]
    fn same_seed_same_bytes() {
        let spec = GeneratorSpec::default();
        let a = generate_versions(&spec).unwrap();
        let b = generate_versions(&spec).unwrap();
        assert_eq!(a.v1_text, b.v1_text);
        assert_eq!(a.v2_text, b.v2_text);
        assert_eq!(a.truth, b.truth);
        let c = generate_versions(&GeneratorSpec { seed: 2, ..spec }).unwrap();
        assert_ne!(a.v2_text, c.v2_text);
    }

    #[test]
    fn default_output_is_valid() {
        let out = generate_versions(&GeneratorSpec::default()).unwrap();
        assert!(validate(&out.v1).is_empty());
        assert!(validate(&out.v2).is_empty());
        let g = disjoint_union(&out.v1, &out.v2);
        assert!(out.truth.resolve(&g).is_ok());
        assert!(out.v1.kind_counts(None).2 > 0);
    }

    #[test]
    fn no_edits_no_rename_gives_identity() {
        let spec = GeneratorSpec { edit_rate: 0.0, insert_rate: 0.0, delete_rate: 0.0, ..Default::default() };
        let out = generate_versions(&spec).unwrap();
        assert_eq!(out.v1_text, out.v2_text);
        let g = disjoint_union(&out.v1, &out.v2);
        let truth = out.truth.resolve(&g).unwrap();
        let i = ColorInterner::new();
        let report = crate::eval::evaluate(&g, &align(&trivial_partition(&g, &i), &g), &truth);
        // URIs are exact; blank records are unaligned by the trivial partition.
        let blanks = out.v1.kind_counts(None).2;
        assert_eq!(report.source.missing.len(), blanks);
        assert_eq!(report.source.exact.len() + blanks, truth.len());
        assert!(report.source.false_matches.is_empty());
    }

    #[test]
    fn rename_moves_rows_and_keeps_schema() {
        let uris = |g: &TripleGraph| -> rustc_hash::FxHashSet<String> {
            g.labels().iter().filter_map(|l| match l {
                Label::Uri(u) => Some(u.to_string()),
                _ => None,
            }).collect()
        };
        let out = generate_versions(&GeneratorSpec { rename: true, ..Default::default() }).unwrap();
        let (u1, u2) = (uris(&out.v1), uris(&out.v2));
        let shared: Vec<&String> = u1.intersection(&u2).collect();
        assert!(!shared.is_empty());
        assert!(shared.iter().all(|u| u.contains("/schema/")));
        assert!(u2.iter().any(|u| u.starts_with("http://example.org/v2/")));

        let all = generate_versions(&GeneratorSpec { rename: true, rename_schema: true, ..Default::default() }).unwrap();
        assert!(uris(&all.v1).is_disjoint(&uris(&all.v2)));
    }

    #[test]
    fn deleting_everything_empties_truth_of_rows() {
        let out = generate_versions(&GeneratorSpec { delete_rate: 1.0, insert_rate: 0.0, ..Default::default() }).unwrap();
        assert!(out.truth.pairs.iter().all(|(s, _)| !s.contains("/T0/") && !s.contains("/T1/") && !s.contains("/T2/")));
        assert_eq!(out.v2.triple_count(), 0);
        assert!(out.truth.pairs.is_empty());
    }

    #[test]
    fn zero_rows_gives_empty_graphs() {
        let out = generate_versions(&GeneratorSpec { rows: 0, ..Default::default() }).unwrap();
        assert_eq!(out.v1.triple_count(), 0);
        assert!(out.truth.pairs.is_empty());
    }

    #[test]
    fn invalid_rates_are_rejected() {
        let bad = GeneratorSpec { edit_rate: 1.5, ..Default::default() };
        assert_eq!(generate_versions(&bad).unwrap_err(), GeneratorError::Rate("edit_rate", 1.5));
        assert!(generate_versions(&GeneratorSpec { tables: 0, ..Default::default() }).is_err());
    }
}
