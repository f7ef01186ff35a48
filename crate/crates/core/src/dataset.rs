//! Tabular classification data and weighted views over subsets of it.
//!
//! A [`Dataset`] is immutable once built. Subsets of rows are handled through
//! [`SampleView`], which also carries the per-sample weights used for
//! boosting, so reweighting never copies feature data.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tree::Split;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Column-major feature storage: `columns[f][i]` is feature `f` of row `i`.
    columns: Vec<Vec<f64>>,
    labels: Vec<usize>,
    class_count: usize,
    feature_names: Vec<String>,
    class_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from row-major features.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<usize>, class_count: usize) -> Result<Self> {
        let p = rows.first().map(Vec::len).unwrap_or(0);
        let mut columns = vec![Vec::with_capacity(rows.len()); p];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::RaggedRow {
                    row: i,
                    found: row.len(),
                    expected: p,
                });
            }
            for (f, &v) in row.iter().enumerate() {
                columns[f].push(v);
            }
        }
        Self::from_columns(columns, labels, class_count)
    }

    pub fn from_columns(
        columns: Vec<Vec<f64>>,
        labels: Vec<usize>,
        class_count: usize,
    ) -> Result<Self> {
        let feature_names = (0..columns.len()).map(|f| format!("f{f}")).collect();
        let class_names = (0..class_count).map(|k| k.to_string()).collect();
        let data = Dataset {
            columns,
            labels,
            class_count,
            feature_names,
            class_names,
        };
        data.validate()?;
        Ok(data)
    }

    fn validate(&self) -> Result<()> {
        let n = self.labels.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        if self.columns.is_empty() {
            return Err(Error::InvalidDataset(
                "at least one feature is required".into(),
            ));
        }
        if self.class_count == 0 {
            return Err(Error::InvalidDataset("class count must be positive".into()));
        }
        for (f, col) in self.columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::InvalidDataset(format!(
                    "feature {f} has {} values for {n} labels",
                    col.len()
                )));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::Parse {
                    row: i,
                    column: self.feature_names[f].clone(),
                    value: col[i].to_string(),
                });
            }
        }
        if let Some(&bad) = self.labels.iter().find(|&&y| y >= self.class_count) {
            return Err(Error::InvalidDataset(format!(
                "label {bad} is not below class count {}",
                self.class_count
            )));
        }
        Ok(())
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.columns.len() {
            return Err(Error::InvalidDataset(format!(
                "{} feature names for {} features",
                names.len(),
                self.columns.len()
            )));
        }
        self.feature_names = names;
        Ok(self)
    }

    /// Re-encodes labels against another dataset's class names, so that a
    /// test file shares the training file's class indices. Fails on a label
    /// the vocabulary lacks.
    pub fn with_class_names_of(mut self, reference: &Dataset) -> Result<Self> {
        let lookup: HashMap<&str, usize> = reference
            .class_names
            .iter()
            .enumerate()
            .map(|(k, name)| (name.as_str(), k))
            .collect();
        let mut labels = Vec::with_capacity(self.labels.len());
        for &y in &self.labels {
            let name = &self.class_names[y];
            let k = *lookup.get(name.as_str()).ok_or_else(|| {
                Error::InvalidDataset(format!(
                    "label {name:?} does not occur in the training data"
                ))
            })?;
            labels.push(k);
        }
        self.labels = labels;
        self.class_count = reference.class_count;
        self.class_names = reference.class_names.clone();
        Ok(self)
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// A dataset with a single class cannot be split usefully; fits on it
    /// return a single leaf.
    pub fn is_degenerate(&self) -> bool {
        self.class_count < 2
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, row: usize) -> usize {
        self.labels[row]
    }

    pub fn column(&self, feature: usize) -> &[f64] {
        &self.columns[feature]
    }

    #[inline]
    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.columns[feature][row]
    }

    pub fn row(&self, row: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[row]).collect()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// View over every row with uniform weights.
    pub fn view(&self) -> SampleView<'_> {
        SampleView::full(self)
    }

    /// Writes the dataset as CSV with a header row; the label is the last
    /// column and is written as its class index.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push("label");
        out.write_record(&header)?;
        let mut record = Vec::with_capacity(self.n_features() + 1);
        for i in 0..self.n_samples() {
            record.clear();
            record.extend(self.columns.iter().map(|c| c[i].to_string()));
            record.push(self.labels[i].to_string());
            out.write_record(&record)?;
        }
        out.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

/// Which column of a CSV file holds the class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
    Last,
}

impl LabelColumn {
    /// Interprets a user string: a header name when one matches, otherwise a
    /// zero-based column index.
    pub fn parse(spec: &str) -> Self {
        match spec.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(spec.to_string()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub label: LabelColumn,
    pub has_header: bool,
    pub delimiter: u8,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            label: LabelColumn::Last,
            has_header: true,
            delimiter: b',',
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, options)
}

/// Parses CSV text into a [`Dataset`].
///
/// Labels that are all non-negative integers are mapped to class indices in
/// ascending numeric order; any other labels are encoded in order of first
/// appearance.
pub fn read_csv<R: Read>(reader: R, options: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(options.has_header)
        .delimiter(options.delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header: Option<Vec<String>> = if options.has_header {
        Some(rdr.headers()?.iter().map(str::to_string).collect())
    } else {
        None
    };

    let mut records = Vec::new();
    for rec in rdr.records() {
        records.push(rec?);
    }
    let width = match (&header, records.first()) {
        (Some(h), _) if !h.is_empty() => h.len(),
        (_, Some(r)) => r.len(),
        _ => return Err(Error::Empty),
    };
    if records.is_empty() {
        return Err(Error::Empty);
    }
    if width < 2 {
        return Err(Error::InvalidDataset(
            "need at least one feature column and a label column".into(),
        ));
    }

    let label_idx = match &options.label {
        LabelColumn::Last => width - 1,
        LabelColumn::Index(i) => {
            // A header literally named "3" wins over the index 3.
            let by_name = header
                .as_ref()
                .and_then(|h| h.iter().position(|c| *c == i.to_string()));
            match by_name {
                Some(j) => j,
                None if *i < width => *i,
                None => return Err(Error::MissingLabelColumn(i.to_string())),
            }
        }
        LabelColumn::Name(name) => header
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| Error::MissingLabelColumn(name.clone()))?,
    };

    let column_names: Vec<String> = match &header {
        Some(h) => h.clone(),
        None => (0..width).map(|j| format!("c{j}")).collect(),
    };
    let first_data_line = if options.has_header { 2 } else { 1 };

    let mut columns = vec![Vec::with_capacity(records.len()); width - 1];
    let mut raw_labels = Vec::with_capacity(records.len());
    for (r, rec) in records.iter().enumerate() {
        if rec.len() != width {
            return Err(Error::RaggedRow {
                row: r + first_data_line,
                found: rec.len(),
                expected: width,
            });
        }
        let mut f = 0;
        for (j, cell) in rec.iter().enumerate() {
            if j == label_idx {
                raw_labels.push(cell.to_string());
                continue;
            }
            let v = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    row: r + first_data_line,
                    column: column_names[j].clone(),
                    value: cell.to_string(),
                })?;
            columns[f].push(v);
            f += 1;
        }
    }

    let (labels, class_names) = encode_labels(&raw_labels);
    let feature_names = match &header {
        Some(h) => h
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != label_idx)
            .map(|(_, name)| name.clone())
            .collect(),
        None => (0..width - 1).map(|f| format!("f{f}")).collect(),
    };

    let class_count = class_names.len();
    let mut data =
        Dataset::from_columns(columns, labels, class_count)?.with_feature_names(feature_names)?;
    data.class_names = class_names;
    Ok(data)
}

fn encode_labels(raw: &[String]) -> (Vec<usize>, Vec<String>) {
    let numeric: Option<Vec<u64>> = raw.iter().map(|s| s.parse::<u64>().ok()).collect();
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut names = Vec::new();
    match numeric {
        Some(values) => {
            let mut distinct = values.clone();
            distinct.sort_unstable();
            distinct.dedup();
            let lookup: HashMap<u64, usize> =
                distinct.iter().enumerate().map(|(k, &v)| (v, k)).collect();
            names = distinct.iter().map(u64::to_string).collect();
            (values.iter().map(|v| lookup[v]).collect(), names)
        }
        None => {
            let labels = raw
                .iter()
                .map(|s| {
                    let next = index.len();
                    *index.entry(s.as_str()).or_insert_with(|| {
                        names.push(s.clone());
                        next
                    })
                })
                .collect();
            (labels, names)
        }
    }
}

/// Class of a point on a `cells × cells` checkerboard over the unit square.
pub fn checkerboard_label(x: f64, y: f64, cells: usize) -> usize {
    let c = cells as f64;
    (((c * x).floor() + (c * y).floor()) as i64).rem_euclid(2) as usize
}

/// `n` uniform points on the unit square labelled by the 2×2 XOR pattern
/// `(⌊2x⌋ + ⌊2y⌋) mod 2`.
pub fn generate_xor(n: usize, seed: u64) -> Result<Dataset> {
    generate_checkerboard(n, 2, seed)
}

/// Generalisation of [`generate_xor`] to a `cells × cells` board.
pub fn generate_checkerboard(n: usize, cells: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Empty);
    }
    if cells == 0 {
        return Err(Error::InvalidDataset(
            "checkerboard needs at least one cell".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = rng.gen();
        let y: f64 = rng.gen();
        xs.push(x);
        ys.push(y);
        labels.push(checkerboard_label(x, y, cells));
    }
    Dataset::from_columns(vec![xs, ys], labels, 2)?.with_feature_names(vec!["x".into(), "y".into()])
}

/// Deterministic XOR on an `m × m` lattice of cell centres. For even `m`
/// every row and column of the lattice is exactly class balanced.
pub fn xor_lattice(m: usize) -> Result<Dataset> {
    let mut xs = Vec::with_capacity(m * m);
    let mut ys = Vec::with_capacity(m * m);
    let mut labels = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let x = (i as f64 + 0.5) / m as f64;
            let y = (j as f64 + 0.5) / m as f64;
            xs.push(x);
            ys.push(y);
            labels.push(checkerboard_label(x, y, 2));
        }
    }
    Dataset::from_columns(vec![xs, ys], labels, 2)?.with_feature_names(vec!["x".into(), "y".into()])
}

/// Random `k`-class data with `p` features on a coarse grid (so repeated
/// values occur). Labels follow a hidden axis-aligned rule with 20% noise.
pub fn random_classification(n: usize, p: usize, k: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Empty);
    }
    if p == 0 || k == 0 {
        return Err(Error::InvalidDataset("need p >= 1 and k >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let columns: Vec<Vec<f64>> = (0..p)
        .map(|_| {
            (0..n)
                .map(|_| f64::from(rng.gen_range(0..20u32)) / 20.0)
                .collect()
        })
        .collect();
    let f_a = rng.gen_range(0..p);
    let f_b = rng.gen_range(0..p);
    let t_a: f64 = rng.gen_range(0.2..0.8);
    let t_b: f64 = rng.gen_range(0.2..0.8);
    let labels = (0..n)
        .map(|i| {
            if rng.gen_bool(0.2) {
                rng.gen_range(0..k)
            } else {
                let cell =
                    usize::from(columns[f_a][i] <= t_a) * 2 + usize::from(columns[f_b][i] <= t_b);
                cell % k
            }
        })
        .collect();
    Dataset::from_columns(columns, labels, k)
}

/// A subset of a dataset's rows together with per-sample weights.
///
/// Indices are unique and strictly increasing. Weights are indexed by row of
/// the underlying dataset; when none are given every row weighs 1, so weight
/// masses equal sample counts and mass ratios equal count ratios.
#[derive(Debug, Clone)]
pub struct SampleView<'a> {
    data: &'a Dataset,
    indices: Vec<usize>,
    weights: Option<&'a [f64]>,
    mass: f64,
}

impl<'a> SampleView<'a> {
    pub fn full(data: &'a Dataset) -> Self {
        let indices: Vec<usize> = (0..data.n_samples()).collect();
        let mass = indices.len() as f64;
        SampleView {
            data,
            indices,
            weights: None,
            mass,
        }
    }

    /// Every row of `data` weighted by `weights` (one entry per row).
    pub fn weighted(data: &'a Dataset, weights: &'a [f64]) -> Result<Self> {
        if weights.len() != data.n_samples() {
            return Err(Error::InvalidWeights(format!(
                "{} weights for {} samples",
                weights.len(),
                data.n_samples()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidWeights(
                "weights must be finite and non-negative".into(),
            ));
        }
        let mass: f64 = weights.iter().sum();
        if !(mass > 0.0) {
            return Err(Error::InvalidWeights(
                "total weight must be positive".into(),
            ));
        }
        Ok(SampleView {
            data,
            indices: (0..data.n_samples()).collect(),
            weights: Some(weights),
            mass,
        })
    }

    /// Restricts the view to `indices`, which must be strictly increasing row
    /// numbers with positive total weight.
    pub fn subset(&self, indices: Vec<usize>) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDataset(
                "view indices must be strictly increasing".into(),
            ));
        }
        if indices.last().is_some_and(|&i| i >= self.data.n_samples()) {
            return Err(Error::InvalidDataset("view index out of range".into()));
        }
        let mass = self.mass_of(&indices);
        if !(mass > 0.0) {
            return Err(Error::InvalidWeights("view has no weight mass".into()));
        }
        Ok(self.child(indices, mass))
    }

    fn child(&self, indices: Vec<usize>, mass: f64) -> Self {
        SampleView {
            data: self.data,
            indices,
            weights: self.weights,
            mass,
        }
    }

    pub fn data(&self) -> &'a Dataset {
        self.data
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Total weight of the rows in the view.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    #[inline]
    pub fn weight(&self, row: usize) -> f64 {
        match self.weights {
            Some(w) => w[row],
            None => 1.0,
        }
    }

    fn mass_of(&self, indices: &[usize]) -> f64 {
        match self.weights {
            Some(w) => indices.iter().map(|&i| w[i]).sum(),
            None => indices.len() as f64,
        }
    }

    /// Weight mass of each class within the view.
    pub fn class_weights(&self) -> Vec<f64> {
        let mut totals = vec![0.0; self.data.class_count()];
        for &i in &self.indices {
            totals[self.data.label(i)] += self.weight(i);
        }
        totals
    }

    /// Weighted-majority class (lowest index on ties) and its weight mass.
    pub fn majority(&self) -> (usize, f64) {
        majority_of(&self.class_weights())
    }

    /// True when at most one class carries weight.
    pub fn is_pure(&self) -> bool {
        self.class_weights().iter().filter(|&&w| w > 0.0).count() <= 1
    }

    /// Splits the view into rows with `value <= threshold` (left) and the
    /// rest (right), returning both children and the left weight fraction.
    ///
    /// Fails with [`Error::DegenerateSplit`] when either child is empty or
    /// carries no weight.
    pub fn partition(&self, split: &Split) -> Result<(SampleView<'a>, SampleView<'a>, f64)> {
        if split.feature >= self.data.n_features() {
            return Err(Error::DimensionMismatch {
                feature: split.feature,
                dim: self.data.n_features(),
            });
        }
        let column = self.data.column(split.feature);
        let (left, right): (Vec<usize>, Vec<usize>) = self
            .indices
            .iter()
            .partition(|&&i| column[i] <= split.threshold);
        let mass_left = self.mass_of(&left);
        let mass_right = self.mass_of(&right);
        if left.is_empty() || right.is_empty() || !(mass_left > 0.0) || !(mass_right > 0.0) {
            return Err(Error::DegenerateSplit {
                feature: split.feature,
                threshold: split.threshold,
            });
        }
        let p_left = mass_left / (mass_left + mass_right);
        Ok((
            self.child(left, mass_left),
            self.child(right, mass_right),
            p_left,
        ))
    }
}

/// Index of the largest entry, lowest index on ties.
pub(crate) fn majority_of(class_weights: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (k, &w) in class_weights.iter().enumerate() {
        if w > best.1 {
            best = (k, w);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> CsvOptions {
        CsvOptions::default()
    }

    #[test]
    fn class_names_follow_reference() {
        let opts = CsvOptions::default();
        let train = read_csv("a,y\n1,cat\n2,dog\n".as_bytes(), &opts).unwrap();
        let test = read_csv("a,y\n3,dog\n".as_bytes(), &opts).unwrap();
        assert_eq!(test.labels(), &[0]);
        let test = test.with_class_names_of(&train).unwrap();
        assert_eq!(test.labels(), &[1]);
        assert_eq!(test.class_count(), 2);
        let other = read_csv("a,y\n3,eel\n".as_bytes(), &opts).unwrap();
        assert!(other.with_class_names_of(&train).is_err());
    }

    #[test]
    fn parses_small_csv() {
        let data = read_csv("a,b,y\n0,1,0\n1,0,1\n1,1,0".as_bytes(), &opts()).unwrap();
        assert_eq!(data.n_samples(), 3);
        assert_eq!(data.n_features(), 2);
        assert_eq!(data.class_count(), 2);
        assert_eq!(data.feature_names(), &["a", "b"]);
        assert_eq!(data.labels(), &[0, 1, 0]);
    }

    #[test]
    fn string_labels_use_first_appearance() {
        let data = read_csv("x,y\n1,cat\n2,dog\n3,cat".as_bytes(), &opts()).unwrap();
        assert_eq!(data.labels(), &[0, 1, 0]);
        assert_eq!(data.class_count(), 2);
        assert_eq!(data.class_names(), &["cat", "dog"]);
    }

    #[test]
    fn integer_labels_are_compacted_in_numeric_order() {
        let data = read_csv("x,y\n1,7\n2,3\n3,5".as_bytes(), &opts()).unwrap();
        assert_eq!(data.labels(), &[2, 0, 1]);
        assert_eq!(data.class_names(), &["3", "5", "7"]);
    }

    #[test]
    fn nan_cell_is_reported() {
        let err = read_csv("a,b,y\n0,1,0\n1,NaN,1".as_bytes(), &opts()).unwrap_err();
        match err {
            Error::Parse { row, column, value } => {
                assert_eq!(row, 3);
                assert_eq!(column, "b");
                assert_eq!(value, "NaN");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(read_csv("a,y\ninf,0".as_bytes(), &opts()).is_err());
    }

    #[test]
    fn label_by_name_index_and_no_header() {
        let o = CsvOptions {
            label: LabelColumn::Name("y".into()),
            ..opts()
        };
        let data = read_csv("y,a\n1,0.5\n0,0.25".as_bytes(), &o).unwrap();
        assert_eq!(data.labels(), &[1, 0]);
        assert_eq!(data.column(0), &[0.5, 0.25]);

        let o = CsvOptions {
            label: LabelColumn::Index(0),
            has_header: false,
            delimiter: b';',
        };
        let data = read_csv("1;0.5;2\n0;0.25;3".as_bytes(), &o).unwrap();
        assert_eq!(data.labels(), &[1, 0]);
        assert_eq!(data.n_features(), 2);

        let o = CsvOptions {
            label: LabelColumn::Name("missing".into()),
            ..opts()
        };
        assert!(matches!(
            read_csv("y,a\n1,0.5".as_bytes(), &o),
            Err(Error::MissingLabelColumn(_))
        ));
    }

    #[test]
    fn empty_and_single_class_files() {
        assert!(matches!(
            read_csv("a,y\n".as_bytes(), &opts()),
            Err(Error::Empty)
        ));
        let data = read_csv("a,y\n1,0\n2,0".as_bytes(), &opts()).unwrap();
        assert_eq!(data.class_count(), 1);
        assert!(data.is_degenerate());
    }

    #[test]
    fn ragged_row_is_rejected() {
        assert!(matches!(
            read_csv("a,b,y\n1,2,0\n1,0".as_bytes(), &opts()),
            Err(Error::RaggedRow { row: 3, .. })
        ));
    }

    #[test]
    fn xor_formula() {
        assert_eq!(checkerboard_label(0.2, 0.2, 2), 0);
        assert_eq!(checkerboard_label(0.2, 0.8, 2), 1);
        assert_eq!(checkerboard_label(0.8, 0.8, 2), 0);
        assert_eq!(checkerboard_label(0.5, 0.2, 2), 1);
    }

    #[test]
    fn xor_is_balanced_and_reproducible() {
        let a = generate_xor(10_000, 0).unwrap();
        let ones = a.labels().iter().filter(|&&y| y == 1).count() as f64 / 10_000.0;
        assert!((ones - 0.5).abs() <= 0.02, "class-1 share {ones}");

        let b = generate_xor(10_000, 0).unwrap();
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        a.write_csv(&mut ca).unwrap();
        b.write_csv(&mut cb).unwrap();
        assert_eq!(ca, cb);
        assert_ne!(a, generate_xor(10_000, 1).unwrap());
        assert!(generate_xor(0, 0).is_err());
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let a = generate_xor(200, 3).unwrap();
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let b = read_csv(buf.as_slice(), &opts()).unwrap();
        assert_eq!(a.column(0), b.column(0));
        assert_eq!(a.column(1), b.column(1));
        assert_eq!(a.labels(), b.labels());
    }

    fn four_points() -> Dataset {
        Dataset::from_columns(vec![vec![1.0, 2.0, 3.0, 4.0]], vec![0, 0, 1, 1], 2).unwrap()
    }

    #[test]
    fn partition_uniform() {
        let data = four_points();
        let view = data.view();
        let (l, r, p) = view.partition(&Split::new(0, 2.0)).unwrap();
        assert_eq!(l.indices(), &[0, 1]);
        assert_eq!(r.indices(), &[2, 3]);
        assert_eq!(p, 0.5);
    }

    #[test]
    fn partition_degenerate() {
        let data = four_points();
        assert!(matches!(
            data.view().partition(&Split::new(0, 0.0)),
            Err(Error::DegenerateSplit { .. })
        ));
        assert!(matches!(
            data.view().partition(&Split::new(0, 4.0)),
            Err(Error::DegenerateSplit { .. })
        ));
        assert!(data.view().partition(&Split::new(3, 4.0)).is_err());
    }

    #[test]
    fn partition_weighted() {
        let data = four_points();
        let w = [0.1, 0.1, 0.4, 0.4];
        let view = SampleView::weighted(&data, &w).unwrap();
        let (_, _, p) = view.partition(&Split::new(0, 2.0)).unwrap();
        assert!((p - 0.2).abs() < 1e-15);
    }

    #[test]
    fn weights_are_validated() {
        let data = four_points();
        assert!(SampleView::weighted(&data, &[1.0, 1.0]).is_err());
        assert!(SampleView::weighted(&data, &[1.0, -1.0, 1.0, 1.0]).is_err());
        assert!(SampleView::weighted(&data, &[0.0; 4]).is_err());
        assert!(data.view().subset(vec![2, 1]).is_err());
        assert!(data.view().subset(vec![1, 9]).is_err());
    }

    #[test]
    fn majority_prefers_lowest_class_on_ties() {
        let data = four_points();
        assert_eq!(data.view().majority(), (0, 2.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn partition_is_a_bijection(
                values in proptest::collection::vec(0u8..6, 2..40),
                weights in proptest::collection::vec(0.01f64..5.0, 40),
                threshold in 0u8..6,
            ) {
                let n = values.len();
                let col: Vec<f64> = values.iter().map(|&v| f64::from(v)).collect();
                let labels = (0..n).map(|i| i % 2).collect();
                let data = Dataset::from_columns(vec![col], labels, 2).unwrap();
                let w = &weights[..n];
                let view = SampleView::weighted(&data, w).unwrap();
                if let Ok((l, r, p)) = view.partition(&Split::new(0, f64::from(threshold))) {
                    let mut all: Vec<usize> = l.indices().iter().chain(r.indices()).copied().collect();
                    all.sort_unstable();
                    prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
                    prop_assert!(l.indices().windows(2).all(|w| w[0] < w[1]));
                    prop_assert!(r.indices().windows(2).all(|w| w[0] < w[1]));
                    prop_assert!(p > 0.0 && p < 1.0);
                    prop_assert!((l.mass() / view.mass() - p).abs() < 1e-12);
                }
            }
        }
    }
}
