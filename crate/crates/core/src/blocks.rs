//! The action of global sections on tensor products of vacuum-module fibers,
//! and degreewise coinvariants at a fixed truncation.
//!
//! Only applications whose result lies entirely in total degree `≤ N` enter
//! the image; the rest are counted as discarded. When generators are not
//! homogeneous (several punctures on the projective line), the quotient is
//! reported through the degree filtration `F_d` = image of `W_{≤d}`, so the
//! per-degree numbers sum to the total quotient dimension.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::curves::{global_form_basis, restrict_to_disc, CurveError, CurveKind, CurveModel, FiberFrame, GlobalLogForm};
use crate::exactalg::{SparseMatrix, SparseVector, Subspace};
use crate::series::DiscForm;
use crate::vacore::{partition_degree, GradedVec, HomVec, LieElement, VaError, VaKind, VertexAlgebra};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlocksError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Va(#[from] VaError),
    #[error("{0}")]
    Unsupported(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Bounds {
    pub max_pole: u32,
    pub max_deg: u32,
}

impl Bounds {
    pub fn for_truncation(n: usize) -> Self {
        Self {
            max_pole: n as u32 + 2,
            max_deg: n as u32 + 2,
        }
    }
}

/// Order to which forms are expanded at a puncture. Modes `v_{[k]}` with
/// `k ≥ 2N` vanish on `V_{≤N}` for `|v| ≤ N`, so nothing is lost.
pub fn restriction_order(n: usize) -> i64 {
    2 * n as i64 + 2
}

/// `Σ c_k t^k dt ↦ Σ c_k v_{[k]}`: the residue of `Y(v,t)·ω`.
pub fn vertex_op_residue(v: &HomVec, form: &DiscForm, va: &VertexAlgebra) -> LieElement {
    let s = form.to_dt().series;
    let mut out = LieElement::zero();
    for (k, c) in s.terms() {
        out = out.add(&va.lie_mode(v, k).scale(c));
    }
    out
}

/// The mode sum attached to a disc form at a puncture with the given frame.
pub fn fiber_residue(frame: FiberFrame, v: &HomVec, form: &DiscForm, va: &VertexAlgebra) -> LieElement {
    match frame {
        FiberFrame::Standard => vertex_op_residue(v, form, va),
        FiberFrame::Branch | FiberFrame::Inversion => {
            let s = form.to_dt().series;
            let mut out = LieElement::zero();
            for (m, c) in s.terms() {
                out = out.add(&va.lie_mode(v, -m - 2).scale(&-c.clone()));
            }
            if frame == FiberFrame::Inversion {
                va.theta(&out)
            } else {
                out
            }
        }
    }
}

/// One global section `v ⊗ ω` seen at every puncture.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LieGenerator {
    pub form: GlobalLogForm,
    pub vector: HomVec,
    pub components: Vec<LieElement>,
}

/// Components of `v ⊗ ω` at each puncture of `curve`.
pub fn generator_components(
    curve: &CurveModel,
    va: &VertexAlgebra,
    v: &HomVec,
    form: &GlobalLogForm,
    n: usize,
) -> Result<Vec<LieElement>, BlocksError> {
    curve
        .punctures
        .iter()
        .map(|p| {
            let disc = restrict_to_disc(form, p, restriction_order(n))?;
            Ok(fiber_residue(p.frame, v, &disc, va))
        })
        .collect()
}

/// Basis vectors of `V_{≤n}`.
pub fn default_vectors(va: &VertexAlgebra, n: usize) -> Vec<HomVec> {
    (0..=n)
        .flat_map(|d| va.basis(d).partitions().to_vec())
        .map(|p| va.basis_vector(&p))
        .collect()
}

/// One generator per (global basis form, vector).
pub fn lie_generators(
    curve: &CurveModel,
    va: &VertexAlgebra,
    vectors: &[HomVec],
    bounds: Bounds,
    n: usize,
) -> Result<Vec<LieGenerator>, BlocksError> {
    let forms = global_form_basis(curve, bounds.max_pole, bounds.max_deg);
    let mut out = Vec::new();
    for form in &forms {
        for v in vectors {
            out.push(LieGenerator {
                form: form.clone(),
                vector: v.clone(),
                components: generator_components(curve, va, v, form, n)?,
            });
        }
    }
    Ok(out)
}

/// Total-derivative sections `∇(v ⊗ h) = Tv ⊗ h du + v ⊗ h′ du` on the
/// projective line, for `h du` a basis form.
pub fn nabla_generators(
    curve: &CurveModel,
    va: &VertexAlgebra,
    vectors: &[HomVec],
    bounds: Bounds,
    n: usize,
) -> Result<Vec<LieGenerator>, BlocksError> {
    if curve.kind != CurveKind::ProjectiveLine {
        return Err(BlocksError::Unsupported("total derivatives need the global coordinate of the projective line".into()));
    }
    let mut out = Vec::new();
    for form in global_form_basis(curve, bounds.max_pole, bounds.max_deg) {
        let dform = form.coefficient_derivative()?;
        for v in vectors {
            let tv = HomVec::new(v.degree + 1, va.virasoro_block(-1, v.degree).apply(&v.coords).expect("sized"));
            let a = generator_components(curve, va, &tv, &form, n)?;
            let b = generator_components(curve, va, v, &dform, n)?;
            out.push(LieGenerator {
                form: form.clone(),
                vector: v.clone(),
                components: a.iter().zip(&b).map(|(x, y)| x.add(y)).collect(),
            });
        }
    }
    Ok(out)
}

/// Basis of `⊗ᵢ (Vᵢ)_{dᵢ}` over `Σ dᵢ ≤ N`, ordered by total degree from
/// `N` down to `0` so that echelon pivots fall in the highest degree.
#[derive(Clone, Debug)]
pub struct TensorWindow {
    pub truncation: usize,
    keys: Vec<Vec<(usize, usize)>>,
    index: HashMap<Vec<(usize, usize)>, usize>,
    degree_of: Vec<usize>,
}

impl TensorWindow {
    pub fn new(va: &VertexAlgebra, factors: usize, n: usize) -> Self {
        let mut keys: Vec<Vec<(usize, usize)>> = vec![vec![]];
        for _ in 0..factors {
            let mut next = Vec::new();
            for k in &keys {
                let used: usize = k.iter().map(|x| x.0).sum();
                for d in 0..=(n - used) {
                    for i in 0..va.dim(d) {
                        let mut k2 = k.clone();
                        k2.push((d, i));
                        next.push(k2);
                    }
                }
            }
            keys = next;
        }
        let total = |k: &Vec<(usize, usize)>| k.iter().map(|x| x.0).sum::<usize>();
        keys.sort_by(|a, b| total(b).cmp(&total(a)).then_with(|| a.cmp(b)));
        let index = keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        let degree_of = keys.iter().map(total).collect();
        Self {
            truncation: n,
            keys,
            index,
            degree_of,
        }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn degree_of(&self, i: usize) -> usize {
        self.degree_of[i]
    }

    pub fn key(&self, i: usize) -> &[(usize, usize)] {
        &self.keys[i]
    }

    pub fn index_of(&self, key: &[(usize, usize)]) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn ambient_dims(&self) -> Vec<usize> {
        let mut dims = vec![0; self.truncation + 1];
        for &d in &self.degree_of {
            dims[d] += 1;
        }
        dims
    }
}

/// Applies a generator to a window basis tensor; `None` when any part of
/// the result leaves total degree `≤ N` or the factor window.
pub fn apply_generator(
    window: &TensorWindow,
    images: &[HashMap<(usize, usize), Option<GradedVec>>],
    key_index: usize,
) -> Option<SparseVector> {
    let key = window.key(key_index);
    let total: usize = window.degree_of(key_index);
    let mut out = SparseVector::zero(window.len());
    for (i, &(d, idx)) in key.iter().enumerate() {
        let img = match images[i].get(&(d, idx)) {
            Some(Some(img)) => img,
            Some(None) => return None,
            None => continue,
        };
        for (&t, vec) in img {
            if total - d + t > window.truncation {
                return None;
            }
            let mut k2 = key.to_vec();
            for (j, c) in vec.iter() {
                k2[i] = (t, j);
                out.add_to(window.index_of(&k2).expect("in window"), c);
            }
        }
    }
    Some(out)
}

/// Per-factor images of every window basis vector under each component.
fn component_images(
    va: &VertexAlgebra,
    gen: &LieGenerator,
    n: usize,
) -> Vec<HashMap<(usize, usize), Option<GradedVec>>> {
    gen.components
        .iter()
        .map(|comp| {
            let mut map = HashMap::new();
            if comp.is_zero() {
                return map;
            }
            for d in 0..=n {
                for i in 0..va.dim(d) {
                    let u = HomVec::new(d, SparseVector::unit(va.dim(d), i));
                    map.insert((d, i), va.apply_lie(comp, &u).ok());
                }
            }
            map
        })
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct DegreeRow {
    pub degree: usize,
    pub ambient_dim: usize,
    pub image_rank: usize,
    pub quotient_dim: usize,
    pub stabilized: bool,
}

#[derive(Clone, Debug)]
pub struct QuotientData {
    pub rows: Vec<DegreeRow>,
    pub discarded: usize,
    pub image: Subspace,
    pub window: TensorWindow,
}

/// The image of `generators` in the tensor window and its filtration ranks.
pub fn quotient_data(va: &VertexAlgebra, factors: usize, generators: &[LieGenerator], n: usize) -> QuotientData {
    let window = TensorWindow::new(va, factors, n);
    let mut image = Subspace::new(window.len());
    let mut discarded = 0;
    'outer: for gen in generators {
        let images = component_images(va, gen, n);
        for k in 0..window.len() {
            match apply_generator(&window, &images, k) {
                Some(v) => {
                    image.insert(&v).expect("sized");
                    if image.is_full() {
                        break 'outer;
                    }
                }
                None => discarded += 1,
            }
        }
    }
    let ambient = window.ambient_dims();
    let mut ranks = vec![0; n + 1];
    for p in image.pivots() {
        ranks[window.degree_of(p)] += 1;
    }
    let rows = (0..=n)
        .map(|d| DegreeRow {
            degree: d,
            ambient_dim: ambient[d],
            image_rank: ranks[d],
            quotient_dim: ambient[d] - ranks[d],
            stabilized: false,
        })
        .collect();
    QuotientData {
        rows,
        discarded,
        image,
        window,
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum ModuleSpec {
    Vacuum,
}

impl ModuleSpec {
    pub fn parse(text: &str) -> Result<Self, BlocksError> {
        match text.trim() {
            "V" | "v" | "vacuum" => Ok(ModuleSpec::Vacuum),
            other => Err(BlocksError::Unsupported(format!("unknown module `{other}`; only the vacuum module V is built in"))),
        }
    }

    pub fn label(&self) -> &'static str {
        "V"
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoinvariantReport {
    pub curve: String,
    pub algebra: String,
    pub insertions: Vec<(String, String)>,
    pub truncation: usize,
    pub bounds: Bounds,
    pub generator_count: usize,
    pub discarded_applications: usize,
    pub rows: Vec<DegreeRow>,
    /// Functionals on the degree-0 ambient space vanishing on the image
    /// there: a basis of the degree-0 conformal blocks.
    pub degree0_blocks: Vec<SparseVector>,
    /// Extra configuration echoed into every serialization.
    pub config: Vec<(String, String)>,
}

impl CoinvariantReport {
    pub fn dims(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.quotient_dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.rows.iter().map(|r| r.quotient_dim).sum()
    }

    /// Conformal block dimensions, equal to the coinvariant ones at a fixed
    /// truncation over a field.
    pub fn block_dims(&self) -> Vec<usize> {
        self.dims()
    }

    fn config_lines(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("curve".to_string(), self.curve.clone()),
            ("algebra".to_string(), self.algebra.clone()),
            (
                "insertions".to_string(),
                self.insertions.iter().map(|(p, m)| format!("{p}:{m}")).collect::<Vec<_>>().join(","),
            ),
            ("truncation".to_string(), self.truncation.to_string()),
            ("max_pole".to_string(), self.bounds.max_pole.to_string()),
            ("max_deg".to_string(), self.bounds.max_deg.to_string()),
            ("generators".to_string(), self.generator_count.to_string()),
            ("discarded_applications".to_string(), self.discarded_applications.to_string()),
        ];
        for (k, v) in &self.config {
            if !out.iter().any(|(k2, _)| k2 == k) {
                out.push((k.clone(), v.clone()));
            }
        }
        out
    }

    pub const CSV_HEADER: [&'static str; 5] = ["degree", "ambient_dim", "image_rank", "quotient_dim", "stabilized"];

    /// Header, one row per degree, then the configuration as `# key = value`
    /// comment lines.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(Self::CSV_HEADER).expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.degree.to_string(),
                r.ambient_dim.to_string(),
                r.image_rank.to_string(),
                r.quotient_dim.to_string(),
                r.stabilized.to_string(),
            ])
            .expect("in-memory write");
        }
        let mut s = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii");
        for (k, v) in self.config_lines() {
            let _ = writeln!(s, "# {k} = {v}");
        }
        s
    }

    /// A TOML document: `[run]` with the configuration, one `[degree.d]`
    /// table per degree, and the degree-0 block functionals.
    pub fn to_text(&self) -> String {
        use toml::{Table, Value};
        let mut doc = Table::new();
        let mut run = Table::new();
        for (k, v) in self.config_lines() {
            run.insert(k, crate::config::toml_value(&v));
        }
        run.insert("total_dim".into(), Value::Integer(self.total_dim() as i64));
        doc.insert("run".into(), Value::Table(run));
        let mut degrees = Table::new();
        for r in &self.rows {
            let mut t = Table::new();
            t.insert("ambient_dim".into(), Value::Integer(r.ambient_dim as i64));
            t.insert("image_rank".into(), Value::Integer(r.image_rank as i64));
            t.insert("quotient_dim".into(), Value::Integer(r.quotient_dim as i64));
            t.insert("stabilized".into(), Value::Boolean(r.stabilized));
            degrees.insert(r.degree.to_string(), Value::Table(t));
        }
        doc.insert("degree".into(), Value::Table(degrees));
        let functionals = self
            .degree0_blocks
            .iter()
            .map(|phi| Value::Array(phi.iter().map(|(j, c)| Value::String(format!("{j}:{c}"))).collect()))
            .collect();
        let mut blocks = Table::new();
        blocks.insert("degree0".into(), Value::Array(functionals));
        doc.insert("blocks".into(), Value::Table(blocks));
        doc.to_string()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CsvError {
    #[error("missing or wrong header")]
    Header,
    #[error("line {line}: {reason}")]
    Row { line: u64, reason: String },
}

/// Rows and embedded configuration read back from [`CoinvariantReport::to_csv`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedCsv {
    pub rows: Vec<DegreeRow>,
    pub config: BTreeMap<String, String>,
}

pub fn parse_report_csv(text: &str) -> Result<ParsedCsv, CsvError> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    match reader.headers() {
        Ok(h) if h.iter().eq(CoinvariantReport::CSV_HEADER) => {}
        _ => return Err(CsvError::Header),
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CsvError::Row {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            reason: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let fail = |reason: String| CsvError::Row { line, reason };
        let num = |i: usize| record[i].trim().parse::<usize>().map_err(|e| fail(format!("{}: {e}", CoinvariantReport::CSV_HEADER[i])));
        let stabilized = match record[4].trim() {
            "true" => true,
            "false" => false,
            other => return Err(fail(format!("stabilized must be true or false, got `{other}`"))),
        };
        let row = DegreeRow {
            degree: num(0)?,
            ambient_dim: num(1)?,
            image_rank: num(2)?,
            quotient_dim: num(3)?,
            stabilized,
        };
        if row.image_rank > row.ambient_dim || row.ambient_dim - row.image_rank != row.quotient_dim {
            return Err(fail("quotient_dim must equal ambient_dim - image_rank".into()));
        }
        rows.push(row);
    }
    let mut config = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(rest) = line.strip_prefix('#') {
            let (k, v) = rest.split_once('=').ok_or_else(|| CsvError::Row {
                line: i as u64 + 1,
                reason: "comment line without `=`".into(),
            })?;
            config.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    Ok(ParsedCsv { rows, config })
}

fn algebra_label(va: &VertexAlgebra) -> String {
    va.kind().to_string()
}

fn check_truncation(va: &VertexAlgebra, n: usize) -> Result<(), BlocksError> {
    if va.truncation() < n {
        return Err(VaError::Window {
            operation: "coinvariant window".into(),
            degree: n as i64,
            truncation: va.truncation(),
        }
        .into());
    }
    Ok(())
}

/// Coinvariants of `⊗ V` under the sections `v ⊗ ω` with `v` ranging over
/// `vectors`, with stabilization flags from a run at `N − 1`.
pub fn coinvariant_dims_with(
    curve: &CurveModel,
    va: &VertexAlgebra,
    vectors: &[HomVec],
    n: usize,
    bounds: Bounds,
) -> Result<CoinvariantReport, BlocksError> {
    check_truncation(va, n)?;
    let gens = lie_generators(curve, va, vectors, bounds, n)?;
    let factors = curve.punctures.len();
    let data = quotient_data(va, factors, &gens, n);
    let mut rows = data.rows.clone();
    if n > 0 {
        let small: Vec<HomVec> = vectors.iter().filter(|v| v.degree < n).cloned().collect();
        let gens_small = lie_generators(curve, va, &small, bounds, n - 1)?;
        let prev = quotient_data(va, factors, &gens_small, n - 1);
        for (r, p) in rows.iter_mut().zip(&prev.rows) {
            r.stabilized = r.quotient_dim == p.quotient_dim;
        }
    }
    // Image rows with pivot in degree 0 lie entirely in degree 0.
    let zero_start = data.window.len() - data.rows[0].ambient_dim;
    let mut deg0 = Subspace::new(data.rows[0].ambient_dim);
    for row in data.image.echelon_rows() {
        if row.leading().map(|(p, _)| p >= zero_start).unwrap_or(false) {
            let shifted = SparseVector::from_entries(
                data.rows[0].ambient_dim,
                row.iter().map(|(j, c)| (j - zero_start, c.clone())),
            )
            .expect("degree-0 entries");
            deg0.insert(&shifted).expect("sized");
        }
    }
    Ok(CoinvariantReport {
        curve: curve.id().to_string(),
        algebra: algebra_label(va),
        insertions: curve.punctures.iter().map(|p| (p.name.clone(), "V".to_string())).collect(),
        truncation: n,
        bounds,
        generator_count: gens.len(),
        discarded_applications: data.discarded,
        rows,
        degree0_blocks: deg0.annihilator_basis(),
        config: Vec::new(),
    })
}

/// Coinvariants of the given modules, one per puncture, under `Lie_X°(V)`.
pub fn coinvariant_dims(
    curve: &CurveModel,
    va: &VertexAlgebra,
    modules: &[ModuleSpec],
    n: usize,
    bounds: Bounds,
) -> Result<CoinvariantReport, BlocksError> {
    if modules.len() != curve.punctures.len() {
        return Err(BlocksError::Unsupported(format!(
            "{} modules given for {} punctures",
            modules.len(),
            curve.punctures.len()
        )));
    }
    coinvariant_dims_with(curve, va, &default_vectors(va, n), n, bounds)
}

#[derive(Clone, Debug)]
pub struct PropagationReport {
    pub base: CoinvariantReport,
    pub extended: CoinvariantReport,
    pub equal: Vec<bool>,
    /// Whether the propagation theorem is claimed for this configuration.
    pub hypothesis_applies: bool,
}

impl PropagationReport {
    pub fn all_equal(&self) -> bool {
        self.equal.iter().all(|&e| e)
    }
}

/// Compares coinvariants before and after adding `extra` vacuum insertions.
/// On the nodal curve the base is `∞₁` alone and the extension adds `∞₂`.
pub fn propagation_check(
    kind: CurveKind,
    base_points: usize,
    extra: usize,
    va: &VertexAlgebra,
    n: usize,
    bounds: Bounds,
) -> Result<PropagationReport, BlocksError> {
    let (base, ext) = match kind {
        CurveKind::ProjectiveLine => (
            CurveModel::projective_line(base_points)?,
            CurveModel::projective_line(base_points + extra)?,
        ),
        CurveKind::NodalPair => {
            if base_points != 1 || extra != 1 {
                return Err(BlocksError::Unsupported("the nodal curve has exactly two possible punctures".into()));
            }
            (CurveModel::nodal_with(&[1])?, CurveModel::nodal())
        }
    };
    let vac = |c: &CurveModel| vec![ModuleSpec::Vacuum; c.punctures.len()];
    let a = coinvariant_dims(&base, va, &vac(&base), n, bounds)?;
    let b = coinvariant_dims(&ext, va, &vac(&ext), n, bounds)?;
    let equal = a.rows.iter().zip(&b.rows).map(|(x, y)| x.quotient_dim == y.quotient_dim).collect();
    Ok(PropagationReport {
        base: a,
        extended: b,
        equal,
        hypothesis_applies: kind == CurveKind::ProjectiveLine && *va.kind() == VaKind::Heisenberg,
    })
}

/// `L_{−λ₁}⋯L_{−λₖ}|0⟩` inside `big`, for partitions with parts `≥ 2` of
/// degree `≤ n`: the Virasoro subalgebra generated by `ω`.
pub fn virasoro_subalgebra_vectors(big: &VertexAlgebra, n: usize) -> Vec<HomVec> {
    let mut out = Vec::new();
    for d in 0..=n {
        for p in crate::vacore::partitions(d, 2) {
            let mut v = big.vacuum();
            for &part in p.iter().rev() {
                let m = big.virasoro_block(-(part as i64), v.degree);
                v = HomVec::new(v.degree + part as usize, m.apply(&v.coords).expect("sized"));
            }
            out.push(v);
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct FunctorialityRow {
    pub degree: usize,
    pub dim_sub: usize,
    pub dim_big: usize,
    pub holds: bool,
}

#[derive(Clone, Debug)]
pub struct FunctorialityReport {
    pub sub: CoinvariantReport,
    pub big: CoinvariantReport,
    pub rows: Vec<FunctorialityRow>,
}

impl FunctorialityReport {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }
}

/// Coinvariants of `⊗V` under the sections built from `sub_vectors`
/// against those built from all of `big`; the former must dominate.
pub fn functoriality_check_with(
    curve: &CurveModel,
    big: &VertexAlgebra,
    sub_vectors: &[HomVec],
    n: usize,
    bounds: Bounds,
) -> Result<FunctorialityReport, BlocksError> {
    let big_report = coinvariant_dims_with(curve, big, &default_vectors(big, n), n, bounds)?;
    let mut sub_report = coinvariant_dims_with(curve, big, sub_vectors, n, bounds)?;
    sub_report.algebra = format!("{} restricted to the Virasoro(c=1) subalgebra", sub_report.algebra);
    let rows = sub_report
        .rows
        .iter()
        .zip(&big_report.rows)
        .map(|(s, b)| FunctorialityRow {
            degree: s.degree,
            dim_sub: s.quotient_dim,
            dim_big: b.quotient_dim,
            holds: s.quotient_dim >= b.quotient_dim,
        })
        .collect();
    Ok(FunctorialityReport {
        sub: sub_report,
        big: big_report,
        rows,
    })
}

/// Heisenberg against its Virasoro(c = 1) subalgebra.
pub fn functoriality_check(curve: &CurveModel, n: usize, bounds: Bounds) -> Result<FunctorialityReport, BlocksError> {
    let big = VertexAlgebra::heisenberg(n);
    let sub = virasoro_subalgebra_vectors(&big, n);
    functoriality_check_with(curve, &big, &sub, n, bounds)
}

/// Realizes a Lie element as an operator on `V_{≤N}` and checks it is
/// zero on every basis vector whose image stays in the window.
pub fn acts_as_zero(va: &VertexAlgebra, x: &LieElement) -> bool {
    (0..=va.truncation()).all(|d| {
        (0..va.dim(d)).all(|i| match va.apply_lie(x, &HomVec::new(d, SparseVector::unit(va.dim(d), i))) {
            Ok(img) => img.is_empty(),
            Err(_) => true,
        })
    })
}

/// The operator of a generator on the tensor window, with components that
/// leave total degree `≤ N` projected away.
pub fn generator_matrix(va: &VertexAlgebra, window: &TensorWindow, gen: &LieGenerator) -> SparseMatrix {
    let n = window.truncation;
    let cols = (0..window.len())
        .map(|k| {
            let key = window.key(k);
            let total = window.degree_of(k);
            let mut out = SparseVector::zero(window.len());
            for (i, comp) in gen.components.iter().enumerate() {
                let (d, idx) = key[i];
                let u = SparseVector::unit(va.dim(d), idx);
                for (a, m, c) in comp.terms() {
                    let t = d as i64 + partition_degree(a) as i64 - m - 1;
                    if t < 0 || total as i64 - d as i64 + t > n as i64 {
                        continue;
                    }
                    let img = va.mode_block(a, m, d).apply(&u).expect("sized");
                    let mut k2 = key.to_vec();
                    for (j, x) in img.iter() {
                        k2[i] = (t as usize, j);
                        out.add_to(window.index_of(&k2).expect("in window"), &(c * x));
                    }
                }
            }
            out
        })
        .collect();
    SparseMatrix::from_columns(window.len(), cols).expect("sized")
}
