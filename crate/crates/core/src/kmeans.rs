//! Standard (Euclidean) and spherical KMeans over sketch embeddings.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codec::{put_f32s, put_f64, put_u32, put_u32s, put_u64, put_u8, ByteReader};
use crate::error::{check_dim, Error, Result};
use crate::sketch::Embedding;
use crate::vector::{dense_dot, sparse_dense_dot, SparseVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Standard,
    Spherical,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Standard => "standard",
            Variant::Spherical => "spherical",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Variant::Standard),
            "spherical" => Ok(Variant::Spherical),
            other => Err(Error::invalid(format!("unknown clustering variant '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    PlusPlus,
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansConfig {
    pub max_iters: usize,
    /// Stop once at most this fraction of points changes partition.
    pub tol: f64,
    pub seed: u64,
    pub init: Init,
    /// Train on at most `256 · P` sampled points, then assign everything.
    pub subsample: bool,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self { max_iters: 20, tol: 0.001, seed: 0, init: Init::PlusPlus, subsample: false }
    }
}

/// Rows to cluster, dense or sparse, all of one width.
#[derive(Debug, Clone)]
pub enum PointSet {
    Dense { width: usize, data: Vec<f32> },
    Sparse { width: usize, rows: Vec<SparseVector> },
}

impl PointSet {
    pub fn dense(width: usize, rows: Vec<Vec<f32>>) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * width);
        for r in rows {
            check_dim(width, r.len())?;
            data.extend(r);
        }
        Ok(PointSet::Dense { width, data })
    }

    pub fn from_embeddings(width: usize, rows: Vec<Embedding>) -> Result<Self> {
        if rows.iter().all(|r| matches!(r, Embedding::Sparse(_))) && !rows.is_empty() {
            let rows = rows
                .into_iter()
                .map(|r| match r {
                    Embedding::Sparse(s) => {
                        check_dim(width, s.dim() as usize)?;
                        Ok(s)
                    }
                    Embedding::Dense(_) => unreachable!(),
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(PointSet::Sparse { width, rows });
        }
        let mut data = Vec::with_capacity(rows.len() * width);
        for r in rows {
            check_dim(width, r.width())?;
            data.extend(r.to_dense());
        }
        Ok(PointSet::Dense { width, data })
    }

    pub fn len(&self) -> usize {
        match self {
            PointSet::Dense { width, data } => {
                if *width == 0 {
                    0
                } else {
                    data.len() / width
                }
            }
            PointSet::Sparse { rows, .. } => rows.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn width(&self) -> usize {
        match self {
            PointSet::Dense { width, .. } | PointSet::Sparse { width, .. } => *width,
        }
    }

    #[inline]
    fn dot(&self, i: usize, c: &[f32]) -> f64 {
        match self {
            PointSet::Dense { width, data } => dense_dot(&data[i * width..(i + 1) * width], c),
            PointSet::Sparse { rows, .. } => sparse_dense_dot(&rows[i], c),
        }
    }

    fn squared_norm(&self, i: usize) -> f64 {
        match self {
            PointSet::Dense { width, data } => {
                let row = &data[i * width..(i + 1) * width];
                dense_dot(row, row)
            }
            PointSet::Sparse { rows, .. } => rows[i].squared_norm(),
        }
    }

    fn add_to(&self, i: usize, acc: &mut [f64]) {
        match self {
            PointSet::Dense { width, data } => {
                for (a, &x) in acc.iter_mut().zip(&data[i * width..(i + 1) * width]) {
                    *a += f64::from(x);
                }
            }
            PointSet::Sparse { rows, .. } => {
                for (j, x) in rows[i].iter() {
                    acc[j as usize] += f64::from(x);
                }
            }
        }
    }

    fn row(&self, i: usize) -> Vec<f32> {
        match self {
            PointSet::Dense { width, data } => data[i * width..(i + 1) * width].to_vec(),
            PointSet::Sparse { width, rows } => {
                let mut out = vec![0.0; *width];
                for (j, x) in rows[i].iter() {
                    out[j as usize] = x;
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    variant: Variant,
    width: usize,
    centroids: Vec<f32>,
    centroid_sq_norms: Vec<f64>,
    assignments: Vec<u32>,
    iterations_run: u32,
    inertia: f64,
    inertia_history: Vec<f64>,
}

impl ClusterModel {
    pub fn from_parts(
        variant: Variant,
        width: usize,
        centroids: Vec<Vec<f32>>,
        assignments: Vec<u32>,
    ) -> Result<Self> {
        let p = centroids.len();
        let mut flat = Vec::with_capacity(p * width);
        for c in centroids {
            check_dim(width, c.len())?;
            flat.extend(c);
        }
        if let Some(bad) = assignments.iter().find(|&&a| a as usize >= p) {
            return Err(Error::invalid(format!("assignment {bad} out of range for {p} partitions")));
        }
        let mut model = Self {
            variant,
            width,
            centroids: flat,
            centroid_sq_norms: Vec::new(),
            assignments,
            iterations_run: 0,
            inertia: 0.0,
            inertia_history: Vec::new(),
        };
        model.refresh_norms();
        Ok(model)
    }

    fn refresh_norms(&mut self) {
        self.centroid_sq_norms = (0..self.num_partitions())
            .map(|c| {
                let row = self.centroid(c);
                dense_dot(row, row)
            })
            .collect();
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn num_partitions(&self) -> usize {
        if self.width == 0 {
            self.centroid_sq_norms.len()
        } else {
            self.centroids.len() / self.width
        }
    }

    pub fn centroid(&self, c: usize) -> &[f32] {
        &self.centroids[c * self.width..(c + 1) * self.width]
    }

    pub fn assignments(&self) -> &[u32] {
        &self.assignments
    }

    pub fn iterations_run(&self) -> u32 {
        self.iterations_run
    }

    pub fn inertia(&self) -> f64 {
        self.inertia
    }

    /// Training-set inertia after each centroid update.
    pub fn inertia_history(&self) -> &[f64] {
        &self.inertia_history
    }

    /// `⟨x, C_i⟩` for every centroid.
    pub fn centroid_scores(&self, x: &Embedding) -> Result<Vec<f64>> {
        check_dim(self.width, x.width())?;
        Ok((0..self.num_partitions()).map(|c| x.dot_dense(self.centroid(c))).collect())
    }

    /// Nearest centroid (standard) or largest inner product (spherical);
    /// ties go to the lowest partition id.
    pub fn assign(&self, x: &Embedding) -> Result<u32> {
        check_dim(self.width, x.width())?;
        Ok(self.best(|c| x.dot_dense(self.centroid(c))))
    }

    fn best(&self, dot: impl Fn(usize) -> f64) -> u32 {
        let mut best = 0u32;
        let mut best_score = f64::NEG_INFINITY;
        for c in 0..self.num_partitions() {
            let ip = dot(c);
            let score = match self.variant {
                Variant::Spherical => ip,
                // -(‖c‖² - 2⟨x,c⟩); ‖x‖² is constant across centroids
                Variant::Standard => 2.0 * ip - self.centroid_sq_norms[c],
            };
            if score > best_score {
                best_score = score;
                best = c as u32;
            }
        }
        best
    }

    fn assign_point(&self, points: &PointSet, i: usize) -> u32 {
        self.best(|c| points.dot(i, self.centroid(c)))
    }

    fn sq_distance(&self, points: &PointSet, i: usize, c: usize) -> f64 {
        (points.squared_norm(i) - 2.0 * points.dot(i, self.centroid(c)) + self.centroid_sq_norms[c]).max(0.0)
    }

    pub(crate) fn encode(&self, out: &mut Vec<u8>) -> Result<()> {
        put_u32(out, crate::codec::len_u32(self.num_partitions(), "partition count")?);
        put_u8(out, matches!(self.variant, Variant::Spherical) as u8);
        put_u32(out, crate::codec::len_u32(self.width, "sketch width")?);
        put_u32(out, self.iterations_run);
        put_f64(out, self.inertia);
        put_f32s(out, &self.centroids);
        put_u64(out, self.assignments.len() as u64);
        put_u32s(out, &self.assignments);
        Ok(())
    }

    pub(crate) fn decode(r: &mut ByteReader<'_>) -> Result<Self> {
        let p = r.u32()? as usize;
        let variant = if r.u8()? != 0 { Variant::Spherical } else { Variant::Standard };
        let width = r.u32()? as usize;
        let iterations_run = r.u32()?;
        let inertia = r.f64()?;
        let centroids = r.f32_vec(p * width)?;
        let n = r.u64()? as usize;
        let assignments = r.u32_vec(n)?;
        if assignments.iter().any(|&a| a as usize >= p) {
            return Err(Error::format("cluster assignment out of range"));
        }
        let mut model = Self {
            variant,
            width,
            centroids,
            centroid_sq_norms: vec![0.0; p],
            assignments,
            iterations_run,
            inertia,
            inertia_history: Vec::new(),
        };
        model.refresh_norms();
        Ok(model)
    }
}

fn normalize_in_place(c: &mut [f32]) {
    let norm = dense_dot(c, c).sqrt();
    if norm > 0.0 {
        c.iter_mut().for_each(|x| *x = (f64::from(*x) / norm) as f32);
    }
}

/// Clusters `points` into `partitions` groups.
pub fn kmeans(points: &PointSet, partitions: usize, variant: Variant, config: &KMeansConfig) -> Result<ClusterModel> {
    let n = points.len();
    if partitions == 0 {
        return Err(Error::invalid("number of partitions must be at least 1"));
    }
    if partitions > n {
        return Err(Error::invalid(format!("{partitions} partitions requested for {n} points")));
    }
    let width = points.width();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let train: Vec<usize> = match config.subsample {
        true if n > 256 * partitions => {
            let mut idx = sample(&mut rng, n, 256 * partitions).into_vec();
            idx.sort_unstable();
            idx
        }
        _ => (0..n).collect(),
    };

    let mut model = ClusterModel {
        variant,
        width,
        centroids: vec![0.0; partitions * width],
        centroid_sq_norms: vec![0.0; partitions],
        assignments: Vec::new(),
        iterations_run: 0,
        inertia: 0.0,
        inertia_history: Vec::new(),
    };
    let seeds = match config.init {
        Init::PlusPlus => plus_plus_seeds(points, &train, partitions, variant, &mut rng),
        Init::Random => sample(&mut rng, train.len(), partitions)
            .into_iter()
            .map(|j| train[j])
            .collect(),
    };
    for (c, &i) in seeds.iter().enumerate() {
        let mut row = points.row(i);
        if variant == Variant::Spherical {
            normalize_in_place(&mut row);
        }
        model.centroids[c * width..(c + 1) * width].copy_from_slice(&row);
    }
    model.refresh_norms();

    let mut assign: Vec<u32> = vec![u32::MAX; train.len()];
    for iter in 0..config.max_iters {
        let next: Vec<u32> = train.par_iter().map(|&i| model.assign_point(points, i)).collect();
        let churn = next.iter().zip(&assign).filter(|(a, b)| a != b).count();
        assign = next;
        update_centroids(&mut model, points, &train, &assign);
        repair_empty(&mut model, points, &train, &mut assign);
        model.iterations_run = iter as u32 + 1;
        let inertia: f64 = train
            .iter()
            .zip(&assign)
            .map(|(&i, &a)| model.sq_distance(points, i, a as usize))
            .sum();
        model.inertia_history.push(inertia);
        if churn as f64 <= config.tol * train.len() as f64 {
            break;
        }
    }

    model.assignments = (0..n).into_par_iter().map(|i| model.assign_point(points, i)).collect();
    model.inertia = model
        .assignments
        .iter()
        .enumerate()
        .map(|(i, &a)| model.sq_distance(points, i, a as usize))
        .sum();
    Ok(model)
}

fn plus_plus_seeds(
    points: &PointSet,
    train: &[usize],
    partitions: usize,
    variant: Variant,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let norms: Vec<f64> = train.par_iter().map(|&i| points.squared_norm(i)).collect();
    let first = train[rng.random_range(0..train.len())];
    let mut seeds = vec![first];
    let mut min_dist = vec![f64::INFINITY; train.len()];
    let mut current = points.row(first);
    while seeds.len() < partitions {
        if variant == Variant::Spherical {
            normalize_in_place(&mut current);
        }
        let c_norm = dense_dot(&current, &current);
        min_dist
            .par_iter_mut()
            .zip(train.par_iter().zip(norms.par_iter()))
            .for_each(|(d, (&i, &pn))| {
                let dist = match variant {
                    Variant::Standard => (pn - 2.0 * points.dot(i, &current) + c_norm).max(0.0),
                    // squared distance between the unit point and the unit centroid
                    Variant::Spherical if pn > 0.0 => (2.0 - 2.0 * points.dot(i, &current) / pn.sqrt()).max(0.0),
                    Variant::Spherical => 1.0,
                };
                if dist < *d {
                    *d = dist;
                }
            });
        let total: f64 = min_dist.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = train.len() - 1;
            for (j, &d) in min_dist.iter().enumerate() {
                if target < d {
                    chosen = j;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.random_range(0..train.len())
        };
        seeds.push(train[pick]);
        current = points.row(train[pick]);
    }
    seeds
}

fn update_centroids(model: &mut ClusterModel, points: &PointSet, train: &[usize], assign: &[u32]) {
    let width = model.width;
    let p = model.num_partitions();
    let mut sums = vec![0.0f64; p * width];
    let mut counts = vec![0usize; p];
    for (&i, &a) in train.iter().zip(assign) {
        let a = a as usize;
        points.add_to(i, &mut sums[a * width..(a + 1) * width]);
        counts[a] += 1;
    }
    for c in 0..p {
        if counts[c] == 0 {
            continue;
        }
        let inv = 1.0 / counts[c] as f64;
        let row = &mut model.centroids[c * width..(c + 1) * width];
        for (dst, &s) in row.iter_mut().zip(&sums[c * width..(c + 1) * width]) {
            *dst = (s * inv) as f32;
        }
        if model.variant == Variant::Spherical {
            let norm = dense_dot(row, row);
            if norm > 0.0 {
                normalize_in_place(row);
            }
        }
    }
    model.refresh_norms();
}

/// Each empty partition takes the point farthest from its own centroid.
fn repair_empty(model: &mut ClusterModel, points: &PointSet, train: &[usize], assign: &mut [u32]) {
    let p = model.num_partitions();
    let mut counts = vec![0usize; p];
    for &a in assign.iter() {
        counts[a as usize] += 1;
    }
    if counts.iter().all(|&c| c > 0) {
        return;
    }
    let width = model.width;
    for empty in 0..p {
        if counts[empty] > 0 {
            continue;
        }
        let victim = train
            .iter()
            .zip(assign.iter())
            .enumerate()
            .filter(|(_, (_, &a))| counts[a as usize] > 1)
            .map(|(j, (&i, &a))| (j, model.sq_distance(points, i, a as usize)))
            .fold(None::<(usize, f64)>, |best, (j, d)| match best {
                Some((_, bd)) if bd >= d => best,
                _ => Some((j, d)),
            });
        let Some((j, _)) = victim else { break };
        counts[assign[j] as usize] -= 1;
        assign[j] = empty as u32;
        counts[empty] = 1;
        let mut row = points.row(train[j]);
        if model.variant == Variant::Spherical {
            normalize_in_place(&mut row);
        }
        model.centroids[empty * width..(empty + 1) * width].copy_from_slice(&row);
    }
    update_centroids(model, points, train, assign);
}

impl ClusterModel {
    pub(crate) fn centroid_bits(&self) -> Vec<u32> {
        self.centroids.iter().map(|c| c.to_bits()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn cfg(seed: u64) -> KMeansConfig {
        KMeansConfig { seed, ..Default::default() }
    }

    fn blobs(per: usize, seed: u64) -> (PointSet, Vec<usize>) {
        let centers = [[10.0f32, 0.0, 0.0], [0.0, 10.0, 0.0], [0.0, 0.0, 10.0]];
        let noise = Normal::new(0.0f32, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..3 * per {
            let c = i % 3;
            rows.push(centers[c].iter().map(|&x| x + noise.sample(&mut rng)).collect());
            labels.push(c);
        }
        (PointSet::dense(3, rows).unwrap(), labels)
    }

    /// Agreement with `labels` under the best relabeling of partitions.
    fn agreement(assign: &[u32], labels: &[usize], p: usize) -> f64 {
        let mut best = 0;
        let mut perm: Vec<usize> = (0..p).collect();
        let mut visit = |perm: &[usize]| {
            let hits = assign.iter().zip(labels).filter(|(a, l)| perm[**a as usize] == **l).count();
            best = best.max(hits);
        };
        fn heap(k: usize, perm: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
            if k == 1 {
                visit(perm);
                return;
            }
            for i in 0..k {
                heap(k - 1, perm, visit);
                let j = if k.is_multiple_of(2) { i } else { 0 };
                perm.swap(j, k - 1);
            }
        }
        heap(p, &mut perm, &mut visit);
        best as f64 / labels.len() as f64
    }

    #[test]
    fn single_partition_is_the_mean() {
        let pts = PointSet::dense(2, vec![vec![1.0, 0.0], vec![3.0, 4.0], vec![2.0, 2.0]]).unwrap();
        let m = kmeans(&pts, 1, Variant::Standard, &cfg(0)).unwrap();
        assert_eq!(m.centroid(0), &[2.0, 2.0]);
        let s = kmeans(&pts, 1, Variant::Spherical, &cfg(0)).unwrap();
        let r = 0.5f32.sqrt();
        assert!((s.centroid(0)[0] - r).abs() < 1e-6 && (s.centroid(0)[1] - r).abs() < 1e-6);
        assert!(m.assignments().iter().all(|&a| a == 0));
    }

    #[test]
    fn antipodal_points_split() {
        let pts = PointSet::dense(2, vec![vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        let m = kmeans(&pts, 2, Variant::Spherical, &cfg(3)).unwrap();
        assert_ne!(m.assignments()[0], m.assignments()[1]);
        for (i, p) in [[1.0f32, 0.0], [-1.0, 0.0]].iter().enumerate() {
            assert_eq!(m.centroid(m.assignments()[i] as usize), p);
        }
    }

    #[test]
    fn recovers_separated_blobs() {
        let (pts, labels) = blobs(34, 1);
        for variant in [Variant::Standard, Variant::Spherical] {
            let m = kmeans(&pts, 3, variant, &cfg(2)).unwrap();
            assert!(agreement(m.assignments(), &labels, 3) >= 0.95, "{variant}");
        }
    }

    #[test]
    fn rejects_too_many_partitions() {
        let pts = PointSet::dense(2, vec![vec![1.0, 0.0]]).unwrap();
        assert!(kmeans(&pts, 2, Variant::Standard, &cfg(0)).is_err());
        assert!(kmeans(&pts, 0, Variant::Standard, &cfg(0)).is_err());
    }

    #[test]
    fn identical_points_are_valid() {
        let pts = PointSet::dense(2, vec![vec![1.0, 1.0]; 6]).unwrap();
        let m = kmeans(&pts, 3, Variant::Standard, &cfg(0)).unwrap();
        assert_eq!(m.assignments().len(), 6);
        assert!(m.assignments().iter().all(|&a| a < 3));
    }

    #[test]
    fn assign_follows_variant_rules() {
        let cents = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![5.0, 5.0], vec![-1.0, 0.0]];
        let m = ClusterModel::from_parts(Variant::Standard, 2, cents, vec![]).unwrap();
        assert_eq!(m.assign(&Embedding::Dense(vec![5.0, 5.0])).unwrap(), 2);
        // equidistant from centroids 1 and 3
        let m = ClusterModel::from_parts(Variant::Standard, 2, vec![vec![9.0, 9.0], vec![1.0, 0.0], vec![9.0, -9.0], vec![-1.0, 0.0]], vec![]).unwrap();
        assert_eq!(m.assign(&Embedding::Dense(vec![0.0, 0.0])).unwrap(), 1);
        let s = ClusterModel::from_parts(Variant::Spherical, 2, vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 0.0]], vec![]).unwrap();
        assert_eq!(s.assign(&Embedding::Dense(vec![2.0, 1.0])).unwrap(), 1);
        assert!(s.assign(&Embedding::Dense(vec![1.0])).is_err());
    }

    #[test]
    fn assign_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let normal = Normal::new(0.0f32, 1.0).unwrap();
        let mut row = |n: usize| (0..n).map(|_| normal.sample(&mut rng)).collect::<Vec<f32>>();
        let cents: Vec<Vec<f32>> = (0..8).map(|_| row(5)).collect();
        let m = ClusterModel::from_parts(Variant::Standard, 5, cents.clone(), vec![]).unwrap();
        for _ in 0..100 {
            let x = row(5);
            let dist = |c: &[f32]| c.iter().zip(&x).map(|(a, b)| f64::from(a - b).powi(2)).sum::<f64>();
            let want = (0..8).min_by(|&a, &b| dist(&cents[a]).total_cmp(&dist(&cents[b]))).unwrap();
            assert_eq!(m.assign(&Embedding::Dense(x.clone())).unwrap() as usize, want);
        }
    }

    #[test]
    fn standard_inertia_never_increases() {
        let (pts, _) = blobs(60, 4);
        let m = kmeans(&pts, 7, Variant::Standard, &KMeansConfig { tol: 0.0, ..cfg(5) }).unwrap();
        let h = m.inertia_history();
        assert!(!h.is_empty());
        for w in h.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9), "{h:?}");
        }
    }

    #[test]
    fn spherical_centroids_are_unit() {
        let (pts, _) = blobs(40, 6);
        let m = kmeans(&pts, 5, Variant::Spherical, &cfg(1)).unwrap();
        for c in 0..5 {
            let n = dense_dot(m.centroid(c), m.centroid(c)).sqrt();
            assert!((n - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn spherical_assignment_is_scale_invariant() {
        let (pts, _) = blobs(20, 2);
        let m = kmeans(&pts, 4, Variant::Spherical, &cfg(1)).unwrap();
        let x = Embedding::Dense(vec![0.3, 2.0, -1.0]);
        let y = Embedding::Dense(vec![0.9, 6.0, -3.0]);
        assert_eq!(m.assign(&x).unwrap(), m.assign(&y).unwrap());
    }

    #[test]
    fn deterministic_and_serializable() {
        let (pts, _) = blobs(30, 3);
        let a = kmeans(&pts, 6, Variant::Standard, &cfg(8)).unwrap();
        let b = kmeans(&pts, 6, Variant::Standard, &cfg(8)).unwrap();
        assert_eq!(a.assignments(), b.assignments());
        assert_eq!(a.centroid_bits(), b.centroid_bits());
        let mut bytes = Vec::new();
        a.encode(&mut bytes).unwrap();
        let back = ClusterModel::decode(&mut ByteReader::new(&bytes)).unwrap();
        assert_eq!(back.assignments(), a.assignments());
        assert_eq!(back.centroid_bits(), a.centroid_bits());
        assert_eq!(back.variant(), a.variant());
    }

    #[test]
    fn sparse_points_match_dense_points() {
        let rows: Vec<Vec<f32>> = (0..40).map(|i| vec![(i % 5) as f32, 0.0, (i % 3) as f32, 0.0]).collect();
        let dense = PointSet::dense(4, rows.clone()).unwrap();
        let sparse = PointSet::from_embeddings(
            4,
            rows.iter().map(|r| Embedding::Sparse(SparseVector::from_dense(r))).collect(),
        )
        .unwrap();
        let a = kmeans(&dense, 4, Variant::Spherical, &cfg(2)).unwrap();
        let b = kmeans(&sparse, 4, Variant::Spherical, &cfg(2)).unwrap();
        assert_eq!(a.assignments(), b.assignments());
    }
}
