//! Entity-embedding analytics: k-means clustering, PCA projection to 2-D or
//! 3-D, and projector-format export (`embeddings.tsv` + `metadata.tsv`).

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

/// A finished clustering: assignments, centroids, final inertia and the
/// per-iteration inertia trace (non-increasing by construction).
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    pub inertia_trace: Vec<f64>,
    pub iterations: usize,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest_centroid(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = squared_distance(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Seeded k-means++ initialization: first centroid uniform, the rest sampled
/// proportionally to squared distance from the nearest chosen centroid.
fn kmeans_pp_init<R: Rng>(vectors: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut centroids = Vec::with_capacity(k);
    centroids.push(vectors[rng.random_range(0..vectors.len())].clone());
    let mut dist: Vec<f64> = vectors
        .iter()
        .map(|v| squared_distance(v, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = dist.iter().sum();
        let chosen = if total > 0.0 {
            let mut target = rng.random_range(0.0..total);
            let mut idx = 0;
            for (i, d) in dist.iter().enumerate() {
                idx = i;
                if target < *d {
                    break;
                }
                target -= d;
            }
            idx
        } else {
            // All points coincide with a centroid already.
            rng.random_range(0..vectors.len())
        };
        centroids.push(vectors[chosen].clone());
        for (d, v) in dist.iter_mut().zip(vectors) {
            *d = d.min(squared_distance(v, centroids.last().unwrap()));
        }
    }
    centroids
}

/// Lloyd's algorithm with k-means++ seeding. Runs to an assignment fixpoint
/// or `max_iter`; an emptied cluster is re-seeded to the point farthest from
/// its current centroid, which keeps the inertia trace non-increasing.
pub fn kmeans(
    vectors: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<ClusterAssignment> {
    if k == 0 {
        return Err(Error::invalid("cluster count must be >= 1"));
    }
    if vectors.len() < k {
        return Err(Error::invalid(format!(
            "cannot form {k} clusters from {} vectors",
            vectors.len()
        )));
    }
    let dim = vectors[0].len();
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::invalid("vectors must share one dimension"));
    }

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut centroids = kmeans_pp_init(vectors, k, &mut rng);
    let mut assignments = vec![0usize; vectors.len()];
    let mut inertia_trace = Vec::new();
    let mut iterations = 0;

    for _ in 0..max_iter.max(1) {
        iterations += 1;
        // Assignment step.
        let mut changed = false;
        let mut inertia = 0.0;
        for (i, v) in vectors.iter().enumerate() {
            let (c, d) = nearest_centroid(v, &centroids);
            if assignments[i] != c {
                assignments[i] = c;
                changed = true;
            }
            inertia += d;
        }

        // Re-seed empty clusters to the farthest point from its centroid.
        let mut counts = vec![0usize; k];
        for &a in &assignments {
            counts[a] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let (far, far_d) = vectors
                .iter()
                .enumerate()
                .map(|(i, v)| (i, squared_distance(v, &centroids[assignments[i]])))
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .expect("at least one vector");
            counts[assignments[far]] -= 1;
            counts[c] += 1;
            inertia -= far_d;
            assignments[far] = c;
            centroids[c] = vectors[far].clone();
            changed = true;
        }
        inertia_trace.push(inertia);

        if !changed && inertia_trace.len() > 1 {
            break;
        }

        // Update step: centroid = mean of its members.
        let mut sums = vec![vec![0.0; dim]; k];
        for (v, &a) in vectors.iter().zip(&assignments) {
            for (s, x) in sums[a].iter_mut().zip(v) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for s in sums[c].iter_mut() {
                    *s /= counts[c] as f64;
                }
                centroids[c] = std::mem::take(&mut sums[c]);
            }
        }
    }

    let inertia = *inertia_trace.last().expect("at least one iteration");
    Ok(ClusterAssignment {
        assignments,
        centroids,
        inertia,
        inertia_trace,
        iterations,
    })
}

/// A 2-D/3-D PCA projection with explained-variance ratios per component.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub coords: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    /// Set when the data had (numerically) zero variance; coordinates are
    /// all zero in that case.
    pub degenerate: bool,
}

/// Project onto the top principal directions of the sample covariance.
///
/// Directions follow the sign convention that their largest-magnitude
/// component is positive; coordinates are exactly centered. Data already
/// lying in a `dims`-dimensional subspace projects isometrically.
pub fn pca_project(vectors: &[Vec<f64>], dims: usize) -> Result<Projection> {
    if !(dims == 2 || dims == 3) {
        return Err(Error::invalid("projection dims must be 2 or 3"));
    }
    if vectors.len() < dims + 1 {
        return Err(Error::invalid(format!(
            "need at least {} vectors for a {dims}-D projection",
            dims + 1
        )));
    }
    let n = vectors.len();
    let dim = vectors[0].len();
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::invalid("vectors must share one dimension"));
    }
    if dim < dims {
        return Err(Error::invalid(format!(
            "cannot project {dim}-D data to {dims} components"
        )));
    }

    let mut mean = vec![0.0; dim];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let centered: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| v.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();

    // Sample covariance (dim x dim).
    let mut cov = DMatrix::<f64>::zeros(dim, dim);
    for row in &centered {
        for i in 0..dim {
            for j in i..dim {
                cov[(i, j)] += row[i] * row[j];
            }
        }
    }
    let denom = (n - 1) as f64;
    for i in 0..dim {
        for j in i..dim {
            let v = cov[(i, j)] / denom;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    let total_variance = cov.trace();
    if total_variance <= 1e-12 {
        return Ok(Projection {
            coords: vec![vec![0.0; dims]; n],
            explained_variance: vec![0.0; dims],
            degenerate: true,
        });
    }

    let eigen = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[b]
            .partial_cmp(&eigen.eigenvalues[a])
            .unwrap()
    });

    let mut directions = Vec::with_capacity(dims);
    let mut explained = Vec::with_capacity(dims);
    for &idx in order.iter().take(dims) {
        let mut direction: Vec<f64> = eigen.eigenvectors.column(idx).iter().copied().collect();
        // Largest-magnitude component positive.
        let anchor = direction
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0);
        if direction[anchor] < 0.0 {
            for d in &mut direction {
                *d = -*d;
            }
        }
        directions.push(direction);
        explained.push(eigen.eigenvalues[idx].max(0.0) / total_variance);
    }

    let coords: Vec<Vec<f64>> = centered
        .iter()
        .map(|row| {
            directions
                .iter()
                .map(|d| row.iter().zip(d).map(|(x, w)| x * w).sum())
                .collect()
        })
        .collect();

    Ok(Projection {
        coords,
        explained_variance: explained,
        degenerate: false,
    })
}

/// Write the projector pair: `embeddings.tsv` with one TAB-separated vector
/// per row (shortest round-trip float formatting, no header) and
/// `metadata.tsv` with a `label` header plus one label per row.
pub fn export_projector(vectors: &[Vec<f64>], labels: &[String], out_dir: &Path) -> Result<()> {
    if vectors.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} vectors but {} labels",
            vectors.len(),
            labels.len()
        )));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let mut embeddings = String::new();
    for v in vectors {
        let row: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        embeddings.push_str(&row.join("\t"));
        embeddings.push('\n');
    }
    let path = out_dir.join("embeddings.tsv");
    fs::write(&path, embeddings).map_err(|e| Error::io(&path, e))?;

    let mut metadata = String::from("label\n");
    for label in labels {
        metadata.push_str(label);
        metadata.push('\n');
    }
    let path = out_dir.join("metadata.tsv");
    fs::write(&path, metadata).map_err(|e| Error::io(&path, e))
}

/// Read back an `embeddings.tsv` written by [`export_projector`].
pub fn read_projector_embeddings(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split('\t').map(str::parse::<f64>).collect();
        rows.push(row.map_err(|e| Error::InvalidRecord {
            path: path.to_path_buf(),
            line: lineno + 1,
            message: e.to_string(),
        })?);
    }
    Ok(rows)
}

/// Write `clusters.tsv`: entity-label TAB cluster-id.
pub fn write_clusters_tsv(
    labels: &[String],
    clusters: &ClusterAssignment,
    path: &Path,
) -> Result<()> {
    let mut out = String::new();
    for (label, cluster) in labels.iter().zip(&clusters.assignments) {
        out.push_str(&format!("{label}\t{cluster}\n"));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Write `projection.tsv`: entity-label TAB x TAB y [TAB z].
pub fn write_projection_tsv(labels: &[String], projection: &Projection, path: &Path) -> Result<()> {
    let mut out = String::new();
    for (label, coords) in labels.iter().zip(&projection.coords) {
        let row: Vec<String> = coords.iter().map(|c| c.to_string()).collect();
        out.push_str(&format!("{label}\t{}\n", row.join("\t")));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
