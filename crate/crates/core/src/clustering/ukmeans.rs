use crate::error::{Error, Result};
use crate::scalar::{squared_distance, Scalar};
use crate::seed;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Fixed penalty weights. Used to reduce the algorithm to Lloyd's K-means
/// (`b = l = 0`, discarding off) or to study a fixed trade-off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinnedPenalty {
    pub b: f64,
    pub l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UKMeansParams {
    /// Convergence threshold on the largest center displacement.
    pub epsilon: f64,
    pub max_iterations: usize,
    pub seed: u64,
    /// Iterations with an unchanged cluster count after which the entropy
    /// weight is frozen at zero.
    pub stale_count_window: usize,
    /// `L = exp(-c / l_decay_constant)` for `c` live clusters.
    pub l_decay_constant: f64,
    /// Spread of the random log-perturbation applied to the initial mixing
    /// weights. Zero leaves them uniform, which is a fixed point.
    pub init_jitter: f64,
    pub discard: bool,
    pub pinned: Option<PinnedPenalty>,
}

impl Default for UKMeansParams {
    fn default() -> Self {
        UKMeansParams {
            epsilon: 1e-6,
            max_iterations: 1000,
            seed: 0,
            stale_count_window: 60,
            l_decay_constant: 250.0,
            init_jitter: 1.0,
            discard: true,
            pinned: None,
        }
    }
}

impl UKMeansParams {
    /// Lloyd's K-means: no penalties, no discarding.
    pub fn lloyd(epsilon: f64, max_iterations: usize) -> Self {
        UKMeansParams {
            epsilon,
            max_iterations,
            discard: false,
            pinned: Some(PinnedPenalty { b: 0.0, l: 0.0 }),
            ..Default::default()
        }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::arg("epsilon must be > 0"));
        }
        if self.max_iterations == 0 {
            return Err(Error::arg("max_iterations must be >= 1"));
        }
        if !(self.l_decay_constant > 0.0) {
            return Err(Error::arg("l_decay_constant must be > 0"));
        }
        if !(self.init_jitter >= 0.0 && self.init_jitter.is_finite()) {
            return Err(Error::arg("init_jitter must be finite and >= 0"));
        }
        if let Some(p) = self.pinned {
            if !(p.b >= 0.0 && p.l >= 0.0 && p.b.is_finite() && p.l.is_finite()) {
                return Err(Error::arg("pinned penalties must be finite and >= 0"));
            }
        } else if !self.discard {
            return Err(Error::arg("discarding can only be disabled with pinned penalties"));
        }
        Ok(())
    }
}

/// Counters for the numerical safeguards hit during a fit.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Mixing-weight updates that fell back to the plain frequency.
    pub clamped_updates: usize,
    /// Iterations where the weight-bound cap, not the stability term, set B.
    pub b_cap_active: usize,
    pub discarded: usize,
    /// Clusters dropped because the final relabelling left them empty.
    pub emptied_on_relabel: usize,
    /// Iteration at which B was frozen at zero, if it was.
    pub b_frozen_at: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ClusterModel<T> {
    pub centers: Vec<Vec<T>>,
    pub mixing_weights: Vec<T>,
    /// Cluster index of every fitted point (the one-hot membership rows).
    pub labels: Vec<usize>,
    pub cluster_sizes: Vec<usize>,
    pub final_k: usize,
    pub iterations_run: usize,
    pub converged: bool,
    pub objective_trace: Vec<T>,
    pub count_trace: Vec<usize>,
    /// Penalty weights in force at the end of the fit.
    pub penalty_b: T,
    pub penalty_l: T,
    pub params: UKMeansParams,
    pub diagnostics: FitDiagnostics,
}

impl<T: Scalar> ClusterModel<T> {
    /// Assembles a model from explicit parts, e.g. to score new points
    /// against hand-picked centers.
    pub fn from_parts(
        centers: Vec<Vec<T>>,
        mixing_weights: Vec<T>,
        labels: Vec<usize>,
        penalty_l: T,
    ) -> Result<Self> {
        let k = centers.len();
        if k == 0 || mixing_weights.len() != k {
            return Err(Error::arg("need one mixing weight per center and at least one center"));
        }
        let dim = centers[0].len();
        if centers.iter().any(|c| c.len() != dim) {
            return Err(Error::arg("centers differ in dimension"));
        }
        if labels.iter().any(|&l| l >= k) {
            return Err(Error::arg("label out of range"));
        }
        let mut cluster_sizes = vec![0; k];
        for &l in &labels {
            cluster_sizes[l] += 1;
        }
        Ok(ClusterModel {
            centers,
            mixing_weights,
            labels,
            cluster_sizes,
            final_k: k,
            iterations_run: 0,
            converged: false,
            objective_trace: Vec::new(),
            count_trace: Vec::new(),
            penalty_b: T::zero(),
            penalty_l,
            params: UKMeansParams::default(),
            diagnostics: FitDiagnostics::default(),
        })
    }

    pub fn dim(&self) -> usize {
        self.centers.first().map_or(0, Vec::len)
    }

    /// One-hot membership row of fitted point `i`.
    pub fn membership_row(&self, i: usize) -> Vec<u8> {
        let mut row = vec![0; self.final_k];
        row[self.labels[i]] = 1;
        row
    }

    /// Cluster minimizing `‖x − a_k‖² − L·ln α_k`; ties go to the lowest index.
    pub fn assign(&self, point: &[T]) -> Result<usize> {
        if point.len() != self.dim() {
            return Err(Error::arg(format!(
                "point has dimension {}, model expects {}",
                point.len(),
                self.dim()
            )));
        }
        Ok(penalized_argmin(
            point,
            &self.centers,
            &self.mixing_weights,
            self.penalty_l,
        ))
    }
}

fn penalty<T: Scalar>(l: T, alpha: T) -> T {
    if l == T::zero() {
        T::zero()
    } else if alpha > T::zero() {
        -l * alpha.ln()
    } else {
        T::infinity()
    }
}

fn penalized_argmin<T: Scalar>(point: &[T], centers: &[Vec<T>], alpha: &[T], l: T) -> usize {
    let mut best = 0;
    let mut best_score = T::infinity();
    for (k, c) in centers.iter().enumerate() {
        let score = squared_distance(point, c) + penalty(l, alpha[k]);
        if score < best_score {
            best = k;
            best_score = score;
        }
    }
    best
}

fn entropy_sum<T: Scalar>(alpha: &[T]) -> T {
    alpha
        .iter()
        .filter(|&&a| a > T::zero())
        .map(|&a| a * a.ln())
        .sum()
}

/// Penalized objective
/// `Σ‖x_i − a_{c(i)}‖² − B·Σ α_j ln α_j − L·Σ_i ln α_{c(i)}`.
/// With `b = l = 0` this is the plain within-cluster sum of squares.
pub fn kmeans_objective<T: Scalar>(points: &[Vec<T>], model: &ClusterModel<T>, b: T, l: T) -> T {
    objective_parts(points, &model.centers, &model.mixing_weights, &model.labels, b, l)
}

fn objective_parts<T: Scalar>(
    points: &[Vec<T>],
    centers: &[Vec<T>],
    alpha: &[T],
    labels: &[usize],
    b: T,
    l: T,
) -> T {
    let mut total = T::zero();
    for (x, &k) in points.iter().zip(labels) {
        total += squared_distance(x, &centers[k]) + penalty(l, alpha[k]);
    }
    if b != T::zero() {
        total -= b * entropy_sum(alpha);
    }
    total
}

/// Iteration state. [`ukmeans_fit`] drives it to convergence; tests can
/// step it to compare individual iterations against a reference.
#[derive(Debug, Clone)]
pub struct UKMeans<'a, T> {
    points: &'a [Vec<T>],
    params: UKMeansParams,
    centers: Vec<Vec<T>>,
    alpha: Vec<T>,
    labels: Vec<usize>,
    b: T,
    l: T,
    b_frozen: bool,
    t: usize,
    count_trace: Vec<usize>,
    objective_trace: Vec<T>,
    diagnostics: FitDiagnostics,
    converged: bool,
}

fn check_points<T: Scalar>(points: &[Vec<T>]) -> Result<usize> {
    let first = points.first().ok_or_else(|| Error::arg("no points to cluster"))?;
    let dim = first.len();
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(Error::arg(format!(
                "point {i} has dimension {}, expected {dim}",
                p.len()
            )));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg(format!("point {i} has a non-finite coordinate")));
        }
    }
    Ok(dim)
}

impl<'a, T: Scalar> UKMeans<'a, T> {
    /// One cluster per distinct point, weights proportional to multiplicity
    /// and perturbed by `exp(init_jitter · u)`, `u ~ U(−1, 1)`.
    pub fn new(points: &'a [Vec<T>], params: UKMeansParams) -> Result<Self> {
        params.check()?;
        check_points(points)?;
        let mut distinct: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
        let mut centers = Vec::new();
        let mut mult: Vec<usize> = Vec::new();
        for p in points {
            let key: Vec<u64> = p.iter().map(|v| v.to_f64_lossy().to_bits()).collect();
            let k = *distinct.entry(key).or_insert_with(|| {
                centers.push(p.clone());
                mult.push(0);
                centers.len() - 1
            });
            mult[k] += 1;
        }
        let mut rng = seed::rng(params.seed);
        let raw: Vec<f64> = mult
            .iter()
            .map(|&m| {
                let u: f64 = rng.random_range(-1.0..1.0);
                m as f64 * (params.init_jitter * u).exp()
            })
            .collect();
        let total: f64 = raw.iter().sum();
        let alpha = raw.iter().map(|&a| T::lit(a / total)).collect();
        Ok(Self::start(points, params, centers, alpha))
    }

    /// Starts from user-supplied centers with uniform weights.
    pub fn with_centers(
        points: &'a [Vec<T>],
        centers: Vec<Vec<T>>,
        params: UKMeansParams,
    ) -> Result<Self> {
        params.check()?;
        let dim = check_points(points)?;
        if centers.is_empty() || centers.iter().any(|c| c.len() != dim) {
            return Err(Error::arg("initial centers must be non-empty and match the point dimension"));
        }
        let k = centers.len();
        let alpha = vec![T::one() / T::from_count(k); k];
        Ok(Self::start(points, params, centers, alpha))
    }

    fn start(points: &'a [Vec<T>], params: UKMeansParams, centers: Vec<Vec<T>>, alpha: Vec<T>) -> Self {
        let (b, l) = match params.pinned {
            Some(p) => (T::lit(p.b), T::lit(p.l)),
            None => (T::one(), T::one()),
        };
        UKMeans {
            points,
            params,
            centers,
            alpha,
            labels: vec![0; points.len()],
            b,
            l,
            b_frozen: false,
            t: 0,
            count_trace: Vec::new(),
            objective_trace: Vec::new(),
            diagnostics: FitDiagnostics::default(),
            converged: false,
        }
    }

    pub fn centers(&self) -> &[Vec<T>] {
        &self.centers
    }

    pub fn mixing_weights(&self) -> &[T] {
        &self.alpha
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn iteration(&self) -> usize {
        self.t
    }

    pub fn is_converged(&self) -> bool {
        self.converged
    }

    /// Runs one iteration and reports whether the fit has converged.
    pub fn step(&mut self) -> bool {
        self.t += 1;
        let n = self.points.len();
        let n_t = T::from_count(n);
        let c = self.k();

        for (i, x) in self.points.iter().enumerate() {
            self.labels[i] = penalized_argmin(x, &self.centers, &self.alpha, self.l);
        }

        let mut counts = vec![0usize; c];
        for &k in &self.labels {
            counts[k] += 1;
        }
        let freq: Vec<T> = counts.iter().map(|&m| T::from_count(m) / n_t).collect();

        if self.params.pinned.is_none() {
            self.l = (-(T::from_count(c)) / T::lit(self.params.l_decay_constant)).exp();
        }

        let old_alpha = self.alpha.clone();
        let old_entropy = entropy_sum(&old_alpha);
        let mut new_alpha = freq.clone();
        if self.b != T::zero() {
            let ratio = self.b / self.l;
            for k in 0..c {
                let a = old_alpha[k];
                let v = freq[k] + ratio * a * (a.ln() - old_entropy);
                if v.is_finite() {
                    new_alpha[k] = v;
                } else {
                    self.diagnostics.clamped_updates += 1;
                }
            }
        }

        if self.params.pinned.is_none() && !self.b_frozen {
            self.b = self.next_b(&freq, &old_alpha, &new_alpha, old_entropy);
        }

        let mut keep: Vec<usize> = if self.params.discard {
            let cutoff = T::one() / n_t;
            (0..c).filter(|&k| new_alpha[k] > cutoff).collect()
        } else {
            (0..c).collect()
        };
        if keep.is_empty() {
            let mut best = 0;
            for k in 1..c {
                if new_alpha[k] > new_alpha[best] {
                    best = k;
                }
            }
            keep.push(best);
        }
        self.diagnostics.discarded += c - keep.len();

        let kept_sum: T = keep.iter().map(|&k| new_alpha[k]).sum();
        let mut remap = vec![usize::MAX; c];
        for (new_k, &old_k) in keep.iter().enumerate() {
            remap[old_k] = new_k;
        }
        self.alpha = keep
            .iter()
            .map(|&k| {
                if kept_sum > T::zero() {
                    new_alpha[k] / kept_sum
                } else {
                    T::one() / T::from_count(keep.len())
                }
            })
            .collect();

        let dim = self.centers[0].len();
        let mut sums = vec![vec![T::zero(); dim]; keep.len()];
        let mut members = vec![0usize; keep.len()];
        for (x, &old_k) in self.points.iter().zip(&self.labels) {
            let k = remap[old_k];
            if k == usize::MAX {
                continue;
            }
            members[k] += 1;
            for (s, &v) in sums[k].iter_mut().zip(x) {
                *s += v;
            }
        }
        let mut shift = T::zero();
        let mut new_centers = Vec::with_capacity(keep.len());
        for (k, &old_k) in keep.iter().enumerate() {
            let old = &self.centers[old_k];
            let center = if members[k] == 0 {
                old.clone()
            } else {
                let m = T::from_count(members[k]);
                sums[k].iter().map(|&s| s / m).collect()
            };
            shift = shift.max(squared_distance(&center, old).sqrt());
            new_centers.push(center);
        }
        self.centers = new_centers;
        for lbl in &mut self.labels {
            if remap[*lbl] != usize::MAX {
                *lbl = remap[*lbl];
            } else {
                *lbl = usize::MAX;
            }
        }
        for (i, x) in self.points.iter().enumerate() {
            if self.labels[i] == usize::MAX {
                self.labels[i] = penalized_argmin(x, &self.centers, &self.alpha, self.l);
            }
        }

        let k_now = self.k();
        self.count_trace.push(k_now);
        self.objective_trace.push(objective_parts(
            self.points,
            &self.centers,
            &self.alpha,
            &self.labels,
            self.b,
            self.l,
        ));

        let window = self.params.stale_count_window;
        if self.params.pinned.is_none()
            && !self.b_frozen
            && self.t >= window
            && self.count_trace.len() >= window
            && self.count_trace[self.count_trace.len() - window..]
                .iter()
                .all(|&k| k == k_now)
        {
            self.b = T::zero();
            self.b_frozen = true;
            self.diagnostics.b_frozen_at = Some(self.t);
        }

        let eps = T::lit(self.params.epsilon);
        let weight_shift = if k_now == c {
            (0..c).map(|k| (self.alpha[k] - old_alpha[k]).abs()).fold(T::zero(), T::max)
        } else {
            T::infinity()
        };
        self.converged = k_now == c && shift < eps && weight_shift < eps;
        self.converged
    }

    /// Entropy weight for the next iteration: the smaller of a stability
    /// term (near 1 when weights stop moving) and the largest value that
    /// keeps the next weight update inside (0, 1).
    fn next_b(&mut self, freq: &[T], old_alpha: &[T], new_alpha: &[T], old_entropy: T) -> T {
        let c = old_alpha.len();
        let n_t = T::from_count(self.points.len());
        let d = self.centers[0].len() as i32;
        let exponent = (d / 2 - 1).max(0);
        let eta = T::one().min(T::one() / T::from_count(self.t).powi(exponent));
        let stability: T = (0..c)
            .map(|k| (-eta * n_t * (new_alpha[k] - old_alpha[k]).abs()).exp())
            .sum::<T>()
            / T::from_count(c);
        let max_freq = freq.iter().copied().fold(T::zero(), T::max);
        let max_alpha = old_alpha.iter().copied().fold(T::zero(), T::max);
        let denom = -max_alpha * old_entropy;
        let cap = (T::one() - max_freq) / denom;
        if denom > T::zero() && cap.is_finite() && cap < stability {
            self.diagnostics.b_cap_active += 1;
            cap
        } else {
            stability
        }
    }

    /// Final relabelling with the last weights; clusters it leaves empty
    /// are dropped and the weights renormalized.
    pub fn finish(mut self) -> ClusterModel<T> {
        loop {
            for (i, x) in self.points.iter().enumerate() {
                self.labels[i] = penalized_argmin(x, &self.centers, &self.alpha, self.l);
            }
            let mut sizes = vec![0usize; self.k()];
            for &k in &self.labels {
                sizes[k] += 1;
            }
            let empty = sizes.iter().filter(|&&s| s == 0).count();
            if empty == 0 || !self.params.discard {
                let final_k = self.k();
                return ClusterModel {
                    final_k,
                    cluster_sizes: sizes,
                    iterations_run: self.t,
                    converged: self.converged,
                    centers: self.centers,
                    mixing_weights: self.alpha,
                    labels: self.labels,
                    objective_trace: self.objective_trace,
                    count_trace: self.count_trace,
                    penalty_b: self.b,
                    penalty_l: self.l,
                    params: self.params,
                    diagnostics: self.diagnostics,
                };
            }
            self.diagnostics.emptied_on_relabel += empty;
            let keep: Vec<usize> = (0..sizes.len()).filter(|&k| sizes[k] > 0).collect();
            let sum: T = keep.iter().map(|&k| self.alpha[k]).sum();
            self.centers = keep.iter().map(|&k| self.centers[k].clone()).collect();
            self.alpha = keep.iter().map(|&k| self.alpha[k] / sum).collect();
        }
    }

    pub fn run(mut self) -> ClusterModel<T> {
        while self.t < self.params.max_iterations {
            if self.step() {
                break;
            }
        }
        self.finish()
    }
}

/// Clusters `points` without a preset cluster count.
pub fn ukmeans_fit<T: Scalar>(points: &[Vec<T>], params: UKMeansParams) -> Result<ClusterModel<T>> {
    Ok(UKMeans::new(points, params)?.run())
}

/// Same loop, started from explicit centers with uniform weights.
pub fn ukmeans_fit_from<T: Scalar>(
    points: &[Vec<T>],
    initial_centers: Vec<Vec<T>>,
    params: UKMeansParams,
) -> Result<ClusterModel<T>> {
    Ok(UKMeans::with_centers(points, initial_centers, params)?.run())
}
