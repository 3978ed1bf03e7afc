//! Choosing the exponents `gamma_0 ..= gamma_L`: exhaustive grid search,
//! greedy layer-wise search, and stochastic gradient descent on a binary
//! cross-entropy loss with k-fold cross-validation.
//!
//! Every strategy evaluates the full pipeline frame by frame. Grid
//! evaluation walks the exponent tree depth-first per frame, so layers
//! shared by many grid points are computed once.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cfp::NUM_PITCHES;
use crate::dataset::Piece;
use crate::error::{Error, Result};
use crate::eval::{scores, EvalCounts, Scores};
use crate::layers::{fusion_pair, MlcConfig};
use crate::pipeline::FramePipeline;
use crate::signal::activate;

/// Inclusive arithmetic grid `start, start + step, ..., <= stop`.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    // round to the step's decimal precision so 0.1 * 3 prints as 0.3
    (0..count).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect()
}

/// One grid of candidate exponents per layer.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchSpace {
    pub grids: Vec<Vec<f64>>,
}

impl SearchSpace {
    pub fn new(grids: Vec<Vec<f64>>) -> Result<Self> {
        let space = SearchSpace { grids };
        space.validate()?;
        Ok(space)
    }

    /// `0.1, 0.2, ..., 0.9, 1.0` for every layer of a depth-`depth` stack.
    pub fn brute_force(depth: usize) -> Self {
        let mut grid = linear_grid(0.1, 0.9, 0.1);
        grid.push(1.0);
        SearchSpace { grids: vec![grid; depth + 1] }
    }

    /// `0.01 ..= 0.99` by `0.01` for layers `0..depth`, and the deepest
    /// layer fixed at `terminal`.
    pub fn greedy(depth: usize, terminal: f64) -> Self {
        let mut grids = vec![linear_grid(0.01, 0.99, 0.01); depth];
        grids.push(vec![terminal]);
        SearchSpace { grids }
    }

    pub fn depth(&self) -> usize {
        self.grids.len().saturating_sub(1)
    }

    pub fn len(&self) -> usize {
        self.grids.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Exponent vector of flat index `i` (last layer varies fastest).
    pub fn point(&self, mut i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.grids.len()];
        for (l, g) in self.grids.iter().enumerate().rev() {
            out[l] = g[i % g.len()];
            i /= g.len();
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.grids.len() < 2 {
            return Err(Error::invalid("search needs at least two layers"));
        }
        for (l, g) in self.grids.iter().enumerate() {
            if g.is_empty() {
                return Err(Error::invalid(format!("grid for layer {l} is empty")));
            }
            if let Some(v) = g.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                return Err(Error::invalid(format!("grid for layer {l} contains {v}")));
            }
        }
        Ok(())
    }
}

/// Evaluates exponent vectors on a fixed set of pieces.
#[derive(Clone, Debug)]
pub struct Evaluator<'a> {
    pipeline: FramePipeline,
    pieces: &'a [Piece],
}

impl<'a> Evaluator<'a> {
    /// All pieces must share one sample rate; each piece's ground truth
    /// must be on the template's frame grid.
    pub fn new(template: &MlcConfig, threshold_ratio: f64, pieces: &'a [Piece]) -> Result<Self> {
        let first = pieces.first().ok_or_else(|| Error::Dataset("no pieces to evaluate".into()))?;
        let fs = first.signal.sample_rate();
        if let Some(p) = pieces.iter().find(|p| p.signal.sample_rate() != fs) {
            return Err(Error::Dataset(format!(
                "{} has sample rate {}, expected {fs}",
                p.name,
                p.signal.sample_rate()
            )));
        }
        let pipeline = FramePipeline::new(template, fs, threshold_ratio)?;
        for p in pieces {
            if pipeline.num_frames(&p.signal) != p.truth.frames() {
                return Err(Error::ShapeMismatch(format!(
                    "{}: {} analysis frames, {} ground-truth frames",
                    p.name,
                    pipeline.num_frames(&p.signal),
                    p.truth.frames()
                )));
            }
        }
        Ok(Evaluator { pipeline, pieces })
    }

    pub fn pipeline(&self) -> &FramePipeline {
        &self.pipeline
    }

    pub fn pieces(&self) -> &[Piece] {
        self.pieces
    }

    fn frames(&self) -> Vec<(usize, usize)> {
        self.pieces
            .iter()
            .enumerate()
            .flat_map(|(p, piece)| (0..piece.truth.frames()).map(move |n| (p, n)))
            .collect()
    }

    /// Summed counts at one exponent vector.
    pub fn evaluate(&self, gammas: &[f64]) -> Result<EvalCounts> {
        let space = SearchSpace::new(gammas.iter().map(|&g| vec![g]).collect())?;
        self.evaluate_space(&space)?
            .pop()
            .flatten()
            .ok_or_else(|| Error::NonFinite(format!("pipeline output at gammas {gammas:?}")))
    }

    /// Summed counts for every point of `space` in flat-index order;
    /// `None` marks points whose salience was not finite on some frame.
    pub fn evaluate_space(&self, space: &SearchSpace) -> Result<Vec<Option<EvalCounts>>> {
        space.validate()?;
        let points = space.len();
        let frames = self.frames();
        let (counts, failed) = frames
            .par_iter()
            .fold(
                || (vec![EvalCounts::default(); points], vec![false; points]),
                |(mut counts, mut failed), &(p, n)| {
                    let piece = &self.pieces[p];
                    let mags = self.pipeline.magnitudes(&piece.signal, n);
                    let truth = piece.truth.frame(n);
                    let mut layers = Vec::with_capacity(space.grids.len());
                    self.walk(space, &mags, truth, &mut layers, 0, &mut counts, &mut failed);
                    (counts, failed)
                },
            )
            .reduce(
                || (vec![EvalCounts::default(); points], vec![false; points]),
                |(mut ca, mut fa), (cb, fb)| {
                    for i in 0..points {
                        ca[i] += cb[i];
                        fa[i] |= fb[i];
                    }
                    (ca, fa)
                },
            );
        Ok(counts.into_iter().zip(failed).map(|(c, f)| (!f).then_some(c)).collect())
    }

    #[allow(clippy::too_many_arguments)]
    fn walk(
        &self,
        space: &SearchSpace,
        mags: &[f64],
        truth: &[bool; NUM_PITCHES],
        layers: &mut Vec<Vec<f64>>,
        index: usize,
        counts: &mut [EvalCounts],
        failed: &mut [bool],
    ) {
        let l = layers.len();
        if l == space.grids.len() {
            let salience = self.pipeline.salience_from_layers(layers);
            match self.pipeline.frame_counts(&salience, truth) {
                Some(c) => counts[index] += c,
                None => failed[index] = true,
            }
            return;
        }
        let pre = if l == 0 { mags.to_vec() } else { self.pipeline.engine().pre_activation(&layers[l - 1], l) };
        let grid = &space.grids[l];
        for (j, &g) in grid.iter().enumerate() {
            let mut z = pre.clone();
            activate(&mut z, g);
            layers.push(z);
            self.walk(space, mags, truth, layers, index * grid.len() + j, counts, failed);
            layers.pop();
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredPoint {
    pub gammas: Vec<f64>,
    pub counts: EvalCounts,
    pub scores: Scores,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreedyStep {
    /// Layer whose exponent was scanned.
    pub layer: usize,
    pub scanned: Vec<ScoredPoint>,
    pub best: ScoredPoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    pub best: ScoredPoint,
    /// Every evaluated point (brute force) or the concatenated scans (greedy).
    pub table: Vec<ScoredPoint>,
    /// Per-layer scans; empty for brute force.
    pub trace: Vec<GreedyStep>,
    /// Points dropped because the pipeline produced non-finite output.
    pub failures: Vec<Vec<f64>>,
}

fn better(a: &ScoredPoint, b: &ScoredPoint) -> bool {
    match a.scores.f_score.total_cmp(&b.scores.f_score) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => {
            a.gammas.iter().zip(&b.gammas).find(|(x, y)| x != y).is_some_and(|(x, y)| x < y)
        }
    }
}

fn scan(evaluator: &Evaluator, space: &SearchSpace) -> Result<(Vec<ScoredPoint>, Vec<Vec<f64>>)> {
    let results = evaluator.evaluate_space(space)?;
    let mut table = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        let gammas = space.point(i);
        match r {
            Some(counts) => table.push(ScoredPoint { gammas, counts, scores: scores(&counts) }),
            None => {
                log::warn!("grid point {gammas:?} produced non-finite salience; skipped");
                failures.push(gammas);
            }
        }
    }
    Ok((table, failures))
}

fn best_of(table: &[ScoredPoint]) -> Result<ScoredPoint> {
    table
        .iter()
        .fold(None::<&ScoredPoint>, |best, p| match best {
            Some(b) if !better(p, b) => Some(b),
            _ => Some(p),
        })
        .cloned()
        .ok_or_else(|| Error::NonFinite("every grid point failed".into()))
}

/// Exhaustive search; ties go to the lexicographically smallest vector.
pub fn brute_force(space: &SearchSpace, evaluator: &Evaluator) -> Result<SearchOutcome> {
    let (table, failures) = scan(evaluator, space)?;
    let best = best_of(&table)?;
    Ok(SearchOutcome { best, table, trace: Vec::new(), failures })
}

/// Layer-wise search. Step `l` (for `l < L`) scans `grids[l]` with the
/// earlier exponents fixed at their chosen values, scoring the pair
/// `(l, l + 1)` with layer `l + 1` at the deepest layer's (single) value.
/// The returned vector is the chosen prefix plus that final value.
pub fn greedy(space: &SearchSpace, evaluator: &Evaluator) -> Result<SearchOutcome> {
    space.validate()?;
    let depth = space.depth();
    let terminal = match space.grids[depth].as_slice() {
        [t] => *t,
        _ => return Err(Error::invalid("greedy search needs a single value for the deepest layer")),
    };
    let mut chosen: Vec<f64> = Vec::with_capacity(depth + 1);
    let mut trace = Vec::with_capacity(depth);
    let mut table = Vec::new();
    let mut failures = Vec::new();
    for l in 0..depth {
        let mut grids: Vec<Vec<f64>> = chosen.iter().map(|&g| vec![g]).collect();
        grids.push(space.grids[l].clone());
        grids.push(vec![terminal]);
        let step_space = SearchSpace::new(grids)?;
        let (scanned, failed) = scan(evaluator, &step_space)?;
        let best = best_of(&scanned)?;
        log::info!("greedy layer {l}: gamma = {} ({})", best.gammas[l], best.scores);
        chosen.push(best.gammas[l]);
        table.extend(scanned.iter().cloned());
        failures.extend(failed);
        trace.push(GreedyStep { layer: l, scanned, best });
    }
    chosen.push(terminal);
    let best = trace.last().map(|s| s.best.clone()).expect("depth >= 1");
    debug_assert_eq!(best.gammas, chosen);
    Ok(SearchOutcome { best, table, trace, failures })
}

/// Consecutive folds, earlier folds taking the remainder; returns
/// `(train, test)` per fold in input order.
pub fn kfold_split<T: Clone>(items: &[T], k: usize) -> Result<Vec<(Vec<T>, Vec<T>)>> {
    if k < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {k}")));
    }
    if items.len() < k {
        return Err(Error::Dataset(format!("{} pieces cannot fill {k} folds", items.len())));
    }
    let base = items.len() / k;
    let extra = items.len() % k;
    let mut start = 0;
    let mut folds = Vec::with_capacity(k);
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let test = items[start..start + size].to_vec();
        let train = items[..start].iter().chain(&items[start + size..]).cloned().collect();
        folds.push((train, test));
        start += size;
    }
    Ok(folds)
}

pub const GAMMA_MIN: f64 = 0.01;
pub const GAMMA_MAX: f64 = 3.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SgdConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub init_gammas: Vec<f64>,
    /// Relative step of the central finite difference for exponent gradients.
    pub fd_step: f64,
    pub seed: u64,
    pub folds: usize,
}

impl SgdConfig {
    /// Rate 0.1, batches of 256 frames, 40 epochs, exponents starting at
    /// `[0.24, 0.6, 1, 1, ...]` for a depth-`depth` stack.
    pub fn new(depth: usize) -> Self {
        let mut init_gammas = vec![1.0; depth + 1];
        init_gammas[0] = 0.24;
        if depth >= 1 {
            init_gammas[1] = 0.6;
        }
        SgdConfig {
            learning_rate: 0.1,
            batch_size: 256,
            max_epochs: 40,
            init_gammas,
            fd_step: 1e-3,
            seed: 0,
            folds: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid(format!("learning rate must be nonnegative, got {}", self.learning_rate)));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        if self.init_gammas.len() < 2 {
            return Err(Error::invalid("SGD needs at least two layers"));
        }
        if self.init_gammas.iter().any(|g| !(GAMMA_MIN..=GAMMA_MAX).contains(g)) {
            return Err(Error::invalid(format!("initial gammas must lie in [{GAMMA_MIN}, {GAMMA_MAX}]")));
        }
        if !(self.fd_step > 0.0 && self.fd_step < 0.5) {
            return Err(Error::invalid("finite-difference step must be in (0, 0.5)"));
        }
        Ok(())
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Per-band `sigmoid(scale * s + bias)` output layer.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineSigmoid {
    pub scale: [f64; NUM_PITCHES],
    pub bias: [f64; NUM_PITCHES],
}

impl Default for AffineSigmoid {
    fn default() -> Self {
        AffineSigmoid { scale: [1.0; NUM_PITCHES], bias: [0.0; NUM_PITCHES] }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AffineGradient {
    pub scale: [f64; NUM_PITCHES],
    pub bias: [f64; NUM_PITCHES],
}

impl AffineSigmoid {
    pub fn probabilities(&self, salience: &[f64; NUM_PITCHES]) -> [f64; NUM_PITCHES] {
        std::array::from_fn(|b| sigmoid(self.scale[b] * salience[b] + self.bias[b]))
    }

    /// Mean binary cross-entropy over all cells of the batch.
    pub fn loss(&self, salience: &[[f64; NUM_PITCHES]], truth: &[[bool; NUM_PITCHES]]) -> f64 {
        let cells = (salience.len() * NUM_PITCHES).max(1) as f64;
        salience
            .iter()
            .zip(truth)
            .map(|(s, t)| {
                (0..NUM_PITCHES)
                    .map(|b| {
                        let z = self.scale[b] * s[b] + self.bias[b];
                        softplus(z) - if t[b] { z } else { 0.0 }
                    })
                    .sum::<f64>()
            })
            .sum::<f64>()
            / cells
    }

    /// Loss and its analytic gradient with respect to scale and bias.
    pub fn loss_and_gradient(
        &self,
        salience: &[[f64; NUM_PITCHES]],
        truth: &[[bool; NUM_PITCHES]],
    ) -> (f64, AffineGradient) {
        let cells = (salience.len() * NUM_PITCHES).max(1) as f64;
        let mut grad = AffineGradient { scale: [0.0; NUM_PITCHES], bias: [0.0; NUM_PITCHES] };
        for (s, t) in salience.iter().zip(truth) {
            for b in 0..NUM_PITCHES {
                let z = self.scale[b] * s[b] + self.bias[b];
                let err = (sigmoid(z) - f64::from(u8::from(t[b]))) / cells;
                grad.scale[b] += err * s[b];
                grad.bias[b] += err;
            }
        }
        (self.loss(salience, truth), grad)
    }

    pub fn step(&mut self, grad: &AffineGradient, learning_rate: f64) {
        for b in 0..NUM_PITCHES {
            self.scale[b] -= learning_rate * grad.scale[b];
            self.bias[b] -= learning_rate * grad.bias[b];
        }
    }
}

/// Salience fed to the output layer: band salience divided by its frame maximum.
pub fn normalized_salience(pipeline: &FramePipeline, magnitudes: &[f64], gammas: &[f64]) -> [f64; NUM_PITCHES] {
    let mut s = pipeline.salience(magnitudes, gammas);
    let max = s.iter().copied().fold(0.0_f64, f64::max);
    if max > 0.0 && max.is_finite() {
        for v in s.iter_mut() {
            *v /= max;
        }
    }
    s
}

/// A batch of frames with cached magnitude spectra.
#[derive(Clone, Debug)]
pub struct Batch {
    pub magnitudes: Vec<Vec<f64>>,
    pub truth: Vec<[bool; NUM_PITCHES]>,
}

impl Batch {
    pub fn gather(pipeline: &FramePipeline, pieces: &[Piece], frames: &[(usize, usize)]) -> Self {
        let magnitudes = frames
            .par_iter()
            .map(|&(p, n)| pipeline.magnitudes(&pieces[p].signal, n))
            .collect();
        let truth = frames.iter().map(|&(p, n)| *pieces[p].truth.frame(n)).collect();
        Batch { magnitudes, truth }
    }

    pub fn len(&self) -> usize {
        self.truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }

    pub fn salience(&self, pipeline: &FramePipeline, gammas: &[f64]) -> Vec<[f64; NUM_PITCHES]> {
        self.magnitudes.par_iter().map(|m| normalized_salience(pipeline, m, gammas)).collect()
    }
}

/// Exponents plus output layer.
#[derive(Clone, Debug, PartialEq)]
pub struct SgdModel {
    pub gammas: Vec<f64>,
    pub output: AffineSigmoid,
}

impl SgdModel {
    pub fn new(gammas: Vec<f64>) -> Self {
        SgdModel { gammas, output: AffineSigmoid::default() }
    }

    pub fn loss(&self, pipeline: &FramePipeline, batch: &Batch) -> f64 {
        self.output.loss(&batch.salience(pipeline, &self.gammas), &batch.truth)
    }

    /// Central-difference gradient of the batch loss with respect to each
    /// exponent, using steps of `rel_step * gamma`.
    pub fn gamma_gradient(&self, pipeline: &FramePipeline, batch: &Batch, rel_step: f64) -> Vec<f64> {
        (0..self.gammas.len())
            .map(|i| {
                let h = rel_step * self.gammas[i];
                let at = |d: f64| {
                    let mut g = self.gammas.clone();
                    g[i] += d;
                    self.output.loss(&batch.salience(pipeline, &g), &batch.truth)
                };
                (at(h) - at(-h)) / (2.0 * h)
            })
            .collect()
    }

    /// One SGD update on `batch`; returns the pre-update batch loss.
    pub fn step(&mut self, pipeline: &FramePipeline, batch: &Batch, learning_rate: f64, rel_step: f64) -> Result<f64> {
        let salience = batch.salience(pipeline, &self.gammas);
        let (loss, affine) = self.output.loss_and_gradient(&salience, &batch.truth);
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!("training loss at gammas {:?}", self.gammas)));
        }
        let gamma_grad = self.gamma_gradient(pipeline, batch, rel_step);
        if let Some(g) = gamma_grad.iter().find(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!("gamma gradient {g} at {:?}", self.gammas)));
        }
        self.output.step(&affine, learning_rate);
        for (g, d) in self.gammas.iter_mut().zip(&gamma_grad) {
            *g = (*g - learning_rate * d).clamp(GAMMA_MIN, GAMMA_MAX);
        }
        Ok(loss)
    }

    /// Frame decisions: probability at least one half.
    pub fn predict(&self, pipeline: &FramePipeline, magnitudes: &[f64]) -> [bool; NUM_PITCHES] {
        let s = normalized_salience(pipeline, magnitudes, &self.gammas);
        self.output.probabilities(&s).map(|p| p >= 0.5)
    }
}

/// Trains on the given `(piece, frame)` list; returns the model and the
/// mean batch loss of every epoch.
pub fn train(
    config: &SgdConfig,
    pipeline: &FramePipeline,
    pieces: &[Piece],
    frames: &[(usize, usize)],
) -> Result<(SgdModel, Vec<f64>)> {
    config.validate()?;
    let mut model = SgdModel::new(config.init_gammas.clone());
    let mut order = frames.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut epoch_losses = Vec::with_capacity(config.max_epochs);
    for epoch in 0..config.max_epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch = Batch::gather(pipeline, pieces, chunk);
            total += model.step(pipeline, &batch, config.learning_rate, config.fd_step)? * chunk.len() as f64;
        }
        let mean = total / order.len().max(1) as f64;
        log::debug!("epoch {epoch}: loss {mean:.5}, gammas {:?}", model.gammas);
        epoch_losses.push(mean);
    }
    Ok((model, epoch_losses))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FoldResult {
    pub test_pieces: Vec<String>,
    pub model: SgdModel,
    pub epoch_losses: Vec<f64>,
    pub counts: EvalCounts,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SgdOutcome {
    pub folds: Vec<FoldResult>,
    /// Test counts summed over folds.
    pub counts: EvalCounts,
    pub scores: Scores,
}

/// k-fold cross-validation: train on all but one fold, threshold the test
/// fold's probabilities at one half, and pool the counts.
pub fn sgd_train(config: &SgdConfig, template: &MlcConfig, pieces: &[Piece]) -> Result<SgdOutcome> {
    config.validate()?;
    let evaluator = Evaluator::new(&template.with_gammas(config.init_gammas.clone()), 0.5, pieces)?;
    let pipeline = evaluator.pipeline();
    let ids: Vec<usize> = (0..pieces.len()).collect();
    let mut folds = Vec::new();
    for (fold, (train_ids, test_ids)) in kfold_split(&ids, config.folds)?.into_iter().enumerate() {
        let frames_of = |ids: &[usize]| -> Vec<(usize, usize)> {
            ids.iter().flat_map(|&p| (0..pieces[p].truth.frames()).map(move |n| (p, n))).collect()
        };
        let fold_config = SgdConfig { seed: config.seed.wrapping_add(fold as u64), ..config.clone() };
        let (model, epoch_losses) = train(&fold_config, pipeline, pieces, &frames_of(&train_ids)).map_err(|e| {
            log::error!("fold {fold} aborted: {e}");
            e
        })?;
        let counts = frames_of(&test_ids)
            .par_iter()
            .map(|&(p, n)| {
                let pred = model.predict(pipeline, &pipeline.magnitudes(&pieces[p].signal, n));
                crate::eval::evaluate_frame(&pred, pieces[p].truth.frame(n))
            })
            .sum::<EvalCounts>();
        log::info!("fold {fold}: gammas {:?}, {}", model.gammas, scores(&counts));
        folds.push(FoldResult {
            test_pieces: test_ids.iter().map(|&p| pieces[p].name.clone()).collect(),
            model,
            epoch_losses,
            counts,
        });
    }
    let counts = folds.iter().map(|f| f.counts).sum();
    Ok(SgdOutcome { folds, counts, scores: scores(&counts) })
}

/// CSV of scored points: `gamma_0..gamma_L,P,R,F`.
pub fn write_table_csv(out: impl std::io::Write, table: &[ScoredPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let width = table.first().map_or(0, |p| p.gammas.len());
    let mut header: Vec<String> = (0..width).map(|i| format!("gamma_{i}")).collect();
    header.extend(["tp", "fp", "fn", "precision", "recall", "f_score"].map(String::from));
    w.write_record(&header)?;
    for p in table {
        let mut row: Vec<String> = p.gammas.iter().map(|g| format!("{g}")).collect();
        row.extend([p.counts.tp, p.counts.fp, p.counts.fn_].map(|c| c.to_string()));
        row.extend([p.scores.precision, p.scores.recall, p.scores.f_score].map(|v| format!("{:.4}", 100.0 * v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Plain-text summary: one row per method, layer pair, exponents and P/R/F.
pub fn summary_row(method: &str, gammas: &[f64], s: &Scores) -> String {
    let depth = gammas.len() - 1;
    let pair = fusion_pair(depth).map_or("-".to_string(), |(e, o)| format!("Z{} & Z{}", e.min(o), e.max(o)));
    let mut line = format!("{method:<12} {pair:<10}");
    for g in gammas {
        let _ = write!(line, " {g:>5.2}");
    }
    let _ = write!(
        line,
        "   P {:6.2}  R {:6.2}  F {:6.2}",
        100.0 * s.precision,
        100.0 * s.recall,
        100.0 * s.f_score
    );
    line
}
