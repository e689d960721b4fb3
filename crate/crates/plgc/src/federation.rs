//! Communication-round orchestration: client sampling, local training
//! dispatch, and sample-weighted aggregation of local item tables.

use crate::data::{sample_eval_negatives, sample_train_negatives, InteractionSplit};
use crate::embedding::{EmbeddingTable, UserVector};
use crate::evaluation::{self, spearman, EvalResult, IaReport, IaRow};
use crate::plgc::{
    gram_trace, mix_tables, mixing_coefficients, plgc_backward, BatchSample, ErrNetwork,
    MixCoefficients, PlgcError, PlgcHyper,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::path::Path;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FederationError {
    #[error("cannot select {requested} clients out of {available}")]
    TooManyClients { requested: usize, available: usize },
    #[error("aggregation over zero tables or zero total samples")]
    EmptyAggregation,
    #[error("table shape mismatch during aggregation")]
    ShapeMismatch,
    #[error("client {user}: {source}")]
    ClientTraining { user: usize, source: PlgcError },
    #[error(transparent)]
    Data(#[from] crate::data::DataError),
    #[error(transparent)]
    Eval(#[from] crate::evaluation::EvalError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Strategy {
    /// replacement architecture: C overwritten by G each round, no mixing,
    /// no redundancy loss
    Vanilla,
    /// dynamic mixing only (beta forced to 0)
    DlgmOnly,
    /// redundancy loss only (lambda_c fixed at 1)
    ErrOnly,
    /// both components
    Plgc,
}

impl Strategy {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "vanilla" => Some(Strategy::Vanilla),
            "dlgm_only" => Some(Strategy::DlgmOnly),
            "err_only" => Some(Strategy::ErrOnly),
            "plgc" => Some(Strategy::Plgc),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Vanilla => "vanilla",
            Strategy::DlgmOnly => "dlgm_only",
            Strategy::ErrOnly => "err_only",
            Strategy::Plgc => "plgc",
        }
    }

    fn uses_mixing(&self) -> bool {
        matches!(self, Strategy::DlgmOnly | Strategy::Plgc)
    }

    fn uses_err(&self) -> bool {
        matches!(self, Strategy::ErrOnly | Strategy::Plgc)
    }
}

/// One user's private simulation state. The user vector and the eRR network
/// never leave the client.
#[derive(Debug, Clone)]
pub struct ClientState {
    pub user_id: usize,
    pub p: UserVector,
    pub local: EmbeddingTable,
    pub net: ErrNetwork,
    pub cached_trace_global: f64,
    pub participated: bool,
    rng: ChaCha8Rng,
}

/// The only structure a client ever serializes toward the server.
#[derive(Debug, Clone, Serialize)]
pub struct ClientUpload {
    pub user_id: usize,
    pub table: EmbeddingTable,
    pub sample_count: usize,
}

/// Uniform selection of `s` distinct clients.
pub fn select_clients<R: Rng>(
    n: usize,
    s: usize,
    rng: &mut R,
) -> Result<Vec<usize>, FederationError> {
    if s > n || s == 0 {
        return Err(FederationError::TooManyClients {
            requested: s,
            available: n,
        });
    }
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    ids.truncate(s);
    ids.sort_unstable();
    Ok(ids)
}

/// Sample-count-weighted mean of client tables.
pub fn aggregate(tables: &[(&EmbeddingTable, usize)]) -> Result<EmbeddingTable, FederationError> {
    let first = tables.first().ok_or(FederationError::EmptyAggregation)?.0;
    let total: usize = tables.iter().map(|&(_, n)| n).sum();
    if total == 0 {
        return Err(FederationError::EmptyAggregation);
    }
    let mut out = EmbeddingTable::zeros(first.rows(), first.dim());
    for &(table, count) in tables {
        if !table.same_shape(first) {
            return Err(FederationError::ShapeMismatch);
        }
        let alpha = count as f64 / total as f64;
        for (o, v) in out.values_mut().iter_mut().zip(table.values()) {
            *o += alpha * v;
        }
    }
    Ok(out)
}

/// Per-epoch mixing diagnostics, emitted when tracing is enabled.
#[derive(Debug, Clone)]
pub struct MixingTraceRow {
    pub client: usize,
    pub round: usize,
    pub epoch: usize,
    pub lambda_c: f64,
    pub trace_local: f64,
    pub trace_global: f64,
    pub rec_loss: f64,
    pub err_loss: f64,
}

/// Per-communication-round metrics row.
#[derive(Debug, Clone)]
pub struct RoundReport {
    pub round: usize,
    pub strategy: Strategy,
    pub hr: Option<f64>,
    pub ndcg: Option<f64>,
    pub mean_rec_loss: f64,
    pub mean_err_loss: f64,
    pub mean_lambda_c: f64,
    pub ia_global: Option<f64>,
    pub mean_ia_local: Option<f64>,
    pub mean_ia_personalized: Option<f64>,
    pub seconds: f64,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// Write round reports as CSV. Timing is optional so that byte-level
/// determinism checks can compare the metric columns alone.
pub fn write_round_reports(
    rows: &[RoundReport],
    include_timing: bool,
    path: &Path,
) -> Result<(), FederationError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let header = "round,strategy,hr@10,ndcg@10,mean_rec_loss,mean_err_loss,mean_lambda_c,ia_global,mean_ia_local,mean_ia_personalized";
    if include_timing {
        writeln!(out, "{header},seconds")?;
    } else {
        writeln!(out, "{header}")?;
    }
    for r in rows {
        let base = format!(
            "{},{},{},{},{:.6},{:.6},{:.6},{},{},{}",
            r.round,
            r.strategy.as_str(),
            fmt_opt(r.hr),
            fmt_opt(r.ndcg),
            r.mean_rec_loss,
            r.mean_err_loss,
            r.mean_lambda_c,
            fmt_opt(r.ia_global),
            fmt_opt(r.mean_ia_local),
            fmt_opt(r.mean_ia_personalized),
        );
        if include_timing {
            writeln!(out, "{base},{:.3}", r.seconds)?;
        } else {
            writeln!(out, "{base}")?;
        }
    }
    Ok(())
}

pub fn write_mixing_trace(rows: &[MixingTraceRow], path: &Path) -> Result<(), FederationError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        out,
        "client,round,epoch,lambda_c,trace_local,trace_global,rec_loss,err_loss"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{:.9},{:.9},{:.9},{:.9},{:.9}",
            r.client,
            r.round,
            r.epoch,
            r.lambda_c,
            r.trace_local,
            r.trace_global,
            r.rec_loss,
            r.err_loss
        )?;
    }
    Ok(())
}

/// Simulation-wide knobs not covered by the per-client hyper-parameters.
#[derive(Debug, Clone, Copy)]
pub struct SimulationConfig {
    pub dim: usize,
    pub rounds: usize,
    pub clients_per_round: Option<usize>,
    pub train_neg_ratio: usize,
    pub eval_negatives: usize,
    pub top_k: usize,
    pub seed: u64,
    pub eval_every: usize,
    pub workers: usize,
    pub init_scale: f64,
    pub net_init_scale: f64,
    pub trace_mixing: bool,
    pub compute_ia: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            dim: 32,
            rounds: 100,
            clients_per_round: None,
            train_neg_ratio: 4,
            eval_negatives: 99,
            top_k: 10,
            seed: 42,
            eval_every: 1,
            workers: 1,
            init_scale: 0.01,
            net_init_scale: 0.1,
            trace_mixing: false,
            compute_ia: true,
        }
    }
}

/// Diagnostics captured at the round with the best validation hit ratio.
#[derive(Debug, Clone)]
pub struct BestSnapshot {
    pub round: usize,
    pub val: EvalResult,
    pub test: EvalResult,
    pub ia: Option<IaReport>,
    /// per-user minimum log10 singular value of the local table
    pub min_log10_sv_local: Vec<f64>,
    /// singular values of the global table
    pub global_spectrum: Vec<f64>,
    /// per sampled user: singular values of C and Q
    pub client_spectra: Vec<(usize, Vec<f64>, Vec<f64>)>,
}

#[derive(Debug)]
pub struct TrainingOutcome {
    pub rounds: Vec<RoundReport>,
    pub best: Option<BestSnapshot>,
    pub mixing_trace: Vec<MixingTraceRow>,
    pub final_global: EmbeddingTable,
}

struct EpochStats {
    lambda_c: f64,
    trace_local: f64,
    rec_loss: f64,
    err_loss: f64,
}

/// The whole federation co-located in one process: server state plus every
/// client's private state.
pub struct Simulation {
    pub strategy: Strategy,
    pub hyper: PlgcHyper,
    pub config: SimulationConfig,
    pub global: EmbeddingTable,
    pub round: usize,
    clients: Vec<ClientState>,
    split: InteractionSplit,
    val_negatives: Vec<Vec<usize>>,
    test_negatives: Vec<Vec<usize>>,
    selection_rng: ChaCha8Rng,
    mixing_trace: Vec<MixingTraceRow>,
}

impl Simulation {
    pub fn new(
        split: InteractionSplit,
        strategy: Strategy,
        hyper: PlgcHyper,
        config: SimulationConfig,
    ) -> Result<Self, FederationError> {
        let n = split.num_users;
        let m = split.num_items;
        let seed = config.seed;
        let global = EmbeddingTable::random(m, config.dim, config.init_scale, seed);
        let mut clients = Vec::with_capacity(n);
        for user_id in 0..n {
            let base = seed
                .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                .wrapping_add(user_id as u64);
            clients.push(ClientState {
                user_id,
                p: UserVector::random(config.dim, config.init_scale, base.wrapping_add(1)),
                local: EmbeddingTable::zeros(1, 1), // replaced on first participation
                net: ErrNetwork::random(config.dim, config.net_init_scale, base.wrapping_add(2)),
                cached_trace_global: 0.0,
                participated: false,
                rng: ChaCha8Rng::seed_from_u64(base.wrapping_add(3)),
            });
        }
        // evaluation negatives are sampled once and fixed for all rounds;
        // validation and test use separate draws
        let mut eval_rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5eed));
        let mut val_negatives = Vec::with_capacity(n);
        let mut test_negatives = Vec::with_capacity(n);
        for user in 0..n {
            val_negatives.push(sample_eval_negatives(
                &split,
                user,
                config.eval_negatives,
                &mut eval_rng,
            )?);
            test_negatives.push(sample_eval_negatives(
                &split,
                user,
                config.eval_negatives,
                &mut eval_rng,
            )?);
        }
        Ok(Simulation {
            strategy,
            hyper,
            config,
            global,
            round: 0,
            clients,
            split,
            val_negatives,
            test_negatives,
            selection_rng: ChaCha8Rng::seed_from_u64(seed.wrapping_add(0xc11e)),
            mixing_trace: Vec::new(),
        })
    }

    pub fn num_users(&self) -> usize {
        self.split.num_users
    }

    pub fn split(&self) -> &InteractionSplit {
        &self.split
    }

    pub fn client(&self, user: usize) -> &ClientState {
        &self.clients[user]
    }

    /// Build the upload message for a client, exactly the wire schema.
    pub fn upload_for(&self, user: usize) -> ClientUpload {
        ClientUpload {
            user_id: user,
            table: self.clients[user].local.clone(),
            sample_count: self.split.train_count(user),
        }
    }

    /// One communication round: select, locally train in parallel, aggregate.
    pub fn run_round(&mut self) -> Result<RoundReport, FederationError> {
        let start = Instant::now();
        let round = self.round;
        let n = self.split.num_users;
        let s = self.config.clients_per_round.unwrap_or(n);
        let selected = select_clients(n, s, &mut self.selection_rng)?;

        let strategy = self.strategy;
        let hyper = self.hyper;
        let config = self.config;
        let global = &self.global;
        let split = &self.split;

        let mut selected_clients: Vec<&mut ClientState> = Vec::with_capacity(selected.len());
        {
            let mut rest: &mut [ClientState] = &mut self.clients;
            let mut offset = 0usize;
            for &id in &selected {
                let (left, right) = rest.split_at_mut(id - offset + 1);
                selected_clients.push(&mut left[id - offset]);
                rest = right;
                offset = id + 1;
            }
        }

        let trace_global = gram_trace(global);
        let results: Vec<Result<Vec<EpochStats>, FederationError>> = if config.workers > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(config.workers)
                .build()
                .expect("thread pool");
            pool.install(|| {
                selected_clients
                    .par_iter_mut()
                    .map(|client| {
                        let user = client.user_id;
                        local_training(client, global, split, strategy, &hyper, &config, round)
                            .map_err(|source| FederationError::ClientTraining { user, source })
                    })
                    .collect()
            })
        } else {
            selected_clients
                .iter_mut()
                .map(|client| {
                    let user = client.user_id;
                    local_training(client, global, split, strategy, &hyper, &config, round)
                        .map_err(|source| FederationError::ClientTraining { user, source })
                })
                .collect()
        };

        let mut all_stats: Vec<(usize, Vec<EpochStats>)> = Vec::with_capacity(selected.len());
        for (client, result) in selected_clients.iter().zip(results) {
            all_stats.push((client.user_id, result?));
        }
        drop(selected_clients);

        if self.config.trace_mixing {
            for (user, stats) in &all_stats {
                for (epoch, s) in stats.iter().enumerate() {
                    self.mixing_trace.push(MixingTraceRow {
                        client: *user,
                        round,
                        epoch,
                        lambda_c: s.lambda_c,
                        trace_local: s.trace_local,
                        trace_global,
                        rec_loss: s.rec_loss,
                        err_loss: s.err_loss,
                    });
                }
            }
        }

        // aggregation in fixed user-id order over the upload messages
        let uploads: Vec<ClientUpload> = selected
            .iter()
            .map(|&id| self.upload_for(id))
            .collect();
        let weighted: Vec<(&EmbeddingTable, usize)> = uploads
            .iter()
            .map(|u| (&u.table, u.sample_count))
            .collect();
        self.global = aggregate(&weighted)?;
        self.round += 1;

        let mut rec = 0.0;
        let mut err = 0.0;
        let mut lambda = 0.0;
        let mut count = 0usize;
        for (_, stats) in &all_stats {
            for s in stats {
                rec += s.rec_loss;
                err += s.err_loss;
                lambda += s.lambda_c;
                count += 1;
            }
        }
        let denom = count.max(1) as f64;
        Ok(RoundReport {
            round,
            strategy,
            hr: None,
            ndcg: None,
            mean_rec_loss: rec / denom,
            mean_err_loss: err / denom,
            mean_lambda_c: lambda / denom,
            ia_global: None,
            mean_ia_local: None,
            mean_ia_personalized: None,
            seconds: start.elapsed().as_secs_f64(),
        })
    }

    /// Personalized table used for prediction under the current strategy.
    pub fn personalized_table(&self, user: usize) -> Result<EmbeddingTable, FederationError> {
        let client = &self.clients[user];
        if !client.participated {
            return Ok(self.global.clone());
        }
        if self.strategy.uses_mixing() {
            let mix = mixing_coefficients(gram_trace(&client.local), gram_trace(&self.global))
                .map_err(|source| FederationError::ClientTraining { user, source })?;
            mix_tables(&client.local, &self.global, mix)
                .map_err(|source| FederationError::ClientTraining { user, source })
        } else {
            Ok(client.local.clone())
        }
    }

    fn eval_phase(&self, test_phase: bool) -> Result<EvalResult, FederationError> {
        let negs = if test_phase {
            &self.test_negatives
        } else {
            &self.val_negatives
        };
        let held = if test_phase {
            &self.split.test
        } else {
            &self.split.validation
        };
        let mut ranks = Vec::with_capacity(self.split.num_users);
        for user in 0..self.split.num_users {
            let table = self.personalized_table(user)?;
            let mut candidates = negs[user].clone();
            candidates.push(held[user]);
            let rank =
                evaluation::rank_of(&self.clients[user].p, &table, held[user], &candidates)?;
            ranks.push(rank);
        }
        Ok(evaluation::eval_result(ranks, self.config.top_k))
    }

    pub fn evaluate_validation(&self) -> Result<EvalResult, FederationError> {
        self.eval_phase(false)
    }

    pub fn evaluate_test(&self) -> Result<EvalResult, FederationError> {
        self.eval_phase(true)
    }

    /// Per-user IA rows sorted ascending by interaction count, plus IA of
    /// the global table.
    pub fn ia_report(&self) -> Result<IaReport, FederationError> {
        let ia_global = self
            .global
            .information_abundance()
            .map_err(|_| FederationError::EmptyAggregation)?;
        let mut rows = Vec::with_capacity(self.split.num_users);
        for user in 0..self.split.num_users {
            let client = &self.clients[user];
            let local = if client.participated {
                &client.local
            } else {
                &self.global
            };
            let q = self.personalized_table(user)?;
            let count = self.split.positives(user).len();
            rows.push(IaRow {
                user_id: user,
                interaction_count: count,
                log10_interactions: (count as f64).log10(),
                ia_local: local.information_abundance().unwrap_or(f64::NAN),
                ia_personalized: q.information_abundance().unwrap_or(f64::NAN),
            });
        }
        rows.sort_by(|a, b| {
            a.interaction_count
                .cmp(&b.interaction_count)
                .then(a.user_id.cmp(&b.user_id))
        });
        Ok(IaReport { ia_global, rows })
    }

    fn diagnostics_snapshot(
        &self,
        round: usize,
        val: EvalResult,
        test: EvalResult,
    ) -> Result<BestSnapshot, FederationError> {
        let ia = if self.config.compute_ia {
            Some(self.ia_report()?)
        } else {
            None
        };
        let mut min_log10 = Vec::with_capacity(self.split.num_users);
        for user in 0..self.split.num_users {
            let client = &self.clients[user];
            let table = if client.participated {
                &client.local
            } else {
                &self.global
            };
            let sv = table.singular_values();
            let min_sv = sv.last().copied().unwrap_or(0.0).max(1e-300);
            min_log10.push(min_sv.log10());
        }
        // spectra for a fixed sample of users
        let mut spec_rng = ChaCha8Rng::seed_from_u64(self.config.seed.wrapping_add(0x57ec));
        let mut ids: Vec<usize> = (0..self.split.num_users).collect();
        ids.shuffle(&mut spec_rng);
        ids.truncate(20.min(self.split.num_users));
        ids.sort_unstable();
        let mut client_spectra = Vec::with_capacity(ids.len());
        for user in ids {
            let client = &self.clients[user];
            let local = if client.participated {
                &client.local
            } else {
                &self.global
            };
            let q = self.personalized_table(user)?;
            client_spectra.push((user, local.singular_values(), q.singular_values()));
        }
        Ok(BestSnapshot {
            round,
            val,
            test,
            ia,
            min_log10_sv_local: min_log10,
            global_spectrum: self.global.singular_values(),
            client_spectra,
        })
    }

    /// Spearman correlation between interaction count and IA of the local
    /// table, over users.
    pub fn interaction_ia_correlation(report: &IaReport) -> f64 {
        let counts: Vec<f64> = report
            .rows
            .iter()
            .map(|r| r.interaction_count as f64)
            .collect();
        let ias: Vec<f64> = report.rows.iter().map(|r| r.ia_local).collect();
        spearman(&counts, &ias)
    }

    /// Full run: T rounds with periodic evaluation; the best-validation
    /// round's diagnostics are retained.
    pub fn run_training(&mut self) -> Result<TrainingOutcome, FederationError> {
        let mut rounds = Vec::new();
        let mut best: Option<BestSnapshot> = None;

        // init-only evaluation covers the degenerate T = 0 case
        if self.config.rounds == 0 {
            let val = self.evaluate_validation()?;
            let test = self.evaluate_test()?;
            let snapshot = self.diagnostics_snapshot(0, val, test)?;
            return Ok(TrainingOutcome {
                rounds,
                best: Some(snapshot),
                mixing_trace: Vec::new(),
                final_global: self.global.clone(),
            });
        }

        for _ in 0..self.config.rounds {
            let mut report = self.run_round()?;
            let completed = self.round;
            let is_eval_round =
                completed.is_multiple_of(self.config.eval_every) || completed == self.config.rounds;
            if is_eval_round {
                let val = self.evaluate_validation()?;
                let test = self.evaluate_test()?;
                report.hr = Some(val.hr);
                report.ndcg = Some(val.ndcg);
                if self.config.compute_ia {
                    let ia = self.ia_report()?;
                    report.ia_global = Some(ia.ia_global);
                    let n = ia.rows.len() as f64;
                    report.mean_ia_local =
                        Some(ia.rows.iter().map(|r| r.ia_local).sum::<f64>() / n);
                    report.mean_ia_personalized =
                        Some(ia.rows.iter().map(|r| r.ia_personalized).sum::<f64>() / n);
                }
                let is_best = best
                    .as_ref()
                    .map(|b| val.hr > b.val.hr)
                    .unwrap_or(true);
                if is_best {
                    best = Some(self.diagnostics_snapshot(completed, val, test)?);
                }
            }
            rounds.push(report);
        }
        Ok(TrainingOutcome {
            rounds,
            best,
            mixing_trace: std::mem::take(&mut self.mixing_trace),
            final_global: self.global.clone(),
        })
    }
}

/// LocalTraining from the outer loop: first-participation initialization,
/// cached global trace, E epochs of mixing + batch SGD.
fn local_training(
    client: &mut ClientState,
    global: &EmbeddingTable,
    split: &InteractionSplit,
    strategy: Strategy,
    hyper: &PlgcHyper,
    config: &SimulationConfig,
    round: usize,
) -> Result<Vec<EpochStats>, PlgcError> {
    if !client.participated || strategy == Strategy::Vanilla {
        client.local = global.clone();
        client.participated = true;
    }
    client.cached_trace_global = gram_trace(global);
    let eta = hyper.learning_rate * hyper.lr_decay.powi(round as i32);
    let beta_eff = if strategy.uses_err() { hyper.beta } else { 0.0 };
    let batch_hyper = PlgcHyper {
        beta: beta_eff,
        ..*hyper
    };
    let user = client.user_id;
    let positives = &split.train[user];
    let mut stats = Vec::with_capacity(hyper.local_epochs);

    for epoch in 0..hyper.local_epochs {
        let trace_local = gram_trace(&client.local);
        let mix = if strategy.uses_mixing() {
            mixing_coefficients(trace_local, client.cached_trace_global)?
        } else {
            MixCoefficients::pure_local()
        };
        // fresh negatives every local epoch
        let (negatives, _warned) =
            sample_train_negatives(split, user, config.train_neg_ratio, &mut client.rng);
        let mut samples: Vec<BatchSample> = Vec::with_capacity(positives.len() + negatives.len());
        for &item in positives {
            samples.push(BatchSample {
                item_id: item,
                label: 1.0,
            });
        }
        for &item in &negatives {
            samples.push(BatchSample {
                item_id: item,
                label: 0.0,
            });
        }
        samples.shuffle(&mut client.rng);

        let mut rec_sum = 0.0;
        let mut err_sum = 0.0;
        let mut batches = 0usize;
        for (batch_idx, batch) in samples.chunks(hyper.batch_size.max(1)).enumerate() {
            let grads = plgc_backward(
                &client.p,
                batch,
                &client.local,
                global,
                mix,
                &client.net,
                &batch_hyper,
            )?;
            if !grads.is_finite() {
                return Err(PlgcError::TrainingDivergence {
                    round,
                    epoch,
                    batch: batch_idx,
                });
            }
            for (pv, g) in client.p.values_mut().iter_mut().zip(&grads.d_user) {
                *pv -= eta * g;
            }
            for (&item, dc) in &grads.d_items {
                for (cv, g) in client.local.row_mut(item).iter_mut().zip(dc) {
                    *cv -= eta * g;
                }
            }
            if beta_eff > 0.0 {
                client.net.scaled_add(&grads.d_net, -eta);
            }
            rec_sum += grads.rec_loss;
            err_sum += grads.err_loss;
            batches += 1;
        }
        let denom = batches.max(1) as f64;
        stats.push(EpochStats {
            lambda_c: mix.lambda_c,
            trace_local,
            rec_loss: rec_sum / denom,
            err_loss: err_sum / denom,
        });
    }
    Ok(stats)
}
