use std::path::Path;

use rand::seq::index;

use super::config::{DatasetKind, ExperimentConfig, ModelKind};
use super::metrics::RoundRecord;
use crate::data::{dirichlet_partition, load_cifar100, load_idx, Dataset, DirichletConfig, PartitionPlan};
use crate::error::{Error, Result};
use crate::fl::{evaluate, run_round, Execution, Federation, GlobalState, RoundConfig};
use crate::nn::{init_model, ModelSpec, SgdConfig};
use crate::rng::{stream_rng, Stream};

/// First existing path among `name` and `name.gz` under `dir`.
fn find_file(dir: &Path, name: &str) -> Result<std::path::PathBuf> {
    let plain = dir.join(name);
    let gz = dir.join(format!("{name}.gz"));
    [plain.clone(), gz]
        .into_iter()
        .find(|p| p.is_file())
        .ok_or_else(|| {
            Error::io(
                plain,
                std::io::Error::new(std::io::ErrorKind::NotFound, "dataset file not found (also tried .gz)"),
            )
        })
}

/// Loads the `(train, test)` pair named by `cfg.dataset` from `cfg.data_dir`.
///
/// IDX datasets use the standard `train-*-idx?-ubyte` / `t10k-*` names;
/// CIFAR-100 uses `train.bin` / `test.bin`.
pub fn load_datasets(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset)> {
    let dir = cfg.data_dir.as_path();
    match cfg.dataset {
        DatasetKind::Mnist | DatasetKind::FashionMnist => {
            let train = load_idx(
                find_file(dir, "train-images-idx3-ubyte")?,
                find_file(dir, "train-labels-idx1-ubyte")?,
            )?;
            let test = load_idx(
                find_file(dir, "t10k-images-idx3-ubyte")?,
                find_file(dir, "t10k-labels-idx1-ubyte")?,
            )?;
            Ok((train, test))
        }
        DatasetKind::Cifar100 => load_cifar100(find_file(dir, "train.bin")?, find_file(dir, "test.bin")?),
    }
}

pub fn model_spec(kind: ModelKind, dataset: &Dataset) -> Result<ModelSpec> {
    let (h, w, c) = dataset.image_dims();
    match kind {
        ModelKind::Cnn6 => ModelSpec::cnn6(c, h, w, dataset.num_classes()),
        ModelKind::Mlp => ModelSpec::mlp(c, h, w, dataset.num_classes()),
    }
}

/// Seeded random subset of `n` training samples, kept in file order.
pub fn training_subset(train: &Dataset, n: usize, seed: u64) -> Result<Dataset> {
    if n > train.len() {
        return Err(Error::config(
            "train_subset",
            format!("{n} exceeds the {} training samples", train.len()),
        ));
    }
    let mut picked = index::sample(&mut stream_rng(seed, Stream::Subset, &[]), train.len(), n).into_vec();
    picked.sort_unstable();
    train.subset(&picked)
}

/// The client partition a run with `cfg` would use.
pub fn partition_for(cfg: &ExperimentConfig, train: &Dataset) -> Result<PartitionPlan> {
    dirichlet_partition(
        train.labels(),
        train.num_classes(),
        &DirichletConfig {
            concentration: cfg.dirichlet_mu,
            num_clients: cfg.num_clients,
            per_client_count: cfg.per_client_count,
            seed: cfg.seed,
        },
    )
}

/// Loads data from disk and runs the experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RoundRecord>> {
    let (train, test) = load_datasets(cfg)?;
    run_with_data(cfg, &train, &test, Execution::Parallel)
}

/// Runs `cfg.rounds` rounds on in-memory data, evaluating every
/// `cfg.eval_every` rounds and after the last one.
pub fn run_with_data(
    cfg: &ExperimentConfig,
    train: &Dataset,
    test: &Dataset,
    exec: Execution,
) -> Result<Vec<RoundRecord>> {
    run_with_observer(cfg, train, test, exec, |_| {})
}

/// Like [`run_with_data`], calling `on_record` as each record is produced.
pub fn run_with_observer(
    cfg: &ExperimentConfig,
    train: &Dataset,
    test: &Dataset,
    exec: Execution,
    mut on_record: impl FnMut(&RoundRecord),
) -> Result<Vec<RoundRecord>> {
    cfg.validate()?;
    if train.num_classes() != test.num_classes() || train.image_dims() != test.image_dims() {
        return Err(Error::validation("train and test sets have different shapes"));
    }
    let subset;
    let train = match cfg.train_subset {
        Some(n) => {
            subset = training_subset(train, n, cfg.seed)?;
            &subset
        }
        None => train,
    };
    let plan = partition_for(cfg, train)?;
    let spec = model_spec(cfg.model, train)?;
    let fed = Federation {
        spec: &spec,
        train,
        plan: &plan,
    };
    let round_cfg = RoundConfig {
        sgd: SgdConfig::new(cfg.learning_rate, cfg.local_epochs, cfg.batch_size)?,
        sample_rate: cfg.sample_rate,
        seed: cfg.seed,
    };
    let rule = cfg.algorithm.rule();

    let mut state = GlobalState::new(init_model(&spec, cfg.seed)?.into_params());
    let mut records = Vec::new();
    for _ in 0..cfg.rounds {
        let outcome = run_round(&state, &rule, &fed, &round_cfg, exec)?;
        state = outcome.state;
        if state.round.is_multiple_of(cfg.eval_every) || state.round == cfg.rounds {
            let (test_accuracy, test_loss) = evaluate(&state.params, &spec, test)?;
            let m = &outcome.metrics;
            let record = RoundRecord {
                round: state.round,
                algorithm: cfg.algorithm,
                seed: cfg.seed,
                test_accuracy,
                test_loss,
                global_train_loss: m.global_train_loss,
                min_weight: m.min_weight,
                max_weight: m.max_weight,
                weight_entropy: m.weight_entropy,
                mean_sq_distance: m.mean_sq_distance,
            };
            on_record(&record);
            records.push(record);
        }
    }
    Ok(records)
}
