use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::args::*;
use super::dataset::{read_features, Dataset};
use super::report::{fmt_num, io_error, write_csv, write_json, write_matrix, Report, Timings};
use super::CliError;
use crate::gp::{metrics, pearson, rmse, FittedGp, GpModel};
use crate::kernels::{AlphaMode, GramEngine, Input, KernelSpec, TyingScheme};
use crate::opt::{fold_assignment, grid_search, optimize, GridEvaluation, GridSpec, OptTrace, OptimizeConfig};
use crate::synth::{
    run_recovery, run_sasstk_comparison, run_time_benchmark, BenchmarkConfig, GeneratingModel, PriorSampler,
    RecoveryConfig, TreePool, TreebankConfig,
};
use crate::trees::{parse_bracketed, SymbolTable};

fn out_dir(run: &RunFlags) -> Result<&Path, CliError> {
    std::fs::create_dir_all(&run.out).map_err(|e| io_error(&run.out, e))?;
    Ok(&run.out)
}

fn parse_list<T: std::str::FromStr>(text: &str, flag: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().map_err(|_| CliError::Usage(format!("--{flag}: '{s}' is not valid"))))
        .collect()
}

fn scheme_from_flags(flags: &KernelFlags, table: &SymbolTable) -> Result<TyingScheme, CliError> {
    if flags.subset_symbols.is_some() && flags.kernel != KernelKind::SasstkSubset {
        return Err(CliError::Usage("--subset-symbols requires --kernel sasstk-subset".into()));
    }
    Ok(match flags.kernel {
        KernelKind::Sstk => TyingScheme::tied(),
        KernelKind::SasstkFull => TyingScheme::full(table),
        KernelKind::SasstkSubset => {
            let text = flags
                .subset_symbols
                .as_deref()
                .ok_or_else(|| CliError::Usage("--kernel sasstk-subset needs --subset-symbols".into()))?;
            let groups: Vec<Vec<String>> = text
                .split(';')
                .map(|g| g.split(',').map(|s| s.trim().to_owned()).filter(|s| !s.is_empty()).collect::<Vec<_>>())
                .filter(|g| !g.is_empty())
                .collect();
            if groups.is_empty() {
                return Err(CliError::Usage("--subset-symbols names no symbols".into()));
            }
            TyingScheme::subset(&groups)
        }
    })
}

/// Kernel over `slots` tree slots and optional dense features of `dim`
/// columns, combined by `flags.combine` when there is more than one part.
pub fn build_spec(
    flags: &KernelFlags,
    slots: usize,
    dim: Option<usize>,
    table: &SymbolTable,
    normalize_default: bool,
) -> Result<KernelSpec, CliError> {
    let scheme = scheme_from_flags(flags, table)?;
    let alpha = match flags.alpha {
        AlphaFlag::Free => AlphaMode::Free,
        AlphaFlag::Fixed1 => AlphaMode::FixedAtOne,
    };
    let mut parts: Vec<KernelSpec> = (0..slots)
        .map(|s| {
            KernelSpec::tree(scheme.clone()).with_slot(s).normalized(flags.normalized(normalize_default)).alpha_mode(alpha)
        })
        .collect();
    if let Some(dim) = dim {
        parts.push(KernelSpec::Rbf { dim });
    }
    match parts.len() {
        0 => Err(CliError::Usage("no inputs to build a kernel over".into())),
        1 => Ok(parts.pop().expect("one part")),
        _ => Ok(match flags.combine {
            Combine::Sum => KernelSpec::Sum { children: parts },
            Combine::Product => KernelSpec::Product { children: parts },
        }),
    }
}

fn hypers_from_flags(spec: &KernelSpec, flags: &HyperFlags, lambda: f64, alpha: f64) -> Result<Vec<f64>, CliError> {
    let mut theta = spec.uniform_params(flags.lambda.unwrap_or(lambda), flags.alpha_value.unwrap_or(alpha));
    let names = spec.param_names();
    for item in &flags.hypers {
        let (name, value) =
            item.split_once('=').ok_or_else(|| CliError::Usage(format!("--hyper '{item}' is not name=value")))?;
        let i = names
            .iter()
            .position(|n| n == name.trim())
            .ok_or_else(|| CliError::Usage(format!("unknown hyperparameter '{name}'; expected one of {}", names.join(", "))))?;
        theta[i] = value.trim().parse().map_err(|_| CliError::Usage(format!("--hyper '{item}' has no numeric value")))?;
    }
    Ok(theta)
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T, CliError> + Send) -> Result<T, CliError> {
    match threads {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?
            .install(f),
    }
}

// ---------------------------------------------------------------- kernel

pub fn cmd_kernel(cmd: &KernelCmd) -> Result<(), CliError> {
    with_threads(cmd.run.threads, || {
        let out = out_dir(&cmd.run)?;
        let mut timings = Timings::default();
        let mut table = SymbolTable::new();
        let data = timings.time("load", || Dataset::load(&cmd.data, &mut table))?;
        let spec = build_spec(&cmd.kernel, data.slots.len(), data.feature_dim(), &table, true)?;
        let theta = hypers_from_flags(&spec, &cmd.hyper, 0.4, 1.0)?;
        let names = spec.param_names();
        let engine = GramEngine::uncached(&spec, data.inputs(), &table)?;
        let mut files = vec!["gram.csv".to_string()];
        timings.time("gram", || -> Result<(), CliError> {
            if cmd.grads {
                let g = engine.gram_with_grads(&theta)?;
                write_matrix(&out.join("gram.csv"), &g.k)?;
                for (name, d) in names.iter().zip(&g.dk) {
                    let file = format!("gram_grad_{name}.csv");
                    write_matrix(&out.join(&file), d)?;
                    files.push(file);
                }
            } else {
                write_matrix(&out.join("gram.csv"), &engine.gram(&theta)?)?;
            }
            Ok(())
        })?;
        let results = json!({
            "rows": data.rows,
            "kernel": spec,
            "hyperparameters": named(&names, &theta),
            "files": files,
        });
        let report = Report::new("kernel", cmd, cmd.run.seed)?.finish(json!(null), results, timings)?;
        write_json(&out.join("kernel.json"), &report)
    })
}

fn named(names: &[String], values: &[f64]) -> serde_json::Map<String, serde_json::Value> {
    names.iter().zip(values).map(|(n, v)| (n.clone(), json!(v))).collect()
}

// ---------------------------------------------------------------- selection

struct Selection {
    theta: Vec<f64>,
    noise: f64,
    fitted: FittedGp,
    method: &'static str,
    trace: Option<OptTrace>,
    grid: Option<(Vec<GridEvaluation>, usize)>,
}

fn parse_grid(text: &str, spec: &KernelSpec, folds: usize) -> Result<GridSpec, CliError> {
    let grid = if text == "nlp" {
        GridSpec::nlp(spec)
    } else if let Some(size) = text.strip_prefix("performance:") {
        let size = size.parse().map_err(|_| CliError::Usage(format!("--grid '{text}' needs a numeric size")))?;
        GridSpec::performance(spec, size)
    } else {
        let path = Path::new(text);
        let body = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        let named: BTreeMap<String, Vec<f64>> = serde_json::from_str(&body)
            .map_err(|e| CliError::Format { path: text.to_owned(), line: e.line(), message: e.to_string() })?;
        GridSpec::from_named(spec, &named)?
    };
    Ok(grid.with_folds(folds))
}

fn select(model: &GpModel, flags: &SelectFlags, seed: u64) -> Result<Selection, CliError> {
    match &flags.grid {
        Some(g) => {
            let grid = parse_grid(g, model.spec(), flags.grid_folds)?;
            let out = grid_search(model, &grid, seed)?;
            Ok(Selection {
                theta: out.theta,
                noise: out.noise,
                fitted: out.fitted,
                method: "grid",
                trace: None,
                grid: Some((out.evaluations, out.chosen)),
            })
        }
        None => {
            let cfg = OptimizeConfig { restarts: flags.restarts, max_iterations: flags.max_iters, seed, ..Default::default() };
            let out = optimize(model, &cfg)?;
            Ok(Selection {
                theta: out.theta,
                noise: out.noise,
                fitted: out.fitted,
                method: "gradient",
                trace: Some(out.trace),
                grid: None,
            })
        }
    }
}

fn write_selection_log(dir: &Path, sel: &Selection, names: &[String], timings: &mut Timings) -> Result<String, CliError> {
    if let Some(trace) = &sel.trace {
        let mut header: Vec<String> = ["restart", "iteration", "lml", "grad_norm", "seconds"].map(String::from).to_vec();
        header.extend(names.iter().cloned());
        header.push("noise".into());
        let mut rows = Vec::new();
        for (r, restart) in trace.restarts.iter().enumerate() {
            timings.add("optimize_restarts", restart.iterations.last().map_or(0.0, |i| i.seconds));
            for it in &restart.iterations {
                let mut row = vec![r.to_string(), it.iteration.to_string(), fmt_num(it.lml), fmt_num(it.grad_norm), fmt_num(it.seconds)];
                row.extend(it.theta.iter().map(|v| fmt_num(*v)));
                row.push(fmt_num(it.noise));
                rows.push(row);
            }
        }
        write_csv(&dir.join("trace.csv"), &header, &rows)?;
        return Ok("trace.csv".into());
    }
    let (evals, _) = sel.grid.as_ref().expect("grid selection has evaluations");
    let mut header: Vec<String> = vec!["point".into()];
    header.extend(names.iter().cloned());
    header.extend(["noise".to_string(), "cv_rmse".to_string()]);
    let rows: Vec<Vec<String>> = evals
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mut row = vec![i.to_string()];
            row.extend(e.theta.iter().map(|v| fmt_num(*v)));
            row.push(fmt_num(e.noise));
            row.push(e.cv_rmse.map_or_else(|| "inf".into(), fmt_num));
            row
        })
        .collect();
    write_csv(&dir.join("grid.csv"), &header, &rows)?;
    Ok("grid.csv".into())
}

fn selection_summary(sel: &Selection, names: &[String]) -> serde_json::Value {
    let lml = sel.fitted.log_marginal_likelihood();
    let mut v = json!({
        "method": sel.method,
        "hyperparameters": named(names, &sel.theta),
        "noise": sel.noise,
        "lml": lml,
        "jitter": sel.fitted.jitter(),
        "target_mean": sel.fitted.target_mean(),
    });
    if let Some(trace) = &sel.trace {
        v["chosen_restart"] = json!(trace.chosen);
        v["restarts"] = json!(trace
            .restarts
            .iter()
            .map(|r| json!({"seed": r.seed, "final_lml": r.final_lml, "status": r.status, "iterations": r.iterations.len().saturating_sub(1)}))
            .collect::<Vec<_>>());
    }
    if let Some((evals, chosen)) = &sel.grid {
        v["chosen_point"] = json!(chosen);
        v["cv_rmse"] = json!(evals[*chosen].cv_rmse);
        v["grid_points"] = json!(evals.len());
    }
    v
}

// ---------------------------------------------------------------- train / predict

/// Everything needed to rebuild a trained model without the original files.
#[derive(Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: String,
    pub kernel: KernelSpec,
    pub param_names: Vec<String>,
    pub theta: Vec<f64>,
    pub noise: f64,
    pub jitter: f64,
    pub center: bool,
    pub per_word: Option<usize>,
    pub target_name: String,
    pub target_mean: f64,
    /// Training trees per row, one bracketed string per slot.
    pub trees: Vec<Vec<String>>,
    pub feature_names: Vec<String>,
    pub features: Option<Vec<Vec<f64>>>,
    /// Training targets after any per-word transform.
    pub targets: Vec<f64>,
}

const MODEL_FORMAT: &str = "treegp-model";

pub fn cmd_train(cmd: &TrainCmd) -> Result<(), CliError> {
    with_threads(cmd.run.threads, || {
        let out = out_dir(&cmd.run)?;
        let mut timings = Timings::default();
        let mut table = SymbolTable::new();
        let data = timings.time("load", || Dataset::load(&cmd.data, &mut table))?;
        let targets = data.targets()?;
        let col = targets.column_index(&cmd.target_column)?;
        let y = targets.columns[col].clone();
        let spec = build_spec(&cmd.kernel, data.slots.len(), data.feature_dim(), &table, true)?;
        let names = spec.param_names();
        let model = timings.time("compile", || GpModel::new(&spec, data.inputs(), y.clone(), &table))?;
        let model = model.with_centering(cmd.data.centered());
        let sel = timings.time("select", || select(&model, &cmd.select, cmd.run.seed))?;
        let log = write_selection_log(out, &sel, &names, &mut timings)?;

        let trees: Vec<Vec<String>> = (0..data.rows)
            .map(|r| data.slots.iter().map(|s| s[r].to_bracketed(&table)).collect::<Result<_, _>>())
            .collect::<Result<_, _>>()?;
        let file = ModelFile {
            format: MODEL_FORMAT.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            kernel: spec.clone(),
            param_names: names.clone(),
            theta: sel.theta.clone(),
            noise: sel.noise,
            jitter: sel.fitted.jitter(),
            center: cmd.data.centered(),
            per_word: cmd.data.per_word,
            target_name: targets.names[col].clone(),
            target_mean: sel.fitted.target_mean(),
            trees,
            feature_names: data.feature_names.clone(),
            features: data.features.clone(),
            targets: y.clone(),
        };
        write_json(&out.join("model.json"), &file)?;
        let fitted_train = sel.fitted.predict_view(model.engine())?;
        let mut results = selection_summary(&sel, &names);
        results["rows"] = json!(data.rows);
        results["target"] = json!(targets.names[col]);
        results["kernel"] = json!(spec);
        results["training_rmse"] = json!(rmse(&fitted_train.mean, &y)?);
        results["files"] = json!(["model.json", log]);
        let report = Report::new("train", cmd, cmd.run.seed)?.finish(sel.fitted.jitter(), results, timings)?;
        write_json(&out.join("train.json"), &report)
    })
}

fn load_model(path: &Path) -> Result<(ModelFile, SymbolTable, Vec<Input>), CliError> {
    let body = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let file: ModelFile = serde_json::from_str(&body).map_err(|e| CliError::Format {
        path: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })?;
    if file.format != MODEL_FORMAT {
        return Err(CliError::Format { path: path.display().to_string(), line: 1, message: "not a model file".into() });
    }
    let mut table = SymbolTable::new();
    let inputs = file
        .trees
        .iter()
        .enumerate()
        .map(|(r, row)| {
            let trees = row.iter().map(|t| parse_bracketed(t, &mut table)).collect::<Result<Vec<_>, _>>()?;
            Ok(Input { trees, features: file.features.as_ref().map(|f| f[r].clone()) })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let inputs = if inputs.is_empty() {
        file.features.iter().flatten().map(|f| Input::dense(f.clone())).collect()
    } else {
        inputs
    };
    Ok((file, table, inputs))
}

pub fn cmd_predict(cmd: &PredictCmd) -> Result<(), CliError> {
    with_threads(cmd.run.threads, || {
        let model_path = cmd.model.as_ref().ok_or(CliError::MissingModel)?;
        let out = out_dir(&cmd.run)?;
        let mut timings = Timings::default();
        let (file, mut table, train_inputs) = timings.time("load_model", || load_model(model_path))?;
        let mut flags = cmd.data.clone();
        flags.per_word = flags.per_word.or(file.per_word);
        let data = timings.time("load", || Dataset::load(&flags, &mut table))?;
        let expected_slots = file.trees.first().map_or(0, Vec::len);
        if data.slots.len() != expected_slots || data.feature_dim().is_some() != file.features.is_some() {
            return Err(CliError::Shape(format!(
                "model expects {expected_slots} tree slot(s){}; got {} slot(s){}",
                if file.features.is_some() { " and features" } else { "" },
                data.slots.len(),
                if data.features.is_some() { " and features" } else { "" }
            )));
        }
        let model = GpModel::new(&file.kernel, train_inputs, file.targets.clone(), &table)?.with_centering(file.center);
        let fitted = timings.time("fit", || model.fit(&file.theta, file.noise))?;
        let pred = timings.time("predict", || fitted.predict(&data.inputs()))?;
        let rows: Vec<Vec<String>> =
            pred.mean.iter().zip(&pred.variance).map(|(m, v)| vec![fmt_num(*m), fmt_num(*v)]).collect();
        write_csv(&out.join("predictions.csv"), &["mean".into(), "variance".into()], &rows)?;
        let mut results = json!({
            "rows": data.rows,
            "model": model_path.display().to_string(),
            "target": file.target_name,
            "files": ["predictions.csv"],
        });
        if let Some(t) = &data.targets {
            let col = t.column_index(&file.target_name).unwrap_or(0);
            results["metrics"] = json!(metrics_or_partial(&pred.mean, &t.columns[col])?);
        }
        let report = Report::new("predict", cmd, cmd.run.seed)?.finish(fitted.jitter(), results, timings)?;
        write_json(&out.join("predict.json"), &report)
    })
}

fn metrics_or_partial(pred: &[f64], actual: &[f64]) -> Result<serde_json::Value, CliError> {
    Ok(match metrics(pred, actual) {
        Ok(m) => json!(m),
        Err(_) => json!({"rmse": rmse(pred, actual)?, "mae": crate::gp::mae(pred, actual)?, "pearson": null}),
    })
}

// ---------------------------------------------------------------- crossval

pub fn cmd_crossval(cmd: &CrossvalCmd) -> Result<(), CliError> {
    with_threads(cmd.run.threads, || {
        if cmd.folds < 2 {
            return Err(CliError::Usage("--folds must be at least 2".into()));
        }
        let out = out_dir(&cmd.run)?;
        let mut timings = Timings::default();
        let mut table = SymbolTable::new();
        let data = timings.time("load", || Dataset::load(&cmd.data, &mut table))?;
        let targets = data.targets()?.clone();
        if data.rows < cmd.folds {
            return Err(CliError::Usage(format!("{} rows cannot fill {} folds", data.rows, cmd.folds)));
        }
        let spec = build_spec(&cmd.kernel, data.slots.len(), data.feature_dim(), &table, true)?;
        let names = spec.param_names();
        let engine = timings.time("compile", || GramEngine::new(&spec, data.inputs(), &table))?;
        let folds = fold_assignment(data.rows, cmd.folds, cmd.run.seed);

        let mut fold_header: Vec<String> =
            ["column", "fold", "train_rows", "test_rows", "rmse", "mae", "baseline_rmse", "jitter"].map(String::from).to_vec();
        fold_header.extend(names.iter().cloned());
        fold_header.push("noise".into());
        let mut fold_rows = Vec::new();
        let mut pred_rows = Vec::new();
        let mut per_column = Vec::new();
        let (mut all_pred, mut all_actual, mut all_base) = (Vec::new(), Vec::new(), Vec::new());
        let mut jitters = Vec::new();

        for (c, column) in targets.columns.iter().enumerate() {
            let (mut col_pred, mut col_actual, mut col_base) = (Vec::new(), Vec::new(), Vec::new());
            for (f, held) in folds.iter().enumerate() {
                let train: Vec<usize> = (0..data.rows).filter(|r| held.binary_search(r).is_err()).collect();
                let train_y: Vec<f64> = train.iter().map(|&r| column[r]).collect();
                let actual: Vec<f64> = held.iter().map(|&r| column[r]).collect();
                let model =
                    GpModel::from_engine(engine.view(&train), train_y.clone())?.with_centering(cmd.data.centered());
                let seed = crate::synth::sub_seed(cmd.run.seed, ((c as u64) << 32) | f as u64);
                let sel = timings.time("select", || select(&model, &cmd.select, seed))?;
                let pred = timings.time("predict", || sel.fitted.predict_view(&engine.view(held)))?;
                let base_value = train_y.iter().sum::<f64>() / train_y.len() as f64;
                let base = vec![base_value; held.len()];
                jitters.push(sel.fitted.jitter());
                let mut row = vec![
                    targets.names[c].clone(),
                    f.to_string(),
                    train.len().to_string(),
                    held.len().to_string(),
                    fmt_num(rmse(&pred.mean, &actual)?),
                    fmt_num(crate::gp::mae(&pred.mean, &actual)?),
                    fmt_num(rmse(&base, &actual)?),
                    fmt_num(sel.fitted.jitter()),
                ];
                row.extend(sel.theta.iter().map(|v| fmt_num(*v)));
                row.push(fmt_num(sel.noise));
                fold_rows.push(row);
                for (i, &r) in held.iter().enumerate() {
                    pred_rows.push(vec![
                        targets.names[c].clone(),
                        r.to_string(),
                        f.to_string(),
                        fmt_num(actual[i]),
                        fmt_num(pred.mean[i]),
                        fmt_num(pred.variance[i]),
                    ]);
                }
                col_pred.extend(pred.mean);
                col_actual.extend(actual);
                col_base.extend(base);
            }
            per_column.push(json!({
                "column": targets.names[c],
                "metrics": metrics_or_partial(&col_pred, &col_actual)?,
                "baseline_rmse": rmse(&col_base, &col_actual)?,
            }));
            all_pred.extend(col_pred);
            all_actual.extend(col_actual);
            all_base.extend(col_base);
        }
        write_csv(&out.join("crossval_folds.csv"), &fold_header, &fold_rows)?;
        let pred_header = ["column", "row", "fold", "actual", "mean", "variance"].map(String::from);
        write_csv(&out.join("crossval_predictions.csv"), &pred_header, &pred_rows)?;

        let agg_rmse = rmse(&all_pred, &all_actual)?;
        let base_rmse = rmse(&all_base, &all_actual)?;
        let results = json!({
            "rows": data.rows,
            "kernel": spec,
            "folds": folds,
            "columns": per_column,
            "aggregate": {
                "rmse": agg_rmse,
                "mae": crate::gp::mae(&all_pred, &all_actual)?,
                "pearson": pearson(&all_pred, &all_actual).ok(),
                "baseline_rmse": base_rmse,
                "rmse_reduction": 1.0 - agg_rmse / base_rmse,
            },
            "files": ["crossval_folds.csv", "crossval_predictions.csv"],
        });
        let report = Report::new("crossval", cmd, cmd.run.seed)?.finish(jitters, results, timings)?;
        write_json(&out.join("crossval.json"), &report)
    })
}

// ---------------------------------------------------------------- synthetic

fn load_pool(flags: &PoolFlags, seed: u64) -> Result<TreePool, CliError> {
    match &flags.trees {
        Some(p) => Ok(TreePool::from_file(p)?),
        None => Ok(TreePool::generated(&TreebankConfig {
            size: flags.pool_size,
            seed: flags.pool_seed.unwrap_or(seed),
            max_depth: flags.max_depth,
        })?),
    }
}

fn write_pool(path: &Path, pool: &TreePool) -> Result<(), CliError> {
    let mut text = String::new();
    for t in &pool.trees {
        text.push_str(&t.to_bracketed(&pool.table)?);
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

pub fn cmd_synth(cmd: &SynthCmd) -> Result<(), CliError> {
    with_threads(cmd.run.threads, || {
        let out = out_dir(&cmd.run)?;
        let mut timings = Timings::default();
        let pool = timings.time("pool", || load_pool(&cmd.pool, cmd.run.seed))?;
        let spec = build_spec(&cmd.kernel, 1, None, &pool.table, false)?;
        let theta = hypers_from_flags(&spec, &cmd.hyper, 0.001, 1.0)?;
        if !(cmd.noise >= 0.0) {
            return Err(CliError::Usage("--noise must be non-negative".into()));
        }
        let sampler = timings.time("prior", || PriorSampler::new(&pool.inputs(), &spec, &theta, &pool.table))?;
        let y = sampler.sample(cmd.noise, cmd.run.seed);
        write_pool(&out.join("trees.txt"), &pool)?;
        let text: String = y.iter().map(|v| fmt_num(*v) + "\n").collect();
        let path = out.join("targets.txt");
        std::fs::write(&path, text).map_err(|e| io_error(&path, e))?;
        let results = json!({
            "pool": pool.label,
            "rows": pool.len(),
            "distinct_inputs": sampler.distinct_inputs(),
            "kernel": spec,
            "hyperparameters": named(&spec.param_names(), &theta),
            "noise": cmd.noise,
            "files": ["trees.txt", "targets.txt"],
        });
        let report = Report::new("synth", cmd, cmd.run.seed)?.finish(sampler.jitter(), results, timings)?;
        write_json(&out.join("synth.json"), &report)
    })
}

fn experiment_config(cmd: &ExperimentCmd, default_sizes: &[usize], generating: GeneratingModel) -> Result<RecoveryConfig, CliError> {
    Ok(RecoveryConfig {
        test_size: cmd.test_size,
        sizes: match &cmd.sizes {
            Some(s) => parse_list(s, "sizes")?,
            None => default_sizes.to_vec(),
        },
        repetitions: cmd.repetitions,
        restarts: cmd.restarts,
        max_iterations: cmd.max_iters,
        seed: cmd.run.seed,
        generating,
    })
}

pub fn cmd_recover(cmd: &ExperimentCmd) -> Result<(), CliError> {
    with_threads(cmd.run.threads, || {
        let out = out_dir(&cmd.run)?;
        let mut timings = Timings::default();
        let pool = timings.time("pool", || load_pool(&cmd.pool, cmd.run.seed))?;
        let cfg = experiment_config(cmd, &[50, 200, 400], GeneratingModel::sstk())?;
        let report = timings.time("experiment", || run_recovery(&pool, &cfg))?;
        let mut header: Vec<String> = vec!["size".into(), "repetition".into()];
        header.extend(report.param_names.iter().cloned());
        header.extend(["lml", "test_rmse", "test_target_std"].map(String::from));
        let rows: Vec<Vec<String>> = report
            .records
            .iter()
            .map(|r| {
                let mut row = vec![r.size.to_string(), r.repetition.to_string()];
                row.extend(r.theta.iter().map(|v| fmt_num(*v)));
                row.extend([fmt_num(r.noise), fmt_num(r.lml), fmt_num(r.test_rmse), fmt_num(r.test_target_std)]);
                row
            })
            .collect();
        write_csv(&out.join("recovery.csv"), &header, &rows)?;
        let results = json!({
            "pool": report.pool,
            "generating": cfg.generating,
            "summaries": report.summaries,
            "files": ["recovery.csv"],
        });
        let full = Report::new("recover", cmd, cmd.run.seed)?.finish(report.prior_jitter, results, timings)?;
        write_json(&out.join("recovery.json"), &full)
    })
}

pub fn cmd_compare(cmd: &ExperimentCmd) -> Result<(), CliError> {
    with_threads(cmd.run.threads, || {
        let out = out_dir(&cmd.run)?;
        let mut timings = Timings::default();
        let pool = timings.time("pool", || load_pool(&cmd.pool, cmd.run.seed))?;
        let cfg = experiment_config(cmd, &[50, 100, 200], GeneratingModel::sasstk_s())?;
        let report = timings.time("experiment", || run_sasstk_comparison(&pool, &cfg))?;
        let mut header: Vec<String> = ["size", "repetition", "sstk_rmse", "sasstk_rmse"].map(String::from).to_vec();
        header.extend(report.sstk_param_names.iter().map(|n| format!("sstk.{n}")));
        header.extend(["sstk.noise".to_string(), "sstk.lml".to_string()]);
        header.extend(report.sasstk_param_names.iter().map(|n| format!("sasstk.{n}")));
        header.extend(["sasstk.noise".to_string(), "sasstk.lml".to_string()]);
        let rows: Vec<Vec<String>> = report
            .records
            .iter()
            .map(|r| {
                let mut row = vec![r.size.to_string(), r.repetition.to_string(), fmt_num(r.sstk_rmse), fmt_num(r.sasstk_rmse)];
                row.extend(r.sstk_theta.iter().map(|v| fmt_num(*v)));
                row.extend([fmt_num(r.sstk_noise), fmt_num(r.sstk_lml)]);
                row.extend(r.sasstk_theta.iter().map(|v| fmt_num(*v)));
                row.extend([fmt_num(r.sasstk_noise), fmt_num(r.sasstk_lml)]);
                row
            })
            .collect();
        write_csv(&out.join("comparison.csv"), &header, &rows)?;
        let results = json!({
            "pool": report.pool,
            "generating": cfg.generating,
            "summaries": report.summaries,
            "files": ["comparison.csv"],
        });
        let full = Report::new("compare", cmd, cmd.run.seed)?.finish(report.prior_jitter, results, timings)?;
        write_json(&out.join("comparison.json"), &full)
    })
}

pub fn cmd_benchmark(cmd: &BenchmarkCmd) -> Result<(), CliError> {
    let out = out_dir(&cmd.run)?;
    let mut timings = Timings::default();
    let pool = timings.time("pool", || load_pool(&cmd.pool, cmd.run.seed))?;
    let cfg = BenchmarkConfig {
        train_size: cmd.train_size,
        test_size: cmd.test_size,
        runs: cmd.runs,
        budgets: parse_list(&cmd.budgets, "budgets")?,
        granularities: parse_list(&cmd.granularities, "granularities")?,
        restarts: cmd.restarts,
        seed: cmd.run.seed,
        generating: GeneratingModel::sstk(),
    };
    let report = timings.time("experiment", || run_time_benchmark(&pool, &cfg))?;
    let header = ["run", "method", "setting", "seconds", "test_rmse", "best_so_far_rmse"].map(String::from);
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.run.to_string(),
                r.method.clone(),
                r.setting.to_string(),
                fmt_num(r.seconds),
                fmt_num(r.test_rmse),
                fmt_num(r.best_so_far_rmse),
            ]
        })
        .collect();
    write_csv(&out.join("benchmark.csv"), &header, &rows)?;
    let v = &report.verdict;
    let results = json!({
        "pool": report.pool,
        "threads": 1,
        "summaries": report.summaries.iter().map(|s| json!({
            "method": s.method, "setting": s.setting, "mean_rmse": s.mean_rmse, "std_rmse": s.std_rmse,
        })).collect::<Vec<_>>(),
        "verdict": {
            "target_std": v.target_std,
            "finest_grid_rmse": v.finest_grid_rmse,
            "gradient_final_rmse": v.gradient_final_rmse,
            "rmse_threshold": v.rmse_threshold,
            "budget_to_reach": v.budget_to_reach,
            "rmse_ok": v.rmse_ok,
        },
        "files": ["benchmark.csv"],
    });
    for s in &report.summaries {
        timings.add(&format!("{}.{}.mean_seconds", s.method, s.setting), s.mean_seconds);
    }
    timings.add("verdict.finest_grid_seconds", v.finest_grid_seconds);
    if let Some(s) = v.seconds_to_reach {
        timings.add("verdict.seconds_to_reach", s);
    }
    timings.add("verdict.time_ok", if v.time_ok { 1.0 } else { 0.0 });
    let full = Report::new("benchmark", cmd, cmd.run.seed)?.finish(json!(null), results, timings)?;
    write_json(&out.join("benchmark.json"), &full)
}

/// Feature CSV reader re-exported for callers assembling datasets by hand.
pub fn load_features(path: &PathBuf) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    read_features(path)
}
