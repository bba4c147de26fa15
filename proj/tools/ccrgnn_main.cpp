// ccrgnn — corporate credit rating pipeline over per-record feature graphs.
//
// Subcommands: synth, preprocess, train, eval, predict, graph-dump, bench,
// dump-config. A TOML-style config file (--config) provides defaults; command
// line flags override it; CCRGNN_SEED overrides seeds from the environment.
// Exit codes: 0 success, 1 internal error, 2 usage or input error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ccrgnn/c2g.hpp"
#include "ccrgnn/data.hpp"
#include "ccrgnn/errors.hpp"
#include "ccrgnn/eval.hpp"
#include "ccrgnn/model.hpp"
#include "ccrgnn/train.hpp"

namespace {

using namespace ccrgnn;

struct SynthOptions {
    int n = 900;
    int d = 39;
    int m = 9;
    double separation = 1.0;
    double noise = 0.05;
    std::vector<double> imbalance;  // empty = uniform
    std::uint64_t seed = 0;
    std::string out = "data.csv";
    std::string schema_out;
};

struct PreprocessOptions {
    std::string in;
    std::string out = "processed.csv";
    std::string schema_out = "schema.json";
    double drop_fraction = 0.5;
};

struct ModelOptions {
    std::vector<int> channels{8, 64, 9};
    std::vector<std::string> pooling{"mean", "mean", "max"};
    std::vector<int> mlp_hidden{128};
    int class_count = 9;
    double c2g_step = 0.01;
    double negative_slope = 0.2;
    std::string loss = "paper-bce";
};

struct TrainOptions {
    std::string data;
    std::string out = "model.ckpt";
    std::string history = "history.csv";
    ModelOptions model;
    TrainConfig train;
    bool smote_flag = false;
    int smote_k = 5;
    std::string init = "xavier";
    bool quiet = false;
};

struct BenchOptions {
    std::string data;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
    int epochs = 60;
    int batch_size = 32;
    int threads = 1;
    int smote_k = 5;
    int baseline_epochs = 200;
    int mlp_hidden_units = 1000;
    ModelOptions model;
    std::string out;   // table file, empty = stdout only
    std::string json;  // metrics json file
    bool quiet = false;
};

CcrGnnConfig to_model_config(const ModelOptions& opt, double lambda) {
    CcrGnnConfig config;
    config.channels = opt.channels;
    config.pooling.clear();
    for (const auto& p : opt.pooling) {
        if (p == "mean") config.pooling.push_back(PoolKind::Mean);
        else if (p == "max") config.pooling.push_back(PoolKind::Max);
        else throw ConfigError("unknown pooling \"" + p + "\" (want mean|max)");
    }
    config.mlp_hidden = opt.mlp_hidden;
    config.class_count = opt.class_count;
    config.lambda = lambda;
    config.c2g_step = opt.c2g_step;
    config.negative_slope = opt.negative_slope;
    if (opt.loss == "paper-bce") config.loss_kind = LossKind::PaperBce;
    else if (opt.loss == "categorical-ce") config.loss_kind = LossKind::CategoricalCe;
    else throw ConfigError("unknown loss \"" + opt.loss + "\" (want paper-bce|categorical-ce)");
    config.validate();
    return config;
}

void add_model_options(CLI::App* cmd, ModelOptions& opt) {
    cmd->add_option("--channels", opt.channels, "Attention channels per layer")
        ->delimiter(',');
    cmd->add_option("--pooling", opt.pooling, "Pooling per layer (mean|max)")->delimiter(',');
    cmd->add_option("--mlp-hidden", opt.mlp_hidden, "Classifier hidden sizes")->delimiter(',');
    cmd->add_option("--classes", opt.class_count, "Number of rating classes");
    cmd->add_option("--step", opt.c2g_step, "Graph-building threshold decrement");
    cmd->add_option("--negative-slope", opt.negative_slope, "LeakyReLU negative slope");
    cmd->add_option("--loss", opt.loss, "Loss kind (paper-bce|categorical-ce)");
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open file for writing: " + path);
    out << content;
}

FeatureSchema synthetic_schema(const std::vector<ProcessedRecord>& data) {
    FeatureSchema schema;
    if (data.empty()) return schema;
    const size_t d = data.front().x.size();
    for (size_t f = 0; f < d; ++f) {
        NumericStat stat;
        stat.name = "f" + std::to_string(f);
        stat.min = 1e300;
        stat.max = -1e300;
        double sum = 0.0;
        for (const auto& rec : data) {
            stat.min = std::min(stat.min, rec.x[f]);
            stat.max = std::max(stat.max, rec.x[f]);
            sum += rec.x[f];
        }
        stat.mean = sum / static_cast<double>(data.size());
        schema.numeric.push_back(std::move(stat));
    }
    return schema;
}

int run_synth(const SynthOptions& opt) {
    std::vector<double> imbalance = opt.imbalance;
    if (imbalance.empty())
        imbalance.assign(static_cast<size_t>(opt.m), 1.0 / static_cast<double>(opt.m));
    const auto data =
        generate_synthetic(opt.n, opt.d, opt.m, opt.separation, imbalance, opt.seed, opt.noise);
    write_processed_csv(opt.out, data);
    if (!opt.schema_out.empty()) save_schema(opt.schema_out, synthetic_schema(data));
    std::cout << "wrote " << data.size() << " records to " << opt.out << "\n";
    return 0;
}

int run_preprocess(const PreprocessOptions& opt) {
    const auto raw = load_csv(opt.in);
    const FeatureSchema schema = fit_schema(raw, opt.drop_fraction);
    const auto processed = preprocess_all(raw, schema);
    write_processed_csv(opt.out, processed);
    save_schema(opt.schema_out, schema);
    std::cout << "wrote " << processed.size() << " records (d=" << schema.dimension() << ") to "
              << opt.out << ", schema to " << opt.schema_out << "\n";
    return 0;
}

int run_train(const TrainOptions& opt) {
    auto data = load_processed_csv(opt.data);
    if (data.empty()) throw InputError(opt.data + ": no records");
    if (opt.smote_flag) data = smote(data, opt.smote_k, opt.train.seed);

    TrainConfig tc = opt.train;
    tc.init = opt.init == "fixed-std" ? InitKind::FixedStdUniform : InitKind::XavierUniform;
    if (opt.init != "xavier" && opt.init != "fixed-std")
        throw ConfigError("unknown init \"" + opt.init + "\" (want xavier|fixed-std)");
    const CcrGnnConfig model_config = to_model_config(opt.model, tc.l2_penalty);

    auto progress = [&](const EpochStats& e) {
        if (opt.quiet) return;
        if (e.epoch % 10 == 0 || e.epoch + 1 == tc.epochs)
            std::fprintf(stderr, "epoch %4d  lr %.6f  loss %.6f  acc %.4f\n", e.epoch, e.lr,
                         e.loss, e.train_accuracy);
    };
    const TrainResult result = fit(data, tc, model_config, progress);

    const Checkpoint ckpt{model_config, result.params,
                          static_cast<int>(data.front().x.size()), tc.seed, tc.epochs};
    save_checkpoint(opt.out, ckpt);
    write_history_csv(opt.history, result.history);
    std::cout << "final loss " << result.history.back().loss << ", train accuracy "
              << result.history.back().train_accuracy << "\ncheckpoint: " << opt.out
              << "\nhistory: " << opt.history << "\n";
    return 0;
}

int run_eval(const std::string& checkpoint_path, const std::string& data_path,
             const std::string& json_path) {
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);
    const auto data = load_processed_csv(data_path);
    if (data.empty()) throw InputError(data_path + ": no records");
    const MetricsReport report = evaluate(ckpt.params, ckpt.config, data);
    std::cout << metrics_table({{"CCR-GNN", report}});
    if (!json_path.empty()) write_text_file(json_path, metrics_to_json(report));
    return 0;
}

int run_predict(const std::string& checkpoint_path, const std::string& data_path,
                const std::string& out_path) {
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);
    const auto data = load_processed_csv(data_path);
    if (data.empty()) throw InputError(data_path + ": no records");

    std::ofstream out(out_path);
    if (!out) throw InputError("cannot open file for writing: " + out_path);
    const int m = ckpt.config.class_count;
    out << "row,label";
    for (int c = 0; c < m; ++c) out << ",p" << c;
    out << "\n";
    char buf[32];
    for (size_t i = 0; i < data.size(); ++i) {
        const FeatureGraph graph = build_graph(data[i].x, ckpt.config.c2g_step);
        const Matrix yhat = predict_log_probs(ckpt.params, ckpt.config, graph);
        out << i << ',' << argmax_index(yhat);
        for (int c = 0; c < m; ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", std::exp(yhat.at(c, 0)));
            out << ',' << buf;
        }
        out << "\n";
    }
    std::cout << "wrote predictions for " << data.size() << " rows to " << out_path << "\n";
    return 0;
}

int run_graph_dump(const std::string& data_path, int row, const std::string& checkpoint_path,
                   double step, const std::string& format, const std::string& out_path) {
    double effective_step = step;
    if (!checkpoint_path.empty())
        effective_step = load_checkpoint(checkpoint_path).config.c2g_step;
    const auto data = load_processed_csv(data_path);
    if (row < 0 || static_cast<size_t>(row) >= data.size())
        throw InputError("row " + std::to_string(row) + " outside dataset of " +
                         std::to_string(data.size()) + " records");
    const FeatureGraph graph = build_graph(data[static_cast<size_t>(row)].x, effective_step);
    const std::string text = format == "dot" ? graph_to_dot(graph) : graph_to_json(graph);
    if (out_path.empty() || out_path == "-") std::cout << text;
    else write_text_file(out_path, text);
    return 0;
}

int run_bench(const BenchOptions& opt) {
    const auto data = load_processed_csv(opt.data);
    if (data.empty()) throw InputError(opt.data + ": no records");

    auto [train_set, test_set] = stratified_split(data, opt.test_fraction, opt.seed);
    train_set = smote(train_set, opt.smote_k, opt.seed);
    if (!opt.quiet)
        std::fprintf(stderr, "train %zu (after SMOTE), test %zu\n", train_set.size(),
                     test_set.size());

    TrainConfig tc;
    tc.epochs = opt.epochs;
    tc.batch_size = opt.batch_size;
    tc.seed = opt.seed;
    tc.threads = opt.threads;
    const CcrGnnConfig model_config = to_model_config(opt.model, tc.l2_penalty);

    auto progress = [&](const EpochStats& e) {
        if (!opt.quiet && e.epoch % 5 == 0)
            std::fprintf(stderr, "ccr-gnn epoch %4d  loss %.6f  acc %.4f\n", e.epoch, e.loss,
                         e.train_accuracy);
    };
    const TrainResult gnn = fit(train_set, tc, model_config, progress);
    const MetricsReport gnn_report = evaluate(gnn.params, model_config, test_set);

    BaselineConfig bc;
    bc.epochs = opt.baseline_epochs;
    bc.seed = opt.seed;
    const MetricsReport lr_report =
        baseline_logreg(train_set, test_set, model_config.class_count, bc).metrics;
    BaselineConfig mc = bc;
    mc.hidden = opt.mlp_hidden_units;
    const MetricsReport mlp_report =
        baseline_mlp(train_set, test_set, model_config.class_count, mc).metrics;

    const std::string table = metrics_table(
        {{"LR", lr_report}, {"MLP", mlp_report}, {"CCR-GNN", gnn_report}});
    std::cout << table;
    if (!opt.out.empty()) write_text_file(opt.out, table);
    if (!opt.json.empty()) {
        std::string js = "{\n\"LR\": " + metrics_to_json(lr_report) +
                         ",\n\"MLP\": " + metrics_to_json(mlp_report) +
                         ",\n\"CCR-GNN\": " + metrics_to_json(gnn_report) + "}\n";
        write_text_file(opt.json, js);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Corporate credit rating over per-record feature-interaction graphs"};
    app.set_config("--config", "", "TOML-style config file; flags override its values");
    app.require_subcommand(0, 1);

    SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic rating dataset");
    synth_cmd->add_option("--n", synth.n, "Number of records");
    synth_cmd->add_option("--d", synth.d, "Feature dimension");
    synth_cmd->add_option("--m", synth.m, "Number of classes");
    synth_cmd->add_option("--separation", synth.separation, "Prototype spread in [0,1]");
    synth_cmd->add_option("--noise", synth.noise, "Gaussian noise sigma");
    synth_cmd->add_option("--imbalance", synth.imbalance, "Class weights, must sum to 1")
        ->delimiter(',');
    synth_cmd->add_option("--seed", synth.seed, "RNG seed")->envname("CCRGNN_SEED");
    synth_cmd->add_option("--out", synth.out, "Output CSV path");
    synth_cmd->add_option("--schema-out", synth.schema_out, "Optional schema JSON path");

    PreprocessOptions pre;
    auto* pre_cmd = app.add_subcommand("preprocess", "Clean and encode a raw CSV");
    pre_cmd->add_option("--in", pre.in, "Raw CSV with a rating column")->required();
    pre_cmd->add_option("--out", pre.out, "Processed CSV path");
    pre_cmd->add_option("--schema-out", pre.schema_out, "Schema JSON path");
    pre_cmd->add_option("--drop-fraction", pre.drop_fraction,
                        "Drop features missing in more than this fraction of rows");

    TrainOptions tr;
    auto* train_cmd = app.add_subcommand("train", "Train the rating model");
    train_cmd->add_option("--data", tr.data, "Processed training CSV")->required();
    train_cmd->add_option("--out", tr.out, "Checkpoint path");
    train_cmd->add_option("--history", tr.history, "History CSV path");
    train_cmd->add_option("--epochs", tr.train.epochs, "Training epochs");
    train_cmd->add_option("--batch-size", tr.train.batch_size, "Batch size");
    train_cmd->add_option("--lr", tr.train.initial_lr, "Initial learning rate");
    train_cmd->add_option("--lr-decay", tr.train.lr_decay, "Learning-rate decrement");
    train_cmd->add_option("--decay-interval", tr.train.decay_interval,
                          "Epochs between decays");
    train_cmd->add_option("--lr-floor", tr.train.lr_floor, "Minimum learning rate");
    train_cmd->add_flag("--multiplicative-decay", tr.train.multiplicative_decay,
                        "Multiply by --decay-factor instead of subtracting");
    train_cmd->add_option("--decay-factor", tr.train.decay_factor,
                          "Multiplicative decay factor");
    train_cmd->add_option("--l2", tr.train.l2_penalty, "L2 regularization weight");
    train_cmd->add_option("--seed", tr.train.seed, "RNG seed")->envname("CCRGNN_SEED");
    train_cmd->add_option("--init", tr.init, "Initialization (xavier|fixed-std)");
    train_cmd->add_option("--init-scale", tr.train.init_scale,
                          "Target std for fixed-std init");
    train_cmd->add_option("--threads", tr.train.threads,
                          "Gradient workers per batch (0 = all cores)");
    train_cmd->add_flag("--smote", tr.smote_flag, "Oversample the training set with SMOTE");
    train_cmd->add_option("--smote-k", tr.smote_k, "SMOTE neighbour count");
    train_cmd->add_flag("--quiet", tr.quiet, "Suppress progress output");
    add_model_options(train_cmd, tr.model);

    std::string eval_ckpt, eval_data, eval_json;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    eval_cmd->add_option("--checkpoint", eval_ckpt, "Model checkpoint")->required();
    eval_cmd->add_option("--data", eval_data, "Processed CSV")->required();
    eval_cmd->add_option("--json", eval_json, "Write the metrics report here");

    std::string pred_ckpt, pred_data, pred_out = "predictions.csv";
    auto* pred_cmd = app.add_subcommand("predict", "Per-row labels and class probabilities");
    pred_cmd->add_option("--checkpoint", pred_ckpt, "Model checkpoint")->required();
    pred_cmd->add_option("--data", pred_data, "Processed CSV")->required();
    pred_cmd->add_option("--out", pred_out, "Predictions CSV path");

    std::string gd_data, gd_ckpt, gd_format = "dot", gd_out;
    int gd_row = 0;
    double gd_step = 0.01;
    auto* gd_cmd = app.add_subcommand("graph-dump", "Emit one record's feature graph");
    gd_cmd->add_option("--data", gd_data, "Processed CSV")->required();
    gd_cmd->add_option("--row", gd_row, "Record index");
    gd_cmd->add_option("--checkpoint", gd_ckpt, "Take the threshold step from this checkpoint");
    gd_cmd->add_option("--step", gd_step, "Threshold decrement when no checkpoint given");
    gd_cmd->add_option("--format", gd_format, "dot|json")
        ->check(CLI::IsMember({"dot", "json"}));
    gd_cmd->add_option("--out", gd_out, "Output path (default stdout)");

    BenchOptions bench;
    auto* bench_cmd =
        app.add_subcommand("bench", "Split, SMOTE, then compare CCR-GNN with LR and MLP");
    bench_cmd->add_option("--data", bench.data, "Processed CSV")->required();
    bench_cmd->add_option("--test-fraction", bench.test_fraction, "Held-out fraction");
    bench_cmd->add_option("--seed", bench.seed, "RNG seed")->envname("CCRGNN_SEED");
    bench_cmd->add_option("--epochs", bench.epochs, "CCR-GNN training epochs");
    bench_cmd->add_option("--batch-size", bench.batch_size, "Batch size");
    bench_cmd->add_option("--threads", bench.threads, "Gradient workers (0 = all cores)");
    bench_cmd->add_option("--smote-k", bench.smote_k, "SMOTE neighbour count");
    bench_cmd->add_option("--baseline-epochs", bench.baseline_epochs, "Baseline epochs");
    bench_cmd->add_option("--mlp-hidden-units", bench.mlp_hidden_units,
                          "Hidden units of the MLP baseline");
    bench_cmd->add_option("--out", bench.out, "Write the comparison table here");
    bench_cmd->add_option("--json", bench.json, "Write all three reports here");
    bench_cmd->add_flag("--quiet", bench.quiet, "Suppress progress output");
    add_model_options(bench_cmd, bench.model);

    auto* dump_cmd = app.add_subcommand("dump-config", "Print the effective configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (synth_cmd->parsed()) return run_synth(synth);
        if (pre_cmd->parsed()) return run_preprocess(pre);
        if (train_cmd->parsed()) return run_train(tr);
        if (eval_cmd->parsed()) return run_eval(eval_ckpt, eval_data, eval_json);
        if (pred_cmd->parsed()) return run_predict(pred_ckpt, pred_data, pred_out);
        if (gd_cmd->parsed())
            return run_graph_dump(gd_data, gd_row, gd_ckpt, gd_step, gd_format, gd_out);
        if (bench_cmd->parsed()) return run_bench(bench);
        if (dump_cmd->parsed()) {
            std::cout << app.config_to_str(true, false);
            return 0;
        }
        std::cout << app.help();
        return 0;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
