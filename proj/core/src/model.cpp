#include "ccrgnn/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ccrgnn/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload assumes a little-endian host");

namespace ccrgnn {

int CcrGnnConfig::channel_sum() const {
    int s = 0;
    for (int c : channels) s += c;
    return s;
}

void CcrGnnConfig::validate() const {
    if (channels.empty()) throw ConfigError("config: need at least one attention layer");
    for (int c : channels)
        if (c < 1) throw ConfigError("config: channel sizes must be positive");
    if (pooling.size() != channels.size())
        throw ConfigError("config: pooling schedule length must match channels");
    for (int h : mlp_hidden)
        if (h < 1) throw ConfigError("config: mlp hidden sizes must be positive");
    if (class_count < 2) throw ConfigError("config: class_count must be >= 2");
    if (lambda < 0.0) throw ConfigError("config: lambda must be >= 0");
    if (!(c2g_step > 0.0)) throw ConfigError("config: c2g_step must be positive");
    if (!(negative_slope > 0.0 && negative_slope < 1.0))
        throw ConfigError("config: negative_slope must lie in (0,1)");
}

long long CcrGnnParams::parameter_count() const {
    long long n = 0;
    for (const auto& l : gat_layers) n += l.theta.size() + l.attn.size();
    for (const auto& l : mlp) n += l.weight.size() + l.bias.size();
    return n;
}

std::vector<double> CcrGnnParams::flatten() const {
    std::vector<double> flat;
    flat.reserve(static_cast<size_t>(parameter_count()));
    for (const auto& l : gat_layers) {
        flat.insert(flat.end(), l.theta.data().begin(), l.theta.data().end());
        flat.insert(flat.end(), l.attn.data().begin(), l.attn.data().end());
    }
    for (const auto& l : mlp) {
        flat.insert(flat.end(), l.weight.data().begin(), l.weight.data().end());
        flat.insert(flat.end(), l.bias.data().begin(), l.bias.data().end());
    }
    return flat;
}

void CcrGnnParams::assign_from_flat(const std::vector<double>& flat) {
    require(static_cast<long long>(flat.size()) == parameter_count(),
            "assign_from_flat: size mismatch");
    size_t off = 0;
    auto take = [&](Matrix& m) {
        std::copy(flat.begin() + static_cast<long>(off),
                  flat.begin() + static_cast<long>(off + static_cast<size_t>(m.size())),
                  m.data().begin());
        off += static_cast<size_t>(m.size());
    };
    for (auto& l : gat_layers) {
        take(l.theta);
        take(l.attn);
    }
    for (auto& l : mlp) {
        take(l.weight);
        take(l.bias);
    }
}

CcrGnnParams CcrGnnParams::shaped(const CcrGnnConfig& config, int input_dim) {
    config.validate();
    require(input_dim >= 1, "shaped: input_dim must be >= 1");
    CcrGnnParams p;
    int in = 1;  // node attributes are scalars
    for (size_t l = 0; l < config.channels.size(); ++l) {
        const int out = config.channels[l];
        GatLayerParams layer;
        layer.theta = Matrix::zeros(out, in);
        layer.attn = Matrix::zeros(2 * out, 1);
        layer.negative_slope = config.negative_slope;
        p.gat_layers.push_back(std::move(layer));
        in = out;
    }
    int mlp_in = config.mlp_input_dim(input_dim);
    for (int h : config.mlp_hidden) {
        p.mlp.push_back({Matrix::zeros(h, mlp_in), Matrix::zeros(h, 1)});
        mlp_in = h;
    }
    p.mlp.push_back({Matrix::zeros(config.class_count, mlp_in),
                     Matrix::zeros(config.class_count, 1)});
    return p;
}

ModelVars insert_params(Tape& tape, const CcrGnnParams& params) {
    ModelVars vars;
    for (const auto& l : params.gat_layers) {
        GatLayerVars lv = insert_layer(tape, l);
        vars.ordered.push_back(lv.theta);
        vars.ordered.push_back(lv.attn);
        vars.gat.push_back(lv);
    }
    for (const auto& l : params.mlp) {
        Var w = tape.input_ref(&l.weight);
        Var b = tape.input_ref(&l.bias);
        vars.ordered.push_back(w);
        vars.ordered.push_back(b);
        vars.mlp.emplace_back(w, b);
    }
    return vars;
}

ForwardTrace forward(Tape& tape, const ModelVars& vars, const CcrGnnConfig& config,
                     const FeatureGraph& graph) {
    config.validate();
    require(vars.gat.size() == config.channels.size(),
            "forward: layer count mismatch between params and config");
    require(vars.mlp.size() == config.mlp_hidden.size() + 1,
            "forward: MLP depth mismatch between params and config");

    ForwardTrace trace;
    Var h = tape.input(Matrix::column(graph.node_attrs));  // x^(0), d x 1
    trace.node_states.push_back(h);
    for (size_t l = 0; l < vars.gat.size(); ++l) {
        h = gat_forward(tape, vars.gat[l], graph, h);
        const Matrix& hv = tape.value(h);
        require(hv.cols() == config.channels[l],
                "forward: layer " + std::to_string(l) + " produced " + hv.shape_str() +
                    ", expected " + std::to_string(config.channels[l]) + " channels");
        trace.node_states.push_back(h);
        trace.pooled.push_back(graph_pool(tape, h, config.pooling[l]));
    }

    // Eq-7 readout: node-major flatten of every x^(l), layers in order, then
    // the pooled vectors in order.
    std::vector<Var> locals;
    for (Var s : trace.node_states) locals.push_back(tape.flatten(s));
    trace.r_local = tape.concat_rows(locals);
    std::vector<Var> globals;
    for (Var z : trace.pooled) globals.push_back(tape.flatten(z));
    trace.r_global = tape.concat_rows(globals);

    Var x = tape.concat_rows({trace.r_local, trace.r_global});
    for (size_t l = 0; l + 1 < vars.mlp.size(); ++l) {
        const auto& [w, b] = vars.mlp[l];
        x = tape.leaky_relu(tape.add(tape.matmul(w, x), b), config.negative_slope);
    }
    const auto& [w_out, b_out] = vars.mlp.back();
    Var logits = tape.add(tape.matmul(w_out, x), b_out);
    trace.log_probs = tape.log_softmax(logits);
    return trace;
}

Matrix one_hot(int label_index, int class_count) {
    require(label_index >= 0 && label_index < class_count,
            "one_hot: label " + std::to_string(label_index) + " outside [0, " +
                std::to_string(class_count) + ")");
    Matrix y(class_count, 1);
    y.at(label_index, 0) = 1.0;
    return y;
}

namespace {

void check_one_hot(const Matrix& y) {
    require(y.cols() == 1 && y.rows() >= 2, "loss: target must be an m x 1 column, m >= 2");
    int ones = 0;
    for (int i = 0; i < y.rows(); ++i) {
        const double v = y.at(i, 0);
        require(v == 0.0 || v == 1.0, "loss: target is not one-hot (entry " + std::to_string(v) + ")");
        if (v == 1.0) ++ones;
    }
    require(ones == 1, "loss: target must contain exactly one 1");
}

constexpr double kProbClamp = 1e-12;

}  // namespace

Var loss(Tape& tape, Var log_probs, const Matrix& one_hot_target, const ModelVars& vars,
         double lambda, LossKind kind) {
    check_one_hot(one_hot_target);
    const Matrix& yhat = tape.value(log_probs);
    require(yhat.cols() == 1 && yhat.rows() == one_hot_target.rows(),
            "loss: log_probs shape " + yhat.shape_str() + " does not match target " +
                one_hot_target.shape_str());

    Var y = tape.constant(one_hot_target);
    Var data;
    if (kind == LossKind::CategoricalCe) {
        data = tape.scale(tape.sum(tape.hadamard(y, log_probs)), -1.0);
    } else {
        Var p = tape.clamp(tape.exp(log_probs), kProbClamp, 1.0 - kProbClamp);
        Var pos = tape.sum(tape.hadamard(y, tape.log(p)));
        Var one_minus_y = tape.affine(y, -1.0, 1.0);
        Var neg = tape.sum(tape.hadamard(one_minus_y, tape.log(tape.affine(p, -1.0, 1.0))));
        data = tape.scale(tape.add(pos, neg), -1.0);
    }
    if (lambda == 0.0) return data;

    Var l2;
    bool first = true;
    for (Var v : vars.ordered) {
        Var sq = tape.sum_squares(v);
        l2 = first ? sq : tape.add(l2, sq);
        first = false;
    }
    return tape.add(data, tape.scale(l2, lambda));
}

Var loss(Tape& tape, Var log_probs, int label_index, const ModelVars& vars, double lambda,
         LossKind kind) {
    return loss(tape, log_probs, one_hot(label_index, tape.value(log_probs).rows()), vars, lambda,
                kind);
}

int argmax_index(const Matrix& column) {
    require(column.cols() == 1 && column.rows() >= 1, "argmax_index: need a non-empty column");
    int best = 0;
    for (int i = 1; i < column.rows(); ++i)
        if (column.at(i, 0) > column.at(best, 0)) best = i;  // ties keep the lowest index
    return best;
}

Matrix predict_log_probs(const CcrGnnParams& params, const CcrGnnConfig& config,
                         const FeatureGraph& graph) {
    Tape tape(false);
    ModelVars vars = insert_params(tape, params);
    ForwardTrace trace = forward(tape, vars, config, graph);
    return tape.value(trace.log_probs);
}

int predict(const CcrGnnParams& params, const CcrGnnConfig& config, const ProcessedRecord& record) {
    const FeatureGraph graph = build_graph(record.x, config.c2g_step);
    return argmax_index(predict_log_probs(params, config, graph));
}

// ---------------------------------------------------------------------------
// Config and checkpoint serialization
// ---------------------------------------------------------------------------

namespace {

std::string pool_name(PoolKind k) { return k == PoolKind::Mean ? "mean" : "max"; }

PoolKind pool_from_name(const std::string& s) {
    if (s == "mean") return PoolKind::Mean;
    if (s == "max") return PoolKind::Max;
    throw ConfigError("unknown pooling kind \"" + s + "\" (want mean|max)");
}

std::string loss_name(LossKind k) {
    return k == LossKind::PaperBce ? "paper-bce" : "categorical-ce";
}

LossKind loss_from_name(const std::string& s) {
    if (s == "paper-bce") return LossKind::PaperBce;
    if (s == "categorical-ce") return LossKind::CategoricalCe;
    throw ConfigError("unknown loss kind \"" + s + "\" (want paper-bce|categorical-ce)");
}

}  // namespace

std::string config_to_json(const CcrGnnConfig& config) {
    nlohmann::json j;
    j["channels"] = config.channels;
    std::vector<std::string> pools;
    for (PoolKind p : config.pooling) pools.push_back(pool_name(p));
    j["pooling"] = pools;
    j["mlp_hidden"] = config.mlp_hidden;
    j["class_count"] = config.class_count;
    j["lambda"] = config.lambda;
    j["c2g_step"] = config.c2g_step;
    j["negative_slope"] = config.negative_slope;
    j["loss"] = loss_name(config.loss_kind);
    return j.dump();
}

CcrGnnConfig config_from_json(const std::string& text) {
    CcrGnnConfig config;
    try {
        const nlohmann::json j = nlohmann::json::parse(text);
        config.channels = j.at("channels").get<std::vector<int>>();
        config.pooling.clear();
        for (const auto& p : j.at("pooling"))
            config.pooling.push_back(pool_from_name(p.get<std::string>()));
        config.mlp_hidden = j.at("mlp_hidden").get<std::vector<int>>();
        config.class_count = j.at("class_count").get<int>();
        config.lambda = j.at("lambda").get<double>();
        config.c2g_step = j.at("c2g_step").get<double>();
        config.negative_slope = j.at("negative_slope").get<double>();
        config.loss_kind = loss_from_name(j.at("loss").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config_from_json: ") + e.what());
    }
    config.validate();
    return config;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    const std::vector<double> flat = ckpt.params.flatten();
    nlohmann::json header;
    header["format"] = "ccrgnn-checkpoint-v1";
    header["config"] = nlohmann::json::parse(config_to_json(ckpt.config));
    header["input_dim"] = ckpt.input_dim;
    header["seed"] = ckpt.seed;
    header["epoch"] = ckpt.epoch;
    header["parameter_count"] = flat.size();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open file for writing: " + path);
    out << header.dump() << '\n';
    out.write(reinterpret_cast<const char*>(flat.data()),
              static_cast<std::streamsize>(flat.size() * sizeof(double)));
    if (!out) throw InputError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open checkpoint: " + path);
    std::string header_line;
    if (!std::getline(in, header_line)) throw ParseError(path + ": missing checkpoint header");

    Checkpoint ckpt;
    size_t count = 0;
    try {
        const nlohmann::json header = nlohmann::json::parse(header_line);
        if (header.at("format").get<std::string>() != "ccrgnn-checkpoint-v1")
            throw ParseError(path + ": unknown checkpoint format");
        ckpt.config = config_from_json(header.at("config").dump());
        ckpt.input_dim = header.at("input_dim").get<int>();
        ckpt.seed = header.at("seed").get<std::uint64_t>();
        ckpt.epoch = header.at("epoch").get<int>();
        count = header.at("parameter_count").get<size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": bad checkpoint header: " + e.what());
    }

    ckpt.params = CcrGnnParams::shaped(ckpt.config, ckpt.input_dim);
    if (static_cast<long long>(count) != ckpt.params.parameter_count())
        throw ParseError(path + ": parameter count does not match config shapes");
    std::vector<double> flat(count);
    in.read(reinterpret_cast<char*>(flat.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<size_t>(in.gcount()) != count * sizeof(double))
        throw ParseError(path + ": truncated parameter payload");
    ckpt.params.assign_from_flat(flat);
    return ckpt;
}

}  // namespace ccrgnn
