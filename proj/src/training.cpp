#include "tbgcn/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "tbgcn/metrics.hpp"

namespace tbgcn {

void ExperimentConfig::validate() const {
    if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("config: gamma must be in [0,1]");
    const double fsum = fractions.train + fractions.val + fractions.test;
    if (std::abs(fsum - 1.0) > 1e-9) throw std::invalid_argument("config: fractions must sum to 1");
    if (fractions.train <= 0.0 || fractions.val < 0.0 || fractions.test < 0.0) {
        throw std::invalid_argument("config: invalid split fractions");
    }
    if (hidden_base <= 0 || hidden_fiber <= 0 || num_layers <= 0) {
        throw std::invalid_argument("config: dimensions must be positive");
    }
    if (lr <= 0.0 || r <= 0.0 || t <= 0.0) {
        throw std::invalid_argument("config: lr, r, t must be positive");
    }
    if (max_epochs < 0 || patience < 0) throw std::invalid_argument("config: negative epoch counts");
    if (dropconnect_p < 0.0 || dropconnect_p >= 1.0) {
        throw std::invalid_argument("config: dropconnect_p must be in [0,1)");
    }
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Uniform non-edges of g, disjoint from `taken`, by rejection sampling.
std::vector<Edge> sample_non_edges(const Graph& g, int k, std::mt19937_64& rng,
                                   std::set<Edge>& taken) {
    const long long n = g.num_nodes();
    const long long all_pairs = n * (n - 1) / 2;
    const long long available = all_pairs - g.num_edges() - static_cast<long long>(taken.size());
    if (available < k) {
        throw data_error("negative sampling: not enough non-edges (" +
                         std::to_string(available) + " available, " + std::to_string(k) +
                         " requested)");
    }
    std::uniform_int_distribution<int> pick(0, g.num_nodes() - 1);
    std::vector<Edge> out;
    out.reserve(k);
    while (static_cast<int>(out.size()) < k) {
        int u = pick(rng), v = pick(rng);
        if (u == v) continue;
        if (u > v) std::swap(u, v);
        const Edge e{u, v};
        if (g.has_edge(u, v) || taken.count(e)) continue;
        taken.insert(e);
        out.push_back(e);
    }
    return out;
}

}  // namespace

SplitPlan split_lp(const Graph& g, const SplitFractions& fractions, std::uint64_t seed) {
    const int m = g.num_edges();
    const int n_val = static_cast<int>(std::lround(fractions.val * m));
    const int n_test = static_cast<int>(std::lround(fractions.test * m));
    const int n_train = m - n_val - n_test;
    if (n_train < 1 || n_val < 1 || n_test < 1) {
        throw data_error("split_lp: graph too small for requested fractions (" +
                         std::to_string(m) + " edges)");
    }
    std::mt19937_64 rng(seed);
    std::vector<Edge> edges = g.edges();
    std::shuffle(edges.begin(), edges.end(), rng);

    SplitPlan plan;
    plan.task = Task::lp;
    plan.fractions = fractions;
    plan.split_seed = seed;
    plan.train_pos.assign(edges.begin(), edges.begin() + n_train);
    plan.val_pos.assign(edges.begin() + n_train, edges.begin() + n_train + n_val);
    plan.test_pos.assign(edges.begin() + n_train + n_val, edges.end());
    std::set<Edge> taken;
    plan.val_neg = sample_non_edges(g, n_val, rng, taken);
    plan.test_neg = sample_non_edges(g, n_test, rng, taken);
    return plan;
}

SplitPlan split_nc(const Graph& g, const SplitFractions& fractions, std::uint64_t seed) {
    if (!g.has_labels()) throw data_error("split_nc: graph has no labels");
    const int n = g.num_nodes();
    const int n_val = static_cast<int>(std::lround(fractions.val * n));
    const int n_test = static_cast<int>(std::lround(fractions.test * n));
    const int n_train = n - n_val - n_test;
    if (n_train < 1 || n_val < 1 || n_test < 1) {
        throw data_error("split_nc: graph too small for requested fractions");
    }
    std::mt19937_64 rng(seed);
    std::vector<int> nodes(n);
    std::iota(nodes.begin(), nodes.end(), 0);
    std::shuffle(nodes.begin(), nodes.end(), rng);

    SplitPlan plan;
    plan.task = Task::nc;
    plan.fractions = fractions;
    plan.split_seed = seed;
    plan.train_nodes.assign(nodes.begin(), nodes.begin() + n_train);
    plan.val_nodes.assign(nodes.begin() + n_train, nodes.begin() + n_train + n_val);
    plan.test_nodes.assign(nodes.begin() + n_train + n_val, nodes.end());
    return plan;
}

std::vector<Edge> sample_train_negatives(const Graph& g, int k, std::uint64_t epoch_seed) {
    if (k < 1) throw std::invalid_argument("sample_train_negatives: k must be >= 1");
    std::mt19937_64 rng(epoch_seed);
    std::set<Edge> taken;
    return sample_non_edges(g, k, rng, taken);
}

TensorPtr loss_lp(Tape& tape, const TensorPtr& p_pos, const TensorPtr& p_neg) {
    constexpr double kClamp = 1e-12;
    TensorPtr lp = tape.mean_all(tape.log(tape.clamp(p_pos, kClamp, 1.0 - kClamp)));
    TensorPtr q = tape.affine(p_neg, -1.0, 1.0);  // 1 - P
    TensorPtr ln = tape.mean_all(tape.log(tape.clamp(q, kClamp, 1.0 - kClamp)));
    return tape.affine(tape.elem_add(lp, ln), -1.0, 0.0);
}

TensorPtr loss_nc(Tape& tape, const TensorPtr& log_probs, const std::vector<int>& labels,
                  const std::vector<int>& train_nodes) {
    if (train_nodes.empty()) throw std::invalid_argument("loss_nc: empty training node set");
    const int c = log_probs->cols;
    for (int i : train_nodes) {
        if (i < 0 || i >= log_probs->rows) throw data_error("loss_nc: node id out of range");
        if (labels[i] < 0 || labels[i] >= c) {
            throw data_error("loss_nc: label " + std::to_string(labels[i]) +
                             " out of range for " + std::to_string(c) + " classes");
        }
    }
    TensorPtr rows = tape.gather_rows(log_probs, train_nodes);
    auto mask = make_tensor(static_cast<int>(train_nodes.size()), c);
    for (std::size_t r = 0; r < train_nodes.size(); ++r) mask->at(static_cast<int>(r), labels[train_nodes[r]]) = 1.0;
    TensorPtr picked = tape.row_sum(tape.elem_mul(rows, mask));
    return tape.affine(tape.mean_all(picked), -1.0, 0.0);
}

TensorPtr loss_combined(Tape& tape, const TensorPtr& l_cn, const TensorPtr& l_lp, double gamma) {
    if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("loss_combined: gamma in [0,1]");
    return tape.elem_add(tape.affine(l_cn, 1.0 - gamma, 0.0), tape.affine(l_lp, gamma, 0.0));
}

AdamState::AdamState(const std::vector<TensorPtr>& params, double lr_, double weight_decay_)
    : lr(lr_), weight_decay(weight_decay_) {
    for (const auto& p : params) {
        m.emplace_back(p->size(), 0.0);
        v.emplace_back(p->size(), 0.0);
    }
}

void adam_step(AdamState& state, const std::vector<TensorPtr>& params) {
    if (params.size() != state.m.size()) throw shape_error("adam_step: parameter count mismatch");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto& t = *params[p];
        t.ensure_grad();
        auto& mp = state.m[p];
        auto& vp = state.v[p];
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double g = t.grad[i] + state.weight_decay * t.data[i];
            if (!std::isfinite(g)) {
                throw divergence_error("adam_step: non-finite gradient at step " +
                                       std::to_string(state.step));
            }
            mp[i] = state.beta1 * mp[i] + (1.0 - state.beta1) * g;
            vp[i] = state.beta2 * vp[i] + (1.0 - state.beta2) * g * g;
            const double mhat = mp[i] / bc1;
            const double vhat = vp[i] / bc2;
            t.data[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
        t.zero_grad();
    }
}

namespace {

struct RunInputs {
    Graph message_graph;   // graph whose edges drive aggregation
    TensorPtr a_tilde;
    TensorPtr x0;          // null -> one-hot
    ModelConfig model_cfg;
};

RunInputs build_inputs(const ExperimentConfig& config, const Graph& g, const SplitPlan& plan) {
    // For LP the aggregation matrix is rebuilt from train edges only; NC uses
    // the full graph (the LP term there is a regularizer, not a held-out task).
    Graph msg = plan.task == Task::lp ? Graph(g.num_nodes(), plan.train_pos) : g;
    RunInputs in{std::move(msg), nullptr, nullptr, {}};
    in.a_tilde = aggregation_matrix(in.message_graph);
    if (config.use_features && g.has_features()) in.x0 = feature_tensor(g);
    in.model_cfg.variant = config.variant;
    in.model_cfg.nc_decoder = config.nc_decoder;
    in.model_cfg.input_dim_base = in.x0 ? in.x0->cols : 0;
    in.model_cfg.num_nodes = g.num_nodes();
    in.model_cfg.hidden_base = config.hidden_base;
    in.model_cfg.hidden_fiber = config.hidden_fiber;
    in.model_cfg.num_layers = config.num_layers;
    in.model_cfg.num_classes = plan.task == Task::nc ? g.num_classes() : 0;
    return in;
}

std::vector<int> heads_of(const std::vector<Edge>& edges, bool second) {
    std::vector<int> out;
    out.reserve(edges.size());
    for (const auto& e : edges) out.push_back(second ? e.second : e.first);
    return out;
}

TensorPtr edge_probs_on_tape(Tape& tape, const TensorPtr& x, const TensorPtr& y,
                             const std::vector<Edge>& edges, const FermiDiracParams& fd,
                             ModelVariant variant) {
    const auto us = heads_of(edges, false);
    const auto vs = heads_of(edges, true);
    TensorPtr score;
    if (variant == ModelVariant::tb) {
        score = tb_score_rows(tape, tape.gather_rows(x, us), tape.gather_rows(x, vs),
                              tape.gather_rows(y, us), tape.gather_rows(y, vs));
    } else {
        score = baseline_score_rows(tape, tape.gather_rows(x, us), tape.gather_rows(x, vs));
    }
    return variant == ModelVariant::tb ? link_probability(tape, score, fd)
                                       : fermi_dirac(tape, score, fd);
}

std::pair<TensorPtr, TensorPtr> eval_forward(const ModelParams& params, const RunInputs& in) {
    Tape tape;  // discarded, no backward
    return encode(tape, params, in.a_tilde, in.x0, nullptr, {});
}

double validation_metric(const ExperimentConfig& config, const Graph& g, const SplitPlan& plan,
                         const ModelParams& params, const RunInputs& in) {
    auto [x, y] = eval_forward(params, in);
    const FermiDiracParams fd{config.r, config.t};
    if (plan.task == Task::lp) {
        auto pos = edge_probabilities(x, y, plan.val_pos, fd, config.variant);
        auto neg = edge_probabilities(x, y, plan.val_neg, fd, config.variant);
        return metrics::roc_auc(pos, neg);
    }
    Tape tape;
    TensorPtr log_probs = nc_decode(tape, x, y, config.nc_decoder, params.w_cls, params.b_cls);
    std::vector<int> pred, truth;
    for (int i : plan.val_nodes) {
        int best = 0;
        for (int c = 1; c < log_probs->cols; ++c)
            if (log_probs->at(i, c) > log_probs->at(i, best)) best = c;
        pred.push_back(best);
        truth.push_back(g.labels()[i]);
    }
    return metrics::f1(pred, truth, metrics::Averaging::micro);
}

}  // namespace

TrainResult train(const ExperimentConfig& config, const Graph& g, const SplitPlan& plan) {
    config.validate();
    if (plan.task == Task::nc && !g.has_labels()) throw data_error("train: NC task requires labels");

    RunInputs in = build_inputs(config, g, plan);
    ModelParams params = init_params(in.model_cfg, config.model_seed);
    AdamState opt(params.trainable(), config.lr, config.weight_decay);
    const FermiDiracParams fd{config.r, config.t};

    TrainResult result;
    result.best_params = params.clone();
    result.best_val_metric = -1.0;

    const std::vector<Edge>& pos_edges = plan.task == Task::lp ? plan.train_pos : g.edges();
    int epochs_since_best = 0;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        double loss_value = 0.0;
        try {
            Tape tape;
            EncodeOptions opts;
            opts.training = true;
            opts.dropconnect_p = config.dropconnect_p;
            opts.mask_seed = mix_seed(config.model_seed, static_cast<std::uint64_t>(epoch) * 2);
            auto [x, y] = encode(tape, params, in.a_tilde, in.x0, nullptr, opts);

            const auto neg_edges = sample_train_negatives(
                g, static_cast<int>(pos_edges.size()),
                mix_seed(config.model_seed, static_cast<std::uint64_t>(epoch) * 2 + 1));
            TensorPtr p_pos = edge_probs_on_tape(tape, x, y, pos_edges, fd, config.variant);
            TensorPtr p_neg = edge_probs_on_tape(tape, x, y, neg_edges, fd, config.variant);
            TensorPtr l_lp = loss_lp(tape, p_pos, p_neg);

            TensorPtr loss;
            if (plan.task == Task::lp) {
                loss = l_lp;
            } else {
                TensorPtr log_probs =
                    nc_decode(tape, x, y, config.nc_decoder, params.w_cls, params.b_cls);
                TensorPtr l_cn = loss_nc(tape, log_probs, g.labels(), plan.train_nodes);
                loss = loss_combined(tape, l_cn, l_lp, config.gamma);
            }
            loss_value = loss->data[0];
            tape.backward(loss);
            adam_step(opt, params.trainable());
        } catch (const divergence_error&) {
            result.diverged = true;
            break;
        }

        const double metric = validation_metric(config, g, plan, params, in);
        result.history.push_back({epoch, loss_value, metric});
        if (metric > result.best_val_metric) {
            result.best_val_metric = metric;
            result.best_epoch = epoch;
            result.best_params = params.clone();
            epochs_since_best = 0;
        } else {
            ++epochs_since_best;
            if (epochs_since_best >= config.patience) break;
        }
    }
    return result;
}

EvalMetrics evaluate(const ExperimentConfig& config, const Graph& g, const SplitPlan& plan,
                     const ModelParams& params) {
    RunInputs in = build_inputs(config, g, plan);
    auto [x, y] = eval_forward(params, in);
    const FermiDiracParams fd{config.r, config.t};
    EvalMetrics out;
    if (plan.task == Task::lp) {
        auto pos = edge_probabilities(x, y, plan.test_pos, fd, config.variant);
        auto neg = edge_probabilities(x, y, plan.test_neg, fd, config.variant);
        out.auc = metrics::roc_auc(pos, neg);
        out.ap = metrics::average_precision(pos, neg);
    } else {
        Tape tape;
        TensorPtr log_probs = nc_decode(tape, x, y, config.nc_decoder, params.w_cls, params.b_cls);
        std::vector<int> pred, truth;
        for (int i : plan.test_nodes) {
            int best = 0;
            for (int c = 1; c < log_probs->cols; ++c)
                if (log_probs->at(i, c) > log_probs->at(i, best)) best = c;
            pred.push_back(best);
            truth.push_back(g.labels()[i]);
        }
        out.f1_micro = metrics::f1(pred, truth, metrics::Averaging::micro);
        out.f1_macro = metrics::f1(pred, truth, metrics::Averaging::macro);
    }
    return out;
}

void write_history_csv(const std::string& path, const std::vector<EpochRecord>& history) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write history: " + path);
    out << "epoch,loss,val_metric\n";
    for (const auto& rec : history) {
        out << rec.epoch << ',' << rec.loss << ',' << rec.val_metric << '\n';
    }
}

}  // namespace tbgcn
