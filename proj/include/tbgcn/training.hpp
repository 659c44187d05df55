#ifndef TBGCN_TRAINING_HPP
#define TBGCN_TRAINING_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tbgcn/graph.hpp"
#include "tbgcn/model.hpp"

namespace tbgcn {

enum class Task { lp, nc };

struct SplitFractions {
    double train = 0.85;
    double val = 0.05;
    double test = 0.10;
};

/// Frozen train/validation/test partition. For LP the negatives used for
/// validation and test are sampled once at split time and never move.
struct SplitPlan {
    Task task = Task::lp;
    // LP
    std::vector<Edge> train_pos, val_pos, test_pos;
    std::vector<Edge> val_neg, test_neg;
    // NC
    std::vector<int> train_nodes, val_nodes, test_nodes;
    SplitFractions fractions;
    std::uint64_t split_seed = 0;
};

/// Every knob of a run in one serializable record.
struct ExperimentConfig {
    int hidden_base = 64;
    int hidden_fiber = 64;
    int num_layers = 2;
    double lr = 0.01;
    double weight_decay = 0.0;
    double dropconnect_p = 0.0;
    double r = 2.0;
    double t = 1.0;
    double gamma = 0.5;          // NC only: weight of the LP regularizer
    ModelVariant variant = ModelVariant::tb;
    NcDecoder nc_decoder = NcDecoder::sub;
    int max_epochs = 15000;
    int patience = 1000;
    std::uint64_t split_seed = 1234;
    std::uint64_t model_seed = 1234;
    SplitFractions fractions;
    bool multi_view = false;     // distinct fiber input features when available
    bool use_features = true;    // fall back to one-hot when absent

    void validate() const;
};

/// Uniform random edge partition with frozen evaluation negatives
/// (|val_neg| = |val_pos|, |test_neg| = |test_pos|), all disjoint from E.
SplitPlan split_lp(const Graph& g, const SplitFractions& fractions, std::uint64_t seed);

/// Uniform random node partition for classification.
SplitPlan split_nc(const Graph& g, const SplitFractions& fractions, std::uint64_t seed);

/// k uniform non-edges by rejection sampling; resampled each epoch.
std::vector<Edge> sample_train_negatives(const Graph& g, int k, std::uint64_t epoch_seed);

/// Cross-entropy over positive/negative edge probabilities, both sides
/// mean-normalized; probabilities clamped to [1e-12, 1-1e-12] before log.
TensorPtr loss_lp(Tape& tape, const TensorPtr& p_pos, const TensorPtr& p_neg);

/// Negative log likelihood over the training nodes.
TensorPtr loss_nc(Tape& tape, const TensorPtr& log_probs, const std::vector<int>& labels,
                  const std::vector<int>& train_nodes);

/// Combined objective (1-gamma)*L_CN + gamma*L_LP, so gamma = 0 is pure
/// classification and gamma = 1 pure link prediction.
TensorPtr loss_combined(Tape& tape, const TensorPtr& l_cn, const TensorPtr& l_lp, double gamma);

struct AdamState {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
    long step = 0;
    std::vector<std::vector<double>> m, v;  // per-parameter moment buffers

    explicit AdamState(const std::vector<TensorPtr>& params, double lr = 0.01,
                       double weight_decay = 0.0);
};

/// Bias-corrected Adam update; weight decay enters as additive lambda*w in
/// the gradient. Zeroes the gradients afterwards.
void adam_step(AdamState& state, const std::vector<TensorPtr>& params);

struct EpochRecord {
    int epoch;
    double loss;
    double val_metric;
};

struct TrainResult {
    ModelParams best_params;
    std::vector<EpochRecord> history;
    int best_epoch = 0;
    double best_val_metric = 0.0;
    bool diverged = false;
};

/// Full-batch training with per-epoch validation (AUC for LP, micro-F1 for
/// NC) and patience-based early stopping. Divergence aborts with the last
/// valid checkpoint retained.
TrainResult train(const ExperimentConfig& config, const Graph& g, const SplitPlan& plan);

struct EvalMetrics {
    double auc = 0.0, ap = 0.0;          // LP
    double f1_micro = 0.0, f1_macro = 0.0;  // NC
};

/// Scores a trained model on the plan's test partition.
EvalMetrics evaluate(const ExperimentConfig& config, const Graph& g, const SplitPlan& plan,
                     const ModelParams& params);

void write_history_csv(const std::string& path, const std::vector<EpochRecord>& history);

}  // namespace tbgcn

#endif  // TBGCN_TRAINING_HPP
