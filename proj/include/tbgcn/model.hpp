#ifndef TBGCN_MODEL_HPP
#define TBGCN_MODEL_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tbgcn/tensor.hpp"

namespace tbgcn {

enum class ModelVariant { tb, euclidean_baseline };
enum class NcDecoder { sub, div, mul };

/// One dual-channel convolution layer: base-space and fiber weight/bias pairs.
/// The baseline variant leaves the fiber side null.
struct LayerParams {
    TensorPtr w_base, b_base;
    TensorPtr w_fiber, b_fiber;
};

struct ModelParams {
    ModelVariant variant = ModelVariant::tb;
    NcDecoder nc_decoder = NcDecoder::sub;
    std::vector<LayerParams> layers;
    TensorPtr w_cls, b_cls;  // classification head, present for NC models

    std::vector<TensorPtr> trainable() const;
    ModelParams clone() const;           // deep copy of values (grads dropped)
    void copy_values_from(const ModelParams& other);
};

struct FermiDiracParams {
    double r = 2.0;
    double t = 1.0;
};

struct ModelConfig {
    ModelVariant variant = ModelVariant::tb;
    NcDecoder nc_decoder = NcDecoder::sub;
    int input_dim_base = 0;       // 0 means one-hot input of width N
    int input_dim_fiber = 0;
    int num_nodes = 0;            // needed when input dims are one-hot
    int hidden_base = 64;
    int hidden_fiber = 64;
    int num_layers = 2;
    int num_classes = 0;          // > 0 enables the NC head
};

/// Fan-balanced uniform(-s, s) weights with s = sqrt(6/(fan_in+fan_out));
/// zero biases. Deterministic per seed.
ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed);

struct EncodeOptions {
    bool training = false;
    double dropconnect_p = 0.0;
    std::uint64_t mask_seed = 0;
};

/// Dual-channel propagation: each layer computes sigma(A(XW+b)) per channel;
/// the last layer is linear so fiber coordinates keep their sign. Null
/// x0/y0 stand for one-hot inputs, in which case the first layer reduces to
/// A(W+b). Returns (X^L, Y^L); the fiber side is null for the baseline.
std::pair<TensorPtr, TensorPtr> encode(Tape& tape, const ModelParams& params,
                                       const TensorPtr& a_tilde,
                                       const TensorPtr& x0, const TensorPtr& y0,
                                       const EncodeOptions& opts = {});

/// Product pair score d(p,q) = |x(p)-x(q)|^2 * |y(p)+y(q)|^2, computed for
/// each edge in one shot. x_*, y_* are gathered endpoint rows (k x m, k x n).
TensorPtr tb_score_rows(Tape& tape, const TensorPtr& x_p, const TensorPtr& x_q,
                        const TensorPtr& y_p, const TensorPtr& y_q);

/// Baseline score: squared Euclidean distance of base embeddings.
TensorPtr baseline_score_rows(Tape& tape, const TensorPtr& x_p, const TensorPtr& x_q);

/// Fermi-Dirac decoder P = 1/(exp((d-r)/t)+1), columnwise on a k x 1 score.
TensorPtr fermi_dirac(Tape& tape, const TensorPtr& d, const FermiDiracParams& fd);

/// Link probability for the product score, which is positively correlated
/// with edge affinity: P = 1 - fermi_dirac(d) = sigmoid((d-r)/t). The
/// baseline's squared distance goes through fermi_dirac directly.
TensorPtr link_probability(Tape& tape, const TensorPtr& d, const FermiDiracParams& fd);
double link_probability(double d, const FermiDiracParams& fd);

// scalar conveniences (non-differentiating), used by tests and evaluation
double tb_score(const std::vector<double>& xp, const std::vector<double>& xq,
                const std::vector<double>& yp, const std::vector<double>& yq);
double baseline_score(const std::vector<double>& xp, const std::vector<double>& xq);
double fermi_dirac(double d, const FermiDiracParams& fd);

/// Edge probabilities for a list of edges given embeddings (no tape).
std::vector<double> edge_probabilities(const TensorPtr& x, const TensorPtr& y,
                                       const std::vector<std::pair<int, int>>& edges,
                                       const FermiDiracParams& fd, ModelVariant variant);

/// Elementwise base/fiber combination per decoder variant followed by
/// multinomial logistic regression; returns N x C log-probabilities.
TensorPtr nc_decode(Tape& tape, const TensorPtr& x_last, const TensorPtr& y_last,
                    NcDecoder variant, const TensorPtr& w_cls, const TensorPtr& b_cls);

/// Checkpoint round-trip: ordered named tensors with shapes, JSON.
void save_checkpoint(const std::string& path, const ModelParams& params);
ModelParams load_checkpoint(const std::string& path);

}  // namespace tbgcn

#endif  // TBGCN_MODEL_HPP
