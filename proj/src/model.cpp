#include "tbgcn/model.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "tbgcn/graph.hpp"

namespace tbgcn {

using nlohmann::json;

std::vector<TensorPtr> ModelParams::trainable() const {
    std::vector<TensorPtr> out;
    for (const auto& l : layers) {
        out.push_back(l.w_base);
        out.push_back(l.b_base);
        if (l.w_fiber) {
            out.push_back(l.w_fiber);
            out.push_back(l.b_fiber);
        }
    }
    if (w_cls) {
        out.push_back(w_cls);
        out.push_back(b_cls);
    }
    return out;
}

namespace {

TensorPtr clone_tensor(const TensorPtr& t) {
    if (!t) return nullptr;
    auto c = make_tensor(t->rows, t->cols, t->data);
    c->requires_grad = t->requires_grad;
    return c;
}

}  // namespace

ModelParams ModelParams::clone() const {
    ModelParams c;
    c.variant = variant;
    c.nc_decoder = nc_decoder;
    for (const auto& l : layers) {
        c.layers.push_back({clone_tensor(l.w_base), clone_tensor(l.b_base),
                            clone_tensor(l.w_fiber), clone_tensor(l.b_fiber)});
    }
    c.w_cls = clone_tensor(w_cls);
    c.b_cls = clone_tensor(b_cls);
    return c;
}

void ModelParams::copy_values_from(const ModelParams& other) {
    auto mine = trainable();
    auto theirs = other.trainable();
    if (mine.size() != theirs.size()) throw shape_error("copy_values_from: layout mismatch");
    for (std::size_t i = 0; i < mine.size(); ++i) mine[i]->data = theirs[i]->data;
}

ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
    const int d_base = cfg.input_dim_base > 0 ? cfg.input_dim_base : cfg.num_nodes;
    const int d_fiber = cfg.input_dim_fiber > 0 ? cfg.input_dim_fiber : d_base;
    if (d_base <= 0 || cfg.hidden_base <= 0 || cfg.num_layers <= 0) {
        throw std::invalid_argument("init_params: dimensions must be positive");
    }
    std::mt19937_64 rng(seed);
    auto uniform_init = [&rng](int fan_in, int fan_out) {
        const double s = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> unif(-s, s);
        std::vector<double> w(static_cast<std::size_t>(fan_in) * fan_out);
        for (auto& v : w) v = unif(rng);
        return make_param(fan_in, fan_out, std::move(w));
    };
    auto zero_bias = [](int width) {
        auto b = make_tensor(1, width);
        b->requires_grad = true;
        return b;
    };

    ModelParams p;
    p.variant = cfg.variant;
    p.nc_decoder = cfg.nc_decoder;
    int in_b = d_base, in_f = d_fiber;
    for (int l = 0; l < cfg.num_layers; ++l) {
        LayerParams layer;
        layer.w_base = uniform_init(in_b, cfg.hidden_base);
        layer.b_base = zero_bias(cfg.hidden_base);
        if (cfg.variant == ModelVariant::tb) {
            layer.w_fiber = uniform_init(in_f, cfg.hidden_fiber);
            layer.b_fiber = zero_bias(cfg.hidden_fiber);
        }
        p.layers.push_back(std::move(layer));
        in_b = cfg.hidden_base;
        in_f = cfg.hidden_fiber;
    }
    if (cfg.num_classes > 0) {
        p.w_cls = uniform_init(cfg.hidden_base, cfg.num_classes);
        p.b_cls = zero_bias(cfg.num_classes);
    }
    return p;
}

namespace {

TensorPtr run_channel(Tape& tape, const TensorPtr& a_tilde, TensorPtr x,
                      const std::vector<LayerParams>& layers, bool fiber,
                      const EncodeOptions& opts) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
        TensorPtr w = fiber ? layers[l].w_fiber : layers[l].w_base;
        TensorPtr b = fiber ? layers[l].b_fiber : layers[l].b_base;
        if (opts.training && opts.dropconnect_p > 0.0) {
            const std::uint64_t s = opts.mask_seed * 1000003ULL + l * 2 + (fiber ? 1 : 0);
            w = tape.dropconnect_mask(w, opts.dropconnect_p, s);
        }
        // one-hot input times W is W itself; skip the multiply
        TensorPtr xw = x ? tape.matmul(x, w) : w;
        TensorPtr z = tape.matmul(a_tilde, tape.add_bias(xw, b));
        const bool last = l + 1 == layers.size();
        x = last ? z : tape.relu(z);
    }
    return x;
}

}  // namespace

std::pair<TensorPtr, TensorPtr> encode(Tape& tape, const ModelParams& params,
                                       const TensorPtr& a_tilde,
                                       const TensorPtr& x0, const TensorPtr& y0,
                                       const EncodeOptions& opts) {
    if (params.layers.empty()) throw std::invalid_argument("encode: no layers");
    if (x0 && x0->rows != a_tilde->rows) {
        throw shape_error("encode: features rows != aggregation matrix rows");
    }
    TensorPtr x_last = run_channel(tape, a_tilde, x0, params.layers, false, opts);
    TensorPtr y_last;
    if (params.variant == ModelVariant::tb) {
        // default Y^0 = X^0 unless distinct fiber input features are supplied
        y_last = run_channel(tape, a_tilde, y0 ? y0 : x0, params.layers, true, opts);
    }
    return {x_last, y_last};
}

TensorPtr tb_score_rows(Tape& tape, const TensorPtr& x_p, const TensorPtr& x_q,
                        const TensorPtr& y_p, const TensorPtr& y_q) {
    TensorPtr base = tape.row_sum(tape.square(tape.elem_sub(x_p, x_q)));
    TensorPtr fiber = tape.row_sum(tape.square(tape.elem_add(y_p, y_q)));
    return tape.elem_mul(base, fiber);
}

TensorPtr baseline_score_rows(Tape& tape, const TensorPtr& x_p, const TensorPtr& x_q) {
    return tape.row_sum(tape.square(tape.elem_sub(x_p, x_q)));
}

TensorPtr fermi_dirac(Tape& tape, const TensorPtr& d, const FermiDiracParams& fd) {
    if (fd.r <= 0.0 || fd.t <= 0.0) throw std::invalid_argument("fermi_dirac: r,t must be > 0");
    // 1/(exp((d-r)/t)+1) == sigmoid(-(d-r)/t)
    return tape.sigmoid(tape.affine(d, -1.0 / fd.t, fd.r / fd.t));
}

TensorPtr link_probability(Tape& tape, const TensorPtr& d, const FermiDiracParams& fd) {
    if (fd.r <= 0.0 || fd.t <= 0.0) throw std::invalid_argument("link_probability: r,t must be > 0");
    return tape.sigmoid(tape.affine(d, 1.0 / fd.t, -fd.r / fd.t));
}

double link_probability(double d, const FermiDiracParams& fd) {
    return 1.0 - fermi_dirac(d, fd);
}

double tb_score(const std::vector<double>& xp, const std::vector<double>& xq,
                const std::vector<double>& yp, const std::vector<double>& yq) {
    if (xp.size() != xq.size() || yp.size() != yq.size()) {
        throw shape_error("tb_score: endpoint dimension mismatch");
    }
    double base = 0.0, fiber = 0.0;
    for (std::size_t i = 0; i < xp.size(); ++i) {
        const double d = xp[i] - xq[i];
        base += d * d;
    }
    for (std::size_t j = 0; j < yp.size(); ++j) {
        const double s = yp[j] + yq[j];
        fiber += s * s;
    }
    return base * fiber;
}

double baseline_score(const std::vector<double>& xp, const std::vector<double>& xq) {
    if (xp.size() != xq.size()) throw shape_error("baseline_score: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < xp.size(); ++i) {
        const double d = xp[i] - xq[i];
        acc += d * d;
    }
    return acc;
}

double fermi_dirac(double d, const FermiDiracParams& fd) {
    if (fd.r <= 0.0 || fd.t <= 0.0) throw std::invalid_argument("fermi_dirac: r,t must be > 0");
    const double z = (d - fd.r) / fd.t;
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return e / (1.0 + e);
    }
    return 1.0 / (std::exp(z) + 1.0);
}

std::vector<double> edge_probabilities(const TensorPtr& x, const TensorPtr& y,
                                       const std::vector<std::pair<int, int>>& edges,
                                       const FermiDiracParams& fd, ModelVariant variant) {
    std::vector<double> probs;
    probs.reserve(edges.size());
    const int m = x->cols;
    const int n = y ? y->cols : 0;
    for (auto [p, q] : edges) {
        double d;
        if (variant == ModelVariant::tb) {
            double base = 0.0, fiber = 0.0;
            for (int i = 0; i < m; ++i) {
                const double diff = x->at(p, i) - x->at(q, i);
                base += diff * diff;
            }
            for (int j = 0; j < n; ++j) {
                const double s = y->at(p, j) + y->at(q, j);
                fiber += s * s;
            }
            d = base * fiber;
        } else {
            double base = 0.0;
            for (int i = 0; i < m; ++i) {
                const double diff = x->at(p, i) - x->at(q, i);
                base += diff * diff;
            }
            d = base;
        }
        // the product score grows with edge affinity; the baseline's distance
        // shrinks with it, so each variant feeds its natural orientation
        probs.push_back(variant == ModelVariant::tb ? link_probability(d, fd)
                                                    : fermi_dirac(d, fd));
    }
    return probs;
}

TensorPtr nc_decode(Tape& tape, const TensorPtr& x_last, const TensorPtr& y_last,
                    NcDecoder variant, const TensorPtr& w_cls, const TensorPtr& b_cls) {
    if (!w_cls || !b_cls) throw std::invalid_argument("nc_decode: missing classification head");
    TensorPtr z;
    if (!y_last) {
        z = x_last;  // baseline: base embeddings straight into the head
    } else {
        if (x_last->rows != y_last->rows || x_last->cols != y_last->cols) {
            throw shape_error("nc_decode: base/fiber widths must match");
        }
        switch (variant) {
            case NcDecoder::sub: z = tape.elem_sub(x_last, y_last); break;
            case NcDecoder::div: z = tape.elem_div(x_last, y_last); break;
            case NcDecoder::mul: z = tape.elem_mul(x_last, y_last); break;
        }
    }
    return tape.log_softmax_rows(tape.add_bias(tape.matmul(z, w_cls), b_cls));
}

namespace {

json tensor_to_json(const std::string& name, const TensorPtr& t) {
    return json{{"name", name}, {"rows", t->rows}, {"cols", t->cols}, {"data", t->data}};
}

TensorPtr tensor_from_json(const json& j) {
    auto t = make_param(j.at("rows").get<int>(), j.at("cols").get<int>(),
                        j.at("data").get<std::vector<double>>());
    return t;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params) {
    json j;
    j["variant"] = params.variant == ModelVariant::tb ? "tb" : "euclidean_baseline";
    switch (params.nc_decoder) {
        case NcDecoder::sub: j["nc_decoder"] = "sub"; break;
        case NcDecoder::div: j["nc_decoder"] = "div"; break;
        case NcDecoder::mul: j["nc_decoder"] = "mul"; break;
    }
    json tensors = json::array();
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& layer = params.layers[l];
        const std::string prefix = "layer" + std::to_string(l) + ".";
        tensors.push_back(tensor_to_json(prefix + "w_base", layer.w_base));
        tensors.push_back(tensor_to_json(prefix + "b_base", layer.b_base));
        if (layer.w_fiber) {
            tensors.push_back(tensor_to_json(prefix + "w_fiber", layer.w_fiber));
            tensors.push_back(tensor_to_json(prefix + "b_fiber", layer.b_fiber));
        }
    }
    if (params.w_cls) {
        tensors.push_back(tensor_to_json("head.w_cls", params.w_cls));
        tensors.push_back(tensor_to_json("head.b_cls", params.b_cls));
    }
    j["tensors"] = std::move(tensors);
    std::ofstream out(path);
    if (!out) throw data_error("cannot write checkpoint: " + path);
    out << j.dump(2) << '\n';
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open checkpoint: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw data_error("malformed checkpoint " + path + ": " + e.what());
    }
    ModelParams p;
    p.variant = j.at("variant").get<std::string>() == "tb" ? ModelVariant::tb
                                                           : ModelVariant::euclidean_baseline;
    const std::string dec = j.value("nc_decoder", "sub");
    p.nc_decoder = dec == "div" ? NcDecoder::div : dec == "mul" ? NcDecoder::mul : NcDecoder::sub;
    std::map<std::string, TensorPtr> by_name;
    for (const auto& tj : j.at("tensors")) {
        by_name[tj.at("name").get<std::string>()] = tensor_from_json(tj);
    }
    for (std::size_t l = 0;; ++l) {
        const std::string prefix = "layer" + std::to_string(l) + ".";
        auto wb = by_name.find(prefix + "w_base");
        if (wb == by_name.end()) break;
        LayerParams layer;
        layer.w_base = wb->second;
        layer.b_base = by_name.at(prefix + "b_base");
        if (by_name.count(prefix + "w_fiber")) {
            layer.w_fiber = by_name.at(prefix + "w_fiber");
            layer.b_fiber = by_name.at(prefix + "b_fiber");
        }
        p.layers.push_back(std::move(layer));
    }
    if (p.layers.empty()) throw data_error("checkpoint has no layers: " + path);
    if (by_name.count("head.w_cls")) {
        p.w_cls = by_name.at("head.w_cls");
        p.b_cls = by_name.at("head.b_cls");
    }
    return p;
}

}  // namespace tbgcn
