#include "tbgcn/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>

namespace tbgcn {

namespace {

std::uint64_t g_matmul_mults = 0;

void check_same_shape(const TensorPtr& x, const TensorPtr& y, const char* op) {
    if (x->rows != y->rows || x->cols != y->cols) {
        throw shape_error(std::string(op) + ": shape mismatch (" +
                          std::to_string(x->rows) + "x" + std::to_string(x->cols) + " vs " +
                          std::to_string(y->rows) + "x" + std::to_string(y->cols) + ")");
    }
}

void check_finite(const Tensor& t, const char* op) {
    for (double v : t.data) {
        if (!std::isfinite(v)) {
            throw divergence_error(std::string("non-finite value produced by ") + op);
        }
    }
}

constexpr double kDivEps = 1e-8;

double guarded(double den) {
    if (den >= 0.0) return den < kDivEps ? kDivEps : den;
    return den > -kDivEps ? -kDivEps : den;
}

}  // namespace

TensorPtr make_tensor(int rows, int cols, double fill) {
    return std::make_shared<Tensor>(rows, cols, fill);
}

TensorPtr make_tensor(int rows, int cols, std::vector<double> values) {
    if (values.size() != static_cast<std::size_t>(rows) * cols) {
        throw shape_error("make_tensor: data length does not match shape");
    }
    auto t = std::make_shared<Tensor>(rows, cols);
    t->data = std::move(values);
    return t;
}

TensorPtr make_param(int rows, int cols, std::vector<double> values) {
    auto t = make_tensor(rows, cols, std::move(values));
    t->requires_grad = true;
    return t;
}

TensorPtr make_scalar(double value) { return make_tensor(1, 1, {value}); }

std::uint64_t matmul_mult_count() { return g_matmul_mults; }
void reset_matmul_mult_count() { g_matmul_mults = 0; }

TensorPtr Tape::record(TensorPtr out, std::vector<TensorPtr> inputs,
                       std::function<void()> back, const char* opname) {
    check_finite(*out, opname);
    bool any_grad = false;
    for (const auto& in : inputs) any_grad = any_grad || in->requires_grad;
    if (any_grad) {
        out->requires_grad = true;
        out->ensure_grad();
        for (auto& in : inputs) {
            if (in->requires_grad) in->ensure_grad();
        }
        nodes_.push_back(std::move(back));
    }
    return out;
}

TensorPtr Tape::matmul(const TensorPtr& a, const TensorPtr& b) {
    if (a->cols != b->rows) {
        throw shape_error("matmul: inner dimensions differ (" +
                          std::to_string(a->rows) + "x" + std::to_string(a->cols) + " * " +
                          std::to_string(b->rows) + "x" + std::to_string(b->cols) + ")");
    }
    const int n = a->rows, k = a->cols, m = b->cols;
    g_matmul_mults += static_cast<std::uint64_t>(n) * k * m;
    auto out = make_tensor(n, m);
    // ikj order keeps the inner loop contiguous
    for (int i = 0; i < n; ++i) {
        const double* arow = a->data.data() + static_cast<std::size_t>(i) * k;
        double* orow = out->data.data() + static_cast<std::size_t>(i) * m;
        for (int kk = 0; kk < k; ++kk) {
            const double av = arow[kk];
            if (av == 0.0) continue;
            const double* brow = b->data.data() + static_cast<std::size_t>(kk) * m;
            for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
        }
    }
    return record(out, {a, b}, [a, b, out, n, k, m] {
        if (a->requires_grad) {
            // dA += dOut * B^T
            for (int i = 0; i < n; ++i) {
                const double* grow = out->grad.data() + static_cast<std::size_t>(i) * m;
                double* garow = a->grad.data() + static_cast<std::size_t>(i) * k;
                for (int kk = 0; kk < k; ++kk) {
                    const double* brow = b->data.data() + static_cast<std::size_t>(kk) * m;
                    double acc = 0.0;
                    for (int j = 0; j < m; ++j) acc += grow[j] * brow[j];
                    garow[kk] += acc;
                }
            }
        }
        if (b->requires_grad) {
            // dB += A^T * dOut
            for (int i = 0; i < n; ++i) {
                const double* arow = a->data.data() + static_cast<std::size_t>(i) * k;
                const double* grow = out->grad.data() + static_cast<std::size_t>(i) * m;
                for (int kk = 0; kk < k; ++kk) {
                    const double av = arow[kk];
                    if (av == 0.0) continue;
                    double* gbrow = b->grad.data() + static_cast<std::size_t>(kk) * m;
                    for (int j = 0; j < m; ++j) gbrow[j] += av * grow[j];
                }
            }
        }
    }, "matmul");
}

TensorPtr Tape::add_bias(const TensorPtr& x, const TensorPtr& b) {
    if (b->rows != 1 || b->cols != x->cols) {
        throw shape_error("add_bias: bias must be 1x" + std::to_string(x->cols) +
                          ", got " + std::to_string(b->rows) + "x" + std::to_string(b->cols));
    }
    auto out = make_tensor(x->rows, x->cols);
    for (int i = 0; i < x->rows; ++i)
        for (int j = 0; j < x->cols; ++j)
            out->at(i, j) = x->at(i, j) + b->at(0, j);
    return record(out, {x, b}, [x, b, out] {
        if (x->requires_grad) {
            for (std::size_t i = 0; i < x->size(); ++i) x->grad[i] += out->grad[i];
        }
        if (b->requires_grad) {
            for (int i = 0; i < out->rows; ++i)
                for (int j = 0; j < out->cols; ++j)
                    b->grad[j] += out->grad[static_cast<std::size_t>(i) * out->cols + j];
        }
    }, "add_bias");
}

TensorPtr Tape::relu(const TensorPtr& x) {
    auto out = make_tensor(x->rows, x->cols);
    for (std::size_t i = 0; i < x->size(); ++i) out->data[i] = x->data[i] > 0.0 ? x->data[i] : 0.0;
    return record(out, {x}, [x, out] {
        for (std::size_t i = 0; i < x->size(); ++i)
            if (x->data[i] > 0.0) x->grad[i] += out->grad[i];
    }, "relu");
}

TensorPtr Tape::elem_add(const TensorPtr& x, const TensorPtr& y) {
    check_same_shape(x, y, "elem_add");
    auto out = make_tensor(x->rows, x->cols);
    for (std::size_t i = 0; i < x->size(); ++i) out->data[i] = x->data[i] + y->data[i];
    return record(out, {x, y}, [x, y, out] {
        if (x->requires_grad)
            for (std::size_t i = 0; i < x->size(); ++i) x->grad[i] += out->grad[i];
        if (y->requires_grad)
            for (std::size_t i = 0; i < y->size(); ++i) y->grad[i] += out->grad[i];
    }, "elem_add");
}

TensorPtr Tape::elem_sub(const TensorPtr& x, const TensorPtr& y) {
    check_same_shape(x, y, "elem_sub");
    auto out = make_tensor(x->rows, x->cols);
    for (std::size_t i = 0; i < x->size(); ++i) out->data[i] = x->data[i] - y->data[i];
    return record(out, {x, y}, [x, y, out] {
        if (x->requires_grad)
            for (std::size_t i = 0; i < x->size(); ++i) x->grad[i] += out->grad[i];
        if (y->requires_grad)
            for (std::size_t i = 0; i < y->size(); ++i) y->grad[i] -= out->grad[i];
    }, "elem_sub");
}

TensorPtr Tape::elem_mul(const TensorPtr& x, const TensorPtr& y) {
    check_same_shape(x, y, "elem_mul");
    auto out = make_tensor(x->rows, x->cols);
    for (std::size_t i = 0; i < x->size(); ++i) out->data[i] = x->data[i] * y->data[i];
    return record(out, {x, y}, [x, y, out] {
        if (x->requires_grad)
            for (std::size_t i = 0; i < x->size(); ++i) x->grad[i] += y->data[i] * out->grad[i];
        if (y->requires_grad)
            for (std::size_t i = 0; i < y->size(); ++i) y->grad[i] += x->data[i] * out->grad[i];
    }, "elem_mul");
}

TensorPtr Tape::elem_div(const TensorPtr& x, const TensorPtr& y) {
    check_same_shape(x, y, "elem_div");
    auto out = make_tensor(x->rows, x->cols);
    for (std::size_t i = 0; i < x->size(); ++i) out->data[i] = x->data[i] / guarded(y->data[i]);
    return record(out, {x, y}, [x, y, out] {
        for (std::size_t i = 0; i < x->size(); ++i) {
            const double den = guarded(y->data[i]);
            if (x->requires_grad) x->grad[i] += out->grad[i] / den;
            if (y->requires_grad) y->grad[i] -= out->grad[i] * x->data[i] / (den * den);
        }
    }, "elem_div");
}

TensorPtr Tape::square(const TensorPtr& x) {
    auto out = make_tensor(x->rows, x->cols);
    for (std::size_t i = 0; i < x->size(); ++i) out->data[i] = x->data[i] * x->data[i];
    return record(out, {x}, [x, out] {
        for (std::size_t i = 0; i < x->size(); ++i) x->grad[i] += 2.0 * x->data[i] * out->grad[i];
    }, "square");
}

TensorPtr Tape::row_sum(const TensorPtr& x) {
    auto out = make_tensor(x->rows, 1);
    for (int i = 0; i < x->rows; ++i) {
        double acc = 0.0;
        for (int j = 0; j < x->cols; ++j) acc += x->at(i, j);
        out->at(i, 0) = acc;
    }
    return record(out, {x}, [x, out] {
        for (int i = 0; i < x->rows; ++i)
            for (int j = 0; j < x->cols; ++j)
                x->grad[static_cast<std::size_t>(i) * x->cols + j] += out->grad[i];
    }, "row_sum");
}

TensorPtr Tape::mean_all(const TensorPtr& x) {
    const double inv = 1.0 / static_cast<double>(x->size());
    auto out = make_tensor(1, 1);
    double acc = 0.0;
    for (double v : x->data) acc += v;
    out->data[0] = acc * inv;
    return record(out, {x}, [x, out, inv] {
        for (std::size_t i = 0; i < x->size(); ++i) x->grad[i] += inv * out->grad[0];
    }, "mean_all");
}

TensorPtr Tape::exp(const TensorPtr& x) {
    auto out = make_tensor(x->rows, x->cols);
    for (std::size_t i = 0; i < x->size(); ++i) out->data[i] = std::exp(x->data[i]);
    return record(out, {x}, [x, out] {
        for (std::size_t i = 0; i < x->size(); ++i) x->grad[i] += out->data[i] * out->grad[i];
    }, "exp");
}

TensorPtr Tape::log(const TensorPtr& x) {
    auto out = make_tensor(x->rows, x->cols);
    for (std::size_t i = 0; i < x->size(); ++i) out->data[i] = std::log(x->data[i]);
    return record(out, {x}, [x, out] {
        for (std::size_t i = 0; i < x->size(); ++i) x->grad[i] += out->grad[i] / x->data[i];
    }, "log");
}

TensorPtr Tape::reciprocal(const TensorPtr& x) {
    auto out = make_tensor(x->rows, x->cols);
    for (std::size_t i = 0; i < x->size(); ++i) out->data[i] = 1.0 / x->data[i];
    return record(out, {x}, [x, out] {
        for (std::size_t i = 0; i < x->size(); ++i)
            x->grad[i] -= out->data[i] * out->data[i] * out->grad[i];
    }, "reciprocal");
}

TensorPtr Tape::affine(const TensorPtr& x, double scale, double shift) {
    auto out = make_tensor(x->rows, x->cols);
    for (std::size_t i = 0; i < x->size(); ++i) out->data[i] = scale * x->data[i] + shift;
    return record(out, {x}, [x, out, scale] {
        for (std::size_t i = 0; i < x->size(); ++i) x->grad[i] += scale * out->grad[i];
    }, "affine");
}

TensorPtr Tape::sigmoid(const TensorPtr& x) {
    auto out = make_tensor(x->rows, x->cols);
    for (std::size_t i = 0; i < x->size(); ++i) {
        const double z = x->data[i];
        if (z >= 0.0) {
            out->data[i] = 1.0 / (1.0 + std::exp(-z));
        } else {
            const double e = std::exp(z);
            out->data[i] = e / (1.0 + e);
        }
    }
    return record(out, {x}, [x, out] {
        for (std::size_t i = 0; i < x->size(); ++i) {
            const double p = out->data[i];
            x->grad[i] += p * (1.0 - p) * out->grad[i];
        }
    }, "sigmoid");
}

TensorPtr Tape::clamp(const TensorPtr& x, double lo, double hi) {
    auto out = make_tensor(x->rows, x->cols);
    for (std::size_t i = 0; i < x->size(); ++i) out->data[i] = std::clamp(x->data[i], lo, hi);
    return record(out, {x, }, [x, out, lo, hi] {
        for (std::size_t i = 0; i < x->size(); ++i)
            if (x->data[i] > lo && x->data[i] < hi) x->grad[i] += out->grad[i];
    }, "clamp");
}

TensorPtr Tape::log_softmax_rows(const TensorPtr& x) {
    auto out = make_tensor(x->rows, x->cols);
    for (int i = 0; i < x->rows; ++i) {
        double mx = x->at(i, 0);
        for (int j = 1; j < x->cols; ++j) mx = std::max(mx, x->at(i, j));
        double lse = 0.0;
        for (int j = 0; j < x->cols; ++j) lse += std::exp(x->at(i, j) - mx);
        lse = mx + std::log(lse);
        for (int j = 0; j < x->cols; ++j) out->at(i, j) = x->at(i, j) - lse;
    }
    return record(out, {x}, [x, out] {
        // dX = dY - softmax(X) * rowsum(dY)
        for (int i = 0; i < x->rows; ++i) {
            double gsum = 0.0;
            for (int j = 0; j < x->cols; ++j)
                gsum += out->grad[static_cast<std::size_t>(i) * x->cols + j];
            for (int j = 0; j < x->cols; ++j) {
                const std::size_t k = static_cast<std::size_t>(i) * x->cols + j;
                x->grad[k] += out->grad[k] - std::exp(out->data[k]) * gsum;
            }
        }
    }, "log_softmax_rows");
}

TensorPtr Tape::gather_rows(const TensorPtr& x, const std::vector<int>& idx) {
    for (int i : idx) {
        if (i < 0 || i >= x->rows) throw shape_error("gather_rows: index out of range");
    }
    auto out = make_tensor(static_cast<int>(idx.size()), x->cols);
    for (std::size_t r = 0; r < idx.size(); ++r)
        std::copy_n(x->data.begin() + static_cast<std::size_t>(idx[r]) * x->cols, x->cols,
                    out->data.begin() + r * x->cols);
    return record(out, {x}, [x, out, idx] {
        for (std::size_t r = 0; r < idx.size(); ++r)
            for (int j = 0; j < x->cols; ++j)
                x->grad[static_cast<std::size_t>(idx[r]) * x->cols + j] +=
                    out->grad[r * x->cols + j];
    }, "gather_rows");
}

TensorPtr Tape::dropconnect_mask(const TensorPtr& w, double p, std::uint64_t seed) {
    if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropconnect_mask: p must be in [0,1)");
    if (p == 0.0) return w;
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution keep(1.0 - p);
    auto mask = std::make_shared<std::vector<double>>(w->size());
    const double scale = 1.0 / (1.0 - p);
    for (auto& m : *mask) m = keep(rng) ? scale : 0.0;
    auto out = make_tensor(w->rows, w->cols);
    for (std::size_t i = 0; i < w->size(); ++i) out->data[i] = w->data[i] * (*mask)[i];
    return record(out, {w}, [w, out, mask] {
        for (std::size_t i = 0; i < w->size(); ++i) w->grad[i] += (*mask)[i] * out->grad[i];
    }, "dropconnect_mask");
}

void Tape::backward(const TensorPtr& loss) {
    if (loss->rows != 1 || loss->cols != 1) throw shape_error("backward: loss must be 1x1");
    if (nodes_.empty()) {
        throw std::logic_error("backward: tape is empty (already consumed or no forward recorded)");
    }
    if (!loss->requires_grad) {
        throw std::logic_error("backward: loss does not require grad / not on the tape");
    }
    if (!std::isfinite(loss->data[0])) throw divergence_error("backward: loss is non-finite");
    loss->ensure_grad();
    loss->grad[0] = 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
    nodes_.clear();
}

}  // namespace tbgcn
