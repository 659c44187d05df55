#ifndef TBGCN_TENSOR_HPP
#define TBGCN_TENSOR_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace tbgcn {

/// Raised when a forward value, loss, or gradient becomes non-finite.
class divergence_error : public std::runtime_error {
public:
    explicit divergence_error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised on incompatible operand shapes; message names both shapes.
class shape_error : public std::invalid_argument {
public:
    explicit shape_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Dense row-major 2-D tensor participating in reverse-mode differentiation.
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;
    bool requires_grad = false;
    std::vector<double> grad;  // lazily allocated, same length as data

    Tensor() = default;
    Tensor(int r, int c, double fill = 0.0)
        : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

    std::size_t size() const { return data.size(); }
    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    /// Allocates the gradient buffer (zero-filled) if absent.
    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
    }
    void zero_grad() {
        if (!grad.empty()) grad.assign(grad.size(), 0.0);
    }
};

using TensorPtr = std::shared_ptr<Tensor>;

TensorPtr make_tensor(int rows, int cols, double fill = 0.0);
TensorPtr make_tensor(int rows, int cols, std::vector<double> values);
TensorPtr make_param(int rows, int cols, std::vector<double> values);
TensorPtr make_scalar(double value);

/// Multiplication counter over matmul forward passes (complexity checks).
std::uint64_t matmul_mult_count();
void reset_matmul_mult_count();

/// Records executed operations and replays their backward rules in reverse.
///
/// A tape plus its tensors is a single-threaded unit of work. Operations
/// record a backward closure only when some input requires a gradient;
/// gradients accumulate additively into shared inputs.
class Tape {
public:
    // --- forward primitives -------------------------------------------------
    TensorPtr matmul(const TensorPtr& a, const TensorPtr& b);
    TensorPtr add_bias(const TensorPtr& x, const TensorPtr& b);  // b is 1 x cols
    TensorPtr relu(const TensorPtr& x);
    TensorPtr elem_add(const TensorPtr& x, const TensorPtr& y);
    TensorPtr elem_sub(const TensorPtr& x, const TensorPtr& y);
    TensorPtr elem_mul(const TensorPtr& x, const TensorPtr& y);
    /// Elementwise division with a sign-preserving epsilon guard on the
    /// denominator (|den| is raised to at least 1e-8).
    TensorPtr elem_div(const TensorPtr& x, const TensorPtr& y);
    TensorPtr square(const TensorPtr& x);
    TensorPtr row_sum(const TensorPtr& x);  // N x m -> N x 1
    TensorPtr mean_all(const TensorPtr& x); // -> 1 x 1
    TensorPtr exp(const TensorPtr& x);
    TensorPtr log(const TensorPtr& x);
    TensorPtr reciprocal(const TensorPtr& x);
    TensorPtr affine(const TensorPtr& x, double scale, double shift);
    /// Numerically stable logistic 1/(1+e^{-x}).
    TensorPtr sigmoid(const TensorPtr& x);
    TensorPtr clamp(const TensorPtr& x, double lo, double hi);
    TensorPtr log_softmax_rows(const TensorPtr& x);
    /// Selects rows of x by index; backward scatter-adds.
    TensorPtr gather_rows(const TensorPtr& x, const std::vector<int>& idx);
    /// Train-time DropConnect: i.i.d. Bernoulli(1-p) mask on w, rescaled by
    /// 1/(1-p). p = 0 returns w unchanged.
    TensorPtr dropconnect_mask(const TensorPtr& w, double p, std::uint64_t seed);

    /// Populates grads of every requires_grad leaf reachable from loss,
    /// then clears the tape. loss must be 1x1 and recorded on this tape.
    void backward(const TensorPtr& loss);

    std::size_t num_recorded() const { return nodes_.size(); }

private:
    TensorPtr record(TensorPtr out, std::vector<TensorPtr> inputs,
                     std::function<void()> back, const char* opname);

    std::vector<std::function<void()>> nodes_;
};

}  // namespace tbgcn

#endif  // TBGCN_TENSOR_HPP
