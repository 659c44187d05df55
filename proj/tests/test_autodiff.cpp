#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "tbgcn/tensor.hpp"

using namespace tbgcn;

namespace {

TensorPtr random_param(int rows, int cols, std::mt19937_64& rng, double lo = -2.0,
                       double hi = 2.0) {
    std::uniform_real_distribution<double> unif(lo, hi);
    std::vector<double> v(static_cast<std::size_t>(rows) * cols);
    for (auto& x : v) x = unif(rng);
    return make_param(rows, cols, std::move(v));
}

using LossFn = std::function<TensorPtr(Tape&)>;

// Central-difference oracle: analytic gradients of loss() must match
// (f(x+h)-f(x-h))/2h elementwise for every listed parameter.
void fd_check(const LossFn& loss, const std::vector<TensorPtr>& params, double h = 1e-5,
              double tol = 1e-4) {
    {
        Tape tape;
        tape.backward(loss(tape));
    }
    for (const auto& p : params) {
        REQUIRE(p->grad.size() == p->data.size());
        for (std::size_t i = 0; i < p->data.size(); ++i) {
            const double saved = p->data[i];
            p->data[i] = saved + h;
            Tape tp;
            const double up = loss(tp)->data[0];
            p->data[i] = saved - h;
            Tape tm;
            const double down = loss(tm)->data[0];
            p->data[i] = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double analytic = p->grad[i];
            const double scale = std::max({1.0, std::abs(numeric), std::abs(analytic)});
            CHECK(std::abs(numeric - analytic) / scale < tol);
        }
        p->zero_grad();
    }
}

}  // namespace

TEST_CASE("forward primitive values") {
    Tape tape;
    auto r = tape.relu(make_tensor(1, 2, {-1.0, 2.0}));
    CHECK(r->data == std::vector<double>{0.0, 2.0});

    auto eye = make_tensor(2, 2, {1.0, 0.0, 0.0, 1.0});
    auto x = make_tensor(2, 2, {3.0, -1.0, 2.0, 5.0});
    CHECK(tape.matmul(eye, x)->data == x->data);

    std::mt19937_64 rng(1);
    auto w = random_param(3, 3, rng);
    CHECK(tape.dropconnect_mask(w, 0.0, 9)->data == w->data);

    auto d = tape.elem_div(make_tensor(1, 1, {4.0}), make_tensor(1, 1, {2.0}));
    CHECK(d->data[0] == doctest::Approx(2.0));

    auto ls = tape.log_softmax_rows(make_tensor(1, 2, {0.0, 0.0}));
    CHECK(ls->data[0] == doctest::Approx(std::log(0.5)));
}

TEST_CASE("scalar backward examples") {
    {
        Tape tape;
        auto x = make_param(1, 1, {3.0});
        tape.backward(tape.mean_all(tape.square(x)));
        CHECK(x->grad[0] == doctest::Approx(6.0));
    }
    {
        Tape tape;
        auto x = make_param(1, 1, {-5.0});
        tape.backward(tape.mean_all(tape.relu(x)));
        CHECK(x->grad[0] == 0.0);
    }
}

TEST_CASE("every primitive passes the finite-difference oracle") {
    std::mt19937_64 rng(2024);
    auto a = random_param(4, 3, rng);
    auto b = random_param(3, 4, rng);
    auto x = random_param(4, 3, rng);
    auto y = random_param(4, 3, rng, 0.5, 2.0);   // positive: log/div/reciprocal
    auto bias = random_param(1, 3, rng);

    fd_check([&](Tape& t) { return t.mean_all(t.square(t.matmul(a, b))); }, {a, b});
    fd_check([&](Tape& t) { return t.mean_all(t.square(t.add_bias(x, bias))); }, {x, bias});
    fd_check([&](Tape& t) { return t.mean_all(t.square(t.relu(x))); }, {x});
    fd_check([&](Tape& t) { return t.mean_all(t.square(t.elem_add(x, y))); }, {x, y});
    fd_check([&](Tape& t) { return t.mean_all(t.square(t.elem_sub(x, y))); }, {x, y});
    fd_check([&](Tape& t) { return t.mean_all(t.square(t.elem_mul(x, y))); }, {x, y});
    fd_check([&](Tape& t) { return t.mean_all(t.square(t.elem_div(x, y))); }, {x, y});
    fd_check([&](Tape& t) { return t.mean_all(t.square(t.row_sum(x))); }, {x});
    fd_check([&](Tape& t) { return t.mean_all(t.exp(x)); }, {x});
    fd_check([&](Tape& t) { return t.mean_all(t.log(y)); }, {y});
    fd_check([&](Tape& t) { return t.mean_all(t.reciprocal(y)); }, {y});
    fd_check([&](Tape& t) { return t.mean_all(t.affine(x, -1.7, 0.3)); }, {x});
    fd_check([&](Tape& t) { return t.mean_all(t.sigmoid(x)); }, {x});
    fd_check([&](Tape& t) { return t.mean_all(t.square(t.log_softmax_rows(x))); }, {x});
    fd_check([&](Tape& t) { return t.mean_all(t.square(t.gather_rows(x, {2, 0, 2}))); }, {x});
    // clamp: gradient is zero outside the band, identity inside
    fd_check([&](Tape& t) { return t.mean_all(t.square(t.clamp(x, -1.0, 1.0))); }, {x});
    // dropconnect is a fixed linear mask for a fixed seed
    fd_check([&](Tape& t) { return t.mean_all(t.square(t.dropconnect_mask(a, 0.4, 77))); }, {a});
}

TEST_CASE("gradients accumulate additively on shared leaves") {
    auto x = make_param(2, 2, {1.0, -2.0, 0.5, 3.0});
    Tape t1;
    t1.backward(t1.mean_all(t1.square(x)));
    const auto once = x->grad;
    x->zero_grad();
    Tape t2;
    t2.backward(t2.mean_all(t2.elem_add(t2.square(x), t2.square(x))));
    for (std::size_t i = 0; i < once.size(); ++i) CHECK(x->grad[i] == doctest::Approx(2.0 * once[i]));
}

TEST_CASE("backward requires a fresh forward pass") {
    Tape tape;
    auto x = make_param(1, 1, {2.0});
    auto loss = tape.mean_all(tape.square(x));
    tape.backward(loss);
    CHECK_THROWS(tape.backward(loss));

    Tape other;
    CHECK_THROWS(other.backward(make_scalar(1.0)));
    auto wide = make_tensor(1, 2, {1.0, 2.0});
    CHECK_THROWS(other.backward(wide));
}

TEST_CASE("shape mismatches are rejected with both shapes named") {
    Tape tape;
    auto a = make_tensor(2, 3);
    auto b = make_tensor(2, 3);
    CHECK_THROWS_AS(tape.matmul(a, b), shape_error);
    CHECK_THROWS_AS(tape.elem_add(a, make_tensor(3, 2)), shape_error);
    try {
        tape.matmul(a, b);
    } catch (const shape_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("2") != std::string::npos);
        CHECK(msg.find("3") != std::string::npos);
    }
}

TEST_CASE("non-finite forward values raise divergence errors") {
    Tape tape;
    auto bad = make_param(1, 1, {-1.0});
    CHECK_THROWS_AS(tape.log(bad), divergence_error);
    auto huge = make_param(1, 1, {1e308});
    CHECK_THROWS_AS(tape.elem_mul(huge, huge), divergence_error);
}

TEST_CASE("identical seeds give bitwise-identical values and gradients") {
    auto run = [](std::vector<double>* grads) {
        std::mt19937_64 rng(555);
        auto a = random_param(5, 4, rng);
        auto w = random_param(4, 4, rng);
        Tape tape;
        auto masked = tape.dropconnect_mask(w, 0.3, 42);
        auto loss = tape.mean_all(tape.square(tape.sigmoid(tape.matmul(a, masked))));
        const double value = loss->data[0];
        tape.backward(loss);
        *grads = w->grad;
        return value;
    };
    std::vector<double> g1, g2;
    const double v1 = run(&g1);
    const double v2 = run(&g2);
    CHECK(v1 == v2);
    CHECK(g1 == g2);
}

TEST_CASE("matmul multiplication counter is exact") {
    reset_matmul_mult_count();
    Tape tape;
    auto a = make_tensor(3, 4, 1.0);
    auto b = make_tensor(4, 5, 1.0);
    tape.matmul(a, b);
    CHECK(matmul_mult_count() == 3ULL * 4ULL * 5ULL);
    reset_matmul_mult_count();
    CHECK(matmul_mult_count() == 0);
}
