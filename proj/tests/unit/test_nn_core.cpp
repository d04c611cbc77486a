#include "doctest.h"
#include "gradient_suites.hpp"

#include "fibermon/error.hpp"
#include "fibermon/nn/adam.hpp"

#include <cmath>
#include <limits>

using namespace fibermon;
using namespace fibermon::nn;
using fibermon::testing::GradCheck;

namespace {

constexpr std::size_t kInstances = 20;

GruParams scalar_gru() {
  GruParams p = GruParams::zeros(1, 1);
  p.w_h[0] = 1.0;
  return p;
}

}  // namespace

TEST_CASE("tensor construction and shape checks") {
  const Tensor t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>(3)), ShapeError);
  Tensor bad = Tensor::vector({1.0, std::numeric_limits<double>::quiet_NaN()});
  CHECK_THROWS_AS(bad.require_finite("x"), ContractError);
  const Tensor m = Tensor::matrix(2, 2, {1, 2, 3, 4});
  CHECK(m.at(1, 0) == 3.0);
  CHECK(to_tensor(to_matrix(m)) == m);
}

TEST_CASE("sigmoid") {
  CHECK(sigmoid(Tensor::vector({0.0}))[0] == 0.5);
  CHECK(std::abs(sigmoid(Tensor::vector({50.0}))[0] - 1.0) < 1e-12);
  CHECK(sigmoid(Tensor::vector({std::log(3.0)}))[0] == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(sigmoid(Tensor::vector({-800.0}))[0] >= 0.0);
  CHECK_THROWS_AS(sigmoid(Tensor::vector({std::numeric_limits<double>::infinity()})), ContractError);
}

TEST_CASE("softmax") {
  const Tensor u = softmax(Tensor::vector({0.7, 0.7, 0.7}));
  for (double v : u.values()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  const Tensor two = softmax(Tensor::vector({0.0, std::log(2.0)}));
  CHECK(two[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(two[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  const Tensor big = softmax(Tensor::vector({1000.0, 1000.0}));
  CHECK(big[0] == 0.5);
  CHECK(big[1] == 0.5);
  CHECK_THROWS_AS(softmax(Tensor::vector({})), ContractError);
}

TEST_CASE("softmax outputs are distributions") {
  Rng rng(11);
  for (int k = 0; k < 200; ++k) {
    const Tensor p = softmax(fibermon::testing::random_tensor({5}, rng, 30.0));
    double sum = 0.0;
    for (double v : p.values()) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("gru cell examples") {
  const GruParams zero = GruParams::zeros(2, 3);
  const Tensor h = gru_cell_forward(zero, Tensor::vector({0.4, -2.0}), Tensor::zeros({3})).h;
  for (double v : h.values()) CHECK(v == 0.0);

  const Tensor h1 = gru_cell_forward(scalar_gru(), Tensor::vector({1.0}), Tensor::zeros({1})).h;
  CHECK(h1[0] == doctest::Approx(0.5 * std::tanh(1.0)).epsilon(1e-14));
  CHECK(h1[0] == doctest::Approx(0.380797).epsilon(1e-6));
}

TEST_CASE("saturated update gate keeps the previous state") {
  Rng rng(5);
  for (std::size_t k = 0; k < kInstances; ++k) {
    GruParams p = GruParams::zeros(2, 3);
    fibermon::testing::randomize(p, rng, 1.0);
    p.b_z.fill(50.0);
    const Tensor prev = fibermon::testing::random_tensor({3}, rng);
    const Tensor h = gru_cell_forward(p, fibermon::testing::random_tensor({2}, rng), prev).h;
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(h[i] - prev[i]) < 1e-10);
  }
}

TEST_CASE("gru sequence") {
  const Tensor hs = gru_sequence_forward(scalar_gru(), Tensor::matrix(2, 1, {1.0, 1.0}));
  const double first = 0.5 * std::tanh(1.0);
  CHECK(hs[0] == doctest::Approx(first).epsilon(1e-14));
  CHECK(hs[1] == doctest::Approx(0.5 * first + 0.5 * std::tanh(1.0)).epsilon(1e-14));
  CHECK(hs[1] == doctest::Approx(0.571196).epsilon(1e-6));

  Rng rng(3);
  GruParams p = GruParams::init(2, 4, rng);
  const Tensor x = fibermon::testing::random_tensor({2}, rng);
  const Tensor one = gru_sequence_forward(p, Tensor({1, 2}, {x[0], x[1]}));
  CHECK(one.storage() == gru_cell_forward(p, x, Tensor::zeros({4})).h.storage());

  const Tensor zero_out = gru_sequence_forward(GruParams::zeros(2, 4), fibermon::testing::random_tensor({6, 2}, rng));
  for (double v : zero_out.values()) CHECK(v == 0.0);
  CHECK_THROWS_AS(gru_sequence_forward(p, Tensor::zeros({3, 3})), ShapeError);
}

TEST_CASE("bigru") {
  Rng rng(8);
  const GruParams fwd = GruParams::init(2, 3, rng);
  const Tensor xs = fibermon::testing::random_tensor({5, 2}, rng);
  // A zero backward branch contributes exactly zero.
  CHECK(bigru_forward(fwd, GruParams::zeros(2, 3), xs) == gru_sequence_forward(fwd, xs));

  const Tensor pal = Tensor::matrix(5, 2, {0.1, 0.2, -0.3, 0.5, 0.9, 0.0, -0.3, 0.5, 0.1, 0.2});
  const Tensor y = bigru_forward(fwd, fwd, pal);
  for (std::size_t t = 0; t < 5; ++t) {
    for (std::size_t d = 0; d < 3; ++d) CHECK(y.at(t, d) == doctest::Approx(y.at(4 - t, d)).epsilon(1e-14));
  }

  const GruParams bwd = GruParams::init(2, 3, rng);
  const Tensor x1 = fibermon::testing::random_tensor({1, 2}, rng);
  const Tensor single = bigru_forward(fwd, bwd, x1);
  const Tensor step = Tensor::vector({x1[0], x1[1]});
  const Tensor hf = gru_cell_forward(fwd, step, Tensor::zeros({3})).h;
  const Tensor hb = gru_cell_forward(bwd, step, Tensor::zeros({3})).h;
  for (std::size_t d = 0; d < 3; ++d) CHECK(single[d] == doctest::Approx(hf[d] + hb[d]).epsilon(1e-14));
  CHECK_THROWS_AS(bigru_forward(fwd, GruParams::zeros(2, 4), xs), ShapeError);
}

TEST_CASE("attention") {
  Rng rng(21);
  AttentionParams p = AttentionParams::init(3, 2, rng);
  const Tensor h1 = fibermon::testing::random_tensor({1, 3}, rng);
  const AttentionResult single = attention_forward(p, h1);
  CHECK(single.alphas[0] == 1.0);
  for (std::size_t d = 0; d < 3; ++d) CHECK(single.context[d] == doctest::Approx(h1[d]).epsilon(1e-14));

  const Tensor same = Tensor::matrix(4, 3, {1, 2, 3, 1, 2, 3, 1, 2, 3, 1, 2, 3});
  const AttentionResult uni = attention_forward(p, same);
  for (double a : uni.alphas.values()) CHECK(a == doctest::Approx(0.25).epsilon(1e-14));
  for (std::size_t d = 0; d < 3; ++d) CHECK(uni.context[d] == doctest::Approx(same[d]).epsilon(1e-14));

  AttentionParams s = AttentionParams::zeros(1, 1);
  s.w_h[0] = 1.0;
  s.w[0] = 1.0;
  const AttentionResult r = attention_forward(s, Tensor::matrix(2, 1, {1.0, 2.0}));
  const double a1 = 1.0 / (1.0 + std::exp(std::tanh(2.0) - std::tanh(1.0)));
  CHECK(r.alphas[0] == doctest::Approx(a1).epsilon(1e-14));
  CHECK(r.alphas[1] == doctest::Approx(1.0 - a1).epsilon(1e-14));
  CHECK(r.context[0] == doctest::Approx(a1 + 2.0 * (1.0 - a1)).epsilon(1e-14));
  // Published hand values, which carry rounding in the sixth decimal.
  CHECK(std::abs(r.alphas[0] - 0.449561) < 1e-5);
  CHECK(std::abs(r.context[0] - 1.550439) < 1e-5);
}

TEST_CASE("attention weights are distributions") {
  Rng rng(2);
  for (std::size_t k = 0; k < kInstances; ++k) {
    AttentionParams p = AttentionParams::zeros(4, 3);
    fibermon::testing::randomize(p, rng, 3.0);
    const AttentionResult r = attention_forward(p, fibermon::testing::random_tensor({7, 4}, rng, 2.0));
    double sum = 0.0;
    for (double a : r.alphas.values()) {
      CHECK(a >= 0.0);
      sum += a;
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("dense") {
  const DenseParams zero = DenseParams::zeros(2, 3);
  const Tensor y0 = dense_forward(zero, Tensor::vector({1.0, -4.0}), Activation::relu);
  for (double v : y0.values()) CHECK(v == 0.0);

  DenseParams id = DenseParams::zeros(3, 3);
  for (std::size_t i = 0; i < 3; ++i) id.weight.at(i, i) = 1.0;
  const Tensor x = Tensor::vector({0.3, -1.2, 7.0});
  CHECK(dense_forward(id, x, Activation::identity) == x);

  DenseParams p = DenseParams::zeros(2, 1);
  p.weight = Tensor::matrix(1, 2, {1.0, -1.0});
  p.bias = Tensor::vector({0.5});
  CHECK(dense_forward(p, Tensor::vector({2.0, 1.0}), Activation::relu)[0] == 1.5);
  CHECK_THROWS_AS(dense_forward(p, Tensor::vector({1.0}), Activation::relu), ShapeError);
}

TEST_CASE("dense identity backward is the outer product") {
  Rng rng(4);
  DenseParams p = DenseParams::init(3, 2, rng);
  const Matrix x = fibermon::testing::random_matrix(3, 1, rng);
  const Matrix dy = fibermon::testing::random_matrix(2, 1, rng);
  DenseCache cache;
  dense_forward(p, x, Activation::identity, &cache);
  DenseParams g = DenseParams::zeros(3, 2);
  dense_backward(p, cache, dy, g);
  const Matrix outer = dy * x.transpose();
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(g.weight.at(r, c) == doctest::Approx(outer(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))));
    }
  }
}

TEST_CASE("losses") {
  const Tensor a = Tensor::vector({1.0, 2.0});
  CHECK(mse_loss(a, a) == 0.0);
  CHECK(mse_loss(a, Tensor::vector({0.0, 0.0})) == 5.0);
  CHECK(mse_loss(Tensor::vector({0.5}), Tensor::vector({0.25})) == 0.0625);
  const Tensor g0 = mse_loss_backward(a, a);
  for (double g : g0.values()) CHECK(g == 0.0);
  CHECK_THROWS_AS(mse_loss(a, Tensor::vector({1.0})), ShapeError);

  CHECK(cross_entropy_loss(Tensor::vector({0.0, 1.0, 0.0}), 1) == 0.0);
  CHECK(cross_entropy_loss(Tensor::vector({0.5, 0.5}), 0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(cross_entropy_loss(Tensor::vector({0.25, 0.75}), 1) == doctest::Approx(-std::log(0.75)).epsilon(1e-14));
  CHECK(cross_entropy_loss(Tensor::vector({1.0, 0.0}), 1) == doctest::Approx(-std::log(1e-12)));
  CHECK_THROWS_AS(cross_entropy_loss(Tensor::vector({0.5, 0.5}), 2), ContractError);
  CHECK_THROWS_AS(cross_entropy_loss(Tensor::vector({0.5, 0.6}), 0), ContractError);

  CHECK(combined_loss(0.3, 0.2, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(combined_loss(0.3, 0.2, 1.0, 0.0) == 0.3);
  CHECK(combined_loss(1.0, 4.0, 2.0, 0.5) == 4.0);
  CHECK_THROWS_AS(combined_loss(1.0, 1.0, -0.1, 1.0), ContractError);
  CHECK_THROWS_AS(combined_loss(1.0, 1.0, 1.0, -1.0), ContractError);
}

TEST_CASE("batched losses average per-sequence sums") {
  Matrix target(1, 4);
  target << 1.0, 2.0, 0.0, 0.0;  // steps 0,1 of samples 0,1 (batch 2)
  const Matrix pred = Matrix::Zero(1, 4);
  // sample 0 = {1, 0}, sample 1 = {2, 0}
  CHECK(mse_batch(target, pred, 2) == doctest::Approx((1.0 + 4.0) / 2.0));
  Matrix probs(2, 2);
  probs << 0.5, 0.25, 0.5, 0.75;
  CHECK(cross_entropy_batch(probs, {0, 1}) == doctest::Approx((std::log(2.0) - std::log(0.75)) / 2.0));
}

TEST_CASE("adam") {
  SUBCASE("zero gradient leaves parameters unchanged") {
    AdamState s;
    Tensor p = Tensor::vector({0.3, -0.7});
    const Tensor before = p;
    adam_step(s, p, Tensor::zeros({2}));
    CHECK(p == before);
    CHECK(s.step_count == 1);
  }
  SUBCASE("first step moves by the learning rate against the gradient") {
    AdamState s;
    Tensor p = Tensor::vector({0.3, -0.7, 2.0});
    const Tensor g = Tensor::vector({0.5, -2.0, 1e-3});
    adam_step(s, p, g);
    CHECK(std::abs(p[0] - (0.3 - 1e-3)) < 1e-10);
    CHECK(std::abs(p[1] - (-0.7 + 1e-3)) < 1e-10);
    CHECK(std::abs(p[2] - (2.0 - 1e-3)) < 1e-8);
  }
  SUBCASE("state carries across calls") {
    AdamState two;
    Tensor p2 = Tensor::vector({1.0});
    adam_step(two, p2, Tensor::vector({0.4}));
    adam_step(two, p2, Tensor::vector({-0.1}));
    AdamState one;
    one.config.learning_rate = 2e-3;
    Tensor p1 = Tensor::vector({1.0});
    adam_step(one, p1, Tensor::vector({0.4}));
    CHECK(two.step_count == 2);
    CHECK(one.step_count == 1);
    CHECK(two.first_moment[0][0] != one.first_moment[0][0]);
    CHECK(p2[0] != p1[0]);

    // Reference recurrence written out for the second call.
    const double m = 0.9 * 0.04 + 0.1 * -0.1;
    const double v = 0.999 * 0.001 * 0.16 + 0.001 * 0.01;
    const double m_hat = m / (1.0 - 0.81);
    const double v_hat = v / (1.0 - 0.999 * 0.999);
    const double expected = 1.0 - 1e-3 * 0.4 / (0.4 + 1e-8) - 1e-3 * m_hat / (std::sqrt(v_hat) + 1e-8);
    CHECK(p2[0] == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("errors") {
    AdamState s;
    Tensor p = Tensor::vector({1.0});
    CHECK_THROWS_AS(adam_step(s, p, Tensor::vector({1.0, 2.0})), ShapeError);
    AdamState bad;
    bad.config.beta1 = 1.0;
    CHECK_THROWS_AS(adam_step(bad, p, Tensor::vector({1.0})), ConfigError);
  }
}

TEST_CASE("ops are pure") {
  Rng rng(77);
  const GruParams p = GruParams::init(2, 3, rng);
  const Tensor xs = fibermon::testing::random_tensor({6, 2}, rng);
  CHECK(gru_sequence_forward(p, xs).storage() == gru_sequence_forward(p, xs).storage());
  const GruParams q = GruParams::init(2, 3, rng);
  CHECK(bigru_forward(p, q, xs).storage() == bigru_forward(p, q, xs).storage());
  AttentionParams a = AttentionParams::init(2, 2, rng);
  CHECK(attention_forward(a, xs).context.storage() == attention_forward(a, xs).context.storage());
}

TEST_CASE("initialization bounds") {
  Rng rng(1);
  const GruParams p = GruParams::init(4, 9, rng);
  for (double v : p.w_z.values()) CHECK(std::abs(v) <= 1.0 / 2.0);
  for (double v : p.u_h.values()) CHECK(std::abs(v) <= 1.0 / 3.0);
  for (double v : p.b_r.values()) CHECK(v == 0.0);
  Rng r1(9), r2(9);
  CHECK(GruParams::init(3, 3, r1) == GruParams::init(3, 3, r2));
}

TEST_CASE("analytic gradients match finite differences") {
  for (const auto& suite : fibermon::testing::gradient_suites()) {
    for (std::size_t k = 0; k < kInstances; ++k) {
      const GradCheck c = suite.run(1000 + k);
      INFO(suite.name, " instance ", k, " worst ", c.worst);
      CHECK(c.checked > 0);
      CHECK(c.max_rel_error < fibermon::testing::kMaxRelError);
    }
  }
}
