#include <doctest.h>

#include "lzsc/error.hpp"
#include "lzsc/fnet.hpp"
#include "lzsc/ifnet.hpp"
#include "lzsc/losses.hpp"
#include "lzsc/parameters.hpp"
#include "lzsc/tape.hpp"
#include "lzsc/training.hpp"
#include "oracles.hpp"

using namespace lzsc;

TEST_CASE("tape records and replays in reverse") {
  std::mt19937_64 rng(1);
  const ConvKernel k = oracle::random_kernel(2, 1, 3, rng);
  ConvKernel gk(k.shape());
  GradientTape tape;
  const auto x = tape.variable(oracle::random_tensor(5, 5, 1, rng));
  const auto y = tape.conv(x, {&k, &gk});
  const auto t = tape.constant(oracle::random_tensor(5, 5, 2, rng));
  const auto loss = tape.mean_squared_diff(y, t);
  CHECK(tape.kind(y) == OpKind::conv);
  CHECK(tape.inputs(loss) == std::vector<GradientTape::Var>{y, t});
  tape.backward(loss);
  const auto& order = tape.replay_order();
  CHECK(order.front() == loss);
  for (std::size_t i = 1; i < order.size(); ++i) CHECK(order[i] < order[i - 1]);
  // d/dk mean (k*x - t)^2 = 2/n * x^T (k*x - t)
  const Tensor r = tape.value(y) - tape.value(t);
  const ConvKernel expect = conv2d_grad_weights(tape.value(x), (2.0 / static_cast<double>(r.size())) * r, k.shape());
  for (std::size_t i = 0; i < k.size(); ++i) CHECK(gk.weights()[i] == doctest::Approx(expect.weights()[i]));
  CHECK(max_abs(tape.grad(x)) > 0.0);
  CHECK_THROWS_AS(tape.backward(y), ContractViolation);
}

TEST_CASE("taped ops match finite differences on their inputs") {
  std::mt19937_64 rng(2);
  Tensor a = oracle::random_tensor(12, 12, 1, rng, 0.1, 0.9);
  const Tensor b = oracle::random_tensor(12, 12, 1, rng, 0.1, 0.9);
  auto build = [&](GradientTape& tape) {
    const auto va = tape.variable(a), vb = tape.constant(b);
    const auto s = tape.ssim(va, vb);
    const auto m = tape.mean_abs_diff(tape.sobel(va), tape.sobel(vb));
    return std::pair{va, tape.linear_combination({{1.0, s}, {0.5, m}, {-2.0, tape.mean_squared_diff(va, vb)}})};
  };
  GradientTape tape;
  const auto [va, loss] = build(tape);
  tape.backward(loss);
  const Tensor g = tape.grad(va);
  for (std::size_t i = 0; i < a.size(); i += 7) {
    const auto fd = oracle::finite_difference(
        a[i],
        [&] {
          GradientTape t2;
          return t2.scalar(build(t2).second);
        },
        1e-6);
    CHECK(oracle::relative_error(fd.central, g[i], 1e-6) < 1e-5);
  }
}

TEST_CASE("ssim gradient matches finite differences") {
  std::mt19937_64 rng(3);
  Tensor x = oracle::random_tensor(16, 16, 1, rng, 0.0, 1.0);
  const Tensor y = oracle::random_tensor(16, 16, 1, rng, 0.0, 1.0);
  const SsimGrad g = ssim_grad(x, y);
  CHECK(g.value == ssim(x, y));
  for (std::size_t i = 0; i < x.size(); i += 5) {
    const auto fd = oracle::finite_difference(x[i], [&] { return ssim(x, y); }, 1e-4);
    CHECK(oracle::relative_error(fd.central, g.d_x[i], 1e-4) < 1e-6);
  }
}

TEST_CASE("ssim values") {
  std::mt19937_64 rng(4);
  const Tensor x = oracle::random_tensor(20, 20, 1, rng, 0.0, 1.0);
  const Tensor y = oracle::random_tensor(20, 20, 1, rng, 0.0, 1.0);
  CHECK(ssim(x, x) == 1.0);
  CHECK(std::abs(ssim(x, y) - ssim(y, x)) < 1e-12);
  Tensor board(16, 16, 1);
  for (std::size_t r = 0; r < 16; ++r)
    for (std::size_t c = 0; c < 16; ++c) board(r, c) = static_cast<double>((r + c) % 2);
  CHECK(ssim(board, Tensor(16, 16, 1, 1.0) - board) < 0.0);
  CHECK_THROWS_AS(ssim(Tensor(10, 20, 1), Tensor(10, 20, 1)), ContractViolation);
}

TEST_CASE("stage one loss") {
  std::mt19937_64 rng(5);
  const Tensor i1 = oracle::random_tensor(16, 16, 1, rng, 0.0, 1.0), i2 = oracle::random_tensor(16, 16, 1, rng, 0.0, 1.0);
  CHECK(loss_stage1(i1, i1, i2, i2).total == 0.0);
  const Tensor j1 = oracle::random_tensor(16, 16, 1, rng, 0.0, 1.0), j2 = oracle::random_tensor(16, 16, 1, rng, 0.0, 1.0);
  CHECK(loss_stage1(j1, i1, j2, i2).total == doctest::Approx(loss_stage1(j2, i2, j1, i1).total).epsilon(1e-14));
  // against the oracle Sobel
  const double expect = mean_abs_diff(j1, i1) + mean_abs_diff(oracle::sobel_magnitude(j1), oracle::sobel_magnitude(i1)) +
                        mean_abs_diff(j2, i2) + mean_abs_diff(oracle::sobel_magnitude(j2), oracle::sobel_magnitude(i2));
  CHECK(loss_stage1(j1, i1, j2, i2).total == doctest::Approx(expect).epsilon(1e-12));
  // constant offset of 0.1 on a zero image: only the 56 edge and 4 corner
  // pixels see a Sobel response (0.4 and 0.6)
  const Tensor zero(16, 16, 1);
  const Tensor offset(16, 16, 1, 0.1);
  const double hand = 0.1 + (56 * 0.4 + 4 * 0.6) / 256.0;
  CHECK(loss_stage1(offset, zero, zero, zero).total == doctest::Approx(hand).epsilon(1e-12));
  CHECK(hand == doctest::Approx(0.196875));
}

TEST_CASE("stage two loss") {
  std::mt19937_64 rng(6);
  const Tensor x = oracle::random_tensor(16, 16, 1, rng, 0.0, 1.0);
  CHECK(loss_stage2(x, x, x, {}).total == 0.0);
  CHECK(loss_stage2(Tensor(16, 16, 1), x, x, {1.0, 0.0, 0.0}).total == doctest::Approx(mean(x)).epsilon(1e-14));
  const Tensor i1 = oracle::random_tensor(16, 16, 1, rng, 0.0, 1.0), i2 = oracle::random_tensor(16, 16, 1, rng, 0.0, 1.0);
  const Tensor f = oracle::random_tensor(16, 16, 1, rng, 0.0, 1.0);
  const auto [w1, w2] = ssim_weights(i1, i2);
  const double g1 = mean(oracle::sobel_magnitude(i1)), g2 = mean(oracle::sobel_magnitude(i2));
  CHECK(w1 == doctest::Approx(g1 / (g1 + g2)));
  CHECK(w1 + w2 == doctest::Approx(1.0));
  const LossWeights beta{20.0, 20.0, 15.0};
  const double expect =
      20.0 * mean_abs_diff(f, elementwise_max(i1, i2)) +
      20.0 * mean_abs_diff(oracle::sobel_magnitude(f),
                           elementwise_max(oracle::sobel_magnitude(i1), oracle::sobel_magnitude(i2))) +
      15.0 * (w1 * (1 - ssim(i1, f)) + w2 * (1 - ssim(i2, f)));
  CHECK(loss_stage2(f, i1, i2, beta).total == doctest::Approx(expect).epsilon(1e-12));
  const auto flat = ssim_weights(Tensor(16, 16, 1), Tensor(16, 16, 1));
  CHECK(flat.first == 0.5);

  // gradient with respect to the fused image
  GradientTape tape;
  const auto vf = tape.variable(f);
  tape.backward(tape_loss_stage2(tape, vf, i1, i2, beta).total);
  const Tensor g = tape.grad(vf);
  Tensor fm = f;
  for (std::size_t i = 0; i < fm.size(); i += 3) {
    const auto fd = oracle::finite_difference(fm[i], [&] { return loss_stage2(fm, i1, i2, beta).total; }, 1e-7);
    if (oracle::relative_error(fd.forward, fd.backward, 1e-6) > 1e-3) continue;  // straddles an |.| kink
    CHECK(oracle::relative_error(fd.central, g[i], 1e-6) < 1e-4);
  }
}

TEST_CASE("taped losses equal the plain losses") {
  std::mt19937_64 rng(7);
  const FNetParams f = FNetParams::random({4, 3, 2}, rng);
  const IFNetParams g = IFNetParams::random({4, 3, 2}, rng);
  const ImagePair pair{oracle::random_tensor(16, 16, 1, rng, 0.0, 1.0), oracle::random_tensor(16, 16, 1, rng, 0.0, 1.0)};
  const Tensor fused = fnet_forward(pair.m1, pair.m2, f);
  const InverseFusion inv = ifnet_forward(fused, g);
  CHECK(stage1_loss_and_grad(pair, f, g, nullptr, nullptr).total == loss_stage1(inv.i1, pair.m1, inv.i2, pair.m2).total);
  CHECK(stage2_loss_and_grad(pair, f, {}, nullptr).total == loss_stage2(fused, pair.m1, pair.m2, {}).total);
}
