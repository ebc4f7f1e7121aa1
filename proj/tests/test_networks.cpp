#include <doctest.h>

#include <filesystem>

#include "lzsc/error.hpp"
#include "lzsc/fnet.hpp"
#include "lzsc/ifnet.hpp"
#include "lzsc/lzsc_block.hpp"
#include "lzsc/parameters.hpp"
#include "lzsc/thresholding.hpp"
#include "oracles.hpp"

using namespace lzsc;

TEST_CASE("softplus helpers") {
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(softplus(50.0) == doctest::Approx(50.0));
  CHECK(softplus(-800.0) >= 0.0);
  CHECK(logistic(0.0) == 0.5);
  for (double y : {1e-6, 0.1, 1.0, 30.0}) CHECK(softplus(softplus_inverse(y)) == doctest::Approx(y).epsilon(1e-10));
}

TEST_CASE("schedule") {
  const ScheduleParams s{0.3, -1.2, -0.4, 0.7};
  CHECK(theta_k(s, 0) == softplus(-1.2));
  CHECK(rho_k(s, 0) == 0.0);
  for (std::size_t k = 1; k < 8; ++k) {
    CHECK(theta_k(s, k) < theta_k(s, k - 1));
    CHECK(theta_k(s, k) > 0.0);
    CHECK(rho_k(s, k) >= rho_k(s, k - 1));
    CHECK(rho_k(s, k) < 1.0);
  }
  const ScheduleParams t = ScheduleParams::from_targets(0.1, 0.08, 0.2);
  CHECK(theta_k(t, 0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(theta_k(t, 1) == doctest::Approx(0.08).epsilon(1e-12));
  CHECK(rho_k(t, 1) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK_NOTHROW(validate_schedule(t, 8));
}

TEST_CASE("schedule partials match finite differences") {
  ScheduleParams s{0.3, -1.2, -0.4, 0.7};
  for (std::size_t k = 0; k < 6; ++k) {
    const ScheduleGrad g = schedule_partials(s, k);
    const double h = 1e-6;
    auto th = [&] { return theta_k(s, k); };
    auto rh = [&] { return rho_k(s, k); };
    CHECK(oracle::relative_error(oracle::finite_difference(s.w_theta_raw, th, h).central, g.w_theta_raw, 1e-7) < 1e-6);
    CHECK(oracle::relative_error(oracle::finite_difference(s.b_theta, th, h).central, g.b_theta, 1e-7) < 1e-6);
    CHECK(oracle::relative_error(oracle::finite_difference(s.w_rho_raw, rh, h).central, g.w_rho_raw, 1e-7) < 1e-6);
    CHECK(oracle::relative_error(oracle::finite_difference(s.b_rho, rh, h).central, g.b_rho, 1e-7) < 1e-6);
  }
}

TEST_CASE("iteration module") {
  std::mt19937_64 rng(1);
  const LzscBlockParams p = LzscBlockParams::random(1, 4, 3, 2, rng);
  const IterationModuleParams& m = p.modules[0];
  const Tensor input = oracle::random_tensor(8, 8, 1, rng, 0.0, 1.0);
  const Tensor zero(8, 8, 4);
  SUBCASE("zero state reduces to thresholded injection") {
    const Tensor out = im_forward(zero, zero, input, m, 0.05, 0.3);
    CHECK(out == sigmoidal_threshold(conv2d_same(input, m.w_e), {kLzscAlpha, kLzscGamma, 0.05}));
    CHECK(max_abs_diff(out, sigmoidal_threshold(oracle::conv(input, m.w_e), {kLzscAlpha, kLzscGamma, 0.05})) < 1e-12);
  }
  SUBCASE("rho = 0 ignores the older state") {
    const Tensor uk = oracle::random_tensor(8, 8, 4, rng);
    const Tensor a = im_forward(uk, oracle::random_tensor(8, 8, 4, rng), input, m, 0.05, 0.0);
    const Tensor b = im_forward(uk, oracle::random_tensor(8, 8, 4, rng), input, m, 0.05, 0.0);
    CHECK(a == b);
  }
  SUBCASE("matches the update written out with the oracle conv") {
    const Tensor uk = oracle::random_tensor(8, 8, 4, rng), ukm1 = oracle::random_tensor(8, 8, 4, rng);
    const double rho = 0.35, theta = 0.2;
    const Tensor pre = (1 + rho) * (uk - oracle::conv(oracle::conv(uk, m.w_d), m.w_u)) -
                       rho * (ukm1 - oracle::conv(oracle::conv(ukm1, m.w_d_prev), m.w_u_prev)) +
                       oracle::conv(input, m.w_e);
    const Tensor expect = sigmoidal_threshold(pre, {kLzscAlpha, kLzscGamma, theta});
    CHECK(max_abs_diff(im_forward(uk, ukm1, input, m, theta, rho), expect) < 1e-12);
  }
  CHECK_THROWS_AS(im_forward(Tensor(8, 8, 3), zero, input, m, 0.05, 0.3), ContractViolation);
}

TEST_CASE("lzsc block") {
  std::mt19937_64 rng(2);
  const LzscBlockParams p = LzscBlockParams::random(2, 4, 3, 3, rng);
  CHECK(max_abs(lzsc_forward(Tensor(6, 6, 2), p)) == 0.0);
  const Tensor input = oracle::random_tensor(6, 6, 2, rng, 0.0, 1.0);
  const LzscTrace t = lzsc_forward_traced(input, p);
  CHECK(t.states.size() == 3);
  CHECK(t.output == lzsc_forward(input, p));
  CHECK(t.output == t.states.back());
  // unrolled by hand
  Tensor prev(6, 6, 4), cur(6, 6, 4);
  for (std::size_t k = 0; k < 3; ++k) {
    Tensor next = im_forward(cur, prev, input, p.modules[k], theta_k(p.schedule, k), rho_k(p.schedule, k));
    prev = std::move(cur);
    cur = std::move(next);
  }
  CHECK(cur == t.output);
  CHECK_THROWS_AS(lzsc_forward(Tensor(6, 6, 1), p), ContractViolation);
}

TEST_CASE("block validation") {
  std::mt19937_64 rng(3);
  LzscBlockParams p = LzscBlockParams::random(1, 4, 3, 2, rng);
  CHECK_NOTHROW(p.validate());
  p.modules[1].w_d = ConvKernel({1, 4, 5, 5});
  CHECK_THROWS_AS(p.validate(), ContractViolation);
}

TEST_CASE("fnet") {
  std::mt19937_64 rng(4);
  const FNetParams p = FNetParams::random({4, 3, 2}, rng);
  CHECK(p.scale() == NetworkScale{4, 3, 2});
  CHECK(max_abs(fnet_forward(Tensor(8, 8, 1), Tensor(8, 8, 1), p)) == 0.0);
  const Tensor i1 = oracle::random_tensor(8, 8, 1, rng, 0.0, 1.0), i2 = oracle::random_tensor(8, 8, 1, rng, 0.0, 1.0);
  const FusionTrace t = fnet_forward_traced(i1, i2, p);
  CHECK(t.fused == fnet_forward(i1, i2, p));
  CHECK(t.fused == t.part_common + t.part_u1 + t.part_u2);
  // assembled from the block outputs
  const Tensor u1 = lzsc_forward(i1, p.block_u1), u2 = lzsc_forward(i2, p.block_u2);
  CHECK(u1 == t.u1);
  const Tensor c = lzsc_forward(channel_concat(i1 - oracle::conv(u1, p.d_u1), i2 - oracle::conv(u2, p.d_u2)), p.block_c);
  CHECK(max_abs_diff(c, t.c) < 1e-12);
  CHECK_THROWS_AS(fnet_forward(i1, Tensor(8, 7, 1), p), ContractViolation);
}

TEST_CASE("feature sparsity and dumps") {
  std::mt19937_64 rng(5);
  const FNetParams p = FNetParams::random({4, 3, 2}, rng);
  const FusionTrace zero = fnet_forward_traced(Tensor(8, 8, 1), Tensor(8, 8, 1), p);
  const FeatureSparsity s = feature_sparsity(zero);
  CHECK(s.u1 == 1.0);
  CHECK(s.c == 1.0);
  const auto dir = std::filesystem::temp_directory_path() / "lzsc_test_dump";
  std::filesystem::remove_all(dir);
  const auto files = dump_intermediates(zero, dir);
  CHECK(files.size() == 14);
  for (const auto& f : files) CHECK(std::filesystem::exists(f));
  std::filesystem::remove_all(dir);
}

TEST_CASE("ifnet") {
  std::mt19937_64 rng(6);
  const IFNetParams p = IFNetParams::random({4, 3, 2}, rng);
  const InverseFusion z = ifnet_forward(Tensor(8, 8, 1), p);
  CHECK(max_abs(z.i1) == 0.0);
  CHECK(max_abs(z.i2) == 0.0);
  const Tensor f = oracle::random_tensor(8, 8, 1, rng, 0.0, 1.0);
  const InverseFusion r = ifnet_forward(f, p);
  CHECK(r.i1.shape() == f.shape());
  CHECK(max_abs_diff(r.i1, oracle::conv(lzsc_forward(f, p.block_x1), p.d_x1)) < 1e-12);
  CHECK(max_abs_diff(r.i2, oracle::conv(lzsc_forward(f, p.block_x2), p.d_x2)) < 1e-12);
}

TEST_CASE("parameter enumeration") {
  std::mt19937_64 rng(7);
  FNetParams p = FNetParams::random({4, 3, 2}, rng);
  const auto refs = parameters(std::as_const(p));
  CHECK(refs.front().name == "fnet.block_u1.im0.W_u");
  CHECK(refs.front().dims == std::vector<std::size_t>{4, 1, 3, 3});
  // every scalar exactly once
  std::size_t total = 0;
  for (const auto& r : refs) total += r.values.size();
  CHECK(total == parameter_count(refs));
  FNetParams z = zeros_like(p);
  accumulate(z, p, 2.0);
  const auto zr = parameters(std::as_const(z));
  for (std::size_t i = 0; i < refs.size(); ++i)
    for (std::size_t j = 0; j < refs[i].values.size(); ++j) CHECK(zr[i].values[j] == 2.0 * refs[i].values[j]);
}
