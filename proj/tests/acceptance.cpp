// Acceptance suite. `lzsc_acceptance` runs every criterion; `lzsc_acceptance N`
// runs criterion N only. One PASS/FAIL line per criterion, exit status 1 if
// any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lzsc/adam.hpp"
#include "lzsc/error.hpp"
#include "lzsc/fnet.hpp"
#include "lzsc/ifnet.hpp"
#include "lzsc/lzsc_block.hpp"
#include "lzsc/metrics.hpp"
#include "lzsc/parameters.hpp"
#include "lzsc/reference_solvers.hpp"
#include "lzsc/synthetic.hpp"
#include "lzsc/tape.hpp"
#include "lzsc/thresholding.hpp"
#include "lzsc/training.hpp"
#include "lzsc/weights_io.hpp"
#include "oracles.hpp"

using namespace lzsc;
namespace fs = std::filesystem;

namespace {

// Collects sub-checks of one criterion; the criterion passes iff all do.
struct Report {
  std::vector<std::string> failures;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  template <class T>
  Report& operator<<(const T& v) {
    detail << v;
    return *this;
  }
};

// ---------------------------------------------------------------- 1

void operators(Report& r) {
  constexpr double tol = 1e-9;
  r.check(hard_threshold(0.5, 1.0) == 0.0 && hard_threshold(2.0, 1.0) == 2.0 && hard_threshold(-2.0, 1.0) == -2.0,
          "hard threshold closed forms");
  r.check(soft_threshold(2.0, 1.0) == 1.0 && soft_threshold(-2.0, 1.0) == -1.0 && soft_threshold(0.5, 1.0) == 0.0,
          "soft threshold closed forms");
  const SigmoidalParams p{0.1, 100.0, 1.0};
  const double at2 = (2.0 - 0.1) / (1.0 + std::exp(-100.0));
  double worst = std::abs(sigmoidal_threshold(2.0, p) - at2);
  worst = std::max(worst, std::abs(sigmoidal_threshold(1.0, p) - 0.45));
  worst = std::max(worst, std::abs(sigmoidal_threshold(0.5, p)));
  worst = std::max(worst, std::abs(sigmoidal_threshold(0.0, p)));
  worst = std::max(worst, std::abs(sigmoidal_threshold(-2.0, p) + at2));
  r.check(worst < tol, "sigmoidal closed forms");

  constexpr double limit_bound = 1e-3;
  double soft_gap = 0.0, hard_gap = 0.0;
  std::size_t points = 0;
  for (double theta : {0.25, 0.5, 1.0, 2.0}) {
    for (double x = -4.0; x <= 4.0; x += 1e-3) {
      if (std::abs(std::abs(x) - theta) <= 0.01) continue;
      soft_gap = std::max(soft_gap, std::abs(sigmoidal_threshold(x, {1.0, 1e4, theta}) - soft_threshold(x, theta)));
      hard_gap = std::max(hard_gap, std::abs(sigmoidal_threshold(x, {0.0, 1e4, theta}) - hard_threshold(x, theta)));
      ++points;
    }
  }
  r.check(soft_gap < limit_bound, "gamma=1e4 soft limit");
  r.check(hard_gap < limit_bound, "gamma=1e4 hard limit");
  r << "closed-form err " << worst << ", limit gaps soft " << soft_gap << " hard " << hard_gap << " over " << points
    << " points";
}

// ---------------------------------------------------------------- 2

void schedules(Report& r) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> raw(-6.0, 6.0);
  std::size_t bad_theta = 0, bad_rho = 0;
  for (int draw = 0; draw < 1000; ++draw) {
    const ScheduleParams s{raw(rng), raw(rng), raw(rng), raw(rng)};
    if (rho_k(s, 0) != 0.0) ++bad_rho;
    for (std::size_t k = 0; k < 8; ++k) {
      const double t = theta_k(s, k), rho = rho_k(s, k);
      if (!(t > 0.0) || (k > 0 && !(t < theta_k(s, k - 1)))) ++bad_theta;
      if (!(rho >= 0.0 && rho < 1.0) || (k > 0 && rho < rho_k(s, k - 1))) ++bad_rho;
    }
  }
  r.check(bad_theta == 0, "theta strictly decreasing and positive");
  r.check(bad_rho == 0, "rho^0 = 0, rho in [0,1) non-decreasing");
  r << "1000 draws, theta violations " << bad_theta << ", rho violations " << bad_rho;
}

// ---------------------------------------------------------------- 3

struct FdTally {
  std::size_t checked = 0, skipped = 0, failed = 0;
  double worst = 0.0;
};

// Central differences over every scalar in `params`. A parameter is skipped
// when its one-sided differences disagree, i.e. the step straddles a kink of
// |.| or the threshold clamp.
void fd_sweep(const std::vector<ParamRef>& params, const std::vector<ConstParamRef>& grads,
              const std::function<double()>& loss, FdTally& t) {
  constexpr double h = 1e-6, floor = 1e-5, rel_tol = 1e-3, kink_tol = 1e-3;
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t j = 0; j < params[i].values.size(); ++j) {
      const auto fd = oracle::finite_difference(params[i].values[j], loss, h);
      if (oracle::relative_error(fd.forward, fd.backward, floor) > kink_tol) {
        ++t.skipped;
        continue;
      }
      ++t.checked;
      const double e = oracle::relative_error(fd.central, grads[i].values[j], floor);
      t.worst = std::max(t.worst, e);
      if (e >= rel_tol) ++t.failed;
    }
  }
}

void gradients(Report& r) {
  std::mt19937_64 rng(3);
  double adjoint = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const ConvKernel k = oracle::random_kernel(4, 2, 5, rng);
    const Tensor x = oracle::random_tensor(16, 12, 2, rng), y = oracle::random_tensor(16, 12, 4, rng);
    const double lhs = dot(conv2d_same(x, k), y), rhs = dot(x, conv2d_grad_input(y, k));
    adjoint = std::max(adjoint, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
  }
  r.check(adjoint < 1e-10, "conv adjoint identity");

  const NetworkScale tiny{4, 3, 2};
  FNetParams f = FNetParams::random(tiny, rng);
  IFNetParams g = IFNetParams::random(tiny, rng);
  const ImagePair pair{oracle::random_tensor(16, 16, 1, rng, 0.0, 1.0), oracle::random_tensor(16, 16, 1, rng, 0.0, 1.0)};

  FdTally s1;
  {
    FNetParams gf = zeros_like(f);
    IFNetParams gg = zeros_like(g);
    stage1_loss_and_grad(pair, f, g, &gf, &gg);
    auto loss = [&] { return stage1_loss_and_grad(pair, f, g, nullptr, nullptr).total; };
    fd_sweep(parameters(f), parameters(std::as_const(gf)), loss, s1);
    fd_sweep(parameters(g), parameters(std::as_const(gg)), loss, s1);
  }
  FdTally s2;
  {
    FNetParams gf = zeros_like(f);
    stage2_loss_and_grad(pair, f, {}, &gf);
    auto loss = [&] { return stage2_loss_and_grad(pair, f, {}, nullptr).total; };
    fd_sweep(parameters(f), parameters(std::as_const(gf)), loss, s2);
  }
  for (const auto& [name, t] : {std::pair{"stage1", s1}, std::pair{"stage2", s2}}) {
    const double total = static_cast<double>(t.checked + t.skipped);
    r.check(t.failed == 0, std::string(name) + " relative error < 1e-3");
    r.check(static_cast<double>(t.checked) >= 0.99 * total, std::string(name) + " >= 99% of parameters checked");
    r << name << ": " << t.checked << " checked, " << t.skipped << " skipped, worst rel err " << t.worst << "; ";
  }
  r << "adjoint err " << adjoint;
}

// ---------------------------------------------------------------- 4

DenseDictionary random_dictionary(std::size_t n, std::size_t m, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  DenseDictionary d{Eigen::MatrixXd(n, m)};
  for (Eigen::Index c = 0; c < d.atoms.cols(); ++c) {
    for (Eigen::Index i = 0; i < d.atoms.rows(); ++i) d.atoms(i, c) = g(rng);
    d.atoms.col(c).normalize();
  }
  return d;
}

void oracle_equivalence(Report& r) {
  // below the smallest planted |coefficient| (1.0)
  constexpr double theta = 0.2;
  constexpr std::size_t iterations = 200;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> amp(1.0, 2.0);
  std::size_t dominated = 0, recovered = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const DenseDictionary d = random_dictionary(8, 6, rng);
    std::vector<std::size_t> atoms{0, 1, 2, 3, 4, 5};
    std::shuffle(atoms.begin(), atoms.end(), rng);
    std::vector<std::size_t> planted{atoms[0], atoms[1]};
    std::sort(planted.begin(), planted.end());
    Eigen::VectorXd z = Eigen::VectorXd::Zero(6);
    for (std::size_t a : planted) z(static_cast<Eigen::Index>(a)) = (rng() & 1u ? 1.0 : -1.0) * amp(rng);
    const Eigen::VectorXd x = d.atoms * z;
    const double mu = 0.9 / spectral_norm_squared(d);
    const IterativeSolution it = nihta_dense(x, d, theta, mu, iterations);
    const double best = exhaustive_l0(x, d, nihta_lambda(theta, mu), kExhaustiveMaxSupport).objective;
    bool dom = true;
    for (double o : it.report.objective_trace) dom = dom && best <= o + 1e-12;
    dominated += dom;
    recovered += it.report.final_support == planted;
  }
  r.check(dominated == 100, "exhaustive dominates on every instance");
  r.check(recovered >= 80, "nihta recovers >= 80 planted supports");
  r << "dominated " << dominated << "/100, recovered " << recovered << "/100";
}

// ---------------------------------------------------------------- 5

struct UnrolledSetup {
  static constexpr std::size_t atoms = 8, kernel = 5, size = 32, depth = 4;
  static constexpr double density = 0.02, noise = 0.01, lambda = 0.05;
  static constexpr std::size_t train = 200, held_out = 50;
  static constexpr long steps = 2000;
  static constexpr std::size_t batch = 8;
  static constexpr double lr = 3e-3;
};

double mean_objective(const std::vector<CscSample>& set, const ConvKernel& dict,
                      const std::function<Tensor(const Tensor&)>& solve) {
  double s = 0.0;
  for (const auto& c : set) s += conv_l0_objective(c.signal, dict, solve(c.signal), UnrolledSetup::lambda);
  return s / static_cast<double>(set.size());
}

void unrolled_vs_classical(Report& r) {
  using S = UnrolledSetup;
  const CscDataset data = synthetic_csc(S::train, S::size, S::atoms, S::kernel, S::density, S::noise, 5);
  const ConvKernel& dict = data.dictionary;
  const std::vector<CscSample> held =
      synthetic_csc_samples(dict, S::held_out, S::size, S::density, S::noise, 55);
  const double step = 0.99 / operator_norm_squared(dict, Shape{S::size, S::size, S::atoms});
  ConvKernel w_u = adjoint_kernel(dict);
  for (double& w : w_u.weights()) w *= step;

  // ISTA at the same depth, theta tuned on the training signals.
  double best_theta = 0.0, best_train = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 30; ++i) {
    const double theta = 0.002 * std::pow(250.0, i / 30.0);
    const double o = mean_objective(data.samples, dict, [&](const Tensor& x) { return ista_conv(x, dict, w_u, theta, S::depth); });
    if (o < best_train) best_train = o, best_theta = theta;
  }
  const double ista =
      mean_objective(held, dict, [&](const Tensor& x) { return ista_conv(x, dict, w_u, best_theta, S::depth); });

  // Block initialised as unrolled NIHTA at the objective's lambda, then
  // trained on the planted codes.
  const double theta0 = std::sqrt(2.0 * S::lambda * step);
  LzscBlockParams block =
      LzscBlockParams::from_dictionary(dict, step, S::depth, ScheduleParams::from_targets(theta0, 0.9 * theta0, 0.2));
  const auto block_solve = [&](const Tensor& x) { return lzsc_forward(x, block); };
  const double untrained = mean_objective(held, dict, block_solve);

  std::vector<ParamRef> refs = parameters(block, "block");
  AdamState adam(parameter_count(parameters(std::as_const(block), "block")), AdamConfig{S::lr});
  std::mt19937_64 rng(15);
  std::uniform_int_distribution<std::size_t> pick(0, S::train - 1);
  for (long it = 0; it < S::steps; ++it) {
    LzscBlockParams grad = zeros_like(block);
    for (std::size_t b = 0; b < S::batch; ++b) {
      const CscSample& c = data.samples[pick(rng)];
      GradientTape tape;
      const TapedBlock out = tape_lzsc_block(tape, tape.constant(c.signal), block, &grad);
      tape.backward(tape.mean_squared_diff(out.output, tape.constant(c.code)));
    }
    accumulate(grad, grad, 1.0 / static_cast<double>(S::batch) - 1.0);
    adam.step(refs, parameters(std::as_const(grad), "block"));
  }
  const double trained = mean_objective(held, dict, block_solve);

  r.check(trained < ista, "trained block below tuned ista");
  r << "held-out mean objective: block " << trained << " (untrained " << untrained << "), ista " << ista
    << " at theta " << best_theta << ", lambda " << S::lambda << ", " << S::depth << " iterations";
}

// ---------------------------------------------------------------- 6

struct DeskRun {
  static constexpr std::size_t pairs = 32, size = 64, held_out = 8;
  static constexpr long iterations = 2000;
  static constexpr std::size_t crop = 32, batch = 4;
  static constexpr double lr_stage1 = 1e-4, lr_stage2 = 1e-3;
};

double roundtrip_l1(const std::vector<ImagePair>& d, const FNetParams& f, const IFNetParams& g) {
  double s = 0.0;
  for (const auto& p : d) {
    const InverseFusion inv = ifnet_forward(fnet_forward(p.m1, p.m2, f), g);
    s += mean_abs_diff(inv.i1, p.m1) + mean_abs_diff(inv.i2, p.m2);
  }
  return s / static_cast<double>(d.size());
}

std::pair<double, double> held_out_scores(const std::vector<ImagePair>& d, const FNetParams& f) {
  double s = 0.0, q = 0.0;
  for (const auto& p : d) {
    const Tensor fused = fnet_forward(p.m1, p.m2, f);
    s += ssim(fused, elementwise_max(p.m1, p.m2));
    q += qabf(p.m1, p.m2, fused);
  }
  const auto n = static_cast<double>(d.size());
  return {s / n, q / n};
}

void two_stage(Report& r) {
  using D = DeskRun;
  const auto t0 = std::chrono::steady_clock::now();
  const auto data = synthetic_pairs(D::pairs, D::size, D::size, 1);
  const auto held = synthetic_pairs(D::held_out, D::size, D::size, 99);
  std::mt19937_64 rng(3);
  const FNetParams f0 = FNetParams::random(NetworkScale::desk(), rng);
  const IFNetParams g0 = IFNetParams::random(NetworkScale::desk(), rng);

  TrainConfig c1 = TrainConfig::desk();
  c1.iterations = D::iterations;
  c1.crop_size = D::crop;
  c1.batch_size = D::batch;
  c1.lr = D::lr_stage1;
  TrainConfig c2 = c1;
  c2.lr = D::lr_stage2;

  const double rt0 = roundtrip_l1(held, f0, g0);
  const Stage1Result s1 = train_stage1(data, f0, g0, c1);
  const std::size_t n = s1.log.rows.size();
  const double first = s1.log.mean(1, 0, 100), last = s1.log.mean(1, n - 100, 100);
  const double rt1 = roundtrip_l1(held, s1.fnet, s1.ifnet);
  const Stage2Result s2 = train_stage2(data, s1.fnet, c2);
  const auto [ssim2, qabf2] = held_out_scores(held, s2.fnet);
  const Stage2Result ablation = train_stage2(data, f0, c2);
  const auto [ssim_ab, qabf_ab] = held_out_scores(held, ablation.fnet);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  r.check(last <= 0.3 * first, "stage I last-100 loss <= 0.3 x first-100");
  r.check(rt0 >= 3.0 * rt1, "roundtrip L1 improves >= 3x");
  r.check(ssim2 >= 0.7, "held-out SSIM >= 0.7");
  r.check(qabf2 >= 0.4, "held-out Qabf >= 0.4");
  r.check(ssim_ab < ssim2, "ablation without stage I has lower SSIM");
  r.check(secs < 1200.0, "runtime < 20 min");
  r << "stage I loss " << first << " -> " << last << " (ratio " << last / first << "), roundtrip " << rt0 << " -> "
    << rt1 << "; held-out SSIM " << ssim2 << " Qabf " << qabf2 << "; ablation SSIM " << ssim_ab << " Qabf " << qabf_ab
    << "; " << secs << " s";
}

// ---------------------------------------------------------------- 7

void reconstruction_identity(Report& r) {
  std::mt19937_64 rng(7);
  std::size_t exact = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const FNetParams p = FNetParams::random(NetworkScale::desk(), rng);
    const Tensor i1 = oracle::random_tensor(24, 24, 1, rng, 0.0, 1.0), i2 = oracle::random_tensor(24, 24, 1, rng, 0.0, 1.0);
    const FusionTrace t = fnet_forward_traced(i1, i2, p);
    exact += t.fused == t.part_common + t.part_u1 + t.part_u2 && t.fused == fnet_forward(i1, i2, p);
  }
  r.check(exact == 100, "bitwise identity");
  r << exact << "/100 bitwise equal";
}

// ---------------------------------------------------------------- 8

void metrics_sanity(Report& r) {
  const auto pair = synthetic_pairs(1, 64, 64, 8)[0];
  const Tensor& a = pair.m1;
  r.check(ssim(a, a) == 1.0, "ssim(x,x) = 1");
  const double mi_gap = std::abs(mutual_information(a, a) - entropy(a));
  r.check(mi_gap < 1e-10, "MI(x,x) = H(x)");
  const double self = qabf(a, a, a);
  r.check(std::abs(self - 1.0) < 1e-3, "Qabf(a,a,a) within 1e-3 of 1");

  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  Tensor unit = a;
  for (double& v : unit.values()) v = g(rng);
  double prev_s = 2.0, prev_q = 2.0;
  bool mono = true;
  std::ostringstream sweep;
  for (double sigma : {0.0, 0.02, 0.05, 0.1, 0.2, 0.4}) {
    const Tensor noisy = a + sigma * unit;
    const double s = ssim(a, noisy), q = qabf(a, pair.m2, noisy);
    mono = mono && s < prev_s && q < prev_q;
    prev_s = s;
    prev_q = q;
    sweep << " " << sigma << ":" << s << "/" << q;
  }
  r.check(mono, "SSIM and Qabf strictly decrease with noise");
  r << "MI-H gap " << mi_gap << ", Qabf(a,a,a) " << self << ", sigma:ssim/qabf" << sweep.str();
}

// ---------------------------------------------------------------- 9

bool rejects(const std::vector<std::uint8_t>& bytes, const std::string& needle, std::string& seen) {
  try {
    from_archive(decode_archive(bytes));
  } catch (const FormatError& e) {
    seen = e.what();
    return seen.find(needle) != std::string::npos;
  }
  seen = "accepted";
  return false;
}

void serialization(Report& r) {
  std::mt19937_64 rng(9);
  NetworkWeights w;
  w.fnet = FNetParams::random(NetworkScale::desk(), rng);
  w.ifnet = IFNetParams::random(NetworkScale::desk(), rng);
  const fs::path dir = fs::temp_directory_path() / "lzsc_acceptance_io";
  fs::remove_all(dir);
  fs::create_directories(dir);
  bool identical = true;
  for (DType dt : {DType::f32, DType::f64}) {
    save_weights(w, dir / "a.lzw", dt);
    save_weights(load_weights(dir / "a.lzw"), dir / "b.lzw", dt);
    const auto a = read_archive(dir / "a.lzw"), b = read_archive(dir / "b.lzw");
    identical = identical && encode_archive(a) == encode_archive(b);
  }
  r.check(identical, "save/load/save byte-identical");

  const std::vector<std::uint8_t> good = encode_archive(to_archive(w));
  std::string seen;
  auto bad_magic = good;
  bad_magic[0] = 'X';
  r.check(rejects(bad_magic, "bad magic", seen), "wrong magic: " + seen);
  auto bad_version = good;
  bad_version[4] = 9;
  r.check(rejects(bad_version, "unsupported archive version", seen), "wrong version: " + seen);
  const std::vector<std::uint8_t> truncated(good.begin(), good.begin() + static_cast<long>(good.size() / 2));
  r.check(rejects(truncated, "unexpected EOF at entry", seen), "truncated: " + seen);
  const std::string truncated_msg = seen;

  WeightArchive wrong = to_archive(w);
  for (auto& e : wrong.entries)
    if (e.name == "fnet.G_c") {
      e.dims.back() += 1;
      e.values.resize(e.element_count());
    }
  r.check(rejects(encode_archive(wrong), "fnet.G_c", seen), "shape mismatch names the entry: " + seen);

  WeightArchive broken = to_archive(w);
  for (auto& e : broken.entries)
    if (e.name == "fnet.block_c.schedule.w_rho_raw") e.values[0] = std::numeric_limits<double>::quiet_NaN();
  r.check(rejects(encode_archive(broken), "invariant", seen), "schedule invariant: " + seen);
  fs::remove_all(dir);
  r << "roundtrip identical for f32 and f64; truncated -> \"" << truncated_msg << "\"";
}

// ---------------------------------------------------------------- 10

void determinism(Report& r) {
  const auto data = synthetic_pairs(4, 32, 32, 10);
  auto run = [&] {
    std::mt19937_64 rng(11);
    const FNetParams f = FNetParams::random(NetworkScale::desk(), rng);
    const IFNetParams g = IFNetParams::random(NetworkScale::desk(), rng);
    TrainConfig c = TrainConfig::desk();
    c.iterations = 40;
    c.batch_size = 2;
    c.crop_size = 24;
    c.seed = 12;
    const Stage1Result s1 = train_stage1(data, f, g, c);
    c.seed = 13;
    const Stage2Result s2 = train_stage2(data, s1.fnet, c);
    return std::pair{s1.log.to_csv(), s2.log.to_csv()};
  };
  const auto a = run(), b = run();
  r.check(a.first == b.first, "stage I CSV identical");
  r.check(a.second == b.second, "stage II CSV identical");
  r << "stage I " << a.first.size() << " bytes, stage II " << a.second.size() << " bytes";
}

struct Criterion {
  const char* name;
  void (*run)(Report&);
};

const Criterion kCriteria[] = {
    {"operator correctness", operators},
    {"schedule invariants", schedules},
    {"gradient suite", gradients},
    {"oracle equivalence", oracle_equivalence},
    {"unrolled vs classical", unrolled_vs_classical},
    {"two-stage desk training", two_stage},
    {"reconstruction identity", reconstruction_identity},
    {"metrics sanity", metrics_sanity},
    {"serialization", serialization},
    {"determinism", determinism},
};

}  // namespace

int main(int argc, char** argv) {
  constexpr int count = static_cast<int>(std::size(kCriteria));
  int only = 0;
  if (argc > 1) {
    only = std::atoi(argv[1]);
    if (only < 1 || only > count) {
      std::fprintf(stderr, "usage: %s [1-%d]\n", argv[0], count);
      return 2;
    }
  }
  bool all = true;
  for (int i = 1; i <= count; ++i) {
    if (only && i != only) continue;
    Report r;
    try {
      kCriteria[i - 1].run(r);
    } catch (const std::exception& e) {
      r.failures.push_back(std::string("exception: ") + e.what());
    }
    const bool ok = r.failures.empty();
    all = all && ok;
    std::printf("%s %d %s: %s\n", ok ? "PASS" : "FAIL", i, kCriteria[i - 1].name, r.detail.str().c_str());
    for (const auto& f : r.failures) std::printf("  failed: %s\n", f.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
