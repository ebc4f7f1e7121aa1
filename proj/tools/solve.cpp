#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "commands.hpp"
#include "lzsc/conv.hpp"
#include "lzsc/reference_solvers.hpp"
#include "lzsc/synthetic.hpp"

namespace lzsc::cli {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& pointer, const std::string& why) {
  throw UsageError("invalid spec at " + (pointer.empty() ? std::string("/") : pointer) + ": " + why);
}

const json* field(const json& obj, const std::string& key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number(const json& obj, const std::string& key, const std::string& base, std::optional<double> fallback,
              double lo = -1e300, bool lo_exclusive = false) {
  const json* v = field(obj, key);
  const std::string ptr = base + "/" + key;
  if (!v) {
    if (!fallback) bad(ptr, "required number is missing");
    return *fallback;
  }
  if (!v->is_number()) bad(ptr, "must be a number");
  const double x = v->get<double>();
  if (!std::isfinite(x)) bad(ptr, "must be finite");
  if (lo_exclusive ? !(x > lo) : !(x >= lo)) bad(ptr, std::string("must be ") + (lo_exclusive ? "> " : ">= ") +
                                                          std::to_string(lo));
  return x;
}

std::size_t count(const json& obj, const std::string& key, const std::string& base, std::optional<std::size_t> fallback,
                  std::size_t lo, std::size_t hi) {
  const json* v = field(obj, key);
  const std::string ptr = base + "/" + key;
  if (!v) {
    if (!fallback) bad(ptr, "required integer is missing");
    return *fallback;
  }
  if (!v->is_number_integer() || v->get<long long>() < static_cast<long long>(lo) ||
      v->get<long long>() > static_cast<long long>(hi))
    bad(ptr, "must be an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return v->get<std::size_t>();
}

json parse_spec(const std::string& text) {
  std::string body = text;
  const auto first = body.find_first_not_of(" \t\r\n");
  if (first == std::string::npos || (body[first] != '{' && body[first] != '[')) {
    std::ifstream in(text);
    if (!in) throw UsageError("spec is neither JSON nor a readable file: " + text);
    std::ostringstream ss;
    ss << in.rdbuf();
    body = ss.str();
  }
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) bad("", "spec must be a JSON object");
  return j;
}

json support_json(const std::vector<std::size_t>& s) { return json(s); }

struct DenseProblem {
  DenseDictionary d;
  Eigen::VectorXd x;
  std::optional<std::vector<std::size_t>> planted;
};

DenseProblem dense_problem(const json& j) {
  DenseProblem p;
  std::mt19937_64 rng(count(j, "seed", "", 0, 0, std::numeric_limits<std::uint32_t>::max()));
  std::normal_distribution<double> gauss(0.0, 1.0);
  if (const json* dict = field(j, "dictionary")) {
    if (!dict->is_array() || dict->empty()) bad("/dictionary", "must be a non-empty array of rows");
    const std::size_t n = dict->size();
    const std::size_t m = (*dict)[0].is_array() ? (*dict)[0].size() : 0;
    if (m == 0) bad("/dictionary/0", "must be a non-empty array of numbers");
    p.d.atoms.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    for (std::size_t r = 0; r < n; ++r) {
      const json& row = (*dict)[r];
      const std::string ptr = "/dictionary/" + std::to_string(r);
      if (!row.is_array() || row.size() != m) bad(ptr, "must be an array of " + std::to_string(m) + " numbers");
      for (std::size_t c = 0; c < m; ++c) {
        if (!row[c].is_number()) bad(ptr + "/" + std::to_string(c), "must be a number");
        p.d.atoms(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
      }
    }
  } else {
    const std::size_t n = count(j, "n", "", std::nullopt, 1, 4096);
    const std::size_t m = count(j, "m", "", std::nullopt, 1, 4096);
    p.d.atoms.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    for (Eigen::Index c = 0; c < p.d.atoms.cols(); ++c) {
      for (Eigen::Index r = 0; r < p.d.atoms.rows(); ++r) p.d.atoms(r, c) = gauss(rng);
      p.d.atoms.col(c).normalize();
    }
  }
  const std::size_t n = p.d.signal_size(), m = p.d.atom_count();
  if (const json* sig = field(j, "signal")) {
    if (!sig->is_array() || sig->size() != n) bad("/signal", "must be an array of " + std::to_string(n) + " numbers");
    p.x.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      if (!(*sig)[i].is_number()) bad("/signal/" + std::to_string(i), "must be a number");
      p.x(static_cast<Eigen::Index>(i)) = (*sig)[i].get<double>();
    }
  } else if (const json* pl = field(j, "planted")) {
    if (!pl->is_object()) bad("/planted", "must be an object");
    const std::size_t k = count(*pl, "sparsity", "/planted", std::nullopt, 1, m);
    const double lo = number(*pl, "amplitude_min", "/planted", 1.0, 0.0, true);
    const double hi = number(*pl, "amplitude_max", "/planted", 2.0, lo);
    const double noise = number(*pl, "noise", "/planted", 0.0, 0.0);
    std::vector<std::size_t> all(m);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    std::vector<std::size_t> support(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(support.begin(), support.end());
    Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    std::uniform_real_distribution<double> amp(lo, hi);
    for (auto s : support) z(static_cast<Eigen::Index>(s)) = (rng() & 1 ? 1.0 : -1.0) * amp(rng);
    p.x = p.d.atoms * z;
    for (Eigen::Index i = 0; i < p.x.size(); ++i) p.x(i) += noise * gauss(rng);
    p.planted = support;
  } else {
    bad("/signal", "either signal or planted is required");
  }
  return p;
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

int solve_dense(const std::string& mode, const json& j) {
  const DenseProblem p = dense_problem(j);
  const std::size_t m = p.d.atom_count();
  const double mu = number(j, "mu", "", 0.99 / spectral_norm_squared(p.d), 0.0, true);
  json out;
  out["mode"] = mode;
  if (p.planted) out["planted_support"] = support_json(*p.planted);
  auto recovered = [&](const std::vector<std::size_t>& s) { return p.planted && s == *p.planted; };

  if (mode == "exhaustive") {
    if (m > kExhaustiveMaxAtoms) bad("/m", "exhaustive search supports at most 20 atoms");
    const double lambda = field(j, "lambda") ? number(j, "lambda", "", std::nullopt, 0.0)
                                             : nihta_lambda(number(j, "theta", "", std::nullopt, 0.0, true), mu);
    const std::size_t max_support =
        count(j, "max_support", "", std::min(kExhaustiveMaxSupport, m), 0, std::min(kExhaustiveMaxSupport, m));
    const DenseSolution s = exhaustive_l0(p.x, p.d, lambda, max_support);
    const auto support = support_of(s.z);
    out["lambda"] = lambda;
    out["objective"] = s.objective;
    out["z"] = vector_json(s.z);
    out["support"] = support_json(support);
    if (p.planted) out["support_recovered"] = recovered(support);
  } else {
    const double theta = number(j, "theta", "", std::nullopt, 0.0, true);
    const std::size_t iters = count(j, "iterations", "", 100, 1, 1000000);
    const IterativeSolution s = nihta_dense(p.x, p.d, theta, mu, iters);
    const double lambda = nihta_lambda(theta, mu);
    const double objective = l0_objective(p.x, p.d, s.z, lambda);
    out["theta"] = theta;
    out["mu"] = mu;
    out["lambda"] = lambda;
    out["iterations"] = s.report.iterations;
    out["objective"] = objective;
    out["objective_trace"] = s.report.objective_trace;
    out["z"] = vector_json(s.z);
    out["support"] = support_json(s.report.final_support);
    if (p.planted) out["support_recovered"] = recovered(s.report.final_support);
    if (m <= kExhaustiveMaxAtoms) {
      const DenseSolution o = exhaustive_l0(p.x, p.d, lambda, std::min(kExhaustiveMaxSupport, m));
      out["oracle"] = {{"objective", o.objective},
                       {"support", support_json(support_of(o.z))},
                       {"dominates", objective >= o.objective - 1e-12 * (1.0 + std::abs(o.objective))}};
    }
  }
  std::cout << out.dump(2) << std::endl;
  return 0;
}

int solve_conv(const std::string& mode, const json& j) {
  const std::size_t size = count(j, "size", "", 32, 8, 2048);
  const std::size_t atoms = count(j, "atoms", "", 4, 1, 256);
  const std::size_t kernel = count(j, "kernel", "", 5, 1, 31);
  if (kernel % 2 == 0) bad("/kernel", "must be odd");
  const double density = number(j, "density", "", 0.02, 0.0, true);
  if (density > 1.0) bad("/density", "must be <= 1");
  const double noise = number(j, "noise", "", 0.0, 0.0);
  const std::size_t seed = count(j, "seed", "", 0, 0, std::numeric_limits<std::uint32_t>::max());
  const double theta = number(j, "theta", "", std::nullopt, 0.0, true);
  const std::size_t iters = count(j, "iterations", "", 50, 1, 100000);

  const CscDataset data = synthetic_csc(1, size, atoms, kernel, density, noise, seed);
  const ConvKernel& dict = data.dictionary;
  const CscSample& sample = data.samples.front();
  const double step =
      number(j, "step", "", 0.99 / operator_norm_squared(dict, Shape{size, size, atoms}), 0.0, true);
  ConvKernel w_u = adjoint_kernel(dict);
  for (double& w : w_u.weights()) w *= step;
  const Tensor z = mode == "ista" ? ista_conv(sample.signal, dict, w_u, theta, iters)
                                  : nihta_conv(sample.signal, dict, w_u, theta, iters);

  std::size_t tp = 0, nz = 0, planted = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const bool a = z[i] != 0.0, b = sample.code[i] != 0.0;
    nz += a;
    planted += b;
    tp += a && b;
  }
  const Tensor residual = sample.signal - conv2d_same(z, dict);
  json out;
  out["mode"] = mode;
  out["theta"] = theta;
  out["step"] = step;
  out["iterations"] = iters;
  if (mode == "ista") {
    // soft thresholding at theta with step s minimises the l1 objective with weight theta / s
    const double lambda = theta / step;
    double l1 = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) l1 += std::abs(z[i]);
    out["lambda"] = lambda;
    out["objective"] = 0.5 * std::pow(l2_norm(residual), 2) + lambda * l1;
  } else {
    const double lambda = nihta_lambda(theta, step);
    out["lambda"] = lambda;
    out["objective"] = conv_l0_objective(sample.signal, dict, z, lambda);
  }
  out["residual_norm"] = l2_norm(residual);
  out["nonzeros"] = nz;
  out["planted_nonzeros"] = planted;
  out["support_precision"] = nz ? static_cast<double>(tp) / static_cast<double>(nz) : 0.0;
  out["support_recall"] = planted ? static_cast<double>(tp) / static_cast<double>(planted) : 0.0;
  std::cout << out.dump(2) << std::endl;
  return 0;
}

}  // namespace

int cmd_solve(const SolveOptions& o) {
  const json spec = parse_spec(o.spec);
  if (o.mode == "exhaustive" || o.mode == "nihta") return solve_dense(o.mode, spec);
  return solve_conv(o.mode, spec);
}

}  // namespace lzsc::cli
