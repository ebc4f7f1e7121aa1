#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "lzsc/lzsc_block.hpp"
#include "lzsc/training.hpp"

namespace lzsc::cli {

namespace fs = std::filesystem;

/// Bad flags, paths or input files; mapped to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FuseOptions {
  fs::path m1, m2, weights, out;
  std::string color = "gray";
  std::optional<fs::path> trace;
  bool resize_to_min = false;
};

struct DecomposeOptions {
  fs::path fused, weights, out;
};

struct TrainOptions {
  fs::path data, out;
  std::string stage = "both";
  std::optional<fs::path> init;
  bool from_scratch = false;
  NetworkScale scale;
  TrainConfig config = TrainConfig::desk();
  std::optional<double> lr_stage2;  // defaults to config.lr
  long checkpoint_every = 0;
};

struct FeaturesOptions {
  fs::path m1, m2, weights, out;
};

struct MetricsOptions {
  fs::path fused, src1, src2;
};

struct SolveOptions {
  std::string mode;
  std::string spec;  // JSON text or a path to a JSON file
};

struct InitOptions {
  fs::path out;
  NetworkScale scale;
  std::uint64_t seed = 0;
};

struct SynthOptions {
  fs::path out;
  std::size_t count = 8;
  std::size_t size = 64;
  std::uint64_t seed = 0;
  double noise = 0.01;
};

int cmd_fuse(const FuseOptions& o);
int cmd_decompose(const DecomposeOptions& o);
int cmd_train(const TrainOptions& o);
int cmd_features(const FeaturesOptions& o);
int cmd_metrics(const MetricsOptions& o);
int cmd_solve(const SolveOptions& o);
int cmd_init(const InitOptions& o);
int cmd_synth(const SynthOptions& o);

}  // namespace lzsc::cli
