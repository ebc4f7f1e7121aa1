#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "lzsc/fnet.hpp"
#include "lzsc/ifnet.hpp"
#include "lzsc/losses.hpp"
#include "lzsc/synthetic.hpp"

namespace lzsc {

enum class Stage { one, two, both };

struct TrainConfig {
  Stage stage = Stage::both;
  long iterations = 20000;
  std::size_t batch_size = 16;
  std::size_t crop_size = 128;
  double lr = 1e-4;
  LossWeights beta;
  std::uint64_t seed = 0;
  /// Worker count for per-element forward/backward (0 = thread_count()).
  /// Results do not depend on it.
  std::size_t threads = 0;

  /// Reduced settings for single-core runs on small synthetic data.
  static TrainConfig desk();
  void validate() const;
};

/// Rows of (iteration, total, components...) with named columns.
struct LossLog {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;  // first value is the iteration

  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
  /// Mean of column `col` over rows [first, first + count).
  double mean(std::size_t col, std::size_t first, std::size_t count) const;
};

/// Called every `every` iterations with the current parameters (ifnet is null
/// in stage II), and once more with the last good parameters before a
/// TrainingError propagates.
struct CheckpointHook {
  long every = 0;
  std::function<void(long iteration, const FNetParams&, const IFNetParams*)> save;
};

/// Loads aligned pairs m1/NAME.ext + m2/NAME.ext (PNG/PGM/PPM) converted to
/// luma. Names present in only one directory are listed in the error.
std::vector<ImagePair> load_pair_directory(const std::filesystem::path& dir);

/// Draws one augmented batch: random pair, random crop of crop_size (clipped
/// to the image), and horizontal/vertical flips applied identically to both
/// images of the pair.
std::vector<ImagePair> sample_batch(const std::vector<ImagePair>& data, std::size_t batch_size, std::size_t crop_size,
                                    std::mt19937_64& rng);

struct Stage1Result {
  FNetParams fnet;
  IFNetParams ifnet;
  LossLog log;  // iteration,total,l1_m1,grad_m1,l1_m2,grad_m2
};

/// Joint training of FNet and IFNet on loss_stage1 of the IFNet
/// reconstructions. Batch gradient is the mean over elements.
Stage1Result train_stage1(const std::vector<ImagePair>& data, FNetParams fnet, IFNetParams ifnet,
                          const TrainConfig& cfg, const CheckpointHook& hook = {});

struct Stage2Result {
  FNetParams fnet;
  LossLog log;  // iteration,total,int,grad,ssim
};

/// FNet-only training on loss_stage2.
Stage2Result train_stage2(const std::vector<ImagePair>& data, FNetParams fnet, const TrainConfig& cfg,
                          const CheckpointHook& hook = {});

/// Loss of one pair; when gradient accumulators are given, the parameter
/// gradients are added into them (a null accumulator freezes that network).
Stage1Loss stage1_loss_and_grad(const ImagePair& pair, const FNetParams& fnet, const IFNetParams& ifnet,
                                FNetParams* fnet_grad, IFNetParams* ifnet_grad);
Stage2Loss stage2_loss_and_grad(const ImagePair& pair, const FNetParams& fnet, const LossWeights& beta,
                                FNetParams* fnet_grad);

}  // namespace lzsc
