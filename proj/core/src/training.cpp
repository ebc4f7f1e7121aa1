#include "lzsc/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "lzsc/adam.hpp"
#include "lzsc/error.hpp"
#include "lzsc/image_io.hpp"
#include "lzsc/parallel.hpp"
#include "lzsc/parameters.hpp"
#include "lzsc/tape.hpp"

namespace lzsc {

TrainConfig TrainConfig::desk() {
  TrainConfig c;
  c.iterations = 2000;
  c.batch_size = 4;
  c.crop_size = 32;
  c.lr = 1e-4;
  return c;
}

void TrainConfig::validate() const {
  require(iterations >= 0, "train: iterations must be >= 0");
  require(batch_size >= 1, "train: batch size must be >= 1");
  require(crop_size >= 11, "train: crop size must be >= 11 (SSIM window)");
  require(lr >= 0.0 && std::isfinite(lr), "train: learning rate must be finite and >= 0");
  require(beta.intensity >= 0 && beta.gradient >= 0 && beta.ssim >= 0, "train: loss weights must be >= 0");
}

std::string LossLog::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out << ',';
      if (i == 0)
        out << static_cast<long>(r[i]);
      else
        out << r[i];
    }
    out << '\n';
  }
  return out.str();
}

void LossLog::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << to_csv();
  if (!out) throw IoError("write failed for " + path.string());
}

double LossLog::mean(std::size_t col, std::size_t first, std::size_t count) const {
  require(first + count <= rows.size() && count > 0, "LossLog::mean: row range out of bounds");
  double s = 0.0;
  for (std::size_t i = first; i < first + count; ++i) s += rows[i].at(col);
  return s / static_cast<double>(count);
}

std::vector<ImagePair> load_pair_directory(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const fs::path d1 = dir / "m1", d2 = dir / "m2";
  if (!fs::is_directory(d1) || !fs::is_directory(d2))
    throw IoError("data directory " + dir.string() + " must contain m1/ and m2/ subdirectories");
  auto list = [](const fs::path& d) {
    std::map<std::string, fs::path> files;
    for (const auto& e : fs::directory_iterator(d)) {
      if (!e.is_regular_file()) continue;
      std::string ext = e.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
      if (ext == ".png" || ext == ".pgm" || ext == ".ppm") files[e.path().stem().string()] = e.path();
    }
    return files;
  };
  const auto f1 = list(d1), f2 = list(d2);
  std::string unpaired;
  for (const auto& [name, _] : f1)
    if (!f2.count(name)) unpaired += " m1/" + name;
  for (const auto& [name, _] : f2)
    if (!f1.count(name)) unpaired += " m2/" + name;
  if (!unpaired.empty()) throw IoError("unpaired images in " + dir.string() + ":" + unpaired);
  if (f1.empty()) throw IoError("no images found in " + d1.string());
  std::vector<ImagePair> out;
  for (const auto& [name, p1] : f1) {
    ImagePair p{to_luma(read_image(p1)), to_luma(read_image(f2.at(name)))};
    if (p.m1.shape() != p.m2.shape())
      throw IoError("pair " + name + " has mismatched sizes " + to_string(p.m1.shape()) + " vs " +
                    to_string(p.m2.shape()));
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<ImagePair> sample_batch(const std::vector<ImagePair>& data, std::size_t batch_size, std::size_t crop_size,
                                    std::mt19937_64& rng) {
  require(!data.empty(), "sample_batch: empty dataset");
  std::vector<ImagePair> batch;
  batch.reserve(batch_size);
  for (std::size_t b = 0; b < batch_size; ++b) {
    const ImagePair& src = data[std::uniform_int_distribution<std::size_t>(0, data.size() - 1)(rng)];
    const std::size_t ch = std::min(crop_size, src.m1.height()), cw = std::min(crop_size, src.m1.width());
    const std::size_t y0 = std::uniform_int_distribution<std::size_t>(0, src.m1.height() - ch)(rng);
    const std::size_t x0 = std::uniform_int_distribution<std::size_t>(0, src.m1.width() - cw)(rng);
    const bool flip_h = std::bernoulli_distribution(0.5)(rng);
    const bool flip_v = std::bernoulli_distribution(0.5)(rng);
    auto augment = [&](const Tensor& t) {
      Tensor c = crop(t, y0, x0, ch, cw);
      if (flip_h) c = flip_horizontal(c);
      if (flip_v) c = flip_vertical(c);
      return c;
    };
    batch.push_back({augment(src.m1), augment(src.m2)});
  }
  return batch;
}

Stage1Loss stage1_loss_and_grad(const ImagePair& pair, const FNetParams& fnet, const IFNetParams& ifnet,
                                FNetParams* fnet_grad, IFNetParams* ifnet_grad) {
  GradientTape tape;
  const auto i1 = tape.constant(pair.m1);
  const auto i2 = tape.constant(pair.m2);
  const TapedFusion f = tape_fnet(tape, i1, i2, fnet, fnet_grad);
  const TapedInverse inv = tape_ifnet(tape, f.fused, ifnet, ifnet_grad);
  const TapedStage1 l = tape_loss_stage1(tape, inv.i1, i1, inv.i2, i2);
  tape.backward(l.total);
  return {tape.scalar(l.total), tape.scalar(l.intensity1), tape.scalar(l.gradient1), tape.scalar(l.intensity2),
          tape.scalar(l.gradient2)};
}

Stage2Loss stage2_loss_and_grad(const ImagePair& pair, const FNetParams& fnet, const LossWeights& beta,
                                FNetParams* fnet_grad) {
  GradientTape tape;
  const TapedFusion f = tape_fnet(tape, tape.constant(pair.m1), tape.constant(pair.m2), fnet, fnet_grad);
  const TapedStage2 l = tape_loss_stage2(tape, f.fused, pair.m1, pair.m2, beta);
  tape.backward(l.total);
  const auto [w1, w2] = ssim_weights(pair.m1, pair.m2);
  return {tape.scalar(l.total), tape.scalar(l.intensity), tape.scalar(l.gradient), tape.scalar(l.ssim), w1, w2};
}

namespace {

template <class Ref>
void append(std::vector<Ref>& dst, std::vector<Ref> src) {
  dst.insert(dst.end(), std::make_move_iterator(src.begin()), std::make_move_iterator(src.end()));
}

template <class Net>
void set_zero(Net& p) {
  for (auto& r : parameters(p))
    for (double& v : r.values) v = 0.0;
}

void check_data(const std::vector<ImagePair>& data) {
  if (data.empty()) throw TrainingError("training dataset is empty", 0);
  for (const auto& p : data)
    require(p.m1.channels() == 1 && p.m1.shape() == p.m2.shape(),
            "train: every pair must hold two equally sized single-channel images");
}

}  // namespace

Stage1Result train_stage1(const std::vector<ImagePair>& data, FNetParams fnet, IFNetParams ifnet,
                          const TrainConfig& cfg, const CheckpointHook& hook) {
  cfg.validate();
  check_data(data);
  fnet.validate();
  ifnet.validate();

  std::vector<ParamRef> refs = parameters(fnet);
  append(refs, parameters(ifnet));
  std::vector<ConstParamRef> crefs;
  for (const auto& r : refs) crefs.push_back({r.name, r.dims, r.values});
  AdamState adam(parameter_count(crefs), AdamConfig{cfg.lr});

  FNetParams fgrad = zeros_like(fnet);
  IFNetParams igrad = zeros_like(ifnet);
  std::vector<ConstParamRef> grefs = parameters(std::as_const(fgrad));
  append(grefs, parameters(std::as_const(igrad)));

  Stage1Result result;
  result.log.columns = {"iteration", "total", "l1_m1", "grad_m1", "l1_m2", "grad_m2"};
  std::mt19937_64 rng(cfg.seed);
  const std::size_t B = cfg.batch_size;
  const double inv_b = 1.0 / static_cast<double>(B);

  for (long it = 1; it <= cfg.iterations; ++it) {
    const auto batch = sample_batch(data, B, cfg.crop_size, rng);
    std::vector<FNetParams> fg(B, zeros_like(fnet));
    std::vector<IFNetParams> ig(B, zeros_like(ifnet));
    std::vector<Stage1Loss> losses(B);
    parallel_for(
        B, [&](std::size_t b) { losses[b] = stage1_loss_and_grad(batch[b], fnet, ifnet, &fg[b], &ig[b]); },
        cfg.threads);

    set_zero(fgrad);
    set_zero(igrad);
    Stage1Loss mean;
    for (std::size_t b = 0; b < B; ++b) {
      accumulate(fgrad, fg[b], inv_b);
      accumulate(igrad, ig[b], inv_b);
      mean.total += losses[b].total * inv_b;
      mean.intensity1 += losses[b].intensity1 * inv_b;
      mean.gradient1 += losses[b].gradient1 * inv_b;
      mean.intensity2 += losses[b].intensity2 * inv_b;
      mean.gradient2 += losses[b].gradient2 * inv_b;
    }
    if (!std::isfinite(mean.total)) {
      if (hook.save) hook.save(it - 1, fnet, &ifnet);
      throw TrainingError("non-finite stage I loss at iteration " + std::to_string(it), it);
    }
    result.log.rows.push_back({static_cast<double>(it), mean.total, mean.intensity1, mean.gradient1, mean.intensity2,
                               mean.gradient2});
    try {
      adam.step(refs, grefs);
    } catch (const TrainingError& e) {
      if (hook.save) hook.save(it - 1, fnet, &ifnet);
      throw TrainingError(std::string(e.what()) + " (iteration " + std::to_string(it) + ")", it);
    }
    if (hook.save && hook.every > 0 && it % hook.every == 0) hook.save(it, fnet, &ifnet);
  }
  result.fnet = std::move(fnet);
  result.ifnet = std::move(ifnet);
  return result;
}

Stage2Result train_stage2(const std::vector<ImagePair>& data, FNetParams fnet, const TrainConfig& cfg,
                          const CheckpointHook& hook) {
  cfg.validate();
  check_data(data);
  fnet.validate();

  std::vector<ParamRef> refs = parameters(fnet);
  std::vector<ConstParamRef> crefs;
  for (const auto& r : refs) crefs.push_back({r.name, r.dims, r.values});
  AdamState adam(parameter_count(crefs), AdamConfig{cfg.lr});
  FNetParams fgrad = zeros_like(fnet);
  const std::vector<ConstParamRef> grefs = parameters(std::as_const(fgrad));

  Stage2Result result;
  result.log.columns = {"iteration", "total", "int", "grad", "ssim"};
  std::mt19937_64 rng(cfg.seed);
  const std::size_t B = cfg.batch_size;
  const double inv_b = 1.0 / static_cast<double>(B);

  for (long it = 1; it <= cfg.iterations; ++it) {
    const auto batch = sample_batch(data, B, cfg.crop_size, rng);
    std::vector<FNetParams> fg(B, zeros_like(fnet));
    std::vector<Stage2Loss> losses(B);
    parallel_for(
        B, [&](std::size_t b) { losses[b] = stage2_loss_and_grad(batch[b], fnet, cfg.beta, &fg[b]); }, cfg.threads);

    set_zero(fgrad);
    Stage2Loss mean;
    for (std::size_t b = 0; b < B; ++b) {
      accumulate(fgrad, fg[b], inv_b);
      mean.total += losses[b].total * inv_b;
      mean.intensity += losses[b].intensity * inv_b;
      mean.gradient += losses[b].gradient * inv_b;
      mean.ssim += losses[b].ssim * inv_b;
    }
    if (!std::isfinite(mean.total)) {
      if (hook.save) hook.save(it - 1, fnet, nullptr);
      throw TrainingError("non-finite stage II loss at iteration " + std::to_string(it), it);
    }
    result.log.rows.push_back({static_cast<double>(it), mean.total, mean.intensity, mean.gradient, mean.ssim});
    try {
      adam.step(refs, grefs);
    } catch (const TrainingError& e) {
      if (hook.save) hook.save(it - 1, fnet, nullptr);
      throw TrainingError(std::string(e.what()) + " (iteration " + std::to_string(it) + ")", it);
    }
    if (hook.save && hook.every > 0 && it % hook.every == 0) hook.save(it, fnet, nullptr);
  }
  result.fnet = std::move(fnet);
  return result;
}

}  // namespace lzsc
