#include "commands.hpp"

#include <algorithm>
#include <iostream>
#include <json.hpp>
#include <map>
#include <mutex>

#include "lzsc/error.hpp"
#include "lzsc/fnet.hpp"
#include "lzsc/ifnet.hpp"
#include "lzsc/image_io.hpp"
#include "lzsc/metrics.hpp"
#include "lzsc/parallel.hpp"
#include "lzsc/weights_io.hpp"

namespace lzsc::cli {

namespace {

using json = nlohmann::ordered_json;

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw UsageError(std::string(what) + " not found: " + p.string());
}

FNetParams load_fnet(const fs::path& path) {
  require_file(path, "weights file");
  auto w = load_weights(path);
  if (!w.fnet) throw UsageError(path.string() + " holds no FNet weights");
  return std::move(*w.fnet);
}

IFNetParams load_ifnet(const fs::path& path) {
  require_file(path, "weights file");
  auto w = load_weights(path);
  if (!w.ifnet) throw UsageError(path.string() + " holds no IFNet weights");
  return std::move(*w.ifnet);
}

struct SourcePair {
  Tensor m1, m2;  // as loaded (1 or 3 channels)
};

SourcePair load_sources(const fs::path& p1, const fs::path& p2, bool resize_to_min) {
  require_file(p1, "image");
  require_file(p2, "image");
  SourcePair s{read_image(p1), read_image(p2)};
  if (!s.m1.shape().same_spatial(s.m2.shape())) {
    if (!resize_to_min)
      throw UsageError("image sizes differ: " + p1.string() + " is " + std::to_string(s.m1.width()) + "x" +
                       std::to_string(s.m1.height()) + ", " + p2.string() + " is " + std::to_string(s.m2.width()) +
                       "x" + std::to_string(s.m2.height()) + " (use --resize-to-min)");
    const std::size_t h = std::min(s.m1.height(), s.m2.height()), w = std::min(s.m1.width(), s.m2.width());
    s.m1 = resize_bilinear(s.m1, h, w);
    s.m2 = resize_bilinear(s.m2, h, w);
  }
  return s;
}

// Fused luma, recoloured with the chroma of the colour-bearing source(s) when
// requested.
Tensor compose_output(const SourcePair& s, const Tensor& fused_luma, const std::string& color) {
  const Tensor y = clamp(fused_luma, 0.0, 1.0);
  if (color != "ycbcr" || (s.m1.channels() != 3 && s.m2.channels() != 3)) return y;
  YCbCr ycc;
  if (s.m1.channels() == 3 && s.m2.channels() == 3) {
    const YCbCr a = rgb_to_ycbcr(s.m1), b = rgb_to_ycbcr(s.m2);
    ycc.cb = 0.5 * (a.cb + b.cb);
    ycc.cr = 0.5 * (a.cr + b.cr);
  } else {
    const YCbCr a = rgb_to_ycbcr(s.m1.channels() == 3 ? s.m1 : s.m2);
    ycc.cb = a.cb;
    ycc.cr = a.cr;
  }
  ycc.y = y;
  return clamp(ycbcr_to_rgb(ycc), 0.0, 1.0);
}

void fuse_one(const fs::path& p1, const fs::path& p2, const fs::path& out, const FNetParams& fnet,
              const FuseOptions& o, const std::optional<fs::path>& trace_dir) {
  const SourcePair s = load_sources(p1, p2, o.resize_to_min);
  const FusionTrace t = fnet_forward_traced(to_luma(s.m1), to_luma(s.m2), fnet);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_image(out, compose_output(s, t.fused, o.color));
  if (trace_dir) dump_intermediates(t, *trace_dir);
}

std::map<std::string, fs::path> images_in(const fs::path& dir) {
  std::map<std::string, fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".pgm" || ext == ".ppm") files[e.path().stem().string()] = e.path();
  }
  return files;
}

fs::path derived_path(const fs::path& base, const std::string& suffix) {
  fs::path p = base;
  p += suffix;
  return p;
}

void write_json(const json& j) { std::cout << j.dump(2) << std::endl; }

}  // namespace

int cmd_fuse(const FuseOptions& o) {
  const FNetParams fnet = load_fnet(o.weights);
  const bool dirs = fs::is_directory(o.m1) || fs::is_directory(o.m2);
  if (!dirs) {
    fuse_one(o.m1, o.m2, o.out, fnet, o, o.trace);
    return 0;
  }
  if (!fs::is_directory(o.m1) || !fs::is_directory(o.m2))
    throw UsageError("--m1 and --m2 must both be files or both be directories");
  const auto f1 = images_in(o.m1), f2 = images_in(o.m2);
  std::vector<std::string> names;
  std::string unpaired;
  for (const auto& [n, _] : f1) (f2.count(n) ? names.push_back(n) : (void)(unpaired += " " + n));
  for (const auto& [n, _] : f2)
    if (!f1.count(n)) unpaired += " " + n;
  if (!unpaired.empty()) throw UsageError("unpaired images:" + unpaired);
  if (names.empty()) throw UsageError("no images found in " + o.m1.string());
  fs::create_directories(o.out);
  parallel_for(names.size(), [&](std::size_t i) {
    const std::string& n = names[i];
    std::optional<fs::path> trace;
    if (o.trace) trace = *o.trace / n;
    fuse_one(f1.at(n), f2.at(n), o.out / (n + ".png"), fnet, o, trace);
  });
  return 0;
}

int cmd_decompose(const DecomposeOptions& o) {
  const IFNetParams ifnet = load_ifnet(o.weights);
  require_file(o.fused, "image");
  const Tensor fused = to_luma(read_image(o.fused));
  const InverseFusion r = ifnet_forward(fused, ifnet);
  fs::create_directories(o.out);
  write_image(o.out / "i1.png", clamp(r.i1, 0.0, 1.0));
  write_image(o.out / "i2.png", clamp(r.i2, 0.0, 1.0));
  return 0;
}

int cmd_train(const TrainOptions& o) {
  if (!fs::is_directory(o.data)) throw UsageError("data directory not found: " + o.data.string());
  const auto data = load_pair_directory(o.data);
  for (const auto& p : data)
    if (p.m1.height() < 11 || p.m1.width() < 11) throw UsageError("training images must be at least 11x11");
  TrainConfig cfg = o.config;
  cfg.validate();

  NetworkWeights w;
  if (o.init) {
    require_file(*o.init, "weights file");
    w = load_weights(*o.init);
  }
  std::mt19937_64 init_rng(cfg.seed);
  const bool run1 = o.stage == "1" || o.stage == "both";
  const bool run2 = o.stage == "2" || o.stage == "both";
  if (o.stage == "2" && !w.fnet && !o.from_scratch)
    throw UsageError("stage 2 resumes from stage-1 weights: pass --init (or --from-scratch for the ablation)");
  if (!w.fnet) w.fnet = FNetParams::random(o.scale, init_rng);
  if (!w.ifnet && run1) w.ifnet = IFNetParams::random(w.fnet->scale(), init_rng);

  const fs::path ckpt = derived_path(o.out, ".checkpoint");
  auto hook_for = [&](const NetworkWeights& base) {
    CheckpointHook h;
    h.every = o.checkpoint_every;
    h.save = [&, base](long iteration, const FNetParams& f, const IFNetParams* g) {
      NetworkWeights c = base;
      c.fnet = f;
      if (g) c.ifnet = *g;
      save_weights(c, ckpt);
      std::cerr << "lzsc: checkpoint at iteration " << iteration << " written to " << ckpt.string() << '\n';
    };
    return h;
  };

  if (o.out.has_parent_path()) fs::create_directories(o.out.parent_path());
  if (run1) {
    auto r = train_stage1(data, *w.fnet, *w.ifnet, cfg, hook_for(w));
    w.fnet = std::move(r.fnet);
    w.ifnet = std::move(r.ifnet);
    r.log.write_csv(derived_path(o.out, ".stage1.csv"));
  }
  if (run2) {
    TrainConfig c2 = cfg;
    c2.seed = cfg.seed + 1;
    if (o.lr_stage2) c2.lr = *o.lr_stage2;
    auto r = train_stage2(data, *w.fnet, c2, hook_for(w));
    w.fnet = std::move(r.fnet);
    r.log.write_csv(derived_path(o.out, ".stage2.csv"));
  }
  save_weights(w, o.out);
  return 0;
}

int cmd_features(const FeaturesOptions& o) {
  const FNetParams fnet = load_fnet(o.weights);
  const SourcePair s = load_sources(o.m1, o.m2, false);
  const FusionTrace t = fnet_forward_traced(to_luma(s.m1), to_luma(s.m2), fnet);
  const auto files = dump_intermediates(t, o.out);
  const FeatureSparsity sp = feature_sparsity(t);
  json j;
  j["sparsity"] = {{"u1", sp.u1}, {"u2", sp.u2}, {"c", sp.c}};
  j["files"] = json::array();
  for (const auto& f : files) j["files"].push_back(f.string());
  write_json(j);
  return 0;
}

int cmd_metrics(const MetricsOptions& o) {
  for (const auto* p : {&o.fused, &o.src1, &o.src2}) require_file(*p, "image");
  const Tensor f = to_luma(read_image(o.fused));
  const Tensor a = to_luma(read_image(o.src1));
  const Tensor b = to_luma(read_image(o.src2));
  if (f.shape() != a.shape() || f.shape() != b.shape()) throw UsageError("images must have identical sizes");
  if (f.height() < 11 || f.width() < 11) throw UsageError("images must be at least 11x11 for SSIM");
  const MetricReport r = fusion_metrics(a, b, f);
  json j;
  j["mi"] = r.mi;
  j["ssim"] = r.ssim;
  j["qabf"] = r.qabf;
  j["vif"] = nullptr;
  write_json(j);
  return 0;
}

int cmd_init(const InitOptions& o) {
  if (o.scale.kernel_size % 2 == 0) throw UsageError("--kernel must be odd");
  std::mt19937_64 rng(o.seed);
  NetworkWeights w;
  w.fnet = FNetParams::random(o.scale, rng);
  w.ifnet = IFNetParams::random(o.scale, rng);
  if (o.out.has_parent_path()) fs::create_directories(o.out.parent_path());
  save_weights(w, o.out);
  return 0;
}

int cmd_synth(const SynthOptions& o) {
  const auto pairs = synthetic_pairs(o.count, o.size, o.size, o.seed, o.noise);
  fs::create_directories(o.out / "m1");
  fs::create_directories(o.out / "m2");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "pair_%03zu.png", i);
    write_image(o.out / "m1" / name, pairs[i].m1);
    write_image(o.out / "m2" / name, pairs[i].m2);
  }
  return 0;
}

}  // namespace lzsc::cli
