#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"
#include "lzsc/error.hpp"

namespace {

using namespace lzsc::cli;

void add_scale(CLI::App* app, lzsc::NetworkScale& s) {
  app->add_option("--K", s.feature_channels, "Feature channels per block")->check(CLI::Range(1, 1024));
  app->add_option("--kernel", s.kernel_size, "Odd kernel size")->check(CLI::Range(1, 31));
  app->add_option("--N", s.iterations, "Iteration modules per block")->check(CLI::Range(1, 64));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convolutional sparse coding image fusion"};
  app.require_subcommand(1);

  FuseOptions fuse;
  auto* c_fuse = app.add_subcommand("fuse", "Fuse two registered images (or two directories of images)");
  c_fuse->add_option("--m1", fuse.m1, "First modality image or directory")->required();
  c_fuse->add_option("--m2", fuse.m2, "Second modality image or directory")->required();
  c_fuse->add_option("--weights", fuse.weights, "Weight archive")->required();
  c_fuse->add_option("--out", fuse.out, "Output image (or directory)")->required();
  c_fuse->add_option("--color", fuse.color, "Output colour handling")->check(CLI::IsMember({"gray", "ycbcr"}));
  c_fuse->add_option("--trace", fuse.trace, "Directory for intermediate features");
  c_fuse->add_flag("--resize-to-min", fuse.resize_to_min, "Resample both inputs to the smaller size");

  DecomposeOptions decompose;
  auto* c_dec = app.add_subcommand("decompose", "Split a fused image into source estimates with IFNet");
  c_dec->add_option("--fused", decompose.fused, "Fused image")->required();
  c_dec->add_option("--weights", decompose.weights, "Weight archive holding IFNet")->required();
  c_dec->add_option("--out", decompose.out, "Output directory")->required();

  TrainOptions train;
  auto* c_train = app.add_subcommand("train", "Two-stage training on m1/NAME + m2/NAME pairs");
  c_train->add_option("--data", train.data, "Directory with m1/ and m2/")->required();
  c_train->add_option("--out", train.out, "Output weight archive")->required();
  c_train->add_option("--stage", train.stage, "Stage to run")->check(CLI::IsMember({"1", "2", "both"}));
  c_train->add_option("--init", train.init, "Start from these weights");
  c_train->add_flag("--from-scratch", train.from_scratch, "Allow stage 2 without stage-1 weights");
  c_train->add_option("--iters", train.config.iterations, "Iterations per stage")->check(CLI::NonNegativeNumber);
  c_train->add_option("--batch", train.config.batch_size, "Batch size")->check(CLI::PositiveNumber);
  c_train->add_option("--crop", train.config.crop_size, "Random crop size")->check(CLI::Range(11, 100000));
  c_train->add_option("--lr", train.config.lr, "Adam learning rate")->check(CLI::NonNegativeNumber);
  c_train->add_option("--lr2", train.lr_stage2, "Stage-2 learning rate (default: --lr)")->check(CLI::NonNegativeNumber);
  c_train->add_option("--beta1", train.config.beta.intensity, "Stage-2 intensity weight");
  c_train->add_option("--beta2", train.config.beta.gradient, "Stage-2 gradient weight");
  c_train->add_option("--beta3", train.config.beta.ssim, "Stage-2 SSIM weight");
  c_train->add_option("--seed", train.config.seed, "Seed for initialisation and sampling");
  c_train->add_option("--threads", train.config.threads, "Workers per batch (0 = LZSC_THREADS or all cores)");
  c_train->add_option("--checkpoint-every", train.checkpoint_every, "Write a checkpoint every N iterations");
  add_scale(c_train, train.scale);

  FeaturesOptions features;
  auto* c_feat = app.add_subcommand("features", "Dump sparse features and reconstruction parts");
  c_feat->add_option("--m1", features.m1, "First modality image")->required();
  c_feat->add_option("--m2", features.m2, "Second modality image")->required();
  c_feat->add_option("--weights", features.weights, "Weight archive")->required();
  c_feat->add_option("--out", features.out, "Output directory")->required();

  MetricsOptions metrics;
  auto* c_met = app.add_subcommand("metrics", "Score a fused image against its sources (JSON on stdout)");
  c_met->add_option("--fused", metrics.fused, "Fused image")->required();
  c_met->add_option("--src1", metrics.src1, "First source")->required();
  c_met->add_option("--src2", metrics.src2, "Second source")->required();

  SolveOptions solve;
  auto* c_solve = app.add_subcommand("solve", "Run a reference sparse-coding solver (JSON report on stdout)");
  c_solve->add_option("--mode", solve.mode, "Solver")
      ->required()
      ->check(CLI::IsMember({"exhaustive", "nihta", "ista", "nihta-conv"}));
  c_solve->add_option("--spec", solve.spec, "Problem spec: JSON text or path to a JSON file")->required();

  InitOptions init;
  auto* c_init = app.add_subcommand("init", "Write randomly initialised FNet + IFNet weights");
  c_init->add_option("--out", init.out, "Output weight archive")->required();
  c_init->add_option("--seed", init.seed, "Initialisation seed");
  add_scale(c_init, init.scale);

  SynthOptions synth;
  auto* c_synth = app.add_subcommand("synth", "Write procedural multi-modal pairs as m1/ and m2/ PNGs");
  c_synth->add_option("--out", synth.out, "Output directory")->required();
  c_synth->add_option("--count", synth.count, "Number of pairs")->check(CLI::PositiveNumber);
  c_synth->add_option("--size", synth.size, "Image side length")->check(CLI::Range(16, 4096));
  c_synth->add_option("--seed", synth.seed, "Seed");
  c_synth->add_option("--noise", synth.noise, "Noise standard deviation")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*c_fuse) return cmd_fuse(fuse);
    if (*c_dec) return cmd_decompose(decompose);
    if (*c_train) return cmd_train(train);
    if (*c_feat) return cmd_features(features);
    if (*c_met) return cmd_metrics(metrics);
    if (*c_solve) return cmd_solve(solve);
    if (*c_init) return cmd_init(init);
    if (*c_synth) return cmd_synth(synth);
  } catch (const UsageError& e) {
    std::cerr << "lzsc: " << e.what() << '\n';
    return 2;
  } catch (const lzsc::IoError& e) {
    std::cerr << "lzsc: " << e.what() << '\n';
    return 2;
  } catch (const lzsc::FormatError& e) {
    std::cerr << "lzsc: " << e.what() << '\n';
    return 2;
  } catch (const lzsc::ContractViolation& e) {
    std::cerr << "lzsc: " << e.what() << '\n';
    return 2;
  } catch (const lzsc::TrainingError& e) {
    std::cerr << "lzsc: training aborted: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "lzsc: internal error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
