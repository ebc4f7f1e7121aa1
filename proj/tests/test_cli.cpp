#include <doctest.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sys/wait.h>

#include "lzsc/image_io.hpp"
#include "lzsc/metrics.hpp"
#include "lzsc/synthetic.hpp"

using namespace lzsc;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(LZSC_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct Workspace {
  fs::path dir;
  explicit Workspace(const std::string& name) : dir(fs::temp_directory_path() / name) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string operator/(const std::string& s) const { return (dir / s).string(); }
};

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  Workspace w("lzsc_cli_usage");
  const auto pair = synthetic_pairs(1, 32, 32, 1)[0];
  write_image(w / "a.png", pair.m1);
  write_image(w / "b.png", pair.m2);
  CHECK(run("fuse --m1 " + (w / "a.png") + " --m2 " + (w / "b.png") + " --weights " + (w / "none.lzw") + " --out " +
            (w / "f.png"))
            .code == 2);
  {
    std::ofstream(w / "junk.png") << "junk";
  }
  CHECK(run("metrics --fused " + (w / "junk.png") + " --src1 " + (w / "a.png") + " --src2 " + (w / "b.png")).code == 2);
}

TEST_CASE("init, fuse, features, decompose and metrics") {
  Workspace w("lzsc_cli_pipeline");
  const auto pair = synthetic_pairs(1, 32, 32, 2)[0];
  write_image(w / "a.png", pair.m1);
  write_image(w / "b.png", pair.m2);
  write_image(w / "small.png", Tensor(16, 16, 1, 0.5));
  REQUIRE(run("init --out " + (w / "w.lzw") + " --K 4 --kernel 3 --N 2 --seed 3").code == 0);

  CHECK(run("fuse --m1 " + (w / "a.png") + " --m2 " + (w / "b.png") + " --weights " + (w / "w.lzw") + " --out " +
            (w / "f.png") + " --trace " + (w / "trace"))
            .code == 0);
  CHECK(read_image(w / "f.png").shape() == Shape{32, 32, 1});
  std::size_t traced = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(w / "trace")) ++traced;
  CHECK(traced == 14);

  CHECK(run("fuse --m1 " + (w / "a.png") + " --m2 " + (w / "small.png") + " --weights " + (w / "w.lzw") + " --out " +
            (w / "g.png"))
            .code == 2);
  CHECK(run("fuse --m1 " + (w / "a.png") + " --m2 " + (w / "small.png") + " --weights " + (w / "w.lzw") + " --out " +
            (w / "g.png") + " --resize-to-min")
            .code == 0);
  CHECK(read_image(w / "g.png").shape() == Shape{16, 16, 1});

  const Run feat = run("features --m1 " + (w / "a.png") + " --m2 " + (w / "b.png") + " --weights " + (w / "w.lzw") +
                       " --out " + (w / "feat"));
  REQUIRE(feat.code == 0);
  const auto fj = nlohmann::json::parse(feat.out);
  CHECK(fj["files"].size() == 14);
  CHECK(fj["sparsity"]["u1"].get<double>() >= 0.0);

  write_image(w / "zero.png", Tensor(20, 24, 1));
  REQUIRE(run("decompose --fused " + (w / "zero.png") + " --weights " + (w / "w.lzw") + " --out " + (w / "dec")).code ==
          0);
  for (const char* n : {"i1.png", "i2.png"}) {
    const Tensor t = read_image(w.dir / "dec" / n);
    CHECK(t.shape() == Shape{20, 24, 1});
    CHECK(max_abs(t) == 0.0);
  }

  const Run m = run("metrics --fused " + (w / "a.png") + " --src1 " + (w / "a.png") + " --src2 " + (w / "a.png"));
  REQUIRE(m.code == 0);
  const auto mj = nlohmann::ordered_json::parse(m.out);
  std::vector<std::string> keys;
  for (const auto& [k, _] : mj.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"mi", "ssim", "qabf", "vif"});
  CHECK(mj["ssim"].get<double>() == 1.0);
  CHECK(mj["vif"].is_null());
  CHECK(mj["qabf"].get<double>() > 0.97);
  CHECK(run("metrics --fused " + (w / "a.png") + " --src1 " + (w / "a.png") + " --src2 " + (w / "a.png")).out == m.out);
}

TEST_CASE("directory fusion") {
  Workspace w("lzsc_cli_dirs");
  REQUIRE(run("synth --out " + (w / "data") + " --count 3 --size 24 --seed 4").code == 0);
  REQUIRE(run("init --out " + (w / "w.lzw") + " --K 4 --kernel 3 --N 2").code == 0);
  CHECK(run("fuse --m1 " + (w / "data/m1") + " --m2 " + (w / "data/m2") + " --weights " + (w / "w.lzw") + " --out " +
            (w / "fused"))
            .code == 0);
  for (int i = 0; i < 3; ++i) CHECK(fs::exists(w.dir / "fused" / ("pair_00" + std::to_string(i) + ".png")));
}

TEST_CASE("train smoke run and seeded determinism") {
  Workspace w("lzsc_cli_train");
  REQUIRE(run("synth --out " + (w / "data") + " --count 2 --size 20 --seed 5").code == 0);
  const std::string common = " --data " + (w / "data") + " --stage both --iters 10 --batch 2 --crop 16 --K 4 --kernel 3 --N 2 --seed 9";
  REQUIRE(run("train" + common + " --out " + (w / "a.lzw")).code == 0);
  REQUIRE(run("train" + common + " --out " + (w / "b.lzw")).code == 0);
  for (const char* s : {".stage1.csv", ".stage2.csv"}) {
    const std::string a = read_file(w / (std::string("a.lzw") + s)), b = read_file(w / (std::string("b.lzw") + s));
    CHECK(!a.empty());
    CHECK(a == b);
    CHECK(std::count(a.begin(), a.end(), '\n') == 11);
  }
  CHECK(read_file(w / "a.lzw") == read_file(w / "b.lzw"));
  CHECK(run("decompose --fused " + (w / "data/m1/pair_000.png") + " --weights " + (w / "a.lzw") + " --out " +
            (w / "dec"))
            .code == 0);
  CHECK(run("train --data " + (w / "data") + " --stage 2 --out " + (w / "c.lzw")).code == 2);
  fs::remove(w.dir / "data/m2/pair_001.png");
  CHECK(run("train" + common + " --out " + (w / "d.lzw")).code == 2);
}

TEST_CASE("solve") {
  const Run r = run(R"(solve --mode nihta --spec '{"n":8,"m":6,"planted":{"sparsity":2},"theta":0.5,"iterations":200,"seed":1}')");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["oracle"]["dominates"].get<bool>());
  CHECK(j["planted_support"].size() == 2);
  CHECK(j["objective_trace"].size() == 201);

  const Run e = run(R"(solve --mode exhaustive --spec '{"dictionary":[[1,0],[0,1]],"signal":[3,0],"lambda":0.1}')");
  REQUIRE(e.code == 0);
  const auto ej = nlohmann::json::parse(e.out);
  CHECK(ej["support"] == nlohmann::json::array({0}));
  CHECK(ej["objective"].get<double>() == doctest::Approx(0.1));

  CHECK(run(R"(solve --mode ista --spec '{"theta":0.05,"iterations":20,"size":16}')").code == 0);

  const std::string cmd = std::string(LZSC_CLI_PATH) +
                          R"( solve --mode nihta --spec '{"n":8,"m":6,"planted":{"sparsity":9},"theta":1}' 2>&1)";
  FILE* p = popen(cmd.c_str(), "r");
  std::string err(512, '\0');
  err.resize(std::fread(err.data(), 1, err.size(), p));
  CHECK(WEXITSTATUS(pclose(p)) == 2);
  CHECK(err.find("/planted/sparsity") != std::string::npos);
  CHECK(run(R"(solve --mode nihta --spec '{"n":8,"m":6,"signal":[1,2],"theta":1}')").code == 2);
  CHECK(run("solve --mode nihta --spec '{not json'").code == 2);
}
