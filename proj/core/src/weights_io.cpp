#include "lzsc/weights_io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>

#include "lzsc/error.hpp"
#include "lzsc/parameters.hpp"

namespace lzsc {

namespace {

constexpr char kMagic[4] = {'L', 'Z', 'S', 'C'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

struct Eof {};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : b_(b) {}
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw Eof{};
  }
  std::uint8_t u8() {
    need(1);
    return b_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b_[pos_++]) << (8 * i);
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(b_.begin() + static_cast<std::ptrdiff_t>(pos_), b_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

std::vector<std::uint32_t> to_dims(const std::vector<std::size_t>& d) { return {d.begin(), d.end()}; }

void add_refs(WeightArchive& a, const std::vector<ConstParamRef>& refs, DType dtype) {
  for (const auto& r : refs) a.add(r.name, dtype, to_dims(r.dims), {r.values.begin(), r.values.end()});
}

void add_meta(WeightArchive& a, const std::string& prefix, const NetworkScale& s) {
  a.add(prefix + ".meta.K", DType::f64, {}, {static_cast<double>(s.feature_channels)});
  a.add(prefix + ".meta.kernel", DType::f64, {}, {static_cast<double>(s.kernel_size)});
  a.add(prefix + ".meta.N", DType::f64, {}, {static_cast<double>(s.iterations)});
}

std::size_t meta_value(const WeightArchive& a, const std::string& name, std::set<std::string>& used) {
  const ArchiveEntry* e = a.find(name);
  if (!e) throw FormatError("missing entry " + name);
  if (!e->dims.empty() || e->values.size() != 1) throw FormatError("entry " + name + " must be a scalar");
  const double v = e->values[0];
  if (!(v >= 1.0 && v <= 4096.0) || v != std::floor(v))
    throw FormatError("entry " + name + " must be a positive integer");
  used.insert(name);
  return static_cast<std::size_t>(v);
}

std::optional<NetworkScale> read_scale(const WeightArchive& a, const std::string& prefix, std::set<std::string>& used) {
  if (!a.find(prefix + ".meta.K") && !a.find(prefix + ".meta.kernel") && !a.find(prefix + ".meta.N"))
    return std::nullopt;
  NetworkScale s;
  s.feature_channels = meta_value(a, prefix + ".meta.K", used);
  s.kernel_size = meta_value(a, prefix + ".meta.kernel", used);
  s.iterations = meta_value(a, prefix + ".meta.N", used);
  if (s.kernel_size % 2 == 0) throw FormatError("entry " + prefix + ".meta.kernel must be odd");
  return s;
}

void fill(std::vector<ParamRef> refs, const WeightArchive& a, std::set<std::string>& used) {
  for (auto& r : refs) {
    const ArchiveEntry* e = a.find(r.name);
    if (!e) throw FormatError("missing entry " + r.name);
    if (e->dims != to_dims(r.dims)) {
      std::string want, got;
      for (auto d : r.dims) want += (want.empty() ? "" : "x") + std::to_string(d);
      for (auto d : e->dims) got += (got.empty() ? "" : "x") + std::to_string(d);
      throw FormatError("shape mismatch for entry " + r.name + ": expected [" + want + "], found [" + got + "]");
    }
    std::copy(e->values.begin(), e->values.end(), r.values.begin());
    used.insert(r.name);
  }
}

template <class Net>
void validate_loaded(const Net& p, const std::string& prefix) {
  try {
    p.validate();
  } catch (const ContractViolation& e) {
    throw FormatError(prefix + " parameters violate an invariant: " + e.what());
  }
}

FNetParams fnet_skeleton(const NetworkScale& s) {
  FNetParams p;
  p.block_u1 = LzscBlockParams::zeros(1, s.feature_channels, s.kernel_size, s.iterations);
  p.block_u2 = LzscBlockParams::zeros(1, s.feature_channels, s.kernel_size, s.iterations);
  p.block_c = LzscBlockParams::zeros(2, s.feature_channels, s.kernel_size, s.iterations);
  const ConvKernel synth(KernelShape{1, s.feature_channels, s.kernel_size, s.kernel_size});
  p.d_u1 = p.d_u2 = p.g_c = p.g_u1 = p.g_u2 = synth;
  return p;
}

IFNetParams ifnet_skeleton(const NetworkScale& s) {
  IFNetParams p;
  p.block_x1 = LzscBlockParams::zeros(1, s.feature_channels, s.kernel_size, s.iterations);
  p.block_x2 = LzscBlockParams::zeros(1, s.feature_channels, s.kernel_size, s.iterations);
  p.d_x1 = p.d_x2 = ConvKernel(KernelShape{1, s.feature_channels, s.kernel_size, s.kernel_size});
  return p;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  return bytes;
}

}  // namespace

std::size_t ArchiveEntry::element_count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

const ArchiveEntry* WeightArchive::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

void WeightArchive::add(std::string name, DType dtype, std::vector<std::uint32_t> dims, std::vector<double> values) {
  require(!find(name), "archive already holds an entry named " + name);
  require(dims.size() <= 255, "archive entry " + name + " has too many dimensions");
  ArchiveEntry e{std::move(name), dtype, std::move(dims), std::move(values)};
  require(e.element_count() == e.values.size(), "archive entry " + e.name + ": value count does not match dims");
  if (dtype == DType::f32)
    for (double& v : e.values) v = static_cast<double>(static_cast<float>(v));
  entries.push_back(std::move(e));
}

std::vector<std::uint8_t> encode_archive(const WeightArchive& a) {
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(kArchiveVersion);
  w.u32(static_cast<std::uint32_t>(a.entries.size()));
  for (const auto& e : a.entries) {
    w.u32(static_cast<std::uint32_t>(e.name.size()));
    w.bytes(e.name.data(), e.name.size());
    w.u8(static_cast<std::uint8_t>(e.dtype));
    w.u8(static_cast<std::uint8_t>(e.dims.size()));
    for (auto d : e.dims) w.u32(d);
    for (double v : e.values) {
      if (e.dtype == DType::f32)
        w.u32(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
      else
        w.u64(std::bit_cast<std::uint64_t>(v));
    }
  }
  return w.take();
}

WeightArchive decode_archive(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  WeightArchive a;
  std::uint32_t count = 0;
  try {
    if (r.str(4) != std::string(kMagic, 4)) throw FormatError("bad magic: not an LZSC weight archive");
    const std::uint32_t version = r.u32();
    if (version != kArchiveVersion)
      throw FormatError("unsupported archive version " + std::to_string(version) + " (expected " +
                        std::to_string(kArchiveVersion) + ")");
    count = r.u32();
  } catch (const Eof&) {
    throw FormatError("unexpected EOF in archive header");
  }
  std::set<std::string> names;
  for (std::uint32_t k = 0; k < count; ++k) {
    try {
      ArchiveEntry e;
      e.name = r.str(r.u32());
      const std::uint8_t dtype = r.u8();
      if (dtype > 1) throw FormatError("entry " + e.name + ": unknown dtype " + std::to_string(dtype));
      e.dtype = static_cast<DType>(dtype);
      const std::uint8_t ndim = r.u8();
      for (std::uint8_t i = 0; i < ndim; ++i) e.dims.push_back(r.u32());
      const std::size_t n = e.element_count();
      r.need(n * (e.dtype == DType::f32 ? 4 : 8));
      e.values.resize(n);
      for (double& v : e.values)
        v = e.dtype == DType::f32 ? static_cast<double>(std::bit_cast<float>(r.u32()))
                                  : std::bit_cast<double>(r.u64());
      if (!names.insert(e.name).second) throw FormatError("duplicate entry " + e.name);
      a.entries.push_back(std::move(e));
    } catch (const Eof&) {
      throw FormatError("unexpected EOF at entry " + std::to_string(k));
    }
  }
  if (!r.done()) throw FormatError("trailing bytes after entry " + std::to_string(count));
  return a;
}

void write_archive(const WeightArchive& a, const std::filesystem::path& path) {
  const auto bytes = encode_archive(a);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

WeightArchive read_archive(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_archive(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

WeightArchive to_archive(const NetworkWeights& w, DType dtype) {
  WeightArchive a;
  if (w.fnet) {
    w.fnet->validate();
    add_meta(a, "fnet", w.fnet->scale());
    add_refs(a, parameters(*w.fnet), dtype);
  }
  if (w.ifnet) {
    w.ifnet->validate();
    add_meta(a, "ifnet", w.ifnet->scale());
    add_refs(a, parameters(*w.ifnet), dtype);
  }
  return a;
}

NetworkWeights from_archive(const WeightArchive& a, const std::optional<NetworkScale>& expected) {
  std::set<std::string> used;
  NetworkWeights w;
  auto check_expected = [&](const NetworkScale& s, const std::string& prefix) {
    if (expected && !(s == *expected))
      throw FormatError(prefix + " topology (K=" + std::to_string(s.feature_channels) + ", kernel " +
                        std::to_string(s.kernel_size) + ", N=" + std::to_string(s.iterations) +
                        ") does not match the requested network");
  };
  if (const auto s = read_scale(a, "fnet", used)) {
    check_expected(*s, "fnet");
    FNetParams p = fnet_skeleton(*s);
    fill(parameters(p), a, used);
    validate_loaded(p, "fnet");
    w.fnet = std::move(p);
  }
  if (const auto s = read_scale(a, "ifnet", used)) {
    check_expected(*s, "ifnet");
    IFNetParams p = ifnet_skeleton(*s);
    fill(parameters(p), a, used);
    validate_loaded(p, "ifnet");
    w.ifnet = std::move(p);
  }
  for (const auto& e : a.entries)
    if (!used.count(e.name)) throw FormatError("unknown entry " + e.name);
  if (!w.fnet && !w.ifnet) throw FormatError("archive holds no network");
  return w;
}

void save_weights(const NetworkWeights& w, const std::filesystem::path& path, DType dtype) {
  write_archive(to_archive(w, dtype), path);
}

NetworkWeights load_weights(const std::filesystem::path& path, const std::optional<NetworkScale>& expected) {
  const WeightArchive a = read_archive(path);
  try {
    return from_archive(a, expected);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_tensor(const Tensor& t, const std::string& name, const std::filesystem::path& path, DType dtype) {
  WeightArchive a;
  a.add(name, dtype,
        {static_cast<std::uint32_t>(t.height()), static_cast<std::uint32_t>(t.width()),
         static_cast<std::uint32_t>(t.channels())},
        {t.values().begin(), t.values().end()});
  write_archive(a, path);
}

Tensor load_tensor(const std::filesystem::path& path) {
  const WeightArchive a = read_archive(path);
  if (a.entries.size() != 1 || a.entries[0].dims.size() != 3)
    throw FormatError(path.string() + ": expected a single 3-D tensor entry");
  const auto& e = a.entries[0];
  return Tensor(Shape{e.dims[0], e.dims[1], e.dims[2]}, e.values);
}

}  // namespace lzsc
