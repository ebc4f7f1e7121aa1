#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lzsc/fnet.hpp"
#include "lzsc/ifnet.hpp"
#include "lzsc/tensor.hpp"

namespace lzsc {

enum class DType : std::uint8_t { f32 = 0, f64 = 1 };

inline constexpr std::uint32_t kArchiveVersion = 1;

struct ArchiveEntry {
  std::string name;
  DType dtype = DType::f32;
  std::vector<std::uint32_t> dims;  // empty for scalars
  std::vector<double> values;       // row-major, already widened to double

  std::size_t element_count() const;
};

/// In-memory form of the binary archive:
///   "LZSC" | u32 version | u32 entry_count | entries
///   entry = u32 name_len | name | u8 dtype | u8 ndim | u32 dims[ndim] | payload
/// All integers and scalars are little-endian.
struct WeightArchive {
  std::vector<ArchiveEntry> entries;

  const ArchiveEntry* find(const std::string& name) const;
  /// Appends an entry; f32 entries have their values rounded to float.
  void add(std::string name, DType dtype, std::vector<std::uint32_t> dims, std::vector<double> values);
};

std::vector<std::uint8_t> encode_archive(const WeightArchive& a);
/// Throws FormatError on bad magic/version, duplicate names, or truncation
/// ("unexpected EOF at entry k", k counted from 0).
WeightArchive decode_archive(const std::vector<std::uint8_t>& bytes);

void write_archive(const WeightArchive& a, const std::filesystem::path& path);
WeightArchive read_archive(const std::filesystem::path& path);

/// Networks held by one weight file. Either may be absent (stage-II-only
/// runs still carry IFNet if it was trained).
struct NetworkWeights {
  std::optional<FNetParams> fnet;
  std::optional<IFNetParams> ifnet;
};

/// Parameter entries in canonical order plus <prefix>.meta.{K,kernel,N}.
WeightArchive to_archive(const NetworkWeights& w, DType dtype = DType::f32);

/// Rebuilds the networks described by the archive's meta entries. If
/// `expected` is given, the stored topology must match it. Every parameter
/// entry must be present with the right shape; unknown entries and schedule
/// invariant violations reject the archive.
NetworkWeights from_archive(const WeightArchive& a, const std::optional<NetworkScale>& expected = std::nullopt);

void save_weights(const NetworkWeights& w, const std::filesystem::path& path, DType dtype = DType::f32);
NetworkWeights load_weights(const std::filesystem::path& path,
                            const std::optional<NetworkScale>& expected = std::nullopt);

/// Single-entry archive holding one H x W x C tensor (dims [H, W, C]).
void save_tensor(const Tensor& t, const std::string& name, const std::filesystem::path& path,
                 DType dtype = DType::f32);
Tensor load_tensor(const std::filesystem::path& path);

}  // namespace lzsc
