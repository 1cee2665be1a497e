#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "seedpick/matrix.hpp"

namespace seedpick {

/// Views of one scene plus its annotation cost (in points, or 0 in
/// cost-free packs).
struct ViewFeatureSet {
  std::string scene_id;
  std::string sequence_id;  // empty = not part of a sequence
  std::uint64_t cost = 0;
  Matrix<float> views;  // N_i x D

  std::size_t view_count() const noexcept { return views.rows(); }
};

/// A validated collection of scenes sharing one feature dimension.
///
/// A pack is cost-free when it holds at least one scene and every scene has
/// cost 0; budgets over such packs count scenes. Mixing zero and nonzero
/// costs is rejected.
struct FeaturePack {
  std::uint32_t dimension = 0;
  std::vector<ViewFeatureSet> scenes;

  bool cost_free() const noexcept;
  bool has_sequences() const noexcept;
};

struct SceneMeanFeature {
  std::string scene_id;
  std::vector<double> mean;
};

inline constexpr char kPackMagic[4] = {'S', 'F', 'P', 'K'};
inline constexpr std::uint16_t kPackVersion = 1;

/// Rows whose norm is already within this distance of 1 are kept bit-exact;
/// anything else is rescaled.
inline constexpr double kUnitNormSlack = 1e-6;
inline constexpr double kMinRowNorm = 1e-12;

/// Throws ErrorKind::validation on any invariant violation. Row norms are not
/// checked here; see normalize_views.
void validate_pack(const FeaturePack& pack);

/// L2-normalizes every row in place. Zero rows raise a validation error that
/// names the scene and row index.
void normalize_views(ViewFeatureSet& scene);

/// Loads a .sfp binary pack or a JSON manifest (detected by content) and
/// returns it validated with all rows normalized.
FeaturePack load_pack(const std::filesystem::path& path);
FeaturePack read_pack(std::istream& in);
FeaturePack load_manifest(const std::filesystem::path& path);

void write_pack(const FeaturePack& pack, const std::filesystem::path& path);
void write_pack(const FeaturePack& pack, std::ostream& out);

std::vector<SceneMeanFeature> scene_means(const FeaturePack& pack);

bool is_valid_utf8(std::string_view s) noexcept;

}  // namespace seedpick
