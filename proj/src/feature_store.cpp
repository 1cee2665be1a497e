#include "seedpick/feature_store.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "seedpick/error.hpp"

namespace seedpick {

namespace {

class ByteReader {
 public:
  explicit ByteReader(std::vector<unsigned char> bytes) : bytes_(std::move(bytes)) {}

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  template <typename UInt>
  UInt read_uint(const char* what) {
    need(sizeof(UInt), what);
    UInt v = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(bytes_[pos_ + i]) << (8 * i);
    pos_ += sizeof(UInt);
    return v;
  }

  std::string read_string(std::size_t len, const char* what) {
    need(len, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), len);
    pos_ += len;
    return s;
  }

  void read_floats(std::span<float> out, const char* what) {
    need(out.size() * 4, what);
    for (float& f : out) {
      std::uint32_t bits = 0;
      for (std::size_t i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
      f = std::bit_cast<float>(bits);
      pos_ += 4;
    }
  }

 private:
  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw Error(ErrorKind::corruption, std::string("truncated pack while reading ") + what);
    }
  }

  std::vector<unsigned char> bytes_;
  std::size_t pos_ = 0;
};

template <typename UInt>
void put_uint(std::string& buf, UInt v) {
  for (std::size_t i = 0; i < sizeof(UInt); ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::vector<unsigned char> slurp(std::istream& in) {
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) {
    throw Error(ErrorKind::not_found, "no such file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return in;
}

void check_finite(const ViewFeatureSet& scene) {
  const auto data = scene.views.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      throw Error(ErrorKind::validation, "scene '" + scene.scene_id + "' row " +
                                             std::to_string(i / scene.views.cols()) + ": non-finite value");
    }
  }
}

void finalize(FeaturePack& pack) {
  validate_pack(pack);
  for (auto& scene : pack.scenes) {
    check_finite(scene);
    normalize_views(scene);
  }
}

std::vector<float> parse_csv_row(std::string_view line, const std::string& where) {
  std::vector<float> row;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t end = line.find(',', pos);
    if (end == std::string_view::npos) end = line.size();
    std::string_view cell = line.substr(pos, end - pos);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) cell.remove_suffix(1);
    float v = 0.0f;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
      throw Error(ErrorKind::format, where + ": cannot parse '" + std::string(cell) + "' as float");
    }
    row.push_back(v);
    pos = end + 1;
  }
  return row;
}

}  // namespace

bool FeaturePack::cost_free() const noexcept {
  if (scenes.empty()) return false;
  for (const auto& s : scenes) {
    if (s.cost != 0) return false;
  }
  return true;
}

bool FeaturePack::has_sequences() const noexcept {
  for (const auto& s : scenes) {
    if (!s.sequence_id.empty()) return true;
  }
  return false;
}

bool is_valid_utf8(std::string_view s) noexcept {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xe0) == 0xc0) {
      len = 2;
      cp = c & 0x1f;
    } else if ((c & 0xf0) == 0xe0) {
      len = 3;
      cp = c & 0x0f;
    } else if ((c & 0xf8) == 0xf0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xc0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3f);
    }
    // Overlong forms, surrogates, out of range.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000)) return false;
    if (cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) return false;
    i += len;
  }
  return true;
}

void validate_pack(const FeaturePack& pack) {
  if (pack.dimension == 0) throw Error(ErrorKind::validation, "feature dimension must be at least 1");
  std::unordered_set<std::string_view> ids;
  bool any_zero = false;
  bool any_nonzero = false;
  for (const auto& scene : pack.scenes) {
    if (scene.scene_id.empty()) throw Error(ErrorKind::validation, "empty scene id");
    if (scene.scene_id.size() > 0xffff || scene.sequence_id.size() > 0xffff) {
      throw Error(ErrorKind::validation, "scene '" + scene.scene_id.substr(0, 64) + "': id longer than 65535 bytes");
    }
    if (!is_valid_utf8(scene.scene_id) || !is_valid_utf8(scene.sequence_id)) {
      throw Error(ErrorKind::validation, "scene id or sequence id is not valid UTF-8");
    }
    if (!ids.insert(scene.scene_id).second) {
      throw Error(ErrorKind::validation, "duplicate scene id '" + scene.scene_id + "'");
    }
    if (scene.views.rows() == 0) {
      throw Error(ErrorKind::validation, "scene '" + scene.scene_id + "' has no views");
    }
    if (scene.views.cols() != pack.dimension) {
      throw Error(ErrorKind::validation, "scene '" + scene.scene_id + "' has dimension " +
                                             std::to_string(scene.views.cols()) + ", pack has " +
                                             std::to_string(pack.dimension));
    }
    (scene.cost == 0 ? any_zero : any_nonzero) = true;
  }
  if (any_zero && any_nonzero) {
    throw Error(ErrorKind::validation, "zero-cost scenes are only allowed in cost-free packs (all costs 0)");
  }
}

void normalize_views(ViewFeatureSet& scene) {
  for (std::size_t r = 0; r < scene.views.rows(); ++r) {
    auto row = scene.views.row(r);
    const double norm = std::sqrt(dot(std::span<const float>(row), std::span<const float>(row)));
    if (!(norm >= kMinRowNorm)) {
      throw Error(ErrorKind::validation,
                  "scene '" + scene.scene_id + "' row " + std::to_string(r) + " has zero norm");
    }
    if (std::abs(norm - 1.0) <= kUnitNormSlack) continue;
    for (float& v : row) v = static_cast<float>(static_cast<double>(v) / norm);
  }
}

FeaturePack read_pack(std::istream& in) {
  ByteReader reader(slurp(in));
  if (reader.remaining() < 4) throw Error(ErrorKind::format, "file too short for pack magic");
  const std::string magic = reader.read_string(4, "magic");
  if (std::memcmp(magic.data(), kPackMagic, 4) != 0) throw Error(ErrorKind::format, "bad magic, not a feature pack");
  const auto version = reader.read_uint<std::uint16_t>("version");
  if (version != kPackVersion) {
    throw Error(ErrorKind::format, "unsupported pack version " + std::to_string(version));
  }
  FeaturePack pack;
  pack.dimension = reader.read_uint<std::uint32_t>("dimension");
  if (pack.dimension == 0) throw Error(ErrorKind::corruption, "header dimension is 0");
  const auto count = reader.read_uint<std::uint32_t>("scene count");
  for (std::uint32_t s = 0; s < count; ++s) {
    ViewFeatureSet scene;
    const auto id_len = reader.read_uint<std::uint16_t>("scene id length");
    scene.scene_id = reader.read_string(id_len, "scene id");
    const auto seq_len = reader.read_uint<std::uint16_t>("sequence id length");
    scene.sequence_id = reader.read_string(seq_len, "sequence id");
    scene.cost = reader.read_uint<std::uint64_t>("cost");
    const auto n = reader.read_uint<std::uint32_t>("view count");
    const std::uint64_t values = std::uint64_t{n} * pack.dimension;
    if (values * 4 > reader.remaining()) {
      throw Error(ErrorKind::corruption, "scene '" + scene.scene_id + "' payload shorter than " +
                                             std::to_string(n) + " views of dimension " +
                                             std::to_string(pack.dimension));
    }
    scene.views = Matrix<float>(n, pack.dimension);
    reader.read_floats(scene.views.data(), "view features");
    pack.scenes.push_back(std::move(scene));
  }
  if (reader.remaining() != 0) {
    throw Error(ErrorKind::corruption,
                std::to_string(reader.remaining()) + " trailing bytes after last scene (payload/header dimension mismatch?)");
  }
  finalize(pack);
  return pack;
}

FeaturePack load_manifest(const std::filesystem::path& path) {
  auto in = open_input(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::format, "manifest " + path.string() + ": " + e.what());
  }
  FeaturePack pack;
  try {
    const auto dim = doc.at("dimension").get<std::int64_t>();
    if (dim < 1 || dim > 0xffffffffLL) throw Error(ErrorKind::validation, "manifest dimension out of range");
    pack.dimension = static_cast<std::uint32_t>(dim);
    const auto base = path.parent_path();
    for (const auto& entry : doc.at("scenes")) {
      ViewFeatureSet scene;
      scene.scene_id = entry.at("id").get<std::string>();
      scene.cost = entry.value("cost", std::uint64_t{0});
      scene.sequence_id = entry.value("sequence_id", std::string{});
      std::filesystem::path csv = entry.at("views_csv").get<std::string>();
      if (csv.is_relative()) csv = base / csv;
      auto csv_in = open_input(csv);
      std::vector<float> values;
      std::size_t rows = 0;
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(csv_in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto row = parse_csv_row(line, csv.string() + ":" + std::to_string(line_no));
        if (row.size() != pack.dimension) {
          throw Error(ErrorKind::corruption, csv.string() + ":" + std::to_string(line_no) + ": expected " +
                                                 std::to_string(pack.dimension) + " values, found " +
                                                 std::to_string(row.size()));
        }
        values.insert(values.end(), row.begin(), row.end());
        ++rows;
      }
      scene.views = Matrix<float>(rows, pack.dimension, std::move(values));
      pack.scenes.push_back(std::move(scene));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::format, "manifest " + path.string() + ": " + e.what());
  }
  finalize(pack);
  return pack;
}

FeaturePack load_pack(const std::filesystem::path& path) {
  auto in = open_input(path);
  char head[4] = {};
  in.read(head, 4);
  const bool binary = in.gcount() == 4 && std::memcmp(head, kPackMagic, 4) == 0;
  if (!binary) {
    // Anything that looks like JSON goes through the manifest route.
    std::size_t i = 0;
    while (i < static_cast<std::size_t>(in.gcount()) && std::isspace(static_cast<unsigned char>(head[i]))) ++i;
    if (path.extension() == ".json" || (i < static_cast<std::size_t>(in.gcount()) && head[i] == '{')) {
      return load_manifest(path);
    }
  }
  in.clear();
  in.seekg(0);
  return read_pack(in);
}

void write_pack(const FeaturePack& pack, std::ostream& out) {
  validate_pack(pack);
  std::string buf;
  buf.append(kPackMagic, 4);
  put_uint<std::uint16_t>(buf, kPackVersion);
  put_uint<std::uint32_t>(buf, pack.dimension);
  put_uint<std::uint32_t>(buf, static_cast<std::uint32_t>(pack.scenes.size()));
  for (const auto& scene : pack.scenes) {
    put_uint<std::uint16_t>(buf, static_cast<std::uint16_t>(scene.scene_id.size()));
    buf += scene.scene_id;
    put_uint<std::uint16_t>(buf, static_cast<std::uint16_t>(scene.sequence_id.size()));
    buf += scene.sequence_id;
    put_uint<std::uint64_t>(buf, scene.cost);
    put_uint<std::uint32_t>(buf, static_cast<std::uint32_t>(scene.views.rows()));
    for (float v : scene.views.data()) put_uint<std::uint32_t>(buf, std::bit_cast<std::uint32_t>(v));
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error(ErrorKind::io, "write failed");
}

void write_pack(const FeaturePack& pack, const std::filesystem::path& path) {
  validate_pack(pack);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  write_pack(pack, out);
  out.close();
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

std::vector<SceneMeanFeature> scene_means(const FeaturePack& pack) {
  std::vector<SceneMeanFeature> out;
  out.reserve(pack.scenes.size());
  for (const auto& scene : pack.scenes) {
    SceneMeanFeature m{scene.scene_id, std::vector<double>(pack.dimension, 0.0)};
    for (std::size_t r = 0; r < scene.views.rows(); ++r) {
      const auto row = scene.views.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) m.mean[c] += row[c];
    }
    const double n = static_cast<double>(scene.views.rows());
    for (double& v : m.mean) v /= n;
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace seedpick
