#include "cvb/raster.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "cvb/error.hpp"

namespace cvb {

namespace {

constexpr const char* kMagic = "CVB1";

struct Header {
  std::string kind;
  int width = 0;
  int height = 0;
  int channels = 0;
  std::string dtype;
};

[[noreturn]] void format_error(const std::filesystem::path& path,
                               const std::string& what) {
  fail(ErrorCode::Format, path.string() + ": " + what);
}

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  out.append(bytes, sizeof(T));
}

template <typename T>
T get_le(const char* bytes) {
  char tmp[sizeof(T)];
  std::memcpy(tmp, bytes, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(tmp, tmp + sizeof(T));
  }
  T value;
  std::memcpy(&value, tmp, sizeof(T));
  return value;
}

void write_file(const std::filesystem::path& path, const Header& h,
                const std::string& payload) {
  nlohmann::ordered_json j;
  j["magic"] = kMagic;
  j["kind"] = h.kind;
  j["width"] = h.width;
  j["height"] = h.height;
  j["channels"] = h.channels;
  j["dtype"] = h.dtype;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  const std::string line = j.dump() + "\n";
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) fail(ErrorCode::Io, "write failed: " + path.string());
}

// Returns the payload after validating the header against the expected kind.
std::string read_file(const std::filesystem::path& path,
                      const std::string& kind, int channels,
                      const std::string& dtype, Header& h) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) format_error(path, "missing raster header");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
    if (j.at("magic").get<std::string>() != kMagic) {
      format_error(path, "bad magic");
    }
    h.kind = j.at("kind").get<std::string>();
    h.width = j.at("width").get<int>();
    h.height = j.at("height").get<int>();
    h.channels = j.at("channels").get<int>();
    h.dtype = j.at("dtype").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    format_error(path, std::string("corrupt raster header: ") + e.what());
  }
  if (h.kind != kind) {
    format_error(path, "expected kind '" + kind + "', found '" + h.kind + "'");
  }
  if (h.channels != channels || h.dtype != dtype) {
    format_error(path, "unexpected channels/dtype for kind " + kind);
  }
  if (h.width <= 0 || h.height <= 0) format_error(path, "bad dimensions");
  std::ostringstream rest;
  rest << in.rdbuf();
  std::string payload = rest.str();
  const std::size_t sample = dtype == "f32" ? 4 : 1;
  const std::size_t expected =
      static_cast<std::size_t>(h.width) * h.height * channels * sample;
  if (payload.size() != expected) {
    std::ostringstream why;
    why << "payload has " << payload.size() << " bytes, expected " << expected;
    format_error(path, why.str());
  }
  return payload;
}

float to_f32(double v) {
  return std::isfinite(v) ? static_cast<float>(v)
                          : std::numeric_limits<float>::quiet_NaN();
}

}  // namespace

std::size_t DepthMap::valid_count() const {
  std::size_t n = 0;
  for (double d : data()) n += valid_value(d) ? 1 : 0;
  return n;
}

std::size_t CovisibilityMap::count(CovisLabel label) const {
  return static_cast<std::size_t>(
      std::count(data().begin(), data().end(), label));
}

std::optional<double> sample_bilinear(const DepthMap& depth, const Vec2& p) {
  if (!(p.x() >= 0.0 && p.y() >= 0.0 && p.x() <= depth.width() - 1 &&
        p.y() <= depth.height() - 1)) {
    return std::nullopt;
  }
  const int x0 = std::min(static_cast<int>(std::floor(p.x())), depth.width() - 2);
  const int y0 = std::min(static_cast<int>(std::floor(p.y())), depth.height() - 2);
  const double ax = p.x() - x0;
  const double ay = p.y() - y0;
  const double w[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
  const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
  const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
  double sum = 0.0;
  double wsum = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (w[i] > 0.0 && depth.valid(xs[i], ys[i])) {
      sum += w[i] * depth.at(xs[i], ys[i]);
      wsum += w[i];
    }
  }
  if (!(wsum > 0.0)) return std::nullopt;
  return sum / wsum;
}

void write_depth(const std::filesystem::path& path, const DepthMap& depth) {
  std::string payload;
  payload.reserve(depth.size() * 4);
  for (double d : depth.data()) {
    put_le(payload, DepthMap::valid_value(d)
                        ? static_cast<float>(d)
                        : std::numeric_limits<float>::quiet_NaN());
  }
  write_file(path, {"depth", depth.width(), depth.height(), 1, "f32"}, payload);
}

void write_normals(const std::filesystem::path& path, const NormalMap& normals) {
  std::string payload;
  payload.reserve(normals.size() * 12);
  for (const Vec3& n : normals.data()) {
    for (int c = 0; c < 3; ++c) put_le(payload, to_f32(n[c]));
  }
  write_file(path, {"normal", normals.width(), normals.height(), 3, "f32"},
             payload);
}

void write_covis(const std::filesystem::path& path, const CovisibilityMap& covis) {
  std::string payload;
  payload.reserve(covis.size());
  for (CovisLabel l : covis.data()) {
    payload.push_back(static_cast<char>(l));
  }
  write_file(path, {"covis", covis.width(), covis.height(), 1, "u8"}, payload);
}

DepthMap read_depth(const std::filesystem::path& path) {
  Header h;
  const std::string payload = read_file(path, "depth", 1, "f32", h);
  DepthMap depth(h.width, h.height);
  auto out = depth.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const float v = get_le<float>(payload.data() + 4 * i);
    out[i] = DepthMap::valid_value(v) ? static_cast<double>(v)
                                      : std::numeric_limits<double>::quiet_NaN();
  }
  return depth;
}

NormalMap read_normals(const std::filesystem::path& path) {
  Header h;
  const std::string payload = read_file(path, "normal", 3, "f32", h);
  NormalMap normals(h.width, h.height);
  auto out = normals.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    Vec3 n;
    for (int c = 0; c < 3; ++c) {
      n[c] = get_le<float>(payload.data() + 12 * i + 4 * c);
    }
    // f32 storage drops the unit length below 1e-6; restore it.
    out[i] = n.allFinite() && n.norm() > 0.0
                 ? Vec3(n.normalized())
                 : Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
  }
  return normals;
}

CovisibilityMap read_covis(const std::filesystem::path& path) {
  Header h;
  const std::string payload = read_file(path, "covis", 1, "u8", h);
  CovisibilityMap covis(h.width, h.height);
  auto out = covis.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto v = static_cast<std::uint8_t>(payload[i]);
    if (v > 3) {
      std::ostringstream why;
      why << "invalid covis label " << int(v) << " at sample " << i;
      format_error(path, why.str());
    }
    out[i] = static_cast<CovisLabel>(v);
  }
  return covis;
}

DepthMap quantize_f32(const DepthMap& depth) {
  DepthMap out(depth.width(), depth.height());
  auto src = depth.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (DepthMap::valid_value(src[i])) {
      dst[i] = static_cast<double>(static_cast<float>(src[i]));
    }
  }
  return out;
}

}  // namespace cvb
