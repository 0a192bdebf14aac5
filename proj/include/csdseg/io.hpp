#ifndef CSDSEG_IO_HPP_
#define CSDSEG_IO_HPP_

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "csdseg/contour.hpp"
#include "csdseg/grid.hpp"
#include "json.hpp"

namespace csdseg {

namespace fs = std::filesystem;

/// Raw raster as stored on disk: interleaved samples, `max_value` 255 or
/// 65535 (or the PGM maxval).
struct RawRaster {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::uint32_t max_value = 255;
  std::vector<std::uint16_t> samples;
};

/// Writes through `writer` into a sibling temporary file, then renames it over
/// `path` so readers never observe a partial file.
inline void atomic_write(const fs::path& path, const std::function<void(const fs::path&)>& writer) {
  fs::path tmp = path;
  tmp += ".tmp";
  try {
    writer(tmp);
    fs::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

inline void atomic_write_text(const fs::path& path, const std::string& text) {
  atomic_write(path, [&](const fs::path& tmp) {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + tmp.string());
    os << text;
    os.close();
    if (!os) throw IoError("write failed: " + tmp.string());
  });
}

inline std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path.string());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

namespace io_detail {

inline std::string lower_ext(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

// Binary PGM (P5). Comments allowed in the header.
inline RawRaster read_pgm(const fs::path& path) {
  const std::string bytes = read_text(path);
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&]() -> long {
    skip_ws();
    long v = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1'000'000'000L) throw IoError("PGM header value too large: " + path.string());
      ++pos;
      any = true;
    }
    if (!any) throw IoError("malformed PGM header: " + path.string());
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw IoError("not a binary PGM (P5) file: " + path.string());
  }
  pos = 2;
  RawRaster r;
  r.width = static_cast<int>(read_uint());
  r.height = static_cast<int>(read_uint());
  const long maxval = read_uint();
  if (maxval < 1 || maxval > 65535) throw IoError("PGM maxval out of range: " + path.string());
  r.max_value = static_cast<std::uint32_t>(maxval);
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw IoError("malformed PGM header: " + path.string());
  }
  ++pos;
  if (r.width == 0 || r.height == 0) throw IoError("zero-area image: " + path.string());
  const std::size_t n = static_cast<std::size_t>(r.width) * static_cast<std::size_t>(r.height);
  const std::size_t bps = maxval > 255 ? 2 : 1;
  if (bytes.size() - pos < n * bps) throw IoError("truncated PGM data: " + path.string());
  r.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (bps == 1) {
      r.samples[i] = static_cast<unsigned char>(bytes[pos + i]);
    } else {
      r.samples[i] = static_cast<std::uint16_t>(
          (static_cast<unsigned char>(bytes[pos + 2 * i]) << 8) |
          static_cast<unsigned char>(bytes[pos + 2 * i + 1]));
    }
    if (r.samples[i] > r.max_value) throw IoError("PGM sample exceeds maxval: " + path.string());
  }
  return r;
}

inline void write_pgm(const fs::path& path, const RawRaster& r) {
  std::string out = "P5\n" + std::to_string(r.width) + " " + std::to_string(r.height) + "\n" +
                    std::to_string(r.max_value) + "\n";
  const bool wide = r.max_value > 255;
  for (std::uint16_t v : r.samples) {
    if (wide) out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v & 0xff));
  }
  atomic_write_text(path, out);
}

inline RawRaster read_png(const fs::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.string().c_str())) {
    throw IoError("cannot read PNG " + path.string() + ": " + img.message);
  }
  // Keep the stored channel layout and bit depth; expand palettes.
  img.format &= ~static_cast<png_uint_32>(PNG_FORMAT_FLAG_COLORMAP);
  RawRaster r;
  r.width = static_cast<int>(img.width);
  r.height = static_cast<int>(img.height);
  r.channels = static_cast<int>(PNG_IMAGE_SAMPLE_CHANNELS(img.format));
  const bool wide = (img.format & PNG_FORMAT_FLAG_LINEAR) != 0;
  r.max_value = wide ? 65535 : 255;
  if (r.width == 0 || r.height == 0) {
    png_image_free(&img);
    throw IoError("zero-area image: " + path.string());
  }
  const std::size_t n = PNG_IMAGE_SIZE(img) / PNG_IMAGE_SAMPLE_COMPONENT_SIZE(img.format);
  r.samples.resize(n);
  bool ok = false;
  if (wide) {
    ok = png_image_finish_read(&img, nullptr, r.samples.data(), 0, nullptr) != 0;
  } else {
    std::vector<png_byte> buf(PNG_IMAGE_SIZE(img));
    ok = png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr) != 0;
    std::copy(buf.begin(), buf.end(), r.samples.begin());
  }
  if (!ok) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw IoError("cannot decode PNG " + path.string() + ": " + msg);
  }
  return r;
}

inline void write_png(const fs::path& path, const RawRaster& r) {
  if (r.channels != 1 || (r.max_value != 255 && r.max_value != 65535)) {
    throw InvalidArgument("write_png: only single-channel 8- or 16-bit rasters are supported");
  }
  atomic_write(path, [&](const fs::path& tmp) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(r.width);
    img.height = static_cast<png_uint_32>(r.height);
    int ok = 0;
    if (r.max_value == 65535) {
      img.format = PNG_FORMAT_LINEAR_Y;
      ok = png_image_write_to_file(&img, tmp.string().c_str(), 0, r.samples.data(), 0, nullptr);
    } else {
      img.format = PNG_FORMAT_GRAY;
      std::vector<png_byte> buf(r.samples.begin(), r.samples.end());
      ok = png_image_write_to_file(&img, tmp.string().c_str(), 0, buf.data(), 0, nullptr);
    }
    if (!ok) throw IoError("cannot write PNG " + tmp.string() + ": " + img.message);
  });
}

}  // namespace io_detail

/// Reads a PNG or binary PGM raster without converting sample values.
inline RawRaster read_raster(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("file not found: " + path.string());
  const std::string ext = io_detail::lower_ext(path);
  if (ext == ".png") return io_detail::read_png(path);
  if (ext == ".pgm") return io_detail::read_pgm(path);
  throw IoError("unsupported raster format (use .png or .pgm): " + path.string());
}

/// Writes a single-channel raster; the format follows the extension.
inline void write_raster(const fs::path& path, const RawRaster& r) {
  const std::string ext = io_detail::lower_ext(path);
  if (ext == ".png") return io_detail::write_png(path, r);
  if (ext == ".pgm") return io_detail::write_pgm(path, r);
  throw IoError("unsupported raster format (use .png or .pgm): " + path.string());
}

/// Loads a grayscale image rescaled to [0, 1] by the format's max value.
/// Multi-channel files need an explicit `channel`.
inline GrayImage load_image(const fs::path& path, std::optional<int> channel = std::nullopt) {
  const RawRaster r = read_raster(path);
  int c = 0;
  if (r.channels > 1) {
    if (!channel) {
      throw IoError(path.string() + " has " + std::to_string(r.channels) +
                    " channels; select one explicitly");
    }
    c = *channel;
  } else if (channel && *channel != 0) {
    throw IoError(path.string() + " is single-channel; channel " + std::to_string(*channel) +
                  " does not exist");
  }
  if (c < 0 || c >= r.channels) throw IoError("channel index out of range for " + path.string());
  if (r.width < 3 || r.height < 3) throw IoError("image smaller than 3x3: " + path.string());
  ScalarField f(r.width, r.height);
  const double scale = static_cast<double>(r.max_value);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = static_cast<double>(r.samples[i * static_cast<std::size_t>(r.channels) + c]) / scale;
  }
  return GrayImage(std::move(f));
}

/// Saves an image quantized to 8 or 16 bits.
inline void save_image(const fs::path& path, const GrayImage& image, int bits = 8) {
  if (bits != 8 && bits != 16) throw InvalidArgument("save_image: bits must be 8 or 16");
  RawRaster r;
  r.width = image.width();
  r.height = image.height();
  r.max_value = bits == 8 ? 255 : 65535;
  r.samples.resize(image.field().size());
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    r.samples[i] = static_cast<std::uint16_t>(std::lround(image[i] * r.max_value));
  }
  write_raster(path, r);
}

/// Masks are stored as 8-bit 0/255. On load any nonzero sample is true.
inline void save_mask(const fs::path& path, const BinaryMask& mask) {
  RawRaster r;
  r.width = mask.width();
  r.height = mask.height();
  r.samples.resize(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) r.samples[i] = mask[i] ? 255 : 0;
  write_raster(path, r);
}

inline BinaryMask load_mask(const fs::path& path) {
  const RawRaster r = read_raster(path);
  if (r.channels != 1) throw IoError("mask must be single-channel: " + path.string());
  BinaryMask m(r.width, r.height, 0);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = r.samples[i] != 0 ? 1 : 0;
  return m;
}

/// Range of a field dumped as a 16-bit raster; value = min + q / 65535 * (max - min).
struct FieldRange {
  double min = 0.0;
  double max = 0.0;
};

/// Writes `field` scaled to the full 16-bit range plus a JSON sidecar
/// `<path>.json` holding the min and max.
inline FieldRange save_field(const fs::path& path, const ScalarField& field) {
  FieldRange range{min_value(field), max_value(field)};
  const double span = range.max - range.min;
  RawRaster r;
  r.width = field.width();
  r.height = field.height();
  r.max_value = 65535;
  r.samples.resize(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double q = span > 0.0 ? (field[i] - range.min) / span : 0.0;
    r.samples[i] = static_cast<std::uint16_t>(std::lround(std::clamp(q, 0.0, 1.0) * 65535.0));
  }
  write_raster(path, r);
  nlohmann::json side = {{"min", range.min}, {"max", range.max}, {"levels", 65535}};
  fs::path sidecar = path;
  sidecar += ".json";
  atomic_write_text(sidecar, side.dump(2) + "\n");
  return range;
}

inline ScalarField load_field(const fs::path& path) {
  const RawRaster r = read_raster(path);
  fs::path sidecar = path;
  sidecar += ".json";
  const auto side = nlohmann::json::parse(read_text(sidecar));
  const double lo = side.at("min").get<double>();
  const double hi = side.at("max").get<double>();
  ScalarField f(r.width, r.height);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = lo + (hi - lo) * static_cast<double>(r.samples[i]) / r.max_value;
  }
  return f;
}

/// Contour files: {"vertices": [[x, y], ...]}.
inline nlohmann::json contour_to_json(const ContourPolygon& poly) {
  nlohmann::json verts = nlohmann::json::array();
  for (const Pixel& p : poly.vertices()) verts.push_back({p.x, p.y});
  return {{"vertices", verts}};
}

inline ContourPolygon contour_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("vertices") || !j.at("vertices").is_array()) {
    throw IoError("contour JSON needs a \"vertices\" array");
  }
  std::vector<Pixel> v;
  for (const auto& e : j.at("vertices")) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
        !e[1].is_number_integer()) {
      throw IoError("contour vertices must be [x, y] integer pairs");
    }
    v.push_back({e[0].get<int>(), e[1].get<int>()});
  }
  return ContourPolygon(std::move(v));
}

inline ContourPolygon load_contour(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("file not found: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("cannot parse contour " + path.string() + ": " + e.what());
  }
  return contour_from_json(j);
}

inline void save_contour(const fs::path& path, const ContourPolygon& poly) {
  atomic_write_text(path, contour_to_json(poly).dump() + "\n");
}

}  // namespace csdseg

#endif  // CSDSEG_IO_HPP_
