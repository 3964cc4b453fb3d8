#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wbary/core.hpp"

namespace wbary::io {

/// Raised for malformed files; the message names the file and the field or line.
class ParseError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

inline constexpr int kFormatVersion = 1;

// ---------------------------------------------------------------------------
// Measure and instance files (versioned JSON)
//
//   {"format": "wbary-measure", "version": 1, "d": 2,
//    "atoms": [{"coords": [0.1, 0.2], "mass": 0.5}, ...],
//    "metadata": {...}}                                  (metadata optional)
//
//   {"format": "wbary-instance", "version": 1,
//    "weights": [0.5, 0.5] | "equal",
//    "measures": ["relative/path.json", {inline measure}, ...]}
// ---------------------------------------------------------------------------

DiscreteMeasure read_measure(const std::filesystem::path& path);
/// Extra metadata (e.g. coordinate scales) is stored under "metadata".
void write_measure(const std::filesystem::path& path, const DiscreteMeasure& m,
                   const std::string& metadata_json = "");
std::string measure_to_json(const DiscreteMeasure& m, const std::string& metadata_json = "");
DiscreteMeasure measure_from_json(const std::string& text, const std::string& origin = "<string>");

/// Measure file (.json), grayscale image (.pgm, .csv) or colour image (.ppm,
/// ingested with `scale`), chosen by extension.
DiscreteMeasure load_measure(const std::filesystem::path& path, const std::vector<double>& scale = {});

/// String entries of "measures" go through load_measure.
BarycenterInstance read_instance(const std::filesystem::path& path);
/// Writes every measure inline.
void write_instance(const std::filesystem::path& path, const BarycenterInstance& inst);

// ---------------------------------------------------------------------------
// Images
// ---------------------------------------------------------------------------

struct GrayImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;  // row-major, nonnegative
  double at(std::size_t r, std::size_t c) const { return pixels[r * width + c]; }
};

struct RgbImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;  // row-major, 3 channels in [0, 1]
};

/// PGM (P2/P5) or a CSV intensity grid, chosen by extension (.csv) or magic.
GrayImage read_gray_image(const std::filesystem::path& path);
/// PPM (P3/P6); channels divided by maxval.
RgbImage read_rgb_image(const std::filesystem::path& path);
/// Binary PGM/PPM, 8 bits per channel, values clamped to [0, 1] then scaled.
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
void write_ppm(const std::filesystem::path& path, const RgbImage& img);

/// Spatial coordinate of pixel index c on an image whose longer side is `extent`.
inline double pixel_center(std::size_t c, std::size_t extent) {
  return (static_cast<double>(c) + 0.5) / static_cast<double>(extent);
}

/// Atoms at pixel centres ((c+0.5)/max(H,W), (r+0.5)/max(H,W)) of positive
/// pixels, masses proportional to intensity.
DiscreteMeasure ingest_grayscale(const GrayImage& img);

/// One atom (x, y, r, g, b) per pixel, uniform mass; coordinates multiplied
/// by `scale` (five entries, all ones by default).
DiscreteMeasure ingest_rgb(const RgbImage& img, const std::vector<double>& scale = {});

enum class RenderMode { kGray, kRgb };
RenderMode parse_render_mode(const std::string& s);

struct RenderedImage {
  RenderMode mode = RenderMode::kGray;
  GrayImage gray;
  RgbImage rgb;
};

/// gray (d = 2): mass splatted to the nearest pixel of a G x G grid, scaled
/// to max 1. rgb (d = 5): mass-weighted mean colour per pixel, empty pixels
/// black; `scale` undoes the ingestion scaling.
RenderedImage render_measure(const DiscreteMeasure& m, std::size_t grid, RenderMode mode,
                             const std::vector<double>& scale = {});
void write_rendered(const std::filesystem::path& path, const RenderedImage& img);

/// `count` measures, each two concentric random ellipse outlines rasterised
/// on a G x G grid with equal-mass atoms. Deterministic per seed.
std::vector<DiscreteMeasure> generate_nested_ellipses(std::size_t count, std::size_t grid,
                                                      std::uint64_t seed);

}  // namespace wbary::io
