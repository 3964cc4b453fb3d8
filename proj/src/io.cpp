#include "wbary/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"
#include "wbary/rng.hpp"

namespace wbary::io {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line number.
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min(e.byte, text.size()); ++i) line += text[i] == '\n';
    throw ParseError(origin + ": line " + std::to_string(line) + ": " + e.what());
  }
}

void expect_header(const json& j, const std::string& format, const std::string& origin) {
  if (!j.is_object()) throw ParseError(origin + ": top level must be an object");
  if (!j.contains("format") || j["format"] != format) {
    throw ParseError(origin + ": field 'format' must be \"" + format + "\"");
  }
  if (!j.contains("version") || !j["version"].is_number_integer()) {
    throw ParseError(origin + ": missing integer field 'version'");
  }
  if (j["version"].get<int>() != kFormatVersion) {
    throw ParseError(origin + ": unsupported version " + j["version"].dump());
  }
}

DiscreteMeasure measure_from_object(const json& j, const std::string& origin) {
  expect_header(j, "wbary-measure", origin);
  if (!j.contains("d") || !j["d"].is_number_unsigned() || j["d"].get<std::size_t>() == 0) {
    throw ParseError(origin + ": field 'd' must be a positive integer");
  }
  const std::size_t d = j["d"].get<std::size_t>();
  if (!j.contains("atoms") || !j["atoms"].is_array()) {
    throw ParseError(origin + ": field 'atoms' must be an array");
  }
  PointSet atoms(d);
  std::vector<double> masses;
  const json& arr = j["atoms"];
  for (std::size_t a = 0; a < arr.size(); ++a) {
    const std::string where = origin + ": atoms[" + std::to_string(a) + "]";
    const json& atom = arr[a];
    if (!atom.is_object() || !atom.contains("coords") || !atom["coords"].is_array() ||
        !atom.contains("mass") || !atom["mass"].is_number()) {
      throw ParseError(where + ": expected {\"coords\": [...], \"mass\": number}");
    }
    const json& coords = atom["coords"];
    if (coords.size() != d) {
      throw ParseError(where + ".coords: has " + std::to_string(coords.size()) +
                       " entries, expected d=" + std::to_string(d));
    }
    std::vector<double> p(d);
    for (std::size_t c = 0; c < d; ++c) {
      if (!coords[c].is_number()) throw ParseError(where + ".coords[" + std::to_string(c) + "]: not a number");
      p[c] = coords[c].get<double>();
    }
    atoms.push_back(p);
    masses.push_back(atom["mass"].get<double>());
  }
  const ValidationReport report = validate_measure(atoms, masses);
  if (!report.ok()) throw InvalidInput(origin + ": " + report.describe());
  return DiscreteMeasure(std::move(atoms), std::move(masses));
}

json measure_to_object(const DiscreteMeasure& m) {
  json atoms = json::array();
  for (std::size_t a = 0; a < m.size(); ++a) {
    const auto p = m.atom(a);
    atoms.push_back({{"coords", std::vector<double>(p.begin(), p.end())}, {"mass", m.mass(a)}});
  }
  return {{"format", "wbary-measure"}, {"version", kFormatVersion}, {"d", m.dim()}, {"atoms", atoms}};
}

std::vector<std::string> pnm_tokens(const std::string& data, std::size_t count, std::size_t& pos) {
  std::vector<std::string> out;
  while (out.size() < count && pos < data.size()) {
    const char ch = data[pos];
    if (ch == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(ch))) {
      ++pos;
    } else {
      std::size_t start = pos;
      while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos])) && data[pos] != '#') ++pos;
      out.push_back(data.substr(start, pos - start));
    }
  }
  return out;
}

struct Pnm {
  int channels = 1;
  std::size_t width = 0, height = 0;
  std::vector<double> values;  // divided by maxval
};

Pnm read_pnm(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  const std::string origin = path.string();
  std::size_t pos = 0;
  auto header = pnm_tokens(data, 4, pos);
  if (header.size() < 4) throw ParseError(origin + ": truncated PNM header");
  const std::string& magic = header[0];
  Pnm img;
  bool binary;
  if (magic == "P2" || magic == "P5") {
    img.channels = 1;
    binary = magic == "P5";
  } else if (magic == "P3" || magic == "P6") {
    img.channels = 3;
    binary = magic == "P6";
  } else {
    throw ParseError(origin + ": unsupported PNM magic '" + magic + "'");
  }
  long w, h, maxval;
  try {
    w = std::stol(header[1]);
    h = std::stol(header[2]);
    maxval = std::stol(header[3]);
  } catch (const std::exception&) {
    throw ParseError(origin + ": malformed PNM header");
  }
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw ParseError(origin + ": invalid PNM dimensions");
  img.width = static_cast<std::size_t>(w);
  img.height = static_cast<std::size_t>(h);
  const std::size_t n = img.width * img.height * static_cast<std::size_t>(img.channels);
  img.values.resize(n);
  if (binary) {
    ++pos;  // single whitespace after maxval
    const std::size_t bytes = maxval < 256 ? 1 : 2;
    if (data.size() < pos + n * bytes) throw ParseError(origin + ": truncated PNM pixel data");
    for (std::size_t i = 0; i < n; ++i) {
      unsigned v = static_cast<unsigned char>(data[pos + i * bytes]);
      if (bytes == 2) v = (v << 8) | static_cast<unsigned char>(data[pos + i * bytes + 1]);
      img.values[i] = static_cast<double>(v) / static_cast<double>(maxval);
    }
  } else {
    const auto tokens = pnm_tokens(data, n, pos);
    if (tokens.size() < n) throw ParseError(origin + ": truncated PNM pixel data");
    for (std::size_t i = 0; i < n; ++i) {
      img.values[i] = std::stod(tokens[i]) / static_cast<double>(maxval);
    }
  }
  return img;
}

void write_pnm(const std::filesystem::path& path, const char* magic, std::size_t w, std::size_t h,
               const std::vector<double>& values) {
  std::string out = std::string(magic) + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  for (double v : values) {
    const double c = std::clamp(v, 0.0, 1.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0))));
  }
  write_file(path, out);
}

GrayImage read_csv_grid(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  GrayImage img;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError(path.string() + ": line " + std::to_string(lineno) + ": not a number: '" + cell + "'");
      }
    }
    if (img.height == 0) img.width = row.size();
    if (row.size() != img.width) {
      throw ParseError(path.string() + ": line " + std::to_string(lineno) + ": has " +
                       std::to_string(row.size()) + " columns, expected " + std::to_string(img.width));
    }
    img.pixels.insert(img.pixels.end(), row.begin(), row.end());
    ++img.height;
  }
  if (img.height == 0) throw ParseError(path.string() + ": empty intensity grid");
  return img;
}

std::vector<double> resolve_scale(const std::vector<double>& scale, std::size_t d) {
  if (scale.empty()) return std::vector<double>(d, 1.0);
  if (scale.size() != d) {
    throw InvalidInput("coordinate scale has " + std::to_string(scale.size()) + " entries, expected " +
                       std::to_string(d));
  }
  for (double s : scale) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidInput("coordinate scales must be positive");
  }
  return scale;
}

std::size_t nearest_pixel(double coord, std::size_t grid) {
  const double p = std::floor(coord * static_cast<double>(grid));
  if (p < 0.0) return 0;
  return std::min(static_cast<std::size_t>(p), grid - 1);
}

}  // namespace

DiscreteMeasure measure_from_json(const std::string& text, const std::string& origin) {
  return measure_from_object(parse_json(text, origin), origin);
}

std::string measure_to_json(const DiscreteMeasure& m, const std::string& metadata_json) {
  json j = measure_to_object(m);
  if (!metadata_json.empty()) j["metadata"] = json::parse(metadata_json);
  return j.dump(1) + "\n";
}

DiscreteMeasure read_measure(const std::filesystem::path& path) {
  return measure_from_json(read_file(path), path.string());
}

void write_measure(const std::filesystem::path& path, const DiscreteMeasure& m,
                   const std::string& metadata_json) {
  write_file(path, measure_to_json(m, metadata_json));
}

DiscreteMeasure load_measure(const std::filesystem::path& path, const std::vector<double>& scale) {
  const std::string ext = path.extension().string();
  if (ext == ".pgm" || ext == ".csv") return ingest_grayscale(read_gray_image(path));
  if (ext == ".ppm") return ingest_rgb(read_rgb_image(path), scale);
  return read_measure(path);
}

BarycenterInstance read_instance(const std::filesystem::path& path) {
  const std::string origin = path.string();
  const json j = parse_json(read_file(path), origin);
  expect_header(j, "wbary-instance", origin);
  if (!j.contains("measures") || !j["measures"].is_array() || j["measures"].empty()) {
    throw ParseError(origin + ": field 'measures' must be a nonempty array");
  }
  std::vector<DiscreteMeasure> measures;
  const json& arr = j["measures"];
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = origin + ": measures[" + std::to_string(i) + "]";
    if (arr[i].is_string()) {
      std::filesystem::path p = arr[i].get<std::string>();
      if (p.is_relative()) p = path.parent_path() / p;
      measures.push_back(load_measure(p));
    } else if (arr[i].is_object()) {
      measures.push_back(measure_from_object(arr[i], where));
    } else {
      throw ParseError(where + ": expected a file path or an inline measure");
    }
  }
  if (!j.contains("weights") || j["weights"] == "equal") {
    return BarycenterInstance::equal_weights(std::move(measures));
  }
  if (!j["weights"].is_array()) throw ParseError(origin + ": field 'weights' must be an array or \"equal\"");
  std::vector<double> weights;
  for (std::size_t i = 0; i < j["weights"].size(); ++i) {
    if (!j["weights"][i].is_number()) {
      throw ParseError(origin + ": weights[" + std::to_string(i) + "]: not a number");
    }
    weights.push_back(j["weights"][i].get<double>());
  }
  return BarycenterInstance(std::move(measures), std::move(weights));
}

void write_instance(const std::filesystem::path& path, const BarycenterInstance& inst) {
  json measures = json::array();
  for (const auto& m : inst.measures()) measures.push_back(measure_to_object(m));
  json j = {{"format", "wbary-instance"},
            {"version", kFormatVersion},
            {"weights", inst.weights()},
            {"measures", measures}};
  write_file(path, j.dump(1) + "\n");
}

GrayImage read_gray_image(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return read_csv_grid(path);
  Pnm pnm = read_pnm(path);
  if (pnm.channels != 1) throw ParseError(path.string() + ": expected a grayscale (P2/P5) image");
  return GrayImage{pnm.height, pnm.width, std::move(pnm.values)};
}

RgbImage read_rgb_image(const std::filesystem::path& path) {
  Pnm pnm = read_pnm(path);
  if (pnm.channels != 3) throw ParseError(path.string() + ": expected a colour (P3/P6) image");
  return RgbImage{pnm.height, pnm.width, std::move(pnm.values)};
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  write_pnm(path, "P5", img.width, img.height, img.pixels);
}

void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
  write_pnm(path, "P6", img.width, img.height, img.pixels);
}

DiscreteMeasure ingest_grayscale(const GrayImage& img) {
  if (img.height == 0 || img.width == 0 || img.pixels.size() != img.height * img.width) {
    throw InvalidInput("grayscale image has inconsistent dimensions");
  }
  const std::size_t extent = std::max(img.height, img.width);
  PointSet atoms(2);
  std::vector<double> masses;
  double total = 0.0;
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      const double v = img.at(r, c);
      if (!std::isfinite(v) || v < 0.0) throw InvalidInput("pixel intensities must be finite and nonnegative");
      if (v <= 0.0) continue;
      const double p[2] = {pixel_center(c, extent), pixel_center(r, extent)};
      atoms.push_back(p);
      masses.push_back(v);
      total += v;
    }
  }
  if (masses.empty()) throw InvalidInput("image has no positive pixel");
  for (double& m : masses) m /= total;
  return DiscreteMeasure(std::move(atoms), std::move(masses));
}

DiscreteMeasure ingest_rgb(const RgbImage& img, const std::vector<double>& scale_in) {
  if (img.height == 0 || img.width == 0 || img.pixels.size() != 3 * img.height * img.width) {
    throw InvalidInput("colour image has inconsistent dimensions");
  }
  const auto scale = resolve_scale(scale_in, 5);
  const std::size_t extent = std::max(img.height, img.width);
  const std::size_t n = img.height * img.width;
  PointSet atoms(5);
  atoms.reserve(n);
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      const double* px = &img.pixels[3 * (r * img.width + c)];
      const double p[5] = {scale[0] * pixel_center(c, extent), scale[1] * pixel_center(r, extent),
                           scale[2] * px[0], scale[3] * px[1], scale[4] * px[2]};
      atoms.push_back(p);
    }
  }
  return DiscreteMeasure(std::move(atoms), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

RenderMode parse_render_mode(const std::string& s) {
  if (s == "gray") return RenderMode::kGray;
  if (s == "rgb") return RenderMode::kRgb;
  throw InvalidInput("unknown render mode '" + s + "' (expected gray or rgb)");
}

RenderedImage render_measure(const DiscreteMeasure& m, std::size_t grid, RenderMode mode,
                             const std::vector<double>& scale_in) {
  if (grid == 0) throw InvalidInput("render grid must be positive");
  const std::size_t need = mode == RenderMode::kGray ? 2 : 5;
  if (m.dim() != need) {
    throw InvalidInput("render mode needs d=" + std::to_string(need) + ", measure has d=" +
                       std::to_string(m.dim()));
  }
  const auto scale = resolve_scale(scale_in, need);
  RenderedImage out;
  out.mode = mode;
  std::vector<double> mass(grid * grid, 0.0);
  std::vector<double> color(3 * grid * grid, 0.0);
  bool any = false;
  for (std::size_t a = 0; a < m.size(); ++a) {
    if (m.mass(a) <= 1e-12) continue;
    const auto p = m.atom(a);
    const std::size_t c = nearest_pixel(p[0] / scale[0], grid);
    const std::size_t r = nearest_pixel(p[1] / scale[1], grid);
    mass[r * grid + c] += m.mass(a);
    if (mode == RenderMode::kRgb) {
      for (std::size_t ch = 0; ch < 3; ++ch) color[3 * (r * grid + c) + ch] += m.mass(a) * p[2 + ch] / scale[2 + ch];
    }
    any = true;
  }
  if (!any) throw InvalidInput("measure has no atom with positive mass to render");
  if (mode == RenderMode::kGray) {
    const double peak = *std::max_element(mass.begin(), mass.end());
    for (double& v : mass) v /= peak;
    out.gray = GrayImage{grid, grid, std::move(mass)};
  } else {
    for (std::size_t px = 0; px < grid * grid; ++px) {
      for (std::size_t ch = 0; ch < 3; ++ch) {
        color[3 * px + ch] = mass[px] > 0.0 ? color[3 * px + ch] / mass[px] : 0.0;
      }
    }
    out.rgb = RgbImage{grid, grid, std::move(color)};
  }
  return out;
}

void write_rendered(const std::filesystem::path& path, const RenderedImage& img) {
  if (img.mode == RenderMode::kGray) {
    write_pgm(path, img.gray);
  } else {
    write_ppm(path, img.rgb);
  }
}

namespace {

// Pixels (row, col) hit by a dense parametric walk of the ellipse outline;
// empty when the outline leaves the grid.
std::set<std::pair<std::size_t, std::size_t>> ellipse_outline(double cx, double cy, double a, double b,
                                                              double phi, std::size_t grid) {
  std::set<std::pair<std::size_t, std::size_t>> pixels;
  const auto steps = static_cast<std::size_t>(std::ceil(16.0 * std::numbers::pi * std::max(a, b))) + 32;
  const double cp = std::cos(phi), sp = std::sin(phi);
  const double g = static_cast<double>(grid);
  for (std::size_t s = 0; s < steps; ++s) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(s) / static_cast<double>(steps);
    const double ex = a * std::cos(th), ey = b * std::sin(th);
    const double x = cx + cp * ex - sp * ey;
    const double y = cy + sp * ex + cp * ey;
    if (x < 0.0 || y < 0.0 || x >= g || y >= g) return {};
    pixels.emplace(static_cast<std::size_t>(y), static_cast<std::size_t>(x));
  }
  return pixels;
}

}  // namespace

std::vector<DiscreteMeasure> generate_nested_ellipses(std::size_t count, std::size_t grid,
                                                      std::uint64_t seed) {
  if (grid < 8) throw InvalidInput("ellipse grid must be at least 8");
  constexpr std::size_t kMaxTries = 1000;
  constexpr std::size_t kMinAtoms = 30;
  constexpr std::size_t kMaxAtoms = 300;
  Rng rng(seed);
  const double g = static_cast<double>(grid);
  std::vector<DiscreteMeasure> out;
  for (std::size_t m = 0; m < count; ++m) {
    bool made = false;
    for (std::size_t attempt = 0; attempt < kMaxTries && !made; ++attempt) {
      const double cx = 0.5 * g + rng.uniform(-0.1, 0.1) * g;
      const double cy = 0.5 * g + rng.uniform(-0.1, 0.1) * g;
      const double a = rng.uniform(0.15, 0.45) * g;
      const double b = rng.uniform(0.15, 0.45) * g;
      const double phi = rng.uniform(0.0, std::numbers::pi);
      const double ratio = rng.uniform(0.45, 0.7);
      const auto outer = ellipse_outline(cx, cy, a, b, phi, grid);
      const auto inner = ellipse_outline(cx, cy, ratio * a, ratio * b, phi, grid);
      if (outer.empty() || inner.empty()) continue;
      std::set<std::pair<std::size_t, std::size_t>> all = outer;
      bool overlap = false;
      for (const auto& px : inner) overlap = overlap || !all.insert(px).second;
      if (overlap || all.size() < kMinAtoms || all.size() > kMaxAtoms) continue;
      PointSet atoms(2);
      for (const auto& [r, c] : all) {
        const double p[2] = {pixel_center(c, grid), pixel_center(r, grid)};
        atoms.push_back(p);
      }
      const double w = 1.0 / static_cast<double>(all.size());
      out.emplace_back(std::move(atoms), std::vector<double>(all.size(), w));
      made = true;
    }
    if (!made) {
      throw InvalidInput("could not draw a non-degenerate nested ellipse after " +
                         std::to_string(kMaxTries) + " tries");
    }
  }
  return out;
}

}  // namespace wbary::io
