#include "autofocus/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unistd.h>

namespace autofocus {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Data lines of a CSV with the expected header; blank lines and CR are ignored.
std::vector<std::vector<std::string>> read_csv(const std::string& text, const std::string& header) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  bool first = true;
  const std::size_t ncol = split(header, ',').size();
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      if (line != header) throw IoError("expected CSV header '" + header + "', found '" + line + "'");
      first = false;
      continue;
    }
    auto cols = split(line, ',');
    if (cols.size() != ncol)
      throw IoError("line " + std::to_string(lineno) + ": expected " + std::to_string(ncol) + " columns");
    rows.push_back(std::move(cols));
  }
  if (first) throw IoError("missing CSV header '" + header + "'");
  return rows;
}

double to_double(const std::string& s) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) throw IoError("bad number '" + s + "'");
  return v;
}

long to_long(const std::string& s) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw IoError("bad integer '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

void write_file_atomic(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw IoError("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::string image_csv(const CVec& values, GridShape shape) {
  if (values.size() != shape.size()) throw DimensionMismatch("image_csv: size mismatch");
  std::string out = "ix,iy,re,im\n";
  for (Index l = 0; l < values.size(); ++l) {
    const int ix = static_cast<int>(l % shape.nx);
    const int iy = static_cast<int>(l / shape.nx);
    out += fmt::format("{},{},{},{}\n", ix, iy, format_double(values[l].real()), format_double(values[l].imag()));
  }
  return out;
}

CVec parse_image_csv(const std::string& text, GridShape shape) {
  const auto rows = read_csv(text, "ix,iy,re,im");
  CVec x = CVec::Zero(shape.size());
  std::vector<bool> seen(static_cast<std::size_t>(shape.size()), false);
  for (const auto& r : rows) {
    const long ix = to_long(r[0]), iy = to_long(r[1]);
    if (ix < 0 || ix >= shape.nx || iy < 0 || iy >= shape.ny)
      throw DimensionMismatch("image pixel (" + r[0] + "," + r[1] + ") outside a " + std::to_string(shape.nx) + "x" +
                              std::to_string(shape.ny) + " grid");
    const Index l = iy * shape.nx + ix;
    if (seen[static_cast<std::size_t>(l)]) throw IoError("duplicate pixel (" + r[0] + "," + r[1] + ")");
    seen[static_cast<std::size_t>(l)] = true;
    x[l] = {to_double(r[2]), to_double(r[3])};
  }
  return x;
}

std::string measurements_csv(const MeasurementSet& meas) {
  meas.validate();
  const int F = meas.freqs.size();
  std::string out = "m,k,freq_hz,re,im\n";
  for (int m = 0; m < meas.size(); ++m)
    for (Index k = 0; k < meas.y[m].size(); ++k)
      out += fmt::format("{},{},{},{},{}\n", m, k, format_double(meas.freqs.freq(static_cast<int>(k % F))),
                         format_double(meas.y[m][k].real()), format_double(meas.y[m][k].imag()));
  return out;
}

void parse_measurements_csv(const std::string& text, MeasurementSet& meas) {
  const auto rows = read_csv(text, "m,k,freq_hz,re,im");
  const int M = meas.size();
  const int F = meas.freqs.size();
  meas.y.assign(M, CVec());
  std::vector<std::vector<bool>> seen(M);
  for (int m = 0; m < M; ++m) {
    meas.y[m] = CVec::Zero(static_cast<Index>(F) * meas.pairs[m].positions());
    seen[m].assign(static_cast<std::size_t>(meas.y[m].size()), false);
  }
  for (const auto& r : rows) {
    const long m = to_long(r[0]), k = to_long(r[1]);
    if (m < 0 || m >= M) throw DimensionMismatch("measurement pair index " + r[0] + " out of range");
    if (k < 0 || k >= meas.y[m].size()) throw DimensionMismatch("measurement row " + r[1] + " out of range");
    const double f = to_double(r[2]);
    const double expect = meas.freqs.freq(static_cast<int>(k % F));
    if (std::abs(f - expect) > 1e-9 * expect) throw DimensionMismatch("measurement frequency " + r[2] + " off grid");
    if (seen[m][static_cast<std::size_t>(k)]) throw IoError("duplicate measurement (" + r[0] + "," + r[1] + ")");
    seen[m][static_cast<std::size_t>(k)] = true;
    meas.y[m][k] = {to_double(r[3]), to_double(r[4])};
  }
  for (int m = 0; m < M; ++m)
    if (std::find(seen[m].begin(), seen[m].end(), false) != seen[m].end())
      throw DimensionMismatch("measurements for pair " + std::to_string(m) + " are incomplete");
}

std::string geometry_csv(const std::vector<AntennaPair>& pairs) {
  std::string out = "m,p,tx_x,tx_y,rx_x,rx_y,tx_true_x,tx_true_y,rx_true_x,rx_true_y,ap_x,ap_y\n";
  for (std::size_t m = 0; m < pairs.size(); ++m) {
    const AntennaPair& p = pairs[m];
    const std::vector<Point2> ap = p.aperture.empty() ? std::vector<Point2>{Point2{}} : p.aperture;
    for (std::size_t k = 0; k < ap.size(); ++k)
      out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", m, k, format_double(p.tx.x), format_double(p.tx.y),
                         format_double(p.rx.x), format_double(p.rx.y), format_double(p.tx_true.x),
                         format_double(p.tx_true.y), format_double(p.rx_true.x), format_double(p.rx_true.y),
                         format_double(ap[k].x), format_double(ap[k].y));
  }
  return out;
}

std::vector<AntennaPair> parse_geometry_csv(const std::string& text) {
  const auto rows = read_csv(text, "m,p,tx_x,tx_y,rx_x,rx_y,tx_true_x,tx_true_y,rx_true_x,rx_true_y,ap_x,ap_y");
  std::vector<AntennaPair> pairs;
  std::vector<int> counts;
  for (const auto& r : rows) {
    const long m = to_long(r[0]), k = to_long(r[1]);
    if (m == static_cast<long>(pairs.size()) && k == 0) {
      AntennaPair p;
      p.id = static_cast<int>(m);
      p.tx = {to_double(r[2]), to_double(r[3])};
      p.rx = {to_double(r[4]), to_double(r[5])};
      p.tx_true = {to_double(r[6]), to_double(r[7])};
      p.rx_true = {to_double(r[8]), to_double(r[9])};
      pairs.push_back(p);
      counts.push_back(0);
    } else if (m != static_cast<long>(pairs.size()) - 1 || k != counts.back()) {
      throw IoError("geometry rows out of order at m=" + r[0] + ", p=" + r[1]);
    }
    pairs.back().aperture.push_back({to_double(r[10]), to_double(r[11])});
    ++counts.back();
  }
  for (auto& p : pairs)
    if (p.aperture.size() == 1 && p.aperture[0] == Point2{}) p.aperture.clear();
  return pairs;
}

std::string kernels_csv(const std::vector<ShiftKernel>& kernels) {
  std::string out = "m,dx,dy,value\n";
  for (std::size_t m = 0; m < kernels.size(); ++m)
    for (Index k = 0; k < kernels[m].values().size(); ++k) {
      const PixelOffset o = kernels[m].offset_of(k);
      out += fmt::format("{},{},{},{}\n", m, o.dx, o.dy, format_double(kernels[m].values()[k]));
    }
  return out;
}

std::vector<ShiftKernel> parse_kernels_csv(const std::string& text) {
  const auto rows = read_csv(text, "m,dx,dy,value");
  std::map<long, std::vector<std::pair<PixelOffset, double>>> entries;
  for (const auto& r : rows)
    entries[to_long(r[0])].push_back({{static_cast<int>(to_long(r[1])), static_cast<int>(to_long(r[2]))}, to_double(r[3])});
  std::vector<ShiftKernel> out;
  for (const auto& [m, list] : entries) {
    if (m != static_cast<long>(out.size())) throw IoError("kernel indices are not contiguous");
    const int n_h = static_cast<int>(std::lround(std::sqrt(static_cast<double>(list.size()))));
    if (n_h * n_h != static_cast<int>(list.size()) || n_h % 2 == 0)
      throw IoError("kernel " + std::to_string(m) + " is not an odd square");
    ShiftKernel shape = ShiftKernel::identity(n_h);
    RVec v = RVec::Zero(n_h * n_h);
    for (const auto& [o, val] : list) {
      if (std::max(std::abs(o.dx), std::abs(o.dy)) > shape.half_width()) throw IoError("kernel offset out of range");
      v[shape.index_of(o)] = val;
    }
    out.emplace_back(n_h, v);
  }
  return out;
}

std::string pgm_image(const CVec& values, GridShape shape) {
  if (values.size() != shape.size()) throw DimensionMismatch("pgm_image: size mismatch");
  const RVec mag = values.cwiseAbs();
  const double peak = mag.size() ? mag.maxCoeff() : 0.0;
  std::string out = fmt::format("P5\n{} {}\n255\n", shape.nx, shape.ny);
  // Row iy = ny - 1 first so +y points up in viewers.
  for (int iy = shape.ny - 1; iy >= 0; --iy)
    for (int ix = 0; ix < shape.nx; ++ix) {
      const double v = peak > 0.0 ? mag[static_cast<Index>(iy) * shape.nx + ix] / peak : 0.0;
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v))));
    }
  return out;
}

std::string roc_svg(const std::vector<std::pair<std::string, RocCurve>>& curves, const std::string& title) {
  constexpr double W = 420, H = 420, L = 60, T = 40, S = 320;
  static const std::array<const char*, 6> colors{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
      "font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      W, H);
  out += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\">{}</text>\n", L + S / 2, title);
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", L, T, S, S);
  for (int i = 0; i <= 4; ++i) {
    const double t = i / 4.0;
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{:.2f}</text>\n", L + t * S, T + S + 16, t);
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.2f}</text>\n", L - 6, T + S - t * S + 4, t);
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">Pfa</text>\n", L + S / 2, T + S + 34);
  out += fmt::format("<text x=\"16\" y=\"{}\" transform=\"rotate(-90 16 {})\" text-anchor=\"middle\">Pd</text>\n",
                     T + S / 2, T + S / 2);
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& roc = curves[c].second;
    std::string pts;
    for (std::size_t i = 0; i < roc.pfa.size(); ++i)
      pts += fmt::format("{:.2f},{:.2f} ", L + roc.pfa[i] * S, T + S - roc.pd[i] * S);
    const char* color = colors[c % colors.size()];
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n", color, pts);
    out += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"{}\">{} (AUC {:.3f})</text>\n", L + S - 150,
                       T + S - 12 - 16.0 * (curves.size() - 1 - c), color, curves[c].first, roc.auc);
  }
  out += "</svg>\n";
  return out;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace autofocus
