#include "pnlab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace pnlab {

const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::ConfigInvalid: return "CONFIG_INVALID";
    case ErrorCode::NonConverged: return "NON_CONVERGED";
    case ErrorCode::NoRoot: return "NO_ROOT";
    case ErrorCode::CflViolation: return "CFL_VIOLATION";
    case ErrorCode::NonFinite: return "NON_FINITE";
    case ErrorCode::MonotonicityViolation: return "MONOTONICITY_VIOLATION";
    case ErrorCode::FluxOutOfRange: return "FLUX_OUT_OF_RANGE";
    case ErrorCode::DomainTooNarrow: return "DOMAIN_TOO_NARROW";
    case ErrorCode::ContainmentViolation: return "CONTAINMENT_VIOLATION";
    case ErrorCode::BoundaryOrderViolation: return "BOUNDARY_ORDER_VIOLATION";
    case ErrorCode::IoFailure: return "IO_FAILURE";
  }
  return "UNKNOWN";
}

std::string fmt_g12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& body) {
  std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoFailure, "read failed on " + path);
  return ss.str();
}

std::string csv_payload(const CsvTable& t) {
  std::string out;
  for (size_t c = 0; c < t.columns.size(); ++c) {
    if (c) out += ',';
    out += t.columns[c];
  }
  out += '\n';
  const bool wide = t.precision >= 17;
  for (const auto& row : t.rows) {
    for (size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += wide ? fmt_g17(row[c]) : fmt_g12(row[c]);
    }
    out += '\n';
  }
  return out;
}

namespace {

void split_line(const std::string& line, std::vector<std::string>* out) {
  out->clear();
  size_t start = 0;
  while (true) {
    size_t comma = line.find(',', start);
    std::string tok = line.substr(start, comma == std::string::npos ? comma : comma - start);
    size_t a = tok.find_first_not_of(" \t\r");
    size_t b = tok.find_last_not_of(" \t\r");
    out->push_back(a == std::string::npos ? std::string() : tok.substr(a, b - a + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
}

bool parse_double(const std::string& tok, double* v) {
  if (tok.empty()) return false;
  char* end = nullptr;
  *v = std::strtod(tok.c_str(), &end);
  return end == tok.c_str() + tok.size();
}

}  // namespace

CsvTable read_csv_text(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> toks;
  bool have_header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos || line[a] == '#') continue;
    split_line(line, &toks);
    if (!have_header) {
      // A fully numeric first line means the file has no header row.
      have_header = true;
      std::vector<double> row(toks.size());
      bool numeric = true;
      for (size_t c = 0; c < toks.size(); ++c) numeric = numeric && parse_double(toks[c], &row[c]);
      if (numeric) {
        for (size_t c = 0; c < toks.size(); ++c) t.columns.push_back("c" + std::to_string(c));
        t.rows.push_back(std::move(row));
      } else {
        t.columns = toks;
      }
      continue;
    }
    std::vector<double> row(toks.size());
    for (size_t c = 0; c < toks.size(); ++c)
      if (!parse_double(toks[c], &row[c]))
        throw Error(ErrorCode::IoFailure,
                    "csv line " + std::to_string(lineno) + ": bad number '" + toks[c] + "'");
    if (row.size() != t.columns.size())
      throw Error(ErrorCode::IoFailure, "csv line " + std::to_string(lineno) + ": ragged row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable read_csv_file(const std::string& path) { return read_csv_text(read_text_file(path)); }

std::string field_csv(const Field& u) {
  const HalfGrid& g = u.grid;
  std::string out = "# nx=" + std::to_string(g.nx) + " ny=" + std::to_string(g.ny) +
                    " time=" + fmt_g17(u.time) + "\nx1,x2,value\n";
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      out += fmt_g17(g.x1(i));
      out += ',';
      out += fmt_g17(g.x2(j));
      out += ',';
      out += fmt_g17(u.v[g.index(i, j)]);
      out += '\n';
    }
  return out;
}

RawField raw_from_field(const Field& u) {
  RawField r;
  r.nx = u.grid.nx;
  r.ny = u.grid.ny;
  r.x1.resize(r.nx);
  r.x2.resize(r.ny);
  for (int i = 0; i < r.nx; ++i) r.x1[i] = u.grid.x1(i);
  for (int j = 0; j < r.ny; ++j) r.x2[j] = u.grid.x2(j);
  r.v = u.v;
  return r;
}

RawField read_field_csv_text(const std::string& text) {
  CsvTable t = read_csv_text(text);
  if (t.columns.size() != 3)
    throw Error(ErrorCode::IoFailure, "field csv needs exactly x1,x2,value columns");
  if (t.rows.empty()) throw Error(ErrorCode::IoFailure, "field csv has no rows");
  RawField r;
  // Rows are written j-outer, so the leading run of constant x2 is one full
  // sweep of the x1 axis.
  size_t nx = 1;
  while (nx < t.rows.size() && t.rows[nx][1] == t.rows[0][1]) ++nx;
  r.nx = static_cast<int>(nx);
  if (t.rows.size() % nx != 0)
    throw Error(ErrorCode::IoFailure, "field csv row count is not a multiple of its x1 sweep");
  r.ny = static_cast<int>(t.rows.size() / nx);
  if (r.ny < 2 || r.nx < 2) throw Error(ErrorCode::IoFailure, "field csv smaller than 2x2");
  r.x1.resize(r.nx);
  r.x2.resize(r.ny);
  r.v.resize(t.rows.size());
  for (int i = 0; i < r.nx; ++i) r.x1[i] = t.rows[i][0];
  for (int j = 0; j < r.ny; ++j) r.x2[j] = t.rows[static_cast<size_t>(j) * nx][1];
  for (size_t k = 0; k < t.rows.size(); ++k) {
    const auto& row = t.rows[k];
    int i = static_cast<int>(k % nx), j = static_cast<int>(k / nx);
    if (row[0] != r.x1[i] || row[1] != r.x2[j])
      throw Error(ErrorCode::IoFailure, "field csv is not a row-major lattice");
    r.v[k] = row[2];
  }
  return r;
}

RawField read_field_csv(const std::string& path) {
  return read_field_csv_text(read_text_file(path));
}

PeriodicProfile profile_from_csv(const std::string& path) {
  CsvTable t = read_csv_file(path);
  if (t.columns.size() < 2 || t.rows.size() < 2)
    throw Error(ErrorCode::IoFailure, "profile csv needs two columns and at least two rows");
  std::vector<std::pair<double, double>> pts;
  pts.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    if (!std::isfinite(row[0]) || !std::isfinite(row[1]))
      throw Error(ErrorCode::IoFailure, "profile csv has non-finite entries");
    pts.emplace_back(row[0], row[1]);
  }
  // Drop an explicit closing sample at u=1 repeating the opening one.
  if (std::abs(pts.back().first - 1.0) < 1e-9 && std::abs(pts.front().first) < 1e-9)
    pts.pop_back();
  const size_t n = pts.size();
  bool uniform = true;
  for (size_t i = 0; i < n; ++i)
    uniform = uniform && std::abs(pts[i].first - static_cast<double>(i) / n) < 1e-9;
  std::vector<double> samples;
  if (uniform) {
    samples.reserve(n);
    for (const auto& p : pts) samples.push_back(p.second);
  } else {
    // Irregular abscissae: wrap into [0,1), sort, and resample linearly.
    for (auto& p : pts) p.first -= std::floor(p.first);
    std::sort(pts.begin(), pts.end());
    for (size_t i = 1; i < pts.size(); ++i)
      if (pts[i].first - pts[i - 1].first < 1e-12)
        throw Error(ErrorCode::IoFailure, "profile csv has duplicate sample points");
    const int m = 512;
    samples.resize(m);
    for (int k = 0; k < m; ++k) {
      double u = static_cast<double>(k) / m;
      size_t hi = 0;
      while (hi < pts.size() && pts[hi].first <= u) ++hi;
      size_t lo = (hi == 0 ? pts.size() : hi) - 1;
      double ulo = pts[lo].first, uhi;
      double flo = pts[lo].second, fhi;
      if (hi == pts.size()) {
        uhi = pts[0].first + 1.0;
        fhi = pts[0].second;
      } else {
        uhi = pts[hi].first;
        fhi = pts[hi].second;
      }
      if (hi == 0) ulo -= 1.0;
      samples[k] = flo + (fhi - flo) * (u - ulo) / (uhi - ulo);
    }
  }
  return PeriodicProfile::tabulated(std::move(samples));
}

namespace {

std::string fmt_px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v + 0.0);
  // Normalize "-0.00" so equal layouts serialize identically.
  if (buf[0] == '-' && std::strtod(buf, nullptr) == 0.0) return buf + 1;
  return buf;
}

std::string color_at(double t) {
  static const int lo[3] = {0x2c, 0x41, 0x91};
  static const int mid[3] = {0xf0, 0xef, 0xea};
  static const int hi[3] = {0xbf, 0x36, 0x2a};
  char buf[8];
  int rgb[3];
  for (int c = 0; c < 3; ++c) {
    double s = t < 0.5 ? lo[c] + (mid[c] - lo[c]) * (2.0 * t)
                       : mid[c] + (hi[c] - mid[c]) * (2.0 * t - 1.0);
    rgb[c] = static_cast<int>(std::lround(s));
    rgb[c] = rgb[c] < 0 ? 0 : (rgb[c] > 255 ? 255 : rgb[c]);
  }
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

}  // namespace

std::string heatmap_svg(const RawField& u, const HeatmapOptions& opts) {
  if (u.nx < 2 || u.ny < 2 || u.v.size() != static_cast<size_t>(u.nx) * u.ny)
    throw Error(ErrorCode::IoFailure, "heatmap needs a populated lattice");
  double vmin = u.v[0], vmax = u.v[0];
  for (double x : u.v) {
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, "heatmap input has non-finite values");
    vmin = std::min(vmin, x);
    vmax = std::max(vmax, x);
  }
  const double span = vmax - vmin;

  const double span1 = u.x1.back() - u.x1.front();
  const double span2 = u.x2.back() - u.x2.front();
  const double plot_h = 440.0;
  double plot_w = span2 > 0.0 && span1 > 0.0 ? plot_h * span1 / span2 : plot_h;
  plot_w = plot_w < 160.0 ? 160.0 : (plot_w > 440.0 ? 440.0 : plot_w);
  const double left = 60.0, top = 44.0;
  const double cw = plot_w / u.nx, ch = plot_h / u.ny;
  const double width = left + plot_w + 150.0, height = top + plot_h + 40.0;

  std::string s;
  s.reserve(static_cast<size_t>(u.nx) * u.ny * 64 + 4096);
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt_px(width) + "\" height=\"" +
       fmt_px(height) + "\" viewBox=\"0 0 " + fmt_px(width) + " " + fmt_px(height) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  if (!opts.title.empty())
    s += "<text x=\"" + fmt_px(left) + "\" y=\"24\" font-family=\"monospace\" font-size=\"15\">" +
         opts.title + "</text>\n";

  // One rect per node cell, x2 increasing upward.
  for (int j = 0; j < u.ny; ++j) {
    double y = top + plot_h - (j + 1) * ch;
    for (int i = 0; i < u.nx; ++i) {
      double t = span > 0.0 ? (u.at(i, j) - vmin) / span : 0.5;
      s += "<rect x=\"" + fmt_px(left + i * cw) + "\" y=\"" + fmt_px(y) + "\" width=\"" +
           fmt_px(cw + 0.05) + "\" height=\"" + fmt_px(ch + 0.05) + "\" fill=\"" + color_at(t) +
           "\"/>\n";
    }
  }
  s += "<rect x=\"" + fmt_px(left) + "\" y=\"" + fmt_px(top) + "\" width=\"" + fmt_px(plot_w) +
       "\" height=\"" + fmt_px(plot_h) + "\" fill=\"none\" stroke=\"#333333\"/>\n";

  // Contact overlay: flagged stretches of the x1=0 edge.
  for (const auto& iv : opts.face_intervals) {
    double y_hi = top + plot_h * (1.0 - (iv.second - u.x2.front()) / (span2 > 0 ? span2 : 1.0));
    double y_lo = top + plot_h * (1.0 - (iv.first - u.x2.front()) / (span2 > 0 ? span2 : 1.0));
    s += "<rect class=\"contact\" x=\"" + fmt_px(left - 6.0) + "\" y=\"" + fmt_px(y_hi) +
         "\" width=\"5\" height=\"" + fmt_px(y_lo - y_hi) + "\" fill=\"#111111\"/>\n";
  }

  // Legend: vertical ramp with the data range at its ends.
  const double lx = left + plot_w + 24.0, lw = 18.0, lh = plot_h * 0.75, ly = top;
  const int strips = 32;
  for (int k = 0; k < strips; ++k) {
    double t0 = 1.0 - (k + 1.0) / strips;
    s += "<rect x=\"" + fmt_px(lx) + "\" y=\"" + fmt_px(ly + lh * k / strips) + "\" width=\"" +
         fmt_px(lw) + "\" height=\"" + fmt_px(lh / strips + 0.05) + "\" fill=\"" +
         color_at(t0 + 0.5 / strips) + "\"/>\n";
  }
  s += "<rect x=\"" + fmt_px(lx) + "\" y=\"" + fmt_px(ly) + "\" width=\"" + fmt_px(lw) +
       "\" height=\"" + fmt_px(lh) + "\" fill=\"none\" stroke=\"#333333\"/>\n";
  s += "<text x=\"" + fmt_px(lx + lw + 6.0) + "\" y=\"" + fmt_px(ly + 5.0) +
       "\" font-family=\"monospace\" font-size=\"12\">max=" + fmt_g12(vmax) + "</text>\n";
  s += "<text x=\"" + fmt_px(lx + lw + 6.0) + "\" y=\"" + fmt_px(ly + lh + 5.0) +
       "\" font-family=\"monospace\" font-size=\"12\">min=" + fmt_g12(vmin) + "</text>\n";
  s += "</svg>\n";
  return s;
}

std::string heatmap_svg(const Field& u, const HeatmapOptions& opts) {
  return heatmap_svg(raw_from_field(u), opts);
}

}  // namespace pnlab
