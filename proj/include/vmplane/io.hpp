#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "vmplane/analysis.hpp"
#include "vmplane/curvature.hpp"
#include "vmplane/errors.hpp"
#include "vmplane/geodesics.hpp"
#include "vmplane/jacobi.hpp"

namespace vmp::io {

using json = nlohmann::json;

// ---------------------------------------------------------------------------------------------
// CurvatureSpec <-> {"kind": ..., "params": {...}}

inline const char* to_string(Extrapolation e) {
  switch (e) {
    case Extrapolation::none: return "none";
    case Extrapolation::constant: return "constant";
    case Extrapolation::inverse_square: return "inverse_square";
  }
  return "none";
}

inline Extrapolation extrapolation_from(const std::string& s) {
  if (s == "none") return Extrapolation::none;
  if (s == "constant") return Extrapolation::constant;
  if (s == "inverse_square") return Extrapolation::inverse_square;
  throw InputError("unknown extrapolation '" + s + "'");
}

inline json spec_to_json(const CurvatureSpec& spec) {
  return std::visit(
      [](const auto& d) -> json {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, curv::Constant>) {
          return {{"kind", "constant"}, {"params", {{"k", d.k}}}};
        } else if constexpr (std::is_same_v<T, curv::KuFamily>) {
          return {{"kind", "ku_family"}, {"params", {{"u", d.u}}}};
        } else if constexpr (std::is_same_v<T, curv::SmoothedKu>) {
          return {{"kind", "smoothed_ku"}, {"params", {{"u", d.u}, {"epsilon", d.eps}}}};
        } else if constexpr (std::is_same_v<T, curv::Spliced>) {
          return {{"kind", "spliced"},
                  {"params",
                   {{"base", spec_to_json(*d.base)}, {"r0", d.r0}, {"depth", d.drop.depth}, {"width", d.drop.width}}}};
        } else if constexpr (std::is_same_v<T, curv::Table>) {
          return {{"kind", "table"},
                  {"params", {{"r", d.interp.x()}, {"k", d.interp.y()}, {"extrapolation", to_string(d.extrapolation)}}}};
        } else {
          throw InputError("expression curvature '" + d.label + "' is not serializable");
        }
      },
      spec.data());
}

inline double get_number(const json& p, const char* key) {
  if (!p.contains(key) || !p.at(key).is_number()) throw InputError(std::string("missing numeric parameter '") + key + "'");
  return p.at(key).get<double>();
}

inline CurvatureSpec spec_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) throw InputError("spec needs a string 'kind'");
  const std::string kind = j.at("kind");
  const json p = j.value("params", json::object());
  if (kind == "constant") return CurvatureSpec::constant(get_number(p, "k"));
  if (kind == "ku_family") return CurvatureSpec::ku_family(get_number(p, "u"));
  if (kind == "smoothed_ku") return CurvatureSpec::smoothed_ku(get_number(p, "u"), get_number(p, "epsilon"));
  if (kind == "spliced") {
    if (!p.contains("base")) throw InputError("spliced spec needs 'base'");
    return CurvatureSpec::spliced(spec_from_json(p.at("base")), get_number(p, "r0"),
                                  {get_number(p, "depth"), get_number(p, "width")});
  }
  if (kind == "table") {
    if (!p.contains("r") || !p.contains("k")) throw InputError("table spec needs 'r' and 'k'");
    return CurvatureSpec::table(p.at("r").get<std::vector<double>>(), p.at("k").get<std::vector<double>>(),
                                extrapolation_from(p.value("extrapolation", "constant")));
  }
  throw InputError("unknown curvature kind '" + kind + "'");
}

inline json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("malformed JSON in '" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------------------------
// Profiles: CSV (r, m, mp, K) or a JSON descriptor {"spec": ..., "r_max": R, "tol": T}

inline void write_profile_csv(std::ostream& os, const PlaneProfile& p, int samples = 1001) {
  os << "r,m,mp,K\n" << std::setprecision(17);
  for (int i = 0; i < samples; ++i) {
    const double r = (i == samples - 1) ? p.r_max() : p.r_max() * i / (samples - 1);
    const auto e = p.eval(r);
    os << r << ',' << e.m << ',' << e.mp << ',' << p.curvature(r) << '\n';
  }
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> cols;
};

inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty CSV");
  std::stringstream hs(line);
  for (std::string h; std::getline(hs, h, ',');) t.header.push_back(h);
  t.cols.resize(t.header.size());
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::size_t c = 0;
    for (std::string cell; std::getline(ls, cell, ','); ++c) {
      if (c >= t.cols.size()) throw InputError("CSV row " + std::to_string(row) + " has too many fields");
      try {
        t.cols[c].push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InputError("CSV row " + std::to_string(row) + ": bad number '" + cell + "'");
      }
    }
    if (c != t.cols.size()) throw InputError("CSV row " + std::to_string(row) + " has too few fields");
  }
  return t;
}

// Table-backed profile from the K column; the solve is redone on the imported grid.
inline PlaneProfile profile_from_csv(std::istream& in, double tol = 1e-11) {
  const auto t = read_csv(in);
  auto col = [&](const std::string& name) -> const std::vector<double>& {
    for (std::size_t i = 0; i < t.header.size(); ++i)
      if (t.header[i] == name) return t.cols[i];
    throw InputError("profile CSV has no '" + name + "' column");
  };
  const auto& r = col("r");
  const auto& k = col("K");
  if (r.size() < 2) throw InputError("profile CSV needs at least two rows");
  return solve_jacobi(CurvatureSpec::table(r, k, Extrapolation::constant), r.back(), tol);
}

struct ProfileSource {
  CurvatureSpec spec;
  double r_max;
  double tol;
};

inline json profile_descriptor(const CurvatureSpec& spec, double r_max, double tol) {
  return {{"spec", spec_to_json(spec)}, {"r_max", r_max}, {"tol", tol}};
}

inline ProfileSource descriptor_from_json(const json& j) {
  if (!j.is_object() || !j.contains("spec")) throw InputError("profile JSON needs 'spec'");
  return {spec_from_json(j.at("spec")), get_number(j, "r_max"), j.value("tol", 1e-11)};
}

inline bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

inline PlaneProfile load_profile(const std::string& path) {
  if (ends_with(path, ".json")) {
    const auto d = descriptor_from_json(parse_json_file(path));
    return solve_jacobi(d.spec, d.r_max, d.tol);
  }
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return profile_from_csv(in);
}

// ---------------------------------------------------------------------------------------------
// Reports

// JSON has no infinity; radii use the string "inf".
inline json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return nullptr;
  return v;
}

inline json to_json(const IntegralResult& r) {
  return {{"value", number(r.value)}, {"abs_error", number(r.abs_error)}, {"status", to_string(r.status)}};
}

inline json to_json(const RadiusResult& r) {
  json j = {{"kind", to_string(r.kind)}, {"value", number(r.value)}, {"window_limited", r.window_limited},
            {"undetermined", r.undetermined}};
  if (r.kind == RadiusResult::Kind::finite) j["bracket"] = {r.lo, r.hi};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline json to_json(const RhoResult& r) {
  json j = {{"value", r.value ? json(*r.value) : json(nullptr)}, {"unique", r.unique}, {"boundary", r.boundary}};
  if (r.value) {
    j["bracket"] = {r.lo, r.hi};
    j["K_at_rho"] = r.k_at_rho;
  }
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline json to_json(const Interval& iv) {
  return {{"lo", iv.lo},
          {"hi", iv.hi},
          {"lo_bracket", {iv.lo_bracket[0], iv.lo_bracket[1]}},
          {"hi_bracket", {iv.hi_bracket[0], iv.hi_bracket[1]}},
          {"from_origin", iv.from_origin},
          {"to_window_end", iv.to_window_end}};
}

inline json to_json(const TotalCurvature& t) {
  return {{"by_slope", number(t.by_slope)},
          {"by_integral", number(t.by_integral)},
          {"consistent", t.consistent},
          {"slope_diverges", t.slope_diverges}};
}

inline json to_json(const Integrability& i) {
  return {{"m_minus2_integrable", i.m_minus2_integrable},
          {"liminf_m_positive", i.liminf_m_positive},
          {"route", i.route},
          {"beta", number(i.beta)},
          {"min_m", i.min_m},
          {"window_limited", i.window_limited}};
}

inline json to_json(const AnalysisReport& rep) {
  json j;
  json samples = json::array();
  for (const auto& s : rep.samples)
    samples.push_back({{"r", s.r},
                       {"T", number(s.T)},
                       {"T_error", number(s.T_error)},
                       {"status", to_string(s.status)},
                       {"critical", to_string(s.critical)},
                       {"away", to_string(s.away)}});
  j["samples"] = samples;
  j["critical_intervals"] = json::array();
  for (const auto& iv : rep.critical_intervals) j["critical_intervals"].push_back(to_json(iv));
  j["away_intervals"] = json::array();
  for (const auto& iv : rep.away_intervals) j["away_intervals"].push_back(to_json(iv));
  j["gaps"] = rep.gaps;
  j["critical_connected"] = rep.critical_connected;
  j["away_connected"] = rep.away_connected;
  if (rep.R_m) j["R_m"] = to_json(*rep.R_m);
  if (rep.rho_m) j["rho_m"] = to_json(*rep.rho_m);
  if (rep.R_p) j["R_p"] = to_json(*rep.R_p);
  j["total_curvature"] = to_json(rep.total_curvature);
  j["integrability"] = to_json(rep.integrability);
  return j;
}

inline void write_intervals_csv(std::ostream& os, const AnalysisReport& rep) {
  os << "set,lo,hi,lo_bracket_lo,lo_bracket_hi,hi_bracket_lo,hi_bracket_hi\n" << std::setprecision(17);
  auto put = [&](const char* set, const Interval& iv) {
    os << set << ',' << iv.lo << ',' << iv.hi << ',' << iv.lo_bracket[0] << ',' << iv.lo_bracket[1] << ','
       << iv.hi_bracket[0] << ',' << iv.hi_bracket[1] << '\n';
  };
  for (const auto& iv : rep.critical_intervals) put("critical", iv);
  for (const auto& iv : rep.away_intervals) put("away", iv);
}

inline void write_trace_csv(std::ostream& os, const GeodesicTrace& tr) {
  os << "s,r,theta\n" << std::setprecision(17);
  for (const auto& s : tr.samples) os << s.s << ',' << s.r << ',' << s.theta << '\n';
}

// ---------------------------------------------------------------------------------------------
// SVG

class SvgPlot {
 public:
  SvgPlot(double x0, double x1, double y0, double y1, bool equal_aspect = false) : x0_(x0), x1_(x1), y0_(y0), y1_(y1) {
    if (!(x1_ > x0_)) x1_ = x0_ + 1;
    if (!(y1_ > y0_)) y1_ = y0_ + 1;
    if (equal_aspect) {
      const double sx = (x1_ - x0_) / kW, sy = (y1_ - y0_) / kH;
      if (sx > sy) {
        const double mid = 0.5 * (y0_ + y1_);
        y0_ = mid - 0.5 * sx * kH;
        y1_ = mid + 0.5 * sx * kH;
      } else {
        const double mid = 0.5 * (x0_ + x1_);
        x0_ = mid - 0.5 * sy * kW;
        x1_ = mid + 0.5 * sy * kW;
      }
    }
  }

  void polyline(const std::vector<double>& x, const std::vector<double>& y, const std::string& color) {
    body_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i)
      if (std::isfinite(x[i]) && std::isfinite(y[i])) body_ << px(x[i]) << ',' << py(y[i]) << ' ';
    body_ << "\"/>\n";
  }

  void hline(double y, const std::string& color, const std::string& label) {
    body_ << "<line x1=\"" << kM << "\" x2=\"" << kM + kW << "\" y1=\"" << py(y) << "\" y2=\"" << py(y) << "\" stroke=\""
          << color << "\" stroke-dasharray=\"6 4\"/>\n";
    body_ << "<text x=\"" << kM + kW - 4 << "\" y=\"" << py(y) - 4 << "\" text-anchor=\"end\" font-size=\"12\">" << label
          << "</text>\n";
  }

  void title(const std::string& t) { title_ = t; }

  std::string str() const {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW + 2 * kM << "\" height=\"" << kH + 2 * kM
       << "\">\n<rect x=\"" << kM << "\" y=\"" << kM << "\" width=\"" << kW << "\" height=\"" << kH
       << "\" fill=\"none\" stroke=\"#888\"/>\n";
    if (!title_.empty()) os << "<text x=\"" << kM << "\" y=\"" << kM - 10 << "\" font-size=\"14\">" << title_ << "</text>\n";
    os << "<text x=\"" << kM << "\" y=\"" << kM + kH + 18 << "\" font-size=\"11\">" << x0_ << "</text>\n"
       << "<text x=\"" << kM + kW << "\" y=\"" << kM + kH + 18 << "\" font-size=\"11\" text-anchor=\"end\">" << x1_
       << "</text>\n";
    os << body_.str() << "</svg>\n";
    return os.str();
  }

 private:
  static constexpr double kW = 640, kH = 400, kM = 40;
  double px(double x) const { return kM + kW * (x - x0_) / (x1_ - x0_); }
  double py(double y) const { return kM + kH * (1 - (y - y0_) / (y1_ - y0_)); }

  double x0_, x1_, y0_, y1_;
  std::ostringstream body_;
  std::string title_;
};

inline std::string turn_angle_svg(const AnalysisReport& rep) {
  std::vector<double> x, y;
  double lo = kPi, hi = kPi;
  for (const auto& s : rep.samples) {
    if (!std::isfinite(s.T)) continue;
    x.push_back(s.r);
    y.push_back(s.T);
    lo = std::min(lo, s.T);
    hi = std::max(hi, s.T);
  }
  const double pad = 0.05 * (hi - lo + 1e-3);
  SvgPlot plot(x.empty() ? 0 : x.front(), x.empty() ? 1 : x.back(), lo - pad, hi + pad);
  plot.title("T(r), parallel launch");
  plot.hline(kPi, "#c33", "pi");
  plot.polyline(x, y, "#236");
  return plot.str();
}

inline std::string trace_svg(const GeodesicTrace& tr) {
  std::vector<double> x, y;
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  for (const auto& s : tr.samples) {
    x.push_back(s.r * std::cos(s.theta));
    y.push_back(s.r * std::sin(s.theta));
    x0 = std::min(x0, x.back());
    x1 = std::max(x1, x.back());
    y0 = std::min(y0, y.back());
    y1 = std::max(y1, y.back());
  }
  SvgPlot plot(x0, x1, y0, y1, true);
  plot.title("geodesic in polar chart");
  plot.polyline(x, y, "#236");
  return plot.str();
}

inline std::string embed_svg(const EmbedResult& e) {
  double x0 = 0, x1 = 0, z0 = 0, z1 = 0;
  for (std::size_t i = 0; i < e.x.size(); ++i) {
    x0 = std::min(x0, e.x[i]);
    x1 = std::max(x1, e.x[i]);
    z0 = std::min(z0, e.z[i]);
    z1 = std::max(z1, e.z[i]);
  }
  SvgPlot plot(x0, x1, z0, z1, true);
  plot.title("profile curve (x, z)");
  plot.polyline(e.x, e.z, "#236");
  return plot.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << content;
}

}  // namespace vmp::io
