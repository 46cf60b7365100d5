// Copyright 2026 The ctmp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ctmp/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ctmp/error.hpp"
#include "ctmp/matrix_exp.hpp"
#include "json.hpp"

namespace ctmp {

using nlohmann::json;

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string g17(double v) { return fmt("%.17g", v); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void parse_error(int line, const std::string& what) {
  throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& tok, int line) {
  const std::string t = trim(tok);
  if (t.empty()) parse_error(line, "empty number");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v)) {
    parse_error(line, "bad number '" + t + "'");
  }
  return v;
}

std::vector<double> parse_row(const std::string& row, int line) {
  std::vector<double> out;
  std::string s = row;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(parse_number(tok, line));
  return out;
}

Matrix parse_matrix(const std::string& value, int line) {
  const std::string v = trim(value);
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
    // Bare scalar.
    return Matrix::Constant(1, 1, parse_number(v, line));
  }
  std::vector<std::vector<double>> rows;
  std::stringstream in(v.substr(1, v.size() - 2));
  std::string row;
  while (std::getline(in, row, ';')) rows.push_back(parse_row(row, line));
  if (rows.empty() || rows.front().empty()) parse_error(line, "empty matrix");
  Matrix M(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) parse_error(line, "ragged matrix");
    for (std::size_t j = 0; j < rows[i].size(); ++j) M(i, j) = rows[i][j];
  }
  return M;
}

Vector as_vector(const Matrix& M, int line) {
  if (M.rows() != 1 && M.cols() != 1) parse_error(line, "expected a vector");
  return Eigen::Map<const Vector>(M.data(), M.size());
}

std::string format_matrix(const Matrix& M) {
  std::string out = "[";
  for (int i = 0; i < M.rows(); ++i) {
    if (i > 0) out += "; ";
    for (int j = 0; j < M.cols(); ++j) {
      if (j > 0) out += ", ";
      out += g17(M(i, j));
    }
  }
  return out + "]";
}

json to_json(const Matrix& M) {
  json rows = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    json r = json::array();
    for (int j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
    rows.push_back(r);
  }
  return rows;
}

json to_json(const Vector& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from(const json& j) {
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j.at(i).get<double>();
  return v;
}

json box_json(const ParameterBox& b) { return {{"lo", to_json(b.lo)}, {"hi", to_json(b.hi)}}; }

ParameterBox box_from(const json& j) {
  return {vector_from(j.at("lo")), vector_from(j.at("hi"))};
}

std::vector<std::string> parameter_names(int dim) {
  if (dim == 1) return {"x0"};
  std::vector<std::string> out;
  for (int i = 0; i < dim; ++i) out.push_back("x0" + std::to_string(i + 1));
  return out;
}

std::string inequality_text(const AffineInequality& h) {
  const auto names = parameter_names(static_cast<int>(h.a.size()));
  std::string out;
  for (int i = 0; i < h.a.size(); ++i) {
    const double c = h.a(i);
    out += (i == 0 ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + "));
    out += fmt("%.6g", std::abs(c)) + "*" + names[i];
  }
  out += (h.b < 0 ? " - " : " + ") + fmt("%.6g", std::abs(h.b)) + " <= 0";
  return out;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// ---------------------------------------------------------------------------
// Minimal SVG writer.

const char* const kPalette[] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2",
                                "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

std::string color(int i) {
  if (i < 10) return kPalette[i];
  // Golden-angle hues beyond the palette.
  const int hue = (i * 137) % 360;
  return "hsl(" + std::to_string(hue) + ",55%,60%)";
}

class Svg {
 public:
  Svg(double width, double height) : w_(width), h_(height) {}

  void set_view(double x0, double x1, double y0, double y1, double left, double right,
                double top, double bottom) {
    x0_ = x0;
    x1_ = x1;
    y0_ = y0;
    y1_ = y1;
    l_ = left;
    r_ = right;
    t_ = top;
    b_ = bottom;
  }
  double px(double x) const { return l_ + (x - x0_) / (x1_ - x0_) * (w_ - l_ - r_); }
  double py(double y) const { return h_ - b_ - (y - y0_) / (y1_ - y0_) * (h_ - t_ - b_); }

  void raw(const std::string& s) { body_ += s + "\n"; }
  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& extra = "") {
    raw("<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
        "\" height=\"" + num(h) + "\" fill=\"" + fill + "\" " + extra + "/>");
  }
  void text(double x, double y, const std::string& s, int size = 11,
            const std::string& anchor = "middle") {
    raw("<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + std::to_string(size) +
        "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\">" + s + "</text>");
  }
  void line(double x0, double y0, double x1, double y1, const std::string& stroke,
            const std::string& extra = "") {
    raw("<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x1) + "\" y2=\"" +
        num(y1) + "\" stroke=\"" + stroke + "\" " + extra + "/>");
  }
  // Points in data coordinates.
  void path(const std::vector<std::pair<double, double>>& pts, bool closed,
            const std::string& style) {
    if (pts.empty()) return;
    std::string d;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      d += (i == 0 ? "M" : "L") + num(px(pts[i].first)) + "," + num(py(pts[i].second));
    }
    if (closed) d += "Z";
    raw("<path d=\"" + d + "\" " + style + "/>");
  }
  void axes(const std::string& xlabel, const std::string& ylabel) {
    line(px(x0_), py(y0_), px(x1_), py(y0_), "black");
    line(px(x0_), py(y0_), px(x0_), py(y1_), "black");
    for (int k = 0; k <= 4; ++k) {
      const double x = x0_ + (x1_ - x0_) * k / 4.0, y = y0_ + (y1_ - y0_) * k / 4.0;
      text(px(x), py(y0_) + 14, fmt("%.3g", x), 10);
      text(px(x0_) - 4, py(y) + 3, fmt("%.3g", y), 10, "end");
    }
    text(0.5 * (px(x0_) + px(x1_)), h_ - 4, xlabel, 12);
    raw("<text x=\"12\" y=\"" + num(0.5 * (py(y0_) + py(y1_))) +
        "\" font-size=\"12\" font-family=\"sans-serif\" text-anchor=\"middle\" "
        "transform=\"rotate(-90 12 " +
        num(0.5 * (py(y0_) + py(y1_))) + ")\">" + ylabel + "</text>");
  }
  std::string str() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w_) + "\" height=\"" +
           num(h_) + "\" viewBox=\"0 0 " + num(w_) + " " + num(h_) + "\">\n" +
           "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + body_ + "</svg>\n";
  }

  static std::string num(double v) { return fmt("%.2f", v); }

 private:
  double w_, h_;
  double x0_ = 0, x1_ = 1, y0_ = 0, y1_ = 1, l_ = 0, r_ = 0, t_ = 0, b_ = 0;
  std::string body_;
};

std::pair<double, double> centroid(const Polygon& p) {
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& v : p) c += v;
  c /= std::max<std::size_t>(1, p.size());
  return {c.x(), c.y()};
}

std::vector<std::pair<double, double>> pairs(const Polygon& p) {
  std::vector<std::pair<double, double>> out;
  for (const auto& v : p) out.emplace_back(v.x(), v.y());
  return out;
}

// Strip of labelled intervals for a scalar parameter.
struct Interval {
  double lo, hi;
  std::string name, fill;
};

std::string strip_svg(const ParameterBox& box, const std::vector<Interval>& items,
                      const std::string& title) {
  Svg svg(820, 150);
  svg.set_view(box.lo(0), box.hi(0), 0, 1, 40, 40, 30, 40);
  svg.text(410, 18, title, 13);
  for (const auto& it : items) {
    const double x = svg.px(it.lo), w = svg.px(it.hi) - x;
    svg.rect(x, svg.py(1), w, svg.py(0) - svg.py(1), it.fill, "stroke=\"white\"");
    if (w > 18) svg.text(x + 0.5 * w, 0.5 * (svg.py(0) + svg.py(1)) + 4, it.name, 10);
  }
  svg.line(svg.px(box.lo(0)), svg.py(0), svg.px(box.hi(0)), svg.py(0), "black");
  for (int k = 0; k <= 8; ++k) {
    const double x = box.lo(0) + (box.hi(0) - box.lo(0)) * k / 8.0;
    svg.text(svg.px(x), svg.py(0) + 14, fmt("%.3g", x), 10);
  }
  svg.text(410, 146, "x0", 12);
  return svg.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Files

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParse, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kParse, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorCode::kParse, "write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

LtiOcProblem parse_problem(const std::string& text) {
  std::map<std::string, std::pair<std::string, int>> kv;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw.substr(0, raw.find('#')));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) parse_error(line, "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    if (!kv.emplace(key, std::make_pair(trim(s.substr(eq + 1)), line)).second) {
      parse_error(line, "duplicate key '" + key + "'");
    }
  }
  static const std::set<std::string> known = {"A",  "B", "Q", "R",        "P",        "Gx",
                                              "Gu", "b", "T", "theta_lo", "theta_hi", "names"};
  for (const auto& [key, val] : kv) {
    if (!known.count(key)) parse_error(val.second, "unknown key '" + key + "'");
  }
  auto get = [&](const std::string& key) -> const std::pair<std::string, int>& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorCode::kParse, "missing key '" + key + "'");
    return it->second;
  };
  auto mat = [&](const std::string& key) {
    const auto& [v, l] = get(key);
    return parse_matrix(v, l);
  };
  auto vec = [&](const std::string& key) {
    const auto& [v, l] = get(key);
    return as_vector(parse_matrix(v, l), l);
  };
  LtiOcProblem p;
  p.A = mat("A");
  p.B = mat("B");
  p.Q = mat("Q");
  p.R = mat("R");
  p.P = mat("P");
  p.Gx = mat("Gx");
  p.Gu = mat("Gu");
  p.b = vec("b");
  {
    const auto& [v, l] = get("T");
    p.T = parse_number(v, l);
  }
  p.theta_box = {vec("theta_lo"), vec("theta_hi")};
  if (kv.count("names")) {
    std::istringstream names(kv["names"].first);
    std::string tok;
    while (names >> tok) p.row_names.push_back(tok);
  }
  try {
    p.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
  return p;
}

LtiOcProblem load_problem(const std::string& path) {
  try {
    return parse_problem(read_file(path));
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, path + ": " + e.what());
  }
}

std::string format_problem(const LtiOcProblem& p) {
  std::string out;
  out += "A = " + format_matrix(p.A) + "\n";
  out += "B = " + format_matrix(p.B) + "\n";
  out += "Q = " + format_matrix(p.Q) + "\n";
  out += "R = " + format_matrix(p.R) + "\n";
  out += "P = " + format_matrix(p.P) + "\n";
  out += "Gx = " + format_matrix(p.Gx) + "\n";
  out += "Gu = " + format_matrix(p.Gu) + "\n";
  out += "b = " + format_matrix(p.b.transpose()) + "\n";
  out += "T = " + g17(p.T) + "\n";
  out += "theta_lo = " + format_matrix(p.theta_box.lo.transpose()) + "\n";
  out += "theta_hi = " + format_matrix(p.theta_box.hi.transpose()) + "\n";
  if (!p.row_names.empty()) {
    out += "names =";
    for (const auto& n : p.row_names) out += " " + n;
    out += "\n";
  }
  return out;
}

std::string region_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "CR%02d", index + 1);
  return buf;
}

// ---------------------------------------------------------------------------
// Continuous-time results

std::string regions_json(const LtiOcProblem& problem, const Exploration& ex) {
  json root;
  root["format"] = "ctmp-regions";
  root["version"] = 1;
  root["dim"] = problem.theta_box.dim();
  root["theta_box"] = box_json(problem.theta_box);
  root["row_names"] = problem.row_names;
  json regions = json::array();
  for (std::size_t r = 0; r < ex.regions.size(); ++r) {
    const CriticalRegionCT& reg = ex.regions[r];
    json j;
    j["name"] = region_name(static_cast<int>(r));
    j["structure"] = reg.structure.key();
    j["label"] = reg.label;
    j["seed"] = to_json(reg.seed);
    j["lo"] = reg.lo;
    j["hi"] = reg.hi;
    j["theta_box"] = box_json(reg.theta_box);
    json ineq = json::array();
    for (std::size_t k = 0; k < reg.inequalities.size(); ++k) {
      json h = {{"a", to_json(reg.inequalities[k].a)}, {"b", reg.inequalities[k].b}};
      h["neighbour"] = k < reg.neighbours.size() ? reg.neighbours[k] : -1;
      ineq.push_back(h);
    }
    j["inequalities"] = ineq;
    json fits = json::array();
    for (const auto& f : reg.t_switch_fit) {
      fits.push_back({{"vars", f.vars},
                      {"degree", f.degree},
                      {"coeffs", to_json(f.coeffs)},
                      {"r2", f.r2},
                      {"samples", f.samples},
                      {"domain", box_json(f.domain)},
                      {"formula", f.to_string(parameter_names(f.vars), 6)}});
    }
    j["t_switch_fit"] = fits;
    json arcs = json::array();
    for (const ActiveSet& a : reg.structure.arcs()) {
      const ArcDynamics d = assemble_arc_system(problem, a);
      arcs.push_back({{"active", a.indices()},
                      {"generator", to_json(d.generator)},
                      {"u_map", to_json(d.u_map)},
                      {"mu_map", to_json(d.mu_map)}});
    }
    j["arcs"] = arcs;
    regions.push_back(j);
  }
  root["regions"] = regions;
  json infeasible = json::array();
  for (const auto& [a, b] : ex.infeasible_intervals) infeasible.push_back({a, b});
  root["infeasible_intervals"] = infeasible;
  return root.dump(1) + "\n";
}

std::vector<CriticalRegionCT> parse_regions_json(const std::string& text) {
  std::vector<CriticalRegionCT> out;
  try {
    const json root = json::parse(text);
    if (root.value("format", "") != "ctmp-regions") {
      throw Error(ErrorCode::kParse, "not a regions file");
    }
    for (const json& j : root.at("regions")) {
      CriticalRegionCT reg;
      reg.structure = ArcStructure::from_key(j.at("structure").get<std::string>());
      reg.label = j.at("label").get<std::string>();
      reg.seed = vector_from(j.at("seed"));
      reg.lo = j.at("lo").get<double>();
      reg.hi = j.at("hi").get<double>();
      reg.theta_box = box_from(j.at("theta_box"));
      for (const json& h : j.at("inequalities")) {
        reg.inequalities.push_back({vector_from(h.at("a")), h.at("b").get<double>()});
        reg.neighbours.push_back(h.at("neighbour").get<int>());
      }
      for (const json& f : j.at("t_switch_fit")) {
        FittedPolynomial p;
        p.vars = f.at("vars").get<int>();
        p.degree = f.at("degree").get<int>();
        p.coeffs = vector_from(f.at("coeffs"));
        p.r2 = f.at("r2").get<double>();
        p.samples = f.at("samples").get<int>();
        p.domain = box_from(f.at("domain"));
        if (p.coeffs.size() != monomial_count(p.vars, p.degree)) {
          throw Error(ErrorCode::kParse, "coefficient count does not match degree");
        }
        reg.t_switch_fit.push_back(std::move(p));
      }
      out.push_back(std::move(reg));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("regions json: ") + e.what());
  }
  return out;
}

std::string regions_csv(const LtiOcProblem& problem,
                        const std::vector<CriticalRegionCT>& regions) {
  const int dim = problem.theta_box.dim();
  std::string out = dim == 1 ? "region,lo,hi,structure,key,switching_times\n"
                             : "region,inequalities,structure,key,switching_times\n";
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const auto& reg = regions[r];
    std::string times;
    for (std::size_t k = 0; k < reg.t_switch_fit.size(); ++k) {
      if (k > 0) times += "; ";
      times += "t" + std::to_string(k + 1) + " = " +
               reg.t_switch_fit[k].to_string(parameter_names(dim), 6);
    }
    out += region_name(static_cast<int>(r)) + ",";
    if (dim == 1) {
      out += fmt("%.6f", reg.lo) + "," + fmt("%.6f", reg.hi) + ",";
    } else {
      std::string ineq;
      for (std::size_t k = 0; k < reg.inequalities.size(); ++k) {
        if (k > 0) ineq += " & ";
        ineq += inequality_text(reg.inequalities[k]);
      }
      out += csv_quote(ineq) + ",";
    }
    out += csv_quote(reg.label) + "," + csv_quote(reg.structure.key()) + "," +
           csv_quote(times) + "\n";
  }
  return out;
}

std::string fits_csv(const std::vector<CriticalRegionCT>& regions) {
  int width = 0;
  for (const auto& reg : regions)
    for (const auto& f : reg.t_switch_fit) width = std::max(width, static_cast<int>(f.coeffs.size()));
  std::string out = "region,event,vars,degree,samples,r2";
  for (int k = 0; k < width; ++k) out += ",c" + std::to_string(k);
  out += ",formula\n";
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const auto& reg = regions[r];
    for (std::size_t e = 0; e < reg.t_switch_fit.size(); ++e) {
      const auto& f = reg.t_switch_fit[e];
      out += region_name(static_cast<int>(r)) + "," + std::to_string(e + 1) + "," +
             std::to_string(f.vars) + "," + std::to_string(f.degree) + "," +
             std::to_string(f.samples) + "," + fmt("%.9f", f.r2);
      for (int k = 0; k < width; ++k) out += "," + (k < f.coeffs.size() ? g17(f.coeffs(k)) : "");
      out += "," + csv_quote(f.to_string(parameter_names(f.vars), 6)) + "\n";
    }
  }
  return out;
}

std::string trajectory_csv(const LtiOcProblem& problem, const SolvedTrajectory& traj,
                           double dt) {
  const int n = problem.n(), m = problem.m(), c = problem.c();
  std::string out = "t";
  for (int i = 0; i < n; ++i) out += ",x" + std::to_string(i + 1);
  for (int j = 0; j < m; ++j) out += ",u" + std::to_string(j + 1);
  for (int i = 0; i < n; ++i) out += ",lambda" + std::to_string(i + 1);
  for (int i = 0; i < c; ++i) out += ",mu_" + problem.row_name(i);
  for (int i = 0; i < c; ++i) out += ",g_" + problem.row_name(i);
  out += ",H\n";
  const int steps = std::max(1, static_cast<int>(std::ceil(problem.T / dt - 1e-9)));
  for (int k = 0; k <= steps; ++k) {
    const double t = std::min(problem.T, k * dt);
    const PointState s = traj.state_at(problem, t);
    out += g17(t);
    for (int i = 0; i < n; ++i) out += "," + g17(s.x(i));
    for (int j = 0; j < m; ++j) out += "," + g17(s.u(j));
    for (int i = 0; i < n; ++i) out += "," + g17(s.lambda(i));
    for (int i = 0; i < c; ++i) out += "," + g17(s.mu(i));
    for (int i = 0; i < c; ++i) out += "," + g17(s.g(i));
    out += "," + g17(s.H) + "\n";
  }
  return out;
}

std::string region_map_svg(const LtiOcProblem& problem, const Exploration& ex) {
  const ParameterBox& box = problem.theta_box;
  if (box.dim() == 1) {
    std::vector<Interval> items;
    for (std::size_t r = 0; r < ex.regions.size(); ++r) {
      items.push_back({ex.regions[r].lo, ex.regions[r].hi, region_name(static_cast<int>(r)),
                       color(static_cast<int>(r))});
    }
    for (const auto& [a, b] : ex.infeasible_intervals) items.push_back({a, b, "infeasible", "#dddddd"});
    return strip_svg(box, items, "Continuous-time critical regions");
  }
  Svg svg(620, 600);
  svg.set_view(box.lo(0), box.hi(0), box.lo(1), box.hi(1), 60, 20, 30, 50);
  svg.text(310, 18, "Continuous-time critical regions", 13);
  // Grid cells carry the classification; fitted borders are drawn on top.
  const auto& g = ex.grid;
  if (g.shape.size() == 2) {
    const double cw = (box.hi(0) - box.lo(0)) / std::max(1, g.shape[0] - 1);
    const double ch = (box.hi(1) - box.lo(1)) / std::max(1, g.shape[1] - 1);
    std::map<std::string, int> region_of_key;
    for (std::size_t r = 0; r < ex.regions.size(); ++r)
      region_of_key.emplace(ex.regions[r].structure.key(), static_cast<int>(r));
    for (int i = 0; i < g.size(); ++i) {
      std::string fill = "#dddddd";
      if (g.label[i] >= 0) {
        const auto it = region_of_key.find(g.structures[g.label[i]].key());
        if (it != region_of_key.end()) fill = color(it->second);
      } else if (g.label[i] == kFailedLabel) {
        fill = "#000000";
      }
      const Vector& p = g.points[i];
      const double x = svg.px(std::max(box.lo(0), p(0) - 0.5 * cw));
      const double x1 = svg.px(std::min(box.hi(0), p(0) + 0.5 * cw));
      const double y = svg.py(std::min(box.hi(1), p(1) + 0.5 * ch));
      const double y1 = svg.py(std::max(box.lo(1), p(1) - 0.5 * ch));
      svg.rect(x, y, x1 - x + 0.3, y1 - y + 0.3, fill, "fill-opacity=\"0.75\"");
    }
  }
  for (std::size_t r = 0; r < ex.regions.size(); ++r) {
    const auto& reg = ex.regions[r];
    const Polygon poly = clip(box_polygon(box), reg.inequalities);
    svg.path(pairs(poly), true, "fill=\"none\" stroke=\"black\" stroke-width=\"1.2\"");
    if (!reg.sample_points.empty()) {
      Eigen::Vector2d c = Eigen::Vector2d::Zero();
      for (const auto& p : reg.sample_points) c += Eigen::Vector2d(p(0), p(1));
      c /= static_cast<double>(reg.sample_points.size());
      svg.text(svg.px(c.x()), svg.py(c.y()), region_name(static_cast<int>(r)), 11);
    }
  }
  svg.axes("x0,1", "x0,2");
  return svg.str();
}

// ---------------------------------------------------------------------------
// Discrete-time results

std::string dt_regions_csv(const DtProblem& dt, const DtPartition& part) {
  const int p = dt.n;
  const auto names = parameter_names(p);
  std::string out = "region,active";
  out += p == 1 ? ",lo,hi" : ",inequalities";
  out += ",chebyshev_radius";
  for (int k = 0; k < dt.N; ++k)
    for (int j = 0; j < dt.m; ++j) {
      const std::string u = "u" + std::to_string(k) + (dt.m > 1 ? "_" + std::to_string(j + 1) : "");
      for (const auto& nm : names) out += "," + u + ":" + nm;
      out += "," + u + ":1";
    }
  for (int k = 1; k <= dt.N; ++k)
    for (int i = 0; i < dt.n; ++i) {
      const std::string x = "x" + std::to_string(k) + "_" + std::to_string(i + 1);
      for (const auto& nm : names) out += "," + x + ":" + nm;
      out += "," + x + ":1";
    }
  out += "\n";
  for (int r = 0; r < part.size(); ++r) {
    const auto& reg = part.regions[r];
    std::string active;
    for (int row : reg.active.indices()) active += (active.empty() ? "" : " ") + dt.row_label(row);
    out += region_name(r) + "," + csv_quote(active.empty() ? "none" : active);
    if (p == 1) {
      out += "," + g17(reg.lo) + "," + g17(reg.hi);
    } else {
      std::string ineq;
      for (std::size_t k = 0; k < reg.inequalities.size(); ++k)
        ineq += (k ? " & " : "") + inequality_text(reg.inequalities[k]);
      out += "," + csv_quote(ineq);
    }
    out += "," + g17(reg.chebyshev_radius);
    for (int row = 0; row < reg.Ku.rows(); ++row) {
      for (int j = 0; j < p; ++j) out += "," + g17(reg.Ku(row, j));
      out += "," + g17(reg.ku(row));
    }
    for (int k = 1; k <= dt.N; ++k)
      for (int i = 0; i < dt.n; ++i) {
        for (int j = 0; j < p; ++j) out += "," + g17(reg.Kx[k](i, j));
        out += "," + g17(reg.kx[k](i));
      }
    out += "\n";
  }
  return out;
}

std::string dt_region_map_svg(const DtProblem& dt, const DtPartition& part) {
  const ParameterBox& box = dt.theta_box;
  const std::string title =
      "Discrete-time critical regions, N = " + std::to_string(dt.N) + " (" +
      std::to_string(part.size()) + " regions)";
  if (box.dim() == 1) {
    std::vector<Interval> items;
    for (int r = 0; r < part.size(); ++r)
      items.push_back({part.regions[r].lo, part.regions[r].hi, region_name(r), color(r)});
    return strip_svg(box, items, title);
  }
  Svg svg(620, 600);
  svg.set_view(box.lo(0), box.hi(0), box.lo(1), box.hi(1), 60, 20, 30, 50);
  svg.text(310, 18, title, 13);
  svg.rect(svg.px(box.lo(0)), svg.py(box.hi(1)), svg.px(box.hi(0)) - svg.px(box.lo(0)),
           svg.py(box.lo(1)) - svg.py(box.hi(1)), "#dddddd");
  for (int r = 0; r < part.size(); ++r) {
    const auto& reg = part.regions[r];
    svg.path(pairs(reg.polygon), true,
             "fill=\"" + color(r) + "\" stroke=\"black\" stroke-width=\"0.6\"");
    if (reg.chebyshev_radius > 0.02 * box.diameter()) {
      const auto [cx, cy] = centroid(reg.polygon);
      svg.text(svg.px(cx), svg.py(cy), region_name(r), 10);
    }
  }
  svg.axes("x0,1", "x0,2");
  return svg.str();
}

std::string comparison_csv(const ComparisonReport& rep) {
  std::string out = "model,N,regions,feasible_lo,feasible_hi\n";
  out += "CT,," + std::to_string(rep.ct_regions) + "," + g17(rep.ct_feasible.first) + "," +
         g17(rep.ct_feasible.second) + "\n";
  for (const auto& row : rep.rows) {
    out += "DT," + std::to_string(row.N) + "," + std::to_string(row.regions) + "," +
           g17(row.feasible.first) + "," + g17(row.feasible.second) + "\n";
  }
  return out;
}

std::string cost_samples_csv(const ComparisonReport& rep, const std::vector<int>& N_list) {
  if (rep.samples.empty()) return "";
  const int dim = static_cast<int>(rep.samples.front().theta.size());
  std::string out;
  for (const auto& nm : parameter_names(dim)) out += nm + ",";
  out += "J_ct";
  for (int N : N_list) out += ",J_N" + std::to_string(N);
  for (int N : N_list) out += ",abs_err_N" + std::to_string(N);
  out += "\n";
  for (const auto& s : rep.samples) {
    for (int i = 0; i < dim; ++i) out += g17(s.theta(i)) + ",";
    out += g17(s.j_ct);
    for (double j : s.j_dt) out += "," + g17(j);
    for (double j : s.j_dt) out += "," + g17(std::abs(j - s.j_ct));
    out += "\n";
  }
  return out;
}

namespace {

struct OverlayRow {
  double t;
  Vector x_ct, u_ct, x_dt, u_dt;
};

std::vector<OverlayRow> overlay_rows(const LtiOcProblem& problem, const SolvedTrajectory& traj,
                                     const DtProblem& dt, const DtPointSolution& sol,
                                     const Vector& theta) {
  const int n = dt.n, m = dt.m;
  const std::vector<Vector> xs = dt.states(theta, sol.U);
  Matrix aug = Matrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = problem.A;
  aug.topRightCorner(n, m) = problem.B;
  const int per_step = std::max(2, 400 / dt.N);
  std::vector<OverlayRow> rows;
  for (int k = 0; k < dt.N; ++k) {
    for (int s = 0; s < per_step; ++s) {
      const double tau = dt.h * s / per_step;
      const double t = k * dt.h + tau;
      Vector xu(n + m);
      xu << xs[k], dt.input(sol.U, k);
      const Vector z = matrix_exponential(aug, tau) * xu;
      const PointState ct = traj.state_at(problem, t);
      rows.push_back({t, ct.x, ct.u, z.head(n), dt.input(sol.U, k)});
    }
  }
  const PointState end = traj.state_at(problem, problem.T);
  rows.push_back({problem.T, end.x, end.u, xs[dt.N], dt.input(sol.U, dt.N - 1)});
  return rows;
}

}  // namespace

std::string overlay_csv(const LtiOcProblem& problem, const SolvedTrajectory& traj,
                        const DtProblem& dt, const DtPointSolution& sol,
                        const Vector& theta) {
  std::string out = "t";
  for (int i = 0; i < dt.n; ++i) out += ",x" + std::to_string(i + 1) + "_ct";
  for (int j = 0; j < dt.m; ++j) out += ",u" + std::to_string(j + 1) + "_ct";
  for (int i = 0; i < dt.n; ++i) out += ",x" + std::to_string(i + 1) + "_dt";
  for (int j = 0; j < dt.m; ++j) out += ",u" + std::to_string(j + 1) + "_dt";
  out += "\n";
  for (const auto& r : overlay_rows(problem, traj, dt, sol, theta)) {
    out += g17(r.t);
    for (const Vector* v : {&r.x_ct, &r.u_ct, &r.x_dt, &r.u_dt})
      for (int i = 0; i < v->size(); ++i) out += "," + g17((*v)(i));
    out += "\n";
  }
  return out;
}

std::string overlay_svg(const LtiOcProblem& problem, const SolvedTrajectory& traj,
                        const DtProblem& dt, const DtPointSolution& sol,
                        const Vector& theta) {
  const auto rows = overlay_rows(problem, traj, dt, sol, theta);
  const int panels = dt.n + dt.m;
  const double ph = 220;
  std::string body;
  for (int p = 0; p < panels; ++p) {
    const bool is_state = p < dt.n;
    const int i = is_state ? p : p - dt.n;
    auto get = [&](const OverlayRow& r, bool ct) {
      return is_state ? (ct ? r.x_ct : r.x_dt)(i) : (ct ? r.u_ct : r.u_dt)(i);
    };
    double lo = 1e300, hi = -1e300;
    for (const auto& r : rows)
      for (bool ct : {true, false}) {
        lo = std::min(lo, get(r, ct));
        hi = std::max(hi, get(r, ct));
      }
    if (hi - lo < 1e-9) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    Svg svg(700, ph);
    svg.set_view(0, problem.T, lo - pad, hi + pad, 60, 20, 20, 36);
    std::vector<std::pair<double, double>> ct, d;
    for (const auto& r : rows) {
      ct.emplace_back(r.t, get(r, true));
      d.emplace_back(r.t, get(r, false));
    }
    svg.path(ct, false, "fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.8\"");
    svg.path(d, false, "fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.4\" stroke-dasharray=\"5,3\"");
    const std::string name = (is_state ? "x" : "u") + std::to_string(i + 1);
    svg.axes("t", name);
    svg.text(640, 16, "CT solid, DT dashed", 10, "end");
    // Nest each panel as a translated group.
    std::string s = svg.str();
    s = s.substr(s.find('\n') + 1);
    s = s.substr(0, s.rfind("</svg>"));
    body += "<g transform=\"translate(0," + Svg::num(p * ph) + ")\">\n" + s + "</g>\n";
  }
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"700\" height=\"" +
         Svg::num(panels * ph) + "\" viewBox=\"0 0 700 " + Svg::num(panels * ph) + "\">\n" +
         body + "</svg>\n";
}

}  // namespace ctmp
