#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "coarse/error.hpp"
#include "coarse/io.hpp"
#include "coarse/metric.hpp"
#include "coarse/rational.hpp"
#include "coarse/symmetry.hpp"
#include "coarse/witness.hpp"

namespace coarse {

struct ProfileRow {
  std::string family;
  int block = 0;
  int L = 0;
  int R = 1;
  Rational eps;
  int S_min = 0;
  std::size_t subsets_checked = 0;
  std::string max_residual;  // "p/q" in exact mode, %.9g in float mode
  std::optional<double> runtime_ms;

  bool operator==(const ProfileRow& o) const {
    return family == o.family && block == o.block && L == o.L && R == o.R && eps == o.eps && S_min == o.S_min &&
           subsets_checked == o.subsets_checked && max_residual == o.max_residual && runtime_ms == o.runtime_ms;
  }
};

struct ProfileOptions {
  std::string family = "family";
  lp::NumericMode mode = lp::NumericMode::Exact;
  SupportMode support = SupportMode::Ambient;
  int jobs = 1;
  bool timing = false;  // fill runtime_ms (breaks byte-identical output)
  // One center for vertex-transitive blocks, and programs reduced by the
  // automorphisms fixing the center.
  bool use_symmetry = true;
  std::size_t max_variables = 250000;
  std::size_t max_exact_variables = 8000;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

struct ProfileItem {
  int block;
  int L;
};

// Decides eps*(C) <= eps. Float mode uses the certified bracket and falls
// back to the exact program when the bracket straddles eps.
inline bool within(const SubsetView<CoarseUnion>& C, int R, int S, const Rational& eps, const ProfileOptions& opt,
                   const std::vector<Permutation>& syms, Rational& exact_residual, double& residual) {
  EpsStarOptions eo;
  eo.symmetries = syms;
  eo.mode = opt.mode;
  eo.support = opt.support;
  eo.emit_witness = false;
  eo.max_variables = opt.max_variables;
  eo.max_exact_variables = opt.max_exact_variables;
  auto r = eps_star(C, R, S, eo);
  if (r.exact_value) {
    exact_residual = *r.exact_value;
    residual = r.exact_value->get_d();
    return *r.exact_value <= eps;
  }
  residual = r.value;
  if (r.certainly_at_most(eps)) return true;
  if (r.certainly_above(eps)) return false;
  eo.mode = lp::NumericMode::Exact;
  try {
    auto ex = eps_star(C, R, S, eo);
    residual = ex.value;
    return *ex.exact_value <= eps;
  } catch (const Rejection&) {
    return false;  // undecided at float precision, exact program too large: count as a failure
  }
}

inline ProfileRow profile_item(const CoarseUnion& family, int R, const Rational& eps, const ProfileItem& item,
                               const ProfileOptions& opt) {
  auto start = std::chrono::steady_clock::now();
  const int b = item.block;
  std::vector<int> centers;
  if (opt.use_symmetry && family.block(b).vertex_transitive()) {
    centers.push_back(family.global(b, 0));
  } else {
    for (int v = 0; v < family.block_size(b); ++v) centers.push_back(family.global(b, v));
  }
  // Distinct balls only.
  std::vector<SubsetView<CoarseUnion>> balls;
  std::vector<std::vector<Permutation>> syms;
  {
    std::map<std::vector<int>, bool> seen;
    for (int c : centers) {
      auto C = block_ball(family, c, item.L);
      if (!seen.emplace(C.members, true).second) continue;
      balls.push_back(std::move(C));
      syms.emplace_back();
      if (!opt.use_symmetry) continue;
      for (const auto& p : vertex_stabilizer(family.block(b), family.local(c))) {
        Permutation g(static_cast<std::size_t>(family.size()));
        for (int x = 0; x < family.size(); ++x) g[x] = x;
        for (int v = 0; v < family.block_size(b); ++v) g[family.global(b, v)] = family.global(b, p[v]);
        syms.back().push_back(std::move(g));
      }
    }
  }
  ProfileRow row{opt.family, b, item.L, R, eps, 0, balls.size(), "0", std::nullopt};
  const bool exact = opt.mode == lp::NumericMode::Exact;
  for (int S = 0;; ++S) {
    bool ok = true;
    Rational worst_exact = 0;
    double worst = 0;
    for (std::size_t k = 0; k < balls.size(); ++k) {
      Rational er = 0;
      double fr = 0;
      if (!within(balls[k], R, S, eps, opt, syms[k], er, fr)) {
        ok = false;
        break;
      }
      worst_exact = std::max(worst_exact, er);
      worst = std::max(worst, fr);
    }
    if (ok) {
      row.S_min = S;
      row.max_residual = exact ? to_string(worst_exact) : format_double(worst);
      break;
    }
    if (S >= family.block_diameter(b)) {
      throw Rejection("no S up to the block diameter satisfied eps in block " + std::to_string(b) +
                      " (numerical failure)");
    }
  }
  if (opt.timing) {
    row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return row;
}

}  // namespace detail

// S_min(i, L) for every block i and scale L, rows sorted by block then L.
inline std::vector<ProfileRow> smin_profile(const CoarseUnion& family, int R, const Rational& eps,
                                            const std::vector<int>& L_list, const ProfileOptions& opt = {}) {
  if (eps <= 0) throw Rejection("eps must be > 0, got " + to_string(eps));
  if (R < 0) throw Rejection("R must be >= 0");
  if (L_list.empty()) throw Rejection("L list is empty");
  std::vector<int> Ls = L_list;
  std::sort(Ls.begin(), Ls.end());
  Ls.erase(std::unique(Ls.begin(), Ls.end()), Ls.end());
  for (int L : Ls)
    if (L < 0) throw Rejection("L must be >= 0");
  std::vector<detail::ProfileItem> items;
  for (int b = 0; b < family.block_count(); ++b)
    for (int L : Ls) items.push_back({b, L});

  std::vector<std::optional<ProfileRow>> rows(items.size());
  std::vector<std::exception_ptr> errors(items.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < items.size(); k = next++) {
      try {
        rows[k] = detail::profile_item(family, R, eps, items[k], opt);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(items.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::vector<ProfileRow> out;
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (errors[k]) std::rethrow_exception(errors[k]);
    out.push_back(std::move(*rows[k]));
  }
  return out;
}

// Eventual constancy of S_min over the blocks at one scale: the longest
// constant run ending at the last block. Blocks before it form the
// empirical K_L. An observation on the finite family only.
struct TailSummary {
  int L = 0;
  int tail_value = 0;
  int tail_start = 0;
  int tail_length = 0;
  std::vector<int> exceptional;
};

inline TailSummary summarize_tail(const std::vector<ProfileRow>& rows, int L) {
  std::vector<const ProfileRow*> at;
  for (const auto& r : rows)
    if (r.L == L) at.push_back(&r);
  if (at.empty()) throw Rejection("no rows at L = " + std::to_string(L));
  std::sort(at.begin(), at.end(), [](const auto* a, const auto* b) { return a->block < b->block; });
  TailSummary s;
  s.L = L;
  s.tail_value = at.back()->S_min;
  std::size_t k = at.size();
  while (k > 0 && at[k - 1]->S_min == s.tail_value) --k;
  s.tail_start = at[k == at.size() ? at.size() - 1 : k]->block;
  s.tail_length = static_cast<int>(at.size() - k);
  for (std::size_t i = 0; i < k; ++i) s.exceptional.push_back(at[i]->block);
  return s;
}

// ---------------------------------------------------------------------------
// Duplication

// Pairs (i, j), 0-based, in diagonal order (0,0),(0,1),(1,0),(0,2),(1,1),...
// restricted to i < blocks, j < copies.
inline std::vector<std::pair<int, int>> diagonal_order(int blocks, int copies) {
  std::vector<std::pair<int, int>> out;
  for (int s = 0; s <= blocks + copies - 2; ++s)
    for (int i = 0; i <= s; ++i)
      if (i < blocks && s - i < copies) out.emplace_back(i, s - i);
  return out;
}

// Y_{i,j} = X_i for j < copies, in diagonal order.
inline CoarseUnion duplicate_family(const CoarseUnion& family, int copies) {
  if (copies < 1) throw Rejection("copies must be >= 1, got " + std::to_string(copies));
  std::vector<Graph> blocks;
  for (auto [i, j] : diagonal_order(family.block_count(), copies)) {
    Graph g = family.block(i);
    if (copies > 1) g.set_label(g.label() + "#" + std::to_string(j + 1));
    blocks.push_back(std::move(g));
  }
  return CoarseUnion(std::move(blocks));
}

// ---------------------------------------------------------------------------
// Reports

inline const char* kProfileCsvHeader = "family,block,L,R,eps,S_min,subsets_checked,max_residual,runtime_ms";

inline std::string rows_to_csv(const std::vector<ProfileRow>& rows) {
  std::ostringstream out;
  out << kProfileCsvHeader << "\n";
  for (const auto& r : rows) {
    out << r.family << "," << r.block << "," << r.L << "," << r.R << "," << to_string(r.eps) << "," << r.S_min << ","
        << r.subsets_checked << "," << r.max_residual << ","
        << (r.runtime_ms ? detail::format_double(*r.runtime_ms) : "") << "\n";
  }
  return out.str();
}

inline std::vector<ProfileRow> rows_from_csv(const std::string& text, const std::string& origin = "csv") {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kProfileCsvHeader) {
    throw FormatError(origin + ": expected header '" + std::string(kProfileCsvHeader) + "'");
  }
  std::vector<ProfileRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 9) throw FormatError(origin + " line " + std::to_string(lineno) + ": expected 9 fields");
    try {
      ProfileRow r;
      r.family = f[0];
      r.block = std::stoi(f[1]);
      r.L = std::stoi(f[2]);
      r.R = std::stoi(f[3]);
      r.eps = parse_rational(f[4]);
      r.S_min = std::stoi(f[5]);
      r.subsets_checked = std::stoul(f[6]);
      r.max_residual = f[7];
      if (!f[8].empty()) r.runtime_ms = std::stod(f[8]);
      rows.push_back(std::move(r));
    } catch (const FormatError&) {
      throw;
    } catch (const std::exception&) {
      throw FormatError(origin + " line " + std::to_string(lineno) + ": bad number");
    }
  }
  return rows;
}

inline io::json rows_to_json(const std::vector<ProfileRow>& rows) {
  io::json arr = io::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"family", r.family},
                   {"block", r.block},
                   {"L", r.L},
                   {"R", r.R},
                   {"eps", to_string(r.eps)},
                   {"S_min", r.S_min},
                   {"subsets_checked", r.subsets_checked},
                   {"max_residual", r.max_residual},
                   {"runtime_ms", r.runtime_ms ? io::json(*r.runtime_ms) : io::json(nullptr)}});
  }
  return io::json{{"rows", std::move(arr)}};
}

inline std::vector<ProfileRow> rows_from_json(const io::json& j, const std::string& origin = "rows") {
  if (!j.is_object() || !j.contains("rows") || !j["rows"].is_array()) {
    throw FormatError(origin + ": expected an object with a 'rows' array");
  }
  std::vector<ProfileRow> rows;
  for (const auto& e : j["rows"]) {
    ProfileRow r;
    r.family = io::detail::field<std::string>(e, "family", origin);
    r.block = io::detail::field<int>(e, "block", origin);
    r.L = io::detail::field<int>(e, "L", origin);
    r.R = io::detail::field<int>(e, "R", origin);
    r.eps = parse_rational(io::detail::field<std::string>(e, "eps", origin));
    r.S_min = io::detail::field<int>(e, "S_min", origin);
    r.subsets_checked = io::detail::field<std::size_t>(e, "subsets_checked", origin);
    r.max_residual = io::detail::field<std::string>(e, "max_residual", origin);
    if (e.contains("runtime_ms") && !e["runtime_ms"].is_null()) r.runtime_ms = e["runtime_ms"].get<double>();
    rows.push_back(std::move(r));
  }
  return rows;
}

enum class ChartAxis { SMin, MaxResidual };

inline ChartAxis parse_chart_axis(const std::string& s) {
  if (s == "S_min") return ChartAxis::SMin;
  if (s == "max_residual") return ChartAxis::MaxResidual;
  throw FormatError("chart axis must be 'S_min' or 'max_residual', got '" + s + "'");
}

// Line chart in a fixed 800x600 box: x = block index, one polyline per L.
inline std::string rows_to_svg(const std::vector<ProfileRow>& rows, ChartAxis axis = ChartAxis::SMin) {
  if (rows.empty()) throw Rejection("no rows to chart");
  auto yval = [&](const ProfileRow& r) {
    if (axis == ChartAxis::SMin) return static_cast<double>(r.S_min);
    return r.max_residual.find('/') != std::string::npos ? parse_rational(r.max_residual).get_d()
                                                         : std::stod(r.max_residual);
  };
  std::map<int, std::vector<std::pair<int, double>>> series;
  int max_block = 0;
  double max_y = 0;
  for (const auto& r : rows) {
    series[r.L].emplace_back(r.block, yval(r));
    max_block = std::max(max_block, r.block);
    max_y = std::max(max_y, yval(r));
  }
  if (axis == ChartAxis::SMin) max_y = std::max(1.0, max_y);
  if (max_y <= 0) max_y = 1;
  const double left = 70, right = 650, top = 50, bottom = 530;
  auto px = [&](double b) { return left + (max_block == 0 ? 0.5 : b / max_block) * (right - left); };
  auto py = [&](double y) { return bottom - y / max_y * (bottom - top); };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
  const std::string ylabel = axis == ChartAxis::SMin ? "S_min" : "max_residual";
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  out << "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" << ylabel
      << " by block (" << rows.front().family << ")</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\"" << bottom
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
      << "\" stroke=\"black\"/>\n";
  for (int b = 0; b <= max_block; ++b) {
    out << "<text x=\"" << detail::format_double(px(b)) << "\" y=\"" << bottom + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << b << "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    double y = max_y * k / 4;
    out << "<text x=\"" << left - 8 << "\" y=\"" << detail::format_double(py(y) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << detail::format_double(y)
        << "</text>\n";
  }
  out << "<text x=\"" << (left + right) / 2 << "\" y=\"570\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"13\">block index</text>\n";
  out << "<text x=\"20\" y=\"" << (top + bottom) / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"13\" transform=\"rotate(-90 20 " << (top + bottom) / 2 << ")\">" << ylabel << "</text>\n";
  int idx = 0;
  for (auto& [L, pts] : series) {
    std::sort(pts.begin(), pts.end());
    const char* color = palette[idx % 7];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i)
      out << (i ? " " : "") << detail::format_double(px(pts[i].first)) << "," << detail::format_double(py(pts[i].second));
    out << "\"/>\n";
    for (const auto& [b, y] : pts)
      out << "<circle cx=\"" << detail::format_double(px(b)) << "\" cy=\"" << detail::format_double(py(y))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    const double ly = top + 20 * idx;
    out << "<line x1=\"670\" y1=\"" << ly << "\" x2=\"700\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"708\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"12\">L = " << L
        << "</text>\n";
    ++idx;
  }
  out << "</svg>\n";
  return out.str();
}

struct ReportConfig {
  std::string csv_path;
  std::string json_path;
  std::string svg_path;
  ChartAxis axis = ChartAxis::SMin;
};

inline void emit_report(const std::vector<ProfileRow>& rows, const ReportConfig& cfg) {
  if (rows.empty()) throw Rejection("no rows to report");
  if (cfg.csv_path.empty() && cfg.json_path.empty() && cfg.svg_path.empty()) {
    throw Rejection("report needs at least one output format");
  }
  if (!cfg.csv_path.empty()) io::write_text_file(cfg.csv_path, rows_to_csv(rows));
  if (!cfg.json_path.empty()) io::write_json_file(cfg.json_path, rows_to_json(rows));
  if (!cfg.svg_path.empty()) io::write_text_file(cfg.svg_path, rows_to_svg(rows, cfg.axis));
}

}  // namespace coarse
