#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "coarse/error.hpp"
#include "coarse/fibred.hpp"
#include "coarse/metric.hpp"
#include "coarse/quotient.hpp"
#include "coarse/rational.hpp"
#include "coarse/witness.hpp"

namespace coarse::io {

using json = nlohmann::ordered_json;

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading " + path);
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  out.flush();
  if (!out) throw IoError("error while writing " + path);
}

inline json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(origin + ": invalid JSON: " + e.what());
  }
}

inline json read_json_file(const std::string& path) { return parse_json(read_text_file(path), path); }

inline void write_json_file(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

namespace detail {

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw FormatError(where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Spaces

inline json graph_to_json(const Graph& g) {
  json edges = json::array();
  for (auto [u, v] : g.edges()) edges.push_back({u, v});
  json out{{"name", g.label()}, {"vertices", g.vertex_count()}, {"edges", std::move(edges)}};
  if (g.vertex_transitive()) out["vertex_transitive"] = true;
  return out;
}

inline Graph graph_from_json(const json& j, const std::string& where) {
  const int n = detail::field<int>(j, "vertices", where);
  const auto raw = detail::field<std::vector<std::vector<int>>>(j, "edges", where);
  std::vector<Edge> edges;
  for (const auto& e : raw) {
    if (e.size() != 2) throw FormatError(where + ": an edge must have two endpoints");
    edges.emplace_back(e[0], e[1]);
  }
  std::string name = j.contains("name") ? detail::field<std::string>(j, "name", where) : std::string();
  Graph g = Graph::from_edges(n, edges, name);
  if (j.contains("vertex_transitive")) g.set_vertex_transitive(detail::field<bool>(j, "vertex_transitive", where));
  return g;
}

inline json space_to_json(const CoarseUnion& u, const std::string& family = {}) {
  json out = json::object();
  if (!family.empty()) out["family"] = family;
  json blocks = json::array();
  for (const auto& g : u.blocks()) blocks.push_back(graph_to_json(g));
  out["blocks"] = std::move(blocks);
  return out;
}

inline CoarseUnion space_from_json(const json& j, const std::string& origin = "space") {
  if (!j.is_object() || !j.contains("blocks") || !j["blocks"].is_array()) {
    throw FormatError(origin + ": expected an object with a 'blocks' array");
  }
  std::vector<Graph> blocks;
  for (std::size_t i = 0; i < j["blocks"].size(); ++i)
    blocks.push_back(graph_from_json(j["blocks"][i], origin + " block " + std::to_string(i)));
  return CoarseUnion(std::move(blocks));
}

inline std::string family_name(const json& j, const std::string& fallback) {
  return j.contains("family") && j["family"].is_string() ? j["family"].get<std::string>() : fallback;
}

inline json family_to_json(const BoxSpaceFamily& fam, const std::string& name) {
  json out = space_to_json(fam.space, name);
  json blocks = out["blocks"];
  out.erase("blocks");
  out["source"] = {{"kind", fam.source.kind == SourceGroup::Kind::Zd ? "zd" : "free"}, {"rank", fam.source.rank}};
  json levels = json::array();
  for (std::size_t i = 0; i < fam.maps.size(); ++i) {
    json level = json::object();
    if (fam.source.kind == SourceGroup::Kind::Zd) {
      level["modulus"] = fam.moduli[i];
    } else {
      level["target"] = fam.targets[i].to_string();
    }
    level["nested"] = static_cast<bool>(fam.level_nested[i]);
    levels.push_back(std::move(level));
  }
  out["levels"] = std::move(levels);
  out["nested"] = fam.nested;
  if (!fam.warnings.empty()) out["warnings"] = fam.warnings;
  out["blocks"] = std::move(blocks);
  return out;
}

// Graphviz, one cluster per block, global point numbering.
inline std::string to_dot(const CoarseUnion& u) {
  std::ostringstream out;
  out << "graph coarse_union {\n";
  for (int b = 0; b < u.block_count(); ++b) {
    out << "  subgraph cluster_" << b << " {\n";
    out << "    label=\"" << (u.block(b).label().empty() ? "block " + std::to_string(b) : u.block(b).label())
        << "\";\n";
    for (int v = 0; v < u.block_size(b); ++v) out << "    " << u.global(b, v) << ";\n";
    for (auto [x, y] : u.block(b).edges()) out << "    " << u.global(b, x) << " -- " << u.global(b, y) << ";\n";
    out << "  }\n";
  }
  out << "}\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Witnesses

inline json witness_to_json(const WitnessFamily& w) {
  json measures = json::object();
  for (std::size_t i = 0; i < w.points.size(); ++i) {
    json m = json::array();
    for (const auto& [z, mass] : w.measures[i]) m.push_back({z, to_string(mass)});
    measures[std::to_string(w.points[i])] = std::move(m);
  }
  return json{{"R", w.R}, {"S", w.S}, {"measures", std::move(measures)}};
}

inline WitnessFamily witness_from_json(const json& j, const std::string& origin = "witness") {
  WitnessFamily w;
  w.R = detail::field<int>(j, "R", origin);
  w.S = detail::field<int>(j, "S", origin);
  const auto& ms = j.contains("measures") ? j["measures"] : throw FormatError(origin + ": missing field 'measures'");
  if (!ms.is_object()) throw FormatError(origin + ": 'measures' must be an object");
  std::vector<std::pair<int, Measure>> rows;
  for (const auto& [key, arr] : ms.items()) {
    int x = 0;
    try {
      std::size_t used = 0;
      x = std::stoi(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw FormatError(origin + ": point key '" + key + "' is not an integer");
    }
    Measure m;
    for (const auto& entry : arr) {
      if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number_integer() || !entry[1].is_string()) {
        throw FormatError(origin + ": measure entries must be [point, \"p/q\"]");
      }
      m.emplace_back(entry[0].get<int>(), parse_rational(entry[1].get<std::string>()));
    }
    std::sort(m.begin(), m.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    rows.emplace_back(x, std::move(m));
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [x, m] : rows) {
    w.points.push_back(x);
    w.measures.push_back(std::move(m));
  }
  return w;
}

inline json witness_report_to_json(const WitnessReport& r) {
  json v = json::array();
  for (const auto& x : r.violations) {
    v.push_back({{"kind", to_string(x.kind)},
                 {"x", x.x},
                 {"y", x.y},
                 {"measured", to_string(x.measured)},
                 {"bound", to_string(x.bound)},
                 {"message", x.describe()}});
  }
  return json{{"passed", r.passed},
              {"pairs_checked", r.pairs_checked},
              {"max_variation", to_string(r.max_variation)},
              {"worst_pair", {r.worst_x, r.worst_y}},
              {"violations", std::move(v)}};
}

// ---------------------------------------------------------------------------
// Fibred reports

inline json fibred_report_to_json(const FibredWitnessData& data, const std::vector<FibredReport>& reports) {
  static const char* names[5] = {"support", "normalization", "permutation", "variation", "cocycle"};
  json per_L = json::array();
  for (const auto& r : reports) {
    json conds = json::array();
    for (int c = 0; c < 5; ++c) {
      json ce = json::array();
      for (const auto& v : r.violations) {
        if (v.condition != c + 1 || ce.size() >= 20) continue;
        ce.push_back({{"center", v.center}, {"x", v.x}, {"y", v.y}, {"index", v.index}, {"detail", v.detail}});
      }
      std::size_t count = 0;
      for (const auto& v : r.violations) count += v.condition == c + 1 ? 1 : 0;
      conds.push_back({{"condition", c + 1},
                       {"name", names[c]},
                       {"passed", r.condition_passed[static_cast<std::size_t>(c)]},
                       {"checks", r.checks[static_cast<std::size_t>(c)]},
                       {"violations", count},
                       {"counterexamples", std::move(ce)}});
    }
    per_L.push_back({{"L", r.L},
                     {"passed", r.passed},
                     {"excluded_blocks", r.excluded_blocks},
                     {"subsets", r.subsets},
                     {"overlap_pairs", r.overlap_pairs},
                     {"max_variation", to_string(r.max_variation)},
                     {"conditions", std::move(conds)}});
  }
  json blocks = json::array();
  for (int b = 0; b < data.family.block_count(); ++b) {
    const auto& fb = data.blocks[static_cast<std::size_t>(b)];
    blocks.push_back({{"name", data.family.block(b).label()},
                      {"girth", fb.girth},
                      {"loop_bound", fb.loop_bound},
                      {"fiber_indices", fb.indices.size()}});
  }
  return json{{"R", data.R},
              {"eps", to_string(data.eps)},
              {"n", data.n},
              {"S", data.S},
              {"exclusion_rule", to_string(data.options.rule)},
              {"blocks", std::move(blocks)},
              {"reports", std::move(per_L)}};
}

}  // namespace coarse::io
