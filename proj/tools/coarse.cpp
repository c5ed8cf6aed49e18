#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "coarse/cover.hpp"
#include "coarse/fibred.hpp"
#include "coarse/folner.hpp"
#include "coarse/io.hpp"
#include "coarse/oracle.hpp"
#include "coarse/profile.hpp"
#include "coarse/quotient.hpp"
#include "coarse/symmetry.hpp"

using namespace coarse;

namespace {

enum Exit { kOk = 0, kUsage = 1, kRejected = 2, kIo = 3 };

// Settings shared through the optional config file. Flags given on the
// command line win.
struct Settings {
  std::string mode = "exact";
  std::string support = "ambient";
  int jobs = 1;
  std::size_t max_variables = 250000;
  std::size_t max_exact_variables = 8000;
};

void apply_config(const std::string& path, Settings& s, const CLI::App& app) {
  auto j = io::read_json_file(path);
  if (!j.is_object()) throw FormatError(path + ": config must be a JSON object");
  auto given = [&](const char* flag) {
    for (const auto* sub : app.get_subcommands())
      for (const auto* opt : sub->get_options())
        if (opt->get_name() == flag && opt->count() > 0) return true;
    return false;
  };
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "mode") {
        if (!given("--mode")) s.mode = value.get<std::string>();
      } else if (key == "support") {
        if (!given("--support")) s.support = value.get<std::string>();
      } else if (key == "jobs") {
        if (!given("--jobs")) s.jobs = value.get<int>();
      } else if (key == "max_variables") {
        s.max_variables = value.get<std::size_t>();
      } else if (key == "max_exact_variables") {
        s.max_exact_variables = value.get<std::size_t>();
      } else {
        throw FormatError(path + ": unknown config key '" + key + "'");
      }
    } catch (const io::json::exception&) {
      throw FormatError(path + ": config key '" + key + "' has the wrong type");
    }
  }
}

std::vector<int> parse_int_list(const std::string& s, const char* what) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw FormatError(std::string("bad ") + what + " list '" + s + "'");
    }
  }
  if (out.empty()) throw FormatError(std::string("empty ") + what + " list");
  return out;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    io::write_text_file(path, text);
  }
}

std::vector<std::vector<int>> global_stabilizer(const CoarseUnion& u, int center) {
  const int b = u.block_of(center);
  std::vector<std::vector<int>> out;
  for (const auto& p : vertex_stabilizer(u.block(b), u.local(center))) {
    std::vector<int> g(static_cast<std::size_t>(u.size()));
    for (int x = 0; x < u.size(); ++x) g[x] = x;
    for (int v = 0; v < u.block_size(b); ++v) g[u.global(b, v)] = u.global(b, p[v]);
    out.push_back(std::move(g));
  }
  return out;
}

int require_block(const CoarseUnion& u, int b) {
  if (b < 0 || b >= u.block_count()) {
    throw Rejection("block " + std::to_string(b) + " out of range (family has " + std::to_string(u.block_count()) +
                    " blocks)");
  }
  return b;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coarse amenability computations on finite graph families"};
  app.require_subcommand(1);
  std::string config;
  app.add_option("--config", config, "JSON config: mode, support, jobs, max_variables, max_exact_variables");
  Settings set;

  // space build|girth|export
  auto* space = app.add_subcommand("space", "Build, inspect and export coarse unions");
  space->require_subcommand(1);
  std::vector<std::string> graphs;
  std::string space_out, space_name, space_in, dot_out;
  auto* sbuild = space->add_subcommand("build", "Build a coarse union from graph descriptors");
  sbuild->add_option("--graph", graphs, "cycle:N, path:N, complete:N, petersen, heawood, mcgee, tutte-coxeter")
      ->required();
  sbuild->add_option("--name", space_name, "family id stored in the file");
  sbuild->add_option("--out", space_out, "output JSON (stdout if omitted)");
  auto* sgirth = space->add_subcommand("girth", "Print the girth of every block");
  sgirth->add_option("--space", space_in, "space JSON")->required();
  auto* sexport = space->add_subcommand("export", "Export a space as Graphviz DOT");
  sexport->add_option("--space", space_in, "space JSON")->required();
  sexport->add_option("--dot", dot_out, "output DOT (stdout if omitted)");

  // box build
  auto* box = app.add_subcommand("box", "Box spaces of Z^d and free groups");
  box->require_subcommand(1);
  auto* bbuild = box->add_subcommand("build", "Build a box space family");
  std::string group_kind, moduli_s, targets_s, box_out, box_name;
  int box_d = 1, box_k = 2, check_iso = -1;
  bbuild->add_option("--group", group_kind, "zd or free")->required()->check(CLI::IsMember({"zd", "free"}));
  bbuild->add_option("--d", box_d, "rank of Z^d");
  bbuild->add_option("--moduli", moduli_s, "comma-separated moduli (zd)");
  bbuild->add_option("--k", box_k, "rank of the free group");
  bbuild->add_option("--targets", targets_s, "comma-separated target groups, e.g. sl2:3,sl2:5 (free)");
  bbuild->add_option("--name", box_name, "family id stored in the file");
  bbuild->add_option("--check-isometry", check_iso, "report which quotient maps are L-isometric");
  bbuild->add_option("--out", box_out, "output JSON (stdout if omitted)");

  // epsstar
  auto* eps = app.add_subcommand("epsstar", "Optimal witness parameter of one ball by linear programming");
  std::string eps_space, eps_witness;
  int eps_block = 0, eps_center = 0, eps_radius = 1, eps_R = 1, eps_S = 0;
  bool eps_oracle = false, eps_nosym = false;
  eps->add_option("--space", eps_space, "space JSON")->required();
  eps->add_option("--block", eps_block, "block index");
  eps->add_option("--center", eps_center, "center, local to the block");
  eps->add_option("--radius", eps_radius, "ball radius L");
  eps->add_option("--R", eps_R, "interaction radius R");
  eps->add_option("--S", eps_S, "support radius S")->required();
  eps->add_option("--mode", set.mode, "exact or float");
  eps->add_option("--support", set.support, "ambient or intrinsic");
  eps->add_option("--emit-witness", eps_witness, "write the optimal witness family as JSON");
  eps->add_flag("--oracle", eps_oracle, "also compute the value by vertex enumeration");
  eps->add_flag("--no-symmetry", eps_nosym, "solve the full program without orbit reduction");

  // folner
  auto* fol = app.add_subcommand("folner", "Folner-box witness on a quotient of Z^d");
  int fol_d = 1, fol_box = 8, fol_mod = 32, fol_R = 1;
  bool fol_check = false;
  std::string fol_out;
  fol->add_option("--d", fol_d, "dimension");
  fol->add_option("--box", fol_box, "side of the box [0, k)^d")->required();
  fol->add_option("--modulus", fol_mod, "modulus m of Z^d / mZ^d")->required();
  fol->add_option("--R", fol_R, "interaction radius");
  fol->add_flag("--check", fol_check, "verify the witness conditions at eps = max deficiency");
  fol->add_option("--out", fol_out, "write the witness family as JSON");

  // treewitness
  auto* tw = app.add_subcommand("treewitness", "Tree-ray witnesses and the fibred checker");
  std::string tw_space, tw_report, tw_eps = "1/4", tw_L = "1,2,3", tw_rule = "strict";
  int tw_R = 1, tw_loop = 0;
  bool tw_check = false;
  tw->add_option("--space", tw_space, "space JSON")->required();
  tw->add_option("--R", tw_R, "interaction radius");
  tw->add_option("--eps", tw_eps, "tolerance (p/q or decimal)");
  tw->add_option("--L", tw_L, "comma-separated scales");
  tw->add_option("--rule", tw_rule, "exclusion rule: strict or proof")->check(CLI::IsMember({"strict", "proof"}));
  tw->add_option("--loop-bound", tw_loop, "fiber index loop length (0: automatic)");
  tw->add_flag("--check-fibred", tw_check, "check the fibred conditions for every scale");
  tw->add_option("--report", tw_report, "write the fibred report as JSON");

  // profile
  auto* prof = app.add_subcommand("profile", "S_min profile of a family");
  std::string prof_family, prof_out, prof_svg, prof_json, prof_eps = "1/2", prof_L, prof_name;
  int prof_R = 1;
  bool prof_timing = false, prof_nosym = false;
  prof->add_option("--family", prof_family, "family JSON")->required();
  prof->add_option("--R", prof_R, "interaction radius");
  prof->add_option("--eps", prof_eps, "tolerance (p/q or decimal)");
  prof->add_option("--L", prof_L, "comma-separated scales")->required();
  prof->add_option("--out", prof_out, "CSV output (stdout if omitted)");
  prof->add_option("--json", prof_json, "JSON mirror of the rows");
  prof->add_option("--svg", prof_svg, "SVG line chart");
  prof->add_option("--mode", set.mode, "exact or float");
  prof->add_option("--support", set.support, "ambient or intrinsic");
  prof->add_option("--jobs", set.jobs, "worker threads");
  prof->add_option("--name", prof_name, "family id (default: from the file)");
  prof->add_flag("--timing", prof_timing, "fill runtime_ms (output is then not reproducible)");
  prof->add_flag("--no-symmetry", prof_nosym, "evaluate every center with the full program");

  // duplicate
  auto* dup = app.add_subcommand("duplicate", "Diagonal duplication of a family");
  std::string dup_family, dup_out;
  int dup_copies = 2;
  dup->add_option("--family", dup_family, "family JSON")->required();
  dup->add_option("--copies", dup_copies, "copies of every block")->required();
  dup->add_option("--out", dup_out, "output JSON (stdout if omitted)");

  // report
  auto* rep = app.add_subcommand("report", "Charts and JSON from a profile CSV");
  std::string rep_csv, rep_svg, rep_json, rep_axis = "S_min";
  rep->add_option("--csv", rep_csv, "profile CSV")->required();
  rep->add_option("--svg", rep_svg, "SVG output");
  rep->add_option("--json", rep_json, "JSON output");
  rep->add_option("--axis", rep_axis, "chart y axis: S_min or max_residual");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (!config.empty()) apply_config(config, set, app);
    const auto mode = lp::parse_mode(set.mode);
    const auto support = parse_support_mode(set.support);

    if (*sbuild) {
      std::vector<Graph> blocks;
      for (const auto& d : graphs) blocks.push_back(build_graph(d));
      write_or_print(space_out, io::space_to_json(CoarseUnion(std::move(blocks)), space_name).dump(2) + "\n");
    } else if (*sgirth) {
      auto u = io::space_from_json(io::read_json_file(space_in), space_in);
      std::cout << "block\tname\tvertices\tdiameter\tgirth\n";
      for (int b = 0; b < u.block_count(); ++b) {
        auto g = girth(u.block(b));
        std::cout << b << "\t" << u.block(b).label() << "\t" << u.block_size(b) << "\t" << u.block_diameter(b) << "\t"
                  << (g ? std::to_string(*g) : "INFINITE") << "\n";
      }
    } else if (*sexport) {
      write_or_print(dot_out, io::to_dot(io::space_from_json(io::read_json_file(space_in), space_in)));
    } else if (*bbuild) {
      BoxSpaceFamily fam;
      if (group_kind == "zd") {
        if (moduli_s.empty()) throw FormatError("box build --group zd needs --moduli");
        fam = box_space_zd(box_d, parse_int_list(moduli_s, "moduli"));
      } else {
        if (targets_s.empty()) throw FormatError("box build --group free needs --targets");
        std::vector<GroupDesc> targets;
        for (const auto& t : split(targets_s)) targets.push_back(parse_group_desc(t));
        fam = box_space_free(box_k, targets);
      }
      for (const auto& w : fam.warnings) std::cerr << "warning: " << w << "\n";
      if (check_iso >= 0) {
        for (std::size_t i = 0; i < fam.maps.size(); ++i) {
          std::cerr << "level " << i << " (" << fam.space.block(static_cast<int>(i)).label() << "): "
                    << (is_L_isometric(fam.maps[i], check_iso) ? "" : "not ") << check_iso << "-isometric\n";
        }
      }
      const std::string name = box_name.empty() ? (group_kind == "zd" ? "zd" : "free") : box_name;
      write_or_print(box_out, io::family_to_json(fam, name).dump(2) + "\n");
    } else if (*eps) {
      auto u = io::space_from_json(io::read_json_file(eps_space), eps_space);
      const int b = require_block(u, eps_block);
      if (eps_center < 0 || eps_center >= u.block_size(b)) throw Rejection("center out of range");
      const int c = u.global(b, eps_center);
      auto C = block_ball(u, c, eps_radius);
      EpsStarOptions eo;
      eo.mode = mode;
      eo.support = support;
      eo.max_variables = set.max_variables;
      eo.max_exact_variables = set.max_exact_variables;
      eo.emit_witness = !eps_witness.empty();
      if (!eps_nosym) eo.symmetries = global_stabilizer(u, c);
      auto r = eps_star(C, eps_R, eps_S, eo);
      std::cout << "points\t" << C.members.size() << "\n";
      if (r.exact_value) {
        std::cout << "eps_star\t" << to_string(*r.exact_value) << "\n";
      } else {
        std::cout << "eps_star\t" << detail::format_double(r.value) << "\n";
        std::cout << "bracket\t[" << detail::format_double(r.lower.get_d()) << ", "
                  << detail::format_double(r.upper.get_d()) << "]\n";
      }
      if (!r.stats.shortcut.empty()) std::cout << "shortcut\t" << r.stats.shortcut << "\n";
      std::cout << "variables\t" << r.stats.variables << "\nconstraints\t" << r.stats.constraints << "\npivots\t"
                << r.stats.pivots << "\nsymmetries\t" << r.stats.symmetries << "\n";
      if (eps_oracle) {
        auto o = oracle_eps_star(C, eps_R, eps_S, support);
        std::cout << "oracle\t" << to_string(o.value) << "\n";
      }
      if (r.witness) io::write_json_file(eps_witness, io::witness_to_json(*r.witness));
    } else if (*fol) {
      auto q = zd_quotient(fol_d, fol_mod);
      auto F = make_box(fol_d, fol_box);
      auto w = folner_witness(F, q, fol_R);
      // largest deficiency over translations with |g|_1 <= R
      Rational bound = 0;
      std::vector<long> g(static_cast<std::size_t>(fol_d), 0);
      auto rec = [&](auto&& self, int k, int left) -> void {
        if (k == fol_d) {
          bound = std::max(bound, folner_deficiency(F, g));
          return;
        }
        for (int v = -left; v <= left; ++v) {
          g[k] = v;
          self(self, k + 1, left - std::abs(v));
        }
        g[k] = 0;
      };
      rec(rec, 0, fol_R);
      CoarseUnion u({cayley_graph(q.target())});
      auto report = check_witness(u, w, fol_R, bound, F.diameter());
      std::cout << "box\t" << fol_box << "^" << fol_d << "\nS\t" << F.diameter() << "\nmax_deficiency\t"
                << to_string(bound) << "\nmeasured\t" << to_string(report.max_variation) << "\n";
      if (!fol_out.empty()) io::write_json_file(fol_out, io::witness_to_json(w));
      if (fol_check) {
        std::cout << "check\t" << (report.passed ? "PASS" : "FAIL") << "\n";
        for (const auto& v : report.violations) std::cout << "  " << v.describe() << "\n";
        if (!report.passed) return kRejected;
      }
    } else if (*tw) {
      auto u = io::space_from_json(io::read_json_file(tw_space), tw_space);
      FibredOptions fo;
      fo.L_values = parse_int_list(tw_L, "L");
      fo.loop_bound = tw_loop;
      fo.rule = tw_rule == "proof" ? ExclusionRule::Proof : ExclusionRule::Strict;
      auto data = assemble_fibred(u, tw_R, parse_rational(tw_eps), fo);
      std::cout << "n\t" << data.n << "\nS\t" << data.S << "\nrule\t" << to_string(fo.rule) << "\n";
      for (int L : fo.L_values) {
        std::cout << "K_" << L << "\t";
        auto ex = data.excluded_blocks(L);
        for (std::size_t i = 0; i < ex.size(); ++i) std::cout << (i ? "," : "") << ex[i];
        std::cout << (ex.empty() ? "none" : "") << "\n";
      }
      bool all = true;
      std::vector<FibredReport> reports;
      if (tw_check) {
        static const char* names[5] = {"support", "normalization", "permutation", "variation", "cocycle"};
        for (int L : fo.L_values) {
          reports.push_back(check_fibred(data, L));
          const auto& r = reports.back();
          all = all && r.passed;
          std::cout << "L=" << L << "\t" << (r.passed ? "PASS" : "FAIL") << "\tsubsets " << r.subsets
                    << "\toverlaps " << r.overlap_pairs << "\tmax_variation " << to_string(r.max_variation) << "\n";
          for (int c = 0; c < 5; ++c) {
            if (!r.condition_passed[static_cast<std::size_t>(c)])
              std::cout << "  condition " << c + 1 << " (" << names[c] << ") failed\n";
          }
        }
      }
      if (!tw_report.empty()) io::write_json_file(tw_report, io::fibred_report_to_json(data, reports));
      if (!all) return kRejected;
    } else if (*prof) {
      auto j = io::read_json_file(prof_family);
      auto u = io::space_from_json(j, prof_family);
      ProfileOptions po;
      po.family = prof_name.empty() ? io::family_name(j, "family") : prof_name;
      po.mode = mode;
      po.support = support;
      po.jobs = set.jobs;
      po.timing = prof_timing;
      po.use_symmetry = !prof_nosym;
      po.max_variables = set.max_variables;
      po.max_exact_variables = set.max_exact_variables;
      auto Ls = parse_int_list(prof_L, "L");
      auto rows = smin_profile(u, prof_R, parse_rational(prof_eps), Ls, po);
      write_or_print(prof_out, rows_to_csv(rows));
      if (!prof_json.empty()) io::write_json_file(prof_json, rows_to_json(rows));
      if (!prof_svg.empty()) io::write_text_file(prof_svg, rows_to_svg(rows));
      std::sort(Ls.begin(), Ls.end());
      Ls.erase(std::unique(Ls.begin(), Ls.end()), Ls.end());
      auto& log = prof_out.empty() ? std::cerr : std::cout;
      for (int L : Ls) {
        auto t = summarize_tail(rows, L);
        log << "L=" << L << ": S_min = " << t.tail_value << " on the last " << t.tail_length << " of "
            << u.block_count() << " blocks; exceptional blocks: ";
        for (std::size_t i = 0; i < t.exceptional.size(); ++i) log << (i ? "," : "") << t.exceptional[i];
        log << (t.exceptional.empty() ? "none" : "") << " (finite truncation only)\n";
      }
    } else if (*dup) {
      auto j = io::read_json_file(dup_family);
      auto y = duplicate_family(io::space_from_json(j, dup_family), dup_copies);
      write_or_print(dup_out, io::space_to_json(y, io::family_name(j, "family")).dump(2) + "\n");
    } else if (*rep) {
      auto rows = rows_from_csv(io::read_text_file(rep_csv), rep_csv);
      ReportConfig cfg{"", rep_json, rep_svg, parse_chart_axis(rep_axis)};
      emit_report(rows, cfg);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Rejection& e) {
    std::cerr << "rejected: " << e.what() << "\n";
    return kRejected;
  }
  return kOk;
}
