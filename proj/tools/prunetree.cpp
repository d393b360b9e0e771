#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "prunetree/annihilation.hpp"
#include "prunetree/gw.hpp"
#include "prunetree/io.hpp"
#include "prunetree/special.hpp"
#include "prunetree/verify.hpp"

using namespace prunetree;

namespace {

constexpr int kExitDomain = 1;
constexpr int kExitVerify = 2;
constexpr int kExitUsage = 64;

std::uint64_t default_seed() {
  if (const char* s = std::getenv("PRUNETREE_SEED")) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw DomainError("PRUNETREE_SEED must be an unsigned integer");
    }
  }
  return 1;
}

struct Common {
  std::uint64_t seed = 1;
  std::string out;
  std::string format;
};

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw DomainError("cannot write '" + c.out + "'");
  f << text;
}

void print_config(const std::string& cmd, Json cfg) {
  Json j;
  j["command"] = cmd;
  j["config"] = std::move(cfg);
  std::cerr << "# " << j.dump() << "\n";
}

Json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DomainError("cannot read '" + path + "'");
  try {
    return Json::parse(f);
  } catch (const Json::exception& e) {
    throw DomainError("invalid JSON in '" + path + "': " + e.what());
  }
}

// "sample:lambda=<x>" draws a GW tree from the seeded generator.
bool parse_sample(const std::string& spec, double& lambda) {
  const std::string prefix = "sample:";
  if (spec.rfind(prefix, 0) != 0) return false;
  std::string rest = spec.substr(prefix.size());
  lambda = 1.0;
  if (rest.empty()) return true;
  if (rest.rfind("lambda=", 0) != 0) throw DomainError("expected sample:lambda=<value>");
  try {
    lambda = std::stod(rest.substr(7));
  } catch (const std::exception&) {
    throw DomainError("invalid lambda in '" + spec + "'");
  }
  return true;
}

PlaneTree load_tree(const std::string& spec, std::uint64_t seed) {
  double lambda;
  if (parse_sample(spec, lambda)) return sample_gw(lambda, seed);
  return tree_from_json(read_json_file(spec));
}

Potential load_potential(const std::string& spec, std::uint64_t seed) {
  double lambda;
  if (parse_sample(spec, lambda)) return potential_from_tree(sample_gw(lambda, seed));
  return potential_from_json(read_json_file(spec));
}

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g\n", x);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamical pruning of Galton-Watson trees and ballistic annihilation"};
  app.require_subcommand(1);
  Common common;
  common.seed = 1;

  auto add_common = [&](CLI::App* sub, const std::vector<std::string>& formats, const std::string& def) {
    sub->add_option("--seed", common.seed, "random seed (default: $PRUNETREE_SEED or 1)");
    sub->add_option("--out", common.out, "output file (default: stdout)");
    sub->add_option("--format", common.format, "output format (default: " + def + ")")
        ->check(CLI::IsMember(formats));
    sub->callback([&common, def] {
      if (common.format.empty()) common.format = def;
    });
  };

  // sample-gw
  auto* sample = app.add_subcommand("sample-gw", "sample exponential critical binary Galton-Watson trees");
  double s_lambda = 1.0;
  std::size_t s_count = 1, s_cap = kDefaultNodeCap;
  sample->add_option("--lambda", s_lambda, "edge rate");
  sample->add_option("--count", s_count, "number of trees");
  sample->add_option("--node-cap", s_cap, "node cap");
  add_common(sample, {"json", "newick", "csv"}, "json");

  // prune
  auto* prune_cmd = app.add_subcommand("prune", "prune a tree by a monotone functional");
  std::string p_tree = "sample:lambda=1", p_phi = "length", p_cuts;
  double p_t = 1.0;
  bool p_mass = false;
  prune_cmd->add_option("--tree", p_tree, "tree JSON file or sample:lambda=<x>");
  prune_cmd->add_option("--phi", p_phi, "functional")->check(CLI::IsMember({"height", "horton", "length", "leaves"}));
  prune_cmd->add_option("--t", p_t, "threshold");
  prune_cmd->add_option("--cuts", p_cuts, "write the cut set JSON here");
  prune_cmd->add_flag("--mass", p_mass, "emit the mass-equipped tree (length only)");
  add_common(prune_cmd, {"json", "newick"}, "json");

  // annihilate
  auto* ann = app.add_subcommand("annihilate", "evolve an exponential potential under ballistic annihilation");
  std::string a_pot = "sample:lambda=1", a_emit = "potential", a_method = "pruning";
  double a_t = 1.0;
  ann->add_option("--potential", a_pot, "potential JSON file or sample:lambda=<x>");
  ann->add_option("--t", a_t, "time");
  ann->add_option("--emit", a_emit, "output")
      ->check(CLI::IsMember({"potential", "masstree", "trajectories", "shocktree", "shocktree-svg"}));
  ann->add_option("--method", a_method, "route for the evolved potential")
      ->check(CLI::IsMember({"pruning", "simulation"}));
  add_common(ann, {"json", "csv", "svg"}, "json");

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate a closed-form quantity");
  std::string e_formula;
  double e_lambda = 1.0, e_t = 1.0, e_a = 0.0;
  ev->add_option("--formula", e_formula, "quantity")
      ->required()
      ->check(CLI::IsMember({"ell", "p-length", "p-height", "p-horton", "xi", "mu", "i0", "i1", "single-fraction"}));
  ev->add_option("--lambda", e_lambda, "edge rate");
  ev->add_option("--t", e_t, "threshold, time, or argument");
  ev->add_option("--a", e_a, "mass argument of mu");
  add_common(ev, {"json", "text"}, "text");

  // verify
  auto* ver = app.add_subcommand("verify", "run Monte Carlo verification suites");
  McConfig mc;
  std::string v_suite = "all";
  ver->add_option("--suite", v_suite, "suite")
      ->check(CLI::IsMember({"invariance", "theorem8", "sink", "equivalence", "all"}));
  ver->add_option("--lambda", mc.lambda, "edge rate");
  ver->add_option("--t", mc.times, "thresholds or times")->delimiter(',');
  ver->add_option("--n", mc.n, "samples per cell");
  ver->add_option("--alpha", mc.alpha, "significance level");
  ver->add_option("--sigmas", mc.sigmas, "z-test band");
  ver->add_option("--workers", mc.workers, "worker threads");
  ver->add_option("--node-cap", mc.node_cap, "node cap for tree samples");
  ver->add_option("--potentials", mc.potentials, "potentials in the equivalence suite");
  ver->add_option("--window-samples", mc.window_samples, "samples of the windowed sink construction");
  add_common(ver, {"json", "text"}, "json");

  // roundtrip
  auto* rt = app.add_subcommand("roundtrip", "check Harris path and level-set tree reciprocity");
  double r_lambda = 1.0;
  std::size_t r_n = 100;
  rt->add_option("--lambda", r_lambda, "edge rate");
  rt->add_option("--n", r_n, "number of trees and excursions");
  add_common(rt, {"json"}, "json");

  try {
    common.seed = default_seed();
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*sample) {
      Json cfg{{"lambda", s_lambda}, {"count", s_count}, {"seed", common.seed}, {"node_cap", s_cap},
               {"format", common.format}};
      print_config("sample-gw", cfg);
      std::ostringstream os;
      Json arr = Json::array();
      for (std::size_t i = 0; i < s_count; ++i) {
        PlaneTree t = sample_gw(s_lambda, common.seed, i, s_cap);
        if (common.format == "newick") os << to_newick(t) << "\n";
        else if (common.format == "csv") os << excursion_to_csv(harris_path(t));
        else arr.push_back(tree_to_json(t));
      }
      if (common.format == "json") os << (s_count == 1 ? arr[0] : arr).dump(2) << "\n";
      emit(common, os.str());
      return 0;
    }
    if (*prune_cmd) {
      print_config("prune", Json{{"tree", p_tree}, {"phi", p_phi}, {"t", p_t}, {"mass", p_mass},
                                 {"seed", common.seed}, {"format", common.format}});
      PlaneTree t = load_tree(p_tree, common.seed);
      t.validate(false);
      PruneResult r = prune(t, PruningFunctional{parse_functional(p_phi), {}, {}}, p_t);
      if (!p_cuts.empty()) {
        std::ofstream f(p_cuts);
        if (!f) throw DomainError("cannot write '" + p_cuts + "'");
        f << cuts_to_json(r.cuts).dump(2) << "\n";
      }
      if (p_mass) {
        if (p_phi != "length") throw DomainError("mass-equipped pruning requires phi = length");
        if (common.format != "json") throw DomainError("mass trees are emitted as JSON");
        emit(common, mass_tree_to_json(prune_mass_equipped(t, p_t)).dump(2) + "\n");
      } else if (common.format == "newick") {
        emit(common, to_newick(r.tree) + "\n");
      } else {
        emit(common, tree_to_json(r.tree).dump(2) + "\n");
      }
      return 0;
    }
    if (*ann) {
      print_config("annihilate", Json{{"potential", a_pot}, {"t", a_t}, {"emit", a_emit}, {"method", a_method},
                                      {"seed", common.seed}});
      Potential p = load_potential(a_pot, common.seed);
      validate_potential(p);
      if (a_emit == "potential") {
        EvolvedPotential e = a_method == "pruning" ? evolve(p, a_t) : simulate_sinks(p, a_t).snapshot;
        emit(common, evolved_to_json(e).dump(2) + "\n");
      } else if (a_emit == "masstree") {
        MassTree m = prune_mass_equipped(level_set_tree(negated(p)), std::min(a_t, p.t_max()));
        emit(common, mass_tree_to_json(m).dump(2) + "\n");
      } else if (a_emit == "trajectories") {
        emit(common, trajectories_csv(simulate_sinks(p, a_t)));
      } else if (a_emit == "shocktree") {
        emit(common, shock_tree_to_json(shock_tree(p)).dump(2) + "\n");
      } else {
        emit(common, shock_tree_svg(p, shock_tree(p)));
      }
      return 0;
    }
    if (*ev) {
      print_config("eval", Json{{"formula", e_formula}, {"lambda", e_lambda}, {"t", e_t}, {"a", e_a}});
      if (!(e_lambda > 0.0)) throw DomainError("lambda must be positive");
      double v = 0.0;
      if (e_formula == "ell") v = length_pdf(e_lambda, e_t);
      else if (e_formula == "p-length") v = survival_prob(FunctionalKind::Length, e_lambda, e_t);
      else if (e_formula == "p-height") v = survival_prob(FunctionalKind::Height, e_lambda, e_t);
      else if (e_formula == "p-horton") v = survival_prob(FunctionalKind::HortonOrder, e_lambda, e_t);
      else if (e_formula == "xi") v = growth_probability(e_lambda, e_t);
      else if (e_formula == "mu") v = sink_mass_pdf(e_lambda, e_t, e_a);
      else if (e_formula == "i0") v = bessel_i(0, e_t);
      else if (e_formula == "i1") v = bessel_i(1, e_t);
      else v = mass_law::single_leaf_fraction(e_lambda, e_t);
      if (common.format == "json") emit(common, Json{{"formula", e_formula}, {"value", v}}.dump() + "\n");
      else emit(common, format_real(v));
      return 0;
    }
    if (*ver) {
      mc.seed = common.seed;
      mc.validate();
      Json cfg = mc.to_json();
      cfg["suite"] = v_suite;
      cfg["workers"] = mc.workers;
      print_config("verify", cfg);
      std::vector<Report> reports = run_suite(v_suite, mc);
      bool ok = true;
      for (const Report& r : reports) ok = ok && r.passed();
      if (common.format == "text") {
        std::string text;
        for (const Report& r : reports) text += r.to_text();
        emit(common, text);
      } else {
        emit(common, reports_to_json(reports).dump(2) + "\n");
      }
      return ok ? 0 : kExitVerify;
    }
    if (*rt) {
      print_config("roundtrip", Json{{"lambda", r_lambda}, {"n", r_n}, {"seed", common.seed}});
      std::size_t tree_fail = 0, exc_fail = 0;
      for (std::size_t i = 0; i < r_n; ++i) {
        PlaneTree t = sample_gw(r_lambda, common.seed, i);
        if (!trees_equal(level_set_tree(harris_path(t)), t, 0.0, 1e-12)) ++tree_fail;
        StreamRng rng(common.seed, (std::uint64_t{1} << 40) + i);
        Excursion x = sample_exp_excursion(r_lambda, rng);
        Excursion y = harris_path(level_set_tree(x));
        bool same = x.extrema.size() == y.extrema.size();
        for (std::size_t k = 0; same && k < x.extrema.size(); ++k)
          same = std::abs(x.extrema[k] - y.extrema[k]) <= 1e-12 * std::max(1.0, std::abs(x.extrema[k]));
        exc_fail += !same;
      }
      Json j{{"trees", r_n}, {"tree_failures", tree_fail}, {"excursions", r_n}, {"excursion_failures", exc_fail},
             {"passed", tree_fail == 0 && exc_fail == 0}};
      emit(common, j.dump(2) + "\n");
      return tree_fail == 0 && exc_fail == 0 ? 0 : kExitVerify;
    }
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const Json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}
