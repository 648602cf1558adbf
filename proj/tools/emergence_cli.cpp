// Command-line front end. Builds a JSON request from files and flags and
// hands it to the C API; the report goes to standard output.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "emergence/emergence.h"

using Json = nlohmann::json;

namespace {

constexpr const char* kProfileEnv = "EMERGENCE_TOL_PROFILE";

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

// "uniform", "stationary", comma-separated weights or @file.json.
Json parse_rho(const std::string& text) {
  if (text == "uniform" || text == "stationary") return text;
  if (!text.empty() && text.front() == '@') return read_json_file(text.substr(1));
  Json weights = Json::array();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      weights.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("--rho: cannot parse \"" + item + "\"");
    }
  }
  return weights;
}

struct Subcommand {
  CLI::App* app = nullptr;
  std::string input;
  bool print_schema = false;
  // Option values keyed by request option name; unset ones are omitted.
  std::map<std::string, std::optional<std::uint64_t>> counts;
  std::map<std::string, std::optional<double>> numbers;
  std::map<std::string, std::optional<std::string>> texts;
  std::map<std::string, bool> flags;
};

struct Globals {
  std::optional<double> tol_row_sum, tol_stationarity, tol_zero;
  std::optional<std::uint64_t> tol_max_iters;
  std::string profile;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> cap;
  std::string schema;
  bool quiet = false;
  bool markdown = false;
};

void add_count(Subcommand& s, const std::string& flag, const std::string& key, const std::string& help) {
  s.app->add_option(flag, s.counts[key], help);
}
void add_number(Subcommand& s, const std::string& flag, const std::string& key, const std::string& help) {
  s.app->add_option(flag, s.numbers[key], help);
}
void add_text(Subcommand& s, const std::string& flag, const std::string& key, const std::string& help) {
  s.app->add_option(flag, s.texts[key], help);
}
void add_flag(Subcommand& s, const std::string& flag, const std::string& key, const std::string& help) {
  s.app->add_flag(flag, s.flags[key], help);
}

std::string markdown_reference(const CLI::App& app, const std::vector<Subcommand>& subs) {
  std::ostringstream md;
  auto options_table = [&md](const CLI::App* a) {
    md << "| Option | Description |\n|---|---|\n";
    for (const CLI::Option* opt : a->get_options()) {
      std::string name = opt->get_name(false, true);
      if (name == "-h,--help" || name == "--help-markdown") continue;
      std::string desc = opt->get_description();
      if (!opt->get_default_str().empty()) desc += " (default: " + opt->get_default_str() + ")";
      md << "| `" << name << "` | " << desc << " |\n";
    }
    md << "\n";
  };
  md << "# emergence command reference\n\n";
  md << "Generated by `emergence --help-markdown`. Do not edit by hand.\n\n";
  md << "```\nemergence [global options] <command> [input.json] [command options]\n```\n\n";
  md << "Reports are JSON on standard output. Exit status: 0 computed or passed, "
        "1 audit failure, 2 input error.\n\n";
  md << "The environment variable `" << kProfileEnv
     << "` selects the default tolerance profile (`default`, `strict`, `loose`); "
        "`--tol-profile` and the `--tol-*` overrides take precedence.\n\n";
  md << "## Global options\n\n";
  options_table(&app);
  for (const auto& s : subs) {
    md << "## `" << s.app->get_name() << "`\n\n" << s.app->get_description() << "\n\n";
    options_table(s.app);
  }
  return md.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-state emergence diagnostics with JSON reports.", "emergence"};
  app.set_version_flag("--version", std::string(emc_version()));
  app.require_subcommand(0, 1);
  app.fallthrough();

  Globals g;
  app.add_option("--tol-row-sum", g.tol_row_sum, "Row-sum tolerance for kernel validation");
  app.add_option("--tol-stationarity", g.tol_stationarity, "Power-iteration stopping tolerance (L1)");
  app.add_option("--tol-zero", g.tol_zero, "Entries below this are structural zeros");
  app.add_option("--tol-max-iters", g.tol_max_iters, "Power-iteration step limit");
  app.add_option("--tol-profile", g.profile, "Tolerance profile: default, strict or loose");
  app.add_option("--seed", g.seed, "Seed for randomized diagnostics (recorded in the manifest)");
  app.add_option("--cap", g.cap, "Maximum number of enumerated paths");
  app.add_option("--json-schema", g.schema, "Print the named schema (\"list\" for names) and exit");
  app.add_flag("--quiet", g.quiet, "Suppress the report; only the exit status is produced");
  app.add_flag("--help-markdown", g.markdown, "Print the command reference as Markdown");

  const std::map<std::string, std::string> descriptions = {
      {"defect", "Idempotence defect, retention error and prototype stability of the packaged endomap. "
                 "Input: {kernel, lens, prototypes?, fine?: {lens, prototypes?}}."},
      {"sigma", "Path reversal asymmetry of a kernel over a finite horizon. Input: kernel."},
      {"dpi", "Data-processing audit of path reversal asymmetry under a lens. Input: {kernel, lens}."},
      {"protocol-audit", "Phase-lifted protocol trap audit. Input: protocol family."},
      {"strobe", "Stroboscopic product kernel and its asymmetry at stationarity. "
                 "Input: protocol family or {kernels: [...]}."},
      {"affinity", "Cycle affinities, exactness and potential. Input: kernel."},
      {"gate", "Edge deletion and cycle rank. Input: {kernel, remove: [[i, j], ...]}."},
      {"gap", "Spectral gap of a reversible kernel. Input: kernel."},
      {"forcing", "Definable-predicate counting for a lens. Input: lens, or --n and --k."},
      {"icap", "Integrated capacity audit of a convolution bridge. Input: bridge or {bridge, signals}."},
      {"zeno", "Reciprocal-capacity divergence decision and latency bounds. Input: schedule."},
      {"route", "Route mismatch gain bound. Input: {direct, step1, step2}."},
  };
  const std::vector<std::string> order = {"defect", "sigma", "dpi",   "protocol-audit", "strobe", "affinity",
                                          "gate",   "gap",   "forcing", "icap",         "zeno",   "route"};

  std::vector<Subcommand> subs(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    Subcommand& s = subs[i];
    s.app = app.add_subcommand(order[i], descriptions.at(order[i]));
    s.app->add_option("input", s.input, "Input JSON file");
    s.app->add_flag("--json-schema", s.print_schema, "Print this command's report schema and exit");
    const std::string& name = order[i];
    if (name == "defect") {
      add_count(s, "--tau", "tau", "Evolution time tau >= 1 (default 1)");
      add_number(s, "--epsilon", "epsilon", "Stability threshold for stable counts");
    } else if (name == "sigma" || name == "dpi") {
      add_text(s, "--rho", "rho", "Initial law: uniform, stationary, w0,w1,... or @file.json (default stationary)");
      add_count(s, "--T", "T", "Horizon (default 1)");
      if (name == "sigma") add_flag(s, "--export-paths", "export_paths", "Include the enumerated path law");
    } else if (name == "protocol-audit") {
      add_count(s, "--T", "T", "Horizon (default 2)");
    } else if (name == "strobe") {
      add_count(s, "--T", "T", "Horizon (default 1)");
    } else if (name == "affinity") {
      add_text(s, "--forest", "forest", "Spanning forest: bfs or dfs (default bfs)");
    } else if (name == "forcing") {
      add_count(s, "--n", "n", "State count for a balanced lens");
      add_count(s, "--k", "k", "Block count for a balanced lens");
      add_count(s, "--mc", "trials", "Monte Carlo trials (uses --seed, default 0)");
    } else if (name == "icap") {
      add_count(s, "--signals", "signals", "Random signals when none are supplied (default 20)");
      add_count(s, "--steps", "steps", "Steps per random signal (default 16)");
    } else if (name == "zeno") {
      add_count(s, "--j-max", "j_max", "Override the schedule's evaluation depth");
    }
  }

  CLI11_PARSE(app, argc, argv);

  if (g.markdown) {
    std::cout << markdown_reference(app, subs);
    return 0;
  }
  if (!g.schema.empty()) {
    if (g.schema == "list") {
      std::string names = emc_schema_names();
      for (char& ch : names)
        if (ch == ',') ch = '\n';
      std::cout << names << "\n";
      return 0;
    }
    const char* text = emc_schema(g.schema.c_str());
    if (text == nullptr) {
      std::cerr << "emergence: unknown schema \"" << g.schema << "\"\n";
      return 2;
    }
    std::cout << text;
    return 0;
  }

  const Subcommand* chosen = nullptr;
  for (const auto& s : subs)
    if (s.app->parsed()) chosen = &s;
  if (chosen == nullptr) {
    std::cerr << app.help();
    return 2;
  }
  const std::string command = chosen->app->get_name();
  if (chosen->print_schema) {
    std::cout << emc_schema(("report." + command).c_str());
    return 0;
  }

  Json request = Json::object();
  try {
    request["input"] = chosen->input.empty() ? Json() : read_json_file(chosen->input);
    Json options = Json::object();
    for (const auto& [key, v] : chosen->counts)
      if (v) options[key] = *v;
    for (const auto& [key, v] : chosen->numbers)
      if (v) options[key] = *v;
    for (const auto& [key, v] : chosen->texts)
      if (v) options[key] = key == "rho" ? parse_rho(*v) : Json(*v);
    for (const auto& [key, v] : chosen->flags)
      if (v) options[key] = true;
    if (g.cap) options["cap"] = *g.cap;
    request["options"] = std::move(options);
  } catch (const InputError& e) {
    std::cerr << "emergence: " << e.what() << "\n";
    return 2;
  }

  std::string profile = g.profile;
  if (profile.empty())
    if (const char* env = std::getenv(kProfileEnv)) profile = env;
  if (!profile.empty()) request["tolerance_profile"] = profile;
  Json tol = Json::object();
  if (g.tol_row_sum) tol["row_sum_tol"] = *g.tol_row_sum;
  if (g.tol_stationarity) tol["stationarity_tol"] = *g.tol_stationarity;
  if (g.tol_zero) tol["zero_tol"] = *g.tol_zero;
  if (g.tol_max_iters) tol["max_power_iters"] = *g.tol_max_iters;
  if (!tol.empty()) request["tolerances"] = std::move(tol);
  request["seed"] = g.seed ? Json(*g.seed) : Json();

  char* out = nullptr;
  int exit_code = 2;
  const emc_status status = emc_report_run(command.c_str(), request.dump().c_str(), &out, &exit_code);
  if (status != EMC_OK) {
    std::cerr << "emergence: " << emc_status_name(status) << ": " << emc_last_error() << "\n";
    return 2;
  }
  if (!g.quiet) std::cout << out;
  emc_string_free(out);
  return exit_code;
}
