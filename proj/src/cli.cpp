// SPDX-License-Identifier: Apache-2.0

#include "preexp/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "preexp/entropy.hpp"
#include "preexp/estimator.hpp"
#include "preexp/opsem.hpp"
#include "preexp/runtime.hpp"
#include "preexp/syntax.hpp"
#include "preexp/transform.hpp"
#include "preexp/wpeval.hpp"

namespace preexp {
namespace {

using json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string path;
  std::string post = "1";
  std::string mode;
  std::string state = "{}";
  std::string script;
  std::optional<double> bound;
  std::optional<std::uint64_t> unfold;
  std::uint64_t samples = 10'000;
  std::uint64_t seed = 1;
  std::uint64_t budget = 10'000;
  std::uint64_t nodes = 64;
  std::uint64_t depth = 64;
  unsigned threads = 0;
  bool no_memo = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Program load(const Options& o) {
  Program p = desugar(parse(read_file(o.path)));
  if (o.unfold) p.body = unfold_while(p.body, *o.unfold);
  return p;
}

State initial_state(const Options& o) {
  try {
    return state_from_json(o.state);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// A literal postexpectation inside [0,1] is bounded by 1 without --bound.
Postexpectation postexpectation(const Options& o) {
  Postexpectation f;
  try {
    f = Postexpectation::parse(o.post, o.bound);
  } catch (const ParseError& e) {
    throw UsageError(std::string("--post: ") + e.what());
  }
  if (!f.bound && f.expr->kind == ExprKind::kLiteral && f.expr->value >= 0.0 &&
      f.expr->value <= 1.0) {
    f.bound = 1.0;
  }
  return f;
}

void require_bounded(const Postexpectation& f, const std::string& mode) {
  if (!f.bound || *f.bound > 1.0) {
    throw UsageError("mode " + mode + " needs a postexpectation bounded by 1 (pass --bound 1)");
  }
}

std::uint64_t cost_ceiling() {
  const char* env = std::getenv("PREEXP_COST_CEILING");
  QuadConfig defaults;
  if (!env || !*env) return defaults.cost_ceiling;
  std::uint64_t v = 0;
  std::string_view s(env);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v == 0) {
    throw UsageError("PREEXP_COST_CEILING must be a positive integer");
  }
  return v;
}

json counts_json(const RunCounts& c) {
  return {{"terminated", c.terminated},
          {"errored", c.errored},
          {"diverged", c.diverged},
          {"exhausted", c.exhausted}};
}

json estimate_json(const Estimate& e) {
  json j = {{"query", to_string(e.mode)},
            {"mean", e.mean},
            {"stderr", e.std_error},
            {"samples", e.samples},
            {"counts", counts_json(e.counts)},
            {"bound", e.is_bound()}};
  if (e.is_bound()) {
    j["note"] = e.mode == EstimateMode::kWp
                    ? "exhausted runs counted as 0: the mean is a lower bound"
                    : "exhausted runs counted with their in-flight weight: the mean is an upper bound";
  }
  return j;
}

void emit(std::ostream& out, const json& j) { out << j.dump() << '\n'; }

int cmd_check(const Options& o, std::ostream& out) {
  Program p = load(o);
  json j = {{"source", pretty(*p.body)}};
  if (p.result) j["result"] = pretty(*p.result);
  emit(out, j);
  return kExitOk;
}

int cmd_unfold(const Options& o, std::ostream& out) {
  Program p = desugar(parse(read_file(o.path)));
  emit(out, {{"source", pretty(*unfold_while(p.body, o.depth))}});
  return kExitOk;
}

int cmd_noscore(const Options& o, std::ostream& out) {
  Program p = load(o);
  emit(out, {{"source", pretty(*noscore(p.body))}});
  return kExitOk;
}

std::vector<double> parse_script(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw UsageError("--script: not a number: '" + item + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos) {
      throw UsageError("--script: not a number: '" + item + "'");
    }
    values.push_back(v);
  }
  return values;
}

int cmd_run(const Options& o, std::ostream& out) {
  Program p = load(o);
  Entropy theta = o.script.empty() ? Entropy::base(o.seed) : Entropy::scripted(parse_script(o.script));
  opsem::RunOutcome r;
  try {
    r = opsem::run(p.body, initial_state(o), theta, o.budget);
  } catch (const EntropyExhausted& e) {
    throw UsageError(std::string("--script: ") + e.what());
  }
  json j = {{"outcome", opsem::to_string(r.kind)}};
  if (r.terminated()) j["state"] = json::parse(to_json(r.final_state));
  j["score"] = r.score;
  j["steps"] = r.steps;
  emit(out, j);
  return kExitOk;
}

int cmd_estimate(const Options& o, std::ostream& out) {
  Program p = load(o);
  Postexpectation f = postexpectation(o);
  EstimatorConfig cfg{o.samples, o.seed, o.budget, o.threads};
  State sigma = initial_state(o);
  const std::string mode = o.mode.empty() ? "wp" : o.mode;
  if (mode == "wlp") require_bounded(f, mode);

  JointEstimate joint = estimate_joint(p.body, f, sigma, cfg);
  json j;
  if (mode == "wp") {
    j = estimate_json(joint.wp);
  } else if (mode == "wlp") {
    j = estimate_json(*joint.wlp);
  } else if (mode == "divergence") {
    j = estimate_json(joint.divergence);
  } else {
    j = estimate_json(posterior_from(joint));
    j["numerator"] = estimate_json(joint.wp);
    j["normalizer"] = estimate_json(joint.normalizer);
    j["common_random_numbers"] = true;
  }
  j["post"] = o.post;
  j["seed"] = o.seed;
  j["budget"] = o.budget;
  if (o.unfold) j["unfold"] = *o.unfold;
  emit(out, j);
  return kExitOk;
}

int cmd_quad(const Options& o, std::ostream& out) {
  Program p = load(o);
  Postexpectation f = postexpectation(o);
  QuadConfig q;
  q.nodes = o.nodes;
  q.max_depth = o.depth;
  q.memoize = !o.no_memo;
  q.cost_ceiling = cost_ceiling();
  State sigma = initial_state(o);
  ExpectationFn fn = ExpectationFn::from(f);
  const std::string mode = o.mode.empty() ? "wp" : o.mode;

  json j = {{"query", mode}};
  if (mode == "wp") {
    j["value"] = wp(p.body, fn, sigma, q);
  } else {
    require_bounded(f, mode);
    if (mode == "wlp") {
      q.mode = QuadMode::kWlp;
      j["value"] = wlp(p.body, fn, sigma, q);
    } else {
      Bracket b = wp_bracket(p.body, fn, sigma, q);
      j["low"] = b.low;
      j["high"] = b.high;
    }
  }
  j["post"] = o.post;
  j["nodes"] = o.nodes;
  j["depth"] = o.depth;
  emit(out, j);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weakest preexpectations and entropy-based sampling for a probabilistic while-language",
               "preexp"};
  app.require_subcommand(1);
  Options o;

  auto add_program = [&](CLI::App* sub) {
    sub->add_option("program", o.path, "Program file")->required();
  };
  auto add_state = [&](CLI::App* sub) {
    sub->add_option("--state", o.state, "Initial state as a JSON object of numbers");
  };
  auto add_post = [&](CLI::App* sub) {
    sub->add_option("--post", o.post, "Postexpectation expression");
    sub->add_option("--bound", o.bound, "Upper bound the postexpectation is clamped to")
        ->check(CLI::NonNegativeNumber);
  };
  auto add_unfold = [&](CLI::App* sub) {
    sub->add_option("--unfold", o.unfold, "Replace every loop by its n-th approximation first");
  };

  auto* check = app.add_subcommand("check", "Parse and desugar; print the core program");
  add_program(check);

  auto* run = app.add_subcommand("run", "Run the operational semantics once");
  add_program(run);
  add_state(run);
  add_unfold(run);
  run->add_option("--seed", o.seed, "Seed of the base entropy");
  run->add_option("--budget", o.budget, "Step budget")->check(CLI::PositiveNumber);
  run->add_option("--script", o.script, "Comma-separated draw values (scripted entropy)");

  auto* estimate = app.add_subcommand("estimate", "Monte Carlo estimate over entropies");
  add_program(estimate);
  add_state(estimate);
  add_post(estimate);
  add_unfold(estimate);
  estimate->add_option("--mode", o.mode, "wp, wlp, divergence or posterior")
      ->check(CLI::IsMember({"wp", "wlp", "divergence", "posterior"}));
  estimate->add_option("--samples", o.samples, "Number of runs")->check(CLI::PositiveNumber);
  estimate->add_option("--seed", o.seed, "Run i uses seed + i");
  estimate->add_option("--budget", o.budget, "Step budget per run")->check(CLI::PositiveNumber);
  estimate->add_option("--threads", o.threads, "Worker threads (0 = all cores)");

  auto* quad = app.add_subcommand("quad", "Structural wp/wlp by quadrature");
  add_program(quad);
  add_state(quad);
  add_post(quad);
  add_unfold(quad);
  quad->add_option("--mode", o.mode, "wp, wlp or bracket")
      ->check(CLI::IsMember({"wp", "wlp", "bracket"}));
  quad->add_option("--nodes", o.nodes, "Midpoint nodes per draw")->check(CLI::PositiveNumber);
  quad->add_option("--depth", o.depth, "Kleene iterations per loop");
  quad->add_flag("--no-memo", o.no_memo, "Disable memoization of draw integrals");

  auto* unfold = app.add_subcommand("unfold", "Print the program with loops unfolded");
  add_program(unfold);
  unfold->add_option("--depth", o.depth, "Unfolding depth")->required();

  auto* noscore_cmd = app.add_subcommand("noscore", "Print the program with scores replaced");
  add_program(noscore_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*check) return cmd_check(o, out);
    if (*run) return cmd_run(o, out);
    if (*estimate) return cmd_estimate(o, out);
    if (*quad) return cmd_quad(o, out);
    if (*unfold) return cmd_unfold(o, out);
    if (*noscore_cmd) return cmd_noscore(o, out);
  } catch (const ParseError& e) {
    err << o.path << ":" << e.what() << '\n';
    return kExitInvalid;
  } catch (const InfeasibleQuery& e) {
    err << "infeasible query: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const VanishingNormalizer& e) {
    err << "vanishing normalizer: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const UsageError& e) {
    err << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    err << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace preexp
