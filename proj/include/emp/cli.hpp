#pragma once

/// @file cli.hpp
/// The `fgemp` command-line front end. Every command prints one JSON
/// document on the output stream. Exit codes: 0 success, 1 parse or
/// validation error, 2 runtime error (ZeroEvidence, DegenerateMStep,
/// UndefinedQuotient, TooLarge).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "emp/entropy.hpp"
#include "emp/error.hpp"
#include "emp/graph.hpp"
#include "emp/hmm.hpp"
#include "emp/io.hpp"
#include "emp/learning.hpp"
#include "emp/oracle.hpp"
#include "emp/propagation.hpp"
#include "emp/semiring.hpp"

namespace emp::cli {

using json = nlohmann::json;

inline constexpr double kCheckTolerance = 1e-9;
inline constexpr std::uint64_t kDefaultSeed = 20240229;

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ZeroEvidence:
    case ErrorKind::DegenerateMStep:
    case ErrorKind::UndefinedQuotient:
    case ErrorKind::TooLarge:
    case ErrorKind::MissingDependency:
      return 2;
    default:
      return 1;
  }
}

inline json error_json(const Error& e) {
  json detail = {{"kind", std::string(to_string(e.kind()))}, {"detail", e.detail()}};
  if (!e.path().empty()) detail["path"] = e.path();
  return detail;
}

/// |a - b| relative to the larger magnitude; 0 when both are 0.
inline double relative_error(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

/// Entropy discrepancy in bits, relative once the entropy exceeds one bit.
inline double entropy_error(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

namespace detail {

struct Context {
  std::ostream& out;
  std::ostream& err;
};

inline std::uint64_t base_seed() {
  if (const char* env = std::getenv("FG_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, "FG_SEED must be an unsigned integer", "FG_SEED");
    }
  }
  return kDefaultSeed;
}

inline std::size_t root_index(const CheckedGraph& g, const std::string& root) {
  return root.empty() ? 0 : g.variable_index(root);
}

/// Same structure, fresh random tables: entries uniform on [0, 1) with
/// roughly one in ten set to zero; companions uniform on [-1, 1],
/// undefined where the entry is zero.
inline io::GraphDocument randomize(const io::GraphDocument& doc, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> signed_unit(-1.0, 1.0);
  io::GraphDocument out{doc.graph, std::vector<std::vector<double>>{}, std::nullopt};
  for (auto& f : out.graph.mutable_factors()) {
    std::vector<double> g;
    for (auto& v : f.values) {
      v = unit(rng) < 0.1 ? 0.0 : unit(rng);
      g.push_back(v == 0.0 ? kUndefined : signed_unit(rng));
    }
    out.companions->push_back(std::move(g));
  }
  return out;
}

inline HmmSpec random_hmm_like(const HmmSpec& shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  auto row = [&](std::size_t n) {
    std::vector<double> r(n);
    double sum = 0.0;
    for (auto& x : r) sum += (x = unit(rng));
    for (auto& x : r) x /= sum;
    return r;
  };
  HmmSpec h{shape.states, shape.alphabet, row(shape.states), {}, {}, {}};
  for (std::size_t s = 0; s < h.states; ++s) {
    h.transition.push_back(row(h.states));
    h.emission.push_back(row(h.alphabet));
  }
  std::uniform_int_distribution<std::size_t> symbol(0, h.alphabet - 1);
  for (std::size_t t = 0; t < shape.observations.size(); ++t) h.observations.push_back(symbol(rng));
  return h;
}

/// Largest engine-vs-enumeration discrepancy on one document.
inline double compare_with_oracle(const io::GraphDocument& doc) {
  const auto g = validate(doc.graph);
  double worst = 0.0;
  auto note = [&](double engine, double reference) {
    worst = std::max(worst, relative_error(engine, reference));
  };

  const auto sp = run<SumProduct>(g, 0, {.two_pass = true});
  note(scaled_value<SumProduct>(total_sum<SumProduct>(sp)), oracle::enumerate_z(g.graph()));
  for (std::size_t n = 0; n < g.num_variables(); ++n) {
    const auto expected = oracle::enumerate_marginal(g.graph(), n);
    // Marginals of other components carry only their own component's mass.
    double others = 1.0;
    for (const auto& m : sp.root_marginals)
      if (g.component_of(m.variable) != g.component_of(n))
        others *= scaled_value<SumProduct>(total_sum<SumProduct>(m));
    for (std::size_t x = 0; x < expected.size(); ++x)
      note(sp.marginals[n].values[x] * others, expected[x]);
  }

  if (doc.companions) {
    const auto zh = compute_zh(g, lift_tables(g, *doc.companions));
    note(zh.Z, oracle::enumerate_z(g.graph()));
    note(zh.H, oracle::enumerate_h(g.graph(), *doc.companions));
  }
  if (oracle::enumerate_z(g.graph()) >= kZeroEvidenceFloor) {
    const auto pe = posterior_entropy(g);
    worst = std::max(worst, entropy_error(*pe.entropy_bits, oracle::enumerate_entropy(g.graph())));
  }
  return worst;
}

inline int emit(Context& ctx, const json& j, int code) {
  ctx.out << j.dump() << '\n';
  return code;
}

inline int fail(Context& ctx, const Error& e) {
  ctx.err << "error: " << e.what() << '\n';
  return emit(ctx, json{{"error", error_json(e)}}, exit_code_for(e.kind()));
}

inline json number_or_bool(double x) { return x; }
inline json number_or_bool(bool b) { return b ? 1.0 : 0.0; }

inline SemiringId parse_semiring(const std::string& name) {
  if (name == "sum-product") return SemiringId::SumProduct;
  if (name == "max-product") return SemiringId::MaxProduct;
  if (name == "boolean") return SemiringId::Boolean;
  throw Error(ErrorKind::ParseError, "unknown semiring '" + name + "'", "--semiring");
}

}  // namespace detail

/// Runs one command. `args` excludes the program name.
inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  detail::Context ctx{out, err};
  CLI::App app{"Factor-graph inference with entropy message passing", "fgemp"};
  app.require_subcommand(1);

  std::string graph_path, hmm_path, root, semiring = "sum-product", var, base = "2";
  bool rescale = false, all = false, derive_g = false;
  std::vector<double> theta;
  double step = 1.0, tol = 1e-8;
  std::size_t iters = 0, seeds = 0;

  auto* validate_cmd = app.add_subcommand("validate", "Check a graph document");
  validate_cmd->add_option("graph", graph_path, "Graph document")->required();

  auto* partition_cmd = app.add_subcommand("partition", "Total sum Z");
  partition_cmd->add_option("graph", graph_path)->required();
  partition_cmd->add_option("--semiring", semiring)
      ->check(CLI::IsMember({"sum-product", "max-product", "boolean"}));
  partition_cmd->add_option("--root", root, "Root variable id");
  partition_cmd->add_flag("--rescale", rescale, "Rescale messages, report log_scale");

  auto* marginal_cmd = app.add_subcommand("marginal", "Unnormalized marginals");
  marginal_cmd->add_option("graph", graph_path)->required();
  auto* var_opt = marginal_cmd->add_option("--var", var, "Variable id");
  auto* all_opt = marginal_cmd->add_flag("--all", all, "Every variable");
  var_opt->excludes(all_opt);
  marginal_cmd->add_option("--semiring", semiring)
      ->check(CLI::IsMember({"sum-product", "max-product", "boolean"}));

  auto* entropy_cmd = app.add_subcommand("entropy", "Z, H and posterior entropy");
  auto* graph_opt = entropy_cmd->add_option("graph", graph_path);
  auto* hmm_opt = entropy_cmd->add_option("--hmm", hmm_path, "HMM document");
  graph_opt->excludes(hmm_opt);
  entropy_cmd->add_option("--base", base)->check(CLI::IsMember({"2", "e"}));
  auto* rescale_opt = entropy_cmd->add_flag("--rescale", rescale);
  entropy_cmd->add_option("--root", root);
  entropy_cmd->add_flag("--derive-g", derive_g, "Use g = log2 f");

  auto* em_cmd = app.add_subcommand("em-step", "Closed-form linear M-step");
  em_cmd->add_option("graph", graph_path)->required();

  auto* grad_cmd = app.add_subcommand("grad", "Gradient of p(theta) and ascent steps");
  grad_cmd->add_option("graph", graph_path)->required();
  grad_cmd->add_option("--theta", theta)->delimiter(',');
  grad_cmd->add_option("--step", step);
  grad_cmd->add_option("--iters", iters);
  grad_cmd->add_option("--tol", tol);

  auto* check_cmd = app.add_subcommand("check", "Engine versus brute-force enumeration");
  auto* check_graph = check_cmd->add_option("graph", graph_path);
  auto* check_hmm = check_cmd->add_option("--hmm", hmm_path);
  check_graph->excludes(check_hmm);
  check_cmd->add_option("--seeds", seeds, "Extra random tables on the same structure");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return detail::emit(ctx, json{{"error", {{"kind", "UsageError"}, {"detail", e.what()}}}}, 1);
  }

  try {
    if (validate_cmd->parsed()) {
      json errors = json::array();
      try {
        const auto doc = io::load_graph_document(graph_path);
        for (const auto& e : diagnose(doc.graph)) errors.push_back(error_json(e));
      } catch (const Error& e) {
        errors.push_back(error_json(e));
      }
      for (const auto& e : errors) err << "invalid: " << e.dump() << '\n';
      const bool valid = errors.empty();
      return detail::emit(ctx, json{{"valid", valid}, {"errors", errors}}, valid ? 0 : 1);
    }

    if (partition_cmd->parsed()) {
      const auto doc = io::load_graph_document(graph_path);
      const auto g = validate(doc.graph);
      const auto r = detail::root_index(g, root);
      return visit_semiring(detail::parse_semiring(semiring), [&](auto s) {
        using S = decltype(s);
        const auto total = total_sum<S>(run<S>(g, r, {.two_pass = false, .rescale = rescale}));
        json j;
        if constexpr (std::is_same_v<S, Entropy>) {
          j["Z"] = total.mantissa.score;
        } else {
          j["Z"] = detail::number_or_bool(total.mantissa);
        }
        j["log_scale"] = total.log_scale;
        return detail::emit(ctx, j, 0);
      });
    }

    if (marginal_cmd->parsed()) {
      if (var.empty() && !all)
        throw Error(ErrorKind::ParseError, "either --var or --all is required", "marginal");
      const auto doc = io::load_graph_document(graph_path);
      const auto g = validate(doc.graph);
      return visit_semiring(detail::parse_semiring(semiring), [&](auto s) {
        using S = decltype(s);
        json marginals = json::object();
        auto write = [&](const Marginal<typename S::value_type>& m) {
          json values = json::array();
          for (const auto& w : m.values) {
            if constexpr (std::is_same_v<S, Entropy>) {
              values.push_back(w.score);
            } else if constexpr (std::is_same_v<S, Boolean>) {
              values.push_back(detail::number_or_bool(w));
            } else {
              values.push_back(w);
            }
          }
          marginals[g.variable(m.variable).id] = std::move(values);
        };
        if (all) {
          const auto result = run<S>(g, 0, {.two_pass = true});
          for (const auto& m : result.marginals) write(m);
        } else {
          const auto result = run<S>(g, g.variable_index(var));
          write(result.root_marginals.front());
        }
        return detail::emit(ctx, json{{"marginals", marginals}}, 0);
      });
    }

    if (entropy_cmd->parsed()) {
      const auto unit = base == "e" ? EntropyBase::Nats : EntropyBase::Bits;
      EntropyResult result;
      if (!hmm_path.empty()) {
        const auto h = io::load_hmm_document(hmm_path);
        const auto lifted = lift_graph(hmm_to_weighted_graph(h));
        const bool scaled = rescale_opt->count() > 0 ? rescale
                                                     : h.observations.size() > kAutoRescaleLength;
        result = posterior_entropy(lifted, detail::root_index(lifted.graph, root), scaled);
      } else {
        if (graph_path.empty())
          throw Error(ErrorKind::ParseError, "a graph document or --hmm is required", "entropy");
        const auto doc = io::load_graph_document(graph_path);
        const auto g = validate(doc.graph);
        std::vector<std::vector<double>> companions;
        if (derive_g) {
          companions = log2_companions(g.graph());
        } else if (doc.companions) {
          companions = *doc.companions;
        } else {
          throw Error(ErrorKind::ParseError,
                      "factors carry no \"g\" tables; pass --derive-g to use g = log2 f", "factors");
        }
        const auto tables = lift_tables(g, companions);
        result = with_posterior_entropy(
            compute_zh(g, tables, detail::root_index(g, root), rescale));
      }
      return detail::emit(ctx,
                          json{{"Z", result.Z},
                               {"H", result.H},
                               {"log_scale", result.log_scale},
                               {"entropy", convert_entropy(*result.entropy_bits, unit)},
                               {"base", base}},
                          0);
    }

    if (em_cmd->parsed()) {
      const auto doc = io::load_graph_document(graph_path);
      if (!doc.parametric || !doc.parametric->linear)
        throw Error(ErrorKind::ParseError, "document needs \"u\", \"v\" and \"lambda\"", "parametric");
      const auto g = validate(doc.graph);
      const auto step_result = em_linear_step(g, *doc.parametric->linear);
      return detail::emit(ctx,
                          json{{"H_a", step_result.h_a},
                               {"H_b", step_result.h_b},
                               {"theta_new", step_result.theta},
                               {"residual", step_result.residual}},
                          0);
    }

    if (grad_cmd->parsed()) {
      const auto doc = io::load_graph_document(graph_path);
      if (!doc.parametric || !doc.parametric->affine)
        throw Error(ErrorKind::ParseError, "document needs \"grad\" tables", "parametric");
      const auto g = validate(doc.graph);
      const auto& model = *doc.parametric->affine;
      if (theta.empty()) theta = model.origin();
      if (theta.size() != model.dim())
        throw Error(ErrorKind::ParseError, "--theta needs " + std::to_string(model.dim()) +
                                               " components", "--theta");
      const auto gradient = gradient_at(g, model.evaluate(theta));
      std::vector<double> next = theta;
      for (std::size_t j = 0; j < next.size(); ++j) next[j] += step * gradient[j];
      json j{{"gradient", gradient}, {"theta_next", next}};
      if (iters > 0) {
        const auto trace = gradient_ascent(g, model, theta, step, iters, tol);
        j["trajectory"] = trace.thetas;
        j["converged"] = trace.converged;
      }
      return detail::emit(ctx, j, 0);
    }

    if (check_cmd->parsed()) {
      std::mt19937_64 rng(detail::base_seed());
      double worst = 0.0;
      std::size_t cases = 0;
      if (!hmm_path.empty()) {
        const auto h = io::load_hmm_document(hmm_path);
        auto compare = [&](const HmmSpec& model) {
          const auto engine = *hmm_entropy(model).entropy_bits;
          const auto reference = oracle::enumerate_hmm_entropy(model);
          worst = std::max(worst, entropy_error(engine, reference));
          ++cases;
        };
        compare(h);
        for (std::size_t k = 0; k < seeds; ++k) compare(detail::random_hmm_like(h, rng));
      } else {
        if (graph_path.empty())
          throw Error(ErrorKind::ParseError, "a graph document or --hmm is required", "check");
        const auto doc = io::load_graph_document(graph_path);
        worst = detail::compare_with_oracle(doc);
        ++cases;
        for (std::size_t k = 0; k < seeds; ++k) {
          worst = std::max(worst, detail::compare_with_oracle(detail::randomize(doc, rng)));
          ++cases;
        }
      }
      const bool pass = worst <= kCheckTolerance;
      if (!pass) err << "check failed: max relative error " << worst << '\n';
      return detail::emit(ctx, json{{"max_rel_err", worst}, {"pass", pass}, {"cases", cases}},
                          pass ? 0 : 1);
    }
  } catch (const Error& e) {
    return detail::fail(ctx, e);
  }
  return 1;
}

}  // namespace emp::cli
