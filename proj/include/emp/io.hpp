#pragma once

/// @file io.hpp
/// JSON documents for factor graphs, companion tables, parametric blocks
/// and HMMs. The format is described in docs/format.md.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "emp/entropy.hpp"
#include "emp/error.hpp"
#include "emp/graph.hpp"
#include "emp/hmm.hpp"
#include "emp/learning.hpp"

namespace emp::io {

using json = nlohmann::json;

struct ParametricBlock {
  std::size_t dim = 0;
  std::vector<double> lambda;
  std::optional<LinearFactorSet> linear;
  std::optional<AffineModel> affine;
};

struct GraphDocument {
  FactorGraph graph;
  std::optional<std::vector<std::vector<double>>> companions;
  std::optional<ParametricBlock> parametric;
};

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::ParseError, what, path);
}

inline const json& member(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing required key");
  return *it;
}

inline const json& array(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

inline std::size_t count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) fail(path, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

inline std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

inline std::vector<double> numbers(const json& j, const std::string& path) {
  array(j, path);
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<std::vector<double>> number_rows(const json& j, const std::string& path) {
  array(j, path);
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(numbers(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::string index_path(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

inline ParametricBlock parse_parametric(const json& j, const FactorGraph& g) {
  const std::string path = "parametric";
  ParametricBlock block;
  block.dim = count(member(j, "dim", path), path + ".dim");
  if (block.dim == 0) fail(path + ".dim", "dimension must be at least 1");
  const std::size_t nf = g.factors().size();

  if (j.contains("lambda")) {
    block.lambda = numbers(j["lambda"], path + ".lambda");
    if (block.lambda.size() != block.dim) fail(path + ".lambda", "length must equal dim");
  }

  const bool has_u = j.contains("u");
  const bool has_v = j.contains("v");
  if (has_u != has_v) fail(path, "\"u\" and \"v\" must be given together");
  if (has_u) {
    LinearFactorSet lin;
    lin.u = number_rows(j["u"], path + ".u");
    lin.v = number_rows(j["v"], path + ".v");
    if (lin.u.size() != nf) fail(path + ".u", "need one table per factor");
    if (lin.v.size() != nf) fail(path + ".v", "need one table per factor");
    if (block.lambda.empty()) fail(path + ".lambda", "required with \"u\"/\"v\"");
    lin.lambda = block.lambda;
    block.linear = std::move(lin);
  }

  if (j.contains("grad")) {
    const auto& grad = array(j["grad"], path + ".grad");
    if (grad.size() != nf) fail(path + ".grad", "need one block per factor");
    std::vector<std::vector<std::vector<double>>> slopes;
    for (std::size_t m = 0; m < nf; ++m) {
      auto rows = number_rows(grad[m], index_path(path + ".grad", m));
      if (rows.size() != block.dim)
        fail(index_path(path + ".grad", m), "need dim gradient tables");
      slopes.push_back(std::move(rows));
    }
    std::vector<double> origin(block.dim, 0.0);
    if (j.contains("theta0")) {
      origin = numbers(j["theta0"], path + ".theta0");
      if (origin.size() != block.dim) fail(path + ".theta0", "length must equal dim");
    }
    std::vector<std::vector<double>> base;
    for (const auto& f : g.factors()) base.push_back(f.values);
    try {
      block.affine.emplace(std::move(base), std::move(slopes), std::move(origin));
    } catch (const Error& e) {
      throw e.at(path);
    }
  }
  return block;
}

}  // namespace detail

/// Reads a graph document. JSON-shape problems raise ParseError and naming
/// problems raise UnknownVariable or DuplicateId, each carrying the key
/// path. Structural checks are left to `diagnose` / `validate`.
inline GraphDocument parse_graph_document(const json& doc) {
  using namespace detail;
  GraphDocument out;
  bool probabilistic = true;
  if (doc.is_object() && doc.contains("probabilistic")) {
    if (!doc["probabilistic"].is_boolean()) fail("probabilistic", "expected a boolean");
    probabilistic = doc["probabilistic"].get<bool>();
  }
  out.graph = FactorGraph(probabilistic);

  const auto& vars = array(member(doc, "variables", ""), "variables");
  for (std::size_t n = 0; n < vars.size(); ++n) {
    const auto p = index_path("variables", n);
    auto id = text(member(vars[n], "id", p), p + ".id");
    const auto card = count(member(vars[n], "cardinality", p), p + ".cardinality");
    try {
      out.graph.add_variable(std::move(id), card);
    } catch (const Error& e) {
      throw Error(e.kind(), e.detail(), p + ".id");
    }
  }

  const auto& factors = array(member(doc, "factors", ""), "factors");
  bool any_g = false;
  std::vector<std::optional<std::vector<double>>> companions;
  for (std::size_t m = 0; m < factors.size(); ++m) {
    const auto p = index_path("factors", m);
    const auto& f = factors[m];
    std::string id = f.is_object() && f.contains("id") ? text(f["id"], p + ".id") : "f" + std::to_string(m);
    const auto& scope_json = array(member(f, "scope", p), p + ".scope");
    std::vector<std::size_t> scope;
    for (std::size_t s = 0; s < scope_json.size(); ++s) {
      const auto sp = index_path(p + ".scope", s);
      const auto name = text(scope_json[s], sp);
      const auto n = out.graph.find_variable(name);
      if (!n) throw Error(ErrorKind::UnknownVariable, "scope references '" + name + "'", sp);
      scope.push_back(*n);
    }
    auto values = numbers(member(f, "values", p), p + ".values");

    std::optional<std::vector<double>> g;
    if (f.contains("g")) {
      any_g = true;
      const auto& gj = array(f["g"], p + ".g");
      if (gj.size() != values.size())
        throw Error(ErrorKind::ScopeMismatch, "\"g\" must have as many entries as \"values\"",
                    p + ".g");
      std::vector<double> table;
      for (std::size_t i = 0; i < gj.size(); ++i) {
        const auto gp = index_path(p + ".g", i);
        if (gj[i].is_null()) {
          if (values[i] != 0.0)
            throw Error(ErrorKind::InvalidValue, "null companion paired with a nonzero value", gp);
          table.push_back(kUndefined);
        } else {
          table.push_back(number(gj[i], gp));
        }
      }
      g = std::move(table);
    }
    companions.push_back(std::move(g));
    out.graph.add_factor_indices(std::move(id), std::move(scope), std::move(values));
  }

  if (any_g) {
    std::vector<std::vector<double>> tables;
    for (std::size_t m = 0; m < companions.size(); ++m) {
      if (!companions[m]) fail(index_path("factors", m) + ".g", "\"g\" given for some factors but not this one");
      tables.push_back(std::move(*companions[m]));
    }
    out.companions = std::move(tables);
  }

  if (doc.contains("parametric")) out.parametric = parse_parametric(doc["parametric"], out.graph);
  return out;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open file", path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, e.what(), path.string());
  }
}

inline GraphDocument load_graph_document(const std::filesystem::path& path) {
  return parse_graph_document(read_json_file(path));
}

/// Serializes a graph document. Undefined companions become null.
inline json to_json(const GraphDocument& doc) {
  json out;
  const auto& g = doc.graph;
  if (!g.probabilistic()) out["probabilistic"] = false;
  out["variables"] = json::array();
  for (const auto& v : g.variables())
    out["variables"].push_back({{"id", v.id}, {"cardinality", v.cardinality}});
  out["factors"] = json::array();
  for (std::size_t m = 0; m < g.factors().size(); ++m) {
    const auto& f = g.factors()[m];
    json scope = json::array();
    for (auto n : f.scope) scope.push_back(g.variables()[n].id);
    json factor = {{"id", f.id}, {"scope", scope}, {"values", f.values}};
    if (doc.companions) {
      json gj = json::array();
      for (double x : (*doc.companions)[m]) gj.push_back(std::isfinite(x) ? json(x) : json(nullptr));
      factor["g"] = std::move(gj);
    }
    out["factors"].push_back(std::move(factor));
  }
  if (doc.parametric) {
    const auto& p = *doc.parametric;
    json block = {{"dim", p.dim}};
    if (!p.lambda.empty()) block["lambda"] = p.lambda;
    if (p.linear) {
      block["u"] = p.linear->u;
      block["v"] = p.linear->v;
    }
    if (p.affine) {
      const auto at_origin = p.affine->evaluate(p.affine->origin());
      block["grad"] = at_origin.gradients;
      block["theta0"] = p.affine->origin();
    }
    out["parametric"] = std::move(block);
  }
  return out;
}

inline HmmSpec parse_hmm_document(const json& doc) {
  using namespace detail;
  HmmSpec h;
  h.states = count(member(doc, "states", ""), "states");
  h.alphabet = count(member(doc, "alphabet", ""), "alphabet");
  h.initial = numbers(member(doc, "pi", ""), "pi");
  h.transition = number_rows(member(doc, "A", ""), "A");
  h.emission = number_rows(member(doc, "B", ""), "B");
  const auto& obs = array(member(doc, "observations", ""), "observations");
  for (std::size_t t = 0; t < obs.size(); ++t)
    h.observations.push_back(count(obs[t], index_path("observations", t)));
  validate_hmm(h);
  return h;
}

inline HmmSpec load_hmm_document(const std::filesystem::path& path) {
  return parse_hmm_document(read_json_file(path));
}

inline json to_json(const HmmSpec& h) {
  return {{"states", h.states},     {"alphabet", h.alphabet}, {"pi", h.initial},
          {"A", h.transition},      {"B", h.emission},        {"observations", h.observations}};
}

}  // namespace emp::io
