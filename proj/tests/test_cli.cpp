#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "emp/cli.hpp"
#include "support/random_models.hpp"

using namespace emp;
using io::json;

namespace {

std::string sample(const std::string& name) { return std::string(EMP_SAMPLES_DIR) + "/" + name; }

struct Outcome {
  int code;
  json out;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_command(args, out, err);
  json j;
  if (!out.str().empty()) j = json::parse(out.str());
  return {code, j};
}

std::string write_temp(const std::string& name, const json& j) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << j.dump();
  return path.string();
}

}  // namespace

TEST(Cli, ValidateAcceptsAndRejects) {
  auto r = run({"validate", sample("five-factor-ones.json")});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.out["valid"].get<bool>());

  r = run({"validate", sample("bad-scope.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.out["valid"].get<bool>());
  EXPECT_EQ(r.out["errors"][0]["kind"], "ScopeMismatch");
  EXPECT_EQ(r.out["errors"][0]["path"], "factors[0].values");
}

TEST(Cli, PartitionInEverySemiring) {
  auto r = run({"partition", sample("five-factor-ones.json")});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out["Z"].get<double>(), 32.0);
  EXPECT_EQ(run({"partition", sample("five-factor-ones.json"), "--semiring", "max-product"}).out["Z"], 1.0);
  EXPECT_EQ(run({"partition", sample("five-factor-ones.json"), "--semiring", "boolean"}).out["Z"], 1.0);
  EXPECT_EQ(run({"partition", sample("zero-evidence.json"), "--semiring", "boolean"}).out["Z"], 0.0);

  r = run({"partition", sample("random-tree.json"), "--rescale", "--root", "c"});
  EXPECT_EQ(r.code, 0);
  const double z = r.out["Z"].get<double>() * std::exp(r.out["log_scale"].get<double>());
  const auto doc = io::load_graph_document(sample("random-tree.json"));
  EXPECT_LE(fixtures::relative_error(z, oracle::enumerate_z(doc.graph)), 1e-12);
}

TEST(Cli, Marginals) {
  auto r = run({"marginal", sample("five-factor-ones.json"), "--var", "x3"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out["marginals"]["x3"], json({16.0, 16.0}));
  r = run({"marginal", sample("five-factor-ones.json"), "--all"});
  EXPECT_EQ(r.out["marginals"].size(), 5u);
  EXPECT_EQ(run({"marginal", sample("five-factor-ones.json"), "--var", "nope"}).code, 1);
  EXPECT_EQ(run({"marginal", sample("five-factor-ones.json")}).code, 1);
}

TEST(Cli, EntropyOfGraphAndHmm) {
  auto r = run({"entropy", "--hmm", sample("uniform2x5.json")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NEAR(r.out["entropy"].get<double>(), 5.0, 1e-12);
  r = run({"entropy", "--hmm", sample("uniform2x5.json"), "--base", "e"});
  EXPECT_NEAR(r.out["entropy"].get<double>(), 5.0 * std::log(2.0), 1e-12);

  r = run({"entropy", sample("weighted-chain.json")});
  EXPECT_EQ(r.code, 0);
  const auto derived = run({"entropy", sample("weighted-chain.json"), "--derive-g"});
  EXPECT_NEAR(r.out["entropy"].get<double>(), derived.out["entropy"].get<double>(), 1e-12);
  const auto doc = io::load_graph_document(sample("weighted-chain.json"));
  EXPECT_NEAR(r.out["entropy"].get<double>(), oracle::enumerate_entropy(doc.graph), 1e-12);

  EXPECT_EQ(run({"entropy", sample("five-factor-ones.json")}).code, 1);
}

TEST(Cli, ZeroEvidenceExitsTwo) {
  const auto r = run({"entropy", sample("zero-evidence.json"), "--derive-g"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.out["error"]["kind"], "ZeroEvidence");
}

TEST(Cli, EmStep) {
  const auto r = run({"em-step", sample("linear-em.json")});
  EXPECT_EQ(r.code, 0);
  EXPECT_DOUBLE_EQ(r.out["H_a"].get<double>(), 3.0);
  EXPECT_DOUBLE_EQ(r.out["H_b"].get<double>(), 1.0);
  EXPECT_EQ(r.out["theta_new"], json({-3.0}));
  EXPECT_EQ(r.out["residual"].get<double>(), 0.0);

  auto j = io::read_json_file(sample("linear-em.json"));
  j["parametric"]["v"] = {{0, 0}};
  const auto d = run({"em-step", write_temp("fgemp-degenerate.json", j)});
  EXPECT_EQ(d.code, 2);
  EXPECT_EQ(d.out["error"]["kind"], "DegenerateMStep");
}

TEST(Cli, Gradient) {
  auto r = run({"grad", sample("affine-grad.json")});
  EXPECT_EQ(r.code, 0);
  // p(theta) = sum over x1 of f1(x1) is identically one.
  EXPECT_NEAR(r.out["gradient"][0].get<double>(), 0.0, 1e-15);

  r = run({"grad", sample("affine-grad.json"), "--theta", "0.5", "--step", "0.1", "--iters", "3"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out["trajectory"].size(), 2u);
  EXPECT_TRUE(r.out["converged"].get<bool>());
  EXPECT_EQ(run({"grad", sample("affine-grad.json"), "--theta", "1,2"}).code, 1);
}

TEST(Cli, CheckAgreesWithEnumeration) {
  auto r = run({"check", sample("random-tree.json"), "--seeds", "20"});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.out["pass"].get<bool>());
  EXPECT_EQ(r.out["cases"], 21);
  EXPECT_LE(r.out["max_rel_err"].get<double>(), 1e-9);

  r = run({"check", "--hmm", sample("uniform2x5.json"), "--seeds", "5"});
  EXPECT_EQ(r.code, 0);

  std::mt19937_64 rng(99);
  for (int k = 0; k < 20; ++k) {
    io::GraphDocument doc{fixtures::random_tree(rng, {.max_variables = 8}), {}, {}};
    const auto path = write_temp("fgemp-check-" + std::to_string(k) + ".json", io::to_json(doc));
    EXPECT_EQ(run({"check", path}).code, 0) << path;
  }
}

TEST(Cli, MalformedInput) {
  auto r = run({"partition", sample("bad-scope.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.out["error"]["kind"], "ScopeMismatch");

  r = run({"partition", sample("does-not-exist.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.out["error"]["kind"], "ParseError");

  r = run({"frobnicate"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.out["error"]["kind"], "UsageError");

  const auto path = write_temp("fgemp-garbage.json", json("not a graph"));
  EXPECT_EQ(run({"validate", path}).code, 1);
}
