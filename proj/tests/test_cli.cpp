#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;
using twoopt::cli::dispatch;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "twoopt_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Cli, CensusEqualWeights) {
  const auto r = run({"census", "--n", "5", "--equal-weights"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "12\n");
}

TEST(Cli, CensusWritesManifestArtifact) {
  const auto path = scratch("census.json");
  const auto r = run({"census", "--n", "6", "--seed", "4", "--out", path.string()});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(slurp(path));
  EXPECT_EQ(j.at("two_optimal").get<std::uint64_t>(), std::stoull(r.out));
  EXPECT_EQ(j.at("manifest").at("command"), "census");
  EXPECT_EQ(j.at("manifest").at("seed"), 4);
  EXPECT_EQ(j.at("manifest").at("argv"), nlohmann::json({"census", "--n", "6", "--seed", "4"}));
}

TEST(Cli, ReduceReportsBothModels) {
  const auto graph = scratch("p3.edges");
  std::ofstream(graph) << "0 1\n1 2\n";
  const auto r = run({"reduce", "--graph", graph.string(), "--verify"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("brute_force_a"), nlohmann::json({1, 2, 1}));
  EXPECT_EQ(j.at("recoveries")[0].at("model"), "original");
  EXPECT_EQ(j.at("recoveries")[1].at("a"), nlohmann::json({1, 2, 1}));
  EXPECT_TRUE(j.at("verified").get<bool>());
  EXPECT_EQ(j.at("characterization").size(), 3u);
}

TEST(Cli, ConstructS) {
  const auto csv = scratch("spectrum.csv");
  const auto r = run({"construct-s", "--n", "9", "--csv", csv.string()});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("size"), 12);
  EXPECT_TRUE(j.at("chord_disjoint").get<bool>());
  EXPECT_EQ(j.at("spectrum"), nlohmann::json({0, 0, 1, 2, 3, 3, 4, 5, 6}));
  const auto text = slurp(csv);
  EXPECT_EQ(text.rfind("# manifest: ", 0), 0u);
  EXPECT_NE(text.find("position,k,formula_k\n"), std::string::npos);
  EXPECT_EQ(run({"construct-s", "--n", "10"}).code, 3);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  const auto bad = run({"frobnicate"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run({"census", "--n", "5", "--bogus"}).code, 2);
  EXPECT_EQ(run({"census"}).code, 2);
}

TEST(Cli, CapRefusal) {
  const auto r = run({"census", "--n", "11"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("refused"), std::string::npos);
  EXPECT_NE(r.err.find("--i-know-this-is-huge"), std::string::npos);
  EXPECT_EQ(run({"tgraph", "--n", "10"}).code, 3);
}

TEST(Cli, GenAndTgraphRoundTrip) {
  const auto inst = scratch("inst.json");
  ASSERT_EQ(run({"gen", "--n", "7", "--seed", "3", "--out", inst.string()}).code, 0);
  const auto arcs = scratch("arcs.csv");
  const auto r = run({"tgraph", "--instance", inst.string(), "--walks", "50", "--arcs", arcs.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j.at("verified").get<bool>());
  EXPECT_EQ(j.at("sinks"), j.at("two_optimal_census"));
  EXPECT_EQ(j.at("nodes"), 360);
  EXPECT_EQ(run({"census", "--instance", inst.string()}).out, std::to_string(j.at("sinks").get<int>()) + "\n");
  EXPECT_NE(slurp(arcs).find("from,to\n"), std::string::npos);
}

TEST(Cli, ReplayIsByteIdentical) {
  const auto first = scratch("vol1.json"), second = scratch("vol2.json");
  ASSERT_EQ(run({"estimate-vol", "--n", "6", "--method", "both", "--samples", "2000", "--seed", "9", "--out",
                 first.string()})
                .code,
            0);
  ASSERT_EQ(run({"replay", "--manifest", first.string(), "--out", second.string()}).code, 0);
  EXPECT_EQ(slurp(first), slurp(second));

  const auto fig1 = scratch("fig1.csv"), fig2 = scratch("fig2.csv");
  ASSERT_EQ(run({"figure", "--n-min", "5", "--n-max", "6", "--samples", "200", "--out", fig1.string()}).code, 0);
  ASSERT_EQ(run({"replay", "--manifest", fig1.string(), "--out", fig2.string()}).code, 0);
  EXPECT_EQ(slurp(fig1), slurp(fig2));
  EXPECT_NE(slurp(fig1).find("n,estimate,stderr,log_bound_a,log_bound_b,log_ref_sqrt_factorial\n"), std::string::npos);
}

TEST(Cli, WorkerCountDoesNotChangeResults) {
  auto strip = [](std::string s) {
    auto j = nlohmann::json::parse(s);
    j.erase("manifest");
    return j.dump();
  };
  const auto a = run({"estimate-g", "--n", "17", "--samples", "20000", "--workers", "1"});
  const auto b = run({"estimate-g", "--n", "17", "--samples", "20000", "--workers", "3"});
  EXPECT_EQ(strip(a.out), strip(b.out));
}

TEST(Cli, BoundsAndOrthant) {
  const auto b = run({"bounds", "--n", "9", "--samples", "20000", "--measure-samples", "200000"});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_NE(b.out.find("n,log_c,log_bound_a"), std::string::npos);
  const auto o = run({"orthant", "--d", "3", "--samples", "200000", "--moment-samples", "20000"});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto j = nlohmann::json::parse(o.out);
  EXPECT_TRUE(j.at("moment_bound_holds").get<bool>());
  EXPECT_TRUE(j.contains("reduced_bound"));
  EXPECT_EQ(run({"orthant", "--d", "3", "--family", "odd"}).code, 2);
}
