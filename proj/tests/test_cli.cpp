#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

namespace {

struct Result {
  int code;
  std::string out;
};

// Runs arsim with the given arguments; stdout is captured, stderr discarded.
Result run(const std::string& args) {
  const std::string capture = "cli_stdout.txt";
  const std::string command = std::string(ARSIM_PATH) + " " + args + " > " + capture + " 2> /dev/null";
  const int status = std::system(command.c_str());
  std::ifstream in(capture);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, buffer.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("nonsense").code, 2);
  EXPECT_EQ(run("density --alpha 1.5").code, 2);
  EXPECT_EQ(run("density --alpha 0.5 --h 0.3").code, 2);
  EXPECT_EQ(run("moments --alpha 0.5 --order 3").code, 2);
  EXPECT_EQ(run("sample --model nosuch --n 10 --runs 2").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, DensityTable) {
  const auto r = run("density --alpha 0.5 --h 0.015625 --xmax 3 --out cli_density.tsv");
  ASSERT_EQ(r.code, 0);
  std::istringstream in(slurp("cli_density.tsv"));
  std::string line;
  bool found = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    double x = 0, g = 0;
    std::istringstream row(line);
    row >> x >> g;
    if (x == 1.0) {
      EXPECT_NEAR(g, 1.0 / 3.141592653589793, 1e-9);
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(Cli, Moments) {
  auto value = [](const std::string& args) {
    const auto r = run("moments " + args);
    EXPECT_EQ(r.code, 0) << args;
    return nlohmann::json::parse(r.out)["value"].get<double>();
  };
  EXPECT_NEAR(value("--alpha 0.5 --order 1"), 2.0, 1e-12);
  // Order 2 is the variance.
  EXPECT_NEAR(value("--alpha 0.5 --order 2"), 4.0 / 3.0, 1e-12);
  EXPECT_NEAR(value("--alpha 0.5 --p 1 --order 1"), 2.0, 1e-12);
  EXPECT_NEAR(value("--alpha 0.5 --p 0.75 --order 1"), 8.0 / 3.0, 1e-12);
  EXPECT_NEAR(value("--alpha 0.5 --p 0.75 --order 2"), 32.0 / 9.0, 1e-12);
  EXPECT_NEAR(value("--alpha 0.5 --p 0.8535533905932737 --order 1"), 8.0 - 4.0 * std::sqrt(2.0), 1e-12);
}

TEST(Cli, SimulateTspIsReproducible) {
  ASSERT_EQ(run("simulate-tsp --alpha 0.5 --t 1000 --runs 2000 --seed 5 --out cli_tsp_a.csv").code, 0);
  const auto r = run("simulate-tsp --alpha 0.5 --t 1000 --runs 2000 --seed 5 --out cli_tsp_b.csv");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(slurp("cli_tsp_a.csv"), slurp("cli_tsp_b.csv"));
  EXPECT_EQ(slurp("cli_tsp_a.csv").rfind("trial,y,i,normalized\n", 0), 0u);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["test"], "KS vs D(alpha)");
  EXPECT_LT(j["statistic"].get<double>(), 0.1);
  // Above one the comparison law is the exponential.
  const auto above = run("simulate-tsp --alpha 1.5 --t 1000 --runs 2000 --seed 5 --out cli_tsp_c.csv");
  ASSERT_EQ(above.code, 0);
  EXPECT_EQ(nlohmann::json::parse(above.out)["meta"]["scaling"], "t^alpha mu / c");
  EXPECT_LT(nlohmann::json::parse(above.out)["statistic"].get<double>(), 0.1);
}

TEST(Cli, SampleIsReproducible) {
  for (const std::string model : {"motzkin", "schroeder", "gessel", "pair"}) {
    const std::string base = "sample --model " + model + " --n 64 --runs 200 --seed 3 --out ";
    ASSERT_EQ(run(base + "cli_s_a.csv").code, 0) << model;
    const auto r = run(base + "cli_s_b.csv");
    ASSERT_EQ(r.code, 0) << model;
    EXPECT_EQ(slurp("cli_s_a.csv"), slurp("cli_s_b.csv")) << model;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_GT(j["mean_cost_over_n"].get<double>(), 1.0) << model;
  }
}

TEST(Cli, SampleOptions) {
  const auto wedge = run("sample --model wedge --theta 1.5707963267948966 --n 64 --runs 50 --out cli_w.csv --trace cli_w.txt");
  ASSERT_EQ(wedge.code, 0);
  EXPECT_FALSE(slurp("cli_w.txt").empty());
  const auto size = run("sample --model sizeproc --n 500 --runs 4000 --policy fail-on-pass --out cli_sp.csv");
  ASSERT_EQ(size.code, 0);
  EXPECT_NEAR(nlohmann::json::parse(size.out)["hit_frequency"].get<double>(), 0.75, 0.05);
}
