#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gwcusum/errors.hpp"
#include "gwcusum/experiments.hpp"
#include "gwcusum/io.hpp"
#include "test_support.hpp"

using namespace gwcusum;
using io::Json;

TEST(LawJson, Literals) {
  EXPECT_EQ(io::law_from_json(Json::parse(R"({"kind":"bernoulli","p":0.5})")), Law::bernoulli(0.5));
  EXPECT_EQ(io::law_from_json(Json::parse(R"({"kind":"poisson","lambda":1.0})")), Law::poisson(1.0));
  EXPECT_EQ(io::law_from_json(Json::parse(R"({"kind":"degenerate","value":1})")), Law::degenerate(1));
  EXPECT_EQ(io::law_from_json(Json::parse(R"({"kind":"pmf","probs":[0.25,0.75]})")), Law::finite_pmf({0.25, 0.75}));
  for (const Law& law : {Law::bernoulli(0.3), Law::poisson(2.5), Law::degenerate(4), Law::finite_pmf({0.5, 0.5})}) {
    EXPECT_EQ(io::law_from_json(io::law_to_json(law)), law);
  }
}

TEST(LawJson, Errors) {
  EXPECT_THROW((void)io::law_from_json(Json::parse(R"({"kind":"gamma","shape":1})")), InvalidParameter);
  EXPECT_THROW((void)io::law_from_json(Json::parse(R"({"kind":"poisson"})")), InvalidParameter);
  EXPECT_THROW((void)io::law_from_json(Json::parse(R"({"kind":"bernoulli","p":2})")), InvalidParameter);
}

TEST(ModelJson, RoundTrip) {
  const ModelSpec spec = two_type_model(0.2);
  EXPECT_EQ(io::model_from_json(io::model_to_json(spec)), spec);
  const auto j = Json::parse(R"({"p":2,
    "offspring":[[{"kind":"bernoulli","p":0.5},{"kind":"bernoulli","p":0.2}],
                 [{"kind":"bernoulli","p":0.2},{"kind":"bernoulli","p":0.5}]],
    "innovation":[{"kind":"poisson","lambda":1.0},{"kind":"poisson","lambda":1.0}]})");
  EXPECT_EQ(io::model_from_json(j), spec);
  EXPECT_THROW((void)io::model_from_json(Json::parse(R"({"p":2,"offspring":[],"innovation":[]})")), InvalidParameter);
}

TEST(GinarJson, Parse) {
  const auto j = Json::parse(R"({"order":2,"zeta":[{"kind":"bernoulli","p":0.5},{"kind":"poisson","lambda":0.2}],
                                "eta":{"kind":"poisson","lambda":1.0},"init":[3,1]})");
  const GinarSpec g = io::ginar_from_json(j);
  EXPECT_EQ(g.order(), 2u);
  EXPECT_EQ(g.init, (std::vector<std::int64_t>{3, 1}));
  EXPECT_EQ(io::ginar_from_json(io::ginar_to_json(g)).zeta, g.zeta);
  auto bad = j;
  bad["order"] = 3;
  EXPECT_THROW((void)io::ginar_from_json(bad), InvalidParameter);
}

TEST(TrajectoryCsv, RoundTripWithSidecar) {
  Rng rng(3);
  Trajectory t = simulate_with_change(two_type_model(0.0), two_type_model(0.4), 20, 5, 40, CountVector::Zero(2), rng);
  t.seed = 3;
  const auto prefix = (std::filesystem::temp_directory_path() / "gwcusum_io_traj").string();
  io::save_trajectory(t, prefix, io::model_to_json(two_type_model(0.0)));
  const Trajectory back = io::load_trajectory(prefix + ".csv");
  EXPECT_EQ(back.observations, t.observations);
  EXPECT_EQ(back.p, 2u);
  EXPECT_EQ(back.training_length, t.training_length);
  EXPECT_EQ(back.change_index, t.change_index);
  EXPECT_EQ(back.seed, t.seed);
  std::ifstream csv(prefix + ".csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "n,x1,x2");
  const Json meta = io::read_json_file(prefix + ".json");
  EXPECT_EQ(meta.at("spec").at("p"), 2);
  std::filesystem::remove(prefix + ".csv");
  std::filesystem::remove(prefix + ".json");
}

TEST(TrajectoryCsv, HeaderlessAndErrors) {
  std::istringstream plain("1,2\n3,4\n\n5,6\n");
  const Trajectory t = io::read_trajectory_csv(plain);
  ASSERT_EQ(t.observations.size(), 3u);
  EXPECT_EQ(t[2](1), 6);
  std::istringstream ragged("n,x1,x2\n0,1,2\n1,3\n");
  EXPECT_THROW((void)io::read_trajectory_csv(ragged), IoError);
  std::istringstream negative("1\n-2\n");
  EXPECT_THROW((void)io::read_trajectory_csv(negative), IoError);
  std::istringstream junk("1\nfoo\n");
  EXPECT_THROW((void)io::read_trajectory_csv(junk), IoError);
  std::istringstream empty("n,x1\n");
  EXPECT_THROW((void)io::read_trajectory_csv(empty), IoError);
  EXPECT_THROW((void)io::load_trajectory("/nonexistent/file.csv"), IoError);
}

TEST(EstimateJson, LabelsAndValues) {
  const Trajectory t = testsupport::path_1d({1, 2, 3});
  const EstimateSet est = cls_estimate(t, 2);
  const Json j = io::estimates_to_json(est);
  EXPECT_EQ(j.at("flavor"), "cls");
  EXPECT_EQ(j.at("mu_hat").at("col_labels"), (std::vector<std::string>{"x1", "innovation"}));
  EXPECT_NEAR(j.at("mu_hat").at("data")[0][0].get<double>(), 1.0, 1e-12);
  EXPECT_EQ(j.at("J_hat").at("rows"), 2);
  EXPECT_EQ(j.at("J_hat").at("row_labels"), (std::vector<std::string>{"M1", "N1"}));
}

TEST(ResidualCsv, Layout) {
  Rng rng(4);
  const Trajectory t = simulate(two_type_model(0.2), CountVector::Zero(2), 50, rng);
  const EstimateSet est = reduce(cls_estimate(t, 50), {1});
  const std::string csv = io::residuals_csv(residuals(t, 1, 3, est));
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "n,M2,N2");
  std::getline(is, line);
  EXPECT_EQ(line.substr(0, 2), "1,");
  int rows = 1;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 3);
}
