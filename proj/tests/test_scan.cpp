#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <map>
#include <sstream>

using namespace ressf;

namespace {

std::string data(const char* name) { return std::string(RESSF_TEST_DATA) + "/" + name; }

std::size_t column(const Table& t, const std::string& name) {
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    if (t.columns[i] == name) return i;
  throw std::out_of_range(name);
}

template <typename T>
T cell(const Table& t, std::size_t row, const std::string& name) {
  return std::get<T>(t.rows.at(row).at(column(t, name)));
}

std::string render(const Table& t, const ScanConfig& c) {
  std::ostringstream os;
  write_table(os, t, c);
  return os.str();
}

ScanConfig index_config() {
  ScanConfig c;
  c.command = "index";
  c.model_path = data("scalar.json");
  c.lambda_min = 0.1;
  c.lambda_max = 0.9;
  c.lambda_count = 5;
  c.interval = std::make_pair(-2.0, 2.0);
  return c;
}

}  // namespace

TEST(RunIndex, ScalarGrid) {
  const ScanConfig c = index_config();
  const Table t = run_scan(c);
  ASSERT_EQ(t.rows.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    const double lambda = cell<double>(t, i, "lambda");
    EXPECT_NEAR(lambda, 0.1 + 0.2 * i, 1e-15);
    EXPECT_NEAR(std::stod(cell<std::string>(t, i, "resonance_points")), lambda, 1e-14);
    EXPECT_EQ(cell<std::string>(t, i, "index"), "1");
    EXPECT_EQ(cell<std::string>(t, i, "status"), "ok");
  }
}

TEST(RunIndex, OutOfRangeLambdaGivesEmptyRow) {
  ScanConfig c = index_config();
  c.lambda_min = c.lambda_max = 10.0;
  c.lambda_count = 1;
  const Table t = run_scan(c);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(cell<std::string>(t, 0, "resonance_points"), "");
  EXPECT_EQ(cell<std::string>(t, 0, "status"), "ok");
}

TEST(RunIndex, MalformedModelRejected) {
  ScanConfig c = index_config();
  c.model_path = data("malformed.json");
  EXPECT_THROW(run_scan(c), Error);
}

TEST(RunIndex, OutputIndependentOfWorkerCount) {
  ScanConfig c = index_config();
  c.lambda_count = 9;
  const std::string serial = render(run_scan(c), c);
  c.workers = 3;
  EXPECT_EQ(render(run_scan(c), c), serial);
}

TEST(RunSsf, DiagonalModel) {
  ScanConfig c;
  c.command = "ssf";
  c.model_path = data("diag2.json");
  const Table t = run_scan(c);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_NEAR(cell<double>(t, 0, "xi"), 1.0, 1e-7);
  EXPECT_NEAR(cell<double>(t, 0, "xi_a"), 0.0, 1e-10);
  EXPECT_NEAR(cell<double>(t, 0, "xi_s"), 1.0, 1e-7);
  EXPECT_EQ(cell<std::string>(t, 0, "jumps"), "1");
}

TEST(RunSsf, NudgesResonantEndpoint) {
  ScanConfig c;
  c.command = "ssf";
  c.model_path = data("diag2.json");
  c.interval = std::make_pair(1.0, 2.0);
  const Table t = run_scan(c);
  EXPECT_EQ(cell<std::string>(t, 0, "nudged"), "a");
  EXPECT_LT(cell<double>(t, 0, "a_used"), 1.0);
  EXPECT_EQ(cell<std::string>(t, 0, "status"), "ok");
}

TEST(RunSsf, LargeCouplingColumnsAndDeterminism) {
  ScanConfig c;
  c.command = "ssf";
  c.model_path = data("scalar.json");
  c.large_coupling = true;
  const Table t = run_scan(c);
  EXPECT_NEAR(cell<double>(t, 0, "lc_xi"), 1.0, 1e-6);
  EXPECT_EQ(cell<long long>(t, 0, "lc_signature"), 1);
  EXPECT_EQ(render(t, c), render(run_scan(c), c));
}

TEST(RunCantor, DepthFourSummary) {
  ScanConfig c;
  c.command = "cantor";
  c.depth = 4;
  c.samples = 100;
  const Table t = run_scan(c);
  EXPECT_EQ(t.rows.size(), 100u);
  std::map<std::string, Cell> s(t.summary.begin(), t.summary.end());
  EXPECT_EQ(std::get<double>(s["index_plus_fraction"]), 1.0);
  EXPECT_NEAR(std::get<double>(s["positive_r0_fraction"]), 0.5, 0.1);
  EXPECT_NE(render(t, c).find("# summary samples=100 valid_samples=100 index_plus_fraction=1 "), std::string::npos);
}

TEST(RunCantor, ZeroPvRowFlagged) {
  ScanConfig c;
  c.command = "cantor";
  c.depth = 1;
  c.nodes = 8;
  c.lambda_min = c.lambda_max = 0.0;
  const Table t = run_scan(c);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(cell<std::string>(t, 0, "status"), "flagged");
  EXPECT_EQ(cell<std::string>(t, 0, "error"), "infinite-resonance");
  EXPECT_FALSE(t.failed);
}

TEST(RunSelftest, SeededCasesPassAndRepeat) {
  ScanConfig c;
  c.command = "selftest";
  c.samples = 5;
  const Table t = run_scan(c);
  EXPECT_FALSE(t.failed);
  EXPECT_EQ(render(t, c), render(run_scan(c), c));
  c.seed = 7;
  EXPECT_NE(render(run_scan(c), c), render(t, c));
}

TEST(ScanConfig, ValidationErrors) {
  ScanConfig c = index_config();
  c.lambda_count = 0;
  EXPECT_THROW(c.validate(), Error);
  c = index_config();
  c.interval = std::make_pair(1.0, 0.0);
  EXPECT_THROW(c.validate(), Error);
  c = index_config();
  c.y0 = -1.0;
  EXPECT_THROW(c.validate(), Error);
  c = index_config();
  c.format = "xml";
  EXPECT_THROW(c.validate(), Error);
}

TEST(ConfigHash, IgnoresWorkersAndOutput) {
  ScanConfig c = index_config();
  const std::string h = config_hash(c);
  c.workers = 4;
  c.out = "elsewhere.csv";
  EXPECT_EQ(config_hash(c), h);
  c.seed = 43;
  EXPECT_NE(config_hash(c), h);
}

TEST(Csv, HeaderAndQuoting) {
  ScanConfig c = index_config();
  c.lambda_count = 1;
  const std::string out = render(run_scan(c), c);
  EXPECT_EQ(out.rfind("# ressf 0.1.0 csv-v1 command=index config=", 0), 0u);
  EXPECT_EQ(detail::csv_cell(std::string("a,b")), "\"a,b\"");
  EXPECT_EQ(detail::csv_cell(std::string("say \"x\"")), "\"say \"\"x\"\"\"");
  EXPECT_EQ(detail::csv_cell(Cell()), "");
}

TEST(Json, RowsKeyedByColumn) {
  ScanConfig c = index_config();
  c.format = "json";
  const auto doc = nlohmann::json::parse(render(run_scan(c), c));
  EXPECT_EQ(doc["command"], "index");
  ASSERT_EQ(doc["rows"].size(), 5u);
  EXPECT_EQ(doc["rows"][2]["index"], "1");
}

TEST(ParallelMap, PreservesOrderAndPropagatesErrors) {
  const auto out = parallel_map<int>(50, 4, [](std::size_t i) { return static_cast<int>(i * i); });
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i * i));
  EXPECT_THROW(parallel_map<int>(10, 3,
                                 [](std::size_t i) -> int {
                                   if (i == 7) throw Error(ErrorCode::InvalidInput, "boom");
                                   return 0;
                                 }),
               Error);
}

TEST(DefaultWorkers, ReadsEnvironment) {
  ::setenv("RESSF_WORKERS", "3", 1);
  EXPECT_EQ(default_workers(), 3);
  ::setenv("RESSF_WORKERS", "zero", 1);
  EXPECT_EQ(default_workers(), 1);
  ::unsetenv("RESSF_WORKERS");
  EXPECT_EQ(default_workers(), 1);
}
