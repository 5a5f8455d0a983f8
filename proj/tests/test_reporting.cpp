#include "nlsbif/reporting.hpp"

#include <gtest/gtest.h>

#include <sstream>
#include <string>

using namespace nlsbif;

namespace {

RunConfig small_config(Command c) {
  RunConfig cfg;
  cfg.command = c;
  cfg.L = 30.0;
  cfg.N = 1201;
  cfg.n_modes = 64;
  return cfg;
}

nlohmann::json without_timestamp(nlohmann::json j) {
  j.erase("timestamp");
  return j;
}

}  // namespace

TEST(RunConfig, Validation) {
  RunConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.N = 15;
  EXPECT_THROW(cfg.validate(), UsageError);
  cfg = RunConfig{};
  cfg.L = 0.0;
  EXPECT_THROW(cfg.validate(), UsageError);
  cfg = RunConfig{};
  cfg.n_modes = 7;
  EXPECT_THROW(cfg.validate(), UsageError);
  cfg = RunConfig{};
  cfg.command = Command::scan;
  cfg.p_list = {3.0};
  EXPECT_THROW(cfg.validate(), UsageError);
  cfg.p_list.clear();
  EXPECT_EQ(cfg.scan_powers().size(), 6u);
  cfg.command = Command::residual;
  cfg.eps_list = {0.0};
  EXPECT_THROW(cfg.validate(), UsageError);
  cfg.eps_list.clear();
  EXPECT_EQ(cfg.residual_eps(), default_residual_eps());
}

TEST(Verify, DefaultConfigPasses) {
  const VerificationReport rep = cmd_verify(RunConfig{});
  for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.name << " computed " << c.computed;
  EXPECT_TRUE(rep.pass());
  const nlohmann::json j = to_json(rep);
  EXPECT_EQ(j.at("schema_version"), 1);
  EXPECT_EQ(j.at("checks").at("A_00").at("expected"), "0");
  EXPECT_EQ(j.at("checks").at("A_11").at("expected"), -32.0);
  EXPECT_EQ(j.at("environment").at("grid").at("N"), 2001);
}

TEST(Verify, UnderResolvedGridFailsByName) {
  RunConfig cfg;
  cfg.N = 16;
  std::ostringstream out;
  const CommandOutcome o = run_verify(cfg, out);
  EXPECT_EQ(o.exit_code, kExitCheckFailure);
  const VerificationReport rep = report_from_json(nlohmann::json::parse(out.str()));
  EXPECT_FALSE(rep.pass());
  EXPECT_FALSE(rep.failures().empty());
  EXPECT_NE(o.diagnostic.find(rep.failures().front()), std::string::npos);
}

TEST(Verify, ReportRoundTrip) {
  const VerificationReport rep = cmd_verify(small_config(Command::verify));
  const std::string text = to_json(rep).dump(2);
  const VerificationReport back = report_from_json(nlohmann::json::parse(text));
  EXPECT_EQ(to_json(back).dump(2), text);
}

TEST(Verify, DeterministicModuloTimestamp) {
  RunConfig cfg = small_config(Command::verify);
  cfg.seed = 99;
  std::ostringstream a, b;
  run_verify(cfg, a);
  run_verify(cfg, b);
  EXPECT_EQ(without_timestamp(nlohmann::json::parse(a.str())).dump(),
            without_timestamp(nlohmann::json::parse(b.str())).dump());
}

TEST(Alpha2, JsonFieldsAndRange) {
  std::ostringstream out;
  const CommandOutcome o = run_alpha2(RunConfig{.command = Command::alpha2}, out);
  EXPECT_EQ(o.exit_code, kExitSuccess) << o.diagnostic;
  const nlohmann::json j = nlohmann::json::parse(out.str());
  const nlohmann::json& r = j.at("result");
  for (const char* key : {"w0", "w1", "w2", "alpha2", "numerator_terms", "denominator_terms", "A", "identity_residual", "c2"}) {
    EXPECT_TRUE(r.contains(key)) << key;
  }
  EXPECT_EQ(r.size(), 9u);
  const double a2 = r.at("alpha2").get<double>();
  EXPECT_GE(a2, 0.31);
  EXPECT_LE(a2, 0.323);
  EXPECT_NEAR(j.at("numerator_sum").get<double>(), 2.53, 0.005);
  EXPECT_NEAR(j.at("denominator_sum").get<double>(), 8.0, 1e-6);
  EXPECT_NEAR(j.at("crosscheck").at("single_integral").get<double>(), -2.9369, 3e-3);
  EXPECT_EQ(r.at("w0").at("first").size(), 2001u);
}

TEST(Residual, SingleEpsHasNoSlope) {
  RunConfig cfg = small_config(Command::residual);
  cfg.eps_list = {0.3};
  cfg.output_format = OutputFormat::csv;
  std::ostringstream out;
  const CommandOutcome o = run_residual(cfg, out);
  EXPECT_EQ(o.exit_code, kExitSuccess);
  std::istringstream in(out.str());
  std::string header, row, extra;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header.rfind("eps,residual", 0), 0u);
  EXPECT_EQ(row.rfind("0.29999999999999999,", 0), 0u);
  EXPECT_FALSE(std::getline(in, extra));
}

TEST(Residual, SkipsEpsBelowFloor) {
  RunConfig cfg = small_config(Command::residual);
  cfg.eps_list = {0.3, 0.01};
  std::ostringstream out;
  run_residual(cfg, out);
  const nlohmann::json j = nlohmann::json::parse(out.str());
  EXPECT_EQ(j.at("rows").size(), 1u);
  EXPECT_EQ(j.at("notes").size(), 1u);
}

TEST(Scan, CsvHeaderAndFooter) {
  RunConfig cfg;
  cfg.command = Command::scan;
  cfg.p_list = {3.8};
  cfg.output_format = OutputFormat::csv;
  std::ostringstream out;
  const CommandOutcome o = run_scan(cfg, out);
  EXPECT_EQ(o.exit_code, kExitSuccess);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "p,eps,z,alpha,ratio");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("3.7999999999999998,0.79999999999999982,", 0), 0u);
  std::getline(in, line);
  EXPECT_EQ(line.rfind("# fitted_exponent=", 0), 0u);
  std::getline(in, line);
  EXPECT_EQ(line.rfind("# fitted_alpha2=", 0), 0u);
}

TEST(Scan, NoValidRowsIsFailure) {
  RunConfig cfg;
  cfg.command = Command::scan;
  cfg.p_list = {3.05};
  cfg.scan_fixed_length = 15.0;
  std::ostringstream out;
  const CommandOutcome o = run_scan(cfg, out);
  EXPECT_NE(o.exit_code, kExitSuccess);
  const nlohmann::json j = nlohmann::json::parse(out.str());
  EXPECT_TRUE(j.at("rows").empty());
  EXPECT_EQ(j.at("failures").size(), 1u);
}

TEST(Report, PlotTable) {
  RunConfig cfg = small_config(Command::report);
  cfg.output_format = OutputFormat::csv;
  std::ostringstream out;
  EXPECT_EQ(run_report(cfg, out).exit_code, kExitSuccess);
  std::istringstream in(out.str());
  std::string line;
  int count = 0;
  std::getline(in, line);
  EXPECT_EQ(line, "x,Q2,w0_1,w0_2,w1_1,w1_2,w2_1,w2_2");
  while (std::getline(in, line)) ++count;
  EXPECT_EQ(count, cfg.N);
}

TEST(Fit, LogLogSlope) {
  EXPECT_NEAR(loglog_slope({0.1, 0.2, 0.4}, {1e-3, 8e-3, 6.4e-2}), 3.0, 1e-12);
  EXPECT_TRUE(std::isnan(loglog_slope({0.1}, {1.0})));
}
