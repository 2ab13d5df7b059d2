#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "casimir_lab/casimir_lab.hpp"
#include "cli_app.hpp"

using namespace casimir_lab;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_in_process(std::vector<std::string> args) {
  args.insert(args.begin(), "casimir-lab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string write_temp(const std::string& name, const std::string& content) {
  const auto path = testing::TempDir() + name;
  std::ofstream(path) << content;
  return path;
}

}  // namespace

TEST(CliParsing, Lengths) {
  EXPECT_DOUBLE_EQ(cli::parse_length("700nm"), 700e-9);
  EXPECT_DOUBLE_EQ(cli::parse_length("3um"), 3e-6);
  EXPECT_DOUBLE_EQ(cli::parse_length("2.5"), 2.5e-6);
  EXPECT_THROW(cli::parse_length("3mm"), ConfigError);
  EXPECT_THROW(cli::parse_length("um"), ConfigError);
}

TEST(CliParsing, GridValidation) {
  EXPECT_THROW(cli::make_grid(1e-6, 2e-6, 1, false), ConfigError);
  EXPECT_THROW(cli::make_grid(2e-6, 1e-6, 5, false), ConfigError);
  const auto g = cli::make_grid(1e-6, 4e-6, 3, true);
  EXPECT_NEAR(g[1].meters(), 2e-6, 1e-18);
  EXPECT_EQ(g[2].meters(), 4e-6);
}

TEST(CliParsing, LayersOverrideInOrder) {
  cli::RunConfig c;
  cli::apply_settings(c, cli::json{{"temp", 77.0}, {"dmin", "700nm"}, {"models", "drude,plasma,gplasma"}});
  cli::apply_settings(c, cli::json{{"temp", 4.0}});
  EXPECT_EQ(c.temp_k, 4.0);
  EXPECT_DOUBLE_EQ(*c.dmin, 700e-9);
  EXPECT_EQ(c.models.size(), 3u);
  EXPECT_THROW(cli::apply_settings(c, cli::json{{"colour", 1}}), ConfigError);
  EXPECT_THROW(cli::apply_settings(c, cli::json{{"temp", "hot"}}), ConfigError);
}

TEST(CliPressure, PlasmaExceedsDrudeAndRoundTrips) {
  const auto r = run_in_process({"pressure", "--dmin", "700nm", "--dmax", "746nm", "--points", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("# tool: casimir-lab", 0), 0u);
  EXPECT_NE(r.out.find("# config_hash: fnv1a64:"), std::string::npos);
  EXPECT_NE(r.out.find("# model: drude wp=9 eV gamma=0.035 eV"), std::string::npos);
  EXPECT_NE(r.out.find("# tolerance: rel=1e-07"), std::string::npos);

  const auto table = csv::read_string(r.out, {"d_um", "P_drude_mPa", "P_plasma_mPa", "ratio"});
  ASSERT_EQ(table.rows.size(), 5u);
  const auto grid = cli::make_grid(cli::parse_length("700nm"), cli::parse_length("746nm"), 5, false);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& row = table.rows[i];
    EXPECT_LT(row[1], 0.0);
    EXPECT_GT(std::abs(row[2]), std::abs(row[1]));
    // Lossless: the printed values are exactly what the library computes.
    EXPECT_EQ(row[0], grid[i].um());
    EXPECT_EQ(row[1], casimir_pressure(presets::au_drude(), {grid[i], Temperature(300.0)}).value * 1e3);
  }
}

TEST(CliPressure, OutputIsDeterministic) {
  const std::vector<std::string> args = {"pressure", "--points", "3", "--format", "json"};
  const auto a = run_in_process(args);
  const auto b = run_in_process(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const auto j = cli::json::parse(a.out);
  EXPECT_EQ(j["columns"].size(), 4u);
  EXPECT_EQ(j["rows"].size(), 3u);
  EXPECT_TRUE(j["provenance"].contains("config_hash"));
}

TEST(CliPressure, ConfigErrors) {
  EXPECT_EQ(run_in_process({"pressure", "--points", "1"}).code, cli::exit_config);
  EXPECT_EQ(run_in_process({"pressure", "--dmin", "3um", "--dmax", "1um"}).code, cli::exit_config);
  EXPECT_EQ(run_in_process({"pressure", "--format", "xml"}).code, cli::exit_config);
  EXPECT_EQ(run_in_process({"pressure", "--bogus"}).code, cli::exit_config);
  EXPECT_EQ(run_in_process({}).code, cli::exit_config);
  EXPECT_EQ(run_in_process({"pressure", "--preset", "cu"}).code, cli::exit_config);
  EXPECT_EQ(run_in_process({"pressure", "--help"}).code, cli::exit_ok);
}

TEST(CliConfig, FileIsReadAndFlagsOverride) {
  const auto cfg = write_temp("cfg.json", R"({"temp": 77, "points": 3, "dmin": "1um", "dmax": "2um"})");
  const auto a = run_in_process({"pressure", "--config", cfg});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NE(a.out.find("# temperature_K: 77"), std::string::npos);
  const auto b = run_in_process({"pressure", "--config", cfg, "--temp", "300"});
  EXPECT_NE(b.out.find("# temperature_K: 300"), std::string::npos);
  EXPECT_EQ(run_in_process({"pressure", "--config", testing::TempDir() + "missing.json"}).code, cli::exit_config);
  const auto bad = write_temp("bad.json", R"({"temperature": 77})");
  EXPECT_EQ(run_in_process({"pressure", "--config", bad}).code, cli::exit_config);
}

TEST(CliForceCurve, NoElectrostaticsGivesCasimirOnly) {
  const auto r = run_in_process({"force-curve", "--points", "3", "--dmin", "3um", "--dmax", "5um"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t =
      csv::read_string(r.out, {"d_um", "F_C_pN", "F_patch_pN", "F_offset_pN", "F_total_pN", "F_total_d_pN_um"});
  for (const auto& row : t.rows) {
    EXPECT_EQ(row[4], row[1]);
    EXPECT_EQ(row[2], 0.0);
    EXPECT_DOUBLE_EQ(row[5], row[4] * row[0]);
  }
  EXPECT_NE(r.out.find("# geometry: perfect lens"), std::string::npos);
}

TEST(CliForceCurve, ImperfectionFileSwitchesGeometry) {
  const auto imp = write_temp("imp.csv", "r1_cm,d_offset_um\n15.6,0.2\n");
  const auto r = run_in_process({"force-curve", "--points", "2", "--imperfections", imp});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("# geometry: imperfect lens"), std::string::npos);
  EXPECT_EQ(run_in_process({"force-curve", "--imperfections", testing::TempDir() + "none.csv"}).code,
            cli::exit_config);
  const auto broken = write_temp("imp_bad.csv", "r1_cm,d_offset_um\nabc,0\n");
  EXPECT_EQ(run_in_process({"force-curve", "--points", "2", "--imperfections", broken}).code, cli::exit_data);
}

TEST(CliFit, NoiselessSyntheticData) {
  const double R = 0.156;
  const Temperature T(300.0);
  const auto model = presets::au_drude();
  std::ostringstream csv;
  csv << "d_um,f_pn,sigma_pn\n";
  for (double d_um : {1.0, 2.0, 3.0, 4.0, 5.0}) {
    const auto d = Separation::from_um(d_um);
    const auto fc = pfa_force(SphereGeometry{R, std::nullopt}, model, d, T);
    csv.precision(17);
    csv << d_um << "," << total_force_model(d, fc, 5e-3, -2e-12, R).piconewtons() << ",0.3\n";
  }
  const auto path = write_temp("synthetic.csv", csv.str());
  const auto r = run_in_process({"fit", "--data", path, "--models", "drude", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = cli::json::parse(r.out);
  const auto& row = j["rows"][0];
  EXPECT_EQ(row[0], "drude");
  EXPECT_NEAR(row[1].get<double>(), 5.0, 1e-6);
  EXPECT_NEAR(row[2].get<double>(), -2.0, 1e-6);
  EXPECT_LT(row[3].get<double>(), 1e-12);
  EXPECT_NEAR(row[6].get<double>(), 1.0, 1e-12);

  // A filter leaving fewer than three points is refused.
  const auto few = run_in_process({"fit", "--data", path, "--dmin", "4um"});
  EXPECT_EQ(few.code, cli::exit_config);
  EXPECT_NE(few.err.find("at least 3"), std::string::npos);
}

TEST(CliFit, DataErrorsAndBundledExample) {
  const auto bad = write_temp("zero_sigma.csv", "d_um,f_pn,sigma_pn\n1,2,0\n2,1,1\n3,1,1\n");
  EXPECT_EQ(run_in_process({"fit", "--data", bad}).code, cli::exit_data);
  EXPECT_EQ(run_in_process({"fit"}).code, cli::exit_config);
  if (const char* dir = std::getenv("CASIMIR_LAB_DATA")) {
    const auto r = run_in_process(
        {"fit", "--data", std::string(dir) + "/example_dataset.csv", "--attractive-magnitudes", "--points", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("# verdict:"), std::string::npos);
  }
}

TEST(CliEntropy, RejectsZeroTemperatureAndReportsRows) {
  EXPECT_EQ(run_in_process({"entropy", "--temps", "0,1,2"}).code, cli::exit_config);
  const auto r = run_in_process({"entropy", "--temps", "5,10"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("T_K,S_drude,S_drude_err,S_plasma,S_plasma_err,status"), std::string::npos);
  EXPECT_NE(r.out.find(",ok\n"), std::string::npos);
}

TEST(CliPatchWindow, FiftyMicronsInsideOverMeasuredRange) {
  const auto r = run_in_process({"patch-window", "--dmin", "0.7um", "--dmax", "7.3um", "--points", "7"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("# lambda_inside_everywhere: yes"), std::string::npos);
}

TEST(CliMasquerade, RefusesGridOutsideSearchRange) {
  EXPECT_EQ(run_in_process({"masquerade", "--dmin", "0.7um", "--dmax", "7um"}).code, cli::exit_config);
}

TEST(CliBinary, AtomicOutputAndExitCodes) {
  const char* exe = std::getenv("CASIMIR_LAB_CLI");
  if (!exe) GTEST_SKIP() << "CASIMIR_LAB_CLI not set";
  const auto out = testing::TempDir() + "binary_out.csv";
  std::remove(out.c_str());
  const std::string cmd = std::string(exe) + " pressure --points 2 --out " + out;
  ASSERT_EQ(WEXITSTATUS(std::system(cmd.c_str())), 0);
  const auto text = read_file(out);
  EXPECT_EQ(text, run_in_process({"pressure", "--points", "2"}).out);
  EXPECT_NE(text.find("d_um,P_drude_mPa"), std::string::npos);
  EXPECT_FALSE(std::ifstream(out + ".tmp").good());
  EXPECT_EQ(WEXITSTATUS(std::system((std::string(exe) + " pressure --points 1 2>/dev/null").c_str())), 2);
  EXPECT_EQ(WEXITSTATUS(std::system((std::string(exe) + " fit --data /nonexistent.csv 2>/dev/null").c_str())), 2);

  const auto cfg = write_temp("env_cfg.json", R"({"temp": 42, "points": 2})");
  const std::string env_cmd = "CASIMIR_LAB_CONFIG=" + cfg + " " + exe + " pressure";
  FILE* p = popen(env_cmd.c_str(), "r");
  ASSERT_NE(p, nullptr);
  std::string got;
  char buf[512];
  while (std::fgets(buf, sizeof buf, p)) got += buf;
  EXPECT_EQ(WEXITSTATUS(pclose(p)), 0);
  EXPECT_NE(got.find("# temperature_K: 42"), std::string::npos);
}
