#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "ierk/manufactured.hpp"
#include "ierk/report.hpp"

namespace {

using namespace ierk;

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

TEST(Csv, NumbersRoundTripAndBlankNonFinite) {
  EXPECT_EQ(csv_number(std::nan("")), "");
  EXPECT_EQ(csv_number(INFINITY), "");
  const double v = 0.1 + 0.2;
  EXPECT_EQ(std::stod(csv_number(v)), v);
  EXPECT_EQ(csv_number(2.0), "2");
}

TEST(Csv, TextFieldsAreQuotedWhenNeeded) {
  EXPECT_EQ(csv_text("IMEX-Euler"), "IMEX-Euler");
  EXPECT_EQ(csv_text("IERK(2,3;0.35)"), "\"IERK(2,3;0.35)\"");
  EXPECT_EQ(csv_text("a\"b"), "\"a\"\"b\"");
  std::ostringstream os;
  write_convergence_csv(os, {{"IERK(4,7;-0.8)", 0.1, 1e-3, 2e-3, 3e-3}});
  EXPECT_EQ(lines(os.str())[1].rfind("\"IERK(4,7;-0.8)\",0.10000000000000001,", 0), 0u);
}

TEST(Csv, TrajectorySchema) {
  std::vector<StepRecord> recs{{.n = 1, .t = 0.1, .tau = 0.1, .enstrophy = 2.0, .dtau_norm = 0.5},
                               {.n = 2,
                                .t = 0.3,
                                .tau = 0.2,
                                .enstrophy = 1.5,
                                .dtau_norm = 0.4,
                                .err_mix_inf = 1e-3,
                                .rejected = true}};
  std::ostringstream os;
  write_trajectory_csv(os, recs);
  const auto ls = lines(os.str());
  ASSERT_EQ(ls.size(), 3u);
  EXPECT_EQ(ls[0], "n,t,tau,enstrophy,dtau_norm,err_mix_inf,rejected");
  const auto f1 = fields(ls[1]);
  ASSERT_EQ(f1.size(), 7u);
  EXPECT_EQ(f1[5], "");
  EXPECT_EQ(f1[6], "0");
  const auto f2 = fields(ls[2]);
  EXPECT_EQ(std::stod(f2[5]), 1e-3);
  EXPECT_EQ(f2[6], "1");
}

TEST(Csv, ConvergenceRatesPerTableau) {
  std::vector<ConvergenceRow> rows{{"a", 0.1, 1e-2, 0, 0},  {"a", 0.05, 2.5e-3, 0, 0},
                                   {"a", 0.025, 6.25e-4, 0, 0}, {"b", 0.1, 1e-3, 0, 0},
                                   {"b", 0.05, 1.25e-4, 0, 0}};
  fill_observed_rates(rows);
  EXPECT_TRUE(std::isnan(rows[0].observed_rate));
  EXPECT_NEAR(rows[1].observed_rate, 2.0, 1e-12);
  EXPECT_NEAR(rows[2].observed_rate, 2.0, 1e-12);
  EXPECT_TRUE(std::isnan(rows[3].observed_rate));
  EXPECT_NEAR(rows[4].observed_rate, 3.0, 1e-12);

  std::ostringstream os;
  write_convergence_csv(os, rows);
  const auto ls = lines(os.str());
  ASSERT_EQ(ls.size(), 6u);
  EXPECT_EQ(ls[0], "tableau,tau,err_L2_omega,err_L2_u,err_L2_psi,observed_rate");
  EXPECT_EQ(fields(ls[1]).back(), "");
  EXPECT_EQ(fields(ls[4])[0], "b");
}

TEST(Csv, ReferenceCurve) {
  const ManufacturedCase c = example2(GridSpec(8));
  std::ostringstream os;
  write_reference_csv(os, c, 40.0, 5);
  const auto ls = lines(os.str());
  ASSERT_EQ(ls.size(), 6u);
  EXPECT_EQ(ls[0], "t,f,enstrophy_ref");
  for (std::size_t k = 1; k < ls.size(); ++k) {
    const auto f = fields(ls[k]);
    const double t = std::stod(f[0]);
    EXPECT_DOUBLE_EQ(t, 10.0 * (k - 1));
    EXPECT_DOUBLE_EQ(std::stod(f[1]), c.amplitude(t));
    EXPECT_DOUBLE_EQ(std::stod(f[2]), c.reference_enstrophy(t));
  }
  EXPECT_THROW(write_reference_csv(os, decay_case(GridSpec(8), 1), 1.0, 5), InvalidArgument);
  EXPECT_THROW(write_reference_csv(os, c, 1.0, 1), InvalidArgument);
}

TEST(TableauReport, JsonCarriesCoefficientsAndCertificate) {
  const auto r = analyze(ierk35(1.2));
  EXPECT_TRUE(r.ok());
  const nlohmann::json j = to_json(r);
  for (const char* key : {"name", "label", "parameter", "claimed_order", "certified_order", "c", "A",
                          "Ahat", "lambda_I", "sigma_I", "sigma_E", "positive_definite",
                          "residuals", "violations"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["certified_order"], 3);
  EXPECT_EQ(j["A"].size(), 5u);
  EXPECT_DOUBLE_EQ(j["A"][3][1].get<double>(), -367.0 / 250.0);
  EXPECT_EQ(j["residuals"].size(), 9u);
  EXPECT_DOUBLE_EQ(j["parameter"].get<double>(), 1.2);
  EXPECT_TRUE(to_json(analyze(imex_euler()))["parameter"].is_null());
}

TEST(TableauReport, OkRequiresStability) {
  const auto r = analyze(ierk23(0.05));
  EXPECT_EQ(r.certified_order, 2);
  EXPECT_FALSE(r.ok());
  std::ostringstream os;
  write_text(os, r);
  EXPECT_NE(os.str().find("certified order: 2"), std::string::npos);
  EXPECT_NE(os.str().find("positive definite: no"), std::string::npos);
}

}  // namespace
