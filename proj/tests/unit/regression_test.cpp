#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "rhyme/error.hpp"
#include "rhyme/regression.hpp"
#include "synthetic.hpp"

using namespace rhyme;

namespace {

std::vector<std::vector<double>> iid_chains(std::size_t m, std::size_t n, std::uint64_t seed,
                                            double shift = 0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0, 1);
  std::vector<std::vector<double>> out(m, std::vector<double>(n));
  for (std::size_t c = 0; c < m; ++c) {
    for (auto& x : out[c]) x = z(rng) + shift * static_cast<double>(c);
  }
  return out;
}

LogitModelConfig quick() {
  LogitModelConfig c;
  c.chains = 2;
  c.draws = 1500;
  c.warmup = 500;
  c.seed = 3;
  return c;
}

}  // namespace

TEST(Hdi, Basics) {
  const std::vector<double> v = {5, 1, 2, 3, 4, 100};
  EXPECT_EQ(hdi(v, 0.5), (std::pair<double, double>{1, 3}));
  EXPECT_EQ(hdi(v, 0.99), (std::pair<double, double>{1, 100}));
  EXPECT_THROW(hdi(v, 1.0), ValidationError);
  const std::vector<double> ties = {0, 0, 1, 1};
  EXPECT_EQ(hdi(ties, 0.5), (std::pair<double, double>{0, 0}));
  EXPECT_THROW(hdi(std::vector<double>{}, 0.9), ValidationError);
  EXPECT_THROW(hdi(v, 0.0), ValidationError);
}

TEST(Diagnostics, RhatAndEss) {
  const auto good = iid_chains(4, 2000, 1);
  EXPECT_NEAR(split_rhat(good), 1.0, 0.01);
  const double ess = effective_sample_size(good);
  EXPECT_GT(ess, 6000);
  EXPECT_LT(ess, 10000);
  EXPECT_GT(split_rhat(iid_chains(4, 2000, 2, 1.0)), 1.1);

  // AR(1) with rho 0.9: ESS ~ N (1 - rho) / (1 + rho)
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z(0, 1);
  std::vector<std::vector<double>> ar(4, std::vector<double>(5000));
  for (auto& chain : ar) {
    double x = z(rng) / std::sqrt(1 - 0.81);
    for (auto& v : chain) v = x = 0.9 * x + z(rng);
  }
  const double expected = 20000 * 0.1 / 1.9;
  EXPECT_NEAR(effective_sample_size(ar), expected, 0.25 * expected);
}

TEST(Fit, RecoversCoefficients) {
  const auto truth = synth::default_regression_truth(5);
  const auto rows = synth::generate_agreement_rows(truth, 3000, 6);
  const auto post = fit_hierarchical_logit(rows, quick());
  EXPECT_NEAR(post.at("beta_phon").mean, truth.beta_phon, 0.2);
  EXPECT_NEAR(post.at("beta_line").mean, truth.beta_line, 0.2);
  EXPECT_EQ(post.corpora.size(), 7u);
  EXPECT_EQ(post.parameters.size(), 2u + 7u + 2u);
  EXPECT_EQ(post.kept_per_chain, 1000u);
  EXPECT_EQ(post.parameters[2].name, "alpha_c0");
  EXPECT_EQ(post.parameters.back().name, "sigma_alpha");
  EXPECT_GT(post.at("sigma_alpha").mean, 0);
  for (double a : post.acceptance) {
    EXPECT_GT(a, 0.2);
    EXPECT_LT(a, 0.7);
  }
  EXPECT_THROW(post.at("nope"), ValidationError);
}

TEST(Fit, SerialMatchesParallel) {
  const auto rows = synth::generate_agreement_rows(synth::default_regression_truth(1), 600, 2);
  auto cfg = quick();
  cfg.draws = 400;
  cfg.warmup = 100;
  std::ostringstream a, b;
  write_summary_csv(a, fit_hierarchical_logit(rows, cfg, Execution::serial));
  write_summary_csv(b, fit_hierarchical_logit(rows, cfg, Execution::parallel));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "parameter,mean,sd,hdi_low,hdi_high,rhat,ess");
}

TEST(Fit, InputErrors) {
  auto rows = synth::generate_agreement_rows(synth::default_regression_truth(1), 600, 2);
  EXPECT_THROW(fit_hierarchical_logit({rows.begin(), rows.begin() + 40}, quick()),
               InsufficientDataError);
  auto one_corpus = rows;
  for (auto& r : one_corpus) r.corpus = "x";
  EXPECT_THROW(fit_hierarchical_logit(one_corpus, quick()), InsufficientDataError);
  auto all_agree = rows;
  for (auto& r : all_agree) r.agreement = true;
  EXPECT_THROW(fit_hierarchical_logit(all_agree, quick()), DegenerateDesignError);
  auto flat = rows;
  for (auto& r : flat) r.line_distance = 2;
  EXPECT_THROW(fit_hierarchical_logit(flat, quick()), DegenerateDesignError);
}

TEST(Fit, ConfigValidation) {
  auto c = quick();
  c.warmup = c.draws;
  EXPECT_THROW(validate(c), ValidationError);
  c = quick();
  c.hdi_mass = 1.5;
  EXPECT_THROW(validate(c), ValidationError);
  c = quick();
  c.chains = 0;
  EXPECT_THROW(validate(c), ValidationError);
}

TEST(Fit, Metadata) {
  const auto rows = synth::generate_agreement_rows(synth::default_regression_truth(1), 600, 2);
  auto cfg = quick();
  cfg.draws = 300;
  cfg.warmup = 100;
  const auto post = fit_hierarchical_logit(rows, cfg);
  const auto meta = summary_metadata(post, cfg);
  EXPECT_EQ(meta["rows"], 600);
  EXPECT_EQ(meta["chains"], 2);
  EXPECT_TRUE(meta.contains("acceptance"));
}
