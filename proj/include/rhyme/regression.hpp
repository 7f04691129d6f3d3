#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rhyme/evaluation.hpp"
#include "rhyme/execution.hpp"

namespace rhyme {

// agreement ~ Bernoulli(logit^-1(alpha_c + beta_phon * phon + beta_line * line)),
// alpha_c ~ Normal(mu_alpha, sigma_alpha).
struct LogitModelConfig {
  double prior_beta_sd = 2.5;
  double prior_mu_alpha_sd = 5.0;
  double prior_sigma_alpha_scale = 2.0;  // half-normal
  std::size_t chains = 4;
  std::size_t draws = 5000;  // iterations per chain, warmup included
  std::size_t warmup = 1000;
  double hdi_mass = 0.94;
  std::uint64_t seed = 0;
};

void validate(const LogitModelConfig& config);

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double hdi_low = 0.0;
  double hdi_high = 0.0;
  double rhat = 0.0;
  double ess = 0.0;
};

struct PosteriorSummary {
  // beta_phon, beta_line, alpha_<corpus> (sorted by corpus), mu_alpha, sigma_alpha
  std::vector<ParameterSummary> parameters;
  std::vector<std::string> corpora;
  std::size_t rows = 0;
  std::size_t kept_per_chain = 0;
  std::vector<double> acceptance;  // mean Metropolis acceptance per chain after warmup
  std::vector<std::string> warnings;

  const ParameterSummary& at(const std::string& name) const;
  bool converged(double rhat_max = 1.05) const;
};

// Componentwise adaptive random-walk Metropolis; one RNG stream per chain
// from derive_seed(seed, chain). Chains run in parallel.
PosteriorSummary fit_hierarchical_logit(const std::vector<AgreementRow>& rows,
                                        const LogitModelConfig& config,
                                        Execution exec = Execution::parallel);

// Narrowest window holding ceil(mass * n) sorted samples; ties go to the
// smallest lower endpoint.
std::pair<double, double> hdi(std::span<const double> samples, double mass);

// Split-chain potential scale reduction.
double split_rhat(const std::vector<std::vector<double>>& chains);

// Multi-chain effective sample size with Geyer's initial positive sequence.
double effective_sample_size(const std::vector<std::vector<double>>& chains);

// parameter,mean,sd,hdi_low,hdi_high,rhat,ess
void write_summary_csv(std::ostream& out, const PosteriorSummary& summary);
nlohmann::json summary_metadata(const PosteriorSummary& summary, const LogitModelConfig& config);

}  // namespace rhyme
