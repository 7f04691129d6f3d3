#include "rhyme/regression.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>

#include "rhyme/error.hpp"

namespace rhyme {
namespace {

constexpr std::size_t kMinRows = 50;
constexpr std::size_t kAdaptBatch = 50;
constexpr double kTargetAcceptance = 0.44;

// Rows grouped by corpus with centered predictors.
struct Design {
  std::vector<std::string> corpora;
  std::vector<std::size_t> begin;  // begin[c]..begin[c+1] are the rows of corpus c
  std::vector<double> y;
  std::vector<double> phon;
  std::vector<double> line;
  double phon_mean = 0.0;
  double line_mean = 0.0;
};

Design make_design(const std::vector<AgreementRow>& rows) {
  if (rows.size() < kMinRows) {
    throw InsufficientDataError("regression needs at least " + std::to_string(kMinRows) +
                                " rows, got " + std::to_string(rows.size()));
  }
  std::map<std::string, std::vector<const AgreementRow*>> by_corpus;
  for (const auto& r : rows) by_corpus[r.corpus].push_back(&r);
  if (by_corpus.size() < 2) {
    throw InsufficientDataError("regression needs rows from at least 2 corpora");
  }
  Design d;
  for (const auto& r : rows) {
    d.phon_mean += r.phon_distance;
    d.line_mean += static_cast<double>(r.line_distance);
  }
  d.phon_mean /= static_cast<double>(rows.size());
  d.line_mean /= static_cast<double>(rows.size());
  double phon_ss = 0.0;
  double line_ss = 0.0;
  std::size_t agreed = 0;
  for (const auto& [corpus, group] : by_corpus) {
    d.corpora.push_back(corpus);
    d.begin.push_back(d.y.size());
    for (const auto* r : group) {
      d.y.push_back(r->agreement ? 1.0 : 0.0);
      d.phon.push_back(r->phon_distance - d.phon_mean);
      d.line.push_back(static_cast<double>(r->line_distance) - d.line_mean);
      phon_ss += d.phon.back() * d.phon.back();
      line_ss += d.line.back() * d.line.back();
      agreed += r->agreement;
    }
  }
  d.begin.push_back(d.y.size());
  if (agreed == 0 || agreed == rows.size()) {
    throw DegenerateDesignError("every row has the same agreement value; the likelihood is "
                                "unbounded");
  }
  if (phon_ss == 0.0) throw DegenerateDesignError("phon_distance is constant");
  if (line_ss == 0.0) throw DegenerateDesignError("line_distance is constant");
  return d;
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double corpus_loglik(const Design& d, std::size_t c, double a, double bp, double bl) {
  double ll = 0.0;
  for (std::size_t i = d.begin[c]; i < d.begin[c + 1]; ++i) {
    const double eta = a + bp * d.phon[i] + bl * d.line[i];
    ll += d.y[i] * eta - softplus(eta);
  }
  return ll;
}

// Parameter vector layout (sampler space): beta_phon, beta_line, mu_alpha,
// log sigma_alpha, then one intercept per corpus on the centered predictors.
constexpr std::size_t kBp = 0;
constexpr std::size_t kBl = 1;
constexpr std::size_t kMu = 2;
constexpr std::size_t kLogSigma = 3;
constexpr std::size_t kFirstAlpha = 4;

struct ChainOutput {
  std::vector<std::vector<double>> draws;  // per output parameter
  double acceptance = 0.0;
};

class Sampler {
 public:
  Sampler(const Design& d, const LogitModelConfig& c) : d_(d), c_(c) {}

  ChainOutput run(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const std::size_t n_corpora = d_.corpora.size();
    const std::size_t k_params = kFirstAlpha + n_corpora;

    std::vector<double> theta(k_params);
    std::vector<double> scale(k_params);
    init(theta, scale, rng, normal);

    std::vector<double> ll(n_corpora);
    for (std::size_t c = 0; c < n_corpora; ++c) {
      ll[c] = corpus_loglik(d_, c, theta[kFirstAlpha + c], theta[kBp], theta[kBl]);
    }
    double lp = log_prior(theta);

    const std::size_t kept = c_.draws - c_.warmup;
    ChainOutput out;
    out.draws.assign(k_params, {});
    for (auto& v : out.draws) v.reserve(kept);
    std::vector<std::size_t> batch_accepts(k_params, 0);
    std::size_t batch_index = 0;
    std::size_t accepted_after_warmup = 0;
    std::vector<double> ll_new(n_corpora);

    for (std::size_t it = 0; it < c_.draws; ++it) {
      for (std::size_t k = 0; k < k_params; ++k) {
        const double old = theta[k];
        theta[k] = old + scale[k] * normal(rng);
        const double lp_new = log_prior(theta);
        double delta = lp_new - lp;
        if (k == kBp || k == kBl) {
          for (std::size_t c = 0; c < n_corpora; ++c) {
            ll_new[c] = corpus_loglik(d_, c, theta[kFirstAlpha + c], theta[kBp], theta[kBl]);
            delta += ll_new[c] - ll[c];
          }
        } else if (k >= kFirstAlpha) {
          const std::size_t c = k - kFirstAlpha;
          ll_new[c] = corpus_loglik(d_, c, theta[k], theta[kBp], theta[kBl]);
          delta += ll_new[c] - ll[c];
        }
        if (std::log(uniform(rng)) < delta) {
          lp = lp_new;
          if (k == kBp || k == kBl) {
            ll = ll_new;
          } else if (k >= kFirstAlpha) {
            ll[k - kFirstAlpha] = ll_new[k - kFirstAlpha];
          }
          ++batch_accepts[k];
          if (it >= c_.warmup) ++accepted_after_warmup;
        } else {
          theta[k] = old;
        }
      }
      if (it < c_.warmup && (it + 1) % kAdaptBatch == 0) {
        ++batch_index;
        const double step = std::min(0.5, 1.0 / std::sqrt(static_cast<double>(batch_index)));
        for (std::size_t k = 0; k < k_params; ++k) {
          const double rate = static_cast<double>(batch_accepts[k]) / kAdaptBatch;
          scale[k] *= std::exp(rate > kTargetAcceptance ? step : -step);
          batch_accepts[k] = 0;
        }
      }
      if (it >= c_.warmup) record(theta, out.draws);
    }
    out.acceptance = kept == 0 ? 0.0
                               : static_cast<double>(accepted_after_warmup) /
                                     static_cast<double>(kept * k_params);
    return out;
  }

 private:
  double log_prior(const std::vector<double>& t) const {
    const double sb = c_.prior_beta_sd;
    const double sm = c_.prior_mu_alpha_sd;
    const double ss = c_.prior_sigma_alpha_scale;
    const double sigma = std::exp(t[kLogSigma]);
    double lp = -0.5 * (t[kBp] * t[kBp] + t[kBl] * t[kBl]) / (sb * sb);
    lp += -0.5 * t[kMu] * t[kMu] / (sm * sm);
    lp += -0.5 * sigma * sigma / (ss * ss) + t[kLogSigma];  // half-normal + log Jacobian
    const double shift = t[kBp] * d_.phon_mean + t[kBl] * d_.line_mean;
    for (std::size_t c = 0; c < d_.corpora.size(); ++c) {
      const double z = (t[kFirstAlpha + c] - shift - t[kMu]) / sigma;
      lp += -0.5 * z * z - t[kLogSigma];
    }
    return lp;
  }

  void init(std::vector<double>& theta, std::vector<double>& scale, std::mt19937_64& rng,
            std::normal_distribution<double>& normal) const {
    const std::size_t n = d_.y.size();
    double p_bar = 0.0;
    for (double y : d_.y) p_bar += y;
    p_bar /= static_cast<double>(n);
    const double w = std::max(p_bar * (1.0 - p_bar), 0.01);
    double phon_ss = 0.0;
    double line_ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      phon_ss += d_.phon[i] * d_.phon[i];
      line_ss += d_.line[i] * d_.line[i];
    }
    theta[kBp] = 0.5 * normal(rng);
    theta[kBl] = 0.5 * normal(rng);
    scale[kBp] = 2.4 / std::sqrt(w * phon_ss);
    scale[kBl] = 2.4 / std::sqrt(w * line_ss);
    double alpha_sum = 0.0;
    const double shift = theta[kBp] * d_.phon_mean + theta[kBl] * d_.line_mean;
    for (std::size_t c = 0; c < d_.corpora.size(); ++c) {
      const std::size_t n_c = d_.begin[c + 1] - d_.begin[c];
      double y_c = 0.0;
      for (std::size_t i = d_.begin[c]; i < d_.begin[c + 1]; ++i) y_c += d_.y[i];
      const double p = std::clamp(y_c / static_cast<double>(n_c), 0.02, 0.98);
      theta[kFirstAlpha + c] = std::log(p / (1.0 - p)) + 0.5 * normal(rng);
      scale[kFirstAlpha + c] = 2.4 / std::sqrt(w * static_cast<double>(n_c));
      alpha_sum += theta[kFirstAlpha + c] - shift;
    }
    theta[kMu] = alpha_sum / static_cast<double>(d_.corpora.size()) + 0.5 * normal(rng);
    theta[kLogSigma] = std::log(0.5) + 0.5 * normal(rng);
    scale[kMu] = 0.5;
    scale[kLogSigma] = 0.5;
  }

  // Sampler space -> reported parameters (uncentered intercepts, sigma).
  void record(const std::vector<double>& t, std::vector<std::vector<double>>& draws) const {
    const std::size_t n_corpora = d_.corpora.size();
    const double shift = t[kBp] * d_.phon_mean + t[kBl] * d_.line_mean;
    draws[0].push_back(t[kBp]);
    draws[1].push_back(t[kBl]);
    for (std::size_t c = 0; c < n_corpora; ++c) draws[2 + c].push_back(t[kFirstAlpha + c] - shift);
    draws[2 + n_corpora].push_back(t[kMu]);
    draws[3 + n_corpora].push_back(std::exp(t[kLogSigma]));
  }

  const Design& d_;
  const LogitModelConfig& c_;
};

}  // namespace

void validate(const LogitModelConfig& c) {
  if (!(c.prior_beta_sd > 0) || !(c.prior_mu_alpha_sd > 0) || !(c.prior_sigma_alpha_scale > 0)) {
    throw ValidationError("prior scales must be positive");
  }
  if (c.chains < 1) throw ValidationError("chains must be >= 1");
  if (!(c.draws > c.warmup)) throw ValidationError("draws must exceed warmup");
  if (c.draws - c.warmup < 4) throw ValidationError("need at least 4 post-warmup draws");
  if (!(c.hdi_mass > 0.0 && c.hdi_mass < 1.0)) throw ValidationError("hdi_mass must lie in (0, 1)");
}

const ParameterSummary& PosteriorSummary::at(const std::string& name) const {
  for (const auto& p : parameters)
    if (p.name == name) return p;
  throw ValidationError("no parameter named " + name);
}

bool PosteriorSummary::converged(double rhat_max) const {
  return std::all_of(parameters.begin(), parameters.end(),
                     [&](const auto& p) { return p.rhat <= rhat_max; });
}

std::pair<double, double> hdi(std::span<const double> samples, double mass) {
  if (samples.empty()) throw ValidationError("hdi of an empty sample");
  if (!(mass > 0.0 && mass < 1.0)) throw ValidationError("hdi mass must lie in (0, 1)");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  // The epsilon keeps e.g. 0.94 * 100 from rounding up to 95.
  auto k = static_cast<std::size_t>(std::ceil(mass * static_cast<double>(n) - 1e-9));
  k = std::clamp<std::size_t>(k, 1, n);
  std::size_t best = 0;
  double best_width = sorted[k - 1] - sorted[0];
  for (std::size_t i = 1; i + k <= n; ++i) {
    const double width = sorted[i + k - 1] - sorted[i];
    if (width < best_width) {
      best_width = width;
      best = i;
    }
  }
  return {sorted[best], sorted[best + k - 1]};
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
  std::vector<std::span<const double>> halves;
  for (const auto& c : chains) {
    const std::size_t h = c.size() / 2;
    if (h < 2) throw ValidationError("split R-hat needs at least 4 draws per chain");
    halves.emplace_back(c.data(), h);
    halves.emplace_back(c.data() + c.size() - h, h);
  }
  const std::size_t h = std::min_element(halves.begin(), halves.end(), [](auto a, auto b) {
                          return a.size() < b.size();
                        })->size();
  const double m = static_cast<double>(halves.size());
  std::vector<double> means;
  double w = 0.0;
  for (auto half : halves) {
    half = half.first(h);
    const double mean = std::accumulate(half.begin(), half.end(), 0.0) / static_cast<double>(h);
    double ss = 0.0;
    for (double x : half) ss += (x - mean) * (x - mean);
    w += ss / static_cast<double>(h - 1);
    means.push_back(mean);
  }
  w /= m;
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
  double b_over_n = 0.0;
  for (double mu : means) b_over_n += (mu - grand) * (mu - grand);
  b_over_n /= (m - 1.0);
  const double var_plus = (static_cast<double>(h) - 1.0) / static_cast<double>(h) * w + b_over_n;
  if (w == 0.0) return var_plus == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(var_plus / w);
}

double effective_sample_size(const std::vector<std::vector<double>>& chains) {
  if (chains.empty()) throw ValidationError("no chains");
  const std::size_t n = std::min_element(chains.begin(), chains.end(), [](auto& a, auto& b) {
                          return a.size() < b.size();
                        })->size();
  if (n < 4) throw ValidationError("ESS needs at least 4 draws per chain");
  const double m = static_cast<double>(chains.size());
  const double nd = static_cast<double>(n);
  std::vector<double> means;
  for (const auto& c : chains) means.push_back(std::accumulate(c.begin(), c.begin() + n, 0.0) / nd);

  auto mean_autocov = [&](std::size_t lag) {
    double total = 0.0;
    for (std::size_t j = 0; j < chains.size(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i + lag < n; ++i) {
        s += (chains[j][i] - means[j]) * (chains[j][i + lag] - means[j]);
      }
      total += s / nd;
    }
    return total / m;
  };

  const double acov0 = mean_autocov(0);
  const double w = acov0 * nd / (nd - 1.0);
  double b_over_n = 0.0;
  if (chains.size() > 1) {
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
    for (double mu : means) b_over_n += (mu - grand) * (mu - grand);
    b_over_n /= (m - 1.0);
  }
  const double var_plus = (nd - 1.0) / nd * w + b_over_n;
  if (var_plus == 0.0) return m * nd;
  auto rho = [&](std::size_t lag) { return 1.0 - (w - mean_autocov(lag)) / var_plus; };

  double sum = 0.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t + 1 < n; t += 2) {
    double pair = rho(t) + rho(t + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    sum += pair;
    prev_pair = pair;
  }
  const double tau = std::max(-1.0 + 2.0 * sum, 1.0 / std::log10(m * nd));
  return m * nd / tau;
}

PosteriorSummary fit_hierarchical_logit(const std::vector<AgreementRow>& rows,
                                        const LogitModelConfig& config, Execution exec) {
  validate(config);
  const Design design = make_design(rows);
  const Sampler sampler(design, config);

  std::vector<ChainOutput> chains(config.chains);
  const auto n_chains = static_cast<std::ptrdiff_t>(config.chains);
  if (exec == Execution::serial) {
    for (std::ptrdiff_t c = 0; c < n_chains; ++c) {
      chains[c] = sampler.run(derive_seed(config.seed, static_cast<std::uint64_t>(c)));
    }
  } else {
#pragma omp parallel for schedule(static, 1)
    for (std::ptrdiff_t c = 0; c < n_chains; ++c) {
      chains[c] = sampler.run(derive_seed(config.seed, static_cast<std::uint64_t>(c)));
    }
  }

  PosteriorSummary summary;
  summary.corpora = design.corpora;
  summary.rows = rows.size();
  summary.kept_per_chain = config.draws - config.warmup;
  std::vector<std::string> names{"beta_phon", "beta_line"};
  for (const auto& c : design.corpora) names.push_back("alpha_" + c);
  names.emplace_back("mu_alpha");
  names.emplace_back("sigma_alpha");

  for (const auto& ch : chains) summary.acceptance.push_back(ch.acceptance);
  for (std::size_t k = 0; k < names.size(); ++k) {
    std::vector<std::vector<double>> per_chain;
    std::vector<double> pooled;
    for (const auto& ch : chains) {
      per_chain.push_back(ch.draws[k]);
      pooled.insert(pooled.end(), ch.draws[k].begin(), ch.draws[k].end());
    }
    ParameterSummary p;
    p.name = names[k];
    const double n = static_cast<double>(pooled.size());
    p.mean = std::accumulate(pooled.begin(), pooled.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : pooled) ss += (x - p.mean) * (x - p.mean);
    p.sd = std::sqrt(ss / (n - 1.0));
    std::tie(p.hdi_low, p.hdi_high) = hdi(pooled, config.hdi_mass);
    p.rhat = split_rhat(per_chain);
    p.ess = effective_sample_size(per_chain);
    if (!(p.rhat <= 1.05)) {
      summary.warnings.push_back(fmt::format("{} has R-hat {:.3f} > 1.05; chains have not mixed",
                                             p.name, p.rhat));
      spdlog::warn("{}", summary.warnings.back());
    }
    summary.parameters.push_back(std::move(p));
  }
  return summary;
}

void write_summary_csv(std::ostream& out, const PosteriorSummary& s) {
  out << "parameter,mean,sd,hdi_low,hdi_high,rhat,ess\n";
  for (const auto& p : s.parameters) {
    out << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.4f},{:.1f}\n", p.name, p.mean, p.sd,
                       p.hdi_low, p.hdi_high, p.rhat, p.ess);
  }
}

nlohmann::json summary_metadata(const PosteriorSummary& s, const LogitModelConfig& c) {
  return {{"rows", s.rows},
          {"corpora", s.corpora},
          {"predictors", "raw line_distance (lines apart) and raw phon_distance; not standardized"},
          {"chains", c.chains},
          {"draws", c.draws},
          {"warmup", c.warmup},
          {"kept_per_chain", s.kept_per_chain},
          {"hdi_mass", c.hdi_mass},
          {"seed", c.seed},
          {"priors",
           {{"beta_sd", c.prior_beta_sd},
            {"mu_alpha_sd", c.prior_mu_alpha_sd},
            {"sigma_alpha_half_normal_scale", c.prior_sigma_alpha_scale}}},
          {"acceptance", s.acceptance},
          {"warnings", s.warnings}};
}

}  // namespace rhyme
