#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hdd/rng.hpp"

namespace hdd::kl {

class DiscreteDist {
 public:
  // Entries >= 0 summing to 1 within 1e-12.
  explicit DiscreteDist(std::vector<double> probs);
  // Rescales non-negative weights to sum to one.
  static DiscreteDist normalized(std::vector<double> weights);

  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::size_t i) const noexcept { return p_[i]; }
  const std::vector<double>& probs() const noexcept { return p_; }

 private:
  std::vector<double> p_;
};

// Deterministic surjection from fine states onto {0..coarse_size-1}.
class CoarseningMap {
 public:
  CoarseningMap(std::vector<std::size_t> assignment, std::size_t coarse_size);
  static CoarseningMap identity(std::size_t n);
  static CoarseningMap all_to_one(std::size_t n);

  std::size_t fine_size() const noexcept { return a_.size(); }
  std::size_t coarse_size() const noexcept { return coarse_; }
  std::size_t operator()(std::size_t i) const noexcept { return a_[i]; }

 private:
  std::vector<std::size_t> a_;
  std::size_t coarse_;
};

// Natural-log KL with 0 ln 0 = 0; +inf when q is not absolutely continuous w.r.t. p.
double kl(const DiscreteDist& q, const DiscreteDist& p);
DiscreteDist pushforward(const DiscreteDist& d, const CoarseningMap& m);

struct ChainRuleTerms {
  double fine = 0.0;         // KL(q || p)
  double coarse = 0.0;       // KL(Dq || Dp)
  double conditional = 0.0;  // E_{y ~ Dq} KL(q|y || p|y)
  double residual = 0.0;     // fine - (coarse + conditional)
};
// Throws InvalidArgument when absolute continuity fails.
ChainRuleTerms chain_rule_terms(const DiscreteDist& q, const DiscreteDist& p, const CoarseningMap& m);
double chain_rule_residual(const DiscreteDist& q, const DiscreteDist& p, const CoarseningMap& m);

struct TelescopingReport {
  std::vector<double> level_kl;     // KL at level 0 (fine) .. T (coarsest)
  std::vector<double> summands;     // level_kl[t-1] - level_kl[t], t = 1..T
  std::vector<double> conditional;  // independently computed conditional KL per level
  double total = 0.0;               // sum of summands
  double terminal = 0.0;            // level_kl[T]; zero when the chain ends in one state
  double residual = 0.0;            // KL(q0||p0) - (sum conditional + terminal)
  double min_summand = 0.0;
};
TelescopingReport telescoping_check(const DiscreteDist& q0, const DiscreteDist& p0,
                                    const std::vector<CoarseningMap>& maps);

struct Instance {
  DiscreteDist q, p;
  CoarseningMap map;
};
// Random (q, p, map) with support in [1, max_support]; q may contain zeros, p is strictly positive.
Instance random_instance(rng::Stream& s, std::size_t max_support);
CoarseningMap random_map(rng::Stream& s, std::size_t fine_size, std::size_t coarse_size);

struct CampaignSummary {
  std::size_t instances = 0;
  double max_abs_residual = 0.0;
  double max_abs_telescoping_residual = 0.0;
  double min_summand = 0.0;
  std::size_t dpi_violations = 0;  // coarse KL exceeding fine KL beyond 1e-12
};
// Each instance also gets a random two-level chain ending in a single state.
CampaignSummary run_campaign(std::size_t count, std::size_t max_support, std::uint64_t seed);

}  // namespace hdd::kl
