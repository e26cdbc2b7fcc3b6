#include "hdd/klcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "hdd/error.hpp"

namespace hdd::kl {

DiscreteDist::DiscreteDist(std::vector<double> probs) : p_(std::move(probs)) {
  if (p_.empty()) throw InvalidArgument("DiscreteDist: empty support");
  double total = 0.0;
  for (double v : p_) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("DiscreteDist: probabilities must be finite and >= 0");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("DiscreteDist: probabilities sum to " + std::to_string(total));
}

DiscreteDist DiscreteDist::normalized(std::vector<double> weights) {
  double total = 0.0;
  for (double v : weights) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("DiscreteDist: weights must be finite and >= 0");
    total += v;
  }
  if (!(total > 0.0)) throw InvalidArgument("DiscreteDist: weights sum to zero");
  for (double& v : weights) v /= total;
  return DiscreteDist(std::move(weights));
}

CoarseningMap::CoarseningMap(std::vector<std::size_t> assignment, std::size_t coarse_size)
    : a_(std::move(assignment)), coarse_(coarse_size) {
  if (a_.empty() || coarse_ == 0) throw InvalidArgument("CoarseningMap: empty map");
  std::vector<char> hit(coarse_, 0);
  for (std::size_t c : a_) {
    if (c >= coarse_) throw InvalidArgument("CoarseningMap: coarse index out of range");
    hit[c] = 1;
  }
  if (std::find(hit.begin(), hit.end(), 0) != hit.end()) throw InvalidArgument("CoarseningMap: not surjective");
}

CoarseningMap CoarseningMap::identity(std::size_t n) {
  std::vector<std::size_t> a(n);
  std::iota(a.begin(), a.end(), std::size_t{0});
  return CoarseningMap(std::move(a), n);
}

CoarseningMap CoarseningMap::all_to_one(std::size_t n) { return CoarseningMap(std::vector<std::size_t>(n, 0), 1); }

double kl(const DiscreteDist& q, const DiscreteDist& p) {
  if (q.size() != p.size()) throw InvalidArgument("kl: support sizes differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] == 0.0) continue;
    if (p[i] == 0.0) return std::numeric_limits<double>::infinity();
    acc += q[i] * std::log(q[i] / p[i]);
  }
  // Rounding can push an exact zero slightly negative.
  return std::max(acc, 0.0);
}

DiscreteDist pushforward(const DiscreteDist& d, const CoarseningMap& m) {
  if (d.size() != m.fine_size()) throw InvalidArgument("pushforward: distribution and map sizes differ");
  std::vector<double> out(m.coarse_size(), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) out[m(i)] += d[i];
  return DiscreteDist(std::move(out));
}

ChainRuleTerms chain_rule_terms(const DiscreteDist& q, const DiscreteDist& p, const CoarseningMap& m) {
  ChainRuleTerms t;
  t.fine = kl(q, p);
  if (std::isinf(t.fine)) throw InvalidArgument("chain rule: q is not absolutely continuous w.r.t. p");
  const DiscreteDist dq = pushforward(q, m), dp = pushforward(p, m);
  t.coarse = kl(dq, dp);
  std::vector<double> cond(m.coarse_size(), 0.0);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const std::size_t y = m(i);
    if (q[i] == 0.0 || dq[y] == 0.0) continue;
    const double qc = q[i] / dq[y];
    const double pc = p[i] / dp[y];
    cond[y] += qc * std::log(qc / pc);
  }
  for (std::size_t y = 0; y < cond.size(); ++y) t.conditional += dq[y] * cond[y];
  t.residual = t.fine - (t.coarse + t.conditional);
  return t;
}

double chain_rule_residual(const DiscreteDist& q, const DiscreteDist& p, const CoarseningMap& m) {
  return chain_rule_terms(q, p, m).residual;
}

TelescopingReport telescoping_check(const DiscreteDist& q0, const DiscreteDist& p0,
                                    const std::vector<CoarseningMap>& maps) {
  if (q0.size() != p0.size()) throw InvalidArgument("telescoping_check: q0 and p0 sizes differ");
  std::size_t n = q0.size();
  for (std::size_t t = 0; t < maps.size(); ++t) {
    if (maps[t].fine_size() != n)
      throw InvalidArgument("telescoping_check: map " + std::to_string(t + 1) + " expects " +
                            std::to_string(maps[t].fine_size()) + " states, previous level has " + std::to_string(n));
    n = maps[t].coarse_size();
  }
  TelescopingReport r;
  DiscreteDist q = q0, p = p0;
  r.level_kl.push_back(kl(q, p));
  for (const CoarseningMap& m : maps) {
    const ChainRuleTerms c = chain_rule_terms(q, p, m);
    r.conditional.push_back(c.conditional);
    q = pushforward(q, m);
    p = pushforward(p, m);
    r.level_kl.push_back(kl(q, p));
    r.summands.push_back(r.level_kl[r.level_kl.size() - 2] - r.level_kl.back());
  }
  r.total = std::accumulate(r.summands.begin(), r.summands.end(), 0.0);
  r.terminal = r.level_kl.back();
  const double cond_sum = std::accumulate(r.conditional.begin(), r.conditional.end(), 0.0);
  r.residual = r.level_kl.front() - (cond_sum + r.terminal);
  r.min_summand = r.summands.empty() ? 0.0 : *std::min_element(r.summands.begin(), r.summands.end());
  return r;
}

CoarseningMap random_map(rng::Stream& s, std::size_t fine_size, std::size_t coarse_size) {
  if (coarse_size == 0 || coarse_size > fine_size) throw InvalidArgument("random_map: need 1 <= coarse <= fine");
  // A random permutation guarantees surjectivity for the first coarse_size states.
  std::vector<std::size_t> perm(fine_size);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = fine_size; i > 1; --i) std::swap(perm[i - 1], perm[s.below(i)]);
  std::vector<std::size_t> a(fine_size);
  for (std::size_t k = 0; k < fine_size; ++k) a[perm[k]] = k < coarse_size ? k : s.below(coarse_size);
  return CoarseningMap(std::move(a), coarse_size);
}

Instance random_instance(rng::Stream& s, std::size_t max_support) {
  if (max_support < 1) throw InvalidArgument("random_instance: max_support must be >= 1");
  const std::size_t n = 1 + s.below(max_support);
  std::vector<double> q(n), p(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Exponential weights give a flat Dirichlet; about one in eight q entries is zeroed.
    q[i] = s.below(8) == 0 ? 0.0 : -std::log(s.uniform());
    p[i] = -std::log(s.uniform());
  }
  if (std::all_of(q.begin(), q.end(), [](double v) { return v == 0.0; })) q[s.below(n)] = 1.0;
  const std::size_t coarse = 1 + s.below(n);
  return {DiscreteDist::normalized(std::move(q)), DiscreteDist::normalized(std::move(p)), random_map(s, n, coarse)};
}

CampaignSummary run_campaign(std::size_t count, std::size_t max_support, std::uint64_t seed) {
  std::vector<double> res(count), tres(count), minsum(count);
  std::vector<char> dpi(count);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t k = 0; k < count; ++k) {
    rng::Stream s = rng::make_stream(seed, rng::Role::kCampaign, k);
    const Instance inst = random_instance(s, max_support);
    const ChainRuleTerms c = chain_rule_terms(inst.q, inst.p, inst.map);
    res[k] = std::abs(c.residual);
    dpi[k] = c.coarse > c.fine + 1e-12;
    std::vector<CoarseningMap> chain{inst.map, CoarseningMap::all_to_one(inst.map.coarse_size())};
    const TelescopingReport r = telescoping_check(inst.q, inst.p, chain);
    tres[k] = std::abs(r.residual);
    minsum[k] = r.min_summand;
  }
  CampaignSummary out;
  out.instances = count;
  for (std::size_t k = 0; k < count; ++k) {
    out.max_abs_residual = std::max(out.max_abs_residual, res[k]);
    out.max_abs_telescoping_residual = std::max(out.max_abs_telescoping_residual, tres[k]);
    out.min_summand = k == 0 ? minsum[k] : std::min(out.min_summand, minsum[k]);
    out.dpi_violations += dpi[k];
  }
  return out;
}

}  // namespace hdd::kl
