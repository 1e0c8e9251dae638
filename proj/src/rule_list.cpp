#include "cascade/rule_list.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "cascade/errors.hpp"
#include "cascade/random.hpp"

namespace cascade {

namespace {

constexpr std::uint64_t kMineGuard = 10000000;          // max usable antecedents
constexpr std::uint64_t kInclExclGuard = 1u << 20;      // max subset terms per leaf
constexpr std::uint64_t kEnumGuard = 1ull << 22;        // max domain points to scan
constexpr std::uint64_t kTruncationApprox = 10000;      // |A| above which the
                                                        // Poisson normalizer ~ e^lambda

// ln sum_{j=0}^{cap} lambda^j / j!  (the truncated-Poisson normalizer).
double log_truncated_poisson_norm(double lambda, std::uint64_t cap) {
  double sum = 1.0, term = 1.0;
  for (std::uint64_t j = 1; j <= cap; ++j) {
    term *= lambda / static_cast<double>(j);
    sum += term;
    if (j > lambda && term < sum * 1e-18) break;
  }
  return std::log(sum);
}

}  // namespace

AntecedentUniverse::AntecedentUniverse(std::vector<Antecedent> items, std::size_t max_cardinality,
                                       std::uint64_t count_including_empty)
    : items_(std::move(items)),
      max_cardinality_(max_cardinality),
      count_including_empty_(count_including_empty) {
  std::sort(items_.begin(), items_.end());
  count_by_size_.assign(max_cardinality_ + 1, 0);
  for (const auto& a : items_) ++count_by_size_[a.cardinality()];
}

std::size_t AntecedentUniverse::index_of(const Antecedent& a) const {
  const auto it = std::lower_bound(items_.begin(), items_.end(), a);
  if (it == items_.end() || !(*it == a))
    throw DataError("antecedent is not in the mined universe");
  return static_cast<std::size_t>(it - items_.begin());
}

std::uint64_t antecedent_count(const Schema& schema, std::size_t max_cardinality) {
  if (max_cardinality > schema.feature_count())
    throw DataError("antecedent cardinality cap exceeds the feature count");
  // Elementary symmetric polynomials of the feature cardinalities.
  std::vector<std::uint64_t> e(max_cardinality + 1, 0);
  e[0] = 1;
  for (std::size_t f = 0; f < schema.feature_count(); ++f) {
    const std::uint64_t q = schema.cardinality(f);
    for (std::size_t j = std::min(max_cardinality, f + 1); j >= 1; --j) {
      std::uint64_t prod = 0;
      if (__builtin_mul_overflow(e[j - 1], q, &prod) ||
          __builtin_add_overflow(e[j], prod, &e[j]))
        throw GuardError("antecedent_count: overflow");
    }
  }
  std::uint64_t total = 0;
  for (const std::uint64_t c : e)
    if (__builtin_add_overflow(total, c, &total))
      throw GuardError("antecedent_count: overflow");
  return total;
}

AntecedentUniverse mine_antecedents(const SchemaPtr& schema, std::size_t max_cardinality,
                                    std::optional<std::uint64_t> min_support,
                                    const Dataset* data) {
  const std::uint64_t count = antecedent_count(*schema, max_cardinality);
  if (count - 1 > kMineGuard)
    throw GuardError("mine_antecedents: universe would hold " + std::to_string(count - 1) +
                     " antecedents (cap " + std::to_string(kMineGuard) + ")");
  if (min_support && !data)
    throw DataError("mine_antecedents: min_support requires a dataset");

  std::vector<Antecedent> items;
  Antecedent scratch;
  const std::size_t p = schema->feature_count();
  // Depth-first over feature subsets in increasing feature order.
  auto rec = [&](auto&& self, std::size_t next_feature) -> void {
    if (!scratch.conditions.empty()) items.push_back(scratch);
    if (scratch.conditions.size() == max_cardinality) return;
    for (std::size_t f = next_feature; f < p; ++f) {
      for (std::uint32_t v = 0; v < schema->cardinality(f); ++v) {
        scratch.conditions.emplace_back(static_cast<std::uint32_t>(f), v);
        self(self, f + 1);
        scratch.conditions.pop_back();
      }
    }
  };
  rec(rec, 0);

  if (min_support) {
    std::erase_if(items, [&](const Antecedent& a) {
      std::uint64_t support = 0;
      for (const auto& row : data->rows())
        if (a.matches(row)) ++support;
      return support < *min_support;
    });
  }
  return AntecedentUniverse(std::move(items), max_cardinality, count);
}

std::size_t assign_rule(const RuleList& list, const Point& x) {
  for (std::size_t i = 0; i < list.rules.size(); ++i)
    if (list.rules[i].matches(x)) return i;
  return list.rules.size();
}

std::uint64_t conjunction_volume(const Schema& schema,
                                 const std::vector<const Antecedent*>& conj) {
  std::vector<std::int64_t> pinned(schema.feature_count(), -1);
  for (const Antecedent* a : conj) {
    for (const auto& [f, v] : a->conditions) {
      if (pinned[f] >= 0 && pinned[f] != static_cast<std::int64_t>(v)) return 0;
      pinned[f] = v;
    }
  }
  std::uint64_t vol = 1;
  for (std::size_t f = 0; f < schema.feature_count(); ++f)
    if (pinned[f] < 0) vol *= schema.cardinality(f);
  return vol;
}

namespace {

using ConjKey = std::vector<std::pair<std::uint32_t, std::uint32_t>>;
using ConjMemo = std::map<ConjKey, std::uint64_t>;

std::uint64_t memo_conjunction_volume(const Schema& schema,
                                      const std::vector<const Antecedent*>& conj,
                                      ConjMemo& memo) {
  ConjKey key;
  for (const Antecedent* a : conj)
    key.insert(key.end(), a->conditions.begin(), a->conditions.end());
  std::sort(key.begin(), key.end());
  key.erase(std::unique(key.begin(), key.end()), key.end());
  const auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  const std::uint64_t vol = conjunction_volume(schema, conj);
  memo.emplace(std::move(key), vol);
  return vol;
}

std::uint64_t leaf_volume_incl_excl(const RuleList& list, std::size_t leaf, ConjMemo& memo) {
  const std::size_t m = list.rules.size();
  if (leaf > m) throw InternalError("list_leaf_volume: leaf index out of range");
  if (leaf == m) {
    // Default leaf: whatever no rule claims.
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < m; ++i) sum += leaf_volume_incl_excl(list, i, memo);
    return list.schema->domain_size() - sum;
  }
  if (leaf >= 64 || (1ull << leaf) > kInclExclGuard)
    throw GuardError("list_leaf_volume: inclusion-exclusion subset expansion too large");

  // V_i = sum over subsets S of earlier rules of (-1)^|S| vol(a_i and S).
  __int128 total = 0;
  std::vector<const Antecedent*> conj;
  const std::uint64_t nmasks = 1ull << leaf;
  for (std::uint64_t mask = 0; mask < nmasks; ++mask) {
    conj.clear();
    conj.push_back(&list.rules[leaf]);
    int bits = 0;
    for (std::size_t k = 0; k < leaf; ++k)
      if ((mask >> k) & 1) {
        conj.push_back(&list.rules[k]);
        ++bits;
      }
    const std::uint64_t vol = memo_conjunction_volume(*list.schema, conj, memo);
    total += (bits % 2 == 0) ? static_cast<__int128>(vol) : -static_cast<__int128>(vol);
  }
  if (total < 0) throw InternalError("list_leaf_volume: negative volume");
  return static_cast<std::uint64_t>(total);
}

}  // namespace

std::uint64_t list_leaf_volume(const RuleList& list, std::size_t leaf) {
  ConjMemo memo;
  return leaf_volume_incl_excl(list, leaf, memo);
}

std::vector<std::uint64_t> list_volumes(const RuleList& list) {
  ConjMemo memo;
  const std::size_t m = list.rules.size();
  std::vector<std::uint64_t> vols(m + 1, 0);
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < m; ++i) {
    vols[i] = leaf_volume_incl_excl(list, i, memo);
    sum += vols[i];
  }
  vols[m] = list.schema->domain_size() - sum;
  return vols;
}

std::vector<std::uint64_t> volumes_by_enumeration(const RuleList& list) {
  if (list.schema->domain_size() > kEnumGuard)
    throw GuardError("volumes_by_enumeration: domain too large to scan");
  std::vector<std::uint64_t> vols(list.rules.size() + 1, 0);
  for (DomainIterator it(*list.schema); !it.done(); ++it) ++vols[assign_rule(list, *it)];
  return vols;
}

ListStats list_stats(const RuleList& list, const Dataset& data) {
  ListStats out;
  out.n = data.size();
  out.counts.assign(list.rules.size() + 1, 0);
  for (const auto& row : data.rows()) ++out.counts[assign_rule(list, row)];
  try {
    out.volumes = list_volumes(list);
  } catch (const GuardError&) {
    out.volumes = volumes_by_enumeration(list);
  }
  return out;
}

void validate(const ListModelHyper& h) {
  if (!(h.lambda > 0.0)) throw DataError("list model: lambda must be > 0");
  if (!(h.eta > 0.0)) throw DataError("list model: eta must be > 0");
  if (!(h.alpha >= 1.0)) throw DataError("list model: alpha must be >= 1");
}

double log_posterior_list(const RuleList& list, const ListStats& stats,
                          const ListModelHyper& hyper, const AntecedentUniverse& universe) {
  validate(hyper);
  const std::size_t m = list.rules.size();
  if (stats.counts.size() != m + 1 || stats.volumes.size() != m + 1)
    throw InternalError("log_posterior_list: stats do not match the list");
  for (std::size_t l = 0; l <= m; ++l)
    if (stats.volumes[l] == 0 && stats.counts[l] > 0)
      throw InternalError("log_posterior_list: points placed in a zero-volume leaf");

  // List length: Poisson truncated at |A|, or its untruncated approximation
  // when the universe is huge.
  const std::uint64_t a_total = universe.count_including_empty();
  double lp = static_cast<double>(m) * std::log(hyper.lambda) -
              std::lgamma(static_cast<double>(m) + 1.0);
  if (a_total <= kTruncationApprox)
    lp -= log_truncated_poisson_norm(hyper.lambda, a_total);

  // Cardinality and antecedent choice, sequentially without replacement.
  std::vector<std::size_t> remaining(universe.max_cardinality() + 1);
  for (std::size_t c = 0; c <= universe.max_cardinality(); ++c)
    remaining[c] = universe.count_of_size(c);
  std::vector<bool> used(universe.size(), false);
  for (const auto& rule : list.rules) {
    const std::size_t idx = universe.index_of(rule);
    if (used[idx]) throw DataError("log_posterior_list: duplicate rule");
    used[idx] = true;
    const std::size_t c = rule.cardinality();
    if (c < 1 || remaining[c] == 0)
      throw InternalError("log_posterior_list: cardinality bookkeeping broke");
    double denom = 0.0;
    for (std::size_t k = 1; k <= universe.max_cardinality(); ++k)
      if (remaining[k] > 0)
        denom += std::exp(static_cast<double>(k) * std::log(hyper.eta) -
                          std::lgamma(static_cast<double>(k) + 1.0));
    lp += static_cast<double>(c) * std::log(hyper.eta) -
          std::lgamma(static_cast<double>(c) + 1.0) - std::log(denom);
    lp -= std::log(static_cast<double>(remaining[c]));
    --remaining[c];
  }

  // Dirichlet-multinomial over the m+1 leaves.
  const double a = hyper.alpha;
  const auto k = static_cast<double>(m + 1);
  if (hyper.dirichlet_normalizer) lp += std::lgamma(k * a) - k * std::lgamma(a);
  for (std::size_t l = 0; l <= m; ++l)
    lp += std::lgamma(static_cast<double>(stats.counts[l]) + a);
  lp -= std::lgamma(static_cast<double>(stats.n) + k * a);
  for (std::size_t l = 0; l <= m; ++l)
    if (stats.counts[l] > 0)
      lp -= static_cast<double>(stats.counts[l]) *
            std::log(static_cast<double>(stats.volumes[l]));
  return lp;
}

double gelman_rubin(const std::vector<std::vector<double>>& traces) {
  if (traces.size() < 2) throw DataError("gelman_rubin: needs at least 2 traces");
  const std::size_t len = traces[0].size();
  for (const auto& t : traces)
    if (t.size() != len) throw DataError("gelman_rubin: traces must have equal length");
  if (len < 10) throw DataError("gelman_rubin: traces must have length >= 10");

  const std::size_t start = len / 2;
  const std::size_t n = len - start;
  const auto mchains = static_cast<double>(traces.size());

  std::vector<double> means;
  std::vector<double> vars;
  for (const auto& t : traces) {
    double mean = 0.0;
    for (std::size_t i = start; i < len; ++i) mean += t[i];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = start; i < len; ++i) var += (t[i] - mean) * (t[i] - mean);
    var /= static_cast<double>(n - 1);
    means.push_back(mean);
    vars.push_back(var);
  }
  double grand = 0.0;
  for (double mu : means) grand += mu;
  grand /= mchains;
  double between = 0.0;  // B/n
  for (double mu : means) between += (mu - grand) * (mu - grand);
  between /= (mchains - 1.0);
  double within = 0.0;
  for (double v : vars) within += v;
  within /= mchains;

  if (within == 0.0 && between == 0.0) return 1.0;
  if (within == 0.0) return std::numeric_limits<double>::infinity();
  const double nd = static_cast<double>(n);
  const double var_plus = (nd - 1.0) / nd * within + between;
  return std::sqrt(var_plus / within);
}

namespace {

struct ChainState {
  RuleList list;
  ListStats stats;
  double score;
  RuleList best_list;
  ListStats best_stats;
  double best_score;
  Rng rng;
  std::vector<double> trace;
};

void chain_step(ChainState& chain, const Dataset& data, const AntecedentUniverse& universe,
                const ListModelHyper& hyper) {
  const std::size_t m = chain.list.rules.size();
  const std::size_t unused = universe.size() - m;
  const double u = chain.rng.unit();

  RuleList proposal = chain.list;
  double log_proposal_ratio = 0.0;  // ln q(reverse)/q(forward)
  bool moved = false;

  if (u < 0.4) {
    // Add a uniformly chosen unused antecedent at a uniform position.
    if (unused > 0) {
      std::size_t pick;
      do {
        pick = chain.rng.below(universe.size());
      } while (std::find(chain.list.rules.begin(), chain.list.rules.end(),
                         universe.items()[pick]) != chain.list.rules.end());
      const std::size_t pos = chain.rng.below(m + 1);
      proposal.rules.insert(proposal.rules.begin() + static_cast<std::ptrdiff_t>(pos),
                            universe.items()[pick]);
      log_proposal_ratio = std::log(static_cast<double>(unused));
      moved = true;
    }
  } else if (u < 0.8) {
    // Remove a uniformly chosen rule.
    if (m > 0) {
      const std::size_t pos = chain.rng.below(m);
      proposal.rules.erase(proposal.rules.begin() + static_cast<std::ptrdiff_t>(pos));
      log_proposal_ratio = -std::log(static_cast<double>(unused + 1));
      moved = true;
    }
  } else {
    // Swap two uniformly chosen positions.
    if (m >= 2) {
      const std::size_t i = chain.rng.below(m);
      std::size_t j = chain.rng.below(m - 1);
      if (j >= i) ++j;
      std::swap(proposal.rules[i], proposal.rules[j]);
      moved = true;
    }
  }

  if (moved) {
    ListStats proposal_stats = list_stats(proposal, data);
    const double proposal_score = log_posterior_list(proposal, proposal_stats, hyper, universe);
    const double log_accept = proposal_score - chain.score + log_proposal_ratio;
    if (log_accept >= 0.0 || chain.rng.unit() < std::exp(log_accept)) {
      chain.list = std::move(proposal);
      chain.stats = std::move(proposal_stats);
      chain.score = proposal_score;
      if (chain.score > chain.best_score) {
        chain.best_list = chain.list;
        chain.best_stats = chain.stats;
        chain.best_score = chain.score;
      }
    }
  }
  chain.trace.push_back(chain.score);
}

}  // namespace

ListFit mcmc_search(const Dataset& data, const AntecedentUniverse& universe,
                    const ListModelHyper& hyper, unsigned chains, std::uint64_t budget,
                    std::uint64_t seed) {
  validate(hyper);
  if (chains < 2) throw DataError("mcmc_search: the convergence diagnostic needs >= 2 chains");
  if (universe.size() == 0) throw DataError("mcmc_search: empty antecedent universe");
  if (budget == 0) throw DataError("mcmc_search: budget must be positive");

  std::vector<ChainState> states;
  for (unsigned c = 0; c < chains; ++c) {
    RuleList empty{data.schema_ptr(), {}};
    ListStats st = list_stats(empty, data);
    const double sc = log_posterior_list(empty, st, hyper, universe);
    states.push_back(ChainState{empty, st, sc, empty, st, sc,
                                Rng(derive_seed(seed, "chain-" + std::to_string(c))),
                                {}});
    states.back().trace.reserve(budget);
  }

  const std::uint64_t check_interval = std::max<std::uint64_t>(budget / 20, 100);
  const std::uint64_t min_iterations = std::max<std::uint64_t>(budget / 5, 200);

  std::uint64_t done = 0;
  double rhat = std::numeric_limits<double>::infinity();
  while (done < budget) {
    const std::uint64_t batch = std::min(check_interval, budget - done);
    // Chains are independent; run the batch concurrently.
    std::vector<std::thread> workers;
    workers.reserve(states.size());
    for (auto& chain : states)
      workers.emplace_back([&chain, &data, &universe, &hyper, batch]() {
        for (std::uint64_t i = 0; i < batch; ++i) chain_step(chain, data, universe, hyper);
      });
    for (auto& w : workers) w.join();
    done += batch;

    std::vector<std::vector<double>> traces;
    for (const auto& chain : states) traces.push_back(chain.trace);
    rhat = gelman_rubin(traces);
    if (done >= min_iterations && rhat < 1.05) break;
  }

  // Deterministic reduction: best score, ties to the lowest chain index.
  std::size_t winner = 0;
  for (std::size_t c = 1; c < states.size(); ++c)
    if (states[c].best_score > states[winner].best_score) winner = c;

  // Fully shadowed rules carry no mass; drop them from the report.
  RuleList best = states[winner].best_list;
  ListStats best_stats = states[winner].best_stats;
  {
    RuleList pruned{best.schema, {}};
    for (std::size_t i = 0; i < best.rules.size(); ++i)
      if (best_stats.volumes[i] > 0) pruned.rules.push_back(best.rules[i]);
    if (pruned.rules.size() != best.rules.size()) {
      best_stats = list_stats(pruned, data);
      best = std::move(pruned);
    }
  }
  const double best_score = log_posterior_list(best, best_stats, hyper, universe);

  std::vector<std::vector<double>> traces;
  for (auto& chain : states) traces.push_back(std::move(chain.trace));
  return ListFit{std::move(best), std::move(best_stats), best_score, std::move(traces), rhat};
}

}  // namespace cascade
