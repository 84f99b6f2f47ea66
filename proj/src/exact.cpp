#include "furst/exact_products.hpp"

#include <cmath>
#include <optional>
#include <unordered_map>
#include <utility>

#include "furst/errors.hpp"

namespace furst {
namespace {

// Level frontier in first-insertion order. The order makes every downstream
// choice (witness words, collision pairs, minimum-separation ties)
// deterministic across platforms; an unordered_map alone would not.
struct Frontier {
  std::vector<ProductAtom> entries;
  std::unordered_map<Mat2Q, std::size_t, Mat2QHash> index;

  void insert(Mat2Q m, const BigInt& count, const Rational& weight,
              std::vector<int> word) {
    auto [it, fresh] = index.try_emplace(m, entries.size());
    if (fresh) {
      entries.push_back({std::move(m), count, weight, std::move(word)});
    } else {
      ProductAtom& hit = entries[it->second];
      hit.count += count;
      hit.weight += weight;
    }
  }
};

struct CollisionSink {
  bool found = false;
  std::vector<int> word_a, word_b;
};

Frontier seed_frontier() {
  Frontier f;
  f.insert(Mat2Q{}, 1, 1, {});
  return f;
}

// Expands one convolution level. The budget is charged per level as
// frontier * |gens|, the actual number of products formed; deduplication is
// what keeps repeated expansion affordable.
Frontier expand(const Frontier& cur, const std::vector<Mat2Q>& gens,
                const std::vector<Rational>& gen_weights, std::uint64_t budget,
                CollisionSink* collisions) {
  std::uint64_t work =
      static_cast<std::uint64_t>(cur.entries.size()) * gens.size();
  if (work > budget) throw BudgetExceeded("enumeration level exceeds budget");
  Frontier next;
  next.entries.reserve(work);
  for (const ProductAtom& e : cur.entries) {
    for (std::size_t j = 0; j < gens.size(); ++j) {
      Mat2Q m = e.matrix * gens[j];
      std::vector<int> word = e.witness;
      word.push_back(static_cast<int>(j));
      auto it = next.index.find(m);
      if (it != next.index.end() && collisions && !collisions->found) {
        collisions->found = true;
        collisions->word_a = next.entries[it->second].witness;
        collisions->word_b = word;
      }
      next.insert(std::move(m), e.count, e.weight * gen_weights[j],
                  std::move(word));
    }
  }
  return next;
}

void check_generators(const std::vector<Mat2Q>& gens) {
  if (gens.empty()) throw DomainError("need at least one generator");
  for (const Mat2Q& g : gens) validate_sl2(g);
}

std::vector<Rational> uniform_weights(std::size_t k) {
  return std::vector<Rational>(k, Rational(1, static_cast<long>(k)));
}

std::vector<ProductAtom> enumerate_level(const std::vector<Mat2Q>& gens,
                                         const std::vector<Rational>& weights,
                                         int n, std::uint64_t budget) {
  if (n < 0) throw DomainError("product length must be nonnegative");
  Frontier f = seed_frontier();
  for (int level = 0; level < n; ++level)
    f = expand(f, gens, weights, budget, nullptr);
  return std::move(f.entries);
}

}  // namespace

std::vector<ProductAtom> exact_products(const std::vector<Mat2Q>& gens, int n,
                                        std::uint64_t budget) {
  check_generators(gens);
  return enumerate_level(gens, uniform_weights(gens.size()), n, budget);
}

std::vector<ProductAtom> exact_products(const AtomicMeasureG& mu, int n,
                                        std::uint64_t budget) {
  check_generators(mu.atoms);
  return enumerate_level(mu.atoms, mu.weights, n, budget);
}

FreenessReport freeness_check(const std::vector<Mat2Q>& gens, int maxlen,
                              std::uint64_t budget) {
  check_generators(gens);
  if (maxlen < 1) throw DomainError("freeness scan needs maxlen >= 1");
  FreenessReport report;
  std::vector<Rational> weights = uniform_weights(gens.size());
  Frontier f = seed_frontier();
  for (int n = 1; n <= maxlen; ++n) {
    CollisionSink sink;
    f = expand(f, gens, weights, budget, &sink);
    if (sink.found) {
      report.collision_found = true;
      report.collision_length = n;
      report.word_a = std::move(sink.word_a);
      report.word_b = std::move(sink.word_b);
      return report;
    }
    report.free_up_to = n;
  }
  return report;
}

double entropy_bits(const std::vector<ProductAtom>& atoms) {
  double h = 0.0;
  for (const ProductAtom& a : atoms) {
    if (a.weight == 0) continue;
    h -= to_double(a.weight) * log2_rational(a.weight);
  }
  return h;
}

EntropyRateEstimate rw_entropy_profile(const AtomicMeasureG& mu, int maxlen,
                                       std::uint64_t budget) {
  check_generators(mu.atoms);
  if (maxlen < 1) throw DomainError("entropy profile needs maxlen >= 1");
  EntropyRateEstimate est;
  est.maxlen = maxlen;
  Frontier f = seed_frontier();
  for (int n = 1; n <= maxlen; ++n) {
    f = expand(f, mu.atoms, mu.weights, budget, nullptr);
    est.h.push_back(entropy_bits(f.entries) / n);
  }
  est.h_n = est.h.back();
  return est;
}

SeparationReport diophantine_separation(const std::vector<Mat2Q>& gens, int n,
                                        std::uint64_t budget) {
  check_generators(gens);
  if (n < 1) throw DomainError("separation needs n >= 1");
  std::vector<ProductAtom> atoms =
      enumerate_level(gens, uniform_weights(gens.size()), n, budget);
  if (atoms.size() < 2)
    throw EmptyReport("all length-n products coincide; nothing to separate");

  auto abs_diff = [](const Rational& x, const Rational& y) {
    Rational d = x - y;
    return d < 0 ? Rational(-d) : d;
  };
  std::optional<Rational> best;
  std::size_t best_i = 0, best_j = 0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const Mat2Q& mi = atoms[i].matrix;
    for (std::size_t j = i + 1; j < atoms.size(); ++j) {
      const Mat2Q& mj = atoms[j].matrix;
      // Max-norm of the difference, entrywise with early exit: once one
      // entry reaches the current minimum the pair cannot improve on it.
      Rational pair_max = 0;
      bool pruned = false;
      const Rational* li[4] = {&mi.a, &mi.b, &mi.c, &mi.d};
      const Rational* rj[4] = {&mj.a, &mj.b, &mj.c, &mj.d};
      for (int e = 0; e < 4; ++e) {
        Rational d = abs_diff(*li[e], *rj[e]);
        if (best && d >= *best) {
          pruned = true;
          break;
        }
        if (d > pair_max) pair_max = std::move(d);
      }
      if (pruned) continue;
      best = std::move(pair_max);
      best_i = i;
      best_j = j;
    }
  }

  SeparationReport report;
  report.n = n;
  report.min_separation_exact = *best;
  report.min_separation = to_double(*best);
  // The per-step constant only carries information below 1: a separation
  // already >= 1 (integer entries) certifies the best possible constant.
  report.c_n = *best >= 1
                   ? 1.0
                   : std::pow(report.min_separation, 1.0 / static_cast<double>(n));
  report.word_a = atoms[best_i].witness;
  report.word_b = atoms[best_j].witness;
  return report;
}

}  // namespace furst
