#pragma once

// Brute-force GLEU for a fixed reference choice. Deliberately naive: n-grams
// are vectors in a std::map and every multiset operation is spelled out.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace oracle {

using Tokens = std::vector<std::string>;
using Bag = std::map<Tokens, long>;

inline Bag ngram_bag(const Tokens& t, std::size_t n) {
  Bag bag;
  for (std::size_t i = 0; i + n <= t.size(); ++i) ++bag[Tokens(t.begin() + static_cast<long>(i), t.begin() + static_cast<long>(i + n))];
  return bag;
}

inline long count_in(const Bag& b, const Tokens& g) {
  auto it = b.find(g);
  return it == b.end() ? 0 : it->second;
}

struct Instance {
  Tokens source;
  Tokens hypothesis;
  std::vector<Tokens> references;
};

// Score in [0, 1] when instance i is scored against references[choice[i]].
inline double gleu(const std::vector<Instance>& data, const std::vector<std::size_t>& choice, int max_n,
                   double floor = 1e-9) {
  double hyp_len = 0, ref_len = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    hyp_len += static_cast<double>(data[i].hypothesis.size());
    ref_len += static_cast<double>(data[i].references[choice[i]].size());
  }
  if (hyp_len == 0) return 0.0;
  double log_sum = 0;
  for (int n = 1; n <= max_n; ++n) {
    long matched = 0, penalized = 0, hyp_total = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const Bag h = ngram_bag(data[i].hypothesis, static_cast<std::size_t>(n));
      const Bag r = ngram_bag(data[i].references[choice[i]], static_cast<std::size_t>(n));
      const Bag s = ngram_bag(data[i].source, static_cast<std::size_t>(n));
      // src - ref as a multiset
      Bag src_minus_ref;
      for (const auto& [g, c] : s) {
        long left = c - count_in(r, g);
        if (left > 0) src_minus_ref[g] = left;
      }
      for (const auto& [g, c] : h) {
        hyp_total += c;
        matched += std::min(c, count_in(r, g));
        penalized += std::min(c, count_in(src_minus_ref, g));
      }
    }
    double p = hyp_total == 0 ? floor : std::max(floor, static_cast<double>(matched - penalized)) / static_cast<double>(hyp_total);
    log_sum += std::log(p);
  }
  double bp = ref_len > hyp_len ? std::exp(1.0 - ref_len / hyp_len) : 1.0;
  return bp * std::exp(log_sum / max_n);
}

}  // namespace oracle
