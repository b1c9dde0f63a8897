#include "reveval/ngram_lm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "reveval/error.hpp"

namespace reveval {

namespace {

constexpr std::string_view kMagic = "NGLM1";

std::string pack(std::span<const WordId> ids) {
  std::string key(ids.size() * 4, '\0');
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (int b = 0; b < 4; ++b) key[i * 4 + static_cast<std::size_t>(b)] = static_cast<char>((ids[i] >> (8 * b)) & 0xFF);
  }
  return key;
}

WordId first_id(const std::string& key) {
  WordId v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<WordId>(static_cast<unsigned char>(key[static_cast<std::size_t>(b)])) << (8 * b);
  return v;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), 8);
}

std::uint64_t get_uint(std::istream& in, int bytes) {
  std::array<unsigned char, 8> b{};
  in.read(reinterpret_cast<char*>(b.data()), bytes);
  if (!in) throw UsageError("truncated n-gram model file");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

Discounts estimate_discounts(const std::array<std::uint64_t, 5>& coc) {
  Discounts d;
  const double n1 = static_cast<double>(coc[1]), n2 = static_cast<double>(coc[2]);
  const double n3 = static_cast<double>(coc[3]), n4 = static_cast<double>(coc[4]);
  if (n1 > 0 && n2 > 0 && n3 > 0 && n4 > 0) {
    const double y = n1 / (n1 + 2.0 * n2);
    Discounts est{1.0 - 2.0 * y * n2 / n1, 2.0 - 3.0 * y * n3 / n2, 3.0 - 4.0 * y * n4 / n3, false};
    if (est.d1 > 0 && est.d1 <= 1 && est.d2 > 0 && est.d2 <= 2 && est.d3 > 0 && est.d3 <= 3) return est;
  }
  d.fallback = true;
  return d;
}

}  // namespace

double NgramModel::discount(const Discounts& d, std::uint64_t count) const {
  if (count == 0) return 0.0;
  if (count == 1) return d.d1;
  if (count == 2) return d.d2;
  return d.d3;
}

NgramModel NgramModel::fit(std::span<const std::vector<std::string>> sentences, const NgramOptions& options) {
  if (options.order < 1) throw UsageError("n-gram order must be >= 1");
  if (sentences.empty()) throw UsageError("cannot fit a language model on an empty corpus");

  std::map<std::string, std::uint64_t> freq;
  for (const auto& s : sentences) {
    for (const auto& w : s) ++freq[w];
  }

  NgramModel m;
  m.order_ = options.order;
  m.min_count_ = std::max<std::uint64_t>(1, options.min_count);
  m.vocab_ = {"<s>", "</s>", "<unk>"};
  for (const auto& [w, c] : freq) {
    if (c >= m.min_count_ && w != "<s>" && w != "</s>" && w != "<unk>") m.vocab_.push_back(w);
  }
  for (std::size_t i = 0; i < m.vocab_.size(); ++i) m.index_[m.vocab_[i]] = static_cast<WordId>(i);

  const auto order = static_cast<std::size_t>(m.order_);
  std::vector<std::unordered_map<std::string, std::uint64_t>> raw(order);
  std::vector<WordId> ids;
  for (const auto& s : sentences) {
    ids.assign(1, kBos);
    for (const auto& w : s) ids.push_back(m.id(w));
    ids.push_back(kEos);
    for (std::size_t p = 1; p < ids.size(); ++p) {
      for (std::size_t k = 1; k <= order && k <= p + 1; ++k) {
        ++raw[k - 1][pack(std::span<const WordId>(ids).subspan(p + 1 - k, k))];
      }
    }
  }

  m.levels_.assign(order, Level{});
  m.levels_[order - 1].counts = raw[order - 1];
  for (std::size_t k = order - 1; k >= 1; --k) {
    auto& level = m.levels_[k - 1].counts;
    // Continuation counts: distinct left extensions among (k+1)-grams.
    for (const auto& [key, c] : raw[k]) ++level[key.substr(4)];
    for (const auto& [key, c] : raw[k - 1]) {
      if (first_id(key) == kBos) level[key] = c;
    }
  }
  m.finalize();
  return m;
}

void NgramModel::finalize() {
  for (std::size_t k = 1; k <= levels_.size(); ++k) {
    auto& level = levels_[k - 1];
    level.contexts.clear();
    std::array<std::uint64_t, 5> coc{};
    for (const auto& [key, c] : level.counts) {
      if (c >= 1 && c <= 4) ++coc[c];
      auto& ctx = level.contexts[key.substr(0, (k - 1) * 4)];
      ctx.total += c;
      if (c == 1) ++ctx.n1;
      else if (c == 2) ++ctx.n2;
      else if (c >= 3) ++ctx.n3;
    }
    level.discounts = estimate_discounts(coc);
  }
}

WordId NgramModel::id(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? kUnk : it->second;
}

double NgramModel::prob(WordId word, std::span<const WordId> context) const {
  const double predictable = static_cast<double>(vocab_.size() - 1);  // excludes <s>
  double p = 1.0 / predictable;
  const std::size_t max_k = std::min<std::size_t>(levels_.size(), context.size() + 1);
  std::vector<WordId> gram;
  for (std::size_t k = 1; k <= max_k; ++k) {
    const auto& level = levels_[k - 1];
    auto hist = context.subspan(context.size() - (k - 1));
    auto ctx_it = level.contexts.find(pack(hist));
    if (ctx_it == level.contexts.end()) break;
    const auto& st = ctx_it->second;
    if (st.total == 0) break;
    gram.assign(hist.begin(), hist.end());
    gram.push_back(word);
    auto c_it = level.counts.find(pack(gram));
    const std::uint64_t c = c_it == level.counts.end() ? 0 : c_it->second;
    const auto& d = level.discounts;
    const double total = static_cast<double>(st.total);
    const double gamma = (d.d1 * static_cast<double>(st.n1) + d.d2 * static_cast<double>(st.n2) +
                          d.d3 * static_cast<double>(st.n3)) / total;
    p = std::max(static_cast<double>(c) - discount(d, c), 0.0) / total + gamma * p;
  }
  return p;
}

double NgramModel::log_prob(std::span<const std::string> tokens, bool terminate) const {
  if (tokens.empty()) throw UsageError("cannot score an empty token sequence");
  std::vector<WordId> ids;
  ids.reserve(tokens.size() + 2);
  ids.push_back(kBos);
  for (const auto& t : tokens) ids.push_back(id(t));
  if (terminate) ids.push_back(kEos);
  const std::size_t hist = static_cast<std::size_t>(order_ - 1);
  double total = 0.0;
  for (std::size_t i = 1; i < ids.size(); ++i) {
    std::size_t start = i > hist ? i - hist : 0;
    total += std::log(prob(ids[i], std::span<const WordId>(ids).subspan(start, i - start)));
  }
  return total;
}

double NgramModel::perplexity(std::span<const std::string> tokens) const {
  const double lp = log_prob(tokens);
  return std::exp(-lp / static_cast<double>(tokens.size() + 1));
}

double NgramModel::perplexity(std::span<const std::vector<std::string>> sentences) const {
  double lp = 0.0;
  std::size_t n = 0;
  for (const auto& s : sentences) {
    if (s.empty()) continue;
    lp += log_prob(s);
    n += s.size() + 1;
  }
  if (n == 0) throw UsageError("cannot compute perplexity of empty text");
  return std::exp(-lp / static_cast<double>(n));
}

void NgramModel::save(std::ostream& out) const {
  out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
  put_u32(out, static_cast<std::uint32_t>(order_));
  put_u64(out, min_count_);
  put_u32(out, static_cast<std::uint32_t>(vocab_.size()));
  for (const auto& w : vocab_) {
    put_u32(out, static_cast<std::uint32_t>(w.size()));
    out.write(w.data(), static_cast<std::streamsize>(w.size()));
  }
  for (const auto& level : levels_) {
    std::vector<std::pair<std::string, std::uint64_t>> entries(level.counts.begin(), level.counts.end());
    std::sort(entries.begin(), entries.end());
    put_u64(out, entries.size());
    for (const auto& [key, c] : entries) {
      out.write(key.data(), static_cast<std::streamsize>(key.size()));
      put_u64(out, c);
    }
  }
}

NgramModel NgramModel::load(std::istream& in) {
  std::string magic(kMagic.size(), '\0');
  in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (!in || magic != kMagic) throw UsageError("not an NGLM1 model file");
  NgramModel m;
  m.order_ = static_cast<int>(get_uint(in, 4));
  m.min_count_ = get_uint(in, 8);
  if (m.order_ < 1 || m.order_ > 16) throw UsageError("corrupt n-gram model: bad order");
  const auto vsize = get_uint(in, 4);
  for (std::uint64_t i = 0; i < vsize; ++i) {
    auto len = get_uint(in, 4);
    std::string w(len, '\0');
    in.read(w.data(), static_cast<std::streamsize>(len));
    if (!in) throw UsageError("truncated n-gram model file");
    m.index_[w] = static_cast<WordId>(i);
    m.vocab_.push_back(std::move(w));
  }
  if (m.vocab_.size() < 3) throw UsageError("corrupt n-gram model: vocabulary too small");
  m.levels_.assign(static_cast<std::size_t>(m.order_), Level{});
  for (std::size_t k = 1; k <= m.levels_.size(); ++k) {
    auto n = get_uint(in, 8);
    auto& counts = m.levels_[k - 1].counts;
    counts.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      std::string key(k * 4, '\0');
      in.read(key.data(), static_cast<std::streamsize>(key.size()));
      if (!in) throw UsageError("truncated n-gram model file");
      counts[key] = get_uint(in, 8);
    }
  }
  m.finalize();
  return m;
}

void NgramModel::save_file(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write model " + path.string());
  save(out);
}

NgramModel NgramModel::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open model " + path.string());
  return load(in);
}

}  // namespace reveval
