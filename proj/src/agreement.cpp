#include "reveval/agreement.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "reveval/error.hpp"
#include "parallel.hpp"

namespace reveval {

using nlohmann::json;

bool spans_overlap(const Span& a, const Span& b) {
  if (a.is_point() && b.is_point()) return a.begin == b.begin;
  if (a.is_point()) return b.begin <= a.begin && a.begin <= b.end;
  if (b.is_point()) return a.begin <= b.begin && b.begin <= a.end;
  return a.begin < b.end && b.begin < a.end;
}

namespace {

bool labels_intersect(const Edit& x, const Edit& y, bool raw) {
  for (const auto& lx : x.labels) {
    for (const auto& ly : y.labels) {
      if (raw ? LabelMap::normalize(lx.raw_label) == LabelMap::normalize(ly.raw_label) : lx.aspect == ly.aspect) {
        return true;
      }
    }
  }
  return false;
}

std::optional<AgreementSummary> summarize(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  AgreementSummary s;
  s.pairs = values.size();
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.avg = std::clamp(sum / static_cast<double>(values.size()), s.min, s.max);
  return s;
}

}  // namespace

PairAgreement pair_agreement(std::span<const Document* const> x, std::span<const Document* const> y,
                             const AgreementOptions& options) {
  if (x.size() != y.size()) throw UsageError("agreement: paper lists differ in length");
  PairAgreement out;
  out.shared_papers = x.size();
  for (std::size_t p = 0; p < x.size(); ++p) {
    const auto xe = edits(*x[p]);
    const auto ye = edits(*y[p]);
    for (const auto& a : xe) {
      ++out.from_edits;
      bool hit = false;
      for (const auto& b : ye) {
        if (!spans_overlap(a.edit->span, b.edit->span)) continue;
        hit = true;
        ++out.overlapping_pairs;
        if (labels_intersect(*a.edit, *b.edit, options.raw_labels)) ++out.label_matches;
      }
      if (hit) ++out.detected;
    }
  }
  if (out.from_edits > 0) out.detection = static_cast<double>(out.detected) / static_cast<double>(out.from_edits);
  if (out.overlapping_pairs > 0) {
    out.correction = static_cast<double>(out.label_matches) / static_cast<double>(out.overlapping_pairs);
  }
  return out;
}

AgreementReport compute_agreement(std::span<const Document> docs, const AgreementOptions& options) {
  std::map<std::string, std::map<std::string, const Document*>> by_editor;
  for (const auto& d : docs) {
    auto [it, fresh] = by_editor[d.editor].emplace(d.id, &d);
    if (!fresh) throw UsageError("editor '" + d.editor + "' annotated paper '" + d.id + "' twice");
  }
  AgreementReport rep;
  for (const auto& [editor, papers] : by_editor) rep.editors.push_back(editor);
  if (rep.editors.size() < 2) throw UsageError("agreement needs at least two editors");

  std::vector<std::pair<std::size_t, std::size_t>> ordered;
  for (std::size_t i = 0; i < rep.editors.size(); ++i) {
    for (std::size_t j = 0; j < rep.editors.size(); ++j) {
      if (i != j) ordered.emplace_back(i, j);
    }
  }
  rep.pairs.resize(ordered.size());
  const long n = static_cast<long>(ordered.size());
#pragma omp parallel for schedule(dynamic) num_threads(detail::resolve_jobs(options.jobs))
  for (long k = 0; k < n; ++k) {
    const auto [i, j] = ordered[static_cast<std::size_t>(k)];
    const auto& xs = by_editor.at(rep.editors[i]);
    const auto& ys = by_editor.at(rep.editors[j]);
    std::vector<const Document*> xp, yp;
    for (const auto& [id, d] : xs) {
      auto it = ys.find(id);
      if (it == ys.end()) continue;
      xp.push_back(d);
      yp.push_back(it->second);
    }
    auto pa = pair_agreement(xp, yp, options);
    pa.from = rep.editors[i];
    pa.to = rep.editors[j];
    rep.pairs[static_cast<std::size_t>(k)] = std::move(pa);
  }

  const bool any_shared = std::any_of(rep.pairs.begin(), rep.pairs.end(), [](const PairAgreement& p) { return p.shared_papers > 0; });
  if (!any_shared) throw UsageError("agreement: no two editors annotated a common paper");

  std::vector<double> det, cor;
  for (const auto& p : rep.pairs) {
    if (p.shared_papers == 0) continue;
    if (p.detection) det.push_back(*p.detection);
    if (p.correction) cor.push_back(*p.correction);
  }
  rep.detection = summarize(det);
  rep.correction = summarize(cor);
  return rep;
}

json to_json(const AgreementReport& report) {
  auto summary = [](const std::optional<AgreementSummary>& s) -> json {
    if (!s) return nullptr;
    return json{{"avg", s->avg}, {"min", s->min}, {"max", s->max}, {"pairs", s->pairs}};
  };
  auto opt = [](const std::optional<double>& v) -> json { return v ? json(*v) : json(nullptr); };
  json pairs = json::array();
  for (const auto& p : report.pairs) {
    pairs.push_back({{"from", p.from},
                     {"to", p.to},
                     {"shared_papers", p.shared_papers},
                     {"from_edits", p.from_edits},
                     {"detected", p.detected},
                     {"detection", opt(p.detection)},
                     {"overlapping_pairs", p.overlapping_pairs},
                     {"label_matches", p.label_matches},
                     {"correction", opt(p.correction)}});
  }
  return json{{"editors", report.editors},
              {"detection", summary(report.detection)},
              {"correction", summary(report.correction)},
              {"pairs", std::move(pairs)}};
}

}  // namespace reveval
