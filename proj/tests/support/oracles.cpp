#include "oracles.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

namespace divex::testing::oracle {

double cosine_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a == b) return 0.0;
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 && nb == 0) return 0.0;
  if (na == 0 || nb == 0) return 1.0;
  return std::max(0.0, 1.0 - dot / (std::sqrt(na) * std::sqrt(nb)));
}

double l1(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

double l2(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double distance(FeatureKind kind, const std::vector<double>& a, const std::vector<double>& b) {
  switch (kind) {
    case FeatureKind::Concept: return cosine_distance(a, b);
    case FeatureKind::Motion: return l2(a, b);
    default: return l1(a, b);
  }
}

namespace {

void sort_and_cut(std::vector<Ranked>& v, std::size_t k, bool ascending) {
  std::sort(v.begin(), v.end(), [ascending](const Ranked& x, const Ranked& y) {
    if (x.score != y.score) return ascending ? x.score < y.score : x.score > y.score;
    return x.key < y.key;
  });
  if (v.size() > k) v.resize(k);
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::vector<Ranked> knn(const CatalogData& data, const std::string& queryKey, FeatureKind kind, Granularity g,
                        std::size_t k) {
  const std::vector<double>* q = nullptr;
  for (const auto& f : data.features) {
    if (f.vector.kind == kind && f.item.str() == queryKey) q = &f.vector.values;
  }
  std::vector<Ranked> out;
  if (!q) return out;
  for (const auto& f : data.features) {
    const auto key = f.item.str();
    if (f.vector.kind != kind || f.item.granularity != g || key == queryKey) continue;
    out.push_back({key, distance(kind, *q, f.vector.values)});
  }
  sort_and_cut(out, k, true);
  return out;
}

ConceptAnswer concept_query(const std::vector<ConceptDetection>& detections, const std::vector<std::string>& rawTokens,
                            const std::optional<std::string>& source, double threshold, Granularity g, std::size_t k) {
  std::vector<std::string> tokens;
  for (const auto& t : rawTokens) {
    const auto lt = lower(t);
    if (std::find(tokens.begin(), tokens.end(), lt) == tokens.end()) tokens.push_back(lt);
  }
  ConceptAnswer answer;
  if (detections.empty()) return answer;

  auto consulted = [&](const std::string& s) { return !source || s == *source; };
  for (const auto& t : tokens) {
    bool known = false;
    for (const auto& d : detections) known = known || (consulted(d.source) && d.conceptId == t);
    if (!known) answer.unknownTokens.push_back(t);
  }
  if (!answer.unknownTokens.empty()) return answer;

  // one pass: best qualifying score per (item, token)
  std::map<std::string, std::vector<double>> best;
  for (const auto& d : detections) {
    if (d.item.granularity != g || !consulted(d.source) || d.score < threshold) continue;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      if (d.conceptId != tokens[t]) continue;
      auto& row = best.try_emplace(d.item.str(), tokens.size(), -1.0).first->second;
      row[t] = std::max(row[t], d.score);
    }
  }
  for (const auto& [item, row] : best) {
    if (std::any_of(row.begin(), row.end(), [](double x) { return x < 0; })) continue;
    double sum = 0;
    for (double x : row) sum += x;
    answer.hits.push_back({item, sum});
  }
  sort_and_cut(answer.hits, k, false);
  return answer;
}

std::vector<FilterRow> filter(const CatalogData& data, const FilterCriteria& c) {
  std::vector<std::string> concepts;
  for (const auto& x : c.concepts) {
    const auto lx = lower(x);
    if (std::find(concepts.begin(), concepts.end(), lx) == concepts.end()) concepts.push_back(lx);
  }

  struct Row {
    FilterRow row;
    std::string created;
  };
  std::vector<Row> rows;
  for (const auto& v : data.videos) {
    const int year = std::stoi(v.creationTime.substr(0, 4));
    if (c.yearFrom && year < *c.yearFrom) continue;
    if (c.yearTo && year > *c.yearTo) continue;

    std::vector<std::pair<std::optional<std::uint64_t>, std::pair<double, double>>> scopes;
    if (c.unit == FilterUnit::Video) {
      scopes.push_back({std::nullopt, {0.0, v.durationSec}});
    } else {
      for (std::uint64_t i = 0; static_cast<double>(i) * c.segmentSec < v.durationSec; ++i) {
        scopes.push_back({i, {i * c.segmentSec, std::min((i + 1) * c.segmentSec, v.durationSec)}});
      }
    }
    for (const auto& [seg, range] : scopes) {
      bool pass = true;
      double value = c.mode == FilterMode::Frequency ? 0.0 : 2.0;
      for (const auto& concept_ : concepts) {
        std::map<std::uint64_t, double> best;  // second -> best score over sources
        for (const auto& d : data.detections) {
          if (d.item.granularity != Granularity::Frame || d.item.videoId != v.videoId || d.conceptId != concept_) continue;
          const double t = static_cast<double>(d.item.ordinal);
          if (t < range.first || t >= range.second) continue;
          auto [it, inserted] = best.emplace(d.item.ordinal, d.score);
          if (!inserted) it->second = std::max(it->second, d.score);
        }
        std::uint64_t freq = 0;
        double conf = 0;
        for (const auto& [t, s] : best) {
          freq += s >= c.tau;
          conf = std::max(conf, s);
        }
        if (c.mode == FilterMode::Frequency) {
          pass = pass && freq >= 1;
          value += static_cast<double>(freq);
        } else {
          pass = pass && conf > 0;
          value = std::min(value, conf);
        }
      }
      if (concepts.empty()) value = 0.0;
      if (pass) rows.push_back({{v.videoId, seg, value}, v.creationTime});
    }
  }

  // creationTime strings in the random fixtures are all "YYYY-MM-DDTHH:00:00Z", so text order is time order
  std::sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) {
    if (c.order == FilterOrder::Period) {
      if (a.created != b.created) return a.created < b.created;
    } else if (a.row.value != b.row.value) {
      return a.row.value > b.row.value;
    }
    if (a.row.videoId != b.row.videoId) return a.row.videoId < b.row.videoId;
    return a.row.segIndex.value_or(0) < b.row.segIndex.value_or(0);
  });
  std::vector<FilterRow> out;
  for (auto& r : rows) out.push_back(std::move(r.row));
  return out;
}

}  // namespace divex::testing::oracle
