#include "montage/textrank.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "montage/error.hpp"
#include "montage/text.hpp"

namespace montage {

std::vector<std::size_t> RankedList::indices() const {
  std::vector<std::size_t> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(item.index);
  return out;
}

DocumentFrequency document_frequency(std::span<const std::string> texts) {
  DocumentFrequency stats;
  stats.documents = texts.size();
  for (const auto& t : texts) {
    auto tokens = text::split_whitespace(text::ascii_lower(t));
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (auto& tok : tokens) ++stats.df[tok];
  }
  return stats;
}

std::vector<TermVector> tfidf_vectors(std::span<const std::string> texts, const DocumentFrequency* stats) {
  if (texts.empty()) throw Error(ErrorCode::InvalidArgument, "tfidf_vectors: no texts");
  DocumentFrequency own;
  if (stats == nullptr) {
    own = document_frequency(texts);
    stats = &own;
  }
  const double n = static_cast<double>(stats->documents);

  std::vector<TermVector> vectors(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    std::map<std::string, double>& w = vectors[i].weights;
    for (auto& tok : text::split_whitespace(text::ascii_lower(texts[i]))) w[tok] += 1.0;
    for (auto& [term, tf] : w) {
      const auto it = stats->df.find(term);
      const double df = it == stats->df.end() ? 0.0 : static_cast<double>(it->second);
      tf *= std::log((n + 1.0) / (df + 1.0)) + 1.0;
    }
  }
  return vectors;
}

std::vector<TermVector> tfidf_vectors(std::span<const Sentence> sentences, const DocumentFrequency* stats) {
  std::vector<std::string> texts;
  texts.reserve(sentences.size());
  for (const auto& s : sentences) texts.push_back(s.text);
  return tfidf_vectors(texts, stats);
}

double cosine(const TermVector& a, const TermVector& b) {
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (const auto& [_, w] : a.weights) na += w * w;
  for (const auto& [_, w] : b.weights) nb += w * w;
  if (na == 0.0 || nb == 0.0) return 0.0;

  auto ia = a.weights.begin();
  auto ib = b.weights.begin();
  while (ia != a.weights.end() && ib != b.weights.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

RankedList support_set_rank(std::span<const TermVector> vectors, const SupportSetOptions& options) {
  if (!(options.threshold > 0.0 && options.threshold < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "support set threshold must lie in (0, 1)");
  }
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (!vectors[i].empty()) live.push_back(i);
  }
  if (live.empty()) throw Error(ErrorCode::InvalidArgument, "support_set_rank: no non-empty passages");

  std::vector<std::size_t> score(vectors.size(), 0);
  std::vector<std::pair<double, std::size_t>> members;
  for (std::size_t i : live) {
    members.clear();
    for (std::size_t j : live) {
      if (j == i) continue;
      const double sim = cosine(vectors[i], vectors[j]);
      if (sim > options.threshold) members.emplace_back(sim, j);
    }
    if (options.cardinality_cap && members.size() > *options.cardinality_cap) {
      std::sort(members.begin(), members.end(), [](const auto& x, const auto& y) {
        return x.first != y.first ? x.first > y.first : x.second < y.second;
      });
      members.resize(*options.cardinality_cap);
    }
    for (const auto& m : members) ++score[m.second];
  }

  std::stable_sort(live.begin(), live.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  RankedList ranked;
  for (std::size_t i : live) ranked.items.push_back({i, static_cast<double>(score[i])});
  const bool all_zero = std::all_of(live.begin(), live.end(), [&](std::size_t i) { return score[i] == 0; });
  if (all_zero && live.size() > 1) {
    ranked.degenerate = true;
    ranked.warnings.push_back("DegenerateCorpus: no passage pair exceeds support threshold " +
                              std::to_string(options.threshold) + "; ranking falls back to input order");
  }
  return ranked;
}

void SimilarityGraph::set_weight(std::size_t i, std::size_t j, double w) {
  if (i >= n_ || j >= n_) throw Error(ErrorCode::InvalidArgument, "graph node out of range");
  if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidArgument, "graph weights must be finite and >= 0");
  if (i == j && w != 0.0) throw Error(ErrorCode::InvalidArgument, "graph diagonal must be zero");
  weights_[i * n_ + j] = w;
  weights_[j * n_ + i] = w;
}

SimilarityGraph cosine_graph(std::span<const TermVector> vectors) {
  SimilarityGraph g(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    for (std::size_t j = i + 1; j < vectors.size(); ++j) g.set_weight(i, j, cosine(vectors[i], vectors[j]));
  }
  return g;
}

namespace {

Eigen::VectorXd validated_prior(const GrasshopperConfig& config, std::size_t n) {
  if (!(config.lambda >= 0.0 && config.lambda <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "grasshopper lambda must lie in [0, 1]");
  }
  if (config.prior.empty()) return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / n);
  if (config.prior.size() != n) throw Error(ErrorCode::InvalidArgument, "grasshopper prior length != node count");
  double sum = 0.0;
  for (double p : config.prior) {
    if (!(p >= 0.0)) throw Error(ErrorCode::InvalidArgument, "grasshopper prior entries must be >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw Error(ErrorCode::InvalidArgument, "grasshopper prior must sum to 1");
  return Eigen::Map<const Eigen::VectorXd>(config.prior.data(), static_cast<Eigen::Index>(n));
}

// Lowest index wins ties; values within a relative 1e-12 count as tied so
// rounding noise in symmetric graphs cannot reorder them.
template <typename Vec>
Eigen::Index argmax_first(const Vec& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best] + 1e-12 * std::max(1.0, std::abs(v[best]))) best = i;
  }
  return best;
}

}  // namespace

RankedList grasshopper_rank(const SimilarityGraph& graph, const GrasshopperConfig& config) {
  const std::size_t n = graph.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "grasshopper_rank: empty graph");
  const std::size_t k = std::min(config.k, n);
  const Eigen::VectorXd prior = validated_prior(config, n);
  if (k == 0) return {};
  const auto N = static_cast<Eigen::Index>(n);

  Eigen::MatrixXd P(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < N; ++j) row += graph.weight(i, j);
    for (Eigen::Index j = 0; j < N; ++j) P(i, j) = row > 0.0 ? graph.weight(i, j) / row : 1.0 / n;
  }
  const Eigen::MatrixXd walk = config.lambda * P + (1.0 - config.lambda) * Eigen::VectorXd::Ones(N) * prior.transpose();

  RankedList ranked;

  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(N, 1.0 / n);
  bool converged = false;
  for (std::size_t it = 0; it < config.max_iters; ++it) {
    Eigen::RowVectorXd next = pi * walk;
    next /= next.sum();
    const double delta = (next - pi).lpNorm<1>();
    pi = std::move(next);
    if (delta < config.power_iter_tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    ranked.warnings.push_back("power iteration did not reach tolerance within " + std::to_string(config.max_iters) +
                              " iterations");
  }
  const Eigen::Index first = argmax_first(pi);
  ranked.items.push_back({static_cast<std::size_t>(first), pi[first]});

  std::vector<bool> absorbed(n, false);
  absorbed[first] = true;
  while (ranked.items.size() < k) {
    // States that can reach an absorbing state have finite visit counts;
    // any that cannot make I - Q singular.
    std::vector<bool> reaches(absorbed);
    std::deque<std::size_t> frontier;
    for (std::size_t i = 0; i < n; ++i) {
      if (absorbed[i]) frontier.push_back(i);
    }
    while (!frontier.empty()) {
      const std::size_t j = frontier.front();
      frontier.pop_front();
      for (std::size_t i = 0; i < n; ++i) {
        if (!reaches[i] && walk(i, j) > 0.0) {
          reaches[i] = true;
          frontier.push_back(i);
        }
      }
    }

    std::vector<Eigen::Index> survivors;
    bool singular = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!absorbed[i]) {
        survivors.push_back(static_cast<Eigen::Index>(i));
        singular = singular || !reaches[i];
      }
    }

    std::size_t pick = 0;
    double score = 0.0;
    if (singular) {
      // Unabsorbable states would be visited without bound; take the one the
      // prior favors.
      bool found = false;
      for (auto s : survivors) {
        if (reaches[s]) continue;
        if (!found || prior[s] > score) {
          pick = static_cast<std::size_t>(s);
          score = prior[s];
          found = true;
        }
      }
      ranked.warnings.push_back("SingularChain: items unreachable from the absorbing set; item " +
                                std::to_string(pick) + " chosen by prior");
    } else {
      const auto m = static_cast<Eigen::Index>(survivors.size());
      Eigen::MatrixXd A(m, m);
      for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) A(a, b) = (a == b ? 1.0 : 0.0) - walk(survivors[a], survivors[b]);
      }
      const Eigen::VectorXd visits =
          A.transpose().partialPivLu().solve(Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m)));
      const Eigen::Index best = argmax_first(visits);
      pick = static_cast<std::size_t>(survivors[best]);
      score = visits[best];
    }
    absorbed[pick] = true;
    ranked.items.push_back({pick, score});
  }
  return ranked;
}

std::string to_graph_records(const SimilarityGraph& graph) {
  std::string out = std::to_string(graph.size()) + "\n";
  char buf[96];
  for (std::size_t i = 0; i < graph.size(); ++i) {
    for (std::size_t j = i + 1; j < graph.size(); ++j) {
      if (graph.weight(i, j) == 0.0) continue;
      std::snprintf(buf, sizeof(buf), "%zu %zu %.17g\n", i, j, graph.weight(i, j));
      out += buf;
    }
  }
  return out;
}

SimilarityGraph parse_graph_records(std::string_view records) {
  std::istringstream in{std::string(records)};
  std::size_t n = 0;
  if (!(in >> n)) throw Error(ErrorCode::InvalidArgument, "graph records: missing node count");
  SimilarityGraph g(n);
  std::size_t i = 0;
  std::size_t j = 0;
  double w = 0.0;
  while (in >> i >> j >> w) g.set_weight(i, j, w);
  if (!in.eof()) throw Error(ErrorCode::InvalidArgument, "graph records: malformed triplet");
  return g;
}

std::string to_ranking_records(const RankedList& ranked) {
  std::string out;
  char buf[64];
  for (const auto& item : ranked.items) {
    std::snprintf(buf, sizeof(buf), "%zu %.17g\n", item.index, item.score);
    out += buf;
  }
  return out;
}

RankedList parse_ranking_records(std::string_view records) {
  std::istringstream in{std::string(records)};
  RankedList ranked;
  RankedItem item;
  while (in >> item.index >> item.score) ranked.items.push_back(item);
  if (!in.eof()) throw Error(ErrorCode::InvalidArgument, "ranking records: malformed line");
  return ranked;
}

}  // namespace montage
