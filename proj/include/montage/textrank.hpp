#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "montage/subtitle.hpp"

namespace montage {

/// Sparse non-negative term weights keyed by (lowercased) term.
struct TermVector {
  std::map<std::string, double> weights;

  bool empty() const noexcept { return weights.empty(); }
};

struct DocumentFrequency {
  std::size_t documents = 0;
  std::unordered_map<std::string, std::size_t> df;
};

DocumentFrequency document_frequency(std::span<const std::string> texts);

/// TF = raw count of lowercased whitespace tokens; IDF = ln((N+1)/(df+1)) + 1.
/// Without `stats` the input texts are their own corpus. Texts with no tokens
/// yield empty vectors, which the rankers skip.
std::vector<TermVector> tfidf_vectors(std::span<const std::string> texts,
                                      const DocumentFrequency* stats = nullptr);
std::vector<TermVector> tfidf_vectors(std::span<const Sentence> sentences,
                                      const DocumentFrequency* stats = nullptr);

/// Cosine similarity; 0 when either vector has zero norm.
double cosine(const TermVector& a, const TermVector& b);

struct RankedItem {
  std::size_t index = 0;
  double score = 0.0;

  friend bool operator==(const RankedItem&, const RankedItem&) = default;
};

struct RankedList {
  std::vector<RankedItem> items;
  bool degenerate = false;  // Support Sets: no pair cleared the threshold
  std::vector<std::string> warnings;

  std::vector<std::size_t> indices() const;
};

struct SupportSetOptions {
  double threshold = 0.1;
  std::optional<std::size_t> cardinality_cap;  // keep only the most similar members
};

/// Support Sets centrality. Each passage i gets a support set of the other
/// passages whose cosine to it exceeds the threshold; a passage's score is the
/// number of support sets it belongs to. Ties go to the earlier passage.
RankedList support_set_rank(std::span<const TermVector> vectors, const SupportSetOptions& options = {});

/// Symmetric non-negative weight matrix with zero diagonal, row-major.
class SimilarityGraph {
 public:
  SimilarityGraph() = default;
  explicit SimilarityGraph(std::size_t n) : n_(n), weights_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double weight(std::size_t i, std::size_t j) const { return weights_[i * n_ + j]; }
  /// Sets both (i, j) and (j, i).
  void set_weight(std::size_t i, std::size_t j, double w);

 private:
  std::size_t n_ = 0;
  std::vector<double> weights_;
};

SimilarityGraph cosine_graph(std::span<const TermVector> vectors);

struct GrasshopperConfig {
  double lambda = 0.95;
  std::vector<double> prior;  // empty means uniform
  std::size_t k = 10;
  double power_iter_tol = 1e-10;
  std::size_t max_iters = 10'000;
};

/// GRASSHOPPER diversity ranking. The first item maximizes the stationary
/// distribution of the prior-smoothed walk; each later item maximizes the
/// expected number of visits before absorption once everything already ranked
/// is turned into an absorbing state. Returns min(k, n) items.
RankedList grasshopper_rank(const SimilarityGraph& graph, const GrasshopperConfig& config);

// Structured text records: "n" then "i j w" triplets (i < j); rankings as
// "index score" lines.
std::string to_graph_records(const SimilarityGraph& graph);
SimilarityGraph parse_graph_records(std::string_view records);
std::string to_ranking_records(const RankedList& ranked);
RankedList parse_ranking_records(std::string_view records);

}  // namespace montage
