#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace montage {

struct LdaConfig {
  std::size_t topics = 100;
  std::optional<double> alpha;  // symmetric document-topic prior; defaults to 50 / topics
  double eta = 0.01;            // symmetric topic-word prior
  std::size_t em_iters = 50;
  double em_tol = 1e-6;  // relative bound change that ends EM early
  double inference_tol = 1e-6;
  std::size_t inference_max_iters = 100;
  std::uint64_t seed = 1;
  std::size_t min_df = 2;

  double effective_alpha() const { return alpha.value_or(50.0 / static_cast<double>(topics)); }
};

/// A trained LDA model: vocabulary plus a K x V row-stochastic topic-word
/// matrix with strictly positive entries.
class TopicModel {
 public:
  TopicModel() = default;
  TopicModel(std::vector<std::string> vocabulary, std::size_t topics, std::vector<double> topic_word, double alpha,
             double eta);

  std::size_t topics() const noexcept { return topics_; }
  std::size_t vocab_size() const noexcept { return vocabulary_.size(); }
  double alpha() const noexcept { return alpha_; }
  double eta() const noexcept { return eta_; }
  const std::vector<std::string>& vocabulary() const noexcept { return vocabulary_; }
  std::optional<std::size_t> term_id(std::string_view term) const;

  double prob(std::size_t topic, std::size_t word) const { return topic_word_[topic * vocabulary_.size() + word]; }
  std::span<const double> topic_row(std::size_t topic) const {
    return {topic_word_.data() + topic * vocabulary_.size(), vocabulary_.size()};
  }

  /// Bound recorded after each EM iteration's E-step (empty for untrained models).
  std::vector<double> elbo_trace;

  friend bool operator==(const TopicModel& a, const TopicModel& b) {
    return a.vocabulary_ == b.vocabulary_ && a.topics_ == b.topics_ && a.topic_word_ == b.topic_word_ &&
           a.alpha_ == b.alpha_ && a.eta_ == b.eta_;
  }

 private:
  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, std::size_t> ids_;
  std::size_t topics_ = 0;
  std::vector<double> topic_word_;
  double alpha_ = 0.0;
  double eta_ = 0.0;
};

struct TopicMixture {
  std::vector<double> theta;
  bool out_of_vocabulary = false;  // no known tokens; theta is the uniform prior mean
};

/// Lowercases, splits on whitespace and drops built-in English stopwords.
std::vector<std::string> topic_tokens(std::string_view text);
bool is_stopword(std::string_view token);

/// Variational EM. Deterministic for a given seed.
TopicModel train_lda(std::span<const std::vector<std::string>> docs, const LdaConfig& config);

/// Folds a document into a fixed model by variational inference.
TopicMixture infer_mixture(const TopicModel& model, std::span<const std::string> tokens,
                           double tol = 1e-6, std::size_t max_iters = 100);

double mixture_cosine(std::span<const double> a, std::span<const double> b);

struct IndexedMixture {
  std::size_t documentary = 0;
  std::size_t sentence = 0;
  TopicMixture mixture;
};

struct Candidate {
  std::size_t documentary = 0;
  std::size_t sentence = 0;
  double score = 0.0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct CandidateSet {
  std::size_t lecture_sentence = 0;
  std::vector<Candidate> candidates;  // non-increasing score
};

/// For each lecture mixture, the k most cosine-similar pool entries; ties go
/// to the lower (documentary, sentence) pair.
std::vector<CandidateSet> topk_candidates(std::span<const TopicMixture> lecture,
                                          std::span<const IndexedMixture> pool, std::size_t k = 10);

/// Ids of the m documentaries whose document-level mixtures are closest to
/// the lecture folded into the document-level model.
std::vector<std::size_t> two_stage_subset(const TopicModel& doc_model, std::span<const std::string> lecture_tokens,
                                          std::span<const TopicMixture> documentary_mixtures, std::size_t m = 5);

/// Versioned text dump with a trailing SHA-256 over everything before it.
std::string save_model(const TopicModel& model);
TopicModel load_model(std::string_view dump);

/// "documentary sentence theta_0 ... theta_{K-1}" per line.
std::string to_mixture_records(std::span<const IndexedMixture> mixtures);

}  // namespace montage
