#include "montage/topic_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <boost/math/special_functions/digamma.hpp>

#include "montage/error.hpp"
#include "montage/hash.hpp"
#include "montage/text.hpp"

namespace montage {

namespace {

using boost::math::digamma;

constexpr auto kStopwords = std::to_array<std::string_view>({
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are", "as", "at", "be",
    "because", "been", "before", "being", "below", "between", "both", "but", "by", "can", "could", "did", "do",
    "does", "doing", "don't", "down", "during", "each", "few", "for", "from", "further", "had", "has", "have",
    "having", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how", "i", "i'm", "if", "in",
    "into", "is", "it", "it's", "its", "itself", "just", "me", "more", "most", "my", "myself", "no", "nor", "not",
    "now", "of", "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own",
    "same", "she", "should", "so", "some", "such", "than", "that", "that's", "the", "their", "theirs", "them",
    "themselves", "then", "there", "these", "they", "this", "those", "through", "to", "too", "under", "until",
    "up", "very", "was", "we", "were", "what", "when", "where", "which", "while", "who", "whom", "why", "will",
    "with", "would", "you", "your"});

struct BagOfWords {
  std::vector<std::size_t> ids;
  std::vector<double> counts;
  double total = 0.0;
};

BagOfWords to_bag(const TopicModel& model, std::span<const std::string> tokens) {
  std::map<std::size_t, double> counts;
  for (const auto& tok : tokens) {
    if (auto id = model.term_id(tok)) counts[*id] += 1.0;
  }
  BagOfWords bag;
  for (const auto& [id, c] : counts) {
    bag.ids.push_back(id);
    bag.counts.push_back(c);
    bag.total += c;
  }
  return bag;
}

// Variational state for one document. phi is N x K, row-major.
struct DocState {
  std::vector<double> gamma;
  std::vector<double> phi;
};

double log_sum_exp(std::span<const double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

// One coordinate-ascent sweep: phi given gamma, then gamma given phi.
void update_document(const BagOfWords& doc, std::span<const double> log_beta, std::size_t K, std::size_t V,
                     double alpha, DocState& st) {
  std::vector<double> dig(K);
  for (std::size_t k = 0; k < K; ++k) dig[k] = digamma(st.gamma[k]);
  std::vector<double> row(K);
  std::fill(st.gamma.begin(), st.gamma.end(), alpha);
  for (std::size_t n = 0; n < doc.ids.size(); ++n) {
    for (std::size_t k = 0; k < K; ++k) row[k] = dig[k] + log_beta[k * V + doc.ids[n]];
    const double norm = log_sum_exp(row);
    for (std::size_t k = 0; k < K; ++k) {
      const double p = std::exp(row[k] - norm);
      st.phi[n * K + k] = p;
      st.gamma[k] += doc.counts[n] * p;
    }
  }
}

// Per-document evidence lower bound at (gamma, phi) for the given topics.
double document_bound(const BagOfWords& doc, std::span<const double> log_beta, std::size_t K, std::size_t V,
                      double alpha, const DocState& st) {
  double gamma_sum = 0.0;
  for (double g : st.gamma) gamma_sum += g;
  const double dig_sum = digamma(gamma_sum);
  double bound = std::lgamma(alpha * K) - K * std::lgamma(alpha) - std::lgamma(gamma_sum);
  for (std::size_t k = 0; k < K; ++k) {
    const double e_log_theta = digamma(st.gamma[k]) - dig_sum;
    bound += (alpha - 1.0) * e_log_theta + std::lgamma(st.gamma[k]) - (st.gamma[k] - 1.0) * e_log_theta;
    for (std::size_t n = 0; n < doc.ids.size(); ++n) {
      const double p = st.phi[n * K + k];
      if (p > 0.0) bound += doc.counts[n] * p * (e_log_theta - std::log(p) + log_beta[k * V + doc.ids[n]]);
    }
  }
  return bound;
}

// Runs sweeps until the relative bound change drops below tol. Returns the
// bound at the final state.
double fit_document(const BagOfWords& doc, std::span<const double> log_beta, std::size_t K, std::size_t V,
                    double alpha, double tol, std::size_t max_iters, DocState& st) {
  st.phi.assign(doc.ids.size() * K, 0.0);
  double previous = 0.0;
  double bound = 0.0;
  for (std::size_t it = 0; it < std::max<std::size_t>(max_iters, 1); ++it) {
    update_document(doc, log_beta, K, V, alpha, st);
    bound = document_bound(doc, log_beta, K, V, alpha, st);
    if (it > 0 && std::abs((previous - bound) / previous) < tol) break;
    previous = bound;
  }
  return bound;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

TopicModel::TopicModel(std::vector<std::string> vocabulary, std::size_t topics, std::vector<double> topic_word,
                       double alpha, double eta)
    : vocabulary_(std::move(vocabulary)), topics_(topics), topic_word_(std::move(topic_word)), alpha_(alpha),
      eta_(eta) {
  if (topic_word_.size() != topics_ * vocabulary_.size()) {
    throw Error(ErrorCode::InvalidArgument, "topic_word size does not match K x V");
  }
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) ids_.emplace(vocabulary_[i], i);
}

std::optional<std::size_t> TopicModel::term_id(std::string_view term) const {
  const auto it = ids_.find(std::string(term));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

bool is_stopword(std::string_view token) {
  return std::find(kStopwords.begin(), kStopwords.end(), token) != kStopwords.end();
}

std::vector<std::string> topic_tokens(std::string_view text_in) {
  auto tokens = text::split_whitespace(text::ascii_lower(text_in));
  std::erase_if(tokens, [](const std::string& t) { return is_stopword(t); });
  return tokens;
}

TopicModel train_lda(std::span<const std::vector<std::string>> docs, const LdaConfig& config) {
  const std::size_t K = config.topics;
  const double alpha = config.effective_alpha();
  if (K == 0) throw Error(ErrorCode::InvalidArgument, "LDA needs at least one topic");
  if (!(alpha > 0.0) || !(config.eta > 0.0)) throw Error(ErrorCode::InvalidArgument, "LDA priors must be > 0");

  std::map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    std::vector<std::string> uniq(doc.begin(), doc.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (auto& t : uniq) ++df[t];
  }
  std::vector<std::string> vocab;
  for (const auto& [term, count] : df) {
    if (count >= config.min_df) vocab.push_back(term);
  }
  if (vocab.empty()) {
    for (const auto& [term, _] : df) vocab.push_back(term);
  }
  if (vocab.empty()) throw Error(ErrorCode::EmptyVocabulary, "no tokens in training documents");
  const std::size_t V = vocab.size();

  // Seeded initialization; 53-bit doubles from the raw engine output keep it
  // identical across standard libraries.
  std::mt19937_64 rng(config.seed);
  std::vector<double> beta(K * V);
  for (std::size_t k = 0; k < K; ++k) {
    double row = 0.0;
    for (std::size_t w = 0; w < V; ++w) {
      beta[k * V + w] = 1.0 / static_cast<double>(V) + static_cast<double>(rng() >> 11) * 0x1.0p-53;
      row += beta[k * V + w];
    }
    for (std::size_t w = 0; w < V; ++w) beta[k * V + w] /= row;
  }
  TopicModel model(vocab, K, beta, alpha, config.eta);

  std::vector<BagOfWords> bags;
  for (const auto& doc : docs) {
    auto bag = to_bag(model, doc);
    if (!bag.ids.empty()) bags.push_back(std::move(bag));
  }
  std::vector<DocState> states(bags.size());
  for (std::size_t d = 0; d < bags.size(); ++d) states[d].gamma.assign(K, alpha + bags[d].total / K);

  std::vector<double> log_beta(K * V);
  std::vector<double> suff(K * V);
  std::vector<double> elbo;
  for (std::size_t iter = 0; iter < config.em_iters; ++iter) {
    for (std::size_t i = 0; i < K * V; ++i) log_beta[i] = std::log(beta[i]);

    // E-step, warm-started from the previous gamma so the bound never drops.
    std::fill(suff.begin(), suff.end(), 0.0);
    double bound = 0.0;
    for (std::size_t d = 0; d < bags.size(); ++d) {
      bound += fit_document(bags[d], log_beta, K, V, alpha, config.inference_tol, config.inference_max_iters,
                            states[d]);
      for (std::size_t n = 0; n < bags[d].ids.size(); ++n) {
        for (std::size_t k = 0; k < K; ++k) suff[k * V + bags[d].ids[n]] += bags[d].counts[n] * states[d].phi[n * K + k];
      }
    }
    // Dirichlet(eta) smoothing enters the objective as a log-prior on beta.
    for (double lb : log_beta) bound += config.eta * lb;
    elbo.push_back(bound);

    // M-step: smoothed topic-word estimates.
    for (std::size_t k = 0; k < K; ++k) {
      double row = 0.0;
      for (std::size_t w = 0; w < V; ++w) row += suff[k * V + w] + config.eta;
      for (std::size_t w = 0; w < V; ++w) beta[k * V + w] = (suff[k * V + w] + config.eta) / row;
    }

    if (elbo.size() >= 2) {
      const double prev = elbo[elbo.size() - 2];
      if (std::abs((bound - prev) / prev) < config.em_tol) break;
    }
  }

  TopicModel trained(std::move(vocab), K, std::move(beta), alpha, config.eta);
  trained.elbo_trace = std::move(elbo);
  return trained;
}

TopicMixture infer_mixture(const TopicModel& model, std::span<const std::string> tokens, double tol,
                           std::size_t max_iters) {
  const std::size_t K = model.topics();
  TopicMixture mixture;
  const BagOfWords bag = to_bag(model, tokens);
  if (bag.ids.empty()) {
    mixture.theta.assign(K, 1.0 / static_cast<double>(K));
    mixture.out_of_vocabulary = true;
    return mixture;
  }

  // Re-index the present words 0..n-1 so log beta is K x n, not K x V.
  BagOfWords local = bag;
  const std::size_t n = bag.ids.size();
  std::vector<double> log_beta(K * n);
  for (std::size_t i = 0; i < n; ++i) {
    local.ids[i] = i;
    for (std::size_t k = 0; k < K; ++k) log_beta[k * n + i] = std::log(model.prob(k, bag.ids[i]));
  }
  DocState st;
  st.gamma.assign(K, model.alpha() + bag.total / K);
  fit_document(local, log_beta, K, n, model.alpha(), tol, max_iters, st);

  const double sum = std::accumulate(st.gamma.begin(), st.gamma.end(), 0.0);
  mixture.theta.resize(K);
  for (std::size_t k = 0; k < K; ++k) mixture.theta[k] = st.gamma[k] / sum;
  return mixture;
}

double mixture_cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "mixture lengths differ");
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<CandidateSet> topk_candidates(std::span<const TopicMixture> lecture, std::span<const IndexedMixture> pool,
                                          std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "top-k needs k >= 1");
  const auto better = [](const Candidate& x, const Candidate& y) {
    if (x.score != y.score) return x.score > y.score;
    if (x.documentary != y.documentary) return x.documentary < y.documentary;
    return x.sentence < y.sentence;
  };
  std::vector<CandidateSet> out;
  out.reserve(lecture.size());
  std::vector<Candidate> scored;
  for (std::size_t i = 0; i < lecture.size(); ++i) {
    scored.clear();
    for (const auto& entry : pool) {
      scored.push_back({entry.documentary, entry.sentence, mixture_cosine(lecture[i].theta, entry.mixture.theta)});
    }
    const std::size_t take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), better);
    scored.resize(take);
    // Duplicate pool keys collapse to their best-scoring entry.
    std::vector<Candidate> unique;
    for (const auto& c : scored) {
      const bool seen = std::any_of(unique.begin(), unique.end(), [&](const Candidate& u) {
        return u.documentary == c.documentary && u.sentence == c.sentence;
      });
      if (!seen) unique.push_back(c);
    }
    out.push_back({i, std::move(unique)});
  }
  return out;
}

std::vector<std::size_t> two_stage_subset(const TopicModel& doc_model, std::span<const std::string> lecture_tokens,
                                          std::span<const TopicMixture> documentary_mixtures, std::size_t m) {
  if (m == 0) throw Error(ErrorCode::InvalidSubsetSize, "documentary subset size must be >= 1");
  const TopicMixture lecture = infer_mixture(doc_model, lecture_tokens);
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t d = 0; d < documentary_mixtures.size(); ++d) {
    scored.emplace_back(mixture_cosine(lecture.theta, documentary_mixtures[d].theta), d);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < std::min(m, scored.size()); ++i) ids.push_back(scored[i].second);
  return ids;
}

std::string save_model(const TopicModel& model) {
  std::string body = "montage-lda 1\n";
  body += "topics " + std::to_string(model.topics()) + "\n";
  body += "vocab " + std::to_string(model.vocab_size()) + "\n";
  body += "alpha " + format_double(model.alpha()) + "\n";
  body += "eta " + format_double(model.eta()) + "\n";
  for (const auto& term : model.vocabulary()) body += "term " + term + "\n";
  for (std::size_t k = 0; k < model.topics(); ++k) {
    body += "row";
    for (double p : model.topic_row(k)) body += " " + format_double(p);
    body += "\n";
  }
  return body + "sha256 " + sha256_hex(body) + "\n";
}

TopicModel load_model(std::string_view dump) {
  const auto marker = dump.rfind("sha256 ");
  if (marker == std::string_view::npos) throw Error(ErrorCode::CorruptModel, "missing checksum");
  const auto body = dump.substr(0, marker);
  if (text::trim(dump.substr(marker + 7)) != sha256_hex(body)) {
    throw Error(ErrorCode::CorruptModel, "checksum mismatch");
  }

  std::istringstream in{std::string(body)};
  std::string tag;
  int version = 0;
  std::size_t K = 0;
  std::size_t V = 0;
  double alpha = 0.0;
  double eta = 0.0;
  in >> tag >> version;
  if (tag != "montage-lda" || version != 1) throw Error(ErrorCode::CorruptModel, "unsupported model header");
  std::string k_tag, v_tag, a_tag, e_tag;
  in >> k_tag >> K >> v_tag >> V >> a_tag >> alpha >> e_tag >> eta;
  if (!in || k_tag != "topics" || v_tag != "vocab" || a_tag != "alpha" || e_tag != "eta") {
    throw Error(ErrorCode::CorruptModel, "malformed model preamble");
  }
  std::vector<std::string> vocab(V);
  for (auto& term : vocab) {
    in >> tag >> term;
    if (tag != "term") throw Error(ErrorCode::CorruptModel, "malformed vocabulary");
  }
  std::vector<double> beta(K * V);
  for (std::size_t k = 0; k < K; ++k) {
    in >> tag;
    if (tag != "row") throw Error(ErrorCode::CorruptModel, "malformed topic row");
    for (std::size_t w = 0; w < V; ++w) in >> beta[k * V + w];
  }
  if (!in) throw Error(ErrorCode::CorruptModel, "truncated model");
  return TopicModel(std::move(vocab), K, std::move(beta), alpha, eta);
}

std::string to_mixture_records(std::span<const IndexedMixture> mixtures) {
  std::string out;
  for (const auto& m : mixtures) {
    out += std::to_string(m.documentary) + " " + std::to_string(m.sentence);
    for (double t : m.mixture.theta) out += " " + format_double(t);
    out += "\n";
  }
  return out;
}

}  // namespace montage
