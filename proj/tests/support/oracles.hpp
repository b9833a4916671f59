#pragma once

// Brute-force reference implementations used by the unit and acceptance
// tests. They share no code with the library beyond plain data types.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

/// Inverse by Gauss-Jordan elimination with partial pivoting.
Matrix invert(Matrix a);

/// Stationary distribution of a row-stochastic matrix, from the linear system
/// pi (P - I) = 0 with sum(pi) = 1.
std::vector<double> stationary(const Matrix& p);

struct Ranking {
  std::vector<std::size_t> order;
  std::vector<double> scores;
};

/// Absorbing-walk diversity ranking: the first item maximizes the stationary
/// distribution, later items the averaged expected visits computed from the
/// explicit fundamental matrix. Lowest index wins (relative 1e-12) ties.
Ranking grasshopper(const Matrix& weights, double lambda, std::vector<double> prior, std::size_t k);

/// Whitespace tokens, lowercased (ASCII).
std::vector<std::string> tokens(const std::string& text);

/// Membership-count centrality over TF-IDF cosine, computed pair by pair.
/// Empty texts are left out of the ranking.
Ranking support_sets(const std::vector<std::string>& texts, double threshold);

double cosine(const std::vector<double>& a, const std::vector<double>& b);

struct Scored {
  std::size_t documentary;
  std::size_t sentence;
  double score;
};

/// Full sort of every pool entry by (score desc, documentary, sentence), first k.
std::vector<Scored> topk(const std::vector<double>& query, const std::vector<std::vector<double>>& pool_mixtures,
                         const std::vector<std::pair<std::size_t, std::size_t>>& pool_keys, std::size_t k);

/// Fraction of labels matched by the best of the two label assignments.
double best_permutation_agreement(const std::vector<int>& truth, const std::vector<int>& predicted);

/// Alphanumeric runs (ASCII alnum plus Latin-1 and Latin Extended-A/B
/// letters), lowercased for ASCII, in order.
std::vector<std::string> content_tokens(const std::string& utf8);

/// Tribute fill rule on non-overlapping clips: walk in rank order, admit
/// qualifying clips until the song is covered, trim the last one at its end,
/// then order by start time. Returns (start, end) pairs.
std::vector<std::pair<std::int64_t, std::int64_t>> tribute_fill(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& spans_in_rank_order,
    const std::vector<bool>& qualifies, std::int64_t song_ms);

/// Uniform double in [0, 1) from a 64-bit engine.
inline double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace oracle
