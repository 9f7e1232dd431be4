#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "formeval/errors.hpp"

namespace formeval {

/// 2x2 confusion counts with positive class = 1.
struct ClassificationCounts {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    long tn = 0;

    long total() const { return tp + fp + fn + tn; }
};

/// Standard binary classification metrics plus Cohen's kappa.
/// Statistics whose denominator vanishes are reported as empty optionals
/// (flagged degenerate), never as silent zeros.
struct ClassificationReport {
    double accuracy = 0.0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    std::optional<double> kappa; // degenerate when expected agreement is 1
    ClassificationCounts counts;
};

/// Pearson correlation / NRMSE between a predicted score vector and a
/// target, with the sample size that produced them.
struct ScoreAgreement {
    std::optional<double> correlation;
    std::optional<double> nrmse;
    std::size_t n = 0;
};

/// Pairwise Pearson correlations between named columns. Degenerate pairs
/// (zero variance) are empty; the diagonal is exactly 1.
struct CorrelationMatrix {
    std::vector<std::string> names;
    std::vector<std::vector<std::optional<double>>> values;
};

/// Streaming mean and population standard deviation (Welford). A constant
/// input sequence yields a standard deviation of exactly 0.
class RunningStats {
public:
    void add(double value);

    std::size_t count() const { return n_; }
    /// Throws InputError when no values were added.
    double mean() const;
    /// Population standard deviation, sqrt(M2/n). Throws when empty.
    double std_pop() const;

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Confusion counts, accuracy, precision/recall/F1 and Cohen's kappa of
/// `pred` against `gold` (both 0/1 vectors of equal, nonzero length).
ClassificationReport classification_report(const std::vector<int>& pred,
                                           const std::vector<int>& gold);

/// Sample Pearson correlation of two equal-length vectors (length >= 2);
/// empty when either vector has zero variance.
std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);

/// sqrt(mean((pred-target)^2)) / mean(target); empty when mean(target) == 0.
std::optional<double> nrmse(const std::vector<double>& pred, const std::vector<double>& target);

/// Pairwise pearson over equal-length named columns.
CorrelationMatrix correlation_matrix(const std::vector<std::string>& names,
                                     const std::vector<std::vector<double>>& columns);

/// Token stream shared by bleu and ruby_sts: maximal runs of alphanumeric
/// bytes (bytes >= 0x80 count as alphanumeric so UTF-8 sequences stay
/// whole) plus single punctuation/symbol characters; whitespace separates.
std::vector<std::string> tokenize(const std::string& text);

/// Sentence-level BLEU with n-gram orders 1..4, clipped counts, brevity
/// penalty, and pinned smoothing: orders 2..4 use add-one smoothing on both
/// counts, and the unigram precision falls back to 1/(count+1) when no
/// unigram matches. Identical token streams score exactly 1.0; an empty
/// candidate or empty reference scores 0.0.
double bleu(const std::string& candidate, const std::string& reference);

/// Character n-gram F-score, n = 1..6, beta = 2, uniform averaging over
/// orders present in either string; whitespace is removed before n-gram
/// extraction. Both strings empty -> 1.0, exactly one empty -> 0.0.
double chrf(const std::string& candidate, const std::string& reference);

/// String-similarity fallback of the RUBY metric:
/// 1 - TokenEditDistance / max(|candidate tokens|, |reference tokens|),
/// Levenshtein over the bleu token stream. Both empty -> 1.0.
double ruby_sts(const std::string& candidate, const std::string& reference);

} // namespace formeval
