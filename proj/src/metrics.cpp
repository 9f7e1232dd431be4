#include "formeval/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>

namespace formeval {

namespace {

void require_binary(const std::vector<int>& v, const char* name) {
    for (int b : v) {
        if (b != 0 && b != 1) throw InputError(std::string(name) + " must contain only 0/1");
    }
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

} // namespace

void RunningStats::add(double value) {
    ++n_;
    const double delta = value - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (value - mean_);
}

double RunningStats::mean() const {
    if (n_ == 0) throw InputError("RunningStats: no values");
    return mean_;
}

double RunningStats::std_pop() const {
    if (n_ == 0) throw InputError("RunningStats: no values");
    return std::sqrt(m2_ / static_cast<double>(n_));
}

ClassificationReport classification_report(const std::vector<int>& pred,
                                           const std::vector<int>& gold) {
    if (pred.size() != gold.size()) throw InputError("classification_report: length mismatch");
    if (pred.empty()) throw InputError("classification_report: empty input");
    require_binary(pred, "pred");
    require_binary(gold, "gold");

    ClassificationReport r;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == 1 && gold[i] == 1) ++r.counts.tp;
        else if (pred[i] == 1 && gold[i] == 0) ++r.counts.fp;
        else if (pred[i] == 0 && gold[i] == 1) ++r.counts.fn;
        else ++r.counts.tn;
    }
    const auto& c = r.counts;
    const double n = static_cast<double>(c.total());
    r.accuracy = static_cast<double>(c.tp + c.tn) / n;
    if (c.tp + c.fp > 0) r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    if (c.tp + c.fn > 0) r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (r.precision && r.recall && (*r.precision + *r.recall) > 0.0) {
        r.f1 = 2.0 * *r.precision * *r.recall / (*r.precision + *r.recall);
    }
    // kappa = (p_o - p_e)/(1 - p_e); the expected-agreement check is done in
    // integer arithmetic so p_e == 1 is detected exactly.
    const long pe_num = (c.tp + c.fp) * (c.tp + c.fn) + (c.fn + c.tn) * (c.fp + c.tn);
    const long pe_den = c.total() * c.total();
    if (pe_num != pe_den) {
        const double po = r.accuracy;
        const double pe = static_cast<double>(pe_num) / static_cast<double>(pe_den);
        r.kappa = (po - pe) / (1.0 - pe);
    }
    return r;
}

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw InputError("pearson: length mismatch");
    if (x.size() < 2) throw InputError("pearson: need at least two samples");
    const double mx = mean_of(x);
    const double my = mean_of(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

std::optional<double> nrmse(const std::vector<double>& pred, const std::vector<double>& target) {
    if (pred.size() != target.size()) throw InputError("nrmse: length mismatch");
    if (pred.empty()) throw InputError("nrmse: empty input");
    const double mt = mean_of(target);
    if (mt == 0.0) return std::nullopt;
    double sq = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        sq += d * d;
    }
    return std::sqrt(sq / static_cast<double>(pred.size())) / mt;
}

CorrelationMatrix correlation_matrix(const std::vector<std::string>& names,
                                     const std::vector<std::vector<double>>& columns) {
    if (names.size() != columns.size()) throw InputError("correlation_matrix: name/column mismatch");
    if (columns.empty()) throw InputError("correlation_matrix: no columns");
    const std::size_t len = columns.front().size();
    for (const auto& col : columns) {
        if (col.size() != len) throw InputError("correlation_matrix: ragged columns");
    }

    CorrelationMatrix m;
    m.names = names;
    m.values.assign(columns.size(), std::vector<std::optional<double>>(columns.size()));
    for (std::size_t i = 0; i < columns.size(); ++i) {
        m.values[i][i] = 1.0;
        for (std::size_t j = i + 1; j < columns.size(); ++j) {
            auto r = pearson(columns[i], columns[j]);
            m.values[i][j] = r;
            m.values[j][i] = r;
        }
    }
    return m;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    };
    for (unsigned char c : text) {
        if (c < 0x80 && std::isspace(c)) {
            flush();
            continue;
        }
        const bool wordish = c >= 0x80 || std::isalnum(c);
        if (wordish) {
            current.push_back(static_cast<char>(c));
        } else {
            flush();
            tokens.emplace_back(1, static_cast<char>(c));
        }
    }
    flush();
    return tokens;
}

namespace {

std::map<std::vector<std::string>, long> ngram_counts(const std::vector<std::string>& tokens,
                                                      std::size_t n) {
    std::map<std::vector<std::string>, long> counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)] += 1;
    }
    return counts;
}

long clipped_matches(const std::map<std::vector<std::string>, long>& cand,
                     const std::map<std::vector<std::string>, long>& ref) {
    long matches = 0;
    for (const auto& [gram, count] : cand) {
        auto it = ref.find(gram);
        if (it != ref.end()) matches += std::min(count, it->second);
    }
    return matches;
}

} // namespace

double bleu(const std::string& candidate, const std::string& reference) {
    const auto cand = tokenize(candidate);
    const auto ref = tokenize(reference);
    if (cand.empty() || ref.empty()) return 0.0;

    double log_sum = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
        const auto cc = ngram_counts(cand, n);
        const auto rc = ngram_counts(ref, n);
        long total = 0;
        for (const auto& [gram, count] : cc) total += count;
        const long matches = clipped_matches(cc, rc);
        double p;
        if (n == 1) {
            p = matches > 0 ? static_cast<double>(matches) / static_cast<double>(total)
                            : 1.0 / static_cast<double>(total + 1);
        } else {
            p = static_cast<double>(matches + 1) / static_cast<double>(total + 1);
        }
        log_sum += std::log(p);
    }
    const double c = static_cast<double>(cand.size());
    const double r = static_cast<double>(ref.size());
    const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
    return bp * std::exp(log_sum / 4.0);
}

double chrf(const std::string& candidate, const std::string& reference) {
    auto strip_ws = [](const std::string& s) {
        std::string out;
        out.reserve(s.size());
        for (unsigned char c : s) {
            if (c >= 0x80 || !std::isspace(c)) out.push_back(static_cast<char>(c));
        }
        return out;
    };
    const std::string cand = strip_ws(candidate);
    const std::string ref = strip_ws(reference);
    if (cand.empty() && ref.empty()) return 1.0;
    if (cand.empty() || ref.empty()) return 0.0;

    constexpr double beta2 = 4.0; // beta = 2
    double f_sum = 0.0;
    int orders = 0;
    for (std::size_t n = 1; n <= 6; ++n) {
        std::map<std::string, long> cc, rc;
        for (std::size_t i = 0; i + n <= cand.size(); ++i) cc[cand.substr(i, n)] += 1;
        for (std::size_t i = 0; i + n <= ref.size(); ++i) rc[ref.substr(i, n)] += 1;
        long c_total = cand.size() >= n ? static_cast<long>(cand.size() - n + 1) : 0;
        long r_total = ref.size() >= n ? static_cast<long>(ref.size() - n + 1) : 0;
        if (c_total == 0 && r_total == 0) continue; // order absent from both sides
        ++orders;
        long matches = 0;
        for (const auto& [gram, count] : cc) {
            auto it = rc.find(gram);
            if (it != rc.end()) matches += std::min(count, it->second);
        }
        if (matches == 0 || c_total == 0 || r_total == 0) continue; // F contribution is 0
        const double p = static_cast<double>(matches) / static_cast<double>(c_total);
        const double r = static_cast<double>(matches) / static_cast<double>(r_total);
        f_sum += (1.0 + beta2) * p * r / (beta2 * p + r);
    }
    return orders > 0 ? f_sum / static_cast<double>(orders) : 0.0;
}

double ruby_sts(const std::string& candidate, const std::string& reference) {
    const auto a = tokenize(candidate);
    const auto b = tokenize(reference);
    if (a.empty() && b.empty()) return 1.0;

    // Levenshtein over tokens, rolling single row.
    std::vector<long> row(b.size() + 1);
    std::iota(row.begin(), row.end(), 0L);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        long diag = row[0];
        row[0] = static_cast<long>(i);
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const long subst = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
            diag = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, subst});
        }
    }
    const double dist = static_cast<double>(row[b.size()]);
    const double denom = static_cast<double>(std::max(a.size(), b.size()));
    return 1.0 - dist / denom;
}

} // namespace formeval
