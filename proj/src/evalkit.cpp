#include "ragstress/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "ragstress/errors.hpp"
#include "ragstress/text.hpp"

namespace ragstress {

namespace {

bool is_article(std::string_view token) {
    return token == "a" || token == "an" || token == "the";
}

std::vector<std::string> split_on_spaces(std::string_view s) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && s[i] == ' ') ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ') ++j;
        if (j > i) tokens.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return tokens;
}

double f1_pair(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
    if (pred.empty() && gold.empty()) return 1.0;
    if (pred.empty() || gold.empty()) return 0.0;
    std::unordered_map<std::string_view, std::int64_t> budget;
    for (const std::string& t : gold) ++budget[t];
    std::int64_t overlap = 0;
    for (const std::string& t : pred) {
        auto it = budget.find(t);
        if (it != budget.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    const double precision = static_cast<double>(overlap) / static_cast<double>(pred.size());
    const double recall = static_cast<double>(overlap) / static_cast<double>(gold.size());
    return 2.0 * precision * recall / (precision + recall);
}

/// Continued fraction for the incomplete beta (modified Lentz's method).
double beta_cont_frac(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

std::string normalize_answer(std::string_view s) {
    // Lowercase and delete punctuation first, then drop article tokens from
    // what remains; matches the order of the standard QA scoring scripts.
    std::string cleaned;
    cleaned.reserve(s.size());
    for (char ch : s) {
        const unsigned char c = static_cast<unsigned char>(ch);
        if (is_ascii_punct(c)) continue;
        cleaned.push_back(ascii_lower(c));
    }
    std::string out;
    std::size_t i = 0;
    while (i < cleaned.size()) {
        while (i < cleaned.size() && is_ascii_space(static_cast<unsigned char>(cleaned[i]))) ++i;
        std::size_t j = i;
        while (j < cleaned.size() && !is_ascii_space(static_cast<unsigned char>(cleaned[j]))) ++j;
        if (j > i) {
            const std::string_view token = std::string_view(cleaned).substr(i, j - i);
            if (!is_article(token)) {
                if (!out.empty()) out.push_back(' ');
                out.append(token);
            }
        }
        i = j;
    }
    return out;
}

double exact_match(std::string_view prediction, const std::vector<std::string>& golds) {
    if (golds.empty()) {
        throw InputError("exact_match: gold answer list is empty");
    }
    const std::string pred = normalize_answer(prediction);
    for (const std::string& g : golds) {
        if (pred == normalize_answer(g)) return 1.0;
    }
    return 0.0;
}

double token_f1(std::string_view prediction, const std::vector<std::string>& golds) {
    if (golds.empty()) {
        throw InputError("token_f1: gold answer list is empty");
    }
    const std::vector<std::string> pred = split_on_spaces(normalize_answer(prediction));
    double best = 0.0;
    for (const std::string& g : golds) {
        best = std::max(best, f1_pair(pred, split_on_spaces(normalize_answer(g))));
    }
    return best;
}

bool contains_normalized(std::string_view haystack, std::string_view needle) {
    const std::string n = normalize_answer(needle);
    if (n.empty()) return false;
    return normalize_answer(haystack).find(n) != std::string::npos;
}

EvalOutcome score_answers(const std::vector<std::string>& query_ids,
                          const std::vector<std::string>& predictions,
                          const std::vector<std::vector<std::string>>& golds) {
    if (query_ids.size() != predictions.size() || query_ids.size() != golds.size()) {
        throw ArityError("score_answers: ids/predictions/golds have lengths " +
                         std::to_string(query_ids.size()) + "/" +
                         std::to_string(predictions.size()) + "/" +
                         std::to_string(golds.size()));
    }
    EvalOutcome outcome;
    outcome.per_query.reserve(query_ids.size());
    double em_sum = 0.0;
    double f1_sum = 0.0;
    for (std::size_t i = 0; i < query_ids.size(); ++i) {
        QueryScore score;
        score.query_id = query_ids[i];
        score.em = exact_match(predictions[i], golds[i]);
        score.f1 = token_f1(predictions[i], golds[i]);
        em_sum += score.em;
        f1_sum += score.f1;
        outcome.per_query.push_back(std::move(score));
    }
    if (!outcome.per_query.empty()) {
        outcome.mean_em = em_sum / static_cast<double>(outcome.per_query.size());
        outcome.mean_f1 = f1_sum / static_cast<double>(outcome.per_query.size());
    }
    return outcome;
}

DetectionMetrics dd_metrics(const std::vector<std::vector<AssessmentLabel>>& predicted,
                            const std::vector<std::vector<AssessmentLabel>>& gold) {
    if (predicted.size() != gold.size()) {
        throw ArityError("dd_metrics: " + std::to_string(predicted.size()) +
                         " prediction lists vs " + std::to_string(gold.size()) +
                         " gold lists");
    }
    DetectionMetrics metrics;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i].size() != gold[i].size()) {
            throw ArityError("dd_metrics: list " + std::to_string(i) + " has " +
                             std::to_string(predicted[i].size()) + " predictions vs " +
                             std::to_string(gold[i].size()) + " gold labels");
        }
        for (std::size_t j = 0; j < predicted[i].size(); ++j) {
            const int g = static_cast<int>(gold[i][j]) - 1;
            const int p = static_cast<int>(predicted[i][j]) - 1;
            ++metrics.confusion[g][p];
            ++metrics.total;
        }
    }
    std::int64_t diagonal = 0;
    for (int g = 0; g < 4; ++g) {
        std::int64_t row = 0;
        for (int p = 0; p < 4; ++p) row += metrics.confusion[g][p];
        diagonal += metrics.confusion[g][g];
        metrics.per_class_accuracy[g] =
            row > 0 ? static_cast<double>(metrics.confusion[g][g]) / static_cast<double>(row)
                    : 0.0;
    }
    metrics.overall_accuracy =
        metrics.total > 0 ? static_cast<double>(diagonal) / static_cast<double>(metrics.total)
                          : 0.0;
    return metrics;
}

SignificanceResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw InputError("paired_t_test: samples have lengths " + std::to_string(a.size()) +
                         " and " + std::to_string(b.size()));
    }
    if (a.size() < 2) {
        throw InputError("paired_t_test: need at least 2 pairs, got " +
                         std::to_string(a.size()));
    }
    const std::size_t n = a.size();
    std::vector<double> d(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = a[i] - b[i];
        sum += d[i];
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double di : d) ss += (di - mean) * (di - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));

    SignificanceResult result;
    result.df = static_cast<int>(n) - 1;
    if (sd == 0.0) {
        if (mean == 0.0) {
            result.t_statistic = 0.0;
            result.p_value = 1.0;
        } else {
            result.t_statistic = mean > 0.0 ? std::numeric_limits<double>::infinity()
                                            : -std::numeric_limits<double>::infinity();
            result.p_value = 0.0;
        }
    } else {
        result.t_statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
        result.p_value = student_t_two_tailed_p(result.t_statistic, result.df);
    }
    result.significant_at_005 = result.p_value < 0.05;
    return result;
}

double reg_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw InputError("reg_incomplete_beta: parameters must be positive");
    }
    if (!(x >= 0.0) || !(x <= 1.0)) {
        throw InputError("reg_incomplete_beta: x must lie in [0, 1]");
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    // Use the expansion that converges fastest, mirroring it about x when
    // needed.
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cont_frac(a, b, x) / a;
    }
    return 1.0 - front * beta_cont_frac(b, a, 1.0 - x) / b;
}

double student_t_two_tailed_p(double t, int df) {
    if (df < 1) {
        throw InputError("student_t_two_tailed_p: df must be >= 1");
    }
    if (std::isnan(t)) {
        throw InputError("student_t_two_tailed_p: t is NaN");
    }
    if (std::isinf(t)) return 0.0;
    if (t == 0.0) return 1.0;
    const double v = static_cast<double>(df);
    return reg_incomplete_beta(v / 2.0, 0.5, v / (v + t * t));
}

}  // namespace ragstress
